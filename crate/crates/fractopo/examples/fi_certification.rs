//! Finite-intersection certification across the bundled systems.
//!
//! ```bash
//! cargo run --example fi_certification
//! ```

use fractopo::intersection::{fi_report, pair_expand};
use fractopo::{systems, Word};

fn main() -> fractopo::Result<()> {
    for (name, sys) in [
        ("gasket", systems::gasket()),
        ("vicsek", systems::vicsek()),
        ("segment", systems::segment()),
        ("cantor_pair", systems::cantor_pair()),
        ("overlap_pair", systems::overlap_pair()),
    ] {
        let report = fi_report(&sys, 1e-7)?;
        println!("{name}: {:?}", report.verdict);
        for ((i, j), clusters) in &report.clusters {
            for cl in clusters {
                let addresses = cl
                    .address_pair
                    .as_ref()
                    .map(|(a, b)| format!(", addresses {a} = {b}"))
                    .unwrap_or_default();
                println!(
                    "  K_{i} meets K_{j} near ({:.6}, {:.6}) within {:.1e}{addresses}",
                    cl.center.re, cl.center.im, cl.radius
                );
            }
        }
    }

    // a single pair expansion, with its certified witnesses
    let gasket = systems::gasket();
    let clusters = pair_expand(&gasket, &Word::parse("1")?, &Word::parse("2")?, 1e-6)?;
    println!(
        "\ngasket pair (1,2): {} cluster, {} surviving witness pairs",
        clusters.len(),
        clusters[0].witness_pairs.len()
    );
    Ok(())
}
