//! Certified cell covers of attractors and pieces.
//!
//! ```bash
//! cargo run --example attractor_covers
//! ```

use fractopo::attractor::{bounding_disk, cover, hausdorff_upper};
use fractopo::{systems, Word};

fn main() -> fractopo::Result<()> {
    let gasket = systems::gasket();
    let disk = bounding_disk(&gasket);
    println!("gasket invariant disk: center {}, radius {}", disk.center, disk.radius);

    for eps in [1.01, 0.51, 0.26, 0.13] {
        let cov = cover(&gasket, &Word::empty(), eps)?;
        println!(
            "eps {eps:>5}: {} leaves, {} cells of size {}, error bound {:.4}",
            cov.leaf_count(),
            cov.len(),
            cov.cell_size(),
            cov.error_bound()
        );
    }

    // covers of pieces, and a certified Hausdorff bound between them
    let cantor = systems::cantor_pair();
    let left = cover(&cantor, &Word::parse("1")?, 0.02)?;
    let right = cover(&cantor, &Word::parse("2")?, 0.02)?;
    println!(
        "cantor pieces: H(K_1, K_2) <= {:.4} (true pieces are 1/3 apart, sup side 2/3)",
        hausdorff_upper(&left, &right)?
    );

    // component counting on covers
    let vicsek = systems::vicsek();
    let cov = cover(&vicsek, &Word::empty(), 0.02)?;
    let arms = cov.components(Some((num_complex::Complex64::new(0.5, 0.5), 3.0 * cov.cell_size())));
    println!("vicsek minus its center splits into {} arms", arms.len());
    Ok(())
}
