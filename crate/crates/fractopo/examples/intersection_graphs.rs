//! Intersection graphs, the refinement operation, and DOT export.
//!
//! ```bash
//! cargo run --example intersection_graphs
//! ```

use fractopo::graph::{build_graph, is_tree, level_one_template, natural_gluing, refine_graph};
use fractopo::intersection::fi_report;
use fractopo::systems;

fn main() -> fractopo::Result<()> {
    let vicsek = systems::vicsek();
    let fi = fi_report(&vicsek, 1e-7)?;

    let g1 = build_graph(&vicsek, 1, &fi)?;
    println!(
        "vicsek level 1: {} pieces, {} points, {} edges, tree = {}",
        g1.white_count(),
        g1.black_count(),
        g1.edge_count(),
        is_tree(&g1).is_tree()
    );
    print!("{}", g1.to_dot("gamma1"));

    // refine every piece by its own level-1 template: the result equals
    // the directly built level-2 graph, vertex for vertex
    let mut refined = g1.clone();
    for white in g1.whites() {
        let template = level_one_template(&vicsek, &fi, white)?;
        let gluing = natural_gluing(&vicsek, &fi, &refined, white)?;
        refined = refine_graph(&refined, white, &template, &gluing)?;
    }
    let direct = build_graph(&vicsek, 2, &fi)?;
    println!(
        "level 2 by refinement == level 2 direct: {} ({} pieces, {} points)",
        refined == direct,
        direct.white_count(),
        direct.black_count()
    );

    // the gasket's level-1 graph is a 6-cycle
    let gasket = systems::gasket();
    let fi = fi_report(&gasket, 1e-7)?;
    let g = build_graph(&gasket, 1, &fi)?;
    match is_tree(&g) {
        fractopo::graph::TreeCheck::NotTree(cycle) => {
            let labels: Vec<String> = cycle.iter().map(|v| v.to_string()).collect();
            println!("gasket level 1 cycle: {}", labels.join(" - "));
        }
        other => println!("gasket level 1: {other:?}"),
    }
    Ok(())
}
