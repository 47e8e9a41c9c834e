//! Schreier graphs, canonical hashes, and the ball-agreement metric.
//!
//! The adding machine's level-l graph is a 2^l-cycle; its canonical form is
//! basepoint-aware, so rotating the basepoint changes the hash while the
//! unpointed shape stays a cycle. Pointed balls of two cycles agree out to
//! the radius where the smaller one wraps, which the graph metric reports as
//! an exact distance.

use cantor::catalog::{build_example, ExampleParams};
use cantor::graph::{schreier_level_graph, schreier_metric, stabilizer_schreier_ball, SchreierDistance};
use cantor::{BoundaryPrefix, Limits, Vertex};

fn main() -> cantor::Result<()> {
    let limits = Limits::default();
    let odo = build_example("odometer", &ExampleParams::default())?;

    let c8 = schreier_level_graph(&odo.action, 3, None, &limits)?;
    println!("level-3 orbit graph: {} vertices, {} edges", c8.vertex_labels.len(), c8.edges.len());
    println!("canonical hash: {}", c8.canonical_hash());

    // Rebasing the cycle at another vertex relabels the canonical form.
    let rebased = schreier_level_graph(&odo.action, 3, Some(&Vertex::new(&odo.index, vec![1, 0, 0])?), &limits)?;
    println!("same graph rebased at (1,0,0) hashes equal: {}", c8.canonical_hash() == rebased.canonical_hash());

    // Pointed balls of the 8-cycle and the 256-cycle agree to radius 3 and
    // differ at radius 4, where the smaller cycle closes up.
    let c256 = schreier_level_graph(&odo.action, 8, None, &limits)?;
    match schreier_metric(&c8, &c256, 6)? {
        SchreierDistance::Resolved { distance, agreement_radius } => {
            println!("distance(C8, C256) = {distance} (balls agree to radius {agreement_radius})");
        }
        SchreierDistance::IndistinguishableAtRadius { radius, bound } => {
            println!("indistinguishable to radius {radius}; distance at most {bound}");
        }
    }

    // A stabilizer-type ball around a boundary point: the radius-2 piece of
    // the orbit of the all-zeros point, truncated at depth 5.
    let x = BoundaryPrefix::new(&odo.index, vec![0; 5])?;
    let ball = stabilizer_schreier_ball(&odo.action, &x, 2, &limits)?;
    println!("\nradius-2 stabilizer ball at {x}: {} vertices", ball.vertex_labels.len());
    println!("{}", ball.to_dot());
    Ok(())
}
