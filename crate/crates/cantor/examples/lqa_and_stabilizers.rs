//! Identity-region witnesses and orbit points with distinct stabilizers.
//!
//! An action is locally quasi-analytic at scale when no short word acts as
//! the identity on a cylinder while moving points elsewhere. The dihedral
//! action passes; the doubling-graft action fails — its extra generator
//! vanishes on half the tree — and the witnesses compound into 2^n orbit
//! points with pairwise distinct stabilizer word sets.

use cantor::catalog::{build_example, ExampleParams};
use cantor::dynamics::{distinct_stabilizer_tree, lqa_witness_search};
use cantor::Limits;

fn main() -> cantor::Result<()> {
    let limits = Limits::default();

    let dihedral = build_example("dihedral", &ExampleParams::default())?;
    let witnesses = lqa_witness_search(&dihedral.action, 6, 12, 12, &limits)?;
    println!(
        "dihedral, radius 6, window 12: {} witnesses — every nontrivial short word moves every cylinder",
        witnesses.len(),
    );
    assert!(witnesses.is_empty());

    let entry = build_example("ex45_c", &ExampleParams::default())?;
    let witnesses = lqa_witness_search(&entry.action, 2, 9, 9, &limits)?;
    println!("\ndoubling graft, radius 2, window 9: {} witnesses, e.g.:", witnesses.len());
    for w in witnesses.iter().take(3) {
        println!(
            "  {} acts as the identity below {} for {} levels yet moves below {}",
            w.element, w.identity_region, w.window, w.active_region,
        );
    }

    // Each witness splits the orbit: points under its identity region keep
    // it as a stabilizer word, points under its active region do not. A
    // tree of such splits yields 2^n points, all pairwise distinguished.
    let report = distinct_stabilizer_tree(&entry.action, 4, 17, 2, &limits)?;
    println!(
        "\n{} orbit points at depth {} with pairwise distinct radius-{} stabilizer word sets:",
        report.points.len(),
        report.depth,
        report.radius,
    );
    for (label, point) in report.labels.iter().zip(&report.points) {
        println!("  {label}: {point}");
    }
    println!(
        "{} of {} pairs separated; verified: {}",
        report.pairs.len(),
        report.points.len() * (report.points.len() - 1) / 2,
        report.verified,
    );
    Ok(())
}
