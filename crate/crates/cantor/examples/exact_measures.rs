//! Exact fixed-point measures on a rapidly growing tree.
//!
//! On the index 3, 9, 27, ... the top-pair swap fixes a fraction
//! `prod (n_j - 2)/n_j` of each level — computed here twice, once by the
//! dynamic program over the tree and once from the closed form — and the
//! limiting fixed measure of a cylinder is enclosed in an interval of width
//! below one in a million, entirely in exact rational arithmetic.

use cantor::catalog::{build_example, top_pair_fix_interval, top_pair_fixed_fraction, ExampleParams};
use cantor::dynamics::fixed_vertex_count;
use cantor::measure::{cylinder_measure, ratio};
use cantor::{Limits, Vertex};
use num::{BigInt, BigRational, One};

fn main() -> cantor::Result<()> {
    let limits = Limits::default();
    let entry = build_example("thm61_b", &ExampleParams::default())?;
    let b = entry.generator("b").expect("entry has b");

    println!("index: arity 3 at level 1, then x3 per level");
    println!("cylinder measures shrink accordingly:");
    for level in 1..=3 {
        let v = Vertex::new(&entry.index, vec![0; level])?;
        println!("  mu(cylinder at {v}) = {}", cylinder_measure(&entry.index, &v)?.value());
    }

    println!("\nfixed fraction of each level under the top-pair swap:");
    for level in 1..=4 {
        let counted = fixed_vertex_count(b, level, &limits)?;
        let closed = top_pair_fixed_fraction(&entry.index, level)?;
        assert_eq!(counted.fixed_fraction(), closed, "dynamic program vs closed form");
        println!(
            "  level {level}: {} of {} vertices, fraction {}",
            counted.fixed,
            counted.total,
            counted.fixed_fraction()
        );
    }

    // The limiting fixed fraction below the all-zeros level-l vertex is an
    // infinite product; a finite window plus an exact tail bound encloses it.
    let tol = BigRational::new(BigInt::one(), BigInt::from(1_000_000u64));
    println!("\ncertified enclosures of the limiting fixed fraction (width < 1/1000000):");
    for level in 0..=3 {
        let (lo, hi) = top_pair_fix_interval(&entry.index, level, &tol)?;
        let n_next = entry.index.arity(level + 1)?;
        let reference = BigRational::one() - ratio(4, n_next);
        assert!(lo > reference, "the enclosure sits above the two-digit jump bound");
        println!(
            "  below 0^{level}: {} < V < {}  (above 1 - 4/{n_next})",
            truncate_decimal(&lo, 8),
            truncate_decimal(&hi, 8),
        );
    }
    Ok(())
}

/// The first `digits` decimal places of a rational in [0, 1), truncated —
/// integer arithmetic only, so the display never rounds past the truth.
fn truncate_decimal(r: &BigRational, digits: u32) -> String {
    let scaled = (r.numer() * BigInt::from(10u64).pow(digits)) / r.denom();
    format!("0.{:0>width$}", scaled, width = digits as usize)
}
