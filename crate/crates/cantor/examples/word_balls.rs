//! Word balls, relations, and point stabilizers at a working depth.
//!
//! The dihedral action satisfies b^2 = e and b a b = a^-1; its word balls
//! collapse onto the normal form a^k and a^k b, and the stabilizer of the
//! all-zeros point inside any ball is exactly {e, b}. Translating the point
//! by a conjugates the stabilizer.

use cantor::catalog::{build_example, ExampleParams};
use cantor::word::parse_digits;
use cantor::{BoundaryPrefix, Letter, Limits};

fn main() -> cantor::Result<()> {
    let limits = Limits::default();
    let entry = build_example("dihedral", &ExampleParams::default())?;
    let action = &entry.action;

    let a = Letter { gen: 0, inverse: false };
    let a_inv = Letter { gen: 0, inverse: true };
    let b = Letter { gen: 1, inverse: false };
    println!("relations, checked to depth 12:");
    println!("  b b = e:       {}", action.words_equal_to_depth(&[b, b], &[], 12, &limits)?);
    println!("  b a b = a^-1:  {}", action.words_equal_to_depth(&[b, a, b], &[a_inv], 12, &limits)?);

    // In the free group the ball of radius r over 2 generators has 4 * 3^(r-1)
    // boundary words; the relations collapse the count to 4r + 1 here.
    println!("\nball sizes after collapsing equal elements (depth-12 comparison):");
    for radius in 1..=5 {
        let ball = action.ball(radius, 12, &limits)?;
        println!(
            "  radius {radius}: {} elements ({})",
            ball.len(),
            if ball.exact { "exact" } else { "at this depth" },
        );
    }

    // Stabilizers in a ball: which ball elements fix a boundary prefix.
    let ball = action.ball(4, 12, &limits)?;
    for digits in ["0,0,0,0,0,0,0,0,0,0,0,0", "1,0,0,0,0,0,0,0,0,0,0,0"] {
        let x = BoundaryPrefix::new(&entry.index, parse_digits(digits)?)?;
        let stab = action.stabilizer_in_ball(&ball, &x)?;
        let words: Vec<String> = stab.iter().map(|&i| action.word_to_string(ball.word(i))).collect();
        println!("\nstabilizer of {x} in the radius-4 ball: {}", words.join(", "));
    }
    Ok(())
}
