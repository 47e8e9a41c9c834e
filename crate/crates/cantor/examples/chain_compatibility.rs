//! When do two arity sequences present the same profinite structure?
//!
//! Two sequences are interleavable exactly when their prefix products divide
//! into each other alternately. A prime appearing in one sequence's support
//! and not the other's certifies impossibility; a sustained greedy
//! interleaving certifies compatibility across the horizon; anything else
//! is honestly undetermined.

use cantor::catalog::{chain_compatibility, ChainCompatibility};
use cantor::SphericalIndex;

fn main() -> cantor::Result<()> {
    let two = SphericalIndex::constant(2)?;
    let four = SphericalIndex::constant(4)?;
    let primes = SphericalIndex::eventually_periodic(vec![2, 3, 5, 7], vec![7])?;

    // 2^(2k) interleaves 4^k one-for-two.
    match chain_compatibility(&two, &four, 16)? {
        ChainCompatibility::Compatible { interleaving } => {
            let links: Vec<String> = interleaving.iter().map(|(i, j)| format!("({i},{j})")).collect();
            println!("constant 2 vs constant 4: compatible, links {}", links.join(" "));
        }
        other => println!("constant 2 vs constant 4: {other:?}"),
    }

    // The factor 3 appears in 2*3*5*7*7*... and never in any power of 2.
    match chain_compatibility(&primes, &two, 16)? {
        ChainCompatibility::Incompatible { prime } => {
            println!("distinct primes vs constant 2: incompatible (prime {prime})");
        }
        other => println!("distinct primes vs constant 2: {other:?}"),
    }

    // Same primes on both sides, misaligned powers: the greedy alternation
    // stalls, and no finite horizon can certify either answer.
    let a = SphericalIndex::eventually_periodic(vec![2], vec![3])?;
    let b = SphericalIndex::eventually_periodic(vec![3], vec![2])?;
    match chain_compatibility(&a, &b, 12)? {
        ChainCompatibility::Undetermined { horizon } => {
            println!("(2,3,3,..) vs (3,2,2,..): undetermined at horizon {horizon}");
        }
        other => println!("(2,3,3,..) vs (3,2,2,..): {other:?}"),
    }
    Ok(())
}
