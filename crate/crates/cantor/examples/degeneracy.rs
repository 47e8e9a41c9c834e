//! Certifying uniform moved-measure bounds — and refuting them.
//!
//! A finite-state element whose sections close up admits a uniform lower
//! bound: below every fixed vertex with a non-identity section, at least an
//! alpha fraction of the subtree moves. The graft constructions defeat any
//! such bound — they plant cylinders whose moved fraction decays doubly
//! exponentially — and the scan finds an exact sub-threshold witness.

use cantor::catalog::{build_example, doubling_graft_vertex, ExampleParams};
use cantor::dynamics::{
    certify_nondegenerate, degeneracy_scan, moved_ratio_below, replay_bound, CertifyOutcome,
    DegeneracyVerdict,
};
use cantor::measure::ratio;
use cantor::Limits;

fn main() -> cantor::Result<()> {
    let limits = Limits::default();

    // Positive side: every generator of the torsion action certifies.
    let grig = build_example("grigorchuk", &ExampleParams::default())?;
    println!("certificates for the four torsion generators:");
    for name in ["a", "b", "c", "d"] {
        let g = grig.generator(name).unwrap();
        match certify_nondegenerate(g, &limits)? {
            CertifyOutcome::Certified { certificate } => {
                // Replay the bound against randomly sampled fixed vertices.
                let replay = replay_bound(g, &certificate.alpha, 50, 8, 24, 7, &limits)?;
                println!(
                    "  {name}: alpha = {}  (replayed on {} samples: {} checked, {} trivial, {} failures)",
                    certificate.alpha, replay.samples, replay.checked, replay.trivial_sections,
                    replay.failures,
                );
            }
            CertifyOutcome::NotCertified { reason } => println!("  {name}: not certified — {reason}"),
        }
    }

    // Negative side: the doubling graft moves exactly d^(-2^k) of the
    // subtree below its k-th branch vertex, so no positive alpha survives.
    let entry = build_example("ex45_c", &ExampleParams::default())?;
    let c = entry.generator("c").unwrap();
    println!("\nmoved fraction below the doubling branch vertices:");
    for k in 1..=3 {
        let w = doubling_graft_vertex(&entry.index, k)?;
        let bound = moved_ratio_below(c, &w, (1 << k) + 2, &limits)?;
        assert!(bound.is_exact());
        println!("  below {w}: exactly {}", bound.value);
    }

    let report = degeneracy_scan(c, 9, 12, &ratio(1, 8), &limits)?;
    match report.verdict {
        DegeneracyVerdict::Refutes { witness } => println!(
            "\nscan refutes alpha >= 1/8: cylinder {} moves exactly {}",
            witness.vertex, witness.ratio,
        ),
        DegeneracyVerdict::NoVerdict => println!("\nscan found no witness at this scale"),
    }
    if let Some(min) = report.minimum_exact {
        println!("smallest exact fraction seen: {} below {}", min.ratio, min.vertex);
    }
    Ok(())
}
