//! Empirical sampling of stabilizer classes: draw boundary points from the
//! uniform measure, build the Schreier ball around each, and tabulate the
//! isomorphism classes that appear.
//!
//! Everything in this module is explicitly empirical. A frequency table says
//! what was seen at one scale `(depth, radius)` under one seed — it never
//! proves a class is an atom or that the class distribution converges. The
//! reports carry their scale and seed so any claim can be replayed exactly.

use crate::action::GeneratedAction;
use crate::error::{Error, Result};
use crate::graph::{stabilizer_schreier_ball, SchreierGraph};
use crate::index::SphericalIndex;
use crate::word::BoundaryPrefix;
use crate::Limits;
use num::{BigInt, BigRational};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::HashMap;

/// One uniformly distributed boundary prefix of the given depth. Each digit
/// is drawn uniformly from its level's alphabet, which is exactly the
/// cylinder-mass distribution. The generator is keyed by `(seed, sample)`:
/// sample `i` of a run is the same point no matter how many other samples
/// were drawn, so runs parallelize and replay deterministically.
pub fn sample_point(
    index: &SphericalIndex,
    depth: usize,
    seed: u64,
    sample: u64,
) -> Result<BoundaryPrefix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(sample);
    let mut digits = Vec::with_capacity(depth);
    for level in 1..=depth {
        digits.push(rng.gen_range(0..index.arity(level)?));
    }
    BoundaryPrefix::new(index, digits)
}

/// One isomorphism class of sampled stabilizer balls.
#[derive(Clone, Debug, Serialize)]
pub struct StabilizerClass {
    /// Canonical hash of the based labelled ball; equal exactly for
    /// isomorphic balls.
    pub hash: String,
    /// How many samples landed in this class.
    pub count: usize,
    /// `count / samples`, exact.
    #[serde(with = "crate::measure::ratio_serde")]
    pub frequency: BigRational,
    /// The ball of the first sample that hit the class.
    pub representative: SchreierGraph,
}

/// Frequency table of stabilizer-ball classes over uniform samples.
#[derive(Clone, Debug, Serialize)]
pub struct IrsSampleReport {
    pub generators: Vec<String>,
    pub samples: usize,
    pub depth: usize,
    pub radius: usize,
    pub seed: u64,
    /// Classes sorted by count (descending), ties by hash.
    pub classes: Vec<StabilizerClass>,
    #[serde(with = "crate::measure::ratio_serde")]
    pub max_frequency: BigRational,
}

/// Samples `samples` boundary points of the given depth and groups the
/// radius-`radius` Schreier balls around them by canonical form. Frequencies
/// are exact rationals summing to 1; the whole report is a deterministic
/// function of `(action, samples, depth, radius, seed)`.
pub fn irs_empirical(
    action: &GeneratedAction,
    samples: usize,
    depth: usize,
    radius: usize,
    seed: u64,
    limits: &Limits,
) -> Result<IrsSampleReport> {
    if samples == 0 {
        return Err(Error::Unsupported("sampling needs at least one sample".into()));
    }
    let mut by_hash: HashMap<String, (usize, SchreierGraph)> = HashMap::new();
    for i in 0..samples {
        let x = sample_point(action.index(), depth, seed, i as u64)?;
        let ball = stabilizer_schreier_ball(action, &x, radius, limits)?;
        let hash = ball.canonical_hash();
        by_hash.entry(hash).or_insert((0, ball)).0 += 1;
    }
    let mut classes: Vec<StabilizerClass> = by_hash
        .into_iter()
        .map(|(hash, (count, representative))| StabilizerClass {
            hash,
            count,
            frequency: BigRational::new(BigInt::from(count), BigInt::from(samples)),
            representative,
        })
        .collect();
    classes.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.hash.cmp(&b.hash)));
    let max_frequency = classes[0].frequency.clone();
    Ok(IrsSampleReport {
        generators: action.generator_names().to_vec(),
        samples,
        depth,
        radius,
        seed,
        classes,
        max_frequency,
    })
}

/// One radius of an atomicity probe.
#[derive(Clone, Debug, Serialize)]
pub struct RadiusRow {
    pub radius: usize,
    pub class_count: usize,
    #[serde(with = "crate::measure::ratio_serde")]
    pub max_frequency: BigRational,
}

/// How the dominant class frequency behaved as the radius grew.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "trend", rename_all = "snake_case")]
pub enum AtomicityTrend {
    /// The dominant frequency was identical at the last two radii and at or
    /// above the threshold — the sampled measure behaves like it has an atom
    /// at this scale. Not a proof.
    AtomCandidate {
        #[serde(with = "crate::measure::ratio_serde")]
        stabilized_at: BigRational,
    },
    /// The dominant frequency strictly decreased at every step — the mass is
    /// spreading over more classes as the radius sharpens them.
    NonAtomicTrend,
    /// Neither pattern held over the probed radii.
    Inconclusive,
}

/// Dominant-class frequency as a function of ball radius, with a trend call.
#[derive(Clone, Debug, Serialize)]
pub struct AtomicityReport {
    pub generators: Vec<String>,
    pub samples: usize,
    pub depth: usize,
    pub seed: u64,
    #[serde(with = "crate::measure::ratio_serde")]
    pub threshold: BigRational,
    pub table: Vec<RadiusRow>,
    pub verdict: AtomicityTrend,
    /// What kind of evidence this is. Always `"empirical"`: the table
    /// reports one seed at one scale and proves nothing beyond itself.
    pub basis: &'static str,
}

/// Runs [`irs_empirical`] at each radius (same samples, depth and seed) and
/// tabulates how the dominant class frequency responds. At least two strictly
/// increasing radii are required — a trend needs somewhere to go.
pub fn atomicity_report(
    action: &GeneratedAction,
    samples: usize,
    depth: usize,
    radii: &[usize],
    seed: u64,
    threshold: &BigRational,
    limits: &Limits,
) -> Result<AtomicityReport> {
    if radii.len() < 2 || radii.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Unsupported(
            "an atomicity probe needs at least two strictly increasing radii".into(),
        ));
    }
    let mut table = Vec::with_capacity(radii.len());
    for &radius in radii {
        let report = irs_empirical(action, samples, depth, radius, seed, limits)?;
        table.push(RadiusRow {
            radius,
            class_count: report.classes.len(),
            max_frequency: report.max_frequency,
        });
    }
    let last = &table[table.len() - 1].max_frequency;
    let prev = &table[table.len() - 2].max_frequency;
    let decaying = table.windows(2).all(|w| w[1].max_frequency < w[0].max_frequency);
    let verdict = if last == prev && *last >= *threshold {
        AtomicityTrend::AtomCandidate { stabilized_at: last.clone() }
    } else if decaying {
        AtomicityTrend::NonAtomicTrend
    } else {
        AtomicityTrend::Inconclusive
    };
    Ok(AtomicityReport {
        generators: action.generator_names().to_vec(),
        samples,
        depth,
        seed,
        threshold: threshold.clone(),
        table,
        verdict,
        basis: "empirical",
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aut::{adding_machine, MealyMachine, MealyState, TreeAutomorphism};
    use crate::measure::ratio;
    use num::One;

    fn odometer_action() -> GeneratedAction {
        let idx = SphericalIndex::constant(2).unwrap();
        let a = TreeAutomorphism::from_mealy(&idx, adding_machine(2).unwrap()).unwrap();
        GeneratedAction::new(&idx, vec![("a".into(), a)]).unwrap()
    }

    fn grigorchuk_action() -> GeneratedAction {
        let idx = SphericalIndex::constant(2).unwrap();
        let base = vec![
            MealyState { name: "id".into(), perm: vec![0, 1], next: vec![0, 0] },
            MealyState { name: "a".into(), perm: vec![1, 0], next: vec![0, 0] },
            MealyState { name: "b".into(), perm: vec![0, 1], next: vec![1, 3] },
            MealyState { name: "c".into(), perm: vec![0, 1], next: vec![1, 4] },
            MealyState { name: "d".into(), perm: vec![0, 1], next: vec![0, 2] },
        ];
        let gens = [("a", 1usize), ("b", 2), ("c", 3), ("d", 4)]
            .into_iter()
            .map(|(name, initial)| {
                let m = MealyMachine::new(2, base.clone(), initial).unwrap();
                (name.to_string(), TreeAutomorphism::from_mealy(&idx, m).unwrap())
            })
            .collect();
        GeneratedAction::new(&idx, gens).unwrap()
    }

    #[test]
    fn sampling_is_keyed_by_seed_and_stream() {
        let idx = SphericalIndex::geometric(vec![3], 3).unwrap();
        let a = sample_point(&idx, 12, 7, 0).unwrap();
        let b = sample_point(&idx, 12, 7, 0).unwrap();
        assert_eq!(a.digits(), b.digits());
        // Streams are independent: sample 3 is the same point whether or not
        // samples 0..3 were drawn, and differs from them.
        let c = sample_point(&idx, 12, 7, 3).unwrap();
        assert_ne!(a.digits(), c.digits());
        let d = sample_point(&idx, 9, 7, 3).unwrap();
        assert_eq!(&c.digits()[..9], d.digits());
        // Depth 0 is the root prefix.
        assert_eq!(sample_point(&idx, 0, 7, 0).unwrap().depth(), 0);
        // Digits respect each level's alphabet and both halves of a binary
        // alphabet actually occur.
        let idx2 = SphericalIndex::constant(2).unwrap();
        let mut seen = [false, false];
        for i in 0..64 {
            let x = sample_point(&idx2, 1, 11, i).unwrap();
            seen[x.digits()[0] as usize] = true;
        }
        assert!(seen[0] && seen[1]);
    }

    #[test]
    fn free_actions_sample_a_single_class() {
        let limits = Limits::default();
        let report = irs_empirical(&odometer_action(), 60, 32, 3, 7, &limits).unwrap();
        assert_eq!(report.classes.len(), 1);
        assert!(report.classes[0].frequency.is_one());
        assert!(report.max_frequency.is_one());
        // Every ball of a free action on a deep level is the same line
        // segment: 2r + 1 points.
        assert_eq!(report.classes[0].representative.vertex_count(), 7);
        let dot = report.classes[0].representative.to_dot();
        assert!(dot.starts_with("digraph"));
    }

    #[test]
    fn class_tables_are_reproducible_and_sum_to_one() {
        let limits = Limits::default();
        let act = grigorchuk_action();
        let a = irs_empirical(&act, 40, 24, 2, 11, &limits).unwrap();
        let b = irs_empirical(&act, 40, 24, 2, 11, &limits).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        let total: BigRational =
            a.classes.iter().map(|c| c.frequency.clone()).fold(ratio(0, 1), |x, y| x + y);
        assert!(total.is_one());
        assert_eq!(a.classes.iter().map(|c| c.count).sum::<usize>(), 40);
        // Counts are sorted descending and the head is the reported maximum.
        for w in a.classes.windows(2) {
            assert!(w[0].count >= w[1].count);
        }
        assert_eq!(a.classes[0].frequency, a.max_frequency);
        // A different seed may sample different points but keeps the format.
        let c = irs_empirical(&act, 40, 24, 2, 12, &limits).unwrap();
        assert_eq!(c.seed, 12);
    }

    #[test]
    fn atomicity_probes_tabulate_the_dominant_class() {
        let limits = Limits::default();
        // The odometer's single class never splits: a textbook atom
        // candidate at any threshold below 1.
        let report =
            atomicity_report(&odometer_action(), 30, 32, &[1, 2, 3], 7, &ratio(1, 2), &limits)
                .unwrap();
        assert_eq!(report.table.len(), 3);
        assert!(report.table.iter().all(|row| row.class_count == 1));
        assert_eq!(
            report.verdict,
            AtomicityTrend::AtomCandidate { stabilized_at: ratio(1, 1) }
        );
        assert_eq!(report.basis, "empirical");
        // Radii must strictly increase.
        assert!(
            atomicity_report(&odometer_action(), 10, 16, &[2, 2], 7, &ratio(1, 2), &limits)
                .is_err()
        );
        // Growing radii can only refine classes: counts never decrease.
        let g = atomicity_report(&grigorchuk_action(), 40, 24, &[1, 2, 3], 11, &ratio(9, 10), &limits)
            .unwrap();
        for w in g.table.windows(2) {
            assert!(w[1].class_count >= w[0].class_count);
        }
    }
}
