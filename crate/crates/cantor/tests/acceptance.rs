//! Release gate: the checks the crate promises, end to end, with explicit
//! runtime budgets. Each test prints one `[PASS] i/8 ...` line on success
//! (visible under `--nocapture`); a failure panics with the offending value.
//!
//! Everything recomputes from scratch through the public API — no fixtures,
//! no cached state. Ratios are compared as exact rationals; every
//! "equal"/"distinct" claim on words or elements is an exact comparison at
//! the depth stated next to it.

use cantor::aut::{Boundedness, Portrait};
use cantor::catalog::{
    doubling_graft_ratio, doubling_graft_vertex, ladder_graft_ratio, ladder_graft_vertex,
    top_pair_fix_interval,
};
use cantor::dynamics::BoundKind;
use cantor::{
    boundary_metric, build_example, catalog_names, certify_nondegenerate, chain_compatibility,
    distinct_stabilizer_tree, irs_empirical, lqa_witness_search, moved_ratio_below,
    nonfixed_ratio, replay_bound, schreier_level_graph, schreier_metric, BoundaryDistance,
    BoundaryPrefix, CatalogEntry, ChainCompatibility, ExampleParams, Letter, Limits,
    SchreierDistance, SphericalIndex, TreeAutomorphism, Vertex,
};
use num::{BigInt, BigRational, One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;
use std::time::{Duration, Instant};

fn entry(name: &str) -> CatalogEntry {
    build_example(name, &ExampleParams::default()).expect("catalog entry builds")
}

fn rat(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

fn letter(gen: usize, inverse: bool) -> Letter {
    Letter { gen, inverse }
}

/// `a^n b a^-n` over generator indices (`a` = 0, `b` = 1).
fn conjugated_reflection(n: usize) -> Vec<Letter> {
    let mut w = vec![letter(0, false); n];
    w.push(letter(1, false));
    w.extend(std::iter::repeat(letter(0, true)).take(n));
    w
}

/// The stabilizer of the shifted zero point under the infinite dihedral
/// action is the conjugated reflection and nothing else: for each shift
/// `n = 0..6` at depth 16, the radius-`2n+2` word ball contains the class of
/// `a^n b a^-n`, every other stabilizing class is trivial, and the seven
/// stabilizer word sets are pairwise distinct.
#[test]
fn dihedral_point_stabilizers_are_the_conjugated_reflections() {
    let started = Instant::now();
    let limits = Limits::default();
    let depth = 16;
    let dihedral = entry("dihedral");
    let zero = BoundaryPrefix::new(&dihedral.index, vec![0; depth]).unwrap();

    let mut stabilizer_sets: Vec<BTreeSet<String>> = Vec::new();
    for n in 0..=6usize {
        let shift = vec![letter(0, false); n];
        let point = dihedral.action.apply_word_to_prefix(&shift, &zero).unwrap();
        let reflection = conjugated_reflection(n);
        let ball = dihedral.action.ball(2 * n + 2, depth, &limits).unwrap();

        let mut saw_reflection = false;
        let mut word_set = BTreeSet::new();
        for i in dihedral.action.stabilizer_in_ball(&ball, &point).unwrap() {
            let w = ball.word(i);
            let trivial = dihedral.action.words_equal_to_depth(w, &[], depth, &limits).unwrap();
            let reflects =
                dihedral.action.words_equal_to_depth(w, &reflection, depth, &limits).unwrap();
            assert!(
                trivial || reflects,
                "the stabilizer of the shift-{n} point holds {}, which is neither trivial nor \
                 the conjugated reflection",
                dihedral.action.word_to_string(w)
            );
            saw_reflection |= reflects;
            word_set.insert(dihedral.action.word_to_string(w));
        }
        assert!(
            saw_reflection,
            "the conjugated reflection for shift {n} is missing from the radius-{} ball",
            2 * n + 2
        );
        stabilizer_sets.push(word_set);
    }

    for i in 0..stabilizer_sets.len() {
        for j in i + 1..stabilizer_sets.len() {
            assert_ne!(
                stabilizer_sets[i], stabilizer_sets[j],
                "shifts {i} and {j} got the same stabilizer word set"
            );
        }
    }

    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(5), "took {elapsed:?}, budget 5 s");
    println!(
        "[PASS] 1/8 dihedral point stabilizers: 7 shifted points, each stabilized exactly by \
         its conjugated reflection, all word sets distinct ({elapsed:?})"
    );
}

/// The certified enclosure of the limiting fixed fraction below the
/// all-zeros vertex under the top-pair swap: width under one millionth and
/// strictly above `1 - 4/n_{l+1}`, for levels 0 through 4, in exact
/// rational arithmetic.
#[test]
fn top_pair_fix_intervals_are_tight_and_clear_the_jump_bound() {
    let started = Instant::now();
    let tolerance = rat(1, 1_000_000);
    let top_pair = entry("thm61_b");

    for level in 0..=4usize {
        let (lo, hi) = top_pair_fix_interval(&top_pair.index, level, &tolerance).unwrap();
        assert!(lo < hi, "level {level}: enclosure [{lo}, {hi}] is inverted");
        let width = hi.clone() - lo.clone();
        assert!(width < tolerance, "level {level}: width {width} is not under 1/10^6");
        let n_next = top_pair.index.arity(level + 1).unwrap();
        let jump_bound = BigRational::one() - rat(4, n_next as i64);
        assert!(
            lo > jump_bound,
            "level {level}: lower end {lo} does not clear 1 - 4/{n_next}"
        );
        assert!(hi < BigRational::one(), "level {level}: upper end {hi} reaches 1");
    }

    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(1), "took {elapsed:?}, budget 1 s");
    println!(
        "[PASS] 2/8 top-pair fixed-measure enclosures: levels 0..=4 all tighter than 1/10^6 \
         and strictly above their jump bound ({elapsed:?})"
    );
}

/// Moved fractions below the graft vertices agree with their closed forms
/// exactly (rational equality, no tolerance): `2^(-2^k)` below
/// `0^(2^k - 1) 1` for the doubling grafts on the binary tree, and
/// `1/n_(l+2)` below `0^l 1` for the ladder grafts on the growing tree.
#[test]
fn graft_ratios_equal_their_closed_forms_exactly() {
    let started = Instant::now();
    let limits = Limits::default();

    let doubling = entry("ex45_c");
    let c = doubling.generator("c").unwrap();
    for k in 1..=3u32 {
        let v = doubling_graft_vertex(&doubling.index, k).unwrap();
        let got = moved_ratio_below(c, &v, (1usize << k) + 2, &limits).unwrap();
        assert_eq!(got.kind, BoundKind::Exact, "k = {k}: probe did not resolve exactly");
        assert_eq!(got.value, doubling_graft_ratio(2, k), "k = {k}: wrong moved fraction");
    }

    let ladder = entry("ex44_c");
    let c = ladder.generator("c").unwrap();
    for l in 1..=4usize {
        let v = ladder_graft_vertex(&ladder.index, l).unwrap();
        let got = moved_ratio_below(c, &v, 4, &limits).unwrap();
        assert_eq!(got.kind, BoundKind::Exact, "l = {l}: probe did not resolve exactly");
        assert_eq!(
            got.value,
            ladder_graft_ratio(&ladder.index, l).unwrap(),
            "l = {l}: wrong moved fraction"
        );
    }

    let elapsed = started.elapsed();
    println!(
        "[PASS] 3/8 graft ratios: doubling grafts k = 1..3 and ladder grafts l = 1..4 match \
         their closed forms with exact rational equality ({elapsed:?})"
    );
}

/// Every Grigorchuk generator has a bounded section closure of at most five
/// distinct sections, certifies a positive uniform moved-fraction bound, and
/// the certificate survives an independent seeded replay against 100 random
/// fixed vertices up to level 8.
#[test]
fn grigorchuk_generators_certify_and_replay_their_moved_fraction_bounds() {
    let started = Instant::now();
    let limits = Limits::default();
    let grig = entry("grigorchuk");

    for i in 0..grig.action.generator_count() {
        let name = &grig.action.generator_names()[i];
        let g = grig.action.generator(i);

        let closure = g.section_closure(16, 16, &limits).unwrap();
        assert!(
            matches!(closure.bounded, Boundedness::Bounded),
            "generator {name}: section closure did not close"
        );
        assert!(
            closure.len() <= 5,
            "generator {name}: {} distinct sections, expected at most 5",
            closure.len()
        );

        let outcome = certify_nondegenerate(g, &limits).unwrap();
        let certificate = outcome
            .certificate()
            .unwrap_or_else(|| panic!("generator {name} did not certify"));
        assert!(
            certificate.alpha > BigRational::zero(),
            "generator {name}: certified bound is not positive"
        );

        let replay =
            replay_bound(g, &certificate.alpha, 100, 8, 24, 1000 + i as u64, &limits).unwrap();
        assert_eq!(replay.samples, 100, "generator {name}: replay sample count");
        assert!(
            replay.passed(),
            "generator {name}: replay saw {} failures and {} unresolved samples",
            replay.failures,
            replay.unresolved
        );
    }

    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(10), "took {elapsed:?}, budget 10 s");
    println!(
        "[PASS] 4/8 certification: all 4 Grigorchuk generators close within 5 sections, \
         certify a positive bound, and replay clean on 100 random fixed vertices ({elapsed:?})"
    );
}

/// Identity-region witnesses split the two regimes: the dihedral action
/// yields none (radius 6, depth 12), the doubling-graft action yields one
/// (radius 2, depth 9), and on the latter the separating point tree reaches
/// four points with all six pairs verified by an explicit separator.
#[test]
fn identity_region_witnesses_split_the_two_regimes() {
    let started = Instant::now();
    let limits = Limits::default();

    let dihedral = entry("dihedral");
    let none = lqa_witness_search(&dihedral.action, 6, 12, 12, &limits).unwrap();
    assert!(
        none.is_empty(),
        "the dihedral action produced {} witnesses; its elements extend uniquely",
        none.len()
    );

    let doubling = entry("ex45_c");
    let witnesses = lqa_witness_search(&doubling.action, 2, 9, 9, &limits).unwrap();
    assert!(
        !witnesses.is_empty(),
        "the doubling-graft action produced no identity-region witness at radius 2, depth 9"
    );

    let report = distinct_stabilizer_tree(&doubling.action, 4, 17, 2, &limits).unwrap();
    assert_eq!(report.points.len(), 4, "expected 2^2 separated points");
    let labels: BTreeSet<&String> = report.labels.iter().collect();
    assert_eq!(labels.len(), 4, "region labels are not pairwise distinct");
    assert_eq!(report.pairs.len(), 6, "expected a separator for every pair of points");
    assert!(report.verified, "some separating element failed re-verification");

    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(60), "took {elapsed:?}, budget 60 s");
    println!(
        "[PASS] 5/8 identity regions: dihedral has no witness, the doubling grafts do, and \
         4 points separate pairwise through 6 verified splits ({elapsed:?})"
    );
}

/// Empirical stabilizer-class sampling: the free actions collapse to a
/// single Schreier-ball class with frequency at least 0.999 (1000 samples,
/// depth 64, radius 4), the Grigorchuk action spreads over classes whose
/// count is nondecreasing in the radius with the dominant class under 0.9
/// at radius 4 (500 samples, depth 32), and identical seeds reproduce
/// byte-identical reports.
#[test]
fn stabilizer_class_sampling_separates_free_from_branching_actions() {
    let started = Instant::now();
    let limits = Limits::default();

    for name in ["odometer", "dihedral"] {
        let e = entry(name);
        let first = irs_empirical(&e.action, 1000, 64, 4, 7, &limits).unwrap();
        assert_eq!(
            first.classes.len(),
            1,
            "{name}: expected a single stabilizer-ball class, got {}",
            first.classes.len()
        );
        assert!(
            first.max_frequency >= rat(999, 1000),
            "{name}: dominant frequency {} is below 999/1000",
            first.max_frequency
        );
        let second = irs_empirical(&e.action, 1000, 64, 4, 7, &limits).unwrap();
        assert_eq!(
            serde_json::to_string(&first).unwrap(),
            serde_json::to_string(&second).unwrap(),
            "{name}: the same seed did not reproduce the same bytes"
        );
    }

    let grig = entry("grigorchuk");
    let mut class_counts = Vec::new();
    for radius in 2..=5usize {
        let report = irs_empirical(&grig.action, 500, 32, radius, 7, &limits).unwrap();
        if radius == 3 {
            let again = irs_empirical(&grig.action, 500, 32, radius, 7, &limits).unwrap();
            assert_eq!(
                serde_json::to_string(&report).unwrap(),
                serde_json::to_string(&again).unwrap(),
                "grigorchuk radius 3: the same seed did not reproduce the same bytes"
            );
        }
        if radius == 4 {
            assert!(
                report.max_frequency < rat(9, 10),
                "grigorchuk radius 4: dominant class frequency {} is not diffuse",
                report.max_frequency
            );
        }
        class_counts.push(report.classes.len());
    }
    assert!(
        class_counts.windows(2).all(|w| w[0] <= w[1]),
        "grigorchuk class counts {class_counts:?} are not nondecreasing in the radius"
    );

    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(120), "took {elapsed:?}, budget 120 s");
    println!(
        "[PASS] 6/8 stabilizer sampling: free actions collapse to one class at 1000 samples, \
         Grigorchuk spreads over {class_counts:?} classes for radii 2..=5, bytes reproduce \
         ({elapsed:?})"
    );
}

/// Arity-chain compatibility: the distinct-primes chain against the binary
/// chain is rejected with the prime-3 obstruction; the binary chain against
/// the quaternary chain interleaves.
#[test]
fn chain_compatibility_flags_prime_obstructions_and_nests_power_chains() {
    let started = Instant::now();

    let primes = SphericalIndex::eventually_periodic(vec![2, 3, 5, 7], vec![7]).unwrap();
    let two = SphericalIndex::constant(2).unwrap();
    let four = SphericalIndex::constant(4).unwrap();

    match chain_compatibility(&primes, &two, 32).unwrap() {
        ChainCompatibility::Incompatible { prime } => {
            assert_eq!(prime, 3, "wrong obstructing prime");
        }
        other => panic!("expected the prime-3 obstruction, got {other:?}"),
    }
    match chain_compatibility(&two, &four, 32).unwrap() {
        ChainCompatibility::Compatible { interleaving } => {
            assert!(!interleaving.is_empty(), "compatible chains came with no interleaving");
        }
        other => panic!("expected compatible power chains, got {other:?}"),
    }

    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(1), "took {elapsed:?}, budget 1 s");
    println!(
        "[PASS] 7/8 chain compatibility: prime-3 obstruction found, power chains interleave \
         ({elapsed:?})"
    );
}

fn boundary_value(d: &BoundaryDistance) -> BigRational {
    match d {
        BoundaryDistance::Resolved { distance, .. } => distance.clone(),
        BoundaryDistance::IndistinguishableAtDepth { bound, .. } => bound.clone(),
    }
}

fn graph_value(d: &SchreierDistance) -> BigRational {
    match d {
        SchreierDistance::Resolved { distance, .. } => distance.clone(),
        SchreierDistance::IndistinguishableAtRadius { bound, .. } => bound.clone(),
    }
}

/// Copy `x` and re-randomize its digits from a uniformly chosen level on, so
/// sampled triples realize every agreement depth.
fn vary(x: &BoundaryPrefix, index: &SphericalIndex, rng: &mut ChaCha8Rng) -> BoundaryPrefix {
    let mut digits = x.digits().to_vec();
    let from = rng.gen_range(0..=digits.len());
    for (i, d) in digits.iter_mut().enumerate().skip(from) {
        *d = rng.gen_range(0..index.arity(i + 1).unwrap());
    }
    BoundaryPrefix::new(index, digits).unwrap()
}

/// Property suites, all exact: group laws and inverse/identity laws on 200
/// random portrait triples; the wreath composition identity
/// `g(uw) = g(u) g|_u(w)` on 200 random elements; the strong triangle
/// inequality for both the boundary metric and the Schreier-ball metric on
/// 500 sampled triples each; level measures normalizing against level
/// counts on every catalog index; and the moved-vertex fraction
/// nondecreasing in the level for every catalog generator.
#[test]
fn property_suites_hold_exactly() {
    let started = Instant::now();
    let limits = Limits::default();
    let indices = [
        SphericalIndex::constant(2).unwrap(),
        SphericalIndex::constant(3).unwrap(),
        SphericalIndex::geometric(vec![3], 3).unwrap(),
    ];
    let depth = 3;
    let mut rng = ChaCha8Rng::seed_from_u64(2026);

    // Group laws: associativity, identity on both sides, inverses.
    for trial in 0..200 {
        let idx = &indices[trial % indices.len()];
        let mut random = || {
            TreeAutomorphism::from_portrait(
                Portrait::random(idx, depth, &mut rng, 100_000).unwrap(),
            )
        };
        let (f, g, h) = (random(), random(), random());
        let id = TreeAutomorphism::identity(idx);

        let left = f.compose(&g, depth, &limits).unwrap().compose(&h, depth, &limits).unwrap();
        let right = f.compose(&g.compose(&h, depth, &limits).unwrap(), depth, &limits).unwrap();
        assert!(
            left.equal_to_depth(&right, depth, &limits).unwrap(),
            "associativity failed on trial {trial}"
        );
        assert!(
            f.compose(&id, depth, &limits)
                .unwrap()
                .equal_to_depth(&f, depth, &limits)
                .unwrap(),
            "right identity failed on trial {trial}"
        );
        assert!(
            id.compose(&f, depth, &limits)
                .unwrap()
                .equal_to_depth(&f, depth, &limits)
                .unwrap(),
            "left identity failed on trial {trial}"
        );
        assert!(
            f.compose(&f.invert(), depth, &limits)
                .unwrap()
                .equal_to_depth(&id, depth, &limits)
                .unwrap(),
            "inverse law failed on trial {trial}"
        );
    }

    // Wreath composition identity: image of a prefix = image of its head
    // followed by the head's section applied to the tail.
    for trial in 0..200 {
        let idx = &indices[trial % indices.len()];
        let g = TreeAutomorphism::from_portrait(
            Portrait::random(idx, depth, &mut rng, 100_000).unwrap(),
        );
        let digits: Vec<u64> =
            (1..=depth).map(|lvl| rng.gen_range(0..idx.arity(lvl).unwrap())).collect();
        let image = g.apply(&digits).unwrap();
        for split in 1..depth {
            let (head, tail) = digits.split_at(split);
            let section = g.section(&Vertex::new(idx, head.to_vec()).unwrap()).unwrap();
            let mut recombined = g.apply(head).unwrap();
            recombined.extend(section.apply(tail).unwrap());
            assert_eq!(
                recombined, image,
                "wreath reconstruction failed at split {split} on trial {trial}"
            );
        }
    }

    // Strong triangle inequality for the boundary metric.
    for trial in 0..500 {
        let idx = &indices[trial % indices.len()];
        let digits: Vec<u64> =
            (1..=16).map(|lvl| rng.gen_range(0..idx.arity(lvl).unwrap())).collect();
        let x = BoundaryPrefix::new(idx, digits).unwrap();
        let y = vary(&x, idx, &mut rng);
        let z = vary(&y, idx, &mut rng);
        let dxz = boundary_value(&boundary_metric(&x, &z));
        let dxy = boundary_value(&boundary_metric(&x, &y));
        let dyz = boundary_value(&boundary_metric(&y, &z));
        assert!(
            dxz <= dxy.clone().max(dyz.clone()),
            "boundary ultrametric failed on trial {trial}: d(x,z) = {dxz}, \
             d(x,y) = {dxy}, d(y,z) = {dyz}"
        );
    }

    // Strong triangle inequality for the Schreier-ball metric, over the
    // level-6 dihedral orbit graph rebased at every vertex.
    let dihedral = entry("dihedral");
    let pool: Vec<_> = (0..64u64)
        .map(|m| {
            let digits: Vec<u64> = (0..6).map(|b| (m >> b) & 1).collect();
            let v = Vertex::new(&dihedral.index, digits).unwrap();
            schreier_level_graph(&dihedral.action, 6, Some(&v), &limits).unwrap()
        })
        .collect();
    for trial in 0..500 {
        let a = &pool[rng.gen_range(0..pool.len())];
        let b = &pool[rng.gen_range(0..pool.len())];
        let c = &pool[rng.gen_range(0..pool.len())];
        let dac = graph_value(&schreier_metric(a, c, 6).unwrap());
        let dab = graph_value(&schreier_metric(a, b, 6).unwrap());
        let dbc = graph_value(&schreier_metric(b, c, 6).unwrap());
        assert!(
            dac <= dab.clone().max(dbc.clone()),
            "Schreier ultrametric failed on trial {trial}: d(a,c) = {dac}, \
             d(a,b) = {dab}, d(b,c) = {dbc}"
        );
    }

    // Level measures normalize against level counts on every catalog index.
    for name in catalog_names() {
        let e = entry(name);
        for level in 1..=6usize {
            let measure = e.index.level_measure(level).unwrap();
            let count = e.index.level_size(level).unwrap();
            assert_eq!(
                measure * BigRational::from(BigInt::from(count)),
                BigRational::one(),
                "{name}: level {level} measure does not normalize"
            );
        }
    }

    // The moved-vertex fraction of any element never shrinks with the level:
    // children of moved vertices are moved.
    for name in catalog_names() {
        let e = entry(name);
        for i in 0..e.action.generator_count() {
            let g = e.action.generator(i);
            let mut prev = BigRational::zero();
            for level in 1..=6usize {
                let r = nonfixed_ratio(g, level, &limits).unwrap();
                assert!(
                    r >= prev,
                    "{name}:{}: moved fraction drops from {prev} to {r} at level {level}",
                    e.action.generator_names()[i]
                );
                prev = r;
            }
        }
    }

    let elapsed = started.elapsed();
    println!(
        "[PASS] 8/8 property suites: group laws (200 triples), wreath reconstruction (200), \
         both ultrametrics (500 triples each), measure normalization and moved-fraction \
         monotonicity across the catalog ({elapsed:?})"
    );
}
