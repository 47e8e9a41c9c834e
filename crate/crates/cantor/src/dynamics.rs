//! Fixed-point structure of single elements and finitely generated actions:
//! exact fixed-vertex counts, moved-measure ratios below vertices, density
//! profiles, degeneracy scans and non-degeneracy certificates, identity-region
//! witnesses, and families of points with pairwise distinct stabilizers.
//!
//! Everything here is finite-depth honest. A ratio is reported as *exact*
//! only when the element's behaviour below the vertex resolved completely
//! (rule statuses or full enumeration within the probe window); otherwise it
//! is a one-sided bound carrying its own direction. Verdicts — a degeneracy
//! refutation, a certificate, a separated pair — are only ever derived from
//! exact quantities.

use crate::action::{GeneratedAction, GroupWord};
use crate::aut::cursor::{Cursors, DpCache, Engine};
use crate::aut::{InfiniteStatus, Representation, TreeAutomorphism};
use crate::error::{Error, Result};
use crate::word::{BoundaryPrefix, Vertex};
use crate::Limits;
use num::{BigInt, BigRational, BigUint, One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::{HashMap, HashSet, VecDeque};

/// Memo for the moved-measure recursion, keyed like the engine's own caches
/// (cursor class, level key, remaining fuel). Wide levels of a growing tree
/// repeat the same child class many times; without this the recursion would
/// multiply instead of add.
#[derive(Default)]
struct RatioMemo(HashMap<(Cursors, usize, usize), (BigRational, bool)>);

/// Exact count of fixed vertices at one level.
#[derive(Clone, Debug, Serialize)]
pub struct FixedVertexCount {
    pub level: usize,
    #[serde(with = "crate::measure::uint_serde")]
    pub fixed: BigUint,
    #[serde(with = "crate::measure::uint_serde")]
    pub total: BigUint,
}

impl FixedVertexCount {
    /// Fraction of the level that is fixed.
    pub fn fixed_fraction(&self) -> BigRational {
        BigRational::new(BigInt::from(self.fixed.clone()), BigInt::from(self.total.clone()))
    }

    /// Fraction of the level that moves; non-decreasing in the level.
    pub fn nonfixed_fraction(&self) -> BigRational {
        BigRational::one() - self.fixed_fraction()
    }
}

/// Vertices at `level` fixed by `g` (a vertex is fixed iff every digit of
/// its path is). Exact, by dynamic programming over cursor classes.
pub fn fixed_vertex_count(
    g: &TreeAutomorphism,
    level: usize,
    limits: &Limits,
) -> Result<FixedVertexCount> {
    let engine = g.engine();
    let mut cache = DpCache::default();
    let fixed = engine.fixed_count(&engine.initial_cursors(), 0, level, &mut cache, limits)?;
    Ok(FixedVertexCount { level, fixed, total: g.index().level_size(level)? })
}

/// Fraction of level-`level` vertices moved by `g`.
pub fn nonfixed_ratio(g: &TreeAutomorphism, level: usize, limits: &Limits) -> Result<BigRational> {
    Ok(fixed_vertex_count(g, level, limits)?.nonfixed_fraction())
}

/// The fixed vertices at `level` themselves, in lexicographic order. Unlike
/// [`fixed_vertex_count`] this materializes vertices, so the whole level must
/// fit under the level cap.
pub fn fixed_vertices(
    g: &TreeAutomorphism,
    level: usize,
    limits: &Limits,
) -> Result<Vec<Vertex>> {
    g.index().level_size_capped(level, limits.level_cap)?;
    let engine = g.engine();
    let mut cache = DpCache::default();
    let mut frontier = vec![(Vec::new(), engine.initial_cursors())];
    for lvl in 0..level {
        let arity = engine.index().arity(lvl + 1)?;
        cache.charge(frontier.len() as u64 * arity, limits, "fixed-vertex enumeration")?;
        let mut next = Vec::new();
        for (digits, cursors) in frontier {
            for d in 0..arity {
                let (out, stepped) = engine.step(&cursors, lvl, d)?;
                if out == d {
                    let mut path = digits.clone();
                    path.push(d);
                    next.push((path, stepped));
                }
            }
        }
        frontier = next;
    }
    frontier.into_iter().map(|(digits, _)| Vertex::new(g.index(), digits)).collect()
}

/// Which side of the true value a reported ratio is on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    Exact,
    AtLeast,
    AtMost,
}

/// A ratio together with how it bounds the true value.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatioBound {
    pub kind: BoundKind,
    #[serde(with = "crate::measure::ratio_serde")]
    pub value: BigRational,
}

impl RatioBound {
    pub fn exact(value: BigRational) -> Self {
        RatioBound { kind: BoundKind::Exact, value }
    }

    pub fn is_exact(&self) -> bool {
        self.kind == BoundKind::Exact
    }

    /// Does this bound prove the true value is `>= alpha`?
    pub fn proves_at_least(&self, alpha: &BigRational) -> bool {
        matches!(self.kind, BoundKind::Exact | BoundKind::AtLeast) && self.value >= *alpha
    }

    /// The same information about the complementary ratio `1 - value`.
    pub fn complement(&self) -> RatioBound {
        let value = BigRational::one() - self.value.clone();
        let kind = match self.kind {
            BoundKind::Exact => BoundKind::Exact,
            BoundKind::AtLeast => BoundKind::AtMost,
            BoundKind::AtMost => BoundKind::AtLeast,
        };
        RatioBound { kind, value }
    }
}

/// Measure fraction of the subtree below `v` that `g` moves, resolved down
/// to `probe_depth` levels below `v`. Exact when the behaviour settles —
/// rule statuses, fixed-point-free subtrees, or full resolution within the
/// window — and a lower bound otherwise. The path to `v` is not examined.
pub fn moved_ratio_below(
    g: &TreeAutomorphism,
    v: &Vertex,
    probe_depth: usize,
    limits: &Limits,
) -> Result<RatioBound> {
    let engine = g.engine();
    let (_, cursors) = engine.apply(&engine.initial_cursors(), 0, v.digits())?;
    let mut cache = DpCache::default();
    let mut memo = RatioMemo::default();
    let (value, exact) =
        moved_ratio_rec(&engine, &cursors, v.level(), probe_depth, &mut memo, &mut cache, limits)?;
    Ok(RatioBound { kind: if exact { BoundKind::Exact } else { BoundKind::AtLeast }, value })
}

/// Core recursion: (accumulated moved measure, fully resolved?). A moved
/// child contributes its whole subtree exactly; a fixed child recurses.
fn moved_ratio_rec(
    engine: &Engine<'_>,
    cursors: &Cursors,
    level: usize,
    fuel: usize,
    memo: &mut RatioMemo,
    cache: &mut DpCache,
    limits: &Limits,
) -> Result<(BigRational, bool)> {
    match engine.status(cursors, level)? {
        Some(InfiniteStatus::Identity) => return Ok((BigRational::zero(), true)),
        Some(InfiniteStatus::FullyMoved) => return Ok((BigRational::one(), true)),
        _ => {}
    }
    if fuel == 0 || !engine.can_step(cursors) {
        return Ok((BigRational::zero(), false));
    }
    let key = (cursors.clone(), engine.index().level_key(level), fuel);
    if let Some(v) = memo.0.get(&key) {
        return Ok(v.clone());
    }
    let arity = engine.index().arity(level + 1)?;
    cache.charge(arity, limits, "moved-measure resolution")?;
    let child_measure = BigRational::new(BigInt::one(), BigInt::from(arity));
    let mut total = BigRational::zero();
    let mut exact = true;
    for k in 0..arity {
        let (out, next) = engine.step(cursors, level, k)?;
        if out != k {
            total += child_measure.clone();
        } else {
            let (below, below_exact) =
                moved_ratio_rec(engine, &next, level + 1, fuel - 1, memo, cache, limits)?;
            total += below * child_measure.clone();
            exact &= below_exact;
        }
    }
    memo.0.insert(key, (total.clone(), exact));
    Ok((total, exact))
}

/// One sample of a density profile.
#[derive(Clone, Debug, Serialize)]
pub struct DensityPoint {
    pub level: usize,
    pub vertex: Vertex,
    pub fixed_fraction: RatioBound,
}

/// Fraction of the cylinder around `x` (truncated at each requested level)
/// consisting of points fixed by `g`: exactly `0` once the path itself
/// moves, and `1 - moved_ratio_below` otherwise.
pub fn density_profile(
    g: &TreeAutomorphism,
    x: &BoundaryPrefix,
    levels: &[usize],
    probe_depth: usize,
    limits: &Limits,
) -> Result<Vec<DensityPoint>> {
    let image = g.apply(x.digits())?;
    let mut out = Vec::with_capacity(levels.len());
    for &level in levels {
        if level > x.depth() {
            return Err(Error::Unsupported(format!(
                "profile level {level} exceeds the observed depth {}",
                x.depth()
            )));
        }
        let vertex = x.vertex_at(level);
        let fixed_fraction = if image[..level] != x.digits()[..level] {
            RatioBound::exact(BigRational::zero())
        } else {
            moved_ratio_below(g, &vertex, probe_depth, limits)?.complement()
        };
        out.push(DensityPoint { level, vertex, fixed_fraction });
    }
    Ok(out)
}

/// One level of a holonomy probe: the cylinder around the probed prefix,
/// truncated to `level`, contains `moved_vertex`, which the element moves.
#[derive(Clone, Debug, Serialize)]
pub struct HolonomyWitness {
    pub level: usize,
    pub moved_vertex: Vertex,
}

/// What a holonomy probe around a fixed prefix found.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum HolonomyReport {
    /// Every probed cylinder around the prefix contains a vertex moved within
    /// depth `depth`: the element is non-identity arbitrarily close to the
    /// point, as far as this scale can see.
    NonTrivial { depth: usize, witnesses: Vec<HolonomyWitness> },
    /// The cylinder at `fixed_cylinder_level` — and with it every deeper one —
    /// is entirely fixed down to `depth`: trivial holonomy at this scale.
    TrivialAtScale {
        depth: usize,
        fixed_cylinder_level: usize,
        witnesses: Vec<HolonomyWitness>,
    },
}

/// Probes the cylinders around a fixed prefix `x` for vertices moved by `g`.
/// Levels `0..=min(depth, x.depth())` are probed in order, each cylinder
/// examined `depth` levels below its own root; the first entirely-fixed
/// cylinder settles the verdict. Each witness is the shallowest, leftmost
/// moved vertex in its cylinder.
pub fn holonomy_witness(
    g: &TreeAutomorphism,
    x: &BoundaryPrefix,
    depth: usize,
    limits: &Limits,
) -> Result<HolonomyReport> {
    if depth == 0 {
        return Err(Error::Unsupported("holonomy probes need a positive depth".into()));
    }
    let engine = g.engine();
    let mut cache = DpCache::default();
    // Thread the prefix through the element, recording the cursor state at
    // every vertex on the path and insisting each digit maps to itself.
    let mut path_cursors = vec![engine.initial_cursors()];
    for (i, &d) in x.digits().iter().enumerate() {
        let (out, next) = engine.step(path_cursors.last().unwrap(), i, d)?;
        if out != d {
            return Err(Error::VertexNotFixed { vertex: x.vertex_at(i + 1).to_string() });
        }
        path_cursors.push(next);
    }
    let mut witnesses = Vec::new();
    for level in 0..=x.depth().min(depth) {
        let cursors = &path_cursors[level];
        if engine.all_fixed(cursors, level, depth, &mut cache, limits)? {
            return Ok(HolonomyReport::TrivialAtScale {
                depth,
                fixed_cylinder_level: level,
                witnesses,
            });
        }
        // Breadth-first descent into the subtrees that are not entirely
        // fixed; the first digit an automorphism moves closes the search.
        let mut queue = VecDeque::from([(Vec::new(), cursors.clone())]);
        let mut moved_vertex = None;
        'witness: while let Some((rel, cur)) = queue.pop_front() {
            let remaining = depth - rel.len();
            if remaining == 0 {
                continue;
            }
            let at = level + rel.len();
            let arity = engine.index().arity(at + 1)?;
            cache.charge(arity, limits, "holonomy witness search")?;
            for d in 0..arity {
                let (out, next) = engine.step(&cur, at, d)?;
                if out != d {
                    let mut digits = x.digits()[..level].to_vec();
                    digits.extend_from_slice(&rel);
                    digits.push(d);
                    moved_vertex = Some(Vertex::new(g.index(), digits)?);
                    break 'witness;
                }
                if !engine.all_fixed(&next, at + 1, remaining - 1, &mut cache, limits)? {
                    let mut deeper = rel.clone();
                    deeper.push(d);
                    queue.push_back((deeper, next));
                }
            }
        }
        let moved_vertex = moved_vertex.expect("an unfixed cylinder contains a moved vertex");
        witnesses.push(HolonomyWitness { level, moved_vertex });
    }
    Ok(HolonomyReport::NonTrivial { depth, witnesses })
}

/// A vertex with the moved-measure fraction of the subtree below it.
#[derive(Clone, Debug, Serialize)]
pub struct MovedRatioAtVertex {
    pub vertex: Vertex,
    pub level: usize,
    #[serde(with = "crate::measure::ratio_serde")]
    pub ratio: BigRational,
    pub exact: bool,
}

/// Outcome of a degeneracy scan.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum DegeneracyVerdict {
    /// An exactly resolved fixed vertex shows a moved fraction below the
    /// threshold, so no uniform bound `alpha >= threshold` can exist.
    Refutes { witness: MovedRatioAtVertex },
    /// Nothing exact fell below the threshold at this scale. Not a
    /// certificate — deeper vertices are out of view.
    NoVerdict,
}

/// Scan summary: every fixed vertex down to `max_level` whose section is not
/// the identity, grouped into classes of equal behaviour, each probed for
/// its moved fraction.
#[derive(Clone, Debug, Serialize)]
pub struct DegeneracyReport {
    pub max_level: usize,
    pub probe_depth: usize,
    #[serde(with = "crate::measure::ratio_serde")]
    pub threshold: BigRational,
    /// Behaviour classes of fixed vertices with non-identity sections.
    pub classes_scanned: u64,
    /// Classes whose moved fraction stayed a lower bound at this probe depth.
    pub unresolved: u64,
    /// Smallest exactly resolved moved fraction seen.
    pub minimum_exact: Option<MovedRatioAtVertex>,
    pub verdict: DegeneracyVerdict,
}

/// Walk the fixed vertices of `g` down to `max_level` (level order,
/// deduplicated by behaviour class, lexicographically least representative)
/// and probe the moved fraction below each one with a non-identity section.
/// Refutes `alpha >= threshold` only on an exact ratio strictly below it.
pub fn degeneracy_scan(
    g: &TreeAutomorphism,
    max_level: usize,
    probe_depth: usize,
    threshold: &BigRational,
    limits: &Limits,
) -> Result<DegeneracyReport> {
    let engine = g.engine();
    let mut cache = DpCache::default();
    let mut memo = RatioMemo::default();
    let mut visited: HashSet<(Cursors, usize)> = HashSet::new();
    let mut queue: VecDeque<(Cursors, usize, Vertex)> = VecDeque::new();
    let init = engine.initial_cursors();
    visited.insert((init.clone(), 0));
    queue.push_back((init, 0, Vertex::root()));
    let mut report = DegeneracyReport {
        max_level,
        probe_depth,
        threshold: threshold.clone(),
        classes_scanned: 0,
        unresolved: 0,
        minimum_exact: None,
        verdict: DegeneracyVerdict::NoVerdict,
    };
    while let Some((cursors, level, vertex)) = queue.pop_front() {
        let status = engine.status(&cursors, level)?;
        if status == Some(InfiniteStatus::Identity) {
            // Trivial section: nothing below it can matter either.
            continue;
        }
        report.classes_scanned += 1;
        let (value, exact) =
            moved_ratio_rec(&engine, &cursors, level, probe_depth, &mut memo, &mut cache, limits)?;
        if exact {
            let better = report
                .minimum_exact
                .as_ref()
                .map(|m| value < m.ratio)
                .unwrap_or(true);
            if better {
                report.minimum_exact = Some(MovedRatioAtVertex {
                    vertex: vertex.clone(),
                    level,
                    ratio: value.clone(),
                    exact: true,
                });
            }
            if value < *threshold && matches!(report.verdict, DegeneracyVerdict::NoVerdict) {
                report.verdict = DegeneracyVerdict::Refutes {
                    witness: MovedRatioAtVertex { vertex: vertex.clone(), level, ratio: value, exact: true },
                };
            }
        } else {
            report.unresolved += 1;
        }
        if level < max_level && engine.can_step(&cursors) {
            let arity = engine.index().arity(level + 1)?;
            cache.charge(arity, limits, "degeneracy scan")?;
            for k in 0..arity {
                let (out, next) = engine.step(&cursors, level, k)?;
                if out != k {
                    continue;
                }
                let key = (next.clone(), level + 1);
                if visited.insert(key) {
                    queue.push_back((next, level + 1, vertex.child(engine.index(), k)?));
                }
            }
        }
    }
    Ok(report)
}

/// The smallest level at which the element moves a vertex; `None` for the
/// identity. Exact for finite-state and rule representations.
fn min_moved_depth_of(g: &TreeAutomorphism) -> Result<Option<usize>> {
    match g.representation() {
        Representation::Mealy(m) => {
            if m.is_identity() {
                return Ok(None);
            }
            let mut seen = vec![false; m.states().len()];
            let mut frontier = vec![m.initial()];
            seen[m.initial()] = true;
            for depth in 0..m.states().len() {
                if frontier
                    .iter()
                    .any(|&s| m.states()[s].perm.iter().enumerate().any(|(i, &o)| o != i as u64))
                {
                    return Ok(Some(depth + 1));
                }
                let mut next = Vec::new();
                for &s in &frontier {
                    for &t in &m.states()[s].next {
                        if !seen[t] {
                            seen[t] = true;
                            next.push(t);
                        }
                    }
                }
                frontier = next;
            }
            unreachable!("a non-identity machine has a moving reachable state");
        }
        Representation::Rule(r) => Ok(r.min_moved_depth(r.state)),
        Representation::Portrait(_) => Err(Error::Unsupported(
            "minimal moved depth of a truncation says nothing about the full element".into(),
        )),
    }
}

/// How a non-degeneracy certificate was obtained.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "route", rename_all = "snake_case")]
pub enum CertificateRoute {
    /// No fixed vertex carries a non-identity section (identity element, or
    /// nothing is fixed at all): the bound holds vacuously.
    Vacuous { reason: String },
    /// Every vertex moves — the element acts freely at every level.
    FreeAction,
    /// Explicit finite element (a portrait read as identity below its
    /// depth): the minimum over its finitely many fixed vertices, exactly.
    FinitaryExact { fixed_vertices_checked: u64, depth: usize },
    /// Bounded section closure on a constant-arity tree: each non-identity
    /// section has a moved vertex within `min_moved_depth` levels, so every
    /// fixed vertex keeps at least the corresponding cylinder moving.
    SectionClosure { arity: u64, sections: Vec<SectionBound> },
    /// Bounded section closure on a tree with bounded arities: a uniform
    /// depth bound across sections against the largest arity.
    UniformDepth { arity_bound: u64, depth_bound: usize, sections: Vec<SectionBound> },
}

/// One section's contribution to a closure-based certificate.
#[derive(Clone, Debug, Serialize)]
pub struct SectionBound {
    /// Representative vertex where this section occurs.
    pub vertex: Vertex,
    pub min_moved_depth: usize,
}

/// A certified uniform lower bound: below every fixed vertex whose section
/// is not the identity, at least an `alpha` fraction of the subtree moves.
#[derive(Clone, Debug, Serialize)]
pub struct NonDegeneracyCertificate {
    #[serde(with = "crate::measure::ratio_serde")]
    pub alpha: BigRational,
    pub route: CertificateRoute,
}

/// Certification result; `NotCertified` is an honest "no route applied",
/// never a degeneracy claim.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum CertifyOutcome {
    Certified { certificate: NonDegeneracyCertificate },
    NotCertified { reason: String },
}

impl CertifyOutcome {
    pub fn certificate(&self) -> Option<&NonDegeneracyCertificate> {
        match self {
            CertifyOutcome::Certified { certificate } => Some(certificate),
            CertifyOutcome::NotCertified { .. } => None,
        }
    }
}

const CLOSURE_SECTION_CAP: usize = 64;
const CLOSURE_DEPTH_CAP: usize = 64;

/// Try to certify a uniform moved-measure bound for `g`.
pub fn certify_nondegenerate(g: &TreeAutomorphism, limits: &Limits) -> Result<CertifyOutcome> {
    match g.status()? {
        Some(InfiniteStatus::Identity) => {
            return Ok(CertifyOutcome::Certified {
                certificate: NonDegeneracyCertificate {
                    alpha: BigRational::one(),
                    route: CertificateRoute::Vacuous {
                        reason: "the identity has no non-identity sections".into(),
                    },
                },
            })
        }
        Some(InfiniteStatus::FullyMoved) => {
            return Ok(CertifyOutcome::Certified {
                certificate: NonDegeneracyCertificate {
                    alpha: BigRational::one(),
                    route: CertificateRoute::FreeAction,
                },
            })
        }
        _ => {}
    }
    if let Representation::Portrait(_) = g.representation() {
        return certify_finitary(g, limits);
    }
    let closure = g.section_closure(CLOSURE_SECTION_CAP, CLOSURE_DEPTH_CAP, limits)?;
    if closure.bounded == crate::aut::Boundedness::Exhausted {
        return Ok(CertifyOutcome::NotCertified {
            reason: format!(
                "the section closure did not close within {} sections / {} levels",
                CLOSURE_SECTION_CAP, CLOSURE_DEPTH_CAP
            ),
        });
    }
    let Some(arity_bound) = g.index().max_arity() else {
        return Ok(CertifyOutcome::NotCertified {
            reason: "arities grow without bound, so no uniform cylinder measure exists".into(),
        });
    };
    let mut sections = Vec::new();
    let mut depth_bound = 0usize;
    for (vertex, section) in &closure.sections {
        if let Some(d) = min_moved_depth_of(section)? {
            depth_bound = depth_bound.max(d);
            sections.push(SectionBound { vertex: vertex.clone(), min_moved_depth: d });
        }
    }
    if sections.is_empty() {
        return Ok(CertifyOutcome::Certified {
            certificate: NonDegeneracyCertificate {
                alpha: BigRational::one(),
                route: CertificateRoute::Vacuous {
                    reason: "every section in the closure is the identity".into(),
                },
            },
        });
    }
    let alpha = pow_inv(arity_bound, depth_bound);
    let route = if g.index().constant_arity().is_some() {
        CertificateRoute::SectionClosure { arity: arity_bound, sections }
    } else {
        CertificateRoute::UniformDepth { arity_bound, depth_bound, sections }
    };
    Ok(CertifyOutcome::Certified {
        certificate: NonDegeneracyCertificate { alpha, route },
    })
}

fn pow_inv(base: u64, exp: usize) -> BigRational {
    let mut den = BigInt::one();
    for _ in 0..exp {
        den *= BigInt::from(base);
    }
    BigRational::new(BigInt::one(), den)
}

/// Exact minimum over the fixed vertices of a finite element (the portrait
/// extended by the identity below its stored depth).
fn certify_finitary(g: &TreeAutomorphism, limits: &Limits) -> Result<CertifyOutcome> {
    let depth = g.depth_limit().expect("portrait route");
    let engine = g.engine();
    let mut cache = DpCache::default();
    let mut queue = VecDeque::from([(engine.initial_cursors(), 0usize)]);
    let mut alpha: Option<BigRational> = None;
    let mut checked = 0u64;
    while let Some((cursors, level)) = queue.pop_front() {
        let window = depth - level;
        if window == 0 || engine.all_fixed(&cursors, level, window, &mut cache, limits)? {
            // Identity below (within the portrait, hence for the completion).
            continue;
        }
        checked += 1;
        let fixed = engine.fixed_count(&cursors, level, window, &mut cache, limits)?;
        let total = g.index().shift(level)?.level_size(window)?;
        let moved = BigRational::one()
            - BigRational::new(BigInt::from(fixed), BigInt::from(total));
        if alpha.as_ref().map(|a| moved < *a).unwrap_or(true) {
            alpha = Some(moved);
        }
        let arity = engine.index().arity(level + 1)?;
        cache.charge(arity, limits, "finitary certification")?;
        for k in 0..arity {
            let (out, next) = engine.step(&cursors, level, k)?;
            if out == k {
                queue.push_back((next, level + 1));
            }
        }
    }
    match alpha {
        None => Ok(CertifyOutcome::Certified {
            certificate: NonDegeneracyCertificate {
                alpha: BigRational::one(),
                route: CertificateRoute::Vacuous {
                    reason: "no fixed vertex carries a non-identity section".into(),
                },
            },
        }),
        Some(alpha) => Ok(CertifyOutcome::Certified {
            certificate: NonDegeneracyCertificate {
                alpha,
                route: CertificateRoute::FinitaryExact { fixed_vertices_checked: checked, depth },
            },
        }),
    }
}

/// Replay statistics for a claimed bound.
#[derive(Clone, Debug, Serialize)]
pub struct ReplayReport {
    pub samples: u64,
    /// Sampled fixed vertices whose moved fraction provably met the bound.
    pub checked: u64,
    /// Samples landing on identity sections (exempt from the bound).
    pub trivial_sections: u64,
    /// Samples the probe could not resolve either way.
    pub unresolved: u64,
    /// Samples with an exact moved fraction strictly below the bound.
    pub failures: u64,
}

impl ReplayReport {
    pub fn passed(&self) -> bool {
        self.failures == 0 && self.unresolved == 0
    }
}

/// Independently re-check a claimed bound `alpha` on randomly sampled fixed
/// vertices of `g` (random walks through fixed children, seeded and
/// reproducible). Every sampled vertex with a non-identity section must show
/// a moved fraction provably `>= alpha`.
pub fn replay_bound(
    g: &TreeAutomorphism,
    alpha: &BigRational,
    samples: u64,
    max_level: usize,
    probe_depth: usize,
    seed: u64,
    limits: &Limits,
) -> Result<ReplayReport> {
    let engine = g.engine();
    let mut cache = DpCache::default();
    let mut memo = RatioMemo::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report =
        ReplayReport { samples, checked: 0, trivial_sections: 0, unresolved: 0, failures: 0 };
    for _ in 0..samples {
        let target = if max_level == 0 { 0 } else { rng.gen_range(1..=max_level) };
        let mut cursors = engine.initial_cursors();
        let mut level = 0usize;
        for _ in 0..target {
            if !engine.can_step(&cursors) {
                break;
            }
            let arity = engine.index().arity(level + 1)?;
            cache.charge(arity, limits, "fixed-vertex sampling")?;
            let mut fixed_children = Vec::new();
            for k in 0..arity {
                let (out, next) = engine.step(&cursors, level, k)?;
                if out == k {
                    fixed_children.push(next);
                }
            }
            if fixed_children.is_empty() {
                break;
            }
            let pick = rng.gen_range(0..fixed_children.len());
            cursors = fixed_children.swap_remove(pick);
            level += 1;
        }
        if engine.status(&cursors, level)? == Some(InfiniteStatus::Identity) {
            report.trivial_sections += 1;
            continue;
        }
        let (value, exact) =
            moved_ratio_rec(&engine, &cursors, level, probe_depth, &mut memo, &mut cache, limits)?;
        if value >= *alpha {
            report.checked += 1;
        } else if exact {
            report.failures += 1;
        } else {
            report.unresolved += 1;
        }
    }
    Ok(report)
}

/// A scale-limited quasi-analyticity counterexample: the element acts as the
/// identity on the whole subtree below `identity_region` (for `window`
/// levels) while provably moving something below its parent
/// `active_region` within the same window.
#[derive(Clone, Debug, Serialize)]
pub struct LqaWitness {
    #[serde(skip)]
    pub word: GroupWord,
    pub element: String,
    pub active_region: Vertex,
    pub identity_region: Vertex,
    pub window: usize,
}

/// Scan the word ball of `action` for identity-region witnesses.
///
/// For each non-trivial ball element, walk its fixed vertices down to
/// `max_level` (level order) and emit every maximal vertex whose subtree is
/// entirely fixed for `window` further levels; the parent retains movement
/// within its own window, which is what makes the pair a witness. An empty
/// result is a statement about this scale only.
pub fn lqa_witness_search(
    action: &GeneratedAction,
    radius: usize,
    window: usize,
    max_level: usize,
    limits: &Limits,
) -> Result<Vec<LqaWitness>> {
    let ball = action.ball(radius, max_level + window, limits)?;
    let mut witnesses = Vec::new();
    let mut visited_total: u64 = 0;
    for i in 1..ball.len() {
        let word = ball.word(i);
        let engine = action.engine_for_word(word);
        let mut cache = DpCache::default();
        let init = engine.initial_cursors();
        if engine.all_fixed(&init, 0, window, &mut cache, limits)? {
            // Identity at this scale: no witness can name it.
            continue;
        }
        let mut queue = VecDeque::from([(Vertex::root(), init)]);
        while let Some((v, cursors)) = queue.pop_front() {
            if v.level() >= max_level {
                continue;
            }
            visited_total += 1;
            if visited_total > limits.search_cap {
                return Err(Error::SearchCapExceeded {
                    during: "identity-region search",
                    cap: limits.search_cap,
                });
            }
            let arity = engine.index().arity(v.level() + 1)?;
            cache.charge(arity, limits, "identity-region search")?;
            for k in 0..arity {
                let (out, next) = engine.step(&cursors, v.level(), k)?;
                if out != k {
                    continue; // moved child: nothing below it is fixed
                }
                let child = v.child(engine.index(), k)?;
                if engine.all_fixed(&next, child.level(), window, &mut cache, limits)? {
                    witnesses.push(LqaWitness {
                        word: word.clone(),
                        element: action.word_to_string(word),
                        active_region: v.clone(),
                        identity_region: child,
                        window,
                    });
                } else {
                    queue.push_back((child, next));
                }
            }
        }
    }
    Ok(witnesses)
}

/// One split in a distinct-stabilizer tree: an element with a certified
/// identity region and a certified moved region, partitioning the candidate
/// points by depth-`L` stabilizer membership.
#[derive(Clone, Debug, Serialize)]
pub struct StabilizerSplit {
    pub label: String,
    #[serde(skip)]
    pub word: GroupWord,
    pub element: String,
    pub identity_region: Vertex,
    pub moved_region: Vertex,
}

/// A separated pair of output points with the element telling them apart.
#[derive(Clone, Debug, Serialize)]
pub struct SeparatedPair {
    pub left: usize,
    pub right: usize,
    pub element: String,
    /// The split this separator came from (`left` is on its fixed side).
    pub split_label: String,
}

/// `2^n` orbit points with pairwise distinct depth-`L` stabilizer word sets.
#[derive(Clone, Debug, Serialize)]
pub struct DistinctStabilizerReport {
    pub depth: usize,
    pub radius: usize,
    pub points: Vec<BoundaryPrefix>,
    pub labels: Vec<String>,
    pub splits: Vec<StabilizerSplit>,
    pub pairs: Vec<SeparatedPair>,
    pub verified: bool,
}

/// Build a binary tree of stabilizer-splitting elements over orbit points of
/// the all-zero ray, mirrored on the proof that distinct stabilizers come in
/// `2^n` families: each internal node carries an element that is the
/// identity on one certified region and fixed-point free on another, and the
/// points inherit one side per ancestor. All `C(2^n, 2)` pairs are verified
/// by their separating element before the report is returned.
pub fn distinct_stabilizer_tree(
    action: &GeneratedAction,
    radius: usize,
    depth: usize,
    n: usize,
    limits: &Limits,
) -> Result<DistinctStabilizerReport> {
    if n == 0 || depth == 0 {
        return Err(Error::Unsupported("need n >= 1 and a positive depth".into()));
    }
    let ball = action.ball(radius, depth, limits)?;
    let base = BoundaryPrefix::new(action.index(), vec![0; depth])?;
    // Candidate points: distinct orbit images of the base ray under ball
    // words, in ball order.
    let mut pool: Vec<BoundaryPrefix> = Vec::new();
    for word in ball.words() {
        let img = action.apply_word_to_prefix(word, &base)?;
        if !pool.contains(&img) {
            pool.push(img);
        }
    }
    // stab[e][p]: does ball element e fix pool point p digit-for-digit?
    let mut stab: Vec<Vec<bool>> = Vec::with_capacity(ball.len());
    for e in 0..ball.len() {
        let word = ball.word(e);
        let mut row = Vec::with_capacity(pool.len());
        for p in &pool {
            row.push(action.apply_word(word, p.digits())? == p.digits());
        }
        stab.push(row);
    }
    let mut regions: Vec<Option<Option<(Vertex, Vertex)>>> = vec![None; ball.len()];
    let mut splits = Vec::new();
    let mut leaves = Vec::new();
    let all: Vec<usize> = (0..pool.len()).collect();
    let ok = build_split_tree(
        action,
        &ball,
        &stab,
        &mut regions,
        String::new(),
        &all,
        n,
        depth,
        limits,
        &mut splits,
        &mut leaves,
    )?;
    if !ok {
        return Err(Error::SearchExhausted(format!(
            "no stabilizer-splitting tree of depth {n} within radius {radius} at depth {depth}"
        )));
    }
    // Labels in construction order are exactly the binary strings in order.
    let labels: Vec<String> =
        (0..1usize << n).map(|i| format!("{:0width$b}", i, width = n)).collect();
    let points: Vec<BoundaryPrefix> = leaves.iter().map(|&p| pool[p].clone()).collect();
    // Belt and braces: verify every pair through its separating split.
    let mut pairs = Vec::new();
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            let t = labels[i]
                .bytes()
                .zip(labels[j].bytes())
                .position(|(a, b)| a != b)
                .expect("distinct labels");
            let split_label = labels[i][..t].to_string();
            let split = splits
                .iter()
                .find(|s| s.label == split_label)
                .expect("every internal node was recorded");
            let e = ball
                .words()
                .position(|w| *w == split.word)
                .expect("split words come from the ball");
            // labels[i] has 0 at position t (binary order), so the split
            // element must fix point i and move point j.
            if !stab[e][leaves[i]] || stab[e][leaves[j]] {
                return Err(Error::SearchExhausted(
                    "separator verification failed; this is a bug".into(),
                ));
            }
            pairs.push(SeparatedPair {
                left: i,
                right: j,
                element: split.element.clone(),
                split_label,
            });
        }
    }
    Ok(DistinctStabilizerReport {
        depth,
        radius,
        points,
        labels,
        splits,
        pairs,
        verified: true,
    })
}

#[allow(clippy::too_many_arguments)]
fn build_split_tree(
    action: &GeneratedAction,
    ball: &crate::action::WordBall,
    stab: &[Vec<bool>],
    regions: &mut Vec<Option<Option<(Vertex, Vertex)>>>,
    label: String,
    candidates: &[usize],
    remaining: usize,
    depth: usize,
    limits: &Limits,
    splits: &mut Vec<StabilizerSplit>,
    leaves: &mut Vec<usize>,
) -> Result<bool> {
    if remaining == 0 {
        match candidates.first() {
            Some(&p) => {
                leaves.push(p);
                return Ok(true);
            }
            None => return Ok(false),
        }
    }
    for e in 1..ball.len() {
        let fixed: Vec<usize> = candidates.iter().copied().filter(|&p| stab[e][p]).collect();
        let moved: Vec<usize> = candidates.iter().copied().filter(|&p| !stab[e][p]).collect();
        if fixed.is_empty() || moved.is_empty() {
            continue;
        }
        if regions[e].is_none() {
            regions[e] = Some(find_split_regions(action, ball.word(e), depth, limits)?);
        }
        let Some(Some((identity_region, moved_region))) = regions[e].clone() else {
            continue;
        };
        let split_index = splits.len();
        splits.push(StabilizerSplit {
            label: label.clone(),
            word: ball.word(e).clone(),
            element: action.word_to_string(ball.word(e)),
            identity_region,
            moved_region,
        });
        let leaves_before = leaves.len();
        if build_split_tree(
            action,
            ball,
            stab,
            regions,
            format!("{label}0"),
            &fixed,
            remaining - 1,
            depth,
            limits,
            splits,
            leaves,
        )? && build_split_tree(
            action,
            ball,
            stab,
            regions,
            format!("{label}1"),
            &moved,
            remaining - 1,
            depth,
            limits,
            splits,
            leaves,
        )? {
            return Ok(true);
        }
        splits.truncate(split_index);
        leaves.truncate(leaves_before);
    }
    Ok(false)
}

/// Certified regions for a split element: the first vertex (level order)
/// whose subtree the element fixes entirely down to `depth`, and the first
/// vertex whose cylinder provably contains no point fixed to `depth`.
fn find_split_regions(
    action: &GeneratedAction,
    word: &GroupWord,
    depth: usize,
    limits: &Limits,
) -> Result<Option<(Vertex, Vertex)>> {
    let engine = action.engine_for_word(word);
    let mut cache = DpCache::default();
    let mut identity_region: Option<Vertex> = None;
    let mut moved_region: Option<Vertex> = None;
    let mut queue = VecDeque::from([(Vertex::root(), engine.initial_cursors())]);
    let mut visited: u64 = 0;
    while let Some((v, cursors)) = queue.pop_front() {
        if identity_region.is_some() && moved_region.is_some() {
            break;
        }
        if v.level() >= depth {
            continue;
        }
        visited += 1;
        if visited > limits.search_cap {
            return Err(Error::SearchCapExceeded {
                during: "split-region search",
                cap: limits.search_cap,
            });
        }
        let window = depth - v.level();
        if moved_region.is_none()
            && v.level() > 0
            && engine.none_fixed(&cursors, v.level(), window, &mut cache, limits)?
        {
            moved_region = Some(v.clone());
            continue;
        }
        let arity = engine.index().arity(v.level() + 1)?;
        cache.charge(arity, limits, "split-region search")?;
        for k in 0..arity {
            let (out, next) = engine.step(&cursors, v.level(), k)?;
            let child = v.child(engine.index(), k)?;
            if out != k {
                // Every point through a moved vertex is moved.
                if moved_region.is_none() {
                    moved_region = Some(child);
                }
                continue;
            }
            if identity_region.is_none()
                && engine.all_fixed(&next, child.level(), depth - child.level(), &mut cache, limits)?
            {
                identity_region = Some(child);
                continue;
            }
            queue.push_back((child, next));
        }
    }
    Ok(identity_region.zip(moved_region))
}
