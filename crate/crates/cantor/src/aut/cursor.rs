//! Shared evaluation engine for compositions of automorphisms.
//!
//! A composite element `g_n ∘ ... ∘ g_1` is evaluated digit by digit: each
//! factor consumes the previous factor's output digit and advances its own
//! cursor (a Mealy state, a rule state, or a portrait node). The vector of
//! cursors determines everything the composite does below the current
//! vertex, so it doubles as a memoization key for the subtree dynamic
//! programs: exact fixed-word counts, all/none-fixed predicates (with early
//! exit), structural subtree signatures for deduplication, and pairwise
//! equality to a depth.
//!
//! Levels enter the memo keys only through [`SphericalIndex::level_key`], so
//! on (eventually) periodic indices the caches collapse across levels with
//! identical arity tails.

use crate::aut::mealy::MealyMachine;
use crate::aut::portrait::{ArenaBuilder, Portrait};
use crate::aut::rule::{InfiniteStatus, RuleAut, RuleState};
use crate::error::{Error, Result};
use crate::index::SphericalIndex;
use crate::Limits;
use num::{BigUint, One, Zero};
use std::collections::HashMap;

/// The behaviour of one factor (borrowed from its owning element).
#[derive(Clone, Copy)]
pub(crate) enum AtomBehavior<'a> {
    Mealy(&'a MealyMachine),
    Rule(RuleAut),
    Portrait(&'a Portrait),
}

/// Where one factor currently is. `Portrait(None)` means the stored depth is
/// exhausted: any further step is an error, never a guess.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) enum AtomCursor {
    Mealy(usize),
    Rule(RuleState),
    Portrait(Option<u32>),
}

pub(crate) type Cursors = Vec<AtomCursor>;

type Key = (Cursors, usize, usize);

/// Memo tables plus the work meter. One cache may be shared across calls as
/// long as every call uses the same engine (same factors, same index).
#[derive(Default)]
pub(crate) struct DpCache {
    fixed: HashMap<Key, BigUint>,
    all_fixed: HashMap<Key, bool>,
    none_fixed: HashMap<Key, bool>,
    sig: HashMap<Key, u128>,
    pub work: u64,
}

impl DpCache {
    pub(crate) fn charge(&mut self, amount: u64, limits: &Limits, during: &'static str) -> Result<()> {
        self.work = self.work.saturating_add(amount);
        if self.work > limits.work_budget {
            Err(Error::BudgetExhausted { during, budget: limits.work_budget })
        } else {
            Ok(())
        }
    }
}

fn mix(h: u128, x: u128) -> u128 {
    let mut v = h ^ x.wrapping_mul(0x9e3779b97f4a7c15f39cc0605cedc835);
    v = v.wrapping_mul(0x2545f4914f6cdd1d2545f4914f6cdd1d);
    v ^ (v >> 67) ^ (v << 3)
}

/// Evaluator for a fixed sequence of factors; `atoms[0]` is applied first.
pub(crate) struct Engine<'a> {
    index: &'a SphericalIndex,
    atoms: Vec<AtomBehavior<'a>>,
}

impl<'a> Engine<'a> {
    pub fn new(index: &'a SphericalIndex, atoms: Vec<AtomBehavior<'a>>) -> Self {
        Engine { index, atoms }
    }

    pub fn index(&self) -> &SphericalIndex {
        self.index
    }

    /// The cursor vector at the root.
    pub fn initial_cursors(&self) -> Cursors {
        self.atoms
            .iter()
            .map(|a| match a {
                AtomBehavior::Mealy(m) => AtomCursor::Mealy(m.initial()),
                AtomBehavior::Rule(r) => AtomCursor::Rule(r.state),
                AtomBehavior::Portrait(p) => AtomCursor::Portrait(p.root_node()),
            })
            .collect()
    }

    /// Whether one more digit can be consumed (false once a portrait factor
    /// has run out of stored depth).
    pub fn can_step(&self, cursors: &Cursors) -> bool {
        cursors.iter().all(|c| !matches!(c, AtomCursor::Portrait(None)))
    }

    /// One digit at a level of the tree: `level` digits are already consumed,
    /// so the arity in force is that of `level + 1`.
    pub fn step(&self, cursors: &Cursors, level: usize, digit: u64) -> Result<(u64, Cursors)> {
        let arity = self.index.arity(level + 1)?;
        debug_assert!(digit < arity);
        let mut d = digit;
        let mut next = Vec::with_capacity(cursors.len());
        for (atom, cur) in self.atoms.iter().zip(cursors.iter()) {
            match (atom, cur) {
                (AtomBehavior::Mealy(m), AtomCursor::Mealy(s)) => {
                    let (out, ns) = m.step(*s, d);
                    d = out;
                    next.push(AtomCursor::Mealy(ns));
                }
                (AtomBehavior::Rule(rule), AtomCursor::Rule(state)) => {
                    let (out, ns) = rule.step_from(*state, d, arity);
                    d = out;
                    next.push(AtomCursor::Rule(ns));
                }
                (AtomBehavior::Portrait(p), AtomCursor::Portrait(Some(node))) => {
                    let out = p.perm_at(*node)[d as usize];
                    next.push(AtomCursor::Portrait(p.child_at(*node, d)));
                    d = out;
                }
                (AtomBehavior::Portrait(p), AtomCursor::Portrait(None)) => {
                    return Err(Error::BeyondPortraitDepth {
                        depth: level + 1,
                        portrait_depth: p.depth(),
                    });
                }
                _ => unreachable!("cursor shape always matches atom shape"),
            }
        }
        Ok((d, next))
    }

    /// Image of a digit string starting at `level` with the given cursors.
    pub fn apply(
        &self,
        cursors: &Cursors,
        level: usize,
        digits: &[u64],
    ) -> Result<(Vec<u64>, Cursors)> {
        let mut cur = cursors.clone();
        let mut out = Vec::with_capacity(digits.len());
        for (i, &d) in digits.iter().enumerate() {
            let arity = self.index.arity(level + i + 1)?;
            if d >= arity {
                return Err(Error::DigitOutOfRange { level: level + i + 1, digit: d, arity });
            }
            let (o, next) = self.step(&cur, level + i, d)?;
            out.push(o);
            cur = next;
        }
        Ok((out, cur))
    }

    /// Number of depth-`depth` digit strings below the current vertex whose
    /// entire path is fixed. Exact (big integer).
    pub fn fixed_count(
        &self,
        cursors: &Cursors,
        level: usize,
        depth: usize,
        cache: &mut DpCache,
        limits: &Limits,
    ) -> Result<BigUint> {
        if depth == 0 {
            return Ok(BigUint::one());
        }
        let key = (cursors.clone(), self.index.level_key(level), depth);
        if let Some(v) = cache.fixed.get(&key) {
            return Ok(v.clone());
        }
        let arity = self.index.arity(level + 1)?;
        cache.charge(arity, limits, "fixed-word count")?;
        let mut total = BigUint::zero();
        for k in 0..arity {
            let (out, next) = self.step(cursors, level, k)?;
            if out == k {
                total += self.fixed_count(&next, level + 1, depth - 1, cache, limits)?;
            }
        }
        cache.fixed.insert(key, total.clone());
        Ok(total)
    }

    /// Whether *every* digit string down to `depth` is fixed (identity below
    /// the vertex, to that depth). Early-exits on the first moved vertex.
    pub fn all_fixed(
        &self,
        cursors: &Cursors,
        level: usize,
        depth: usize,
        cache: &mut DpCache,
        limits: &Limits,
    ) -> Result<bool> {
        if depth == 0 {
            return Ok(true);
        }
        let key = (cursors.clone(), self.index.level_key(level), depth);
        if let Some(v) = cache.all_fixed.get(&key) {
            return Ok(*v);
        }
        let arity = self.index.arity(level + 1)?;
        cache.charge(arity, limits, "identity-below check")?;
        let mut result = true;
        for k in 0..arity {
            let (out, next) = self.step(cursors, level, k)?;
            if out != k || !self.all_fixed(&next, level + 1, depth - 1, cache, limits)? {
                result = false;
                break;
            }
        }
        cache.all_fixed.insert(key, result);
        Ok(result)
    }

    /// Whether *no* digit string of exactly `depth` digits is fixed, i.e.
    /// every boundary point below the vertex provably moves within `depth`
    /// levels. (`depth = 0` is `false`: the vertex itself counts as fixed.)
    pub fn none_fixed(
        &self,
        cursors: &Cursors,
        level: usize,
        depth: usize,
        cache: &mut DpCache,
        limits: &Limits,
    ) -> Result<bool> {
        if depth == 0 {
            return Ok(false);
        }
        let key = (cursors.clone(), self.index.level_key(level), depth);
        if let Some(v) = cache.none_fixed.get(&key) {
            return Ok(*v);
        }
        let arity = self.index.arity(level + 1)?;
        cache.charge(arity, limits, "fixed-point-free check")?;
        let mut result = true;
        for k in 0..arity {
            let (out, next) = self.step(cursors, level, k)?;
            if out == k && !self.none_fixed(&next, level + 1, depth - 1, cache, limits)? {
                result = false;
                break;
            }
        }
        cache.none_fixed.insert(key, result);
        Ok(result)
    }

    /// Structural hash of the action truncated to `depth`. Used to bucket
    /// candidates for deduplication; buckets are always confirmed by an exact
    /// depth-capped comparison before anything is merged.
    pub fn subtree_sig(
        &self,
        cursors: &Cursors,
        level: usize,
        depth: usize,
        cache: &mut DpCache,
        limits: &Limits,
    ) -> Result<u128> {
        if depth == 0 {
            return Ok(0x517cc1b727220a95);
        }
        let key = (cursors.clone(), self.index.level_key(level), depth);
        if let Some(v) = cache.sig.get(&key) {
            return Ok(*v);
        }
        let arity = self.index.arity(level + 1)?;
        cache.charge(arity, limits, "subtree signature")?;
        let mut h = 0xa0761d6478bd642fu128 ^ (depth as u128);
        for k in 0..arity {
            let (out, next) = self.step(cursors, level, k)?;
            h = mix(h, out as u128 + 1);
            h = mix(h, self.subtree_sig(&next, level + 1, depth - 1, cache, limits)?);
        }
        cache.sig.insert(key, h);
        Ok(h)
    }

    /// Lower the composite at the given cursors to an explicit portrait of
    /// `depth` levels, rooted at a vertex of level `level` (so the portrait
    /// lives on the shifted index).
    pub fn materialize(
        &self,
        cursors: &Cursors,
        level: usize,
        depth: usize,
        node_cap: u64,
    ) -> Result<Portrait> {
        let mut builder = ArenaBuilder::new();
        if depth > 0 {
            self.materialize_node(cursors, level, depth, node_cap, &mut builder)?;
        }
        builder.finish(self.index.shift(level)?, depth)
    }

    fn materialize_node(
        &self,
        cursors: &Cursors,
        level: usize,
        depth: usize,
        node_cap: u64,
        builder: &mut ArenaBuilder,
    ) -> Result<u32> {
        let arity = self.index.arity(level + 1)?;
        let mut perm = Vec::with_capacity(arity as usize);
        let mut nexts = Vec::with_capacity(arity as usize);
        for k in 0..arity {
            let (out, next) = self.step(cursors, level, k)?;
            perm.push(out);
            nexts.push(next);
        }
        let children = if depth > 1 {
            nexts
                .iter()
                .map(|n| self.materialize_node(n, level + 1, depth - 1, node_cap, builder))
                .collect::<Result<Vec<u32>>>()?
        } else {
            vec![]
        };
        builder.push(perm, children, node_cap)
    }

    /// Exact infinite-depth classification of the subtree action, where one
    /// is available without enumeration: single Mealy or rule factors answer
    /// exactly; portraits answer only when everything else already has
    /// (finite truncations cannot speak for the whole subtree). Composites
    /// resolve when at most one factor is a non-identity with known status.
    pub fn status(&self, cursors: &Cursors, level: usize) -> Result<Option<InfiniteStatus>> {
        let mut combined = InfiniteStatus::Identity;
        for (atom, cur) in self.atoms.iter().zip(cursors.iter()) {
            let status = self.atom_status(atom, cur, level)?;
            match status {
                Some(InfiniteStatus::Identity) => {}
                Some(s) => {
                    if combined == InfiniteStatus::Identity {
                        combined = s;
                    } else {
                        return Ok(None);
                    }
                }
                None => return Ok(None),
            }
        }
        Ok(Some(combined))
    }

    fn atom_status(
        &self,
        atom: &AtomBehavior<'a>,
        cur: &AtomCursor,
        level: usize,
    ) -> Result<Option<InfiniteStatus>> {
        Ok(match (atom, cur) {
            (AtomBehavior::Mealy(m), AtomCursor::Mealy(s)) => {
                let from_here = m.with_initial(*s);
                if from_here.is_identity() {
                    Some(InfiniteStatus::Identity)
                } else if m.states()[*s].perm.iter().enumerate().all(|(i, &o)| o != i as u64) {
                    // No fixed child: every deeper vertex sits under a moved
                    // one and is moved itself.
                    Some(InfiniteStatus::FullyMoved)
                } else {
                    Some(InfiniteStatus::Mixed)
                }
            }
            (AtomBehavior::Rule(rule), AtomCursor::Rule(state)) => {
                let next_arity_is_two = match self.index.arity(level + 1) {
                    Ok(a) => a == 2,
                    // Too large for u64 is in particular larger than 2.
                    Err(Error::ArityOverflow { .. }) => false,
                    Err(e) => return Err(e),
                };
                Some(rule.status_from(*state, next_arity_is_two))
            }
            (AtomBehavior::Portrait(_), AtomCursor::Portrait(_)) => None,
            _ => unreachable!("cursor shape always matches atom shape"),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aut::mealy::adding_machine;
    use crate::aut::rule::RuleKind;

    fn d2() -> SphericalIndex {
        SphericalIndex::constant(2).unwrap()
    }

    fn rule_engine(index: &SphericalIndex, kind: RuleKind) -> (Engine<'_>, Cursors) {
        let engine = Engine::new(index, vec![AtomBehavior::Rule(RuleAut::standard(kind))]);
        let cursors = engine.initial_cursors();
        (engine, cursors)
    }

    #[test]
    fn composite_application_threads_digits() {
        // a then a^{-1} is the identity on every word.
        let idx = d2();
        let a = adding_machine(2).unwrap();
        let ainv = a.inverse();
        let engine = Engine::new(&idx, vec![AtomBehavior::Mealy(&a), AtomBehavior::Mealy(&ainv)]);
        let cur = engine.initial_cursors();
        let limits = Limits::default();
        let mut cache = DpCache::default();
        for depth in 1..=8 {
            assert!(engine.all_fixed(&cur, 0, depth, &mut cache, &limits).unwrap());
        }
        let (out, _) = engine.apply(&cur, 0, &[1, 0, 1, 1]).unwrap();
        assert_eq!(out, vec![1, 0, 1, 1]);
    }

    #[test]
    fn fixed_counts_match_brute_force() {
        let idx = d2();
        let (engine, cur) = rule_engine(&idx, RuleKind::DoublingGraft);
        let limits = Limits::default();
        let mut cache = DpCache::default();
        for depth in 1..=10 {
            let dp = engine.fixed_count(&cur, 0, depth, &mut cache, &limits).unwrap();
            // Brute force over all 2^depth words.
            let mut count = 0u64;
            for w in 0..(1u64 << depth) {
                let digits: Vec<u64> = (0..depth).map(|i| (w >> i) & 1).collect();
                let (out, _) = engine.apply(&cur, 0, &digits).unwrap();
                if out == digits {
                    count += 1;
                }
            }
            assert_eq!(dp, BigUint::from(count), "depth {depth}");
        }
    }

    #[test]
    fn none_fixed_and_all_fixed_bracket_the_count() {
        let idx = d2();
        let (engine, cur) = rule_engine(&idx, RuleKind::LadderGraft);
        let limits = Limits::default();
        let mut cache = DpCache::default();
        // Walk to the graft vertex z = (0,1,0): below it everything moves.
        let (_, at_w) = engine.apply(&cur, 0, &[0, 1]).unwrap();
        let (_, at_z) = engine.apply(&at_w, 2, &[0]).unwrap();
        assert_eq!(at_z, vec![AtomCursor::Rule(RuleState::Carry)]);
        for depth in 1..=6 {
            assert!(engine.none_fixed(&at_z, 3, depth, &mut cache, &limits).unwrap());
            assert!(!engine.all_fixed(&at_z, 3, depth, &mut cache, &limits).unwrap());
            let fc = engine.fixed_count(&at_z, 3, depth, &mut cache, &limits).unwrap();
            assert!(fc.is_zero());
        }
        // Below (1): inert.
        let (_, at_one) = engine.apply(&cur, 0, &[1]).unwrap();
        for depth in 1..=6 {
            assert!(engine.all_fixed(&at_one, 1, depth, &mut cache, &limits).unwrap());
            assert!(!engine.none_fixed(&at_one, 1, depth, &mut cache, &limits).unwrap());
        }
        // Depth 0 conventions.
        assert!(engine.all_fixed(&at_z, 3, 0, &mut cache, &limits).unwrap());
        assert!(!engine.none_fixed(&at_z, 3, 0, &mut cache, &limits).unwrap());
    }

    #[test]
    fn signatures_agree_exactly_when_subtrees_agree() {
        let idx = d2();
        let a = adding_machine(2).unwrap();
        let engine = Engine::new(&idx, vec![AtomBehavior::Mealy(&a)]);
        let limits = Limits::default();
        let mut cache = DpCache::default();
        // The adding machine's section at (1) is the adding machine again,
        // and its section at (0) is the identity-on-first-digit variant.
        let (_, at0) = engine.apply(&engine.initial_cursors(), 0, &[0]).unwrap();
        let (_, at1) = engine.apply(&engine.initial_cursors(), 0, &[1]).unwrap();
        let root = engine.initial_cursors();
        let s_root = engine.subtree_sig(&root, 0, 6, &mut cache, &limits).unwrap();
        let s0 = engine.subtree_sig(&at0, 1, 6, &mut cache, &limits).unwrap();
        let s1 = engine.subtree_sig(&at1, 1, 6, &mut cache, &limits).unwrap();
        assert_ne!(s_root, s0);
        assert_eq!(s_root, s1);
    }

    #[test]
    fn materialized_portraits_replay_the_action() {
        let idx = SphericalIndex::geometric(vec![3], 3).unwrap();
        let (engine, cur) = rule_engine(&idx, RuleKind::LadderGraft);
        let p = engine.materialize(&cur, 0, 4, 1_000_000).unwrap();
        assert_eq!(p.depth(), 4);
        for w in [vec![0, 1, 0, 5], vec![0, 1, 0, 80], vec![2, 0, 0, 0], vec![0, 0, 1, 0]] {
            let (direct, _) = engine.apply(&cur, 0, &w).unwrap();
            assert_eq!(p.apply(&w).unwrap(), direct);
        }
        // Sections of the materialized portrait live on the shifted index.
        let at_w = p.section(&crate::word::Vertex::new(&idx, vec![0, 1]).unwrap()).unwrap();
        assert_eq!(*at_w.index(), idx.shift(2).unwrap());
    }

    #[test]
    fn statuses_resolve_single_factors_exactly() {
        let idx = d2();
        let a = adding_machine(2).unwrap();
        let engine = Engine::new(&idx, vec![AtomBehavior::Mealy(&a)]);
        assert_eq!(
            engine.status(&engine.initial_cursors(), 0).unwrap(),
            Some(InfiniteStatus::FullyMoved)
        );
        let (_, at0) = engine.apply(&engine.initial_cursors(), 0, &[0]).unwrap();
        assert_eq!(engine.status(&at0, 1).unwrap(), Some(InfiniteStatus::Identity));
        let (_, at1) = engine.apply(&engine.initial_cursors(), 0, &[1]).unwrap();
        assert_eq!(engine.status(&at1, 1).unwrap(), Some(InfiniteStatus::FullyMoved));

        let (rule_eng, cur) = rule_engine(&idx, RuleKind::DoublingGraft);
        assert_eq!(rule_eng.status(&cur, 0).unwrap(), Some(InfiniteStatus::Mixed));

        // A portrait factor cannot speak for infinite depth.
        let p = rule_eng.materialize(&cur, 0, 3, 1000).unwrap();
        let p_engine = Engine::new(&idx, vec![AtomBehavior::Portrait(&p)]);
        assert_eq!(p_engine.status(&p_engine.initial_cursors(), 0).unwrap(), None);
    }
}
