//! Finite-state recursions on a regular `d`-ary tree.
//!
//! A machine reads a digit string from the root; in state `s` it outputs
//! `perm[digit]` and continues in `next[digit]`. Since every per-state output
//! map is a permutation, the induced map on digit strings is a tree
//! automorphism, and the machine *is* a finite description of the whole
//! (generally infinite) portrait. Products, inverses and exact equality stay
//! inside this class, which is what makes exact infinite-depth statements
//! possible on constant-arity trees.

use crate::error::{Error, Result};
use std::collections::HashMap;

/// One state of a [`MealyMachine`]: an output permutation and a successor
/// state per input digit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MealyState {
    pub name: String,
    pub perm: Vec<u64>,
    pub next: Vec<usize>,
}

/// Deterministic finite-state tree automorphism on the `d`-ary tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MealyMachine {
    alphabet: u64,
    states: Vec<MealyState>,
    initial: usize,
}

/// Canonical fingerprint of the boundary action of a machine: alphabet plus
/// the transition table of the minimized machine, numbered breadth-first from
/// the initial state. Two machines act identically on the whole tree if and
/// only if their keys are equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MealyKey {
    alphabet: u64,
    table: Vec<(Vec<u64>, Vec<usize>)>,
}

impl MealyMachine {
    pub fn new(alphabet: u64, states: Vec<MealyState>, initial: usize) -> Result<Self> {
        if alphabet < 2 {
            return Err(Error::InvalidElement(format!("alphabet {alphabet} below 2")));
        }
        if alphabet > 1_000_000 {
            return Err(Error::InvalidElement(format!("alphabet {alphabet} too large")));
        }
        if states.is_empty() {
            return Err(Error::InvalidElement("machine needs at least one state".into()));
        }
        if initial >= states.len() {
            return Err(Error::InvalidElement("initial state out of range".into()));
        }
        let d = alphabet as usize;
        let mut names = std::collections::BTreeSet::new();
        for st in &states {
            if !names.insert(st.name.clone()) {
                return Err(Error::InvalidElement(format!("duplicate state name '{}'", st.name)));
            }
            if st.perm.len() != d || st.next.len() != d {
                return Err(Error::InvalidElement(format!(
                    "state '{}' must list exactly {d} outputs and successors",
                    st.name
                )));
            }
            let mut seen = vec![false; d];
            for &out in &st.perm {
                if out >= alphabet || seen[out as usize] {
                    return Err(Error::InvalidElement(format!(
                        "state '{}' outputs are not a permutation of 0..{alphabet}",
                        st.name
                    )));
                }
                seen[out as usize] = true;
            }
            for &t in &st.next {
                if t >= states.len() {
                    return Err(Error::InvalidElement(format!(
                        "state '{}' successor {t} out of range",
                        st.name
                    )));
                }
            }
        }
        Ok(MealyMachine { alphabet, states, initial })
    }

    /// The identity automorphism as a one-state machine.
    pub fn identity(alphabet: u64) -> Result<Self> {
        let d = alphabet as usize;
        MealyMachine::new(
            alphabet,
            vec![MealyState {
                name: "id".into(),
                perm: (0..alphabet).collect(),
                next: vec![0; d],
            }],
            0,
        )
    }

    pub fn alphabet(&self) -> u64 {
        self.alphabet
    }

    pub fn states(&self) -> &[MealyState] {
        &self.states
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    /// Output digit and successor state when reading `digit` in `state`.
    pub fn step(&self, state: usize, digit: u64) -> (u64, usize) {
        let st = &self.states[state];
        (st.perm[digit as usize], st.next[digit as usize])
    }

    /// Image of a digit string under the machine started in its initial state.
    pub fn apply(&self, digits: &[u64]) -> Vec<u64> {
        let mut state = self.initial;
        digits
            .iter()
            .map(|&digit| {
                let (out, next) = self.step(state, digit);
                state = next;
                out
            })
            .collect()
    }

    /// The same machine started in `state` (the restriction to a subtree
    /// whose traversal ends in that state).
    pub fn with_initial(&self, state: usize) -> Self {
        let mut m = self.clone();
        m.initial = state;
        m
    }

    /// Machine computing the inverse automorphism. State `s` of the inverse
    /// undoes state `s`: it maps `perm[j] -> j` and continues in the inverse
    /// of wherever the original went on `j`.
    pub fn inverse(&self) -> Self {
        let d = self.alphabet as usize;
        let states = self
            .states
            .iter()
            .map(|st| {
                let mut perm = vec![0u64; d];
                let mut next = vec![0usize; d];
                for j in 0..d {
                    let out = st.perm[j] as usize;
                    perm[out] = j as u64;
                    next[out] = st.next[j];
                }
                MealyState { name: st.name.clone(), perm, next }
            })
            .collect();
        MealyMachine { alphabet: self.alphabet, states, initial: self.initial }
    }

    /// Machine computing `outer ∘ inner` (apply `inner` first). States are
    /// the reachable pairs.
    pub fn product(outer: &Self, inner: &Self) -> Result<Self> {
        if outer.alphabet != inner.alphabet {
            return Err(Error::IndexMismatch);
        }
        let d = outer.alphabet as usize;
        let mut ids: HashMap<(usize, usize), usize> = HashMap::new();
        let mut queue = std::collections::VecDeque::new();
        let start = (outer.initial, inner.initial);
        ids.insert(start, 0);
        queue.push_back(start);
        let mut pairs = vec![start];
        while let Some((so, si)) = queue.pop_front() {
            for k in 0..d {
                let (mid, si2) = inner.step(si, k as u64);
                let (_, so2) = outer.step(so, mid);
                let pair = (so2, si2);
                if !ids.contains_key(&pair) {
                    ids.insert(pair, pairs.len());
                    pairs.push(pair);
                    queue.push_back(pair);
                }
            }
        }
        let states = pairs
            .iter()
            .enumerate()
            .map(|(i, &(so, si))| {
                let mut perm = vec![0u64; d];
                let mut next = vec![0usize; d];
                for k in 0..d {
                    let (mid, si2) = inner.step(si, k as u64);
                    let (out, so2) = outer.step(so, mid);
                    perm[k] = out;
                    next[k] = ids[&(so2, si2)];
                }
                MealyState { name: format!("q{i}"), perm, next }
            })
            .collect();
        Ok(MealyMachine { alphabet: outer.alphabet, states, initial: 0 })
    }

    /// Whether the machine acts as the identity on the entire tree
    /// (equivalently: every reachable state has the trivial output map).
    pub fn is_identity(&self) -> bool {
        let mut seen = vec![false; self.states.len()];
        let mut stack = vec![self.initial];
        seen[self.initial] = true;
        while let Some(s) = stack.pop() {
            let st = &self.states[s];
            if st.perm.iter().enumerate().any(|(i, &out)| out != i as u64) {
                return false;
            }
            for &t in &st.next {
                if !seen[t] {
                    seen[t] = true;
                    stack.push(t);
                }
            }
        }
        true
    }

    /// Minimal machine for the same boundary action, with states numbered
    /// breadth-first from the initial state (a canonical form).
    pub fn minimized(&self) -> Self {
        let d = self.alphabet as usize;
        // Restrict to reachable states first.
        let mut reach = Vec::new();
        let mut idx = vec![usize::MAX; self.states.len()];
        let mut queue = std::collections::VecDeque::from([self.initial]);
        idx[self.initial] = 0;
        reach.push(self.initial);
        while let Some(s) = queue.pop_front() {
            for k in 0..d {
                let t = self.states[s].next[k];
                if idx[t] == usize::MAX {
                    idx[t] = reach.len();
                    reach.push(t);
                    queue.push_back(t);
                }
            }
        }
        // Partition refinement: start from output maps, split on successor
        // classes until stable.
        let mut class: Vec<usize> = {
            let mut by_perm: HashMap<&[u64], usize> = HashMap::new();
            reach
                .iter()
                .map(|&s| {
                    let n = by_perm.len();
                    *by_perm.entry(self.states[s].perm.as_slice()).or_insert(n)
                })
                .collect()
        };
        loop {
            let mut by_sig: HashMap<(usize, Vec<usize>), usize> = HashMap::new();
            let next_class: Vec<usize> = reach
                .iter()
                .enumerate()
                .map(|(i, &s)| {
                    let sig: Vec<usize> =
                        (0..d).map(|k| class[idx[self.states[s].next[k]]]).collect();
                    let n = by_sig.len();
                    *by_sig.entry((class[i], sig)).or_insert(n)
                })
                .collect();
            let stable = by_sig.len() == class.iter().copied().collect::<std::collections::HashSet<_>>().len();
            class = next_class;
            if stable {
                break;
            }
        }
        // Number the classes breadth-first from the initial state's class.
        let class_of = |s: usize| class[idx[s]];
        let mut order: HashMap<usize, usize> = HashMap::new();
        let mut rep: Vec<usize> = Vec::new();
        order.insert(class_of(self.initial), 0);
        rep.push(self.initial);
        let mut head = 0;
        while head < rep.len() {
            let s = rep[head];
            head += 1;
            for k in 0..d {
                let t = self.states[s].next[k];
                if !order.contains_key(&class_of(t)) {
                    order.insert(class_of(t), rep.len());
                    rep.push(t);
                }
            }
        }
        let states = rep
            .iter()
            .enumerate()
            .map(|(i, &s)| MealyState {
                name: format!("s{i}"),
                perm: self.states[s].perm.clone(),
                next: (0..d).map(|k| order[&class_of(self.states[s].next[k])]).collect(),
            })
            .collect();
        MealyMachine { alphabet: self.alphabet, states, initial: 0 }
    }

    /// Canonical fingerprint of the boundary action (see [`MealyKey`]).
    pub fn canonical_key(&self) -> MealyKey {
        let min = self.minimized();
        MealyKey {
            alphabet: min.alphabet,
            table: min.states.into_iter().map(|st| (st.perm, st.next)).collect(),
        }
    }

    /// Exact equality of boundary actions.
    pub fn same_action(&self, other: &Self) -> bool {
        self.alphabet == other.alphabet && self.canonical_key() == other.canonical_key()
    }
}

/// The binary adding machine: adds one with carry to a digit string read
/// least-significant-first, i.e. the cyclic `+1` on `d`-adic integers.
pub fn adding_machine(d: u64) -> Result<MealyMachine> {
    let states = vec![
        MealyState {
            name: "add".into(),
            // digit j -> j+1 and stop carrying, except d-1 -> 0 with carry.
            perm: (0..d).map(|j| (j + 1) % d).collect(),
            next: (0..d).map(|j| if j == d - 1 { 0 } else { 1 }).collect(),
        },
        MealyState {
            name: "id".into(),
            perm: (0..d).collect(),
            next: vec![1; d as usize],
        },
    ];
    MealyMachine::new(d, states, 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    /// Oracle: +k on little-endian base-d strings, as plain arithmetic.
    fn add_oracle(digits: &[u64], d: u64, k: u64) -> Vec<u64> {
        let mut carry = k;
        digits
            .iter()
            .map(|&x| {
                let v = x + carry;
                carry = v / d;
                v % d
            })
            .collect()
    }

    fn negation() -> MealyMachine {
        // Fixes the leading zeros, then flips everything after the first 1:
        // the map x -> -x on 2-adic integers.
        MealyMachine::new(
            2,
            vec![
                MealyState { name: "neg0".into(), perm: vec![0, 1], next: vec![0, 1] },
                MealyState { name: "flip".into(), perm: vec![1, 0], next: vec![1, 1] },
            ],
            0,
        )
        .unwrap()
    }

    #[test]
    fn adding_machine_matches_arithmetic() {
        let a = adding_machine(2).unwrap();
        assert_eq!(a.apply(&[1, 1, 0, 1]), vec![0, 0, 1, 1]);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for d in [2u64, 3, 5] {
            let a = adding_machine(d).unwrap();
            for _ in 0..50 {
                let w: Vec<u64> = (0..12).map(|_| rng.gen_range(0..d)).collect();
                assert_eq!(a.apply(&w), add_oracle(&w, d, 1));
            }
        }
    }

    #[test]
    fn inverse_undoes_the_action() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for m in [adding_machine(2).unwrap(), adding_machine(5).unwrap(), negation()] {
            let inv = m.inverse();
            for _ in 0..50 {
                let w: Vec<u64> = (0..10).map(|_| rng.gen_range(0..m.alphabet())).collect();
                assert_eq!(inv.apply(&m.apply(&w)), w);
                assert_eq!(m.apply(&inv.apply(&w)), w);
            }
        }
    }

    #[test]
    fn products_compose_right_to_left() {
        let a = adding_machine(2).unwrap();
        let aa = MealyMachine::product(&a, &a).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let w: Vec<u64> = (0..12).map(|_| rng.gen_range(0..2)).collect();
            assert_eq!(aa.apply(&w), add_oracle(&w, 2, 2));
        }
        // +2 fixes the first digit and adds one above it: 3 minimal states.
        assert_eq!(aa.minimized().states().len(), 3);
    }

    #[test]
    fn minimization_collapses_cancelling_products() {
        let a = adding_machine(3).unwrap();
        let prod = MealyMachine::product(&a, &a.inverse()).unwrap();
        assert!(prod.is_identity());
        assert_eq!(prod.canonical_key(), MealyMachine::identity(3).unwrap().canonical_key());
    }

    #[test]
    fn canonical_keys_separate_actions() {
        let a = adding_machine(2).unwrap();
        let b = negation();
        assert_ne!(a.canonical_key(), b.canonical_key());
        assert!(!b.is_identity());
        // b is an involution.
        let bb = MealyMachine::product(&b, &b).unwrap();
        assert!(bb.is_identity());
        // Conjugation relation of the infinite dihedral group: b a b = a^{-1}.
        let bab = MealyMachine::product(&MealyMachine::product(&b, &a).unwrap(), &b).unwrap();
        assert!(bab.same_action(&a.inverse()));
        assert!(!bab.same_action(&a));
    }

    #[test]
    fn rejects_malformed_machines() {
        // Output map must be a permutation.
        assert!(MealyMachine::new(
            2,
            vec![MealyState { name: "x".into(), perm: vec![0, 0], next: vec![0, 0] }],
            0,
        )
        .is_err());
        // Successors must exist.
        assert!(MealyMachine::new(
            2,
            vec![MealyState { name: "x".into(), perm: vec![0, 1], next: vec![0, 7] }],
            0,
        )
        .is_err());
        // State names must be distinct.
        assert!(MealyMachine::new(
            2,
            vec![
                MealyState { name: "x".into(), perm: vec![0, 1], next: vec![0, 0] },
                MealyState { name: "x".into(), perm: vec![0, 1], next: vec![1, 1] },
            ],
            0,
        )
        .is_err());
    }
}
