//! Closed-form tree automorphisms that work on any spherical index.
//!
//! Where a Mealy machine is tied to one constant arity, a rule automorphism
//! carries a small hand-written state machine whose transitions consult the
//! arity of the level being read. The states are chosen so that the
//! restriction to any vertex is again a rule automorphism (same kind,
//! different state), which keeps sections and long-range evaluations exact on
//! trees with growing arities.

use serde::{Deserialize, Serialize};

/// The built-in rule families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleKind {
    /// Adds one, with carry, to the digit string read least-significant
    /// digit first: the cyclic `+1` in the mixed-radix integers of the index.
    /// Acts freely: every non-root vertex is moved.
    Odometer,
    /// Swaps the two largest digits at the first position where one of them
    /// occurs and copies everything else. An involution whose fixed set is
    /// the points avoiding the top two digits forever.
    TopPairSwap,
    /// Identity away from the infinite 0-spine; below each vertex
    /// `0^l 1 0` (for every `l >= 1`) it acts as a full odometer on the
    /// subtree. The grafting vertices accumulate along the spine.
    LadderGraft,
    /// Like [`LadderGraft`](RuleKind::LadderGraft) but the grafted
    /// odometers sit below `0^(2^k - 1) 1 0^(2^k)` (for `k >= 1`), so the
    /// branch windows double in depth: identity regions around the spine
    /// grow without bound.
    DoublingGraft,
}

/// Evaluation state of a rule automorphism. `Spine { consumed }` and
/// `ZRun { left }` track how far into the structural pattern the read head
/// is; `Carry` is a live odometer (or its inverse); `Id` is inert.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleState {
    Id,
    Carry,
    Scan,
    Spine { consumed: usize },
    ZRun { left: usize },
}

/// What an element does to the *entire infinite* subtree below a vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InfiniteStatus {
    /// Every vertex below is fixed.
    Identity,
    /// Every vertex strictly below is moved.
    FullyMoved,
    /// Both fixed and moved vertices occur below.
    Mixed,
}

/// A rule automorphism: a kind, a current state, and an orientation.
/// `inverse` turns every grafted `+1` into `-1`; the structural states are
/// symmetric so nothing else changes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RuleAut {
    pub kind: RuleKind,
    pub state: RuleState,
    pub inverse: bool,
}

impl RuleAut {
    /// The element in its defining state at the root.
    pub fn standard(kind: RuleKind) -> Self {
        let state = match kind {
            RuleKind::Odometer => RuleState::Carry,
            RuleKind::TopPairSwap => RuleState::Scan,
            RuleKind::LadderGraft | RuleKind::DoublingGraft => RuleState::Spine { consumed: 0 },
        };
        RuleAut { kind, state, inverse: false }
    }

    /// The inverse automorphism. The top-pair swap is an involution; for the
    /// others only the carry direction flips.
    pub fn invert(&self) -> Self {
        match self.kind {
            RuleKind::TopPairSwap => *self,
            _ => RuleAut { inverse: !self.inverse, ..*self },
        }
    }

    /// Output digit and successor state when reading `digit` at a level of
    /// the given arity, starting from `state`.
    pub fn step_from(&self, state: RuleState, digit: u64, arity: u64) -> (u64, RuleState) {
        match state {
            RuleState::Id => (digit, RuleState::Id),
            RuleState::Carry => {
                if self.inverse {
                    if digit == 0 {
                        (arity - 1, RuleState::Carry)
                    } else {
                        (digit - 1, RuleState::Id)
                    }
                } else if digit == arity - 1 {
                    (0, RuleState::Carry)
                } else {
                    (digit + 1, RuleState::Id)
                }
            }
            RuleState::Scan => {
                if digit >= arity - 2 {
                    let out = if digit == arity - 1 { arity - 2 } else { arity - 1 };
                    (out, RuleState::Id)
                } else {
                    (digit, RuleState::Scan)
                }
            }
            RuleState::Spine { consumed } => {
                if digit == 0 {
                    (0, RuleState::Spine { consumed: consumed + 1 })
                } else if digit == 1 && self.branches_after(consumed) {
                    (1, RuleState::ZRun { left: self.zeros_after_branch(consumed) })
                } else {
                    (digit, RuleState::Id)
                }
            }
            RuleState::ZRun { left } => {
                if digit == 0 {
                    if left == 1 {
                        (0, RuleState::Carry)
                    } else {
                        (0, RuleState::ZRun { left: left - 1 })
                    }
                } else {
                    (digit, RuleState::Id)
                }
            }
        }
    }

    /// Step from the element's own current state.
    pub fn step(&self, digit: u64, arity: u64) -> (u64, RuleAut) {
        let (out, state) = self.step_from(self.state, digit, arity);
        (out, RuleAut { state, ..*self })
    }

    /// Whether reading digit 1 after `consumed` zeros enters a grafting run.
    fn branches_after(&self, consumed: usize) -> bool {
        match self.kind {
            RuleKind::LadderGraft => consumed >= 1,
            RuleKind::DoublingGraft => {
                let level = consumed + 1;
                level >= 2 && level.is_power_of_two()
            }
            _ => false,
        }
    }

    /// Number of zeros between the branch digit and the grafted odometer.
    fn zeros_after_branch(&self, consumed: usize) -> usize {
        match self.kind {
            RuleKind::LadderGraft => 1,
            RuleKind::DoublingGraft => consumed + 1,
            _ => 0,
        }
    }

    /// Exact infinite-depth classification of the subtree action in `state`.
    /// `next_arity_is_two` must say whether the next level has arity exactly
    /// 2 (only the scan state's answer depends on it).
    pub fn status_from(&self, state: RuleState, next_arity_is_two: bool) -> InfiniteStatus {
        match state {
            RuleState::Id => InfiniteStatus::Identity,
            RuleState::Carry => InfiniteStatus::FullyMoved,
            // With only two digits both are "the top two", so everything at
            // the next level is swapped and all deeper vertices move with it.
            RuleState::Scan => {
                if next_arity_is_two {
                    InfiniteStatus::FullyMoved
                } else {
                    InfiniteStatus::Mixed
                }
            }
            // A spine or run vertex always has an inert escape digit and a
            // grafted odometer further down.
            RuleState::Spine { .. } | RuleState::ZRun { .. } => InfiniteStatus::Mixed,
        }
    }

    /// Smallest relative depth of a moved vertex below a vertex whose
    /// restriction is in `state` (`None` for the identity state). This is
    /// independent of the index because every arity is at least 2.
    pub fn min_moved_depth(&self, state: RuleState) -> Option<usize> {
        match state {
            RuleState::Id => None,
            RuleState::Carry => Some(1),
            RuleState::Scan => Some(1),
            RuleState::ZRun { left } => Some(left + 1),
            RuleState::Spine { consumed } => match self.kind {
                // Nearest graft: 1 at level consumed+1 (or +2 from the root),
                // one zero, then the carry moves everything.
                RuleKind::LadderGraft => Some(if consumed == 0 { 4 } else { 3 }),
                RuleKind::DoublingGraft => {
                    let mut level = 2usize;
                    while level < consumed + 1 {
                        level *= 2;
                    }
                    // Branch at `level`, zeros until 2*level, moved below.
                    Some(2 * level + 1 - consumed)
                }
                _ => None,
            },
        }
    }

    /// All states reachable from the current one under `step_from`, assuming
    /// arities can be anything allowed by the kind. Finite for the odometer
    /// and the top-pair swap; `None` for the grafts (their spine states grow
    /// without bound).
    pub fn reachable_states(&self) -> Option<Vec<RuleState>> {
        match self.kind {
            RuleKind::Odometer => Some(match self.state {
                RuleState::Id => vec![RuleState::Id],
                _ => vec![self.state, RuleState::Id],
            }),
            RuleKind::TopPairSwap => Some(match self.state {
                RuleState::Id => vec![RuleState::Id],
                _ => vec![self.state, RuleState::Id],
            }),
            RuleKind::LadderGraft | RuleKind::DoublingGraft => match self.state {
                RuleState::Id => Some(vec![RuleState::Id]),
                RuleState::Carry => Some(vec![RuleState::Carry, RuleState::Id]),
                _ => None,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::SphericalIndex;

    fn apply(rule: RuleAut, index: &SphericalIndex, digits: &[u64]) -> Vec<u64> {
        let mut state = rule;
        digits
            .iter()
            .enumerate()
            .map(|(i, &d)| {
                let (out, next) = state.step(d, index.arity(i + 1).unwrap());
                state = next;
                out
            })
            .collect()
    }

    /// Oracle: mixed-radix +1 on little-endian digit strings.
    fn add_one_oracle(index: &SphericalIndex, digits: &[u64]) -> Vec<u64> {
        let mut carry = 1u64;
        digits
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let n = index.arity(i + 1).unwrap();
                let v = x + carry;
                carry = v / n;
                v % n
            })
            .collect()
    }

    #[test]
    fn odometer_adds_one_in_mixed_radix() {
        let geo = SphericalIndex::geometric(vec![3], 3).unwrap();
        let odo = RuleAut::standard(RuleKind::Odometer);
        for digits in [vec![0, 0, 0], vec![2, 8, 26], vec![2, 8, 0, 5], vec![1, 4, 4]] {
            assert_eq!(apply(odo, &geo, &digits), add_one_oracle(&geo, &digits));
        }
        // Inverse subtracts one: round trip through +1 then -1.
        let inv = odo.invert();
        for digits in [vec![0, 0, 0], vec![2, 8, 26], vec![1, 0, 13]] {
            assert_eq!(apply(inv, &geo, &apply(odo, &geo, &digits)), digits);
        }
    }

    #[test]
    fn top_pair_swap_swaps_first_top_digit() {
        let geo = SphericalIndex::geometric(vec![3], 3).unwrap();
        let b = RuleAut::standard(RuleKind::TopPairSwap);
        // Level 1 (arity 3): top two digits are 1 and 2.
        assert_eq!(apply(b, &geo, &[2, 5, 3]), vec![1, 5, 3]);
        assert_eq!(apply(b, &geo, &[1, 5, 3]), vec![2, 5, 3]);
        // Digit 0 is copied; level 2 (arity 9): top two are 7 and 8.
        assert_eq!(apply(b, &geo, &[0, 8, 3]), vec![0, 7, 3]);
        assert_eq!(apply(b, &geo, &[0, 3, 3]), vec![0, 3, 3]);
        // Involution, and invert() is a no-op.
        assert_eq!(b.invert(), b);
        for digits in [vec![2, 5, 3], vec![0, 8, 3], vec![0, 0, 26]] {
            assert_eq!(apply(b, &geo, &apply(b, &geo, &digits)), digits);
        }
    }

    #[test]
    fn ladder_graft_runs_odometers_below_each_branch() {
        let geo = SphericalIndex::geometric(vec![3], 3).unwrap();
        let c = RuleAut::standard(RuleKind::LadderGraft);
        // Branch at w = (0,1), graft vertex z = (0,1,0): below z the whole
        // subtree is an odometer on the shifted index (arity 81 at level 4).
        assert_eq!(apply(c, &geo, &[0, 1, 0, 5, 2]), vec![0, 1, 0, 6, 2]);
        assert_eq!(apply(c, &geo, &[0, 1, 0, 80, 2]), vec![0, 1, 0, 0, 3]);
        // Escaping the graft run is inert.
        assert_eq!(apply(c, &geo, &[0, 1, 7, 5]), vec![0, 1, 7, 5]);
        // No branch directly below the root (l >= 1 only).
        assert_eq!(apply(c, &geo, &[1, 0, 5]), vec![1, 0, 5]);
        // Deeper spine vertices branch as well: z = (0,0,1,0).
        assert_eq!(apply(c, &geo, &[0, 0, 1, 0, 5]), vec![0, 0, 1, 0, 6]);
        // The spine itself is fixed.
        assert_eq!(apply(c, &geo, &[0, 0, 0, 0, 0]), vec![0, 0, 0, 0, 0]);
    }

    #[test]
    fn doubling_graft_branches_at_doubling_levels() {
        let d2 = SphericalIndex::constant(2).unwrap();
        let c = RuleAut::standard(RuleKind::DoublingGraft);
        // k = 1: branch at level 2 via w = (0,1), z = (0,1,0,0) at level 4.
        let mut z1 = vec![0, 1, 0, 0];
        z1.extend([0, 0, 0]);
        let mut expect = vec![0, 1, 0, 0];
        expect.extend([1, 0, 0]);
        assert_eq!(apply(c, &d2, &z1), expect);
        // Inside the zero run the vertices are fixed; escaping is inert.
        assert_eq!(apply(c, &d2, &[0, 1, 0, 1, 1]), vec![0, 1, 0, 1, 1]);
        // Level 1 and level 3 are not branch levels.
        assert_eq!(apply(c, &d2, &[1, 1, 1]), vec![1, 1, 1]);
        assert_eq!(apply(c, &d2, &[0, 0, 1, 0, 0, 0, 0, 0]), vec![0, 0, 1, 0, 0, 0, 0, 0]);
        // k = 2: w = (0,0,0,1) at level 4, z at level 8.
        let mut z2 = vec![0, 0, 0, 1, 0, 0, 0, 0];
        z2.push(0);
        let mut expect = vec![0, 0, 0, 1, 0, 0, 0, 0];
        expect.push(1);
        assert_eq!(apply(c, &d2, &z2), expect);
        // The inverse subtracts below the same grafts.
        let cinv = c.invert();
        let mut below = vec![0, 1, 0, 0];
        below.extend([1, 1, 0]);
        let round = apply(cinv, &d2, &apply(c, &d2, &below));
        assert_eq!(round, below);
    }

    #[test]
    fn min_moved_depth_matches_direct_search() {
        // For every kind and a few states, the closed-form depth of the
        // nearest moved vertex agrees with brute-force search on a binary
        // tree (arity 2 everywhere, the hardest case for the bounds).
        let d2 = SphericalIndex::constant(2).unwrap();
        let cases = [
            (RuleAut::standard(RuleKind::Odometer), RuleState::Carry),
            (RuleAut::standard(RuleKind::LadderGraft), RuleState::Spine { consumed: 0 }),
            (RuleAut::standard(RuleKind::LadderGraft), RuleState::Spine { consumed: 3 }),
            (RuleAut::standard(RuleKind::LadderGraft), RuleState::ZRun { left: 1 }),
            (RuleAut::standard(RuleKind::DoublingGraft), RuleState::Spine { consumed: 0 }),
            (RuleAut::standard(RuleKind::DoublingGraft), RuleState::Spine { consumed: 4 }),
            (RuleAut::standard(RuleKind::DoublingGraft), RuleState::ZRun { left: 5 }),
        ];
        for (rule, state) in cases {
            let expected = rule.min_moved_depth(state).unwrap();
            // Brute force: BFS all words up to the expected depth.
            let mut found = None;
            'depth: for depth in 1..=expected {
                for w in 0..(1u64 << depth) {
                    let digits: Vec<u64> = (0..depth).map(|i| (w >> i) & 1).collect();
                    let out = apply(RuleAut { state, ..rule }, &d2, &digits);
                    if out != digits {
                        found = Some(depth);
                        break 'depth;
                    }
                }
            }
            assert_eq!(found, Some(expected), "{rule:?} in {state:?}");
        }
        // Scan state on a 3-adic tree: the top pair at the next level moves.
        let b = RuleAut::standard(RuleKind::TopPairSwap);
        assert_eq!(b.min_moved_depth(RuleState::Scan), Some(1));
    }

    #[test]
    fn statuses_are_exact() {
        let c = RuleAut::standard(RuleKind::DoublingGraft);
        assert_eq!(c.status_from(RuleState::Id, true), InfiniteStatus::Identity);
        assert_eq!(c.status_from(RuleState::Carry, true), InfiniteStatus::FullyMoved);
        assert_eq!(c.status_from(RuleState::Spine { consumed: 2 }, true), InfiniteStatus::Mixed);
        let b = RuleAut::standard(RuleKind::TopPairSwap);
        assert_eq!(b.status_from(RuleState::Scan, true), InfiniteStatus::FullyMoved);
        assert_eq!(b.status_from(RuleState::Scan, false), InfiniteStatus::Mixed);
    }
}
