//! Spherical index: the per-level arity sequence of the tree, in closed form.

use crate::error::{Error, Result};
use num::{BigRational, BigUint, One};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Arity sequence `(n_1, n_2, ...)` of a spherically homogeneous rooted tree.
///
/// Level `l >= 1` holds the vertices at distance `l` from the root; every
/// vertex at level `l - 1` has exactly `n_l` children. The sequence is stored
/// in one of two closed forms so the arity of *any* level can be computed:
///
/// * [`EventuallyPeriodic`](SphericalIndex::EventuallyPeriodic): a finite
///   prefix followed by a repeating cycle (covers constant indices as a
///   special case),
/// * [`Geometric`](SphericalIndex::Geometric): a finite prefix after which
///   each arity is the previous one times a fixed ratio.
///
/// All entries are at least 2. Individual arities are `u64`; levels whose
/// arity no longer fits return [`Error::ArityOverflow`] rather than wrapping.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SphericalIndex {
    EventuallyPeriodic { prefix: Vec<u64>, cycle: Vec<u64> },
    Geometric { prefix: Vec<u64>, ratio: u64 },
}

impl SphericalIndex {
    /// Index with arities `prefix[0], .., prefix[p-1], cycle[0], .., cycle[c-1], cycle[0], ..`.
    pub fn eventually_periodic(prefix: Vec<u64>, cycle: Vec<u64>) -> Result<Self> {
        if cycle.is_empty() {
            return Err(Error::InvalidIndex("cycle must be non-empty".into()));
        }
        for &n in prefix.iter().chain(cycle.iter()) {
            if n < 2 {
                return Err(Error::InvalidIndex(format!("arity {n} below 2")));
            }
        }
        Ok(SphericalIndex::EventuallyPeriodic { prefix, cycle })
    }

    /// Index with arities `prefix[0], .., prefix[p-1], prefix[p-1]*ratio, prefix[p-1]*ratio^2, ..`.
    pub fn geometric(prefix: Vec<u64>, ratio: u64) -> Result<Self> {
        if prefix.is_empty() {
            return Err(Error::InvalidIndex("geometric index needs a non-empty prefix".into()));
        }
        if ratio < 2 {
            return Err(Error::InvalidIndex(format!("growth ratio {ratio} below 2")));
        }
        for &n in &prefix {
            if n < 2 {
                return Err(Error::InvalidIndex(format!("arity {n} below 2")));
            }
        }
        Ok(SphericalIndex::Geometric { prefix, ratio })
    }

    /// Constant index: the regular `d`-ary tree.
    pub fn constant(d: u64) -> Result<Self> {
        SphericalIndex::eventually_periodic(vec![], vec![d])
    }

    /// Arity `n_level` (levels are 1-based).
    pub fn arity(&self, level: usize) -> Result<u64> {
        if level == 0 {
            return Err(Error::InvalidIndex("levels are 1-based".into()));
        }
        match self {
            SphericalIndex::EventuallyPeriodic { prefix, cycle } => {
                if level <= prefix.len() {
                    Ok(prefix[level - 1])
                } else {
                    Ok(cycle[(level - prefix.len() - 1) % cycle.len()])
                }
            }
            SphericalIndex::Geometric { prefix, ratio } => {
                if level <= prefix.len() {
                    Ok(prefix[level - 1])
                } else {
                    let mut n = *prefix.last().expect("non-empty prefix");
                    for _ in prefix.len()..level {
                        n = n
                            .checked_mul(*ratio)
                            .ok_or(Error::ArityOverflow { level })?;
                    }
                    Ok(n)
                }
            }
        }
    }

    /// Number of vertices at `level` (the product `n_1 * .. * n_level`).
    pub fn level_size(&self, level: usize) -> Result<BigUint> {
        let mut size = BigUint::one();
        for l in 1..=level {
            size *= BigUint::from(self.arity(l)?);
        }
        Ok(size)
    }

    /// `level_size` as `u64`, failing with [`Error::LevelCapExceeded`] when it
    /// is larger than `cap`.
    pub fn level_size_capped(&self, level: usize, cap: u64) -> Result<u64> {
        let size = self.level_size(level)?;
        u64::try_from(&size)
            .ok()
            .filter(|s| *s <= cap)
            .ok_or(Error::LevelCapExceeded { level, size, cap })
    }

    /// The index of the subtree rooted at any vertex of level `k`: the same
    /// sequence with the first `k` arities dropped.
    pub fn shift(&self, k: usize) -> Result<Self> {
        if k == 0 {
            return Ok(self.clone());
        }
        match self {
            SphericalIndex::EventuallyPeriodic { prefix, cycle } => {
                if k < prefix.len() {
                    Ok(SphericalIndex::EventuallyPeriodic {
                        prefix: prefix[k..].to_vec(),
                        cycle: cycle.clone(),
                    })
                } else {
                    let rot = (k - prefix.len()) % cycle.len();
                    let mut rotated = cycle[rot..].to_vec();
                    rotated.extend_from_slice(&cycle[..rot]);
                    Ok(SphericalIndex::EventuallyPeriodic { prefix: vec![], cycle: rotated })
                }
            }
            SphericalIndex::Geometric { prefix, ratio } => {
                if k < prefix.len() {
                    Ok(SphericalIndex::Geometric { prefix: prefix[k..].to_vec(), ratio: *ratio })
                } else {
                    Ok(SphericalIndex::Geometric { prefix: vec![self.arity(k + 1)?], ratio: *ratio })
                }
            }
        }
    }

    /// `Some(d)` when every level has the same arity `d`.
    pub fn constant_arity(&self) -> Option<u64> {
        match self {
            SphericalIndex::EventuallyPeriodic { prefix, cycle } => {
                let d = cycle[0];
                if cycle.iter().chain(prefix.iter()).all(|&n| n == d) {
                    Some(d)
                } else {
                    None
                }
            }
            SphericalIndex::Geometric { .. } => None,
        }
    }

    /// Largest arity over all levels, or `None` when arities are unbounded.
    pub fn max_arity(&self) -> Option<u64> {
        match self {
            SphericalIndex::EventuallyPeriodic { prefix, cycle } => {
                prefix.iter().chain(cycle.iter()).copied().max()
            }
            SphericalIndex::Geometric { .. } => None,
        }
    }

    /// Whether the arity sequence is bounded.
    pub fn is_bounded(&self) -> bool {
        self.max_arity().is_some()
    }

    /// Memoization key under which level-dependent behaviour repeats:
    /// for an eventually periodic index two levels with the same key have the
    /// same arity tail, for a geometric index every level is its own key.
    pub(crate) fn level_key(&self, level: usize) -> usize {
        match self {
            SphericalIndex::EventuallyPeriodic { prefix, cycle } => {
                if level <= prefix.len() {
                    level
                } else {
                    prefix.len() + (level - prefix.len()) % cycle.len()
                }
            }
            SphericalIndex::Geometric { .. } => level,
        }
    }

    /// All primes dividing at least one arity of the sequence. Finite and
    /// exact for both closed forms.
    pub fn prime_support(&self) -> Vec<u64> {
        let entries: Vec<u64> = match self {
            SphericalIndex::EventuallyPeriodic { prefix, cycle } => {
                prefix.iter().chain(cycle.iter()).copied().collect()
            }
            SphericalIndex::Geometric { prefix, ratio } => {
                prefix.iter().copied().chain([*ratio]).collect()
            }
        };
        let mut primes = std::collections::BTreeSet::new();
        for mut n in entries {
            let mut p = 2u64;
            while p * p <= n {
                if n % p == 0 {
                    primes.insert(p);
                    while n % p == 0 {
                        n /= p;
                    }
                }
                p += 1;
            }
            if n > 1 {
                primes.insert(n);
            }
        }
        primes.into_iter().collect()
    }

    /// Measure of a single level-`level` cylinder: `1 / (n_1 * .. * n_level)`.
    pub fn level_measure(&self, level: usize) -> Result<BigRational> {
        Ok(BigRational::new(BigUint::one().into(), self.level_size(level)?.into()))
    }
}

impl fmt::Display for SphericalIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn list(xs: &[u64]) -> String {
            xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
        }
        match self {
            SphericalIndex::EventuallyPeriodic { prefix, cycle } => {
                if prefix.is_empty() && cycle.len() == 1 {
                    write!(f, "constant {}", cycle[0])
                } else if prefix.is_empty() {
                    write!(f, "periodic [{}]*", list(cycle))
                } else {
                    write!(f, "[{}] then [{}]*", list(prefix), list(cycle))
                }
            }
            SphericalIndex::Geometric { prefix, ratio } => {
                write!(f, "[{}] then x{}", list(prefix), ratio)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arities_follow_the_closed_forms() {
        let ep = SphericalIndex::eventually_periodic(vec![2, 3], vec![4, 5]).unwrap();
        let got: Vec<u64> = (1..=7).map(|l| ep.arity(l).unwrap()).collect();
        assert_eq!(got, vec![2, 3, 4, 5, 4, 5, 4]);

        let geo = SphericalIndex::geometric(vec![3], 3).unwrap();
        let got: Vec<u64> = (1..=4).map(|l| geo.arity(l).unwrap()).collect();
        assert_eq!(got, vec![3, 9, 27, 81]);

        let d2 = SphericalIndex::constant(2).unwrap();
        assert_eq!(d2.arity(100).unwrap(), 2);
        assert_eq!(d2.constant_arity(), Some(2));
        assert_eq!(geo.constant_arity(), None);
    }

    #[test]
    fn rejects_degenerate_sequences() {
        assert!(SphericalIndex::eventually_periodic(vec![2], vec![]).is_err());
        assert!(SphericalIndex::eventually_periodic(vec![1], vec![2]).is_err());
        assert!(SphericalIndex::geometric(vec![], 3).is_err());
        assert!(SphericalIndex::geometric(vec![3], 1).is_err());
        assert!(SphericalIndex::constant(1).is_err());
    }

    #[test]
    fn geometric_arity_overflows_structurally() {
        let geo = SphericalIndex::geometric(vec![3], 3).unwrap();
        // 3^41 > 2^64: the arity itself no longer fits in a u64.
        let err = geo.arity(41).unwrap_err();
        assert!(matches!(err, Error::ArityOverflow { level: 41 }));
        // But level *sizes* stay exact big integers as far as arities fit.
        assert_eq!(geo.level_size(4).unwrap(), BigUint::from(3u64 * 9 * 27 * 81));
    }

    #[test]
    fn shift_rebases_the_sequence() {
        let ep = SphericalIndex::eventually_periodic(vec![2, 3], vec![4, 5]).unwrap();
        for k in 0..8 {
            let shifted = ep.shift(k).unwrap();
            for l in 1..=6 {
                assert_eq!(shifted.arity(l).unwrap(), ep.arity(k + l).unwrap(), "k={k} l={l}");
            }
        }
        let geo = SphericalIndex::geometric(vec![2, 6], 4).unwrap();
        for k in 0..5 {
            let shifted = geo.shift(k).unwrap();
            for l in 1..=5 {
                assert_eq!(shifted.arity(l).unwrap(), geo.arity(k + l).unwrap(), "k={k} l={l}");
            }
        }
    }

    #[test]
    fn level_sizes_and_caps() {
        let geo = SphericalIndex::geometric(vec![3], 3).unwrap();
        assert_eq!(geo.level_size_capped(3, 1000).unwrap(), 3 * 9 * 27);
        assert!(matches!(
            geo.level_size_capped(5, 1000),
            Err(Error::LevelCapExceeded { level: 5, .. })
        ));
    }

    #[test]
    fn prime_support_is_exact() {
        let a = SphericalIndex::eventually_periodic(vec![2, 3, 5, 7], vec![7]).unwrap();
        assert_eq!(a.prime_support(), vec![2, 3, 5, 7]);
        let b = SphericalIndex::constant(2).unwrap();
        assert_eq!(b.prime_support(), vec![2]);
        let c = SphericalIndex::geometric(vec![12], 10).unwrap();
        assert_eq!(c.prime_support(), vec![2, 3, 5]);
    }

    #[test]
    fn level_keys_repeat_exactly_when_tails_repeat() {
        let ep = SphericalIndex::eventually_periodic(vec![2, 3], vec![4, 5]).unwrap();
        assert_eq!(ep.level_key(3), ep.level_key(5));
        assert_ne!(ep.level_key(3), ep.level_key(4));
        assert_eq!(ep.level_key(1), 1);
        let geo = SphericalIndex::geometric(vec![3], 3).unwrap();
        assert_ne!(geo.level_key(3), geo.level_key(5));
    }

    #[test]
    fn json_round_trip() {
        let idx = SphericalIndex::geometric(vec![3], 3).unwrap();
        let s = serde_json::to_string(&idx).unwrap();
        assert!(s.contains("\"mode\":\"geometric\""));
        let back: SphericalIndex = serde_json::from_str(&s).unwrap();
        assert_eq!(back, idx);

        let parsed: SphericalIndex =
            serde_json::from_str(r#"{"mode":"eventually_periodic","prefix":[2],"cycle":[3,4]}"#)
                .unwrap();
        assert_eq!(parsed.arity(3).unwrap(), 4);
        assert_eq!(parsed.arity(4).unwrap(), 3);
    }
}
