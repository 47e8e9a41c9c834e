//! Exact cylinder measures and the boundary ultrametric.
//!
//! The boundary carries the unique invariant probability measure that splits
//! evenly at every vertex: a cylinder below a level-`l` vertex has measure
//! `1/(n_1 * .. * n_l)`. Distances between boundary points are `1/2^m` where
//! `m` is the first level whose digits differ. Both are computed exactly;
//! when two finite prefixes agree on every known digit the metric reports an
//! upper bound instead of inventing a value.

use crate::error::Result;
use crate::index::SphericalIndex;
use crate::word::{BoundaryPrefix, Vertex};
use num::{BigInt, BigRational, One};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Serialize a `BigRational` as `{"num": "...", "den": "..."}` with decimal
/// strings, so consumers never lose precision to floating point.
pub mod ratio_serde {
    use num::BigRational;
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Parts {
        num: String,
        den: String,
    }

    pub fn serialize<S: Serializer>(r: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        Parts { num: r.numer().to_string(), den: r.denom().to_string() }.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        let parts = Parts::deserialize(d)?;
        let num = parts.num.parse().map_err(|_| D::Error::custom("bad numerator"))?;
        let den = parts.den.parse().map_err(|_| D::Error::custom("bad denominator"))?;
        if den == 0u32.into() {
            return Err(D::Error::custom("zero denominator"));
        }
        Ok(BigRational::new(num, den))
    }
}

/// Serde adapter writing exact big counts as decimal strings.
pub mod uint_serde {
    use num::BigUint;
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(n: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        n.to_string().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        String::deserialize(d)?.parse().map_err(|_| D::Error::custom("bad count"))
    }
}

/// Exact rational `p/q` shorthand used across tests and examples.
pub fn ratio(p: u64, q: u64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

/// Decimal rendering of a rational for human-readable tables (the exact
/// value is always available alongside).
pub fn ratio_decimal(r: &BigRational, digits: usize) -> String {
    let scale = BigInt::from(10u32).pow(digits as u32);
    let scaled = (r * BigRational::from_integer(scale.clone())).round().to_integer();
    let negative = scaled < BigInt::from(0);
    let abs = if negative { -scaled } else { scaled };
    let whole = &abs / &scale;
    let frac = &abs % &scale;
    let sign = if negative { "-" } else { "" };
    format!("{sign}{whole}.{frac:0>width$}", width = digits)
}

/// Exact measure of a cylinder set, as a rational in lowest terms.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CylinderMeasure {
    #[serde(with = "ratio_serde")]
    value: BigRational,
}

impl CylinderMeasure {
    pub fn value(&self) -> &BigRational {
        &self.value
    }
}

impl fmt::Display for CylinderMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// Measure of the cylinder of all boundary points passing through `v`.
pub fn cylinder_measure(index: &SphericalIndex, v: &Vertex) -> Result<CylinderMeasure> {
    Ok(CylinderMeasure { value: index.level_measure(v.level())? })
}

/// Outcome of comparing two boundary points known only to finite depth.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum BoundaryDistance {
    /// The prefixes differ at some level `m`: the distance is exactly `1/2^m`
    /// no matter how the points continue.
    Resolved {
        #[serde(with = "ratio_serde")]
        distance: BigRational,
        first_difference_level: usize,
    },
    /// All digits agree through `depth`: the points may be equal, and their
    /// distance is at most `bound = 1/2^(depth+1)`.
    IndistinguishableAtDepth {
        depth: usize,
        #[serde(with = "ratio_serde")]
        bound: BigRational,
    },
}

fn half_pow(m: usize) -> BigRational {
    BigRational::new(BigInt::one(), BigInt::from(2u32).pow(m as u32))
}

/// Ultrametric distance between two boundary points given by finite prefixes.
///
/// Compares digits level by level up to the shorter depth. A first
/// disagreement at level `m` resolves the distance to exactly `1/2^m`;
/// agreement on all comparable digits yields only an upper bound.
pub fn boundary_metric(x: &BoundaryPrefix, y: &BoundaryPrefix) -> BoundaryDistance {
    let depth = x.depth().min(y.depth());
    for i in 0..depth {
        if x.digits()[i] != y.digits()[i] {
            let m = i + 1;
            return BoundaryDistance::Resolved { distance: half_pow(m), first_difference_level: m };
        }
    }
    BoundaryDistance::IndistinguishableAtDepth { depth, bound: half_pow(depth + 1) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::Zero;
    use rand::{Rng, SeedableRng};

    #[test]
    fn cylinder_measures_multiply_along_levels() {
        let idx = SphericalIndex::geometric(vec![3], 3).unwrap();
        let v = Vertex::new(&idx, vec![0, 5]).unwrap();
        assert_eq!(*cylinder_measure(&idx, &v).unwrap().value(), ratio(1, 27));
        let root = Vertex::root();
        assert_eq!(*cylinder_measure(&idx, &root).unwrap().value(), ratio(1, 1));
    }

    #[test]
    fn level_measures_sum_to_one() {
        // Normalization: the level-l cylinders partition the boundary, so
        // (number of level-l vertices) * (level-l measure) = 1.
        for idx in [
            SphericalIndex::constant(2).unwrap(),
            SphericalIndex::eventually_periodic(vec![2, 3], vec![4, 5]).unwrap(),
            SphericalIndex::geometric(vec![3], 3).unwrap(),
        ] {
            for level in 0..=6 {
                let total = BigRational::from_integer(idx.level_size(level).unwrap().into())
                    * idx.level_measure(level).unwrap();
                assert!(total.is_one(), "index {idx}, level {level}");
            }
        }
    }

    #[test]
    fn metric_resolves_at_first_difference() {
        let idx = SphericalIndex::constant(2).unwrap();
        let x = BoundaryPrefix::new(&idx, vec![0, 1, 0, 0]).unwrap();
        let y = BoundaryPrefix::new(&idx, vec![0, 1, 1, 0]).unwrap();
        match boundary_metric(&x, &y) {
            BoundaryDistance::Resolved { distance, first_difference_level } => {
                assert_eq!(first_difference_level, 3);
                assert_eq!(distance, ratio(1, 8));
            }
            other => panic!("expected resolution, got {other:?}"),
        }
    }

    #[test]
    fn metric_reports_bounds_when_prefixes_agree() {
        let idx = SphericalIndex::constant(2).unwrap();
        let x = BoundaryPrefix::new(&idx, vec![0, 1]).unwrap();
        let y = BoundaryPrefix::new(&idx, vec![0, 1, 1, 0]).unwrap();
        match boundary_metric(&x, &y) {
            BoundaryDistance::IndistinguishableAtDepth { depth, bound } => {
                assert_eq!(depth, 2);
                assert_eq!(bound, ratio(1, 8));
            }
            other => panic!("expected indistinguishable, got {other:?}"),
        }
    }

    #[test]
    fn metric_is_an_ultrametric_on_resolved_triples() {
        // Seeded random triples of equal-depth prefixes; whenever all three
        // pairwise distances resolve, the strong triangle inequality holds,
        // distances are symmetric, and zero distance never resolves for
        // distinct prefixes.
        let idx = SphericalIndex::eventually_periodic(vec![2, 3], vec![4]).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let depth = 8;
        let dist = |a: &BoundaryPrefix, b: &BoundaryPrefix| match boundary_metric(a, b) {
            BoundaryDistance::Resolved { distance, .. } => Some(distance),
            BoundaryDistance::IndistinguishableAtDepth { .. } => None,
        };
        for _ in 0..500 {
            let mut draw = || {
                let digits: Vec<u64> =
                    (1..=depth).map(|l| rng.gen_range(0..idx.arity(l).unwrap())).collect();
                BoundaryPrefix::new(&idx, digits).unwrap()
            };
            let (x, y, z) = (draw(), draw(), draw());
            if x == y {
                assert_eq!(dist(&x, &y), None);
                continue;
            }
            let dxy = dist(&x, &y).expect("distinct equal-depth prefixes must resolve");
            assert!(dxy > BigRational::zero());
            assert_eq!(dist(&y, &x).unwrap(), dxy);
            if let (Some(dxz), Some(dyz)) = (dist(&x, &z), dist(&y, &z)) {
                assert!(dxz <= dxy.clone().max(dyz.clone()), "strong triangle inequality");
            }
        }
    }

    #[test]
    fn ratio_serde_round_trips() {
        #[derive(Serialize, Deserialize)]
        struct Wrap(#[serde(with = "ratio_serde")] BigRational);
        let r = ratio(5, 40);
        let json = serde_json::to_string(&Wrap(r.clone())).unwrap();
        assert_eq!(json, r#"{"num":"1","den":"8"}"#);
        let back: Wrap = serde_json::from_str(&json).unwrap();
        assert_eq!(back.0, r);
    }

    #[test]
    fn decimal_rendering_rounds_correctly() {
        assert_eq!(ratio_decimal(&ratio(1, 8), 6), "0.125000");
        assert_eq!(ratio_decimal(&ratio(2, 3), 4), "0.6667");
        assert_eq!(ratio_decimal(&(-ratio(1, 2)), 2), "-0.50");
    }
}
