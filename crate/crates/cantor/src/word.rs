//! Vertices of the tree and finite prefixes of boundary points.
//!
//! Both are digit strings read from the root: the digit at position `i`
//! (0-based) picks a child at level `i + 1` and must be below that level's
//! arity. A [`Vertex`] is a tree vertex in its own right; a
//! [`BoundaryPrefix`] is the depth-`L` approximation of a boundary point.
//! The two types are structurally identical but kept distinct so signatures
//! say which role a digit string plays.

use crate::error::{Error, Result};
use crate::index::SphericalIndex;
use serde::{Deserialize, Serialize};
use std::fmt;

fn validate_digits(index: &SphericalIndex, digits: &[u64]) -> Result<()> {
    for (i, &digit) in digits.iter().enumerate() {
        let level = i + 1;
        let arity = index.arity(level)?;
        if digit >= arity {
            return Err(Error::DigitOutOfRange { level, digit, arity });
        }
    }
    Ok(())
}

fn display_digits(digits: &[u64], f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if digits.is_empty() {
        return write!(f, "ε");
    }
    write!(f, "(")?;
    for (i, d) in digits.iter().enumerate() {
        if i > 0 {
            write!(f, ",")?;
        }
        write!(f, "{d}")?;
    }
    write!(f, ")")
}

/// Parse a comma-separated digit string such as `"0,1,0"` (empty or `"e"`
/// for the root).
pub fn parse_digits(s: &str) -> Result<Vec<u64>> {
    let s = s.trim();
    if s.is_empty() || s == "e" || s == "ε" {
        return Ok(vec![]);
    }
    s.split(',')
        .map(|part| {
            part.trim()
                .parse::<u64>()
                .map_err(|_| Error::Parse(format!("bad digit '{part}' in '{s}'")))
        })
        .collect()
}

/// A vertex of the tree, addressed by its digit path from the root.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vertex {
    digits: Vec<u64>,
}

impl Vertex {
    /// The vertex with path `digits`, validated against `index`.
    pub fn new(index: &SphericalIndex, digits: Vec<u64>) -> Result<Self> {
        validate_digits(index, &digits)?;
        Ok(Vertex { digits })
    }

    /// The root vertex (empty path, level 0).
    pub fn root() -> Self {
        Vertex { digits: vec![] }
    }

    pub fn digits(&self) -> &[u64] {
        &self.digits
    }

    /// Distance from the root.
    pub fn level(&self) -> usize {
        self.digits.len()
    }

    pub fn is_root(&self) -> bool {
        self.digits.is_empty()
    }

    /// Child of this vertex along `digit`, validated against `index`.
    pub fn child(&self, index: &SphericalIndex, digit: u64) -> Result<Self> {
        let level = self.level() + 1;
        let arity = index.arity(level)?;
        if digit >= arity {
            return Err(Error::DigitOutOfRange { level, digit, arity });
        }
        let mut digits = self.digits.clone();
        digits.push(digit);
        Ok(Vertex { digits })
    }

    /// Parent vertex, or `None` at the root.
    pub fn parent(&self) -> Option<Self> {
        if self.digits.is_empty() {
            None
        } else {
            Some(Vertex { digits: self.digits[..self.digits.len() - 1].to_vec() })
        }
    }

    /// First `k` digits as a vertex (`k <= level`).
    pub fn truncate(&self, k: usize) -> Self {
        Vertex { digits: self.digits[..k.min(self.digits.len())].to_vec() }
    }

    /// Whether this vertex lies on the path to `other` (equality included).
    pub fn is_prefix_of(&self, other: &Vertex) -> bool {
        other.digits.starts_with(&self.digits)
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        display_digits(&self.digits, f)
    }
}

/// The first `L` digits of a boundary point.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BoundaryPrefix {
    digits: Vec<u64>,
}

impl BoundaryPrefix {
    /// The prefix with the given digits, validated against `index`.
    pub fn new(index: &SphericalIndex, digits: Vec<u64>) -> Result<Self> {
        validate_digits(index, &digits)?;
        Ok(BoundaryPrefix { digits })
    }

    pub fn digits(&self) -> &[u64] {
        &self.digits
    }

    /// Number of known digits.
    pub fn depth(&self) -> usize {
        self.digits.len()
    }

    /// The level-`k` vertex this point passes through (`k <= depth`).
    pub fn vertex_at(&self, k: usize) -> Vertex {
        Vertex { digits: self.digits[..k.min(self.digits.len())].to_vec() }
    }

    /// Whether the point provably passes through `v` (its path starts with `v`).
    pub fn passes_through(&self, v: &Vertex) -> bool {
        self.digits.starts_with(v.digits())
    }
}

impl fmt::Display for BoundaryPrefix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        display_digits(&self.digits, f)
    }
}

impl From<BoundaryPrefix> for Vertex {
    fn from(p: BoundaryPrefix) -> Vertex {
        Vertex { digits: p.digits }
    }
}

impl From<Vertex> for BoundaryPrefix {
    fn from(v: Vertex) -> BoundaryPrefix {
        BoundaryPrefix { digits: v.digits }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geo() -> SphericalIndex {
        SphericalIndex::geometric(vec![3], 3).unwrap()
    }

    #[test]
    fn digits_are_validated_per_level() {
        let idx = geo();
        assert!(Vertex::new(&idx, vec![2, 8, 26]).is_ok());
        let err = Vertex::new(&idx, vec![2, 9]).unwrap_err();
        assert!(matches!(err, Error::DigitOutOfRange { level: 2, digit: 9, arity: 9 }));
        // Same rule applies through `child`.
        let v = Vertex::new(&idx, vec![0]).unwrap();
        assert!(v.child(&idx, 8).is_ok());
        assert!(v.child(&idx, 9).is_err());
    }

    #[test]
    fn parent_child_round_trip() {
        let idx = SphericalIndex::constant(2).unwrap();
        let v = Vertex::new(&idx, vec![0, 1, 1]).unwrap();
        assert_eq!(v.level(), 3);
        assert_eq!(v.parent().unwrap().digits(), &[0, 1]);
        assert_eq!(v.parent().unwrap().child(&idx, 1).unwrap(), v);
        assert!(Vertex::root().parent().is_none());
        assert!(Vertex::root().is_prefix_of(&v));
        assert!(v.truncate(2).is_prefix_of(&v));
        assert!(!v.is_prefix_of(&v.truncate(2)));
    }

    #[test]
    fn prefixes_know_their_vertices() {
        let idx = SphericalIndex::constant(2).unwrap();
        let x = BoundaryPrefix::new(&idx, vec![0, 1, 0, 1]).unwrap();
        assert_eq!(x.depth(), 4);
        assert_eq!(x.vertex_at(2).digits(), &[0, 1]);
        assert!(x.passes_through(&Vertex::new(&idx, vec![0, 1, 0]).unwrap()));
        assert!(!x.passes_through(&Vertex::new(&idx, vec![1]).unwrap()));
    }

    #[test]
    fn display_and_parse() {
        let idx = SphericalIndex::constant(4).unwrap();
        let v = Vertex::new(&idx, vec![0, 3, 2]).unwrap();
        assert_eq!(v.to_string(), "(0,3,2)");
        assert_eq!(Vertex::root().to_string(), "ε");
        assert_eq!(parse_digits("0, 3,2").unwrap(), vec![0, 3, 2]);
        assert_eq!(parse_digits("").unwrap(), Vec::<u64>::new());
        assert_eq!(parse_digits("e").unwrap(), Vec::<u64>::new());
        assert!(parse_digits("0,x").is_err());
    }
}
