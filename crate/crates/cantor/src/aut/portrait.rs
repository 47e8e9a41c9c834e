//! Explicit finite-depth portraits: one permutation per vertex, down to a
//! stated depth.
//!
//! A portrait is the truncation of a tree automorphism: it knows the vertex
//! permutation at every vertex above `depth` and *claims nothing below*.
//! Evaluating past the depth is an error, never a silent guess. Portraits
//! work on any spherical index and are closed under composition, inversion
//! and sections; they are the common ground the other representations are
//! lowered to when an exact finite-state product is not available.

use crate::error::{Error, Result};
use crate::index::SphericalIndex;
use crate::word::Vertex;
use rand::Rng;

#[derive(Clone, Debug, PartialEq, Eq)]
struct PNode {
    perm: Vec<u64>,
    /// Child node per *input* digit; empty at the last stored level.
    children: Vec<u32>,
}

/// Truncation of a tree automorphism to a finite depth.
#[derive(Clone, Debug)]
pub struct Portrait {
    index: SphericalIndex,
    depth: usize,
    /// Arena in post-order: children precede their parent, the root is last.
    nodes: Vec<PNode>,
}

impl Portrait {
    /// The identity truncated to `depth`. `node_cap` bounds the arena size.
    pub fn identity(index: &SphericalIndex, depth: usize, node_cap: u64) -> Result<Self> {
        let mut p = Portrait { index: index.clone(), depth, nodes: Vec::new() };
        if depth > 0 {
            p.build_identity(0, depth, node_cap)?;
        }
        Ok(p)
    }

    fn build_identity(&mut self, level: usize, depth: usize, node_cap: u64) -> Result<u32> {
        let arity = self.index.arity(level + 1)?;
        let children = if level + 1 < depth {
            (0..arity)
                .map(|_| self.build_identity(level + 1, depth, node_cap))
                .collect::<Result<Vec<u32>>>()?
        } else {
            vec![]
        };
        self.push_node(PNode { perm: (0..arity).collect(), children }, node_cap)
    }

    fn push_node(&mut self, node: PNode, node_cap: u64) -> Result<u32> {
        if self.nodes.len() as u64 >= node_cap {
            return Err(Error::BudgetExhausted { during: "portrait construction", budget: node_cap });
        }
        self.nodes.push(node);
        Ok((self.nodes.len() - 1) as u32)
    }

    /// Uniformly random portrait (independent uniform permutation at every
    /// vertex), for property tests.
    pub fn random<R: Rng>(
        index: &SphericalIndex,
        depth: usize,
        rng: &mut R,
        node_cap: u64,
    ) -> Result<Self> {
        let mut p = Portrait { index: index.clone(), depth, nodes: Vec::new() };
        if depth > 0 {
            p.build_random(0, depth, rng, node_cap)?;
        }
        Ok(p)
    }

    fn build_random<R: Rng>(
        &mut self,
        level: usize,
        depth: usize,
        rng: &mut R,
        node_cap: u64,
    ) -> Result<u32> {
        let arity = self.index.arity(level + 1)?;
        let mut perm: Vec<u64> = (0..arity).collect();
        // Fisher-Yates.
        for i in (1..perm.len()).rev() {
            perm.swap(i, rng.gen_range(0..=i));
        }
        let children = if level + 1 < depth {
            (0..arity)
                .map(|_| self.build_random(level + 1, depth, rng, node_cap))
                .collect::<Result<Vec<u32>>>()?
        } else {
            vec![]
        };
        self.push_node(PNode { perm, children }, node_cap)
    }

    /// Build from explicit data via a callback: `f(vertex) -> permutation`.
    pub fn from_fn(
        index: &SphericalIndex,
        depth: usize,
        node_cap: u64,
        f: &mut dyn FnMut(&[u64]) -> Vec<u64>,
    ) -> Result<Self> {
        let mut p = Portrait { index: index.clone(), depth, nodes: Vec::new() };
        if depth > 0 {
            let mut path = Vec::new();
            p.build_fn(0, depth, node_cap, &mut path, f)?;
        }
        p.validate()?;
        Ok(p)
    }

    fn build_fn(
        &mut self,
        level: usize,
        depth: usize,
        node_cap: u64,
        path: &mut Vec<u64>,
        f: &mut dyn FnMut(&[u64]) -> Vec<u64>,
    ) -> Result<u32> {
        let arity = self.index.arity(level + 1)?;
        let perm = f(path);
        let children = if level + 1 < depth {
            (0..arity)
                .map(|k| {
                    path.push(k);
                    let id = self.build_fn(level + 1, depth, node_cap, path, f);
                    path.pop();
                    id
                })
                .collect::<Result<Vec<u32>>>()?
        } else {
            vec![]
        };
        self.push_node(PNode { perm, children }, node_cap)
    }

    fn validate(&self) -> Result<()> {
        if self.depth > 0 {
            self.check_node(self.root(), 0)?;
        }
        Ok(())
    }

    fn check_node(&self, node: u32, level: usize) -> Result<()> {
        let arity = self.index.arity(level + 1)?;
        let n = &self.nodes[node as usize];
        if n.perm.len() != arity as usize {
            return Err(Error::InvalidElement(format!(
                "portrait node at level {level} has {} outputs, arity is {arity}",
                n.perm.len()
            )));
        }
        let mut seen = vec![false; arity as usize];
        for &out in &n.perm {
            if out >= arity || seen[out as usize] {
                return Err(Error::InvalidElement(format!(
                    "portrait node at level {level} is not a permutation"
                )));
            }
            seen[out as usize] = true;
        }
        let expected_children = if level + 1 < self.depth { arity as usize } else { 0 };
        if n.children.len() != expected_children {
            return Err(Error::InvalidElement(format!(
                "portrait node at level {level} has {} children, expected {expected_children}",
                n.children.len()
            )));
        }
        for &c in &n.children {
            self.check_node(c, level + 1)?;
        }
        Ok(())
    }

    // Builders push every node after its children, so the root is always the
    // most recently pushed node.
    fn root(&self) -> u32 {
        (self.nodes.len() - 1) as u32
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn index(&self) -> &SphericalIndex {
        &self.index
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Vertex permutation at `node` (input digit -> output digit).
    pub(crate) fn perm_at(&self, node: u32) -> &[u64] {
        &self.nodes[node as usize].perm
    }

    /// Child arena id below `node` along input digit `k`, if stored.
    pub(crate) fn child_at(&self, node: u32, k: u64) -> Option<u32> {
        self.nodes[node as usize].children.get(k as usize).copied()
    }

    pub(crate) fn root_node(&self) -> Option<u32> {
        if self.depth > 0 {
            Some(self.root())
        } else {
            None
        }
    }

    /// Image of a digit string. Fails with [`Error::BeyondPortraitDepth`]
    /// when the string is longer than the stored depth.
    pub fn apply(&self, digits: &[u64]) -> Result<Vec<u64>> {
        if digits.len() > self.depth {
            return Err(Error::BeyondPortraitDepth {
                depth: digits.len(),
                portrait_depth: self.depth,
            });
        }
        if digits.is_empty() {
            return Ok(vec![]);
        }
        let mut out = Vec::with_capacity(digits.len());
        let mut node = self.root();
        for (i, &d) in digits.iter().enumerate() {
            let n = &self.nodes[node as usize];
            let arity = n.perm.len() as u64;
            if d >= arity {
                return Err(Error::DigitOutOfRange { level: i + 1, digit: d, arity });
            }
            out.push(n.perm[d as usize]);
            if i + 1 < digits.len() {
                node = n.children[d as usize];
            }
        }
        Ok(out)
    }

    /// Composition `self ∘ other` (apply `other` first), truncated to the
    /// shallower depth.
    pub fn compose(&self, other: &Portrait) -> Result<Portrait> {
        if self.index != other.index {
            return Err(Error::IndexMismatch);
        }
        let depth = self.depth.min(other.depth);
        let mut out = Portrait { index: self.index.clone(), depth, nodes: Vec::new() };
        if depth > 0 {
            out.build_compose(self, other, self.root(), other.root(), 0, depth)?;
        }
        Ok(out)
    }

    fn build_compose(
        &mut self,
        g: &Portrait,
        h: &Portrait,
        gn: u32,
        hn: u32,
        level: usize,
        depth: usize,
    ) -> Result<u32> {
        let hperm = &h.nodes[hn as usize].perm;
        let gperm = &g.nodes[gn as usize].perm;
        let arity = hperm.len();
        let perm: Vec<u64> = (0..arity).map(|k| gperm[hperm[k] as usize]).collect();
        let children = if level + 1 < depth {
            (0..arity)
                .map(|k| {
                    // Input digit k goes through h's child k, landing in g's
                    // subtree at the digit h produced.
                    let mid = hperm[k] as usize;
                    let gc = g.nodes[gn as usize].children[mid];
                    let hc = h.nodes[hn as usize].children[k];
                    self.build_compose(g, h, gc, hc, level + 1, depth)
                })
                .collect::<Result<Vec<u32>>>()?
        } else {
            vec![]
        };
        self.push_node(PNode { perm, children }, u64::MAX)
    }

    /// The inverse automorphism, truncated to the same depth.
    pub fn inverse(&self) -> Portrait {
        let mut out =
            Portrait { index: self.index.clone(), depth: self.depth, nodes: Vec::new() };
        if self.depth > 0 {
            out.build_inverse(self, self.root(), 0);
        }
        out
    }

    fn build_inverse(&mut self, g: &Portrait, gn: u32, level: usize) -> u32 {
        let node = &g.nodes[gn as usize];
        let arity = node.perm.len();
        let mut perm = vec![0u64; arity];
        for (k, &out_digit) in node.perm.iter().enumerate() {
            perm[out_digit as usize] = k as u64;
        }
        let children = if node.children.is_empty() {
            vec![]
        } else {
            // The section of g^{-1} below output digit j inverts the section
            // of g below the input digit that maps to j.
            (0..arity)
                .map(|j| {
                    let k = perm[j] as usize;
                    self.build_inverse(g, node.children[k], level + 1)
                })
                .collect()
        };
        self.nodes.push(PNode { perm, children });
        (self.nodes.len() - 1) as u32
    }

    /// The restriction to the subtree below `v`, as a portrait of depth
    /// `depth - v.level()` on the shifted index.
    pub fn section(&self, v: &Vertex) -> Result<Portrait> {
        if v.level() > self.depth {
            return Err(Error::BeyondPortraitDepth {
                depth: v.level(),
                portrait_depth: self.depth,
            });
        }
        let new_depth = self.depth - v.level();
        let index = self.index.shift(v.level())?;
        let mut out = Portrait { index, depth: new_depth, nodes: Vec::new() };
        if new_depth > 0 {
            let mut node = self.root();
            for (i, &d) in v.digits().iter().enumerate() {
                let n = &self.nodes[node as usize];
                let arity = n.perm.len() as u64;
                if d >= arity {
                    return Err(Error::DigitOutOfRange { level: i + 1, digit: d, arity });
                }
                node = n.children[d as usize];
            }
            out.copy_subtree(self, node);
        }
        Ok(out)
    }

    fn copy_subtree(&mut self, g: &Portrait, gn: u32) -> u32 {
        let node = &g.nodes[gn as usize];
        let children = node.children.iter().map(|&c| self.copy_subtree(g, c)).collect();
        self.nodes.push(PNode { perm: node.perm.clone(), children });
        (self.nodes.len() - 1) as u32
    }

    /// Whether every stored permutation is trivial (identity to this depth).
    pub fn is_identity(&self) -> bool {
        self.nodes.iter().all(|n| n.perm.iter().enumerate().all(|(i, &o)| o == i as u64))
    }

    /// Whether the root permutation moves every digit (no fixed child at
    /// all). `None` for a depth-0 portrait, which claims nothing.
    pub fn root_moves_every_digit(&self) -> Option<bool> {
        self.root_node().map(|r| {
            self.nodes[r as usize].perm.iter().enumerate().all(|(i, &o)| o != i as u64)
        })
    }

    fn eq_walk(&self, other: &Portrait, a: u32, b: u32) -> bool {
        let na = &self.nodes[a as usize];
        let nb = &other.nodes[b as usize];
        if na.perm != nb.perm || na.children.len() != nb.children.len() {
            return false;
        }
        na.children
            .iter()
            .zip(nb.children.iter())
            .all(|(&ca, &cb)| self.eq_walk(other, ca, cb))
    }
}

/// Incremental arena construction for code that lowers other representations
/// to portraits (children must be pushed before their parent).
pub(crate) struct ArenaBuilder {
    nodes: Vec<PNode>,
}

impl ArenaBuilder {
    pub(crate) fn new() -> Self {
        ArenaBuilder { nodes: Vec::new() }
    }

    pub(crate) fn push(&mut self, perm: Vec<u64>, children: Vec<u32>, cap: u64) -> Result<u32> {
        if self.nodes.len() as u64 >= cap {
            return Err(Error::BudgetExhausted { during: "portrait construction", budget: cap });
        }
        self.nodes.push(PNode { perm, children });
        Ok((self.nodes.len() - 1) as u32)
    }

    pub(crate) fn finish(self, index: SphericalIndex, depth: usize) -> Result<Portrait> {
        let p = Portrait { index, depth, nodes: self.nodes };
        p.validate()?;
        Ok(p)
    }
}

impl PartialEq for Portrait {
    fn eq(&self, other: &Self) -> bool {
        if self.index != other.index || self.depth != other.depth {
            return false;
        }
        match (self.root_node(), other.root_node()) {
            (None, None) => true,
            (Some(a), Some(b)) => self.eq_walk(other, a, b),
            _ => false,
        }
    }
}

impl Eq for Portrait {}
