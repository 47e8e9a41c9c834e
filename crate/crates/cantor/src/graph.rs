//! Schreier graphs of orbits and their canonical forms.
//!
//! Vertices are orbit points (tree vertices for level graphs, observed
//! boundary prefixes for stabilizer balls); a directed edge `u --g--> v`
//! records that generator `g` maps `u` to `v`. Inverse edges are implicit:
//! ball extraction and distances use the symmetric closure, while the stored
//! edge list keeps one edge per generator application.
//!
//! Rooted, edge-labelled graphs of this shape have a genuine canonical form:
//! a breadth-first relabelling from the basepoint, traversing edges in label
//! order, is determined by the isomorphism class alone. Two based balls are
//! isomorphic (as labelled graphs with basepoints) exactly when their
//! canonical byte strings — and hence their hashes — coincide.

use crate::action::GeneratedAction;
use crate::error::{Error, Result};
use crate::measure::ratio;
use crate::word::{BoundaryPrefix, Vertex};
use crate::Limits;
use num::BigRational;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::{HashMap, VecDeque};

/// One generator application `src --gen--> dst`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SchreierEdge {
    pub src: usize,
    pub gen: usize,
    pub dst: usize,
}

/// What a graph's vertices range over.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GraphKind {
    /// Full orbit of a vertex at one tree level.
    LevelOrbit { level: usize },
    /// Orbit points within graph distance `radius` of the center prefix.
    StabilizerBall { radius: usize, center: String },
}

/// A based Schreier graph: orbit points, generator edges, one basepoint.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SchreierGraph {
    pub kind: GraphKind,
    pub generator_names: Vec<String>,
    pub vertex_labels: Vec<String>,
    pub basepoint: usize,
    pub edges: Vec<SchreierEdge>,
}

/// Orbit graph of a vertex at `level` (default basepoint: the all-zero
/// vertex). Vertices are sorted lexicographically; edges cover every
/// generator at every vertex.
pub fn schreier_level_graph(
    action: &GeneratedAction,
    level: usize,
    basepoint: Option<&Vertex>,
    limits: &Limits,
) -> Result<SchreierGraph> {
    let base = match basepoint {
        Some(v) => {
            if v.level() != level {
                return Err(Error::InvalidIndex(format!(
                    "basepoint has level {}, expected {level}",
                    v.level()
                )));
            }
            v.clone()
        }
        None => Vertex::new(action.index(), vec![0; level])?,
    };
    let orbit = action.orbit_of_vertex(&base, limits)?;
    let pos: HashMap<&Vertex, usize> = orbit.iter().enumerate().map(|(i, v)| (v, i)).collect();
    let mut edges = Vec::new();
    for (i, v) in orbit.iter().enumerate() {
        for gen in 0..action.generator_count() {
            let img = action.generator(gen).apply_vertex(v)?;
            edges.push(SchreierEdge { src: i, gen, dst: pos[&img] });
        }
    }
    Ok(SchreierGraph {
        kind: GraphKind::LevelOrbit { level },
        generator_names: action.generator_names().to_vec(),
        vertex_labels: orbit.iter().map(|v| v.to_string()).collect(),
        basepoint: pos[&base],
        edges,
    })
}

/// Ball of radius `radius` around `center` in the orbit graph of the
/// observed prefix. Distances count generator and inverse moves; stored
/// edges are those whose endpoints both lie in the ball.
pub fn stabilizer_schreier_ball(
    action: &GeneratedAction,
    center: &BoundaryPrefix,
    radius: usize,
    limits: &Limits,
) -> Result<SchreierGraph> {
    let mut dist: HashMap<BoundaryPrefix, usize> = HashMap::new();
    dist.insert(center.clone(), 0);
    let mut queue = VecDeque::from([center.clone()]);
    while let Some(x) = queue.pop_front() {
        let d = dist[&x];
        if d == radius {
            continue;
        }
        for gen in 0..action.generator_count() {
            for g in [action.generator(gen), action.generator_inverse(gen)] {
                let img = g.apply_prefix(&x)?;
                if !dist.contains_key(&img) {
                    if dist.len() as u64 >= limits.search_cap {
                        return Err(Error::SearchCapExceeded {
                            during: "stabilizer ball enumeration",
                            cap: limits.search_cap,
                        });
                    }
                    dist.insert(img.clone(), d + 1);
                    queue.push_back(img);
                }
            }
        }
    }
    let mut points: Vec<BoundaryPrefix> = dist.keys().cloned().collect();
    points.sort_by(|a, b| a.digits().cmp(b.digits()));
    let pos: HashMap<&BoundaryPrefix, usize> =
        points.iter().enumerate().map(|(i, x)| (x, i)).collect();
    let mut edges = Vec::new();
    for (i, x) in points.iter().enumerate() {
        for gen in 0..action.generator_count() {
            let img = action.generator(gen).apply_prefix(x)?;
            if let Some(&j) = pos.get(&img) {
                edges.push(SchreierEdge { src: i, gen, dst: j });
            }
        }
    }
    Ok(SchreierGraph {
        kind: GraphKind::StabilizerBall { radius, center: center.to_string() },
        generator_names: action.generator_names().to_vec(),
        vertex_labels: points.iter().map(|x| x.to_string()).collect(),
        basepoint: pos[center],
        edges,
    })
}

impl SchreierGraph {
    pub fn vertex_count(&self) -> usize {
        self.vertex_labels.len()
    }

    fn adjacency(&self) -> (HashMap<(usize, usize), usize>, HashMap<(usize, usize), usize>) {
        let mut fwd = HashMap::new();
        let mut back = HashMap::new();
        for e in &self.edges {
            fwd.insert((e.src, e.gen), e.dst);
            back.insert((e.dst, e.gen), e.src);
        }
        (fwd, back)
    }

    /// The sub-ball of radius `r` around the basepoint: everything `r`
    /// rounds of symmetric breadth-first search can see. Vertices lie within
    /// distance `r`; an edge is kept when its nearer endpoint lies strictly
    /// inside (distance `< r`), so the radius-0 ball is a bare pointed
    /// vertex. Vertices keep their relative order.
    pub fn ball_within(&self, r: usize) -> SchreierGraph {
        let (fwd, back) = self.adjacency();
        let k = self.generator_names.len();
        let mut dist: HashMap<usize, usize> = HashMap::new();
        dist.insert(self.basepoint, 0);
        let mut queue = VecDeque::from([self.basepoint]);
        while let Some(u) = queue.pop_front() {
            let d = dist[&u];
            if d == r {
                continue;
            }
            for gen in 0..k {
                for next in [fwd.get(&(u, gen)), back.get(&(u, gen))].into_iter().flatten() {
                    if !dist.contains_key(next) {
                        dist.insert(*next, d + 1);
                        queue.push_back(*next);
                    }
                }
            }
        }
        let mut keep: Vec<usize> = dist.keys().copied().collect();
        keep.sort_unstable();
        let renumber: HashMap<usize, usize> =
            keep.iter().enumerate().map(|(new, &old)| (old, new)).collect();
        SchreierGraph {
            kind: self.kind.clone(),
            generator_names: self.generator_names.clone(),
            vertex_labels: keep.iter().map(|&i| self.vertex_labels[i].clone()).collect(),
            basepoint: renumber[&self.basepoint],
            edges: self
                .edges
                .iter()
                .filter(|e| {
                    match (dist.get(&e.src), dist.get(&e.dst)) {
                        (Some(&ds), Some(&dd)) => ds.min(dd) < r,
                        _ => false,
                    }
                })
                .map(|e| SchreierEdge {
                    src: renumber[&e.src],
                    gen: e.gen,
                    dst: renumber[&e.dst],
                })
                .collect(),
        }
    }

    /// Canonical byte string of the based labelled graph: a breadth-first
    /// relabelling from the basepoint (forward edges in label order, then
    /// backward), followed by the sorted relabelled edge list. Complete for
    /// graphs whose vertices are all reachable from the basepoint through
    /// the symmetric closure — true of every graph this module builds.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let (fwd, back) = self.adjacency();
        let k = self.generator_names.len();
        let mut order: HashMap<usize, usize> = HashMap::new();
        order.insert(self.basepoint, 0);
        let mut queue = VecDeque::from([self.basepoint]);
        let mut visited = vec![self.basepoint];
        while let Some(u) = queue.pop_front() {
            for gen in 0..k {
                for next in [fwd.get(&(u, gen)), back.get(&(u, gen))].into_iter().flatten() {
                    if !order.contains_key(next) {
                        order.insert(*next, visited.len());
                        visited.push(*next);
                        queue.push_back(*next);
                    }
                }
            }
        }
        let mut edges: Vec<(usize, usize, usize)> = self
            .edges
            .iter()
            .filter(|e| order.contains_key(&e.src) && order.contains_key(&e.dst))
            .map(|e| (order[&e.src], e.gen, order[&e.dst]))
            .collect();
        edges.sort_unstable();
        let mut bytes = Vec::new();
        bytes.extend_from_slice(&(k as u64).to_be_bytes());
        bytes.extend_from_slice(&(order.len() as u64).to_be_bytes());
        for (s, g, d) in edges {
            bytes.extend_from_slice(&(s as u64).to_be_bytes());
            bytes.extend_from_slice(&(g as u64).to_be_bytes());
            bytes.extend_from_slice(&(d as u64).to_be_bytes());
        }
        bytes
    }

    /// Hex SHA-256 of [`SchreierGraph::canonical_bytes`]: equal exactly for
    /// isomorphic based graphs.
    pub fn canonical_hash(&self) -> String {
        let digest = Sha256::digest(self.canonical_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// GraphViz rendering; the basepoint is drawn with a double circle.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph schreier {\n  rankdir=LR;\n");
        for (i, label) in self.vertex_labels.iter().enumerate() {
            let shape = if i == self.basepoint { ", shape=doublecircle" } else { "" };
            out.push_str(&format!("  v{i} [label=\"{label}\"{shape}];\n"));
        }
        let mut edges = self.edges.clone();
        edges.sort_unstable();
        for e in edges {
            out.push_str(&format!(
                "  v{} -> v{} [label=\"{}\"];\n",
                e.src, e.dst, self.generator_names[e.gen]
            ));
        }
        out.push_str("}\n");
        out
    }
}

/// Comparison of two based graphs by nested balls.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SchreierDistance {
    /// Balls are isomorphic up to `agreement_radius` and differ at the next
    /// radius; the distance is `1/2^agreement_radius`.
    Resolved {
        #[serde(with = "crate::measure::ratio_serde")]
        distance: BigRational,
        agreement_radius: usize,
    },
    /// Balls agree (are isomorphic) at every radius up to `radius`; any
    /// distance is at most `bound = 1/2^radius`.
    IndistinguishableAtRadius {
        radius: usize,
        #[serde(with = "crate::measure::ratio_serde")]
        bound: BigRational,
    },
}

/// Ball metric on based Schreier graphs: the distance is `1/2^k` with `k`
/// the largest radius at which the canonical ball forms still coincide.
/// Radius-0 balls are bare pointed vertices, so two graphs over the same
/// generators never differ there and the distance never exceeds 1. Graphs
/// whose balls agree all the way to `r_max` come back as a flag with the
/// matching upper bound, not as a distance.
pub fn schreier_metric(
    a: &SchreierGraph,
    b: &SchreierGraph,
    r_max: usize,
) -> Result<SchreierDistance> {
    if a.generator_names != b.generator_names {
        return Err(Error::GeneratorMismatch(format!(
            "[{}] vs [{}]",
            a.generator_names.join(", "),
            b.generator_names.join(", ")
        )));
    }
    for r in 1..=r_max {
        if a.ball_within(r).canonical_bytes() != b.ball_within(r).canonical_bytes() {
            return Ok(SchreierDistance::Resolved {
                distance: pow2_inv(r - 1),
                agreement_radius: r - 1,
            });
        }
    }
    Ok(SchreierDistance::IndistinguishableAtRadius { radius: r_max, bound: pow2_inv(r_max) })
}

fn pow2_inv(k: usize) -> BigRational {
    let mut v = ratio(1, 1);
    let half = ratio(1, 2);
    for _ in 0..k {
        v *= half.clone();
    }
    v
}
