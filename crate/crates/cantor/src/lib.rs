//! Exact, finite-depth computation with group actions on the boundary of a
//! spherically homogeneous rooted tree.
//!
//! The tree is described by its [`SphericalIndex`] — the sequence of vertex
//! arities per level, given in closed form so that any level can be queried.
//! Tree automorphisms come in three interchangeable representations
//! ([`TreeAutomorphism`]): explicit finite portraits, finite-state (Mealy)
//! recursions, and built-in closed-form rules. On top of those, the crate
//! computes:
//!
//! * exact cylinder measures and the boundary ultrametric ([`measure`]),
//! * word balls, orbits, stabilizers and Schreier graphs ([`action`], [`graph`]),
//! * fixed-point structure: moved-measure ratios, non-degeneracy certificates,
//!   identity-region witnesses and stabilizer-separating point families
//!   ([`dynamics`]),
//! * empirical stabilizer-class sampling ([`irs`]),
//! * a catalog of ready-made actions with machine-checkable facts and
//!   arity-chain compatibility tests ([`catalog`]).
//!
//! All arithmetic on measures and ratios is exact (arbitrary-precision
//! rationals); every "equal/fixed/identity" statement is made at an explicit
//! finite depth and reported as such. Results never claim knowledge below the
//! depth they were computed at.
//!
//! Start with the runnable examples (`cargo run --example <name>`):
//!
//! * `apply_and_sections` — evaluating automorphisms, sections, closures
//! * `exact_measures` — cylinder measures and the boundary ultrametric
//! * `word_balls` — ball growth and point/level stabilizers
//! * `schreier_graphs` — orbit graphs, canonical forms, DOT export
//! * `degeneracy` — moved-measure ratios, scans and certificates
//! * `lqa_and_stabilizers` — identity-region witnesses, separated point trees
//! * `irs_sampling` — empirical stabilizer-class statistics
//! * `chain_compatibility` — divisibility interleavings of arity chains
//!
//! The same functionality is scriptable through the thin `cantor` binary.

pub mod action;
pub mod aut;
pub mod catalog;
pub mod dynamics;
pub mod error;
pub mod graph;
pub mod index;
pub mod irs;
pub mod measure;
pub mod word;

pub use action::{GeneratedAction, GroupWord, Letter, WordBall};
pub use aut::{ElementDef, Representation, TreeAutomorphism};
pub use catalog::{
    build_example, catalog_names, chain_compatibility, CatalogEntry, ChainCompatibility,
    ExampleParams, Fact, FactReport,
};
pub use dynamics::{
    certify_nondegenerate, degeneracy_scan, density_profile, distinct_stabilizer_tree,
    fixed_vertex_count, fixed_vertices, holonomy_witness, lqa_witness_search, moved_ratio_below,
    nonfixed_ratio, replay_bound, CertificateRoute, CertifyOutcome, DegeneracyReport,
    DegeneracyVerdict, DistinctStabilizerReport, FixedVertexCount, HolonomyReport, LqaWitness,
    NonDegeneracyCertificate, RatioBound, ReplayReport,
};
pub use error::{Error, Result};
pub use graph::{schreier_level_graph, schreier_metric, stabilizer_schreier_ball, SchreierDistance, SchreierGraph};
pub use index::SphericalIndex;
pub use irs::{atomicity_report, irs_empirical, sample_point, AtomicityReport, AtomicityTrend, IrsSampleReport, StabilizerClass};
pub use measure::{boundary_metric, cylinder_measure, BoundaryDistance, CylinderMeasure};
pub use word::{BoundaryPrefix, Vertex};

/// Resource caps for operations that walk or enumerate parts of the tree.
///
/// `level_cap` bounds any full level enumeration (number of vertices);
/// `work_budget` bounds the total digit-steps a single exact computation may
/// spend; `search_cap` bounds candidate counts in witness searches. All
/// operations that can exceed a cap return a structured error instead of
/// silently truncating.
#[derive(Clone, Debug)]
pub struct Limits {
    pub level_cap: u64,
    pub work_budget: u64,
    pub search_cap: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { level_cap: 1_000_000, work_budget: 200_000_000, search_cap: 100_000 }
    }
}

impl Limits {
    /// Default limits with `level_cap` taken from the `CANTOR_LEVEL_CAP`
    /// environment variable when set (used by the command-line tool).
    pub fn from_env() -> Self {
        let mut limits = Limits::default();
        if let Ok(v) = std::env::var("CANTOR_LEVEL_CAP") {
            if let Ok(cap) = v.trim().parse::<u64>() {
                limits.level_cap = cap.max(1);
            }
        }
        limits
    }
}
