//! Ready-made actions with machine-checkable facts, and the divisibility
//! compatibility test for arity sequences.
//!
//! Each entry couples a spherical index, named generators (kept both as
//! realized automorphisms and as portable [`ElementDef`] values), and a list
//! of facts the construction is supposed to satisfy. The facts are not
//! documentation: [`CatalogEntry::check_fact`] recomputes every claim from
//! scratch, so a broken construction fails loudly rather than drifting out
//! of sync with its description.

use crate::action::{GeneratedAction, Letter};
use crate::aut::{Boundedness, ElementDef, MealyStateDef, RuleKind, TreeAutomorphism};
use crate::dynamics::{
    certify_nondegenerate, degeneracy_scan, fixed_vertex_count, moved_ratio_below,
    CertificateRoute, CertifyOutcome, DegeneracyVerdict, RatioBound,
};
use crate::error::{Error, Result};
use crate::index::SphericalIndex;
use crate::measure::ratio;
use crate::word::{BoundaryPrefix, Vertex};
use crate::Limits;
use num::{BigInt, BigRational, BigUint, One, Zero};
use serde::Serialize;
use std::collections::BTreeMap;

/// One machine-checkable claim about a catalog entry.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Fact {
    pub id: &'static str,
    pub description: &'static str,
}

/// The outcome of re-deriving one fact.
#[derive(Clone, Debug, Serialize)]
pub struct FactReport {
    pub id: &'static str,
    pub description: &'static str,
    pub passed: bool,
    /// What was actually computed, for eyeballing failures.
    pub detail: String,
}

/// A named action: index, generators, and the facts that pin it down.
#[derive(Debug)]
pub struct CatalogEntry {
    pub name: String,
    pub summary: &'static str,
    pub index: SphericalIndex,
    pub action: GeneratedAction,
    /// Portable definitions of the generators, in generator order.
    pub definitions: Vec<(String, ElementDef)>,
    pub facts: Vec<Fact>,
}

/// Optional parameters for [`build_example`]. Entries reject parameters they
/// have no use for, so a typo cannot silently build the default.
#[derive(Clone, Debug, Default)]
pub struct ExampleParams {
    /// Constant arity for the entries that live on a constant-arity tree.
    pub arity: Option<u64>,
    /// Full index for the entries that live on a growing tree.
    pub index: Option<SphericalIndex>,
}

/// The catalog, in listing order.
pub fn catalog_names() -> &'static [&'static str] {
    &["odometer", "dihedral", "grigorchuk", "thm61_b", "ex44_c", "ex45_c"]
}

/// Builds a catalog entry by name. `odometer` and `ex45_c` accept an arity
/// (default 2); `thm61_b` and `ex44_c` accept a geometric index (default
/// prefix `[3]`, ratio 3); `dihedral` and `grigorchuk` take no parameters.
pub fn build_example(name: &str, params: &ExampleParams) -> Result<CatalogEntry> {
    let no_arity = |entry: &str| -> Result<()> {
        match params.arity {
            Some(_) => Err(Error::Unsupported(format!("'{entry}' does not take an arity"))),
            None => Ok(()),
        }
    };
    let no_index = |entry: &str| -> Result<()> {
        match params.index {
            Some(_) => Err(Error::Unsupported(format!("'{entry}' does not take an index"))),
            None => Ok(()),
        }
    };
    match name {
        "odometer" => {
            no_index(name)?;
            odometer(params.arity.unwrap_or(2))
        }
        "dihedral" => {
            no_arity(name)?;
            no_index(name)?;
            dihedral()
        }
        "grigorchuk" => {
            no_arity(name)?;
            no_index(name)?;
            grigorchuk()
        }
        "thm61_b" => {
            no_arity(name)?;
            let index = match &params.index {
                Some(i) => i.clone(),
                None => SphericalIndex::geometric(vec![3], 3)?,
            };
            thm61_b(index)
        }
        "ex44_c" => {
            no_arity(name)?;
            let index = match &params.index {
                Some(i) => i.clone(),
                None => SphericalIndex::geometric(vec![3], 3)?,
            };
            ex44_c(index)
        }
        "ex45_c" => {
            no_index(name)?;
            ex45_c(params.arity.unwrap_or(2))
        }
        other => Err(Error::UnknownExample(other.into())),
    }
}

fn assemble(
    name: &str,
    summary: &'static str,
    index: SphericalIndex,
    definitions: Vec<(String, ElementDef)>,
    facts: Vec<Fact>,
) -> Result<CatalogEntry> {
    let generators = definitions
        .iter()
        .map(|(n, def)| Ok((n.clone(), def.realize(&index)?)))
        .collect::<Result<Vec<_>>>()?;
    let action = GeneratedAction::new(&index, generators)?;
    Ok(CatalogEntry { name: name.into(), summary, index, action, definitions, facts })
}

/// Adding machine on the constant alphabet `0..d`: add one to the least
/// significant digit, carry into the next level on wrap-around.
fn adding_def(d: u64) -> ElementDef {
    let mut states = BTreeMap::new();
    states.insert(
        "a".to_string(),
        MealyStateDef {
            perm: (0..d).map(|i| (i + 1) % d).collect(),
            to: (0..d).map(|i| if i == d - 1 { "a".into() } else { "id".into() }).collect(),
        },
    );
    ElementDef::Mealy { alphabet: d, states, initial: "a".into() }
}

/// Negation of a binary integer: copy digits until the first 1, flip
/// everything after it. Fixes exactly the all-zeros path.
fn negation_def() -> ElementDef {
    let mut states = BTreeMap::new();
    states.insert(
        "b".to_string(),
        MealyStateDef { perm: vec![0, 1], to: vec!["b".into(), "flip".into()] },
    );
    states.insert(
        "flip".to_string(),
        MealyStateDef { perm: vec![1, 0], to: vec!["flip".into(), "flip".into()] },
    );
    ElementDef::Mealy { alphabet: 2, states, initial: "b".into() }
}

/// The five-state family a, b, c, d (plus the implicit identity) with the
/// classic recursion b = (a, c), c = (a, d), d = (1, b) and a the root swap.
fn grigorchuk_def(initial: &str) -> ElementDef {
    let mut states = BTreeMap::new();
    states.insert("a".to_string(), MealyStateDef { perm: vec![1, 0], to: vec!["id".into(), "id".into()] });
    states.insert("b".to_string(), MealyStateDef { perm: vec![0, 1], to: vec!["a".into(), "c".into()] });
    states.insert("c".to_string(), MealyStateDef { perm: vec![0, 1], to: vec!["a".into(), "d".into()] });
    states.insert("d".to_string(), MealyStateDef { perm: vec![0, 1], to: vec!["id".into(), "b".into()] });
    ElementDef::Mealy { alphabet: 2, states, initial: initial.into() }
}

/// Free cyclic action: the adding machine alone.
pub fn odometer(d: u64) -> Result<CatalogEntry> {
    let index = SphericalIndex::constant(d)?;
    assemble(
        "odometer",
        "add one with carry: a free, level-transitive cyclic action",
        index,
        vec![("a".into(), adding_def(d))],
        vec![
            Fact { id: "free_levels", description: "no fixed vertices at levels 1..=6" },
            Fact { id: "level_transitive", description: "one orbit at levels 1..=6" },
            Fact {
                id: "free_certificate",
                description: "certified non-degenerate via freeness, alpha = 1",
            },
        ],
    )
}

/// Adding machine plus negation on the binary tree.
pub fn dihedral() -> Result<CatalogEntry> {
    let index = SphericalIndex::constant(2)?;
    assemble(
        "dihedral",
        "adding machine and negation: the infinite dihedral action",
        index,
        vec![("a".into(), adding_def(2)), ("b".into(), negation_def())],
        vec![
            Fact {
                id: "group_relations",
                description: "b b = e and b a b = a^-1, checked to depth 12",
            },
            Fact {
                id: "zero_point_stabilizer",
                description: "the radius-4 stabilizer ball at the zero point is {e, b}",
            },
            Fact {
                id: "translated_point_stabilizer",
                description: "at the image of zero under a, the stabilizer ball is {e, a b a^-1}",
            },
        ],
    )
}

/// The first Grigorchuk group's five-state recursion.
pub fn grigorchuk() -> Result<CatalogEntry> {
    let index = SphericalIndex::constant(2)?;
    assemble(
        "grigorchuk",
        "the four-generator two-state-alphabet torsion action b = (a,c), c = (a,d), d = (1,b)",
        index,
        vec![
            ("a".into(), grigorchuk_def("a")),
            ("b".into(), grigorchuk_def("b")),
            ("c".into(), grigorchuk_def("c")),
            ("d".into(), grigorchuk_def("d")),
        ],
        vec![
            Fact { id: "involutions", description: "every generator squares to the identity" },
            Fact { id: "klein_four", description: "b c = d, c d = b, b d = c to depth 10" },
            Fact {
                id: "all_generators_certified",
                description: "every generator has a positive moved-measure certificate",
            },
            Fact {
                id: "closures_stay_small",
                description: "each generator has at most 5 distinct sections",
            },
        ],
    )
}

/// Validates the growth demanded by the top-pair swap analysis: every arity
/// at least 3 and each level more than twice the one before.
fn validate_top_pair_index(index: &SphericalIndex) -> Result<()> {
    let (prefix, ratio) = match index {
        SphericalIndex::Geometric { prefix, ratio } => (prefix, *ratio),
        SphericalIndex::EventuallyPeriodic { .. } => {
            return Err(Error::InvalidIndex(
                "the top-pair swap entry needs a geometric index (arities must outgrow \
                 every bound)"
                    .into(),
            ))
        }
    };
    if ratio < 3 {
        return Err(Error::InvalidIndex(format!(
            "the top-pair swap entry needs ratio >= 3 so each arity more than doubles, got {ratio}"
        )));
    }
    if prefix[0] < 3 {
        return Err(Error::InvalidIndex(format!(
            "the top-pair swap entry needs arities >= 3, got first arity {}",
            prefix[0]
        )));
    }
    for w in prefix.windows(2) {
        if w[1] <= 2 * w[0] {
            return Err(Error::InvalidIndex(format!(
                "the top-pair swap entry needs each arity to more than double, got {} after {}",
                w[1], w[0]
            )));
        }
    }
    Ok(())
}

/// Top-pair digit swap on a geometrically growing tree, together with the
/// mixed-radix odometer that makes the action transitive.
pub fn thm61_b(index: SphericalIndex) -> Result<CatalogEntry> {
    validate_top_pair_index(&index)?;
    assemble(
        "thm61_b",
        "swap the first digit lying in the top pair of its level, copy everything else",
        index,
        vec![
            ("a".into(), ElementDef::Rule { rule: RuleKind::Odometer, inverse: false }),
            ("b".into(), ElementDef::Rule { rule: RuleKind::TopPairSwap, inverse: false }),
        ],
        vec![
            Fact {
                id: "jump_rule",
                description: "b swaps the top two digits below each all-zeros vertex",
            },
            Fact {
                id: "fixed_products_exact",
                description: "the fixed fraction of level l is the product of (n_j - 2)/n_j",
            },
            Fact {
                id: "interval_above_jump_bound",
                description:
                    "the certified fixed-measure interval sits strictly above 1 - 4/n_{l+1}",
            },
        ],
    )
}

/// Odometers grafted one level below every step of the zero ladder. The
/// index must be geometric with a strictly increasing prefix, so the graft
/// cylinders shrink faster than any fixed bound.
pub fn ex44_c(index: SphericalIndex) -> Result<CatalogEntry> {
    match &index {
        SphericalIndex::Geometric { prefix, .. } => {
            if prefix.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::InvalidIndex(
                    "the ladder graft entry needs strictly increasing arities".into(),
                ));
            }
        }
        SphericalIndex::EventuallyPeriodic { .. } => {
            return Err(Error::InvalidIndex(
                "the ladder graft entry needs a geometric index (arities must grow)".into(),
            ))
        }
    }
    assemble(
        "ex44_c",
        "graft a free odometer below each vertex 0^l 1 of the zero ladder",
        index,
        vec![
            ("a".into(), ElementDef::Rule { rule: RuleKind::Odometer, inverse: false }),
            ("c".into(), ElementDef::Rule { rule: RuleKind::LadderGraft, inverse: false }),
        ],
        vec![
            Fact {
                id: "graft_ratios_exact",
                description: "the moved fraction below 0^l 1 is exactly 1/n_{l+2}",
            },
            Fact {
                id: "grafts_carry_whole_cylinders",
                description: "below each graft point 0^l 1 0 every path moves",
            },
            Fact {
                id: "degeneracy_refuted",
                description: "an exact sub-threshold cylinder refutes any alpha >= 1/10",
            },
        ],
    )
}

/// Odometers grafted at doubling depths along the zero ray.
pub fn ex45_c(d: u64) -> Result<CatalogEntry> {
    let index = SphericalIndex::constant(d)?;
    assemble(
        "ex45_c",
        "graft a free odometer below each vertex 0^(2^k - 1) 1 of the zero ray",
        index,
        vec![
            ("a".into(), adding_def(d)),
            ("c".into(), ElementDef::Rule { rule: RuleKind::DoublingGraft, inverse: false }),
        ],
        vec![
            Fact {
                id: "doubling_ratios_exact",
                description: "the moved fraction below w_k = 0^(2^k - 1) 1 is exactly d^(-2^k)",
            },
            Fact {
                id: "degeneracy_refuted",
                description: "an exact sub-threshold cylinder refutes any alpha >= 1/8",
            },
        ],
    )
}

/// The distinguished vertex `w_k = 0^(2^k - 1) 1` of the doubling graft.
pub fn doubling_graft_vertex(index: &SphericalIndex, k: u32) -> Result<Vertex> {
    let mut digits = vec![0; (1usize << k) - 1];
    digits.push(1);
    Vertex::new(index, digits)
}

/// The distinguished vertex `w_l = 0^l 1` of the ladder graft.
pub fn ladder_graft_vertex(index: &SphericalIndex, l: usize) -> Result<Vertex> {
    let mut digits = vec![0; l];
    digits.push(1);
    Vertex::new(index, digits)
}

/// Exact moved fraction below [`doubling_graft_vertex`] on the constant-`d`
/// tree: `d^(-2^k)`.
pub fn doubling_graft_ratio(d: u64, k: u32) -> BigRational {
    BigRational::new(BigInt::one(), BigInt::from(d).pow(1u32 << k))
}

/// Exact moved fraction below [`ladder_graft_vertex`]: `1/n_{l+2}`.
pub fn ladder_graft_ratio(index: &SphericalIndex, l: usize) -> Result<BigRational> {
    Ok(BigRational::new(BigInt::one(), BigInt::from(index.arity(l + 2)?)))
}

/// Exact fraction of level-`level` vertices fixed by the top-pair swap:
/// `prod_{j=1..level} (n_j - 2)/n_j`.
pub fn top_pair_fixed_fraction(index: &SphericalIndex, level: usize) -> Result<BigRational> {
    let mut out = BigRational::one();
    for j in 1..=level {
        let n = index.arity(j)?;
        out *= ratio(n - 2, n);
    }
    Ok(out)
}

/// Certified enclosure `(lo, hi)` of the limiting fixed fraction below the
/// all-zeros level-`level` vertex under the top-pair swap: the infinite
/// product `prod_{j>level} (n_j - 2)/n_j`. `hi` is a finite partial product;
/// `lo` discounts it by the union bound `sum_{j>m} 2/n_j` on the remaining
/// tail, evaluated in closed form for the geometric part. The window grows
/// until `hi - lo < tolerance`. Exact rational arithmetic throughout.
pub fn top_pair_fix_interval(
    index: &SphericalIndex,
    level: usize,
    tolerance: &BigRational,
) -> Result<(BigRational, BigRational)> {
    let (prefix_len, ratio_u) = match index {
        SphericalIndex::Geometric { prefix, ratio } => (prefix.len(), *ratio),
        SphericalIndex::EventuallyPeriodic { .. } => {
            return Err(Error::Unsupported(
                "the tail bound needs geometrically growing arities".into(),
            ))
        }
    };
    let mut hi = BigRational::one();
    let mut m = level;
    loop {
        // Extend the partial product at least to the end of the prefix so
        // the geometric tail formula applies beyond m.
        m += 1;
        let n = index.arity(m)?;
        hi *= ratio(n - 2, n);
        if m < prefix_len {
            continue;
        }
        // sum_{j>m} 2/n_j = 2/(n_m (r - 1)) for n_j = n_m r^{j-m}.
        let tail = BigRational::new(BigInt::from(2), BigInt::from(n) * BigInt::from(ratio_u - 1));
        let lo = hi.clone() * (BigRational::one() - tail);
        if hi.clone() - lo.clone() < *tolerance {
            return Ok((lo, hi));
        }
    }
}

impl CatalogEntry {
    /// The named generator, if the entry has one by that name.
    pub fn generator(&self, name: &str) -> Option<&TreeAutomorphism> {
        let i = self.action.generator_names().iter().position(|n| n == name)?;
        Some(self.action.generator(i))
    }

    /// Re-derives one fact from scratch.
    pub fn check_fact(&self, id: &str, limits: &Limits) -> Result<FactReport> {
        let fact = *self
            .facts
            .iter()
            .find(|f| f.id == id)
            .ok_or_else(|| Error::UnknownFact { example: self.name.clone(), fact: id.into() })?;
        let (passed, detail) = match (self.name.as_str(), id) {
            ("odometer", "free_levels") => self.check_free_levels(limits)?,
            ("odometer", "level_transitive") => self.check_level_transitive(limits)?,
            ("odometer", "free_certificate") => self.check_free_certificate(limits)?,
            ("dihedral", "group_relations") => self.check_dihedral_relations(limits)?,
            ("dihedral", "zero_point_stabilizer") => {
                self.check_point_stabilizer(vec![0; 12], vec![Letter { gen: 1, inverse: false }], limits)?
            }
            ("dihedral", "translated_point_stabilizer") => {
                let mut digits = vec![0; 12];
                digits[0] = 1;
                let conj = vec![
                    Letter { gen: 0, inverse: false },
                    Letter { gen: 1, inverse: false },
                    Letter { gen: 0, inverse: true },
                ];
                self.check_point_stabilizer(digits, conj, limits)?
            }
            ("grigorchuk", "involutions") => self.check_involutions(limits)?,
            ("grigorchuk", "klein_four") => self.check_klein_four(limits)?,
            ("grigorchuk", "all_generators_certified") => self.check_all_certified(limits)?,
            ("grigorchuk", "closures_stay_small") => self.check_closures_small(limits)?,
            ("thm61_b", "jump_rule") => self.check_jump_rule()?,
            ("thm61_b", "fixed_products_exact") => self.check_fixed_products(limits)?,
            ("thm61_b", "interval_above_jump_bound") => self.check_interval_bound()?,
            ("ex44_c", "graft_ratios_exact") => self.check_ladder_ratios(limits)?,
            ("ex44_c", "grafts_carry_whole_cylinders") => self.check_graft_cylinders(limits)?,
            ("ex44_c", "degeneracy_refuted") => self.check_refuted(4, 6, ratio(1, 10), limits)?,
            ("ex45_c", "doubling_ratios_exact") => self.check_doubling_ratios(limits)?,
            ("ex45_c", "degeneracy_refuted") => self.check_refuted(9, 12, ratio(1, 8), limits)?,
            _ => {
                return Err(Error::UnknownFact { example: self.name.clone(), fact: id.into() })
            }
        };
        Ok(FactReport { id: fact.id, description: fact.description, passed, detail })
    }

    /// Re-derives every fact of the entry, in listing order.
    pub fn check_all_facts(&self, limits: &Limits) -> Result<Vec<FactReport>> {
        self.facts.iter().map(|f| self.check_fact(f.id, limits)).collect()
    }

    fn check_free_levels(&self, limits: &Limits) -> Result<(bool, String)> {
        let a = self.action.generator(0);
        let mut counts = Vec::new();
        for level in 1..=6 {
            counts.push(fixed_vertex_count(a, level, limits)?.fixed);
        }
        let passed = counts.iter().all(|c| c.is_zero());
        Ok((passed, format!("fixed counts at levels 1..=6: {counts:?}")))
    }

    fn check_level_transitive(&self, limits: &Limits) -> Result<(bool, String)> {
        let mut all = true;
        for level in 1..=6 {
            all &= self.action.is_level_transitive(level, limits)?;
        }
        Ok((all, "orbit of the all-zeros vertex covers levels 1..=6".into()))
    }

    fn check_free_certificate(&self, limits: &Limits) -> Result<(bool, String)> {
        match certify_nondegenerate(self.action.generator(0), limits)? {
            CertifyOutcome::Certified { certificate } => {
                let passed = certificate.alpha.is_one()
                    && matches!(certificate.route, CertificateRoute::FreeAction);
                Ok((passed, format!("alpha = {}", certificate.alpha)))
            }
            CertifyOutcome::NotCertified { reason } => Ok((false, reason)),
        }
    }

    fn check_dihedral_relations(&self, limits: &Limits) -> Result<(bool, String)> {
        let a = Letter { gen: 0, inverse: false };
        let a_inv = Letter { gen: 0, inverse: true };
        let b = Letter { gen: 1, inverse: false };
        let involution = self.action.words_equal_to_depth(&[b, b], &[], 12, limits)?;
        let reflection = self.action.words_equal_to_depth(&[b, a, b], &[a_inv], 12, limits)?;
        Ok((involution && reflection, format!("b b = e: {involution}, b a b = a^-1: {reflection}")))
    }

    /// The stabilizer ball at the point must consist exactly of the classes
    /// of the identity and of `expected` (which must itself fix the point).
    fn check_point_stabilizer(
        &self,
        digits: Vec<u64>,
        expected: Vec<Letter>,
        limits: &Limits,
    ) -> Result<(bool, String)> {
        let depth = digits.len();
        let x = BoundaryPrefix::new(&self.index, digits)?;
        let ball = self.action.ball(4, depth, limits)?;
        let stab = self.action.stabilizer_in_ball(&ball, &x)?;
        let mut expected_seen = false;
        let mut all_known = true;
        for &i in &stab {
            let w = ball.word(i);
            if self.action.words_equal_to_depth(w, &expected, depth, limits)? {
                expected_seen = true;
            } else if !self.action.words_equal_to_depth(w, &[], depth, limits)? {
                all_known = false;
            }
        }
        Ok((
            expected_seen && all_known,
            format!(
                "{} ball entries fix the point; expected class present: {expected_seen}, \
                 strangers: {}",
                stab.len(),
                !all_known
            ),
        ))
    }

    fn check_involutions(&self, limits: &Limits) -> Result<(bool, String)> {
        let mut all = true;
        for gen in 0..self.action.generator_count() {
            let g = Letter { gen, inverse: false };
            all &= self.action.words_equal_to_depth(&[g, g], &[], 10, limits)?;
        }
        Ok((all, "g g = e to depth 10 for every generator".into()))
    }

    fn check_klein_four(&self, limits: &Limits) -> Result<(bool, String)> {
        let letter = |gen| Letter { gen, inverse: false };
        let (b, c, d) = (letter(1), letter(2), letter(3));
        let bc = self.action.words_equal_to_depth(&[b, c], &[d], 10, limits)?;
        let cd = self.action.words_equal_to_depth(&[c, d], &[b], 10, limits)?;
        let bd = self.action.words_equal_to_depth(&[b, d], &[c], 10, limits)?;
        Ok((bc && cd && bd, format!("b c = d: {bc}, c d = b: {cd}, b d = c: {bd}")))
    }

    fn check_all_certified(&self, limits: &Limits) -> Result<(bool, String)> {
        let mut alphas = Vec::new();
        let mut all = true;
        for gen in 0..self.action.generator_count() {
            match certify_nondegenerate(self.action.generator(gen), limits)? {
                CertifyOutcome::Certified { certificate } => {
                    all &= certificate.alpha > BigRational::zero();
                    alphas.push(format!(
                        "{}: {}",
                        self.action.generator_names()[gen],
                        certificate.alpha
                    ));
                }
                CertifyOutcome::NotCertified { reason } => {
                    all = false;
                    alphas.push(format!("{}: not certified ({reason})", self.action.generator_names()[gen]));
                }
            }
        }
        Ok((all, alphas.join(", ")))
    }

    fn check_closures_small(&self, limits: &Limits) -> Result<(bool, String)> {
        let mut sizes = Vec::new();
        let mut all = true;
        for gen in 0..self.action.generator_count() {
            let closure = self.action.generator(gen).section_closure(16, 16, limits)?;
            all &= closure.bounded == Boundedness::Bounded && closure.len() <= 5;
            sizes.push(closure.len());
        }
        Ok((all, format!("section counts: {sizes:?}")))
    }

    fn check_jump_rule(&self) -> Result<(bool, String)> {
        let b = self.generator("b").expect("entry has b");
        let mut all = true;
        for l in 0..4 {
            let n = self.index.arity(l + 1)?;
            let mut lo = vec![0; l];
            lo.push(n - 2);
            let mut hi = vec![0; l];
            hi.push(n - 1);
            all &= b.apply(&lo)? == hi && b.apply(&hi)? == lo;
        }
        Ok((all, "b exchanges 0^l (n-2) and 0^l (n-1) for l = 0..4".into()))
    }

    fn check_fixed_products(&self, limits: &Limits) -> Result<(bool, String)> {
        let b = self.generator("b").expect("entry has b");
        let mut all = true;
        let mut shown = Vec::new();
        for level in 1..=4 {
            let measured = fixed_vertex_count(b, level, limits)?.fixed_fraction();
            let closed = top_pair_fixed_fraction(&self.index, level)?;
            all &= measured == closed;
            shown.push(measured.to_string());
        }
        Ok((all, format!("fixed fractions at levels 1..=4: {}", shown.join(", "))))
    }

    fn check_interval_bound(&self) -> Result<(bool, String)> {
        let tol = BigRational::new(BigInt::one(), BigInt::from(1_000_000u64));
        let mut all = true;
        let mut rows = Vec::new();
        for level in 0..=3 {
            let (lo, hi) = top_pair_fix_interval(&self.index, level, &tol)?;
            let n_next = self.index.arity(level + 1)?;
            let reference = BigRational::one() - ratio(4, n_next);
            all &= lo > reference && hi.clone() - lo.clone() < tol && hi <= BigRational::one();
            rows.push(format!("level {level}: lo > 1 - 4/{n_next}"));
        }
        Ok((all, rows.join("; ")))
    }

    fn check_ladder_ratios(&self, limits: &Limits) -> Result<(bool, String)> {
        let c = self.generator("c").expect("entry has c");
        let mut all = true;
        let mut shown = Vec::new();
        for l in 1..=3 {
            let w = ladder_graft_vertex(&self.index, l)?;
            let got = moved_ratio_below(c, &w, 4, limits)?;
            let expected = RatioBound::exact(ladder_graft_ratio(&self.index, l)?);
            all &= got == expected;
            shown.push(format!("l = {l}: {}", got.value));
        }
        Ok((all, shown.join(", ")))
    }

    fn check_graft_cylinders(&self, limits: &Limits) -> Result<(bool, String)> {
        let c = self.generator("c").expect("entry has c");
        let mut all = true;
        for l in 1..=3 {
            let mut digits = vec![0; l];
            digits.extend([1, 0]);
            let z = Vertex::new(&self.index, digits)?;
            let got = moved_ratio_below(c, &z, 2, limits)?;
            all &= got == RatioBound::exact(BigRational::one());
        }
        Ok((all, "moved fraction below 0^l 1 0 is exactly 1 for l = 1..=3".into()))
    }

    fn check_refuted(
        &self,
        max_level: usize,
        probe: usize,
        threshold: BigRational,
        limits: &Limits,
    ) -> Result<(bool, String)> {
        let c = self.generator("c").expect("entry has c");
        let report = degeneracy_scan(c, max_level, probe, &threshold, limits)?;
        match report.verdict {
            DegeneracyVerdict::Refutes { witness } => Ok((
                true,
                format!("witness {} with exact ratio {}", witness.vertex, witness.ratio),
            )),
            DegeneracyVerdict::NoVerdict => Ok((false, "no refutation found".into())),
        }
    }

    fn check_doubling_ratios(&self, limits: &Limits) -> Result<(bool, String)> {
        let c = self.generator("c").expect("entry has c");
        let d = self.index.constant_arity().expect("constant tree");
        let mut all = true;
        let mut shown = Vec::new();
        for k in 1..=3u32 {
            let w = doubling_graft_vertex(&self.index, k)?;
            let got = moved_ratio_below(c, &w, (1 << k) + 2, limits)?;
            let expected = RatioBound::exact(doubling_graft_ratio(d, k));
            all &= got == expected;
            shown.push(format!("k = {k}: {}", got.value));
        }
        Ok((all, shown.join(", ")))
    }
}

/// How two arity sequences relate under alternating divisibility of their
/// prefix products.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ChainCompatibility {
    /// A greedy interleaving was sustained across the whole horizon. Each
    /// pair `(i, j)` records prefix lengths with `n_1..n_i` dividing
    /// `n'_1..n'_j` (and the next pair extending the chain the other way).
    Compatible { interleaving: Vec<(usize, usize)> },
    /// Certified obstruction: `prime` divides a prefix product on one side
    /// and no prefix product of the other side, ever.
    Incompatible { prime: u64 },
    /// The greedy search stalled with room to spare and no certificate
    /// either way at this horizon.
    Undetermined { horizon: usize },
}

/// Alternating-divisibility check between two arity sequences, examining at
/// most `horizon` levels on each side. Incompatibility is only ever reported
/// with a certificate (a prime in one closed form's support and not the
/// other's); a sustained greedy interleaving is reported as compatible at
/// this horizon; everything else is undetermined.
pub fn chain_compatibility(
    a: &SphericalIndex,
    b: &SphericalIndex,
    horizon: usize,
) -> Result<ChainCompatibility> {
    let horizon = horizon.max(1);
    let sa = a.prime_support();
    let sb = b.prime_support();
    if let Some(&p) = sa
        .iter()
        .filter(|p| !sb.contains(p))
        .chain(sb.iter().filter(|p| !sa.contains(p)))
        .min()
    {
        return Ok(ChainCompatibility::Incompatible { prime: p });
    }
    let mut interleaving = Vec::new();
    let mut i = 1usize;
    let mut pa = BigUint::from(a.arity(1)?);
    let mut j = 0usize;
    let mut pb = BigUint::one();
    loop {
        // Smallest j' > j with the current left product dividing the right.
        let start = j;
        let mut found = false;
        while j < horizon {
            j += 1;
            pb *= BigUint::from(b.arity(j)?);
            if (&pb % &pa).is_zero() {
                found = true;
                break;
            }
        }
        if !found {
            return Ok(if start >= horizon {
                ChainCompatibility::Compatible { interleaving }
            } else {
                ChainCompatibility::Undetermined { horizon }
            });
        }
        interleaving.push((i, j));
        // Smallest i' > i with the right product dividing the left again.
        let start = i;
        let mut found = false;
        while i < horizon {
            i += 1;
            pa *= BigUint::from(a.arity(i)?);
            if (&pa % &pb).is_zero() {
                found = true;
                break;
            }
        }
        if !found {
            return Ok(if start >= horizon {
                ChainCompatibility::Compatible { interleaving }
            } else {
                ChainCompatibility::Undetermined { horizon }
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_entry_builds_and_its_facts_hold() {
        let limits = Limits::default();
        for name in catalog_names() {
            let entry = build_example(name, &ExampleParams::default()).unwrap();
            assert_eq!(&entry.name, name);
            assert!(!entry.facts.is_empty(), "{name} has no facts");
            for report in entry.check_all_facts(&limits).unwrap() {
                assert!(report.passed, "{name}/{}: {}", report.id, report.detail);
            }
        }
    }

    #[test]
    fn parameters_are_validated_per_entry() {
        // Arity flows into the constant-tree entries.
        let e = build_example("odometer", &ExampleParams { arity: Some(3), index: None }).unwrap();
        assert_eq!(e.index.constant_arity(), Some(3));
        let e = build_example("ex45_c", &ExampleParams { arity: Some(3), index: None }).unwrap();
        assert_eq!(e.index.constant_arity(), Some(3));
        // Entries reject parameters they cannot use.
        assert!(build_example("dihedral", &ExampleParams { arity: Some(2), index: None }).is_err());
        assert!(build_example(
            "odometer",
            &ExampleParams { arity: None, index: Some(SphericalIndex::constant(2).unwrap()) }
        )
        .is_err());
        // The top-pair entry insists on fast geometric growth.
        let slow = SphericalIndex::geometric(vec![3], 2).unwrap();
        assert!(build_example("thm61_b", &ExampleParams { arity: None, index: Some(slow) }).is_err());
        let flat = SphericalIndex::constant(4).unwrap();
        assert!(build_example("thm61_b", &ExampleParams { arity: None, index: Some(flat) }).is_err());
        // The ladder graft needs strictly increasing arities.
        let sagging = SphericalIndex::geometric(vec![5, 3], 3).unwrap();
        assert!(build_example("ex44_c", &ExampleParams { arity: None, index: Some(sagging) }).is_err());
        // Unknown names are structured errors.
        assert!(matches!(
            build_example("basilica", &ExampleParams::default()),
            Err(Error::UnknownExample(_))
        ));
        // Unknown fact ids too.
        let entry = build_example("odometer", &ExampleParams::default()).unwrap();
        assert!(matches!(
            entry.check_fact("nonsense", &Limits::default()),
            Err(Error::UnknownFact { .. })
        ));
    }

    #[test]
    fn definitions_round_trip_through_json() {
        let limits = Limits::default();
        for name in catalog_names() {
            let entry = build_example(name, &ExampleParams::default()).unwrap();
            for (gen_name, def) in &entry.definitions {
                let js = serde_json::to_string(def).unwrap();
                let back: ElementDef = serde_json::from_str(&js).unwrap();
                let original = entry.generator(gen_name).unwrap();
                let realized = back.realize(&entry.index).unwrap();
                assert!(
                    original.equal_to_depth(&realized, 8, &limits).unwrap(),
                    "{name}/{gen_name} changed across the JSON round trip"
                );
            }
        }
    }

    #[test]
    fn interval_encloses_the_infinite_product_tightly() {
        let idx = SphericalIndex::geometric(vec![3], 3).unwrap();
        let tol = BigRational::new(BigInt::one(), BigInt::from(1_000_000u64));
        // Compare against a much deeper partial product: the interval must
        // contain it, since partial products decrease toward the limit.
        for level in 0..=4 {
            let (lo, hi) = top_pair_fix_interval(&idx, level, &tol).unwrap();
            assert!(hi.clone() - lo.clone() < tol);
            let mut deep = BigRational::one();
            for j in (level + 1)..=(level + 30) {
                let n = idx.arity(j).unwrap();
                deep *= ratio(n - 2, n);
            }
            assert!(lo <= deep && deep <= hi, "level {level}");
            // And the jump bound from the two swapped digits of the next
            // level alone.
            let n_next = idx.arity(level + 1).unwrap();
            assert!(lo > BigRational::one() - ratio(4, n_next));
        }
    }

    #[test]
    fn chain_compatibility_matches_the_divisibility_oracle() {
        // Identical chains interleave one-for-one.
        let two = SphericalIndex::constant(2).unwrap();
        match chain_compatibility(&two, &two, 8).unwrap() {
            ChainCompatibility::Compatible { interleaving } => {
                assert!(interleaving.len() >= 3);
                assert_eq!(interleaving[0], (1, 1));
            }
            other => panic!("expected compatible, got {other:?}"),
        }
        // 2^(2k) interleaves 4^k.
        let four = SphericalIndex::constant(4).unwrap();
        assert!(matches!(
            chain_compatibility(&two, &four, 12).unwrap(),
            ChainCompatibility::Compatible { .. }
        ));
        assert!(matches!(
            chain_compatibility(&four, &two, 12).unwrap(),
            ChainCompatibility::Compatible { .. }
        ));
        // A prime on one side only is a certified obstruction: here 3.
        let primes = SphericalIndex::eventually_periodic(vec![2, 3, 5, 7], vec![7]).unwrap();
        assert_eq!(
            chain_compatibility(&primes, &two, 16).unwrap(),
            ChainCompatibility::Incompatible { prime: 3 }
        );
        assert_eq!(
            chain_compatibility(&two, &primes, 16).unwrap(),
            ChainCompatibility::Incompatible { prime: 3 }
        );
        // Same primes, misaligned powers: the greedy stalls with room left,
        // and that is all we may honestly say.
        let a = SphericalIndex::eventually_periodic(vec![2], vec![3]).unwrap();
        let b = SphericalIndex::eventually_periodic(vec![3], vec![2]).unwrap();
        assert_eq!(
            chain_compatibility(&a, &b, 10).unwrap(),
            ChainCompatibility::Undetermined { horizon: 10 }
        );
    }
}
