//! Tree automorphisms in three interchangeable representations.
//!
//! * [`Portrait`] — explicit truncation to a finite depth; works on any
//!   index; evaluation past the depth is an error.
//! * [`MealyMachine`] — finite-state recursion on a constant-arity tree;
//!   exact at every depth, with exact products, inverses and equality.
//! * [`RuleAut`] — built-in closed-form families that stay exact on trees
//!   with growing arities.
//!
//! [`TreeAutomorphism`] wraps one of the three together with the index it
//! acts on and provides the common operations: evaluation, composition (kept
//! exact when both factors are Mealy, lowered to a portrait of an explicit
//! working depth otherwise), inversion, sections, depth-capped equality and
//! section closures.

pub mod mealy;
pub mod portrait;
pub mod rule;

pub(crate) mod cursor;

use crate::error::{Error, Result};
use crate::index::SphericalIndex;
use crate::word::{BoundaryPrefix, Vertex};
use crate::Limits;
use cursor::{AtomBehavior, DpCache, Engine};
pub use mealy::{adding_machine, MealyKey, MealyMachine, MealyState};
pub use portrait::Portrait;
pub use rule::{InfiniteStatus, RuleAut, RuleKind, RuleState};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// The underlying representation of a [`TreeAutomorphism`].
#[derive(Clone, Debug)]
pub enum Representation {
    Portrait(Portrait),
    Mealy(MealyMachine),
    Rule(RuleAut),
}

/// A tree automorphism bound to the spherical index it acts on.
#[derive(Clone, Debug)]
pub struct TreeAutomorphism {
    index: SphericalIndex,
    repr: Representation,
}

impl TreeAutomorphism {
    /// The identity on the given tree.
    pub fn identity(index: &SphericalIndex) -> Self {
        match index.constant_arity() {
            Some(d) => TreeAutomorphism {
                index: index.clone(),
                repr: Representation::Mealy(
                    MealyMachine::identity(d).expect("valid constant arity"),
                ),
            },
            None => TreeAutomorphism {
                index: index.clone(),
                repr: Representation::Rule(RuleAut {
                    kind: RuleKind::Odometer,
                    state: RuleState::Id,
                    inverse: false,
                }),
            },
        }
    }

    pub fn from_portrait(p: Portrait) -> Self {
        TreeAutomorphism { index: p.index().clone(), repr: Representation::Portrait(p) }
    }

    /// A finite-state element; the index must be constant with arity equal
    /// to the machine's alphabet.
    pub fn from_mealy(index: &SphericalIndex, machine: MealyMachine) -> Result<Self> {
        match index.constant_arity() {
            Some(d) if d == machine.alphabet() => {
                Ok(TreeAutomorphism { index: index.clone(), repr: Representation::Mealy(machine) })
            }
            Some(d) => Err(Error::InvalidElement(format!(
                "machine alphabet {} does not match tree arity {d}",
                machine.alphabet()
            ))),
            None => Err(Error::NonConstantIndex(index.to_string())),
        }
    }

    pub fn from_rule(index: &SphericalIndex, rule: RuleAut) -> Self {
        TreeAutomorphism { index: index.clone(), repr: Representation::Rule(rule) }
    }

    pub fn index(&self) -> &SphericalIndex {
        &self.index
    }

    pub fn representation(&self) -> &Representation {
        &self.repr
    }

    /// Depth this element is defined to; `None` means every depth.
    pub fn depth_limit(&self) -> Option<usize> {
        match &self.repr {
            Representation::Portrait(p) => Some(p.depth()),
            _ => None,
        }
    }

    pub(crate) fn behavior(&self) -> AtomBehavior<'_> {
        match &self.repr {
            Representation::Portrait(p) => AtomBehavior::Portrait(p),
            Representation::Mealy(m) => AtomBehavior::Mealy(m),
            Representation::Rule(r) => AtomBehavior::Rule(*r),
        }
    }

    /// Single-element engine for the dynamic programs.
    pub(crate) fn engine(&self) -> Engine<'_> {
        Engine::new(&self.index, vec![self.behavior()])
    }

    /// Image of a digit string.
    pub fn apply(&self, digits: &[u64]) -> Result<Vec<u64>> {
        let engine = self.engine();
        let (out, _) = engine.apply(&engine.initial_cursors(), 0, digits)?;
        Ok(out)
    }

    /// Image of a vertex.
    pub fn apply_vertex(&self, v: &Vertex) -> Result<Vertex> {
        Vertex::new(&self.index, self.apply(v.digits())?)
    }

    /// Image of a boundary prefix (the image prefix of every point through it).
    pub fn apply_prefix(&self, x: &BoundaryPrefix) -> Result<BoundaryPrefix> {
        BoundaryPrefix::new(&self.index, self.apply(x.digits())?)
    }

    /// Whether the vertex is fixed.
    pub fn fixes(&self, v: &Vertex) -> Result<bool> {
        Ok(self.apply(v.digits())? == v.digits())
    }

    /// Composition `self ∘ other` (apply `other` first). Exact when both
    /// elements are finite-state; otherwise the result is a portrait
    /// truncated to `working_depth` (or shallower if a factor is).
    pub fn compose(&self, other: &Self, working_depth: usize, limits: &Limits) -> Result<Self> {
        if self.index != other.index {
            return Err(Error::IndexMismatch);
        }
        if let (Representation::Mealy(g), Representation::Mealy(h)) = (&self.repr, &other.repr) {
            let product = MealyMachine::product(g, h)?.minimized();
            return Ok(TreeAutomorphism {
                index: self.index.clone(),
                repr: Representation::Mealy(product),
            });
        }
        let mut depth = working_depth;
        for lim in [self.depth_limit(), other.depth_limit()].into_iter().flatten() {
            depth = depth.min(lim);
        }
        let engine =
            Engine::new(&self.index, vec![other.behavior(), self.behavior()]);
        let p = engine.materialize(&engine.initial_cursors(), 0, depth, limits.level_cap)?;
        Ok(TreeAutomorphism::from_portrait(p))
    }

    /// The inverse automorphism, in the same representation.
    pub fn invert(&self) -> Self {
        let repr = match &self.repr {
            Representation::Portrait(p) => Representation::Portrait(p.inverse()),
            Representation::Mealy(m) => Representation::Mealy(m.inverse()),
            Representation::Rule(r) => Representation::Rule(r.invert()),
        };
        TreeAutomorphism { index: self.index.clone(), repr }
    }

    /// The restriction to the subtree below `v`, as an element of the
    /// shifted index. Exact in every representation (portraits lose `v`'s
    /// worth of depth).
    pub fn section(&self, v: &Vertex) -> Result<Self> {
        match &self.repr {
            Representation::Portrait(p) => Ok(TreeAutomorphism::from_portrait(p.section(v)?)),
            Representation::Mealy(m) => {
                let mut state = m.initial();
                for &d in v.digits() {
                    if d >= m.alphabet() {
                        return Err(Error::DigitOutOfRange {
                            level: v.level(),
                            digit: d,
                            arity: m.alphabet(),
                        });
                    }
                    state = m.step(state, d).1;
                }
                Ok(TreeAutomorphism {
                    index: self.index.clone(),
                    repr: Representation::Mealy(m.with_initial(state)),
                })
            }
            Representation::Rule(r) => {
                let mut state = r.state;
                for (i, &d) in v.digits().iter().enumerate() {
                    let arity = self.index.arity(i + 1)?;
                    if d >= arity {
                        return Err(Error::DigitOutOfRange { level: i + 1, digit: d, arity });
                    }
                    state = r.step_from(state, d, arity).1;
                }
                Ok(TreeAutomorphism {
                    index: self.index.shift(v.level())?,
                    repr: Representation::Rule(RuleAut { state, ..*r }),
                })
            }
        }
    }

    /// Whether `self` and `other` agree on every digit string down to
    /// `depth`. Exact; checked by evaluating `self^{-1} ∘ other` against the
    /// identity with shared memoization.
    pub fn equal_to_depth(&self, other: &Self, depth: usize, limits: &Limits) -> Result<bool> {
        if self.index != other.index {
            return Err(Error::IndexMismatch);
        }
        let inv = self.invert();
        let engine = Engine::new(&self.index, vec![other.behavior(), inv.behavior()]);
        let mut cache = DpCache::default();
        engine.all_fixed(&engine.initial_cursors(), 0, depth, &mut cache, limits)
    }

    /// Whether this element fixes every vertex down to `depth`.
    pub fn is_identity_to_depth(&self, depth: usize, limits: &Limits) -> Result<bool> {
        let engine = self.engine();
        let mut cache = DpCache::default();
        engine.all_fixed(&engine.initial_cursors(), 0, depth, &mut cache, limits)
    }

    /// Exact infinite-depth classification of the whole action, where the
    /// representation supports one (portraits never do).
    pub fn status(&self) -> Result<Option<InfiniteStatus>> {
        let engine = self.engine();
        engine.status(&engine.initial_cursors(), 0)
    }

    /// Exact equality of actions, when decidable without a depth cap:
    /// both finite-state, or statuses that already settle it.
    pub fn exact_equal(&self, other: &Self) -> Option<bool> {
        if self.index != other.index {
            return Some(false);
        }
        if let (Representation::Mealy(a), Representation::Mealy(b)) = (&self.repr, &other.repr) {
            return Some(a.same_action(b));
        }
        if let (Ok(Some(sa)), Ok(Some(sb))) = (self.status(), other.status()) {
            use InfiniteStatus::*;
            match (sa, sb) {
                (Identity, Identity) => return Some(true),
                (Identity, _) | (_, Identity) => return Some(false),
                _ => {}
            }
        }
        None
    }

    /// Explicit portrait of the first `depth` levels of this element.
    pub fn truncate(&self, depth: usize, limits: &Limits) -> Result<Portrait> {
        let engine = self.engine();
        engine.materialize(&engine.initial_cursors(), 0, depth, limits.level_cap)
    }

    /// All distinct restrictions of this element (see [`SectionClosure`]).
    ///
    /// Exactness depends on the representation: finite-state elements have a
    /// provably complete closure; rules report completeness only when their
    /// state set is finite a priori; portraits enumerate their (finitely
    /// many) subtree truncations. When the closure cannot be proven complete
    /// within `depth_cap` levels or `max_sections` entries, the result is
    /// marked [`Boundedness::Exhausted`].
    pub fn section_closure(
        &self,
        max_sections: usize,
        depth_cap: usize,
        limits: &Limits,
    ) -> Result<SectionClosure> {
        match &self.repr {
            Representation::Mealy(m) => {
                // Distinct actions among reachable states, with a
                // representative vertex for each (breadth-first, so the
                // representative is a shallowest one).
                let mut seen: BTreeMap<MealyKey, Vertex> = BTreeMap::new();
                let mut queue =
                    std::collections::VecDeque::from([(m.initial(), Vertex::root())]);
                let mut visited = vec![false; m.states().len()];
                visited[m.initial()] = true;
                while let Some((s, v)) = queue.pop_front() {
                    let key = m.with_initial(s).canonical_key();
                    seen.entry(key).or_insert_with(|| v.clone());
                    for k in 0..m.alphabet() {
                        let t = m.step(s, k).1;
                        if !visited[t] {
                            visited[t] = true;
                            queue.push_back((t, v.child(&self.index, k)?));
                        }
                    }
                }
                let mut sections: Vec<(Vertex, TreeAutomorphism)> = seen
                    .into_iter()
                    .map(|(_, v)| {
                        let s = self.section(&v)?;
                        Ok((v, s))
                    })
                    .collect::<Result<_>>()?;
                sections.sort_by(|a, b| (a.0.level(), &a.0).cmp(&(b.0.level(), &b.0)));
                Ok(SectionClosure { sections, bounded: Boundedness::Bounded })
            }
            Representation::Rule(r) => {
                if let Some(states) = r.reachable_states() {
                    // Small closed state set: find a representative vertex
                    // for each state by breadth-first search.
                    let mut sections = Vec::new();
                    let mut remaining: Vec<RuleState> = states;
                    let mut queue =
                        std::collections::VecDeque::from([(r.state, Vertex::root())]);
                    let mut seen_states = std::collections::BTreeSet::new();
                    while let Some((s, v)) = queue.pop_front() {
                        if seen_states.insert(s) {
                            remaining.retain(|x| *x != s);
                            sections.push((v.clone(), self.section(&v)?));
                        }
                        if remaining.is_empty() {
                            break;
                        }
                        let arity = self.index.arity(v.level() + 1)?;
                        for k in 0..arity {
                            let t = r.step_from(s, k, arity).1;
                            if !seen_states.contains(&t) {
                                queue.push_back((t, v.child(&self.index, k)?));
                            }
                        }
                    }
                    Ok(SectionClosure { sections, bounded: Boundedness::Bounded })
                } else {
                    // Unbounded state family: enumerate what fits, honestly.
                    let mut sections = Vec::new();
                    let mut seen = std::collections::BTreeSet::new();
                    let mut frontier = vec![(r.state, Vertex::root())];
                    let mut bounded = Boundedness::Exhausted;
                    'outer: for level in 0..=depth_cap {
                        let mut next = Vec::new();
                        for (s, v) in frontier {
                            if seen.insert(s) {
                                sections.push((v.clone(), self.section(&v)?));
                                if sections.len() > max_sections {
                                    break 'outer;
                                }
                            }
                            if level < depth_cap {
                                let arity = self.index.arity(level + 1)?;
                                if arity as usize * next.len() > limits.search_cap as usize {
                                    break 'outer;
                                }
                                for k in 0..arity {
                                    let t = r.step_from(s, k, arity).1;
                                    if !seen.contains(&t) {
                                        next.push((t, v.child(&self.index, k)?));
                                    }
                                }
                            }
                        }
                        if next.is_empty() {
                            bounded = Boundedness::Bounded;
                            break;
                        }
                        frontier = next;
                    }
                    Ok(SectionClosure { sections, bounded })
                }
            }
            Representation::Portrait(p) => {
                // Finitely many subtrees; group them structurally.
                let mut sections: Vec<(Vertex, TreeAutomorphism)> = Vec::new();
                let mut stack = vec![Vertex::root()];
                while let Some(v) = stack.pop() {
                    let sec = p.section(&v)?;
                    let dup = sections.iter().any(|(w, s)| {
                        matches!(&s.repr, Representation::Portrait(q)
                            if *q == sec && w.level() == v.level())
                    });
                    if !dup {
                        sections.push((v.clone(), TreeAutomorphism::from_portrait(sec)));
                        if sections.len() > max_sections {
                            return Ok(SectionClosure {
                                sections,
                                bounded: Boundedness::Exhausted,
                            });
                        }
                    }
                    if v.level() < p.depth() {
                        let arity = self.index.arity(v.level() + 1)?;
                        for k in (0..arity).rev() {
                            stack.push(v.child(&self.index, k)?);
                        }
                    }
                }
                sections.sort_by(|a, b| (a.0.level(), &a.0).cmp(&(b.0.level(), &b.0)));
                Ok(SectionClosure { sections, bounded: Boundedness::Bounded })
            }
        }
    }
}

/// Whether a section closure is provably complete.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundedness {
    /// Every distinct restriction of the element appears in the list.
    Bounded,
    /// Enumeration hit a cap; more distinct restrictions may exist.
    Exhausted,
}

/// The distinct restrictions of an element, each with a representative
/// vertex where it occurs.
#[derive(Debug)]
pub struct SectionClosure {
    pub sections: Vec<(Vertex, TreeAutomorphism)>,
    pub bounded: Boundedness,
}

impl SectionClosure {
    pub fn len(&self) -> usize {
        self.sections.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sections.is_empty()
    }
}

/// Portable JSON definition of an element (finite-state machines and rules;
/// portraits are data, not definitions, and are exported as reports instead).
///
/// Mealy example — the binary adding machine:
/// ```json
/// {"kind": "mealy", "alphabet": 2,
///  "states": {"a": {"perm": [1,0], "to": ["id","a"]}},
///  "initial": "a"}
/// ```
/// The state name `id` is reserved: referring to it without defining it
/// yields the identity state.
///
/// Rule example: `{"kind": "rule", "rule": "doubling_graft", "inverse": false}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ElementDef {
    Mealy { alphabet: u64, states: BTreeMap<String, MealyStateDef>, initial: String },
    Rule {
        rule: RuleKind,
        #[serde(default, skip_serializing_if = "std::ops::Not::not")]
        inverse: bool,
    },
}

/// One named state in a Mealy [`ElementDef`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MealyStateDef {
    pub perm: Vec<u64>,
    pub to: Vec<String>,
}

impl ElementDef {
    /// Instantiate on a tree. Mealy definitions need a constant index whose
    /// arity matches the alphabet; rules work everywhere.
    pub fn realize(&self, index: &SphericalIndex) -> Result<TreeAutomorphism> {
        match self {
            ElementDef::Rule { rule, inverse } => {
                let mut r = RuleAut::standard(*rule);
                if *inverse {
                    r = r.invert();
                }
                Ok(TreeAutomorphism::from_rule(index, r))
            }
            ElementDef::Mealy { alphabet, states, initial } => {
                if states.contains_key("id") {
                    return Err(Error::InvalidElement(
                        "the state name 'id' is reserved for the implicit identity".into(),
                    ));
                }
                let mut names: Vec<&String> = states.keys().collect();
                names.sort();
                let mut ids: BTreeMap<&str, usize> =
                    names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
                // The implicit identity state, if referenced.
                let uses_id = states.values().any(|s| s.to.iter().any(|t| t == "id"))
                    || initial == "id";
                let id_slot = if uses_id {
                    ids.insert("id", names.len());
                    Some(names.len())
                } else {
                    None
                };
                let mut machine_states = Vec::new();
                for name in &names {
                    let def = &states[*name];
                    let next = def
                        .to
                        .iter()
                        .map(|t| {
                            ids.get(t.as_str()).copied().ok_or_else(|| {
                                Error::InvalidElement(format!("unknown state '{t}'"))
                            })
                        })
                        .collect::<Result<Vec<usize>>>()?;
                    machine_states.push(MealyState {
                        name: (*name).clone(),
                        perm: def.perm.clone(),
                        next,
                    });
                }
                if let Some(slot) = id_slot {
                    machine_states.push(MealyState {
                        name: "id".into(),
                        perm: (0..*alphabet).collect(),
                        next: vec![slot; *alphabet as usize],
                    });
                }
                let init = *ids
                    .get(initial.as_str())
                    .ok_or_else(|| Error::InvalidElement(format!("unknown initial '{initial}'")))?;
                let machine = MealyMachine::new(*alphabet, machine_states, init)?;
                TreeAutomorphism::from_mealy(index, machine)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::ratio;
    use num::BigRational;

    fn d2() -> SphericalIndex {
        SphericalIndex::constant(2).unwrap()
    }

    fn odometer2() -> TreeAutomorphism {
        TreeAutomorphism::from_mealy(&d2(), adding_machine(2).unwrap()).unwrap()
    }

    #[test]
    fn apply_and_sections_cooperate() {
        let idx = SphericalIndex::geometric(vec![3], 3).unwrap();
        let c = TreeAutomorphism::from_rule(&idx, RuleAut::standard(RuleKind::LadderGraft));
        let v = Vertex::new(&idx, vec![0, 1, 0]).unwrap();
        let sec = c.section(&v).unwrap();
        assert_eq!(*sec.index(), idx.shift(3).unwrap());
        // Below z = (0,1,0) the section is a live odometer.
        assert_eq!(sec.apply(&[5, 0]).unwrap(), vec![6, 0]);
        assert_eq!(sec.status().unwrap(), Some(InfiniteStatus::FullyMoved));
    }

    #[test]
    fn composition_is_exact_for_machines_and_truncated_otherwise() {
        let limits = Limits::default();
        let a = odometer2();
        let a2 = a.compose(&a, 100, &limits).unwrap();
        assert!(a2.depth_limit().is_none(), "machine composition stays exact");
        assert_eq!(a2.apply(&[0, 0, 0, 0]).unwrap(), vec![0, 1, 0, 0]);

        let idx = d2();
        let c = TreeAutomorphism::from_rule(&idx, RuleAut::standard(RuleKind::DoublingGraft));
        let ca = c.compose(&a, 6, &limits).unwrap();
        assert_eq!(ca.depth_limit(), Some(6));
        for w in [vec![0u64, 0, 0, 0, 0, 0], vec![1, 1, 0, 1, 0, 1], vec![0, 1, 0, 0, 1, 0]] {
            assert_eq!(ca.apply(&w).unwrap(), c.apply(&a.apply(&w).unwrap()).unwrap());
        }
        assert!(ca.apply(&[0, 0, 0, 0, 0, 0, 0]).is_err(), "beyond working depth");
    }

    #[test]
    fn equality_to_depth_and_exact_equality() {
        let limits = Limits::default();
        let a = odometer2();
        let id = TreeAutomorphism::identity(&d2());
        // a^2 equals a∘a at any depth; a is not the identity.
        let a2 = a.compose(&a, 64, &limits).unwrap();
        let a2b = a.compose(&a, 64, &limits).unwrap();
        assert!(a2.equal_to_depth(&a2b, 32, &limits).unwrap());
        assert_eq!(a2.exact_equal(&a2b), Some(true));
        assert_eq!(a.exact_equal(&id), Some(false));
        assert!(!a.equal_to_depth(&id, 1, &limits).unwrap());
        // a and a∘id agree exactly.
        let a_id = a.compose(&id, 64, &limits).unwrap();
        assert_eq!(a.exact_equal(&a_id), Some(true));
        // Inverse composes to the identity.
        let e = a.compose(&a.invert(), 64, &limits).unwrap();
        assert_eq!(e.exact_equal(&id), Some(true));
    }

    #[test]
    fn truncation_measures_fixed_mass() {
        // The doubling graft fixes the graft vertex z = (0,1,0,0) itself but
        // moves both of its children: at depth 5 exactly 30 of 32 words are
        // fixed (and at depth 4, all 16 are).
        let limits = Limits::default();
        let idx = d2();
        let c = TreeAutomorphism::from_rule(&idx, RuleAut::standard(RuleKind::DoublingGraft));
        let p = c.truncate(5, &limits).unwrap();
        let mut fixed = 0;
        for w in 0..32u64 {
            let digits: Vec<u64> = (0..5).map(|i| (w >> i) & 1).collect();
            if p.apply(&digits).unwrap() == digits {
                fixed += 1;
            }
        }
        assert_eq!(BigRational::from_integer(fixed.into()), ratio(30, 1));
    }

    #[test]
    fn section_closures_report_their_completeness() {
        let limits = Limits::default();
        // Adding machine: two distinct sections (itself and the identity).
        let a = odometer2();
        let cl = a.section_closure(100, 32, &limits).unwrap();
        assert_eq!(cl.bounded, Boundedness::Bounded);
        assert_eq!(cl.len(), 2);
        // Doubling graft: the spine states keep producing new sections.
        let idx = d2();
        let c = TreeAutomorphism::from_rule(&idx, RuleAut::standard(RuleKind::DoublingGraft));
        let cl = c.section_closure(10, 12, &limits).unwrap();
        assert_eq!(cl.bounded, Boundedness::Exhausted);
        assert!(cl.len() > 10);
        // Portrait closures are finite and complete.
        let p = c.truncate(4, &limits).unwrap();
        let cl = TreeAutomorphism::from_portrait(p).section_closure(1000, 10, &limits).unwrap();
        assert_eq!(cl.bounded, Boundedness::Bounded);
    }

    #[test]
    fn element_defs_realize_and_round_trip() {
        let json = r#"{"kind":"mealy","alphabet":2,
                       "states":{"a":{"perm":[1,0],"to":["id","a"]}},
                       "initial":"a"}"#;
        let def: ElementDef = serde_json::from_str(json).unwrap();
        let a = def.realize(&d2()).unwrap();
        assert_eq!(a.apply(&[1, 1, 0]).unwrap(), vec![0, 0, 1]);
        let back = serde_json::to_string(&def).unwrap();
        let def2: ElementDef = serde_json::from_str(&back).unwrap();
        assert_eq!(def, def2);

        let rule_json = r#"{"kind":"rule","rule":"top_pair_swap"}"#;
        let def: ElementDef = serde_json::from_str(rule_json).unwrap();
        let idx = SphericalIndex::geometric(vec![3], 3).unwrap();
        let b = def.realize(&idx).unwrap();
        assert_eq!(b.apply(&[2, 5]).unwrap(), vec![1, 5]);

        // Reserved name is rejected.
        let bad = r#"{"kind":"mealy","alphabet":2,
                      "states":{"id":{"perm":[0,1],"to":["id","id"]}},
                      "initial":"id"}"#;
        let def: ElementDef = serde_json::from_str(bad).unwrap();
        assert!(def.realize(&d2()).is_err());
    }

    #[test]
    fn identity_on_growing_trees() {
        let idx = SphericalIndex::geometric(vec![3], 3).unwrap();
        let id = TreeAutomorphism::identity(&idx);
        assert_eq!(id.apply(&[2, 8, 26]).unwrap(), vec![2, 8, 26]);
        assert_eq!(id.status().unwrap(), Some(InfiniteStatus::Identity));
    }
}
