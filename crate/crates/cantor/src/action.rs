//! Finitely generated groups acting on the tree: words, balls, orbits,
//! stabilizer membership.
//!
//! A [`GroupWord`] is a sequence of letters composed right to left, so the
//! word `a b` sends `x` to `a(b(x))`. Balls are enumerated in shortlex order
//! over the letter alphabet `g_0, g_0^{-1}, g_1, g_1^{-1}, ...` and
//! deduplicated by what the elements *do*: exactly (canonical machine keys)
//! when every generator is finite-state, otherwise by structural signatures
//! at an explicit depth that are always confirmed by exact depth-capped
//! comparison before two words are declared equal.

use crate::aut::cursor::{AtomBehavior, DpCache, Engine};
use crate::aut::{MealyKey, MealyMachine, Representation, TreeAutomorphism};
use crate::error::{Error, Result};
use crate::index::SphericalIndex;
use crate::word::{BoundaryPrefix, Vertex};
use crate::Limits;
use std::collections::{BTreeSet, HashMap, VecDeque};

/// One letter of a group word: a generator or its inverse.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub gen: usize,
    pub inverse: bool,
}

/// A word in the generators, applied right to left.
pub type GroupWord = Vec<Letter>;

/// A group given by named generators acting on one tree.
#[derive(Clone, Debug)]
pub struct GeneratedAction {
    index: SphericalIndex,
    names: Vec<String>,
    gens: Vec<TreeAutomorphism>,
    invs: Vec<TreeAutomorphism>,
}

impl GeneratedAction {
    pub fn new(index: &SphericalIndex, generators: Vec<(String, TreeAutomorphism)>) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::InvalidElement("an action needs at least one generator".into()));
        }
        let mut names = Vec::new();
        let mut gens = Vec::new();
        for (name, g) in generators {
            if g.index() != index {
                return Err(Error::IndexMismatch);
            }
            if name.is_empty() || names.contains(&name) {
                return Err(Error::GeneratorMismatch(format!("bad or duplicate name '{name}'")));
            }
            names.push(name);
            gens.push(g);
        }
        let invs = gens.iter().map(|g| g.invert()).collect();
        Ok(GeneratedAction { index: index.clone(), names, gens, invs })
    }

    pub fn index(&self) -> &SphericalIndex {
        &self.index
    }

    pub fn generator_count(&self) -> usize {
        self.gens.len()
    }

    pub fn generator_names(&self) -> &[String] {
        &self.names
    }

    pub fn generator(&self, i: usize) -> &TreeAutomorphism {
        &self.gens[i]
    }

    pub fn generator_inverse(&self, i: usize) -> &TreeAutomorphism {
        &self.invs[i]
    }

    pub fn generator_index(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::GeneratorMismatch(format!("no generator named '{name}'")))
    }

    /// The letter alphabet in ball order: `g_0, g_0^{-1}, g_1, g_1^{-1}, ...`.
    pub fn letters(&self) -> Vec<Letter> {
        (0..self.gens.len())
            .flat_map(|gen| [Letter { gen, inverse: false }, Letter { gen, inverse: true }])
            .collect()
    }

    fn letter_element(&self, l: Letter) -> &TreeAutomorphism {
        if l.inverse {
            &self.invs[l.gen]
        } else {
            &self.gens[l.gen]
        }
    }

    /// Evaluation engine for a word (empty word = identity engine).
    pub(crate) fn engine_for_word(&self, word: &[Letter]) -> Engine<'_> {
        // Rightmost letter is applied first.
        let atoms: Vec<AtomBehavior<'_>> =
            word.iter().rev().map(|&l| self.letter_element(l).behavior()).collect();
        Engine::new(&self.index, atoms)
    }

    /// Engine computing `w2^{-1} ∘ w1`; the identity below a vertex iff the
    /// two words agree below it.
    pub(crate) fn engine_for_difference(&self, w1: &[Letter], w2: &[Letter]) -> Engine<'_> {
        let mut atoms: Vec<AtomBehavior<'_>> =
            w1.iter().rev().map(|&l| self.letter_element(l).behavior()).collect();
        atoms.extend(
            w2.iter()
                .map(|&l| self.letter_element(Letter { gen: l.gen, inverse: !l.inverse }).behavior()),
        );
        Engine::new(&self.index, atoms)
    }

    /// Image of a digit string under a word.
    pub fn apply_word(&self, word: &[Letter], digits: &[u64]) -> Result<Vec<u64>> {
        let engine = self.engine_for_word(word);
        let (out, _) = engine.apply(&engine.initial_cursors(), 0, digits)?;
        Ok(out)
    }

    pub fn apply_word_to_prefix(&self, word: &[Letter], x: &BoundaryPrefix) -> Result<BoundaryPrefix> {
        BoundaryPrefix::new(&self.index, self.apply_word(word, x.digits())?)
    }

    pub fn apply_word_to_vertex(&self, word: &[Letter], v: &Vertex) -> Result<Vertex> {
        Vertex::new(&self.index, self.apply_word(word, v.digits())?)
    }

    /// Exact: do two words act identically on every vertex down to `depth`?
    pub fn words_equal_to_depth(
        &self,
        w1: &[Letter],
        w2: &[Letter],
        depth: usize,
        limits: &Limits,
    ) -> Result<bool> {
        let engine = self.engine_for_difference(w1, w2);
        let mut cache = DpCache::default();
        engine.all_fixed(&engine.initial_cursors(), 0, depth, &mut cache, limits)
    }

    /// The word as a single element: an exact machine product when every
    /// letter is finite-state, otherwise a portrait truncated to
    /// `working_depth`.
    pub fn element_of_word(
        &self,
        word: &[Letter],
        working_depth: usize,
        limits: &Limits,
    ) -> Result<TreeAutomorphism> {
        if let Some(machines) = self.all_mealy() {
            let mut acc = MealyMachine::identity(machines.0)?;
            for &l in word.iter().rev() {
                let m = self.letter_machine(&machines.1, l);
                acc = MealyMachine::product(&m, &acc)?.minimized();
            }
            return TreeAutomorphism::from_mealy(&self.index, acc);
        }
        let engine = self.engine_for_word(word);
        let p = engine.materialize(&engine.initial_cursors(), 0, working_depth, limits.level_cap)?;
        Ok(TreeAutomorphism::from_portrait(p))
    }

    fn all_mealy(&self) -> Option<(u64, Vec<&MealyMachine>)> {
        let mut machines = Vec::new();
        for g in &self.gens {
            match g.representation() {
                Representation::Mealy(m) => machines.push(m),
                _ => return None,
            }
        }
        Some((machines[0].alphabet(), machines))
    }

    fn letter_machine(&self, machines: &[&MealyMachine], l: Letter) -> MealyMachine {
        if l.inverse {
            machines[l.gen].inverse()
        } else {
            (*machines[l.gen]).clone()
        }
    }

    /// Render a word using generator names (`e` for the empty word).
    pub fn word_to_string(&self, word: &[Letter]) -> String {
        if word.is_empty() {
            return "e".into();
        }
        word.iter()
            .map(|l| {
                let name = &self.names[l.gen];
                if l.inverse {
                    format!("{name}^-1")
                } else {
                    name.clone()
                }
            })
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Parse a word: whitespace- or comma-separated letters, each a
    /// generator name optionally suffixed `^-1` or `'` (`e` = identity).
    pub fn word_from_str(&self, s: &str) -> Result<GroupWord> {
        let s = s.trim();
        if s.is_empty() || s == "e" {
            return Ok(vec![]);
        }
        s.split(|c: char| c.is_whitespace() || c == ',' || c == '*' || c == '.')
            .filter(|p| !p.is_empty())
            .map(|part| {
                let (name, inverse) = if let Some(n) = part.strip_suffix("^-1") {
                    (n, true)
                } else if let Some(n) = part.strip_suffix('\'') {
                    (n, true)
                } else {
                    (part, false)
                };
                Ok(Letter { gen: self.generator_index(name)?, inverse })
            })
            .collect()
    }

    /// Ball of reduced words up to `radius`, grouped into classes of equal
    /// action (see [`WordBall`] for the dedup guarantee). Entry 0 is the
    /// identity.
    pub fn ball(&self, radius: usize, dedup_depth: usize, limits: &Limits) -> Result<WordBall> {
        let exact = self.all_mealy().is_some();
        let mut ball = WordBall {
            radius,
            dedup_depth,
            exact,
            entries: vec![vec![]],
            by_key: HashMap::new(),
            machines: Vec::new(),
        };
        // Key the identity.
        if exact {
            let id = MealyMachine::identity(self.index.constant_arity().expect("mealy"))?;
            ball.by_key.insert(BallKey::Exact(id.canonical_key()), 0);
            ball.machines.push(id);
        } else {
            ball.by_key.insert(BallKey::Sig(self.word_signature(&[], dedup_depth, limits)?), 0);
        }
        let letters = self.letters();
        let mut frontier: Vec<usize> = vec![0];
        for _len in 1..=radius {
            let mut next = Vec::new();
            for &ei in &frontier {
                let parent = ball.entries[ei].clone();
                for &l in &letters {
                    // Reduced words only: drop immediate cancellations.
                    if let Some(last) = parent.last() {
                        if last.gen == l.gen && last.inverse != l.inverse {
                            continue;
                        }
                    }
                    let mut word = parent.clone();
                    word.push(l);
                    let is_new = if exact {
                        let m = self.exact_machine(&ball, ei, l)?;
                        let key = BallKey::Exact(m.canonical_key());
                        if ball.by_key.contains_key(&key) {
                            false
                        } else {
                            ball.by_key.insert(key, ball.entries.len());
                            ball.machines.push(m);
                            true
                        }
                    } else {
                        self.dedup_by_signature(&mut ball, &word, limits)?
                    };
                    if is_new {
                        if ball.entries.len() as u64 >= limits.search_cap {
                            return Err(Error::SearchCapExceeded {
                                during: "word ball enumeration",
                                cap: limits.search_cap,
                            });
                        }
                        next.push(ball.entries.len());
                        ball.entries.push(word);
                    }
                }
            }
            frontier = next;
        }
        Ok(ball)
    }

    /// Signature of a word's action to `depth`. Each word gets a fresh cache:
    /// cursor memo keys are only meaningful within one atom sequence.
    fn word_signature(&self, word: &[Letter], depth: usize, limits: &Limits) -> Result<u128> {
        let engine = self.engine_for_word(word);
        let mut cache = DpCache::default();
        engine.subtree_sig(&engine.initial_cursors(), 0, depth, &mut cache, limits)
    }

    fn exact_machine(&self, ball: &WordBall, parent: usize, l: Letter) -> Result<MealyMachine> {
        let (_, machines) = self.all_mealy().expect("exact mode");
        let letter = self.letter_machine(&machines, l);
        // word' = parent ∘ l: the letter acts first.
        Ok(MealyMachine::product(&ball.machines[parent], &letter)?.minimized())
    }

    fn dedup_by_signature(
        &self,
        ball: &mut WordBall,
        word: &GroupWord,
        limits: &Limits,
    ) -> Result<bool> {
        let sig = self.word_signature(word, ball.dedup_depth, limits)?;
        // Signatures can in principle collide, so a hit is always confirmed
        // with the exact depth-capped comparison before merging. Words with
        // equal depth-capped actions always have equal signatures, so a
        // confirmed mismatch means a true hash collision: fall back to an
        // exact scan of the whole ball and, if genuinely new, store the entry
        // unkeyed — later duplicates of it still land in this scan path.
        let key = BallKey::Sig(sig);
        if let Some(&existing) = ball.by_key.get(&key) {
            if self.words_equal_to_depth(word, &ball.entries[existing], ball.dedup_depth, limits)? {
                return Ok(false);
            }
            for other in ball.entries.iter() {
                if self.words_equal_to_depth(word, other, ball.dedup_depth, limits)? {
                    return Ok(false);
                }
            }
            return Ok(true);
        }
        ball.by_key.insert(key, ball.entries.len());
        Ok(true)
    }

    /// Orbit of a vertex under the group (generators and inverses), sorted.
    pub fn orbit_of_vertex(&self, v: &Vertex, limits: &Limits) -> Result<Vec<Vertex>> {
        let mut seen = BTreeSet::new();
        seen.insert(v.clone());
        let mut queue = VecDeque::from([v.clone()]);
        while let Some(u) = queue.pop_front() {
            for g in self.gens.iter().chain(self.invs.iter()) {
                let img = g.apply_vertex(&u)?;
                if !seen.contains(&img) {
                    if seen.len() as u64 >= limits.search_cap {
                        return Err(Error::SearchCapExceeded {
                            during: "orbit enumeration",
                            cap: limits.search_cap,
                        });
                    }
                    seen.insert(img.clone());
                    queue.push_back(img);
                }
            }
        }
        Ok(seen.into_iter().collect())
    }

    /// Whether the action is transitive on the whole level.
    pub fn is_level_transitive(&self, level: usize, limits: &Limits) -> Result<bool> {
        let size = self.index.level_size_capped(level, limits.level_cap)?;
        let base = Vertex::new(&self.index, vec![0; level])?;
        let orbit = self.orbit_of_vertex(&base, limits)?;
        Ok(orbit.len() as u64 == size)
    }

    /// Indices of ball entries whose action fixes the prefix digit-for-digit.
    pub fn stabilizer_in_ball(&self, ball: &WordBall, x: &BoundaryPrefix) -> Result<Vec<usize>> {
        let mut out = Vec::new();
        for (i, word) in ball.entries.iter().enumerate() {
            if self.apply_word(word, x.digits())? == x.digits() {
                out.push(i);
            }
        }
        Ok(out)
    }
}

#[derive(PartialEq, Eq, Hash)]
enum BallKey {
    Exact(MealyKey),
    Sig(u128),
}

/// Classes of equal elements among reduced words of bounded length.
///
/// `exact` says how classes were separated: `true` means canonical
/// finite-state keys (equality of the *infinite* action); `false` means
/// equality was decided at `dedup_depth` — elements that differ only deeper
/// are merged, which is the correct notion for stabilizer computations at a
/// stated depth.
pub struct WordBall {
    pub radius: usize,
    pub dedup_depth: usize,
    pub exact: bool,
    entries: Vec<GroupWord>,
    by_key: HashMap<BallKey, usize>,
    machines: Vec<MealyMachine>,
}

impl WordBall {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Shortlex-first representative word of class `i` (0 is the identity).
    pub fn word(&self, i: usize) -> &GroupWord {
        &self.entries[i]
    }

    pub fn words(&self) -> impl Iterator<Item = &GroupWord> {
        self.entries.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aut::{adding_machine, MealyState, RuleAut, RuleKind};

    fn d2() -> SphericalIndex {
        SphericalIndex::constant(2).unwrap()
    }

    fn negation_machine() -> MealyMachine {
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

    fn dihedral() -> GeneratedAction {
        let idx = d2();
        let a = TreeAutomorphism::from_mealy(&idx, adding_machine(2).unwrap()).unwrap();
        let b = TreeAutomorphism::from_mealy(&idx, negation_machine()).unwrap();
        GeneratedAction::new(&idx, vec![("a".into(), a), ("b".into(), b)]).unwrap()
    }

    fn mixed() -> GeneratedAction {
        let idx = d2();
        let a = TreeAutomorphism::from_mealy(&idx, adding_machine(2).unwrap()).unwrap();
        let c = TreeAutomorphism::from_rule(&idx, RuleAut::standard(RuleKind::DoublingGraft));
        GeneratedAction::new(&idx, vec![("a".into(), a), ("c".into(), c)]).unwrap()
    }

    #[test]
    fn words_compose_right_to_left() {
        let act = dihedral();
        let w = act.word_from_str("a b").unwrap();
        // (a∘b)(x) = a(b(x)): on x = (1,0,0): b gives (1,1,1), a gives (0,0,0)...
        // b(100) = -(1) = flip after first 1: (1,1,1); then +1: (0,0,0,) wait
        // little-endian: (1,1,1)+1 = (0,0,0) with carry out. Confirmed below.
        assert_eq!(act.apply_word(&w, &[1, 0, 0]).unwrap(), vec![0, 0, 0]);
        assert_eq!(act.word_to_string(&w), "a b");
        let empty = act.word_from_str("e").unwrap();
        assert_eq!(act.apply_word(&empty, &[1, 0]).unwrap(), vec![1, 0]);
        // Parse suffix forms.
        assert_eq!(
            act.word_from_str("a^-1 b'").unwrap(),
            vec![Letter { gen: 0, inverse: true }, Letter { gen: 1, inverse: true }]
        );
    }

    #[test]
    fn dihedral_ball_has_the_expected_classes() {
        let act = dihedral();
        let limits = Limits::default();
        let ball = act.ball(2, 16, &limits).unwrap();
        assert!(ball.exact);
        // e, a, a^-1, a^2, a^-2, b, ab, a^-1 b  (ba = a^-1 b, b a^-1 = ab,
        // b b = e, ...): eight classes.
        assert_eq!(ball.len(), 8);
        let words: Vec<String> = ball.words().map(|w| act.word_to_string(w)).collect();
        assert_eq!(words[0], "e");
        assert!(words.contains(&"a b".to_string()));
        // Radius 1: e, a, a^-1, b (b = b^-1 merged exactly).
        let ball1 = act.ball(1, 16, &limits).unwrap();
        assert_eq!(ball1.len(), 4);
    }

    #[test]
    fn mixed_ball_dedup_depends_on_the_stated_depth() {
        let act = mixed();
        let limits = Limits::default();
        // c moves nothing above level 5, so at dedup depth 4 it merges with
        // the identity. At depth 5 it separates from e but still agrees with
        // c^-1 (+1 and -1 coincide on a single binary digit); the inverse
        // pair only splits at depth 6, where the carry shows.
        let shallow = act.ball(1, 4, &limits).unwrap();
        assert!(!shallow.exact);
        assert_eq!(shallow.len(), 3); // e=c=c^-1, a, a^-1
        assert_eq!(act.ball(1, 5, &limits).unwrap().len(), 4);
        assert_eq!(act.ball(1, 6, &limits).unwrap().len(), 5);
        let c = act.word_from_str("c").unwrap();
        let c_inv = act.word_from_str("c^-1").unwrap();
        assert!(act.words_equal_to_depth(&c, &c_inv, 5, &limits).unwrap());
        assert!(!act.words_equal_to_depth(&c, &c_inv, 6, &limits).unwrap());
    }

    #[test]
    fn orbits_and_transitivity() {
        let act = dihedral();
        let limits = Limits::default();
        let v = Vertex::new(&d2(), vec![0, 0, 0]).unwrap();
        let orbit = act.orbit_of_vertex(&v, &limits).unwrap();
        assert_eq!(orbit.len(), 8, "the adding machine alone is level transitive");
        assert!(act.is_level_transitive(3, &limits).unwrap());
        assert!(act.is_level_transitive(6, &limits).unwrap());
    }

    #[test]
    fn stabilizers_in_balls_pick_out_fixing_words() {
        let act = dihedral();
        let limits = Limits::default();
        let ball = act.ball(2, 16, &limits).unwrap();
        let x = BoundaryPrefix::new(&d2(), vec![0; 16]).unwrap();
        let stab = act.stabilizer_in_ball(&ball, &x).unwrap();
        let words: Vec<String> =
            stab.iter().map(|&i| act.word_to_string(ball.word(i))).collect();
        // Only e and b fix the zero ray to depth 16 within radius 2.
        assert_eq!(words, vec!["e", "b"]);
    }

    #[test]
    fn element_of_word_is_exact_for_machines() {
        let act = dihedral();
        let limits = Limits::default();
        let w = act.word_from_str("b a b").unwrap();
        let g = act.element_of_word(&w, 0, &limits).unwrap();
        assert!(g.depth_limit().is_none());
        // bab = a^-1 in the infinite dihedral group.
        let a_inv = act.generator_inverse(0);
        assert_eq!(g.exact_equal(a_inv), Some(true));

        let mixed_act = mixed();
        let w = mixed_act.word_from_str("a c").unwrap();
        let g = mixed_act.element_of_word(&w, 6, &limits).unwrap();
        assert_eq!(g.depth_limit(), Some(6));
        for digits in [vec![0, 1, 0, 0, 0, 0], vec![1, 1, 0, 1, 0, 1]] {
            assert_eq!(
                g.apply(&digits).unwrap(),
                mixed_act.apply_word(&w, &digits).unwrap()
            );
        }
    }
}
