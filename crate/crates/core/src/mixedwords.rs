//! Normal forms in free products `G₁ ∗ … ∗ Gₘ ∗ F(X)`.
//!
//! Constants from finite factors are element indices and are multiplied through
//! the table; constants from free factors are reduced words. Presented factors
//! have no word problem here, so their constants are rejected by [`MixedWord::normalize`].

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::groups::{FactorKind, FactorSpec, FreeProductSpec, GroupError};
use crate::words::{Word, WordError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MixedError {
    #[error("factor index {0} is not declared")]
    UndeclaredFactor(usize),
    #[error("no factor named `{0}`")]
    UnknownFactor(String),
    #[error("variable index {0} is not declared")]
    UndeclaredVariable(usize),
    #[error("element does not belong to factor `{0}`")]
    BadElement(String),
    #[error("factor `{0}` is presented; its constants cannot be normalized")]
    PresentedFactor(String),
    #[error("factor `{0}` is not finite")]
    NotFinite(String),
    #[error("words live in different free products")]
    SpecMismatch,
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Word(#[from] WordError),
}

/// A constant: an index for finite factors, a reduced word for free ones.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Element {
    Finite(usize),
    Free(Word),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Syllable {
    Constant { factor: usize, elem: Element },
    Var { gen: usize, exp: BigInt },
}

impl Syllable {
    pub fn constant(factor: usize, elem: usize) -> Self {
        Syllable::Constant {
            factor,
            elem: Element::Finite(elem),
        }
    }

    pub fn free_constant(factor: usize, word: Word) -> Self {
        Syllable::Constant {
            factor,
            elem: Element::Free(word),
        }
    }

    pub fn var(gen: usize, exp: impl Into<BigInt>) -> Self {
        Syllable::Var {
            gen,
            exp: exp.into(),
        }
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Syllable::Var { .. })
    }
}

/// Which free-product factor a syllable lives in; all variables share `Vars`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Block {
    Factor(usize),
    Vars,
}

fn block(s: &Syllable) -> Block {
    match s {
        Syllable::Constant { factor, .. } => Block::Factor(*factor),
        Syllable::Var { .. } => Block::Vars,
    }
}

/// A word in normal form: adjacent constants lie in distinct factors, adjacent
/// variables are distinct generators, and no syllable is trivial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MixedWord {
    syllables: Vec<Syllable>,
    spec: Arc<FreeProductSpec>,
}

/// Outcome of [`MixedWord::conjugate_into_factor`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FactorConjugacy {
    /// The word is trivial.
    Identity,
    /// `w = conjugator · element · conjugator⁻¹` with `element` in `factor`.
    Factor {
        factor: usize,
        element: MixedWord,
        conjugator: MixedWord,
    },
    NotConjugate,
}

impl MixedWord {
    pub fn identity(spec: Arc<FreeProductSpec>) -> Self {
        MixedWord {
            syllables: Vec::new(),
            spec,
        }
    }

    pub fn normalize(
        raw: impl IntoIterator<Item = Syllable>,
        spec: Arc<FreeProductSpec>,
    ) -> Result<Self, MixedError> {
        let mut w = MixedWord::identity(spec);
        for s in raw {
            w.check(&s)?;
            w.push(s);
        }
        Ok(w)
    }

    fn check(&self, s: &Syllable) -> Result<(), MixedError> {
        match s {
            Syllable::Var { gen, .. } => {
                if *gen >= self.spec.variables().len() {
                    return Err(MixedError::UndeclaredVariable(*gen));
                }
            }
            Syllable::Constant { factor, elem } => {
                let f = self
                    .spec
                    .factors()
                    .get(*factor)
                    .ok_or(MixedError::UndeclaredFactor(*factor))?;
                let ok = match (&f.kind, elem) {
                    (FactorKind::Finite(g), Element::Finite(i)) => *i < g.order(),
                    (FactorKind::Free(a), Element::Free(w)) => a.check(w).is_ok(),
                    (FactorKind::Presented(_), _) => {
                        return Err(MixedError::PresentedFactor(f.name.clone()))
                    }
                    _ => false,
                };
                if !ok {
                    return Err(MixedError::BadElement(f.name.clone()));
                }
            }
        }
        Ok(())
    }

    fn is_trivial(&self, s: &Syllable) -> bool {
        match s {
            Syllable::Var { exp, .. } => exp.is_zero(),
            Syllable::Constant { factor, elem } => match elem {
                Element::Finite(i) => {
                    let g = self.spec.factor(*factor).as_finite().expect("checked");
                    *i == g.identity()
                }
                Element::Free(w) => w.is_identity(),
            },
        }
    }

    /// Product of two syllables in the same block; `None` when it is trivial.
    fn merge(&self, a: &Syllable, b: &Syllable) -> Option<Syllable> {
        let merged = match (a, b) {
            (Syllable::Var { gen, exp: x }, Syllable::Var { exp: y, .. }) => Syllable::Var {
                gen: *gen,
                exp: x + y,
            },
            (
                Syllable::Constant { factor, elem: Element::Finite(x) },
                Syllable::Constant { elem: Element::Finite(y), .. },
            ) => {
                let g = self.spec.factor(*factor).as_finite().expect("checked");
                Syllable::constant(*factor, g.mul(*x, *y))
            }
            (
                Syllable::Constant { factor, elem: Element::Free(x) },
                Syllable::Constant { elem: Element::Free(y), .. },
            ) => Syllable::free_constant(*factor, x.multiply(y)),
            _ => unreachable!("merge across blocks"),
        };
        (!self.is_trivial(&merged)).then_some(merged)
    }

    fn mergeable(a: &Syllable, b: &Syllable) -> bool {
        match (a, b) {
            (Syllable::Var { gen: x, .. }, Syllable::Var { gen: y, .. }) => x == y,
            (Syllable::Constant { factor: x, .. }, Syllable::Constant { factor: y, .. }) => x == y,
            _ => false,
        }
    }

    /// Appends an already-validated syllable, merging with the tail.
    fn push(&mut self, s: Syllable) {
        if self.is_trivial(&s) {
            return;
        }
        match self.syllables.last() {
            Some(top) if Self::mergeable(top, &s) => {
                let merged = self.merge(top, &s);
                self.syllables.pop();
                if let Some(m) = merged {
                    self.syllables.push(m);
                }
            }
            _ => self.syllables.push(s),
        }
    }

    pub fn syllables(&self) -> &[Syllable] {
        &self.syllables
    }

    pub fn spec(&self) -> &Arc<FreeProductSpec> {
        &self.spec
    }

    pub fn is_identity(&self) -> bool {
        self.syllables.is_empty()
    }

    pub fn len(&self) -> usize {
        self.syllables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.syllables.is_empty()
    }

    fn same_spec(&self, other: &MixedWord) -> Result<(), MixedError> {
        if Arc::ptr_eq(&self.spec, &other.spec) || self.spec == other.spec {
            Ok(())
        } else {
            Err(MixedError::SpecMismatch)
        }
    }

    pub fn multiply(&self, other: &MixedWord) -> Result<MixedWord, MixedError> {
        self.same_spec(other)?;
        let mut out = self.clone();
        for s in &other.syllables {
            out.push(s.clone());
        }
        Ok(out)
    }

    fn invert_syllable(&self, s: &Syllable) -> Syllable {
        match s {
            Syllable::Var { gen, exp } => Syllable::var(*gen, -exp),
            Syllable::Constant { factor, elem: Element::Finite(i) } => {
                let g = self.spec.factor(*factor).as_finite().expect("checked");
                Syllable::constant(*factor, g.inv(*i))
            }
            Syllable::Constant { factor, elem: Element::Free(w) } => {
                Syllable::free_constant(*factor, w.inverse())
            }
        }
    }

    pub fn inverse(&self) -> MixedWord {
        MixedWord {
            syllables: self
                .syllables
                .iter()
                .rev()
                .map(|s| self.invert_syllable(s))
                .collect(),
            spec: self.spec.clone(),
        }
    }

    /// `c · self · c⁻¹`
    pub fn conjugate_by(&self, c: &MixedWord) -> Result<MixedWord, MixedError> {
        c.multiply(self)?.multiply(&c.inverse())
    }

    /// The content: delete every constant and freely reduce what is left.
    pub fn content(&self) -> Word {
        Word::reduce(self.syllables.iter().filter_map(|s| match s {
            Syllable::Var { gen, exp } => Some((*gen, exp.clone())),
            Syllable::Constant { .. } => None,
        }))
    }

    /// Image under the retraction killing one factor, over the reduced spec.
    /// Deleting a factor that is not declared leaves the word unchanged.
    pub fn delete_factor(&self, name: &str) -> Result<MixedWord, MixedError> {
        let Some(k) = self.spec.factor_index(name) else {
            return Ok(self.clone());
        };
        let factors: Vec<FactorSpec> = self
            .spec
            .factors()
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != k)
            .map(|(_, f)| f.clone())
            .collect();
        let spec = Arc::new(FreeProductSpec::new(factors, self.spec.variables().clone())?);
        let mut out = MixedWord::identity(spec);
        for s in &self.syllables {
            match s {
                Syllable::Constant { factor, .. } if *factor == k => {}
                Syllable::Constant { factor, elem } => out.push(Syllable::Constant {
                    factor: if *factor > k { factor - 1 } else { *factor },
                    elem: elem.clone(),
                }),
                v => out.push(v.clone()),
            }
        }
        Ok(out)
    }

    /// The `G/A`-content: constants of the finite factor `name` are sent through
    /// `G → G/A`. The factor keeps its name in the new spec.
    pub fn quotient_content(&self, name: &str, normal: &BTreeSet<usize>) -> Result<MixedWord, MixedError> {
        let k = self
            .spec
            .factor_index(name)
            .ok_or_else(|| MixedError::UnknownFactor(name.to_string()))?;
        let g = self
            .spec
            .factor(k)
            .as_finite()
            .ok_or_else(|| MixedError::NotFinite(name.to_string()))?;
        let (q, proj) = g.quotient(normal)?;
        let mut factors = self.spec.factors().to_vec();
        factors[k] = FactorSpec::finite(name, q);
        let spec = Arc::new(FreeProductSpec::new(factors, self.spec.variables().clone())?);
        let mut out = MixedWord::identity(spec);
        for s in &self.syllables {
            match s {
                Syllable::Constant { factor, elem: Element::Finite(i) } if *factor == k => {
                    out.push(Syllable::constant(k, proj[*i]))
                }
                other => out.push(other.clone()),
            }
        }
        Ok(out)
    }

    fn from_parts(&self, syllables: Vec<Syllable>) -> MixedWord {
        let mut w = MixedWord::identity(self.spec.clone());
        for s in syllables {
            w.push(s);
        }
        w
    }

    /// Returns `(core, conjugator)` with `self = conjugator · core · conjugator⁻¹`
    /// and `core` cyclically reduced in the free-product sense: when it has at
    /// least two syllables, its first and last syllables lie in different
    /// factors (all variables counting as one factor, `F(X)`).
    pub fn cyclic_normal_form(&self) -> (MixedWord, MixedWord) {
        let mut core = self.clone();
        let mut conj = MixedWord::identity(self.spec.clone());
        loop {
            let Some(first) = core.syllables.first() else { break };
            let key = block(first);
            if core.syllables.iter().all(|s| block(s) == key) {
                let (inner, c) = core.single_block_cyclic();
                core = inner;
                conj = conj.multiply(&c).expect("same spec");
                break;
            }
            if block(core.syllables.last().expect("nonempty")) != key {
                break;
            }
            let lead = core.syllables.iter().take_while(|s| block(s) == key).count();
            let prefix = core.from_parts(core.syllables[..lead].to_vec());
            let rest = core.from_parts(core.syllables[lead..].to_vec());
            core = rest.multiply(&prefix).expect("same spec");
            conj = conj.multiply(&prefix).expect("same spec");
        }
        (core, conj)
    }

    /// Cyclic reduction of a word that lies entirely in one factor.
    fn single_block_cyclic(&self) -> (MixedWord, MixedWord) {
        let identity = MixedWord::identity(self.spec.clone());
        match self.syllables.as_slice() {
            [] => (identity.clone(), identity),
            [Syllable::Constant { factor, elem: Element::Free(w) }] => {
                let (core, c) = w.cyclic_reduce();
                (
                    self.from_parts(vec![Syllable::free_constant(*factor, core)]),
                    self.from_parts(vec![Syllable::free_constant(*factor, c)]),
                )
            }
            [Syllable::Constant { .. }] => (self.clone(), identity),
            vars => {
                let (core, c) = self.content().cyclic_reduce();
                debug_assert!(vars.iter().all(Syllable::is_var));
                let lift = |w: &Word| {
                    self.from_parts(
                        w.syllables()
                            .iter()
                            .map(|s| Syllable::var(s.gen, s.exp.clone()))
                            .collect(),
                    )
                };
                (lift(&core), lift(&c))
            }
        }
    }

    /// Decides whether the word is conjugate into a single constant factor.
    pub fn conjugate_into_factor(&self) -> FactorConjugacy {
        let (core, conjugator) = self.cyclic_normal_form();
        match core.syllables.as_slice() {
            [] => FactorConjugacy::Identity,
            [Syllable::Constant { factor, .. }] => FactorConjugacy::Factor {
                factor: *factor,
                element: core.clone(),
                conjugator,
            },
            _ => FactorConjugacy::NotConjugate,
        }
    }

    /// Encodes each distinct syllable as its own letter, first appearance first.
    /// Periodicity of this letter word is periodicity of the syllable cycle.
    pub fn syllable_letters(&self) -> Word {
        let mut seen: Vec<&Syllable> = Vec::new();
        let mut out = Word::identity();
        for s in &self.syllables {
            let id = match seen.iter().position(|t| *t == s) {
                Some(i) => i,
                None => {
                    seen.push(s);
                    seen.len() - 1
                }
            };
            out.push(id, BigInt::one());
        }
        out
    }

    /// Powers a word; large exponents of long words are refused.
    pub fn pow(&self, n: &BigInt) -> Result<MixedWord, MixedError> {
        if let [single] = self.syllables.as_slice() {
            let s = match single {
                Syllable::Var { gen, exp } => Syllable::var(*gen, exp * n),
                Syllable::Constant { factor, elem: Element::Free(w) } => {
                    Syllable::free_constant(*factor, w.pow(n)?)
                }
                Syllable::Constant { factor, elem: Element::Finite(i) } => {
                    let g = self.spec.factor(*factor).as_finite().expect("checked");
                    Syllable::constant(*factor, g.pow(*i, n))
                }
            };
            return Ok(self.from_parts(vec![s]));
        }
        let base = if n.is_negative() { self.inverse() } else { self.clone() };
        let count = n.abs();
        let total = &count * BigInt::from(self.syllables.len());
        if total > BigInt::from(crate::words::MAX_EXPANSION) {
            return Err(MixedError::Word(WordError::TooLong {
                len: total,
                cap: crate::words::MAX_EXPANSION,
            }));
        }
        let mut out = MixedWord::identity(self.spec.clone());
        let mut i = BigInt::zero();
        while i < count {
            for s in &base.syllables {
                out.push(s.clone());
            }
            i += 1;
        }
        Ok(out)
    }

    pub fn syllable_to_string(&self, s: &Syllable) -> String {
        match s {
            Syllable::Var { gen, exp } => {
                let name = self.spec.variables().name(*gen);
                if exp.is_one() {
                    name.to_string()
                } else {
                    format!("{name}^{exp}")
                }
            }
            Syllable::Constant { factor, elem } => {
                let f = self.spec.factor(*factor);
                match (&f.kind, elem) {
                    (FactorKind::Finite(g), Element::Finite(i)) => g.label(*i),
                    (FactorKind::Free(a), Element::Free(w)) => {
                        if w.syllable_len() > 1 {
                            format!("({})", w.display(a))
                        } else {
                            w.display(a).to_string()
                        }
                    }
                    _ => "?".to_string(),
                }
            }
        }
    }
}

impl fmt::Display for MixedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.syllables.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self.syllables.iter().map(|s| self.syllable_to_string(s)).collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// Equations `wᵢ = 1` sharing one free product.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquationSystem {
    spec: Arc<FreeProductSpec>,
    equations: Vec<MixedWord>,
}

impl EquationSystem {
    pub fn new(spec: Arc<FreeProductSpec>, equations: Vec<MixedWord>) -> Result<Self, MixedError> {
        for w in &equations {
            if !Arc::ptr_eq(w.spec(), &spec) && **w.spec() != *spec {
                return Err(MixedError::SpecMismatch);
            }
        }
        Ok(EquationSystem { spec, equations })
    }

    pub fn spec(&self) -> &Arc<FreeProductSpec> {
        &self.spec
    }

    pub fn equations(&self) -> &[MixedWord] {
        &self.equations
    }

    pub fn len(&self) -> usize {
        self.equations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.equations.is_empty()
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::groups::tests::{index_of, perm, s3};
    use crate::groups::FiniteGroup;
    use crate::words::Alphabet;
    use proptest::prelude::*;

    /// C ∗ D ∗ K with each factor free of rank 1 (generators c, d, k), plus variables.
    pub(crate) fn cdk_spec(vars: &[&str]) -> Arc<FreeProductSpec> {
        let f = |n: &str, g: &str| FactorSpec::free(n, Alphabet::new([g]).unwrap());
        Arc::new(
            FreeProductSpec::new(vec![f("C", "c"), f("D", "d"), f("K", "k")], Alphabet::new(vars).unwrap())
                .unwrap(),
        )
    }

    pub(crate) fn c(factor: usize, e: i64) -> Syllable {
        Syllable::free_constant(factor, Word::power_of(0, e))
    }

    pub(crate) fn mw(spec: &Arc<FreeProductSpec>, raw: Vec<Syllable>) -> MixedWord {
        MixedWord::normalize(raw, spec.clone()).unwrap()
    }

    fn c2_spec() -> Arc<FreeProductSpec> {
        let mut g = FiniteGroup::cyclic(2);
        g.set_label(1, "a");
        Arc::new(FreeProductSpec::new(vec![FactorSpec::finite("C2", g)], Alphabet::new(["x", "y"]).unwrap()).unwrap())
    }

    #[test]
    fn normalize_examples() {
        let s = cdk_spec(&["x"]);
        assert_eq!(mw(&s, vec![c(0, 1), c(0, -1), Syllable::var(0, 1)]).to_string(), "x");
        assert_eq!(mw(&s, vec![Syllable::var(0, 1), Syllable::var(0, 2)]).to_string(), "x^3");
        let s = c2_spec();
        let w = mw(&s, vec![Syllable::constant(0, 1), Syllable::constant(0, 1), Syllable::var(0, 1)]);
        assert_eq!(w.to_string(), "x");
    }

    #[test]
    fn normalize_cascades_cancellation() {
        let s = cdk_spec(&["x"]);
        // c x d d^-1 x^-1 c = c^2
        let w = mw(
            &s,
            vec![c(0, 1), Syllable::var(0, 1), c(1, 1), c(1, -1), Syllable::var(0, -1), c(0, 1)],
        );
        assert_eq!(w.syllables(), &[c(0, 2)]);
    }

    #[test]
    fn normalize_errors() {
        let s = cdk_spec(&["x"]);
        assert_eq!(
            MixedWord::normalize(vec![Syllable::var(3, 1)], s.clone()),
            Err(MixedError::UndeclaredVariable(3))
        );
        assert_eq!(
            MixedWord::normalize(vec![c(7, 1)], s.clone()),
            Err(MixedError::UndeclaredFactor(7))
        );
        assert_eq!(
            MixedWord::normalize(vec![Syllable::constant(0, 1)], s),
            Err(MixedError::BadElement("C".into()))
        );
        let pres = crate::groups::Presentation::from_names(&["p"], vec![]).unwrap();
        let spec = Arc::new(
            FreeProductSpec::new(
                vec![FactorSpec {
                    name: "P".into(),
                    kind: FactorKind::Presented(pres),
                }],
                Alphabet::default(),
            )
            .unwrap(),
        );
        assert_eq!(
            MixedWord::normalize(vec![Syllable::free_constant(0, Word::gen(0))], spec),
            Err(MixedError::PresentedFactor("P".into()))
        );
    }

    #[test]
    fn content_examples() {
        let s = c2_spec();
        let g = Syllable::constant(0, 1);
        let w = mw(&s, vec![g.clone(), Syllable::var(0, 1), g.clone(), Syllable::var(1, -1)]);
        assert_eq!(w.content(), Word::reduce([(0, 1), (1, -1)]));
        let w = mw(&s, vec![g.clone(), Syllable::var(0, 1), g.clone(), Syllable::var(0, -1)]);
        assert!(w.content().is_identity());
    }

    #[test]
    fn content_of_first_displayed_equation() {
        // a x b y c y z^5 d z^-2 over a free coefficient group ⟨a, b, c, d⟩
        let spec = Arc::new(
            FreeProductSpec::new(
                vec![FactorSpec::free("G", Alphabet::new(["a", "b", "c", "d"]).unwrap())],
                Alphabet::new(["x", "y", "z", "t"]).unwrap(),
            )
            .unwrap(),
        );
        let k = |g: usize| Syllable::free_constant(0, Word::gen(g));
        let v = |g: usize, e: i64| Syllable::var(g, e);
        let w = mw(&spec, vec![k(0), v(0, 1), k(1), v(1, 1), k(2), v(1, 1), v(2, 5), k(3), v(2, -2)]);
        let content = w.content();
        assert_eq!(content, Word::reduce([(0, 1), (1, 2), (2, 3)]));
        let sums: Vec<BigInt> = (0..4).map(|g| content.exponent_sum(g)).collect();
        assert_eq!(sums, [1, 2, 3, 0].map(BigInt::from).to_vec());
    }

    #[test]
    fn delete_factor_examples() {
        let s = cdk_spec(&[]);
        let w = mw(&s, vec![c(0, 1), c(2, 1), c(1, 1)]);
        assert_eq!(w.delete_factor("K").unwrap().to_string(), "c d");
        let w = mw(&s, vec![c(0, 1), c(2, 1), c(0, -1)]);
        assert!(w.delete_factor("K").unwrap().is_identity());
        let w = mw(&s, vec![c(2, 1), c(0, 1), c(2, 1), c(0, -1), c(1, 1)]);
        assert_eq!(w.delete_factor("K").unwrap().to_string(), "d");
    }

    #[test]
    fn quotient_content_examples() {
        let mut g = s3();
        let r = index_of(&g, &perm(3, &[&[1, 2, 3]]));
        let t = index_of(&g, &perm(3, &[&[1, 2]]));
        g.set_label(r, "r");
        g.set_label(t, "s");
        let spec = Arc::new(
            FreeProductSpec::new(vec![FactorSpec::finite("G", g.clone())], Alphabet::new(["x", "y"]).unwrap())
                .unwrap(),
        );
        let w = mw(
            &spec,
            vec![Syllable::constant(0, r), Syllable::var(0, 1), Syllable::constant(0, t), Syllable::var(1, 1)],
        );
        let a3 = g.subgroup_generated(&[r]);
        let q = w.quotient_content("G", &a3).unwrap();
        assert_eq!(q.to_string(), "x [s] y");

        let trivial = BTreeSet::from([g.identity()]);
        let same = w.quotient_content("G", &trivial).unwrap();
        assert_eq!(same.syllables(), w.syllables());

        let everything: BTreeSet<usize> = (0..6).collect();
        let c = w.quotient_content("G", &everything).unwrap();
        assert_eq!(c.content(), w.content());
        assert!(c.syllables().iter().all(Syllable::is_var));

        let s = g.subgroup_generated(&[t]);
        assert!(matches!(
            w.quotient_content("G", &s),
            Err(MixedError::Group(GroupError::NotNormal { .. }))
        ));
    }

    #[test]
    fn cyclic_normal_form_examples() {
        let s = cdk_spec(&["x"]);
        let w = mw(&s, vec![c(1, 1), c(0, 1), c(1, -1)]);
        let (core, conj) = w.cyclic_normal_form();
        assert_eq!((core.to_string(), conj.to_string()), ("c".into(), "d".into()));

        let w = mw(&s, vec![Syllable::var(0, 1), c(0, 1), Syllable::var(0, -1), c(1, 1)]);
        let (core, conj) = w.cyclic_normal_form();
        assert_eq!(core, w);
        assert!(conj.is_identity());

        let w = mw(&s, vec![c(2, 1), c(0, 1), c(1, 1), c(2, -1)]);
        let (core, conj) = w.cyclic_normal_form();
        assert_eq!((core.to_string(), conj.to_string()), ("c d".into(), "k".into()));
        assert_eq!(core.conjugate_by(&conj).unwrap(), w);
    }

    #[test]
    fn conjugate_into_factor_examples() {
        let s = c2_spec();
        let w = mw(&s, vec![Syllable::constant(0, 1), Syllable::var(0, 1), Syllable::var(0, -1)]);
        assert!(matches!(w.conjugate_into_factor(), FactorConjugacy::Factor { factor: 0, .. }));

        let s = cdk_spec(&["x"]);
        assert_eq!(mw(&s, vec![c(0, 1), c(1, 1)]).conjugate_into_factor(), FactorConjugacy::NotConjugate);
        let w = mw(&s, vec![Syllable::var(0, -1), c(0, 1), Syllable::var(0, 1)]);
        match w.conjugate_into_factor() {
            FactorConjugacy::Factor { factor, element, conjugator } => {
                assert_eq!(factor, 0);
                assert_eq!(element.conjugate_by(&conjugator).unwrap(), w);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(MixedWord::identity(s.clone()).conjugate_into_factor(), FactorConjugacy::Identity);
        let vars_only = mw(&s, vec![Syllable::var(0, 2)]);
        assert_eq!(vars_only.conjugate_into_factor(), FactorConjugacy::NotConjugate);
    }

    #[test]
    fn variable_blocks_rotate_as_one_factor() {
        let s = cdk_spec(&["x", "y"]);
        // x c y is conjugate to c (y x), which is cyclically reduced
        let w = mw(&s, vec![Syllable::var(0, 1), c(0, 1), Syllable::var(1, 1)]);
        let (core, conj) = w.cyclic_normal_form();
        assert_eq!(core.to_string(), "c y x");
        assert_eq!(core.conjugate_by(&conj).unwrap(), w);
    }

    #[test]
    fn quotient_content_matches_delete_factor_on_a_direct_product_model() {
        // Model C2 ∗ C3 ∗ F(x) inside G = C2 × C3 with A = C3.
        let c2 = FiniteGroup::cyclic(2);
        let c3 = FiniteGroup::cyclic(3);
        let g = c2.direct_product_cyclic(3); // (i, j) ↦ j·2 + i
        let free = Arc::new(
            FreeProductSpec::new(
                vec![FactorSpec::finite("C", c2), FactorSpec::finite("K", c3)],
                Alphabet::new(["x"]).unwrap(),
            )
            .unwrap(),
        );
        let model = Arc::new(
            FreeProductSpec::new(vec![FactorSpec::finite("G", g.clone())], Alphabet::new(["x"]).unwrap()).unwrap(),
        );
        let a: BTreeSet<usize> = (0..3).map(|j| j * 2).collect();
        let mut rng = 12345u64;
        let mut next = |m: u64| {
            rng = rng.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (rng >> 33) % m
        };
        for _ in 0..200 {
            let len = next(8) as usize;
            let mut raw_free = Vec::new();
            let mut raw_model = Vec::new();
            for _ in 0..len {
                match next(3) {
                    0 => {
                        let i = next(2) as usize;
                        raw_free.push(Syllable::constant(0, i));
                        raw_model.push(Syllable::constant(0, i));
                    }
                    1 => {
                        let j = next(3) as usize;
                        raw_free.push(Syllable::constant(1, j));
                        raw_model.push(Syllable::constant(0, j * 2));
                    }
                    _ => {
                        let e = next(5) as i64 - 2;
                        raw_free.push(Syllable::var(0, e));
                        raw_model.push(Syllable::var(0, e));
                    }
                }
            }
            let deleted = mw(&free, raw_free).delete_factor("K").unwrap();
            let projected = mw(&model, raw_model).quotient_content("G", &a).unwrap();
            // G/A has cosets numbered by least element: [0] = identity, [1] = the C2 generator
            let shape = |w: &MixedWord| -> Vec<String> {
                w.syllables()
                    .iter()
                    .map(|s| match s {
                        Syllable::Constant { elem: Element::Finite(i), .. } => format!("c{i}"),
                        Syllable::Var { gen, exp } => format!("v{gen}^{exp}"),
                        _ => unreachable!(),
                    })
                    .collect()
            };
            assert_eq!(shape(&deleted), shape(&projected));
        }
    }

    fn arb_cdk_word() -> impl Strategy<Value = Vec<Syllable>> {
        prop::collection::vec(
            prop_oneof![
                (0usize..3, -2i64..=2).prop_map(|(f, e)| c(f, e)),
                (0usize..2, -2i64..=2).prop_map(|(g, e)| Syllable::var(g, e)),
            ],
            0..10,
        )
    }

    fn kind(c: FactorConjugacy) -> Option<Option<usize>> {
        match c {
            FactorConjugacy::Identity => Some(None),
            FactorConjugacy::Factor { factor, .. } => Some(Some(factor)),
            FactorConjugacy::NotConjugate => None,
        }
    }

    proptest! {
        #[test]
        fn content_is_a_homomorphism(a in arb_cdk_word(), b in arb_cdk_word()) {
            let s = cdk_spec(&["x", "y"]);
            let (u, v) = (mw(&s, a), mw(&s, b));
            prop_assert_eq!(u.multiply(&v).unwrap().content(), u.content().multiply(&v.content()));
        }

        #[test]
        fn normalize_is_idempotent(a in arb_cdk_word()) {
            let s = cdk_spec(&["x", "y"]);
            let u = mw(&s, a);
            prop_assert_eq!(mw(&s, u.syllables().to_vec()), u);
        }

        #[test]
        fn delete_factor_is_idempotent(a in arb_cdk_word()) {
            let s = cdk_spec(&["x", "y"]);
            let once = mw(&s, a).delete_factor("K").unwrap();
            prop_assert_eq!(once.delete_factor("K").unwrap(), once);
        }

        #[test]
        fn conjugacy_into_factor_is_conjugation_invariant(a in arb_cdk_word(), g in arb_cdk_word()) {
            let s = cdk_spec(&["x", "y"]);
            let (w, g) = (mw(&s, a), mw(&s, g));
            let (core, conj) = w.cyclic_normal_form();
            prop_assert_eq!(core.conjugate_by(&conj).unwrap(), w.clone());
            prop_assert_eq!(kind(w.conjugate_by(&g).unwrap().conjugate_into_factor()), kind(w.conjugate_into_factor()));
        }
    }
}
