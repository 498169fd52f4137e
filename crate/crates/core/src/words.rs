//! Words in free groups.
//!
//! A [`Word`] is stored as run-length syllables `(generator, exponent)` with
//! arbitrary-precision exponents, so inputs such as `x^2022` cost one syllable.
//! Generators are plain indices into an [`Alphabet`]; the alphabet only matters
//! for printing and for checked arithmetic.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WordError {
    #[error("duplicate generator name `{0}`")]
    DuplicateName(String),
    #[error("generator index {index} is outside an alphabet of size {size}")]
    AlphabetMismatch { index: usize, size: usize },
    #[error("the identity word has no root")]
    EmptyWord,
    #[error("word is not cyclically reduced")]
    NotCyclicallyReduced,
    #[error("word expands to {len} letters, above the cap of {cap}")]
    TooLong { len: BigInt, cap: usize },
}

/// A named generator. `id` is its position in the owning alphabet.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GenSym {
    pub name: String,
    pub id: usize,
}

/// An ordered list of distinct generator names.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Alphabet {
    syms: Vec<GenSym>,
}

impl Alphabet {
    pub fn new<S: AsRef<str>>(names: impl IntoIterator<Item = S>) -> Result<Self, WordError> {
        let mut syms: Vec<GenSym> = Vec::new();
        for name in names {
            let name = name.as_ref();
            if syms.iter().any(|s| s.name == name) {
                return Err(WordError::DuplicateName(name.to_string()));
            }
            syms.push(GenSym {
                name: name.to_string(),
                id: syms.len(),
            });
        }
        Ok(Alphabet { syms })
    }

    pub fn len(&self) -> usize {
        self.syms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.syms.is_empty()
    }

    pub fn syms(&self) -> &[GenSym] {
        &self.syms
    }

    pub fn name(&self, id: usize) -> &str {
        &self.syms[id].name
    }

    pub fn lookup(&self, name: &str) -> Option<usize> {
        self.syms.iter().position(|s| s.name == name)
    }

    /// Fails if `w` mentions a generator this alphabet does not have.
    pub fn check(&self, w: &Word) -> Result<(), WordError> {
        match w.syllables.iter().find(|s| s.gen >= self.len()) {
            Some(s) => Err(WordError::AlphabetMismatch {
                index: s.gen,
                size: self.len(),
            }),
            None => Ok(()),
        }
    }

    pub fn multiply(&self, a: &Word, b: &Word) -> Result<Word, WordError> {
        self.check(a)?;
        self.check(b)?;
        Ok(a.multiply(b))
    }

    pub fn invert(&self, a: &Word) -> Result<Word, WordError> {
        self.check(a)?;
        Ok(a.inverse())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Syllable {
    pub gen: usize,
    pub exp: BigInt,
}

/// A freely reduced word. Adjacent syllables carry distinct generators and no
/// exponent is zero; the empty word is the identity.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Word {
    syllables: Vec<Syllable>,
}

impl Word {
    pub fn identity() -> Self {
        Word::default()
    }

    pub fn gen(gen: usize) -> Self {
        Word::power_of(gen, BigInt::one())
    }

    pub fn power_of(gen: usize, exp: impl Into<BigInt>) -> Self {
        let mut w = Word::identity();
        w.push(gen, exp.into());
        w
    }

    /// Freely reduces a raw sequence of `(generator, exponent)` pairs.
    pub fn reduce<E: Into<BigInt>>(raw: impl IntoIterator<Item = (usize, E)>) -> Self {
        let mut w = Word::identity();
        for (gen, exp) in raw {
            w.push(gen, exp.into());
        }
        w
    }

    /// Appends `gen^exp`, cancelling against the tail.
    pub fn push(&mut self, gen: usize, exp: BigInt) {
        if exp.is_zero() {
            return;
        }
        match self.syllables.last_mut() {
            Some(last) if last.gen == gen => {
                last.exp += exp;
                if last.exp.is_zero() {
                    self.syllables.pop();
                }
            }
            _ => self.syllables.push(Syllable { gen, exp }),
        }
    }

    pub fn syllables(&self) -> &[Syllable] {
        &self.syllables
    }

    pub fn is_identity(&self) -> bool {
        self.syllables.is_empty()
    }

    pub fn syllable_len(&self) -> usize {
        self.syllables.len()
    }

    pub fn letter_len(&self) -> BigInt {
        self.syllables.iter().map(|s| s.exp.abs()).sum()
    }

    /// Largest generator index used, if any.
    pub fn max_gen(&self) -> Option<usize> {
        self.syllables.iter().map(|s| s.gen).max()
    }

    pub fn multiply(&self, other: &Word) -> Word {
        let mut out = self.clone();
        for s in &other.syllables {
            out.push(s.gen, s.exp.clone());
        }
        out
    }

    pub fn inverse(&self) -> Word {
        Word {
            syllables: self
                .syllables
                .iter()
                .rev()
                .map(|s| Syllable {
                    gen: s.gen,
                    exp: -&s.exp,
                })
                .collect(),
        }
    }

    pub fn pow(&self, n: &BigInt) -> Result<Word, WordError> {
        if self.is_identity() || n.is_zero() {
            return Ok(Word::identity());
        }
        if self.syllables.len() == 1 {
            let s = &self.syllables[0];
            return Ok(Word::power_of(s.gen, &s.exp * n));
        }
        let base = if n.is_negative() {
            self.inverse()
        } else {
            self.clone()
        };
        let count = n.abs();
        let len = base.letter_len() * &count;
        let reps = count
            .to_usize()
            .filter(|_| len <= BigInt::from(MAX_EXPANSION))
            .ok_or(WordError::TooLong {
                len,
                cap: MAX_EXPANSION,
            })?;
        let mut out = Word::identity();
        for _ in 0..reps {
            for s in &base.syllables {
                out.push(s.gen, s.exp.clone());
            }
        }
        Ok(out)
    }

    pub fn conjugate_by(&self, c: &Word) -> Word {
        c.multiply(self).multiply(&c.inverse())
    }

    pub fn exponent_sum(&self, gen: usize) -> BigInt {
        self.syllables
            .iter()
            .filter(|s| s.gen == gen)
            .map(|s| s.exp.clone())
            .sum()
    }

    /// True if the first and last letters are not mutually inverse.
    pub fn is_cyclically_reduced(&self) -> bool {
        match (self.syllables.first(), self.syllables.last()) {
            (Some(f), Some(l)) if self.syllables.len() > 1 && f.gen == l.gen => {
                f.exp.signum() == l.exp.signum()
            }
            _ => true,
        }
    }

    /// Returns `(core, conjugator)` with `self = conjugator · core · conjugator⁻¹`
    /// and `core` cyclically reduced.
    pub fn cyclic_reduce(&self) -> (Word, Word) {
        let mut core: Vec<Syllable> = self.syllables.clone();
        let mut conj = Word::identity();
        loop {
            let n = core.len();
            if n < 2 || core[0].gen != core[n - 1].gen {
                break;
            }
            let (a, b) = (core[0].exp.clone(), core[n - 1].exp.clone());
            if a.signum() == b.signum() {
                break;
            }
            let gen = core[0].gen;
            let sum = &a + &b;
            if sum.is_zero() {
                conj.push(gen, a);
                core.pop();
                core.remove(0);
            } else if a.abs() > b.abs() {
                // x^a M x^b = x^-b (x^(a+b) M) x^b
                conj.push(gen, -b);
                core.pop();
                core[0].exp = sum;
            } else {
                // x^a M x^b = x^a (M x^(a+b)) x^-a
                conj.push(gen, a);
                core.remove(0);
                core.last_mut().expect("nonempty").exp = sum;
            }
        }
        (Word { syllables: core }, conj)
    }

    /// Writes a nonempty cyclically reduced word as `root^k` with `k` maximal.
    ///
    /// Periods are detected on the cyclic syllable sequence, so no exponent is
    /// ever expanded into letters.
    pub fn power_root(&self) -> Result<(Word, BigInt), WordError> {
        if self.is_identity() {
            return Err(WordError::EmptyWord);
        }
        if !self.is_cyclically_reduced() {
            return Err(WordError::NotCyclicallyReduced);
        }
        let syl = &self.syllables;
        if syl.len() == 1 {
            let s = &syl[0];
            return Ok((Word::power_of(s.gen, s.exp.signum()), s.exp.abs()));
        }
        // Merge the wrap-around syllable so the cycle has distinct neighbours.
        let mut cycle: Vec<Syllable> = syl.clone();
        if cycle[0].gen == cycle[cycle.len() - 1].gen {
            let last = cycle.pop().expect("len > 1");
            cycle[0].exp += last.exp;
        }
        let c = cycle.len();
        let shift = (1..=c)
            .filter(|q| c % q == 0)
            .find(|&q| (0..c).all(|i| cycle[i] == cycle[(i + q) % c]))
            .expect("full rotation always matches");
        let k = c / shift;
        if k == 1 {
            return Ok((self.clone(), BigInt::one()));
        }
        let period = self.letter_len() / BigInt::from(k);
        Ok((self.prefix(&period), BigInt::from(k)))
    }

    /// First `len` letters of the word.
    pub fn prefix(&self, len: &BigInt) -> Word {
        let mut out = Word::identity();
        let mut left = len.clone();
        for s in &self.syllables {
            if left.is_zero() {
                break;
            }
            let a = s.exp.abs();
            if a <= left {
                out.push(s.gen, s.exp.clone());
                left -= a;
            } else {
                out.push(s.gen, &left * s.exp.signum());
                left = BigInt::zero();
            }
        }
        out
    }

    /// Letters as `(generator, ±1)`, refusing words longer than `cap`.
    pub fn letters(&self, cap: usize) -> Result<Vec<(usize, bool)>, WordError> {
        let len = self.letter_len();
        let n = len
            .to_usize()
            .filter(|&n| n <= cap)
            .ok_or(WordError::TooLong { len, cap })?;
        let mut out = Vec::with_capacity(n);
        for s in &self.syllables {
            let m = s.exp.abs().to_usize().expect("bounded by cap");
            out.extend(std::iter::repeat((s.gen, s.exp.is_positive())).take(m));
        }
        Ok(out)
    }

    pub fn from_letters(letters: impl IntoIterator<Item = (usize, bool)>) -> Word {
        Word::reduce(
            letters
                .into_iter()
                .map(|(g, pos)| (g, if pos { 1 } else { -1 })),
        )
    }

    /// Substitutes a word for every generator.
    pub fn substitute(&self, images: &[Word]) -> Result<Word, WordError> {
        let mut out = Word::identity();
        for s in &self.syllables {
            out = out.multiply(&images[s.gen].pow(&s.exp)?);
        }
        Ok(out)
    }

    pub fn display<'a>(&'a self, alphabet: &'a Alphabet) -> WordDisplay<'a> {
        WordDisplay {
            word: self,
            alphabet,
        }
    }
}

/// Exponentiation of an element of a finite cyclic structure: `exp mod order`.
pub(crate) fn reduce_exponent(exp: &BigInt, order: usize) -> usize {
    exp.mod_floor(&BigInt::from(order))
        .to_usize()
        .expect("residue fits")
}

/// Cap on letter expansions (Todd–Coxeter relators, word powers).
pub const MAX_EXPANSION: usize = 10_000_000;

pub struct WordDisplay<'a> {
    word: &'a Word,
    alphabet: &'a Alphabet,
}

impl fmt::Display for WordDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.word.is_identity() {
            return write!(f, "1");
        }
        let a = self.alphabet;
        for (i, s) in self.word.syllables.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            let name = a.syms().get(s.gen).map(|g| g.name.as_str()).unwrap_or("?");
            if s.exp.is_one() {
                write!(f, "{name}")?;
            } else {
                write!(f, "{name}^{}", s.exp)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const X: usize = 0;
    const Y: usize = 1;
    const Z: usize = 2;

    fn w(raw: &[(usize, i64)]) -> Word {
        Word::reduce(raw.iter().copied())
    }

    #[test]
    fn reduce_examples() {
        assert_eq!(w(&[(X, 1), (Y, 1), (Y, -1), (X, 1)]), w(&[(X, 2)]));
        assert!(w(&[]).is_identity());
        assert!(w(&[(X, 1), (X, -1)]).is_identity());
    }

    #[test]
    fn group_operations() {
        assert!(w(&[(X, 1)]).multiply(&w(&[(X, -1)])).is_identity());
        assert_eq!(w(&[(X, 1), (Y, 1)]).inverse(), w(&[(Y, -1), (X, -1)]));
        assert_eq!(
            w(&[(X, 1), (Y, 1)]).multiply(&w(&[(Y, -1), (Z, 1)])),
            w(&[(X, 1), (Z, 1)])
        );
    }

    #[test]
    fn alphabet_mismatch_is_reported() {
        let a = Alphabet::new(["x", "y"]).unwrap();
        let err = a.multiply(&w(&[(X, 1)]), &w(&[(Z, 1)])).unwrap_err();
        assert_eq!(err, WordError::AlphabetMismatch { index: 2, size: 2 });
        assert!(Alphabet::new(["x", "x"]).is_err());
    }

    #[test]
    fn cyclic_reduce_examples() {
        let (core, conj) = w(&[(Y, 1), (X, 1), (Y, -1)]).cyclic_reduce();
        assert_eq!((core, conj), (w(&[(X, 1)]), w(&[(Y, 1)])));
        let (core, conj) = w(&[(X, 1)]).cyclic_reduce();
        assert_eq!((core, conj), (w(&[(X, 1)]), Word::identity()));
        let (core, conj) = w(&[(Y, 2), (X, 1), (Y, -2)]).cyclic_reduce();
        assert_eq!((core, conj), (w(&[(X, 1)]), w(&[(Y, 2)])));
    }

    #[test]
    fn cyclic_reduce_partial_cancellation() {
        // y^3 x y^-1 = y (y^2 x) y^-1
        let orig = w(&[(Y, 3), (X, 1), (Y, -1)]);
        let (core, conj) = orig.cyclic_reduce();
        assert_eq!(core.letter_len(), BigInt::from(3));
        assert_eq!(core.conjugate_by(&conj), orig);
    }

    #[test]
    fn exponent_sums() {
        // x y y z^5 z^-2 after deleting constants from the first equation
        let content = w(&[(X, 1), (Y, 1), (Y, 1), (Z, 5), (Z, -2)]);
        let sums: Vec<BigInt> = (0..4).map(|g| content.exponent_sum(g)).collect();
        assert_eq!(sums, [1, 2, 3, 0].map(BigInt::from).to_vec());
        assert!(Word::identity().exponent_sum(X).is_zero());
        assert!(w(&[(X, 1), (Y, 1), (X, -1)]).exponent_sum(X).is_zero());
    }

    #[test]
    fn power_root_examples() {
        let xy3 = Word::from_letters([(X, true), (Y, true)].repeat(3));
        assert_eq!(
            xy3.power_root().unwrap(),
            (w(&[(X, 1), (Y, 1)]), BigInt::from(3))
        );
        assert_eq!(
            w(&[(X, 1)]).power_root().unwrap(),
            (w(&[(X, 1)]), BigInt::one())
        );
        let x2y2 = w(&[(X, 2), (Y, 2)]);
        assert_eq!(x2y2.power_root().unwrap(), (x2y2.clone(), BigInt::one()));
        assert_eq!(oracle_root_k(&x2y2), 1);
    }

    #[test]
    fn power_root_wrapping_syllable() {
        // (x y x)^2 = x y x^2 y x
        let u = w(&[(X, 1), (Y, 1), (X, 1)]);
        let v = u.multiply(&u);
        assert_eq!(v.syllable_len(), 5);
        assert_eq!(v.power_root().unwrap(), (u, BigInt::from(2)));
        assert_eq!(
            w(&[(X, -6)]).power_root().unwrap(),
            (w(&[(X, -1)]), BigInt::from(6))
        );
    }

    #[test]
    fn power_root_handles_huge_exponents() {
        let big = BigInt::parse_bytes(b"100000000000000000000", 10).unwrap();
        let v = Word::reduce([(X, big.clone()), (Y, big.clone())]);
        let vv = v.multiply(&v);
        let (root, k) = vv.power_root().unwrap();
        assert_eq!(root, v);
        assert_eq!(k, BigInt::from(2));
    }

    #[test]
    fn power_root_errors() {
        assert_eq!(Word::identity().power_root(), Err(WordError::EmptyWord));
        assert_eq!(
            w(&[(X, 1), (Y, 1), (X, -1)]).power_root(),
            Err(WordError::NotCyclicallyReduced)
        );
    }

    /// Brute force: the largest k such that the letter sequence has period len/k.
    fn oracle_root_k(v: &Word) -> usize {
        let letters = v.letters(1000).unwrap();
        let n = letters.len();
        (1..=n)
            .rev()
            .filter(|k| n % k == 0)
            .find(|&k| {
                let p = n / k;
                (0..n).all(|i| letters[i] == letters[i % p])
            })
            .unwrap()
    }

    fn arb_raw() -> impl Strategy<Value = Vec<(usize, i64)>> {
        prop::collection::vec((0usize..3, -3i64..=3), 0..12)
    }

    fn arb_cyclic() -> impl Strategy<Value = Word> {
        (arb_raw(), 1usize..4).prop_map(|(raw, reps)| {
            let base = w(&raw).cyclic_reduce().0;
            let mut out = Word::identity();
            for _ in 0..reps {
                out = out.multiply(&base);
            }
            out
        })
    }

    proptest! {
        #[test]
        fn reduce_is_idempotent(raw in arb_raw()) {
            let once = w(&raw);
            let again = Word::reduce(once.syllables().iter().map(|s| (s.gen, s.exp.clone())));
            prop_assert_eq!(once, again);
        }

        #[test]
        fn exponent_sum_is_additive(a in arb_raw(), b in arb_raw(), g in 0usize..3) {
            let (a, b) = (w(&a), w(&b));
            prop_assert_eq!(a.multiply(&b).exponent_sum(g), a.exponent_sum(g) + b.exponent_sum(g));
        }

        #[test]
        fn inverse_cancels(a in arb_raw()) {
            let a = w(&a);
            prop_assert!(a.multiply(&a.inverse()).is_identity());
        }

        #[test]
        fn power_root_matches_period_oracle(v in arb_cyclic()) {
            prop_assume!(!v.is_identity());
            let (root, k) = v.power_root().unwrap();
            prop_assert_eq!(root.pow(&k).unwrap(), v.clone());
            prop_assert_eq!(k.to_usize().unwrap(), oracle_root_k(&v));
            prop_assert_eq!(root.power_root().unwrap().1, BigInt::one());
        }

        #[test]
        fn cyclic_core_is_shortest_conjugate(raw in arb_raw()) {
            let v = w(&raw);
            let (core, conj) = v.cyclic_reduce();
            prop_assert_eq!(core.conjugate_by(&conj), v.clone());
            prop_assert!(core.is_cyclically_reduced());
            // conjugating by every prefix never beats the core
            let letters = v.letters(100).unwrap();
            for i in 0..=letters.len() {
                let p = Word::from_letters(letters[..i].iter().copied());
                let c = v.conjugate_by(&p.inverse());
                prop_assert!(c.letter_len() >= core.letter_len());
            }
        }
    }
}
