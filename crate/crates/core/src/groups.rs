//! Concrete group carriers: finite groups given by multiplication tables,
//! finite presentations, and the factor list of a free product.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::words::{reduce_exponent, Alphabet, Word, WordError};

/// Tables up to this order get the full `n³` associativity check.
pub const FULL_ASSOCIATIVITY_BOUND: usize = 64;

/// Default cap on the order of a permutation-generated group.
pub const DEFAULT_CLOSURE_CAP: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupError {
    #[error("empty multiplication table")]
    Empty,
    #[error("row {row} has {len} entries, expected {n}")]
    NotSquare { row: usize, len: usize, n: usize },
    #[error("not closed: entry ({a}, {b}) = {value} is not an element index")]
    NotClosed { a: usize, b: usize, value: usize },
    #[error("no two-sided identity element")]
    NoIdentity,
    #[error("element {0} has no inverse")]
    MissingInverse(usize),
    #[error("not associative: ({a}·{b})·{c} ≠ {a}·({b}·{c})")]
    NotAssociative { a: usize, b: usize, c: usize },
    #[error("permutation {0} is not a bijection of the points")]
    BadPermutation(usize),
    #[error("closure exceeds the cap of {0} elements")]
    ClosureCap(usize),
    #[error("{0} is not an element of the group")]
    UnknownElement(usize),
    #[error("not a subgroup: {0}")]
    NotSubgroup(String),
    #[error("not normal: {conjugator}·{element}·{conjugator}⁻¹ leaves the subgroup")]
    NotNormal { element: usize, conjugator: usize },
    #[error("duplicate name `{0}`")]
    DuplicateName(String),
    #[error("label list has {got} entries for a group of order {n}")]
    LabelCount { got: usize, n: usize },
    #[error(transparent)]
    Word(#[from] WordError),
}

/// A permutation of `0..m`, as the list of images.
pub type Permutation = Vec<usize>;

/// A finite group stored as a validated multiplication table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteGroup {
    n: usize,
    mul: Vec<usize>,
    identity: usize,
    inv: Vec<usize>,
    labels: Vec<Option<String>>,
    /// Permutation action when the group came from [`FiniteGroup::from_permutations`].
    perms: Option<Vec<Permutation>>,
}

impl FiniteGroup {
    pub fn validate_table(table: &[Vec<usize>]) -> Result<Self, GroupError> {
        Self::validate_table_with(table, FULL_ASSOCIATIVITY_BOUND)
    }

    /// Like [`validate_table`](Self::validate_table) with a custom switch-over
    /// order for the generator-based associativity test.
    pub fn validate_table_with(table: &[Vec<usize>], full_bound: usize) -> Result<Self, GroupError> {
        let n = table.len();
        if n == 0 {
            return Err(GroupError::Empty);
        }
        let mut mul = Vec::with_capacity(n * n);
        for (a, row) in table.iter().enumerate() {
            if row.len() != n {
                return Err(GroupError::NotSquare {
                    row: a,
                    len: row.len(),
                    n,
                });
            }
            for (b, &value) in row.iter().enumerate() {
                if value >= n {
                    return Err(GroupError::NotClosed { a, b, value });
                }
                mul.push(value);
            }
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|x| mul[e * n + x] == x && mul[x * n + e] == x))
            .ok_or(GroupError::NoIdentity)?;
        let mut inv = Vec::with_capacity(n);
        for x in 0..n {
            let y = (0..n)
                .find(|&y| mul[x * n + y] == identity && mul[y * n + x] == identity)
                .ok_or(GroupError::MissingInverse(x))?;
            inv.push(y);
        }
        let g = FiniteGroup {
            n,
            mul,
            identity,
            inv,
            labels: vec![None; n],
            perms: None,
        };
        if n <= full_bound {
            g.check_associative_full()?;
        } else {
            g.check_associative_light()?;
        }
        Ok(g)
    }

    fn check_associative_full(&self) -> Result<(), GroupError> {
        for a in 0..self.n {
            for b in 0..self.n {
                let ab = self.mul(a, b);
                for c in 0..self.n {
                    if self.mul(ab, c) != self.mul(a, self.mul(b, c)) {
                        return Err(GroupError::NotAssociative { a, b, c });
                    }
                }
            }
        }
        Ok(())
    }

    /// Light's test: checking `(x·s)·y = x·(s·y)` for `s` in a generating set suffices.
    fn check_associative_light(&self) -> Result<(), GroupError> {
        for s in self.magma_generators() {
            for a in 0..self.n {
                let as_ = self.mul(a, s);
                for c in 0..self.n {
                    if self.mul(as_, c) != self.mul(a, self.mul(s, c)) {
                        return Err(GroupError::NotAssociative { a, b: s, c });
                    }
                }
            }
        }
        Ok(())
    }

    /// Greedy generating set of the table viewed as a magma.
    fn magma_generators(&self) -> Vec<usize> {
        let mut seen = vec![false; self.n];
        let mut members: Vec<usize> = Vec::new();
        let mut gens = Vec::new();
        for candidate in 0..self.n {
            if seen[candidate] {
                continue;
            }
            gens.push(candidate);
            let mut queue = VecDeque::from([candidate]);
            seen[candidate] = true;
            while let Some(c) = queue.pop_front() {
                members.push(c);
                for i in 0..members.len() {
                    let d = members[i];
                    for p in [self.mul(c, d), self.mul(d, c)] {
                        if !seen[p] {
                            seen[p] = true;
                            queue.push_back(p);
                        }
                    }
                }
            }
        }
        gens
    }

    /// Closure of a set of permutations of `m` points under composition.
    /// The product `a·b` applies `a` first, then `b`. Element 0 is the identity.
    pub fn from_permutations(m: usize, gens: &[Permutation]) -> Result<Self, GroupError> {
        Self::from_permutations_capped(m, gens, DEFAULT_CLOSURE_CAP)
    }

    pub fn from_permutations_capped(
        m: usize,
        gens: &[Permutation],
        cap: usize,
    ) -> Result<Self, GroupError> {
        for (i, p) in gens.iter().enumerate() {
            let mut hit = vec![false; m];
            if p.len() != m || p.iter().any(|&x| x >= m || std::mem::replace(&mut hit[x], true)) {
                return Err(GroupError::BadPermutation(i));
            }
        }
        let compose = |a: &Permutation, b: &Permutation| -> Permutation { a.iter().map(|&x| b[x]).collect() };
        let mut elems: Vec<Permutation> = vec![(0..m).collect()];
        let mut index: HashMap<Permutation, usize> = HashMap::from([(elems[0].clone(), 0)]);
        let mut i = 0;
        while i < elems.len() {
            for g in gens {
                let p = compose(&elems[i], g);
                if !index.contains_key(&p) {
                    if elems.len() == cap {
                        return Err(GroupError::ClosureCap(cap));
                    }
                    index.insert(p.clone(), elems.len());
                    elems.push(p);
                }
            }
            i += 1;
        }
        let n = elems.len();
        let mut mul = Vec::with_capacity(n * n);
        for a in &elems {
            for b in &elems {
                mul.push(index[&compose(a, b)]);
            }
        }
        let inv = elems
            .iter()
            .map(|a| {
                let mut q = vec![0; m];
                for (x, &y) in a.iter().enumerate() {
                    q[y] = x;
                }
                index[&q]
            })
            .collect();
        Ok(FiniteGroup {
            n,
            mul,
            identity: 0,
            inv,
            labels: vec![None; n],
            perms: Some(elems),
        })
    }

    pub fn trivial() -> Self {
        FiniteGroup {
            n: 1,
            mul: vec![0],
            identity: 0,
            inv: vec![0],
            labels: vec![None],
            perms: None,
        }
    }

    /// Cyclic group of order `n`; element `i` is the `i`-th power of a generator.
    pub fn cyclic(n: usize) -> Self {
        assert!(n > 0, "cyclic group of order 0");
        FiniteGroup {
            n,
            mul: (0..n * n).map(|k| (k / n + k % n) % n).collect(),
            identity: 0,
            inv: (0..n).map(|i| (n - i) % n).collect(),
            labels: vec![None; n],
            perms: None,
        }
    }

    /// `G × C_n`; element `(g, j)` has index `j·|G| + g`.
    pub fn direct_product_cyclic(&self, n: usize) -> Self {
        let c = FiniteGroup::cyclic(n);
        let size = self.n * n;
        let split = |k: usize| (k % self.n, k / self.n);
        let join = |g: usize, j: usize| j * self.n + g;
        let mut mul = Vec::with_capacity(size * size);
        for a in 0..size {
            for b in 0..size {
                let ((ga, ja), (gb, jb)) = (split(a), split(b));
                mul.push(join(self.mul(ga, gb), c.mul(ja, jb)));
            }
        }
        let labels = (0..size)
            .map(|k| {
                let (g, j) = split(k);
                Some(format!("({},{})", self.label(g), j))
            })
            .collect();
        FiniteGroup {
            n: size,
            mul,
            identity: join(self.identity, 0),
            inv: (0..size)
                .map(|k| {
                    let (g, j) = split(k);
                    join(self.inv[g], c.inv[j])
                })
                .collect(),
            labels,
            perms: None,
        }
    }

    /// Wreath product `G ≀ C_k = G^k ⋊ C_k`. The pair `(f, s)` stands for
    /// `f·σ^s`, where `σ f σ⁻¹` shifts coordinates by one place.
    pub fn wreath_cyclic(&self, k: usize) -> Self {
        assert!(k > 0);
        let base = self.n.pow(k as u32);
        let size = base * k;
        let decode = |x: usize| -> (Vec<usize>, usize) {
            let (mut f, s) = (x % base, x / base);
            let mut coords = Vec::with_capacity(k);
            for _ in 0..k {
                coords.push(f % self.n);
                f /= self.n;
            }
            (coords, s)
        };
        let encode = |coords: &[usize], s: usize| -> usize {
            coords.iter().rev().fold(0, |acc, &c| acc * self.n + c) + s * base
        };
        let elems: Vec<(Vec<usize>, usize)> = (0..size).map(decode).collect();
        let mut mul = Vec::with_capacity(size * size);
        for (f, s) in &elems {
            for (g, t) in &elems {
                // f σ^s g σ^t = f·(σ^s g σ^-s)·σ^(s+t)
                let coords: Vec<usize> = (0..k).map(|i| self.mul(f[i], g[(i + k - s) % k])).collect();
                mul.push(encode(&coords, (s + t) % k));
            }
        }
        let identity = encode(&vec![self.identity; k], 0);
        let inv = (0..size)
            .map(|x| (0..size).find(|&y| mul[x * size + y] == identity).expect("group"))
            .collect();
        let labels = elems
            .iter()
            .map(|(f, s)| {
                let coords: Vec<String> = f.iter().map(|&c| self.label(c)).collect();
                let shift = match s {
                    0 => String::new(),
                    1 => "·σ".to_string(),
                    s => format!("·σ^{s}"),
                };
                Some(format!("({}){shift}", coords.join(",")))
            })
            .collect();
        FiniteGroup {
            n: size,
            mul,
            identity,
            inv,
            labels,
            perms: None,
        }
    }

    /// Diagonal copy of `g` inside [`wreath_cyclic`](Self::wreath_cyclic)`(k)`.
    pub fn wreath_diagonal_index(&self, k: usize, g: usize) -> usize {
        (0..k).fold(0, |acc, _| acc * self.n + g)
    }

    pub fn with_labels(mut self, labels: Vec<Option<String>>) -> Result<Self, GroupError> {
        if labels.len() != self.n {
            return Err(GroupError::LabelCount {
                got: labels.len(),
                n: self.n,
            });
        }
        let mut seen = BTreeSet::new();
        for l in labels.iter().flatten() {
            if !seen.insert(l.clone()) {
                return Err(GroupError::DuplicateName(l.clone()));
            }
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn set_label(&mut self, elem: usize, label: impl Into<String>) {
        self.labels[elem] = Some(label.into());
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn is_trivial(&self) -> bool {
        self.n == 1
    }

    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.n + b]
    }

    #[inline]
    pub fn inv(&self, a: usize) -> usize {
        self.inv[a]
    }

    pub fn conj(&self, g: usize, a: usize) -> usize {
        self.mul(self.mul(g, a), self.inv(g))
    }

    pub fn pow(&self, a: usize, e: &BigInt) -> usize {
        let k = reduce_exponent(e, self.element_order(a));
        (0..k).fold(self.identity, |acc, _| self.mul(acc, a))
    }

    pub fn element_order(&self, a: usize) -> usize {
        let mut x = a;
        let mut k = 1;
        while x != self.identity {
            x = self.mul(x, a);
            k += 1;
        }
        k
    }

    pub fn table(&self) -> Vec<Vec<usize>> {
        self.mul.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    pub fn labels(&self) -> &[Option<String>] {
        &self.labels
    }

    pub fn permutations(&self) -> Option<&[Permutation]> {
        self.perms.as_deref()
    }

    /// The element's label. Unlabelled elements print as `1` (the identity),
    /// as `l^k` for a labelled `l` with `|k|` least, or else as `#i`.
    pub fn label(&self, a: usize) -> String {
        match &self.labels[a] {
            Some(l) => l.clone(),
            None if a == self.identity => "1".to_string(),
            None => self.power_label(a).unwrap_or_else(|| format!("#{a}")),
        }
    }

    fn power_label(&self, a: usize) -> Option<String> {
        const WORK: usize = 4096;
        let mut best: Option<(i64, String)> = None;
        let mut work = 0;
        for (l, name) in self.labels.iter().enumerate() {
            let Some(name) = name else { continue };
            let o = self.element_order(l);
            work += o;
            if work > WORK {
                break;
            }
            let mut x = l;
            for k in 1..o {
                if x == a {
                    let k = k as i64;
                    let k = if 2 * k > o as i64 { k - o as i64 } else { k };
                    if best.as_ref().map_or(true, |(b, _)| k.abs() < b.abs()) {
                        best = Some((k, name.clone()));
                    }
                    break;
                }
                x = self.mul(x, l);
            }
        }
        best.map(|(k, name)| format!("{name}^{k}"))
    }

    pub fn find_label(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l.as_deref() == Some(label))
    }

    /// Subgroup generated by `gens`, as a sorted index set.
    pub fn subgroup_generated(&self, gens: &[usize]) -> BTreeSet<usize> {
        let mut seen = BTreeSet::from([self.identity]);
        let mut queue = VecDeque::from([self.identity]);
        while let Some(x) = queue.pop_front() {
            for &g in gens {
                let y = self.mul(x, g);
                if seen.insert(y) {
                    queue.push_back(y);
                }
            }
        }
        seen
    }

    /// Least normal subgroup containing `set`: generated by all conjugates.
    pub fn normal_closure(&self, set: &BTreeSet<usize>) -> Result<BTreeSet<usize>, GroupError> {
        if let Some(&bad) = set.iter().find(|&&s| s >= self.n) {
            return Err(GroupError::UnknownElement(bad));
        }
        let conjugates: BTreeSet<usize> = set
            .iter()
            .flat_map(|&s| (0..self.n).map(move |g| (g, s)))
            .map(|(g, s)| self.conj(g, s))
            .collect();
        Ok(self.subgroup_generated(&conjugates.into_iter().collect::<Vec<_>>()))
    }

    pub fn check_subgroup(&self, set: &BTreeSet<usize>) -> Result<(), GroupError> {
        if let Some(&bad) = set.iter().find(|&&s| s >= self.n) {
            return Err(GroupError::UnknownElement(bad));
        }
        if !set.contains(&self.identity) {
            return Err(GroupError::NotSubgroup("missing the identity".into()));
        }
        for &a in set {
            if !set.contains(&self.inv(a)) {
                return Err(GroupError::NotSubgroup(format!("inverse of {} missing", self.label(a))));
            }
            for &b in set {
                if !set.contains(&self.mul(a, b)) {
                    return Err(GroupError::NotSubgroup(format!(
                        "{}·{} missing",
                        self.label(a),
                        self.label(b)
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn check_normal(&self, set: &BTreeSet<usize>) -> Result<(), GroupError> {
        self.check_subgroup(set)?;
        for &a in set {
            for g in 0..self.n {
                if !set.contains(&self.conj(g, a)) {
                    return Err(GroupError::NotNormal {
                        element: a,
                        conjugator: g,
                    });
                }
            }
        }
        Ok(())
    }

    /// The coset group `G/A` and the projection `G → G/A`. Cosets are numbered
    /// by their least element index; quotient elements are labelled `[rep]`.
    pub fn quotient(&self, normal: &BTreeSet<usize>) -> Result<(FiniteGroup, Vec<usize>), GroupError> {
        self.check_normal(normal)?;
        let mut proj = vec![usize::MAX; self.n];
        let mut reps = Vec::new();
        for g in 0..self.n {
            if proj[g] != usize::MAX {
                continue;
            }
            let id = reps.len();
            reps.push(g);
            for &a in normal {
                proj[self.mul(g, a)] = id;
            }
        }
        let m = reps.len();
        let mut mul = Vec::with_capacity(m * m);
        for &a in &reps {
            for &b in &reps {
                mul.push(proj[self.mul(a, b)]);
            }
        }
        let inv = reps.iter().map(|&a| proj[self.inv(a)]).collect();
        let labels = reps.iter().map(|&r| Some(format!("[{}]", self.label(r)))).collect();
        let q = FiniteGroup {
            n: m,
            mul,
            identity: proj[self.identity],
            inv,
            labels,
            perms: None,
        };
        Ok((q, proj))
    }

    /// The subgroup `set` as a group in its own right, with the inclusion map.
    pub fn subgroup_group(&self, set: &BTreeSet<usize>) -> Result<(FiniteGroup, Vec<usize>), GroupError> {
        self.check_subgroup(set)?;
        let elems: Vec<usize> = set.iter().copied().collect();
        let pos: HashMap<usize, usize> = elems.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        let m = elems.len();
        let mut mul = Vec::with_capacity(m * m);
        for &a in &elems {
            for &b in &elems {
                mul.push(pos[&self.mul(a, b)]);
            }
        }
        let sub = FiniteGroup {
            n: m,
            mul,
            identity: pos[&self.identity],
            inv: elems.iter().map(|&a| pos[&self.inv(a)]).collect(),
            labels: elems.iter().map(|&a| self.labels[a].clone()).collect(),
            perms: self.perms.as_ref().map(|p| elems.iter().map(|&a| p[a].clone()).collect()),
        };
        Ok((sub, elems))
    }

    /// Right regular representation: `g` acts on element indices by `x ↦ x·g`.
    pub fn regular_permutations(&self) -> Vec<Permutation> {
        (0..self.n).map(|g| (0..self.n).map(|x| self.mul(x, g)).collect()).collect()
    }
}

/// Writes a permutation of `0..m` in 1-based cycle notation.
pub fn format_cycles(p: &Permutation) -> String {
    let mut seen = vec![false; p.len()];
    let mut out = String::new();
    for start in 0..p.len() {
        if seen[start] || p[start] == start {
            continue;
        }
        let mut cycle = Vec::new();
        let mut x = start;
        while !seen[x] {
            seen[x] = true;
            cycle.push((x + 1).to_string());
            x = p[x];
        }
        out.push_str(&format!("({})", cycle.join(" ")));
    }
    if out.is_empty() {
        "()".to_string()
    } else {
        out
    }
}

/// A finite presentation `⟨X | R⟩`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Presentation {
    alphabet: Alphabet,
    relators: Vec<Word>,
}

impl Presentation {
    pub fn new(alphabet: Alphabet, relators: Vec<Word>) -> Result<Self, GroupError> {
        for r in &relators {
            alphabet.check(r)?;
        }
        Ok(Presentation { alphabet, relators })
    }

    /// Shorthand for tests and examples: generator names plus relators.
    pub fn from_names(names: &[&str], relators: Vec<Word>) -> Result<Self, GroupError> {
        Self::new(Alphabet::new(names)?, relators)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn rank(&self) -> usize {
        self.alphabet.len()
    }

    pub fn relators(&self) -> &[Word] {
        &self.relators
    }
}

impl fmt::Display for Presentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let gens: Vec<&str> = self.alphabet.syms().iter().map(|s| s.name.as_str()).collect();
        let rels: Vec<String> = self
            .relators
            .iter()
            .map(|r| r.display(&self.alphabet).to_string())
            .collect();
        if rels.is_empty() {
            write!(f, "< {} | >", gens.join(", "))
        } else {
            write!(f, "< {} | {} >", gens.join(", "), rels.join(", "))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum FactorKind {
    Free(Alphabet),
    Finite(FiniteGroup),
    Presented(Presentation),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorSpec {
    pub name: String,
    pub kind: FactorKind,
}

impl FactorSpec {
    pub fn finite(name: impl Into<String>, g: FiniteGroup) -> Self {
        FactorSpec {
            name: name.into(),
            kind: FactorKind::Finite(g),
        }
    }

    pub fn free(name: impl Into<String>, alphabet: Alphabet) -> Self {
        FactorSpec {
            name: name.into(),
            kind: FactorKind::Free(alphabet),
        }
    }

    pub fn as_finite(&self) -> Option<&FiniteGroup> {
        match &self.kind {
            FactorKind::Finite(g) => Some(g),
            _ => None,
        }
    }
}

/// Factors and variables of a free product `G₁ ∗ … ∗ Gₘ ∗ F(X)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FreeProductSpec {
    factors: Vec<FactorSpec>,
    variables: Alphabet,
}

impl FreeProductSpec {
    pub fn new(factors: Vec<FactorSpec>, variables: Alphabet) -> Result<Self, GroupError> {
        let mut names = BTreeSet::new();
        let all = factors
            .iter()
            .map(|f| f.name.as_str())
            .chain(variables.syms().iter().map(|s| s.name.as_str()));
        for name in all {
            if !names.insert(name) {
                return Err(GroupError::DuplicateName(name.to_string()));
            }
        }
        Ok(FreeProductSpec { factors, variables })
    }

    pub fn factors(&self) -> &[FactorSpec] {
        &self.factors
    }

    pub fn factor(&self, i: usize) -> &FactorSpec {
        &self.factors[i]
    }

    pub fn factor_index(&self, name: &str) -> Option<usize> {
        self.factors.iter().position(|f| f.name == name)
    }

    pub fn variables(&self) -> &Alphabet {
        &self.variables
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    /// 0-based permutation from 1-based cycles.
    pub(crate) fn perm(m: usize, cycles: &[&[usize]]) -> Permutation {
        let mut p: Permutation = (0..m).collect();
        for c in cycles {
            for i in 0..c.len() {
                p[c[i] - 1] = c[(i + 1) % c.len()] - 1;
            }
        }
        p
    }

    pub(crate) fn s3() -> FiniteGroup {
        FiniteGroup::from_permutations(3, &[perm(3, &[&[1, 2, 3]]), perm(3, &[&[1, 2]])]).unwrap()
    }

    pub(crate) fn index_of(g: &FiniteGroup, p: &Permutation) -> usize {
        g.permutations().unwrap().iter().position(|q| q == p).unwrap()
    }

    #[test]
    fn validate_table_examples() {
        let c2 = FiniteGroup::validate_table(&[vec![0, 1], vec![1, 0]]).unwrap();
        assert_eq!(c2.identity(), 0);
        assert_eq!(
            FiniteGroup::validate_table(&[vec![0, 1], vec![0, 1]]),
            Err(GroupError::NoIdentity)
        );
        let s3 = s3();
        let checked = FiniteGroup::validate_table(&s3.table()).unwrap();
        assert_eq!(checked.order(), 6);
    }

    #[test]
    fn validate_table_errors() {
        assert!(matches!(
            FiniteGroup::validate_table(&[vec![0, 2], vec![1, 0]]),
            Err(GroupError::NotClosed { a: 0, b: 1, value: 2 })
        ));
        assert!(matches!(
            FiniteGroup::validate_table(&[vec![0, 1]]),
            Err(GroupError::NotSquare { .. })
        ));
        assert_eq!(FiniteGroup::validate_table(&[]), Err(GroupError::Empty));
        // identity 0, but 1·1 = 1 leaves 1 without an inverse
        assert_eq!(
            FiniteGroup::validate_table(&[vec![0, 1], vec![1, 1]]),
            Err(GroupError::MissingInverse(1))
        );
        // a loop of order 5 that is not a group
        let loop5 = vec![
            vec![0, 1, 2, 3, 4],
            vec![1, 0, 3, 4, 2],
            vec![2, 4, 0, 1, 3],
            vec![3, 2, 4, 0, 1],
            vec![4, 3, 1, 2, 0],
        ];
        assert!(matches!(
            FiniteGroup::validate_table(&loop5),
            Err(GroupError::NotAssociative { .. })
        ));
        assert!(matches!(
            FiniteGroup::validate_table_with(&loop5, 0),
            Err(GroupError::NotAssociative { .. })
        ));
    }

    #[test]
    fn light_test_accepts_groups() {
        let g = FiniteGroup::cyclic(5).wreath_cyclic(2);
        assert!(FiniteGroup::validate_table_with(&g.table(), 0).is_ok());
        assert_eq!(g.order(), 50);
    }

    #[test]
    fn from_permutations_examples() {
        let c2 = FiniteGroup::from_permutations(2, &[perm(2, &[&[1, 2]])]).unwrap();
        assert_eq!(c2.order(), 2);
        assert_eq!(s3().order(), 6);
        let trivial = FiniteGroup::from_permutations(3, &[]).unwrap();
        assert_eq!(trivial.order(), 1);
        assert_eq!(
            FiniteGroup::from_permutations_capped(5, &[perm(5, &[&[1, 2, 3, 4, 5]]), perm(5, &[&[1, 2]])], 10),
            Err(GroupError::ClosureCap(10))
        );
        assert_eq!(
            FiniteGroup::from_permutations(2, &[vec![0, 0]]),
            Err(GroupError::BadPermutation(0))
        );
    }

    #[test]
    fn permutation_round_trip() {
        let gens = [perm(4, &[&[1, 2, 3, 4]]), perm(4, &[&[1, 3]])];
        let d8 = FiniteGroup::from_permutations(4, &gens).unwrap();
        assert_eq!(d8.order(), 8);
        assert_eq!(24 % d8.order(), 0);
        for g in &gens {
            let i = index_of(&d8, g);
            assert_eq!(&d8.permutations().unwrap()[i], g);
        }
        assert_eq!(format_cycles(&gens[0]), "(1 2 3 4)");
    }

    /// Oracle: iterate "add all conjugates and products" until nothing changes.
    fn normal_closure_fixpoint(g: &FiniteGroup, s: &BTreeSet<usize>) -> BTreeSet<usize> {
        let mut cur: BTreeSet<usize> = s.clone();
        cur.insert(g.identity());
        loop {
            let mut next = cur.clone();
            for &a in &cur {
                for x in 0..g.order() {
                    next.insert(g.conj(x, a));
                }
                for &b in &cur {
                    next.insert(g.mul(a, b));
                }
            }
            if next == cur {
                return cur;
            }
            cur = next;
        }
    }

    #[test]
    fn normal_closure_examples() {
        let g = s3();
        let id = BTreeSet::from([g.identity()]);
        assert_eq!(g.normal_closure(&id).unwrap(), id);
        let r = index_of(&g, &perm(3, &[&[1, 2, 3]]));
        let a3 = g.normal_closure(&BTreeSet::from([r])).unwrap();
        assert_eq!(a3.len(), 3);
        assert_eq!(a3, normal_closure_fixpoint(&g, &BTreeSet::from([r])));
        let all: BTreeSet<usize> = (0..6).collect();
        assert_eq!(g.normal_closure(&all).unwrap(), all);
        let s = index_of(&g, &perm(3, &[&[1, 2]]));
        assert_eq!(g.normal_closure(&BTreeSet::from([s])).unwrap().len(), 6);
    }

    #[test]
    fn quotient_examples() {
        let g = s3();
        let r = index_of(&g, &perm(3, &[&[1, 2, 3]]));
        let a3 = g.subgroup_generated(&[r]);
        let (q, proj) = g.quotient(&a3).unwrap();
        assert_eq!(q.order(), 2);
        for a in 0..6 {
            for b in 0..6 {
                assert_eq!(proj[g.mul(a, b)], q.mul(proj[a], proj[b]));
            }
            assert_eq!(proj[a] == q.identity(), a3.contains(&a));
        }
        let (same, proj) = g.quotient(&BTreeSet::from([g.identity()])).unwrap();
        assert_eq!(same.order(), 6);
        assert_eq!(proj, (0..6).collect::<Vec<_>>());
        let (triv, _) = g.quotient(&(0..6).collect()).unwrap();
        assert!(triv.is_trivial());
    }

    #[test]
    fn quotient_rejects_non_normal() {
        let g = s3();
        let s = index_of(&g, &perm(3, &[&[1, 2]]));
        let sub = g.subgroup_generated(&[s]);
        assert!(matches!(g.quotient(&sub), Err(GroupError::NotNormal { .. })));
        assert!(matches!(
            g.quotient(&BTreeSet::from([g.identity(), s, index_of(&g, &perm(3, &[&[1, 3]]))])),
            Err(GroupError::NotSubgroup(_))
        ));
    }

    #[test]
    fn wreath_of_c2_is_dihedral_of_order_8() {
        let c2 = FiniteGroup::cyclic(2);
        let w = c2.wreath_cyclic(2);
        assert!(FiniteGroup::validate_table(&w.table()).is_ok());
        let orders: BTreeSet<usize> = (0..8).map(|x| w.element_order(x)).collect();
        assert_eq!(orders, BTreeSet::from([1, 2, 4]));
        let involutions = (0..8).filter(|&x| w.element_order(x) == 2).count();
        assert_eq!(involutions, 5);
    }

    #[test]
    fn direct_product_is_a_group() {
        let g = s3().direct_product_cyclic(4);
        assert_eq!(g.order(), 24);
        assert!(FiniteGroup::validate_table(&g.table()).is_ok());
    }

    #[test]
    fn spec_names_must_be_disjoint() {
        let vars = Alphabet::new(["x", "C"]).unwrap();
        let err = FreeProductSpec::new(vec![FactorSpec::finite("C", FiniteGroup::cyclic(2))], vars);
        assert_eq!(err, Err(GroupError::DuplicateName("C".into())));
    }
}
