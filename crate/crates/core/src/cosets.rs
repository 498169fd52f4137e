//! Coset enumeration and the Reidemeister–Schreier machinery.
//!
//! Letters are encoded as table columns: generator `g` is column `2g`, its
//! inverse is column `2g + 1`, so the inverse column is `col ^ 1`.

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::One;
use serde::Serialize;
use thiserror::Error;

use crate::groups::Presentation;
use crate::zlinalg::IntMatrix;
use crate::words::{Alphabet, Word, WordError, MAX_EXPANSION};

/// Default cap on cosets defined during one enumeration.
pub const DEFAULT_MAX_COSETS: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CosetError {
    #[error("enumeration incomplete after defining {max_cosets} cosets (index may be infinite)")]
    Incomplete { max_cosets: usize },
    #[error("word does not return to the subgroup coset (ends at coset {0})")]
    NotInSubgroup(usize),
    #[error("word uses a generator the presentation does not have")]
    UnknownGenerator,
    #[error("coset table check failed: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Word(#[from] WordError),
}

#[inline]
fn column(gen: usize, positive: bool) -> usize {
    2 * gen + usize::from(!positive)
}

fn relator_columns(pres: &Presentation) -> Result<Vec<Vec<usize>>, CosetError> {
    pres.relators()
        .iter()
        .map(|r| Ok(r.letters(MAX_EXPANSION)?.into_iter().map(|(g, p)| column(g, p)).collect()))
        .collect()
}

/// Longest period looked for when compressing relators.
const MAX_PERIOD: usize = 64;

/// One run `u^reps` of a compressed relator.
#[derive(Debug, Clone)]
struct Run {
    fwd: Vec<usize>,
    /// Columns of `u⁻¹`, i.e. `u` reversed with each letter inverted.
    back: Vec<usize>,
    reps: u64,
    start: u64,
}

impl Run {
    fn len(&self) -> u64 {
        self.fwd.len() as u64 * self.reps
    }
}

/// A relator stored as runs of repeated blocks, so that a scan through
/// `u^k` costs at most `index + 1` passes over `u`.
#[derive(Debug, Clone)]
struct PeriodicRelator {
    runs: Vec<Run>,
    len: u64,
}

impl PeriodicRelator {
    fn new(r: &[usize]) -> Self {
        let mut runs: Vec<Run> = Vec::new();
        let mut plain: Vec<usize> = Vec::new();
        let mut i = 0;
        let mut pos = 0u64;
        let push = |runs: &mut Vec<Run>, u: Vec<usize>, reps: u64, pos: &mut u64| {
            let back = u.iter().rev().map(|c| c ^ 1).collect();
            let run = Run { fwd: u, back, reps, start: *pos };
            *pos += run.len();
            runs.push(run);
        };
        while i < r.len() {
            // best period at i by letters covered
            let (mut best_p, mut best_k) = (1, 1);
            for p in 1..=MAX_PERIOD.min((r.len() - i) / 2) {
                let mut k = 1;
                while i + (k + 1) * p <= r.len() && r[i + k * p..i + (k + 1) * p] == r[i..i + p] {
                    k += 1;
                }
                if k >= 2 && p * k > best_p * best_k {
                    (best_p, best_k) = (p, k);
                }
            }
            if best_k >= 2 && best_p * best_k >= 4 {
                if !plain.is_empty() {
                    push(&mut runs, std::mem::take(&mut plain), 1, &mut pos);
                }
                push(&mut runs, r[i..i + best_p].to_vec(), best_k as u64, &mut pos);
                i += best_p * best_k;
            } else {
                plain.push(r[i]);
                i += 1;
            }
        }
        if !plain.is_empty() {
            push(&mut runs, plain, 1, &mut pos);
        }
        PeriodicRelator { runs, len: pos }
    }

    fn letter(&self, pos: u64) -> usize {
        let k = self.runs.partition_point(|r| r.start <= pos) - 1;
        let r = &self.runs[k];
        r.fwd[((pos - r.start) % r.fwd.len() as u64) as usize]
    }

    /// Follows the relator from `c` through defined entries, taking at most
    /// `limit` letters. Returns the letters taken and the coset reached.
    fn trace_forward(&self, c: usize, limit: u64, get: impl Fn(usize, usize) -> Option<usize>) -> (u64, usize) {
        trace_runs(self.runs.iter().map(|r| (&r.fwd[..], r.reps)), c, limit, &get)
    }

    /// As [`trace_forward`](Self::trace_forward), reading the inverse relator.
    fn trace_backward(&self, c: usize, limit: u64, get: impl Fn(usize, usize) -> Option<usize>) -> (u64, usize) {
        trace_runs(self.runs.iter().rev().map(|r| (&r.back[..], r.reps)), c, limit, &get)
    }
}

fn trace_runs<'a>(
    runs: impl Iterator<Item = (&'a [usize], u64)>,
    mut c: usize,
    limit: u64,
    get: &impl Fn(usize, usize) -> Option<usize>,
) -> (u64, usize) {
    let mut taken = 0u64;
    for (u, reps) in runs {
        let ul = u.len() as u64;
        let left = limit - taken;
        // whole passes allowed, then a partial pass
        let full = reps.min(left / ul);
        let partial = if full < reps { (left - full * ul) as usize } else { 0 };
        let mut starts: Vec<usize> = Vec::new();
        let mut skipped = false;
        let mut t = 0u64;
        while t < full {
            if !skipped {
                if let Some(s) = starts.iter().position(|&x| x == c) {
                    let q = t - s as u64;
                    t += (full - t) / q * q;
                    skipped = true;
                    continue;
                }
                starts.push(c);
            }
            let mut d = c;
            for (j, &col) in u.iter().enumerate() {
                match get(d, col) {
                    Some(x) => d = x,
                    None => return (taken + t * ul + j as u64, d),
                }
            }
            c = d;
            t += 1;
        }
        taken += full * ul;
        if full < reps {
            for &col in &u[..partial] {
                match get(c, col) {
                    Some(x) => {
                        c = x;
                        taken += 1;
                    }
                    None => return (taken, c),
                }
            }
            return (taken, c);
        }
    }
    (taken, c)
}

/// A complete coset table: `action[c][col]` is the coset reached from `c` by a letter.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CosetTable {
    n: usize,
    width: usize,
    action: Vec<usize>,
    presentation: Arc<Presentation>,
}

impl CosetTable {
    /// Coset count, i.e. the index of the subgroup.
    pub fn index(&self) -> usize {
        self.n
    }

    pub fn presentation(&self) -> &Presentation {
        &self.presentation
    }

    pub fn rank(&self) -> usize {
        self.width / 2
    }

    #[inline]
    pub fn act(&self, coset: usize, col: usize) -> usize {
        self.action[coset * self.width + col]
    }

    /// Image of `coset` under generator `gen` (`positive`) or its inverse.
    pub fn act_letter(&self, coset: usize, gen: usize, positive: bool) -> usize {
        self.act(coset, column(gen, positive))
    }

    pub fn trace(&self, coset: usize, w: &Word) -> Result<usize, CosetError> {
        let mut c = coset;
        for s in w.syllables() {
            if s.gen >= self.rank() {
                return Err(CosetError::UnknownGenerator);
            }
            // the permutation of a generator has finite order, so reduce the exponent
            let col = column(s.gen, true);
            let order = self.cycle_len(c, col);
            let k = crate::words::reduce_exponent(&s.exp, order);
            for _ in 0..k {
                c = self.act(c, col);
            }
        }
        Ok(c)
    }

    fn cycle_len(&self, start: usize, col: usize) -> usize {
        let mut c = self.act(start, col);
        let mut k = 1;
        while c != start {
            c = self.act(c, col);
            k += 1;
        }
        k
    }

    /// Rows as lists of targets, columns `x₀, x₀⁻¹, x₁, x₁⁻¹, …`.
    pub fn rows(&self) -> Vec<Vec<usize>> {
        self.action.chunks(self.width).map(|r| r.to_vec()).collect()
    }

    /// Re-checks the table from scratch: completeness, inverse columns, and
    /// every relator closing at every coset.
    pub fn verify(&self) -> Result<(), CosetError> {
        for c in 0..self.n {
            for col in 0..self.width {
                let d = self.act(c, col);
                if d >= self.n {
                    return Err(CosetError::Inconsistent(format!("entry ({c}, {col}) out of range")));
                }
                if self.act(d, col ^ 1) != c {
                    return Err(CosetError::Inconsistent(format!("inverse of ({c}, {col}) broken")));
                }
            }
        }
        for r in self.presentation.relators() {
            for c in 0..self.n {
                if self.trace(c, r)? != c {
                    return Err(CosetError::Inconsistent(format!("relator does not close at coset {c}")));
                }
            }
        }
        Ok(())
    }

    /// Renumbers cosets in breadth-first discovery order from coset 0.
    fn standardized(self) -> CosetTable {
        let mut order = Vec::with_capacity(self.n);
        let mut new_id = vec![usize::MAX; self.n];
        new_id[0] = 0;
        order.push(0);
        let mut i = 0;
        while i < order.len() {
            let c = order[i];
            for col in 0..self.width {
                let d = self.act(c, col);
                if new_id[d] == usize::MAX {
                    new_id[d] = order.len();
                    order.push(d);
                }
            }
            i += 1;
        }
        let mut action = Vec::with_capacity(self.action.len());
        for &c in &order {
            for col in 0..self.width {
                action.push(new_id[self.act(c, col)]);
            }
        }
        CosetTable {
            n: order.len(),
            width: self.width,
            action,
            presentation: self.presentation,
        }
    }
}

/// Working table for HLT enumeration with coincidence handling.
struct Enumerator {
    width: usize,
    table: Vec<Option<usize>>,
    parent: Vec<usize>,
    max: usize,
}

impl Enumerator {
    fn rows(&self) -> usize {
        self.parent.len()
    }

    fn get(&self, c: usize, col: usize) -> Option<usize> {
        self.table[c * self.width + col]
    }

    fn set(&mut self, c: usize, col: usize, v: Option<usize>) {
        self.table[c * self.width + col] = v;
    }

    fn alive(&self, c: usize) -> bool {
        self.parent[c] == c
    }

    fn define(&mut self, c: usize, col: usize) -> Result<(), CosetError> {
        if self.rows() >= self.max {
            return Err(CosetError::Incomplete { max_cosets: self.max });
        }
        let d = self.rows();
        self.parent.push(d);
        self.table.extend(std::iter::repeat(None).take(self.width));
        self.set(c, col, Some(d));
        self.set(d, col ^ 1, Some(c));
        Ok(())
    }

    fn rep(&mut self, c: usize) -> usize {
        let mut root = c;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut x = c;
        while self.parent[x] != root {
            let next = self.parent[x];
            self.parent[x] = root;
            x = next;
        }
        root
    }

    fn merge(&mut self, a: usize, b: usize, queue: &mut Vec<usize>) {
        let (a, b) = (self.rep(a), self.rep(b));
        if a != b {
            let (keep, drop) = (a.min(b), a.max(b));
            self.parent[drop] = keep;
            queue.push(drop);
        }
    }

    fn coincidence(&mut self, a: usize, b: usize) {
        let mut queue = Vec::new();
        self.merge(a, b, &mut queue);
        let mut i = 0;
        while i < queue.len() {
            let dead = queue[i];
            i += 1;
            for col in 0..self.width {
                let Some(d) = self.get(dead, col) else { continue };
                self.set(d, col ^ 1, None);
                let (mu, nu) = (self.rep(dead), self.rep(d));
                if let Some(x) = self.get(mu, col) {
                    self.merge(nu, x, &mut queue);
                } else if let Some(x) = self.get(nu, col ^ 1) {
                    self.merge(mu, x, &mut queue);
                } else {
                    self.set(mu, col, Some(nu));
                    self.set(nu, col ^ 1, Some(mu));
                }
            }
        }
    }

    fn scan_and_fill(&mut self, coset: usize, word: &[usize]) -> Result<(), CosetError> {
        if word.is_empty() {
            return Ok(());
        }
        let (mut f, mut b) = (coset, coset);
        let (mut i, mut j) = (0usize, word.len() as isize - 1);
        loop {
            while (i as isize) <= j {
                match self.get(f, word[i]) {
                    Some(next) => {
                        f = next;
                        i += 1;
                    }
                    None => break,
                }
            }
            if (i as isize) > j {
                if f != b {
                    self.coincidence(f, b);
                }
                return Ok(());
            }
            while j >= i as isize {
                match self.get(b, word[j as usize] ^ 1) {
                    Some(next) => {
                        b = next;
                        j -= 1;
                    }
                    None => break,
                }
            }
            if j < i as isize {
                self.coincidence(f, b);
                return Ok(());
            }
            if j == i as isize {
                self.set(f, word[i], Some(b));
                self.set(b, word[i] ^ 1, Some(f));
                return Ok(());
            }
            self.define(f, word[i])?;
        }
    }
}

/// HLT coset enumeration of `⟨subgens⟩` in the group presented by `pres`.
/// The result is standardized: cosets are numbered in breadth-first discovery
/// order from coset 0 under the column order `x₀, x₀⁻¹, x₁, …`.
pub fn todd_coxeter(pres: &Presentation, subgens: &[Word], max_cosets: usize) -> Result<CosetTable, CosetError> {
    let width = 2 * pres.rank();
    let rels = relator_columns(pres)?;
    let mut subs = Vec::with_capacity(subgens.len());
    for w in subgens {
        pres.alphabet().check(w)?;
        subs.push(w.letters(MAX_EXPANSION)?.into_iter().map(|(g, p)| column(g, p)).collect::<Vec<_>>());
    }
    let mut e = Enumerator {
        width,
        table: vec![None; width],
        parent: vec![0],
        max: max_cosets.max(1),
    };
    for s in &subs {
        e.scan_and_fill(0, s)?;
    }
    let mut c = 0;
    while c < e.rows() {
        for r in &rels {
            if !e.alive(c) {
                break;
            }
            e.scan_and_fill(c, r)?;
        }
        if e.alive(c) {
            for col in 0..width {
                if e.get(c, col).is_none() {
                    e.define(c, col)?;
                }
            }
        }
        c += 1;
    }
    // compact the live cosets
    let live: Vec<usize> = (0..e.rows()).filter(|&c| e.alive(c)).collect();
    let mut pos = vec![usize::MAX; e.rows()];
    for (i, &c) in live.iter().enumerate() {
        pos[c] = i;
    }
    let mut action = Vec::with_capacity(live.len() * width);
    for &c in &live {
        for col in 0..width {
            let d = e.get(c, col).expect("complete after HLT");
            action.push(pos[e.rep(d)]);
        }
    }
    let table = CosetTable {
        n: live.len(),
        width,
        action,
        presentation: Arc::new(pres.clone()),
    }
    .standardized();
    table.verify()?;
    for w in subgens {
        if table.trace(0, w)? != 0 {
            return Err(CosetError::Inconsistent("subgroup generator leaves coset 0".into()));
        }
    }
    Ok(table)
}

/// Coset representatives forming a prefix-closed (Schreier) set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchreierTransversal {
    pub reps: Vec<Word>,
    /// For each coset but 0, the tree edge `(parent, column)` it was reached by.
    pub tree: Vec<Option<(usize, usize)>>,
}

/// Breadth-first spanning tree from coset 0; representatives are shortlex
/// minimal under the column order, hence prefix-closed.
pub fn schreier_transversal(table: &CosetTable) -> SchreierTransversal {
    let n = table.index();
    let mut reps = vec![Word::identity(); n];
    let mut tree = vec![None; n];
    let mut seen = vec![false; n];
    seen[0] = true;
    let mut queue = VecDeque::from([0]);
    while let Some(c) = queue.pop_front() {
        for col in 0..table.width {
            let d = table.act(c, col);
            if !seen[d] {
                seen[d] = true;
                tree[d] = Some((c, col));
                let mut w = reps[c].clone();
                w.push(col / 2, if col % 2 == 0 { BigInt::one() } else { -BigInt::one() });
                reps[d] = w;
                queue.push_back(d);
            }
        }
    }
    SchreierTransversal { reps, tree }
}

/// Generators `y_{t,x}`, their rewriting of relators, and provenance.
#[derive(Debug, Clone)]
pub struct SubgroupPresentation {
    /// `(coset, generator)` for each nontrivial `y_{t,x}`, in coset-major order.
    pub gens: Vec<(usize, usize)>,
    pub alphabet: Alphabet,
    /// Rewritten `t·r·t⁻¹`, one per `(t, r)`, empty words included.
    pub relators: Vec<Word>,
    pub table: CosetTable,
    pub transversal: SchreierTransversal,
    /// `y_index[c * rank + g]` is the letter of `y_{c,g}`, `None` on tree edges.
    y_index: Vec<Option<usize>>,
}

impl SubgroupPresentation {
    /// The word `t·x·(t̄x̄)⁻¹` in `F(X)` that the letter `y` stands for.
    pub fn expand_generator(&self, y: usize) -> Word {
        let (c, g) = self.gens[y];
        let d = self.table.act(c, column(g, true));
        self.transversal.reps[c]
            .multiply(&Word::gen(g))
            .multiply(&self.transversal.reps[d].inverse())
    }

    /// Substitutes every `y` letter by its definition.
    pub fn expand(&self, w: &Word) -> Result<Word, WordError> {
        let images: Vec<Word> = (0..self.gens.len()).map(|y| self.expand_generator(y)).collect();
        w.substitute(&images)
    }

    /// Letter of `y_{coset,gen}`; `None` for tree edges.
    pub fn letter(&self, coset: usize, gen: usize) -> Option<usize> {
        self.y_index[coset * self.table.rank() + gen]
    }

    pub fn to_presentation(&self) -> Presentation {
        Presentation::new(self.alphabet.clone(), self.relators.clone()).expect("letters are in range")
    }
}

fn y_letters(table: &CosetTable, transversal: &SchreierTransversal) -> (Vec<(usize, usize)>, Vec<Option<usize>>) {
    let rank = table.rank();
    let mut gens = Vec::new();
    let mut index = vec![None; table.index() * rank];
    for c in 0..table.index() {
        for g in 0..rank {
            let d = table.act(c, column(g, true));
            let tree_edge = transversal.tree[d] == Some((c, column(g, true)))
                || transversal.tree[c] == Some((d, column(g, false)));
            if !tree_edge {
                index[c * rank + g] = Some(gens.len());
                gens.push((c, g));
            }
        }
    }
    (gens, index)
}

fn rewrite_with(w: &Word, table: &CosetTable, y_index: &[Option<usize>]) -> Result<Word, CosetError> {
    let rank = table.rank();
    let mut out = Word::identity();
    let mut c = 0;
    for (g, positive) in w.letters(MAX_EXPANSION)? {
        if g >= rank {
            return Err(CosetError::UnknownGenerator);
        }
        if positive {
            if let Some(y) = y_index[c * rank + g] {
                out.push(y, BigInt::one());
            }
            c = table.act(c, column(g, true));
        } else {
            c = table.act(c, column(g, false));
            if let Some(y) = y_index[c * rank + g] {
                out.push(y, -BigInt::one());
            }
        }
    }
    if c != 0 {
        return Err(CosetError::NotInSubgroup(c));
    }
    Ok(out)
}

/// Reidemeister rewriting of a word lying in the subgroup.
pub fn rewrite(w: &Word, table: &CosetTable, transversal: &SchreierTransversal) -> Result<Word, CosetError> {
    let (_, index) = y_letters(table, transversal);
    rewrite_with(w, table, &index)
}

fn y_name(table: &CosetTable, transversal: &SchreierTransversal, c: usize, g: usize) -> String {
    let alphabet = table.presentation().alphabet();
    format!(
        "y[{},{}]",
        transversal.reps[c].display(alphabet).to_string().replace(' ', ""),
        alphabet.name(g)
    )
}

/// Schreier presentation of the subgroup whose coset table is `table`.
pub fn subgroup_presentation(table: &CosetTable) -> Result<SubgroupPresentation, CosetError> {
    let transversal = schreier_transversal(table);
    let (gens, y_index) = y_letters(table, &transversal);
    let names: Vec<String> = gens.iter().map(|&(c, g)| y_name(table, &transversal, c, g)).collect();
    let alphabet = Alphabet::new(&names)?;
    let mut relators = Vec::new();
    for t in &transversal.reps {
        for r in table.presentation().relators() {
            let conj = r.conjugate_by(t);
            relators.push(rewrite_with(&conj, table, &y_index)?);
        }
    }
    Ok(SubgroupPresentation {
        gens,
        alphabet,
        relators,
        table: table.clone(),
        transversal,
        y_index,
    })
}

/// Exponent-sum matrix of the Schreier relators, rows and columns in the
/// order of [`subgroup_presentation`]. Relators are traced through the table
/// without being rewritten, skipping whole periods of repeated blocks.
pub fn schreier_exponent_matrix(table: &CosetTable) -> Result<IntMatrix, CosetError> {
    let transversal = schreier_transversal(table);
    let (gens, y_index) = y_letters(table, &transversal);
    let rank = table.rank();
    let rels: Vec<PeriodicRelator> = relator_columns(table.presentation())?.iter().map(|r| PeriodicRelator::new(r)).collect();
    let mut rows = Vec::new();
    for start in 0..table.index() {
        for r in &rels {
            let mut counts = vec![0i128; gens.len()];
            let mut c = start;
            for run in &r.runs {
                let mut snapshots: Vec<(usize, Vec<i128>)> = Vec::new();
                let mut skipped = false;
                let mut t = 0u64;
                while t < run.reps {
                    if !skipped {
                        if let Some(s) = snapshots.iter().position(|(x, _)| *x == c) {
                            let q = t - s as u64;
                            let times = (run.reps - t) / q;
                            for (k, v) in counts.iter_mut().enumerate() {
                                *v += (*v - snapshots[s].1[k]) * times as i128;
                            }
                            t += times * q;
                            skipped = true;
                            continue;
                        }
                        snapshots.push((c, counts.clone()));
                    }
                    for &col in &run.fwd {
                        let g = col / 2;
                        if col % 2 == 0 {
                            if let Some(y) = y_index[c * rank + g] {
                                counts[y] += 1;
                            }
                            c = table.act(c, col);
                        } else {
                            c = table.act(c, col);
                            if let Some(y) = y_index[c * rank + g] {
                                counts[y] -= 1;
                            }
                        }
                    }
                    t += 1;
                }
            }
            if c != start {
                return Err(CosetError::NotInSubgroup(c));
            }
            rows.push(counts.into_iter().map(BigInt::from).collect::<Vec<_>>());
        }
    }
    Ok(IntMatrix::from_rows(gens.len(), &rows))
}

/// Limits for [`low_index_subgroups`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LowIndexOptions {
    pub max_index: usize,
    /// Search nodes allowed before remaining branches are abandoned.
    pub node_budget: Option<u64>,
}

impl LowIndexOptions {
    pub fn new(max_index: usize) -> Self {
        LowIndexOptions {
            max_index,
            node_budget: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct LowIndexStats {
    pub nodes: u64,
    pub found: u64,
    /// Branches cut off by the node budget, by depth of the cut.
    pub abandoned_branches: Vec<(usize, u64)>,
}

impl LowIndexStats {
    pub fn exhausted(&self) -> bool {
        !self.abandoned_branches.is_empty()
    }
}

struct LowIndexSearch<'a, F> {
    width: usize,
    max_index: usize,
    rels: Vec<PeriodicRelator>,
    pres: Arc<Presentation>,
    budget: Option<u64>,
    stats: LowIndexStats,
    seen: HashSet<Vec<usize>>,
    stopped: bool,
    visit: &'a mut F,
}

#[derive(Clone)]
struct Partial {
    n: usize,
    table: Vec<Option<usize>>,
}

impl Partial {
    fn get(&self, width: usize, c: usize, col: usize) -> Option<usize> {
        self.table[c * width + col]
    }

    /// Sets an entry and its inverse; false on a clash.
    fn assign(&mut self, width: usize, c: usize, col: usize, d: usize) -> bool {
        match (self.table[c * width + col], self.table[d * width + (col ^ 1)]) {
            (None, None) => {
                self.table[c * width + col] = Some(d);
                self.table[d * width + (col ^ 1)] = Some(c);
                true
            }
            (Some(x), Some(y)) => x == d && y == c,
            _ => false,
        }
    }
}

impl<F: FnMut(CosetTable) -> bool> LowIndexSearch<'_, F> {
    /// Scans every relator from every coset, making forced deductions, until
    /// nothing changes. False if some scan closes inconsistently.
    fn propagate(&self, p: &mut Partial) -> bool {
        let w = self.width;
        loop {
            let mut changed = false;
            for c in 0..p.n {
                for r in &self.rels {
                    if r.len == 0 {
                        continue;
                    }
                    let (i, f) = r.trace_forward(c, r.len, |x, col| p.get(w, x, col));
                    if i == r.len {
                        if f != c {
                            return false;
                        }
                        continue;
                    }
                    let (back, b) = r.trace_backward(c, r.len - i, |x, col| p.get(w, x, col));
                    let j = r.len - back;
                    if j == i + 1 {
                        if !p.assign(w, f, r.letter(i), b) {
                            return false;
                        }
                        changed = true;
                    } else if j == i {
                        // both scans meet across the gap at different cosets
                        if f != b {
                            return false;
                        }
                    }
                }
            }
            if !changed {
                return true;
            }
        }
    }

    fn search(&mut self, p: Partial, depth: usize) {
        if self.stopped {
            return;
        }
        self.stats.nodes += 1;
        if let Some(budget) = self.budget {
            if self.stats.nodes > budget {
                match self.stats.abandoned_branches.iter_mut().find(|(d, _)| *d == depth) {
                    Some((_, k)) => *k += 1,
                    None => self.stats.abandoned_branches.push((depth, 1)),
                }
                return;
            }
        }
        let w = self.width;
        let gap = (0..p.n * w).find(|&k| p.table[k].is_none());
        let Some(k) = gap else {
            let action: Vec<usize> = p.table[..p.n * w].iter().map(|x| x.expect("complete")).collect();
            if self.seen.insert(action.clone()) {
                self.stats.found += 1;
                self.stopped = !(self.visit)(CosetTable {
                    n: p.n,
                    width: w,
                    action,
                    presentation: self.pres.clone(),
                });
            }
            return;
        };
        let (c, col) = (k / w, k % w);
        for d in 0..p.n {
            if p.get(w, d, col ^ 1).is_some() {
                continue;
            }
            let mut q = p.clone();
            if q.assign(w, c, col, d) && self.propagate(&mut q) {
                self.search(q, depth + 1);
            }
        }
        if p.n < self.max_index {
            let mut q = p;
            q.n += 1;
            if q.assign(w, c, col, q.n - 1) && self.propagate(&mut q) {
                self.search(q, depth + 1);
            }
        }
    }
}

/// Streams every subgroup of index at most `opts.max_index` as a standardized
/// coset table, in a fixed depth-first order. The search stops as soon as
/// `visit` returns false.
pub fn for_each_low_index_subgroup<F: FnMut(CosetTable) -> bool>(
    pres: &Presentation,
    opts: LowIndexOptions,
    mut visit: F,
) -> Result<LowIndexStats, CosetError> {
    let width = 2 * pres.rank();
    let max_index = opts.max_index.max(1);
    let mut search = LowIndexSearch {
        width,
        max_index,
        rels: relator_columns(pres)?.iter().map(|r| PeriodicRelator::new(r)).collect(),
        pres: Arc::new(pres.clone()),
        budget: opts.node_budget,
        stats: LowIndexStats::default(),
        seen: HashSet::new(),
        stopped: false,
        visit: &mut visit,
    };
    let root = Partial {
        n: 1,
        table: vec![None; max_index * width],
    };
    let mut root = root;
    if search.propagate(&mut root) {
        search.search(root, 0);
    }
    Ok(search.stats)
}

/// All subgroups of index at most `max_index`, sorted by index and then by table.
pub fn low_index_subgroups(pres: &Presentation, max_index: usize) -> Result<Vec<CosetTable>, CosetError> {
    Ok(low_index_subgroups_with(pres, LowIndexOptions::new(max_index))?.0)
}

pub fn low_index_subgroups_with(
    pres: &Presentation,
    opts: LowIndexOptions,
) -> Result<(Vec<CosetTable>, LowIndexStats), CosetError> {
    let mut out = Vec::new();
    let stats = for_each_low_index_subgroup(pres, opts, |t| {
        out.push(t);
        true
    })?;
    out.sort_by(|a, b| (a.n, &a.action).cmp(&(b.n, &b.action)));
    for t in &out {
        t.verify()?;
    }
    Ok((out, stats))
}

/// Generators of the subgroup of a coset table, as Schreier generators.
pub fn subgroup_generators(table: &CosetTable) -> Vec<Word> {
    let transversal = schreier_transversal(table);
    let (gens, _) = y_letters(table, &transversal);
    let mut out: Vec<Word> = Vec::new();
    let mut seen = BTreeSet::new();
    for (c, g) in gens {
        let d = table.act(c, column(g, true));
        let w = transversal.reps[c]
            .multiply(&Word::gen(g))
            .multiply(&transversal.reps[d].inverse());
        if seen.insert(w.clone()) {
            out.push(w);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::FiniteGroup;

    const X: usize = 0;
    const Y: usize = 1;

    fn pres(names: &[&str], rels: Vec<Word>) -> Presentation {
        Presentation::from_names(names, rels).unwrap()
    }

    fn w(raw: &[(usize, i64)]) -> Word {
        Word::reduce(raw.iter().copied())
    }

    #[test]
    fn todd_coxeter_examples() {
        let p = pres(&["x"], vec![w(&[(X, 4)])]);
        assert_eq!(todd_coxeter(&p, &[w(&[(X, 2)])], 1000).unwrap().index(), 2);
        let f2 = pres(&["x", "y"], vec![]);
        assert_eq!(todd_coxeter(&f2, &[w(&[(X, 1)]), w(&[(Y, 1)])], 1000).unwrap().index(), 1);
        let a4 = pres(&["x", "y"], vec![w(&[(X, 2)]), w(&[(Y, 3)]), w(&[(X, 1), (Y, 1)]).pow(&3.into()).unwrap()]);
        assert_eq!(todd_coxeter(&a4, &[], 1000).unwrap().index(), 12);
    }

    #[test]
    fn todd_coxeter_matches_permutation_realization_of_a4() {
        let a4 = pres(&["x", "y"], vec![w(&[(X, 2)]), w(&[(Y, 3)]), w(&[(X, 1), (Y, 1)]).pow(&3.into()).unwrap()]);
        let t = todd_coxeter(&a4, &[], 1000).unwrap();
        // x = (1 2)(3 4), y = (1 2 3): xy has order 3 and they generate A4
        let x = vec![1, 0, 3, 2];
        let y = vec![1, 2, 0, 3];
        let g = FiniteGroup::from_permutations(4, &[x, y]).unwrap();
        assert_eq!(g.order(), t.index());
    }

    #[test]
    fn todd_coxeter_reports_incomplete() {
        let f2 = pres(&["x", "y"], vec![]);
        assert_eq!(
            todd_coxeter(&f2, &[w(&[(X, 1)])], 50),
            Err(CosetError::Incomplete { max_cosets: 50 })
        );
    }

    #[test]
    fn todd_coxeter_handles_coincidences() {
        // ⟨x, y | x^3, y^3, (xy)^3... ⟩ variants that force collapses
        let p = pres(&["x", "y"], vec![w(&[(X, 1), (Y, 1), (X, -1), (Y, -2)]), w(&[(Y, 1), (X, 1), (Y, -1), (X, -2)])]);
        // this presentation defines the trivial group
        let t = todd_coxeter(&p, &[], 10_000).unwrap();
        assert_eq!(t.index(), 1);
    }

    #[test]
    fn transversal_examples() {
        let p = pres(&["x"], vec![w(&[(X, 4)])]);
        let t = todd_coxeter(&p, &[w(&[(X, 2)])], 100).unwrap();
        let tr = schreier_transversal(&t);
        assert_eq!(tr.reps, vec![Word::identity(), w(&[(X, 1)])]);

        let one = todd_coxeter(&p, &[w(&[(X, 1)])], 100).unwrap();
        assert_eq!(schreier_transversal(&one).reps, vec![Word::identity()]);

        let f2 = pres(&["x", "y"], vec![]);
        let t = todd_coxeter(&f2, &[w(&[(X, 1)]), w(&[(Y, 2)]), w(&[(Y, 1), (X, 1), (Y, -1)])], 100).unwrap();
        assert_eq!(t.index(), 2);
        assert_eq!(schreier_transversal(&t).reps, vec![Word::identity(), w(&[(Y, 1)])]);
    }

    #[test]
    fn rewrite_examples() {
        let p = pres(&["x"], vec![w(&[(X, 4)])]);
        let t = todd_coxeter(&p, &[w(&[(X, 2)])], 100).unwrap();
        let tr = schreier_transversal(&t);
        let sp = subgroup_presentation(&t).unwrap();
        assert_eq!(sp.gens, vec![(1, X)]);
        assert_eq!(rewrite(&w(&[(X, 4)]), &t, &tr).unwrap(), w(&[(0, 2)]));
        assert!(rewrite(&Word::identity(), &t, &tr).unwrap().is_identity());
        assert_eq!(rewrite(&w(&[(X, 1)]), &t, &tr), Err(CosetError::NotInSubgroup(1)));
        for y in 0..sp.gens.len() {
            let def = sp.expand_generator(y);
            assert_eq!(rewrite(&def, &t, &tr).unwrap(), Word::gen(y));
        }
    }

    #[test]
    fn subgroup_presentation_examples() {
        let f2 = pres(&["x", "y"], vec![]);
        let t = todd_coxeter(&f2, &[w(&[(X, 1)]), w(&[(Y, 2)]), w(&[(Y, 1), (X, 1), (Y, -1)])], 100).unwrap();
        let sp = subgroup_presentation(&t).unwrap();
        assert_eq!((sp.gens.len(), sp.relators.len()), (3, 0));

        let p = pres(&["x"], vec![w(&[(X, 4)])]);
        let t = todd_coxeter(&p, &[w(&[(X, 2)])], 100).unwrap();
        let sp = subgroup_presentation(&t).unwrap();
        assert_eq!(sp.gens.len(), 1);
        assert_eq!(sp.relators, vec![w(&[(0, 2)]), w(&[(0, 2)])]);

        let p = pres(&["x"], vec![w(&[(X, 2)])]);
        let t = todd_coxeter(&p, &[], 100).unwrap();
        let sp = subgroup_presentation(&t).unwrap();
        assert_eq!(sp.gens, vec![(1, X)]);
        assert_eq!(sp.relators, vec![w(&[(0, 1)]), w(&[(0, 1)])]);
        assert_eq!(sp.alphabet.name(0), "y[x,x]");
    }

    #[test]
    fn empty_rewrites_are_kept() {
        // ⟨x | x⟩ with the trivial subgroup has index 1; x rewrites to y[1,x]
        // and ⟨x, y | y⟩ over ⟨x⟩: y is a loop at coset 0 that stays nontrivial.
        let p = pres(&["x", "y"], vec![w(&[(X, 1), (X, -1)]), w(&[(Y, 1)])]);
        let t = todd_coxeter(&p, &[w(&[(X, 1)])], 100).unwrap();
        let sp = subgroup_presentation(&t).unwrap();
        assert_eq!(sp.relators.len(), 2);
        assert!(sp.relators[0].is_identity());
    }

    #[test]
    fn low_index_examples() {
        let p = pres(&["x"], vec![w(&[(X, 2)])]);
        assert_eq!(low_index_subgroups(&p, 2).unwrap().len(), 2);
        let f1 = pres(&["x"], vec![]);
        let tables = low_index_subgroups(&f1, 3).unwrap();
        assert_eq!(tables.iter().map(|t| t.index()).collect::<Vec<_>>(), vec![1, 2, 3]);
        let a4 = pres(&["x", "y"], vec![w(&[(X, 2)]), w(&[(Y, 3)]), w(&[(X, 1), (Y, 1)]).pow(&3.into()).unwrap()]);
        assert_eq!(low_index_subgroups(&a4, 1).unwrap().len(), 1);
    }

    /// Hall's recurrence for the number of index-n subgroups of F_r.
    fn hall(r: u32, max: usize) -> Vec<u128> {
        let fact = |n: usize| (1..=n as u128).product::<u128>();
        let mut a = vec![0u128; max + 1];
        for n in 1..=max {
            let mut v = n as u128 * fact(n).pow(r - 1);
            for k in 1..n {
                v -= fact(n - k).pow(r - 1) * a[k];
            }
            a[n] = v;
        }
        a
    }

    #[test]
    fn low_index_counts_match_hall_formula() {
        for (r, max) in [(1u32, 6usize), (2, 5)] {
            let names: Vec<String> = (0..r).map(|i| format!("g{i}")).collect();
            let names: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
            let tables = low_index_subgroups(&pres(&names, vec![]), max).unwrap();
            let expected = hall(r, max);
            for n in 1..=max {
                let got = tables.iter().filter(|t| t.index() == n).count() as u128;
                assert_eq!(got, expected[n], "F_{r} index {n}");
            }
        }
    }

    #[test]
    fn low_index_matches_brute_force_on_s3() {
        // ⟨x, y | x^2, y^3, (xy)^2⟩ ≅ S3: 1 + 3 + 1 + 0 + 0 + 1 subgroups by index
        let s3 = pres(&["x", "y"], vec![w(&[(X, 2)]), w(&[(Y, 3)]), w(&[(X, 1), (Y, 1)]).pow(&2.into()).unwrap()]);
        let tables = low_index_subgroups(&s3, 6).unwrap();
        let counts: Vec<usize> = (1..=6).map(|n| tables.iter().filter(|t| t.index() == n).count()).collect();
        assert_eq!(counts, vec![1, 1, 3, 0, 0, 1]);
    }

    #[test]
    fn low_index_tables_agree_with_todd_coxeter() {
        let p = pres(&["x", "y"], vec![w(&[(X, 2)]), w(&[(Y, 3)])]);
        for t in low_index_subgroups(&p, 4).unwrap() {
            let gens = subgroup_generators(&t);
            let again = todd_coxeter(&p, &gens, 10_000).unwrap();
            assert_eq!(again, t);
        }
    }

    #[test]
    fn node_budget_is_reported() {
        let f2 = pres(&["x", "y"], vec![]);
        let (tables, stats) = low_index_subgroups_with(
            &f2,
            LowIndexOptions {
                max_index: 4,
                node_budget: Some(10),
            },
        )
        .unwrap();
        assert!(stats.exhausted());
        assert!(tables.len() < 1 + 3 + 13 + 71);
    }

    #[test]
    fn schreier_round_trip_and_nontriviality() {
        let p = pres(&["x", "y"], vec![w(&[(X, 2)]), w(&[(X, 1), (Y, 1), (X, 1), (Y, -1)])]);
        for t in low_index_subgroups(&p, 4).unwrap() {
            let sp = subgroup_presentation(&t).unwrap();
            let tr = &sp.transversal;
            for c in 0..t.index() {
                let mut w = tr.reps[c].clone();
                w = w.multiply(&Word::identity());
                assert_eq!(t.trace(0, &w).unwrap(), c);
                // prefix-closed
                let letters = w.letters(100).unwrap();
                for i in 0..letters.len() {
                    let prefix = Word::from_letters(letters[..i].iter().copied());
                    assert!(tr.reps.contains(&prefix));
                }
                for g in 0..t.rank() {
                    let d = t.act_letter(c, g, true);
                    let def = tr.reps[c].multiply(&Word::gen(g)).multiply(&tr.reps[d].inverse());
                    assert_eq!(def.is_identity(), sp.letter(c, g).is_none());
                }
            }
            let mut k = 0;
            for rep in &tr.reps {
                for r in p.relators() {
                    assert_eq!(sp.expand(&sp.relators[k]).unwrap(), r.conjugate_by(rep));
                    k += 1;
                }
            }
        }
    }
}

#[cfg(test)]
mod periodic_tests {
    use super::*;
    use proptest::prelude::*;

    fn naive(r: &[usize], c: usize, limit: u64, get: impl Fn(usize, usize) -> Option<usize>) -> (u64, usize) {
        let mut c = c;
        for (i, &col) in r.iter().take(limit as usize).enumerate() {
            match get(c, col) {
                Some(x) => c = x,
                None => return (i as u64, c),
            }
        }
        (limit.min(r.len() as u64), c)
    }

    fn relator() -> impl Strategy<Value = Vec<usize>> {
        prop::collection::vec((prop::collection::vec(0usize..4, 1..4), 1usize..12), 1..5)
            .prop_map(|parts| parts.into_iter().flat_map(|(u, k)| u.repeat(k)).collect())
    }

    proptest! {
        #[test]
        fn periodic_scan_matches_letter_scan(
            r in relator(),
            n in 1usize..6,
            entries in prop::collection::vec(prop::option::weighted(0.85, 0usize..6), 24),
            c in 0usize..6,
            cut in 0u64..200,
        ) {
            let get = |x: usize, col: usize| entries[(x % n) * 4 + col].map(|d| d % n);
            let c = c % n;
            let p = PeriodicRelator::new(&r);
            prop_assert_eq!(p.len, r.len() as u64);
            for (i, &col) in r.iter().enumerate() {
                prop_assert_eq!(p.letter(i as u64), col);
            }
            let limit = cut.min(p.len);
            prop_assert_eq!(p.trace_forward(c, limit, get), naive(&r, c, limit, get));
            let inv: Vec<usize> = r.iter().rev().map(|l| l ^ 1).collect();
            prop_assert_eq!(p.trace_backward(c, limit, get), naive(&inv, c, limit, get));
        }
    }

    #[test]
    fn schreier_matrix_matches_rewritten_relators() {
        use crate::equations::word_exponent_matrix;
        let comm = Word::reduce([(0, -1), (1, -1), (0, 1), (1, 1)]);
        let xy = Word::reduce([(0, 1), (1, 1)]);
        let presentations = [
            vec![comm.pow(&BigInt::from(5)).unwrap().multiply(&Word::power_of(0, 3))],
            vec![xy.pow(&BigInt::from(7)).unwrap(), Word::power_of(1, 4)],
            vec![Word::power_of(0, 2022).multiply(&comm)],
        ];
        for rels in presentations {
            let p = Presentation::from_names(&["x", "y"], rels).unwrap();
            let mut checked = 0;
            for_each_low_index_subgroup(&p, LowIndexOptions::new(4), |t| {
                let sp = subgroup_presentation(&t).unwrap();
                let slow = word_exponent_matrix(&sp.relators, &sp.alphabet).matrix;
                assert_eq!(schreier_exponent_matrix(&t).unwrap(), slow);
                checked += 1;
                true
            })
            .unwrap();
            assert!(checked > 1);
        }
    }
}
