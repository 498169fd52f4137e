//! Exhaustive solution search in finite groups and in a fixed catalogue of
//! finite overgroups.

use num_bigint::BigInt;
use serde::Serialize;
use thiserror::Error;

use crate::groups::{FiniteGroup, GroupError};
use crate::mixedwords::{Element, EquationSystem, MixedWord, Syllable};

/// Largest target order searched exhaustively.
pub const DEFAULT_ORDER_CAP: usize = 10_000;
/// Default node budget shared by all catalogue members.
pub const DEFAULT_BUDGET: u64 = 100_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolverError {
    #[error("variable {0} is unassigned")]
    Unassigned(usize),
    #[error("the system must be over a single finite factor")]
    NotFiniteSystem,
    #[error("constant {0} is not an element of the embedding's source")]
    BadConstant(usize),
    #[error("embedding `{name}` is not an injective homomorphism: {reason}")]
    BadEmbedding { name: String, reason: String },
    #[error("search exceeded its budget of {0} nodes")]
    BudgetExceeded(u64),
    #[error(transparent)]
    Group(#[from] GroupError),
}

/// An injective homomorphism `source → target`, given on element indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Embedding {
    pub name: String,
    pub source: FiniteGroup,
    pub target: FiniteGroup,
    pub map: Vec<usize>,
}

impl Embedding {
    pub fn new(name: impl Into<String>, source: FiniteGroup, target: FiniteGroup, map: Vec<usize>) -> Result<Self, SolverError> {
        let e = Embedding {
            name: name.into(),
            source,
            target,
            map,
        };
        e.verify()?;
        Ok(e)
    }

    pub fn identity(name: impl Into<String>, g: &FiniteGroup) -> Self {
        Embedding {
            name: name.into(),
            source: g.clone(),
            target: g.clone(),
            map: (0..g.order()).collect(),
        }
    }

    /// Checks injectivity and the homomorphism law over the full tables.
    pub fn verify(&self) -> Result<(), SolverError> {
        let bad = |reason: String| SolverError::BadEmbedding {
            name: self.name.clone(),
            reason,
        };
        let (s, t) = (&self.source, &self.target);
        if self.map.len() != s.order() || self.map.iter().any(|&x| x >= t.order()) {
            return Err(bad("map has the wrong shape".into()));
        }
        let mut seen = vec![false; t.order()];
        for (a, &x) in self.map.iter().enumerate() {
            if std::mem::replace(&mut seen[x], true) {
                return Err(bad(format!("not injective at {}", s.label(a))));
            }
        }
        for a in 0..s.order() {
            for b in 0..s.order() {
                if self.map[s.mul(a, b)] != t.mul(self.map[a], self.map[b]) {
                    return Err(bad(format!("fails on ({}, {})", s.label(a), s.label(b))));
                }
            }
        }
        Ok(())
    }
}

fn finite_factor(sys: &EquationSystem) -> Result<&FiniteGroup, SolverError> {
    match sys.spec().factors() {
        [f] => f.as_finite().ok_or(SolverError::NotFiniteSystem),
        _ => Err(SolverError::NotFiniteSystem),
    }
}

/// Left-to-right product in the target, constants mapped through `emb`.
pub fn evaluate(w: &MixedWord, emb: &Embedding, assignment: &[Option<usize>]) -> Result<usize, SolverError> {
    let t = &emb.target;
    let mut acc = t.identity();
    for s in w.syllables() {
        let e = match s {
            Syllable::Constant {
                elem: Element::Finite(i), ..
            } => *emb.map.get(*i).ok_or(SolverError::BadConstant(*i))?,
            Syllable::Constant { .. } => return Err(SolverError::NotFiniteSystem),
            Syllable::Var { gen, exp } => {
                let v = assignment.get(*gen).copied().flatten().ok_or(SolverError::Unassigned(*gen))?;
                t.pow(v, exp)
            }
        };
        acc = t.mul(acc, e);
    }
    Ok(acc)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Solution {
    pub member: String,
    /// Target element per variable; variables absent from the system get the identity.
    pub assignment: Vec<usize>,
    /// Target labels of the assignment, for reports.
    pub labels: Vec<String>,
}

impl Solution {
    /// Re-evaluates every equation from scratch.
    pub fn verify(&self, sys: &EquationSystem, emb: &Embedding) -> Result<bool, SolverError> {
        let a: Vec<Option<usize>> = self.assignment.iter().map(|&x| Some(x)).collect();
        for w in sys.equations() {
            if evaluate(w, emb, &a)? != emb.target.identity() {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// An equation compiled to target elements and variable powers.
enum Step {
    Const(usize),
    Var(usize, BigInt),
}

/// First solution in index order, or `None` after exhausting the space.
pub fn solve_in(sys: &EquationSystem, emb: &Embedding, budget: u64) -> Result<Option<Solution>, SolverError> {
    search(sys, emb, budget).map(|(s, _)| s)
}

/// The search behind [`solve_in`], also returning the nodes visited.
fn search(sys: &EquationSystem, emb: &Embedding, budget: u64) -> Result<(Option<Solution>, u64), SolverError> {
    let g = finite_factor(sys)?;
    if g != &emb.source {
        return Err(SolverError::BadEmbedding {
            name: emb.name.clone(),
            reason: "source differs from the system's group".into(),
        });
    }
    let nvars = sys.spec().variables().len();
    let t = &emb.target;
    let mut occurs = vec![false; nvars];
    let mut compiled = Vec::with_capacity(sys.len());
    for w in sys.equations() {
        let mut steps = Vec::new();
        for s in w.syllables() {
            match s {
                Syllable::Constant {
                    elem: Element::Finite(i), ..
                } => steps.push(Step::Const(*emb.map.get(*i).ok_or(SolverError::BadConstant(*i))?)),
                Syllable::Constant { .. } => return Err(SolverError::NotFiniteSystem),
                Syllable::Var { gen, exp } => {
                    occurs[*gen] = true;
                    steps.push(Step::Var(*gen, exp.clone()));
                }
            }
        }
        compiled.push(steps);
    }
    let order: Vec<usize> = (0..nvars).filter(|&v| occurs[v]).collect();
    let mut depth_of = vec![usize::MAX; nvars];
    for (d, &v) in order.iter().enumerate() {
        depth_of[v] = d;
    }
    // equations become checkable once their last variable in search order is set
    let mut due: Vec<Vec<usize>> = vec![Vec::new(); order.len() + 1];
    for (i, steps) in compiled.iter().enumerate() {
        let last = steps
            .iter()
            .filter_map(|s| match s {
                Step::Var(v, _) => Some(depth_of[*v] + 1),
                Step::Const(_) => None,
            })
            .max()
            .unwrap_or(0);
        due[last].push(i);
    }
    let eval = |steps: &[Step], vals: &[usize]| {
        steps.iter().fold(t.identity(), |acc, s| match s {
            Step::Const(c) => t.mul(acc, *c),
            Step::Var(v, e) => t.mul(acc, t.pow(vals[*v], e)),
        })
    };
    let holds = |level: usize, vals: &[usize]| due[level].iter().all(|&i| eval(&compiled[i], vals) == t.identity());

    let mut vals = vec![t.identity(); nvars];
    if !holds(0, &vals) {
        return Ok((None, 0));
    }
    let mut nodes = 0u64;
    // iterative DFS: next[d] is the next candidate for order[d]
    let mut next = vec![0usize; order.len()];
    let mut d = 0;
    let found = loop {
        if d == order.len() {
            break true;
        }
        if next[d] == t.order() {
            next[d] = 0;
            if d == 0 {
                break false;
            }
            d -= 1;
            continue;
        }
        nodes += 1;
        if nodes > budget {
            return Err(SolverError::BudgetExceeded(budget));
        }
        vals[order[d]] = next[d];
        next[d] += 1;
        if holds(d + 1, &vals) {
            d += 1;
        }
    };
    if !found {
        return Ok((None, nodes));
    }
    let labels = vals.iter().map(|&x| t.label(x)).collect();
    let solution = Solution {
        member: emb.name.clone(),
        assignment: vals,
        labels,
    };
    Ok((Some(solution), nodes))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MemberKind {
    Identity,
    Direct { n: usize },
    Wreath { k: usize },
    Regular,
    Registered { index: usize },
}

/// A catalogue entry, built only when it is searched.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MemberPlan {
    pub name: String,
    /// Target order, when it fits in `usize`.
    pub order: Option<usize>,
    pub kind: MemberKind,
}

#[derive(Debug, Clone, Serialize)]
pub struct CataloguePlan {
    pub members: Vec<MemberPlan>,
    /// Members left out because their order exceeds the cap.
    pub skipped: Vec<String>,
}

fn factorial(n: usize) -> Option<usize> {
    (1..=n).try_fold(1usize, |acc, k| acc.checked_mul(k))
}

/// Tiers: 0 the group itself; 1 adds `G × C_n` for `n = 2..=12`; 2 adds
/// `G ≀ C_k` for `k = 2, 3, 4` with the diagonal embedding; 3 adds the regular
/// embedding into `S_|G|`. Registered embeddings always come last.
pub fn catalogue_plan(g: &FiniteGroup, name: &str, depth: usize, registered: &[Embedding], order_cap: usize) -> CataloguePlan {
    let n = g.order();
    let mut candidates = vec![(name.to_string(), Some(n), MemberKind::Identity)];
    if depth >= 1 {
        for k in 2..=12 {
            candidates.push((format!("direct({name},C{k})"), n.checked_mul(k), MemberKind::Direct { n: k }));
        }
    }
    if depth >= 2 {
        for k in 2..=4 {
            let order = n.checked_pow(k as u32).and_then(|p| p.checked_mul(k));
            candidates.push((format!("wreath({name},C{k})"), order, MemberKind::Wreath { k }));
        }
    }
    if depth >= 3 {
        candidates.push((format!("regular({name},S{n})"), factorial(n), MemberKind::Regular));
    }
    for (i, e) in registered.iter().enumerate() {
        candidates.push((e.name.clone(), Some(e.target.order()), MemberKind::Registered { index: i }));
    }
    let mut plan = CataloguePlan {
        members: Vec::new(),
        skipped: Vec::new(),
    };
    for (name, order, kind) in candidates {
        match order {
            Some(o) if o <= order_cap => plan.members.push(MemberPlan { name, order, kind }),
            _ => plan.skipped.push(format!("{name}: order above cap {order_cap}")),
        }
    }
    plan
}

impl MemberPlan {
    pub fn build(&self, g: &FiniteGroup, registered: &[Embedding]) -> Result<Embedding, SolverError> {
        let emb = match self.kind {
            MemberKind::Identity => Embedding::identity(&self.name, g),
            MemberKind::Direct { n } => Embedding {
                name: self.name.clone(),
                source: g.clone(),
                target: g.direct_product_cyclic(n),
                map: (0..g.order()).collect(),
            },
            MemberKind::Wreath { k } => Embedding {
                name: self.name.clone(),
                source: g.clone(),
                target: g.wreath_cyclic(k),
                map: (0..g.order()).map(|x| g.wreath_diagonal_index(k, x)).collect(),
            },
            MemberKind::Regular => {
                let n = g.order();
                let regular = g.regular_permutations();
                let mut gens = Vec::new();
                if n >= 2 {
                    let mut swap: Vec<usize> = (0..n).collect();
                    swap.swap(0, 1);
                    gens.push(swap);
                    gens.push((0..n).map(|i| (i + 1) % n).collect());
                }
                let target = FiniteGroup::from_permutations_capped(n, &gens, self.order.unwrap_or(1).max(1))?;
                let perms = target.permutations().expect("permutation group");
                let map = regular
                    .iter()
                    .map(|p| perms.iter().position(|q| q == p).expect("S_n contains every permutation"))
                    .collect();
                Embedding {
                    name: self.name.clone(),
                    source: g.clone(),
                    target,
                    map,
                }
            }
            MemberKind::Registered { index } => registered[index].clone(),
        };
        emb.verify()?;
        Ok(emb)
    }
}

/// All catalogue members, built eagerly.
pub fn overgroup_catalogue(g: &FiniteGroup, name: &str, depth: usize) -> Result<Vec<Embedding>, SolverError> {
    catalogue_plan(g, name, depth, &[], DEFAULT_ORDER_CAP)
        .members
        .iter()
        .map(|m| m.build(g, &[]))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum MemberOutcome {
    NoSolution,
    Solved,
    BudgetExceeded,
    NotTried,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Attempt {
    pub member: String,
    pub order: Option<usize>,
    pub outcome: MemberOutcome,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SolveOutcome {
    Solved { solution: Solution, attempts: Vec<Attempt>, skipped: Vec<String> },
    /// No solution in the members tried. This never means unsolvable.
    Inconclusive { attempts: Vec<Attempt>, skipped: Vec<String> },
}

impl SolveOutcome {
    pub fn solution(&self) -> Option<&Solution> {
        match self {
            SolveOutcome::Solved { solution, .. } => Some(solution),
            SolveOutcome::Inconclusive { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolveOptions {
    pub depth: usize,
    pub budget: u64,
    pub order_cap: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            depth: 3,
            budget: DEFAULT_BUDGET,
            order_cap: DEFAULT_ORDER_CAP,
        }
    }
}

/// Tries the catalogue in order, sharing one node budget.
pub fn solve_over(
    sys: &EquationSystem,
    name: &str,
    registered: &[Embedding],
    opts: SolveOptions,
) -> Result<SolveOutcome, SolverError> {
    let g = finite_factor(sys)?;
    let plan = catalogue_plan(g, name, opts.depth, registered, opts.order_cap);
    let mut remaining = opts.budget;
    let mut attempts = Vec::new();
    let mut solved = None;
    for m in &plan.members {
        if solved.is_some() || remaining == 0 {
            attempts.push(Attempt {
                member: m.name.clone(),
                order: m.order,
                outcome: MemberOutcome::NotTried,
            });
            continue;
        }
        let emb = m.build(g, registered)?;
        let outcome = match solve_in_counting(sys, &emb, &mut remaining)? {
            Some(s) => {
                if !s.verify(sys, &emb)? {
                    return Err(SolverError::BadEmbedding {
                        name: emb.name,
                        reason: "solution failed re-verification".into(),
                    });
                }
                solved = Some(s);
                MemberOutcome::Solved
            }
            None if remaining == 0 => MemberOutcome::BudgetExceeded,
            None => MemberOutcome::NoSolution,
        };
        attempts.push(Attempt {
            member: m.name.clone(),
            order: m.order,
            outcome,
        });
    }
    let skipped = plan.skipped;
    Ok(match solved {
        Some(solution) => SolveOutcome::Solved {
            solution,
            attempts,
            skipped,
        },
        None => SolveOutcome::Inconclusive { attempts, skipped },
    })
}

/// Runs the search against a shared budget; an overrun yields `None` and
/// leaves no budget.
fn solve_in_counting(sys: &EquationSystem, emb: &Embedding, remaining: &mut u64) -> Result<Option<Solution>, SolverError> {
    match search(sys, emb, *remaining) {
        Ok((r, used)) => {
            *remaining -= used;
            Ok(r)
        }
        Err(SolverError::BudgetExceeded(_)) => {
            *remaining = 0;
            Ok(None)
        }
        Err(e) => Err(e),
    }
}
