//! Hypothesis checkers for the solvability theorems, and the orbit-system
//! reduction of an equation over `A ⋊ B` to a system over `A`.
//!
//! Properties that cannot be decided from the inputs (local indicability of a
//! presented group, membership in GR or GR*) are taken from user assertions and
//! reported as `asserted`, never as `verified`.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive};
use serde::Serialize;
use thiserror::Error;

use crate::cosets::{for_each_low_index_subgroup, schreier_exponent_matrix, subgroup_generators, CosetError, LowIndexOptions};
use crate::equations::exponent_matrix;
use crate::groups::{FactorKind, FactorSpec, FiniteGroup, FreeProductSpec, GroupError, Presentation};
use crate::mixedwords::{Element, EquationSystem, FactorConjugacy, MixedError, MixedWord, Syllable};
use crate::words::{Alphabet, MAX_EXPANSION};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TheoremError {
    #[error("unsuitable free product: {0}")]
    SpecShape(String),
    #[error("ε_A(w) = 1 has no solution in G/A; an infinite locally indicable overgroup would be needed")]
    NoSolutionInQuotient,
    #[error("the search for a solution in G/A exceeded {0} assignments")]
    QuotientSearchCap(u64),
    #[error("G does not split over A (no complement found)")]
    NotSplit,
    #[error(transparent)]
    Mixed(#[from] MixedError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Coset(#[from] CosetError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Property {
    LocallyIndicable,
    Gr,
    GrStar,
    Hyperlinear,
}

impl Property {
    pub fn keyword(self) -> &'static str {
        match self {
            Property::LocallyIndicable => "locally_indicable",
            Property::Gr => "gr",
            Property::GrStar => "gr_star",
            Property::Hyperlinear => "hyperlinear",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Property> {
        [Property::LocallyIndicable, Property::Gr, Property::GrStar, Property::Hyperlinear]
            .into_iter()
            .find(|p| p.keyword() == s)
    }

    fn describe(self) -> &'static str {
        match self {
            Property::LocallyIndicable => "locally indicable",
            Property::Gr => "a GR-group",
            Property::GrStar => "a GR*-group",
            Property::Hyperlinear => "hyperlinear",
        }
    }
}

/// User-asserted properties, per factor name. Finiteness is never asserted;
/// it is read off the factor's kind.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Assertions {
    flags: BTreeMap<String, BTreeSet<Property>>,
}

impl Assertions {
    pub fn new() -> Self {
        Assertions::default()
    }

    pub fn assert(&mut self, factor: impl Into<String>, p: Property) {
        self.flags.entry(factor.into()).or_default().insert(p);
    }

    pub fn has(&self, factor: &str, p: Property) -> bool {
        self.flags.get(factor).is_some_and(|s| s.contains(&p))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Property)> {
        self.flags.iter().flat_map(|(n, s)| s.iter().map(move |p| (n.as_str(), *p)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Verified,
    Asserted,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// Why a property holds for a class of groups.
    KnownClass { reason: String },
    NotAsserted { factor: String, property: String },
    FiniteNontrivial { group: String, order: usize },
    /// `word = conjugator · element · conjugator⁻¹` with `element` in `factor`.
    Conjugator { word: String, factor: String, element: String, conjugator: String },
    IdentityImage { word: String },
    /// A cyclically reduced core of at least two syllables.
    CyclicCore { core: String, syllables: usize },
    /// Integer coefficients of a vanishing combination of matrix rows.
    RowDependency { coefficients: Vec<String> },
    MatrixRank { rows: usize, rank: usize },
    SubgroupTable { index: usize, generators: Vec<String>, relators: usize },
    NontrivialContent { equation: usize, content: String },
    NotFoundUpToIndex { max_index: usize, subgroups_checked: u64, abandoned_branches: Vec<(usize, u64)> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub witness: Option<Witness>,
}

impl Check {
    fn new(name: impl Into<String>, status: Status, witness: Witness) -> Self {
        Check {
            name: name.into(),
            status,
            witness: Some(witness),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HypothesisReport {
    pub theorem: String,
    pub checks: Vec<Check>,
    /// Present exactly when no check failed.
    pub conclusion: Option<String>,
    pub notes: Vec<String>,
}

impl HypothesisReport {
    fn finish(theorem: &str, checks: Vec<Check>, conclusion: &str, notes: Vec<String>) -> Self {
        let ok = checks.iter().all(|c| c.status != Status::Failed);
        let asserted: Vec<&str> = checks
            .iter()
            .filter(|c| c.status == Status::Asserted)
            .map(|c| c.name.as_str())
            .collect();
        let conclusion = ok.then(|| {
            if asserted.is_empty() {
                conclusion.to_string()
            } else {
                format!("{conclusion} (relies on asserted hypotheses: {})", asserted.join("; "))
            }
        });
        HypothesisReport {
            theorem: theorem.to_string(),
            checks,
            conclusion,
            notes,
        }
    }

    pub fn passed(&self) -> bool {
        self.conclusion.is_some()
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Decides a property where the factor's kind settles it, and otherwise
/// falls back to the assertions.
fn property_check(f: &FactorSpec, assertions: &Assertions, p: Property) -> Check {
    let name = format!("{} is {}", f.name, p.describe());
    let known = |reason: &str| Check::new(&name, Status::Verified, Witness::KnownClass { reason: reason.into() });
    match (&f.kind, p) {
        (FactorKind::Finite(g), Property::LocallyIndicable) if g.is_trivial() => known("the trivial group"),
        (FactorKind::Finite(g), Property::LocallyIndicable) => Check::new(
            &name,
            Status::Failed,
            Witness::FiniteNontrivial {
                group: f.name.clone(),
                order: g.order(),
            },
        ),
        (FactorKind::Finite(_), _) => known("finite groups are hyperlinear, hence GR and GR*"),
        (FactorKind::Free(_), Property::LocallyIndicable) => known("free groups are locally indicable"),
        (FactorKind::Free(_), _) => known("free groups embed in C2 ∗ C3, a free product of finite groups, so are hyperlinear"),
        (FactorKind::Presented(_), _) => {
            let implied = match p {
                Property::Gr | Property::GrStar => assertions.has(&f.name, Property::Hyperlinear),
                _ => false,
            };
            if assertions.has(&f.name, p) || implied {
                Check {
                    name,
                    status: Status::Asserted,
                    witness: None,
                }
            } else {
                Check::new(
                    &name,
                    Status::Failed,
                    Witness::NotAsserted {
                        factor: f.name.clone(),
                        property: p.keyword().into(),
                    },
                )
            }
        }
    }
}

/// `w` not conjugate into any constant factor (the identity counts as conjugate).
fn not_conjugate_check(name: &str, w: &MixedWord) -> Check {
    match w.conjugate_into_factor() {
        FactorConjugacy::NotConjugate => {
            let (core, _) = w.cyclic_normal_form();
            Check::new(
                name,
                Status::Verified,
                Witness::CyclicCore {
                    core: core.to_string(),
                    syllables: core.len(),
                },
            )
        }
        FactorConjugacy::Identity => Check::new(name, Status::Failed, Witness::IdentityImage { word: w.to_string() }),
        FactorConjugacy::Factor {
            factor,
            element,
            conjugator,
        } => Check::new(
            name,
            Status::Failed,
            Witness::Conjugator {
                word: w.to_string(),
                factor: w.spec().factor(factor).name.clone(),
                element: element.to_string(),
                conjugator: conjugator.to_string(),
            },
        ),
    }
}

fn single_finite_factor(spec: &FreeProductSpec) -> Result<(&str, &FiniteGroup), TheoremError> {
    match spec.factors() {
        [f] => f
            .as_finite()
            .map(|g| (f.name.as_str(), g))
            .ok_or_else(|| TheoremError::SpecShape(format!("factor `{}` must be finite", f.name))),
        fs => Err(TheoremError::SpecShape(format!("expected one finite factor, found {}", fs.len()))),
    }
}

fn nonsingular_check(sys: &EquationSystem) -> Check {
    let m = exponent_matrix(sys);
    let name = "system is nonsingular";
    match m.dependency() {
        None => Check::new(
            name,
            Status::Verified,
            Witness::MatrixRank {
                rows: m.matrix.rows(),
                rank: m.matrix.rank(),
            },
        ),
        Some(y) => Check::new(
            name,
            Status::Failed,
            Witness::RowDependency {
                coefficients: y.iter().map(|c| c.to_string()).collect(),
            },
        ),
    }
}

/// Gerstenhaber–Rothaus: nonsingular systems over a finite group.
pub fn check_gr(sys: &EquationSystem) -> Result<HypothesisReport, TheoremError> {
    let (name, g) = single_finite_factor(sys.spec())?;
    let finite = Check::new(
        format!("{name} is finite"),
        Status::Verified,
        Witness::KnownClass {
            reason: format!("multiplication table of order {}", g.order()),
        },
    );
    Ok(HypothesisReport::finish(
        "gerstenhaber_rothaus",
        vec![finite, nonsingular_check(sys)],
        &format!("the system is solvable over {name} (in some finite overgroup)"),
        vec![],
    ))
}

/// The group the system is over is GR when every factor is known or asserted
/// hyperlinear (a class closed under free products), or when it is a single
/// factor known or asserted GR.
fn coefficient_group_gr(spec: &FreeProductSpec, assertions: &Assertions) -> Check {
    match spec.factors() {
        [] => Check::new(
            "coefficient group is a GR-group",
            Status::Verified,
            Witness::KnownClass {
                reason: "the trivial group".into(),
            },
        ),
        [f] => property_check(f, assertions, Property::Gr),
        fs => {
            let checks: Vec<Check> = fs.iter().map(|f| property_check(f, assertions, Property::Hyperlinear)).collect();
            let name = "coefficient group is a GR-group";
            if let Some(bad) = checks.iter().find(|c| c.status == Status::Failed) {
                return Check {
                    name: name.into(),
                    status: Status::Failed,
                    witness: bad.witness.clone(),
                };
            }
            let status = if checks.iter().any(|c| c.status == Status::Asserted) {
                Status::Asserted
            } else {
                Status::Verified
            };
            Check::new(
                name,
                status,
                Witness::KnownClass {
                    reason: "free product of hyperlinear groups".into(),
                },
            )
        }
    }
}

/// The presentation `⟨X | ε(W)⟩`.
pub fn content_presentation(sys: &EquationSystem) -> Presentation {
    let contents = sys.equations().iter().map(|w| w.content()).collect();
    Presentation::new(sys.spec().variables().clone(), contents).expect("contents use declared variables")
}

/// Nitsche–Thom in subgroup form: some subgroup of `⟨X | ε(W)⟩` has a
/// nonsingular Schreier presentation. Searched by increasing index.
pub fn check_nitsche_thom(
    sys: &EquationSystem,
    assertions: &Assertions,
    opts: LowIndexOptions,
) -> Result<HypothesisReport, TheoremError> {
    let q = content_presentation(sys);
    let mut checks = vec![coefficient_group_gr(sys.spec(), assertions)];
    let mut notes = Vec::new();
    let name = "a subgroup of the content presentation has a nonsingular Schreier presentation";

    let mut witness = None;
    let mut checked = 0u64;
    let mut abandoned = Vec::new();
    for n in 1..=opts.max_index.max(1) {
        let mut found = None;
        let mut err = None;
        let stats = for_each_low_index_subgroup(&q, LowIndexOptions { max_index: n, ..opts }, |t| {
            if t.index() != n {
                return true;
            }
            checked += 1;
            match schreier_exponent_matrix(&t) {
                Ok(m) if m.rows_independent() => {
                    found = Some((t, m.rows()));
                    false
                }
                Ok(_) => true,
                Err(e) => {
                    err = Some(e);
                    false
                }
            }
        })?;
        if let Some(e) = err {
            return Err(e.into());
        }
        abandoned = stats.abandoned_branches;
        if let Some((t, relators)) = found {
            let alphabet = q.alphabet();
            witness = Some(Witness::SubgroupTable {
                index: t.index(),
                generators: subgroup_generators(&t).iter().map(|w| w.display(alphabet).to_string()).collect(),
                relators,
            });
            break;
        }
    }

    let shortcut = match sys.equations() {
        [w] => {
            let c = w.content();
            (!c.is_identity()).then(|| Witness::NontrivialContent {
                equation: 0,
                content: c.display(sys.spec().variables()).to_string(),
            })
        }
        _ => None,
    };
    match (witness, shortcut) {
        (Some(w), _) => checks.push(Check::new(name, Status::Verified, w)),
        (None, Some(w)) => {
            notes.push(format!(
                "no nonsingular Schreier presentation up to index {}; the single-equation form (nontrivial content) applies instead",
                opts.max_index
            ));
            checks.push(Check::new("the single equation has nontrivial content", Status::Verified, w));
        }
        (None, None) => {
            notes.push("search inconclusive: a subgroup of larger index may still qualify".into());
            checks.push(Check::new(
                name,
                Status::Failed,
                Witness::NotFoundUpToIndex {
                    max_index: opts.max_index,
                    subgroups_checked: checked,
                    abandoned_branches: abandoned,
                },
            ));
        }
    }
    Ok(HypothesisReport::finish(
        "nitsche_thom",
        checks,
        "the system is solvable over the coefficient group",
        notes,
    ))
}

fn no_variables(w: &MixedWord, factors: usize) -> Result<(), TheoremError> {
    let spec = w.spec();
    if spec.factors().len() != factors || !spec.variables().is_empty() {
        return Err(TheoremError::SpecShape(format!(
            "expected exactly {factors} factors and no variables"
        )));
    }
    Ok(())
}

/// Brodskii–Howie–Short for a relator `w ∈ C ∗ D`.
pub fn check_bhs(w: &MixedWord, assertions: &Assertions) -> Result<HypothesisReport, TheoremError> {
    no_variables(w, 2)?;
    let spec = w.spec();
    let (c, d) = (&spec.factors()[0], &spec.factors()[1]);
    let checks = vec![
        property_check(c, assertions, Property::LocallyIndicable),
        property_check(d, assertions, Property::LocallyIndicable),
        not_conjugate_check(&format!("w is not conjugate into {} ∪ {}", c.name, d.name), w),
    ];
    let mut notes = Vec::new();
    let mut conclusion = format!(
        "the natural maps {0} → ({0} ∗ {1})/⟨⟨w⟩⟩ ← {1} are injective",
        c.name, d.name
    );
    let (core, _) = w.cyclic_normal_form();
    if core.len() >= 2 {
        let (root, k) = core.syllable_letters().power_root().map_err(MixedError::from)?;
        let root_word = MixedWord::normalize(core.syllables()[..root.syllable_len()].to_vec(), spec.clone())?;
        if k.is_one() {
            notes.push("w is not a proper power".into());
            conclusion.push_str(&format!(", and ({} ∗ {})/⟨⟨w⟩⟩ is locally indicable", c.name, d.name));
        } else {
            notes.push(format!(
                "w is a proper power, cyclic core ({root_word})^{k}; local indicability of the quotient is not claimed"
            ));
        }
    }
    Ok(HypothesisReport::finish("brodskii_howie_short", checks, &conclusion, notes))
}

/// The proper-power exponent of the cyclic core of `w`, 1 if none.
pub fn proper_power_exponent(w: &MixedWord) -> Result<BigInt, TheoremError> {
    let (core, _) = w.cyclic_normal_form();
    if core.len() < 2 {
        return Ok(BigInt::one());
    }
    Ok(core.syllable_letters().power_root().map_err(MixedError::from)?.1)
}

/// Freiheitssatz for `w ∈ C ∗ D ∗ K`, with `K` the third factor.
pub fn check_freiheitssatz(w: &MixedWord, assertions: &Assertions) -> Result<HypothesisReport, TheoremError> {
    no_variables(w, 3)?;
    let spec = w.spec();
    let [c, d, k] = [&spec.factors()[0], &spec.factors()[1], &spec.factors()[2]];
    let image = w.delete_factor(&k.name)?;
    let checks = vec![
        property_check(c, assertions, Property::LocallyIndicable),
        property_check(d, assertions, Property::LocallyIndicable),
        property_check(k, assertions, Property::GrStar),
        not_conjugate_check(
            &format!("image of w in {} ∗ {} is not conjugate into {} ∪ {}", c.name, d.name, c.name, d.name),
            &image,
        ),
    ];
    Ok(HypothesisReport::finish(
        "freiheitssatz",
        checks,
        &format!(
            "the natural maps {0} ∗ {2} → ({0} ∗ {1} ∗ {2})/⟨⟨w⟩⟩ ← {1} ∗ {2} are injective",
            c.name, d.name, k.name
        ),
        vec![format!("image of w after deleting {}: {image}", k.name)],
    ))
}

/// Main theorem for `w` over finite `G` with normal subgroup `A`.
pub fn check_main(w: &MixedWord, normal: &BTreeSet<usize>) -> Result<HypothesisReport, TheoremError> {
    let (name, g) = single_finite_factor(w.spec())?;
    g.check_normal(normal)?;
    let (q, _) = g.quotient(normal)?;
    let a_check = Check::new(
        "A is a GR-group",
        Status::Verified,
        Witness::KnownClass {
            reason: format!("A is finite (order {}), and finite groups are GR", normal.len()),
        },
    );
    let li = if q.is_trivial() {
        Check::new(
            format!("{name}/A is locally indicable"),
            Status::Verified,
            Witness::KnownClass {
                reason: "the trivial group".into(),
            },
        )
    } else {
        Check::new(
            format!("{name}/A is locally indicable"),
            Status::Failed,
            Witness::FiniteNontrivial {
                group: format!("{name}/A"),
                order: q.order(),
            },
        )
    };
    let eps = w.quotient_content(name, normal)?;
    let content = not_conjugate_check(&format!("{name}/A-content is not conjugate into {name}/A"), &eps);
    Ok(HypothesisReport::finish(
        "main",
        vec![a_check, li, content],
        &format!("w = 1 is solvable over {name}"),
        vec![format!("{name}/A-content: {eps}")],
    ))
}

/// The orbit system of an equation over `G = A ⋊ B`, with variables `X_{b,x}`.
#[derive(Debug, Clone)]
pub struct OrbitSystem {
    /// One equation per element of `B`, in `B`'s index order.
    pub system: EquationSystem,
    pub quotient: FiniteGroup,
    /// Complement section `s: B → G`, a homomorphism.
    pub section: Vec<usize>,
    /// Inclusion of `A`'s elements into `G`.
    pub inclusion: Vec<usize>,
    /// `(b, x)` for each new variable, variable-major.
    pub variables: Vec<(usize, usize)>,
    /// Lift `x ↦ x·g` applied to each original variable before rewriting.
    pub substitution: Vec<Option<usize>>,
}

/// Evaluates a word over one finite factor in that factor, variables given.
fn eval_in(g: &FiniteGroup, w: &MixedWord, proj: &[usize], vals: &[usize]) -> usize {
    let mut acc = g.identity();
    for s in w.syllables() {
        let e = match s {
            Syllable::Constant {
                elem: Element::Finite(i), ..
            } => proj[*i],
            Syllable::Constant { .. } => unreachable!("finite factor"),
            Syllable::Var { gen, exp } => g.pow(vals[*gen], exp),
        };
        acc = g.mul(acc, e);
    }
    acc
}

const QUOTIENT_SEARCH_CAP: u64 = 10_000_000;

/// First solution of `ε_A(w) = 1` in `B`, assignments in index order.
fn solve_in_quotient(q: &FiniteGroup, w: &MixedWord, proj: &[usize], nvars: usize) -> Result<Vec<usize>, TheoremError> {
    let mut vals = vec![0usize; nvars];
    let mut tried = 0u64;
    loop {
        tried += 1;
        if tried > QUOTIENT_SEARCH_CAP {
            return Err(TheoremError::QuotientSearchCap(QUOTIENT_SEARCH_CAP));
        }
        if eval_in(q, w, proj, &vals) == q.identity() {
            return Ok(vals);
        }
        let mut i = 0;
        loop {
            if i == nvars {
                return Err(TheoremError::NoSolutionInQuotient);
            }
            vals[i] += 1;
            if vals[i] < q.order() {
                break;
            }
            vals[i] = 0;
            i += 1;
        }
    }
}

/// A homomorphic section of `G → G/A`, trying least-index lifts first.
fn find_section(g: &FiniteGroup, normal: &BTreeSet<usize>, q: &FiniteGroup, proj: &[usize]) -> Option<Vec<usize>> {
    // greedy generators of B
    let mut gens = Vec::new();
    let mut span = q.subgroup_generated(&[]);
    for b in 0..q.order() {
        if !span.contains(&b) {
            gens.push(b);
            span = q.subgroup_generated(&gens);
        }
    }
    let fibres: Vec<Vec<usize>> = gens.iter().map(|&b| (0..g.order()).filter(|&x| proj[x] == b).collect()).collect();
    let mut choice = vec![0usize; gens.len()];
    loop {
        let lifts: Vec<usize> = choice.iter().zip(&fibres).map(|(&i, f)| f[i]).collect();
        let h = g.subgroup_generated(&lifts);
        if h.len() == q.order() && h.iter().all(|x| *x == g.identity() || !normal.contains(x)) {
            let mut section = vec![usize::MAX; q.order()];
            for &x in &h {
                section[proj[x]] = x;
            }
            return Some(section);
        }
        let mut i = 0;
        loop {
            if i == gens.len() {
                return None;
            }
            choice[i] += 1;
            if choice[i] < fibres[i].len() {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}

/// Rewrites `w` over `G = A ⋊ B` as `|B|` equations over `A` in the
/// variables `X_{b,x} = s(b)·x·s(b)⁻¹`.
pub fn orbit_system(w: &MixedWord, normal: &BTreeSet<usize>) -> Result<OrbitSystem, TheoremError> {
    let (name, g) = single_finite_factor(w.spec())?;
    let (q, proj) = g.quotient(normal)?;
    let vars = w.spec().variables();
    let nvars = vars.len();
    if q.is_trivial() {
        let system = EquationSystem::new(w.spec().clone(), vec![w.clone()])?;
        return Ok(OrbitSystem {
            system,
            section: vec![g.identity()],
            inclusion: (0..g.order()).collect(),
            quotient: q,
            variables: (0..nvars).map(|x| (0, x)).collect(),
            substitution: vec![None; nvars],
        });
    }
    let section = find_section(g, normal, &q, &proj).ok_or(TheoremError::NotSplit)?;

    // make the variable-deleted image in B trivial
    let zero = vec![q.identity(); nvars];
    let mut substitution = vec![None; nvars];
    let mut word = w.clone();
    if eval_in(&q, w, &proj, &zero) != q.identity() {
        let hat = solve_in_quotient(&q, w, &proj, nvars)?;
        let mut raw = Vec::new();
        for s in w.syllables() {
            match s {
                Syllable::Var { gen, exp } if hat[*gen] != q.identity() => {
                    let lift = (0..g.order()).find(|&x| proj[x] == hat[*gen]).expect("projection is onto");
                    substitution[*gen] = Some(lift);
                    let n = exp.abs().to_usize().filter(|&n| n <= MAX_EXPANSION).ok_or_else(|| {
                        MixedError::Word(crate::words::WordError::TooLong {
                            len: exp.abs(),
                            cap: MAX_EXPANSION,
                        })
                    })?;
                    for _ in 0..n {
                        if exp.is_positive() {
                            raw.push(Syllable::var(*gen, 1));
                            raw.push(Syllable::constant(0, lift));
                        } else {
                            raw.push(Syllable::constant(0, g.inv(lift)));
                            raw.push(Syllable::var(*gen, -1));
                        }
                    }
                }
                other => raw.push(other.clone()),
            }
        }
        word = MixedWord::normalize(raw, w.spec().clone())?;
    }

    let (a_group, inclusion) = g.subgroup_group(normal)?;
    let a_index = |x: usize| inclusion.binary_search(&x).expect("element of A");
    let nb = q.order();
    let names: Vec<String> = (0..nvars)
        .flat_map(|x| (0..nb).map(move |b| (x, b)))
        .map(|(x, b)| format!("{}_{}", vars.name(x), b))
        .collect();
    let variables: Vec<(usize, usize)> = (0..nvars).flat_map(|x| (0..nb).map(move |b| (b, x))).collect();
    let var_id = |b: usize, x: usize| x * nb + b;
    let spec = Arc::new(FreeProductSpec::new(
        vec![FactorSpec::finite(format!("{name}_A"), a_group.clone())],
        Alphabet::new(&names).map_err(MixedError::from)?,
    )?);

    // ŵ as (A constant | (b, x, exp)) items, scanning with running prefix β
    enum Item {
        Const(usize),
        Var(usize, usize, BigInt),
    }
    let mut items = Vec::new();
    let mut beta = q.identity();
    for s in word.syllables() {
        match s {
            Syllable::Constant {
                elem: Element::Finite(c), ..
            } => {
                let next = q.mul(beta, proj[*c]);
                let a = g.mul(g.mul(section[beta], *c), g.inv(section[next]));
                items.push(Item::Const(a));
                beta = next;
            }
            Syllable::Constant { .. } => unreachable!("finite factor"),
            Syllable::Var { gen, exp } => items.push(Item::Var(beta, *gen, exp.clone())),
        }
    }
    debug_assert_eq!(beta, q.identity());

    let mut equations = Vec::with_capacity(nb);
    for b in 0..nb {
        let sb = section[b];
        let raw = items.iter().map(|it| match it {
            Item::Const(a) => Syllable::constant(0, a_index(g.conj(sb, *a))),
            Item::Var(beta, x, e) => Syllable::var(var_id(q.mul(b, *beta), *x), e.clone()),
        });
        equations.push(MixedWord::normalize(raw.collect::<Vec<_>>(), spec.clone())?);
    }
    Ok(OrbitSystem {
        system: EquationSystem::new(spec, equations)?,
        quotient: q,
        section,
        inclusion,
        variables,
        substitution,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equations::is_nonsingular;
    use crate::groups::tests::{index_of, perm, s3};
    use crate::mixedwords::tests::{c, cdk_spec, mw};

    fn cd_spec() -> Arc<FreeProductSpec> {
        let f = |n: &str, g: &str| FactorSpec::free(n, Alphabet::new([g]).unwrap());
        Arc::new(FreeProductSpec::new(vec![f("C", "c"), f("D", "d")], Alphabet::new(Vec::<String>::new()).unwrap()).unwrap())
    }
    use crate::zlinalg::IntMatrix;

    fn finite_spec(name: &str, g: FiniteGroup, vars: &[&str]) -> Arc<FreeProductSpec> {
        Arc::new(FreeProductSpec::new(vec![FactorSpec::finite(name, g)], Alphabet::new(vars).unwrap()).unwrap())
    }

    #[test]
    fn gr_single_equation() {
        let mut g = FiniteGroup::cyclic(2);
        g.set_label(1, "a");
        let spec = finite_spec("G", g, &["x"]);
        let w = MixedWord::normalize(
            vec![Syllable::constant(0, 1), Syllable::var(0, 1), Syllable::constant(0, 1), Syllable::var(0, 1)],
            spec.clone(),
        )
        .unwrap();
        let r = check_gr(&EquationSystem::new(spec.clone(), vec![w]).unwrap()).unwrap();
        assert!(r.passed());
        let w = MixedWord::normalize(vec![Syllable::var(0, 1), Syllable::constant(0, 1), Syllable::var(0, -1)], spec.clone()).unwrap();
        let r = check_gr(&EquationSystem::new(spec, vec![w]).unwrap()).unwrap();
        assert!(!r.passed());
        let failed = r.check("system is nonsingular").unwrap();
        assert!(matches!(failed.witness, Some(Witness::RowDependency { .. })));
    }

    #[test]
    fn bhs_examples() {
        let spec = cd_spec();
        let a = Assertions::new();
        let r = check_bhs(&mw(&spec, vec![c(0, 1), c(1, 1)]), &a).unwrap();
        assert!(r.passed());
        assert!(r.conclusion.as_ref().unwrap().contains("locally indicable"));

        let r = check_bhs(&mw(&spec, vec![c(1, 1), c(0, 1), c(1, -1)]), &a).unwrap();
        assert!(!r.passed());
        let w = r.checks[2].witness.clone().unwrap();
        assert!(matches!(w, Witness::Conjugator { ref factor, .. } if factor == "C"));

        let cd = mw(&spec, vec![c(0, 1), c(1, 1)]);
        let sq = cd.pow(&BigInt::from(2)).unwrap();
        let r = check_bhs(&sq, &a).unwrap();
        assert!(r.passed());
        assert!(!r.conclusion.as_ref().unwrap().contains("locally indicable"));
        assert_eq!(proper_power_exponent(&sq).unwrap(), BigInt::from(2));
        assert_eq!(proper_power_exponent(&cd).unwrap(), BigInt::one());
    }

    #[test]
    fn freiheitssatz_examples() {
        let spec = cdk_spec(&[]);
        let a = Assertions::new();
        let r = check_freiheitssatz(&mw(&spec, vec![c(0, 1), c(2, 1), c(1, 1)]), &a).unwrap();
        assert!(r.passed(), "{r:?}");

        let r = check_freiheitssatz(&mw(&spec, vec![c(0, 1), c(2, 1), c(0, -1)]), &a).unwrap();
        assert!(!r.passed());
        assert!(matches!(r.checks[3].witness, Some(Witness::IdentityImage { .. })));

        let w = mw(&spec, vec![c(2, 1), c(1, 1), c(2, 2), c(0, 1), c(1, -1)]);
        let r = check_freiheitssatz(&w, &a).unwrap();
        assert!(!r.passed());
        match &r.checks[3].witness {
            Some(Witness::Conjugator { factor, element, conjugator, .. }) => {
                assert_eq!((factor.as_str(), element.as_str(), conjugator.as_str()), ("C", "c", "d"));
            }
            other => panic!("{other:?}"),
        }
        // shares its conjugacy verdict with BHS on the image
        let bhs = check_bhs(&w.delete_factor("K").unwrap(), &a).unwrap();
        assert_eq!(bhs.checks[2].status, r.checks[3].status);
    }

    #[test]
    fn presented_factors_need_assertions() {
        let pres = Presentation::from_names(&["k"], vec![]).unwrap();
        let f = FactorSpec {
            name: "K".into(),
            kind: FactorKind::Presented(pres),
        };
        let mut a = Assertions::new();
        assert_eq!(property_check(&f, &a, Property::GrStar).status, Status::Failed);
        a.assert("K", Property::Hyperlinear);
        assert_eq!(property_check(&f, &a, Property::GrStar).status, Status::Asserted);
        assert_eq!(property_check(&f, &a, Property::LocallyIndicable).status, Status::Failed);
    }

    #[test]
    fn main_theorem_examples() {
        let g = s3();
        let t = index_of(&g, &perm(3, &[&[1, 2]]));
        let spec = finite_spec("G", g.clone(), &["x"]);
        let a3: BTreeSet<usize> = g.subgroup_generated(&[index_of(&g, &perm(3, &[&[1, 2, 3]]))]);
        let w = MixedWord::normalize(
            vec![Syllable::constant(0, t), Syllable::var(0, 1), Syllable::constant(0, t), Syllable::var(0, -1)],
            spec.clone(),
        )
        .unwrap();
        let r = check_main(&w, &a3).unwrap();
        assert_eq!(r.checks[2].status, Status::Verified);
        assert_eq!(r.checks[1].status, Status::Failed);
        assert!(!r.passed());

        let all: BTreeSet<usize> = (0..6).collect();
        let r = check_main(&w, &all).unwrap();
        assert!(!r.passed(), "content x x⁻¹ is trivial");
        let w2 = MixedWord::normalize(vec![Syllable::constant(0, t), Syllable::var(0, 2)], spec.clone()).unwrap();
        assert!(check_main(&w2, &all).unwrap().passed());

        let r3 = index_of(&g, &perm(3, &[&[1, 2, 3]]));
        let w3 = MixedWord::normalize(vec![Syllable::constant(0, r3), Syllable::var(0, 1), Syllable::var(0, -1)], spec).unwrap();
        let r = check_main(&w3, &a3).unwrap();
        assert!(matches!(r.checks[2].witness, Some(Witness::IdentityImage { .. })));

        let not_normal: BTreeSet<usize> = g.subgroup_generated(&[t]);
        assert!(matches!(check_main(&w2, &not_normal), Err(TheoremError::Group(GroupError::NotNormal { .. }))));
    }

    fn klein() -> (FiniteGroup, usize, usize) {
        let a = perm(4, &[&[1, 2]]);
        let b = perm(4, &[&[3, 4]]);
        let mut g = FiniteGroup::from_permutations(4, &[a.clone(), b.clone()]).unwrap();
        let (ia, ib) = (index_of(&g, &a), index_of(&g, &b));
        g.set_label(ia, "a");
        g.set_label(ib, "b");
        (g, ia, ib)
    }

    #[test]
    fn orbit_system_worked_example() {
        let (g, a, b) = klein();
        let spec = finite_spec("G", g.clone(), &["x"]);
        let w = MixedWord::normalize(
            vec![
                Syllable::var(0, 1),
                Syllable::constant(0, a),
                Syllable::var(0, 1),
                Syllable::constant(0, b),
                Syllable::var(0, 1),
            ],
            spec,
        )
        .unwrap();
        let normal: BTreeSet<usize> = g.subgroup_generated(&[a]);
        let o = orbit_system(&w, &normal).unwrap();
        assert_eq!(o.substitution, vec![Some(b)]);
        let m = exponent_matrix(&o.system).matrix;
        assert_eq!(m, IntMatrix::from_rows(2, &[vec![1, 2], vec![2, 1]]));
        assert!(is_nonsingular(&o.system));
        assert_eq!(o.system.equations()[0].to_string(), "x_0 a x_1^2");
    }

    #[test]
    fn orbit_system_trivial_quotient_is_identity() {
        let (g, a, _) = klein();
        let spec = finite_spec("G", g.clone(), &["x"]);
        let w = MixedWord::normalize(vec![Syllable::var(0, 3), Syllable::constant(0, a)], spec).unwrap();
        let o = orbit_system(&w, &(0..4).collect()).unwrap();
        assert_eq!(o.system.equations(), &[w]);
    }

    #[test]
    fn orbit_system_rejects_non_split_and_unsolvable() {
        // C4 over its C2 does not split
        let g = FiniteGroup::cyclic(4);
        let spec = finite_spec("G", g.clone(), &["x"]);
        let w = MixedWord::normalize(vec![Syllable::var(0, 1)], spec.clone()).unwrap();
        assert_eq!(orbit_system(&w, &[0, 2].into_iter().collect()).unwrap_err(), TheoremError::NotSplit);
        // x² b = 1 has no solution in C2
        let (k, _, b) = klein();
        let a = index_of(&k, &perm(4, &[&[1, 2]]));
        let spec = finite_spec("G", k.clone(), &["x"]);
        let w = MixedWord::normalize(vec![Syllable::var(0, 2), Syllable::constant(0, b)], spec).unwrap();
        assert_eq!(
            orbit_system(&w, &k.subgroup_generated(&[a])).unwrap_err(),
            TheoremError::NoSolutionInQuotient
        );
    }

    fn single(spec: &Arc<FreeProductSpec>, contents: Vec<Vec<Syllable>>) -> EquationSystem {
        let ws = contents.into_iter().map(|r| MixedWord::normalize(r, spec.clone()).unwrap()).collect();
        EquationSystem::new(spec.clone(), ws).unwrap()
    }

    #[test]
    fn nitsche_thom_examples() {
        let spec = finite_spec("G", FiniteGroup::cyclic(2), &["x", "y", "z"]);
        let a = Assertions::new();
        let sys = single(&spec, vec![vec![Syllable::var(0, 1), Syllable::var(1, 2), Syllable::var(2, 3), Syllable::constant(0, 1)]]);
        let r = check_nitsche_thom(&sys, &a, LowIndexOptions::new(3)).unwrap();
        assert!(r.passed());
        assert!(matches!(r.checks[1].witness, Some(Witness::SubgroupTable { index: 1, .. })));

        let spec1 = finite_spec("G", FiniteGroup::cyclic(2), &["x"]);
        let eq = vec![Syllable::var(0, 1), Syllable::constant(0, 1)];
        let sys = single(&spec1, vec![eq.clone(), eq]);
        let r = check_nitsche_thom(&sys, &a, LowIndexOptions::new(4)).unwrap();
        assert!(!r.passed());
        assert!(matches!(r.checks[1].witness, Some(Witness::NotFoundUpToIndex { max_index: 4, .. })));

        let r = check_nitsche_thom(&single(&spec, vec![]), &a, LowIndexOptions::new(2)).unwrap();
        assert!(r.passed());
    }

    #[test]
    fn nitsche_thom_single_equation_route() {
        // content x² gives the nonsingular row (2) at index 1
        let spec = finite_spec("G", FiniteGroup::cyclic(3), &["x"]);
        let sys = single(&spec, vec![vec![Syllable::var(0, 2), Syllable::constant(0, 1)]]);
        let r = check_nitsche_thom(&sys, &Assertions::new(), LowIndexOptions::new(2)).unwrap();
        assert!(r.passed());
        // x y x⁻¹ y⁻¹ has content of zero exponent sum, so index 1 is singular,
        // yet the content is nontrivial
        let spec = finite_spec("G", FiniteGroup::cyclic(3), &["x", "y"]);
        let eq = vec![
            Syllable::var(0, 1),
            Syllable::constant(0, 1),
            Syllable::var(1, 1),
            Syllable::var(0, -1),
            Syllable::var(1, -1),
        ];
        let r = check_nitsche_thom(&single(&spec, vec![eq]), &Assertions::new(), LowIndexOptions::new(3)).unwrap();
        assert!(r.passed());
        assert!(matches!(r.checks[1].witness, Some(Witness::NontrivialContent { .. })));
        assert_eq!(r.notes.len(), 1);
    }
}
