//! Command dispatch and reports.

use std::fmt;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

use super::document::Document;
use crate::complexes::{covering_complex, criterion_check, homology, standard_complex, CriterionReport, TwoComplex};
use crate::cosets::{
    for_each_low_index_subgroup, subgroup_generators, subgroup_presentation, todd_coxeter, CosetError, CosetTable,
    LowIndexOptions, DEFAULT_MAX_COSETS,
};
use crate::equations::{exponent_matrix, word_exponent_matrix, ExponentMatrix};
use crate::groups::{FactorKind, Presentation};
use crate::mixedwords::{FactorConjugacy, MixedWord};
use crate::solver::{solve_over, SolveOptions, SolveOutcome, SolverError, DEFAULT_BUDGET, DEFAULT_ORDER_CAP};
use crate::theorems::{
    check_bhs, check_freiheitssatz, check_gr, check_main, check_nitsche_thom, content_presentation, orbit_system,
    HypothesisReport, Status, TheoremError, Witness,
};
use crate::words::Alphabet;

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_MAX_INDEX: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Command {
    Analyze,
    Subgroups,
    /// `id` is a position in the `subgroups` listing.
    Homology { id: usize },
    Solve,
    /// Name of a `subgroup` directive.
    Rewrite { normal: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOptions {
    pub max_cosets: usize,
    pub max_index: usize,
    /// Solver node budget.
    pub budget: u64,
    pub order_cap: usize,
    /// Which presentation `subgroups` and `homology` work on; by default the
    /// content presentation, or the document's only presented or free factor.
    pub group: Option<String>,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            max_cosets: DEFAULT_MAX_COSETS,
            max_index: DEFAULT_MAX_INDEX,
            budget: DEFAULT_BUDGET,
            order_cap: DEFAULT_ORDER_CAP,
            group: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RunError {
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error(transparent)]
    Coset(#[from] CosetError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Theorem(#[from] TheoremError),
}

/// Longest word shown in text reports.
const TEXT_WORD_CHARS: usize = 300;
/// Longest Schreier relator kept in a report.
const REPORT_WORD_CHARS: usize = 100_000;

fn clip(s: &str, max: usize) -> String {
    match s.char_indices().nth(max) {
        Some((cut, _)) => format!("{} ... ({} characters)", &s[..cut], s.chars().count()),
        None => s.to_string(),
    }
}

/// Integers fitting in `i64` become JSON numbers, others decimal strings.
fn int(b: &BigInt) -> Value {
    b.to_i64().map_or_else(|| Value::String(b.to_string()), Value::from)
}

#[derive(Debug, Clone, Serialize)]
pub struct MatrixInfo {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
    pub rank: usize,
}

impl MatrixInfo {
    fn new(m: &ExponentMatrix) -> Self {
        MatrixInfo {
            columns: m.col_labels.clone(),
            rows: m.matrix.to_rows().iter().map(|r| r.iter().map(int).collect()).collect(),
            rank: m.matrix.rank(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FactorInfo {
    pub name: String,
    pub kind: &'static str,
    pub order: Option<usize>,
    pub generators: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum ConjugacyInfo {
    Identity,
    NotConjugate { core: String },
    Factor { factor: String, element: String, conjugator: String },
}

#[derive(Debug, Clone, Serialize)]
pub struct EquationInfo {
    pub index: usize,
    /// The equation as written, in canonical form.
    pub source: String,
    /// Normal form in the free product.
    pub word: String,
    pub content: String,
    pub conjugacy: ConjugacyInfo,
}

#[derive(Debug, Clone, Serialize)]
pub struct TheoremEntry {
    pub theorem: &'static str,
    pub subject: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<HypothesisReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl TheoremEntry {
    fn new(theorem: &'static str, subject: impl Into<String>, r: Result<HypothesisReport, TheoremError>) -> Self {
        let (report, error) = match r {
            Ok(r) => (Some(r), None),
            Err(e) => (None, Some(e.to_string())),
        };
        TheoremEntry {
            theorem,
            subject: subject.into(),
            report,
            error,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalyzeReport {
    pub factors: Vec<FactorInfo>,
    pub variables: Vec<String>,
    pub equations: Vec<EquationInfo>,
    pub exponent_matrix: MatrixInfo,
    pub nonsingular: bool,
    /// Coefficients of a vanishing row combination when singular.
    pub dependency: Option<Vec<Value>>,
    pub theorems: Vec<TheoremEntry>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SchreierInfo {
    pub generators: Vec<String>,
    pub relators: Vec<String>,
    pub exponent_matrix_rank: usize,
    pub nonsingular: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SubgroupEntry {
    pub id: usize,
    pub index: usize,
    /// Index found by coset enumeration from the generators alone.
    pub enumerated_index: Option<usize>,
    pub generators: Vec<String>,
    /// Row `c`: images of coset `c` under each generator and its inverse.
    pub table: Vec<Vec<usize>>,
    pub schreier: SchreierInfo,
}

#[derive(Debug, Clone, Serialize)]
pub struct SearchInfo {
    pub nodes: u64,
    /// The node budget cut some branches.
    pub exhausted: bool,
    pub abandoned_branches: Vec<(usize, u64)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SubgroupsReport {
    pub presentation: String,
    pub target: String,
    pub max_index: usize,
    pub subgroups: Vec<SubgroupEntry>,
    pub search: SearchInfo,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComplexInfo {
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
    pub euler_characteristic: i64,
}

impl ComplexInfo {
    fn new(k: &TwoComplex) -> Self {
        ComplexInfo {
            vertices: k.vertices,
            edges: k.edges.len(),
            faces: k.faces.len(),
            euler_characteristic: k.euler_characteristic(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct HomologyInfo {
    pub h0: usize,
    pub h1: String,
    pub h1_torsion: Vec<Value>,
    pub b1: usize,
    /// `H₂` is free of rank `b2`.
    pub b2: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct HomologyReport {
    pub presentation: String,
    pub target: String,
    pub id: usize,
    pub index: usize,
    pub generators: Vec<String>,
    pub base: ComplexInfo,
    pub cover: ComplexInfo,
    pub homology: HomologyInfo,
    pub criterion: CriterionReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub group: String,
    pub order: usize,
    pub variables: Vec<String>,
    pub outcome: SolveOutcome,
}

#[derive(Debug, Clone, Serialize)]
pub struct OrbitInfo {
    pub quotient_order: usize,
    /// Complement section, as labels of `G`, in the quotient's element order.
    pub section: Vec<String>,
    /// Lift applied to each original variable (`x ↦ x·g`), if any.
    pub substitution: Vec<(String, Option<String>)>,
    pub variables: Vec<String>,
    pub equations: Vec<String>,
    pub exponent_matrix: MatrixInfo,
    pub nonsingular: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RewriteEntry {
    pub index: usize,
    pub word: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub orbit_system: Option<OrbitInfo>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RewriteReport {
    pub group: String,
    pub normal: String,
    pub normal_elements: Vec<String>,
    pub equations: Vec<RewriteEntry>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Report {
    Analyze(AnalyzeReport),
    Subgroups(SubgroupsReport),
    Homology(HomologyReport),
    Solve(SolveReport),
    Rewrite(RewriteReport),
}

/// The JSON form: a versioned report with the name of its input.
#[derive(Debug, Clone, Serialize)]
pub struct Envelope<'a> {
    pub schema: u32,
    pub source: &'a str,
    #[serde(flatten)]
    pub report: &'a Report,
}

pub fn run(doc: &Document, cmd: &Command, opts: &RunOptions) -> Result<Report, RunError> {
    Ok(match cmd {
        Command::Analyze => Report::Analyze(analyze(doc, opts)?),
        Command::Subgroups => Report::Subgroups(subgroups(doc, opts)?),
        Command::Homology { id } => Report::Homology(homology_of(doc, *id, opts)?),
        Command::Solve => Report::Solve(solve(doc, opts)?),
        Command::Rewrite { normal } => Report::Rewrite(rewrite(doc, normal)?),
    })
}

fn factor_info(doc: &Document) -> Vec<FactorInfo> {
    doc.spec
        .factors()
        .iter()
        .map(|f| match &f.kind {
            FactorKind::Finite(g) => FactorInfo {
                name: f.name.clone(),
                kind: "finite",
                order: Some(g.order()),
                generators: g.labels().iter().flatten().cloned().collect(),
            },
            FactorKind::Free(a) => FactorInfo {
                name: f.name.clone(),
                kind: "free",
                order: None,
                generators: names(a),
            },
            FactorKind::Presented(p) => FactorInfo {
                name: f.name.clone(),
                kind: "presented",
                order: None,
                generators: names(p.alphabet()),
            },
        })
        .collect()
}

fn names(a: &Alphabet) -> Vec<String> {
    a.syms().iter().map(|s| s.name.clone()).collect()
}

fn conjugacy(w: &MixedWord) -> ConjugacyInfo {
    match w.conjugate_into_factor() {
        FactorConjugacy::Identity => ConjugacyInfo::Identity,
        FactorConjugacy::NotConjugate => ConjugacyInfo::NotConjugate {
            core: w.cyclic_normal_form().0.to_string(),
        },
        FactorConjugacy::Factor {
            factor,
            element,
            conjugator,
        } => ConjugacyInfo::Factor {
            factor: w.spec().factor(factor).name.clone(),
            element: element.to_string(),
            conjugator: conjugator.to_string(),
        },
    }
}

fn analyze(doc: &Document, opts: &RunOptions) -> Result<AnalyzeReport, RunError> {
    let sys = &doc.system;
    let spec = &doc.spec;
    let vars = spec.variables();
    let m = exponent_matrix(sys);
    let equations = sys
        .equations()
        .iter()
        .enumerate()
        .zip(doc.equation_sources())
        .map(|((i, w), source)| EquationInfo {
            index: i,
            source,
            word: w.to_string(),
            content: w.content().display(vars).to_string(),
            conjugacy: conjugacy(w),
        })
        .collect();

    let mut theorems = Vec::new();
    let one_finite = matches!(spec.factors(), [f] if f.as_finite().is_some());
    if !sys.is_empty() && !vars.is_empty() {
        if one_finite {
            theorems.push(TheoremEntry::new("gerstenhaber_rothaus", "system", check_gr(sys)));
        }
        let lo = LowIndexOptions::new(opts.max_index);
        theorems.push(TheoremEntry::new("nitsche_thom", "system", check_nitsche_thom(sys, &doc.assertions, lo)));
        if one_finite {
            let g = &spec.factors()[0].name;
            for s in doc.subgroups.iter().filter(|s| s.group == *g) {
                for (i, w) in sys.equations().iter().enumerate() {
                    theorems.push(TheoremEntry::new("main", format!("equation {i}, A = {}", s.name), check_main(w, &s.elements)));
                }
            }
        }
    }
    if vars.is_empty() {
        for (i, w) in sys.equations().iter().enumerate() {
            match spec.factors().len() {
                2 => theorems.push(TheoremEntry::new("brodskii_howie_short", format!("equation {i}"), check_bhs(w, &doc.assertions))),
                3 => theorems.push(TheoremEntry::new("freiheitssatz", format!("equation {i}"), check_freiheitssatz(w, &doc.assertions))),
                _ => {}
            }
        }
    }
    Ok(AnalyzeReport {
        factors: factor_info(doc),
        variables: names(vars),
        equations,
        nonsingular: m.rows_independent(),
        dependency: m.dependency().map(|d| d.iter().map(int).collect()),
        exponent_matrix: MatrixInfo::new(&m),
        theorems,
    })
}

/// The presentation `subgroups` and `homology` work on, with a description.
fn target_presentation(doc: &Document, opts: &RunOptions) -> Result<(Presentation, String), RunError> {
    let as_presentation = |name: &str| -> Result<(Presentation, String), RunError> {
        let f = doc
            .spec
            .factors()
            .iter()
            .find(|f| f.name == name)
            .ok_or_else(|| RunError::NotApplicable(format!("no group named `{name}`")))?;
        match &f.kind {
            FactorKind::Presented(p) => Ok((p.clone(), format!("group {name}"))),
            FactorKind::Free(a) => Ok((Presentation::new(a.clone(), vec![]).expect("no relators"), format!("group {name}"))),
            FactorKind::Finite(_) => Err(RunError::NotApplicable(format!("`{name}` is given by a table, not a presentation"))),
        }
    };
    if let Some(name) = &opts.group {
        return as_presentation(name);
    }
    if !doc.spec.variables().is_empty() {
        return Ok((content_presentation(&doc.system), "content presentation".into()));
    }
    let candidates: Vec<&str> = doc
        .spec
        .factors()
        .iter()
        .filter(|f| !matches!(f.kind, FactorKind::Finite(_)))
        .map(|f| f.name.as_str())
        .collect();
    match candidates[..] {
        [name] => as_presentation(name),
        _ => Err(RunError::NotApplicable(
            "no variables and no single presented or free factor; choose one with --group".into(),
        )),
    }
}

fn listed_subgroups(pres: &Presentation, opts: &RunOptions) -> Result<(Vec<CosetTable>, SearchInfo), RunError> {
    let mut tables = Vec::new();
    let stats = for_each_low_index_subgroup(pres, LowIndexOptions::new(opts.max_index), |t| {
        tables.push(t);
        true
    })?;
    tables.sort_by(|a, b| a.index().cmp(&b.index()).then_with(|| a.rows().cmp(&b.rows())));
    Ok((
        tables,
        SearchInfo {
            nodes: stats.nodes,
            exhausted: stats.exhausted(),
            abandoned_branches: stats.abandoned_branches,
        },
    ))
}

fn subgroups(doc: &Document, opts: &RunOptions) -> Result<SubgroupsReport, RunError> {
    let (pres, source) = target_presentation(doc, opts)?;
    let (tables, search) = listed_subgroups(&pres, opts)?;
    let a = pres.alphabet();
    let mut out = Vec::new();
    for (id, t) in tables.iter().enumerate() {
        let gens = subgroup_generators(t);
        let enumerated_index = todd_coxeter(&pres, &gens, opts.max_cosets).ok().map(|e| e.index());
        let sp = subgroup_presentation(t)?;
        let m = word_exponent_matrix(&sp.relators, &sp.alphabet);
        out.push(SubgroupEntry {
            id,
            index: t.index(),
            enumerated_index,
            generators: gens.iter().map(|w| w.display(a).to_string()).collect(),
            table: t.rows(),
            schreier: SchreierInfo {
                generators: names(&sp.alphabet),
                relators: sp
                    .relators
                    .iter()
                    .map(|r| clip(&r.display(&sp.alphabet).to_string(), REPORT_WORD_CHARS))
                    .collect(),
                exponent_matrix_rank: m.matrix.rank(),
                nonsingular: m.rows_independent(),
            },
        });
    }
    Ok(SubgroupsReport {
        presentation: pres.to_string(),
        target: source,
        max_index: opts.max_index,
        subgroups: out,
        search,
    })
}

fn homology_of(doc: &Document, id: usize, opts: &RunOptions) -> Result<HomologyReport, RunError> {
    let (pres, source) = target_presentation(doc, opts)?;
    // ids are ordered by index first, so a shallower search already fixes them
    let mut tables = Vec::new();
    for n in 1..=opts.max_index {
        tables = listed_subgroups(&pres, &RunOptions { max_index: n, ..opts.clone() })?.0;
        if tables.len() > id {
            break;
        }
    }
    let t = tables.get(id).ok_or_else(|| {
        RunError::NotApplicable(format!(
            "no subgroup with id {id}; there are {} of index at most {}",
            tables.len(),
            opts.max_index
        ))
    })?;
    let base = standard_complex(&pres)?;
    let cover = covering_complex(&pres, t)?;
    let h = homology(&cover);
    Ok(HomologyReport {
        presentation: pres.to_string(),
        target: source,
        id,
        index: t.index(),
        generators: subgroup_generators(t).iter().map(|w| w.display(pres.alphabet()).to_string()).collect(),
        base: ComplexInfo::new(&base),
        cover: ComplexInfo::new(&cover),
        homology: HomologyInfo {
            h0: h.b0,
            h1: h.h1_string(),
            h1_torsion: h.h1_torsion.iter().map(int).collect(),
            b1: h.b1,
            b2: h.b2,
        },
        criterion: criterion_check(&pres, t)?,
    })
}

fn solve(doc: &Document, opts: &RunOptions) -> Result<SolveReport, RunError> {
    let [f] = doc.spec.factors() else {
        return Err(RunError::NotApplicable("the solver needs exactly one group factor".into()));
    };
    let g = f
        .as_finite()
        .ok_or_else(|| RunError::NotApplicable(format!("`{}` is not finite", f.name)))?;
    let registered: Vec<_> = doc
        .embeddings
        .iter()
        .filter(|e| e.source == f.name)
        .map(|e| e.embedding.clone())
        .collect();
    let so = SolveOptions {
        budget: opts.budget,
        order_cap: opts.order_cap,
        ..SolveOptions::default()
    };
    Ok(SolveReport {
        group: f.name.clone(),
        order: g.order(),
        variables: names(doc.spec.variables()),
        outcome: solve_over(&doc.system, &f.name, &registered, so)?,
    })
}

fn rewrite(doc: &Document, normal: &str) -> Result<RewriteReport, RunError> {
    let s = doc
        .subgroups
        .iter()
        .find(|s| s.name == normal)
        .ok_or_else(|| RunError::NotApplicable(format!("no subgroup directive named `{normal}`")))?;
    let [f] = doc.spec.factors() else {
        return Err(RunError::NotApplicable("rewriting needs exactly one group factor".into()));
    };
    let g = f
        .as_finite()
        .ok_or_else(|| RunError::NotApplicable(format!("`{}` is not finite", f.name)))?;
    let vars = doc.spec.variables();
    let mut equations = Vec::new();
    for (i, w) in doc.system.equations().iter().enumerate() {
        let (orbit, error) = match orbit_system(w, &s.elements) {
            Ok(o) => {
                let m = exponent_matrix(&o.system);
                let info = OrbitInfo {
                    quotient_order: o.quotient.order(),
                    section: o.section.iter().map(|&x| g.label(x)).collect(),
                    substitution: o
                        .substitution
                        .iter()
                        .enumerate()
                        .map(|(x, l)| (vars.name(x).to_string(), l.map(|l| g.label(l))))
                        .collect(),
                    variables: names(o.system.spec().variables()),
                    equations: o.system.equations().iter().map(|e| e.to_string()).collect(),
                    nonsingular: m.rows_independent(),
                    exponent_matrix: MatrixInfo::new(&m),
                };
                (Some(info), None)
            }
            Err(e) => (None, Some(e.to_string())),
        };
        equations.push(RewriteEntry {
            index: i,
            word: w.to_string(),
            orbit_system: orbit,
            error,
        });
    }
    Ok(RewriteReport {
        group: f.name.clone(),
        normal: normal.to_string(),
        normal_elements: s.elements.iter().map(|&x| g.label(x)).collect(),
        equations,
    })
}

fn describe_witness(w: &Witness) -> String {
    match w {
        Witness::KnownClass { reason } => reason.clone(),
        Witness::NotAsserted { factor, property } => format!("not asserted (add `assert {factor} {property}`)"),
        Witness::FiniteNontrivial { group, order } => format!("{group} is finite of order {order}"),
        Witness::Conjugator {
            word,
            factor,
            element,
            conjugator,
        } => format!("{word} = ({conjugator}) {element} ({conjugator})^-1 with {element} in {factor}"),
        Witness::IdentityImage { word } => format!("{word} is trivial"),
        Witness::CyclicCore { core, syllables } => format!("cyclic core {core} has {syllables} syllables"),
        Witness::RowDependency { coefficients } => format!("rows combine to zero with coefficients [{}]", coefficients.join(", ")),
        Witness::MatrixRank { rows, rank } => format!("{rows} rows, rank {rank}"),
        Witness::SubgroupTable {
            index,
            generators,
            relators,
        } => format!("subgroup of index {index} generated by [{}], {relators} Schreier relators", generators.join(", ")),
        Witness::NontrivialContent { equation, content } => format!("equation {equation} has content {content}"),
        Witness::NotFoundUpToIndex {
            max_index,
            subgroups_checked,
            abandoned_branches,
        } => {
            let mut s = format!("none among {subgroups_checked} subgroups of index at most {max_index}");
            if !abandoned_branches.is_empty() {
                s.push_str(&format!(" (search budget abandoned branches at depths {abandoned_branches:?})"));
            }
            s
        }
    }
}

fn write_hypotheses(f: &mut fmt::Formatter<'_>, r: &HypothesisReport) -> fmt::Result {
    for c in &r.checks {
        let status = match c.status {
            Status::Verified => "verified",
            Status::Asserted => "asserted",
            Status::Failed => "FAILED",
        };
        write!(f, "    [{status}] {}", c.name)?;
        match &c.witness {
            Some(w) => writeln!(f, ": {}", describe_witness(w))?,
            None => writeln!(f)?,
        }
    }
    match &r.conclusion {
        Some(c) => writeln!(f, "    conclusion: {c}")?,
        None => writeln!(f, "    conclusion: none (a hypothesis failed)")?,
    }
    for n in &r.notes {
        writeln!(f, "    note: {n}")?;
    }
    Ok(())
}

fn write_matrix(f: &mut fmt::Formatter<'_>, m: &MatrixInfo, indent: &str) -> fmt::Result {
    let cell = |v: &Value| match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    };
    let mut widths: Vec<usize> = m.columns.iter().map(|c| c.len()).collect();
    for r in &m.rows {
        for (w, v) in widths.iter_mut().zip(r) {
            *w = (*w).max(cell(v).len());
        }
    }
    let line = |cells: Vec<String>| -> String {
        cells.iter().zip(&widths).map(|(c, w)| format!("{c:>w$}")).collect::<Vec<_>>().join("  ")
    };
    writeln!(f, "{indent}{}", line(m.columns.clone()))?;
    for r in &m.rows {
        writeln!(f, "{indent}{}", line(r.iter().map(cell).collect()))?;
    }
    Ok(())
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Report::Analyze(r) => {
                for fi in &r.factors {
                    let order = fi.order.map_or(String::new(), |n| format!(" of order {n}"));
                    writeln!(f, "factor {}: {}{order}, generators {}", fi.name, fi.kind, fi.generators.join(", "))?;
                }
                if !r.variables.is_empty() {
                    writeln!(f, "variables: {}", r.variables.join(", "))?;
                }
                let t = |s: &str| clip(s, TEXT_WORD_CHARS);
                for e in &r.equations {
                    writeln!(f, "equation {}: {} = 1", e.index, t(&e.source))?;
                    writeln!(f, "  normal form: {}", t(&e.word))?;
                    writeln!(f, "  content: {}", t(&e.content))?;
                    let c = match &e.conjugacy {
                        ConjugacyInfo::Identity => "trivial".to_string(),
                        ConjugacyInfo::NotConjugate { core } => format!("not conjugate into a factor (cyclic core {})", t(core)),
                        ConjugacyInfo::Factor { factor, element, .. } => format!("conjugate into {factor} (element {element})"),
                    };
                    writeln!(f, "  {c}")?;
                }
                if r.variables.is_empty() {
                    writeln!(f, "no variables: equations are read as relators")?;
                } else {
                    writeln!(f, "exponent matrix (rank {}):", r.exponent_matrix.rank)?;
                    write_matrix(f, &r.exponent_matrix, "  ")?;
                }
                if !r.variables.is_empty() {
                    writeln!(f, "nonsingular: {}", r.nonsingular)?;
                }
                if let (false, Some(d)) = (r.variables.is_empty(), &r.dependency) {
                    let d: Vec<String> = d.iter().map(|v| v.to_string().trim_matches('"').to_string()).collect();
                    writeln!(f, "  row dependency: [{}]", d.join(", "))?;
                }
                for t in &r.theorems {
                    match (&t.report, &t.error) {
                        (Some(rep), _) => {
                            let verdict = if rep.passed() { "hypotheses hold" } else { "hypotheses not established" };
                            writeln!(f, "theorem {} ({}): {verdict}", t.theorem, t.subject)?;
                            write_hypotheses(f, rep)?;
                        }
                        (None, Some(e)) => writeln!(f, "theorem {} ({}): not checked: {e}", t.theorem, t.subject)?,
                        (None, None) => {}
                    }
                }
                Ok(())
            }
            Report::Subgroups(r) => {
                writeln!(f, "{} {}", r.target, clip(&r.presentation, TEXT_WORD_CHARS))?;
                writeln!(f, "{} subgroups of index at most {}", r.subgroups.len(), r.max_index)?;
                writeln!(f, "{:>4} {:>6}  {:<12} {:<40} generators", "id", "index", "nonsingular", "Schreier relators")?;
                for s in &r.subgroups {
                    let rels = s.schreier.relators.iter().filter(|r| r.as_str() != "1").count();
                    writeln!(
                        f,
                        "{:>4} {:>6}  {:<12} {:<40} {}",
                        s.id,
                        s.index,
                        s.schreier.nonsingular,
                        format!("{} on {} generators", rels, s.schreier.generators.len()),
                        s.generators.join(", ")
                    )?;
                }
                if r.search.exhausted {
                    writeln!(f, "search stopped early; the list may be incomplete")?;
                }
                Ok(())
            }
            Report::Homology(r) => {
                writeln!(f, "{} {}", r.target, clip(&r.presentation, TEXT_WORD_CHARS))?;
                writeln!(f, "subgroup {} of index {} generated by {}", r.id, r.index, r.generators.join(", "))?;
                for (name, c) in [("base complex", &r.base), ("covering complex", &r.cover)] {
                    writeln!(
                        f,
                        "{name}: {} vertices, {} edges, {} faces, Euler characteristic {}",
                        c.vertices, c.edges, c.faces, c.euler_characteristic
                    )?;
                }
                let free = |n: usize| match n {
                    0 => "0".to_string(),
                    1 => "Z".to_string(),
                    n => format!("Z^{n}"),
                };
                writeln!(f, "H0 = {}, H1 = {}, H2 = {}", free(r.homology.h0), r.homology.h1, free(r.homology.b2))?;
                writeln!(
                    f,
                    "H2 trivial: {}; Schreier relators nonsingular: {}; agree: {}",
                    r.criterion.h2, r.criterion.schreier_nonsingular, r.criterion.agree
                )
            }
            Report::Solve(r) => {
                writeln!(f, "solving over {} (order {})", r.group, r.order)?;
                let (attempts, skipped) = match &r.outcome {
                    SolveOutcome::Solved { attempts, skipped, .. } | SolveOutcome::Inconclusive { attempts, skipped } => {
                        (attempts, skipped)
                    }
                };
                let mut untried = 0;
                for a in attempts {
                    let order = a.order.map_or("?".to_string(), |n| n.to_string());
                    let result = serde_json::to_value(&a.outcome).ok().and_then(|v| v["result"].as_str().map(str::to_string));
                    let result = result.unwrap_or_default();
                    if result == "not_tried" {
                        untried += 1;
                        continue;
                    }
                    writeln!(f, "  {} (order {order}): {result}", a.member)?;
                }
                if untried > 0 {
                    writeln!(f, "  ({untried} catalogue members not tried)")?;
                }
                for s in skipped {
                    writeln!(f, "  skipped: {s}")?;
                }
                match r.outcome.solution() {
                    Some(s) => {
                        writeln!(f, "solution in {}:", s.member)?;
                        for (v, l) in r.variables.iter().zip(&s.labels) {
                            writeln!(f, "  {v} = {l}")?;
                        }
                    }
                    None => writeln!(f, "no solution found in the members tried (this does not show the system unsolvable)")?,
                }
                Ok(())
            }
            Report::Rewrite(r) => {
                writeln!(f, "{} relative to the normal subgroup {} = {{{}}}", r.group, r.normal, r.normal_elements.join(", "))?;
                for e in &r.equations {
                    writeln!(f, "equation {}: {} = 1", e.index, clip(&e.word, TEXT_WORD_CHARS))?;
                    if let Some(err) = &e.error {
                        writeln!(f, "  no orbit system: {err}")?;
                    }
                    if let Some(o) = &e.orbit_system {
                        writeln!(f, "  quotient of order {}, section [{}]", o.quotient_order, o.section.join(", "))?;
                        for (x, l) in &o.substitution {
                            if let Some(l) = l {
                                writeln!(f, "  substitute {x} -> {x} {l}")?;
                            }
                        }
                        for (i, eq) in o.equations.iter().enumerate() {
                            writeln!(f, "  {i}: {} = 1", clip(eq, TEXT_WORD_CHARS))?;
                        }
                        writeln!(f, "  exponent matrix (rank {}):", o.exponent_matrix.rank)?;
                        write_matrix(f, &o.exponent_matrix, "    ")?;
                        writeln!(f, "  nonsingular: {}", o.nonsingular)?;
                    }
                }
                Ok(())
            }
        }
    }
}
