//! Name resolution: from statements to groups, equations and directives.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;

use super::syntax::{parse_syntax, Atom, GroupDef, Name, ParseError, Pos, Statement, Syntax, WordExpr};
use crate::groups::{FactorKind, FactorSpec, FiniteGroup, FreeProductSpec, Permutation, Presentation};
use crate::mixedwords::{EquationSystem, MixedWord, Syllable};
use crate::solver::Embedding;
use crate::theorems::{Assertions, Property};
use crate::words::{Alphabet, Word};

/// `subgroup NAME of GROUP = < … >`: a subgroup of a finite factor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubgroupDecl {
    pub name: String,
    pub group: String,
    pub elements: BTreeSet<usize>,
}

/// `embed SOURCE -> TARGET { … }`: an extra overgroup for the solver.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmbedDecl {
    pub source: String,
    pub embedding: Embedding,
}

/// A parsed input file with every name resolved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub syntax: Syntax,
    pub spec: Arc<FreeProductSpec>,
    pub system: EquationSystem,
    pub assertions: Assertions,
    pub subgroups: Vec<SubgroupDecl>,
    pub overgroups: Vec<(String, FiniteGroup)>,
    pub embeddings: Vec<EmbedDecl>,
}

impl Document {
    /// Each equation's word as written, in canonical form.
    pub fn equation_sources(&self) -> Vec<String> {
        self.syntax
            .statements
            .iter()
            .filter_map(|s| match s {
                Statement::Eq(w) => Some(w.to_string()),
                _ => None,
            })
            .collect()
    }
}

/// Prints the canonical form, which parses back to an equal document.
impl fmt::Display for Document {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.syntax)
    }
}

fn err(pos: Pos, message: impl Into<String>) -> ParseError {
    ParseError::new(pos, message)
}

/// Values a word expression can be evaluated to.
trait Term: Sized {
    fn mul(&self, other: &Self) -> Result<Self, String>;
    fn inv(&self) -> Self;
    fn pow(&self, e: &BigInt) -> Result<Self, String>;
}

impl Term for Word {
    fn mul(&self, other: &Self) -> Result<Self, String> {
        Ok(self.multiply(other))
    }
    fn inv(&self) -> Self {
        self.inverse()
    }
    fn pow(&self, e: &BigInt) -> Result<Self, String> {
        Word::pow(self, e).map_err(|e| e.to_string())
    }
}

impl Term for MixedWord {
    fn mul(&self, other: &Self) -> Result<Self, String> {
        self.multiply(other).map_err(|e| e.to_string())
    }
    fn inv(&self) -> Self {
        self.inverse()
    }
    fn pow(&self, e: &BigInt) -> Result<Self, String> {
        MixedWord::pow(self, e).map_err(|e| e.to_string())
    }
}

struct Elem<'a> {
    g: &'a FiniteGroup,
    x: usize,
}

impl Term for Elem<'_> {
    fn mul(&self, other: &Self) -> Result<Self, String> {
        Ok(Elem {
            g: self.g,
            x: self.g.mul(self.x, other.x),
        })
    }
    fn inv(&self) -> Self {
        Elem {
            g: self.g,
            x: self.g.inv(self.x),
        }
    }
    fn pow(&self, e: &BigInt) -> Result<Self, String> {
        Ok(Elem {
            g: self.g,
            x: self.g.pow(self.x, e),
        })
    }
}

fn eval<T: Term>(w: &WordExpr, leaf: &dyn Fn(&Name) -> Result<T, ParseError>) -> Result<T, ParseError> {
    let mut acc: Option<T> = None;
    for item in &w.items {
        let mut v = match &item.atom {
            Atom::Ident(n) => leaf(n)?,
            Atom::Paren(u) => eval(u, leaf)?,
            Atom::Commutator(u, v) => {
                let (u, v) = (eval(u, leaf)?, eval(v, leaf)?);
                let at = |e: String| err(w.pos, e);
                u.inv().mul(&v.inv()).and_then(|x| x.mul(&u)).and_then(|x| x.mul(&v)).map_err(at)?
            }
        };
        if let Some(e) = &item.exp {
            v = v.pow(e).map_err(|e| err(w.pos, e))?;
        }
        acc = Some(match acc {
            None => v,
            Some(a) => a.mul(&v).map_err(|e| err(w.pos, e))?,
        });
    }
    acc.ok_or_else(|| err(w.pos, "empty word"))
}

fn perms_group(name: &Name, gens: &[super::syntax::PermGen]) -> Result<FiniteGroup, ParseError> {
    let m = gens.iter().flat_map(|g| g.cycles.iter().flatten()).copied().max().unwrap_or(1);
    let mut perms: Vec<Permutation> = Vec::new();
    for g in gens {
        let mut p: Permutation = (0..m).collect();
        let mut seen = BTreeSet::new();
        for cycle in &g.cycles {
            for (i, &a) in cycle.iter().enumerate() {
                if !seen.insert(a) {
                    let at = g.name.as_ref().map_or(name.pos, |n| n.pos);
                    return Err(err(at, format!("point {a} appears twice in one generator")));
                }
                p[a - 1] = cycle[(i + 1) % cycle.len()] - 1;
            }
        }
        perms.push(p);
    }
    let mut g = FiniteGroup::from_permutations(m, &perms).map_err(|e| err(name.pos, e.to_string()))?;
    let elems = g.permutations().expect("permutation group").to_vec();
    let mut named: BTreeMap<usize, String> = BTreeMap::new();
    for (k, (gen, p)) in gens.iter().zip(&perms).enumerate() {
        let label = gen.name.as_ref().map_or_else(|| format!("{}_{}", name.text, k + 1), |n| n.text.clone());
        let at = gen.name.as_ref().map_or(name.pos, |n| n.pos);
        if named.values().any(|l| *l == label) {
            return Err(err(at, format!("duplicate declaration of `{label}`")));
        }
        let idx = elems.iter().position(|e| e == p).expect("generator is an element");
        if let Some(old) = named.insert(idx, label.clone()) {
            return Err(err(at, format!("`{label}` and `{old}` name the same element")));
        }
        g.set_label(idx, label);
    }
    Ok(g)
}

fn finite_group(name: &Name, table: &[Vec<usize>], labels: &Option<Vec<Name>>) -> Result<FiniteGroup, ParseError> {
    let g = FiniteGroup::validate_table(table).map_err(|e| err(name.pos, e.to_string()))?;
    let labels: Vec<Option<String>> = match labels {
        Some(ls) => ls.iter().map(|n| Some(n.text.clone())).collect(),
        None => (0..g.order()).map(|i| Some(format!("{}_{i}", name.text))).collect(),
    };
    g.with_labels(labels).map_err(|e| err(name.pos, e.to_string()))
}

/// What a bare identifier in an equation refers to.
#[derive(Clone)]
enum Meaning {
    Var(usize),
    Finite(usize, usize),
    FreeGen(usize, usize),
    PresentedGen(String),
}

struct Declared {
    kind: FactorKind,
    name: Name,
}

fn declared_group(name: &Name, def: &GroupDef) -> Result<FactorKind, ParseError> {
    Ok(match def {
        GroupDef::Finite { table, labels } => FactorKind::Finite(finite_group(name, table, labels)?),
        GroupDef::Perms(gens) => FactorKind::Finite(perms_group(name, gens)?),
        GroupDef::Free(gens) => {
            let names: Vec<&str> = gens.iter().map(|n| n.text.as_str()).collect();
            FactorKind::Free(Alphabet::new(&names).map_err(|e| err(name.pos, e.to_string()))?)
        }
        GroupDef::Presented { gens, relators } => {
            let names: Vec<&str> = gens.iter().map(|n| n.text.as_str()).collect();
            let alphabet = Alphabet::new(&names).map_err(|e| err(name.pos, e.to_string()))?;
            let leaf = |n: &Name| -> Result<Word, ParseError> {
                alphabet
                    .lookup(&n.text)
                    .map(Word::gen)
                    .ok_or_else(|| err(n.pos, format!("`{}` is not a generator of {}", n.text, name.text)))
            };
            let rels = relators.iter().map(|r| eval(r, &leaf)).collect::<Result<Vec<_>, _>>()?;
            FactorKind::Presented(Presentation::new(alphabet, rels).map_err(|e| err(name.pos, e.to_string()))?)
        }
    })
}

fn element_of(g: &FiniteGroup, group: &str, w: &WordExpr) -> Result<usize, ParseError> {
    let leaf = |n: &Name| -> Result<Elem, ParseError> {
        g.find_label(&n.text)
            .map(|x| Elem { g, x })
            .ok_or_else(|| err(n.pos, format!("`{}` is not an element of {group}", n.text)))
    };
    Ok(eval(w, &leaf)?.x)
}

/// Parses and resolves a document.
pub fn parse(text: &str) -> Result<Document, ParseError> {
    let syntax = parse_syntax(text)?;

    let mut taken: HashMap<String, Pos> = HashMap::new();
    let mut claim = |n: &Name| -> Result<(), ParseError> {
        match taken.insert(n.text.clone(), n.pos) {
            Some(first) => Err(err(n.pos, format!("duplicate declaration of `{}` (first declared at {first})", n.text))),
            None => Ok(()),
        }
    };

    let mut factors: Vec<Declared> = Vec::new();
    let mut overgroups: Vec<(Name, FiniteGroup)> = Vec::new();
    let mut vars: Vec<Name> = Vec::new();
    for st in &syntax.statements {
        match st {
            Statement::Group { name, def, overgroup } => {
                claim(name)?;
                let kind = declared_group(name, def)?;
                if *overgroup {
                    let FactorKind::Finite(g) = kind else {
                        return Err(err(name.pos, "an overgroup must be finite"));
                    };
                    overgroups.push((name.clone(), g));
                } else {
                    factors.push(Declared { kind, name: name.clone() });
                }
            }
            Statement::Vars(names) => {
                for n in names {
                    claim(n)?;
                    vars.push(n.clone());
                }
            }
            _ => {}
        }
    }

    // identifiers usable in equations
    let mut meanings: HashMap<String, Meaning> = HashMap::new();
    for (i, v) in vars.iter().enumerate() {
        meanings.insert(v.text.clone(), Meaning::Var(i));
    }
    for (fi, f) in factors.iter().enumerate() {
        let names: Vec<(String, Meaning)> = match &f.kind {
            FactorKind::Finite(g) => g
                .labels()
                .iter()
                .enumerate()
                .filter_map(|(x, l)| l.clone().map(|l| (l, Meaning::Finite(fi, x))))
                .collect(),
            FactorKind::Free(a) => a.syms().iter().enumerate().map(|(x, s)| (s.name.clone(), Meaning::FreeGen(fi, x))).collect(),
            FactorKind::Presented(p) => p
                .alphabet()
                .syms()
                .iter()
                .map(|s| (s.name.clone(), Meaning::PresentedGen(f.name.text.clone())))
                .collect(),
        };
        for (label, m) in names {
            if let Some(first) = taken.get(&label) {
                return Err(err(f.name.pos, format!("`{label}` in {} is already declared at {first}", f.name.text)));
            }
            if meanings.insert(label.clone(), m).is_some() {
                return Err(err(f.name.pos, format!("`{label}` is declared by more than one group")));
            }
        }
    }

    let variables = Alphabet::new(vars.iter().map(|n| n.text.as_str())).expect("names are distinct");
    let specs: Vec<FactorSpec> = factors
        .iter()
        .map(|f| FactorSpec {
            name: f.name.text.clone(),
            kind: f.kind.clone(),
        })
        .collect();
    let spec = Arc::new(FreeProductSpec::new(specs, variables).map_err(|e| err(Pos::default(), e.to_string()))?);

    let leaf = |n: &Name| -> Result<MixedWord, ParseError> {
        let s = match meanings.get(&n.text) {
            Some(Meaning::Var(i)) => Syllable::var(*i, 1),
            Some(Meaning::Finite(f, x)) => Syllable::constant(*f, *x),
            Some(Meaning::FreeGen(f, x)) => Syllable::free_constant(*f, Word::gen(*x)),
            Some(Meaning::PresentedGen(g)) => {
                return Err(err(n.pos, format!("`{}` is a generator of the presented group {g}; its constants cannot appear in equations", n.text)))
            }
            None => return Err(err(n.pos, format!("unresolved identifier `{}`", n.text))),
        };
        MixedWord::normalize([s], spec.clone()).map_err(|e| err(n.pos, e.to_string()))
    };

    let finite = |n: &Name| -> Result<&FiniteGroup, ParseError> {
        factors
            .iter()
            .find(|f| f.name == *n)
            .and_then(|f| match &f.kind {
                FactorKind::Finite(g) => Some(g),
                _ => None,
            })
            .ok_or_else(|| err(n.pos, format!("`{}` is not a finite group factor", n.text)))
    };

    let mut equations = Vec::new();
    let mut assertions = Assertions::new();
    let mut subgroups: Vec<SubgroupDecl> = Vec::new();
    let mut embeddings = Vec::new();
    for st in &syntax.statements {
        match st {
            Statement::Eq(w) => equations.push(eval(w, &leaf)?),
            Statement::Assert { group, property } => {
                if !factors.iter().any(|f| f.name == *group) {
                    return Err(err(group.pos, format!("unresolved group `{}`", group.text)));
                }
                let p = Property::from_keyword(&property.text).ok_or_else(|| {
                    err(property.pos, format!("unknown property `{}` (expected locally_indicable, gr, gr_star or hyperlinear)", property.text))
                })?;
                assertions.assert(group.text.clone(), p);
            }
            Statement::Subgroup { name, of, gens } => {
                if taken.contains_key(&name.text) || subgroups.iter().any(|s| s.name == name.text) {
                    return Err(err(name.pos, format!("duplicate declaration of `{}`", name.text)));
                }
                let g = finite(of)?;
                let elems = gens.iter().map(|w| element_of(g, &of.text, w)).collect::<Result<Vec<_>, _>>()?;
                subgroups.push(SubgroupDecl {
                    name: name.text.clone(),
                    group: of.text.clone(),
                    elements: g.subgroup_generated(&elems),
                });
            }
            Statement::Embed { source, target, images } => {
                let s = finite(source)?;
                let t = overgroups
                    .iter()
                    .find(|(n, _)| n == target)
                    .map(|(_, g)| g)
                    .or_else(|| finite(target).ok())
                    .ok_or_else(|| err(target.pos, format!("`{}` is not a finite group", target.text)))?;
                let mut gens = Vec::new();
                for (from, to) in images {
                    let x = s
                        .find_label(&from.text)
                        .ok_or_else(|| err(from.pos, format!("`{}` is not an element of {}", from.text, source.text)))?;
                    gens.push((x, element_of(t, &target.text, to)?));
                }
                let map = extend_map(s, t, &gens).ok_or_else(|| {
                    err(source.pos, format!("the listed images do not determine a homomorphism on all of {}", source.text))
                })?;
                let embedding = Embedding::new(target.text.clone(), s.clone(), t.clone(), map)
                    .map_err(|e| err(source.pos, e.to_string()))?;
                embeddings.push(EmbedDecl {
                    source: source.text.clone(),
                    embedding,
                });
            }
            _ => {}
        }
    }

    let system = EquationSystem::new(spec.clone(), equations).map_err(|e| err(Pos::default(), e.to_string()))?;
    Ok(Document {
        syntax,
        spec,
        system,
        assertions,
        subgroups,
        overgroups: overgroups.into_iter().map(|(n, g)| (n.text, g)).collect(),
        embeddings,
    })
}

/// Extends generator images to the subgroup they generate, by breadth-first
/// search. `None` if they do not generate `s` or the images are inconsistent.
fn extend_map(s: &FiniteGroup, t: &FiniteGroup, gens: &[(usize, usize)]) -> Option<Vec<usize>> {
    let mut map = vec![None; s.order()];
    map[s.identity()] = Some(t.identity());
    let mut queue = std::collections::VecDeque::from([s.identity()]);
    while let Some(x) = queue.pop_front() {
        let fx = map[x]?;
        for &(g, h) in gens {
            let (y, fy) = (s.mul(x, g), t.mul(fx, h));
            match map[y] {
                None => {
                    map[y] = Some(fy);
                    queue.push_back(y);
                }
                Some(old) if old != fy => return None,
                Some(_) => {}
            }
        }
    }
    map.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{example_system, CURATED};
    use crate::equations::exponent_matrix;

    #[test]
    fn example_system_exponent_matrix() {
        for k in [-3, 0, 9, 2022] {
            let doc = parse(&example_system(k)).unwrap();
            let m = exponent_matrix(&doc.system);
            let rows: Vec<Vec<BigInt>> = (0..3).map(|i| m.matrix.row(i).to_vec()).collect();
            let expect = [[1, 2, 3, 0], [4, 5, 6, 0], [7, 8, k, 0]];
            for (r, e) in rows.iter().zip(expect) {
                assert_eq!(*r, e.map(BigInt::from).to_vec());
            }
        }
    }

    #[test]
    fn identity_equation() {
        let doc = parse("vars x;\neq: x x^-1 = 1;").unwrap();
        assert!(doc.system.equations()[0].is_identity());
    }

    #[test]
    fn resolution_errors() {
        let e = parse("vars x;\neq: x y = 1;").unwrap_err();
        assert_eq!((e.pos.line, e.pos.col), (2, 7));
        assert!(e.message.contains("unresolved"), "{e}");
        assert!(parse("vars x, x;").unwrap_err().message.contains("duplicate"));
        assert!(parse("group G = free { a }\nvars a;").unwrap_err().message.contains("already declared"));
        assert!(parse("group P = presented < a | a^2 >\neq: a = 1;").is_err());
        assert!(parse("group G = free { a }\nassert G tame;").is_err());
    }

    #[test]
    fn default_labels() {
        let doc = parse("group G = finite { table = [[0, 1], [1, 0]] }\ngroup S = perms { (1 2 3), t = (1 2) }\nvars x;\neq: x G_1 S_1 t = 1;").unwrap();
        assert_eq!(doc.system.equations()[0].len(), 3);
    }

    #[test]
    fn embeddings_are_extended_and_checked() {
        let text = "group C2 = perms { a = (1 2) }\noverground";
        assert!(parse(text).is_err());
        let doc = parse(
            "group C2 = perms { a = (1 2) }\novergroup C4 = perms { r = (1 2 3 4) }\nembed C2 -> C4 { a -> r^2 };",
        )
        .unwrap();
        let e = &doc.embeddings[0].embedding;
        assert_eq!(e.map.len(), 2);
        let bad = parse("group C2 = perms { a = (1 2) }\novergroup C4 = perms { r = (1 2 3 4) }\nembed C2 -> C4 { a -> r };");
        assert!(bad.is_err());
    }

    #[test]
    fn curated_documents_parse_and_round_trip() {
        for d in CURATED {
            let doc = parse(d.text).unwrap_or_else(|e| panic!("{}: {e}", d.name));
            let again = parse(&doc.to_string()).unwrap();
            assert_eq!(again, doc, "{}", d.name);
        }
        let doc = parse(&example_system(2022)).unwrap();
        assert_eq!(parse(&doc.to_string()).unwrap(), doc);
    }
}
