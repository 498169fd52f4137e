//! Presentation 2-complexes, their finite covers, and cellular homology.

use num_bigint::BigInt;
use num_traits::One;
use serde::Serialize;

use crate::cosets::{subgroup_presentation, CosetError, CosetTable};
use crate::equations::word_exponent_matrix;
use crate::groups::Presentation;
use crate::words::{Alphabet, MAX_EXPANSION};
use crate::zlinalg::IntMatrix;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Edge {
    pub src: usize,
    pub dst: usize,
    /// Generator index in the complex's alphabet.
    pub label: usize,
}

/// A boundary step: an edge crossed forwards (`true`) or backwards.
pub type Step = (usize, bool);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoComplex {
    pub vertices: usize,
    pub edges: Vec<Edge>,
    /// Closed edge paths; an empty path is a face glued along a point.
    pub faces: Vec<Vec<Step>>,
    pub alphabet: Alphabet,
}

impl TwoComplex {
    pub fn euler_characteristic(&self) -> i64 {
        self.vertices as i64 - self.edges.len() as i64 + self.faces.len() as i64
    }

    fn step_ends(&self, (e, forward): Step) -> (usize, usize) {
        let edge = &self.edges[e];
        if forward {
            (edge.src, edge.dst)
        } else {
            (edge.dst, edge.src)
        }
    }

    /// Every face boundary chains edge to edge and returns to its start.
    pub fn faces_closed(&self) -> bool {
        self.faces.iter().all(|f| {
            let Some(&first) = f.first() else { return true };
            let start = self.step_ends(first).0;
            let mut at = start;
            for &s in f {
                let (a, b) = self.step_ends(s);
                if a != at {
                    return false;
                }
                at = b;
            }
            at == start
        })
    }
}

/// One vertex, a loop per generator, a face per relator.
pub fn standard_complex(pres: &Presentation) -> Result<TwoComplex, CosetError> {
    let edges = (0..pres.rank()).map(|g| Edge { src: 0, dst: 0, label: g }).collect();
    let mut faces = Vec::with_capacity(pres.relators().len());
    for r in pres.relators() {
        faces.push(r.letters(MAX_EXPANSION)?);
    }
    Ok(TwoComplex {
        vertices: 1,
        edges,
        faces,
        alphabet: pres.alphabet().clone(),
    })
}

/// The cover attached to a coset table: edge `c·rank + g` runs from `c` to
/// `c·g`, and face `(c, r)` lifts relator `r` starting at coset `c`.
pub fn covering_complex(pres: &Presentation, table: &CosetTable) -> Result<TwoComplex, CosetError> {
    let rank = pres.rank();
    let n = table.index();
    let mut edges = Vec::with_capacity(n * rank);
    for c in 0..n {
        for g in 0..rank {
            edges.push(Edge {
                src: c,
                dst: table.act_letter(c, g, true),
                label: g,
            });
        }
    }
    let letters: Vec<Vec<(usize, bool)>> = pres
        .relators()
        .iter()
        .map(|r| r.letters(MAX_EXPANSION))
        .collect::<Result<_, _>>()?;
    let mut faces = Vec::with_capacity(n * letters.len());
    for c in 0..n {
        for r in &letters {
            let mut at = c;
            let mut path = Vec::with_capacity(r.len());
            for &(g, positive) in r {
                if positive {
                    path.push((at * rank + g, true));
                    at = table.act_letter(at, g, true);
                } else {
                    at = table.act_letter(at, g, false);
                    path.push((at * rank + g, false));
                }
            }
            faces.push(path);
        }
    }
    Ok(TwoComplex {
        vertices: n,
        edges,
        faces,
        alphabet: pres.alphabet().clone(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChainBoundaries {
    /// Faces × edges.
    pub d2: IntMatrix,
    /// Edges × vertices, `+1` at the target and `−1` at the source.
    pub d1: IntMatrix,
}

pub fn boundaries(k: &TwoComplex) -> ChainBoundaries {
    let mut d2 = IntMatrix::zeros(k.faces.len(), k.edges.len());
    for (f, path) in k.faces.iter().enumerate() {
        for &(e, forward) in path {
            if forward {
                d2[(f, e)] += 1;
            } else {
                d2[(f, e)] -= 1;
            }
        }
    }
    let mut d1 = IntMatrix::zeros(k.edges.len(), k.vertices);
    for (i, e) in k.edges.iter().enumerate() {
        d1[(i, e.dst)] += 1;
        d1[(i, e.src)] -= 1;
    }
    debug_assert!(d2.mul(&d1).is_zero(), "boundary of a boundary must vanish");
    ChainBoundaries { d2, d1 }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Homology {
    pub b0: usize,
    /// Invariant factors greater than one.
    pub h1_torsion: Vec<BigInt>,
    pub b1: usize,
    /// `H₂` is free of this rank.
    pub b2: usize,
}

impl Homology {
    pub fn h1_string(&self) -> String {
        let mut parts: Vec<String> = self.h1_torsion.iter().map(|d| format!("Z/{d}")).collect();
        match self.b1 {
            0 => {}
            1 => parts.push("Z".into()),
            b => parts.push(format!("Z^{b}")),
        }
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        }
    }
}

pub fn homology(k: &TwoComplex) -> Homology {
    let b = boundaries(k);
    let rank1 = b.d1.rank();
    let snf = b.d2.snf();
    let one = BigInt::one();
    Homology {
        b0: k.vertices - rank1,
        h1_torsion: snf.invariant_factors().into_iter().filter(|d| *d > one).collect(),
        b1: k.edges.len() - rank1 - snf.rank,
        b2: k.faces.len() - snf.rank,
    }
}

/// `H₂ = 0`, i.e. `∂₂` is injective.
pub fn h2_trivial(k: &TwoComplex) -> bool {
    boundaries(k).d2.rank() == k.faces.len()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CriterionReport {
    pub h2: bool,
    pub schreier_nonsingular: bool,
    pub agree: bool,
}

/// Compares `H₂` of the cover with nonsingularity of the Schreier relators.
/// The two sides share only the coset table.
pub fn criterion_check(pres: &Presentation, table: &CosetTable) -> Result<CriterionReport, CosetError> {
    let h2 = h2_trivial(&covering_complex(pres, table)?);
    let sp = subgroup_presentation(table)?;
    let schreier_nonsingular = word_exponent_matrix(&sp.relators, &sp.alphabet).rows_independent();
    Ok(CriterionReport {
        h2,
        schreier_nonsingular,
        agree: h2 == schreier_nonsingular,
    })
}
