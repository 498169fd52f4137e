//! Exponent-sum matrices and nonsingularity of equation systems.

use num_bigint::BigInt;
use serde::Serialize;

use crate::mixedwords::EquationSystem;
use crate::words::{Alphabet, Word};
use crate::zlinalg::IntMatrix;

/// Row `i`, column `j`: exponent sum of variable `j` in the content of equation `i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExponentMatrix {
    pub matrix: IntMatrix,
    pub row_labels: Vec<usize>,
    pub col_labels: Vec<String>,
}

impl ExponentMatrix {
    pub fn rows_independent(&self) -> bool {
        self.matrix.rows_independent()
    }

    /// A nonzero integer combination of rows that vanishes, if the rows are dependent.
    pub fn dependency(&self) -> Option<Vec<BigInt>> {
        self.matrix.snf().left_kernel().into_iter().next()
    }
}

/// Exponent-sum matrix of plain words over `alphabet`.
pub fn word_exponent_matrix(words: &[Word], alphabet: &Alphabet) -> ExponentMatrix {
    let rows: Vec<Vec<BigInt>> = words
        .iter()
        .map(|w| (0..alphabet.len()).map(|g| w.exponent_sum(g)).collect())
        .collect();
    ExponentMatrix {
        matrix: IntMatrix::from_rows(alphabet.len(), &rows),
        row_labels: (0..words.len()).collect(),
        col_labels: alphabet.syms().iter().map(|s| s.name.clone()).collect(),
    }
}

pub fn exponent_matrix(sys: &EquationSystem) -> ExponentMatrix {
    let contents: Vec<Word> = sys.equations().iter().map(|w| w.content()).collect();
    word_exponent_matrix(&contents, sys.spec().variables())
}

/// Rows of the exponent-sum matrix are linearly independent. The empty system
/// is nonsingular.
pub fn is_nonsingular(sys: &EquationSystem) -> bool {
    exponent_matrix(sys).rows_independent()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{FactorSpec, FiniteGroup, FreeProductSpec};
    use crate::mixedwords::{MixedWord, Syllable};
    use proptest::prelude::*;
    use std::sync::Arc;

    fn spec(nvars: usize) -> Arc<FreeProductSpec> {
        let names: Vec<String> = (0..nvars).map(|i| format!("x{i}")).collect();
        let mut g = FiniteGroup::cyclic(3);
        g.set_label(1, "g");
        g.set_label(2, "h");
        Arc::new(FreeProductSpec::new(vec![FactorSpec::finite("G", g)], Alphabet::new(&names).unwrap()).unwrap())
    }

    fn sys(spec: &Arc<FreeProductSpec>, eqs: Vec<Vec<Syllable>>) -> EquationSystem {
        let ws = eqs
            .into_iter()
            .map(|raw| MixedWord::normalize(raw, spec.clone()).unwrap())
            .collect();
        EquationSystem::new(spec.clone(), ws).unwrap()
    }

    #[test]
    fn small_examples() {
        let s = spec(1);
        let one = sys(&s, vec![vec![Syllable::var(0, 1), Syllable::constant(0, 1)]]);
        assert_eq!(exponent_matrix(&one).matrix, IntMatrix::from_rows(1, &[vec![1]]));
        let empty = sys(&s, vec![]);
        let m = exponent_matrix(&empty).matrix;
        assert_eq!((m.rows(), m.cols()), (0, 1));
        assert!(is_nonsingular(&empty));
    }

    #[test]
    fn single_variable_sum_zero_is_singular() {
        let s = spec(1);
        // g x h x^-1 g x^2 h x^-2: Σε = 0
        let eq = vec![
            Syllable::constant(0, 1),
            Syllable::var(0, 1),
            Syllable::constant(0, 2),
            Syllable::var(0, -1),
            Syllable::constant(0, 1),
            Syllable::var(0, 2),
            Syllable::constant(0, 2),
            Syllable::var(0, -2),
        ];
        assert!(!is_nonsingular(&sys(&s, vec![eq])));
        let eq = vec![Syllable::constant(0, 1), Syllable::var(0, 1), Syllable::constant(0, 2), Syllable::var(0, 1)];
        assert!(is_nonsingular(&sys(&s, vec![eq])));
    }

    #[test]
    fn dependency_witness_annihilates_rows() {
        let s = spec(2);
        let eqs = vec![
            vec![Syllable::var(0, 1), Syllable::var(1, 2)],
            vec![Syllable::var(0, 2), Syllable::var(1, 4), Syllable::constant(0, 1)],
        ];
        let m = exponent_matrix(&sys(&s, eqs));
        let y = m.dependency().unwrap();
        let combo = IntMatrix::from_rows(2, &[y]).mul(&m.matrix);
        assert!(combo.is_zero());
    }

    fn arb_eq() -> impl Strategy<Value = Vec<Syllable>> {
        prop::collection::vec(
            prop_oneof![
                (0usize..3).prop_map(|c| Syllable::constant(0, c)),
                (0usize..3, -3i64..=3).prop_map(|(g, e)| Syllable::var(g, e)),
            ],
            0..8,
        )
    }

    proptest! {
        #[test]
        fn nonsingularity_respects_row_span_moves(eqs in prop::collection::vec(arb_eq(), 1..4), conj in arb_eq(), pick in 0usize..16) {
            let s = spec(3);
            let base = sys(&s, eqs.clone());
            let verdict = is_nonsingular(&base);
            let ws: Vec<MixedWord> = base.equations().to_vec();
            let n = ws.len();
            let i = pick % n;
            let j = (pick / 4) % n;

            let mut permuted = ws.clone();
            permuted.rotate_left(1);
            prop_assert_eq!(is_nonsingular(&EquationSystem::new(s.clone(), permuted).unwrap()), verdict);

            let c = MixedWord::normalize(conj, s.clone()).unwrap();
            let mut conjugated = ws.clone();
            conjugated[i] = ws[i].conjugate_by(&c).unwrap();
            prop_assert_eq!(is_nonsingular(&EquationSystem::new(s.clone(), conjugated).unwrap()), verdict);

            let mut inverted = ws.clone();
            inverted[i] = ws[i].inverse();
            prop_assert_eq!(is_nonsingular(&EquationSystem::new(s.clone(), inverted).unwrap()), verdict);

            if i != j {
                let mut added = ws.clone();
                added[i] = ws[i].multiply(&ws[j]).unwrap();
                prop_assert_eq!(is_nonsingular(&EquationSystem::new(s.clone(), added).unwrap()), verdict);
            }
        }

        #[test]
        fn one_variable_nonsingular_iff_sum_nonzero(eq in arb_eq()) {
            let s = spec(1);
            let eq: Vec<Syllable> = eq.into_iter().map(|x| match x {
                Syllable::Var { exp, .. } => Syllable::Var { gen: 0, exp },
                c => c,
            }).collect();
            let system = sys(&s, vec![eq]);
            let sum = system.equations()[0].content().exponent_sum(0);
            prop_assert_eq!(is_nonsingular(&system), sum != BigInt::from(0));
        }
    }
}
