//! Exact integer linear algebra over arbitrary-precision integers.
//!
//! Rank uses fraction-free (Bareiss) elimination. The Smith normal form is
//! computed by an independent route, pivoting on the smallest nonzero entry
//! of the working submatrix, so the two ranks can be cross-checked.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            entries: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = BigInt::one();
        }
        m
    }

    /// Builds a matrix from rows; `cols` is needed to describe `0 × cols` shapes.
    pub fn from_rows<T: Into<BigInt> + Clone>(cols: usize, rows: &[Vec<T>]) -> Self {
        let mut m = Self::zeros(rows.len(), cols);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), cols, "ragged row {i}");
            for (j, x) in row.iter().enumerate() {
                m[(i, j)] = x.clone().into();
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> IntMatrix {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Zero::is_zero)
    }

    /// Rank over the rationals by fraction-free elimination.
    pub fn rank(&self) -> usize {
        self.bareiss().0
    }

    /// Determinant of a square matrix (Bareiss); `None` for non-square input.
    pub fn determinant(&self) -> Option<BigInt> {
        if self.rows != self.cols {
            return None;
        }
        if self.rows == 0 {
            return Some(BigInt::one());
        }
        let (rank, last, sign) = self.bareiss();
        Some(if rank < self.rows {
            BigInt::zero()
        } else {
            last * sign
        })
    }

    /// Returns (rank, last pivot, row-swap sign).
    fn bareiss(&self) -> (usize, BigInt, i32) {
        let mut m = self.clone();
        let mut prev = BigInt::one();
        let mut r = 0;
        let mut sign = 1;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| !m[(i, c)].is_zero()) else {
                continue;
            };
            if p != r {
                m.swap_rows(p, r);
                sign = -sign;
            }
            for i in r + 1..self.rows {
                for j in c + 1..self.cols {
                    let v = (&m[(r, c)] * &m[(i, j)] - &m[(i, c)] * &m[(r, j)]) / &prev;
                    m[(i, j)] = v;
                }
                m[(i, c)] = BigInt::zero();
            }
            prev = m[(r, c)].clone();
            r += 1;
        }
        (r, prev, sign)
    }

    /// True iff the rows are linearly independent; no rows counts as independent.
    pub fn rows_independent(&self) -> bool {
        self.rank() == self.rows
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.entries.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    pub fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            for i in 0..self.rows {
                self.entries.swap(i * self.cols + a, i * self.cols + b);
            }
        }
    }

    /// row[dst] += factor · row[src]
    fn add_row(&mut self, dst: usize, src: usize, factor: &BigInt) {
        for j in 0..self.cols {
            let v = &self[(src, j)] * factor;
            self[(dst, j)] += v;
        }
    }

    /// col[dst] += factor · col[src]
    fn add_col(&mut self, dst: usize, src: usize, factor: &BigInt) {
        for i in 0..self.rows {
            let v = &self[(i, src)] * factor;
            self[(i, dst)] += v;
        }
    }

    fn negate_row(&mut self, i: usize) {
        for j in 0..self.cols {
            let v = -&self[(i, j)];
            self[(i, j)] = v;
        }
    }

    /// Smith normal form `U·A·V = D`.
    pub fn snf(&self) -> SmithNormalForm {
        let (m, n) = (self.rows, self.cols);
        let mut d = self.clone();
        let mut u = IntMatrix::identity(m);
        let mut v = IntMatrix::identity(n);
        let mut t = 0;
        while t < m.min(n) {
            // smallest nonzero |entry| in the working block, ties to lowest (row, col)
            let mut pivot: Option<(usize, usize)> = None;
            for i in t..m {
                for j in t..n {
                    let x = &d[(i, j)];
                    if !x.is_zero() && pivot.map_or(true, |(pi, pj)| x.abs() < d[(pi, pj)].abs()) {
                        pivot = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = pivot else { break };
            d.swap_rows(t, pi);
            u.swap_rows(t, pi);
            d.swap_cols(t, pj);
            v.swap_cols(t, pj);

            let p = d[(t, t)].clone();
            let mut clean = true;
            for i in t + 1..m {
                let q = &d[(i, t)] / &p;
                if !q.is_zero() {
                    let neg = -q;
                    d.add_row(i, t, &neg);
                    u.add_row(i, t, &neg);
                }
                clean &= d[(i, t)].is_zero();
            }
            for j in t + 1..n {
                let q = &d[(t, j)] / &p;
                if !q.is_zero() {
                    let neg = -q;
                    d.add_col(j, t, &neg);
                    v.add_col(j, t, &neg);
                }
                clean &= d[(t, j)].is_zero();
            }
            if !clean {
                continue;
            }
            // divisibility: fold an offending row into row t and go again
            let offending = (t + 1..m).find(|&i| (t + 1..n).any(|j| !d[(i, j)].is_multiple_of(&p)));
            if let Some(i) = offending {
                d.add_row(t, i, &BigInt::one());
                u.add_row(t, i, &BigInt::one());
                continue;
            }
            if p.is_negative() {
                d.negate_row(t);
                u.negate_row(t);
            }
            t += 1;
        }
        let snf = SmithNormalForm { d, u, v, rank: t };
        assert_eq!(
            snf.u.mul(self).mul(&snf.v),
            snf.d,
            "Smith normal form failed re-multiplication"
        );
        snf
    }
}

impl std::ops::Index<(usize, usize)> for IntMatrix {
    type Output = BigInt;

    fn index(&self, (i, j): (usize, usize)) -> &BigInt {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of range");
        &self.entries[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IntMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigInt {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of range");
        &mut self.entries[i * self.cols + j]
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, ", ")?;
            }
            let row: Vec<String> = self.row(i).iter().map(|x| x.to_string()).collect();
            write!(f, "[{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

/// `U·A·V = D` with `D` diagonal, `d₁ | d₂ | …`, all `dᵢ ≥ 0`, and `U`, `V` unimodular.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SmithNormalForm {
    pub d: IntMatrix,
    pub u: IntMatrix,
    pub v: IntMatrix,
    pub rank: usize,
}

impl SmithNormalForm {
    /// The nonzero diagonal entries.
    pub fn invariant_factors(&self) -> Vec<BigInt> {
        (0..self.rank).map(|i| self.d[(i, i)].clone()).collect()
    }

    /// Rows of `U` past the rank: a basis of integer vectors `y` with `y·A = 0`.
    pub fn left_kernel(&self) -> Vec<Vec<BigInt>> {
        (self.rank..self.u.rows()).map(|i| self.u.row(i).to_vec()).collect()
    }
}
