//! Dense exact linear algebra over a field, small sizes only.
//!
//! Used for telescoping equation systems, initial-value matching and
//! uncoupling pivots; everything here is Gaussian elimination with the
//! first nonzero pivot (deterministic, no growth heuristics).

use super::ratfun::RationalFunction;
use super::Q;
use num_traits::{One, Zero};

/// Field operations needed by the eliminations.
pub trait Scalar: Clone + PartialEq {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    /// None when dividing by zero.
    fn div(&self, other: &Self) -> Option<Self>;
}

impl Scalar for Q {
    fn zero() -> Self {
        <Q as Zero>::zero()
    }
    fn one() -> Self {
        <Q as One>::one()
    }
    fn is_zero(&self) -> bool {
        <Q as Zero>::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn div(&self, other: &Self) -> Option<Self> {
        if <Q as Zero>::is_zero(other) {
            None
        } else {
            Some(self / other)
        }
    }
}

impl Scalar for RationalFunction {
    fn zero() -> Self {
        RationalFunction::zero()
    }
    fn one() -> Self {
        RationalFunction::one()
    }
    fn is_zero(&self) -> bool {
        RationalFunction::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn div(&self, other: &Self) -> Option<Self> {
        self.checked_div(other)
    }
}

/// Row-major dense matrix.
#[derive(Clone, Debug)]
pub struct Mat<T> {
    pub rows: usize,
    pub cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let r = rows.len();
        let c = rows.first().map(|x| x.len()).unwrap_or(0);
        assert!(rows.iter().all(|x| x.len() == c), "ragged matrix rows");
        Mat {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn at(&self, r: usize, c: usize) -> &T {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: T) {
        self.data[r * self.cols + c] = v;
    }

    /// Reduced row echelon form in place; returns pivot columns.
    pub fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            if row == self.rows {
                break;
            }
            let Some(p) = (row..self.rows).find(|&r| !self.at(r, col).is_zero()) else {
                continue;
            };
            if p != row {
                for c in 0..self.cols {
                    self.data.swap(p * self.cols + c, row * self.cols + c);
                }
            }
            let inv = T::one()
                .div(self.at(row, col))
                .expect("pivot is nonzero");
            for c in col..self.cols {
                let v = self.at(row, c).mul(&inv);
                self.set(row, c, v);
            }
            for r in 0..self.rows {
                if r != row && !self.at(r, col).is_zero() {
                    let f = self.at(r, col).clone();
                    for c in col..self.cols {
                        let v = self.at(r, c).sub(&f.mul(self.at(row, c)));
                        self.set(r, c, v);
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
        pivots
    }

    /// One solution of `A x = b` with free variables set to zero;
    /// `None` when inconsistent.
    pub fn solve(&self, b: &[T]) -> Option<Vec<T>> {
        assert_eq!(b.len(), self.rows);
        let mut aug = Mat::zeros(self.rows, self.cols + 1);
        for r in 0..self.rows {
            for c in 0..self.cols {
                aug.set(r, c, self.at(r, c).clone());
            }
            aug.set(r, self.cols, b[r].clone());
        }
        let pivots = aug.rref();
        if pivots.contains(&self.cols) {
            return None; // pivot in the rhs column: inconsistent
        }
        let mut x = vec![T::zero(); self.cols];
        for (r, &col) in pivots.iter().enumerate() {
            x[col] = aug.at(r, self.cols).clone();
        }
        Some(x)
    }

    /// Basis of the right nullspace.
    pub fn nullspace(&self) -> Vec<Vec<T>> {
        let mut m = self.clone();
        let pivots = m.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut basis = Vec::new();
        for &fc in &free {
            let mut v = vec![T::zero(); self.cols];
            v[fc] = T::one();
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = T::zero().sub(m.at(r, fc));
            }
            basis.push(v);
        }
        basis
    }

    pub fn rank(&self) -> usize {
        self.clone().rref().len()
    }
}

/// Solve `A x = b` where `A` has entries in the scalar field and `b` lives
/// in a vector space over it (coefficient vectors, series, ...). The module
/// only needs zero/add/scale.
pub trait ModuleOver<T> {
    fn m_zero() -> Self;
    fn m_add(&self, other: &Self) -> Self;
    fn m_scale(&self, c: &T) -> Self;
    fn m_is_zero(&self) -> bool;
}

/// Gaussian elimination with module-valued right-hand side. Returns
/// `(particular, nullspace_basis)`; `None` when inconsistent.
pub fn solve_module<T: Scalar, V: ModuleOver<T> + Clone>(
    a: &Mat<T>,
    b: &[V],
) -> Option<(Vec<V>, Vec<Vec<T>>)> {
    assert_eq!(b.len(), a.rows);
    let mut m = a.clone();
    let mut rhs = b.to_vec();
    let mut pivots: Vec<usize> = Vec::new();
    let mut row = 0;
    for col in 0..m.cols {
        if row == m.rows {
            break;
        }
        let Some(p) = (row..m.rows).find(|&r| !m.at(r, col).is_zero()) else {
            continue;
        };
        if p != row {
            for c in 0..m.cols {
                let tmp = m.at(p, c).clone();
                m.set(p, c, m.at(row, c).clone());
                m.set(row, c, tmp);
            }
            rhs.swap(p, row);
        }
        let inv = T::one().div(m.at(row, col)).expect("pivot nonzero");
        for c in col..m.cols {
            let v = m.at(row, c).mul(&inv);
            m.set(row, c, v);
        }
        rhs[row] = rhs[row].m_scale(&inv);
        for r in 0..m.rows {
            if r != row && !m.at(r, col).is_zero() {
                let f = m.at(r, col).clone();
                for c in col..m.cols {
                    let v = m.at(r, c).sub(&f.mul(m.at(row, c)));
                    m.set(r, c, v);
                }
                let delta = rhs[row].m_scale(&(T::zero().sub(&f)));
                rhs[r] = rhs[r].m_add(&delta);
            }
        }
        pivots.push(col);
        row += 1;
    }
    // consistency: zero rows must have zero rhs
    for r in row..m.rows {
        if !rhs[r].m_is_zero() {
            return None;
        }
    }
    let mut x = vec![V::m_zero(); m.cols];
    for (r, &col) in pivots.iter().enumerate() {
        x[col] = rhs[r].clone();
    }
    // nullspace of A for the free directions
    let free: Vec<usize> = (0..m.cols).filter(|c| !pivots.contains(c)).collect();
    let mut basis = Vec::new();
    for &fc in &free {
        let mut v = vec![T::zero(); m.cols];
        v[fc] = T::one();
        for (r, &pc) in pivots.iter().enumerate() {
            v[pc] = T::zero().sub(m.at(r, fc));
        }
        basis.push(v);
    }
    Some((x, basis))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::qi;

    #[test]
    fn solve_2x2() {
        let a = Mat::from_rows(vec![vec![qi(1), qi(1)], vec![qi(1), qi(-1)]]);
        let x = a.solve(&[qi(3), qi(1)]).unwrap();
        assert_eq!(x, vec![qi(2), qi(1)]);
    }

    #[test]
    fn inconsistent_detected() {
        let a = Mat::from_rows(vec![vec![qi(1), qi(1)], vec![qi(2), qi(2)]]);
        assert!(a.solve(&[qi(1), qi(3)]).is_none());
    }

    #[test]
    fn nullspace_of_rank_one() {
        let a = Mat::from_rows(vec![vec![qi(1), qi(2)], vec![qi(2), qi(4)]]);
        let ns = a.nullspace();
        assert_eq!(ns.len(), 1);
        // 1*x + 2*y = 0 along the basis vector
        let v = &ns[0];
        assert_eq!(&v[0] + &(&v[1] * &qi(2)), qi(0));
    }
}
