//! Small dense complex linear-algebra helpers shared by the other modules.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Eigenvalue floor below which a Hermitian matrix is treated as singular.
pub const POSITIVITY_FLOOR: f64 = 1e-10;
/// Condition number above which a Hermitian matrix is treated as singular.
pub const CONDITION_LIMIT: f64 = 1e12;

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[inline]
pub fn cr(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Builds a complex matrix from real row-major entries.
pub fn real_matrix(rows: usize, cols: usize, entries: &[f64]) -> CMatrix {
    CMatrix::from_row_iterator(rows, cols, entries.iter().map(|&x| cr(x)))
}

pub fn real_vector(entries: &[f64]) -> CVector {
    CVector::from_iterator(entries.len(), entries.iter().map(|&x| cr(x)))
}

/// `(M + M*) / 2`.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_vec(v: &CVector) -> f64 {
    v.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Eigenvalues of a Hermitian matrix (the input is symmetrized first), ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut ev: Vec<f64> = hermitian_part(m).symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// Spectral extent of a Hermitian matrix: (min eigenvalue, condition number).
///
/// The condition number is infinite when the smallest eigenvalue is not positive.
pub fn hermitian_extent(m: &CMatrix) -> (f64, f64) {
    let ev = hermitian_eigenvalues(m);
    let lo = ev.first().copied().unwrap_or(0.0);
    let hi = ev.last().copied().unwrap_or(0.0);
    let cond = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    (lo, cond)
}

pub fn inverse(m: &CMatrix) -> Option<CMatrix> {
    m.clone().try_inverse()
}

type Solver = dyn Fn(&CVector) -> Option<CVector>;

/// Outcome of a Hermitian solve.
#[derive(Debug, Clone)]
pub struct HermitianSolve {
    pub x: CVector,
    pub condition: f64,
    pub relative_residual: f64,
}

/// Solves `B x = rhs` for Hermitian positive definite `B`.
///
/// Cholesky is tried first, LU is the fallback when rounding makes the
/// factorization fail; two rounds of iterative refinement follow. Matrices
/// whose condition number exceeds [`CONDITION_LIMIT`] are rejected.
pub fn solve_hermitian(b: &CMatrix, rhs: &CVector) -> Result<HermitianSolve> {
    let n = b.nrows();
    if b.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, found: b.ncols() });
    }
    if rhs.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: rhs.len() });
    }
    if n == 0 {
        return Ok(HermitianSolve { x: CVector::zeros(0), condition: 1.0, relative_residual: 0.0 });
    }
    let bh = hermitian_part(b);
    let (lo, condition) = hermitian_extent(&bh);
    if !(lo > 0.0) || condition > CONDITION_LIMIT {
        return Err(Error::SingularSystem { condition });
    }

    let solver: Box<Solver> = match bh.clone().cholesky() {
        Some(ch) => Box::new(move |r: &CVector| Some(ch.solve(r))),
        None => {
            let lu = bh.clone().lu();
            Box::new(move |r: &CVector| lu.solve(r))
        }
    };

    let mut x = solver(rhs).ok_or(Error::SingularSystem { condition })?;
    for _ in 0..2 {
        let r = rhs - &bh * &x;
        match solver(&r) {
            Some(dx) => x += dx,
            None => break,
        }
    }
    let scale = rhs.norm().max(f64::MIN_POSITIVE);
    let relative_residual = (rhs - &bh * &x).norm() / scale;
    Ok(HermitianSolve { x, condition, relative_residual })
}

/// Plain transpose (no conjugation).
#[inline]
pub fn transpose(m: &CMatrix) -> CMatrix {
    m.transpose()
}

/// Numerical rank via singular values relative to the largest one.
pub fn rank(m: &CMatrix, rel_tol: f64) -> usize {
    let sv = m.clone().singular_values();
    let top = sv.iter().copied().fold(0.0, f64::max);
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * top).count()
}
