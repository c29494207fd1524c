use std::collections::VecDeque;

use super::quadrature::{node, DEFAULT_GRID};
use super::trig::{CausalFactor, TrigPolynomial};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_extent, hermitian_part, CMatrix, CONDITION_LIMIT, POSITIVITY_FLOOR};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 16384;

/// Smallest eigenvalue and largest condition number of `p(λ)` on a grid
/// fine enough for its degree.
pub fn grid_extent(p: &TrigPolynomial) -> (f64, f64) {
    let grid = DEFAULT_GRID.max((16 * (p.degree() + 1)).next_power_of_two());
    let mut lo = f64::INFINITY;
    let mut cond: f64 = 1.0;
    for n in 0..grid {
        let (l, c) = hermitian_extent(&p.evaluate(node(grid, n)));
        lo = lo.min(l);
        cond = cond.max(c);
    }
    (lo, cond)
}

/// Factors `p(λ) = Q(z) Q(z)*`, `z = e^{-iλ}`, with `Q` causal of the same degree.
///
/// Block Cholesky of the banded block-Toeplitz matrix `M_ij = P(j-i)`, one block
/// row at a time; the trailing row converges to `Q(0), …, Q(G)`. `Q(0)` comes out
/// lower triangular with a positive real diagonal. Iteration stops once the
/// coefficient residual `‖E(0)‖ + 2Σ‖E(g)‖` (Frobenius), which bounds the
/// reconstruction error at every frequency, is at most `tol`.
pub fn spectral_factorize(p: &TrigPolynomial, tol: f64, max_iter: usize) -> Result<CausalFactor> {
    let (lo, cond) = grid_extent(p);
    if !(lo > POSITIVITY_FLOOR) || cond > CONDITION_LIMIT {
        return Err(Error::NotFactorizable { min_eigenvalue: lo });
    }
    let g_max = p.degree();
    let t = p.dim();
    let lower = |m: CMatrix| -> Result<CMatrix> {
        hermitian_part(&m)
            .cholesky()
            .map(|c| c.unpack())
            .ok_or(Error::NotFactorizable { min_eigenvalue: lo })
    };
    if g_max == 0 {
        return CausalFactor::new(vec![lower(p.coeff(0))?]);
    }

    // rows[r][k] = L[i_r][i_r - k], most recent row last.
    let mut rows: VecDeque<Vec<CMatrix>> = VecDeque::with_capacity(g_max + 1);
    let mut residual = f64::INFINITY;
    for i in 0..max_iter.max(g_max + 1) {
        let depth = i.min(g_max);
        let mut row = vec![CMatrix::zeros(t, t); depth + 1];
        for k in (1..=depth).rev() {
            // column j = i - k; previous row for j is rows[len - k]
            let prev = &rows[rows.len() - k];
            let mut s = p.coeff(-(k as i64));
            for kc in (k + 1)..=depth {
                // column c = i - kc, offset within row j is kc - k
                if let Some(ljc) = prev.get(kc - k) {
                    s -= &row[kc] * ljc.adjoint();
                }
            }
            let ljj = &prev[0];
            let xh = ljj
                .solve_lower_triangular(&s.adjoint())
                .ok_or(Error::NotFactorizable { min_eigenvalue: lo })?;
            row[k] = xh.adjoint();
        }
        let mut d = p.coeff(0);
        for blk in row.iter().skip(1) {
            d -= blk * blk.adjoint();
        }
        row[0] = lower(d)?;

        if rows.len() == g_max {
            rows.pop_front();
        }
        rows.push_back(row);

        if i >= g_max {
            let q = CausalFactor::new(rows.back().unwrap().clone())?;
            residual = coefficient_residual(p, &q.product());
            if residual <= tol {
                return Ok(q);
            }
        }
    }
    Err(Error::ConvergenceFailure { iterations: max_iter, residual })
}

/// Causal `Q` with `p(λ) = Q(z)* Q(z)`, the orientation used by the
/// autoregression `Σ Q(k) x(n-k) = ε(n)` whose density is `p^{-1}`.
pub fn ar_factorize(p: &TrigPolynomial, tol: f64, max_iter: usize) -> Result<CausalFactor> {
    let transposed = TrigPolynomial::new(p.coeffs().iter().map(|c| c.transpose()).collect())?;
    Ok(spectral_factorize(&transposed, tol, max_iter)?.transposed())
}

/// `‖E(0)‖ + 2 Σ_{g≥1} ‖E(g)‖` for `E = a - b` (Frobenius norms).
pub fn coefficient_residual(a: &TrigPolynomial, b: &TrigPolynomial) -> f64 {
    let g = a.degree().max(b.degree()) as i64;
    (0..=g)
        .map(|k| {
            let e = (a.coeff(k) - b.coeff(k)).norm();
            if k == 0 {
                e
            } else {
                2.0 * e
            }
        })
        .sum()
}
