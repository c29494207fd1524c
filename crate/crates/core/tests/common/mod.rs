#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use pcinterp::{CMatrix, CVector, DensitySpec, ScalarAr, VectorFunctional};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn rc<R: Rng>(rng: &mut R, scale: f64) -> Complex64 {
    c(rng.random_range(-scale..scale), rng.random_range(-scale..scale))
}

pub fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize, scale: f64) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| rc(rng, scale))
}

pub fn random_vector<R: Rng>(rng: &mut R, n: usize, scale: f64) -> CVector {
    CVector::from_fn(n, |_, _| rc(rng, scale))
}

/// Hermitian positive definite matrix with eigenvalues in roughly `[lo, lo + spread]`.
pub fn random_hpd<R: Rng>(rng: &mut R, t: usize, lo: f64, spread: f64) -> CMatrix {
    let x = random_matrix(rng, t, t, 1.0);
    let g = &x * x.adjoint();
    let top = g.norm().max(1e-12);
    g.scale(spread / top) + CMatrix::identity(t, t).scale(lo)
}

/// Autoregressive polynomial `Π (1 - r_i z)` with `|r_i| ≤ radius`.
pub fn random_ar<R: Rng>(rng: &mut R, order: usize, radius: f64) -> ScalarAr {
    let mut coeffs = vec![c(1.0, 0.0)];
    for _ in 0..order {
        let r = Complex64::from_polar(rng.random_range(0.0..radius), rng.random_range(-PI..PI));
        let mut next = vec![c(0.0, 0.0); coeffs.len() + 1];
        for (k, &p) in coeffs.iter().enumerate() {
            next[k] += p;
            next[k + 1] -= p * r;
        }
        coeffs = next;
    }
    ScalarAr::new(coeffs)
}

/// `L diag(1/|p_i|²) L*` with a well-conditioned random `L` and poles of modulus ≤ `radius`.
pub fn random_rational<R: Rng>(rng: &mut R, t: usize, radius: f64) -> DensitySpec {
    let mixing = CMatrix::identity(t, t) + random_matrix(rng, t, t, 0.4 / t as f64);
    let factors = (0..t).map(|_| {
        let order = rng.random_range(1..=2);
        random_ar(rng, order, radius)
    });
    DensitySpec::ScalarRational { mixing, factors: factors.collect() }
}

/// Random missing-index set made of `s` intervals with lengths 1..=3 and gaps 1..=3.
pub fn random_indices<R: Rng>(rng: &mut R, s: usize) -> Vec<i64> {
    let mut out = Vec::new();
    let mut start = rng.random_range(-3..=3);
    for _ in 0..s {
        let len = rng.random_range(1..=3);
        for k in 0..len {
            out.push(start + k);
        }
        start += len + rng.random_range(1..=3);
    }
    out
}

pub fn random_functional<R: Rng>(rng: &mut R, t: usize, indices: &[i64]) -> VectorFunctional {
    VectorFunctional::new(t, indices.iter().map(|&j| (j, random_vector(rng, t, 1.0))).collect()).unwrap()
}

/// A random interpolation problem: density, optional noise, functional.
pub struct Instance {
    pub f: DensitySpec,
    pub g: Option<DensitySpec>,
    pub a: VectorFunctional,
}

pub fn random_instance(seed: u64, t: usize, s: usize, noisy: bool) -> Instance {
    let mut r = rng(seed);
    let f = random_rational(&mut r, t, 0.8);
    let g = noisy.then(|| {
        let mut g = random_rational(&mut r, t, 0.6);
        if let DensitySpec::ScalarRational { mixing, .. } = &mut g {
            *mixing = mixing.scale(0.5);
        }
        g
    });
    let idx = random_indices(&mut r, s);
    let a = random_functional(&mut r, t, &idx);
    Instance { f, g, a }
}

/// Covariances `R(m) = (1/2π)∫ e^{imλ} f(λ) dλ` by a plain Riemann sum.
pub fn covariances(f: &DensitySpec, max_lag: i64, grid: usize) -> Vec<CMatrix> {
    let t = f.dim();
    let values: Vec<CMatrix> = (0..grid)
        .map(|n| f.evaluate(-PI + 2.0 * PI * n as f64 / grid as f64).unwrap())
        .collect();
    (0..=max_lag)
        .map(|m| {
            let mut acc = CMatrix::zeros(t, t);
            for (n, v) in values.iter().enumerate() {
                let l = -PI + 2.0 * PI * n as f64 / grid as f64;
                acc += v * Complex64::from_polar(1.0, m as f64 * l);
            }
            acc.unscale(grid as f64)
        })
        .collect()
}

fn cov_at(r: &[CMatrix], m: i64) -> CMatrix {
    if m >= 0 {
        r[m as usize].clone()
    } else {
        r[(-m) as usize].adjoint()
    }
}

/// Minimum of `E|A - Σ_{j∈W∖S} b_jᵀ x(j)|²` over all `b`, `W = [min S - L, max S + L]`,
/// observations `x = ξ + η` with covariances of `f` and `g`.
pub fn brute_force_mse(f: &DensitySpec, g: Option<&DensitySpec>, a: &VectorFunctional, window: i64) -> f64 {
    let t = a.dim();
    let idx = a.indices();
    let (lo, hi) = (idx[0] - window, idx[idx.len() - 1] + window);
    let span = hi - lo;
    let grid = 8192;
    let rf = covariances(f, span, grid);
    let rg = g.map(|g| covariances(g, span, grid));
    let obs: Vec<i64> = (lo..=hi).filter(|j| idx.binary_search(j).is_err()).collect();
    let n = obs.len() * t;

    let mut gamma = DMatrix::<Complex64>::zeros(n, n);
    for (p, &j) in obs.iter().enumerate() {
        for (q, &k) in obs.iter().enumerate() {
            let mut blk = cov_at(&rf, j - k);
            if let Some(rg) = &rg {
                blk += cov_at(rg, j - k);
            }
            gamma.view_mut((p * t, q * t), (t, t)).copy_from(&blk);
        }
    }
    let mut cross = DVector::<Complex64>::zeros(n);
    for (p, &j) in obs.iter().enumerate() {
        let mut acc = CVector::zeros(t);
        for (k, ak) in a.coeffs() {
            acc += cov_at(&rf, j - k) * ak.conjugate();
        }
        cross.rows_mut(p * t, t).copy_from(&acc);
    }
    let mut total = c(0.0, 0.0);
    for (j, aj) in a.coeffs() {
        for (k, ak) in a.coeffs() {
            total += (aj.transpose() * cov_at(&rf, j - k) * ak.conjugate())[(0, 0)];
        }
    }
    let u = gamma.clone().cholesky().expect("observation covariance is positive definite").solve(&cross);
    (total - cross.dotc(&u)).re
}
