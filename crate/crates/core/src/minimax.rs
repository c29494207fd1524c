//! Least favorable spectral densities and minimax spectral characteristics for
//! the classes
//!
//! * `D0 = {f : (1/2π)∫ f^{-1} dλ = P}`,
//! * `DG = {f : (1/2π)∫ f^{-1} cos(gλ) dλ = P(g), g = 0..G}`,
//!
//! for blocked functionals `Σ_{k∈S̃} a⃗(k)ᵀ ζ⃗(k)` with `min S̃ = 0`.
//! The least favorable density is `f⁰ = (Σ R(k) e^{ikλ})^{-1}`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::blocking::VectorFunctional;
use crate::error::{Error, Result};
use crate::interp::{filter_mse, interpolate_with, InterpSolution, Kernels};
use crate::linalg::{hermitian_extent, hermitian_part, inverse, max_abs, rank, CMatrix, CVector};
use crate::spectral::{
    ar_factorize, fourier_coeff, grid_extent, spectral_factorize, CausalFactor, DensitySpec,
    QuadratureConfig, TrigPolynomial, DEFAULT_MAX_ITER, DEFAULT_TOL,
};

/// Tolerance for class membership of saddle-point candidates.
pub const CLASS_TOL: f64 = 1e-6;
/// Determinants below this modulus count as zero in the hypothesis check.
pub const DET_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ClassD0 {
    pub p: CMatrix,
}

impl ClassD0 {
    pub fn new(p: CMatrix) -> Result<Self> {
        check_hermitian_pd(&p, "P")?;
        Ok(Self { p: hermitian_part(&p) })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassDG {
    /// `P(0), …, P(G)`.
    pub p: Vec<CMatrix>,
}

impl ClassDG {
    pub fn new(p: Vec<CMatrix>) -> Result<Self> {
        let first = p.first().ok_or_else(|| Error::InvalidInput("class DG needs P(0)".into()))?;
        let t = first.nrows();
        for (g, pg) in p.iter().enumerate() {
            if pg.nrows() != t || pg.ncols() != t {
                return Err(Error::DimensionMismatch { expected: t, found: pg.nrows().max(pg.ncols()) });
            }
            let skew = max_abs(&(pg - pg.adjoint()));
            if skew > 1e-9 * (1.0 + max_abs(pg)) {
                return Err(Error::InvalidInput(format!("P({g}) is not Hermitian (skew {skew:.3e})")));
            }
        }
        let class = Self { p: p.iter().map(hermitian_part).collect() };
        let (lo, cond) = grid_extent(&class.polynomial()?);
        if !(lo > 0.0) || cond > crate::linalg::CONDITION_LIMIT {
            return Err(Error::HypothesisViolated {
                reason: "Σ P(g)e^{igλ} is not positive definite on the grid".into(),
                min_eigenvalue: lo,
            });
        }
        Ok(class)
    }

    pub fn g(&self) -> usize {
        self.p.len() - 1
    }

    pub fn polynomial(&self) -> Result<TrigPolynomial> {
        TrigPolynomial::new(self.p.clone())
    }
}

fn check_hermitian_pd(p: &CMatrix, name: &str) -> Result<()> {
    if !p.is_square() || p.nrows() == 0 {
        return Err(Error::InvalidInput(format!("{name} must be a non-empty square matrix")));
    }
    let skew = max_abs(&(p - p.adjoint()));
    if skew > 1e-9 * (1.0 + max_abs(p)) {
        return Err(Error::InvalidInput(format!("{name} is not Hermitian (skew {skew:.3e})")));
    }
    let (lo, _) = hermitian_extent(p);
    if !(lo > 0.0) {
        return Err(Error::HypothesisViolated {
            reason: format!("{name} is not positive definite"),
            min_eigenvalue: lo,
        });
    }
    Ok(())
}

/// Minimum-norm vector `p` with `pᵀ a0 = 1`: `p = ā0 / ‖a0‖²`.
pub fn pseudo_inverse_lead(a0: &CVector) -> Result<CVector> {
    let n2 = a0.norm_squared();
    if n2 == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(a0.conjugate().unscale(n2))
}

/// Checks performed on the assembled trig polynomial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypothesisReport {
    pub min_eigenvalue: f64,
    pub max_condition: f64,
    pub min_abs_det: f64,
}

fn check_hypothesis(r: &TrigPolynomial, quad: &QuadratureConfig) -> Result<HypothesisReport> {
    let mut min_eigenvalue = f64::INFINITY;
    let mut max_condition: f64 = 1.0;
    let mut min_abs_det = f64::INFINITY;
    for lambda in quad.nodes() {
        let m = r.evaluate(lambda);
        let (lo, cond) = hermitian_extent(&m);
        min_eigenvalue = min_eigenvalue.min(lo);
        max_condition = max_condition.max(cond);
        min_abs_det = min_abs_det.min(m.determinant().norm());
    }
    let report = HypothesisReport { min_eigenvalue, max_condition, min_abs_det };
    if !(min_eigenvalue > crate::linalg::POSITIVITY_FLOOR) || max_condition > crate::linalg::CONDITION_LIMIT {
        return Err(Error::HypothesisViolated {
            reason: "Σ R(k)e^{ikλ} is not positive definite on the grid".into(),
            min_eigenvalue,
        });
    }
    if !(min_abs_det > DET_FLOOR) {
        return Err(Error::HypothesisViolated {
            reason: "Σ R(k)e^{ikλ} has a vanishing determinant on the grid".into(),
            min_eigenvalue,
        });
    }
    Ok(report)
}

/// Least favorable density with its factorization and the minimax estimator.
#[derive(Debug, Clone)]
pub struct MinimaxSolution {
    /// `(f⁰)^{-1} = Σ R(k) e^{ikλ}`.
    pub r: TrigPolynomial,
    pub f0: DensitySpec,
    /// `Q` with `(f⁰)^{-1} = Q(z) Q(z)*`, `z = e^{-iλ}`.
    pub factor: CausalFactor,
    /// `Q` with `(f⁰)^{-1} = Q(z)* Q(z)`; coefficients of `Σ Q(k) ζ⃗(n-k) = ε⃗(n)`.
    pub ar: CausalFactor,
    /// Lagrange multipliers `α⃗_g` on `S̃`, zero where not constrained.
    pub multipliers: VectorFunctional,
    pub solution: InterpSolution,
    /// `Δ⁰ = ⟨c⁰, a⟩`.
    pub delta: f64,
    pub hypothesis: HypothesisReport,
    /// `max ‖B⁰ α - a‖`.
    pub multiplier_residual: f64,
}

fn check_blocked_functional(a: &VectorFunctional, t: usize) -> Result<Vec<i64>> {
    if a.dim() != t {
        return Err(Error::DimensionMismatch { expected: t, found: a.dim() });
    }
    let idx = a.indices();
    if idx[0] != 0 {
        return Err(Error::InvalidInput(format!(
            "blocked functional must start at index 0, starts at {}",
            idx[0]
        )));
    }
    Ok(idx)
}

fn finish(
    r: TrigPolynomial,
    multipliers: VectorFunctional,
    a: &VectorFunctional,
    quad: &QuadratureConfig,
) -> Result<MinimaxSolution> {
    let hypothesis = check_hypothesis(&r, quad)?;
    let factor = spectral_factorize(&r, DEFAULT_TOL, DEFAULT_MAX_ITER)?;
    let ar = ar_factorize(&r, DEFAULT_TOL, DEFAULT_MAX_ITER)?;
    let f0 = DensitySpec::InverseTrig(r.clone());
    let (kernels, minimality) = Kernels::build(&f0, None, quad)?;
    let solution = interpolate_with(&kernels, minimality, a)?;
    let alpha = multipliers.stacked();
    let residual = &solution.blocks.b * &alpha - a.stacked();
    let multiplier_residual = residual.camax();
    let delta = solution.delta_noiseless.unwrap_or(solution.delta);
    Ok(MinimaxSolution { r, f0, factor, ar, multipliers, solution, delta, hypothesis, multiplier_residual })
}

/// Least favorable density in `D0` for the blocked functional `a`.
///
/// `R(0) = P`, `R(k) = P p a⃗(k)ᵀ` for `k ∈ S̃∖{0}` with `p` the pseudo-inverse of
/// `a⃗(0)` (or `lead_inverse` when given, which must satisfy `pᵀ a⃗(0) = 1`).
pub fn least_favorable_d0(
    class: &ClassD0,
    a: &VectorFunctional,
    lead_inverse: Option<&CVector>,
    quad: &QuadratureConfig,
) -> Result<MinimaxSolution> {
    let t = class.p.nrows();
    let idx = check_blocked_functional(a, t)?;
    let a0 = a.get(0).expect("index 0 checked");
    if a0.norm_squared() == 0.0 {
        return Err(Error::ZeroLeadCoefficient);
    }
    let p = match lead_inverse {
        Some(p) => {
            if p.len() != t {
                return Err(Error::DimensionMismatch { expected: t, found: p.len() });
            }
            let pairing: Complex64 = p.iter().zip(a0.iter()).map(|(x, y)| x * y).sum();
            if (pairing - Complex64::new(1.0, 0.0)).norm() > 1e-10 {
                return Err(Error::InvalidInput(format!(
                    "lead inverse override does not satisfy pᵀa(0) = 1 (got {pairing})"
                )));
            }
            p.clone()
        }
        None => pseudo_inverse_lead(a0)?,
    };
    let kmax = *idx.last().unwrap() as usize;
    let pp = &class.p * &p;
    let mut coeffs = vec![CMatrix::zeros(t, t); kmax + 1];
    coeffs[0] = class.p.clone();
    for (k, ak) in a.coeffs().iter().skip(1) {
        coeffs[*k as usize] = &pp * ak.transpose();
    }
    let r = TrigPolynomial::new(coeffs)?;

    let alpha0 = inverse(&class.p.transpose()).ok_or(Error::SingularSystem { condition: f64::INFINITY })? * a0;
    let multipliers = VectorFunctional::new(
        t,
        idx.iter().map(|&k| (k, if k == 0 { alpha0.clone() } else { CVector::zeros(t) })).collect(),
    )?;
    finish(r, multipliers, a, quad)
}

/// Least favorable density in `DG` for the blocked functional `a`.
///
/// When `G ≥ max S̃` the density is `(Σ_{|g|≤G} P(g) e^{igλ})^{-1}`. Otherwise
/// `S̃ ∩ {0..G}` must be `{0..G'}`; the multipliers `α⃗_0..α⃗_{G'}` solve the leading
/// block equations and the coefficients `R(k)`, `k ∈ S̃`, `k > G`, are completed in
/// increasing order from the remaining equations `Σ_g R(k-g)ᵀ α⃗_g = a⃗(k)` by the
/// rank-one choice `R(k) = P(0) pinv(P(0)ᵀ α⃗_0) b⃗(k)ᵀ`.
pub fn least_favorable_dg(class: &ClassDG, a: &VectorFunctional, quad: &QuadratureConfig) -> Result<MinimaxSolution> {
    let t = class.p[0].nrows();
    let idx = check_blocked_functional(a, t)?;
    let g_max = class.g() as i64;
    let kmax = *idx.last().unwrap();

    if g_max >= kmax {
        let r = class.polynomial()?;
        let f0 = DensitySpec::InverseTrig(r.clone());
        let (kernels, _) = Kernels::build(&f0, None, quad)?;
        let bm = crate::interp::assemble_with(&kernels, &idx)?;
        let alpha = crate::interp::solve_coefficients(&bm, &a.stacked())?;
        let multipliers = VectorFunctional::new(
            t,
            idx.iter().enumerate().map(|(p, &k)| (k, alpha.rows(p * t, t).into_owned())).collect(),
        )?;
        return finish(r, multipliers, a, quad);
    }

    // S̃ ∩ {0..G} must be an initial segment {0..G'}.
    let low: Vec<i64> = idx.iter().copied().filter(|&k| k <= g_max).collect();
    let g_prime = *low.last().unwrap();
    if low.len() as i64 != g_prime + 1 {
        return Err(Error::Unsupported(format!(
            "S̃ ∩ {{0..{g_max}}} = {low:?} is not an initial segment"
        )));
    }
    let known = class.polynomial()?;
    let mut rk: Vec<CMatrix> = (0..=kmax).map(|k| if k <= g_max { known.coeff(k) } else { CMatrix::zeros(t, t) }).collect();
    let lag = |rk: &Vec<CMatrix>, m: i64| -> CMatrix {
        if m >= 0 {
            rk[m as usize].clone()
        } else {
            rk[(-m) as usize].adjoint()
        }
    };

    // Leading system Σ_{g=0}^{G'} R(k-g)ᵀ α_g = a(k), k = 0..G'.
    let n = ((g_prime + 1) as usize) * t;
    let mut m = CMatrix::zeros(n, n);
    let mut rhs = CVector::zeros(n);
    for k in 0..=g_prime {
        for g in 0..=g_prime {
            m.view_mut((k as usize * t, g as usize * t), (t, t)).copy_from(&lag(&rk, k - g).transpose());
        }
        rhs.rows_mut(k as usize * t, t).copy_from(a.get(k).expect("initial segment"));
    }
    let r_m = rank(&m, 1e-12);
    if r_m < n {
        return Err(Error::UnderdeterminedSystem { rank: r_m, expected: n });
    }
    let alpha = m.lu().solve(&rhs).ok_or(Error::UnderdeterminedSystem { rank: r_m, expected: n })?;
    let alpha_g: Vec<CVector> = (0..=g_prime).map(|g| alpha.rows(g as usize * t, t).into_owned()).collect();

    let v = class.p[0].transpose() * &alpha_g[0];
    if v.norm_squared() == 0.0 {
        return Err(Error::UnderdeterminedSystem { rank: 0, expected: t });
    }
    let pv = &class.p[0] * pseudo_inverse_lead(&v)?;
    for &k in idx.iter().filter(|&&k| k > g_max) {
        let mut b = a.get(k).expect("pattern index").clone();
        for (g, ag) in alpha_g.iter().enumerate().skip(1) {
            b -= lag(&rk, k - g as i64).transpose() * ag;
        }
        rk[k as usize] = &pv * b.transpose();
    }
    let r = TrigPolynomial::new(rk)?;
    let multipliers = VectorFunctional::new(
        t,
        idx.iter()
            .map(|&k| (k, if k <= g_prime { alpha_g[k as usize].clone() } else { CVector::zeros(t) }))
            .collect(),
    )?;
    finish(r, multipliers, a, quad)
}

/// Outcome of sampling the saddle-point inequality `Δ(h⁰; f) ≤ Δ⁰`.
#[derive(Debug, Clone)]
pub struct SaddleReport {
    pub delta0: f64,
    /// `Δ(h⁰; f)` per candidate.
    pub values: Vec<f64>,
    /// `max_f Δ(h⁰; f) - Δ⁰`.
    pub max_excess: f64,
    /// Candidates with `Δ(h⁰; f) > Δ⁰ + tol`.
    pub violations: Vec<usize>,
}

impl SaddleReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Class constraint used to validate candidates.
#[derive(Debug, Clone)]
pub enum ClassConstraint<'a> {
    D0(&'a ClassD0),
    DG(&'a ClassDG),
}

/// `max_g ‖(1/2π)∫ f^{-1} cos(gλ) dλ - P(g)‖` over the constrained lags.
pub fn class_deviation(f: &DensitySpec, class: &ClassConstraint<'_>, quad: &QuadratureConfig) -> Result<f64> {
    let targets: Vec<CMatrix> = match class {
        ClassConstraint::D0(c) => vec![c.p.clone()],
        ClassConstraint::DG(c) => c.p.clone(),
    };
    let q = quad.effective_for(&[f])?;
    let finv = |l: f64| inverse(&f.evaluate(l)?).ok_or(Error::NonFinite { lambda: l });
    let mut worst: f64 = 0.0;
    for (g, target) in targets.iter().enumerate() {
        let plus = fourier_coeff(finv, g as i64, &q)?;
        let minus = fourier_coeff(finv, -(g as i64), &q)?;
        let cosine = (plus + minus).scale(0.5);
        worst = worst.max(max_abs(&(cosine - target)));
    }
    Ok(worst)
}

/// Evaluates `Δ(h⁰; f) = (1/2π)∫ (A - h⁰)ᵀ f (A - h⁰)‾ dλ` for each candidate `f`
/// and compares it with `Δ⁰`. Candidates outside the class are rejected.
pub fn verify_saddle(
    solution: &MinimaxSolution,
    class: &ClassConstraint<'_>,
    candidates: &[DensitySpec],
    a: &VectorFunctional,
    tol: f64,
    quad: &QuadratureConfig,
) -> Result<SaddleReport> {
    let values: Vec<f64> = candidates
        .par_iter()
        .enumerate()
        .map(|(i, f)| {
            let deviation = class_deviation(f, class, quad)?;
            if deviation > CLASS_TOL {
                return Err(Error::CandidateOutOfClass { index: i, deviation });
            }
            filter_mse(f, None, a, &solution.solution.taps, quad)
        })
        .collect::<Result<_>>()?;
    let delta0 = solution.delta;
    let max_excess = values.iter().map(|v| v - delta0).fold(f64::NEG_INFINITY, f64::max);
    let violations = values.iter().enumerate().filter(|(_, v)| **v > delta0 + tol).map(|(i, _)| i).collect();
    Ok(SaddleReport { delta0, values, max_excess, violations })
}

/// In-class candidate `((f⁰)^{-1} + ε Z)^{-1}` where `Z` has zero coefficients on
/// the constrained lags `0..=fixed`.
pub fn perturbed_candidate(r: &TrigPolynomial, z: &[CMatrix], fixed: usize, eps: f64) -> Result<DensitySpec> {
    let t = r.dim();
    let deg = r.degree().max(z.len().saturating_sub(1));
    let mut coeffs = Vec::with_capacity(deg + 1);
    for g in 0..=deg {
        let mut c = r.coeff(g as i64);
        if g > fixed {
            if let Some(zg) = z.get(g) {
                c += zg.scale(eps);
            }
        }
        coeffs.push(c);
    }
    debug_assert!(coeffs.iter().all(|c| c.nrows() == t));
    Ok(DensitySpec::InverseTrig(TrigPolynomial::new(coeffs)?))
}
