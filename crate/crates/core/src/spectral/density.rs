use std::f64::consts::PI;

use num_complex::Complex64;

use super::trig::TrigPolynomial;
use crate::error::{Error, Result};
use crate::linalg::{hermitian_part, inverse, max_abs, CMatrix};

/// Scalar autoregressive polynomial `p(z) = Σ_k coeffs[k] z^k`, `z = e^{-iλ}`,
/// describing the spectral term `1 / |p(e^{-iλ})|²`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarAr {
    pub coeffs: Vec<Complex64>,
}

impl ScalarAr {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        Self { coeffs }
    }

    /// `1 / |1 - u e^{-iλ}|²`.
    pub fn first_order(u: f64) -> Self {
        Self::new(vec![Complex64::new(1.0, 0.0), Complex64::new(-u, 0.0)])
    }

    pub fn evaluate(&self, lambda: f64) -> Complex64 {
        let z = Complex64::from_polar(1.0, -lambda);
        self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// Coefficient of `e^{imλ}` in `|p(e^{-iλ})|²`.
    pub fn power_coeff(&self, m: i64) -> Complex64 {
        let k = m.unsigned_abs() as usize;
        let p = &self.coeffs;
        let s: Complex64 = (0..p.len().saturating_sub(k)).map(|j| p[j] * p[j + k].conj()).sum();
        if m >= 0 {
            s
        } else {
            s.conj()
        }
    }
}

/// A `T×T` Hermitian spectral density matrix function on `[-π, π)`.
#[derive(Debug, Clone, PartialEq)]
pub enum DensitySpec {
    /// `f(λ) = H`.
    Constant(CMatrix),
    /// `f(λ) = L diag(1/|p_i(e^{-iλ})|²) L*` with `L` of size `T×r`.
    ScalarRational { mixing: CMatrix, factors: Vec<ScalarAr> },
    /// `f(λ) = Θ(z) Θ(z)*`, `Θ(z) = Σ Θ(k) z^k`, `z = e^{-iλ}`.
    MovingAverage(Vec<CMatrix>),
    /// `f(λ) = (Σ P(g) e^{igλ})^{-1}`.
    InverseTrig(TrigPolynomial),
    /// Samples at `λ_n = -π + 2πn/N`, `N` a power of two.
    Grid(Vec<CMatrix>),
}

impl DensitySpec {
    pub fn dim(&self) -> usize {
        match self {
            DensitySpec::Constant(h) => h.nrows(),
            DensitySpec::ScalarRational { mixing, .. } => mixing.nrows(),
            DensitySpec::MovingAverage(theta) => theta.first().map_or(0, |t| t.nrows()),
            DensitySpec::InverseTrig(p) => p.dim(),
            DensitySpec::Grid(samples) => samples.first().map_or(0, |s| s.nrows()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let t = self.dim();
        if t == 0 {
            return Err(Error::InvalidInput("density dimension must be positive".into()));
        }
        let square = |m: &CMatrix| -> Result<()> {
            if m.nrows() != t || m.ncols() != t {
                Err(Error::DimensionMismatch { expected: t, found: m.nrows().max(m.ncols()) })
            } else {
                Ok(())
            }
        };
        match self {
            DensitySpec::Constant(h) => {
                square(h)?;
                check_hermitian(h)
            }
            DensitySpec::ScalarRational { mixing, factors } => {
                if factors.len() != mixing.ncols() {
                    return Err(Error::DimensionMismatch { expected: mixing.ncols(), found: factors.len() });
                }
                for p in factors {
                    if p.coeffs.is_empty() || p.coeffs.iter().all(|c| c.norm() == 0.0) {
                        return Err(Error::InvalidInput("empty autoregressive polynomial".into()));
                    }
                    if !circle_min_modulus(p).is_normal() {
                        return Err(Error::InvalidInput(
                            "autoregressive polynomial vanishes on the unit circle".into(),
                        ));
                    }
                }
                Ok(())
            }
            DensitySpec::MovingAverage(theta) => theta.iter().try_for_each(square),
            DensitySpec::InverseTrig(_) => Ok(()),
            DensitySpec::Grid(samples) => {
                let n = samples.len();
                if n < 8 || !n.is_power_of_two() {
                    return Err(Error::InvalidInput(format!(
                        "grid density needs a power-of-two sample count >= 8, got {n}"
                    )));
                }
                samples.iter().try_for_each(square)
            }
        }
    }

    /// Evaluates the (symmetrized) density at `lambda`.
    pub fn evaluate(&self, lambda: f64) -> Result<CMatrix> {
        let m = match self {
            DensitySpec::Constant(h) => h.clone(),
            DensitySpec::ScalarRational { mixing, factors } => {
                let mut scaled = mixing.clone();
                for (i, p) in factors.iter().enumerate() {
                    let w = 1.0 / p.evaluate(lambda).norm_sqr();
                    scaled.column_mut(i).scale_mut(w);
                }
                scaled * mixing.adjoint()
            }
            DensitySpec::MovingAverage(theta) => {
                let t = self.dim();
                let mut acc = CMatrix::zeros(t, t);
                for (k, th) in theta.iter().enumerate() {
                    acc += th * Complex64::from_polar(1.0, -(k as f64) * lambda);
                }
                &acc * acc.adjoint()
            }
            DensitySpec::InverseTrig(p) => {
                inverse(&p.evaluate(lambda)).ok_or(Error::NonFinite { lambda })?
            }
            DensitySpec::Grid(samples) => {
                let n = samples.len();
                let pos = (lambda + PI) * n as f64 / (2.0 * PI);
                let idx = pos.round();
                if (pos - idx).abs() > 1e-9 || idx < 0.0 || idx >= n as f64 {
                    return Err(Error::OffGrid { lambda });
                }
                samples[idx as usize].clone()
            }
        };
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite { lambda });
        }
        Ok(hermitian_part(&m))
    }

    /// Sample count of a grid density, `None` for analytic forms.
    pub fn native_grid(&self) -> Option<usize> {
        match self {
            DensitySpec::Grid(samples) => Some(samples.len()),
            _ => None,
        }
    }

    /// Exact inverse as a trig polynomial, when the form admits one.
    pub fn inverse_trig(&self) -> Option<TrigPolynomial> {
        match self {
            DensitySpec::Constant(h) => TrigPolynomial::constant(inverse(h)?).ok(),
            DensitySpec::InverseTrig(p) => Some(p.clone()),
            DensitySpec::MovingAverage(theta) if theta.len() == 1 => {
                let th = &theta[0];
                TrigPolynomial::constant(inverse(&(th * th.adjoint()))?).ok()
            }
            DensitySpec::ScalarRational { mixing, factors } => {
                if !mixing.is_square() {
                    return None;
                }
                let linv = inverse(mixing)?;
                let deg = factors.iter().map(|p| p.coeffs.len().saturating_sub(1)).max().unwrap_or(0);
                let t = mixing.nrows();
                let coeffs = (0..=deg as i64)
                    .map(|m| {
                        let mut diag = CMatrix::zeros(t, t);
                        for (i, p) in factors.iter().enumerate() {
                            diag[(i, i)] = p.power_coeff(m);
                        }
                        linv.adjoint() * diag * &linv
                    })
                    .collect();
                TrigPolynomial::new(coeffs).ok()
            }
            DensitySpec::MovingAverage(_) | DensitySpec::Grid(_) => None,
        }
    }
}

fn check_hermitian(h: &CMatrix) -> Result<()> {
    let skew = max_abs(&(h - h.adjoint()));
    if skew > 1e-9 * (1.0 + max_abs(h)) {
        return Err(Error::InvalidInput(format!("matrix is not Hermitian (skew {skew:.3e})")));
    }
    Ok(())
}

fn circle_min_modulus(p: &ScalarAr) -> f64 {
    (0..1024)
        .map(|n| p.evaluate(-PI + 2.0 * PI * n as f64 / 1024.0).norm())
        .fold(f64::INFINITY, f64::min)
}
