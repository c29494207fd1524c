use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::density::DensitySpec;
use crate::error::{Error, Result};
use crate::linalg::{hermitian_extent, CMatrix, CVector, CONDITION_LIMIT, POSITIVITY_FLOOR};

pub const DEFAULT_GRID: usize = 4096;

/// Uniform quadrature grid `λ_n = -π + 2πn/N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadratureConfig {
    pub grid: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self { grid: DEFAULT_GRID }
    }
}

impl QuadratureConfig {
    pub fn new(grid: usize) -> Result<Self> {
        let q = Self { grid };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid < 8 || !self.grid.is_power_of_two() {
            return Err(Error::InvalidInput(format!(
                "quadrature grid must be a power of two >= 8, got {}",
                self.grid
            )));
        }
        Ok(())
    }

    pub fn node(&self, n: usize) -> f64 {
        node(self.grid, n)
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.grid).map(move |n| self.node(n))
    }

    /// The grid actually used with the given densities: a grid density
    /// forces its own sample count.
    pub fn effective_for(&self, densities: &[&DensitySpec]) -> Result<Self> {
        let mut grid = None;
        for d in densities {
            if let Some(n) = d.native_grid() {
                match grid {
                    Some(g) if g != n => {
                        return Err(Error::InvalidInput(format!(
                            "grid densities disagree on sample count ({g} vs {n})"
                        )))
                    }
                    _ => grid = Some(n),
                }
            }
        }
        let q = Self { grid: grid.unwrap_or(self.grid) };
        q.validate()?;
        Ok(q)
    }
}

#[inline]
pub fn node(grid: usize, n: usize) -> f64 {
    -PI + 2.0 * PI * n as f64 / grid as f64
}

/// `(1/2π) ∫ fun(λ) e^{-i·lag·λ} dλ` by the trapezoid rule on the grid.
pub fn fourier_coeff<F>(fun: F, lag: i64, quad: &QuadratureConfig) -> Result<CMatrix>
where
    F: Fn(f64) -> Result<CMatrix>,
{
    quad.validate()?;
    let mut acc: Option<CMatrix> = None;
    for n in 0..quad.grid {
        let lambda = quad.node(n);
        let v = fun(lambda)?;
        if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite { lambda });
        }
        let w = Complex64::from_polar(1.0, -(lag as f64) * lambda);
        match acc.as_mut() {
            Some(a) => *a += v * w,
            None => acc = Some(v * w),
        }
    }
    Ok(acc.expect("grid is non-empty").unscale(quad.grid as f64))
}

/// All Fourier coefficients of a sampled matrix function, via one FFT per entry.
///
/// Coefficient `m` is meaningful for `|m| < N/2`.
#[derive(Debug, Clone)]
pub struct CoefficientTable {
    rows: usize,
    cols: usize,
    grid: usize,
    // data[(r * cols + c) * grid + (m mod grid)]
    data: Vec<Complex64>,
}

impl CoefficientTable {
    pub fn from_samples(samples: &[CMatrix]) -> Result<Self> {
        let grid = samples.len();
        let (rows, cols) = samples.first().map_or((0, 0), |s| s.shape());
        let mut data = vec![Complex64::new(0.0, 0.0); rows * cols * grid];
        for (n, s) in samples.iter().enumerate() {
            for r in 0..rows {
                for c in 0..cols {
                    let z = s[(r, c)];
                    if !z.re.is_finite() || !z.im.is_finite() {
                        return Err(Error::NonFinite { lambda: node(grid, n) });
                    }
                    data[(r * cols + c) * grid + n] = z;
                }
            }
        }
        let fft = FftPlanner::new().plan_fft_forward(grid);
        let scale = 1.0 / grid as f64;
        for chunk in data.chunks_mut(grid) {
            fft.process(chunk);
            for (m, z) in chunk.iter_mut().enumerate() {
                let sign = if m % 2 == 0 { scale } else { -scale };
                *z *= sign;
            }
        }
        Ok(Self { rows, cols, grid, data })
    }

    pub fn grid(&self) -> usize {
        self.grid
    }

    /// Largest lag magnitude served without aliasing ambiguity.
    pub fn max_lag(&self) -> i64 {
        (self.grid / 2 - 1) as i64
    }

    pub fn coeff(&self, m: i64) -> CMatrix {
        let idx = m.rem_euclid(self.grid as i64) as usize;
        CMatrix::from_fn(self.rows, self.cols, |r, c| self.data[(r * self.cols + c) * self.grid + idx])
    }
}

/// Values `Σ_j taps_j e^{ijλ_n}` on the grid, one vector per node.
pub fn trig_sum_on_grid(dim: usize, taps: &[(i64, CVector)], grid: usize) -> Vec<CVector> {
    let mut buf = vec![Complex64::new(0.0, 0.0); dim * grid];
    for (j, h) in taps {
        let idx = j.rem_euclid(grid as i64) as usize;
        let sign = if j.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        for c in 0..dim {
            buf[c * grid + idx] += h[c] * sign;
        }
    }
    let fft = FftPlanner::new().plan_fft_inverse(grid);
    for chunk in buf.chunks_mut(grid) {
        fft.process(chunk);
    }
    (0..grid).map(|n| CVector::from_fn(dim, |c, _| buf[c * grid + n])).collect()
}

/// Numeric surrogate for the minimality (integrability) condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimalityReport {
    pub ok: bool,
    pub max_condition: f64,
    pub min_eigenvalue: f64,
}

/// Checks that `f + g` is uniformly positive definite and well conditioned on the grid.
pub fn check_minimality(
    f: &DensitySpec,
    g: Option<&DensitySpec>,
    quad: &QuadratureConfig,
) -> Result<MinimalityReport> {
    if let Some(g) = g {
        if g.dim() != f.dim() {
            return Err(Error::DimensionMismatch { expected: f.dim(), found: g.dim() });
        }
    }
    let quad = match g {
        Some(g) => quad.effective_for(&[f, g])?,
        None => quad.effective_for(&[f])?,
    };
    let mut min_eigenvalue = f64::INFINITY;
    let mut max_condition: f64 = 1.0;
    for lambda in quad.nodes() {
        let mut m = f.evaluate(lambda)?;
        if let Some(g) = g {
            m += g.evaluate(lambda)?;
        }
        let (lo, cond) = hermitian_extent(&m);
        min_eigenvalue = min_eigenvalue.min(lo);
        max_condition = max_condition.max(cond);
    }
    let ok = min_eigenvalue > POSITIVITY_FLOOR && max_condition < CONDITION_LIMIT;
    Ok(MinimalityReport { ok, max_condition, min_eigenvalue })
}
