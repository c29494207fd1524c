//! Optimal linear interpolation of a functional `A = Σ_{j∈S} a⃗(j)ᵀ ξ⃗(j)` of a
//! stationary vector sequence from observations `ξ⃗(j) + η⃗(j)`, `j ∉ S`.
//!
//! Conventions: `h_j = (1/2π)∫ h(λ) e^{-ijλ} dλ` is the coefficient of `e^{ijλ}`
//! and the estimate is `Â = Σ_{j∉S} h_jᵀ x⃗(j)`. With `W = (f+g)^{-1}` and
//! `F(m)` the coefficient of `e^{imλ}` of a matrix function, the block matrices
//! are `B(k,j) = F_W(k-j)ᵀ`, `D(k,j) = F_{fW}(k-j)ᵀ`, `R(k,j) = F_{fWg}(k-j)ᵀ`,
//! the coefficients solve `B c = D a`, and `Δ = aᴴ R a + cᴴ B c`.

use num_complex::Complex64;

use crate::blocking::{VectorFunctional, VectorSeries};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_part, inverse, solve_hermitian, CMatrix, CVector};
use crate::spectral::{
    check_minimality, node, trig_sum_on_grid, CoefficientTable, DensitySpec, MinimalityReport,
    QuadratureConfig, TrigPolynomial,
};

/// Fraction of tap energy retained by the truncation window.
pub const TAP_ENERGY: f64 = 1.0 - 1e-10;
/// Relative residual accepted from the coefficient solve.
pub const SOLVE_RESIDUAL: f64 = 1e-10;

/// Fourier coefficients of `W`, `fW` and `fWg`.
#[derive(Debug, Clone)]
pub(crate) enum Kernels {
    /// Noiseless with an exact trig-polynomial inverse `f^{-1}`.
    Exact { finv: TrigPolynomial },
    Table { w: CoefficientTable, noisy: Option<(CoefficientTable, CoefficientTable)> },
}

impl Kernels {
    pub(crate) fn build(
        f: &DensitySpec,
        g: Option<&DensitySpec>,
        quad: &QuadratureConfig,
    ) -> Result<(Self, MinimalityReport)> {
        f.validate()?;
        if let Some(g) = g {
            g.validate()?;
            if g.dim() != f.dim() {
                return Err(Error::DimensionMismatch { expected: f.dim(), found: g.dim() });
            }
        }
        let report = check_minimality(f, g, quad)?;
        if !report.ok {
            return Err(Error::MinimalityViolation {
                min_eigenvalue: report.min_eigenvalue,
                condition: report.max_condition,
            });
        }
        if g.is_none() {
            if let Some(finv) = f.inverse_trig() {
                return Ok((Kernels::Exact { finv }, report));
            }
        }
        let quad = match g {
            Some(g) => quad.effective_for(&[f, g])?,
            None => quad.effective_for(&[f])?,
        };
        let t = f.dim();
        let mut ws = Vec::with_capacity(quad.grid);
        let mut fws = Vec::new();
        let mut fwgs = Vec::new();
        for lambda in quad.nodes() {
            let fv = f.evaluate(lambda)?;
            match g {
                None => {
                    ws.push(hermitian_part(&inverse(&fv).ok_or(Error::NonFinite { lambda })?));
                }
                Some(g) => {
                    let gv = g.evaluate(lambda)?;
                    let w = hermitian_part(&inverse(&(&fv + &gv)).ok_or(Error::NonFinite { lambda })?);
                    let fw = &fv * &w;
                    fwgs.push(hermitian_part(&(&fw * &gv)));
                    fws.push(fw);
                    ws.push(w);
                }
            }
        }
        debug_assert!(ws.iter().all(|w| w.nrows() == t));
        let w = CoefficientTable::from_samples(&ws)?;
        let noisy = if g.is_some() {
            Some((CoefficientTable::from_samples(&fws)?, CoefficientTable::from_samples(&fwgs)?))
        } else {
            None
        };
        Ok((Kernels::Table { w, noisy }, report))
    }

    pub(crate) fn noiseless(&self) -> bool {
        matches!(self, Kernels::Exact { .. } | Kernels::Table { noisy: None, .. })
    }

    pub(crate) fn dim(&self) -> usize {
        match self {
            Kernels::Exact { finv } => finv.dim(),
            Kernels::Table { w, .. } => w.coeff(0).nrows(),
        }
    }

    /// Largest usable lag, `None` when the kernel is a finite trig polynomial.
    pub(crate) fn max_lag(&self) -> Option<i64> {
        match self {
            Kernels::Exact { .. } => None,
            Kernels::Table { w, .. } => Some(w.max_lag()),
        }
    }

    pub(crate) fn w(&self, m: i64) -> CMatrix {
        match self {
            Kernels::Exact { finv } => finv.coeff(m),
            Kernels::Table { w, .. } => w.coeff(m),
        }
    }

    pub(crate) fn fw(&self, m: i64) -> CMatrix {
        match self {
            Kernels::Table { noisy: Some((fw, _)), .. } => fw.coeff(m),
            _ => identity_lag(self.dim(), m),
        }
    }

    pub(crate) fn fwg(&self, m: i64) -> CMatrix {
        match self {
            Kernels::Table { noisy: Some((_, fwg)), .. } => fwg.coeff(m),
            _ => CMatrix::zeros(self.dim(), self.dim()),
        }
    }
}

fn identity_lag(t: usize, m: i64) -> CMatrix {
    if m == 0 {
        CMatrix::identity(t, t)
    } else {
        CMatrix::zeros(t, t)
    }
}

/// Position of one scalar row/column of the block matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockIndex {
    /// Interval number `l` (maximal run of consecutive indices).
    pub interval: usize,
    /// Offset of the index within its interval.
    pub offset: usize,
    /// Time index `j`.
    pub index: i64,
    /// Component `ν`, 0-based.
    pub component: usize,
}

/// `B_s`, `D_s`, `R_s` with their row/column map.
#[derive(Debug, Clone)]
pub struct BlockMatrices {
    pub b: CMatrix,
    pub d: CMatrix,
    pub r: CMatrix,
    pub index_map: Vec<BlockIndex>,
    pub indices: Vec<i64>,
    pub dim: usize,
    pub noiseless: bool,
}

fn check_indices(indices: &[i64], max_lag: Option<i64>) -> Result<()> {
    if indices.is_empty() {
        return Err(Error::InvalidInput("empty missing-index set".into()));
    }
    if indices.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput("missing indices must be strictly increasing".into()));
    }
    if let Some(max_lag) = max_lag {
        let span = indices[indices.len() - 1] - indices[0];
        if span >= max_lag {
            return Err(Error::InvalidInput(format!(
                "pattern span {span} is too wide for the quadrature grid (limit {max_lag})"
            )));
        }
    }
    Ok(())
}

fn index_map(indices: &[i64], t: usize) -> Vec<BlockIndex> {
    let mut map = Vec::with_capacity(indices.len() * t);
    let (mut interval, mut offset) = (0usize, 0usize);
    for (pos, &j) in indices.iter().enumerate() {
        if pos > 0 {
            if j == indices[pos - 1] + 1 {
                offset += 1;
            } else {
                interval += 1;
                offset = 0;
            }
        }
        for component in 0..t {
            map.push(BlockIndex { interval, offset, index: j, component });
        }
    }
    map
}

fn toeplitz<F: Fn(i64) -> CMatrix>(indices: &[i64], t: usize, coeff: F) -> CMatrix {
    let n = indices.len();
    let mut m = CMatrix::zeros(n * t, n * t);
    for (p, &k) in indices.iter().enumerate() {
        for (q, &j) in indices.iter().enumerate() {
            let blk = coeff(k - j).transpose();
            m.view_mut((p * t, q * t), (t, t)).copy_from(&blk);
        }
    }
    m
}

pub(crate) fn assemble_with(kernels: &Kernels, indices: &[i64]) -> Result<BlockMatrices> {
    check_indices(indices, kernels.max_lag())?;
    let t = kernels.dim();
    let b = hermitian_part(&toeplitz(indices, t, |m| kernels.w(m)));
    let (d, r) = if kernels.noiseless() {
        let n = indices.len() * t;
        (CMatrix::identity(n, n), CMatrix::zeros(n, n))
    } else {
        (toeplitz(indices, t, |m| kernels.fw(m)), hermitian_part(&toeplitz(indices, t, |m| kernels.fwg(m))))
    };
    Ok(BlockMatrices {
        b,
        d,
        r,
        index_map: index_map(indices, t),
        indices: indices.to_vec(),
        dim: t,
        noiseless: kernels.noiseless(),
    })
}

/// Builds `B_s`, `D_s`, `R_s` for the missing vector indices `indices`.
///
/// Without noise (`g = None`) `D_s = I` and `R_s = 0`.
pub fn assemble_block_matrices(
    f: &DensitySpec,
    g: Option<&DensitySpec>,
    indices: &[i64],
    quad: &QuadratureConfig,
) -> Result<BlockMatrices> {
    let (kernels, _) = Kernels::build(f, g, quad)?;
    assemble_with(&kernels, indices)
}

/// Coefficient solve with diagnostics.
#[derive(Debug, Clone)]
pub struct CoefficientSolve {
    pub c: CVector,
    pub condition: f64,
    pub relative_residual: f64,
}

/// Solves `B_s c = D_s a_s` by a Hermitian factorization.
pub fn solve_coefficients_detailed(bm: &BlockMatrices, a: &CVector) -> Result<CoefficientSolve> {
    if a.len() != bm.b.nrows() {
        return Err(Error::DimensionMismatch { expected: bm.b.nrows(), found: a.len() });
    }
    let rhs = &bm.d * a;
    let s = solve_hermitian(&bm.b, &rhs)?;
    if s.relative_residual > SOLVE_RESIDUAL {
        return Err(Error::SingularSystem { condition: s.condition });
    }
    Ok(CoefficientSolve { c: s.x, condition: s.condition, relative_residual: s.relative_residual })
}

pub fn solve_coefficients(bm: &BlockMatrices, a: &CVector) -> Result<CVector> {
    solve_coefficients_detailed(bm, a).map(|s| s.c)
}

/// `Δ = ⟨a, R a⟩ + ⟨c, B c⟩`.
pub fn mean_square_error(a: &CVector, c: &CVector, bm: &BlockMatrices) -> f64 {
    (a.dotc(&(&bm.r * a)) + c.dotc(&(&bm.b * c))).re
}

/// Noiseless form `Δ = ⟨c, a⟩`.
pub fn mean_square_error_noiseless(a: &CVector, c: &CVector) -> f64 {
    c.dotc(a).re
}

/// Finite set of vector filter taps `h⃗_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Taps {
    dim: usize,
    taps: Vec<(i64, CVector)>,
}

impl Taps {
    pub fn new(dim: usize, mut taps: Vec<(i64, CVector)>) -> Result<Self> {
        taps.sort_by_key(|(j, _)| *j);
        if taps.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidInput("duplicate tap lag".into()));
        }
        if taps.iter().any(|(_, h)| h.len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: taps.iter().map(|(_, h)| h.len()).find(|&l| l != dim).unwrap_or(0) });
        }
        Ok(Self { dim, taps })
    }

    pub fn zero(dim: usize) -> Self {
        Self { dim, taps: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn taps(&self) -> &[(i64, CVector)] {
        &self.taps
    }

    pub fn get(&self, j: i64) -> CVector {
        match self.taps.binary_search_by_key(&j, |(k, _)| *k) {
            Ok(i) => self.taps[i].1.clone(),
            Err(_) => CVector::zeros(self.dim),
        }
    }

    /// `h(λ) = Σ_j h⃗_j e^{ijλ}`.
    pub fn transfer(&self, lambda: f64) -> CVector {
        let mut acc = CVector::zeros(self.dim);
        for (j, h) in &self.taps {
            acc += h * Complex64::from_polar(1.0, *j as f64 * lambda);
        }
        acc
    }

    /// `Σ_j h⃗_jᵀ x⃗(j)`.
    pub fn apply(&self, x: &VectorSeries) -> Result<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, h) in &self.taps {
            let xv = x.get(*j).ok_or(Error::MissingObservation { index: *j })?;
            acc += h.iter().zip(xv).map(|(p, q)| p * q).sum::<Complex64>();
        }
        Ok(acc)
    }

    /// Taps with every entry of modulus above `tol`.
    pub fn significant(&self, tol: f64) -> Vec<(i64, CVector)> {
        self.taps.iter().filter(|(_, h)| h.camax() > tol).cloned().collect()
    }

    /// Taps with the given lags removed.
    pub fn without(&self, lags: &[i64]) -> Self {
        Self { dim: self.dim, taps: self.taps.iter().filter(|(j, _)| !lags.contains(j)).cloned().collect() }
    }

    pub fn perturbed(&self, j: i64, delta: &CVector) -> Self {
        let mut taps = self.taps.clone();
        match taps.binary_search_by_key(&j, |(k, _)| *k) {
            Ok(i) => taps[i].1 += delta,
            Err(i) => taps.insert(i, (j, delta.clone())),
        }
        Self { dim: self.dim, taps }
    }
}

/// Estimate `Â = Σ_{j∉S} h⃗_jᵀ x⃗(j)`.
pub fn estimate_functional(observations: &VectorSeries, taps: &Taps) -> Result<Complex64> {
    taps.apply(observations)
}

/// Tap values and the largest `|h_j|` left at the pattern indices.
#[derive(Debug, Clone)]
pub(crate) struct RawTaps {
    pub taps: Vec<(i64, CVector)>,
    pub window: (i64, i64),
    pub residual_on_pattern: f64,
}

pub(crate) fn taps_with(
    kernels: &Kernels,
    a: &VectorFunctional,
    c: &VectorFunctional,
) -> RawTaps {
    let indices = a.indices();
    let (lo_s, hi_s) = (indices[0], indices[indices.len() - 1]);
    let reach = match (kernels, kernels.max_lag()) {
        (Kernels::Exact { finv }, _) => finv.degree() as i64,
        (_, Some(m)) => m - (hi_s - lo_s),
        (_, None) => 0,
    };
    let tap = |j: i64| -> CVector {
        let mut h = CVector::zeros(a.dim());
        for (k, ak) in a.coeffs() {
            h += kernels.fw(j - k).transpose() * ak;
        }
        for (k, ck) in c.coeffs() {
            h -= kernels.w(j - k).transpose() * ck;
        }
        h
    };
    let all: Vec<(i64, CVector)> = ((lo_s - reach)..=(hi_s + reach)).map(|j| (j, tap(j))).collect();
    let residual_on_pattern = all
        .iter()
        .filter(|(j, _)| indices.binary_search(j).is_ok())
        .map(|(_, h)| h.norm())
        .fold(0.0, f64::max);
    let outside: Vec<(i64, CVector)> =
        all.into_iter().filter(|(j, _)| indices.binary_search(j).is_err()).collect();

    let (taps, window) = match kernels {
        Kernels::Exact { .. } => {
            let scale = outside.iter().map(|(_, h)| h.camax()).fold(0.0, f64::max);
            let kept: Vec<_> = outside.into_iter().filter(|(_, h)| h.camax() > 1e-14 * scale).collect();
            (kept, (lo_s - reach, hi_s + reach))
        }
        Kernels::Table { .. } => {
            let total: f64 = outside.iter().map(|(_, h)| h.norm_squared()).sum();
            let mut l = 0;
            loop {
                let captured: f64 = outside
                    .iter()
                    .filter(|(j, _)| *j >= lo_s - l && *j <= hi_s + l)
                    .map(|(_, h)| h.norm_squared())
                    .sum();
                if captured >= TAP_ENERGY * total || l >= reach {
                    break;
                }
                l += 1;
            }
            let kept = outside.into_iter().filter(|(j, _)| *j >= lo_s - l && *j <= hi_s + l).collect();
            (kept, (lo_s - l, hi_s + l))
        }
    };
    RawTaps { taps, window, residual_on_pattern }
}

/// Time-domain taps of the spectral characteristic for coefficients `c`.
pub fn spectral_characteristic(
    f: &DensitySpec,
    g: Option<&DensitySpec>,
    a: &VectorFunctional,
    c: &VectorFunctional,
    quad: &QuadratureConfig,
) -> Result<Taps> {
    let (kernels, _) = Kernels::build(f, g, quad)?;
    check_indices(&a.indices(), kernels.max_lag())?;
    Taps::new(a.dim(), taps_with(&kernels, a, c).taps)
}

/// Pointwise evaluation of the spectral characteristic from the densities.
#[derive(Debug, Clone)]
pub struct SpectralCharacteristic<'a> {
    pub f: &'a DensitySpec,
    pub g: Option<&'a DensitySpec>,
    pub a: &'a VectorFunctional,
    pub c: &'a VectorFunctional,
}

impl<'a> SpectralCharacteristic<'a> {
    /// `hᵀ = (Aᵀ f - Cᵀ)(f+g)^{-1}`, or `Aᵀ - Cᵀ f^{-1}` without noise.
    pub fn evaluate(&self, lambda: f64) -> Result<CVector> {
        let fv = self.f.evaluate(lambda)?;
        let av = self.a.transfer(lambda);
        let cv = self.c.transfer(lambda);
        match self.g {
            None => {
                let finv = inverse(&fv).ok_or(Error::NonFinite { lambda })?;
                Ok(av - finv.transpose() * cv)
            }
            Some(g) => {
                let w = inverse(&(&fv + g.evaluate(lambda)?)).ok_or(Error::NonFinite { lambda })?;
                Ok(w.transpose() * (fv.transpose() * av - cv))
            }
        }
    }

    /// `hᵀ = Aᵀ - (Aᵀ g + Cᵀ)(f+g)^{-1}`.
    pub fn evaluate_g_form(&self, lambda: f64) -> Result<CVector> {
        let fv = self.f.evaluate(lambda)?;
        let gv = match self.g {
            Some(g) => g.evaluate(lambda)?,
            None => CMatrix::zeros(fv.nrows(), fv.ncols()),
        };
        let av = self.a.transfer(lambda);
        let cv = self.c.transfer(lambda);
        let w = inverse(&(&fv + &gv)).ok_or(Error::NonFinite { lambda })?;
        Ok(&av - w.transpose() * (gv.transpose() * &av + cv))
    }
}

/// Per-index residuals `‖(1/2π)∫ h(λ) e^{-ijλ} dλ‖`.
#[derive(Debug, Clone)]
pub struct OrthogonalityReport {
    pub residuals: Vec<(i64, f64)>,
    pub max_residual: f64,
}

impl OrthogonalityReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_residual <= tol
    }
}

/// Direct quadrature of `h(λ) e^{-ijλ}` for each `j` in `indices`.
pub fn verify_orthogonality<H>(h: H, dim: usize, indices: &[i64], quad: &QuadratureConfig) -> Result<OrthogonalityReport>
where
    H: Fn(f64) -> Result<CVector>,
{
    quad.validate()?;
    let values: Vec<CVector> = quad.nodes().map(&h).collect::<Result<_>>()?;
    let residuals: Vec<(i64, f64)> = indices
        .iter()
        .map(|&j| {
            let mut acc = CVector::zeros(dim);
            for (n, v) in values.iter().enumerate() {
                acc += v * Complex64::from_polar(1.0, -(j as f64) * node(quad.grid, n));
            }
            (j, acc.norm() / quad.grid as f64)
        })
        .collect();
    let max_residual = residuals.iter().map(|r| r.1).fold(0.0, f64::max);
    Ok(OrthogonalityReport { residuals, max_residual })
}

/// Mean square error of an arbitrary linear filter `Σ h⃗_jᵀ x⃗(j)` as an estimate
/// of `A`, by quadrature of `(A-h)ᵀ f (A-h)‾ + hᵀ g h̄`.
pub fn filter_mse(
    f: &DensitySpec,
    g: Option<&DensitySpec>,
    a: &VectorFunctional,
    taps: &Taps,
    quad: &QuadratureConfig,
) -> Result<f64> {
    let quad = match g {
        Some(g) => quad.effective_for(&[f, g])?,
        None => quad.effective_for(&[f])?,
    };
    let t = a.dim();
    let av = trig_sum_on_grid(t, a.coeffs(), quad.grid);
    let hv = trig_sum_on_grid(t, taps.taps(), quad.grid);
    let mut acc = 0.0;
    for n in 0..quad.grid {
        let lambda = quad.node(n);
        let u = &av[n] - &hv[n];
        acc += (u.transpose() * f.evaluate(lambda)? * u.conjugate())[(0, 0)].re;
        if let Some(g) = g {
            acc += (hv[n].transpose() * g.evaluate(lambda)? * hv[n].conjugate())[(0, 0)].re;
        }
    }
    Ok(acc / quad.grid as f64)
}

/// Diagnostics of an interpolation run.
#[derive(Debug, Clone)]
pub struct Diagnostics {
    pub condition: f64,
    pub relative_residual: f64,
    pub minimality: MinimalityReport,
    /// Largest `‖h_j‖`, `j ∈ S`, before those lags are dropped.
    pub pattern_residual: f64,
    /// Inclusive lag range examined for taps.
    pub window: (i64, i64),
    pub exact: bool,
}

#[derive(Debug, Clone)]
pub struct InterpSolution {
    pub blocks: BlockMatrices,
    pub c: CVector,
    /// `c⃗(j)` on the pattern indices.
    pub coefficients: VectorFunctional,
    pub taps: Taps,
    /// `⟨a, R a⟩ + ⟨c, B c⟩`.
    pub delta: f64,
    /// `⟨c, a⟩`, present without noise.
    pub delta_noiseless: Option<f64>,
    pub diagnostics: Diagnostics,
}

pub(crate) fn interpolate_with(
    kernels: &Kernels,
    minimality: MinimalityReport,
    a: &VectorFunctional,
) -> Result<InterpSolution> {
    if a.dim() != kernels.dim() {
        return Err(Error::DimensionMismatch { expected: kernels.dim(), found: a.dim() });
    }
    let indices = a.indices();
    let blocks = assemble_with(kernels, &indices)?;
    let a_s = a.stacked();
    let solve = solve_coefficients_detailed(&blocks, &a_s)?;
    let t = a.dim();
    let coefficients = VectorFunctional::new(
        t,
        indices
            .iter()
            .enumerate()
            .map(|(p, &j)| (j, solve.c.rows(p * t, t).into_owned()))
            .collect(),
    )?;
    let raw = taps_with(kernels, a, &coefficients);
    let delta = mean_square_error(&a_s, &solve.c, &blocks);
    let delta_noiseless = blocks.noiseless.then(|| mean_square_error_noiseless(&a_s, &solve.c));
    Ok(InterpSolution {
        taps: Taps::new(t, raw.taps)?,
        c: solve.c,
        coefficients,
        delta,
        delta_noiseless,
        diagnostics: Diagnostics {
            condition: solve.condition,
            relative_residual: solve.relative_residual,
            minimality,
            pattern_residual: raw.residual_on_pattern,
            window: raw.window,
            exact: matches!(kernels, Kernels::Exact { .. }),
        },
        blocks,
    })
}

/// Full pipeline: block matrices, coefficients, taps and error.
pub fn interpolate(
    f: &DensitySpec,
    g: Option<&DensitySpec>,
    a: &VectorFunctional,
    quad: &QuadratureConfig,
) -> Result<InterpSolution> {
    let (kernels, minimality) = Kernels::build(f, g, quad)?;
    interpolate_with(&kernels, minimality, a)
}
