//! Conversions between scalar periodically correlated sequences and their
//! `T`-variate stationary counterparts.
//!
//! Two maps are provided. Lifting keeps the time index and multiplies by the
//! phases `e^{2πijν/T}` (generating-sequence representation). Blocking groups
//! `T` consecutive values: `[x⃗(n)]_p = x(nT + p)`, `p = 1..T`.
//!
//! Observation indices follow the 1-based convention: a pattern interval
//! starting at `M + 1` with length `N` covers `M+1, …, M+N`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::CVector;

/// `{start, …, start + len - 1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Interval {
    pub start: i64,
    pub len: usize,
}

impl Interval {
    pub fn end(&self) -> i64 {
        self.start + self.len as i64 - 1
    }
}

fn check_intervals(intervals: &[Interval]) -> Result<()> {
    if intervals.is_empty() {
        return Err(Error::InvalidInput("pattern needs at least one interval".into()));
    }
    for (l, iv) in intervals.iter().enumerate() {
        if iv.len == 0 {
            return Err(Error::InvalidInput(format!("interval {l} is empty")));
        }
        if l > 0 && iv.start <= intervals[l - 1].end() + 1 {
            return Err(Error::InvalidInput(format!(
                "interval {l} overlaps or touches interval {}",
                l - 1
            )));
        }
    }
    Ok(())
}

fn expand(intervals: &[Interval]) -> Vec<i64> {
    intervals.iter().flat_map(|iv| iv.start..=iv.end()).collect()
}

/// Missing-observation set `S` of a `T`-periodically correlated sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MissingPattern {
    period: usize,
    intervals: Vec<Interval>,
}

impl MissingPattern {
    /// Intervals must be increasing and separated by gaps of at least one.
    pub fn new(period: usize, intervals: Vec<Interval>) -> Result<Self> {
        if period == 0 {
            return Err(Error::InvalidInput("period must be positive".into()));
        }
        check_intervals(&intervals)?;
        Ok(Self { period, intervals })
    }

    /// Pattern built from lengths `N_1, …, N_s` and gaps `K_1, …, K_{s-1}`, first index 1.
    pub fn from_lengths(period: usize, lengths: &[usize], gaps: &[usize]) -> Result<Self> {
        if gaps.len() + 1 != lengths.len() {
            return Err(Error::DimensionMismatch { expected: lengths.len().saturating_sub(1), found: gaps.len() });
        }
        let mut start = 1i64;
        let mut intervals = Vec::with_capacity(lengths.len());
        for (l, &n) in lengths.iter().enumerate() {
            intervals.push(Interval { start, len: n });
            start += n as i64 + gaps.get(l).copied().unwrap_or(0) as i64;
        }
        Self::new(period, intervals)
    }

    pub fn period(&self) -> usize {
        self.period
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    /// Gap lengths `K_l` between consecutive intervals.
    pub fn gaps(&self) -> Vec<usize> {
        self.intervals.windows(2).map(|w| (w[1].start - w[0].end() - 1) as usize).collect()
    }

    /// `ρ = N_1 + … + N_s`.
    pub fn size(&self) -> usize {
        self.intervals.iter().map(|iv| iv.len).sum()
    }

    pub fn indices(&self) -> Vec<i64> {
        expand(&self.intervals)
    }

    pub fn contains(&self, j: i64) -> bool {
        self.intervals.iter().any(|iv| iv.start <= j && j <= iv.end())
    }
}

/// Blocked pattern `S̃` (0-based block indices) of a pattern whose lengths and
/// gaps are multiples of `T`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockedPattern {
    period: usize,
    intervals: Vec<Interval>,
}

impl BlockedPattern {
    pub fn period(&self) -> usize {
        self.period
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn indices(&self) -> Vec<i64> {
        expand(&self.intervals)
    }

    /// Largest block index, `M^T_{s-1} + N^T_s - 1`.
    pub fn last(&self) -> i64 {
        self.intervals.last().map_or(0, Interval::end)
    }

    /// Back to the scalar pattern: block `j̃` covers `j̃T + 1, …, j̃T + T`.
    pub fn reconstruct(&self) -> MissingPattern {
        let t = self.period as i64;
        let intervals = self
            .intervals
            .iter()
            .map(|iv| Interval { start: iv.start * t + 1, len: iv.len * self.period })
            .collect();
        MissingPattern { period: self.period, intervals }
    }
}

/// Blocks a pattern; fails unless all starts `M_l`, lengths and gaps are multiples of `T`.
pub fn block_pattern(pattern: &MissingPattern) -> Result<BlockedPattern> {
    let t = pattern.period as i64;
    let mut intervals = Vec::with_capacity(pattern.intervals.len());
    for (l, iv) in pattern.intervals.iter().enumerate() {
        let offset = iv.start - 1;
        if offset.rem_euclid(t) != 0 {
            return Err(Error::NotBlockable(format!(
                "interval {l} starts at {} which is not 1 + a multiple of T={t}",
                iv.start
            )));
        }
        if iv.len % pattern.period != 0 {
            return Err(Error::NotBlockable(format!(
                "interval {l} has length {} which is not a multiple of T={t}",
                iv.len
            )));
        }
        intervals.push(Interval { start: offset.div_euclid(t), len: iv.len / pattern.period });
    }
    Ok(BlockedPattern { period: pattern.period, intervals })
}

/// `j = ν + j̃T` with `ν ∈ 1..=T`; multiples of `T` map to `ν = T`, `j̃ = j/T - 1`.
pub fn decompose_index(j: i64, period: usize) -> (usize, i64) {
    let t = period as i64;
    let nu = (j - 1).rem_euclid(t) + 1;
    (nu as usize, (j - nu) / t)
}

/// Scalar coefficients `a(j)` on a pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarFunctional {
    coeffs: BTreeMap<i64, Complex64>,
}

impl ScalarFunctional {
    /// Coefficients on `pattern`; absent indices are zero, indices outside the pattern are rejected.
    pub fn on_pattern(pattern: &MissingPattern, given: &[(i64, Complex64)]) -> Result<Self> {
        let mut coeffs: BTreeMap<i64, Complex64> =
            pattern.indices().into_iter().map(|j| (j, Complex64::new(0.0, 0.0))).collect();
        for &(j, a) in given {
            match coeffs.get_mut(&j) {
                Some(slot) => *slot += a,
                None => return Err(Error::InvalidInput(format!("coefficient index {j} is outside the pattern"))),
            }
        }
        Ok(Self { coeffs })
    }

    /// Coefficients whose support is exactly the listed indices.
    pub fn from_pairs(pairs: &[(i64, Complex64)]) -> Result<Self> {
        let mut coeffs = BTreeMap::new();
        for &(j, a) in pairs {
            if coeffs.insert(j, a).is_some() {
                return Err(Error::InvalidInput(format!("duplicate coefficient index {j}")));
            }
        }
        if coeffs.is_empty() {
            return Err(Error::InvalidInput("functional has no coefficients".into()));
        }
        Ok(Self { coeffs })
    }

    pub fn get(&self, j: i64) -> Complex64 {
        self.coeffs.get(&j).copied().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.coeffs.iter().map(|(&j, &a)| (j, a))
    }

    pub fn indices(&self) -> Vec<i64> {
        self.coeffs.keys().copied().collect()
    }
}

/// Vector coefficients `a⃗(j) ∈ ℂ^T` on a sorted index set.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorFunctional {
    dim: usize,
    coeffs: Vec<(i64, CVector)>,
}

impl VectorFunctional {
    pub fn new(dim: usize, mut coeffs: Vec<(i64, CVector)>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("functional dimension must be positive".into()));
        }
        if coeffs.is_empty() {
            return Err(Error::InvalidInput("functional has no coefficients".into()));
        }
        coeffs.sort_by_key(|(j, _)| *j);
        for w in coeffs.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::InvalidInput(format!("duplicate coefficient index {}", w[0].0)));
            }
        }
        for (_, a) in &coeffs {
            if a.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: a.len() });
            }
        }
        Ok(Self { dim, coeffs })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coeffs(&self) -> &[(i64, CVector)] {
        &self.coeffs
    }

    pub fn indices(&self) -> Vec<i64> {
        self.coeffs.iter().map(|(j, _)| *j).collect()
    }

    pub fn get(&self, j: i64) -> Option<&CVector> {
        self.coeffs.binary_search_by_key(&j, |(k, _)| *k).ok().map(|i| &self.coeffs[i].1)
    }

    /// Stacked vector `a⃗_s` in index order.
    pub fn stacked(&self) -> CVector {
        CVector::from_iterator(
            self.dim * self.coeffs.len(),
            self.coeffs.iter().flat_map(|(_, a)| a.iter().copied()),
        )
    }

    /// `A(λ) = Σ_j a⃗(j) e^{ijλ}`.
    pub fn transfer(&self, lambda: f64) -> CVector {
        let mut acc = CVector::zeros(self.dim);
        for (j, a) in &self.coeffs {
            acc += a * Complex64::from_polar(1.0, *j as f64 * lambda);
        }
        acc
    }

    /// `Σ_j a⃗(j)ᵀ x⃗(j)`.
    pub fn apply(&self, x: &VectorSeries) -> Result<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, a) in &self.coeffs {
            let xv = x.get(*j).ok_or(Error::MissingObservation { index: *j })?;
            acc += a.iter().zip(xv).map(|(p, q)| p * q).sum::<Complex64>();
        }
        Ok(acc)
    }
}

/// Generating-sequence lift `a_ν(j) = a(j) e^{2πijν/T}`, `ν = 1..T`.
pub fn lift_functional(a: &ScalarFunctional, period: usize) -> Result<VectorFunctional> {
    if period == 0 {
        return Err(Error::InvalidInput("period must be positive".into()));
    }
    let t = period as f64;
    let coeffs = a
        .iter()
        .map(|(j, aj)| {
            let v = CVector::from_fn(period, |r, _| {
                let nu = (r + 1) as f64;
                aj * Complex64::from_polar(1.0, 2.0 * PI * (j as f64) * nu / t)
            });
            (j, v)
        })
        .collect();
    VectorFunctional::new(period, coeffs)
}

/// Blocked functional `a_p(j̃) = a(p + j̃T)` on `S̃`.
pub fn block_functional(a: &ScalarFunctional, pattern: &MissingPattern) -> Result<VectorFunctional> {
    let blocked = block_pattern(pattern)?;
    for (j, _) in a.iter() {
        if !pattern.contains(j) {
            return Err(Error::InvalidInput(format!("coefficient index {j} is outside the pattern")));
        }
    }
    let t = pattern.period() as i64;
    let coeffs = blocked
        .indices()
        .into_iter()
        .map(|jt| (jt, CVector::from_fn(pattern.period(), |r, _| a.get(r as i64 + 1 + jt * t))))
        .collect();
    VectorFunctional::new(pattern.period(), coeffs)
}

/// Phase-form coefficients `a_ν(j̃) = a(j̃) e^{2πi j̃ν/T}` from block amplitudes `a(j̃)`.
pub fn phase_form(amplitudes: &[(i64, Complex64)], period: usize) -> Result<VectorFunctional> {
    let sf = ScalarFunctional::from_pairs(amplitudes)?;
    lift_functional(&sf, period)
}

/// Scalar series `x(j)` for `j = origin, origin + 1, …`.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub origin: i64,
    pub values: Vec<Complex64>,
}

impl Series {
    pub fn get(&self, j: i64) -> Option<Complex64> {
        usize::try_from(j - self.origin).ok().and_then(|k| self.values.get(k).copied())
    }
}

/// `T`-variate series `x⃗(n)` for `n = origin, origin + 1, …`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorSeries {
    pub dim: usize,
    pub origin: i64,
    pub data: Vec<Complex64>,
}

impl VectorSeries {
    pub fn new(dim: usize, origin: i64, data: Vec<Complex64>) -> Result<Self> {
        if dim == 0 || !data.len().is_multiple_of(dim) {
            return Err(Error::InvalidInput("series data length must be a multiple of its dimension".into()));
        }
        Ok(Self { dim, origin, data })
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn get(&self, n: i64) -> Option<&[Complex64]> {
        let k = usize::try_from(n - self.origin).ok()?;
        self.data.get(k * self.dim..(k + 1) * self.dim)
    }
}

/// `[x⃗(n)]_p = x(nT + p)`; the series must start at `1 + nT` and have length a multiple of `T`.
pub fn block_series(x: &Series, period: usize) -> Result<VectorSeries> {
    let t = period as i64;
    if period == 0 {
        return Err(Error::InvalidInput("period must be positive".into()));
    }
    if !x.values.len().is_multiple_of(period) {
        return Err(Error::InvalidInput(format!(
            "series length {} is not a multiple of T={period}",
            x.values.len()
        )));
    }
    if (x.origin - 1).rem_euclid(t) != 0 {
        return Err(Error::InvalidInput(format!(
            "series origin {} is not 1 + a multiple of T={period}",
            x.origin
        )));
    }
    VectorSeries::new(period, (x.origin - 1).div_euclid(t), x.values.clone())
}

pub fn unblock_series(v: &VectorSeries) -> Series {
    Series { origin: v.origin * v.dim as i64 + 1, values: v.data.clone() }
}

/// Blocked filter taps `h⃗_n` to scalar taps at `nT + p`.
pub fn unblock_taps(taps: &[(i64, CVector)], period: usize) -> Vec<(i64, Complex64)> {
    let t = period as i64;
    let mut out: Vec<(i64, Complex64)> = taps
        .iter()
        .flat_map(|(n, h)| h.iter().enumerate().map(move |(p, &v)| (n * t + p as i64 + 1, v)))
        .collect();
    out.sort_by_key(|(j, _)| *j);
    out
}
