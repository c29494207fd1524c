//! Synthetic stationary vector sequences and Monte Carlo checks of the
//! interpolation error.
//!
//! The autoregression convention is `Σ_k Q(k) x⃗(n-k) = ε⃗(n)`, whose density is
//! `(Q(z)* Q(z))^{-1}`, `z = e^{-iλ}`. Moving averages are `x⃗(n) = Σ_k Θ(k) ε⃗(n-k)`
//! with density `Θ(z) Θ(z)*`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::blocking::{VectorFunctional, VectorSeries};
use crate::error::{Error, Result};
use crate::interp::{InterpSolution, Taps};
use crate::linalg::{inverse, CMatrix};
use crate::spectral::{CausalFactor, DensitySpec, ScalarAr, TrigPolynomial};

pub const DEFAULT_BURN_IN: usize = 1024;

/// Distribution of the driving white noise (identity covariance).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoiseKind {
    /// Circularly symmetric complex Gaussian.
    #[default]
    ComplexGaussian,
    /// Real standard Gaussian.
    RealGaussian,
}

#[derive(Debug, Clone, PartialEq)]
pub enum GeneratorKind {
    /// `Σ Q(k) x⃗(n-k) = ε⃗(n)`.
    Var(Vec<CMatrix>),
    /// `x⃗(n) = Σ Θ(k) ε⃗(n-k)`.
    Ma(Vec<CMatrix>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    pub seed: u64,
    pub burn_in: usize,
    pub noise: NoiseKind,
}

impl GeneratorSpec {
    pub fn var(q: Vec<CMatrix>, seed: u64) -> Self {
        Self { kind: GeneratorKind::Var(q), seed, burn_in: DEFAULT_BURN_IN, noise: NoiseKind::default() }
    }

    pub fn ma(theta: Vec<CMatrix>, seed: u64) -> Self {
        Self { kind: GeneratorKind::Ma(theta), seed, burn_in: DEFAULT_BURN_IN, noise: NoiseKind::default() }
    }

    /// Independent scalar autoregressions, one per component (the blocked
    /// form of a periodically correlated sequence built from stationary parts).
    pub fn diagonal_ar(components: &[ScalarAr], seed: u64) -> Result<Self> {
        let t = components.len();
        if t == 0 {
            return Err(Error::InvalidInput("need at least one component".into()));
        }
        let order = components.iter().map(|p| p.coeffs.len()).max().unwrap_or(0);
        let q = (0..order)
            .map(|k| {
                let mut m = CMatrix::zeros(t, t);
                for (i, p) in components.iter().enumerate() {
                    m[(i, i)] = p.coeffs.get(k).copied().unwrap_or_default();
                }
                m
            })
            .collect();
        Ok(Self::var(q, seed))
    }

    pub fn with_noise(mut self, noise: NoiseKind) -> Self {
        self.noise = noise;
        self
    }

    pub fn with_burn_in(mut self, burn_in: usize) -> Self {
        self.burn_in = burn_in;
        self
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            GeneratorKind::Var(q) | GeneratorKind::Ma(q) => q.first().map_or(0, |m| m.nrows()),
        }
    }

    fn coeffs(&self) -> &[CMatrix] {
        match &self.kind {
            GeneratorKind::Var(q) | GeneratorKind::Ma(q) => q,
        }
    }

    /// Checks shapes, invertibility of `Q(0)` and stability of the autoregression.
    pub fn validate(&self) -> Result<()> {
        let t = self.dim();
        if t == 0 {
            return Err(Error::InvalidInput("generator needs at least one coefficient matrix".into()));
        }
        for m in self.coeffs() {
            if m.nrows() != t || m.ncols() != t {
                return Err(Error::DimensionMismatch { expected: t, found: m.nrows().max(m.ncols()) });
            }
        }
        if let GeneratorKind::Var(_) = self.kind {
            let radius = self.spectral_radius()?;
            if radius >= 1.0 {
                return Err(Error::UnstableModel { spectral_radius: radius });
            }
        }
        Ok(())
    }

    /// Spectral radius of the companion matrix of the autoregression.
    pub fn spectral_radius(&self) -> Result<f64> {
        let q = match &self.kind {
            GeneratorKind::Var(q) => q,
            GeneratorKind::Ma(_) => return Ok(0.0),
        };
        let t = self.dim();
        let q0inv = inverse(&q[0]).ok_or_else(|| Error::InvalidInput("Q(0) is singular".into()))?;
        let p = q.len() - 1;
        if p == 0 {
            return Ok(0.0);
        }
        let n = p * t;
        let mut comp = CMatrix::zeros(n, n);
        for k in 1..=p {
            let a = -(&q0inv * &q[k]);
            comp.view_mut((0, (k - 1) * t), (t, t)).copy_from(&a);
        }
        for i in t..n {
            comp[(i, i - t)] = Complex64::new(1.0, 0.0);
        }
        let ev = comp.schur().eigenvalues().ok_or(Error::ConvergenceFailure { iterations: 0, residual: f64::NAN })?;
        Ok(ev.iter().map(|z| z.norm()).fold(0.0, f64::max))
    }

    /// Spectral density of the generated sequence.
    pub fn density(&self) -> Result<DensitySpec> {
        self.validate()?;
        Ok(match &self.kind {
            GeneratorKind::Var(q) => DensitySpec::InverseTrig(CausalFactor::new(q.clone())?.gram()),
            GeneratorKind::Ma(theta) => DensitySpec::MovingAverage(theta.clone()),
        })
    }

    /// Inverse density `Q(z)* Q(z)` of an autoregression.
    pub fn inverse_density(&self) -> Option<TrigPolynomial> {
        match &self.kind {
            GeneratorKind::Var(q) => CausalFactor::new(q.clone()).ok().map(|f| f.gram()),
            GeneratorKind::Ma(_) => None,
        }
    }
}

fn noise_vector<R: Rng>(rng: &mut R, kind: NoiseKind, out: &mut [Complex64]) {
    match kind {
        NoiseKind::ComplexGaussian => {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            for z in out {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                *z = Complex64::new(re * s, im * s);
            }
        }
        NoiseKind::RealGaussian => {
            for z in out {
                *z = Complex64::new(rng.sample(StandardNormal), 0.0);
            }
        }
    }
}

fn flatten(m: &CMatrix) -> Vec<Complex64> {
    let (r, c) = m.shape();
    (0..r).flat_map(|i| (0..c).map(move |j| (i, j))).map(|(i, j)| m[(i, j)]).collect()
}

/// Pre-processed recursion used for fast repeated generation.
struct Recursion {
    t: usize,
    kind: NoiseKind,
    burn_in: usize,
    seed: u64,
    /// VAR: `-Q(0)^{-1} Q(k)` for k ≥ 1; MA: `Θ(k)` for k ≥ 0. Row-major.
    lags: Vec<Vec<Complex64>>,
    /// VAR: `Q(0)^{-1}`.
    lead: Option<Vec<Complex64>>,
}

impl Recursion {
    fn new(spec: &GeneratorSpec) -> Result<Self> {
        spec.validate()?;
        let t = spec.dim();
        let (lags, lead) = match &spec.kind {
            GeneratorKind::Var(q) => {
                let q0inv = inverse(&q[0]).ok_or_else(|| Error::InvalidInput("Q(0) is singular".into()))?;
                let lags = q.iter().skip(1).map(|qk| flatten(&-(&q0inv * qk))).collect();
                (lags, Some(flatten(&q0inv)))
            }
            GeneratorKind::Ma(theta) => (theta.iter().map(flatten).collect(), None),
        };
        Ok(Self { t, kind: spec.noise, burn_in: spec.burn_in, seed: spec.seed, lags, lead })
    }

    fn run(&self, n: usize, stream: u64) -> Vec<Complex64> {
        let t = self.t;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        let total = self.burn_in + n;
        let mut x = vec![Complex64::new(0.0, 0.0); total * t];
        let mut e = vec![Complex64::new(0.0, 0.0); t];
        match &self.lead {
            Some(lead) => {
                for s in 0..total {
                    noise_vector(&mut rng, self.kind, &mut e);
                    for r in 0..t {
                        let mut acc = Complex64::new(0.0, 0.0);
                        for c in 0..t {
                            acc += lead[r * t + c] * e[c];
                        }
                        for (k, a) in self.lags.iter().enumerate() {
                            let Some(prev) = s.checked_sub(k + 1) else { break };
                            let xp = &x[prev * t..prev * t + t];
                            for c in 0..t {
                                acc += a[r * t + c] * xp[c];
                            }
                        }
                        x[s * t + r] = acc;
                    }
                }
            }
            None => {
                let q = self.lags.len();
                let mut eps = vec![Complex64::new(0.0, 0.0); total * t];
                for s in 0..total {
                    noise_vector(&mut rng, self.kind, &mut e);
                    eps[s * t..s * t + t].copy_from_slice(&e);
                    for r in 0..t {
                        let mut acc = Complex64::new(0.0, 0.0);
                        for k in 0..q.min(s + 1) {
                            let ep = &eps[(s - k) * t..(s - k) * t + t];
                            for c in 0..t {
                                acc += self.lags[k][r * t + c] * ep[c];
                            }
                        }
                        x[s * t + r] = acc;
                    }
                }
            }
        }
        x.drain(..self.burn_in * t);
        x
    }
}

/// `n` values after burn-in, indexed `origin, …, origin + n - 1`, from RNG stream `stream`.
pub fn generate_stream(spec: &GeneratorSpec, n: usize, origin: i64, stream: u64) -> Result<VectorSeries> {
    let rec = Recursion::new(spec)?;
    VectorSeries::new(spec.dim(), origin, rec.run(n, stream))
}

/// `n` values after burn-in, indexed from 0.
pub fn generate(spec: &GeneratorSpec, n: usize) -> Result<VectorSeries> {
    generate_stream(spec, n, 0, 0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmpiricalMseReport {
    pub trials: usize,
    pub mean: f64,
    pub stderr: f64,
    pub analytic: f64,
    pub z: f64,
}

impl EmpiricalMseReport {
    pub fn from_errors(errors: &[f64], analytic: f64) -> Result<Self> {
        let trials = errors.len();
        if trials == 0 {
            return Err(Error::InvalidInput("at least one trial is required".into()));
        }
        let mean = errors.iter().sum::<f64>() / trials as f64;
        let var = if trials > 1 {
            errors.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (trials - 1) as f64
        } else {
            0.0
        };
        let stderr = (var / trials as f64).sqrt();
        let z = if stderr > 0.0 { (mean - analytic) / stderr } else { 0.0 };
        Ok(Self { trials, mean, stderr, analytic, z })
    }
}

/// Squared errors `|A - Â|²` of the filter `taps` on independent sample paths.
///
/// Trial `i` uses RNG stream `i` of the signal generator (and of the noise
/// generator when present), so different filters can be compared on identical paths.
pub fn trial_errors(
    signal: &GeneratorSpec,
    noise: Option<&GeneratorSpec>,
    a: &VectorFunctional,
    taps: &[&Taps],
    trials: usize,
) -> Result<Vec<Vec<f64>>> {
    let t = signal.dim();
    if a.dim() != t {
        return Err(Error::DimensionMismatch { expected: t, found: a.dim() });
    }
    if let Some(n) = noise {
        if n.dim() != t {
            return Err(Error::DimensionMismatch { expected: t, found: n.dim() });
        }
    }
    let idx = a.indices();
    let mut lo = idx[0];
    let mut hi = idx[idx.len() - 1];
    for h in taps {
        if h.dim() != t {
            return Err(Error::DimensionMismatch { expected: t, found: h.dim() });
        }
        if let (Some(first), Some(last)) = (h.taps().first(), h.taps().last()) {
            lo = lo.min(first.0);
            hi = hi.max(last.0);
        }
    }
    let len = (hi - lo + 1) as usize;
    let sig = Recursion::new(signal)?;
    let noi = noise.map(Recursion::new).transpose()?;

    let per_trial: Vec<Vec<f64>> = (0..trials)
        .into_par_iter()
        .map(|i| -> Result<Vec<f64>> {
            let x = VectorSeries::new(t, lo, sig.run(len, i as u64))?;
            let target = a.apply(&x)?;
            let obs = match &noi {
                Some(nr) => {
                    let eta = nr.run(len, i as u64);
                    let data = x.data.iter().zip(&eta).map(|(p, q)| p + q).collect();
                    VectorSeries::new(t, lo, data)?
                }
                None => x,
            };
            taps.iter().map(|h| Ok((target - h.apply(&obs)?).norm_sqr())).collect()
        })
        .collect::<Result<_>>()?;
    Ok((0..taps.len()).map(|k| per_trial.iter().map(|row| row[k]).collect()).collect())
}

/// Monte Carlo estimate of the interpolation error of `solution`'s filter.
pub fn empirical_mse(
    signal: &GeneratorSpec,
    noise: Option<&GeneratorSpec>,
    a: &VectorFunctional,
    solution: &InterpSolution,
    trials: usize,
) -> Result<EmpiricalMseReport> {
    let errors = trial_errors(signal, noise, a, &[&solution.taps], trials)?;
    EmpiricalMseReport::from_errors(&errors[0], solution.delta)
}
