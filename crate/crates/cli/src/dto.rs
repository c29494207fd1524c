//! Input configuration documents and their conversion into library types.

use num_complex::Complex64;
use pcinterp::blocking::Interval;
use pcinterp::{
    block_functional, lift_functional, CMatrix, CVector, ClassD0, ClassDG, DensitySpec, GeneratorSpec,
    MissingPattern, NoiseKind, ScalarAr, ScalarFunctional, TrigPolynomial, VectorFunctional,
};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// A complex number written as `[re, im]` or as a plain real number.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexDto {
    Real(f64),
    Pair([f64; 2]),
}

impl ComplexDto {
    pub fn value(self) -> Complex64 {
        match self {
            ComplexDto::Real(re) => Complex64::new(re, 0.0),
            ComplexDto::Pair([re, im]) => Complex64::new(re, im),
        }
    }
}

/// Row-major matrix.
pub type MatrixDto = Vec<Vec<ComplexDto>>;

pub fn matrix(rows: &MatrixDto, what: &str) -> Result<CMatrix, CliError> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if r == 0 || c == 0 || rows.iter().any(|row| row.len() != c) {
        return Err(CliError::Schema(format!("{what}: expected a non-empty rectangular matrix")));
    }
    Ok(CMatrix::from_row_iterator(r, c, rows.iter().flatten().map(|z| z.value())))
}

fn square(rows: &MatrixDto, t: usize, what: &str) -> Result<CMatrix, CliError> {
    let m = matrix(rows, what)?;
    if m.nrows() != t || m.ncols() != t {
        return Err(CliError::Schema(format!("{what}: expected {t}x{t}, got {}x{}", m.nrows(), m.ncols())));
    }
    Ok(m)
}

fn squares(list: &[MatrixDto], t: usize, what: &str) -> Result<Vec<CMatrix>, CliError> {
    if list.is_empty() {
        return Err(CliError::Schema(format!("{what}: expected at least one matrix")));
    }
    list.iter().enumerate().map(|(k, m)| square(m, t, &format!("{what}[{k}]"))).collect()
}

fn vector(values: &[ComplexDto]) -> CVector {
    CVector::from_iterator(values.len(), values.iter().map(|z| z.value()))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DensityDto {
    #[serde(rename = "T")]
    pub t: usize,
    #[serde(flatten)]
    pub body: DensityBody,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum DensityBody {
    Constant {
        #[serde(rename = "H")]
        h: MatrixDto,
    },
    /// `L diag(1/|p_i|²) L*`; `p` lists the coefficients of each `p_i(z)`.
    ScalarRational {
        #[serde(rename = "L")]
        l: MatrixDto,
        p: Vec<Vec<ComplexDto>>,
    },
    Ma { theta: Vec<MatrixDto> },
    InvTrig {
        #[serde(rename = "P")]
        p: Vec<MatrixDto>,
    },
    Grid { samples: Vec<MatrixDto> },
}

impl DensityDto {
    pub fn build(&self) -> Result<DensitySpec, CliError> {
        let t = self.t;
        if t == 0 {
            return Err(CliError::Schema("density: T must be positive".into()));
        }
        let spec = match &self.body {
            DensityBody::Constant { h } => DensitySpec::Constant(square(h, t, "H")?),
            DensityBody::ScalarRational { l, p } => {
                let mixing = matrix(l, "L")?;
                if mixing.nrows() != t || mixing.ncols() != p.len() {
                    return Err(CliError::Schema(format!(
                        "L must be {t}x{} to match the {} scalar factors",
                        p.len(),
                        p.len()
                    )));
                }
                let factors = p.iter().map(|c| ScalarAr::new(c.iter().map(|z| z.value()).collect())).collect();
                DensitySpec::ScalarRational { mixing, factors }
            }
            DensityBody::Ma { theta } => DensitySpec::MovingAverage(squares(theta, t, "theta")?),
            DensityBody::InvTrig { p } => DensitySpec::InverseTrig(TrigPolynomial::new(squares(p, t, "P")?)?),
            DensityBody::Grid { samples } => DensitySpec::Grid(squares(samples, t, "samples")?),
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IntervalDto {
    pub start: i64,
    pub len: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PatternDto {
    #[serde(rename = "T")]
    pub t: usize,
    pub intervals: Vec<IntervalDto>,
}

impl PatternDto {
    pub fn build(&self) -> Result<MissingPattern, CliError> {
        let intervals = self.intervals.iter().map(|i| Interval { start: i.start, len: i.len }).collect();
        Ok(MissingPattern::new(self.t, intervals)?)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalarCoeffDto {
    pub j: i64,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VectorCoeffDto {
    pub j: i64,
    pub value: Vec<ComplexDto>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionalMode {
    /// Scalar coefficients on the pattern, blocked with period `T`.
    #[default]
    Block,
    /// Scalar coefficients lifted with the phases `e^{2πijν/T}`.
    Lift,
}

/// Either scalar coefficients (`coeffs`) or blocked vector coefficients (`vectors`).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FunctionalDto {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<Vec<ScalarCoeffDto>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vectors: Option<Vec<VectorCoeffDto>>,
    #[serde(default)]
    pub mode: FunctionalMode,
}

/// The functional in blocked form, with the scalar period when it came from scalar coefficients.
pub struct Functional {
    pub vector: VectorFunctional,
    pub period: Option<usize>,
}

impl FunctionalDto {
    pub fn build(&self, dim: usize, pattern: Option<&PatternDto>) -> Result<Functional, CliError> {
        let functional = match (&self.coeffs, &self.vectors) {
            (Some(coeffs), None) => {
                let pairs: Vec<(i64, Complex64)> = coeffs.iter().map(|c| (c.j, Complex64::new(c.re, c.im))).collect();
                match self.mode {
                    FunctionalMode::Block => {
                        let pattern = pattern
                            .ok_or_else(|| CliError::Schema("scalar functional in block mode needs a pattern".into()))?
                            .build()?;
                        let scalar = ScalarFunctional::on_pattern(&pattern, &pairs)?;
                        Functional { vector: block_functional(&scalar, &pattern)?, period: Some(pattern.period()) }
                    }
                    FunctionalMode::Lift => {
                        let scalar = ScalarFunctional::from_pairs(&pairs)?;
                        Functional { vector: lift_functional(&scalar, dim)?, period: None }
                    }
                }
            }
            (None, Some(vectors)) => {
                let coeffs = vectors.iter().map(|v| (v.j, vector(&v.value))).collect::<Vec<_>>();
                if let Some((j, _)) = coeffs.iter().find(|(_, v)| v.len() != dim) {
                    return Err(CliError::Schema(format!("functional vector at j={j} must have {dim} components")));
                }
                Functional { vector: VectorFunctional::new(dim, coeffs)?, period: None }
            }
            _ => return Err(CliError::Schema("functional needs exactly one of `coeffs` or `vectors`".into())),
        };
        if functional.vector.dim() != dim {
            return Err(CliError::Schema(format!(
                "functional has dimension {}, density has T={dim}",
                functional.vector.dim()
            )));
        }
        Ok(functional)
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct QuadDto {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub saddle_tol: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InterpolateConfig {
    pub f: DensityDto,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<DensityDto>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pattern: Option<PatternDto>,
    pub functional: FunctionalDto,
    #[serde(default)]
    pub quad: QuadDto,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MinimaxD0Config {
    #[serde(rename = "P")]
    pub p: MatrixDto,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pattern: Option<PatternDto>,
    pub functional: FunctionalDto,
    /// Replacement for the pseudo-inverse of `a⃗(0)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lead_inverse: Option<Vec<ComplexDto>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub candidates: Vec<DensityDto>,
    #[serde(default)]
    pub quad: QuadDto,
}

impl MinimaxD0Config {
    pub fn class(&self) -> Result<ClassD0, CliError> {
        Ok(ClassD0::new(matrix(&self.p, "P")?)?)
    }

    pub fn lead_inverse(&self) -> Option<CVector> {
        self.lead_inverse.as_deref().map(vector)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MinimaxDgConfig {
    #[serde(rename = "G")]
    pub g: usize,
    #[serde(rename = "P")]
    pub p: Vec<MatrixDto>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pattern: Option<PatternDto>,
    pub functional: FunctionalDto,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub candidates: Vec<DensityDto>,
    #[serde(default)]
    pub quad: QuadDto,
}

impl MinimaxDgConfig {
    pub fn class(&self) -> Result<ClassDG, CliError> {
        if self.p.len() != self.g + 1 {
            return Err(CliError::Schema(format!("G={} needs {} matrices P(0..G), got {}", self.g, self.g + 1, self.p.len())));
        }
        let t = matrix(&self.p[0], "P[0]")?.nrows();
        Ok(ClassDG::new(squares(&self.p, t, "P")?)?)
    }
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseDto {
    #[default]
    ComplexGaussian,
    RealGaussian,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorBody {
    /// `Σ Q(k) x⃗(n-k) = ε⃗(n)`.
    Var {
        #[serde(rename = "Q")]
        q: Vec<MatrixDto>,
    },
    /// `x⃗(n) = Σ Θ(k) ε⃗(n-k)`.
    Ma { theta: Vec<MatrixDto> },
    /// Independent scalar autoregressions `p_i(B) x_i(n) = ε_i(n)`.
    DiagonalAr { p: Vec<Vec<ComplexDto>> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeneratorDto {
    #[serde(flatten)]
    pub body: GeneratorBody,
    #[serde(default)]
    pub noise: NoiseDto,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub burn_in: Option<usize>,
}

impl GeneratorDto {
    pub fn build(&self, seed: u64) -> Result<GeneratorSpec, CliError> {
        let dim = |list: &[MatrixDto]| list.first().map_or(Ok(0), |m| matrix(m, "generator").map(|m| m.nrows()));
        let mut spec = match &self.body {
            GeneratorBody::Var { q } => GeneratorSpec::var(squares(q, dim(q)?, "Q")?, seed),
            GeneratorBody::Ma { theta } => GeneratorSpec::ma(squares(theta, dim(theta)?, "theta")?, seed),
            GeneratorBody::DiagonalAr { p } => {
                let comps: Vec<ScalarAr> = p.iter().map(|c| ScalarAr::new(c.iter().map(|z| z.value()).collect())).collect();
                GeneratorSpec::diagonal_ar(&comps, seed)?
            }
        };
        spec = spec.with_noise(match self.noise {
            NoiseDto::ComplexGaussian => NoiseKind::ComplexGaussian,
            NoiseDto::RealGaussian => NoiseKind::RealGaussian,
        });
        if let Some(b) = self.burn_in {
            spec = spec.with_burn_in(b);
        }
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimulateConfig {
    pub generator: GeneratorDto,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_generator: Option<GeneratorDto>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pattern: Option<PatternDto>,
    pub functional: FunctionalDto,
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub quad: QuadDto,
}
