use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_part, max_abs, CMatrix};

/// Hermitian matrix trigonometric polynomial `Σ_{g=-G}^{G} P(g) e^{igλ}`.
///
/// Only `P(0), …, P(G)` are stored; `P(-g) = P(g)*`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigPolynomial {
    coeffs: Vec<CMatrix>,
}

impl TrigPolynomial {
    /// `coeffs[g]` is `P(g)` for `g = 0..=G`. `P(0)` is symmetrized.
    pub fn new(mut coeffs: Vec<CMatrix>) -> Result<Self> {
        let first = coeffs
            .first()
            .ok_or_else(|| Error::InvalidInput("trig polynomial needs at least P(0)".into()))?;
        let t = first.nrows();
        if t == 0 {
            return Err(Error::InvalidInput("zero-dimensional trig polynomial".into()));
        }
        for p in &coeffs {
            if p.nrows() != t || p.ncols() != t {
                return Err(Error::DimensionMismatch { expected: t, found: p.nrows().max(p.ncols()) });
            }
            if p.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::InvalidInput("non-finite trig polynomial coefficient".into()));
            }
        }
        let skew = max_abs(&(&coeffs[0] - coeffs[0].adjoint()));
        if skew > 1e-9 * (1.0 + max_abs(&coeffs[0])) {
            return Err(Error::InvalidInput(format!("P(0) is not Hermitian (skew {skew:.3e})")));
        }
        coeffs[0] = hermitian_part(&coeffs[0]);
        Ok(Self { coeffs })
    }

    pub fn constant(p0: CMatrix) -> Result<Self> {
        Self::new(vec![p0])
    }

    pub fn dim(&self) -> usize {
        self.coeffs[0].nrows()
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Stored coefficients `P(0..=G)`.
    pub fn coeffs(&self) -> &[CMatrix] {
        &self.coeffs
    }

    /// `P(g)` for any integer lag, zero outside `-G..=G`.
    pub fn coeff(&self, g: i64) -> CMatrix {
        let k = g.unsigned_abs() as usize;
        match self.coeffs.get(k) {
            Some(p) if g >= 0 => p.clone(),
            Some(p) => p.adjoint(),
            None => CMatrix::zeros(self.dim(), self.dim()),
        }
    }

    pub fn evaluate(&self, lambda: f64) -> CMatrix {
        let mut acc = self.coeffs[0].clone();
        for (g, p) in self.coeffs.iter().enumerate().skip(1) {
            let e = Complex64::from_polar(1.0, g as f64 * lambda);
            acc += p * e + p.adjoint() * e.conj();
        }
        hermitian_part(&acc)
    }

    /// Drops trailing coefficients whose entries are all below `tol`.
    pub fn trimmed(mut self, tol: f64) -> Self {
        while self.coeffs.len() > 1 && max_abs(self.coeffs.last().unwrap()) <= tol {
            self.coeffs.pop();
        }
        self
    }
}

/// One-sided matrix polynomial `Q(z) = Σ_{k=0}^{G} Q(k) z^k` with `z = e^{-iλ}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CausalFactor {
    coeffs: Vec<CMatrix>,
}

impl CausalFactor {
    pub fn new(coeffs: Vec<CMatrix>) -> Result<Self> {
        let first = coeffs
            .first()
            .ok_or_else(|| Error::InvalidInput("causal factor needs at least Q(0)".into()))?;
        let t = first.nrows();
        for q in &coeffs {
            if q.nrows() != t || q.ncols() != t {
                return Err(Error::DimensionMismatch { expected: t, found: q.nrows().max(q.ncols()) });
            }
        }
        Ok(Self { coeffs })
    }

    pub fn dim(&self) -> usize {
        self.coeffs[0].nrows()
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[CMatrix] {
        &self.coeffs
    }

    pub fn evaluate(&self, lambda: f64) -> CMatrix {
        let mut acc = CMatrix::zeros(self.dim(), self.dim());
        for (k, q) in self.coeffs.iter().enumerate() {
            acc += q * Complex64::from_polar(1.0, -(k as f64) * lambda);
        }
        acc
    }

    /// `Q(z) Q(z)*` as a trig polynomial: `P(g) = Σ_k Q(k) Q(k+g)*`.
    pub fn product(&self) -> TrigPolynomial {
        let g_max = self.degree();
        let coeffs = (0..=g_max)
            .map(|g| {
                let mut acc = CMatrix::zeros(self.dim(), self.dim());
                for k in 0..=(g_max - g) {
                    acc += &self.coeffs[k] * self.coeffs[k + g].adjoint();
                }
                acc
            })
            .collect();
        TrigPolynomial { coeffs: symmetrize_lead(coeffs) }
    }

    /// `Q(z)* Q(z)` as a trig polynomial: `P(g) = Σ_l Q(l+g)* Q(l)`.
    pub fn gram(&self) -> TrigPolynomial {
        let g_max = self.degree();
        let coeffs = (0..=g_max)
            .map(|g| {
                let mut acc = CMatrix::zeros(self.dim(), self.dim());
                for l in 0..=(g_max - g) {
                    acc += self.coeffs[l + g].adjoint() * &self.coeffs[l];
                }
                acc
            })
            .collect();
        TrigPolynomial { coeffs: symmetrize_lead(coeffs) }
    }

    /// Coefficientwise transpose.
    pub fn transposed(&self) -> Self {
        Self { coeffs: self.coeffs.iter().map(|q| q.transpose()).collect() }
    }
}

fn symmetrize_lead(mut coeffs: Vec<CMatrix>) -> Vec<CMatrix> {
    coeffs[0] = hermitian_part(&coeffs[0]);
    coeffs
}
