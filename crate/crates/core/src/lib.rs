//! Optimal and minimax-robust linear interpolation of missing values of
//! periodically correlated sequences.
//!
//! A scalar sequence with period `T` is handled through its `T`-variate
//! stationary counterpart (see [`blocking`]). The [`interp`] module solves the
//! interpolation problem for a known spectral density, [`minimax`] builds
//! least favorable densities for the classes `D0` and `DG`, and [`simulate`]
//! provides Monte Carlo checks.

// `!(x > tol)` rejects NaN along with small values.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod blocking;
pub mod error;
pub mod interp;
pub mod linalg;
pub mod minimax;
pub mod simulate;
pub mod spectral;

pub use blocking::{
    block_functional, block_pattern, block_series, decompose_index, lift_functional, phase_form,
    unblock_series, unblock_taps, BlockedPattern, Interval, MissingPattern, ScalarFunctional, Series,
    VectorFunctional, VectorSeries,
};
pub use error::{Error, ErrorClass, Result};
pub use interp::{
    assemble_block_matrices, estimate_functional, filter_mse, interpolate, mean_square_error,
    mean_square_error_noiseless, solve_coefficients, spectral_characteristic, verify_orthogonality,
    BlockMatrices, InterpSolution, OrthogonalityReport, SpectralCharacteristic, Taps,
};
pub use linalg::{CMatrix, CVector};
pub use minimax::{
    least_favorable_d0, least_favorable_dg, pseudo_inverse_lead, verify_saddle, ClassConstraint, ClassD0,
    ClassDG, MinimaxSolution, SaddleReport,
};
pub use simulate::{
    empirical_mse, generate, generate_stream, trial_errors, EmpiricalMseReport, GeneratorKind,
    GeneratorSpec, NoiseKind,
};
pub use spectral::{
    check_minimality, fourier_coeff, spectral_factorize, CausalFactor, DensitySpec, MinimalityReport,
    QuadratureConfig, ScalarAr, TrigPolynomial,
};
