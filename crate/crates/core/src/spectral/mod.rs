//! Spectral density matrices, Fourier coefficients by FFT quadrature, the
//! minimality check and matrix spectral factorization.

mod density;
mod factor;
mod quadrature;
mod trig;

pub use density::{DensitySpec, ScalarAr};
pub use factor::{
    ar_factorize, coefficient_residual, grid_extent, spectral_factorize, DEFAULT_MAX_ITER, DEFAULT_TOL,
};
pub use quadrature::{
    check_minimality, fourier_coeff, node, trig_sum_on_grid, CoefficientTable, MinimalityReport,
    QuadratureConfig, DEFAULT_GRID,
};
pub use trig::{CausalFactor, TrigPolynomial};
