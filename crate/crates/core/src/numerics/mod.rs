//! Complex linear algebra kernels and seedable sampling.

mod matrix;
mod rng;

pub use matrix::ComplexMatrix;
pub use num_complex::Complex64;
pub use rng::RngStream;

use crate::{Error, Result};

/// Draws a `rows x cols` matrix with i.i.d. `CN(0, variance)` entries.
///
/// Real and imaginary parts are independent `N(0, variance / 2)`, so entry
/// magnitudes are Rayleigh distributed with `E|h|^2 = variance`.
pub fn sample_complex_gaussian(
    rng: &mut RngStream,
    rows: usize,
    cols: usize,
    variance: f64,
) -> Result<ComplexMatrix> {
    if !(variance > 0.0 && variance.is_finite()) {
        return Err(Error::Config(format!(
            "complex Gaussian variance must be positive and finite, got {variance}"
        )));
    }
    let sd = (variance / 2.0).sqrt();
    let data = (0..rows * cols)
        .map(|_| {
            let re = rng.standard_normal() * sd;
            let im = rng.standard_normal() * sd;
            Complex64::new(re, im)
        })
        .collect();
    ComplexMatrix::from_vec(rows, cols, data)
}

/// Converts a power in dB to linear scale.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Converts a power in dBm to linear watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    db_to_linear(dbm - 30.0)
}
