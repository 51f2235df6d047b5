//! Small dense complex linear-algebra kernel: vectors, matrices, a Hermitian principal
//! eigensolver and seeded complex Gaussian sampling.

mod eig;
mod matrix;
mod random;

pub use eig::{hermitian_principal_eig, MAX_POWER_ITERATIONS};
pub use matrix::{CMat, CVec, C64};
pub use random::{cholesky_psd, sample_complex_gaussian, RngStream};

/// Converts dBm to milliwatts.
pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

/// Converts a power ratio in dB to linear scale.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Relative difference `|a - b| / max(|a|, |b|)`, zero when both vanish.
pub fn rel_diff(a: f64, b: f64) -> f64 {
    let s = a.abs().max(b.abs());
    if s == 0.0 {
        0.0
    } else {
        (a - b).abs() / s
    }
}

/// `log2(1 + x)`, accurate for small `x`.
pub fn log2_1p(x: f64) -> f64 {
    x.ln_1p() / std::f64::consts::LN_2
}
