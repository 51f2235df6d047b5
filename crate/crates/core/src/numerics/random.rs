use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::matrix::{CMat, CVec, C64};
use crate::error::{invalid, Result};

/// Reproducible random stream identified by `(seed, stream_id)`.
///
/// Backed by ChaCha8, whose 64-bit stream selector gives independent sequences for
/// distinct `stream_id`s under the same seed.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        RngStream { seed, stream_id, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// A fresh stream with the same seed and a different stream id.
    pub fn substream(&self, stream_id: u64) -> RngStream {
        RngStream::new(self.seed, stream_id)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform draw on `[0, 1)` with 53 bits of resolution.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw on `(0, 1]`.
    fn uniform_open_low(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Circularly-symmetric complex Gaussian with unit variance (Box-Muller).
    pub fn complex_normal(&mut self) -> C64 {
        let r = (-self.uniform_open_low().ln()).sqrt();
        let theta = std::f64::consts::TAU * self.uniform();
        C64::from_polar(r, theta)
    }

    /// Real standard normal (real part of a scaled complex draw).
    pub fn normal(&mut self) -> f64 {
        self.complex_normal().re * std::f64::consts::SQRT_2
    }

    pub fn complex_normal_vec(&mut self, len: usize) -> CVec {
        CVec::from_fn(len, |_| self.complex_normal())
    }
}

/// Lower-triangular `L` with `L L^H = cov` for a positive semidefinite `cov`.
///
/// Pivots within `1e-12 · max diag` of zero are treated as exact zeros, so rank-deficient
/// covariances factor cleanly.
pub fn cholesky_psd(cov: &CMat) -> Result<CMat> {
    if !cov.is_square() {
        return Err(invalid("covariance must be square"));
    }
    if !cov.is_hermitian(1e-12) {
        return Err(invalid("covariance is not Hermitian"));
    }
    let n = cov.rows();
    let scale = (0..n).map(|i| cov[(i, i)].re.abs()).fold(0.0, f64::max);
    let tol = 1e-12 * scale;
    let mut l = CMat::zeros(n, n);
    for j in 0..n {
        let mut d = cov[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if d < -tol {
            return Err(invalid(format!("covariance is not PSD (pivot {d:e} at {j})")));
        }
        if d <= tol {
            // Zero pivot: the rest of the column must vanish for a PSD matrix.
            for i in j + 1..n {
                let mut s = cov[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)].conj();
                }
                if s.norm() > 1e-6 * scale.max(f64::MIN_POSITIVE) {
                    return Err(invalid(format!(
                        "covariance is not PSD (zero pivot at {j} with coupling {:e})",
                        s.norm()
                    )));
                }
            }
            continue;
        }
        let djj = d.sqrt();
        l[(j, j)] = C64::new(djj, 0.0);
        for i in j + 1..n {
            let mut s = cov[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / djj;
        }
    }
    Ok(l)
}

/// Draws `L z` with `L L^H = cov` and `z ~ CN(0, I)`.
pub fn sample_complex_gaussian(cov: &CMat, rng: &mut RngStream) -> Result<CVec> {
    let l = cholesky_psd(cov)?;
    let z = rng.complex_normal_vec(cov.rows());
    Ok(l.mul_vec(&z))
}
