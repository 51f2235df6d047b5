//! Deterministic free-space line-of-sight channels between planar arrays.
//!
//! Every link is rank one: `gain · a_rx · a_txᴴ`, where the steering vectors are
//! Kronecker products of horizontal and vertical phase progressions with
//! `μ(x, L)_l = exp(jπ (l−1) x)`.

use std::f64::consts::PI;

use crate::error::{invalid, Result};
use crate::numerics::{CMat, CVec, C64};

/// Half-wavelength element spacing.
pub const HALF_WAVELENGTH: f64 = 0.5;

/// Uniform planar array layout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArraySpec {
    pub n_h: usize,
    pub n_v: usize,
    /// Element spacing over wavelength, `d / λ`.
    pub spacing_over_wavelength: f64,
}

impl ArraySpec {
    pub fn new(n_h: usize, n_v: usize, spacing_over_wavelength: f64) -> Result<Self> {
        if n_h == 0 || n_v == 0 {
            return Err(invalid("array needs at least one element per axis"));
        }
        if !(spacing_over_wavelength > 0.0) || !spacing_over_wavelength.is_finite() {
            return Err(invalid("element spacing must be positive"));
        }
        Ok(ArraySpec { n_h, n_v, spacing_over_wavelength })
    }

    /// Half-wavelength array with `total` elements: `n_h` is `⌈√total⌉` lowered to the
    /// nearest divisor of `total`, `n_v = total / n_h`.
    pub fn for_count(total: usize) -> Result<Self> {
        if total == 0 {
            return Err(invalid("array needs at least one element"));
        }
        let mut n_h = (total as f64).sqrt().ceil() as usize;
        while !total.is_multiple_of(n_h) {
            n_h -= 1;
        }
        ArraySpec::new(n_h, total / n_h, HALF_WAVELENGTH)
    }

    pub fn total(&self) -> usize {
        self.n_h * self.n_v
    }
}

/// Azimuth in `[−π, π]`, elevation in `[0, π]` (measured from the +z axis).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Angles {
    pub azimuth: f64,
    pub elevation: f64,
}

impl Angles {
    pub fn new(azimuth: f64, elevation: f64) -> Result<Self> {
        if !azimuth.is_finite() || !elevation.is_finite() {
            return Err(invalid("angles must be finite"));
        }
        if !(-PI..=PI).contains(&azimuth) || !(0.0..=PI).contains(&elevation) {
            return Err(invalid(format!("angles out of range: az={azimuth}, el={elevation}")));
        }
        Ok(Angles { azimuth, elevation })
    }

    /// Direction angles of the vector `d` (need not be normalized).
    pub fn from_direction(d: [f64; 3]) -> Result<Self> {
        let r = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
        if !(r > 0.0) {
            return Err(invalid("zero-length direction"));
        }
        let elevation = (d[2] / r).clamp(-1.0, 1.0).acos();
        let azimuth = d[1].atan2(d[0]);
        Angles::new(azimuth, elevation)
    }
}

fn phase_progression(x: f64, len: usize) -> CVec {
    CVec::from_fn(len, |l| C64::from_polar(1.0, PI * l as f64 * x))
}

/// `μ((2d/λ) sin(az) sin(el), n_h) ⊗ μ((2d/λ) cos(el), n_v)`.
pub fn steering_vector(angles: Angles, array: ArraySpec) -> CVec {
    let k = 2.0 * array.spacing_over_wavelength;
    let horizontal = phase_progression(k * angles.azimuth.sin() * angles.elevation.sin(), array.n_h);
    let vertical = phase_progression(k * angles.elevation.cos(), array.n_v);
    horizontal.kron(&vertical)
}

/// Free-space power gain `beta / distance²`.
pub fn pathloss_gain(distance_m: f64, beta: f64) -> Result<f64> {
    if !(distance_m > 0.0) || !distance_m.is_finite() {
        return Err(invalid(format!("distance must be positive, got {distance_m}")));
    }
    if !(beta > 0.0) {
        return Err(invalid("reference gain must be positive"));
    }
    Ok(beta / (distance_m * distance_m))
}

/// Rank-one LoS channel matrix (`rx_dim × tx_dim`) with its factors.
#[derive(Debug, Clone, PartialEq)]
pub struct LosChannel {
    pub matrix: CMat,
    pub gain_amplitude: f64,
    pub rx_steer: CVec,
    pub tx_steer: CVec,
}

impl LosChannel {
    pub fn rx_dim(&self) -> usize {
        self.rx_steer.len()
    }

    pub fn tx_dim(&self) -> usize {
        self.tx_steer.len()
    }

    /// The single column of a channel from a one-antenna transmitter.
    pub fn as_column(&self) -> CVec {
        debug_assert_eq!(self.tx_dim(), 1);
        self.matrix.column(0)
    }
}

pub fn build_los_channel(gain_amplitude: f64, rx: (Angles, ArraySpec), tx: (Angles, ArraySpec)) -> Result<LosChannel> {
    if !(gain_amplitude >= 0.0) || !gain_amplitude.is_finite() {
        return Err(invalid("gain amplitude must be finite and non-negative"));
    }
    let rx_steer = steering_vector(rx.0, rx.1);
    let tx_steer = steering_vector(tx.0, tx.1);
    let matrix =
        CMat::from_fn(rx_steer.len(), tx_steer.len(), |i, j| rx_steer[i] * tx_steer[j].conj() * gain_amplitude);
    Ok(LosChannel { matrix, gain_amplitude, rx_steer, tx_steer })
}

/// Cartesian position in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Point3 { x, y, z }
    }

    pub fn distance(&self, other: &Point3) -> f64 {
        let d = self.direction_to(other);
        (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
    }

    pub fn direction_to(&self, other: &Point3) -> [f64; 3] {
        [other.x - self.x, other.y - self.y, other.z - self.z]
    }
}

/// Node placement: BS on the ground at the origin, the two AIRSs at height `H`
/// above the BS and above the user area, users on the ground around `(0, D, 0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Geometry {
    pub d_m: f64,
    pub h_m: f64,
    pub bs: Point3,
    pub bs_airs: Point3,
    pub user_airs: Point3,
    pub pirs: Point3,
    pub users: Vec<Point3>,
}

impl Geometry {
    /// Standard layout with one user at `(0, D, 0)` and the passive IRS above the BS.
    pub fn standard(d_m: f64, h_m: f64) -> Result<Self> {
        if !(d_m > 0.0) || !(h_m > 0.0) {
            return Err(invalid("D and H must be positive"));
        }
        Ok(Geometry {
            d_m,
            h_m,
            bs: Point3::new(0.0, 0.0, 0.0),
            bs_airs: Point3::new(0.0, 0.0, h_m),
            user_airs: Point3::new(0.0, d_m, h_m),
            pirs: Point3::new(0.0, 0.0, h_m),
            users: vec![Point3::new(0.0, d_m, 0.0)],
        })
    }

    pub fn with_users(mut self, users: Vec<Point3>) -> Self {
        self.users = users;
        self
    }

    pub fn with_pirs(mut self, pirs: Point3) -> Self {
        self.pirs = pirs;
        self
    }

    /// Center of the user area.
    pub fn user_center(&self) -> Point3 {
        Point3::new(0.0, self.d_m, 0.0)
    }
}

/// LoS channel from an array at `from` to an array at `to` (matrix is `to_dim × from_dim`).
pub fn link_channel(
    from: Point3,
    from_array: ArraySpec,
    to: Point3,
    to_array: ArraySpec,
    beta: f64,
) -> Result<LosChannel> {
    let dist = from.distance(&to);
    let gain = pathloss_gain(dist, beta)?.sqrt();
    let departure = Angles::from_direction(from.direction_to(&to))?;
    let arrival = Angles::from_direction(to.direction_to(&from))?;
    build_los_channel(gain, (arrival, to_array), (departure, from_array))
}
