//! Single-user closed forms: link SNRs under optimal AIRS/BS beamforming, the distributed
//! element-allocation optimum and its high-SNR shortcut, single-AIRS deployments and the
//! passive-IRS baseline.

use crate::channel::{pathloss_gain, Geometry, Point3};
use crate::error::{invalid, Error, Result};
use crate::numerics::{dbm_to_mw, log2_1p};

/// Scenario constants. Powers are in milliwatts.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams {
    pub p_u_mw: f64,
    pub p_b_mw: f64,
    pub p_f_mw: f64,
    pub sigma_f_mw: f64,
    pub sigma_0_mw: f64,
    pub m: usize,
    pub n_total: usize,
    pub epsilon: f64,
    pub k_users: usize,
    pub geometry: Geometry,
    pub beta: f64,
}

impl SystemParams {
    /// P_U = 15 dBm, P_B = 20 dBm, P_F = −5 dBm, noise −80 dBm, M = 4, N = 100,
    /// ε = 0.4, K = 1, D = 200 m, H = 10 m, β = −30 dB.
    pub fn default_scenario() -> Self {
        SystemParams {
            p_u_mw: dbm_to_mw(15.0),
            p_b_mw: dbm_to_mw(20.0),
            p_f_mw: dbm_to_mw(-5.0),
            sigma_f_mw: dbm_to_mw(-80.0),
            sigma_0_mw: dbm_to_mw(-80.0),
            m: 4,
            n_total: 100,
            epsilon: 0.4,
            k_users: 1,
            geometry: Geometry::standard(200.0, 10.0).expect("valid default geometry"),
            beta: 1e-3,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let powers = [self.p_u_mw, self.p_b_mw, self.p_f_mw, self.sigma_f_mw, self.sigma_0_mw, self.beta];
        if powers.iter().any(|p| !(*p > 0.0) || !p.is_finite()) {
            return Err(invalid("powers, noise levels and beta must be positive and finite"));
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(invalid(format!("epsilon must lie in [0, 1], got {}", self.epsilon)));
        }
        if self.m < 1 {
            return Err(invalid("need at least one BS antenna"));
        }
        if self.n_total < 2 {
            return Err(invalid("need at least two AIRS elements"));
        }
        if self.k_users < 1 {
            return Err(invalid("need at least one user"));
        }
        if !(self.geometry.d_m > 0.0) || !(self.geometry.h_m > 0.0) {
            return Err(invalid("D and H must be positive"));
        }
        Ok(())
    }

    /// Gain of the short hop (distance H).
    pub fn h1_sq(&self) -> f64 {
        self.beta / (self.geometry.h_m * self.geometry.h_m)
    }

    /// Gain of the long hop (distance √(D²+H²)).
    pub fn h2_sq(&self) -> f64 {
        let g = &self.geometry;
        self.beta / (g.d_m * g.d_m + g.h_m * g.h_m)
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_n_total(mut self, n_total: usize) -> Self {
        self.n_total = n_total;
        self
    }
}

impl Default for SystemParams {
    fn default() -> Self {
        SystemParams::default_scenario()
    }
}

/// Power gains of the two hops of a reflected link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HopGains {
    /// BS ↔ AIRS.
    pub bs: f64,
    /// AIRS ↔ user.
    pub user: f64,
}

/// UL SNR through an AIRS with `n` elements, phase alignment, saturated amplification and MRC.
pub fn uplink_snr(p: &SystemParams, n: f64, hops: HopGains) -> f64 {
    let m = p.m as f64;
    let (sf, s0) = (p.sigma_f_mw, p.sigma_0_mw);
    let num = p.p_u_mw * p.p_f_mw * m * n * hops.bs * hops.user;
    let den = m * p.p_f_mw * hops.bs * sf + p.p_u_mw * hops.user * s0 + sf * s0;
    num / den
}

/// DL SNR through an AIRS with `n` elements, phase alignment, saturated amplification and MRT.
pub fn downlink_snr(p: &SystemParams, n: f64, hops: HopGains) -> f64 {
    let m = p.m as f64;
    let (sf, s0) = (p.sigma_f_mw, p.sigma_0_mw);
    let num = p.p_b_mw * p.p_f_mw * m * n * hops.bs * hops.user;
    let den = p.p_f_mw * hops.user * sf + m * p.p_b_mw * hops.bs * s0 + sf * s0;
    num / den
}

/// Link SNRs and rates with the weighted sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateBreakdown {
    pub ul_snr: f64,
    pub dl_snr: f64,
    pub ul_rate: f64,
    pub dl_rate: f64,
    pub wsr: f64,
}

impl RateBreakdown {
    pub fn from_snrs(epsilon: f64, ul_snr: f64, dl_snr: f64) -> Self {
        let ul_rate = log2_1p(ul_snr);
        let dl_rate = log2_1p(dl_snr);
        RateBreakdown { ul_snr, dl_snr, ul_rate, dl_rate, wsr: (1.0 - epsilon) * ul_rate + epsilon * dl_rate }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WsrCoefficients {
    pub f1: f64,
    pub f2: f64,
    pub f3: f64,
    pub w1: f64,
    pub w2: f64,
}

impl WsrCoefficients {
    /// `P_B P_U f1 N + P_B f2 + P_U f3`.
    fn denominator(&self, p: &SystemParams) -> f64 {
        p.p_b_mw * p.p_u_mw * self.f1 * p.n_total as f64 + p.p_b_mw * self.f2 + p.p_u_mw * self.f3
    }
}

pub fn wsr_coefficients(p: &SystemParams) -> WsrCoefficients {
    let m = p.m as f64;
    let (h1, h2) = (p.h1_sq(), p.h2_sq());
    let (sf, s0) = (p.sigma_f_mw, p.sigma_0_mw);
    let f1 = m * p.p_f_mw * h1 * h2;
    let f2 = m * p.p_f_mw * h1 * sf + p.p_u_mw * h2 * s0 + sf * s0;
    let f3 = p.p_f_mw * h1 * sf + m * p.p_b_mw * h2 * s0 + sf * s0;
    let n = p.n_total as f64;
    let s = p.p_b_mw * p.p_u_mw * f1 * n + p.p_b_mw * f2 + p.p_u_mw * f3;
    WsrCoefficients { f1, f2, f3, w1: p.p_u_mw * f3 / s, w2: (p.p_b_mw * p.p_u_mw * f1 * n + p.p_u_mw * f3) / s }
}

/// Distributed AIRSs: `n_u` elements above the BS serve the UL, `n_d` above the user serve the DL.
pub fn distributed_breakdown(p: &SystemParams, n_u: f64, n_d: f64) -> RateBreakdown {
    let c = wsr_coefficients(p);
    RateBreakdown::from_snrs(p.epsilon, p.p_u_mw * c.f1 * n_u / c.f2, p.p_b_mw * c.f1 * n_d / c.f3)
}

pub fn wsr_distributed(p: &SystemParams, n_u: usize, n_d: usize) -> f64 {
    distributed_breakdown(p, n_u as f64, n_d as f64).wsr
}

/// Sign-carrying numerator of the WSR derivative in the DL share `x`.
pub fn allocation_derivative_proxy(p: &SystemParams, x: f64) -> f64 {
    let c = wsr_coefficients(p);
    -p.p_b_mw * p.p_u_mw * c.f1 * x + p.epsilon * c.denominator(p) - p.p_u_mw * c.f3
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AllocationResult {
    pub x_d_continuous: f64,
    pub n_u: usize,
    pub n_d: usize,
    pub wsr_bpshz: f64,
}

/// Ties closer than this prefer the smaller DL share.
pub const ROUNDING_TIE_TOL: f64 = 1e-12;

/// Continuous optimum of the DL element share, then the better of its floor and ceiling.
pub fn allocate_elements_optimal(p: &SystemParams) -> AllocationResult {
    let c = wsr_coefficients(p);
    let n = p.n_total as f64;
    let x = if p.epsilon <= c.w1 {
        0.0
    } else if p.epsilon >= c.w2 {
        n
    } else {
        ((p.epsilon * c.denominator(p) - p.p_u_mw * c.f3) / (p.p_b_mw * p.p_u_mw * c.f1)).clamp(0.0, n)
    };
    let lo = (x.floor() as usize).min(p.n_total);
    let hi = (x.ceil() as usize).min(p.n_total);
    let w_lo = wsr_distributed(p, p.n_total - lo, lo);
    let w_hi = wsr_distributed(p, p.n_total - hi, hi);
    let (n_d, wsr) = if w_hi > w_lo + ROUNDING_TIE_TOL { (hi, w_hi) } else { (lo, w_lo) };
    AllocationResult { x_d_continuous: x, n_u: p.n_total - n_d, n_d, wsr_bpshz: wsr }
}

/// High-SNR allocation `εN`.
pub fn allocate_elements_near_optimal(epsilon: f64, n_total: usize) -> Result<f64> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(invalid(format!("epsilon must lie in [0, 1], got {epsilon}")));
    }
    if epsilon == 0.0 || epsilon == 1.0 {
        return Err(Error::BoundaryWeight { epsilon });
    }
    Ok(epsilon * n_total as f64)
}

/// Integer split from the high-SNR rule: `round(εN)` to the DL, falling back to the exact
/// branches at ε ∈ {0, 1}.
pub fn near_optimal_allocation(p: &SystemParams) -> AllocationResult {
    let x = match allocate_elements_near_optimal(p.epsilon, p.n_total) {
        Ok(x) => x,
        Err(_) => p.epsilon * p.n_total as f64,
    };
    let n_d = (x.round() as usize).min(p.n_total);
    AllocationResult {
        x_d_continuous: x,
        n_u: p.n_total - n_d,
        n_d,
        wsr_bpshz: wsr_distributed(p, p.n_total - n_d, n_d),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    BsSide,
    UserSide,
}

impl Side {
    /// Hop gains of both links through a single AIRS on this side.
    pub fn hops(self, p: &SystemParams) -> HopGains {
        match self {
            Side::BsSide => HopGains { bs: p.h1_sq(), user: p.h2_sq() },
            Side::UserSide => HopGains { bs: p.h2_sq(), user: p.h1_sq() },
        }
    }
}

/// One AIRS with all N elements serving both links.
pub fn single_airs_breakdown(p: &SystemParams, side: Side) -> RateBreakdown {
    let n = p.n_total as f64;
    let hops = side.hops(p);
    RateBreakdown::from_snrs(p.epsilon, uplink_snr(p, n, hops), downlink_snr(p, n, hops))
}

pub fn wsr_single_airs(p: &SystemParams, side: Side) -> f64 {
    single_airs_breakdown(p, side).wsr
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Deployment {
    BsSide,
    UserSide,
    Distributed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeploymentChoice {
    pub scheme: Deployment,
    pub wsr: f64,
    /// Present when the distributed scheme was a candidate.
    pub allocation: Option<AllocationResult>,
}

/// Best of the single-AIRS schemes, with the distributed scheme as a candidate only for
/// W₁ < ε < W₂. Earlier candidates win exact ties.
pub fn best_deployment(p: &SystemParams) -> DeploymentChoice {
    let c = wsr_coefficients(p);
    let mut best =
        DeploymentChoice { scheme: Deployment::BsSide, wsr: wsr_single_airs(p, Side::BsSide), allocation: None };
    let user = wsr_single_airs(p, Side::UserSide);
    if user > best.wsr {
        best = DeploymentChoice { scheme: Deployment::UserSide, wsr: user, allocation: None };
    }
    if c.w1 < p.epsilon && p.epsilon < c.w2 {
        let alloc = allocate_elements_optimal(p);
        best.allocation = Some(alloc);
        if alloc.wsr_bpshz > best.wsr {
            best.scheme = Deployment::Distributed;
            best.wsr = alloc.wsr_bpshz;
        }
    }
    best
}

/// Passive IRS SNRs `P M N² g_a g_b / σ₀²` for transmit power `power_mw`.
pub fn pirs_snr(p: &SystemParams, power_mw: f64, n: f64, g_a: f64, g_b: f64) -> f64 {
    power_mw * p.m as f64 * n * n * g_a * g_b / p.sigma_0_mw
}

/// Hop gains BS→PIRS and PIRS→user.
pub fn pirs_hops(p: &SystemParams, user: Point3) -> Result<(f64, f64)> {
    let g = &p.geometry;
    Ok((pathloss_gain(g.bs.distance(&g.pirs), p.beta)?, pathloss_gain(g.pirs.distance(&user), p.beta)?))
}

pub fn pirs_breakdown(p: &SystemParams) -> Result<RateBreakdown> {
    let user = p.geometry.users.first().copied().unwrap_or_else(|| p.geometry.user_center());
    let (ga, gb) = pirs_hops(p, user)?;
    let n = p.n_total as f64;
    Ok(RateBreakdown::from_snrs(p.epsilon, pirs_snr(p, p.p_u_mw, n, ga, gb), pirs_snr(p, p.p_b_mw, n, ga, gb)))
}

/// Single passive IRS with all N elements at the configured position.
pub fn wsr_pirs_baseline(p: &SystemParams) -> Result<f64> {
    Ok(pirs_breakdown(p)?.wsr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::rel_diff;
    use crate::test_support::raw_link_snrs;

    #[test]
    fn default_coefficients() {
        let c = wsr_coefficients(&SystemParams::default_scenario());
        assert!(rel_diff(c.f1, 3.154e-13) < 1e-3, "f1 = {:e}", c.f1);
        assert!(rel_diff(c.f2, 1.345e-13) < 1e-3, "f2 = {:e}", c.f2);
        assert!(0.0 < c.w1 && c.w1 < c.w2 && c.w2 < 1.0);
    }

    #[test]
    fn noiseless_limit() {
        let mut p = SystemParams::default_scenario();
        let f1 = wsr_coefficients(&p).f1;
        p.sigma_f_mw = 1e-30;
        p.sigma_0_mw = 1e-30;
        let c = wsr_coefficients(&p);
        assert_eq!(c.f1, f1);
        assert!(c.f2 > 0.0 && c.f2 < 1e-30 && c.f3 > 0.0 && c.f3 < 1e-30);
    }

    #[test]
    fn doubling_antennas() {
        let p = SystemParams::default_scenario();
        let mut q = p.clone();
        q.m *= 2;
        let (a, b) = (wsr_coefficients(&p), wsr_coefficients(&q));
        assert!(rel_diff(b.f1, 2.0 * a.f1) < 1e-15);
        let first = p.m as f64 * p.p_f_mw * p.h1_sq() * p.sigma_f_mw;
        assert!(rel_diff(b.f2 - a.f2, first) < 1e-12);
    }

    #[test]
    fn distributed_edge_cases() {
        let p = SystemParams::default_scenario();
        assert_eq!(wsr_distributed(&p, 0, 0), 0.0);
        let p0 = p.clone().with_epsilon(0.0);
        let ul = log2_1p(p.p_u_mw * wsr_coefficients(&p).f1 * 30.0 / wsr_coefficients(&p).f2);
        assert!(rel_diff(wsr_distributed(&p0, 30, 70), ul) < 1e-15);
        assert_eq!(wsr_distributed(&p0, 30, 70), wsr_distributed(&p0, 30, 0));
    }

    #[test]
    fn distributed_matches_raw_matrices() {
        let p = SystemParams::default_scenario();
        let g = &p.geometry;
        let (ul, _) = raw_link_snrs(&p, g.bs_airs, g.users[0], 50);
        let (_, dl) = raw_link_snrs(&p, g.user_airs, g.users[0], 50);
        let b = distributed_breakdown(&p, 50.0, 50.0);
        assert!(rel_diff(b.ul_snr, ul) < 1e-9, "{} vs {}", b.ul_snr, ul);
        assert!(rel_diff(b.dl_snr, dl) < 1e-9, "{} vs {}", b.dl_snr, dl);
    }

    #[test]
    fn single_airs_match_raw_matrices() {
        let p = SystemParams::default_scenario();
        for (side, pos) in [(Side::BsSide, p.geometry.bs_airs), (Side::UserSide, p.geometry.user_airs)] {
            let (ul, dl) = raw_link_snrs(&p, pos, p.geometry.users[0], 100);
            let b = single_airs_breakdown(&p, side);
            assert!(rel_diff(b.ul_snr, ul) < 1e-9, "{side:?} UL {} vs {}", b.ul_snr, ul);
            assert!(rel_diff(b.dl_snr, dl) < 1e-9, "{side:?} DL {} vs {}", b.dl_snr, dl);
        }
    }

    #[test]
    fn symmetric_gains_make_sides_equal() {
        let mut p = SystemParams::default_scenario();
        // Shrinking D to ~0 makes both hops the same length.
        p.geometry = Geometry::standard(1e-9, 10.0).unwrap();
        let (a, b) = (wsr_single_airs(&p, Side::BsSide), wsr_single_airs(&p, Side::UserSide));
        assert!(rel_diff(a, b) < 1e-12);
    }

    #[test]
    fn boundary_weights_reduce_to_single_airs() {
        let p = SystemParams::default_scenario();
        let n = p.n_total;
        let p0 = p.clone().with_epsilon(0.0);
        assert!(rel_diff(wsr_distributed(&p0, n, 0), wsr_single_airs(&p0, Side::BsSide)) < 1e-12);
        let p1 = p.with_epsilon(1.0);
        assert!(rel_diff(wsr_distributed(&p1, 0, n), wsr_single_airs(&p1, Side::UserSide)) < 1e-12);
    }

    #[test]
    fn allocation_branches() {
        let p = SystemParams::default_scenario();
        let a = allocate_elements_optimal(&p.clone().with_epsilon(0.0));
        assert_eq!((a.x_d_continuous, a.n_d), (0.0, 0));
        let a = allocate_elements_optimal(&p.clone().with_epsilon(1.0));
        assert_eq!((a.x_d_continuous, a.n_d), (p.n_total as f64, p.n_total));
    }

    #[test]
    fn allocation_matches_exhaustive_search() {
        let p = SystemParams::default_scenario();
        for n in 2..=64 {
            for &eps in &[0.1, 0.3, 0.4, 0.5, 0.7, 0.9] {
                let q = p.clone().with_n_total(n).with_epsilon(eps);
                let a = allocate_elements_optimal(&q);
                let mut best = (0, f64::NEG_INFINITY);
                for nd in 0..=n {
                    let w = wsr_distributed(&q, n - nd, nd);
                    if w > best.1 + ROUNDING_TIE_TOL {
                        best = (nd, w);
                    }
                }
                assert_eq!(a.n_d, best.0, "n={n} eps={eps}");
                assert_eq!(a.n_u + a.n_d, n);
            }
        }
    }

    #[test]
    fn interior_stationarity() {
        let p = SystemParams::default_scenario();
        let a = allocate_elements_optimal(&p);
        let n = p.n_total as f64;
        assert!(a.x_d_continuous > 0.0 && a.x_d_continuous < n);
        let q0 = allocation_derivative_proxy(&p, 0.0);
        assert!(allocation_derivative_proxy(&p, a.x_d_continuous).abs() < 1e-6 * q0.abs());
        assert!(allocation_derivative_proxy(&p, a.x_d_continuous - 0.5) > 0.0);
        assert!(allocation_derivative_proxy(&p, a.x_d_continuous + 0.5) < 0.0);
    }

    #[test]
    fn near_optimal_rule() {
        assert_eq!(allocate_elements_near_optimal(0.4, 100).unwrap(), 40.0);
        assert_eq!(allocate_elements_near_optimal(0.5, 64).unwrap(), 32.0);
        assert!(matches!(allocate_elements_near_optimal(0.0, 10), Err(Error::BoundaryWeight { .. })));
        assert!(matches!(allocate_elements_near_optimal(1.0, 10), Err(Error::BoundaryWeight { .. })));
        assert!(allocate_elements_near_optimal(1.5, 10).is_err());
    }

    #[test]
    fn best_deployment_outside_window_is_single_airs() {
        let p = SystemParams::default_scenario().with_epsilon(0.0);
        let choice = best_deployment(&p);
        assert_ne!(choice.scheme, Deployment::Distributed);
        assert!(choice.allocation.is_none());
    }

    #[test]
    fn best_deployment_picks_max_in_window() {
        let p = SystemParams::default_scenario().with_n_total(400);
        let choice = best_deployment(&p);
        let all = [
            wsr_single_airs(&p, Side::BsSide),
            wsr_single_airs(&p, Side::UserSide),
            allocate_elements_optimal(&p).wsr_bpshz,
        ];
        assert_eq!(choice.wsr, all.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
        assert_eq!(choice.scheme, Deployment::Distributed);
    }

    #[test]
    fn window_widens_when_resources_double() {
        let base = SystemParams::default_scenario();
        let width = |p: &SystemParams| {
            let c = wsr_coefficients(p);
            c.w2 - c.w1
        };
        let w0 = width(&base);
        let mut variants = Vec::new();
        let mut q = base.clone();
        q.m *= 2;
        variants.push(q);
        variants.push(base.clone().with_n_total(base.n_total * 2));
        for f in 0..3 {
            let mut q = base.clone();
            match f {
                0 => q.p_f_mw *= 2.0,
                1 => q.p_u_mw *= 2.0,
                _ => q.p_b_mw *= 2.0,
            }
            variants.push(q);
        }
        for q in variants {
            assert!(width(&q) > w0);
        }
    }

    #[test]
    fn pirs_scaling() {
        let p = SystemParams::default_scenario();
        assert_eq!(wsr_pirs_baseline(&p.clone().with_n_total(0)).unwrap(), 0.0);
        let a = pirs_breakdown(&p.clone().with_n_total(50)).unwrap();
        let b = pirs_breakdown(&p.clone().with_n_total(100)).unwrap();
        assert!(rel_diff(b.ul_snr, 4.0 * a.ul_snr) < 1e-12);
        assert!(rel_diff(b.dl_snr, 4.0 * a.dl_snr) < 1e-12);
    }

    #[test]
    fn default_ordering() {
        let p = SystemParams::default_scenario();
        let dist = allocate_elements_optimal(&p).wsr_bpshz;
        let single = wsr_single_airs(&p, Side::BsSide).max(wsr_single_airs(&p, Side::UserSide));
        assert!(dist >= single);
        assert!(single >= wsr_pirs_baseline(&p).unwrap());
    }
}
