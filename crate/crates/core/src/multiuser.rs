//! Multi-user TDMA with user-adaptive AIRS beamforming: every user gets a dedicated phase
//! configuration in its own UL and DL slot, so per-user rates keep the single-user closed
//! form with a `1/K` pre-log.

use crate::channel::{pathloss_gain, Point3};
use crate::error::{invalid, Result};
use crate::numerics::log2_1p;
use crate::single_user::{
    downlink_snr, pirs_hops, pirs_snr, uplink_snr, AllocationResult, HopGains, Side, SystemParams,
};

/// Per-user hop gains: `h_u_sq[k]` user k → BS-side AIRS, `h_d_sq[k]` user-side AIRS → user k.
#[derive(Debug, Clone, PartialEq)]
pub struct UserLinkGains {
    pub h_u_sq: Vec<f64>,
    pub h_d_sq: Vec<f64>,
}

impl UserLinkGains {
    pub fn new(h_u_sq: Vec<f64>, h_d_sq: Vec<f64>) -> Result<Self> {
        if h_u_sq.is_empty() || h_u_sq.len() != h_d_sq.len() {
            return Err(invalid("need matching, non-empty per-user gain lists"));
        }
        if h_u_sq.iter().chain(&h_d_sq).any(|g| !(*g > 0.0) || !g.is_finite()) {
            return Err(invalid("user gains must be positive and finite"));
        }
        Ok(UserLinkGains { h_u_sq, h_d_sq })
    }

    pub fn from_positions(p: &SystemParams, users: &[Point3]) -> Result<Self> {
        let g = &p.geometry;
        let mut hu = Vec::with_capacity(users.len());
        let mut hd = Vec::with_capacity(users.len());
        for u in users {
            hu.push(pathloss_gain(u.distance(&g.bs_airs), p.beta)?);
            hd.push(pathloss_gain(g.user_airs.distance(u), p.beta)?);
        }
        UserLinkGains::new(hu, hd)
    }

    pub fn k(&self) -> usize {
        self.h_u_sq.len()
    }
}

/// Per-user rates (already carrying the `1/K` factor) and their weighted sum.
#[derive(Debug, Clone, PartialEq)]
pub struct UserRates {
    pub ul: Vec<f64>,
    pub dl: Vec<f64>,
    pub wsr: f64,
}

impl UserRates {
    fn from_snrs(epsilon: f64, ul_snr: impl Iterator<Item = f64>, dl_snr: impl Iterator<Item = f64>) -> Self {
        let ul: Vec<f64> = ul_snr.map(log2_1p).collect();
        let dl: Vec<f64> = dl_snr.map(log2_1p).collect();
        let k = ul.len() as f64;
        let ul: Vec<f64> = ul.into_iter().map(|r| r / k).collect();
        let dl: Vec<f64> = dl.into_iter().map(|r| r / k).collect();
        let wsr = ul.iter().zip(&dl).map(|(u, d)| (1.0 - epsilon) * u + epsilon * d).sum();
        UserRates { ul, dl, wsr }
    }

    pub fn ul_sum(&self) -> f64 {
        self.ul.iter().sum()
    }

    pub fn dl_sum(&self) -> f64 {
        self.dl.iter().sum()
    }
}

/// Distributed AIRSs with `n_u` elements above the BS and `n_d` above the user area.
pub fn rates_user_adaptive(p: &SystemParams, gains: &UserLinkGains, n_u: usize, n_d: usize) -> UserRates {
    let (h1, h2) = (p.h1_sq(), p.h2_sq());
    UserRates::from_snrs(
        p.epsilon,
        gains.h_u_sq.iter().map(|&g| uplink_snr(p, n_u as f64, HopGains { bs: h1, user: g })),
        gains.h_d_sq.iter().map(|&g| downlink_snr(p, n_d as f64, HopGains { bs: h2, user: g })),
    )
}

/// Exhaustive scan of `n_d ∈ {1, …, N−1}`; the smallest index wins ties.
pub fn allocate_elements_search(p: &SystemParams, gains: &UserLinkGains) -> Result<AllocationResult> {
    let n = p.n_total;
    if n < 2 {
        return Err(invalid("element search needs N ≥ 2"));
    }
    let mut best: Option<(usize, f64)> = None;
    for n_d in 1..n {
        let w = rates_user_adaptive(p, gains, n - n_d, n_d).wsr;
        if best.is_none_or(|(_, b)| w > b) {
            best = Some((n_d, w));
        }
    }
    let (n_d, wsr) = best.expect("non-empty range");
    Ok(AllocationResult { x_d_continuous: n_d as f64, n_u: n - n_d, n_d, wsr_bpshz: wsr })
}

/// All N elements on one AIRS serving every user in both directions.
pub fn rates_single_airs_adaptive(p: &SystemParams, users: &[Point3], side: Side) -> Result<UserRates> {
    if users.is_empty() {
        return Err(invalid("no users"));
    }
    let g = &p.geometry;
    let airs = match side {
        Side::BsSide => g.bs_airs,
        Side::UserSide => g.user_airs,
    };
    let bs_gain = pathloss_gain(g.bs.distance(&airs), p.beta)?;
    let user_gains = users.iter().map(|u| pathloss_gain(airs.distance(u), p.beta)).collect::<Result<Vec<_>>>()?;
    let n = p.n_total as f64;
    Ok(UserRates::from_snrs(
        p.epsilon,
        user_gains.iter().map(|&gu| uplink_snr(p, n, HopGains { bs: bs_gain, user: gu })),
        user_gains.iter().map(|&gu| downlink_snr(p, n, HopGains { bs: bs_gain, user: gu })),
    ))
}

/// Passive IRS with all N elements, reconfigured per user.
pub fn rates_pirs_adaptive(p: &SystemParams, users: &[Point3]) -> Result<UserRates> {
    if users.is_empty() {
        return Err(invalid("no users"));
    }
    let hops = users.iter().map(|u| pirs_hops(p, *u)).collect::<Result<Vec<_>>>()?;
    let n = p.n_total as f64;
    Ok(UserRates::from_snrs(
        p.epsilon,
        hops.iter().map(|&(ga, gb)| pirs_snr(p, p.p_u_mw, n, ga, gb)),
        hops.iter().map(|&(ga, gb)| pirs_snr(p, p.p_b_mw, n, ga, gb)),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::Geometry;
    use crate::numerics::{rel_diff, RngStream};
    use crate::single_user::{allocate_elements_optimal, distributed_breakdown, wsr_distributed};
    use crate::test_support::raw_link_snrs;
    use proptest::prelude::*;

    fn drop_users(p: &SystemParams, k: usize, seed: u64) -> Vec<Point3> {
        let mut rng = RngStream::new(seed, 0);
        let c = p.geometry.user_center();
        (0..k)
            .map(|_| {
                let r = 5.0 * rng.uniform().sqrt();
                let t = std::f64::consts::TAU * rng.uniform();
                Point3::new(c.x + r * t.cos(), c.y + r * t.sin(), 0.0)
            })
            .collect()
    }

    #[test]
    fn single_user_reduction() {
        let p = SystemParams::default_scenario();
        let gains = UserLinkGains::from_positions(&p, &p.geometry.users).unwrap();
        let r = rates_user_adaptive(&p, &gains, 60, 40);
        let b = distributed_breakdown(&p, 60.0, 40.0);
        assert!(rel_diff(r.ul[0], b.ul_rate) < 1e-14);
        assert!(rel_diff(r.dl[0], b.dl_rate) < 1e-14);
        assert!(rel_diff(r.wsr, wsr_distributed(&p, 60, 40)) < 1e-14);
    }

    #[test]
    fn empty_uplink_gives_zero_rates() {
        let p = SystemParams::default_scenario();
        let users = drop_users(&p, 4, 1);
        let gains = UserLinkGains::from_positions(&p, &users).unwrap();
        let r = rates_user_adaptive(&p, &gains, 0, p.n_total);
        assert!(r.ul.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn per_user_rates_match_raw_matrices() {
        let p = SystemParams::default_scenario();
        let users = drop_users(&p, 4, 9);
        let gains = UserLinkGains::from_positions(&p, &users).unwrap();
        let (n_u, n_d) = (36, 64);
        let r = rates_user_adaptive(&p, &gains, n_u, n_d);
        for (k, u) in users.iter().enumerate() {
            let (ul, _) = raw_link_snrs(&p, p.geometry.bs_airs, *u, n_u);
            let (_, dl) = raw_link_snrs(&p, p.geometry.user_airs, *u, n_d);
            assert!(rel_diff(r.ul[k], log2_1p(ul) / 4.0) < 1e-9);
            assert!(rel_diff(r.dl[k], log2_1p(dl) / 4.0) < 1e-9);
        }
    }

    #[test]
    fn single_airs_rates_match_raw_matrices() {
        let p = SystemParams::default_scenario();
        let users = drop_users(&p, 3, 5);
        for (side, pos) in [(Side::BsSide, p.geometry.bs_airs), (Side::UserSide, p.geometry.user_airs)] {
            let r = rates_single_airs_adaptive(&p, &users, side).unwrap();
            for (k, u) in users.iter().enumerate() {
                let (ul, dl) = raw_link_snrs(&p, pos, *u, p.n_total);
                assert!(rel_diff(r.ul[k], log2_1p(ul) / 3.0) < 1e-9);
                assert!(rel_diff(r.dl[k], log2_1p(dl) / 3.0) < 1e-9);
            }
        }
    }

    #[test]
    fn identical_users_share_one_slot_set() {
        let p = SystemParams::default_scenario();
        let c = p.geometry.user_center();
        let gains = UserLinkGains::from_positions(&p, &[c; 5]).unwrap();
        let r = rates_user_adaptive(&p, &gains, 50, 50);
        let b = distributed_breakdown(&p, 50.0, 50.0);
        assert!(rel_diff(r.ul_sum(), b.ul_rate) < 1e-14);
        assert!(rel_diff(r.dl_sum(), b.dl_rate) < 1e-14);
    }

    #[test]
    fn symmetric_instance_splits_evenly() {
        let mut p = SystemParams::default_scenario().with_epsilon(0.5).with_n_total(64);
        p.m = 1;
        p.p_b_mw = p.p_u_mw;
        p.geometry = Geometry::standard(1e-9, 10.0).unwrap();
        let g = p.h1_sq();
        let gains = UserLinkGains::new(vec![g; 3], vec![g; 3]).unwrap();
        assert_eq!(allocate_elements_search(&p, &gains).unwrap().n_d, 32);
    }

    #[test]
    fn search_reduces_to_single_user_optimum() {
        let p = SystemParams::default_scenario();
        let gains = UserLinkGains::from_positions(&p, &p.geometry.users).unwrap();
        let a = allocate_elements_search(&p, &gains).unwrap();
        assert_eq!(a.n_d, allocate_elements_optimal(&p).n_d);
    }

    #[test]
    fn high_snr_search_near_proportional_split() {
        let mut p = SystemParams::default_scenario();
        p.p_f_mw = 10.0;
        p.p_u_mw = 100.0;
        p.p_b_mw = 100.0;
        for (i, &eps) in [0.2, 0.4, 0.6, 0.8].iter().enumerate() {
            let q = p.clone().with_epsilon(eps);
            let users = drop_users(&q, 4, i as u64);
            let gains = UserLinkGains::from_positions(&q, &users).unwrap();
            let a = allocate_elements_search(&q, &gains).unwrap();
            let target = (eps * q.n_total as f64).round() as i64;
            assert!((a.n_d as i64 - target).abs() <= 2, "eps={eps}: {} vs {target}", a.n_d);
        }
    }

    #[test]
    fn single_airs_and_pirs_need_users() {
        let p = SystemParams::default_scenario();
        assert!(rates_single_airs_adaptive(&p, &[], Side::BsSide).is_err());
        assert!(rates_pirs_adaptive(&p, &[]).is_err());
        assert!(UserLinkGains::new(vec![1.0], vec![]).is_err());
        assert!(UserLinkGains::new(vec![0.0], vec![1.0]).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn search_is_exact_argmax(seed in 0u64..1000, n in 2usize..80, eps in 0.0f64..1.0) {
            let p = SystemParams::default_scenario().with_n_total(n).with_epsilon(eps);
            let users = drop_users(&p, 4, seed);
            let gains = UserLinkGains::from_positions(&p, &users).unwrap();
            let a = allocate_elements_search(&p, &gains).unwrap();
            prop_assert_eq!(a.n_u + a.n_d, n);
            for nd in 1..n {
                prop_assert!(a.wsr_bpshz >= rates_user_adaptive(&p, &gains, n - nd, nd).wsr);
            }
        }

        #[test]
        fn stronger_downlink_user_never_shrinks_dl_share(seed in 0u64..1000, k in 0usize..4, eps in 0.05f64..0.95) {
            let p = SystemParams::default_scenario().with_epsilon(eps);
            let users = drop_users(&p, 4, seed);
            let base = UserLinkGains::from_positions(&p, &users).unwrap();
            let mut last = 0;
            for scale in [1.0, 1.5, 2.0, 4.0, 8.0, 16.0] {
                let mut g = base.clone();
                g.h_d_sq[k] *= scale;
                let nd = allocate_elements_search(&p, &g).unwrap().n_d;
                prop_assert!(nd >= last, "scale {}: {} < {}", scale, nd, last);
                last = nd;
            }
        }
    }
}
