//! Independent reference computations and the numbered acceptance checks built on them.
//! `selftest` and the acceptance target both run these.

use std::f64::consts::TAU;
use std::time::{Duration, Instant};

use airs_core::channel::{link_channel, ArraySpec, Point3};
use airs_core::multiuser::{rates_user_adaptive, UserLinkGains};
use airs_core::numerics::{log2_1p, rel_diff, CMat, CVec, RngStream, C64};
use airs_core::qcqp::{solve_coordinate_ascent_multistart, solve_sdr, QuadraticForm, SdrOptions};
use airs_core::single_user::{
    allocate_elements_optimal, distributed_breakdown, near_optimal_allocation, single_airs_breakdown, wsr_coefficients,
    wsr_distributed, wsr_pirs_baseline, wsr_single_airs, Side, SystemParams,
};
use airs_core::static_ao::{closed_form_blocks, rates_static, run_alternating_optimization, AoOptions, StaticChannels};

use crate::config::{Command, ScenarioConfig, Scheme};
use crate::placement::place_users;
use crate::record::records_csv;
use crate::sweep::run_sweep;

/// Pinned thresholds.
pub mod tol {
    pub const CLOSED_FORM_REL: f64 = 1e-9;
    pub const HIGH_SNR_GAP: f64 = 0.02;
    pub const ENDPOINT_REL: f64 = 1e-9;
    pub const TRANSFORM_REL: f64 = 1e-9;
    pub const FEASIBILITY_REL: f64 = 1e-9;
    pub const AO_GAIN: f64 = 1e-4;
    pub const AO_MAX_OUTER: usize = 50;
    pub const PHASE_GRID_GAP: f64 = 0.05;
    /// Slack for "maximized at full power": equal WSRs count as a tie.
    pub const POWER_TIE_REL: f64 = 1e-9;
    pub const QCQP_GAP: f64 = 0.01;
    pub const SDR_RELAXATION_SLACK: f64 = 1e-6;
    pub const REGION_SLACK: f64 = 1e-6;
}

/// Wall-time budgets of the timed checks.
pub fn time_limit(id: usize) -> Option<Duration> {
    match id {
        1 => Some(Duration::from_secs(30)),
        2 => Some(Duration::from_secs(10)),
        7 => Some(Duration::from_secs(300)),
        11 => Some(Duration::from_secs(600)),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub id: usize,
    pub name: &'static str,
    /// Numerical verdict; timing is judged separately so reruns agree.
    pub passed: bool,
    pub metric: f64,
    pub threshold: f64,
    pub detail: String,
    pub elapsed: Duration,
}

impl CheckOutcome {
    pub fn within_time(&self) -> bool {
        time_limit(self.id).is_none_or(|l| self.elapsed <= l)
    }
}

fn check(id: usize, name: &'static str, f: impl FnOnce() -> (bool, f64, f64, String)) -> CheckOutcome {
    let t = Instant::now();
    let (passed, metric, threshold, detail) = f();
    CheckOutcome { id, name, passed, metric, threshold, detail, elapsed: t.elapsed() }
}

/// SNRs of the UL and DL through one AIRS of `n` elements at `airs`, built from the raw
/// channel matrices: phases aligned to the cascade, amplification at its power limit,
/// MRC at the BS for the UL and full-power MRT for the DL.
pub fn raw_link_snrs(p: &SystemParams, airs: Point3, user: Point3, n: usize) -> (f64, f64) {
    let bs = p.geometry.bs;
    let bs_arr = ArraySpec::for_count(p.m).expect("M >= 1");
    let irs_arr = ArraySpec::for_count(n).expect("n >= 1");
    let one = ArraySpec::new(1, 1, 0.5).expect("single antenna");
    let (sf, s0) = (p.sigma_f_mw, p.sigma_0_mw);

    let h = link_channel(user, one, airs, irs_arr, p.beta).expect("user-AIRS").as_column();
    let g_ul = link_channel(airs, irs_arr, bs, bs_arr, p.beta).expect("AIRS-BS").matrix;
    let g_dl = link_channel(bs, bs_arr, airs, irs_arr, p.beta).expect("BS-AIRS").matrix;
    let row = link_channel(airs, irs_arr, user, one, p.beta).expect("AIRS-user").matrix;
    let h_dl = CVec::from_fn(n, |i| row[(0, i)]);

    // UL: the best phase makes every element add in phase at the BS array response.
    let ul_phase = best_phase(&g_ul, &h);
    let alpha = (p.p_f_mw / (p.p_u_mw * h.norm_sqr() + sf * n as f64)).sqrt();
    let eff = g_ul.mul_vec(&ul_phase.hadamard(&h)).scale_real(alpha);
    let u = eff.normalized().expect("nonzero UL cascade");
    let leak = g_ul.adjoint_mul_vec(&u).hadamard(&ul_phase.conj());
    let ul = p.p_u_mw * u.dot(&eff).norm_sqr() / (alpha * alpha * sf * leak.norm_sqr() + s0);

    // DL: MRT toward the AIRS, then the phase that aligns the reflected signal at the user.
    let (_, tx) = principal_right(&g_dl);
    let w = tx.scale_real(p.p_b_mw.sqrt());
    let gw = g_dl.mul_vec(&w);
    let dl_phase = CVec::from_fn(n, |i| C64::from_polar(1.0, -(h_dl[i] * gw[i]).arg()));
    let alpha = (p.p_f_mw / (gw.norm_sqr() + sf * n as f64)).sqrt();
    let s: C64 = (0..n).map(|i| h_dl[i] * dl_phase[i] * gw[i]).sum::<C64>() * alpha;
    let dl = s.norm_sqr() / (alpha * alpha * sf * h_dl.norm_sqr() + s0);
    (ul, dl)
}

/// Phase vector maximizing `‖G diag(φ) h‖` for a rank-one `G`: align each element with the
/// conjugate of its column phase times the incident phase.
fn best_phase(g: &CMat, h: &CVec) -> CVec {
    let (_, left) = principal_left(g);
    // G = σ a bᴴ, so G diag(φ) h = σ a Σ conj(b_i) φ_i h_i.
    let b = g.adjoint_mul_vec(&left);
    CVec::from_fn(h.len(), |i| C64::from_polar(1.0, b[i].arg() - h[i].arg()))
}

fn principal_left(g: &CMat) -> (f64, CVec) {
    // Rank one: any nonzero column spans the range.
    let col = (0..g.cols()).map(|j| g.column(j)).max_by(|a, b| a.norm_sqr().total_cmp(&b.norm_sqr())).expect("cols");
    let u = col.normalized().expect("nonzero channel");
    (g.adjoint_mul_vec(&u).norm(), u)
}

fn principal_right(g: &CMat) -> (f64, CVec) {
    let (s, u) = principal_left(g);
    (s, g.adjoint_mul_vec(&u).normalized().expect("nonzero channel"))
}

/// Broad random scenario for the closed-form checks.
pub fn random_params(rng: &mut RngStream) -> SystemParams {
    let mut cfg = ScenarioConfig::base();
    cfg.p_u_dbm = rng.uniform_range(0.0, 30.0);
    cfg.p_b_dbm = rng.uniform_range(10.0, 40.0);
    cfg.p_f_dbm = rng.uniform_range(-20.0, 10.0);
    cfg.sigma_f_dbm = rng.uniform_range(-100.0, -70.0);
    cfg.sigma_0_dbm = rng.uniform_range(-100.0, -70.0);
    cfg.beta_db = rng.uniform_range(-40.0, -20.0);
    cfg.m = 1 + (rng.uniform() * 8.0) as usize;
    cfg.epsilon = rng.uniform();
    cfg.d_m = rng.uniform_range(20.0, 500.0);
    cfg.h_m = rng.uniform_range(2.0, 30.0);
    let n = 2 + (rng.uniform() * 63.0) as usize;
    cfg.params_at(n, cfg.epsilon)
}

fn rate_err(closed: f64, snr: f64) -> f64 {
    rel_diff(closed, log2_1p(snr))
}

/// Closed-form distributed, BS-side, user-side and per-user adaptive rates against the
/// raw-matrix reference.
pub fn check_closed_forms(scenarios: usize) -> CheckOutcome {
    check(1, "closed forms match raw channel matrices", || {
        let mut rng = RngStream::new(0xc1, 0);
        let mut worst: f64 = 0.0;
        for _ in 0..scenarios {
            let p = random_params(&mut rng);
            let g = p.geometry.clone();
            let center = g.user_center();
            let n = p.n_total;
            let n_u = 1 + (rng.uniform() * (n - 1) as f64) as usize;
            let n_d = n - n_u;

            let dist = distributed_breakdown(&p, n_u as f64, n_d as f64);
            worst = worst.max(rate_err(dist.ul_rate, raw_link_snrs(&p, g.bs_airs, center, n_u).0));
            worst = worst.max(rate_err(dist.dl_rate, raw_link_snrs(&p, g.user_airs, center, n_d).1));
            for (side, airs) in [(Side::BsSide, g.bs_airs), (Side::UserSide, g.user_airs)] {
                let b = single_airs_breakdown(&p, side);
                let (ul, dl) = raw_link_snrs(&p, airs, center, n);
                worst = worst.max(rate_err(b.ul_rate, ul)).max(rate_err(b.dl_rate, dl));
            }

            let mut mp = p.clone();
            mp.k_users = 1 + (rng.uniform() * 4.0) as usize;
            let users = place_users(&mut rng, &mp, 5.0);
            let gains = UserLinkGains::from_positions(&mp, &users).expect("users off the AIRSs");
            let r = rates_user_adaptive(&mp, &gains, n_u, n_d);
            let k = users.len() as f64;
            for (i, user) in users.iter().enumerate() {
                worst = worst.max(rate_err(r.ul[i] * k, raw_link_snrs(&mp, g.bs_airs, *user, n_u).0));
                worst = worst.max(rate_err(r.dl[i] * k, raw_link_snrs(&mp, g.user_airs, *user, n_d).1));
            }
        }
        (
            worst <= tol::CLOSED_FORM_REL,
            worst,
            tol::CLOSED_FORM_REL,
            format!("{scenarios} scenarios, worst relative rate error"),
        )
    })
}

/// Brute-force best DL share over `0..=N`; the smallest index wins exact ties.
pub fn exhaustive_allocation(p: &SystemParams) -> (usize, f64) {
    let n = p.n_total;
    let mut best = (0, wsr_distributed(p, n, 0));
    for n_d in 1..=n {
        let w = wsr_distributed(p, n - n_d, n_d);
        if w > best.1 {
            best = (n_d, w);
        }
    }
    best
}

pub fn check_allocation_exact(draws: usize) -> CheckOutcome {
    check(2, "integer allocation equals exhaustive search", || {
        let mut rng = RngStream::new(0xc2, 0);
        let (mut mismatches, mut ties, mut cases) = (0usize, 0usize, 0usize);
        for _ in 0..draws {
            let base = random_params(&mut rng);
            for n in 2..=64 {
                let p = base.clone().with_n_total(n);
                let a = allocate_elements_optimal(&p);
                let (n_d, w) = exhaustive_allocation(&p);
                cases += 1;
                if a.n_d != n_d {
                    // Two shares with the same WSR to round-off are equally optimal.
                    if rel_diff(a.wsr_bpshz, w) <= 1e-12 {
                        ties += 1;
                    } else {
                        mismatches += 1;
                    }
                }
            }
        }
        (mismatches == 0, mismatches as f64, 0.0, format!("{cases} cases, {ties} exact ties"))
    })
}

pub fn check_high_snr_rounding() -> CheckOutcome {
    check(3, "round(eps N) is near-optimal at high SNR", || {
        let mut cfg = ScenarioConfig::base();
        cfg.p_f_dbm = 10.0;
        cfg.p_u_dbm = 20.0;
        cfg.p_b_dbm = 20.0;
        let mut worst: f64 = 0.0;
        for eps in [0.2, 0.4, 0.6, 0.8] {
            for n in [32, 64, 128] {
                let p = cfg.params_at(n, eps);
                let near = near_optimal_allocation(&p).wsr_bpshz;
                let (_, best) = exhaustive_allocation(&p);
                worst = worst.max((best - near) / best);
            }
        }
        (worst <= tol::HIGH_SNR_GAP, worst, tol::HIGH_SNR_GAP, "worst relative WSR loss over 12 points".into())
    })
}

pub fn check_deployment_ordering() -> CheckOutcome {
    check(4, "deployment ordering and weight endpoints", || {
        let cfg = ScenarioConfig::base();
        let (mut order_violations, mut worst_end): (usize, f64) = (0, 0.0);
        for n in (20..=200).step_by(20) {
            let p = cfg.params_at(n, cfg.epsilon);
            let dist = allocate_elements_optimal(&p).wsr_bpshz;
            let single = wsr_single_airs(&p, Side::BsSide).max(wsr_single_airs(&p, Side::UserSide));
            let pirs = wsr_pirs_baseline(&p).expect("PIRS off the BS");
            if !(dist >= single && single >= pirs) {
                order_violations += 1;
            }
            let p0 = p.clone().with_epsilon(0.0);
            let p1 = p.clone().with_epsilon(1.0);
            worst_end = worst_end
                .max(rel_diff(allocate_elements_optimal(&p0).wsr_bpshz, wsr_single_airs(&p0, Side::BsSide)))
                .max(rel_diff(allocate_elements_optimal(&p1).wsr_bpshz, wsr_single_airs(&p1, Side::UserSide)));
        }
        let passed = order_violations == 0 && worst_end <= tol::ENDPOINT_REL;
        (
            passed,
            worst_end,
            tol::ENDPOINT_REL,
            format!("{order_violations} ordering violations over 10 N; metric is the worst endpoint error"),
        )
    })
}

pub fn check_threshold_gap() -> CheckOutcome {
    check(5, "W2 - W1 grows when a resource doubles", || {
        let base = SystemParams::default_scenario();
        let gap = |p: &SystemParams| {
            let c = wsr_coefficients(p);
            c.w2 - c.w1
        };
        let g0 = gap(&base);
        let variants: [(&str, SystemParams); 5] = [
            ("M", SystemParams { m: base.m * 2, ..base.clone() }),
            ("N", base.clone().with_n_total(base.n_total * 2)),
            ("P_F", SystemParams { p_f_mw: base.p_f_mw * 2.0, ..base.clone() }),
            ("P_U", SystemParams { p_u_mw: base.p_u_mw * 2.0, ..base.clone() }),
            ("P_B", SystemParams { p_b_mw: base.p_b_mw * 2.0, ..base.clone() }),
        ];
        let mut min_inc = f64::INFINITY;
        let mut failed = Vec::new();
        for (name, p) in &variants {
            let inc = gap(p) - g0;
            min_inc = min_inc.min(inc);
            if !(inc > 0.0) {
                failed.push(*name);
            }
        }
        (failed.is_empty(), min_inc, 0.0, format!("smallest increase; non-increasing: {failed:?}"))
    })
}

/// Seeded static instance with `k` users on the 5 m disk.
pub fn static_instance(seed: u64, m: usize, k: usize, n_s: usize) -> (SystemParams, StaticChannels) {
    let mut cfg = ScenarioConfig::base();
    cfg.m = m;
    cfg.k_users = k;
    let mut p = cfg.params_at(2 * n_s, cfg.epsilon);
    p.geometry.users = place_users(&mut RngStream::new(seed, 0), &p, 5.0);
    let ch = StaticChannels::from_geometry(&p).expect("valid static instance");
    (p, ch)
}

pub fn check_transform_tightness() -> CheckOutcome {
    check(6, "transforms are tight at every inner iteration", || {
        let (p, ch) = static_instance(0xc6, 4, 4, 16);
        let out = match run_alternating_optimization(&p, &ch, &AoOptions::default()) {
            Ok(o) => o,
            Err(e) => return (false, f64::NAN, tol::TRANSFORM_REL, format!("optimization failed: {e}")),
        };
        let mut worst: f64 = 0.0;
        let mut count = 0;
        for c in out.inner.iter().flat_map(|i| &i.checks) {
            count += 1;
            worst = worst.max((c.f1 - c.wsr).abs() / (1.0 + c.wsr.abs()));
            worst = worst.max((c.f2 - c.f1).abs() / (1.0 + c.f1.abs()));
        }
        (count > 0 && worst <= tol::TRANSFORM_REL, worst, tol::TRANSFORM_REL, format!("{count} inner iterations"))
    })
}

fn non_decreasing(trace: &[f64]) -> bool {
    trace.windows(2).all(|w| w[1] >= w[0])
}

pub fn check_ao_monotone(instances: usize) -> CheckOutcome {
    check(7, "alternating optimization is monotone, feasible and converges", || {
        let (mut bad_trace, mut unconverged, mut failed) = (0, 0, 0);
        let mut worst: f64 = 0.0;
        let mut max_outer = 0;
        for i in 0..instances {
            let n_s = if i < instances / 2 { 8 } else { 16 };
            let (p, ch) = static_instance(0xc7 + i as u64, 4, 4, n_s);
            let out = match run_alternating_optimization(&p, &ch, &AoOptions { seed: i as u64, ..AoOptions::default() })
            {
                Ok(o) => o,
                Err(_) => {
                    failed += 1;
                    continue;
                }
            };
            if !non_decreasing(&out.outer_trace) || !out.inner.iter().all(|x| non_decreasing(&x.wsr_trace)) {
                bad_trace += 1;
            }
            if !out.converged || out.outer_iterations > tol::AO_MAX_OUTER {
                unconverged += 1;
            }
            max_outer = max_outer.max(out.outer_iterations);
            worst = out.violations.iter().fold(worst, |a, &v| a.max(v));
        }
        let passed = failed == 0 && bad_trace == 0 && unconverged == 0 && worst <= tol::FEASIBILITY_REL;
        let detail = format!(
            "{instances} instances: {failed} errors, {bad_trace} non-monotone, {unconverged} unconverged, max {max_outer} outer iterations; metric is the worst violation"
        );
        (passed, worst, tol::FEASIBILITY_REL, detail)
    })
}

/// Best WSR over a uniform phase grid with `points` values per element and closed-form
/// remaining blocks.
pub fn phase_grid_optimum(p: &SystemParams, ch: &StaticChannels, points: usize) -> f64 {
    let n = ch.n_s();
    let grid: Vec<C64> = (0..points).map(|k| C64::from_polar(1.0, TAU * k as f64 / points as f64)).collect();
    let mut idx = vec![0usize; n];
    let mut best = f64::NEG_INFINITY;
    loop {
        let phase = CVec::from_fn(n, |i| grid[idx[i]]);
        if let Ok(s) = closed_form_blocks(ch, p, phase, vec![p.p_u_mw; ch.k()]) {
            best = best.max(rates_static(&s, ch, p).wsr);
        }
        let mut i = 0;
        while i < n {
            idx[i] += 1;
            if idx[i] < points {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
        if i == n {
            return best;
        }
    }
}

pub fn check_small_instance(instances: usize) -> CheckOutcome {
    check(8, "small instance is near the phase-grid optimum", || {
        let mut worst = f64::INFINITY;
        for i in 0..instances {
            let (p, ch) = static_instance(0xc8 + i as u64, 2, 1, 4);
            let grid = phase_grid_optimum(&p, &ch, 8);
            let ao = match run_alternating_optimization(&p, &ch, &AoOptions::default()) {
                Ok(o) => o.wsr(),
                Err(e) => return (false, f64::NAN, 1.0 - tol::PHASE_GRID_GAP, format!("optimization failed: {e}")),
            };
            worst = worst.min(ao / grid);
        }
        let thr = 1.0 - tol::PHASE_GRID_GAP;
        (worst >= thr, worst, thr, format!("{instances} instances, worst ratio to the 8^4 grid"))
    })
}

pub fn check_full_power(instances: usize) -> CheckOutcome {
    check(9, "full user power maximizes the converged WSR", || {
        let factors = [0.25, 0.5, 0.75, 1.0];
        let mut worst = f64::NEG_INFINITY;
        let mut losers = 0;
        for i in 0..instances {
            let (p, ch) = static_instance(0xc9 + i as u64, 4, 2, 8);
            let mut wsr = Vec::new();
            for f in factors {
                let opts = AoOptions { user_powers: Some(vec![f * p.p_u_mw; ch.k()]), ..AoOptions::default() };
                match run_alternating_optimization(&p, &ch, &opts) {
                    Ok(o) => wsr.push(o.wsr()),
                    Err(e) => return (false, f64::NAN, 0.0, format!("optimization failed: {e}")),
                }
            }
            let full = wsr[3];
            let other = wsr[..3].iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let excess = (other - full) / (1.0 + full.abs());
            worst = worst.max(excess);
            if excess > tol::POWER_TIE_REL {
                losers += 1;
            }
        }
        (
            losers == 0,
            worst,
            tol::POWER_TIE_REL,
            format!("{instances} instances, {losers} beaten at reduced power; metric is the largest relative excess"),
        )
    })
}

/// Random PSD quadratic form of dimension `n`.
pub fn random_form(rng: &mut RngStream, n: usize) -> QuadraticForm {
    let x = CMat::from_fn(n, n, |_, _| rng.complex_normal());
    let a = x.matmul(&x.adjoint()).hermitian_part();
    let b = rng.complex_normal_vec(n).scale_real(2.0);
    QuadraticForm::new(a, b).expect("PSD by construction")
}

/// Exhaustive optimum of a three-element form over `points³` grid phases (one element's
/// phase need not be fixed: the linear term breaks the rotation symmetry).
pub fn grid_optimum_3(qf: &QuadraticForm, points: usize) -> f64 {
    assert_eq!(qf.dim(), 3);
    let a = qf.a();
    let b = qf.b();
    let ph: Vec<C64> = (0..points).map(|k| C64::from_polar(1.0, TAU * k as f64 / points as f64)).collect();
    let mut best = f64::NEG_INFINITY;
    for &x in &ph {
        for &y in &ph {
            for &z in &ph {
                let v = [x, y, z];
                let mut quad = 0.0;
                let mut lin = 0.0;
                for i in 0..3 {
                    lin += (v[i].conj() * b[i]).re;
                    for j in 0..3 {
                        quad += (v[i].conj() * a[(i, j)] * v[j]).re;
                    }
                }
                best = best.max(-quad + 2.0 * lin);
            }
        }
    }
    best
}

/// Random restarts on top of the b-aligned start: single-start ascent is a local method.
pub const CA_EXTRA_STARTS: usize = 15;

pub fn check_qcqp(instances: usize) -> CheckOutcome {
    check(10, "QCQP solvers reach the 64^3 grid optimum", || {
        let mut rng = RngStream::new(0xca, 0);
        let (mut worst_gap, mut worst_relax): (f64, f64) = (0.0, f64::NEG_INFINITY);
        let mut failures = 0;
        for i in 0..instances {
            let qf = random_form(&mut rng, 3);
            let grid = grid_optimum_3(&qf, 64);
            let mut starts = RngStream::new(0xcd, i as u64);
            let ca = solve_coordinate_ascent_multistart(
                &qf,
                &qf.b().unit_modulus(),
                CA_EXTRA_STARTS,
                1e-12,
                10_000,
                &mut starts,
            );
            let sdr = solve_sdr(&qf, &SdrOptions::default(), &mut RngStream::new(0xcb, i as u64));
            match (ca, sdr) {
                (Ok(ca), Ok(sdr)) => {
                    let scale = grid.abs().max(f64::MIN_POSITIVE);
                    worst_gap = worst_gap.max((grid - ca.objective) / scale).max((grid - sdr.objective) / scale);
                    worst_relax = worst_relax.max(sdr.objective - sdr.relaxation_value);
                }
                _ => failures += 1,
            }
        }
        let passed = failures == 0 && worst_gap <= tol::QCQP_GAP && worst_relax <= tol::SDR_RELAXATION_SLACK;
        let detail = format!(
            "{instances} instances, {failures} solver errors, SDR objective minus relaxation at most {worst_relax:.3e}"
        );
        (passed, worst_gap, tol::QCQP_GAP, detail)
    })
}

/// Config of the rate-region check: 11 weights, N = 32, K = 2.
pub fn region_config() -> ScenarioConfig {
    let mut c = ScenarioConfig::defaults_for(Command::RateRegion);
    c.n_total = 32;
    c.k_users = 2;
    c.drops = 1;
    c.seed = 0xcc;
    c
}

pub fn check_rate_region() -> CheckOutcome {
    check(11, "joint design dominates the fixed designs, individual bounds it", || {
        let cfg = region_config();
        let records = match run_sweep(Command::RateRegion, &cfg, 1) {
            Ok(r) => r,
            Err(e) => return (false, f64::NAN, tol::REGION_SLACK, format!("sweep failed: {e}")),
        };
        let failed = records.iter().filter(|r| !r.ok()).count();
        let curve = |s: Scheme| -> Vec<(f64, f64)> {
            records
                .iter()
                .filter(|r| r.scheme == s.name())
                .filter_map(|r| r.metrics().map(|m| (m.ul_rate, m.dl_rate)))
                .collect()
        };
        let joint = curve(Scheme::RegionJoint);
        let individual = curve(Scheme::RegionIndividual);
        // Shortfall of the best joint point against a fixed-design point.
        let mut worst = f64::NEG_INFINITY;
        for s in [Scheme::RegionFixedUl, Scheme::RegionFixedDl] {
            for (ul, dl) in curve(s) {
                let gap = joint.iter().map(|(ju, jd)| (ul - ju).max(dl - jd)).fold(f64::INFINITY, f64::min);
                worst = worst.max(gap);
            }
        }
        let mut bound_excess = f64::NEG_INFINITY;
        for (j, i) in joint.iter().zip(&individual) {
            bound_excess = bound_excess.max(j.0 - i.0).max(j.1 - i.1);
        }
        let complete = joint.len() == cfg.grid.len() && individual.len() == cfg.grid.len();
        let passed = failed == 0 && complete && worst <= tol::REGION_SLACK && bound_excess <= tol::REGION_SLACK;
        let detail = format!(
            "{} weights, {failed} failed rows, joint exceeds individual by at most {bound_excess:.3e}; metric is the worst fixed-point shortfall",
            cfg.grid.len()
        );
        (passed, worst, tol::REGION_SLACK, detail)
    })
}

/// Small configs that exercise every sweep command quickly.
pub fn smoke_config(cmd: Command) -> ScenarioConfig {
    let mut c = ScenarioConfig::defaults_for(cmd);
    c.seed = 0x5eed;
    match cmd {
        Command::SingleNSweep => c.grid = vec![20.0, 60.0],
        Command::SingleEpsSweep => c.grid = vec![0.0, 0.5, 1.0],
        Command::AllocCurve => {
            c.grid = vec![20.0, 40.0];
            c.alloc_epsilons = vec![0.4, 0.6];
        }
        Command::MuAdaptive => {
            c.grid = vec![20.0, 40.0];
            c.drops = 3;
        }
        Command::MuStatic => {
            c.grid = vec![8.0, 12.0];
            c.k_users = 2;
            c.drops = 2;
        }
        Command::RateRegion => {
            c.n_total = 8;
            c.grid = vec![0.0, 0.5, 1.0];
            c.qcqp_method = airs_core::qcqp::QcqpMethod::CoordinateAscent;
        }
        Command::Selftest => {}
    }
    c
}

/// Every sweep twice, sequential and on two workers; the CSVs must agree byte for byte.
pub fn check_sweep_determinism() -> CheckOutcome {
    check(12, "sweeps are byte-identical across reruns", || {
        let mut differing = Vec::new();
        let mut failed_rows = 0;
        for cmd in Command::SWEEPS {
            let cfg = smoke_config(cmd);
            let a = run_sweep(cmd, &cfg, 1);
            let b = run_sweep(cmd, &cfg, 2);
            match (a, b) {
                (Ok(a), Ok(b)) => {
                    failed_rows += a.iter().filter(|r| !r.ok()).count();
                    let same = matches!((records_csv(&a), records_csv(&b)), (Ok(x), Ok(y)) if x == y);
                    if !same {
                        differing.push(cmd.name());
                    }
                }
                _ => differing.push(cmd.name()),
            }
        }
        let passed = differing.is_empty() && failed_rows == 0;
        (passed, differing.len() as f64, 0.0, format!("{failed_rows} failed rows; differing: {differing:?}"))
    })
}

/// Every check at full size, in order.
pub fn run_all() -> Vec<CheckOutcome> {
    vec![
        check_closed_forms(500),
        check_allocation_exact(100),
        check_high_snr_rounding(),
        check_deployment_ordering(),
        check_threshold_gap(),
        check_transform_tightness(),
        check_ao_monotone(20),
        check_small_instance(5),
        check_full_power(10),
        check_qcqp(50),
        check_rate_region(),
        check_sweep_determinism(),
    ]
}

pub fn checks_csv(checks: &[CheckOutcome]) -> crate::error::Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(["id", "name", "passed", "metric", "threshold", "detail"])?;
    for c in checks {
        w.write_record([
            c.id.to_string(),
            c.name.to_string(),
            c.passed.to_string(),
            crate::record::fmt_float(c.metric),
            crate::record::fmt_float(c.threshold),
            c.detail.clone(),
        ])?;
    }
    Ok(w.into_inner().map_err(|e| e.into_error())?)
}
