//! Static AIRS beamforming for multi-user TDMA. Both AIRSs apply one shared phase vector to
//! every user and both directions, each direction has one common amplification factor, and
//! the BS beamformers, amplification factors and phase vector are optimized by two-layer
//! alternating optimization.
//!
//! Phase convention: `phase[n] = e^{jφ_n}` is the diagonal of Φ, and the QCQP variable is
//! `v = conj(phase)` so that `uᴴGᴴΦh = vᴴa` with `a = conj(G u) ⊙ h`.

use std::f64::consts::LN_2;

use crate::channel::{link_channel, ArraySpec, LosChannel, HALF_WAVELENGTH};
use crate::error::{invalid, Error, Result};
use crate::multiuser::{rates_user_adaptive, UserLinkGains, UserRates};
use crate::numerics::{hermitian_principal_eig, log2_1p, CMat, CVec, RngStream, C64};
use crate::qcqp::{coordinate_ascent_capped, solve_sdr, QcqpMethod, QuadraticForm, SdrOptions};
use crate::single_user::SystemParams;

/// Channels of the distributed deployment with `N_s` elements per AIRS.
#[derive(Debug, Clone, PartialEq)]
pub struct StaticChannels {
    /// BS → BS-side AIRS, `N_s × M`. The uplink uses `G_Uᴴ`.
    pub g_u: LosChannel,
    /// BS → user-side AIRS, `N_s × M`.
    pub g_d: LosChannel,
    /// User k → BS-side AIRS.
    pub h_u: Vec<CVec>,
    /// User-side AIRS → user k enters as `h_D,kᴴ`.
    pub h_d: Vec<CVec>,
}

impl StaticChannels {
    pub fn new(g_u: LosChannel, g_d: LosChannel, h_u: Vec<CVec>, h_d: Vec<CVec>) -> Result<Self> {
        let (n_s, m) = (g_u.matrix.rows(), g_u.matrix.cols());
        if n_s == 0 || m == 0 {
            return Err(invalid("empty BS-AIRS channel"));
        }
        if g_d.matrix.rows() != n_s || g_d.matrix.cols() != m {
            return Err(invalid("the two BS-AIRS channels must have the same shape"));
        }
        if h_u.is_empty() || h_u.len() != h_d.len() {
            return Err(invalid("need matching, non-empty per-user channel lists"));
        }
        if h_u.iter().chain(&h_d).any(|h| h.len() != n_s) {
            return Err(invalid("user channels must have one entry per AIRS element"));
        }
        Ok(StaticChannels { g_u, g_d, h_u, h_d })
    }

    /// LoS channels for the users in `p.geometry.users`, `N_s = N/2` elements per AIRS.
    pub fn from_geometry(p: &SystemParams) -> Result<Self> {
        p.validate()?;
        if !p.n_total.is_multiple_of(2) {
            return Err(invalid(format!("static beamforming needs an even element count, got {}", p.n_total)));
        }
        let g = &p.geometry;
        if g.users.len() != p.k_users {
            return Err(invalid(format!("geometry has {} users but K = {}", g.users.len(), p.k_users)));
        }
        let n_s = p.n_total / 2;
        let bs_arr = ArraySpec::for_count(p.m)?;
        let irs = ArraySpec::for_count(n_s)?;
        let one = ArraySpec::new(1, 1, HALF_WAVELENGTH)?;
        let g_u = link_channel(g.bs, bs_arr, g.bs_airs, irs, p.beta)?;
        let g_d = link_channel(g.bs, bs_arr, g.user_airs, irs, p.beta)?;
        let mut h_u = Vec::with_capacity(g.users.len());
        let mut h_d = Vec::with_capacity(g.users.len());
        for user in &g.users {
            h_u.push(link_channel(*user, one, g.bs_airs, irs, p.beta)?.as_column());
            let row = link_channel(g.user_airs, irs, *user, one, p.beta)?.matrix;
            h_d.push(CVec::from_fn(n_s, |i| row[(0, i)].conj()));
        }
        StaticChannels::new(g_u, g_d, h_u, h_d)
    }

    pub fn n_s(&self) -> usize {
        self.g_u.matrix.rows()
    }

    pub fn m(&self) -> usize {
        self.g_u.matrix.cols()
    }

    pub fn k(&self) -> usize {
        self.h_u.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StaticBeamState {
    pub w: Vec<CVec>,
    pub u: Vec<CVec>,
    pub phase: CVec,
    pub alpha_u: f64,
    pub alpha_d: f64,
    /// User transmit powers (mW).
    pub p: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuxiliaryDuals {
    pub mu_bar: Vec<f64>,
    pub mu_tilde: Vec<f64>,
    pub eta_bar: Vec<C64>,
    pub eta_tilde: Vec<C64>,
}

/// Per-user SINRs and rates (with the `1/K` pre-log) of a static design.
#[derive(Debug, Clone, PartialEq)]
pub struct StaticRates {
    pub ul_sinr: Vec<f64>,
    pub dl_sinr: Vec<f64>,
    pub ul: Vec<f64>,
    pub dl: Vec<f64>,
    pub wsr: f64,
}

impl StaticRates {
    pub fn ul_sum(&self) -> f64 {
        self.ul.iter().sum()
    }

    pub fn dl_sum(&self) -> f64 {
        self.dl.iter().sum()
    }
}

fn phase_power(phase: &CVec) -> f64 {
    phase.norm_sqr()
}

/// `Σ_n |φ_n|² |x_n|²`, i.e. `‖Φx‖²` without assuming unit modulus.
fn weighted_norm_sqr(phase: &CVec, x: &CVec) -> f64 {
    phase.iter().zip(x.iter()).map(|(f, z)| f.norm_sqr() * z.norm_sqr()).sum()
}

/// `a_k = conj(G_U u_k) ⊙ h_U,k`, so that `uᴴG_UᴴΦh = Σ φ_n a_n`.
fn uplink_cascade(ch: &StaticChannels, u: &CVec, k: usize) -> (CVec, CVec) {
    let gu = ch.g_u.matrix.mul_vec(u);
    let a = gu.conj().hadamard(&ch.h_u[k]);
    (gu, a)
}

/// `c_k = conj(h_D,k) ⊙ (G_D w_k)`, so that `h_D,kᴴΦG_D w_k = Σ φ_n c_n`.
fn downlink_cascade(ch: &StaticChannels, w: &CVec, k: usize) -> CVec {
    ch.h_d[k].conj().hadamard(&ch.g_d.matrix.mul_vec(w))
}

fn phase_sum(phase: &CVec, x: &CVec) -> C64 {
    phase.iter().zip(x.iter()).map(|(f, z)| f * z).sum()
}

/// Received UL amplitude `√p_k α_U uᴴG_UᴴΦh` and its noise-plus-interference power.
fn uplink_terms(state: &StaticBeamState, ch: &StaticChannels, params: &SystemParams, k: usize) -> (C64, f64) {
    let (gu, a) = uplink_cascade(ch, &state.u[k], k);
    let s = phase_sum(&state.phase, &a) * (state.p[k].sqrt() * state.alpha_u);
    let noise = state.alpha_u * state.alpha_u * params.sigma_f_mw * weighted_norm_sqr(&state.phase, &gu)
        + params.sigma_0_mw * state.u[k].norm_sqr();
    (s, noise)
}

/// Received DL amplitude `α_D h_D,kᴴΦG_D w_k` and its noise power.
fn downlink_terms(state: &StaticBeamState, ch: &StaticChannels, params: &SystemParams, k: usize) -> (C64, f64) {
    let c = downlink_cascade(ch, &state.w[k], k);
    let s = phase_sum(&state.phase, &c) * state.alpha_d;
    let noise = state.alpha_d * state.alpha_d * params.sigma_f_mw * weighted_norm_sqr(&state.phase, &ch.h_d[k])
        + params.sigma_0_mw;
    (s, noise)
}

pub fn rates_static(state: &StaticBeamState, ch: &StaticChannels, params: &SystemParams) -> StaticRates {
    let k_users = ch.k();
    let kf = k_users as f64;
    let eps = params.epsilon;
    let mut out = StaticRates {
        ul_sinr: Vec::with_capacity(k_users),
        dl_sinr: Vec::with_capacity(k_users),
        ul: Vec::with_capacity(k_users),
        dl: Vec::with_capacity(k_users),
        wsr: 0.0,
    };
    for k in 0..k_users {
        let (su, nu) = uplink_terms(state, ch, params, k);
        let (sd, nd) = downlink_terms(state, ch, params, k);
        let (gu, gd) = (su.norm_sqr() / nu, sd.norm_sqr() / nd);
        let (ru, rd) = (log2_1p(gu) / kf, log2_1p(gd) / kf);
        out.wsr += (1.0 - eps) * ru + eps * rd;
        out.ul_sinr.push(gu);
        out.dl_sinr.push(gd);
        out.ul.push(ru);
        out.dl.push(rd);
    }
    out
}

/// MRC on the effective UL channel `G_UᴴΦh_U,k`, normalized.
pub fn mrc_receive_update(ch: &StaticChannels, phase: &CVec) -> Result<Vec<CVec>> {
    (0..ch.k())
        .map(|k| {
            let eff = ch.g_u.matrix.adjoint_mul_vec(&phase.hadamard(&ch.h_u[k]));
            eff.normalized()
                .ok_or_else(|| Error::DegenerateChannel(format!("zero effective uplink channel for user {k}")))
        })
        .collect()
}

/// `q_k = G_DᴴΦᴴh_D,k`, the direction maximizing `|h_D,kᴴΦG_D w|²`.
fn transmit_direction(ch: &StaticChannels, phase: &CVec, k: usize) -> CVec {
    ch.g_d.matrix.adjoint_mul_vec(&phase.conj().hadamard(&ch.h_d[k]))
}

/// Maximizes `|qᴴw|²` under `‖w‖² ≤ P_B` and `wᴴQ̃w ≤ P_F − α_D²σ_F²‖Φ‖_F²`.
///
/// The objective is rank one, so the optimum is `w = √p q/‖q‖` with the largest power
/// both constraints allow.
pub fn transmit_update(
    ch: &StaticChannels,
    phase: &CVec,
    alpha_d: f64,
    params: &SystemParams,
    k: usize,
) -> Result<CVec> {
    let headroom = params.p_f_mw - alpha_d * alpha_d * params.sigma_f_mw * phase_power(phase);
    if !(headroom > 0.0) {
        return Err(Error::Infeasible(format!("no amplification headroom left (α_D = {alpha_d:e}); α_D must shrink")));
    }
    let q = transmit_direction(ch, phase, k);
    let dir = q
        .normalized()
        .ok_or_else(|| Error::DegenerateChannel(format!("zero downlink transmit direction for user {k}")))?;
    let load = alpha_d * alpha_d * weighted_norm_sqr(phase, &ch.g_d.matrix.mul_vec(&dir));
    let power = if load > 0.0 { params.p_b_mw.min(headroom / load) } else { params.p_b_mw };
    Ok(dir.scale_real(power.sqrt()))
}

/// Largest `α_U` with `α_U²(p_k‖Φh_U,k‖² + σ_F²‖Φ‖_F²) ≤ P_F` for every user.
pub fn alpha_uplink_for_powers(ch: &StaticChannels, phase: &CVec, powers: &[f64], params: &SystemParams) -> f64 {
    let floor = params.sigma_f_mw * phase_power(phase);
    let worst = (0..ch.k()).map(|k| powers[k] * weighted_norm_sqr(phase, &ch.h_u[k])).fold(0.0, f64::max);
    (params.p_f_mw / (worst + floor)).sqrt()
}

/// Uplink amplification with every user at full power.
pub fn alpha_uplink_update(ch: &StaticChannels, phase: &CVec, params: &SystemParams) -> f64 {
    alpha_uplink_for_powers(ch, phase, &vec![params.p_u_mw; ch.k()], params)
}

/// Largest `α_D` with `α_D²(‖ΦG_D w_k‖² + σ_F²‖Φ‖_F²) ≤ P_F` for every user.
pub fn alpha_downlink_update(ch: &StaticChannels, phase: &CVec, w: &[CVec], params: &SystemParams) -> f64 {
    let floor = params.sigma_f_mw * phase_power(phase);
    let worst = w.iter().map(|wk| weighted_norm_sqr(phase, &ch.g_d.matrix.mul_vec(wk))).fold(0.0, f64::max);
    (params.p_f_mw / (worst + floor)).sqrt()
}

/// μ̄_k and μ̃_k at their optimum: the current UL and DL SINRs.
pub fn duals_mu_update(state: &StaticBeamState, ch: &StaticChannels, params: &SystemParams) -> (Vec<f64>, Vec<f64>) {
    let r = rates_static(state, ch, params);
    (r.ul_sinr, r.dl_sinr)
}

/// η̄_k and η̃_k at their optimum for the given μ.
pub fn duals_eta_update(
    state: &StaticBeamState,
    ch: &StaticChannels,
    params: &SystemParams,
    mu_bar: &[f64],
    mu_tilde: &[f64],
) -> (Vec<C64>, Vec<C64>) {
    let mut eta_bar = Vec::with_capacity(ch.k());
    let mut eta_tilde = Vec::with_capacity(ch.k());
    for k in 0..ch.k() {
        let (su, nu) = uplink_terms(state, ch, params, k);
        let (sd, nd) = downlink_terms(state, ch, params, k);
        eta_bar.push(su * ((1.0 + mu_bar[k]).sqrt() / (su.norm_sqr() + nu)));
        eta_tilde.push(sd * ((1.0 + mu_tilde[k]).sqrt() / (sd.norm_sqr() + nd)));
    }
    (eta_bar, eta_tilde)
}

pub fn optimal_duals(state: &StaticBeamState, ch: &StaticChannels, params: &SystemParams) -> AuxiliaryDuals {
    let (mu_bar, mu_tilde) = duals_mu_update(state, ch, params);
    let (eta_bar, eta_tilde) = duals_eta_update(state, ch, params, &mu_bar, &mu_tilde);
    AuxiliaryDuals { mu_bar, mu_tilde, eta_bar, eta_tilde }
}

/// Lagrangian-dual surrogate `f₁`: equals the WSR when μ are the SINRs, lower otherwise.
pub fn ldt_objective(
    state: &StaticBeamState,
    ch: &StaticChannels,
    params: &SystemParams,
    mu_bar: &[f64],
    mu_tilde: &[f64],
) -> f64 {
    let eps = params.epsilon;
    let mut total = 0.0;
    for k in 0..ch.k() {
        let (su, nu) = uplink_terms(state, ch, params, k);
        let (sd, nd) = downlink_terms(state, ch, params, k);
        let (mb, mt) = (mu_bar[k], mu_tilde[k]);
        let ul = mb.ln_1p() - mb + (1.0 + mb) * su.norm_sqr() / (su.norm_sqr() + nu);
        let dl = mt.ln_1p() - mt + (1.0 + mt) * sd.norm_sqr() / (sd.norm_sqr() + nd);
        total += (1.0 - eps) * ul + eps * dl;
    }
    total / (ch.k() as f64 * LN_2)
}

/// Quadratic-transform surrogate `f₂`: equals `f₁` when η are optimal, lower otherwise.
pub fn qt_objective(
    state: &StaticBeamState,
    ch: &StaticChannels,
    params: &SystemParams,
    duals: &AuxiliaryDuals,
) -> f64 {
    let eps = params.epsilon;
    let mut total = 0.0;
    for k in 0..ch.k() {
        let (su, nu) = uplink_terms(state, ch, params, k);
        let (sd, nd) = downlink_terms(state, ch, params, k);
        let (mb, mt) = (duals.mu_bar[k], duals.mu_tilde[k]);
        let (eb, et) = (duals.eta_bar[k], duals.eta_tilde[k]);
        let ul = mb.ln_1p() - mb + 2.0 * (1.0 + mb).sqrt() * (eb.conj() * su).re - eb.norm_sqr() * (su.norm_sqr() + nu);
        let dl = mt.ln_1p() - mt + 2.0 * (1.0 + mt).sqrt() * (et.conj() * sd).re - et.norm_sqr() * (sd.norm_sqr() + nd);
        total += (1.0 - eps) * ul + eps * dl;
    }
    total / (ch.k() as f64 * LN_2)
}

/// `A` and `b` of the phase subproblem `max −vᴴAv + 2Re{vᴴb}` at fixed duals and blocks.
///
/// `f₂ = (objective(v) + phase_constant) / (K ln 2)` with `v = conj(phase)`.
pub fn assemble_quadratic_form(
    state: &StaticBeamState,
    ch: &StaticChannels,
    duals: &AuxiliaryDuals,
    params: &SystemParams,
) -> Result<QuadraticForm> {
    let n = ch.n_s();
    let eps = params.epsilon;
    let (sf, au, ad) = (params.sigma_f_mw, state.alpha_u, state.alpha_d);
    let mut a = CMat::zeros(n, n);
    let mut b = CVec::zeros(n);
    for k in 0..ch.k() {
        let (gu, ak) = uplink_cascade(ch, &state.u[k], k);
        let ck = downlink_cascade(ch, &state.w[k], k);
        let (eb, et) = (duals.eta_bar[k], duals.eta_tilde[k]);
        let pk = state.p[k];

        let ul_w = (1.0 - eps) * eb.norm_sqr() * au * au;
        let dl_w = eps * et.norm_sqr() * ad * ad;
        a.add_outer(ul_w * pk, &ak, &ak);
        a.add_outer(dl_w, &ck, &ck);
        for i in 0..n {
            a[(i, i)] += C64::new(ul_w * sf * gu[i].norm_sqr() + dl_w * sf * ch.h_d[k][i].norm_sqr(), 0.0);
        }

        let ul_b = eb.conj() * ((1.0 - eps) * (1.0 + duals.mu_bar[k]).sqrt() * pk.sqrt() * au);
        let dl_b = et.conj() * (eps * (1.0 + duals.mu_tilde[k]).sqrt() * ad);
        b = b.add(&ak.scale(ul_b)).add(&ck.scale(dl_b));
    }
    QuadraticForm::new(a.hermitian_part(), b)
}

/// The `v`-independent part of `K ln 2 · f₂`.
pub fn phase_constant(
    state: &StaticBeamState,
    ch: &StaticChannels,
    duals: &AuxiliaryDuals,
    params: &SystemParams,
) -> f64 {
    let eps = params.epsilon;
    let s0 = params.sigma_0_mw;
    (0..ch.k())
        .map(|k| {
            let (mb, mt) = (duals.mu_bar[k], duals.mu_tilde[k]);
            let ul = mb.ln_1p() - mb - duals.eta_bar[k].norm_sqr() * s0 * state.u[k].norm_sqr();
            let dl = mt.ln_1p() - mt - duals.eta_tilde[k].norm_sqr() * s0;
            (1.0 - eps) * ul + eps * dl
        })
        .sum()
}

/// Rank-one factor `√λ v` of a (numerically) rank-one PSD matrix.
pub fn rank_one_recover(w: &CMat) -> Result<CVec> {
    let (lambda, v) = hermitian_principal_eig(w, 1e-12)?;
    Ok(v.scale_real(lambda.max(0.0).sqrt()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct AoOptions {
    /// Outer loop stops when an iteration gains less than this (bps/Hz).
    pub tol: f64,
    /// Inner loop stops when a phase update gains less than this (bps/Hz).
    pub inner_tol: f64,
    pub max_outer: usize,
    pub max_inner: usize,
    pub method: QcqpMethod,
    pub seed: u64,
    /// Fixed user powers; `None` puts every user at `P_U`.
    pub user_powers: Option<Vec<f64>>,
    pub sdr: SdrOptions,
    pub ascent_tol: f64,
    pub ascent_max_sweeps: usize,
}

impl Default for AoOptions {
    fn default() -> Self {
        AoOptions {
            tol: 1e-4,
            inner_tol: 1e-6,
            max_outer: 50,
            max_inner: 1000,
            method: QcqpMethod::Sdr,
            seed: 0,
            user_powers: None,
            sdr: SdrOptions::default(),
            ascent_tol: 1e-12,
            ascent_max_sweeps: 500,
        }
    }
}

/// The true objective and both surrogates at optimal duals, before one phase update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformCheck {
    pub wsr: f64,
    pub f1: f64,
    pub f2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InnerOutcome {
    pub phase: CVec,
    /// WSR at the start and after every accepted phase update.
    pub wsr_trace: Vec<f64>,
    pub checks: Vec<TransformCheck>,
    pub iterations: usize,
    pub converged: bool,
    /// Inner iterations whose relaxation did not converge and used only the ascent candidate.
    pub sdr_fallbacks: usize,
}

fn wsr_with_phase(state: &StaticBeamState, ch: &StaticChannels, params: &SystemParams, phase: CVec) -> (f64, CVec) {
    let trial = StaticBeamState { phase, ..state.clone() };
    (rates_static(&trial, ch, params).wsr, trial.phase)
}

/// Phase update by alternating the duals and the unit-modulus QCQP. A candidate is kept only
/// if the true WSR does not drop. With SDR, the coordinate-ascent refinement of the current
/// phase is a second candidate.
pub fn phase_inner_loop(
    state: &StaticBeamState,
    ch: &StaticChannels,
    params: &SystemParams,
    opts: &AoOptions,
    rng: &mut RngStream,
) -> Result<InnerOutcome> {
    let mut cur = state.clone();
    let mut wsr = rates_static(&cur, ch, params).wsr;
    let mut out = InnerOutcome {
        phase: cur.phase.clone(),
        wsr_trace: vec![wsr],
        checks: Vec::new(),
        iterations: 0,
        converged: false,
        sdr_fallbacks: 0,
    };
    for it in 1..=opts.max_inner {
        out.iterations = it;
        let duals = optimal_duals(&cur, ch, params);
        let f1 = ldt_objective(&cur, ch, params, &duals.mu_bar, &duals.mu_tilde);
        let f2 = qt_objective(&cur, ch, params, &duals);
        out.checks.push(TransformCheck { wsr, f1, f2 });

        let qf = assemble_quadratic_form(&cur, ch, &duals, params)?;
        let mag = qf.magnitude();
        if mag == 0.0 {
            out.converged = true;
            break;
        }
        let qn = qf.scaled(1.0 / mag);
        let v0 = cur.phase.conj();
        // A capped ascent run still improves the surrogate; the outer loops pick up from there.
        let ascent = || coordinate_ascent_capped(&qn, &v0, opts.ascent_tol, opts.ascent_max_sweeps).map(|r| r.0.v);
        let candidates = match opts.method {
            QcqpMethod::CoordinateAscent => vec![ascent()?],
            QcqpMethod::Sdr => match solve_sdr(&qn, &opts.sdr, rng) {
                Ok(r) => vec![r.v, ascent()?],
                // An unconverged relaxation gives no trustworthy rounding; keep the ascent step.
                Err(Error::Convergence { .. }) => {
                    out.sdr_fallbacks += 1;
                    vec![ascent()?]
                }
                Err(e) => return Err(e),
            },
        };
        let mut best: Option<(f64, CVec)> = None;
        for v in candidates {
            let (value, phase) = wsr_with_phase(&cur, ch, params, v.conj());
            if best.as_ref().is_none_or(|(b, _)| value > *b) {
                best = Some((value, phase));
            }
        }
        let (value, phase) = best.expect("at least one candidate");
        let gain = value - wsr;
        if gain >= 0.0 {
            cur.phase = phase;
            wsr = value;
            out.wsr_trace.push(wsr);
        }
        if gain < opts.inner_tol {
            out.converged = true;
            break;
        }
    }
    out.phase = cur.phase;
    Ok(out)
}

/// Deterministic warm start: the per-element phase that coherently combines user 1's DL
/// cascade when `ε ≥ 0.5`, otherwise its UL cascade.
pub fn initial_phase(ch: &StaticChannels, params: &SystemParams) -> CVec {
    let n = ch.n_s();
    if params.epsilon >= 0.5 {
        let ar = &ch.g_d.rx_steer;
        CVec::from_fn(n, |i| C64::from_polar(1.0, ch.h_d[0][i].arg() - ar[i].arg()))
    } else {
        let ar = &ch.g_u.rx_steer;
        CVec::from_fn(n, |i| C64::from_polar(1.0, ar[i].arg() - ch.h_u[0][i].arg()))
    }
}

/// MRC receivers, full-power MRT transmitters and the tightest amplification factors for
/// a given phase.
pub fn closed_form_blocks(
    ch: &StaticChannels,
    params: &SystemParams,
    phase: CVec,
    powers: Vec<f64>,
) -> Result<StaticBeamState> {
    let u = mrc_receive_update(ch, &phase)?;
    let w = (0..ch.k())
        .map(|k| {
            transmit_direction(ch, &phase, k)
                .normalized()
                .map(|d| d.scale_real(params.p_b_mw.sqrt()))
                .ok_or_else(|| Error::DegenerateChannel(format!("zero downlink transmit direction for user {k}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let alpha_u = alpha_uplink_for_powers(ch, &phase, &powers, params);
    let alpha_d = alpha_downlink_update(ch, &phase, &w, params);
    Ok(StaticBeamState { w, u, phase, alpha_u, alpha_d, p: powers })
}

/// Largest relative violation of the power, normalization, unit-modulus and amplification
/// constraints (0 when all hold).
pub fn constraint_violation(state: &StaticBeamState, ch: &StaticChannels, params: &SystemParams) -> f64 {
    let mut worst: f64 = 0.0;
    let floor = params.sigma_f_mw * phase_power(&state.phase);
    for k in 0..ch.k() {
        worst = worst.max((state.w[k].norm_sqr() - params.p_b_mw) / params.p_b_mw);
        worst = worst.max((state.u[k].norm_sqr() - 1.0).abs());
        worst = worst.max((state.p[k] - params.p_u_mw) / params.p_u_mw).max(-state.p[k] / params.p_u_mw);
        let ul = state.alpha_u.powi(2) * (state.p[k] * weighted_norm_sqr(&state.phase, &ch.h_u[k]) + floor);
        let gw = ch.g_d.matrix.mul_vec(&state.w[k]);
        let dl = state.alpha_d.powi(2) * (weighted_norm_sqr(&state.phase, &gw) + floor);
        worst = worst.max((ul - params.p_f_mw) / params.p_f_mw).max((dl - params.p_f_mw) / params.p_f_mw);
    }
    worst.max(state.phase.max_modulus_error())
}

#[derive(Debug, Clone, PartialEq)]
pub struct AoOutcome {
    pub state: StaticBeamState,
    pub rates: StaticRates,
    /// WSR after initialization, after every accepted outer iteration and after the final
    /// block refresh.
    pub outer_trace: Vec<f64>,
    pub inner: Vec<InnerOutcome>,
    /// Constraint violation of every accepted state, initialization included.
    pub violations: Vec<f64>,
    pub outer_iterations: usize,
    /// False when the outer loop hit its cap before the gain fell below `tol`.
    pub converged: bool,
}

impl AoOutcome {
    pub fn wsr(&self) -> f64 {
        self.rates.wsr
    }
}

/// Two-layer alternating optimization of the static design.
pub fn run_alternating_optimization(params: &SystemParams, ch: &StaticChannels, opts: &AoOptions) -> Result<AoOutcome> {
    params.validate()?;
    let k_users = ch.k();
    let powers = match &opts.user_powers {
        Some(p) if p.len() != k_users => return Err(invalid("need one power per user")),
        Some(p) if p.iter().any(|x| !(*x >= 0.0) || *x > params.p_u_mw) => {
            return Err(invalid("user powers must lie in [0, P_U]"))
        }
        Some(p) => p.clone(),
        None => vec![params.p_u_mw; k_users],
    };
    let rng = RngStream::new(opts.seed, 0);
    let mut state = closed_form_blocks(ch, params, initial_phase(ch, params), powers)?;
    let mut wsr = rates_static(&state, ch, params).wsr;
    let mut out = AoOutcome {
        rates: rates_static(&state, ch, params),
        violations: vec![constraint_violation(&state, ch, params)],
        state: state.clone(),
        outer_trace: vec![wsr],
        inner: Vec::new(),
        outer_iterations: 0,
        converged: false,
    };
    for it in 1..=opts.max_outer {
        out.outer_iterations = it;
        let mut cand = refresh_blocks(&state, ch, params)?;
        let inner = phase_inner_loop(&cand, ch, params, opts, &mut rng.substream(it as u64))?;
        cand.phase = inner.phase.clone();
        out.inner.push(inner);
        let value = rates_static(&cand, ch, params).wsr;
        if value < wsr {
            // Round-off in the block updates; keep the better state.
            out.converged = true;
            break;
        }
        let gain = value - wsr;
        state = cand;
        wsr = value;
        out.outer_trace.push(wsr);
        out.violations.push(constraint_violation(&state, ch, params));
        if gain < opts.tol {
            out.converged = true;
            break;
        }
    }
    // Leave every closed-form block matched to the final phase.
    let cand = refresh_blocks(&state, ch, params)?;
    let value = rates_static(&cand, ch, params).wsr;
    if value >= wsr {
        state = cand;
        out.outer_trace.push(value);
        out.violations.push(constraint_violation(&state, ch, params));
    }
    out.rates = rates_static(&state, ch, params);
    out.state = state;
    Ok(out)
}

/// One pass of the receive, transmit and amplification updates at the current phase.
fn refresh_blocks(state: &StaticBeamState, ch: &StaticChannels, params: &SystemParams) -> Result<StaticBeamState> {
    let mut s = state.clone();
    s.u = mrc_receive_update(ch, &s.phase)?;
    s.w = (0..ch.k()).map(|k| transmit_update(ch, &s.phase, s.alpha_d, params, k)).collect::<Result<Vec<_>>>()?;
    s.alpha_u = alpha_uplink_for_powers(ch, &s.phase, &s.p, params);
    s.alpha_d = alpha_downlink_update(ch, &s.phase, &s.w, params);
    Ok(s)
}

/// Which link a single-link design optimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixedLink {
    Uplink,
    Downlink,
}

/// Optimizes the phase, the chosen link's BS beamformers and amplification for that link
/// alone; the other link's blocks come from the final refresh at the optimized phase.
/// Rates are reported under `params.epsilon`.
pub fn fixed_link_design(
    params: &SystemParams,
    ch: &StaticChannels,
    link: FixedLink,
    opts: &AoOptions,
) -> Result<AoOutcome> {
    let eps = match link {
        FixedLink::Uplink => 0.0,
        FixedLink::Downlink => 1.0,
    };
    let mut out = run_alternating_optimization(&params.clone().with_epsilon(eps), ch, opts)?;
    out.rates = rates_static(&out.state, ch, params);
    Ok(out)
}

/// Per-user, per-direction optimal beamforming with `N_s` elements on each AIRS: an upper
/// bound on every static design's UL and DL rates.
pub fn individual_design_rates(params: &SystemParams) -> Result<UserRates> {
    params.validate()?;
    let gains = UserLinkGains::from_positions(params, &params.geometry.users)?;
    let n_s = params.n_total / 2;
    Ok(rates_user_adaptive(params, &gains, n_s, n_s))
}
