//! Scenario sweeps: one job per (scheme, series, grid point, drop), run data-parallel and
//! merged in job order.

use std::collections::HashMap;
use std::time::Instant;

use rayon::prelude::*;

use airs_core::multiuser::{
    allocate_elements_search, rates_pirs_adaptive, rates_single_airs_adaptive, rates_user_adaptive, UserLinkGains,
};
use airs_core::numerics::RngStream;
use airs_core::qcqp::SdrOptions;
use airs_core::single_user::{
    allocate_elements_optimal, distributed_breakdown, near_optimal_allocation, pirs_breakdown, single_airs_breakdown,
    Side, SystemParams,
};
use airs_core::static_ao::{
    fixed_link_design, individual_design_rates, run_alternating_optimization, AoOptions, FixedLink, StaticChannels,
};

use crate::config::{Command, Placement, ScenarioConfig, Scheme, SweepVar};
use crate::error::{ConfigError, Error, Result};
use crate::placement::place_users;
use crate::record::{Metrics, ResultRecord};

type Outcome = std::result::Result<Metrics, String>;
/// Raw UL/DL sums and outer iterations of a fixed-link design.
type FixedSums = std::result::Result<(f64, f64, usize), String>;

#[derive(Debug, Clone, Copy)]
struct Job {
    scheme_index: usize,
    scheme: Scheme,
    series: usize,
    grid_index: usize,
    n_total: usize,
    epsilon: f64,
    sweep_value: f64,
    drop: usize,
}

impl Job {
    /// Seeds user placement and the optimizer. Rate-region points share their drop's
    /// stream so every weight sees the same users.
    fn stream_id(&self, region: bool) -> u64 {
        if region {
            self.drop as u64
        } else {
            ((self.grid_index as u64) << 16) | self.drop as u64
        }
    }
}

fn config_error(msg: String) -> Error {
    Error::Config(ConfigError { line: 0, msg })
}

fn jobs(cfg: &ScenarioConfig, region: bool) -> Vec<Job> {
    let series = match cfg.sweep_var {
        SweepVar::NTotal if !region => cfg.series_epsilons(),
        _ => vec![cfg.epsilon],
    };
    let mut out = Vec::new();
    for (scheme_index, &scheme) in cfg.schemes.iter().enumerate() {
        for (s, &eps) in series.iter().enumerate() {
            for (grid_index, &value) in cfg.grid.iter().enumerate() {
                let (n_total, epsilon) = match cfg.sweep_var {
                    SweepVar::NTotal => (value as usize, eps),
                    SweepVar::Epsilon => (cfg.n_total, value),
                };
                for drop in 0..cfg.drops {
                    out.push(Job {
                        scheme_index,
                        scheme,
                        series: s,
                        grid_index,
                        n_total,
                        epsilon,
                        sweep_value: value,
                        drop,
                    });
                }
            }
        }
    }
    out
}

/// Scenario of one job with its users placed.
fn job_params(cfg: &ScenarioConfig, job: &Job, region: bool) -> SystemParams {
    let mut p = cfg.params_at(job.n_total, job.epsilon);
    if cfg.placement == Placement::Disk {
        let mut rng = RngStream::new(cfg.seed, job.stream_id(region));
        let users = place_users(&mut rng, &p, cfg.user_radius_m);
        p.geometry.users = users;
    }
    p
}

fn ao_options(cfg: &ScenarioConfig, stream_id: u64) -> AoOptions {
    AoOptions {
        tol: cfg.ao_tol,
        max_outer: cfg.ao_max_outer,
        method: cfg.qcqp_method,
        seed: RngStream::new(cfg.seed, stream_id).substream(1).next_u64(),
        sdr: SdrOptions { num_randomizations: cfg.sdr_randomizations, ..SdrOptions::default() },
        ..AoOptions::default()
    }
}

fn err(e: airs_core::Error) -> String {
    e.to_string()
}

/// Distributed split `(n_u, n_d)`: closed form for the single centered user, per-user
/// gains otherwise.
fn distributed(p: &SystemParams, closed: bool, n_u: usize, n_d: usize) -> Outcome {
    if closed {
        let b = distributed_breakdown(p, n_u as f64, n_d as f64);
        return Ok(Metrics::new(p.epsilon, b.ul_rate, b.dl_rate, n_u, n_d, 0));
    }
    let gains = UserLinkGains::from_positions(p, &p.geometry.users).map_err(err)?;
    let r = rates_user_adaptive(p, &gains, n_u, n_d);
    Ok(Metrics::new(p.epsilon, r.ul_sum(), r.dl_sum(), n_u, n_d, 0))
}

fn evaluate(cfg: &ScenarioConfig, job: &Job) -> Outcome {
    let p = job_params(cfg, job, false);
    p.validate().map_err(err)?;
    let n = p.n_total;
    let closed = p.k_users == 1 && cfg.placement == Placement::Center;
    match job.scheme {
        Scheme::DistributedOpt if closed => {
            let a = allocate_elements_optimal(&p);
            distributed(&p, true, a.n_u, a.n_d)
        }
        Scheme::DistributedOpt | Scheme::DistributedEs => {
            let gains = UserLinkGains::from_positions(&p, &p.geometry.users).map_err(err)?;
            let a = allocate_elements_search(&p, &gains).map_err(err)?;
            distributed(&p, false, a.n_u, a.n_d)
        }
        Scheme::DistributedNearOpt => {
            let a = near_optimal_allocation(&p);
            distributed(&p, closed, a.n_u, a.n_d)
        }
        Scheme::DistributedFixed | Scheme::MuAdaptive => distributed(&p, closed, n - n / 2, n / 2),
        Scheme::BsSide | Scheme::UserSide => {
            let side = if job.scheme == Scheme::BsSide { Side::BsSide } else { Side::UserSide };
            if closed {
                let b = single_airs_breakdown(&p, side);
                Ok(Metrics::new(p.epsilon, b.ul_rate, b.dl_rate, n, n, 0))
            } else {
                let r = rates_single_airs_adaptive(&p, &p.geometry.users, side).map_err(err)?;
                Ok(Metrics::new(p.epsilon, r.ul_sum(), r.dl_sum(), n, n, 0))
            }
        }
        Scheme::Pirs => {
            if closed {
                let b = pirs_breakdown(&p).map_err(err)?;
                Ok(Metrics::new(p.epsilon, b.ul_rate, b.dl_rate, n, n, 0))
            } else {
                let r = rates_pirs_adaptive(&p, &p.geometry.users).map_err(err)?;
                Ok(Metrics::new(p.epsilon, r.ul_sum(), r.dl_sum(), n, n, 0))
            }
        }
        Scheme::MuStatic => {
            let ch = StaticChannels::from_geometry(&p).map_err(err)?;
            let out = run_alternating_optimization(&p, &ch, &ao_options(cfg, job.stream_id(false))).map_err(err)?;
            Ok(Metrics::new(p.epsilon, out.rates.ul_sum(), out.rates.dl_sum(), n / 2, n / 2, out.outer_iterations))
        }
        s => Err(format!("scheme {s} only runs under rate-region")),
    }
}

/// Raw UL/DL sums of a fixed-link design; they do not depend on the reporting weight.
fn fixed_link_sums(cfg: &ScenarioConfig, job: &Job, link: FixedLink) -> FixedSums {
    let p = job_params(cfg, job, true);
    let ch = StaticChannels::from_geometry(&p).map_err(err)?;
    let out = fixed_link_design(&p, &ch, link, &ao_options(cfg, job.stream_id(true))).map_err(err)?;
    Ok((out.rates.ul_sum(), out.rates.dl_sum(), out.outer_iterations))
}

fn evaluate_region(cfg: &ScenarioConfig, job: &Job) -> Outcome {
    let p = job_params(cfg, job, true);
    p.validate().map_err(err)?;
    let half = p.n_total / 2;
    match job.scheme {
        Scheme::RegionJoint => {
            let ch = StaticChannels::from_geometry(&p).map_err(err)?;
            let out = run_alternating_optimization(&p, &ch, &ao_options(cfg, job.stream_id(true))).map_err(err)?;
            Ok(Metrics::new(p.epsilon, out.rates.ul_sum(), out.rates.dl_sum(), half, half, out.outer_iterations))
        }
        Scheme::RegionIndividual => {
            let r = individual_design_rates(&p).map_err(err)?;
            Ok(Metrics::new(p.epsilon, r.ul_sum(), r.dl_sum(), half, half, 0))
        }
        s => Err(format!("scheme {s} is evaluated once per drop")),
    }
}

fn fixed_link(s: Scheme) -> Option<FixedLink> {
    match s {
        Scheme::RegionFixedUl => Some(FixedLink::Uplink),
        Scheme::RegionFixedDl => Some(FixedLink::Downlink),
        _ => None,
    }
}

fn check_schemes(cmd: Command, cfg: &ScenarioConfig) -> Result<()> {
    let region = cmd == Command::RateRegion;
    if let Some(s) = cfg.schemes.iter().find(|s| s.is_region() != region) {
        let msg = if region {
            "rate-region accepts only rate-region-* schemes"
        } else {
            "rate-region-* schemes need the rate-region command"
        };
        return Err(config_error(format!("{msg} (got {s})")));
    }
    if region && cfg.sweep_var != SweepVar::Epsilon {
        return Err(config_error("rate-region sweeps epsilon".into()));
    }
    Ok(())
}

fn pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| config_error(format!("thread pool: {e}")))
}

fn record(cfg: &ScenarioConfig, job: &Job, outcome: Outcome, runtime_ms: f64) -> ResultRecord {
    ResultRecord {
        scheme: job.scheme.name().to_string(),
        series: job.series,
        grid_index: job.grid_index,
        sweep_value: job.sweep_value,
        epsilon: job.epsilon,
        n_total: job.n_total,
        seed: cfg.seed,
        drop: job.drop,
        outcome,
        runtime_ms,
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed().as_secs_f64() * 1e3)
}

/// Runs every job of a sweep command on `threads` workers. Per-row failures land in the
/// records; only config problems are errors.
pub fn run_sweep(cmd: Command, cfg: &ScenarioConfig, threads: usize) -> Result<Vec<ResultRecord>> {
    if cmd == Command::Selftest {
        return Err(config_error("selftest is not a sweep".into()));
    }
    cfg.validate()?;
    check_schemes(cmd, cfg)?;
    let region = cmd == Command::RateRegion;
    let all = jobs(cfg, region);
    let pool = pool(threads)?;
    let mut records = pool.install(|| {
        // Fixed-link designs are weight-independent: one optimization per drop.
        let mut shared: HashMap<(usize, usize), (FixedSums, f64)> = HashMap::new();
        if region {
            let keys: Vec<(usize, Job)> = all
                .iter()
                .filter(|j| fixed_link(j.scheme).is_some() && j.grid_index == 0)
                .map(|j| (j.scheme_index, *j))
                .collect();
            let done: Vec<_> = keys
                .par_iter()
                .map(|(si, j)| {
                    ((*si, j.drop), timed(|| fixed_link_sums(cfg, j, fixed_link(j.scheme).expect("fixed link"))))
                })
                .collect();
            shared.extend(done);
        }
        all.par_iter()
            .map(|job| {
                if let Some((res, ms)) =
                    shared.get(&(job.scheme_index, job.drop)).filter(|_| fixed_link(job.scheme).is_some())
                {
                    let half = job.n_total / 2;
                    let outcome = res.clone().map(|(ul, dl, it)| Metrics::new(job.epsilon, ul, dl, half, half, it));
                    return record(cfg, job, outcome, *ms);
                }
                let (outcome, ms) = timed(|| if region { evaluate_region(cfg, job) } else { evaluate(cfg, job) });
                record(cfg, job, outcome, ms)
            })
            .collect::<Vec<_>>()
    });
    let order: HashMap<&str, usize> = cfg.schemes.iter().enumerate().map(|(i, s)| (s.name(), i)).collect();
    records.sort_by_key(|r| (order[r.scheme.as_str()], r.series, r.grid_index, r.drop));
    Ok(records)
}
