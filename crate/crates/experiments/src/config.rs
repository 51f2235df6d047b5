//! Scenario configuration: flat `key = value` text with units in the key names.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use airs_core::channel::{Geometry, Point3};
use airs_core::numerics::{db_to_linear, dbm_to_mw};
use airs_core::qcqp::QcqpMethod;
use airs_core::single_user::SystemParams;

use crate::error::{ConfigError, Error, Result};

/// Environment variable that, when set, replaces the configured output directory.
pub const OUT_DIR_ENV: &str = "AIRS_OUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Command {
    SingleNSweep,
    SingleEpsSweep,
    AllocCurve,
    MuAdaptive,
    MuStatic,
    RateRegion,
    Selftest,
}

impl Command {
    pub const SWEEPS: [Command; 6] = [
        Command::SingleNSweep,
        Command::SingleEpsSweep,
        Command::AllocCurve,
        Command::MuAdaptive,
        Command::MuStatic,
        Command::RateRegion,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::SingleNSweep => "single-n-sweep",
            Command::SingleEpsSweep => "single-eps-sweep",
            Command::AllocCurve => "alloc-curve",
            Command::MuAdaptive => "mu-adaptive",
            Command::MuStatic => "mu-static",
            Command::RateRegion => "rate-region",
            Command::Selftest => "selftest",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// Closed-form allocation for one user, element search otherwise.
    DistributedOpt,
    /// Equal split between the two AIRSs.
    DistributedFixed,
    /// Exhaustive search over the DL share.
    DistributedEs,
    /// `round(εN)` elements to the DL.
    DistributedNearOpt,
    BsSide,
    UserSide,
    Pirs,
    /// User-adaptive beamforming on distributed AIRSs with an equal split.
    MuAdaptive,
    /// Alternating optimization of one static configuration shared by all users.
    MuStatic,
    RegionJoint,
    RegionIndividual,
    RegionFixedUl,
    RegionFixedDl,
}

impl Scheme {
    pub const ALL: [Scheme; 13] = [
        Scheme::DistributedOpt,
        Scheme::DistributedFixed,
        Scheme::DistributedEs,
        Scheme::DistributedNearOpt,
        Scheme::BsSide,
        Scheme::UserSide,
        Scheme::Pirs,
        Scheme::MuAdaptive,
        Scheme::MuStatic,
        Scheme::RegionJoint,
        Scheme::RegionIndividual,
        Scheme::RegionFixedUl,
        Scheme::RegionFixedDl,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::DistributedOpt => "distributed-opt",
            Scheme::DistributedFixed => "distributed-fixed",
            Scheme::DistributedEs => "distributed-es",
            Scheme::DistributedNearOpt => "distributed-near-opt",
            Scheme::BsSide => "bs-side",
            Scheme::UserSide => "user-side",
            Scheme::Pirs => "pirs",
            Scheme::MuAdaptive => "mu-adaptive",
            Scheme::MuStatic => "mu-static",
            Scheme::RegionJoint => "rate-region-joint",
            Scheme::RegionIndividual => "rate-region-individual",
            Scheme::RegionFixedUl => "rate-region-fixed-ul",
            Scheme::RegionFixedDl => "rate-region-fixed-dl",
        }
    }

    pub fn is_region(self) -> bool {
        matches!(self, Scheme::RegionJoint | Scheme::RegionIndividual | Scheme::RegionFixedUl | Scheme::RegionFixedDl)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Scheme::ALL.iter().copied().find(|x| x.name() == s).ok_or_else(|| format!("unknown scheme '{s}'"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVar {
    NTotal,
    Epsilon,
}

impl SweepVar {
    pub fn name(self) -> &'static str {
        match self {
            SweepVar::NTotal => "n_total",
            SweepVar::Epsilon => "epsilon",
        }
    }
}

impl FromStr for SweepVar {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "n_total" => Ok(SweepVar::NTotal),
            "epsilon" => Ok(SweepVar::Epsilon),
            other => Err(format!("unknown sweep variable '{other}' (n_total or epsilon)")),
        }
    }
}

/// Where users stand in each drop.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Placement {
    /// Every user at the center of the user area.
    Center,
    /// Uniform over the disk of `user_radius_m` around the center.
    Disk,
}

impl FromStr for Placement {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "center" => Ok(Placement::Center),
            "disk" => Ok(Placement::Disk),
            other => Err(format!("unknown placement '{other}' (center or disk)")),
        }
    }
}

impl fmt::Display for Placement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Placement::Center => "center",
            Placement::Disk => "disk",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub p_u_dbm: f64,
    pub p_b_dbm: f64,
    pub p_f_dbm: f64,
    pub sigma_f_dbm: f64,
    pub sigma_0_dbm: f64,
    pub beta_db: f64,
    pub m: usize,
    pub n_total: usize,
    pub epsilon: f64,
    pub k_users: usize,
    pub d_m: f64,
    pub h_m: f64,
    /// `None` keeps the passive IRS above the BS at height H.
    pub pirs_m: Option<[f64; 3]>,
    pub user_radius_m: f64,
    pub placement: Placement,
    pub sweep_var: SweepVar,
    pub grid: Vec<f64>,
    /// Extra DL weights for `alloc-curve`; empty means `epsilon` alone.
    pub alloc_epsilons: Vec<f64>,
    pub schemes: Vec<Scheme>,
    pub seed: u64,
    pub drops: usize,
    pub out_dir: PathBuf,
    pub qcqp_method: QcqpMethod,
    pub ao_tol: f64,
    pub ao_max_outer: usize,
    pub sdr_randomizations: usize,
}

/// Inclusive range; whole-step spans are interpolated so `0:0.1:1` yields exactly 0.3.
fn range(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let span = (hi - lo) / step;
    let n = (span + 1e-9).floor() as usize;
    if (span - span.round()).abs() < 1e-9 {
        (0..=n).map(|i| lo + (hi - lo) * i as f64 / n.max(1) as f64).collect()
    } else {
        (0..=n).map(|i| lo + step * i as f64).collect()
    }
}

impl ScenarioConfig {
    /// Evaluation-section constants with a 10-drop default for random placements.
    pub fn base() -> Self {
        ScenarioConfig {
            p_u_dbm: 15.0,
            p_b_dbm: 20.0,
            p_f_dbm: -5.0,
            sigma_f_dbm: -80.0,
            sigma_0_dbm: -80.0,
            beta_db: -30.0,
            m: 4,
            n_total: 100,
            epsilon: 0.4,
            k_users: 1,
            d_m: 200.0,
            h_m: 10.0,
            pirs_m: None,
            user_radius_m: 5.0,
            placement: Placement::Center,
            sweep_var: SweepVar::NTotal,
            grid: range(20.0, 200.0, 20.0),
            alloc_epsilons: Vec::new(),
            schemes: vec![Scheme::DistributedOpt, Scheme::BsSide, Scheme::UserSide, Scheme::Pirs],
            seed: 1,
            drops: 1,
            out_dir: PathBuf::from("results"),
            qcqp_method: QcqpMethod::Sdr,
            ao_tol: 1e-4,
            ao_max_outer: 50,
            sdr_randomizations: 200,
        }
    }

    pub fn defaults_for(cmd: Command) -> Self {
        let mut c = ScenarioConfig::base();
        match cmd {
            Command::SingleNSweep | Command::Selftest => {}
            Command::SingleEpsSweep => {
                c.sweep_var = SweepVar::Epsilon;
                c.grid = range(0.0, 1.0, 0.1);
            }
            Command::AllocCurve => {
                c.alloc_epsilons = vec![0.4, 0.5, 0.6];
                c.schemes = vec![Scheme::DistributedEs, Scheme::DistributedOpt, Scheme::DistributedNearOpt];
            }
            Command::MuAdaptive => {
                c.k_users = 4;
                c.placement = Placement::Disk;
                c.drops = 10;
                c.schemes = vec![
                    Scheme::DistributedOpt,
                    Scheme::DistributedFixed,
                    Scheme::BsSide,
                    Scheme::UserSide,
                    Scheme::Pirs,
                ];
            }
            Command::MuStatic => {
                c.k_users = 4;
                c.placement = Placement::Disk;
                c.drops = 10;
                c.grid = vec![16.0, 32.0, 48.0, 64.0];
                c.qcqp_method = QcqpMethod::CoordinateAscent;
                c.schemes = vec![Scheme::MuAdaptive, Scheme::MuStatic, Scheme::BsSide, Scheme::UserSide];
            }
            Command::RateRegion => {
                c.k_users = 2;
                c.n_total = 32;
                c.placement = Placement::Disk;
                c.sweep_var = SweepVar::Epsilon;
                c.grid = range(0.0, 1.0, 0.1);
                c.schemes =
                    vec![Scheme::RegionJoint, Scheme::RegionIndividual, Scheme::RegionFixedUl, Scheme::RegionFixedDl];
            }
        }
        c
    }

    /// Overlays `text` on the command defaults and validates the result.
    pub fn parse(cmd: Command, text: &str) -> Result<Self> {
        let mut c = ScenarioConfig::defaults_for(cmd);
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::Config(ConfigError { line: i + 1, msg });
            let (key, value) =
                line.split_once('=').ok_or_else(|| err(format!("expected `key = value`, got '{line}'")))?;
            c.set(key.trim(), value.trim()).map_err(err)?;
        }
        c.validate()?;
        Ok(c)
    }

    fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        match key {
            "p_u_dbm" => self.p_u_dbm = num(value)?,
            "p_b_dbm" => self.p_b_dbm = num(value)?,
            "p_f_dbm" => self.p_f_dbm = num(value)?,
            "sigma_f_dbm" => self.sigma_f_dbm = num(value)?,
            "sigma_0_dbm" => self.sigma_0_dbm = num(value)?,
            "beta_db" => self.beta_db = num(value)?,
            "m" => self.m = num(value)?,
            "n_total" => self.n_total = num(value)?,
            "epsilon" => self.epsilon = num(value)?,
            "k_users" => self.k_users = num(value)?,
            "d_m" => self.d_m = num(value)?,
            "h_m" => self.h_m = num(value)?,
            "pirs_m" => {
                let v = list(value)?;
                if v.len() != 3 {
                    return Err("pirs_m needs three coordinates".into());
                }
                self.pirs_m = Some([v[0], v[1], v[2]]);
            }
            "user_radius_m" => self.user_radius_m = num(value)?,
            "placement" => self.placement = value.parse()?,
            "sweep_var" => self.sweep_var = value.parse()?,
            "grid" => self.grid = list(value)?,
            "alloc_epsilons" => self.alloc_epsilons = list(value)?,
            "schemes" => {
                self.schemes = value.split(',').map(|s| s.trim().parse()).collect::<std::result::Result<_, _>>()?
            }
            "seed" => self.seed = num(value)?,
            "drops" => self.drops = num(value)?,
            "out_dir" => self.out_dir = PathBuf::from(value),
            "qcqp_method" => self.qcqp_method = value.parse().map_err(|e: airs_core::Error| e.to_string())?,
            "ao_tol" => self.ao_tol = num(value)?,
            "ao_max_outer" => self.ao_max_outer = num(value)?,
            "sdr_randomizations" => self.sdr_randomizations = num(value)?,
            other => return Err(format!("unknown key '{other}'")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(ConfigError { line: 0, msg: msg.to_string() }));
        if self.grid.is_empty() {
            return bad("grid is empty");
        }
        if self.grid.windows(2).any(|w| !(w[0] < w[1])) {
            return bad("grid must be strictly increasing");
        }
        if self.alloc_epsilons.windows(2).any(|w| !(w[0] < w[1])) {
            return bad("alloc_epsilons must be strictly increasing");
        }
        if self.alloc_epsilons.iter().any(|e| !(0.0..=1.0).contains(e)) {
            return bad("alloc_epsilons must lie in [0, 1]");
        }
        if self.schemes.is_empty() {
            return bad("schemes is empty");
        }
        if self.schemes.iter().enumerate().any(|(i, s)| self.schemes[..i].contains(s)) {
            return bad("schemes lists a scheme twice");
        }
        match self.sweep_var {
            SweepVar::NTotal if self.grid.iter().any(|n| n.fract() != 0.0 || *n < 2.0) => {
                return bad("n_total grid values must be integers >= 2")
            }
            SweepVar::Epsilon if self.grid.iter().any(|e| !(0.0..=1.0).contains(e)) => {
                return bad("epsilon grid must lie in [0, 1]")
            }
            _ => {}
        }
        if !(self.d_m > 0.0) || !(self.h_m > 0.0) {
            return bad("d_m and h_m must be positive");
        }
        if self.drops == 0 {
            return bad("drops must be at least 1");
        }
        if !(self.user_radius_m >= 0.0) {
            return bad("user_radius_m must be non-negative");
        }
        if !(self.ao_tol > 0.0) || self.ao_max_outer == 0 {
            return bad("ao_tol must be positive and ao_max_outer at least 1");
        }
        // Grid points and series share the stream-id bit fields.
        if self.grid.len() >= 1 << 16 || self.drops >= 1 << 16 {
            return bad("at most 65535 grid points and drops");
        }
        self.params_at(self.n_total, self.epsilon)
            .validate()
            .map_err(|e| Error::Config(ConfigError { line: 0, msg: e.to_string() }))
    }

    /// Weights swept by this run: the configured list or `epsilon` alone.
    pub fn series_epsilons(&self) -> Vec<f64> {
        if self.alloc_epsilons.is_empty() {
            vec![self.epsilon]
        } else {
            self.alloc_epsilons.clone()
        }
    }

    /// Linear-unit scenario with the given element count and DL weight; users at the center.
    /// Panics on non-positive D or H, which `validate` rejects.
    pub fn params_at(&self, n_total: usize, epsilon: f64) -> SystemParams {
        let mut g = Geometry::standard(self.d_m, self.h_m).expect("D and H are checked by validate");
        if let Some([x, y, z]) = self.pirs_m {
            g = g.with_pirs(Point3::new(x, y, z));
        }
        let center = g.user_center();
        let g = g.with_users(vec![center; self.k_users]);
        SystemParams {
            p_u_mw: dbm_to_mw(self.p_u_dbm),
            p_b_mw: dbm_to_mw(self.p_b_dbm),
            p_f_mw: dbm_to_mw(self.p_f_dbm),
            sigma_f_mw: dbm_to_mw(self.sigma_f_dbm),
            sigma_0_mw: dbm_to_mw(self.sigma_0_dbm),
            m: self.m,
            n_total,
            epsilon,
            k_users: self.k_users,
            geometry: g,
            beta: db_to_linear(self.beta_db),
        }
    }

    /// Canonical `key = value` echo; parsing it back yields the same config.
    pub fn echo(&self) -> Vec<(&'static str, String)> {
        let joined = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ");
        let mut out = vec![
            ("p_u_dbm", self.p_u_dbm.to_string()),
            ("p_b_dbm", self.p_b_dbm.to_string()),
            ("p_f_dbm", self.p_f_dbm.to_string()),
            ("sigma_f_dbm", self.sigma_f_dbm.to_string()),
            ("sigma_0_dbm", self.sigma_0_dbm.to_string()),
            ("beta_db", self.beta_db.to_string()),
            ("m", self.m.to_string()),
            ("n_total", self.n_total.to_string()),
            ("epsilon", self.epsilon.to_string()),
            ("k_users", self.k_users.to_string()),
            ("d_m", self.d_m.to_string()),
            ("h_m", self.h_m.to_string()),
        ];
        if let Some(p) = self.pirs_m {
            out.push(("pirs_m", joined(&p)));
        }
        out.extend([
            ("user_radius_m", self.user_radius_m.to_string()),
            ("placement", self.placement.to_string()),
            ("sweep_var", self.sweep_var.name().to_string()),
            ("grid", joined(&self.grid)),
        ]);
        if !self.alloc_epsilons.is_empty() {
            out.push(("alloc_epsilons", joined(&self.alloc_epsilons)));
        }
        out.extend([
            ("schemes", self.schemes.iter().map(|s| s.name()).collect::<Vec<_>>().join(", ")),
            ("seed", self.seed.to_string()),
            ("drops", self.drops.to_string()),
            ("out_dir", self.out_dir.display().to_string()),
            ("qcqp_method", self.qcqp_method.to_string()),
            ("ao_tol", self.ao_tol.to_string()),
            ("ao_max_outer", self.ao_max_outer.to_string()),
            ("sdr_randomizations", self.sdr_randomizations.to_string()),
        ]);
        out
    }

    pub fn to_text(&self) -> String {
        self.echo().into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

fn num<T: FromStr>(s: &str) -> std::result::Result<T, String> {
    s.parse().map_err(|_| format!("cannot parse '{s}'"))
}

/// Comma-separated numbers; `lo:step:hi` expands to an inclusive range.
fn list(s: &str) -> std::result::Result<Vec<f64>, String> {
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim).filter(|x| !x.is_empty()) {
        let parts: Vec<&str> = item.split(':').collect();
        match parts.as_slice() {
            [x] => out.push(num(x)?),
            [lo, step, hi] => {
                let (lo, step, hi): (f64, f64, f64) = (num(lo)?, num(step)?, num(hi)?);
                if !(step > 0.0) || hi < lo {
                    return Err(format!("bad range '{item}'"));
                }
                out.extend(range(lo, hi, step));
            }
            _ => return Err(format!("bad list item '{item}'")),
        }
    }
    Ok(out)
}
