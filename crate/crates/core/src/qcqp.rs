//! Maximization of `−vᴴAv + 2Re{vᴴb}` over unit-modulus vectors.
//!
//! Two solvers: element-wise coordinate ascent, and a semidefinite relaxation of the
//! homogenized problem solved through a low-rank factor with Gaussian randomization.

use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};
use crate::numerics::{hermitian_principal_eig, CMat, CVec, RngStream, C64};

/// `c_n` below this modulus leaves the coordinate unchanged.
pub const COORDINATE_FLOOR: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticForm {
    a: CMat,
    b: CVec,
}

impl QuadraticForm {
    /// Checks shapes, Hermitian symmetry and (by 100 fixed random probes) positive semidefiniteness.
    pub fn new(a: CMat, b: CVec) -> Result<Self> {
        if !a.is_square() || a.rows() != b.len() {
            return Err(invalid(format!("A is {}x{} but b has length {}", a.rows(), a.cols(), b.len())));
        }
        if !a.is_finite() || !b.is_finite() {
            return Err(invalid("non-finite quadratic form"));
        }
        if !a.is_hermitian(1e-12) {
            return Err(invalid(format!("A is not Hermitian (defect {:e})", a.hermitian_defect())));
        }
        let fro = a.frobenius_norm();
        let mut rng = RngStream::new(0x5eed_9c9b, 0);
        for _ in 0..100 {
            let z = match rng.complex_normal_vec(a.rows()).normalized() {
                Some(z) => z,
                None => continue,
            };
            let q = a.quad_form(&z).re;
            if q < -1e-9 * fro {
                return Err(invalid(format!("A is not positive semidefinite (Rayleigh quotient {q:e})")));
            }
        }
        Ok(QuadraticForm { a, b })
    }

    pub fn a(&self) -> &CMat {
        &self.a
    }

    pub fn b(&self) -> &CVec {
        &self.b
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn objective(&self, v: &CVec) -> f64 {
        -self.a.quad_form(v).re + 2.0 * v.dot(&self.b).re
    }

    /// Same maximizers, entries scaled by `s > 0`.
    pub fn scaled(&self, s: f64) -> QuadraticForm {
        QuadraticForm { a: self.a.scale_real(s), b: self.b.scale_real(s) }
    }

    /// `max(‖A‖_F, ‖b‖)`.
    pub fn magnitude(&self) -> f64 {
        self.a.frobenius_norm().max(self.b.norm())
    }
}

/// `[[A, −b], [−bᴴ, 0]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct HomogenizedForm {
    pub q_hat: CMat,
}

impl HomogenizedForm {
    /// `v̄ᴴ Q̂ v̄`.
    pub fn value(&self, v_bar: &CVec) -> f64 {
        self.q_hat.quad_form(v_bar).re
    }
}

pub fn homogenize(qf: &QuadraticForm) -> HomogenizedForm {
    let n = qf.dim();
    let q_hat = CMat::from_fn(n + 1, n + 1, |i, j| match (i < n, j < n) {
        (true, true) => qf.a[(i, j)],
        (true, false) => -qf.b[i],
        (false, true) => -qf.b[j].conj(),
        (false, false) => C64::new(0.0, 0.0),
    });
    HomogenizedForm { q_hat }
}

/// `v_i = exp(j·arg(v̄_i / v̄_{n+1}))` for the first `n` entries.
pub fn dehomogenize(v_bar: &CVec) -> Result<CVec> {
    let n1 = v_bar.len();
    if n1 < 2 {
        return Err(invalid("homogenized vector needs at least two entries"));
    }
    let tau = v_bar[n1 - 1];
    if tau.norm() == 0.0 {
        return Err(Error::DegenerateChannel("auxiliary coordinate is zero".into()));
    }
    Ok(CVec::from_fn(n1 - 1, |i| {
        let z = v_bar[i] * tau.conj();
        if z.norm() > 0.0 {
            C64::from_polar(1.0, z.arg())
        } else {
            C64::new(1.0, 0.0)
        }
    }))
}

#[derive(Debug, Clone, PartialEq)]
pub struct AscentResult {
    pub v: CVec,
    pub objective: f64,
    /// Objective after every accepted single-coordinate update, starting at `v0`.
    pub trace: Vec<f64>,
    pub sweeps: usize,
}

/// Cyclic coordinate ascent. A sweep that improves the objective by less than
/// `tol · (1 + |objective|)` ends the run; running out of sweeps is an error.
pub fn solve_coordinate_ascent(qf: &QuadraticForm, v0: &CVec, tol: f64, max_iter: usize) -> Result<AscentResult> {
    let (res, converged) = coordinate_ascent_capped(qf, v0, tol, max_iter)?;
    if converged {
        Ok(res)
    } else {
        Err(Error::IterationLimit { routine: "solve_coordinate_ascent", iterations: max_iter, trace: res.trace })
    }
}

/// Same sweeps as [`solve_coordinate_ascent`], but a run that exhausts `max_sweeps` returns
/// its last point with `false`. Every point on the way is a valid ascent step.
pub fn coordinate_ascent_capped(
    qf: &QuadraticForm,
    v0: &CVec,
    tol: f64,
    max_sweeps: usize,
) -> Result<(AscentResult, bool)> {
    let n = qf.dim();
    if v0.len() != n {
        return Err(invalid("starting point has the wrong dimension"));
    }
    if v0.max_modulus_error() > 1e-9 {
        return Err(invalid("starting point is not unit-modulus"));
    }
    let a = &qf.a;
    let mut v = v0.clone();
    let mut av = a.mul_vec(&v);
    let mut obj = qf.objective(&v);
    let mut trace = vec![obj];
    let mut converged = false;
    let mut sweeps = 0;
    while sweeps < max_sweeps {
        sweeps += 1;
        let start = obj;
        for i in 0..n {
            let aii = a[(i, i)].re;
            let c = qf.b[i] - av[i] + v[i] * aii;
            let r = c.norm();
            if r < COORDINATE_FLOOR {
                continue;
            }
            let new = c / r;
            let d = new - v[i];
            // Exact change of the objective for a single-coordinate move.
            let delta = 2.0 * (d.conj() * (qf.b[i] - av[i])).re - aii * d.norm_sqr();
            if !(delta > 0.0) {
                continue;
            }
            v[i] = new;
            for k in 0..n {
                av[k] += a[(k, i)] * d;
            }
            obj += delta;
            trace.push(obj);
        }
        if obj - start < tol * (1.0 + obj.abs()) {
            converged = true;
            break;
        }
    }
    let objective = qf.objective(&v);
    Ok((AscentResult { v, objective, trace, sweeps }, converged))
}

/// Coordinate ascent from `v0` and from `extra_starts` uniformly random phase vectors; the
/// best converged run wins, earlier starts on ties.
pub fn solve_coordinate_ascent_multistart(
    qf: &QuadraticForm,
    v0: &CVec,
    extra_starts: usize,
    tol: f64,
    max_iter: usize,
    rng: &mut RngStream,
) -> Result<AscentResult> {
    let mut best = solve_coordinate_ascent(qf, v0, tol, max_iter)?;
    for _ in 0..extra_starts {
        let start = CVec::from_fn(qf.dim(), |_| C64::from_polar(1.0, std::f64::consts::TAU * rng.uniform()));
        let r = solve_coordinate_ascent(qf, &start, tol, max_iter)?;
        if r.objective > best.objective {
            best = r;
        }
    }
    Ok(best)
}

/// Which unit-modulus QCQP solver the phase update uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QcqpMethod {
    CoordinateAscent,
    Sdr,
}

impl fmt::Display for QcqpMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            QcqpMethod::CoordinateAscent => "coordinate-ascent",
            QcqpMethod::Sdr => "sdr",
        })
    }
}

impl FromStr for QcqpMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "coordinate-ascent" | "ca" => Ok(QcqpMethod::CoordinateAscent),
            "sdr" => Ok(QcqpMethod::Sdr),
            other => Err(invalid(format!("unknown qcqp method '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdrOptions {
    /// Factor width; `None` picks `⌈√(2(n+1))⌉`.
    pub rank: Option<usize>,
    pub num_randomizations: usize,
    /// Stop once the largest Riemannian gradient row norm drops below this (normalized Q̂).
    pub stationarity_tol: f64,
    /// Also stop after three passes that each improve `tr(Q̂V)` by less than this, relative.
    pub objective_gain_tol: f64,
    pub max_factor_iterations: usize,
    pub polish_tol: f64,
    pub polish_max_sweeps: usize,
}

impl Default for SdrOptions {
    fn default() -> Self {
        SdrOptions {
            rank: None,
            num_randomizations: 200,
            stationarity_tol: 1e-8,
            objective_gain_tol: 1e-10,
            max_factor_iterations: 5_000,
            polish_tol: 1e-12,
            polish_max_sweeps: 2_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdrResult {
    pub v: CVec,
    pub objective: f64,
    /// `−tr(Q̂V)` at the relaxed solution; an upper bound on the objective.
    pub relaxation_value: f64,
    /// Rows of the low-rank factor, `V = R Rᴴ`.
    pub factor: CMat,
    pub factor_iterations: usize,
    /// 0 is the principal eigenvector of `V`, `1..` the randomized draws.
    pub best_candidate: usize,
}

pub fn default_sdr_rank(n: usize) -> usize {
    ((2.0 * (n + 1) as f64).sqrt().ceil() as usize).max(2)
}

fn normalize_rows(r: &mut CMat) {
    for i in 0..r.rows() {
        let norm = r.row(i).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.0 {
            for j in 0..r.cols() {
                r[(i, j)] /= norm;
            }
        } else {
            r[(i, 0)] = C64::new(1.0, 0.0);
        }
    }
}

fn trace_qrr(q: &CMat, r: &CMat, qr: &CMat) -> f64 {
    let mut t = 0.0;
    for i in 0..r.rows() {
        for j in 0..r.cols() {
            t += (r[(i, j)].conj() * qr[(i, j)]).re;
        }
    }
    let _ = q;
    t
}

/// Tangent projection of the Euclidean gradient `QR` and the largest row norm of the result.
fn riemannian_gradient(r: &CMat, qr: &CMat) -> (CMat, f64) {
    let mut g = qr.clone();
    let mut worst: f64 = 0.0;
    for i in 0..r.rows() {
        let mut inner = 0.0;
        for j in 0..r.cols() {
            inner += (r[(i, j)].conj() * qr[(i, j)]).re;
        }
        let mut row_sq = 0.0;
        for j in 0..r.cols() {
            g[(i, j)] -= r[(i, j)] * inner;
            row_sq += g[(i, j)].norm_sqr();
        }
        worst = worst.max(row_sq.sqrt());
    }
    (g, worst)
}

/// Minimizes `tr(Q R Rᴴ)` over factors with unit-norm rows. Each pass replaces every row by
/// its exact minimizer with the others fixed, `r_i ← −Σ_{j≠i} Q_ij r_j / ‖·‖`, which keeps
/// rows on the unit sphere and never increases the objective. Stops on the Riemannian
/// gradient of the factor, or once three consecutive passes each gain less than
/// `objective_gain_tol (1 + |f|)`, which catches the slow tail near degenerate optima. Returns the
/// factor and the pass count.
fn low_rank_sdp(q: &CMat, rank: usize, opts: &SdrOptions, rng: &mut RngStream) -> Result<(CMat, usize)> {
    let n1 = q.rows();
    let mut r = CMat::from_fn(n1, rank, |_, _| rng.complex_normal());
    normalize_rows(&mut r);
    let mut qr = q.matmul(&r);
    let mut residual = f64::INFINITY;
    let mut g = vec![C64::new(0.0, 0.0); rank];
    let mut value = trace_qrr(q, &r, &qr);
    let mut stalled = 0;
    for it in 0..opts.max_factor_iterations {
        let (_, worst) = riemannian_gradient(&r, &qr);
        residual = worst;
        if worst <= opts.stationarity_tol {
            return Ok((r, it));
        }
        for i in 0..n1 {
            let qii = q[(i, i)].re;
            let mut norm_sq = 0.0;
            for j in 0..rank {
                g[j] = qr[(i, j)] - r[(i, j)] * qii;
                norm_sq += g[j].norm_sqr();
            }
            let norm = norm_sq.sqrt();
            if norm <= f64::MIN_POSITIVE {
                continue;
            }
            for j in 0..rank {
                let new = -g[j] / norm;
                let d = new - r[(i, j)];
                r[(i, j)] = new;
                for k in 0..n1 {
                    qr[(k, j)] += q[(k, i)] * d;
                }
            }
        }
        // Refresh to keep accumulated round-off out of the stopping test.
        qr = q.matmul(&r);
        let next = trace_qrr(q, &r, &qr);
        stalled = if value - next < opts.objective_gain_tol * (1.0 + next.abs()) { stalled + 1 } else { 0 };
        value = next;
        if stalled >= 3 {
            return Ok((r, it + 1));
        }
    }
    Err(Error::Convergence { routine: "low_rank_sdp", iterations: opts.max_factor_iterations, residual })
}

/// Semidefinite relaxation of the homogenized problem, Gaussian randomization with covariance
/// `V = RRᴴ`, de-homogenization and a final coordinate-ascent polish of the best candidate.
pub fn solve_sdr(qf: &QuadraticForm, opts: &SdrOptions, rng: &mut RngStream) -> Result<SdrResult> {
    let rank = opts.rank.unwrap_or_else(|| default_sdr_rank(qf.dim()));
    if rank < 2 {
        return Err(invalid("SDR factor rank must be at least 2"));
    }
    if opts.num_randomizations < 1 {
        return Err(invalid("need at least one randomization"));
    }
    let n = qf.dim();
    let hom = homogenize(qf);
    let scale = hom.q_hat.frobenius_norm();
    if scale == 0.0 {
        let v = CVec::ones(n);
        return Ok(SdrResult {
            objective: qf.objective(&v),
            v,
            relaxation_value: 0.0,
            factor: CMat::from_fn(n + 1, rank, |_, j| C64::new(if j == 0 { 1.0 } else { 0.0 }, 0.0)),
            factor_iterations: 0,
            best_candidate: 0,
        });
    }
    let q = hom.q_hat.scale_real(1.0 / scale);
    let (factor, factor_iterations) = low_rank_sdp(&q, rank, opts, rng)?;
    let qr = q.matmul(&factor);
    let relaxation_value = -scale * trace_qrr(&q, &factor, &qr);

    let v_mat = factor.matmul(&factor.adjoint()).hermitian_part();
    let mut candidates = Vec::with_capacity(opts.num_randomizations + 1);
    let (_, principal) = hermitian_principal_eig(&v_mat, 1e-10)?;
    candidates.push(principal);
    for _ in 0..opts.num_randomizations {
        let z = rng.complex_normal_vec(rank);
        candidates.push(factor.mul_vec(&z));
    }

    let mut best: Option<(usize, CVec, f64)> = None;
    for (idx, xi) in candidates.iter().enumerate() {
        let v = match dehomogenize(xi) {
            Ok(v) => v,
            Err(_) => continue,
        };
        let obj = qf.objective(&v);
        if best.as_ref().is_none_or(|(_, _, b)| obj > *b) {
            best = Some((idx, v, obj));
        }
    }
    let (best_candidate, v, _) =
        best.ok_or_else(|| Error::DegenerateChannel("every SDR candidate was degenerate".into()))?;
    // Polishing only has to improve the rounded point, so a capped run is fine.
    let (polished, _) = coordinate_ascent_capped(qf, &v, opts.polish_tol, opts.polish_max_sweeps)?;
    Ok(SdrResult {
        v: polished.v,
        objective: polished.objective,
        relaxation_value,
        factor,
        factor_iterations,
        best_candidate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::TAU;

    fn random_form(rng: &mut RngStream, n: usize) -> QuadraticForm {
        let x = CMat::from_fn(n, n, |_, _| rng.complex_normal());
        let a = x.matmul(&x.adjoint()).hermitian_part();
        let b = rng.complex_normal_vec(n).scale_real(2.0);
        QuadraticForm::new(a, b).unwrap()
    }

    fn random_phases(rng: &mut RngStream, n: usize) -> CVec {
        CVec::from_fn(n, |_| C64::from_polar(1.0, TAU * rng.uniform()))
    }

    fn grid_optimum(qf: &QuadraticForm, points: usize) -> f64 {
        let n = qf.dim();
        let ph: Vec<C64> = (0..points).map(|k| C64::from_polar(1.0, TAU * k as f64 / points as f64)).collect();
        let mut idx = vec![0usize; n];
        let mut best = f64::NEG_INFINITY;
        loop {
            let v = CVec::from_fn(n, |i| ph[idx[i]]);
            best = best.max(qf.objective(&v));
            let mut k = 0;
            while k < n {
                idx[k] += 1;
                if idx[k] < points {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == n {
                return best;
            }
        }
    }

    #[test]
    fn homogenize_scalar_hand_check() {
        let qf = QuadraticForm::new(CMat::from_fn(1, 1, |_, _| C64::new(2.0, 0.0)), CVec::ones(1)).unwrap();
        let h = homogenize(&qf);
        let vb = CVec::ones(2);
        assert_eq!(h.value(&vb), 0.0);
        assert_eq!(qf.a().quad_form(&CVec::ones(1)).re - 2.0 * CVec::ones(1).dot(qf.b()).re, 0.0);
    }

    #[test]
    fn homogenize_zero_b_is_block_diagonal() {
        let mut rng = RngStream::new(3, 0);
        let qf = random_form(&mut rng, 4);
        let qf = QuadraticForm::new(qf.a().clone(), CVec::zeros(4)).unwrap();
        let h = homogenize(&qf);
        for i in 0..5 {
            assert_eq!(h.q_hat[(i, 4)], C64::new(0.0, 0.0));
            assert_eq!(h.q_hat[(4, i)], C64::new(0.0, 0.0));
        }
    }

    #[test]
    fn homogenized_identity() {
        let mut rng = RngStream::new(4, 0);
        for _ in 0..100 {
            let qf = random_form(&mut rng, 5);
            let h = homogenize(&qf);
            let v = random_phases(&mut rng, 5);
            let mut vb = v.clone().into_inner();
            vb.push(C64::new(1.0, 0.0));
            let lhs = h.value(&CVec::new(vb).unwrap());
            let rhs = -qf.objective(&v);
            assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()));
        }
    }

    #[test]
    fn rejects_indefinite_or_mismatched() {
        let mut a = CMat::identity(2);
        a[(1, 1)] = C64::new(-1.0, 0.0);
        assert!(QuadraticForm::new(a, CVec::zeros(2)).is_err());
        assert!(QuadraticForm::new(CMat::identity(2), CVec::zeros(3)).is_err());
    }

    #[test]
    fn dehomogenize_is_phase_invariant() {
        let mut rng = RngStream::new(5, 0);
        let vb = rng.complex_normal_vec(6);
        let base = dehomogenize(&vb).unwrap();
        // Multiplication by ±1, ±j is exact in floating point.
        for c in [C64::new(-1.0, 0.0), C64::new(0.0, 1.0), C64::new(0.0, -1.0)] {
            assert_eq!(dehomogenize(&vb.scale(c)).unwrap(), base);
        }
        for _ in 0..20 {
            let c = C64::from_polar(1.0, TAU * rng.uniform());
            let other = dehomogenize(&vb.scale(c)).unwrap();
            assert!(other.sub(&base).norm() < 1e-14);
        }
        assert!(dehomogenize(&CVec::from_fn(3, |i| C64::new(i as f64, 0.0)).scale_real(0.0)).is_err());
    }

    #[test]
    fn ascent_decoupled_case() {
        let mut rng = RngStream::new(6, 0);
        let b = rng.complex_normal_vec(5);
        let qf = QuadraticForm::new(CMat::zeros(5, 5), b.clone()).unwrap();
        let r = solve_coordinate_ascent(&qf, &CVec::ones(5), 1e-12, 100).unwrap();
        let want = b.unit_modulus();
        assert!(r.v.sub(&want).norm() < 1e-14);
        assert!((r.objective - 2.0 * b.iter().map(|z| z.norm()).sum::<f64>()).abs() < 1e-12);
    }

    #[test]
    fn ascent_scalar_case() {
        let qf = QuadraticForm::new(CMat::identity(1), CVec::new(vec![C64::new(0.0, 3.0)]).unwrap()).unwrap();
        let r = solve_coordinate_ascent(&qf, &CVec::ones(1), 1e-12, 10).unwrap();
        assert!((r.v[0] - C64::new(0.0, 1.0)).norm() < 1e-15);
        assert_eq!(r.sweeps, 2);
    }

    #[test]
    fn ascent_matches_sixteen_point_grid() {
        let mut rng = RngStream::new(7, 0);
        for _ in 0..20 {
            let qf = random_form(&mut rng, 3);
            let grid = grid_optimum(&qf, 16);
            let v0 = qf.b().unit_modulus();
            let r = solve_coordinate_ascent(&qf, &v0, 1e-12, 1000).unwrap();
            // Grid spacing 2π/16 loses at most this much relative to the continuous optimum.
            let slack = 0.1 * (1.0 + grid.abs());
            assert!(r.objective >= grid - slack, "{} vs grid {}", r.objective, grid);
        }
    }

    #[test]
    fn multistart_never_loses_to_its_first_start() {
        let mut rng = RngStream::new(12, 0);
        for i in 0..20 {
            let qf = random_form(&mut rng, 4);
            let v0 = qf.b().unit_modulus();
            let single = solve_coordinate_ascent(&qf, &v0, 1e-12, 1000).unwrap();
            let multi =
                solve_coordinate_ascent_multistart(&qf, &v0, 8, 1e-12, 1000, &mut RngStream::new(13, i)).unwrap();
            assert!(multi.objective >= single.objective);
            let none =
                solve_coordinate_ascent_multistart(&qf, &v0, 0, 1e-12, 1000, &mut RngStream::new(13, i)).unwrap();
            assert_eq!(none, single);
        }
    }

    #[test]
    fn ascent_iteration_limit_carries_trace() {
        let mut rng = RngStream::new(8, 0);
        let qf = random_form(&mut rng, 6);
        match solve_coordinate_ascent(&qf, &random_phases(&mut rng, 6), 0.0, 1) {
            Err(Error::IterationLimit { trace, .. }) => assert!(!trace.is_empty()),
            other => panic!("expected iteration limit, got {other:?}"),
        }
    }

    #[test]
    fn sdr_decoupled_case() {
        let mut rng = RngStream::new(9, 0);
        let b = rng.complex_normal_vec(4);
        let qf = QuadraticForm::new(CMat::zeros(4, 4), b.clone()).unwrap();
        let r = solve_sdr(&qf, &SdrOptions::default(), &mut RngStream::new(1, 1)).unwrap();
        assert!(r.v.sub(&b.unit_modulus()).norm() < 1e-9);
    }

    #[test]
    fn sdr_near_grid_optimum_and_bounded() {
        let mut rng = RngStream::new(10, 0);
        for i in 0..10 {
            let qf = random_form(&mut rng, 3);
            let grid = grid_optimum(&qf, 32);
            let r = solve_sdr(&qf, &SdrOptions::default(), &mut RngStream::new(11, i)).unwrap();
            assert!(r.objective >= grid - 0.01 * grid.abs(), "{} vs {}", r.objective, grid);
            assert!(r.objective <= r.relaxation_value + 1e-6 * (1.0 + r.relaxation_value.abs()));
            for row in 0..r.factor.rows() {
                let norm = r.factor.row(row).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                assert!((norm - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn method_names_round_trip() {
        for m in [QcqpMethod::CoordinateAscent, QcqpMethod::Sdr] {
            assert_eq!(m.to_string().parse::<QcqpMethod>().unwrap(), m);
        }
        assert!("ipm".parse::<QcqpMethod>().is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn ascent_trace_monotone_and_stationary(seed in 0u64..10_000, n in 1usize..9) {
            let mut rng = RngStream::new(seed, 0);
            let qf = random_form(&mut rng, n);
            let v0 = random_phases(&mut rng, n);
            let r = solve_coordinate_ascent(&qf, &v0, 1e-14, 100_000).unwrap();
            for w in r.trace.windows(2) {
                prop_assert!(w[1] >= w[0]);
            }
            let av = qf.a().mul_vec(&r.v);
            for i in 0..n {
                let c = qf.b()[i] - av[i] + r.v[i] * qf.a()[(i, i)].re;
                let lhs = (r.v[i].conj() * c).re;
                prop_assert!((lhs - c.norm()).abs() <= 1e-9 * (1.0 + c.norm()));
            }
        }
    }
}
