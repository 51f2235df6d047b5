//! Raw-matrix reference rates shared by unit tests.

use crate::channel::{link_channel, ArraySpec, Point3};
use crate::numerics::{CVec, C64};
use crate::single_user::SystemParams;

/// Rate of one reflected link computed from raw channel matrices with phase alignment,
/// saturated amplification and MRC/MRT.
pub fn raw_link_snrs(p: &SystemParams, airs: Point3, user: Point3, n: usize) -> (f64, f64) {
    let g = &p.geometry;
    let bs_arr = ArraySpec::for_count(p.m).unwrap();
    let irs_arr = ArraySpec::for_count(n).unwrap();
    let one = ArraySpec::new(1, 1, 0.5).unwrap();
    let (sf, s0) = (p.sigma_f_mw, p.sigma_0_mw);

    // UL: user → AIRS → BS.
    let h = link_channel(user, one, airs, irs_arr, p.beta).unwrap().as_column();
    let gmat = link_channel(airs, irs_arr, g.bs, bs_arr, p.beta).unwrap().matrix; // M × n
    let ar = link_channel(g.bs, bs_arr, airs, irs_arr, p.beta).unwrap().rx_steer;
    let phase = CVec::from_fn(n, |i| C64::from_polar(1.0, ar[i].arg() - h[i].arg()));
    let alpha = (p.p_f_mw / (p.p_u_mw * h.norm_sqr() + sf * n as f64)).sqrt();
    let eff = gmat.mul_vec(&phase.hadamard(&h)).scale_real(alpha);
    let u = eff.normalized().unwrap();
    let sig = p.p_u_mw * u.dot(&eff).norm_sqr();
    let gu = gmat.adjoint_mul_vec(&u);
    let ul = sig / (alpha * alpha * sf * gu.norm_sqr() + s0);

    // DL: BS → AIRS → user.
    let gd = link_channel(g.bs, bs_arr, airs, irs_arr, p.beta).unwrap();
    let row = link_channel(airs, irs_arr, user, one, p.beta).unwrap().matrix;
    let hd = CVec::from_fn(n, |i| row[(0, i)].conj());
    let phase = CVec::from_fn(n, |i| C64::from_polar(1.0, hd[i].arg() - gd.rx_steer[i].arg()));
    let w = gd.tx_steer.normalized().unwrap().scale_real(p.p_b_mw.sqrt());
    let gw = gd.matrix.mul_vec(&w);
    let alpha = (p.p_f_mw / (gw.norm_sqr() + sf * n as f64)).sqrt();
    let s = hd.dot(&phase.hadamard(&gw)) * alpha;
    let dl = s.norm_sqr() / (alpha * alpha * sf * hd.norm_sqr() + s0);
    (ul, dl)
}

/// `k` users drawn uniformly over a disk of `radius` meters around the user-area center.
pub fn random_users(rng: &mut crate::numerics::RngStream, p: &SystemParams, k: usize, radius: f64) -> Vec<Point3> {
    let c = p.geometry.user_center();
    (0..k)
        .map(|_| {
            let r = radius * rng.uniform().sqrt();
            let t = rng.uniform_range(0.0, std::f64::consts::TAU);
            Point3::new(c.x + r * t.cos(), c.y + r * t.sin(), 0.0)
        })
        .collect()
}
