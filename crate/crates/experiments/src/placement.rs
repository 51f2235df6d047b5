use std::f64::consts::TAU;

use airs_core::channel::Point3;
use airs_core::numerics::RngStream;
use airs_core::single_user::SystemParams;

/// `params.k_users` ground positions uniform in area over the disk of `radius_m` around the
/// user-area center (radius drawn as `R·√u`).
pub fn place_users(rng: &mut RngStream, params: &SystemParams, radius_m: f64) -> Vec<Point3> {
    let c = params.geometry.user_center();
    (0..params.k_users)
        .map(|_| {
            let r = radius_m * rng.uniform().sqrt();
            let t = TAU * rng.uniform();
            Point3::new(c.x + r * t.cos(), c.y + r * t.sin(), 0.0)
        })
        .collect()
}
