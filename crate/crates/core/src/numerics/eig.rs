use super::matrix::{CMat, CVec, C64};
use crate::error::{invalid, Error, Result};

/// Iteration cap for the principal-eigenpair power iteration.
pub const MAX_POWER_ITERATIONS: usize = 10_000;

/// Largest eigenvalue and a unit eigenvector of a Hermitian matrix.
///
/// Power iteration on `m + ‖m‖_F I`, which is positive semidefinite, so the dominant
/// eigenvalue of the shifted matrix is the algebraically largest one of `m`. The
/// iteration stops once `‖m v − λ v‖ ≤ tol ‖m‖_F`.
pub fn hermitian_principal_eig(m: &CMat, tol: f64) -> Result<(f64, CVec)> {
    if !m.is_square() {
        return Err(invalid(format!("expected a square matrix, got {}x{}", m.rows(), m.cols())));
    }
    if !(tol > 0.0) {
        return Err(invalid("tolerance must be positive"));
    }
    if !m.is_finite() {
        return Err(invalid("matrix contains non-finite entries"));
    }
    if !m.is_hermitian(1e-12) {
        return Err(invalid(format!("matrix is not Hermitian (relative defect {:e})", m.hermitian_defect())));
    }
    let n = m.rows();
    if n == 0 {
        return Err(invalid("empty matrix"));
    }
    let fro = m.frobenius_norm();
    if fro == 0.0 {
        let mut e = CVec::zeros(n);
        e[0] = C64::new(1.0, 0.0);
        return Ok((0.0, e));
    }

    // Deterministic start with a component along every coordinate.
    let mut x = CVec::from_fn(n, |i| {
        let t = (i as f64 + 1.0) * 0.7548776662466927;
        C64::new(1.0 + 0.25 * (t * std::f64::consts::TAU).cos(), 0.1 * (t * 3.0).sin())
    })
    .normalized()
    .expect("non-zero start vector");

    let mut residual = f64::INFINITY;
    for _ in 0..MAX_POWER_ITERATIONS {
        let mx = m.mul_vec(&x);
        let lambda = x.dot(&mx).re;
        residual = mx.sub(&x.scale_real(lambda)).norm();
        if residual <= tol * fro {
            return Ok((lambda, x));
        }
        let y = mx.add(&x.scale_real(fro));
        x = match y.normalized() {
            Some(v) => v,
            None => break,
        };
    }
    Err(Error::Convergence {
        routine: "hermitian_principal_eig",
        iterations: MAX_POWER_ITERATIONS,
        residual: residual / fro,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real_diag(d: &[f64]) -> CMat {
        CMat::diag(&CVec::from_fn(d.len(), |i| C64::new(d[i], 0.0)))
    }

    #[test]
    fn identity_has_unit_eigenvalue() {
        let (l, v) = hermitian_principal_eig(&CMat::identity(3), 1e-12).unwrap();
        assert!((l - 1.0).abs() < 1e-12);
        assert!((v.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn diagonal_picks_largest_entry() {
        let (l, v) = hermitian_principal_eig(&real_diag(&[5.0, 2.0, 1.0]), 1e-12).unwrap();
        assert!((l - 5.0).abs() < 1e-10);
        assert!((v[0].norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn largest_algebraic_not_largest_magnitude() {
        let (l, _) = hermitian_principal_eig(&real_diag(&[-7.0, 1.5, 0.5]), 1e-12).unwrap();
        assert!((l - 1.5).abs() < 1e-10);
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut m = CMat::identity(2);
        m[(0, 1)] = C64::new(1.0, 0.0);
        assert!(matches!(hermitian_principal_eig(&m, 1e-9), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn exact_degeneracy_still_converges() {
        let (l, _) = hermitian_principal_eig(&real_diag(&[3.0, 3.0, -1.0]), 1e-12).unwrap();
        assert!((l - 3.0).abs() < 1e-10);
    }
}
