use num_complex::Complex64;

use super::point::{CPoint, Coords};
use crate::error::{Error, Result};

/// The involutive automorphism `phi_a` of the unit ball swapping `0` and `a`.
///
/// Uses the projection form `(a - P_a z - s_a Q_a z) / (1 - <z, a>)` with
/// `s_a = sqrt(1 - |a|^2)`, rewritten as
/// `(a - s_a z - <z, a> a / (1 + s_a)) / (1 - <z, a>)`, which has no
/// `1/|a|^2` and therefore covers `a = 0` (where `phi_0 = -id`).
#[derive(Debug, Clone)]
pub struct Automorphism {
    a: CPoint,
    a_norm_sq: f64,
    s: f64,
}

impl Automorphism {
    pub fn new(a: &CPoint) -> Result<Self> {
        let a_norm_sq = a.norm_sq();
        if a_norm_sq >= 1.0 {
            return Err(Error::Domain(format!(
                "automorphism parameter must satisfy |a| < 1, got {}",
                a_norm_sq.sqrt()
            )));
        }
        Ok(Self {
            a: a.clone(),
            a_norm_sq,
            s: (1.0 - a_norm_sq).sqrt(),
        })
    }

    pub fn center(&self) -> &CPoint {
        &self.a
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    /// `phi_a(z)`; `z` may lie on the closed ball.
    pub fn apply(&self, z: &CPoint) -> CPoint {
        let za = z.inner(&self.a);
        let denom = Complex64::new(1.0, 0.0) - za;
        let k = za / (1.0 + self.s);
        let coords: Coords = self
            .a
            .coords()
            .iter()
            .zip(z.coords())
            .map(|(&aj, &zj)| (aj - zj * self.s - aj * k) / denom)
            .collect();
        CPoint::from_coords(coords)
    }

    /// `1 - |phi_a(z)|^2 = (1-|a|^2)(1-|z|^2) / |1 - <z,a>|^2`, evaluated
    /// without forming `phi_a(z)`.
    pub fn defect_of_image(&self, z: &CPoint) -> f64 {
        let d = (Complex64::new(1.0, 0.0) - z.inner(&self.a)).norm_sqr();
        (1.0 - self.a_norm_sq) * z.defect() / d
    }

    /// Complex Jacobian `D phi_a(0)` as a row-major `n x n` matrix:
    /// `J v = -s v + s <v, a> a / (1 + s)`.
    pub fn jacobian_at_origin(&self) -> Vec<Vec<Complex64>> {
        let n = self.dim();
        let c = self.s / (1.0 + self.s);
        (0..n)
            .map(|j| {
                (0..n)
                    .map(|k| {
                        let diag = if j == k { -self.s } else { 0.0 };
                        Complex64::new(diag, 0.0) + self.a[j] * self.a[k].conj() * c
                    })
                    .collect()
            })
            .collect()
    }

    /// Real Jacobian determinant of `phi_a` at `z`:
    /// `((1-|a|^2) / |1 - <z,a>|^2)^(n+1)`.
    pub fn real_jacobian(&self, z: &CPoint) -> f64 {
        let d = (Complex64::new(1.0, 0.0) - z.inner(&self.a)).norm_sqr();
        ((1.0 - self.a_norm_sq) / d).powi(self.dim() as i32 + 1)
    }
}

/// `phi_a(z)` for `|a| < 1`, `|z| <= 1`.
pub fn mobius(a: &CPoint, z: &CPoint) -> Result<CPoint> {
    check_dims(a, z)?;
    if z.norm() > 1.0 + super::UNIT_TOL {
        return Err(Error::Domain(format!("|z| = {} exceeds 1", z.norm())));
    }
    Ok(Automorphism::new(a)?.apply(z))
}

/// Pseudo-hyperbolic distance `|phi_z(w)|` between points of the open ball.
pub fn pseudo_hyperbolic_dist(z: &CPoint, w: &CPoint) -> Result<f64> {
    check_dims(z, w)?;
    z.require_open_ball("z")?;
    w.require_open_ball("w")?;
    if z == w {
        return Ok(0.0);
    }
    Ok(Automorphism::new(z)?.apply(w).norm().min(1.0))
}

pub(crate) fn check_dims(a: &CPoint, b: &CPoint) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::Domain(format!(
            "dimension mismatch: {} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn origin_parameter_is_negation() {
        let z = CPoint::new([c(0.3, -0.2), c(0.1, 0.4)]).unwrap();
        let img = mobius(&CPoint::origin(2), &z).unwrap();
        assert_eq!(img, z.scale(-1.0));
    }

    #[test]
    fn slice_example() {
        let a = CPoint::from_reals(&[0.5, 0.0]).unwrap();
        assert_eq!(mobius(&a, &CPoint::origin(2)).unwrap(), a);
        let img = mobius(&a, &CPoint::from_reals(&[0.25, 0.0]).unwrap()).unwrap();
        assert!((img[0] - c(2.0 / 7.0, 0.0)).norm() < 1e-15);
        assert!(img[1].norm() < 1e-15);
        assert!(mobius(&a, &a).unwrap().norm() < 1e-15);
    }

    #[test]
    fn rejects_boundary_parameter() {
        let a = CPoint::from_reals(&[1.0, 0.0]).unwrap();
        assert!(matches!(mobius(&a, &CPoint::origin(2)), Err(Error::Domain(_))));
    }

    #[test]
    fn pseudo_hyperbolic_examples() {
        let z = CPoint::from_reals(&[0.5, 0.0]).unwrap();
        let w = CPoint::from_reals(&[0.25, 0.0]).unwrap();
        assert!((pseudo_hyperbolic_dist(&z, &w).unwrap() - 2.0 / 7.0).abs() < 1e-15);
        assert_eq!(pseudo_hyperbolic_dist(&z, &z).unwrap(), 0.0);
        assert!((pseudo_hyperbolic_dist(&CPoint::origin(2), &w).unwrap() - 0.25).abs() < 1e-15);
        let edge = CPoint::from_reals(&[1.0, 0.0]).unwrap();
        assert!(pseudo_hyperbolic_dist(&edge, &w).is_err());
    }

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn jacobian_matches_finite_differences() {
        let mut rng = Rng::seeded(11);
        for _ in 0..20 {
            let a = rng.ball_point(3, 0.95);
            let phi = Automorphism::new(&a).unwrap();
            let jac = phi.jacobian_at_origin();
            let h = 1e-6;
            for k in 0..3 {
                let e = CPoint::basis(3, k);
                let plus = phi.apply(&e.scale(h));
                let minus = phi.apply(&e.scale(-h));
                for j in 0..3 {
                    let fd = (plus[j] - minus[j]) / (2.0 * h);
                    assert!((fd - jac[j][k]).norm() < 1e-8, "{fd} vs {}", jac[j][k]);
                }
            }
        }
    }

    #[test]
    fn pseudo_ball_image_volume_uses_real_jacobian() {
        // At z = 0 the real Jacobian is (1-|a|^2)^{n+1}.
        let a = CPoint::from_reals(&[0.6, 0.0]).unwrap();
        let phi = Automorphism::new(&a).unwrap();
        assert!((phi.real_jacobian(&CPoint::origin(2)) - 0.64f64.powi(3)).abs() < 1e-15);
    }
}
