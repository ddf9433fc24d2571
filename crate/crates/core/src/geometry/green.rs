use super::mobius::{check_dims, Automorphism};
use super::point::CPoint;
use crate::error::{Error, Result};
use crate::quadrature::{integrate_real, QuadConfig};

/// Radial Green-type function
/// `g(r) = (n+1)/(2n) * ∫_r^1 (1-t^2)^{n-1} t^{1-2n} dt` on `C^n`.
pub fn green_g(n: usize, r: f64) -> Result<f64> {
    green_g_with(n, r, &QuadConfig { rel_tol: 1e-11, ..QuadConfig::default() })
}

pub fn green_g_with(n: usize, r: f64, cfg: &QuadConfig) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("dimension must be positive".into()));
    }
    if r <= 0.0 {
        return Err(Error::Pole("g has a pole at r = 0".into()));
    }
    if r > 1.0 + super::UNIT_TOL || r.is_nan() {
        return Err(Error::Domain(format!("g is defined for 0 < r <= 1, got {r}")));
    }
    if r >= 1.0 {
        return Ok(0.0);
    }
    let k = n as i32;
    let res = integrate_real(
        |t| Ok((1.0 - t * t).powi(k - 1) * t.powi(1 - 2 * k)),
        r,
        1.0,
        cfg,
    )?;
    Ok((n as f64 + 1.0) / (2.0 * n as f64) * res.value)
}

/// `G(z, a) = g(|phi_a(z)|)`.
#[allow(non_snake_case)]
pub fn green_G(z: &CPoint, a: &CPoint) -> Result<f64> {
    check_dims(z, a)?;
    let r = Automorphism::new(a)?.apply(z).norm();
    if z == a || r == 0.0 {
        return Err(Error::Pole("G(z, a) has a pole at z = a".into()));
    }
    green_g(z.dim(), r.min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    // n = 2 antiderivative: (3/4)[1/(2r^2) - 1/2 + log r]
    fn g2(r: f64) -> f64 {
        0.75 * (0.5 / (r * r) - 0.5 + r.ln())
    }

    #[test]
    fn matches_closed_form_for_n2() {
        assert!((green_g(2, 0.5).unwrap() - 0.605_14).abs() < 1e-4);
        for &r in &[1e-3, 0.05, 0.3, 0.5, 0.9, 0.999] {
            let v = green_g(2, r).unwrap();
            assert!(((v - g2(r)) / g2(r)).abs() < 1e-10, "r={r}: {v} vs {}", g2(r));
        }
    }

    #[test]
    fn endpoint_and_pole() {
        assert_eq!(green_g(3, 1.0).unwrap(), 0.0);
        assert!(matches!(green_g(2, 0.0), Err(Error::Pole(_))));
        let a = CPoint::from_reals(&[0.2, 0.1]).unwrap();
        assert!(matches!(green_G(&a, &a), Err(Error::Pole(_))));
    }

    #[test]
    fn strictly_decreasing() {
        for n in [2, 3] {
            let vals: Vec<f64> = [0.3, 0.6, 0.9].iter().map(|&r| green_g(n, r).unwrap()).collect();
            assert!(vals[0] > vals[1] && vals[1] > vals[2]);
        }
    }
}
