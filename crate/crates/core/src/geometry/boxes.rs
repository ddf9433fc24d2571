use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::mobius::{check_dims, Automorphism};
use super::point::CPoint;
use crate::error::{Error, Result};
use crate::quadrature::{integrate_real, QuadConfig};

/// Non-isotropic gauge `|1 - <z, xi>|` for `xi` on the sphere.
pub fn noniso_gauge(z: &CPoint, xi: &CPoint) -> Result<f64> {
    check_dims(z, xi)?;
    xi.require_unit("xi")?;
    Ok(gauge_unchecked(z, xi))
}

#[inline]
pub(crate) fn gauge_unchecked(z: &CPoint, xi: &CPoint) -> f64 {
    (Complex64::new(1.0, 0.0) - z.inner(xi)).norm()
}

/// Carleson box `Q_delta(xi) = {z in B : |1 - <z, xi>| < delta}`.
///
/// The same fields describe the sphere cap `Q'_delta(xi)` and the boundary
/// collar `Q^_delta(xi) = {z : z/|z| in Q'_delta(xi), 1 - delta < |z| < 1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CarlesonBox {
    center: CPoint,
    delta: f64,
}

impl CarlesonBox {
    pub fn new(center: CPoint, delta: f64) -> Result<Self> {
        center.require_unit("box center")?;
        if !(delta > 0.0 && delta <= 2.0) {
            return Err(Error::Domain(format!("box radius must lie in (0, 2], got {delta}")));
        }
        Ok(Self { center, delta })
    }

    pub fn center(&self) -> &CPoint {
        &self.center
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    pub fn with_delta(&self, delta: f64) -> Result<Self> {
        Self::new(self.center.clone(), delta)
    }

    pub fn contains(&self, z: &CPoint) -> bool {
        z.norm_sq() < 1.0 && gauge_unchecked(z, &self.center) < self.delta
    }

    /// Membership of a sphere point in the cap `Q'_delta(xi)`.
    pub fn cap_contains(&self, eta: &CPoint) -> bool {
        gauge_unchecked(eta, &self.center) < self.delta
    }

    /// Membership in the collar `Q^_delta(xi)`.
    pub fn collar_contains(&self, z: &CPoint) -> bool {
        let r = z.norm();
        if r <= 1.0 - self.delta || r >= 1.0 || r == 0.0 {
            return false;
        }
        self.cap_contains(&z.scale(1.0 / r))
    }

    /// Exact normalized volume `v(Q_delta(xi))`.
    pub fn volume(&self) -> f64 {
        lens_mass(self.delta, self.dim() as i32 - 1)
    }

    /// Exact normalized surface measure `sigma(Q'_delta(xi))`.
    pub fn cap_measure(&self) -> f64 {
        lens_mass(self.delta, self.dim() as i32 - 2)
    }

    /// Normalized volume of the collar `Q^_delta(xi)`.
    pub fn collar_volume(&self) -> f64 {
        let n = self.dim() as i32;
        let inner = (1.0 - self.delta).max(0.0);
        self.cap_measure() * (1.0 - inner.powi(2 * n))
    }
}

/// `((k+1)/pi) * ∫ (1 - |u|^2)^k dA(u)` over the lens `{|u|<1, |1-u|<delta}`.
///
/// With `k = n - 1` this is `v(Q_delta)`; with `k = n - 2` it is
/// `sigma(Q'_delta)`. The angular integral is done in closed form, the radial
/// one by adaptive quadrature.
pub fn lens_mass(delta: f64, k: i32) -> f64 {
    let tmax = delta.min(2.0);
    if tmax >= 2.0 {
        return 1.0;
    }
    let k_us = k.max(0) as usize;
    let binom = binomials(k_us);
    let inner = |t: f64| -> f64 {
        let theta = (0.5 * t).acos();
        let (s, c) = theta.sin_cos();
        // C_j = ∫_{-Θ}^{Θ} cos^j
        let mut cj = vec![0.0; k_us + 1];
        cj[0] = 2.0 * theta;
        if k_us >= 1 {
            cj[1] = 2.0 * s;
        }
        for j in 2..=k_us {
            let jf = j as f64;
            cj[j] = 2.0 * c.powi(j as i32 - 1) * s / jf + (jf - 1.0) / jf * cj[j - 2];
        }
        let mut acc = 0.0;
        for j in 0..=k_us {
            let sign = if (k_us - j).is_multiple_of(2) { 1.0 } else { -1.0 };
            acc += binom[j] * (2.0 * t).powi(j as i32) * sign * t.powi(2 * (k_us - j) as i32) * cj[j];
        }
        t * acc
    };
    let cfg = QuadConfig {
        rel_tol: 1e-13,
        ..QuadConfig::default()
    };
    let r = integrate_real(|t| Ok(inner(t)), 0.0, tmax, &cfg).expect("lens integrand is smooth and finite");
    ((k as f64 + 1.0) / PI * r.value).min(1.0)
}

fn binomials(k: usize) -> Vec<f64> {
    let mut row = vec![1.0; k + 1];
    for j in 1..k {
        row[j] = row[j - 1] * (k - j + 1) as f64 / j as f64;
    }
    row
}

/// Pseudo-hyperbolic ball `E(z, r) = {w : |phi_z(w)| < r}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PseudoHyperbolicBall {
    center: CPoint,
    radius: f64,
}

impl PseudoHyperbolicBall {
    pub fn new(center: CPoint, radius: f64) -> Result<Self> {
        center.require_open_ball("center")?;
        if !(radius > 0.0 && radius < 1.0) {
            return Err(Error::Domain(format!("pseudo-hyperbolic radius must lie in (0,1), got {radius}")));
        }
        Ok(Self { center, radius })
    }

    pub fn center(&self) -> &CPoint {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn contains(&self, w: &CPoint) -> bool {
        let phi = Automorphism::new(&self.center).expect("center validated at construction");
        w.norm_sq() < 1.0 && phi.apply(w).norm() < self.radius
    }

    /// `v(E(a, r)) = r^{2n} (1-|a|^2)^{n+1} / (1 - r^2 |a|^2)^{n+1}`.
    pub fn volume(&self) -> f64 {
        let n = self.center.dim() as i32;
        let a2 = self.center.norm_sq();
        let r2 = self.radius * self.radius;
        r2.powi(n) * ((1.0 - a2) / (1.0 - r2 * a2)).powi(n + 1)
    }
}
