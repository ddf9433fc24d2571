//! Seeded random point generators on the ball, the sphere, sphere caps and
//! Carleson boxes.
//!
//! Every generator draws from a [`Rng`] (ChaCha8), so identical seeds give
//! bit-identical point streams on every platform.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::geometry::{CPoint, CarlesonBox};

/// Acceptance rate below which rejection samplers give up.
pub const MIN_ACCEPTANCE: f64 = 1e-4;

/// Deterministic random source.
#[derive(Debug, Clone)]
pub struct Rng {
    inner: ChaCha8Rng,
}

impl Rng {
    pub fn seeded(seed: u64) -> Self {
        Self {
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Independent stream derived from `seed` and a stream index.
    pub fn stream(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self { inner }
    }

    /// Uniform in the open interval `(0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        loop {
            let u: f64 = self.inner.random();
            if u > 0.0 {
                return u;
            }
        }
    }

    pub fn normal(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    fn gaussian_vector(&mut self, n: usize) -> CPoint {
        CPoint::unchecked((0..n).map(|_| Complex64::new(self.normal(), self.normal())))
    }

    /// Uniform (`d sigma`) point of the unit sphere of `C^n`.
    pub fn sphere_point(&mut self, n: usize) -> CPoint {
        loop {
            let g = self.gaussian_vector(n);
            let r = g.norm();
            if r > 1e-300 {
                return g.scale(1.0 / r);
            }
        }
    }

    /// Radius of a `dv`-uniform point conditioned on `lo <= |z| < hi`.
    pub fn shell_radius(&mut self, n: usize, lo: f64, hi: f64) -> f64 {
        let e = 2.0 * n as f64;
        let (a, b) = (lo.powf(e), hi.powf(e));
        (a + self.uniform() * (b - a)).powf(1.0 / e)
    }

    /// `dv`-uniform point of the ball of radius `radius` (`radius <= 1`).
    pub fn ball_point(&mut self, n: usize, radius: f64) -> CPoint {
        let r = radius * self.shell_radius(n, 0.0, 1.0);
        self.sphere_point(n).scale(r)
    }

    /// Uniform unit vector orthogonal to the unit vector `xi`.
    pub fn orthogonal_unit(&mut self, xi: &CPoint) -> CPoint {
        loop {
            let g = self.gaussian_vector(xi.dim());
            let proj = g.inner(xi);
            let v = &g - &xi.scale_complex(proj);
            let r = v.norm();
            if r > 1e-12 {
                return v.scale(1.0 / r);
            }
        }
    }

    /// Point `u` of the lens `{|u| < 1, |1 - u| < delta}` with density
    /// proportional to `(1 - |u|^2)^k` against area measure.
    ///
    /// Works in polar coordinates about `1`: `u = 1 - t e^{i theta}`, where the
    /// lens is `0 < t < delta`, `cos theta > t/2`, and the density becomes
    /// `t (2 t cos theta - t^2)^k`. Returns the point and the number of trials.
    pub fn lens_point(&mut self, delta: f64, k: i32) -> Result<(Complex64, u64)> {
        let tmax = delta.min(2.0);
        let kf = k as f64;
        let t_star = 2.0 * (kf + 1.0) / (2.0 * kf + 1.0);
        let tt = tmax.min(t_star);
        let envelope = tt * (2.0 * tt - tt * tt).powi(k);
        let mut trials = 0u64;
        loop {
            trials += 1;
            let t = tmax * self.uniform();
            let theta = PI * (self.uniform() - 0.5);
            let c = theta.cos();
            if c > 0.5 * t {
                let dens = t * (2.0 * t * c - t * t).powi(k);
                if self.uniform() * envelope < dens {
                    let u = Complex64::new(1.0 - t * c, -t * theta.sin());
                    if u.norm_sqr() < 1.0 {
                        return Ok((u, trials));
                    }
                }
            }
            if trials >= 1_000_000 {
                return Err(Error::Resolution {
                    acceptance: 1.0 / trials as f64,
                    threshold: MIN_ACCEPTANCE,
                });
            }
        }
    }

    /// Uniform `d sigma` point of the cap `Q'_delta(xi)`; returns the trial count.
    pub fn cap_point(&mut self, xi: &CPoint, delta: f64) -> Result<(CPoint, u64)> {
        let n = xi.dim();
        // <eta, xi> has density ∝ (1 - |w|^2)^{n-2} on the disc.
        let (w, trials) = self.lens_point(delta, n as i32 - 2)?;
        let rest = (1.0 - w.norm_sqr()).max(0.0).sqrt();
        let eta = if n == 1 {
            CPoint::unchecked([w])
        } else {
            let v = self.orthogonal_unit(xi);
            &xi.scale_complex(w) + &v.scale(rest)
        };
        Ok((eta, trials))
    }

    /// `dv`-uniform point of the Carleson box `Q_delta(xi)`; returns the trial count.
    pub fn box_point(&mut self, bx: &CarlesonBox) -> Result<(CPoint, u64)> {
        let xi = bx.center();
        let n = xi.dim();
        // <z, xi> has density ∝ (1 - |u|^2)^{n-1}; the orthogonal part is
        // uniform in the ball of radius sqrt(1 - |u|^2).
        let (u, trials) = self.lens_point(bx.delta(), n as i32 - 1)?;
        let room = (1.0 - u.norm_sqr()).max(0.0).sqrt();
        let z = if n == 1 {
            CPoint::unchecked([u])
        } else {
            let rho = self.uniform().powf(1.0 / (2.0 * (n as f64 - 1.0)));
            let v = self.orthogonal_unit(xi);
            &xi.scale_complex(u) + &v.scale(room * rho)
        };
        Ok((z, trials))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible() {
        let mut a = Rng::seeded(5);
        let mut b = Rng::seeded(5);
        for _ in 0..10 {
            assert_eq!(a.sphere_point(3), b.sphere_point(3));
        }
        let mut c = Rng::stream(5, 1);
        assert_ne!(Rng::seeded(5).uniform(), c.uniform());
    }

    #[test]
    fn box_points_are_members() {
        let mut rng = Rng::seeded(1);
        let xi = rng.sphere_point(2);
        for &delta in &[2.0, 0.5, 0.01, 1e-4] {
            let bx = CarlesonBox::new(xi.clone(), delta).unwrap();
            for _ in 0..500 {
                let (z, _) = rng.box_point(&bx).unwrap();
                assert!(z.norm_sq() < 1.0);
                assert!(bx.contains(&z), "delta {delta}");
            }
        }
    }

    #[test]
    fn cap_points_are_on_sphere_and_in_cap() {
        let mut rng = Rng::seeded(2);
        let xi = rng.sphere_point(3);
        for _ in 0..500 {
            let (eta, _) = rng.cap_point(&xi, 0.3).unwrap();
            assert!((eta.norm() - 1.0).abs() < 1e-12);
            assert!(crate::geometry::noniso_gauge(&eta, &xi).unwrap() < 0.3);
        }
    }

    #[test]
    fn shell_radius_respects_bounds() {
        let mut rng = Rng::seeded(3);
        for _ in 0..1000 {
            let r = rng.shell_radius(2, 0.9, 1.0);
            assert!((0.9..=1.0).contains(&r));
        }
    }
}
