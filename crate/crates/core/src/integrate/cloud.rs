#![allow(clippy::single_range_in_vec_init)] // strata are lists of index ranges

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Automorphism, CPoint, CarlesonBox, PseudoHyperbolicBall};
use crate::sampling::{Rng, MIN_ACCEPTANCE};

/// Radius splitting the ball into a bulk and a boundary shell.
pub const SHELL_BREAK: f64 = 0.9;

/// Measure a [`SampleCloud`] integrates against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetMeasure {
    /// Normalized volume `dv` on `B`.
    Volume,
    /// `d lambda = (1-|z|^2)^{-n-1} dv`, folded into the weights.
    Invariant,
    /// Normalized surface measure `d sigma` on `S`.
    Surface,
    /// `dv` restricted to a Carleson box.
    Box(CarlesonBox),
    /// `dv` restricted to a collar `Q^_delta(xi)`.
    Collar(CarlesonBox),
    /// `dv` restricted to a pseudo-hyperbolic ball.
    PseudoBall(PseudoHyperbolicBall),
}

/// Weighted point set; `sum_i w_i F(z_i)` estimates `∫ F d(target)`.
///
/// Points are grouped in strata; each stratum is an independent Monte-Carlo
/// sample, which is what the standard error in [`super::integrate`] assumes.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleCloud {
    pub(crate) points: Vec<CPoint>,
    pub(crate) weights: Vec<f64>,
    pub(crate) strata: Vec<Range<usize>>,
    pub(crate) target: TargetMeasure,
    pub(crate) seed: u64,
    pub(crate) trials: u64,
}

impl SampleCloud {
    pub fn points(&self) -> &[CPoint] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn strata(&self) -> &[Range<usize>] {
        &self.strata
    }

    pub fn target(&self) -> &TargetMeasure {
        &self.target
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Fraction of rejection-sampler trials that produced a point (1 when no
    /// rejection was involved).
    pub fn acceptance(&self) -> f64 {
        if self.trials == 0 {
            1.0
        } else {
            self.points.len() as f64 / self.trials as f64
        }
    }

    /// Same points and strata with weights `w_i * factor(z_i)`.
    pub fn reweighted<F>(&self, factor: F) -> SampleCloud
    where
        F: Fn(&CPoint) -> f64,
    {
        let mut out = self.clone();
        for (w, z) in out.weights.iter_mut().zip(&self.points) {
            *w *= factor(z);
        }
        out
    }

    pub(crate) fn with_weights(&self, weights: Vec<f64>) -> SampleCloud {
        debug_assert_eq!(weights.len(), self.points.len());
        SampleCloud {
            weights,
            ..self.clone()
        }
    }

    pub fn total_weight(&self) -> f64 {
        super::pairwise_sum(&self.weights)
    }

    /// Exact measure of the sampled region (without the `d lambda` factor).
    pub fn region_mass(&self) -> f64 {
        match &self.target {
            TargetMeasure::Volume | TargetMeasure::Invariant | TargetMeasure::Surface => 1.0,
            TargetMeasure::Box(b) => b.volume(),
            TargetMeasure::Collar(b) => b.collar_volume(),
            TargetMeasure::PseudoBall(e) => e.volume(),
        }
    }
}

/// Which of the two ball measures [`sample_ball`] targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BallMeasure {
    Dv,
    Dlambda,
}

fn require_count(count: usize) -> Result<()> {
    if count == 0 {
        return Err(Error::InvalidParameter("sample count must be at least 1".into()));
    }
    Ok(())
}

/// Splits `count` between the bulk `|z| < 0.9` and the boundary shell, with
/// twice the proportional density in the shell.
fn shell_allocation(n: usize, count: usize) -> (usize, usize, f64) {
    let outer_mass = 1.0 - SHELL_BREAK.powi(2 * n as i32);
    let inner_mass = 1.0 - outer_mass;
    if count < 2 {
        return (count, 0, 1.0);
    }
    let share = 2.0 * outer_mass / (inner_mass + 2.0 * outer_mass);
    let outer = ((count as f64 * share).round() as usize).clamp(1, count - 1);
    (count - outer, outer, inner_mass)
}

/// Stratified sample of `B` for `dv` or `d lambda`.
///
/// Directions are Gaussian-normalized, radii follow `2n r^{2n-1} dr` inside
/// each stratum. For `d lambda` the factor `(1-|z|^2)^{-n-1}` is carried by
/// the weights, so the integrand must supply enough boundary decay.
pub fn sample_ball(n: usize, count: usize, seed: u64, measure: BallMeasure) -> Result<SampleCloud> {
    require_count(count)?;
    if n == 0 {
        return Err(Error::Domain("dimension must be positive".into()));
    }
    let mut rng = Rng::stream(seed, 1);
    let (n_in, n_out, inner_mass) = shell_allocation(n, count);
    let mut points = Vec::with_capacity(count);
    let mut weights = Vec::with_capacity(count);
    let split = if n_out == 0 { 1.0 } else { SHELL_BREAK };
    for (lo, hi, k, mass) in [(0.0, split, n_in, inner_mass), (split, 1.0, n_out, 1.0 - inner_mass)] {
        for _ in 0..k {
            let r = rng.shell_radius(n, lo, hi);
            let z = rng.sphere_point(n).scale(r);
            let w = mass / k as f64;
            let w = match measure {
                BallMeasure::Dv => w,
                BallMeasure::Dlambda => w * z.defect().powi(-(n as i32) - 1),
            };
            points.push(z);
            weights.push(w);
        }
    }
    let strata = if n_out == 0 {
        vec![0..n_in]
    } else {
        vec![0..n_in, n_in..count]
    };
    Ok(SampleCloud {
        points,
        weights,
        strata,
        target: match measure {
            BallMeasure::Dv => TargetMeasure::Volume,
            BallMeasure::Dlambda => TargetMeasure::Invariant,
        },
        seed,
        trials: 0,
    })
}

/// Uniform `d sigma` sample of the sphere.
pub fn sample_sphere(n: usize, count: usize, seed: u64) -> Result<SampleCloud> {
    require_count(count)?;
    let mut rng = Rng::stream(seed, 2);
    let points: Vec<CPoint> = (0..count).map(|_| rng.sphere_point(n)).collect();
    Ok(SampleCloud {
        weights: vec![1.0 / count as f64; count],
        strata: vec![0..count],
        points,
        target: TargetMeasure::Surface,
        seed,
        trials: 0,
    })
}

/// `dv`-uniform sample of `Q_delta(xi)`; weights sum to `v(Q_delta(xi))`.
///
/// Points are drawn by rejection in the lens coordinates of `<z, xi>`; the
/// acceptance rate is tracked and a rate below `1e-4` is a resolution error.
pub fn sample_box(bx: &CarlesonBox, count: usize, seed: u64) -> Result<SampleCloud> {
    require_count(count)?;
    let mut rng = Rng::stream(seed, 3);
    let mut trials = 0u64;
    let mut points = Vec::with_capacity(count);
    for _ in 0..count {
        let (z, t) = rng.box_point(bx)?;
        trials += t;
        points.push(z);
    }
    let acceptance = count as f64 / trials as f64;
    if acceptance < MIN_ACCEPTANCE {
        return Err(Error::Resolution {
            acceptance,
            threshold: MIN_ACCEPTANCE,
        });
    }
    let mass = bx.volume();
    Ok(SampleCloud {
        weights: vec![mass / count as f64; count],
        strata: vec![0..count],
        points,
        target: TargetMeasure::Box(bx.clone()),
        seed,
        trials,
    })
}

/// `dv`-uniform sample of the collar `Q^_delta(xi)` (cap times radial interval).
pub fn sample_collar(bx: &CarlesonBox, count: usize, seed: u64) -> Result<SampleCloud> {
    require_count(count)?;
    let n = bx.dim();
    let mut rng = Rng::stream(seed, 4);
    let lo = (1.0 - bx.delta()).max(0.0);
    let mut trials = 0u64;
    let mut points = Vec::with_capacity(count);
    for _ in 0..count {
        let (eta, t) = rng.cap_point(bx.center(), bx.delta())?;
        trials += t;
        let r = rng.shell_radius(n, lo, 1.0);
        points.push(eta.scale(r));
    }
    let mass = bx.collar_volume();
    Ok(SampleCloud {
        weights: vec![mass / count as f64; count],
        strata: vec![0..count],
        points,
        target: TargetMeasure::Collar(bx.clone()),
        seed,
        trials,
    })
}

/// `dv` sample of `E(a, r)`: uniform points `u` of the Euclidean ball of
/// radius `r`, mapped by `phi_a`, weighted by the real Jacobian.
pub fn sample_pseudo_ball(e: &PseudoHyperbolicBall, count: usize, seed: u64) -> Result<SampleCloud> {
    require_count(count)?;
    let n = e.center().dim();
    let phi = Automorphism::new(e.center())?;
    let mut rng = Rng::stream(seed, 5);
    let base = e.radius().powi(2 * n as i32) / count as f64;
    let mut points = Vec::with_capacity(count);
    let mut weights = Vec::with_capacity(count);
    for _ in 0..count {
        let u = rng.ball_point(n, e.radius());
        weights.push(base * phi.real_jacobian(&u));
        points.push(phi.apply(&u));
    }
    Ok(SampleCloud {
        points,
        weights,
        strata: vec![0..count],
        target: TargetMeasure::PseudoBall(e.clone()),
        seed,
        trials: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_weights_sum_to_one() {
        let c = sample_ball(2, 1000, 1, BallMeasure::Dv).unwrap();
        assert!((c.total_weight() - 1.0).abs() < 1e-12);
        assert_eq!(c.strata().len(), 2);
        // the shell carries twice its proportional share of points
        let outer = c.strata()[1].len() as f64 / 1000.0;
        let m = 1.0 - 0.9f64.powi(4);
        assert!((outer - 2.0 * m / (1.0 + m)).abs() < 2e-3);
        assert!(c.points().iter().all(|z| z.norm_sq() < 1.0));
    }

    #[test]
    fn single_point_cloud() {
        let c = sample_ball(3, 1, 1, BallMeasure::Dv).unwrap();
        assert_eq!(c.len(), 1);
        assert!((c.total_weight() - 1.0).abs() < 1e-15);
        assert!(sample_ball(2, 0, 1, BallMeasure::Dv).is_err());
    }

    #[test]
    fn box_cloud_members_and_mass() {
        let bx = CarlesonBox::new(CPoint::basis(2, 0), 0.1).unwrap();
        let c = sample_box(&bx, 2000, 9).unwrap();
        assert!(c.points().iter().all(|z| bx.contains(z)));
        assert!((c.total_weight() - bx.volume()).abs() < 1e-15);
        assert!(c.acceptance() > MIN_ACCEPTANCE);
        let col = sample_collar(&bx, 500, 9).unwrap();
        assert!(col.points().iter().all(|z| bx.collar_contains(z)));
    }

    #[test]
    fn pseudo_ball_points_are_members() {
        let e = PseudoHyperbolicBall::new(CPoint::from_reals(&[0.5, 0.3]).unwrap(), 0.4).unwrap();
        let c = sample_pseudo_ball(&e, 2000, 3).unwrap();
        assert!(c.points().iter().all(|z| e.contains(z)));
        let se = c.total_weight() * 0.05;
        assert!((c.total_weight() - e.volume()).abs() < se);
    }
}
