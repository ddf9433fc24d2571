//! Monte-Carlo integration over the ball, the sphere, Carleson boxes and
//! pseudo-hyperbolic balls, plus ray integrals and the kernel transform.

mod cloud;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use cloud::{
    sample_ball, sample_box, sample_collar, sample_pseudo_ball, sample_sphere, BallMeasure, SampleCloud,
    TargetMeasure, SHELL_BREAK,
};

use crate::error::{Error, Result};
use crate::geometry::{CPoint, CarlesonBox};
use crate::holo::{ray_quadrature, HoloFunction};

/// Largest tolerated fraction of sample points lost to integrand poles.
pub const MAX_EXCLUDED_FRACTION: f64 = 1e-3;

/// Where a supremum estimate was attained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AchievingArg {
    Point(CPoint),
    Box(CarlesonBox),
}

/// Convergence policy for Monte-Carlo estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConvergenceConfig {
    /// `stderr / |value|` at or below which an estimate counts as converged.
    pub rel_stderr: f64,
    /// Values at or below this magnitude count as converged regardless.
    pub abs_floor: f64,
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        Self {
            rel_stderr: 0.05,
            abs_floor: 1e-12,
        }
    }
}

impl ConvergenceConfig {
    pub fn judge(&self, value: f64, stderr: f64) -> bool {
        value.abs() <= self.abs_floor || stderr <= self.rel_stderr * value.abs()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub value: f64,
    pub stderr: f64,
    pub samples: usize,
    pub achieving_arg: Option<AchievingArg>,
    pub converged: bool,
    #[serde(default)]
    pub excluded: usize,
}

impl EstimateReport {
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            stderr: 0.0,
            samples: 0,
            achieving_arg: None,
            converged: true,
            excluded: 0,
        }
    }
}

/// Pairwise (cascade) summation in a fixed order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const BLOCK: usize = 32;
    if xs.len() <= BLOCK {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Per-point contributions `w_i F(z_i)`, with poles reported as `None`.
fn contributions<F>(f: &F, cloud: &SampleCloud) -> Result<Vec<Option<f64>>>
where
    F: Fn(&CPoint) -> Result<f64> + Sync,
{
    cloud
        .points
        .par_iter()
        .zip(cloud.weights.par_iter())
        .map(|(z, &w)| match f(z) {
            Ok(v) => Ok(Some(w * v)),
            Err(Error::Pole(_)) => Ok(None),
            Err(e) => Err(e),
        })
        .collect()
}

/// Stratified estimate of `∫ F d(target)` with its standard error.
///
/// Evaluation runs in parallel; the reduction is a fixed-order pairwise sum so
/// the result is bit-identical for a given cloud. Points where `F` reports a
/// pole contribute nothing and are counted; more than 0.1% of them is an error.
pub fn integrate<F>(f: F, cloud: &SampleCloud) -> Result<EstimateReport>
where
    F: Fn(&CPoint) -> Result<f64> + Sync,
{
    integrate_with(f, cloud, &ConvergenceConfig::default())
}

pub fn integrate_with<F>(f: F, cloud: &SampleCloud, cfg: &ConvergenceConfig) -> Result<EstimateReport>
where
    F: Fn(&CPoint) -> Result<f64> + Sync,
{
    let raw = contributions(&f, cloud)?;
    let excluded = raw.iter().filter(|c| c.is_none()).count();
    if excluded as f64 > MAX_EXCLUDED_FRACTION * raw.len() as f64 {
        return Err(Error::TooManyExclusions {
            excluded,
            total: raw.len(),
            limit_fraction: MAX_EXCLUDED_FRACTION,
        });
    }
    let vals: Vec<f64> = raw.into_iter().map(|c| c.unwrap_or(0.0)).collect();
    let (value, variance) = stratified_sum(&vals, cloud);
    let stderr = variance.sqrt();
    Ok(EstimateReport {
        value,
        stderr,
        samples: vals.len(),
        achieving_arg: None,
        converged: cfg.judge(value, stderr),
        excluded,
    })
}

/// Sum and variance of a stratified estimator from per-point contributions.
pub(crate) fn stratified_sum(vals: &[f64], cloud: &SampleCloud) -> (f64, f64) {
    let mut total = 0.0;
    let mut variance = 0.0;
    for s in &cloud.strata {
        let part = &vals[s.clone()];
        let k = part.len();
        if k == 0 {
            continue;
        }
        let sum = pairwise_sum(part);
        total += sum;
        if k > 1 {
            let mean = sum / k as f64;
            let dev: Vec<f64> = part.iter().map(|v| (v - mean) * (v - mean)).collect();
            variance += k as f64 / (k as f64 - 1.0) * pairwise_sum(&dev);
        }
    }
    (total, variance)
}

/// `∫_0^1 h(tz) dt/t`.
///
/// Polynomials use the exact term-wise rule `sum c_alpha z^alpha / |alpha|`;
/// other functions use adaptive Gauss-Kronrod quadrature (interior nodes
/// only, so the removable singularity at `t = 0` is never evaluated).
pub fn ray_integral(h: &HoloFunction, z: &CPoint) -> Result<Complex64> {
    if let Some(p) = h.to_polynomial() {
        return Ok(p.ray_integral()?.eval(z));
    }
    let h0 = h.eval(&CPoint::origin(h.dim()))?;
    if h0.norm() > 1e-14 {
        return Err(Error::Contract(format!(
            "ray integral requires h(0) = 0, got |h(0)| = {:.3e}",
            h0.norm()
        )));
    }
    ray_integral_quadrature(h, z)
}

/// Quadrature path of [`ray_integral`], also for polynomials (used to
/// cross-check the exact rule).
pub fn ray_integral_quadrature(h: &HoloFunction, z: &CPoint) -> Result<Complex64> {
    ray_quadrature(|t| h.eval(&z.scale(t)))
}

/// Monte-Carlo value of
/// `∫_B h(w) (1-|w|^2)^s / |1 - <z, w>|^{n+1+s} dv(w)` over a `dv` cloud.
pub fn kernel_transform<H>(h: H, s: f64, z: &CPoint, cloud: &SampleCloud) -> Result<EstimateReport>
where
    H: Fn(&CPoint) -> Result<f64> + Sync,
{
    if s <= -1.0 {
        return Err(Error::InvalidParameter(format!("kernel transform needs s > -1, got {s}")));
    }
    if cloud.target != TargetMeasure::Volume {
        return Err(Error::InvalidParameter("kernel transform integrates against a dv cloud".into()));
    }
    z.require_open_ball("z")?;
    let e = z.dim() as f64 + 1.0 + s;
    integrate(
        |w| {
            let d = (Complex64::new(1.0, 0.0) - w.inner(z)).norm();
            Ok(h(w)? * w.defect().powf(s) / d.powf(e))
        },
        cloud,
    )
}
