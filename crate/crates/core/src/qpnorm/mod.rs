//! `Q_p` seminorm estimators (invariant-gradient, radial-derivative and box
//! forms), the Bloch norm and the tent-space norm `T_q^inf(mu)`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::carleson::MeasureDensity;
use crate::error::{Error, Result};
use crate::geometry::{green_g, Automorphism, CPoint, CarlesonBox};
use crate::holo::HoloFunction;
use crate::integrate::{
    integrate_with, sample_ball, sample_box, AchievingArg, BallMeasure, ConvergenceConfig, SampleCloud,
};
use crate::quadrature::{integrate_real, QuadConfig};
use crate::search::{search_a, search_boxes, ASearchConfig, BoxSearchConfig, Cell, SearchOutcome};

/// Open interval `((n-1)/n, n/(n-1))` of exponents for which `Q_p` is
/// non-trivial.
pub fn admissible_range(n: usize) -> (f64, f64) {
    let nf = n as f64;
    ((nf - 1.0) / nf, nf / (nf - 1.0))
}

/// Rejects `n < 2` and exponents outside the non-trivial range; outside it
/// `Q_p` contains only the constant functions.
pub fn check_p_range(n: usize, p: f64) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("dimension must be at least 2, got {n}")));
    }
    let (lo, hi) = admissible_range(n);
    if !(p > lo && p < hi) {
        let side = if p <= lo {
            format!("p = {p} <= (n-1)/n = {lo}")
        } else {
            format!("p = {p} >= n/(n-1) = {hi}")
        };
        return Err(Error::InvalidParameter(format!(
            "{side}; for n = {n} Q_p contains only the constant functions unless {lo} < p < {hi}"
        )));
    }
    Ok(())
}

/// Dimension, exponent and numerical policy for the `Q_p` estimators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QpParams {
    n: usize,
    p: f64,
    /// Monte-Carlo points per `a`-cell (one cloud shared by all cells).
    pub samples: usize,
    pub seed: u64,
    pub search: ASearchConfig,
    pub box_search: BoxSearchConfig,
    /// Points per Carleson box in the box form.
    pub box_samples: usize,
    /// Pseudo-hyperbolic radius of the ball excluded around the pole of `G`.
    pub exclusion_radius: f64,
    /// Largest accepted share of the analytic exclusion-ball correction.
    pub exclusion_tolerance: f64,
    pub convergence: ConvergenceConfig,
}

impl QpParams {
    pub fn new(n: usize, p: f64) -> Result<Self> {
        check_p_range(n, p)?;
        Ok(Self {
            n,
            p,
            samples: 200_000,
            seed: 7,
            search: ASearchConfig::default(),
            box_search: BoxSearchConfig::default(),
            box_samples: 20_000,
            exclusion_radius: 0.05,
            exclusion_tolerance: 0.25,
            convergence: ConvergenceConfig::default(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn with_samples(mut self, samples: usize) -> Self {
        self.samples = samples;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QpForm {
    Radial,
    Invariant,
    Box,
}

/// One point of a supremum search profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileEntry {
    pub arg: AchievingArg,
    /// Square root of the cell integral, on the same scale as the seminorm.
    pub value: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub form: QpForm,
    pub seminorm: f64,
    pub stderr: f64,
    /// `|f(0)| + seminorm`.
    pub full_norm: f64,
    pub achieving: Option<AchievingArg>,
    pub profile: Vec<ProfileEntry>,
    pub converged: bool,
    pub samples: usize,
    /// Analytic contribution of the excluded ball around the pole of `G`
    /// (invariant form only), on the squared scale.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exclusion_correction: Option<f64>,
}

/// `sqrt` of an integral estimate with the delta-method standard error.
fn root(value: f64, stderr: f64) -> (f64, f64) {
    let v = value.max(0.0);
    if v == 0.0 {
        (0.0, stderr.sqrt())
    } else {
        (v.sqrt(), stderr / (2.0 * v.sqrt()))
    }
}

fn build_report<T: Clone>(
    form: QpForm,
    f0: f64,
    out: SearchOutcome<T>,
    wrap: impl Fn(T) -> AchievingArg,
    samples: usize,
    exclusion_correction: Option<f64>,
) -> NormReport {
    let (seminorm, stderr) = root(out.best.value, out.best.stderr);
    let profile = out
        .cells
        .into_iter()
        .map(|c: Cell<T>| {
            let (v, s) = root(c.value, c.stderr);
            ProfileEntry {
                arg: wrap(c.arg),
                value: v,
                stderr: s,
            }
        })
        .collect();
    NormReport {
        form,
        seminorm,
        stderr,
        full_norm: f0 + seminorm,
        achieving: Some(wrap(out.best.arg)),
        profile,
        converged: out.best.converged,
        samples,
        exclusion_correction,
    }
}

fn check_dim(f: &HoloFunction, n: usize) -> Result<()> {
    if f.dim() != n {
        return Err(Error::Domain(format!("function has dimension {}, parameters {n}", f.dim())));
    }
    Ok(())
}

fn inner_defect(w: &CPoint, a: &CPoint) -> f64 {
    (Complex64::new(1.0, 0.0) - w.inner(a)).norm_sqr()
}

/// Radial-derivative form. For each `a` the integral
/// `∫ |Rf|^2 (1-|z|^2)^2 (1-|phi_a(z)|^2)^{np} d lambda(z)` is computed after
/// the substitution `z = phi_a(w)`, which turns it into
/// `∫ |Rf(phi_a w)|^2 (1-|a|^2)^2 (1-|w|^2)^{np-n+1} / |1-<w,a>|^4 dv(w)`;
/// one `dv` cloud then serves every `a`.
pub fn qp_radial(f: &HoloFunction, params: &QpParams) -> Result<NormReport> {
    let n = params.n;
    check_dim(f, n)?;
    let cloud = sample_ball(n, params.samples, params.seed, BallMeasure::Dv)?;
    let e = n as f64 * params.p - n as f64 + 1.0;
    let cloud = cloud.reweighted(|w| w.defect().powf(e));
    let out = search_a(n, &params.search, |a| radial_cell(f, a, &cloud, &params.convergence))?;
    let f0 = f.eval(&CPoint::origin(n))?.norm();
    Ok(build_report(QpForm::Radial, f0, out, AchievingArg::Point, cloud.len(), None))
}

fn radial_cell(f: &HoloFunction, a: &CPoint, cloud: &SampleCloud, conv: &ConvergenceConfig) -> Result<(f64, f64, bool)> {
    let phi = Automorphism::new(a)?;
    let c = (1.0 - a.norm_sq()).powi(2);
    let r = integrate_with(
        |w| {
            let rf = f.radial_derivative(&phi.apply(w))?;
            let d = inner_defect(w, a);
            Ok(rf.norm_sqr() * c / (d * d))
        },
        cloud,
        conv,
    )?;
    Ok((r.value, r.stderr, r.converged))
}

/// `∫_0^eps 2n r^{2n-1} g(r)^p (1-r^2)^{-n-1} dr`, the `d lambda`-mass of the
/// excluded ball weighted by `g^p`.
fn exclusion_mass(n: usize, p: f64, eps: f64) -> Result<f64> {
    let k = n as i32;
    let cfg = QuadConfig {
        rel_tol: 1e-8,
        abs_tol: 1e-300,
        max_panels: 4000,
    };
    Ok(integrate_real(
        |r| Ok(2.0 * n as f64 * r.powi(2 * k - 1) * green_g(n, r)?.powf(p) * (1.0 - r * r).powi(-k - 1)),
        0.0,
        eps,
        &cfg,
    )?
    .value)
}

/// Invariant-gradient form `sup_a ∫ |∇~f|^2 G(., a)^p d lambda`.
///
/// After `z = phi_a(w)` the Green factor becomes `g(|w|)^p`, again letting a
/// single cloud serve all `a`. The pole of `g` at `w = 0` is handled by
/// dropping `|w| < eps` from the cloud and adding `|∇~f(a)|^2` times the exact
/// weighted mass of that ball; if that correction exceeds
/// `exclusion_tolerance` of the cell value the estimate is flagged.
pub fn qp_invariant(f: &HoloFunction, params: &QpParams) -> Result<NormReport> {
    let n = params.n;
    check_dim(f, n)?;
    let eps = params.exclusion_radius;
    let base = sample_ball(n, params.samples, params.seed, BallMeasure::Dv)?;
    let factors: Vec<f64> = base
        .points()
        .par_iter()
        .map(|w| {
            let r = w.norm();
            if r < eps {
                Ok(0.0)
            } else {
                Ok(green_g(n, r.min(1.0))?.powf(params.p) * w.defect().powi(-(n as i32) - 1))
            }
        })
        .collect::<Result<_>>()?;
    let weights = base.weights().iter().zip(&factors).map(|(w, f)| w * f).collect();
    let cloud = base.with_weights(weights);
    let ball_mass = exclusion_mass(n, params.p, eps)?;
    let worst_share = std::sync::Mutex::new(0.0f64);
    let out = search_a(n, &params.search, |a| {
        let phi = Automorphism::new(a)?;
        let r = integrate_with(
            |w| f.invariant_gradient_norm_sq(&phi.apply(w)),
            &cloud,
            &params.convergence,
        )?;
        let corr = f.invariant_gradient_norm_sq(a)? * ball_mass;
        let value = r.value + corr;
        let share = if value > 0.0 { corr / value } else { 0.0 };
        let ok = share <= params.exclusion_tolerance;
        let mut w = worst_share.lock().expect("not poisoned");
        *w = w.max(share);
        Ok((value, r.stderr, r.converged && ok))
    })?;
    let f0 = f.eval(&CPoint::origin(n))?.norm();
    let corr = f.invariant_gradient_norm_sq(&out.best.arg)? * ball_mass;
    Ok(build_report(
        QpForm::Invariant,
        f0,
        out,
        AchievingArg::Point,
        cloud.len(),
        Some(corr),
    ))
}

/// Box form `sup_{delta, xi} delta^{-np} ∫_{Q_delta(xi)} |Rf|^2 (1-|z|^2)^{n(p-1)+1} dv`.
pub fn qp_box(f: &HoloFunction, params: &QpParams) -> Result<NormReport> {
    let n = params.n;
    check_dim(f, n)?;
    let e = n as f64 * (params.p - 1.0) + 1.0;
    let np = n as f64 * params.p;
    let out = search_boxes(n, &params.box_search, |bx| {
        box_cell(
            bx,
            params.box_samples,
            params.seed,
            |z| Ok(f.radial_derivative(z)?.norm_sqr() * z.defect().max(0.0).powf(e)),
            bx.delta().powf(-np),
            &params.convergence,
        )
    })?;
    let f0 = f.eval(&CPoint::origin(n))?.norm();
    Ok(build_report(QpForm::Box, f0, out, AchievingArg::Box, params.box_samples, None))
}

/// `scale * ∫_box integrand dv`, returned as (value, stderr, converged).
pub(crate) fn box_cell<F>(
    bx: &CarlesonBox,
    samples: usize,
    seed: u64,
    integrand: F,
    scale: f64,
    conv: &ConvergenceConfig,
) -> Result<(f64, f64, bool)>
where
    F: Fn(&CPoint) -> Result<f64> + Sync,
{
    let cloud = sample_box(bx, samples, seed)?;
    let r = integrate_with(integrand, &cloud, conv)?;
    Ok((scale * r.value, scale * r.stderr, r.converged))
}

/// Sampled `|f(0)| + sup |∇f(z)| (1-|z|^2)`.
pub fn bloch_norm(f: &HoloFunction, samples: usize, seed: u64) -> Result<f64> {
    let n = f.dim();
    let origin = CPoint::origin(n);
    let cloud = sample_ball(n, samples.max(1), seed, BallMeasure::Dv)?;
    let grad_at = |z: &CPoint| -> Result<f64> {
        let g = f.gradient(z)?;
        Ok(g.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt() * z.defect())
    };
    let vals: Vec<f64> = cloud.points().par_iter().map(grad_at).collect::<Result<_>>()?;
    let sup = vals.into_iter().fold(grad_at(&origin)?, f64::max);
    Ok(f.eval(&origin)?.norm() + sup)
}

/// `‖f‖_{T_q^inf(mu)} = (sup delta^{-nq} ∫_{Q_delta(xi)} |f|^2 d mu)^{1/2}`.
pub fn tent_norm(f: &HoloFunction, mu: &MeasureDensity, q: f64, params: &QpParams) -> Result<NormReport> {
    let n = params.n;
    check_dim(f, n)?;
    if mu.dim() != n {
        return Err(Error::Domain("measure and function dimensions differ".into()));
    }
    let nq = n as f64 * q;
    let out = search_boxes(n, &params.box_search, |bx| {
        if mu.is_zero() {
            return Ok((0.0, 0.0, true));
        }
        box_cell(
            bx,
            params.box_samples,
            params.seed,
            |z| Ok(f.eval(z)?.norm_sqr() * mu.density(z)?),
            bx.delta().powf(-nq),
            &params.convergence,
        )
    })?;
    let f0 = f.eval(&CPoint::origin(n))?.norm();
    let mut rep = build_report(QpForm::Box, f0, out, AchievingArg::Box, params.box_samples, None);
    // the tent norm has no |f(0)| term
    rep.full_norm = rep.seminorm;
    Ok(rep)
}
