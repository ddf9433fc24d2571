//! Carleson-measure machinery: densities, box masses, (logarithmic) Carleson
//! constants, the integral characterization and vanishing profiles.

mod measure;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use measure::{mu_qg, MeasureDensity};

use crate::error::{Error, Result};
use crate::geometry::{CPoint, CarlesonBox};
use crate::integrate::{integrate_with, sample_box, AchievingArg, ConvergenceConfig, EstimateReport, SampleCloud, TargetMeasure};
use crate::sampling::{Rng, MIN_ACCEPTANCE};
use crate::search::{delta_profile, direction_net, search_boxes, BoxSearchConfig, Cell};

/// Verdict thresholds for [`vanishing_profile`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VerdictConfig {
    /// Number of trailing profile points that must decrease.
    pub decreasing_points: usize,
    /// The last point must fall below this fraction of the profile maximum.
    pub final_fraction: f64,
    /// A decrement smaller than this many combined standard errors is noise.
    pub noise_sigmas: f64,
}

impl Default for VerdictConfig {
    fn default() -> Self {
        Self {
            decreasing_points: 3,
            final_fraction: 0.1,
            noise_sigmas: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CarlesonConfig {
    pub search: BoxSearchConfig,
    pub box_samples: usize,
    pub seed: u64,
    pub convergence: ConvergenceConfig,
    pub verdict: VerdictConfig,
}

impl Default for CarlesonConfig {
    fn default() -> Self {
        Self {
            search: BoxSearchConfig::dyadic(9, 8, 1),
            box_samples: 4000,
            seed: 11,
            convergence: ConvergenceConfig::default(),
            verdict: VerdictConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VanishingVerdict {
    Vanishing,
    NonVanishing,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaProfileEntry {
    pub delta: f64,
    pub sup_ratio: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CarlesonReport {
    /// Largest box ratio found; equals the maximum of `delta_profile`.
    /// For the logarithmic constant this is `‖mu‖^2_{LCM}`.
    pub constant: f64,
    /// `constant` for `CM_p`, `sqrt(constant)` for `LCM_q`.
    pub norm: f64,
    pub stderr: f64,
    pub achieving_box: CarlesonBox,
    pub delta_profile: Vec<DeltaProfileEntry>,
    pub vanishing_verdict: VanishingVerdict,
    pub converged: bool,
}

/// `mu(Q_delta(xi))` by sampling the box.
pub fn box_mass(mu: &MeasureDensity, bx: &CarlesonBox, samples: usize, seed: u64) -> Result<EstimateReport> {
    if mu.dim() != bx.dim() {
        return Err(Error::Domain("measure and box dimensions differ".into()));
    }
    if mu.is_zero() {
        return Ok(EstimateReport::exact(0.0));
    }
    let cloud = sample_box(bx, samples, seed)?;
    let mut r = integrate_with(|z| mu.density(z), &cloud, &ConvergenceConfig::default())?;
    r.achieving_arg = Some(AchievingArg::Box(bx.clone()));
    Ok(r)
}

fn require_positive(name: &str, x: f64) -> Result<()> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::InvalidParameter(format!("{name} must be positive, got {x}")));
    }
    Ok(())
}

/// Shared box search: `sup mu(Q_delta(xi)) * weight(delta)`.
fn ratio_search<W>(mu: &MeasureDensity, cfg: &CarlesonConfig, search: &BoxSearchConfig, weight: W) -> Result<(Cell<CarlesonBox>, Vec<Cell<CarlesonBox>>)>
where
    W: Fn(f64) -> f64,
{
    let zero = mu.is_zero();
    let out = search_boxes(mu.dim(), search, |bx| {
        if zero {
            return Ok((0.0, 0.0, true));
        }
        let w = weight(bx.delta());
        let cloud = sample_box(bx, cfg.box_samples, cfg.seed)?;
        let r = integrate_with(|z| mu.density(z), &cloud, &cfg.convergence)?;
        Ok((w * r.value, w * r.stderr, r.converged))
    })?;
    Ok((out.best, out.cells))
}

fn profile_entries(cells: &[Cell<CarlesonBox>]) -> Vec<DeltaProfileEntry> {
    delta_profile(cells)
        .into_iter()
        .map(|(delta, sup_ratio, stderr)| DeltaProfileEntry { delta, sup_ratio, stderr })
        .collect()
}

fn report(best: Cell<CarlesonBox>, cells: &[Cell<CarlesonBox>], squared: bool, verdict: &VerdictConfig) -> CarlesonReport {
    let delta_profile = profile_entries(cells);
    let vanishing_verdict = verdict_from_profile(&delta_profile, verdict);
    CarlesonReport {
        constant: best.value,
        norm: if squared { best.value.max(0.0).sqrt() } else { best.value },
        stderr: best.stderr,
        achieving_box: best.arg,
        delta_profile,
        vanishing_verdict,
        converged: best.converged,
    }
}

/// `sup mu(Q_delta(xi)) / delta^{np}`.
pub fn cm_constant(mu: &MeasureDensity, p: f64, cfg: &CarlesonConfig) -> Result<CarlesonReport> {
    require_positive("p", p)?;
    let np = mu.dim() as f64 * p;
    let (best, cells) = ratio_search(mu, cfg, &cfg.search, |d| d.powf(-np))?;
    Ok(report(best, &cells, false, &cfg.verdict))
}

/// `‖mu‖^2_{LCM_q} = sup mu(Q_delta(xi)) (log 2/delta)^2 / delta^{nq}`; the
/// report's `norm` is its square root.
pub fn lcm_constant(mu: &MeasureDensity, q: f64, cfg: &CarlesonConfig) -> Result<CarlesonReport> {
    require_positive("q", q)?;
    let nq = mu.dim() as f64 * q;
    let (best, cells) = ratio_search(mu, cfg, &cfg.search, |d| (2.0 / d).ln().powi(2) * d.powf(-nq))?;
    Ok(report(best, &cells, true, &cfg.verdict))
}

/// The `delta -> sup_xi` LCM ratio on the dyadic grid (no refinement) with a
/// vanishing verdict.
pub fn vanishing_profile(mu: &MeasureDensity, q: f64, cfg: &CarlesonConfig) -> Result<CarlesonReport> {
    require_positive("q", q)?;
    let nq = mu.dim() as f64 * q;
    let search = BoxSearchConfig {
        refinement_rounds: 0,
        ..cfg.search.clone()
    };
    let (best, cells) = ratio_search(mu, cfg, &search, |d| (2.0 / d).ln().powi(2) * d.powf(-nq))?;
    let mut rep = report(best, &cells, true, &cfg.verdict);
    // an unresolved tail never yields a definite verdict
    let tail_unconverged = cells
        .iter()
        .filter(|c| c.arg.delta() <= rep.delta_profile.last().map_or(0.0, |e| e.delta))
        .any(|c| !c.converged);
    if tail_unconverged {
        rep.vanishing_verdict = VanishingVerdict::Inconclusive;
    }
    Ok(rep)
}

/// Verdict from a profile ordered by decreasing `delta`.
pub fn verdict_from_profile(profile: &[DeltaProfileEntry], cfg: &VerdictConfig) -> VanishingVerdict {
    let k = cfg.decreasing_points.max(2);
    if profile.iter().all(|e| e.sup_ratio == 0.0) {
        return VanishingVerdict::Vanishing;
    }
    if profile.len() < k {
        return VanishingVerdict::Inconclusive;
    }
    let max = profile.iter().map(|e| e.sup_ratio).fold(0.0, f64::max);
    let tail = &profile[profile.len() - k..];
    let mut decreasing = true;
    let mut noisy = false;
    for pair in tail.windows(2) {
        let drop = pair[0].sup_ratio - pair[1].sup_ratio;
        let noise = cfg.noise_sigmas * (pair[0].stderr.powi(2) + pair[1].stderr.powi(2)).sqrt();
        if drop <= 0.0 {
            decreasing = false;
        }
        if drop.abs() <= noise {
            noisy = true;
        }
    }
    let last = &tail[k - 1];
    let floor = cfg.final_fraction * max;
    if decreasing && !noisy && last.sup_ratio < floor {
        VanishingVerdict::Vanishing
    } else if last.sup_ratio - cfg.noise_sigmas * last.stderr >= floor {
        // the tail stays clearly above the final fraction, flat or not
        VanishingVerdict::NonVanishing
    } else {
        VanishingVerdict::Inconclusive
    }
}

/// Radii `4^j delta` (clamped at 2) for the dyadic annuli
/// `A_j = Q_{4^j delta} \ Q_{4^{j-1} delta}`, `j = 0..=J`, `J = floor(1 + log_4(2/delta))`.
pub fn annulus_radii(delta: f64) -> Vec<f64> {
    let j_max = (1.0 + (2.0 / delta).ln() / 4f64.ln()).floor() as i32;
    let mut out: Vec<f64> = Vec::new();
    for j in 0..=j_max.max(0) {
        let r = (delta * 4f64.powi(j)).min(2.0);
        if out.last().is_some_and(|&prev| prev >= 2.0) {
            break;
        }
        out.push(r);
    }
    out
}

/// `dv` cloud on `B` stratified by the annuli around `Q_delta(xi)`; stratum
/// masses are exact box-volume differences.
pub fn annulus_cloud(xi: &CPoint, delta: f64, samples: usize, seed: u64) -> Result<SampleCloud> {
    let radii = annulus_radii(delta);
    let per = (samples / radii.len()).max(1);
    let mut rng = Rng::stream(seed, 6);
    let mut points = Vec::with_capacity(per * radii.len());
    let mut weights = Vec::with_capacity(per * radii.len());
    let mut strata = Vec::with_capacity(radii.len());
    let mut trials = 0u64;
    let mut inner_vol = 0.0;
    for (j, &r) in radii.iter().enumerate() {
        let outer = CarlesonBox::new(xi.clone(), r)?;
        let inner = if j > 0 { Some(CarlesonBox::new(xi.clone(), radii[j - 1])?) } else { None };
        let vol = outer.volume();
        let mass = (vol - inner_vol).max(0.0);
        inner_vol = vol;
        let start = points.len();
        let mut got = 0;
        let mut tries = 0u64;
        while got < per {
            let (z, t) = rng.box_point(&outer)?;
            tries += t;
            if inner.as_ref().is_some_and(|b| b.contains(&z)) {
                if tries >= 10_000 && (got as f64) < MIN_ACCEPTANCE * tries as f64 {
                    return Err(Error::Resolution {
                        acceptance: got as f64 / tries as f64,
                        threshold: MIN_ACCEPTANCE,
                    });
                }
                continue;
            }
            points.push(z);
            weights.push(mass / per as f64);
            got += 1;
        }
        trials += tries;
        strata.push(start..points.len());
    }
    Ok(SampleCloud {
        points,
        weights,
        strata,
        target: TargetMeasure::Volume,
        seed,
        trials,
    })
}

/// Grid of `w` for [`lcm_integral_form`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WGrid {
    pub radii: Vec<f64>,
    pub direction_m: usize,
    pub samples: usize,
    pub seed: u64,
}

impl Default for WGrid {
    fn default() -> Self {
        Self {
            radii: vec![0.0, 0.5, 0.75, 0.9, 0.95, 0.99],
            direction_m: 2,
            samples: 20_000,
            seed: 13,
        }
    }
}

/// `sup_w log^2(2/(1-|w|^2)) ∫_B (1-|w|^2)^s / |1-<z,w>|^{nq+s} d mu(z)`,
/// each integral estimated on a cloud stratified by the dyadic annuli of
/// `Q_{1-|w|}(w/|w|)`.
pub fn lcm_integral_form(mu: &MeasureDensity, q: f64, s: f64, grid: &WGrid) -> Result<EstimateReport> {
    require_positive("q", q)?;
    require_positive("s", s)?;
    let n = mu.dim();
    let e = n as f64 * q + s;
    let dirs = direction_net(n, grid.direction_m)?;
    let conv = ConvergenceConfig::default();
    let mut best: Option<EstimateReport> = None;
    let mut samples = 0usize;
    let mut all_converged = true;
    for &r in &grid.radii {
        if !(0.0..1.0).contains(&r) {
            return Err(Error::InvalidParameter(format!("w radius must lie in [0, 1), got {r}")));
        }
        let ds: Vec<CPoint> = if r == 0.0 { vec![CPoint::basis(n, 0)] } else { dirs.clone() };
        for xi in ds {
            let w = xi.scale(r);
            let defect = 1.0 - r * r;
            let lg = (2.0 / defect).ln().powi(2);
            let rep = if mu.is_zero() {
                EstimateReport::exact(0.0)
            } else {
                let cloud = annulus_cloud(&xi, 1.0 - r, grid.samples, grid.seed)?;
                samples += cloud.len();
                let mut rep = integrate_with(
                    |z| {
                        let d = (Complex64::new(1.0, 0.0) - z.inner(&w)).norm();
                        Ok(mu.density(z)? * defect.powf(s) / d.powf(e))
                    },
                    &cloud,
                    &conv,
                )?;
                rep.value *= lg;
                rep.stderr *= lg;
                rep
            };
            all_converged &= rep.converged;
            let better = best.as_ref().is_none_or(|b| rep.value > b.value);
            if better {
                best = Some(EstimateReport {
                    achieving_arg: Some(AchievingArg::Point(w)),
                    ..rep
                });
            }
        }
    }
    let mut out = best.ok_or_else(|| Error::InvalidParameter("empty w grid".into()))?;
    out.samples = samples;
    out.converged = out.converged && all_converged;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::holo::HoloFunction;

    fn quick() -> CarlesonConfig {
        CarlesonConfig {
            search: BoxSearchConfig::dyadic(5, 2, 0),
            box_samples: 1000,
            ..CarlesonConfig::default()
        }
    }

    #[test]
    fn zero_measure() {
        let z = MeasureDensity::Zero { n: 2 };
        let cfg = quick();
        assert_eq!(cm_constant(&z, 1.0, &cfg).unwrap().constant, 0.0);
        assert_eq!(lcm_constant(&z, 1.0, &cfg).unwrap().constant, 0.0);
        assert_eq!(vanishing_profile(&z, 1.0, &cfg).unwrap().vanishing_verdict, VanishingVerdict::Vanishing);
        assert_eq!(lcm_integral_form(&z, 1.0, 1.0, &WGrid::default()).unwrap().value, 0.0);
    }

    #[test]
    fn full_box_mass_is_total_mass() {
        let dv = MeasureDensity::Lebesgue { n: 2 };
        let bx = CarlesonBox::new(CPoint::basis(2, 0), 2.0).unwrap();
        let r = box_mass(&dv, &bx, 1000, 1).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lebesgue_cm_profile_is_exact_volume_ratio() {
        let dv = MeasureDensity::Lebesgue { n: 2 };
        let rep = cm_constant(&dv, 1.0, &quick()).unwrap();
        for e in &rep.delta_profile {
            let v = CarlesonBox::new(CPoint::basis(2, 0), e.delta).unwrap().volume();
            assert!((e.sup_ratio - v / (e.delta * e.delta)).abs() < 1e-12 * e.sup_ratio.max(1.0));
        }
        let m = rep.delta_profile.iter().map(|e| e.sup_ratio).fold(0.0, f64::max);
        assert_eq!(m, rep.constant);
    }

    #[test]
    fn annuli_cover_the_ball() {
        let radii = annulus_radii(0.01);
        assert_eq!(*radii.last().unwrap(), 2.0);
        assert_eq!(radii[0], 0.01);
        let cloud = annulus_cloud(&CPoint::basis(2, 0), 0.01, 6000, 3).unwrap();
        assert!((cloud.total_weight() - 1.0).abs() < 1e-12);
        assert_eq!(cloud.strata().len(), radii.len());
    }

    #[test]
    fn w_zero_term_is_log2_squared_times_mass() {
        let mu = mu_qg(HoloFunction::coordinate(2, 0), 1.0).unwrap();
        let grid = WGrid {
            radii: vec![0.0],
            samples: 40_000,
            ..WGrid::default()
        };
        let r = lcm_integral_form(&mu, 1.0, 1.0, &grid).unwrap();
        // ∫ |z_1|^2 (1-|z|^2) dv = 1/12 for n = 2
        let expect = 2f64.ln().powi(2) / 12.0;
        assert!((r.value - expect).abs() < 4.0 * r.stderr + 1e-12, "{} vs {expect} ± {}", r.value, r.stderr);
    }

    #[test]
    fn verdict_rules() {
        let mk = |v: &[f64]| -> Vec<DeltaProfileEntry> {
            v.iter()
                .enumerate()
                .map(|(i, &x)| DeltaProfileEntry {
                    delta: 2f64.powi(-(i as i32)),
                    sup_ratio: x,
                    stderr: 1e-4,
                })
                .collect()
        };
        let cfg = VerdictConfig::default();
        assert_eq!(verdict_from_profile(&mk(&[1.0, 0.5, 0.2, 0.05]), &cfg), VanishingVerdict::Vanishing);
        assert_eq!(verdict_from_profile(&mk(&[1.0, 1.0, 1.0, 1.0]), &cfg), VanishingVerdict::NonVanishing);
        assert_eq!(verdict_from_profile(&mk(&[1.0, 0.9, 1.2, 1.5]), &cfg), VanishingVerdict::NonVanishing);
        assert_eq!(verdict_from_profile(&mk(&[1.0, 0.9, 0.8, 0.7]), &cfg), VanishingVerdict::NonVanishing);
    }
}
