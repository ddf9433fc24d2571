//! Riemann-Stieltjes operators `T_g`, `L_g` and the multiplier `M_g`, with
//! the boundedness certificate and the compactness probe built on them.

mod identities;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::carleson::{lcm_constant, mu_qg, CarlesonConfig};
use crate::error::{Error, Result};
use crate::geometry::{CPoint, UNIT_TOL};
use crate::holo::{hinf_norm_estimate, AnalyticKernel, HinfConfig, HinfEstimate, HoloFunction, PowerSeriesFunction, RsKind};
use crate::qpnorm::{qp_radial, NormReport, QpParams};
use crate::search::ASearchConfig;

pub use identities::{identity_suite, IdentityConfig, IdentityReport, IdentityResidual};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    Tg,
    Lg,
    Mg,
}

impl std::str::FromStr for OperatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tg" => Ok(Self::Tg),
            "lg" => Ok(Self::Lg),
            "mg" => Ok(Self::Mg),
            other => Err(Error::InvalidParameter(format!("unknown operator kind {other:?} (tg, lg, mg)"))),
        }
    }
}

/// An operator `Q_p -> Q_q` with symbol `g`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorSpec {
    pub kind: OperatorKind,
    pub g: HoloFunction,
    p: f64,
    q: f64,
}

impl OperatorSpec {
    /// Requires `(n-1)/n < p <= q < n/(n-1)`.
    pub fn new(kind: OperatorKind, g: HoloFunction, p: f64, q: f64) -> Result<Self> {
        let n = g.dim();
        crate::qpnorm::check_p_range(n, p)?;
        crate::qpnorm::check_p_range(n, q)?;
        if p > q {
            return Err(Error::InvalidParameter(format!("source exponent p = {p} exceeds target q = {q}")));
        }
        Ok(Self { kind, g, p, q })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn dim(&self) -> usize {
        self.g.dim()
    }

    /// `q < 1`: the compactness characterization for `T_g` is not settled there.
    pub fn open_case(&self) -> bool {
        self.kind == OperatorKind::Tg && self.q < 1.0
    }

    pub fn apply(&self, f: &HoloFunction) -> Result<HoloFunction> {
        match self.kind {
            OperatorKind::Tg => tg_apply(&self.g, f),
            OperatorKind::Lg => lg_apply(&self.g, f),
            OperatorKind::Mg => mg_apply(&self.g, f),
        }
    }
}

fn rs_apply(kind: RsKind, g: &HoloFunction, f: &HoloFunction) -> Result<HoloFunction> {
    if g.dim() != f.dim() {
        return Err(Error::Domain("symbol and function have different dimensions".into()));
    }
    if let (Some(gp), Some(fp)) = (g.to_polynomial(), f.to_polynomial()) {
        // sum_{gamma != 0} c_gamma / |gamma| z^gamma
        let h = match kind {
            RsKind::Tg => fp.mul(&gp.radial())?,
            RsKind::Lg => gp.mul(&fp.radial())?,
        };
        return Ok(HoloFunction::Polynomial(h.ray_divide()));
    }
    HoloFunction::riemann_stieltjes(kind, g.clone(), f.clone())
}

/// `T_g f(z) = ∫_0^1 f(tz) Rg(tz) dt/t`; exact for polynomials, otherwise a
/// ray-quadrature node.
pub fn tg_apply(g: &HoloFunction, f: &HoloFunction) -> Result<HoloFunction> {
    rs_apply(RsKind::Tg, g, f)
}

/// `L_g f(z) = ∫_0^1 g(tz) Rf(tz) dt/t`.
pub fn lg_apply(g: &HoloFunction, f: &HoloFunction) -> Result<HoloFunction> {
    rs_apply(RsKind::Lg, g, f)
}

/// `M_g f = g f`.
pub fn mg_apply(g: &HoloFunction, f: &HoloFunction) -> Result<HoloFunction> {
    if g.dim() != f.dim() {
        return Err(Error::Domain("symbol and function have different dimensions".into()));
    }
    if let (Some(gp), Some(fp)) = (g.to_polynomial(), f.to_polynomial()) {
        return Ok(HoloFunction::Polynomial(gp.mul(&fp)?));
    }
    HoloFunction::product(vec![g.clone(), f.clone()])
}

/// `g(0) f(0) + T_g f + L_g f`, which equals `M_g f`.
pub fn mg_decomposition(g: &HoloFunction, f: &HoloFunction) -> Result<HoloFunction> {
    let n = g.dim();
    let (t, l) = (tg_apply(g, f)?, lg_apply(g, f)?);
    if let (Some(gp), Some(fp), Some(tp), Some(lp)) = (g.to_polynomial(), f.to_polynomial(), t.to_polynomial(), l.to_polynomial()) {
        let c = PowerSeriesFunction::constant(n, gp.constant_term() * fp.constant_term());
        return Ok(HoloFunction::Polynomial(c.add(&tp)?.add(&lp)?));
    }
    let o = CPoint::origin(n);
    let c = HoloFunction::constant(n, g.eval(&o)? * f.eval(&o)?)?;
    HoloFunction::sum(vec![c, t, l])
}

/// Numerical policy shared by the certificate and the probe. Thresholds are
/// artifact policy, not constants from the theory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OperatorConfig {
    /// `dv` points behind every `Q_p`/`Q_q` estimate.
    pub samples: usize,
    pub seed: u64,
    pub search: ASearchConfig,
    pub hinf: HinfConfig,
    pub carleson: CarlesonConfig,
    /// Compact when the last probe value is below this share of the first.
    pub decay_fraction: f64,
    /// `max/min` bound on `‖f_j‖_{Q_p}` across the probe sequence.
    pub bracket_factor: f64,
    /// Certificate ratio growth (last row over first) read as blow-up.
    pub growth_factor: f64,
    /// Standard errors the floor must keep away from zero.
    pub floor_sigmas: f64,
}

impl Default for OperatorConfig {
    fn default() -> Self {
        Self {
            samples: 200_000,
            seed: 7,
            search: ASearchConfig::default(),
            hinf: HinfConfig::default(),
            carleson: CarlesonConfig::default(),
            decay_fraction: 0.2,
            bracket_factor: 4.0,
            growth_factor: 4.0,
            floor_sigmas: 3.0,
        }
    }
}

impl OperatorConfig {
    fn params(&self, n: usize, p: f64) -> Result<QpParams> {
        let mut qp = QpParams::new(n, p)?.with_samples(self.samples).with_seed(self.seed);
        qp.search = self.search.clone();
        Ok(qp)
    }
}

/// Default deltas of the compactness probe.
pub const PROBE_DELTAS: [f64; 5] = [0.4, 0.2, 0.1, 0.05, 0.025];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProbeMode {
    Certify,
    Probe,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OperatorVerdict {
    ConsistentWithBounded,
    BlowUpDetected,
    NotBounded,
    ConsistentWithCompact,
    NonCompactWitness,
    Inconclusive,
    /// Parameters where the theory gives no compactness criterion; data only.
    OpenCase,
}

/// Measure-side quantities of the certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureSide {
    /// `‖mu_{q,g}‖_{LCM_q}` (square-rooted) for `T_g`, `M_g`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lcm_norm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lcm_converged: Option<bool>,
    /// `‖g‖_{H^inf}` estimate for `L_g`, `M_g`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hinf: Option<HinfEstimate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioRow {
    pub label: String,
    pub source_norm: f64,
    pub source_stderr: f64,
    pub target_norm: f64,
    pub target_stderr: f64,
    /// `‖Op f‖_{Q_q} / ‖f‖_{Q_p}` on full norms.
    pub ratio: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceEntry {
    pub j: usize,
    pub delta: f64,
    pub qp_norm_fj: f64,
    pub qp_stderr: f64,
    pub qq_norm_opfj: f64,
    pub stderr: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub mode: ProbeMode,
    pub kind: OperatorKind,
    pub n: usize,
    pub p: f64,
    pub q: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure_side: Option<MeasureSide>,
    pub rows: Vec<RatioRow>,
    pub sequence: Vec<SequenceEntry>,
    /// `max/min` of `‖f_j‖_{Q_p}` over the sequence.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fj_bracket: Option<f64>,
    /// Smallest `‖Op f_j‖_{Q_q}` and its standard error.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub floor: Option<(f64, f64)>,
    /// Deltas dropped because their estimates could not be resolved.
    pub truncated: Vec<f64>,
    pub verdict: OperatorVerdict,
    pub annotations: Vec<String>,
    pub converged: bool,
}

/// Source and target norms of one suite member.
fn norm_pair(spec: &OperatorSpec, f: &HoloFunction, cfg: &OperatorConfig) -> Result<(NormReport, NormReport)> {
    let n = spec.dim();
    let src = qp_radial(f, &cfg.params(n, spec.p)?)?;
    let image = spec.apply(f)?;
    let dst = qp_radial(&image, &cfg.params(n, spec.q)?)?;
    Ok((src, dst))
}

fn ratio_verdict(rows: &[RatioRow], growth: f64) -> OperatorVerdict {
    let (Some(first), Some(last)) = (rows.first(), rows.last()) else {
        return OperatorVerdict::Inconclusive;
    };
    if rows.iter().all(|r| r.ratio == 0.0) {
        return OperatorVerdict::ConsistentWithBounded;
    }
    if first.ratio == 0.0 || last.ratio > growth * first.ratio {
        OperatorVerdict::BlowUpDetected
    } else {
        OperatorVerdict::ConsistentWithBounded
    }
}

/// Measure-side quantities paired with the ratio table over `suite`, which
/// should be ordered by increasing boundary concentration.
pub fn boundedness_certificate(spec: &OperatorSpec, suite: &[(String, HoloFunction)], cfg: &OperatorConfig) -> Result<ProbeReport> {
    let n = spec.dim();
    if suite.iter().any(|(_, f)| f.dim() != n) {
        return Err(Error::Domain("suite function dimension differs from the symbol".into()));
    }
    let mut side = MeasureSide {
        lcm_norm: None,
        lcm_converged: None,
        hinf: None,
    };
    if matches!(spec.kind, OperatorKind::Tg | OperatorKind::Mg) {
        let mu = mu_qg(spec.g.clone(), spec.q)?;
        let rep = lcm_constant(&mu, spec.q, &cfg.carleson)?;
        side.lcm_norm = Some(rep.norm);
        side.lcm_converged = Some(rep.converged);
    }
    if matches!(spec.kind, OperatorKind::Lg | OperatorKind::Mg) {
        side.hinf = Some(hinf_norm_estimate(&spec.g, &cfg.hinf)?);
    }

    let pairs: Vec<Result<(NormReport, NormReport)>> = suite.par_iter().map(|(_, f)| norm_pair(spec, f, cfg)).collect();
    let mut rows = Vec::with_capacity(suite.len());
    for ((label, _), pair) in suite.iter().zip(pairs) {
        let (src, dst) = pair?;
        let ratio = if src.full_norm > 0.0 { dst.full_norm / src.full_norm } else { 0.0 };
        rows.push(RatioRow {
            label: label.clone(),
            source_norm: src.full_norm,
            source_stderr: src.stderr,
            target_norm: dst.full_norm,
            target_stderr: dst.stderr,
            ratio,
            converged: src.converged && dst.converged,
        });
    }

    let mut annotations = Vec::new();
    let hinf_infinite = side.hinf.is_some_and(|h| h.exceeded_cap);
    let verdict = if hinf_infinite {
        annotations.push(format!("symbol exceeds the H^inf cap {}", cfg.hinf.cap));
        OperatorVerdict::NotBounded
    } else {
        ratio_verdict(&rows, cfg.growth_factor)
    };
    let converged = rows.iter().all(|r| r.converged) && side.lcm_converged.unwrap_or(true);
    Ok(ProbeReport {
        mode: ProbeMode::Certify,
        kind: spec.kind,
        n,
        p: spec.p,
        q: spec.q,
        measure_side: Some(side),
        rows,
        sequence: Vec::new(),
        fj_bracket: None,
        floor: None,
        truncated: Vec::new(),
        verdict,
        annotations,
        converged,
    })
}

/// The normalized squared logarithms `f_j` concentrating at `xi`.
pub fn probe_sequence(xi: &CPoint, deltas: &[f64]) -> Result<Vec<HoloFunction>> {
    if (xi.norm() - 1.0).abs() > UNIT_TOL {
        return Err(Error::Domain("probe point must lie on the sphere".into()));
    }
    if deltas.is_empty() {
        return Err(Error::InvalidParameter("probe needs at least one delta".into()));
    }
    if deltas.windows(2).any(|w| w[1] >= w[0]) || deltas.iter().any(|&d| !(d > 0.0 && d < 1.0)) {
        return Err(Error::InvalidParameter("probe deltas must decrease within (0, 1)".into()));
    }
    deltas
        .iter()
        .map(|&d| Ok(HoloFunction::Kernel(AnalyticKernel::boundary_squared_log(xi, d)?)))
        .collect()
}

fn unresolved(e: &Error) -> bool {
    matches!(e, Error::Resolution { .. } | Error::TooManyExclusions { .. })
}

/// Computes `j -> ‖Op f_j‖_{Q_q}` along the test sequence and reads a
/// compactness verdict from it.
pub fn compactness_probe(spec: &OperatorSpec, xi: &CPoint, deltas: &[f64], cfg: &OperatorConfig) -> Result<ProbeReport> {
    let n = spec.dim();
    if xi.dim() != n {
        return Err(Error::Domain("probe point dimension differs from the symbol".into()));
    }
    let fs = probe_sequence(xi, deltas)?;
    let results: Vec<Result<(NormReport, NormReport)>> = fs.par_iter().map(|f| norm_pair(spec, f, cfg)).collect();

    let mut sequence = Vec::new();
    let mut truncated = Vec::new();
    let mut annotations = Vec::new();
    for (j, (res, &delta)) in results.into_iter().zip(deltas).enumerate() {
        if !truncated.is_empty() {
            truncated.push(delta);
            continue;
        }
        match res {
            Ok((src, dst)) if src.converged && dst.converged => sequence.push(SequenceEntry {
                j,
                delta,
                qp_norm_fj: src.full_norm,
                qp_stderr: src.stderr,
                qq_norm_opfj: dst.full_norm,
                stderr: dst.stderr,
                converged: true,
            }),
            Ok(_) => truncated.push(delta),
            Err(e) if unresolved(&e) => truncated.push(delta),
            Err(e) => return Err(e),
        }
    }
    if !truncated.is_empty() {
        annotations.push(format!("sequence truncated: {} smallest deltas unresolved", truncated.len()));
    }

    let fj_bracket = bracket(sequence.iter().map(|e| e.qp_norm_fj));
    if fj_bracket.is_some_and(|b| b > cfg.bracket_factor) {
        annotations.push(format!("f_j norm bracket exceeds {}", cfg.bracket_factor));
    }
    let floor = sequence
        .iter()
        .min_by(|a, b| a.qq_norm_opfj.total_cmp(&b.qq_norm_opfj))
        .map(|e| (e.qq_norm_opfj, e.stderr));

    let verdict = if spec.open_case() {
        annotations.push("open-case: q < 1, no compactness criterion is available; data only".into());
        OperatorVerdict::OpenCase
    } else {
        sequence_verdict(&sequence, floor, cfg)
    };
    Ok(ProbeReport {
        mode: ProbeMode::Probe,
        kind: spec.kind,
        n,
        p: spec.p,
        q: spec.q,
        measure_side: None,
        converged: truncated.is_empty(),
        rows: Vec::new(),
        sequence,
        fj_bracket,
        floor,
        truncated,
        verdict,
        annotations,
    })
}

fn bracket(values: impl Iterator<Item = f64>) -> Option<f64> {
    let v: Vec<f64> = values.collect();
    if v.is_empty() {
        return None;
    }
    let max = v.iter().copied().fold(f64::MIN, f64::max);
    let min = v.iter().copied().fold(f64::MAX, f64::min);
    Some(if min > 0.0 { max / min } else { f64::INFINITY })
}

fn sequence_verdict(seq: &[SequenceEntry], floor: Option<(f64, f64)>, cfg: &OperatorConfig) -> OperatorVerdict {
    let (Some(first), Some(last)) = (seq.first(), seq.last()) else {
        return OperatorVerdict::Inconclusive;
    };
    if seq.len() < 2 {
        return OperatorVerdict::Inconclusive;
    }
    if last.qq_norm_opfj < cfg.decay_fraction * first.qq_norm_opfj || first.qq_norm_opfj == 0.0 {
        return OperatorVerdict::ConsistentWithCompact;
    }
    let floor_positive = floor.is_some_and(|(v, s)| v - cfg.floor_sigmas * s > 0.0);
    // a sequence that still decays, however slowly, is no witness
    let noise = cfg.floor_sigmas * (first.stderr.powi(2) + last.stderr.powi(2)).sqrt();
    let decaying = last.qq_norm_opfj < first.qq_norm_opfj - noise;
    if floor_positive && !decaying {
        OperatorVerdict::NonCompactWitness
    } else {
        OperatorVerdict::Inconclusive
    }
}

/// Real constant symbol `c`.
pub fn constant_symbol(n: usize, c: f64) -> Result<HoloFunction> {
    HoloFunction::constant(n, Complex64::new(c, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::Rng;

    #[test]
    fn tg_of_one_with_coordinate_symbol() {
        let one = constant_symbol(2, 1.0).unwrap();
        let z1 = HoloFunction::coordinate(2, 0);
        assert_eq!(tg_apply(&z1, &one).unwrap(), z1);
        // L_1 f = f - f(0)
        let f = HoloFunction::Polynomial(
            PowerSeriesFunction::coordinate(2, 1).add(&PowerSeriesFunction::one(2)).unwrap(),
        );
        assert_eq!(lg_apply(&one, &f).unwrap(), HoloFunction::coordinate(2, 1));
        assert!(lg_apply(&z1, &one).unwrap().to_polynomial().unwrap().is_zero());
    }

    #[test]
    fn decomposition_is_exact() {
        let mut rng = Rng::seeded(3);
        for _ in 0..20 {
            let g = HoloFunction::Polynomial(PowerSeriesFunction::random(2, 4, 5, &mut rng));
            let f = HoloFunction::Polynomial(PowerSeriesFunction::random(2, 4, 5, &mut rng));
            let m = mg_apply(&g, &f).unwrap().to_polynomial().unwrap();
            let d = mg_decomposition(&g, &f).unwrap().to_polynomial().unwrap();
            assert!(m.sub(&d).unwrap().is_zero());
        }
    }

    #[test]
    fn quadrature_path_matches_exact() {
        let mut rng = Rng::seeded(5);
        let g = HoloFunction::Polynomial(PowerSeriesFunction::random(2, 3, 4, &mut rng));
        let f = HoloFunction::Polynomial(PowerSeriesFunction::random(2, 3, 4, &mut rng));
        let exact = tg_apply(&g, &f).unwrap();
        let quad = HoloFunction::riemann_stieltjes(RsKind::Tg, g, f).unwrap();
        for _ in 0..10 {
            let z = rng.ball_point(2, 0.95);
            let (a, b) = (exact.eval(&z).unwrap(), quad.eval(&z).unwrap());
            assert!((a - b).norm() <= 1e-9 * a.norm().max(1e-3), "{a} vs {b}");
        }
    }

    #[test]
    fn spec_range_checks() {
        let g = HoloFunction::coordinate(2, 0);
        assert!(OperatorSpec::new(OperatorKind::Tg, g.clone(), 1.0, 1.2).is_ok());
        assert!(OperatorSpec::new(OperatorKind::Tg, g.clone(), 1.2, 1.0).is_err());
        assert!(OperatorSpec::new(OperatorKind::Tg, g.clone(), 0.4, 1.0).is_err());
        assert!(OperatorSpec::new(OperatorKind::Tg, g.clone(), 1.0, 2.0).is_err());
        assert!(OperatorSpec::new(OperatorKind::Tg, g, 0.75, 0.9).unwrap().open_case());
    }

    #[test]
    fn probe_sequence_validation() {
        let xi = CPoint::basis(2, 0);
        assert_eq!(probe_sequence(&xi, &PROBE_DELTAS).unwrap().len(), 5);
        assert!(probe_sequence(&xi, &[0.1, 0.2]).is_err());
        assert!(probe_sequence(&xi.scale(0.5), &[0.1]).is_err());
    }

    #[test]
    fn verdict_rules() {
        let cfg = OperatorConfig::default();
        let mk = |v: &[f64]| -> Vec<SequenceEntry> {
            v.iter()
                .enumerate()
                .map(|(j, &x)| SequenceEntry {
                    j,
                    delta: 0.4 / 2f64.powi(j as i32),
                    qp_norm_fj: 1.0,
                    qp_stderr: 0.01,
                    qq_norm_opfj: x,
                    stderr: 0.01,
                    converged: true,
                })
                .collect()
        };
        let s = mk(&[1.0, 0.5, 0.1]);
        assert_eq!(sequence_verdict(&s, Some((0.1, 0.01)), &cfg), OperatorVerdict::ConsistentWithCompact);
        let s = mk(&[1.0, 0.9, 1.05]);
        assert_eq!(sequence_verdict(&s, Some((0.9, 0.01)), &cfg), OperatorVerdict::NonCompactWitness);
        let s = mk(&[1.0, 0.6, 0.4]);
        assert_eq!(sequence_verdict(&s, Some((0.4, 0.01)), &cfg), OperatorVerdict::Inconclusive);
    }
}
