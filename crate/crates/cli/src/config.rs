//! Scenario configuration: a single JSON document, validated in full before
//! anything runs.

use std::fs;
use std::path::{Path, PathBuf};

use qpball::carleson::{CarlesonConfig, MeasureDensity, VerdictConfig, WGrid};
use qpball::geometry::{CPoint, UNIT_TOL};
use qpball::holo::{HinfConfig, HoloFunction};
use qpball::integrate::ConvergenceConfig;
use qpball::operators::{OperatorKind, PROBE_DELTAS};
use qpball::qpnorm::{check_p_range, QpForm, QpParams};
use qpball::search::{ASearchConfig, BoxSearchConfig};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Qpnorm,
    Carleson,
    OpCertify,
    OpProbe,
    CoverDemo,
    IdentitySuite,
}

impl Scenario {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Qpnorm => "qpnorm",
            Self::Carleson => "carleson",
            Self::OpCertify => "op-certify",
            Self::OpProbe => "op-probe",
            Self::CoverDemo => "cover-demo",
            Self::IdentitySuite => "identity-suite",
        }
    }
}

/// A function given by file path (relative to the config) or inline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FunctionRef {
    Path(PathBuf),
    Inline(HoloFunction),
}

/// A measure given by file path or inline JSON; `mu_qg` entries may name
/// their symbol by path as well.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MeasureRef {
    Path(PathBuf),
    Inline(Value),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QpnormOptions {
    pub form: QpForm,
    pub search: ASearchConfig,
    pub box_search: BoxSearchConfig,
    pub box_samples: usize,
    pub exclusion_radius: f64,
    pub exclusion_tolerance: f64,
    pub convergence: ConvergenceConfig,
}

impl Default for QpnormOptions {
    fn default() -> Self {
        let d = QpParams::new(2, 1.0).expect("p = 1 is admissible");
        Self {
            form: QpForm::Radial,
            search: d.search,
            box_search: d.box_search,
            box_samples: d.box_samples,
            exclusion_radius: d.exclusion_radius,
            exclusion_tolerance: d.exclusion_tolerance,
            convergence: d.convergence,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CarlesonMode {
    Cm,
    Lcm,
    Vanishing,
    Integral,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CarlesonOptions {
    pub mode: CarlesonMode,
    /// Weight exponent of the integral form; defaults to `n(q-p)+2`.
    pub s: Option<f64>,
    pub search: BoxSearchConfig,
    pub box_samples: usize,
    pub convergence: ConvergenceConfig,
    pub verdict: VerdictConfig,
    pub w_grid: WGrid,
}

impl Default for CarlesonOptions {
    fn default() -> Self {
        let c = CarlesonConfig::default();
        Self {
            mode: CarlesonMode::Lcm,
            s: None,
            search: c.search,
            box_samples: c.box_samples,
            convergence: c.convergence,
            verdict: c.verdict,
            w_grid: WGrid::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteEntry {
    pub label: String,
    pub function: FunctionRef,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OperatorOptions {
    pub kind: OperatorKind,
    /// Certificate suite; defaults to log kernels at `|w|` = .5, .7, .9, .95.
    pub suite: Option<Vec<SuiteEntry>>,
    /// Probe point on the sphere; defaults to `e_1`.
    pub xi: Option<CPoint>,
    pub deltas: Vec<f64>,
    pub search: ASearchConfig,
    pub hinf: HinfConfig,
    pub carleson: CarlesonOptions,
    // verdict thresholds; policy, not theory
    pub decay_fraction: f64,
    pub bracket_factor: f64,
    pub growth_factor: f64,
    pub floor_sigmas: f64,
}

impl Default for OperatorOptions {
    fn default() -> Self {
        let d = qpball::operators::OperatorConfig::default();
        Self {
            kind: OperatorKind::Tg,
            suite: None,
            xi: None,
            deltas: PROBE_DELTAS.to_vec(),
            search: d.search,
            hinf: d.hinf,
            carleson: CarlesonOptions::default(),
            decay_fraction: d.decay_fraction,
            bracket_factor: d.bracket_factor,
            growth_factor: d.growth_factor,
            floor_sigmas: d.floor_sigmas,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoverOptions {
    pub delta: f64,
    pub m: usize,
    pub xi: Option<CPoint>,
    pub coverage_samples: usize,
}

impl Default for CoverOptions {
    fn default() -> Self {
        Self {
            delta: 0.5,
            m: 4,
            xi: None,
            coverage_samples: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IdentityOptions {
    /// Dimensions to run; defaults to `[n]`, or `[2, 3]` without `n`.
    pub dims: Vec<usize>,
    pub pairs: usize,
    pub max_degree: u32,
    pub terms: usize,
    pub quadrature_points: usize,
    pub quadrature_tolerance: f64,
}

impl Default for IdentityOptions {
    fn default() -> Self {
        Self {
            dims: Vec::new(),
            pairs: 100,
            max_degree: 6,
            terms: 6,
            quadrature_points: 50,
            quadrature_tolerance: 1e-9,
        }
    }
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

/// One reproducible experiment. `seed` is mandatory; every module seed is
/// derived from it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub p: Option<f64>,
    #[serde(default)]
    pub q: Option<f64>,
    pub seed: u64,
    #[serde(default)]
    pub samples: Option<usize>,
    /// Worker threads; all cores when absent. Results do not depend on it.
    #[serde(default, skip_serializing)]
    pub threads: Option<usize>,
    /// Where the run writes; not part of the run's identity, so it is
    /// left out of the report and the config hash.
    #[serde(default = "default_output_dir", skip_serializing)]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub function: Option<FunctionRef>,
    #[serde(default)]
    pub symbol: Option<FunctionRef>,
    #[serde(default)]
    pub measure: Option<MeasureRef>,
    #[serde(default)]
    pub qpnorm: QpnormOptions,
    #[serde(default)]
    pub carleson: CarlesonOptions,
    #[serde(default)]
    pub operator: OperatorOptions,
    #[serde(default)]
    pub cover: CoverOptions,
    #[serde(default)]
    pub identities: IdentityOptions,
}

impl ScenarioConfig {
    pub fn new(scenario: Scenario, seed: u64) -> Self {
        Self {
            scenario,
            name: None,
            n: None,
            p: None,
            q: None,
            seed,
            samples: None,
            threads: None,
            output_dir: default_output_dir(),
            function: None,
            symbol: None,
            measure: None,
            qpnorm: QpnormOptions::default(),
            carleson: CarlesonOptions::default(),
            operator: OperatorOptions::default(),
            cover: CoverOptions::default(),
            identities: IdentityOptions::default(),
        }
    }

    /// Parses a config, reporting the line and column of syntax or schema
    /// errors.
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text)
            .map_err(|e| CliError::Parse(format!("line {}, column {}: {e}", e.line(), e.column())))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            CliError::Parse(m) => CliError::Parse(format!("{}: {m}", path.display())),
            other => other,
        })
    }
}

/// A config with every referenced file loaded.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Resolved {
    pub n: usize,
    pub function: Option<HoloFunction>,
    pub symbol: Option<HoloFunction>,
    pub measure: Option<MeasureDensity>,
    pub suite: Option<Vec<(String, HoloFunction)>>,
}

fn read_json(path: &Path) -> Result<Value, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("{}: line {}, column {}: {e}", path.display(), e.line(), e.column()))
}

pub fn load_function(r: &FunctionRef, base: &Path) -> Result<HoloFunction, String> {
    match r {
        FunctionRef::Inline(f) => Ok(f.clone()),
        FunctionRef::Path(p) => {
            let path = base.join(p);
            let text = fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
            HoloFunction::from_json(&text).map_err(|e| format!("{}: {e}", path.display()))
        }
    }
}

/// Replaces `"g": "<path>"` inside `mu_qg` nodes by the file contents.
fn inline_symbols(v: &mut Value, base: &Path) -> Result<(), String> {
    match v {
        Value::Object(map) => {
            let is_mu = map.get("kind").and_then(Value::as_str) == Some("mu_qg");
            if is_mu {
                if let Some(Value::String(p)) = map.get("g") {
                    let loaded = read_json(&base.join(p))?;
                    map.insert("g".into(), loaded);
                }
            }
            for child in map.values_mut() {
                inline_symbols(child, base)?;
            }
        }
        Value::Array(items) => {
            for child in items {
                inline_symbols(child, base)?;
            }
        }
        _ => {}
    }
    Ok(())
}

pub fn load_measure(r: &MeasureRef, base: &Path) -> Result<MeasureDensity, String> {
    let (mut v, dir) = match r {
        MeasureRef::Inline(v) => (v.clone(), base.to_path_buf()),
        MeasureRef::Path(p) => {
            let path = base.join(p);
            let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
            (read_json(&path)?, dir)
        }
    };
    inline_symbols(&mut v, &dir)?;
    serde_json::from_value(v).map_err(|e| format!("measure: {e}"))
}

fn default_suite(n: usize) -> Vec<(String, HoloFunction)> {
    [0.5, 0.7, 0.9, 0.95]
        .iter()
        .map(|&r| {
            let w = CPoint::basis(n, 0).scale(r);
            let k = qpball::holo::AnalyticKernel::log_kernel(w).expect("|w| < 1");
            (format!("log kernel |w|={r}"), HoloFunction::Kernel(k))
        })
        .collect()
}

fn check_range(n: usize, name: &str, v: f64, out: &mut Vec<String>) {
    if let Err(e) = check_p_range(n, v) {
        let msg = e.to_string().replace("invalid parameter: ", "");
        out.push(if name == "p" { msg } else { format!("{name}: {}", msg.replacen("p = ", "q = ", 1)) });
    }
}

/// Every violation of `cfg`, without running anything; `Resolved` is
/// returned when there are none.
pub fn validate(cfg: &ScenarioConfig, base: &Path) -> (Vec<String>, Option<Resolved>) {
    let mut out: Vec<String> = Vec::new();
    let load_fn = |r: &Option<FunctionRef>, what: &str, required: bool, out: &mut Vec<String>| -> Option<HoloFunction> {
        match r {
            Some(r) => load_function(r, base).map_err(|e| out.push(format!("{what}: {e}"))).ok(),
            None => {
                if required {
                    out.push(format!("{what} is required for scenario {}", cfg.scenario.as_str()));
                }
                None
            }
        }
    };
    let sc = cfg.scenario;
    let function = load_fn(&cfg.function, "function", sc == Scenario::Qpnorm, &mut out);
    let symbol = load_fn(&cfg.symbol, "symbol", matches!(sc, Scenario::OpCertify | Scenario::OpProbe), &mut out);
    let measure = match &cfg.measure {
        Some(m) => load_measure(m, base).map_err(|e| out.push(e)).ok(),
        None => {
            if sc == Scenario::Carleson {
                out.push("measure is required for scenario carleson".into());
            }
            None
        }
    };

    let inferred = function
        .as_ref()
        .map(|f| f.dim())
        .or(symbol.as_ref().map(|g| g.dim()))
        .or(measure.as_ref().map(|m| m.dim()));
    let n = match (cfg.n, inferred) {
        (Some(n), Some(k)) if n != k => {
            out.push(format!("n = {n} but the referenced functions live in dimension {k}"));
            n
        }
        (Some(n), _) => n,
        (None, Some(k)) => k,
        (None, None) => {
            if !matches!(sc, Scenario::IdentitySuite) {
                out.push("n is required when no function, symbol or measure fixes it".into());
            }
            2
        }
    };
    if n < 2 {
        out.push(format!("n = {n}: the ball must have dimension at least 2"));
    }
    for (what, f) in [("function", &function), ("symbol", &symbol)] {
        if let Some(f) = f {
            if f.dim() != n {
                out.push(format!("{what} has dimension {}, expected {n}", f.dim()));
            }
        }
    }

    let need_p = matches!(sc, Scenario::Qpnorm | Scenario::OpCertify | Scenario::OpProbe)
        || (sc == Scenario::Carleson && cfg.carleson.mode == CarlesonMode::Cm);
    let need_q = sc == Scenario::Carleson && cfg.carleson.mode != CarlesonMode::Cm;
    if n >= 2 {
        match cfg.p {
            Some(p) => check_range(n, "p", p, &mut out),
            None if need_p => out.push(format!("p is required for scenario {}", sc.as_str())),
            None => {}
        }
        match cfg.q {
            Some(q) => check_range(n, "q", q, &mut out),
            None if need_q => out.push("q is required for the logarithmic Carleson modes".into()),
            None => {}
        }
    }
    if matches!(sc, Scenario::OpCertify | Scenario::OpProbe) {
        if let (Some(p), Some(q)) = (cfg.p, cfg.q) {
            if p > q {
                out.push(format!("p = {p} > q = {q}: operators act from Q_p into Q_q with p <= q"));
            }
        }
    }
    if cfg.samples == Some(0) {
        out.push("samples must be positive".into());
    }
    if cfg.threads == Some(0) {
        out.push("threads must be positive".into());
    }
    if let Some(s) = cfg.carleson.s {
        if s.is_nan() || s <= 0.0 {
            out.push(format!("integral-form exponent s = {s} must be positive"));
        }
    }

    let mut suite = None;
    match sc {
        Scenario::OpProbe => {
            let d = &cfg.operator.deltas;
            if d.is_empty() || d.windows(2).any(|w| w[1] >= w[0]) || d.iter().any(|&x| !(x > 0.0 && x < 1.0)) {
                out.push("probe deltas must be a non-empty decreasing list in (0, 1)".into());
            }
            if let Some(xi) = &cfg.operator.xi {
                if xi.dim() != n || (xi.norm() - 1.0).abs() > UNIT_TOL {
                    out.push(format!("probe point must be a unit vector of C^{n}"));
                }
            }
        }
        Scenario::OpCertify => {
            let entries = match &cfg.operator.suite {
                Some(list) if list.is_empty() => {
                    out.push("certificate suite is empty".into());
                    Vec::new()
                }
                Some(list) => list
                    .iter()
                    .filter_map(|e| match load_function(&e.function, base) {
                        Ok(f) if f.dim() == n => Some((e.label.clone(), f)),
                        Ok(f) => {
                            out.push(format!("suite entry {:?} has dimension {}, expected {n}", e.label, f.dim()));
                            None
                        }
                        Err(err) => {
                            out.push(format!("suite entry {:?}: {err}", e.label));
                            None
                        }
                    })
                    .collect(),
                None => default_suite(n.max(2)),
            };
            suite = Some(entries);
        }
        Scenario::CoverDemo => {
            let c = &cfg.cover;
            if !(c.delta > 0.0 && c.delta <= 2.0) {
                out.push(format!("cover delta = {} must lie in (0, 2]", c.delta));
            }
            if c.m == 0 {
                out.push("cover refinement m must be at least 1".into());
            }
            if let Some(xi) = &c.xi {
                if xi.dim() != n || (xi.norm() - 1.0).abs() > UNIT_TOL {
                    out.push(format!("cover center must be a unit vector of C^{n}"));
                }
            }
        }
        Scenario::IdentitySuite => {
            if cfg.identities.dims.iter().any(|&d| d < 2) {
                out.push("identity dimensions must be at least 2".into());
            }
            if cfg.identities.pairs == 0 {
                out.push("identity suite needs at least one pair".into());
            }
        }
        Scenario::Qpnorm | Scenario::Carleson => {}
    }

    if out.is_empty() {
        (
            out,
            Some(Resolved {
                n,
                function,
                symbol,
                measure,
                suite,
            }),
        )
    } else {
        (out, None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(json: &str) -> ScenarioConfig {
        ScenarioConfig::from_json(json).unwrap()
    }

    #[test]
    fn p_below_range() {
        let c = cfg(r#"{"scenario":"cover-demo","n":2,"p":0.4,"seed":1}"#);
        let (d, _) = validate(&c, Path::new("."));
        assert_eq!(d.len(), 1);
        assert!(d[0].contains("(n-1)/n = 0.5"), "{d:?}");
    }

    #[test]
    fn p_above_q() {
        let c = cfg(r#"{"scenario":"op-probe","p":1.0,"q":0.9,"seed":1,
            "symbol":{"kind":"polynomial","n":2,"terms":[{"alpha":[1,0],"re":1.0,"im":0.0}]}}"#);
        let (d, _) = validate(&c, Path::new("."));
        assert!(d.iter().any(|m| m.contains("p <= q")), "{d:?}");
    }

    #[test]
    fn valid_config_has_no_diagnostics() {
        let c = cfg(r#"{"scenario":"cover-demo","n":2,"seed":1}"#);
        let (d, r) = validate(&c, Path::new("."));
        assert!(d.is_empty(), "{d:?}");
        assert_eq!(r.unwrap().n, 2);
    }

    #[test]
    fn seed_is_mandatory_and_errors_carry_lines() {
        let e = ScenarioConfig::from_json("{\n  \"scenario\": \"qpnorm\"\n}").unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("line") && msg.contains("seed"), "{msg}");
    }
}
