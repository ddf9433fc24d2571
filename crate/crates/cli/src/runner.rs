use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use qpball::carleson::{cm_constant, lcm_constant, lcm_integral_form, vanishing_profile, CarlesonConfig, CarlesonReport};
use qpball::geometry::{cover_box, coverage_fraction, min_separation, CPoint};
use qpball::operators::{boundedness_certificate, compactness_probe, identity_suite, IdentityConfig, OperatorConfig, OperatorSpec, ProbeReport};
use qpball::qpnorm::{qp_box, qp_invariant, qp_radial, QpForm, QpParams};
use serde::Serialize;
use serde_json::Value;

use crate::config::{validate, CarlesonMode, CarlesonOptions, Resolved, Scenario, ScenarioConfig};
use crate::manifest::{sha256_hex, EstimateFlag, RunManifest};
use crate::{exit, CliError, ARTIFACT_VERSION, CONFIG_SCHEMA_VERSION};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub exit_code: i32,
    pub report_path: PathBuf,
    pub files: Vec<PathBuf>,
    pub manifest: RunManifest,
    pub summary: String,
}

struct Table {
    file: String,
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

struct Output {
    report: Value,
    tables: Vec<Table>,
    estimates: Vec<EstimateFlag>,
    violations: Vec<String>,
    summary: String,
}

#[derive(Serialize)]
struct Envelope<'a> {
    artifact_version: &'a str,
    config_schema_version: u32,
    manifest: &'a str,
    config_hash: &'a str,
    scenario: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    name: Option<&'a str>,
    config: &'a ScenarioConfig,
    resolved: &'a Resolved,
    converged: bool,
    #[serde(skip_serializing_if = "<[String]>::is_empty")]
    contract_violations: &'a [String],
    report: &'a Value,
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("reports serialize")
}

fn num(x: f64) -> String {
    format!("{x}")
}

/// `output_dir` naming a `.json` file selects the report file name as well.
fn targets(cfg: &ScenarioConfig, base: &Path) -> (PathBuf, String) {
    let out = base.join(&cfg.output_dir);
    let default_name = format!("{}_report.json", cfg.scenario.as_str().replace('-', "_"));
    if out.extension().is_some_and(|e| e == "json") {
        let dir = out.parent().map(Path::to_path_buf).unwrap_or_default();
        let name = out.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or(default_name);
        (dir, name)
    } else {
        (out, default_name)
    }
}

/// Validates, runs and writes one scenario. Configuration problems are
/// returned as errors before any computation; estimate and contract
/// failures are reported through `exit_code`.
pub fn run_scenario(cfg: &ScenarioConfig, base: &Path) -> Result<RunOutcome, CliError> {
    let start = Instant::now();
    let (diags, resolved) = validate(cfg, base);
    let Some(resolved) = resolved else {
        return Err(CliError::Config(diags));
    };
    let hash_input = serde_json::to_vec(&(cfg, &resolved)).expect("config serializes");
    let config_hash = sha256_hex(&hash_input);

    let output = match cfg.threads {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| CliError::Io(format!("worker pool: {e}")))?
            .install(|| execute(cfg, &resolved)),
        None => execute(cfg, &resolved),
    }?;

    let converged = output.estimates.iter().all(|e| e.converged);
    let exit_code = if !output.violations.is_empty() {
        exit::CONTRACT
    } else if !converged {
        exit::UNCONVERGED
    } else {
        exit::OK
    };

    let (dir, report_name) = targets(cfg, base);
    fs::create_dir_all(&dir)?;
    let envelope = Envelope {
        artifact_version: ARTIFACT_VERSION,
        config_schema_version: CONFIG_SCHEMA_VERSION,
        manifest: MANIFEST_FILE,
        config_hash: &config_hash,
        scenario: cfg.scenario.as_str(),
        name: cfg.name.as_deref(),
        config: cfg,
        resolved: &resolved,
        converged,
        contract_violations: &output.violations,
        report: &output.report,
    };
    let report_path = dir.join(&report_name);
    let mut text = serde_json::to_string_pretty(&envelope).expect("report serializes");
    text.push('\n');
    fs::write(&report_path, text)?;
    let mut files = vec![report_path.clone()];

    for t in &output.tables {
        let path = dir.join(&t.file);
        let mut w = csv::Writer::from_path(&path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let mut header: Vec<String> = t.header.iter().map(|s| s.to_string()).collect();
        header.push("manifest".into());
        w.write_record(&header).map_err(|e| CliError::Io(e.to_string()))?;
        for row in &t.rows {
            let mut r = row.clone();
            r.push(MANIFEST_FILE.into());
            w.write_record(&r).map_err(|e| CliError::Io(e.to_string()))?;
        }
        w.flush()?;
        files.push(path);
    }

    let manifest = RunManifest {
        config_hash,
        artifact_version: ARTIFACT_VERSION.into(),
        config_schema_version: CONFIG_SCHEMA_VERSION,
        scenario: cfg.scenario.as_str().into(),
        outputs: files
            .iter()
            .map(|p| p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default())
            .collect(),
        estimates: output.estimates,
        exit_code,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        finished_unix_seconds: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
    };
    let mpath = dir.join(MANIFEST_FILE);
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    fs::write(&mpath, text)?;
    files.push(mpath);

    Ok(RunOutcome {
        exit_code,
        report_path,
        files,
        manifest,
        summary: output.summary,
    })
}

fn flag(name: impl Into<String>, converged: bool) -> EstimateFlag {
    EstimateFlag {
        name: name.into(),
        converged,
    }
}

fn carleson_config(o: &CarlesonOptions, cfg: &ScenarioConfig) -> CarlesonConfig {
    CarlesonConfig {
        search: o.search.clone(),
        box_samples: cfg.samples.unwrap_or(o.box_samples),
        seed: cfg.seed,
        convergence: o.convergence,
        verdict: o.verdict,
    }
}

fn operator_config(cfg: &ScenarioConfig) -> OperatorConfig {
    let o = &cfg.operator;
    let d = OperatorConfig::default();
    OperatorConfig {
        samples: cfg.samples.unwrap_or(d.samples),
        seed: cfg.seed,
        search: o.search.clone(),
        hinf: o.hinf,
        // the scenario sample budget goes to the Q_p estimates, not the boxes
        carleson: CarlesonConfig {
            box_samples: o.carleson.box_samples,
            ..carleson_config(&o.carleson, cfg)
        },
        decay_fraction: o.decay_fraction,
        bracket_factor: o.bracket_factor,
        growth_factor: o.growth_factor,
        floor_sigmas: o.floor_sigmas,
    }
}

fn execute(cfg: &ScenarioConfig, r: &Resolved) -> Result<Output, CliError> {
    let n = r.n;
    match cfg.scenario {
        Scenario::Qpnorm => {
            let f = r.function.as_ref().expect("validated");
            let o = &cfg.qpnorm;
            let mut params = QpParams::new(n, cfg.p.expect("validated"))?.with_seed(cfg.seed);
            params.samples = cfg.samples.unwrap_or(params.samples);
            params.search = o.search.clone();
            params.box_search = o.box_search.clone();
            params.box_samples = o.box_samples;
            params.exclusion_radius = o.exclusion_radius;
            params.exclusion_tolerance = o.exclusion_tolerance;
            params.convergence = o.convergence;
            let rep = match o.form {
                QpForm::Radial => qp_radial(f, &params)?,
                QpForm::Invariant => qp_invariant(f, &params)?,
                QpForm::Box => qp_box(f, &params)?,
            };
            let rows = rep
                .profile
                .iter()
                .map(|e| vec![serde_json::to_string(&e.arg).expect("arg serializes"), num(e.value), num(e.stderr)])
                .collect();
            Ok(Output {
                summary: format!("Q_p seminorm {:.6} ± {:.2e} (full norm {:.6})", rep.seminorm, rep.stderr, rep.full_norm),
                estimates: vec![flag("seminorm", rep.converged)],
                tables: vec![Table {
                    file: "qpnorm_profile.csv".into(),
                    header: vec!["arg", "value", "stderr"],
                    rows,
                }],
                report: to_value(&rep),
                violations: Vec::new(),
            })
        }
        Scenario::Carleson => {
            let mu = r.measure.as_ref().expect("validated");
            let o = &cfg.carleson;
            let cc = carleson_config(o, cfg);
            let profile_table = |rep: &CarlesonReport| Table {
                file: "delta_profile.csv".into(),
                header: vec!["delta", "sup_ratio", "stderr"],
                rows: rep
                    .delta_profile
                    .iter()
                    .map(|e| vec![num(e.delta), num(e.sup_ratio), num(e.stderr)])
                    .collect(),
            };
            let box_output = |rep: CarlesonReport, what: &str| Output {
                summary: format!("{what} constant {:.6e} (norm {:.6e}), verdict {:?}", rep.constant, rep.norm, rep.vanishing_verdict),
                estimates: vec![flag(what, rep.converged)],
                tables: vec![profile_table(&rep)],
                report: to_value(&rep),
                violations: Vec::new(),
            };
            match o.mode {
                CarlesonMode::Cm => Ok(box_output(cm_constant(mu, cfg.p.expect("validated"), &cc)?, "cm")),
                CarlesonMode::Lcm => Ok(box_output(lcm_constant(mu, cfg.q.expect("validated"), &cc)?, "lcm")),
                CarlesonMode::Vanishing => Ok(box_output(vanishing_profile(mu, cfg.q.expect("validated"), &cc)?, "vanishing")),
                CarlesonMode::Integral => {
                    let q = cfg.q.expect("validated");
                    let p = cfg.p.unwrap_or(q);
                    let s = o.s.unwrap_or(n as f64 * (q - p) + 2.0);
                    let mut grid = o.w_grid.clone();
                    grid.seed = cfg.seed;
                    if let Some(k) = cfg.samples {
                        grid.samples = k;
                    }
                    let rep = lcm_integral_form(mu, q, s, &grid)?;
                    Ok(Output {
                        summary: format!("integral form (s = {s}) {:.6e} ± {:.2e}", rep.value, rep.stderr),
                        estimates: vec![flag("integral_form", rep.converged)],
                        tables: Vec::new(),
                        report: serde_json::json!({ "s": s, "estimate": rep }),
                        violations: Vec::new(),
                    })
                }
            }
        }
        Scenario::OpCertify | Scenario::OpProbe => {
            let g = r.symbol.clone().expect("validated");
            let p = cfg.p.expect("validated");
            let spec = OperatorSpec::new(cfg.operator.kind, g, p, cfg.q.unwrap_or(p))?;
            let oc = operator_config(cfg);
            let rep: ProbeReport = if cfg.scenario == Scenario::OpCertify {
                boundedness_certificate(&spec, r.suite.as_deref().expect("validated"), &oc)?
            } else {
                let xi = cfg.operator.xi.clone().unwrap_or_else(|| CPoint::basis(n, 0));
                compactness_probe(&spec, &xi, &cfg.operator.deltas, &oc)?
            };
            let mut estimates: Vec<EstimateFlag> = rep.rows.iter().map(|row| flag(row.label.clone(), row.converged)).collect();
            estimates.extend(rep.sequence.iter().map(|e| flag(format!("f_{}", e.j), e.converged)));
            if rep.mode == qpball::operators::ProbeMode::Probe && !rep.truncated.is_empty() {
                estimates.push(flag("truncated sequence", false));
            }
            if let Some(c) = rep.measure_side.as_ref().and_then(|m| m.lcm_converged) {
                estimates.push(flag("lcm_constant", c));
            }
            let tables = if cfg.scenario == Scenario::OpProbe {
                vec![Table {
                    file: "sequence.csv".into(),
                    header: vec!["j", "delta", "qp_norm_fj", "qq_norm_opfj", "stderr"],
                    rows: rep
                        .sequence
                        .iter()
                        .map(|e| vec![e.j.to_string(), num(e.delta), num(e.qp_norm_fj), num(e.qq_norm_opfj), num(e.stderr)])
                        .collect(),
                }]
            } else {
                vec![Table {
                    file: "ratios.csv".into(),
                    header: vec!["label", "source_norm", "target_norm", "ratio", "converged"],
                    rows: rep
                        .rows
                        .iter()
                        .map(|row| vec![row.label.clone(), num(row.source_norm), num(row.target_norm), num(row.ratio), row.converged.to_string()])
                        .collect(),
                }]
            };
            let verdict = serde_json::to_value(rep.verdict).expect("verdict serializes");
            Ok(Output {
                summary: format!("verdict {}", verdict.as_str().unwrap_or("?")),
                estimates,
                tables,
                report: to_value(&rep),
                violations: Vec::new(),
            })
        }
        Scenario::CoverDemo => {
            let o = &cfg.cover;
            let xi = o.xi.clone().unwrap_or_else(|| CPoint::basis(n, 0));
            let caps = cover_box(&xi, o.delta, o.m)?;
            let samples = cfg.samples.unwrap_or(o.coverage_samples);
            let coverage = coverage_fraction(&caps, &xi, o.delta, samples, cfg.seed)?;
            let sep = if caps.len() > 1 { Some(min_separation(&caps)) } else { None };
            let ratio = caps.len() as f64 / (o.m as f64).powi(n as i32);
            let mut violations = Vec::new();
            if coverage < 1.0 {
                violations.push(format!("sampled coverage {coverage} < 1"));
            }
            let centers: Vec<&CPoint> = caps.iter().map(|c| c.center()).collect();
            Ok(Output {
                summary: format!("{} caps (N/m^n = {ratio:.3}), coverage {coverage}", caps.len()),
                estimates: Vec::new(),
                tables: vec![Table {
                    file: "cover_centers.csv".into(),
                    header: vec!["k", "center"],
                    rows: centers
                        .iter()
                        .enumerate()
                        .map(|(k, c)| vec![k.to_string(), serde_json::to_string(c).expect("point serializes")])
                        .collect(),
                }],
                report: serde_json::json!({
                    "n": n,
                    "delta": o.delta,
                    "m": o.m,
                    "count": caps.len(),
                    "count_over_m_pow_n": ratio,
                    "coverage_fraction": coverage,
                    "coverage_samples": samples,
                    "min_separation": sep,
                    "centers": centers,
                }),
                violations,
            })
        }
        Scenario::IdentitySuite => {
            let o = &cfg.identities;
            let dims = if !o.dims.is_empty() {
                o.dims.clone()
            } else if let Some(n) = cfg.n {
                vec![n]
            } else {
                vec![2, 3]
            };
            let mut reports = Vec::new();
            let mut violations = Vec::new();
            let mut rows = Vec::new();
            for &d in &dims {
                let rep = identity_suite(&IdentityConfig {
                    n: d,
                    pairs: o.pairs,
                    max_degree: o.max_degree,
                    terms: o.terms,
                    quadrature_points: o.quadrature_points,
                    quadrature_pairs: 1,
                    seed: cfg.seed,
                })?;
                for res in &rep.residuals {
                    if res.failures > 0 {
                        violations.push(format!("n = {d}: {} failed on {} pairs (max residual {:e})", res.identity, res.failures, res.max_residual));
                    }
                    rows.push(vec![d.to_string(), res.identity.clone(), res.failures.to_string(), num(res.max_residual)]);
                }
                if rep.quadrature_max_rel_err > o.quadrature_tolerance {
                    violations.push(format!(
                        "n = {d}: quadrature path deviates by {:e} > {:e}",
                        rep.quadrature_max_rel_err, o.quadrature_tolerance
                    ));
                }
                reports.push(rep);
            }
            let max_res = reports
                .iter()
                .flat_map(|r| r.residuals.iter().map(|x| x.max_residual))
                .fold(0.0, f64::max);
            Ok(Output {
                summary: format!("identities on {} dimension(s): max residual {max_res}", dims.len()),
                estimates: Vec::new(),
                tables: vec![Table {
                    file: "identities.csv".into(),
                    header: vec!["n", "identity", "failures", "max_residual"],
                    rows,
                }],
                report: to_value(&reports),
                violations,
            })
        }
    }
}
