use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qpball::geometry::CPoint;
use qpball::operators::OperatorKind;
use qpball::qpnorm::QpForm;
use qpball_cli::config::{CarlesonMode, FunctionRef, MeasureRef, SuiteEntry};
use qpball_cli::{run_scenario, validate, CliError, Scenario, ScenarioConfig, ARTIFACT_VERSION, CONFIG_SCHEMA_VERSION};

fn version() -> &'static str {
    Box::leak(format!("{ARTIFACT_VERSION} (config schema {CONFIG_SCHEMA_VERSION})").into_boxed_str())
}

#[derive(Parser)]
#[command(name = "qpball", version = version(), about = "Q_p norms, Carleson measures and Riemann-Stieltjes operators on the unit ball of C^n")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Output directory (or report file ending in .json).
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Monte-Carlo budget of the main estimate.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Q_p seminorm of a function.
    Qpnorm {
        #[arg(long)]
        function: PathBuf,
        #[arg(long)]
        p: f64,
        #[arg(long, value_parser = parse_form, default_value = "radial")]
        form: QpForm,
        #[command(flatten)]
        common: Common,
    },
    /// Carleson and logarithmic Carleson constants of a measure.
    Carleson {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long, value_parser = parse_mode, default_value = "lcm")]
        mode: CarlesonMode,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        q: Option<f64>,
        /// Integral-form weight exponent (default n(q-p)+2).
        #[arg(long)]
        s: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Boundedness certificate or compactness probe of T_g, L_g or M_g.
    Op {
        #[arg(long)]
        kind: OperatorKind,
        #[arg(long)]
        symbol: PathBuf,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        q: Option<f64>,
        #[arg(long, default_value = "certify", value_parser = ["certify", "probe"])]
        mode: String,
        /// Probe point as `[re,im]` pairs, e.g. "[1,0],[0,0]".
        #[arg(long, value_parser = parse_point)]
        xi: Option<CPoint>,
        /// Comma-separated decreasing probe radii.
        #[arg(long, value_delimiter = ',')]
        deltas: Option<Vec<f64>>,
        /// Comma-separated function files for the certificate suite.
        #[arg(long, value_delimiter = ',')]
        suite: Option<Vec<PathBuf>>,
        #[command(flatten)]
        common: Common,
    },
    /// Covering of a Carleson cap by smaller caps.
    Cover {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 0.5)]
        delta: f64,
        #[arg(long, default_value_t = 4)]
        m: usize,
        #[arg(long, value_parser = parse_point)]
        xi: Option<CPoint>,
        #[command(flatten)]
        common: Common,
    },
    /// Exact operator identities on random polynomial pairs.
    Identities {
        /// Dimensions (default 2,3).
        #[arg(long, value_delimiter = ',')]
        n: Option<Vec<usize>>,
        #[arg(long, default_value_t = 100)]
        pairs: usize,
        #[arg(long, default_value_t = 6)]
        degree: u32,
        #[command(flatten)]
        common: Common,
    },
    /// List every violation in a scenario config without running it.
    Validate { config: PathBuf },
    /// Run a scenario config.
    Run { config: PathBuf },
}

fn parse_form(s: &str) -> Result<QpForm, String> {
    serde_json::from_value(serde_json::Value::String(s.into())).map_err(|_| format!("unknown form {s:?} (radial, invariant, box)"))
}

fn parse_mode(s: &str) -> Result<CarlesonMode, String> {
    serde_json::from_value(serde_json::Value::String(s.into())).map_err(|_| format!("unknown mode {s:?} (cm, lcm, vanishing, integral)"))
}

fn parse_point(s: &str) -> Result<CPoint, String> {
    let t = s.trim();
    let wrapped = if t.starts_with("[[") { t.to_string() } else { format!("[{t}]") };
    serde_json::from_str(&wrapped).map_err(|e| format!("bad point {s:?}: {e}"))
}

fn base_config(scenario: Scenario, c: &Common) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::new(scenario, c.seed);
    cfg.output_dir = c.out.clone();
    cfg.samples = c.samples;
    cfg.threads = c.threads;
    cfg
}

/// A config to run and the directory its relative paths resolve against,
/// or `None` when the command already finished.
fn build(cmd: Command) -> Result<Option<(ScenarioConfig, PathBuf)>, CliError> {
    let here = PathBuf::from(".");
    Ok(Some(match cmd {
        Command::Qpnorm { function, p, form, common } => {
            let mut cfg = base_config(Scenario::Qpnorm, &common);
            cfg.function = Some(FunctionRef::Path(function));
            cfg.p = Some(p);
            cfg.qpnorm.form = form;
            (cfg, here)
        }
        Command::Carleson { measure, mode, p, q, s, common } => {
            let mut cfg = base_config(Scenario::Carleson, &common);
            cfg.measure = Some(MeasureRef::Path(measure));
            cfg.carleson.mode = mode;
            cfg.carleson.s = s;
            cfg.p = p;
            cfg.q = q;
            (cfg, here)
        }
        Command::Op {
            kind,
            symbol,
            p,
            q,
            mode,
            xi,
            deltas,
            suite,
            common,
        } => {
            let scenario = if mode == "probe" { Scenario::OpProbe } else { Scenario::OpCertify };
            let mut cfg = base_config(scenario, &common);
            cfg.symbol = Some(FunctionRef::Path(symbol));
            cfg.p = Some(p);
            cfg.q = q;
            cfg.operator.kind = kind;
            cfg.operator.xi = xi;
            if let Some(d) = deltas {
                cfg.operator.deltas = d;
            }
            cfg.operator.suite = suite.map(|files| {
                files
                    .into_iter()
                    .map(|f| SuiteEntry {
                        label: f.display().to_string(),
                        function: FunctionRef::Path(f),
                    })
                    .collect()
            });
            (cfg, here)
        }
        Command::Cover { n, delta, m, xi, common } => {
            let mut cfg = base_config(Scenario::CoverDemo, &common);
            cfg.n = Some(n);
            cfg.cover.delta = delta;
            cfg.cover.m = m;
            cfg.cover.xi = xi;
            (cfg, here)
        }
        Command::Identities { n, pairs, degree, common } => {
            let mut cfg = base_config(Scenario::IdentitySuite, &common);
            cfg.identities.dims = n.unwrap_or_default();
            cfg.identities.pairs = pairs;
            cfg.identities.max_degree = degree;
            (cfg, here)
        }
        Command::Validate { config } => {
            let cfg = ScenarioConfig::load(&config)?;
            let (diags, _) = validate(&cfg, config_dir(&config));
            if diags.is_empty() {
                println!("ok: no violations");
                return Ok(None);
            }
            for d in &diags {
                println!("violation: {d}");
            }
            return Err(CliError::Config(diags));
        }
        // configs resolve their paths relative to their own directory
        Command::Run { config } => (ScenarioConfig::load(&config)?, config_dir(&config).to_path_buf()),
    }))
}

fn config_dir(path: &Path) -> &Path {
    path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let quiet_config = matches!(cli.command, Command::Validate { .. });
    let result = build(cli.command).and_then(|action| match action {
        Some((cfg, base)) => run_scenario(&cfg, &base),
        None => return Ok(None),
    }
    .map(Some));
    match result {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(out)) => {
            println!("{}", out.summary);
            println!("report: {}", out.report_path.display());
            ExitCode::from(out.exit_code as u8)
        }
        Err(e) => {
            // validate already listed the violations on stdout
            if !(quiet_config && matches!(e, CliError::Config(_))) {
                eprintln!("error: {e}");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
