use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{AnalyticKernel, HoloFunction, PowerSeriesFunction, RsKind, TermSpec};
use crate::error::{Error, Result};
use crate::geometry::CPoint;

/// JSON form of a [`HoloFunction`], tagged by `kind`.
///
/// ```json
/// {"kind": "polynomial", "n": 2, "terms": [{"alpha": [1, 0], "re": 1.0, "im": 0.0}]}
/// {"kind": "log_kernel", "w": [[0.5, 0], [0, 0]]}
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionSpec {
    Polynomial {
        n: usize,
        terms: Vec<TermSpec>,
    },
    LogKernel {
        w: CPoint,
    },
    ShiftedLogKernel {
        xi: CPoint,
        delta: f64,
    },
    /// Either `w` (optionally with an explicit `scale`) or `xi` and `delta`.
    NormalizedSquaredLog {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        w: Option<CPoint>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        scale: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        xi: Option<CPoint>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        delta: Option<f64>,
    },
    Sum {
        terms: Vec<FunctionSpec>,
    },
    Product {
        factors: Vec<FunctionSpec>,
    },
    Scaled {
        re: f64,
        #[serde(default)]
        im: f64,
        f: Box<FunctionSpec>,
    },
    Tg {
        g: Box<FunctionSpec>,
        f: Box<FunctionSpec>,
    },
    Lg {
        g: Box<FunctionSpec>,
        f: Box<FunctionSpec>,
    },
}

impl TryFrom<FunctionSpec> for HoloFunction {
    type Error = Error;

    fn try_from(spec: FunctionSpec) -> Result<Self> {
        let f = match spec {
            FunctionSpec::Polynomial { n, terms } => {
                HoloFunction::Polynomial(PowerSeriesFunction::from_term_specs(n, &terms)?)
            }
            FunctionSpec::LogKernel { w } => AnalyticKernel::log_kernel(w)?.into(),
            FunctionSpec::ShiftedLogKernel { xi, delta } => AnalyticKernel::shifted_log(xi, delta)?.into(),
            FunctionSpec::NormalizedSquaredLog { w, scale, xi, delta } => match (w, scale, xi, delta) {
                (Some(w), None, None, None) => AnalyticKernel::normalized_squared_log(w)?.into(),
                (Some(w), Some(scale), None, None) => {
                    let k = AnalyticKernel::NormalizedSquaredLog { w, scale };
                    k.validate()?;
                    k.into()
                }
                (None, None, Some(xi), Some(delta)) => AnalyticKernel::boundary_squared_log(&xi, delta)?.into(),
                _ => {
                    return Err(Error::Parse(
                        "normalized_squared_log takes either `w` (with optional `scale`) or `xi` and `delta`".into(),
                    ))
                }
            },
            FunctionSpec::Sum { terms } => {
                HoloFunction::sum(terms.into_iter().map(HoloFunction::try_from).collect::<Result<_>>()?)?
            }
            FunctionSpec::Product { factors } => {
                HoloFunction::product(factors.into_iter().map(HoloFunction::try_from).collect::<Result<_>>()?)?
            }
            FunctionSpec::Scaled { re, im, f } => HoloFunction::scaled(Complex64::new(re, im), (*f).try_into()?)?,
            FunctionSpec::Tg { g, f } => HoloFunction::riemann_stieltjes(RsKind::Tg, (*g).try_into()?, (*f).try_into()?)?,
            FunctionSpec::Lg { g, f } => HoloFunction::riemann_stieltjes(RsKind::Lg, (*g).try_into()?, (*f).try_into()?)?,
        };
        Ok(f)
    }
}

impl From<HoloFunction> for FunctionSpec {
    fn from(f: HoloFunction) -> Self {
        match f {
            HoloFunction::Polynomial(p) => FunctionSpec::Polynomial {
                n: p.dim(),
                terms: p.to_term_specs(),
            },
            HoloFunction::Kernel(AnalyticKernel::LogKernel { w }) => FunctionSpec::LogKernel { w },
            HoloFunction::Kernel(AnalyticKernel::ShiftedLogKernel { xi, delta }) => {
                FunctionSpec::ShiftedLogKernel { xi, delta }
            }
            HoloFunction::Kernel(AnalyticKernel::NormalizedSquaredLog { w, scale }) => FunctionSpec::NormalizedSquaredLog {
                w: Some(w),
                scale: Some(scale),
                xi: None,
                delta: None,
            },
            HoloFunction::Sum(v) => FunctionSpec::Sum {
                terms: v.into_iter().map(Into::into).collect(),
            },
            HoloFunction::Product(v) => FunctionSpec::Product {
                factors: v.into_iter().map(Into::into).collect(),
            },
            HoloFunction::Scaled(c, f) => FunctionSpec::Scaled {
                re: c.re,
                im: c.im,
                f: Box::new((*f).into()),
            },
            HoloFunction::RiemannStieltjes { kind, g, f } => {
                let (g, f) = (Box::new((*g).into()), Box::new((*f).into()));
                match kind {
                    RsKind::Tg => FunctionSpec::Tg { g, f },
                    RsKind::Lg => FunctionSpec::Lg { g, f },
                }
            }
        }
    }
}

impl HoloFunction {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("line {} column {}: {e}", e.line(), e.column())))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("function specs always serialize")
    }
}
