use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::CPoint;
use crate::holo::HoloFunction;

/// Positive measure on `B` given by a density against `dv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeasureDensity {
    Zero { n: usize },
    /// `dv` itself.
    Lebesgue { n: usize },
    /// `d mu_{q,g} = |Rg|^2 (1-|z|^2)^{n(q-1)+1} dv`.
    MuQg { g: HoloFunction, q: f64 },
    Scaled { c: f64, mu: Box<MeasureDensity> },
    Sum { parts: Vec<MeasureDensity> },
    /// `chi_{|z| > r} mu`.
    Cutoff { r: f64, mu: Box<MeasureDensity> },
}

/// `d mu_{q,g}`.
pub fn mu_qg(g: HoloFunction, q: f64) -> Result<MeasureDensity> {
    if !(q > 0.0 && q.is_finite()) {
        return Err(Error::InvalidParameter(format!("q must be positive, got {q}")));
    }
    Ok(MeasureDensity::MuQg { g, q })
}

impl MeasureDensity {
    pub fn scaled(self, c: f64) -> Result<Self> {
        if !(c >= 0.0 && c.is_finite()) {
            return Err(Error::InvalidParameter(format!("measure scale must be non-negative, got {c}")));
        }
        Ok(Self::Scaled { c, mu: Box::new(self) })
    }

    pub fn sum(parts: Vec<MeasureDensity>) -> Result<Self> {
        let Some(first) = parts.first() else {
            return Err(Error::InvalidParameter("sum of measures needs at least one part".into()));
        };
        let n = first.dim();
        if parts.iter().any(|m| m.dim() != n) {
            return Err(Error::Domain("measures live on balls of different dimension".into()));
        }
        Ok(Self::Sum { parts })
    }

    /// The cut-off measure `mu_r = chi_{|z| > r} mu`.
    pub fn cutoff(self, r: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&r) {
            return Err(Error::InvalidParameter(format!("cut-off radius must lie in [0, 1), got {r}")));
        }
        Ok(Self::Cutoff { r, mu: Box::new(self) })
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Zero { n } | Self::Lebesgue { n } => *n,
            Self::MuQg { g, .. } => g.dim(),
            Self::Scaled { mu, .. } | Self::Cutoff { mu, .. } => mu.dim(),
            Self::Sum { parts } => parts.first().map_or(0, |m| m.dim()),
        }
    }

    /// True when the density vanishes identically by construction.
    pub fn is_zero(&self) -> bool {
        match self {
            Self::Zero { .. } => true,
            Self::Lebesgue { .. } => false,
            Self::MuQg { g, .. } => g.to_polynomial().is_some_and(|p| p.radial().is_zero()),
            Self::Scaled { c, mu } => *c == 0.0 || mu.is_zero(),
            Self::Sum { parts } => parts.iter().all(|m| m.is_zero()),
            Self::Cutoff { mu, .. } => mu.is_zero(),
        }
    }

    /// Short human-readable tag.
    pub fn describe(&self) -> String {
        match self {
            Self::Zero { .. } => "zero".into(),
            Self::Lebesgue { .. } => "dv".into(),
            Self::MuQg { q, .. } => format!("mu_{{{q},g}}"),
            Self::Scaled { c, mu } => format!("{c}*{}", mu.describe()),
            Self::Sum { parts } => parts.iter().map(|m| m.describe()).collect::<Vec<_>>().join("+"),
            Self::Cutoff { r, mu } => format!("{}|_{{|z|>{r}}}", mu.describe()),
        }
    }

    /// Density at `z` against `dv`.
    pub fn density(&self, z: &CPoint) -> Result<f64> {
        match self {
            Self::Zero { .. } => Ok(0.0),
            Self::Lebesgue { .. } => Ok(1.0),
            Self::MuQg { g, q } => {
                let n = g.dim() as f64;
                let rg = g.radial_derivative(z)?;
                Ok(rg.norm_sqr() * z.defect().max(0.0).powf(n * (q - 1.0) + 1.0))
            }
            Self::Scaled { c, mu } => Ok(c * mu.density(z)?),
            Self::Sum { parts } => parts.iter().map(|m| m.density(z)).sum(),
            Self::Cutoff { r, mu } => {
                if z.norm() > *r {
                    mu.density(z)
                } else {
                    Ok(0.0)
                }
            }
        }
    }
}
