use std::f64::consts::LN_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::CPoint;

/// Closed-form test functions built from `1 - <z, w>`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AnalyticKernel {
    /// `f_w(z) = log 1/(1 - <z, w>)`.
    LogKernel { w: CPoint },
    /// `f_{xi,delta}(z) = log 2/(1 - <z, (1-delta) xi>)`.
    ShiftedLogKernel { xi: CPoint, delta: f64 },
    /// `(log 2/(1-|w|^2))^{-1} (log 2/(1 - <z, w>))^2`.
    ///
    /// `scale` stores the normalizing logarithm, so the boundary-sequence
    /// form `w = (1-delta) xi` with `log 2/delta` fits the same variant.
    NormalizedSquaredLog { w: CPoint, scale: f64 },
}

impl AnalyticKernel {
    pub fn log_kernel(w: CPoint) -> Result<Self> {
        w.require_open_ball("w")?;
        Ok(Self::LogKernel { w })
    }

    pub fn shifted_log(xi: CPoint, delta: f64) -> Result<Self> {
        xi.require_unit("xi")?;
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(Error::Domain(format!("delta must lie in (0, 1], got {delta}")));
        }
        Ok(Self::ShiftedLogKernel { xi, delta })
    }

    /// Normalized squared log centred at an interior point.
    pub fn normalized_squared_log(w: CPoint) -> Result<Self> {
        w.require_open_ball("w")?;
        let scale = (2.0 / w.defect()).ln();
        Ok(Self::NormalizedSquaredLog { w, scale })
    }

    /// The test-sequence member `f_j` for `w = (1-delta) xi`, normalized by `log 2/delta`.
    pub fn boundary_squared_log(xi: &CPoint, delta: f64) -> Result<Self> {
        xi.require_unit("xi")?;
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::Domain(format!("delta must lie in (0, 1), got {delta}")));
        }
        Ok(Self::NormalizedSquaredLog {
            w: xi.scale(1.0 - delta),
            scale: (2.0 / delta).ln(),
        })
    }

    pub fn dim(&self) -> usize {
        self.point().dim()
    }

    /// The kernel's interior parameter `w`.
    pub fn point(&self) -> CPoint {
        match self {
            Self::LogKernel { w } | Self::NormalizedSquaredLog { w, .. } => w.clone(),
            Self::ShiftedLogKernel { xi, delta } => xi.scale(1.0 - delta),
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        match self {
            Self::LogKernel { w } => w.require_open_ball("w"),
            Self::ShiftedLogKernel { xi, delta } => {
                xi.require_unit("xi")?;
                if !(*delta > 0.0 && *delta <= 1.0) {
                    return Err(Error::Domain(format!("delta must lie in (0, 1], got {delta}")));
                }
                Ok(())
            }
            Self::NormalizedSquaredLog { w, scale } => {
                w.require_open_ball("w")?;
                if !(*scale > 0.0 && scale.is_finite()) {
                    return Err(Error::Domain(format!("normalizing log must be positive, got {scale}")));
                }
                Ok(())
            }
        }
    }

    /// `1 - <z, w>`; its real part is positive on the closed ball for `|w| < 1`,
    /// so the principal log never crosses its branch cut.
    fn base(&self, z: &CPoint) -> Result<(Complex64, CPoint)> {
        let w = self.point();
        if z.dim() != w.dim() {
            return Err(Error::Domain(format!("dimension mismatch: {} vs {}", z.dim(), w.dim())));
        }
        let d = Complex64::new(1.0, 0.0) - z.inner(&w);
        if d.norm() == 0.0 || !d.re.is_finite() {
            return Err(Error::Pole("1 - <z, w> vanishes".into()));
        }
        debug_assert!(d.re > 0.0);
        Ok((d, w))
    }

    /// `log 1/(1 - <z,w>)` with the kernel's additive shift.
    fn log_part(&self, d: Complex64) -> Complex64 {
        match self {
            Self::LogKernel { .. } => -d.ln(),
            Self::ShiftedLogKernel { .. } | Self::NormalizedSquaredLog { .. } => LN_2 - d.ln(),
        }
    }

    pub fn eval(&self, z: &CPoint) -> Result<Complex64> {
        let (d, _) = self.base(z)?;
        let h = self.log_part(d);
        Ok(match self {
            Self::NormalizedSquaredLog { scale, .. } => h * h / *scale,
            _ => h,
        })
    }

    pub fn radial_derivative(&self, z: &CPoint) -> Result<Complex64> {
        let (d, w) = self.base(z)?;
        let rh = z.inner(&w) / d;
        Ok(match self {
            Self::NormalizedSquaredLog { scale, .. } => 2.0 * self.log_part(d) * rh / *scale,
            _ => rh,
        })
    }

    pub fn gradient(&self, z: &CPoint) -> Result<Vec<Complex64>> {
        let (d, w) = self.base(z)?;
        let factor = match self {
            Self::NormalizedSquaredLog { scale, .. } => 2.0 * self.log_part(d) / (*scale * d),
            _ => 1.0 / d,
        };
        Ok(w.coords().iter().map(|wj| wj.conj() * factor).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_kernel_examples() {
        let w = CPoint::from_reals(&[0.5, 0.0]).unwrap();
        let k = AnalyticKernel::log_kernel(w.clone()).unwrap();
        assert!((k.eval(&w).unwrap().re - (4.0f64 / 3.0).ln()).abs() < 1e-15);
        assert!((k.radial_derivative(&w).unwrap().re - 1.0 / 3.0).abs() < 1e-15);
        let k0 = AnalyticKernel::log_kernel(CPoint::origin(2)).unwrap();
        assert_eq!(k0.eval(&w).unwrap(), Complex64::new(0.0, 0.0));
        assert!(AnalyticKernel::log_kernel(CPoint::basis(2, 0)).is_err());
    }

    #[test]
    fn squared_log_forms_agree() {
        let xi = CPoint::basis(2, 1);
        let a = AnalyticKernel::boundary_squared_log(&xi, 0.1).unwrap();
        let z = CPoint::from_reals(&[0.2, 0.7]).unwrap();
        let h = 2f64.ln() - (Complex64::new(1.0, 0.0) - 0.9 * 0.7).ln();
        let expect = h * h / (20f64).ln();
        assert!((a.eval(&z).unwrap() - expect).norm() < 1e-14);
    }

    #[test]
    fn gradient_is_consistent_with_radial_derivative() {
        let w = CPoint::new([Complex64::new(0.3, -0.4), Complex64::new(0.1, 0.5)]).unwrap();
        let z = CPoint::new([Complex64::new(-0.2, 0.3), Complex64::new(0.6, 0.1)]).unwrap();
        let kernels = [
            AnalyticKernel::log_kernel(w.clone()).unwrap(),
            AnalyticKernel::normalized_squared_log(w.clone()).unwrap(),
            AnalyticKernel::shifted_log(CPoint::basis(2, 0), 0.2).unwrap(),
        ];
        for k in &kernels {
            let g = k.gradient(&z).unwrap();
            let r: Complex64 = g.iter().zip(z.coords()).map(|(a, b)| a * b).sum();
            assert!((r - k.radial_derivative(&z).unwrap()).norm() < 1e-12);
        }
    }
}
