use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::holo::{HoloFunction, PowerSeriesFunction, RsKind};
use crate::sampling::Rng;

use super::{lg_apply, mg_apply, mg_decomposition, tg_apply};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityConfig {
    pub n: usize,
    pub pairs: usize,
    pub max_degree: u32,
    pub terms: usize,
    /// Random points per pair for the quadrature-versus-exact comparison
    /// (0 skips it).
    pub quadrature_points: usize,
    pub quadrature_pairs: usize,
    pub seed: u64,
}

impl IdentityConfig {
    pub fn new(n: usize, seed: u64) -> Self {
        Self {
            n,
            pairs: 100,
            max_degree: 6,
            terms: 6,
            quadrature_points: 50,
            quadrature_pairs: 1,
            seed,
        }
    }
}

/// One identity: how many pairs left a nonzero coefficient and the largest
/// coefficient modulus of any residual.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityResidual {
    pub identity: String,
    pub failures: usize,
    pub max_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub n: usize,
    pub pairs: usize,
    pub residuals: Vec<IdentityResidual>,
    /// Largest relative gap between ray quadrature and the exact path.
    pub quadrature_max_rel_err: f64,
    pub quadrature_points: usize,
}

impl IdentityReport {
    pub fn exact(&self) -> bool {
        self.residuals.iter().all(|r| r.failures == 0)
    }
}

fn poly(f: &HoloFunction) -> Result<PowerSeriesFunction> {
    f.to_polynomial()
        .ok_or_else(|| Error::Contract("exact path produced a non-polynomial".into()))
}

fn max_coeff(p: &PowerSeriesFunction) -> f64 {
    p.float_terms().iter().map(|(_, c)| c.norm()).fold(0.0, f64::max)
}

/// Coefficient-level check of `R(T_g f) = f Rg`, `R(L_g f) = g Rf`,
/// `T_g f = L_f g` and `M_g f = g(0)f(0) + T_g f + L_g f` on random
/// polynomial pairs, plus the quadrature path against the exact one.
pub fn identity_suite(cfg: &IdentityConfig) -> Result<IdentityReport> {
    let mut rng = Rng::seeded(cfg.seed);
    let names = ["R(T_g f) = f Rg", "R(L_g f) = g Rf", "T_g f = L_f g", "M_g f = g(0)f(0) + T_g f + L_g f"];
    let mut residuals: Vec<IdentityResidual> = names
        .iter()
        .map(|s| IdentityResidual {
            identity: s.to_string(),
            failures: 0,
            max_residual: 0.0,
        })
        .collect();
    let mut quad_err = 0.0f64;
    let mut quad_points = 0usize;
    for k in 0..cfg.pairs {
        let gp = PowerSeriesFunction::random(cfg.n, cfg.max_degree, cfg.terms, &mut rng);
        let fp = PowerSeriesFunction::random(cfg.n, cfg.max_degree, cfg.terms, &mut rng);
        let (g, f) = (HoloFunction::Polynomial(gp.clone()), HoloFunction::Polynomial(fp.clone()));
        let t = poly(&tg_apply(&g, &f)?)?;
        let l = poly(&lg_apply(&g, &f)?)?;
        let diffs = [
            t.radial().sub(&fp.mul(&gp.radial())?)?,
            l.radial().sub(&gp.mul(&fp.radial())?)?,
            t.sub(&poly(&lg_apply(&f, &g)?)?)?,
            poly(&mg_apply(&g, &f)?)?.sub(&poly(&mg_decomposition(&g, &f)?)?)?,
        ];
        for (r, d) in residuals.iter_mut().zip(&diffs) {
            if !d.is_zero() {
                r.failures += 1;
                r.max_residual = r.max_residual.max(max_coeff(d));
            }
        }
        if k < cfg.quadrature_pairs {
            for kind in [RsKind::Tg, RsKind::Lg] {
                let exact = if kind == RsKind::Tg { &t } else { &l };
                let node = HoloFunction::riemann_stieltjes(kind, g.clone(), f.clone())?;
                for _ in 0..cfg.quadrature_points {
                    let z = rng.ball_point(cfg.n, 0.95);
                    let (a, b) = (exact.eval(&z), node.eval(&z)?);
                    // relative to the size of the terms, which sets the rounding floor
                    let scale = a.norm().max(max_coeff(exact) * 1e-3).max(f64::MIN_POSITIVE);
                    quad_err = quad_err.max((a - b).norm() / scale);
                    quad_points += 1;
                }
            }
        }
    }
    Ok(IdentityReport {
        n: cfg.n,
        pairs: cfg.pairs,
        residuals,
        quadrature_max_rel_err: quad_err,
        quadrature_points: quad_points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suite_is_exact() {
        let cfg = IdentityConfig {
            pairs: 5,
            quadrature_points: 5,
            ..IdentityConfig::new(2, 1)
        };
        let r = identity_suite(&cfg).unwrap();
        assert!(r.exact(), "{r:?}");
        assert!(r.quadrature_max_rel_err < 1e-9);
        assert_eq!(r.quadrature_points, 10);
    }
}
