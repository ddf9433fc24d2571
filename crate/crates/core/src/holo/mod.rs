//! Holomorphic functions on the ball with exact evaluation and first
//! derivatives: polynomials, closed-form kernels and their compositions.

mod kernel;
mod poly;
mod spec;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use kernel::AnalyticKernel;
pub use poly::{exact_complex, exact_from_f64, ExactCoeff, MultiIndex, PowerSeriesFunction, TermSpec};
pub use spec::FunctionSpec;

use crate::error::{Error, Result};
use crate::geometry::{Automorphism, CPoint};
use crate::quadrature::{integrate_complex, QuadConfig};
use crate::sampling::Rng;

/// Maximum nesting of sums, products, scalings and operator applications.
pub const MAX_DEPTH: usize = 8;

/// Which Riemann-Stieltjes integral a deferred operator node represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RsKind {
    /// `T_g f(z) = ∫_0^1 f(tz) Rg(tz) dt/t`
    Tg,
    /// `L_g f(z) = ∫_0^1 g(tz) Rf(tz) dt/t`
    Lg,
}

/// A holomorphic function on `B`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FunctionSpec", into = "FunctionSpec")]
pub enum HoloFunction {
    Polynomial(PowerSeriesFunction),
    Kernel(AnalyticKernel),
    Sum(Vec<HoloFunction>),
    Product(Vec<HoloFunction>),
    Scaled(Complex64, Box<HoloFunction>),
    /// `T_g f` or `L_g f` evaluated by ray quadrature. Its radial derivative
    /// comes from `R(T_g f) = f Rg` and `R(L_g f) = g Rf`.
    RiemannStieltjes {
        kind: RsKind,
        g: Box<HoloFunction>,
        f: Box<HoloFunction>,
    },
}

impl From<PowerSeriesFunction> for HoloFunction {
    fn from(p: PowerSeriesFunction) -> Self {
        Self::Polynomial(p)
    }
}

impl From<AnalyticKernel> for HoloFunction {
    fn from(k: AnalyticKernel) -> Self {
        Self::Kernel(k)
    }
}

fn ray_config() -> QuadConfig {
    QuadConfig {
        rel_tol: 1e-12,
        abs_tol: 1e-16,
        max_panels: 2000,
    }
}

/// `∫_0^1 h(t) dt / t` for an integrand that vanishes at `t = 0`.
pub(crate) fn ray_quadrature<H>(mut h: H) -> Result<Complex64>
where
    H: FnMut(f64) -> Result<Complex64>,
{
    Ok(integrate_complex(|t| Ok(h(t)? / t), 0.0, 1.0, &ray_config())?.value)
}

impl HoloFunction {
    pub fn polynomial(p: PowerSeriesFunction) -> Self {
        Self::Polynomial(p)
    }

    pub fn constant(n: usize, c: Complex64) -> Result<Self> {
        Ok(Self::Polynomial(PowerSeriesFunction::constant(n, exact_complex(c.re, c.im)?)))
    }

    pub fn coordinate(n: usize, k: usize) -> Self {
        Self::Polynomial(PowerSeriesFunction::coordinate(n, k))
    }

    pub fn sum(terms: Vec<HoloFunction>) -> Result<Self> {
        Self::check_children(&terms)?;
        Ok(Self::Sum(terms))
    }

    pub fn product(factors: Vec<HoloFunction>) -> Result<Self> {
        Self::check_children(&factors)?;
        Ok(Self::Product(factors))
    }

    pub fn scaled(c: Complex64, f: HoloFunction) -> Result<Self> {
        if f.depth() + 1 > MAX_DEPTH {
            return Err(Self::too_deep());
        }
        Ok(Self::Scaled(c, Box::new(f)))
    }

    pub fn riemann_stieltjes(kind: RsKind, g: HoloFunction, f: HoloFunction) -> Result<Self> {
        Self::check_children(&[g.clone(), f.clone()])?;
        Ok(Self::RiemannStieltjes {
            kind,
            g: Box::new(g),
            f: Box::new(f),
        })
    }

    fn too_deep() -> Error {
        Error::InvalidParameter(format!("composition depth exceeds {MAX_DEPTH}"))
    }

    fn check_children(items: &[HoloFunction]) -> Result<()> {
        let Some(first) = items.first() else {
            return Err(Error::InvalidParameter("composition needs at least one operand".into()));
        };
        let n = first.dim();
        if items.iter().any(|f| f.dim() != n) {
            return Err(Error::Domain("operands have different dimensions".into()));
        }
        if items.iter().map(|f| f.depth()).max().unwrap_or(0) + 1 > MAX_DEPTH {
            return Err(Self::too_deep());
        }
        Ok(())
    }

    pub fn depth(&self) -> usize {
        match self {
            Self::Polynomial(_) | Self::Kernel(_) => 0,
            Self::Sum(v) | Self::Product(v) => 1 + v.iter().map(|f| f.depth()).max().unwrap_or(0),
            Self::Scaled(_, f) => 1 + f.depth(),
            Self::RiemannStieltjes { g, f, .. } => 1 + g.depth().max(f.depth()),
        }
    }

    fn kernel_points(&self, out: &mut Vec<CPoint>) {
        match self {
            Self::Polynomial(_) => {}
            Self::Kernel(k) => out.push(k.point()),
            Self::Sum(parts) | Self::Product(parts) => parts.iter().for_each(|h| h.kernel_points(out)),
            Self::Scaled(_, h) => h.kernel_points(out),
            Self::RiemannStieltjes { g, f, .. } => {
                g.kernel_points(out);
                f.kernel_points(out);
            }
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Polynomial(p) => p.dim(),
            Self::Kernel(k) => k.dim(),
            Self::Sum(v) | Self::Product(v) => v.first().map_or(0, |f| f.dim()),
            Self::Scaled(_, f) => f.dim(),
            Self::RiemannStieltjes { f, .. } => f.dim(),
        }
    }

    pub fn as_polynomial(&self) -> Option<&PowerSeriesFunction> {
        match self {
            Self::Polynomial(p) => Some(p),
            _ => None,
        }
    }

    /// True when no kernel node occurs anywhere in the expression.
    pub fn is_polynomial_expr(&self) -> bool {
        match self {
            Self::Polynomial(_) => true,
            Self::Kernel(_) => false,
            Self::Sum(v) | Self::Product(v) => v.iter().all(|f| f.is_polynomial_expr()),
            Self::Scaled(_, f) => f.is_polynomial_expr(),
            Self::RiemannStieltjes { g, f, .. } => g.is_polynomial_expr() && f.is_polynomial_expr(),
        }
    }

    /// Collapses polynomial-only expressions into a single exact polynomial.
    pub fn to_polynomial(&self) -> Option<PowerSeriesFunction> {
        match self {
            Self::Polynomial(p) => Some(p.clone()),
            Self::Kernel(_) => None,
            Self::Sum(v) => {
                let mut acc = PowerSeriesFunction::zero(self.dim());
                for f in v {
                    acc = acc.add(&f.to_polynomial()?).ok()?;
                }
                Some(acc)
            }
            Self::Product(v) => {
                let mut acc = PowerSeriesFunction::one(self.dim());
                for f in v {
                    acc = acc.mul(&f.to_polynomial()?).ok()?;
                }
                Some(acc)
            }
            Self::Scaled(c, f) => Some(f.to_polynomial()?.scale(&exact_complex(c.re, c.im).ok()?)),
            Self::RiemannStieltjes { kind, g, f } => {
                let (g, f) = (g.to_polynomial()?, f.to_polynomial()?);
                let h = match kind {
                    RsKind::Tg => f.mul(&g.radial()).ok()?,
                    RsKind::Lg => g.mul(&f.radial()).ok()?,
                };
                Some(h.ray_divide())
            }
        }
    }

    fn check_point(&self, z: &CPoint) -> Result<()> {
        if z.dim() != self.dim() {
            return Err(Error::Domain(format!("point has dimension {}, function {}", z.dim(), self.dim())));
        }
        Ok(())
    }

    pub fn eval(&self, z: &CPoint) -> Result<Complex64> {
        self.check_point(z)?;
        self.eval_inner(z)
    }

    fn eval_inner(&self, z: &CPoint) -> Result<Complex64> {
        match self {
            Self::Polynomial(p) => Ok(p.eval(z)),
            Self::Kernel(k) => k.eval(z),
            Self::Sum(v) => v.iter().map(|f| f.eval_inner(z)).sum(),
            Self::Product(v) => v.iter().try_fold(Complex64::new(1.0, 0.0), |acc, f| Ok(acc * f.eval_inner(z)?)),
            Self::Scaled(c, f) => Ok(c * f.eval_inner(z)?),
            Self::RiemannStieltjes { .. } => ray_quadrature(|t| self.rs_integrand(&z.scale(t))),
        }
    }

    /// `f Rg` (for `T_g`) or `g Rf` (for `L_g`) at `z`; equals `R(Op f)(z)`.
    fn rs_integrand(&self, z: &CPoint) -> Result<Complex64> {
        let Self::RiemannStieltjes { kind, g, f } = self else {
            unreachable!("only called on operator nodes")
        };
        Ok(match kind {
            RsKind::Tg => f.eval_inner(z)? * g.radial_inner(z)?,
            RsKind::Lg => g.eval_inner(z)? * f.radial_inner(z)?,
        })
    }

    /// `Rf(z) = sum_j z_j ∂f/∂z_j (z)`.
    pub fn radial_derivative(&self, z: &CPoint) -> Result<Complex64> {
        self.check_point(z)?;
        self.radial_inner(z)
    }

    fn radial_inner(&self, z: &CPoint) -> Result<Complex64> {
        match self {
            Self::Polynomial(p) => Ok(p.eval_radial(z)),
            Self::Kernel(k) => k.radial_derivative(z),
            Self::Sum(v) => v.iter().map(|f| f.radial_inner(z)).sum(),
            Self::Product(v) => {
                let vals = v.iter().map(|f| f.eval_inner(z)).collect::<Result<Vec<_>>>()?;
                let mut acc = Complex64::new(0.0, 0.0);
                for (i, f) in v.iter().enumerate() {
                    let others: Complex64 = vals
                        .iter()
                        .enumerate()
                        .filter(|(j, _)| *j != i)
                        .map(|(_, x)| *x)
                        .product();
                    acc += f.radial_inner(z)? * others;
                }
                Ok(acc)
            }
            Self::Scaled(c, f) => Ok(c * f.radial_inner(z)?),
            Self::RiemannStieltjes { .. } => self.rs_integrand(z),
        }
    }

    /// Value and radial derivative together.
    pub fn value_and_radial(&self, z: &CPoint) -> Result<(Complex64, Complex64)> {
        Ok((self.eval(z)?, self.radial_derivative(z)?))
    }

    /// Complex gradient `(∂f/∂z_1, ..., ∂f/∂z_n)`.
    pub fn gradient(&self, z: &CPoint) -> Result<Vec<Complex64>> {
        self.check_point(z)?;
        self.gradient_inner(z)
    }

    fn gradient_inner(&self, z: &CPoint) -> Result<Vec<Complex64>> {
        let n = self.dim();
        match self {
            Self::Polynomial(p) => Ok(p.eval_gradient(z)),
            Self::Kernel(k) => k.gradient(z),
            Self::Sum(v) => {
                let mut acc = vec![Complex64::new(0.0, 0.0); n];
                for f in v {
                    for (a, b) in acc.iter_mut().zip(f.gradient_inner(z)?) {
                        *a += b;
                    }
                }
                Ok(acc)
            }
            Self::Product(v) => {
                let vals = v.iter().map(|f| f.eval_inner(z)).collect::<Result<Vec<_>>>()?;
                let mut acc = vec![Complex64::new(0.0, 0.0); n];
                for (i, f) in v.iter().enumerate() {
                    let others: Complex64 = vals
                        .iter()
                        .enumerate()
                        .filter(|(j, _)| *j != i)
                        .map(|(_, x)| *x)
                        .product();
                    for (a, b) in acc.iter_mut().zip(f.gradient_inner(z)?) {
                        *a += b * others;
                    }
                }
                Ok(acc)
            }
            Self::Scaled(c, f) => Ok(f.gradient_inner(z)?.into_iter().map(|x| c * x).collect()),
            Self::RiemannStieltjes { .. } => match self.to_polynomial() {
                Some(p) => Ok(p.eval_gradient(z)),
                None => Err(Error::Unsupported(
                    "gradient of an operator applied to a kernel needs second derivatives; use the radial form".into(),
                )),
            },
        }
    }

    /// `∇(f ∘ phi_z)(0) = Dphi_z(0)^T ∇f(z)`.
    pub fn invariant_gradient(&self, z: &CPoint) -> Result<Vec<Complex64>> {
        z.require_open_ball("z")?;
        let grad = self.gradient(z)?;
        let jac = Automorphism::new(z)?.jacobian_at_origin();
        let n = grad.len();
        Ok((0..n)
            .map(|k| (0..n).map(|j| grad[j] * jac[j][k]).sum())
            .collect())
    }

    /// `|∇~f(z)|^2`.
    pub fn invariant_gradient_norm_sq(&self, z: &CPoint) -> Result<f64> {
        Ok(self.invariant_gradient(z)?.iter().map(|c| c.norm_sqr()).sum())
    }
}

/// Sampling policy for [`hinf_norm_estimate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HinfConfig {
    pub samples: usize,
    pub seed: u64,
    /// Functions containing a kernel report `+inf` once a sample exceeds this.
    pub cap: f64,
    /// Factor turning the sampled lower bound into a working upper bound.
    pub safety_factor: f64,
}

impl Default for HinfConfig {
    fn default() -> Self {
        Self {
            samples: 20_000,
            seed: 0x4f1e,
            cap: 4.0,
            safety_factor: 1.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HinfEstimate {
    /// Sampled maximum of `|f|`, or `+inf` when the cap was exceeded.
    pub value: f64,
    pub sampled_max: f64,
    pub samples: usize,
    pub exceeded_cap: bool,
}

impl HinfEstimate {
    pub fn upper_bound(&self, cfg: &HinfConfig) -> f64 {
        self.value * cfg.safety_factor
    }
}

/// Sampled lower bound for `sup_B |f|`.
///
/// Points come from one seeded stream (origin, then alternating sphere points
/// and boundary-biased interior points), so the estimate is non-decreasing in
/// the sample count. Each kernel's boundary direction is probed as well,
/// since a kernel parameter near `S` makes a spike random points rarely hit.
pub fn hinf_norm_estimate(f: &HoloFunction, cfg: &HinfConfig) -> Result<HinfEstimate> {
    let n = f.dim();
    let mut rng = Rng::seeded(cfg.seed);
    let mut best = f.eval(&CPoint::origin(n))?.norm();
    let mut kernels = Vec::new();
    f.kernel_points(&mut kernels);
    for w in kernels.iter().filter(|w| w.norm() > 0.0) {
        let xi = w.scale(1.0 / w.norm());
        for t in [0.9, 0.99, 0.999, 1.0] {
            best = best.max(f.eval(&xi.scale(t))?.norm());
        }
    }
    for i in 1..cfg.samples {
        let z = if i % 2 == 1 {
            rng.sphere_point(n)
        } else {
            let u = rng.uniform();
            rng.sphere_point(n).scale(1.0 - u * u)
        };
        best = best.max(f.eval(&z)?.norm());
    }
    let exceeded = !f.is_polynomial_expr() && best > cfg.cap;
    Ok(HinfEstimate {
        value: if exceeded { f64::INFINITY } else { best },
        sampled_max: best,
        samples: cfg.samples.max(1),
        exceeded_cap: exceeded,
    })
}

/// Checks `|f(z1) - f(z2)| <= 2 hinf |phi_{z1}(z2)|` at one pair of points.
pub fn schwarz_pick_check(f: &HoloFunction, z1: &CPoint, z2: &CPoint, hinf: f64) -> Result<bool> {
    let lhs = (f.eval(z1)? - f.eval(z2)?).norm();
    let rho = crate::geometry::pseudo_hyperbolic_dist(z1, z2)?;
    // rounding in the two evaluations
    let slack = 1e-13 * (1.0 + hinf);
    Ok(lhs <= 2.0 * hinf * rho + slack)
}
