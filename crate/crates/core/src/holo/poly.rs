use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::CPoint;
use crate::sampling::Rng;

/// Exact complex rational coefficient.
pub type ExactCoeff = Complex<BigRational>;

/// Multi-index `alpha = (alpha_1, ..., alpha_n)`.
pub type MultiIndex = Vec<u32>;

fn degree(alpha: &[u32]) -> u32 {
    alpha.iter().sum()
}

fn to_f64(c: &ExactCoeff) -> Complex64 {
    Complex64::new(c.re.to_f64().unwrap_or(f64::NAN), c.im.to_f64().unwrap_or(f64::NAN))
}

/// Exact conversion of a finite float to a rational.
pub fn exact_from_f64(x: f64) -> Result<BigRational> {
    BigRational::from_float(x).ok_or_else(|| Error::Parse(format!("coefficient {x} is not finite")))
}

pub fn exact_complex(re: f64, im: f64) -> Result<ExactCoeff> {
    Ok(Complex::new(exact_from_f64(re)?, exact_from_f64(im)?))
}

/// Polynomial `sum c_alpha z^alpha` on `C^n` with exact complex rational
/// coefficients. A float copy of the coefficients is cached for evaluation.
#[derive(Clone)]
pub struct PowerSeriesFunction {
    n: usize,
    terms: BTreeMap<MultiIndex, ExactCoeff>,
    cached: Vec<(MultiIndex, Complex64)>,
    max_degree: u32,
}

impl PartialEq for PowerSeriesFunction {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.terms == other.terms
    }
}

impl fmt::Debug for PowerSeriesFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PowerSeriesFunction")
            .field("n", &self.n)
            .field("terms", &self.cached)
            .finish()
    }
}

impl PowerSeriesFunction {
    /// Builds from exact terms; zero coefficients are dropped and repeated
    /// multi-indices are summed.
    pub fn from_exact(n: usize, terms: impl IntoIterator<Item = (MultiIndex, ExactCoeff)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("polynomial dimension must be positive".into()));
        }
        let mut map: BTreeMap<MultiIndex, ExactCoeff> = BTreeMap::new();
        for (alpha, c) in terms {
            if alpha.len() != n {
                return Err(Error::Domain(format!(
                    "multi-index {alpha:?} has length {}, expected {n}",
                    alpha.len()
                )));
            }
            let slot = map.entry(alpha).or_insert_with(ExactCoeff::zero);
            *slot = &*slot + c;
        }
        map.retain(|_, c| !c.is_zero());
        Ok(Self::from_map(n, map))
    }

    /// Builds from float coefficients, each converted exactly.
    pub fn from_f64_terms(n: usize, terms: impl IntoIterator<Item = (MultiIndex, Complex64)>) -> Result<Self> {
        let exact = terms
            .into_iter()
            .map(|(a, c)| Ok((a, exact_complex(c.re, c.im)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::from_exact(n, exact)
    }

    fn from_map(n: usize, terms: BTreeMap<MultiIndex, ExactCoeff>) -> Self {
        let cached: Vec<_> = terms.iter().map(|(a, c)| (a.clone(), to_f64(c))).collect();
        let max_degree = terms.keys().map(|a| degree(a)).max().unwrap_or(0);
        Self {
            n,
            terms,
            cached,
            max_degree,
        }
    }

    pub fn zero(n: usize) -> Self {
        Self::from_map(n, BTreeMap::new())
    }

    pub fn constant(n: usize, c: ExactCoeff) -> Self {
        let mut m = BTreeMap::new();
        if !c.is_zero() {
            m.insert(vec![0; n], c);
        }
        Self::from_map(n, m)
    }

    pub fn one(n: usize) -> Self {
        Self::constant(n, ExactCoeff::new(BigRational::from_integer(1.into()), BigRational::zero()))
    }

    /// The coordinate function `z_k` (0-based).
    pub fn coordinate(n: usize, k: usize) -> Self {
        let mut alpha = vec![0; n];
        alpha[k] = 1;
        Self::monomial(alpha)
    }

    pub fn monomial(alpha: MultiIndex) -> Self {
        let n = alpha.len();
        let mut m = BTreeMap::new();
        m.insert(alpha, ExactCoeff::new(BigRational::from_integer(1.into()), BigRational::zero()));
        Self::from_map(n, m)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn max_degree(&self) -> u32 {
        self.max_degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &ExactCoeff)> {
        self.terms.iter()
    }

    pub fn float_terms(&self) -> &[(MultiIndex, Complex64)] {
        &self.cached
    }

    /// Exact coefficient of `z^0`.
    pub fn constant_term(&self) -> ExactCoeff {
        self.terms.get(&vec![0; self.n]).cloned().unwrap_or_else(ExactCoeff::zero)
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::Domain(format!("dimension mismatch: {} vs {}", self.n, other.n)));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let mut m = self.terms.clone();
        for (a, c) in &other.terms {
            let slot = m.entry(a.clone()).or_insert_with(ExactCoeff::zero);
            *slot = &*slot + c;
        }
        m.retain(|_, c| !c.is_zero());
        Ok(Self::from_map(self.n, m))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(&ExactCoeff::new(BigRational::from_integer((-1).into()), BigRational::zero())))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let mut m: BTreeMap<MultiIndex, ExactCoeff> = BTreeMap::new();
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                let g: MultiIndex = a.iter().zip(b).map(|(x, y)| x + y).collect();
                let slot = m.entry(g).or_insert_with(ExactCoeff::zero);
                *slot = &*slot + ca * cb;
            }
        }
        m.retain(|_, c| !c.is_zero());
        Ok(Self::from_map(self.n, m))
    }

    pub fn scale(&self, c: &ExactCoeff) -> Self {
        let mut m: BTreeMap<MultiIndex, ExactCoeff> = self.terms.iter().map(|(a, x)| (a.clone(), x * c)).collect();
        m.retain(|_, x| !x.is_zero());
        Self::from_map(self.n, m)
    }

    /// `Rf = sum |alpha| c_alpha z^alpha`.
    pub fn radial(&self) -> Self {
        let mut m = BTreeMap::new();
        for (a, c) in &self.terms {
            let d = degree(a);
            if d > 0 {
                m.insert(a.clone(), c * BigRational::from_integer(BigInt::from(d)));
            }
        }
        Self::from_map(self.n, m)
    }

    /// Term-wise `∫_0^1 h(tz) dt/t`: `c_gamma / |gamma|` for `gamma != 0`.
    ///
    /// The constant term is dropped, which is exactly the `T_g f(0) = 0`
    /// convention; [`PowerSeriesFunction::ray_integral`] refuses such input
    /// instead.
    pub fn ray_divide(&self) -> Self {
        let mut m = BTreeMap::new();
        for (a, c) in &self.terms {
            let d = degree(a);
            if d > 0 {
                m.insert(a.clone(), c / BigRational::from_integer(BigInt::from(d)));
            }
        }
        Self::from_map(self.n, m)
    }

    /// `∫_0^1 h(tz) dt/t` as a polynomial; errors if `h(0) != 0`.
    pub fn ray_integral(&self) -> Result<Self> {
        if !self.constant_term().is_zero() {
            return Err(Error::Contract(
                "ray integral requires h(0) = 0; the integral diverges at t = 0".into(),
            ));
        }
        Ok(self.ray_divide())
    }

    /// `∂f/∂z_k` as a polynomial.
    pub fn partial(&self, k: usize) -> Self {
        let mut m = BTreeMap::new();
        for (a, c) in &self.terms {
            if a[k] > 0 {
                let mut b = a.clone();
                b[k] -= 1;
                m.insert(b, c * BigRational::from_integer(BigInt::from(a[k])));
            }
        }
        Self::from_map(self.n, m)
    }

    fn powers(&self, z: &CPoint) -> Vec<Vec<Complex64>> {
        let d = self.max_degree as usize;
        z.coords()
            .iter()
            .map(|&zj| {
                let mut p = Vec::with_capacity(d + 1);
                let mut acc = Complex64::new(1.0, 0.0);
                p.push(acc);
                for _ in 0..d {
                    acc *= zj;
                    p.push(acc);
                }
                p
            })
            .collect()
    }

    fn monomial_value(pw: &[Vec<Complex64>], alpha: &[u32]) -> Complex64 {
        alpha
            .iter()
            .enumerate()
            .fold(Complex64::new(1.0, 0.0), |acc, (j, &e)| acc * pw[j][e as usize])
    }

    pub fn eval(&self, z: &CPoint) -> Complex64 {
        debug_assert_eq!(z.dim(), self.n);
        let pw = self.powers(z);
        self.cached.iter().map(|(a, c)| c * Self::monomial_value(&pw, a)).sum()
    }

    pub fn eval_radial(&self, z: &CPoint) -> Complex64 {
        let pw = self.powers(z);
        self.cached
            .iter()
            .map(|(a, c)| c * Self::monomial_value(&pw, a) * degree(a) as f64)
            .sum()
    }

    pub fn eval_gradient(&self, z: &CPoint) -> Vec<Complex64> {
        let pw = self.powers(z);
        let mut g = vec![Complex64::new(0.0, 0.0); self.n];
        for (a, c) in &self.cached {
            for k in 0..self.n {
                if a[k] == 0 {
                    continue;
                }
                let mut v = *c * a[k] as f64;
                for (j, &e) in a.iter().enumerate() {
                    let e = if j == k { e - 1 } else { e };
                    v *= pw[j][e as usize];
                }
                g[k] += v;
            }
        }
        g
    }

    /// Random polynomial with small-rational complex coefficients.
    pub fn random(n: usize, max_degree: u32, term_count: usize, rng: &mut Rng) -> Self {
        let mut terms = Vec::with_capacity(term_count);
        for _ in 0..term_count {
            let d = (rng.uniform() * (max_degree as f64 + 1.0)) as u32;
            let mut alpha = vec![0u32; n];
            for _ in 0..d.min(max_degree) {
                let k = ((rng.uniform() * n as f64) as usize).min(n - 1);
                alpha[k] += 1;
            }
            let mut small = || {
                let num = (rng.uniform() * 19.0) as i64 - 9;
                let den = 1 + (rng.uniform() * 8.0) as i64;
                BigRational::new(num.into(), den.into())
            };
            let c = ExactCoeff::new(small(), small());
            terms.push((alpha, c));
        }
        Self::from_exact(n, terms).expect("generated multi-indices have length n")
    }
}

/// JSON term `{"alpha": [...], "re": .., "im": ..}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermSpec {
    pub alpha: MultiIndex,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

impl PowerSeriesFunction {
    pub fn to_term_specs(&self) -> Vec<TermSpec> {
        self.cached
            .iter()
            .map(|(a, c)| TermSpec {
                alpha: a.clone(),
                re: c.re,
                im: c.im,
            })
            .collect()
    }

    pub fn from_term_specs(n: usize, terms: &[TermSpec]) -> Result<Self> {
        Self::from_f64_terms(n, terms.iter().map(|t| (t.alpha.clone(), Complex64::new(t.re, t.im))))
    }
}
