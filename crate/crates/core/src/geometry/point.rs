use std::fmt;
use std::ops::{Add, Index, Mul, Sub};

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use smallvec::SmallVec;

use crate::error::{Error, Result};

/// Slack allowed when checking `|z| <= 1` or `|xi| = 1`.
pub const UNIT_TOL: f64 = 1e-12;

pub(crate) type Coords = SmallVec<[Complex64; 4]>;

/// A point of `C^n`, usually of the closed unit ball.
///
/// Serialized as an array of `[re, im]` pairs.
#[derive(Clone, PartialEq)]
pub struct CPoint {
    coords: Coords,
}

impl CPoint {
    /// Point of the closed ball; rejects `|z| > 1 + 1e-12`.
    pub fn new(coords: impl IntoIterator<Item = Complex64>) -> Result<Self> {
        let p = Self::unchecked(coords);
        if p.coords.is_empty() {
            return Err(Error::Domain("point must have at least one coordinate".into()));
        }
        if p.norm() > 1.0 + UNIT_TOL {
            return Err(Error::Domain(format!("|z| = {} exceeds 1", p.norm())));
        }
        Ok(p)
    }

    /// Point from real coordinates, checked like [`CPoint::new`].
    pub fn from_reals(re: &[f64]) -> Result<Self> {
        Self::new(re.iter().map(|&x| Complex64::new(x, 0.0)))
    }

    /// Point of `S`; rejects `||xi| - 1| > 1e-12`.
    pub fn on_sphere(coords: impl IntoIterator<Item = Complex64>) -> Result<Self> {
        let p = Self::unchecked(coords);
        if p.coords.is_empty() || (p.norm() - 1.0).abs() > UNIT_TOL {
            return Err(Error::Domain(format!("|xi| = {} is not 1", p.norm())));
        }
        Ok(p)
    }

    /// Normalizes a nonzero vector onto `S`.
    pub fn normalized(coords: impl IntoIterator<Item = Complex64>) -> Result<Self> {
        let p = Self::unchecked(coords);
        let r = p.norm();
        if r == 0.0 || !r.is_finite() {
            return Err(Error::Domain("cannot normalize the zero vector".into()));
        }
        Ok(p.scale(1.0 / r))
    }

    pub(crate) fn unchecked(coords: impl IntoIterator<Item = Complex64>) -> Self {
        Self {
            coords: coords.into_iter().collect(),
        }
    }

    pub(crate) fn from_coords(coords: Coords) -> Self {
        Self { coords }
    }

    pub fn origin(n: usize) -> Self {
        Self::unchecked(std::iter::repeat_n(Complex64::new(0.0, 0.0), n))
    }

    /// `k`-th standard basis vector `e_k` (0-based).
    pub fn basis(n: usize, k: usize) -> Self {
        let mut p = Self::origin(n);
        p.coords[k] = Complex64::new(1.0, 0.0);
        p
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.coords
    }

    pub fn norm_sq(&self) -> f64 {
        self.coords.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// `<z, w> = sum z_j conj(w_j)`.
    pub fn inner(&self, w: &CPoint) -> Complex64 {
        debug_assert_eq!(self.dim(), w.dim());
        self.coords
            .iter()
            .zip(w.coords.iter())
            .map(|(a, b)| a * b.conj())
            .sum()
    }

    pub fn scale(&self, t: f64) -> CPoint {
        Self::from_coords(self.coords.iter().map(|c| c * t).collect())
    }

    pub fn scale_complex(&self, t: Complex64) -> CPoint {
        Self::from_coords(self.coords.iter().map(|c| c * t).collect())
    }

    pub fn is_in_open_ball(&self) -> bool {
        self.norm_sq() < 1.0
    }

    pub(crate) fn require_open_ball(&self, what: &str) -> Result<()> {
        if self.norm_sq() < 1.0 {
            Ok(())
        } else {
            Err(Error::Domain(format!("{what} must lie in the open ball, |{what}| = {}", self.norm())))
        }
    }

    pub(crate) fn require_unit(&self, what: &str) -> Result<()> {
        if (self.norm() - 1.0).abs() <= UNIT_TOL {
            Ok(())
        } else {
            Err(Error::Domain(format!("{what} must lie on the sphere, |{what}| = {}", self.norm())))
        }
    }

    /// `1 - |z|^2`.
    pub fn defect(&self) -> f64 {
        1.0 - self.norm_sq()
    }

    pub fn distance(&self, other: &CPoint) -> f64 {
        (self - other).norm()
    }
}

impl Index<usize> for CPoint {
    type Output = Complex64;
    fn index(&self, i: usize) -> &Complex64 {
        &self.coords[i]
    }
}

impl Add for &CPoint {
    type Output = CPoint;
    fn add(self, rhs: &CPoint) -> CPoint {
        CPoint::from_coords(self.coords.iter().zip(rhs.coords.iter()).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &CPoint {
    type Output = CPoint;
    fn sub(self, rhs: &CPoint) -> CPoint {
        CPoint::from_coords(self.coords.iter().zip(rhs.coords.iter()).map(|(a, b)| a - b).collect())
    }
}

impl Mul<&CPoint> for f64 {
    type Output = CPoint;
    fn mul(self, rhs: &CPoint) -> CPoint {
        rhs.scale(self)
    }
}

impl fmt::Debug for CPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}{:+}i", c.re, c.im)?;
        }
        f.write_str(")")
    }
}

impl Serialize for CPoint {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = self.coords.iter().map(|c| [c.re, c.im]).collect();
        pairs.serialize(s)
    }
}

impl<'de> Deserialize<'de> for CPoint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(d)?;
        if pairs.is_empty() {
            return Err(D::Error::custom("point needs at least one coordinate"));
        }
        Ok(CPoint::unchecked(pairs.into_iter().map(|[re, im]| Complex64::new(re, im))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constructor_rejects_outside_ball() {
        assert!(CPoint::from_reals(&[0.8, 0.7]).is_err());
        assert!(CPoint::from_reals(&[1.0 + 1e-13, 0.0]).is_ok());
        assert!(CPoint::on_sphere([Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)]).is_ok());
        assert!(CPoint::on_sphere([Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.7)]).is_err());
    }

    #[test]
    fn inner_is_conjugate_linear_in_second_slot() {
        let z = CPoint::unchecked([Complex64::new(0.0, 1.0), Complex64::new(0.5, 0.0)]);
        let w = CPoint::unchecked([Complex64::new(0.0, 1.0), Complex64::new(0.0, 0.5)]);
        // i * conj(i) + 0.5 * conj(0.5 i) = 1 - 0.25 i
        assert_eq!(z.inner(&w), Complex64::new(1.0, -0.25));
    }

    #[test]
    fn json_shape() {
        let z = CPoint::unchecked([Complex64::new(0.5, 0.0), Complex64::new(0.0, -0.25)]);
        let s = serde_json::to_string(&z).unwrap();
        assert_eq!(s, "[[0.5,0.0],[0.0,-0.25]]");
        let back: CPoint = serde_json::from_str(&s).unwrap();
        assert_eq!(back, z);
    }
}
