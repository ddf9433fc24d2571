use serde::{Deserialize, Serialize};

use super::boxes::{gauge_unchecked, CarlesonBox};
use super::point::CPoint;
use crate::error::{Error, Result};
use crate::sampling::Rng;

/// Tuning for the greedy covering net.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CoverConfig {
    /// Candidate points drawn per unit of `(4m)^n`.
    pub candidates_per_cell: usize,
    pub max_candidates: usize,
    /// Extra random points used to patch holes left by the candidate pool.
    pub repair_samples: usize,
    pub seed: u64,
}

impl Default for CoverConfig {
    fn default() -> Self {
        Self {
            candidates_per_cell: 64,
            max_candidates: 200_000,
            repair_samples: 20_000,
            seed: 0x5eed_c0de,
        }
    }
}

/// Covers the cap `Q'_delta(xi)` by caps `Q'_{delta/m}(xi_k)` with the default
/// configuration. See [`cover_box_with`].
pub fn cover_box(xi: &CPoint, delta: f64, m: usize) -> Result<Vec<CarlesonBox>> {
    cover_box_with(xi, delta, m, &CoverConfig::default())
}

/// Greedy maximal `delta/(2m)`-separated net on `Q'_delta(xi)`.
///
/// Centers are drawn from a large random pool of cap points (starting from
/// `xi` itself); a candidate is kept when its gauge to every kept center is at
/// least `delta/(2m)`. A second pass over fresh samples adds any point not yet
/// covered by a radius `delta/m` cap, which keeps the separation property.
pub fn cover_box_with(xi: &CPoint, delta: f64, m: usize, cfg: &CoverConfig) -> Result<Vec<CarlesonBox>> {
    if m == 0 {
        return Err(Error::Domain("covering refinement m must be at least 1".into()));
    }
    let outer = CarlesonBox::new(xi.clone(), delta)?;
    if m == 1 {
        return Ok(vec![outer]);
    }
    let n = xi.dim();
    let sep = delta / (2.0 * m as f64);
    let radius = delta / m as f64;
    let pool = (cfg.candidates_per_cell as f64 * (4.0 * m as f64).powi(n as i32)).min(cfg.max_candidates as f64) as usize;

    let mut rng = Rng::stream(cfg.seed, m as u64);
    let mut centers: Vec<CPoint> = vec![xi.clone()];
    for _ in 0..pool {
        let (c, _) = rng.cap_point(xi, delta)?;
        if centers.iter().all(|k| gauge_unchecked(&c, k) >= sep) {
            centers.push(c);
        }
    }
    for _ in 0..cfg.repair_samples {
        let (c, _) = rng.cap_point(xi, delta)?;
        if centers.iter().all(|k| gauge_unchecked(&c, k) >= radius) {
            centers.push(c);
        }
    }
    centers.into_iter().map(|c| CarlesonBox::new(c, radius)).collect()
}

/// Fraction of `samples` cap points of `Q'_delta(xi)` lying in some cap of `caps`.
pub fn coverage_fraction(caps: &[CarlesonBox], xi: &CPoint, delta: f64, samples: usize, seed: u64) -> Result<f64> {
    let mut rng = Rng::seeded(seed);
    let mut hit = 0usize;
    for _ in 0..samples {
        let (eta, _) = rng.cap_point(xi, delta)?;
        if caps.iter().any(|c| c.cap_contains(&eta)) {
            hit += 1;
        }
    }
    Ok(hit as f64 / samples as f64)
}

/// Minimum pairwise gauge between cap centers (`+inf` for fewer than two).
pub fn min_separation(caps: &[CarlesonBox]) -> f64 {
    let mut best = f64::INFINITY;
    for (i, a) in caps.iter().enumerate() {
        for b in &caps[i + 1..] {
            best = best.min(gauge_unchecked(a.center(), b.center()));
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_cap_for_m_one() {
        let xi = CPoint::basis(2, 0);
        let caps = cover_box(&xi, 0.5, 1).unwrap();
        assert_eq!(caps.len(), 1);
        assert_eq!(caps[0].center(), &xi);
        assert_eq!(caps[0].delta(), 0.5);
        assert!(cover_box(&xi, 0.5, 0).is_err());
    }

    #[test]
    fn net_is_separated_covering_and_centred_in_cap() {
        let xi = CPoint::normalized([num_complex::Complex64::new(0.3, 0.4), num_complex::Complex64::new(0.0, -0.8)]).unwrap();
        let delta = 0.5;
        let m = 2;
        let caps = cover_box(&xi, delta, m).unwrap();
        assert!(min_separation(&caps) >= delta / (2.0 * m as f64));
        let outer = CarlesonBox::new(xi.clone(), delta).unwrap();
        assert!(caps.iter().all(|c| outer.cap_contains(c.center())));
        assert_eq!(coverage_fraction(&caps, &xi, delta, 10_000, 99).unwrap(), 1.0);
    }
}
