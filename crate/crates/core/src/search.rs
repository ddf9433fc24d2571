//! Derivative-free supremum search over automorphism parameters `a` and over
//! Carleson boxes: a coarse grid followed by local refinement rounds that
//! halve the step around the incumbent.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::{cover_box, CPoint, CarlesonBox};

/// Largest `|a|` the refinement may move to.
pub const MAX_RADIUS: f64 = 0.995;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ASearchConfig {
    pub radii: Vec<f64>,
    /// Refinement `m` of the direction net `cover_box(e_1, 2, m)`.
    pub direction_m: usize,
    pub refinement_rounds: usize,
}

impl Default for ASearchConfig {
    fn default() -> Self {
        Self {
            radii: vec![0.0, 0.3, 0.6, 0.8, 0.9, 0.95],
            direction_m: 4,
            refinement_rounds: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BoxSearchConfig {
    pub deltas: Vec<f64>,
    pub direction_m: usize,
    pub refinement_rounds: usize,
}

impl BoxSearchConfig {
    /// `count` log-spaced radii from `hi` down to `lo`.
    pub fn log_spaced(lo: f64, hi: f64, count: usize, direction_m: usize, refinement_rounds: usize) -> Self {
        let deltas = if count <= 1 {
            vec![hi]
        } else {
            let ratio = (lo / hi).ln() / (count as f64 - 1.0);
            (0..count).map(|k| (hi * (ratio * k as f64).exp()).min(2.0)).collect()
        };
        Self {
            deltas,
            direction_m,
            refinement_rounds,
        }
    }

    /// Dyadic radii `2, 1, 1/2, ..., 2^{-k}`.
    pub fn dyadic(smallest_exponent: i32, direction_m: usize, refinement_rounds: usize) -> Self {
        Self {
            deltas: (-1..=smallest_exponent).map(|k| 2f64.powi(-k)).collect(),
            direction_m,
            refinement_rounds,
        }
    }
}

impl Default for BoxSearchConfig {
    fn default() -> Self {
        Self::log_spaced(0.005, 2.0, 12, 4, 2)
    }
}

/// One evaluated search cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell<T> {
    pub arg: T,
    pub value: f64,
    pub stderr: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome<T> {
    pub best: Cell<T>,
    /// Every evaluated cell in evaluation order.
    pub cells: Vec<Cell<T>>,
}

/// Unit directions forming the `cover_box(e_1, 2, m)` net on the sphere.
pub fn direction_net(n: usize, m: usize) -> Result<Vec<CPoint>> {
    Ok(cover_box(&CPoint::basis(n, 0), 2.0, m)?
        .into_iter()
        .map(|c| c.center().clone())
        .collect())
}

/// Moves `xi` a Euclidean distance about `h` along each real direction
/// `±e_j`, `±i e_j` and renormalizes.
fn perturbations(xi: &CPoint, h: f64) -> Vec<CPoint> {
    let n = xi.dim();
    let mut out = Vec::with_capacity(4 * n);
    for j in 0..n {
        for unit in [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)] {
            for sign in [1.0, -1.0] {
                let mut c: Vec<Complex64> = xi.coords().to_vec();
                c[j] += unit * (sign * h);
                if let Ok(p) = CPoint::normalized(c) {
                    out.push(p);
                }
            }
        }
    }
    out
}

fn better<T>(cand: &Cell<T>, best: &Cell<T>) -> bool {
    cand.value > best.value
}

fn evaluate<T, F>(arg: T, eval: &F) -> Result<Cell<T>>
where
    F: Fn(&T) -> Result<(f64, f64, bool)>,
{
    let (value, stderr, converged) = eval(&arg)?;
    Ok(Cell {
        arg,
        value,
        stderr,
        converged,
    })
}

/// Supremum of `eval(a)` over `a = r xi`. Cells are visited in order of
/// increasing `|a|` and only a strictly larger value replaces the incumbent,
/// so ties go to the smaller `|a|`.
pub fn search_a<F>(n: usize, cfg: &ASearchConfig, eval: F) -> Result<SearchOutcome<CPoint>>
where
    F: Fn(&CPoint) -> Result<(f64, f64, bool)>,
{
    let dirs = direction_net(n, cfg.direction_m)?;
    let mut radii = cfg.radii.clone();
    radii.sort_by(f64::total_cmp);
    radii.dedup();
    let mut cells: Vec<Cell<CPoint>> = Vec::new();
    for &r in &radii {
        if r == 0.0 {
            cells.push(evaluate(CPoint::origin(n), &eval)?);
        } else {
            for xi in &dirs {
                cells.push(evaluate(xi.scale(r), &eval)?);
            }
        }
    }
    let mut best = cells[0].clone();
    for c in &cells[1..] {
        if better(c, &best) {
            best = c.clone();
        }
    }

    let r0 = best.arg.norm();
    let idx = radii.iter().position(|&r| (r - r0).abs() < 1e-12);
    let gap = |i: usize| -> f64 {
        let lo = if i > 0 { radii[i] - radii[i - 1] } else { f64::INFINITY };
        let hi = if i + 1 < radii.len() { radii[i + 1] - radii[i] } else { MAX_RADIUS - radii[i] };
        lo.min(hi).max(1e-3)
    };
    let mut dr = 0.5 * idx.map_or(0.05, gap);
    let mut h = 0.5 * (2.0 / cfg.direction_m.max(1) as f64).sqrt();
    for _ in 0..cfg.refinement_rounds {
        let r = best.arg.norm();
        let xi = if r > 0.0 { best.arg.scale(1.0 / r) } else { CPoint::basis(n, 0) };
        let mut cands: Vec<CPoint> = Vec::new();
        let mut rs = vec![(r - dr).max(0.0), r, (r + dr).min(MAX_RADIUS)];
        rs.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
        let dirs_here = if r > 0.0 {
            let mut v = vec![xi.clone()];
            v.extend(perturbations(&xi, h));
            v
        } else {
            dirs.clone()
        };
        for &rr in &rs {
            if rr == 0.0 {
                if r > 0.0 {
                    cands.push(CPoint::origin(n));
                }
                continue;
            }
            for d in &dirs_here {
                if rr == r && d == &xi {
                    continue;
                }
                cands.push(d.scale(rr));
            }
        }
        cands.sort_by(|x, y| x.norm().total_cmp(&y.norm()));
        for a in cands {
            let c = evaluate(a, &eval)?;
            if better(&c, &best) {
                best = c.clone();
            }
            cells.push(c);
        }
        dr *= 0.5;
        h *= 0.5;
    }
    Ok(SearchOutcome { best, cells })
}

/// Supremum of `eval(box)` over the radius grid times the direction net, then
/// local refinement in `delta` (geometric half-steps) and direction.
pub fn search_boxes<F>(n: usize, cfg: &BoxSearchConfig, eval: F) -> Result<SearchOutcome<CarlesonBox>>
where
    F: Fn(&CarlesonBox) -> Result<(f64, f64, bool)>,
{
    let dirs = direction_net(n, cfg.direction_m)?;
    let mut deltas = cfg.deltas.clone();
    deltas.sort_by(|a, b| b.total_cmp(a));
    deltas.dedup();
    let mut cells: Vec<Cell<CarlesonBox>> = Vec::new();
    for &d in &deltas {
        for xi in &dirs {
            cells.push(evaluate(CarlesonBox::new(xi.clone(), d)?, &eval)?);
        }
    }
    let mut best = cells[0].clone();
    for c in &cells[1..] {
        if better(c, &best) {
            best = c.clone();
        }
    }
    let mut log_step = if deltas.len() > 1 {
        0.5 * (deltas[0] / deltas[deltas.len() - 1]).ln() / (deltas.len() as f64 - 1.0)
    } else {
        0.5 * 2f64.ln()
    };
    let mut h = 0.25 * best.arg.delta().sqrt();
    for _ in 0..cfg.refinement_rounds {
        let d0 = best.arg.delta();
        let xi = best.arg.center().clone();
        let mut ds = vec![(d0 * log_step.exp()).min(2.0), d0, d0 * (-log_step).exp()];
        ds.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
        let mut dirs_here = vec![xi.clone()];
        dirs_here.extend(perturbations(&xi, h));
        for &d in &ds {
            for c in &dirs_here {
                if d == d0 && c == &xi {
                    continue;
                }
                let cell = evaluate(CarlesonBox::new(c.clone(), d)?, &eval)?;
                if better(&cell, &best) {
                    best = cell.clone();
                }
                cells.push(cell);
            }
        }
        log_step *= 0.5;
        h *= 0.5;
    }
    Ok(SearchOutcome { best, cells })
}

/// Groups box cells by radius and keeps the largest value per radius,
/// ordered by decreasing `delta`: `(delta, sup value, its stderr)`.
pub fn delta_profile(cells: &[Cell<CarlesonBox>]) -> Vec<(f64, f64, f64)> {
    let mut out: Vec<(f64, f64, f64)> = Vec::new();
    for c in cells {
        let d = c.arg.delta();
        match out.iter_mut().find(|(x, _, _)| *x == d) {
            Some(slot) => {
                if c.value > slot.1 {
                    *slot = (d, c.value, c.stderr);
                }
            }
            None => out.push((d, c.value, c.stderr)),
        }
    }
    out.sort_by(|a, b| b.0.total_cmp(&a.0));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn a_search_finds_interior_peak() {
        // smooth bump peaked at a* = 0.7 e_2
        let target = CPoint::from_reals(&[0.0, 0.7]).unwrap();
        let out = search_a(2, &ASearchConfig::default(), |a| {
            Ok(((-(a - &target).norm_sq() * 10.0).exp(), 0.0, true))
        })
        .unwrap();
        assert!(out.best.arg.distance(&target) < 0.2, "{:?}", out.best.arg);
        assert!(out.cells.iter().all(|c| c.value <= out.best.value));
    }

    #[test]
    fn ties_prefer_smaller_radius() {
        let out = search_a(2, &ASearchConfig::default(), |_| Ok((1.0, 0.0, true))).unwrap();
        assert_eq!(out.best.arg.norm(), 0.0);
    }

    #[test]
    fn box_grid_shapes() {
        let g = BoxSearchConfig::default();
        assert_eq!(g.deltas.len(), 12);
        assert!((g.deltas[0] - 2.0).abs() < 1e-12 && (g.deltas[11] - 0.005).abs() < 1e-12);
        let d = BoxSearchConfig::dyadic(9, 8, 0);
        assert_eq!(d.deltas.len(), 11);
        assert_eq!(d.deltas[0], 2.0);
    }

    #[test]
    fn box_search_profile_max_is_best() {
        let cfg = BoxSearchConfig::dyadic(4, 2, 1);
        let out = search_boxes(2, &cfg, |b| Ok((b.delta() * (1.0 + b.center()[0].re), 0.0, true))).unwrap();
        let prof = delta_profile(&out.cells);
        let m = prof.iter().map(|p| p.1).fold(0.0, f64::max);
        assert_eq!(m, out.best.value);
    }
}
