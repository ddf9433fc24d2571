//! Reference computations kept independent of `qpball`'s own samplers and
//! quadrature, for checking it from outside. The `acceptance` test target
//! of this crate runs the acceptance criteria.

use num_complex::Complex64;
use qpball::geometry::CPoint;
use rand::Rng;

/// Uniform point of the ball of radius `r` in C^n, by rejection from the cube.
pub fn uniform_ball<R: Rng>(rng: &mut R, n: usize, r: f64) -> CPoint {
    loop {
        let xs: Vec<f64> = (0..2 * n).map(|_| rng.random_range(-1.0..1.0)).collect();
        if xs.iter().map(|x| x * x).sum::<f64>() < 1.0 {
            return CPoint::new((0..n).map(|k| Complex64::new(xs[2 * k], xs[2 * k + 1]) * r))
                .expect("rejection keeps the point inside the ball");
        }
    }
}

/// `∫_B (1-|z|^2)^alpha dv = Γ(n+1) Γ(alpha+1) / Γ(n+alpha+1)` for integer `alpha`.
pub fn weighted_volume(n: usize, alpha: usize) -> f64 {
    let fact = |k: usize| (1..=k).map(|i| i as f64).product::<f64>();
    fact(n) * fact(alpha) / fact(n + alpha)
}

/// Least-squares slope of `y` against `x`.
pub fn slope(xs: &[(f64, f64)]) -> f64 {
    let k = xs.len() as f64;
    let (mx, my) = xs.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0 / k, a.1 + p.1 / k));
    let sxy: f64 = xs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = xs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn slope_of_a_line() {
        let pts: Vec<(f64, f64)> = (0..5).map(|i| (i as f64, 2.5 * i as f64 - 1.0)).collect();
        assert!((slope(&pts) - 2.5).abs() < 1e-14);
    }

    #[test]
    fn weighted_volume_small_cases() {
        assert_eq!(weighted_volume(1, 0), 1.0);
        // n = 1: ∫ (1-r^2) 2r dr = 1/2
        assert_eq!(weighted_volume(1, 1), 0.5);
        assert!((weighted_volume(2, 2) - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn uniform_ball_stays_inside_and_fills_the_radius() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pts: Vec<CPoint> = (0..4000).map(|_| uniform_ball(&mut rng, 2, 0.5)).collect();
        assert!(pts.iter().all(|z| z.norm() < 0.5));
        // |z|^4 / r^4 is uniform in real dimension 4
        let mean = pts.iter().map(|z| (z.norm() / 0.5).powi(4)).sum::<f64>() / pts.len() as f64;
        assert!((mean - 0.5).abs() < 0.02, "{mean}");
    }
}
