use num_complex::Complex64;
use proptest::prelude::*;
use qpball::geometry::CPoint;
use qpball::holo::*;
use qpball::integrate::{ray_integral, ray_integral_quadrature};
use qpball::sampling::Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn poly(n: usize) -> impl Strategy<Value = PowerSeriesFunction> {
    (any::<u64>(), 1u32..6, 1usize..6).prop_map(move |(seed, deg, terms)| {
        PowerSeriesFunction::random(n, deg, terms, &mut Rng::seeded(seed))
    })
}

fn point(n: usize) -> impl Strategy<Value = CPoint> {
    (prop::collection::vec(-1.0f64..1.0, 2 * n), 0.05f64..0.95).prop_filter_map("direction", move |(xs, r)| {
        let norm = xs.iter().map(|x| x * x).sum::<f64>().sqrt();
        (norm > 1e-3).then(|| CPoint::new((0..n).map(|k| c(xs[2 * k], xs[2 * k + 1]) * (r / norm))).unwrap())
    })
}

/// `d/dt f(tz)` at `t = 1` by a central difference: the radial derivative.
fn radial_fd(f: &HoloFunction, z: &CPoint) -> Complex64 {
    let h = 1e-5;
    (f.eval(&z.scale(1.0 + h)).unwrap() - f.eval(&z.scale(1.0 - h)).unwrap()) / (2.0 * h)
}

proptest! {
    #[test]
    fn radial_derivative_matches_difference_quotient(p in poly(2), z in point(2)) {
        let f = HoloFunction::polynomial(p);
        let exact = f.radial_derivative(&z).unwrap();
        prop_assert!((exact - radial_fd(&f, &z)).norm() < 1e-6 * (1.0 + exact.norm()));
    }

    #[test]
    fn product_evaluates_pointwise(p in poly(2), q in poly(2), z in point(2)) {
        let pq = p.mul(&q).unwrap();
        let lhs = pq.eval(&z);
        let rhs = p.eval(&z) * q.eval(&z);
        prop_assert!((lhs - rhs).norm() < 1e-10 * (1.0 + rhs.norm()));
    }

    #[test]
    fn ray_integral_inverts_radial_derivative(p in poly(3)) {
        // R commutes with nothing but kills constants, so R^{-1} R p = p - p(0)
        let back = p.radial().ray_integral().unwrap();
        let centered = p.sub(&PowerSeriesFunction::constant(3, p.constant_term())).unwrap();
        prop_assert_eq!(back, centered);
    }

    #[test]
    fn exact_and_quadrature_ray_integrals_agree(p in poly(2), z in point(2)) {
        let h = HoloFunction::polynomial(p.radial());
        let exact = ray_integral(&h, &z).unwrap();
        let quad = ray_integral_quadrature(&h, &z).unwrap();
        prop_assert!((exact - quad).norm() < 1e-9 * (1.0 + exact.norm()));
    }

    #[test]
    fn gradient_contracts_to_radial_derivative(p in poly(3), z in point(3)) {
        let f = HoloFunction::polynomial(p);
        let grad = f.gradient(&z).unwrap();
        let contracted: Complex64 = grad.iter().zip(z.coords()).map(|(g, zk)| g * zk).sum();
        let r = f.radial_derivative(&z).unwrap();
        prop_assert!((contracted - r).norm() < 1e-10 * (1.0 + r.norm()));
    }

    #[test]
    fn schwarz_pick_holds_for_polynomials(p in poly(2), z1 in point(2), z2 in point(2)) {
        let f = HoloFunction::polynomial(p);
        let h = hinf_norm_estimate(&f, &HinfConfig { samples: 4000, ..HinfConfig::default() }).unwrap();
        // the sampled max is a lower bound; inflate it to cover the true sup
        prop_assert!(schwarz_pick_check(&f, &z1, &z2, 2.0 * h.value).unwrap());
    }
}

#[test]
fn log_kernel_radial_derivative_matches_difference_quotient() {
    let w = CPoint::new([c(0.6, 0.2), c(-0.1, 0.3)]).unwrap();
    let f: HoloFunction = AnalyticKernel::log_kernel(w).unwrap().into();
    for z in [
        CPoint::new([c(0.2, -0.1), c(0.5, 0.0)]).unwrap(),
        CPoint::new([c(-0.7, 0.1), c(0.0, 0.6)]).unwrap(),
    ] {
        let exact = f.radial_derivative(&z).unwrap();
        assert!((exact - radial_fd(&f, &z)).norm() < 1e-6, "{exact} vs {}", radial_fd(&f, &z));
    }
}

#[test]
fn function_specs_round_trip_through_json() {
    let g = HoloFunction::sum(vec![
        HoloFunction::coordinate(2, 0),
        HoloFunction::scaled(c(0.5, -1.0), AnalyticKernel::log_kernel(CPoint::from_reals(&[0.9, 0.0]).unwrap()).unwrap().into())
            .unwrap(),
    ])
    .unwrap();
    let text = g.to_json();
    let rebuilt = HoloFunction::from_json(&text).unwrap();
    assert_eq!(rebuilt.to_json(), text);
    let z = CPoint::new([c(0.1, 0.2), c(0.3, -0.4)]).unwrap();
    assert_eq!(rebuilt.eval(&z).unwrap(), g.eval(&z).unwrap());
}

#[test]
fn hinf_caps_unbounded_kernels_but_not_polynomials() {
    let cfg = HinfConfig::default();
    let near: HoloFunction = AnalyticKernel::log_kernel(CPoint::from_reals(&[0.999, 0.0]).unwrap()).unwrap().into();
    assert!(hinf_norm_estimate(&near, &cfg).unwrap().value.is_infinite());
    let p = HoloFunction::scaled(c(10.0, 0.0), HoloFunction::coordinate(2, 1)).unwrap();
    let h = hinf_norm_estimate(&p, &cfg).unwrap();
    assert!(h.value <= 10.0 && h.value > 9.9);
}
