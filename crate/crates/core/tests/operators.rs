use num_complex::Complex64;
use proptest::prelude::*;
use qpball::geometry::CPoint;
use qpball::holo::{AnalyticKernel, HoloFunction, PowerSeriesFunction};
use qpball::operators::*;
use qpball::sampling::Rng;
use qpball::search::ASearchConfig;

fn poly(n: usize) -> impl Strategy<Value = HoloFunction> {
    (any::<u64>(), 0u32..6, 1usize..6)
        .prop_map(move |(seed, deg, terms)| PowerSeriesFunction::random(n, deg, terms, &mut Rng::seeded(seed)).into())
}

fn exact(h: &HoloFunction) -> PowerSeriesFunction {
    h.to_polynomial().expect("polynomial inputs stay polynomial")
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tg_is_linear_in_f(g in poly(2), f1 in poly(2), f2 in poly(2)) {
        let sum = HoloFunction::polynomial(exact(&f1).add(&exact(&f2)).unwrap());
        let lhs = exact(&tg_apply(&g, &sum).unwrap());
        let rhs = exact(&tg_apply(&g, &f1).unwrap()).add(&exact(&tg_apply(&g, &f2).unwrap())).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn tg_and_lg_swap_roles(g in poly(3), f in poly(3)) {
        prop_assert_eq!(exact(&tg_apply(&g, &f).unwrap()), exact(&lg_apply(&f, &g).unwrap()));
    }

    #[test]
    fn images_vanish_at_the_origin(g in poly(2), f in poly(2)) {
        let o = CPoint::origin(2);
        prop_assert_eq!(tg_apply(&g, &f).unwrap().eval(&o).unwrap(), Complex64::new(0.0, 0.0));
        prop_assert_eq!(lg_apply(&g, &f).unwrap().eval(&o).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn multiplication_splits_into_three_parts(g in poly(2), f in poly(2)) {
        prop_assert_eq!(exact(&mg_apply(&g, &f).unwrap()), exact(&mg_decomposition(&g, &f).unwrap()));
    }
}

#[test]
fn constant_symbol_annihilates_under_tg() {
    let one = constant_symbol(2, 1.0).unwrap();
    let f = HoloFunction::coordinate(2, 0);
    assert!(exact(&tg_apply(&one, &f).unwrap()).is_zero());
    // L_1 f = f - f(0)
    assert_eq!(exact(&lg_apply(&one, &f).unwrap()), exact(&f));
}

#[test]
fn kernel_inputs_go_through_quadrature_and_agree_with_power_series() {
    // L_g f with f a log kernel: compare to the truncated series of the kernel
    let w = CPoint::from_reals(&[0.3, 0.2]).unwrap();
    let f: HoloFunction = AnalyticKernel::log_kernel(w.clone()).unwrap().into();
    let g = HoloFunction::coordinate(2, 1);
    let image = lg_apply(&g, &f).unwrap();
    assert!(image.to_polynomial().is_none());
    // log 1/(1-u) = sum u^k / k with u = <z, w>
    let z = CPoint::from_reals(&[0.5, -0.4]).unwrap();
    let u = z.inner(&w);
    let series: Complex64 = (1..80)
        .map(|k| {
            // L_g f = ∫ g(tz) Rf(tz) dt/t and R u^k/k = u^k, so each term gives z_2 u^k / (k+1)
            z.coords()[1] * u.powu(k) / (k as f64 + 1.0)
        })
        .sum();
    assert!((image.eval(&z).unwrap() - series).norm() < 1e-12);
}

#[test]
fn spec_rejects_bad_ranges() {
    let g = HoloFunction::coordinate(2, 0);
    assert!(OperatorSpec::new(OperatorKind::Tg, g.clone(), 1.2, 1.0).is_err());
    assert!(OperatorSpec::new(OperatorKind::Lg, g.clone(), 0.4, 1.0).is_err());
    assert!(OperatorSpec::new(OperatorKind::Mg, g.clone(), 1.0, 2.5).is_err());
    let s = OperatorSpec::new(OperatorKind::Tg, g, 0.75, 0.9).unwrap();
    assert!(s.open_case());
}

#[test]
fn identity_suite_is_exact_in_both_dimensions() {
    for n in [2, 3] {
        let cfg = IdentityConfig {
            pairs: 20,
            quadrature_points: 10,
            ..IdentityConfig::new(n, 5)
        };
        let r = identity_suite(&cfg).unwrap();
        assert!(r.exact(), "{r:?}");
        assert_eq!(r.residuals.len(), 4);
        assert!(r.quadrature_max_rel_err < 1e-9);
    }
}

#[test]
fn probe_sequence_tends_to_zero_at_the_origin() {
    let xi = CPoint::basis(2, 0);
    let fs = probe_sequence(&xi, &PROBE_DELTAS).unwrap();
    assert_eq!(fs.len(), PROBE_DELTAS.len());
    let ln2 = std::f64::consts::LN_2;
    for (f, d) in fs.iter().zip(PROBE_DELTAS) {
        // (log 2)^2 / log(2/delta)
        let at0 = f.eval(&CPoint::origin(2)).unwrap();
        assert!((at0.re - ln2 * ln2 / (2.0 / d).ln()).abs() < 1e-14 && at0.im == 0.0);
        // at w = (1-delta) xi the value is log(2/(1-|w|^2))^2 / log(2/delta)
        let w = xi.scale(1.0 - d);
        let expect = (2.0 / w.defect()).ln().powi(2) / (2.0 / d).ln();
        assert!((f.eval(&w).unwrap().re - expect).abs() < 1e-12 * expect);
    }
    assert!(probe_sequence(&xi, &[0.1, 0.2]).is_err());
}

#[test]
fn small_certificate_for_a_polynomial_symbol() {
    let cfg = OperatorConfig {
        samples: 4000,
        search: ASearchConfig {
            radii: vec![0.0, 0.5, 0.8],
            direction_m: 2,
            refinement_rounds: 0,
        },
        ..OperatorConfig::default()
    };
    let spec = OperatorSpec::new(OperatorKind::Lg, HoloFunction::coordinate(2, 0), 1.0, 1.0).unwrap();
    let suite: Vec<(String, HoloFunction)> = [0.5, 0.7]
        .iter()
        .map(|&r| (format!("{r}"), AnalyticKernel::log_kernel(CPoint::from_reals(&[r, 0.0]).unwrap()).unwrap().into()))
        .collect();
    let rep = boundedness_certificate(&spec, &suite, &cfg).unwrap();
    assert_eq!(rep.rows.len(), 2);
    let h = rep.measure_side.as_ref().unwrap().hinf.unwrap();
    assert!(h.value <= 1.0 && h.value > 0.99);
    assert_eq!(rep.verdict, OperatorVerdict::ConsistentWithBounded);
}
