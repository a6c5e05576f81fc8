//! End-to-end checks across generators, spectra, evaluators and Poisson.

mod common;

use std::f64::consts::SQRT_2;

use qckit::almost_periodic::find_almost_periods;
use qckit::entire_fn::{
    check_almost_periodicity_on_line, eval_F, eval_f, eval_logderiv_direct, eval_logderiv_spectral,
    ComplexPoint, EvalConfig,
};
use qckit::generators::{gen_trig_poly_zeros, GeneratorSpec, TrigPolySpec};
use qckit::poisson::{poisson_residual, poisson_residuals, GaussianTest};
use qckit::spectrum::{bohr_coefficient, combination_candidates, empirical_spectrum};
use qckit::{Complex64, PointMultiset, Spectrum, Window};
use rayon::prelude::*;

use common::*;

fn max_identity_defect(a: &PointMultiset, s: &Spectrum, cfg: &EvalConfig) -> f64 {
    let mut worst: f64 = 0.0;
    for y in [0.5, -0.5, 1.0, -1.0, 2.0, -2.0] {
        for x in linspace(-4.0, 4.0, 17) {
            let p = ComplexPoint::new(x, y);
            let d = eval_logderiv_direct(a, p, cfg).unwrap().value;
            let s = eval_logderiv_spectral(s, p, cfg).unwrap().value;
            worst = worst.max((d - s).norm());
        }
    }
    worst
}

#[test]
fn logderiv_identity_on_every_analytic_fixture() {
    let cfg = EvalConfig {
        truncation: 100_000,
        ..EvalConfig::default()
    };
    let fixtures = [
        (lattice(1.0, 0.5, 100_002.0), lattice_spec_band(1.0, 0.5, 30.0)),
        (lattice(1.0, 0.25, 100_002.0), lattice_spec_band(1.0, 0.25, 30.0)),
        (lattice(SQRT_2, 0.25, 150_000.0), lattice_spec_band(SQRT_2, 0.25, 30.0)),
        (union_fixture(60_000.0), union_fixture_spectrum(30.0)),
    ];
    for (a, s) in &fixtures {
        let d = max_identity_defect(a, s, &cfg);
        assert!(d <= 1e-8, "identity defect {d:e}");
    }
}

#[test]
fn direct_side_matches_per_lattice_cotangents() {
    let a = union_fixture(60_000.0);
    let cfg = EvalConfig {
        truncation: 100_000,
        ..EvalConfig::default()
    };
    for x in linspace(-3.0, 3.0, 7) {
        let z = Complex64::new(x, 0.7);
        let got = eval_logderiv_direct(&a, z.into(), &cfg).unwrap().value;
        let oracle = lattice_logderiv(z, 1.0, 0.25) + lattice_logderiv(z, SQRT_2, 0.25);
        assert!((got - oracle).norm() < 1e-8);
    }
}

#[test]
fn big_f_is_bounded_in_the_strip() {
    let a = union_fixture(6_100.0);
    let s = union_fixture_spectrum(3.0);
    let cfg = EvalConfig {
        truncation: 10_000,
        ..EvalConfig::default()
    };
    let sup = |hi: f64| -> f64 {
        let xs = linspace(0.0, hi, (hi * 10.0) as usize + 1);
        xs.par_iter()
            .flat_map_iter(|&x| [1.0, -1.0].map(|y| ComplexPoint::new(x, y)))
            .map(|p| eval_F(&a, &s, p, &cfg).unwrap().norm())
            .reduce(|| 0.0, f64::max)
    };
    let (short, long) = (sup(100.0), sup(200.0));
    assert!(short.is_finite() && long.is_finite());
    assert!((long - short).abs() <= 0.1 * short, "{short} vs {long}");
}

#[test]
fn logderiv_inherits_almost_periods_of_the_zeros() {
    let a = union_fixture(400.0);
    let s = union_fixture_spectrum(10.0);
    let eps = 0.05;
    let taus = find_almost_periods(&a, eps, Window::closed(5.0, 60.0).unwrap(), 0.005)
        .unwrap()
        .taus();
    assert!(!taus.is_empty());
    let cfg = EvalConfig::default();
    let xs = linspace(0.0, 20.0, 201);
    let rows =
        check_almost_periodicity_on_line(|p| Ok(eval_logderiv_spectral(&s, p, &cfg)?.value), 1.0, &taus, eps, &xs)
            .unwrap();
    let c = rows.iter().map(|r| r.sup_difference / eps).fold(0.0, f64::max);
    println!("almost periods {taus:?}: sup difference ≤ {c:.3}·ε");
    assert!(c <= 10.0, "C = {c}");
}

#[test]
fn cosine_f_on_a_horizontal_line() {
    let a = lattice(1.0, 0.5, 20_002.0);
    let cfg = EvalConfig {
        truncation: 20_000,
        ..EvalConfig::default()
    };
    let rows = check_almost_periodicity_on_line(
        |p| eval_f(&a, p, &cfg),
        1.0,
        &[2.0, 0.5],
        0.1,
        &linspace(-3.0, 3.0, 61),
    )
    .unwrap();
    assert!(rows[0].is_almost_period && rows[0].sup_difference < 1e-6);
    assert!(!rows[1].is_almost_period && rows[1].sup_difference >= 1.0);
}

#[test]
fn poisson_residual_shrinks_with_cutoffs() {
    let a = union_fixture(60.0);
    let s = union_fixture_spectrum(60.0);
    let h = GaussianTest::new(1.0, 0.3).unwrap();
    let mut last = f64::INFINITY;
    for cutoff in [3.0, 4.0, 5.0, 6.0, 8.0] {
        let r = poisson_residual(&a, &s, &h, cutoff, cutoff, 1.0).unwrap();
        assert!(r.residual <= last * (1.0 + 1e-9) + 1e-15, "{cutoff}: {} after {last}", r.residual);
        last = r.residual;
    }
    assert!(last <= 1e-12);
}

#[test]
fn poisson_residual_of_union_is_subadditive() {
    let h = GaussianTest::new(1.5, -0.2).unwrap();
    let parts = [
        (lattice(1.0, 0.25, 60.0), lattice_spec_band(1.0, 0.25, 60.0)),
        (lattice(SQRT_2, 0.25, 60.0), lattice_spec_band(SQRT_2, 0.25, 60.0)),
    ];
    let sum: f64 = parts
        .iter()
        .map(|(a, s)| poisson_residual(a, s, &h, 40.0, 40.0, 1e-12).unwrap().residual)
        .sum();
    let whole = poisson_residual(&union_fixture(60.0), &union_fixture_spectrum(60.0), &h, 40.0, 40.0, 1e-12)
        .unwrap()
        .residual;
    assert!(whole <= sum + 1e-13);
}

#[test]
fn poisson_batch_agrees_with_single_calls() {
    let a = lattice(1.0, 0.0, 60.0);
    let s = lattice_spec_band(1.0, 0.0, 60.0);
    let tests: Vec<GaussianTest> = [0.5, 1.0, 2.0, 3.0].iter().map(|&w| GaussianTest::new(w, 0.1).unwrap()).collect();
    let batch = poisson_residuals(&a, &s, &tests, 40.0, 40.0, 1e-12).unwrap();
    for (h, r) in tests.iter().zip(&batch) {
        assert_eq!(*r, poisson_residual(&a, &s, h, 40.0, 40.0, 1e-12).unwrap());
        assert!(r.residual < 1e-12);
    }
}

#[test]
fn empirical_spectrum_of_the_union_fixture() {
    let a = union_fixture(3_001.0);
    let band = Window::closed(-2.2, 2.2).unwrap();
    let candidates = combination_candidates(&[1.0, 1.0 / SQRT_2], 3, band);
    let probes: Vec<f64> = (0..12).map(|k| 0.13 + 0.157 * k as f64).collect();
    let s = empirical_spectrum(&a, &candidates, &probes, &[1e3, 3e3], band).unwrap();
    let exact = union_fixture_spectrum(2.2);
    for atom in exact.atoms() {
        let got = s.mass_at(atom.gamma).expect("atom detected");
        assert!((got - atom.mass).norm() < 2e-3, "γ = {}", atom.gamma);
    }
    assert_eq!(s.atoms().len(), exact.atoms().len());
}

#[test]
fn trig_poly_zeros_form_a_multiset_with_the_expected_density() {
    // sin(2πx) + 0.3 sin(2π√2 x): dominant term keeps two zeros per unit
    let spec = TrigPolySpec::from_sin_cos(
        &[(1.0, 0.0, 1.0), (0.3, 0.0, SQRT_2)],
        Window::closed(-200.0, 200.0).unwrap(),
    )
    .unwrap();
    let roots = gen_trig_poly_zeros(&spec, 0.01, 1e-6).unwrap();
    let a = &roots.multiset;
    assert!(roots.flagged.is_empty());
    let b0 = bohr_coefficient(a, 0.0, &[150.0, 199.0]).unwrap();
    assert!((b0.value.re - 2.0).abs() < 0.02, "{:?}", b0.value);
    for &x in a.points() {
        assert!(spec.eval(x).abs() < 1e-9);
    }
}

#[test]
fn generator_spec_documents_round_trip() {
    let text = r#"{"kind":"union","window":[-30,30],"lattices":[{"alpha":1,"shift":0.25},{"alpha":1.4142135623730951,"shift":0.25}]}"#;
    let spec = GeneratorSpec::from_json(text).unwrap();
    let a = spec.generate().unwrap();
    assert_eq!(PointMultiset::from_json(&a.to_json()).unwrap(), a);
    let s = spec.analytic_spectrum(Window::closed(-5.0, 5.0).unwrap()).unwrap();
    assert_eq!(Spectrum::from_json(&s.to_json()).unwrap(), s);
    assert!((s.zero_mass().re - union_density()).abs() < 1e-15);
}
