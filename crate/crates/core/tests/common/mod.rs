//! Fixtures shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::{PI, SQRT_2};

use qckit::generators::{gen_lattice, gen_union, LatticeSpec};
use qckit::spectrum::{lattice_spectrum, union_spectrum};
use qckit::{Complex64, PointMultiset, Spectrum, Window};

pub fn lattice_spec(alpha: f64, shift: f64, r: f64) -> LatticeSpec {
    LatticeSpec::new(alpha, shift, Window::closed(-r, r).unwrap()).unwrap()
}

pub fn lattice(alpha: f64, shift: f64, r: f64) -> PointMultiset {
    gen_lattice(&lattice_spec(alpha, shift, r)).unwrap()
}

pub fn lattice_spec_band(alpha: f64, shift: f64, band: f64) -> Spectrum {
    lattice_spectrum(&lattice_spec(alpha, shift, 1.0), Window::closed(-band, band).unwrap()).unwrap()
}

/// `(ℤ + 1/4) ∪ (√2ℤ + 1/4)` on `[−r, r]`.
pub fn union_fixture(r: f64) -> PointMultiset {
    gen_union(&[lattice(1.0, 0.25, r), lattice(SQRT_2, 0.25, r)]).unwrap()
}

pub fn union_fixture_spectrum(band: f64) -> Spectrum {
    union_spectrum(&[lattice_spec_band(1.0, 0.25, band), lattice_spec_band(SQRT_2, 0.25, band)]).unwrap()
}

pub fn union_density() -> f64 {
    1.0 + 1.0 / SQRT_2
}

/// `f′/f` of `{αn + s}`: `(π/α) cot(π(z − s)/α)`.
pub fn lattice_logderiv(z: Complex64, alpha: f64, s: f64) -> Complex64 {
    let w = PI * (z - s) / alpha;
    w.cos() / w.sin() * (PI / alpha)
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}
