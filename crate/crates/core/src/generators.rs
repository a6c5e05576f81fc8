//! Fixture families: shifted lattices, finite unions of lattices and the real
//! zero sets of real trigonometric polynomials.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multiset::{PointMultiset, Window};
use crate::spectrum::{lattice_spectrum, union_spectrum, Spectrum};

/// Relative residual accepted for a located root, scaled by the coefficient l1 norm.
pub const ROOT_RTOL: f64 = 1e-10;

/// `{ alpha * n + shift : n ∈ ℤ } ∩ window`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeSpec {
    pub alpha: f64,
    pub shift: f64,
    pub window: Window,
}

impl LatticeSpec {
    pub fn new(alpha: f64, shift: f64, window: Window) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidInput(format!("lattice spacing must be positive, got {alpha}")));
        }
        if !shift.is_finite() {
            return Err(Error::InvalidInput(format!("lattice shift {shift} is not finite")));
        }
        Ok(Self { alpha, shift, window })
    }
}

pub fn gen_lattice(spec: &LatticeSpec) -> Result<PointMultiset> {
    let LatticeSpec { alpha, shift, window } = *spec;
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidInput(format!("lattice spacing must be positive, got {alpha}")));
    }
    let first = ((window.lo - shift) / alpha).floor() as i64 - 1;
    let last = ((window.hi - shift) / alpha).ceil() as i64 + 1;
    let count = (last - first) as u64;
    if count > crate::multiset::MAX_EXPANDED_LEN as u64 {
        return Err(Error::InvalidInput(format!("lattice would produce {count} points")));
    }
    let points: Vec<(f64, u32)> = (first..=last)
        .map(|n| alpha * n as f64 + shift)
        .filter(|&x| window.contains(x))
        .map(|x| (x, 1))
        .collect();
    finish(&points, window, 0.0)
}

/// Multiset union; coincident points add multiplicities.
pub fn gen_union(parts: &[PointMultiset]) -> Result<PointMultiset> {
    let first = parts
        .first()
        .ok_or_else(|| Error::InvalidInput("union of zero multisets".into()))?;
    let window = first.window();
    let mut points = Vec::new();
    for part in parts {
        let w = part.window();
        if w.lo != window.lo || w.hi != window.hi {
            return Err(Error::InvalidInput(format!(
                "union parts have mismatched windows [{}, {}] and [{}, {}]",
                window.lo, window.hi, w.lo, w.hi
            )));
        }
        points.extend(part.points().iter().copied().zip(part.multiplicities().iter().copied()));
    }
    finish(&points, window, 0.0)
}

fn finish(points: &[(f64, u32)], window: Window, merge_tol: f64) -> Result<PointMultiset> {
    let has_zero = points.iter().any(|&(x, _)| x == 0.0);
    PointMultiset::build_with_tolerance(points, Window::closed(window.lo, window.hi)?, !has_zero, merge_tol)
}

/// One term `coeff · e^{2πi·freq·x}`; frequencies are in cycles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrigTerm {
    pub coeff: Complex64,
    pub freq: f64,
}

/// A trigonometric polynomial whose term list is conjugate-symmetric, so it is
/// real on the real line.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigPolySpec {
    terms: Vec<TrigTerm>,
    window: Window,
}

impl TrigPolySpec {
    pub fn new(terms: Vec<TrigTerm>, window: Window) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidInput("trigonometric polynomial has no terms".into()));
        }
        let mut merged: Vec<TrigTerm> = Vec::new();
        for t in terms {
            if !(t.freq.is_finite() && t.coeff.re.is_finite() && t.coeff.im.is_finite()) {
                return Err(Error::InvalidInput("non-finite trigonometric term".into()));
            }
            match merged.iter_mut().find(|m| m.freq == t.freq) {
                Some(m) => m.coeff += t.coeff,
                None => merged.push(t),
            }
        }
        let scale: f64 = merged.iter().map(|t| t.coeff.norm()).sum::<f64>().max(f64::MIN_POSITIVE);
        for t in &merged {
            let partner = merged
                .iter()
                .find(|m| m.freq == -t.freq)
                .map(|m| m.coeff)
                .unwrap_or_default();
            if (partner - t.coeff.conj()).norm() > 1e-12 * scale {
                return Err(Error::InvalidInput(format!(
                    "term at frequency {} has no conjugate partner; polynomial is not real",
                    t.freq
                )));
            }
        }
        merged.sort_by(|a, b| a.freq.partial_cmp(&b.freq).expect("finite"));
        Ok(Self { terms: merged, window })
    }

    /// Convenience constructor from real sine/cosine amplitudes:
    /// `Σ s_j sin(2πω_j x) + c_j cos(2πω_j x)`.
    pub fn from_sin_cos(parts: &[(f64, f64, f64)], window: Window) -> Result<Self> {
        let mut terms = Vec::with_capacity(2 * parts.len());
        for &(sin_amp, cos_amp, freq) in parts {
            // sin θ = (e^{iθ} − e^{−iθ})/2i, cos θ = (e^{iθ} + e^{−iθ})/2
            let c = Complex64::new(cos_amp / 2.0, -sin_amp / 2.0);
            terms.push(TrigTerm { coeff: c, freq });
            terms.push(TrigTerm { coeff: c.conj(), freq: -freq });
        }
        Self::new(terms, window)
    }

    pub fn terms(&self) -> &[TrigTerm] {
        &self.terms
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn coeff_l1(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff.norm()).sum()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| (t.coeff * Complex64::cis(2.0 * PI * t.freq * x)).re)
            .sum()
    }

    pub fn derivative(&self, x: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| (t.coeff * Complex64::new(0.0, 2.0 * PI * t.freq) * Complex64::cis(2.0 * PI * t.freq * x)).re)
            .sum()
    }
}

/// Roots located by [`gen_trig_poly_zeros`].
#[derive(Debug, Clone, PartialEq)]
pub struct TrigRoots {
    pub multiset: PointMultiset,
    /// Roots whose derivative magnitude fell below the multiplicity threshold.
    /// Those without a sign change are stored with multiplicity 2.
    pub flagged: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
struct Root {
    x: f64,
    multiplicity: u32,
    flagged: bool,
}

fn bisect<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// All real zeros of `spec` in its window, by uniform scan plus bisection.
///
/// Sign changes are bisected to machine precision. An interval without a
/// sign change but with a derivative sign change is searched for a tangential
/// zero; if the extremum crosses zero the step was too coarse and
/// [`Error::MissedRoots`] is returned.
pub fn gen_trig_poly_zeros(spec: &TrigPolySpec, scan_step: f64, mult_threshold: f64) -> Result<TrigRoots> {
    if !(scan_step > 0.0 && scan_step.is_finite()) {
        return Err(Error::InvalidInput(format!("scan step must be positive, got {scan_step}")));
    }
    if !(mult_threshold > 0.0 && mult_threshold.is_finite()) {
        return Err(Error::InvalidInput(format!("multiplicity threshold must be positive, got {mult_threshold}")));
    }
    let window = spec.window;
    let steps = (window.length() / scan_step).ceil() as usize;
    if steps > 1 << 26 {
        return Err(Error::InvalidInput(format!("scan would take {steps} steps")));
    }
    let steps = steps.max(1);
    let grid: Vec<f64> = (0..=steps)
        .map(|i| if i == steps { window.hi } else { window.lo + i as f64 * scan_step })
        .collect();
    let values: Vec<f64> = grid.par_iter().map(|&x| spec.eval(x)).collect();
    let val_tol = ROOT_RTOL * spec.coeff_l1();

    let per_interval: Vec<Result<Vec<Root>>> = (0..steps)
        .into_par_iter()
        .map(|i| {
            let (a, b) = (grid[i], grid[i + 1]);
            let (pa, pb) = (values[i], values[i + 1]);
            // a zero sitting on the grid changes sign if its neighbours differ in sign
            let crosses = |j: usize| match (j.checked_sub(1).map(|k| values[k]), values.get(j + 1)) {
                (Some(l), Some(&r)) => l * r < 0.0,
                _ => true,
            };
            let mut found = Vec::new();
            if pa == 0.0 {
                found.push(classify(spec, a, mult_threshold, crosses(i)));
            }
            if i + 1 == steps && pb == 0.0 {
                found.push(classify(spec, b, mult_threshold, crosses(i + 1)));
            }
            if pa * pb < 0.0 {
                let r = bisect(|x| spec.eval(x), a, b);
                found.push(classify(spec, r, mult_threshold, true));
            } else if pa != 0.0 && pb != 0.0 {
                let (da, db) = (spec.derivative(a), spec.derivative(b));
                if da * db < 0.0 {
                    let x_ext = bisect(|x| spec.derivative(x), a, b);
                    let p_ext = spec.eval(x_ext);
                    if p_ext.abs() <= val_tol {
                        found.push(Root {
                            x: x_ext,
                            multiplicity: 2,
                            flagged: true,
                        });
                    } else if (p_ext < 0.0) != (pa < 0.0) {
                        return Err(Error::MissedRoots { x: a, step: scan_step });
                    }
                }
            }
            Ok(found)
        })
        .collect();

    let mut roots: Vec<Root> = Vec::new();
    for r in per_interval {
        roots.extend(r?);
    }
    roots.retain(|r| window.contains(r.x));
    roots.sort_by(|a, b| a.x.partial_cmp(&b.x).expect("finite"));
    roots.dedup_by(|later, earlier| (later.x - earlier.x).abs() <= 1e-12 * later.x.abs().max(1.0));

    let flagged = roots.iter().filter(|r| r.flagged).map(|r| r.x).collect();
    let points: Vec<(f64, u32)> = roots.iter().map(|r| (r.x, r.multiplicity)).collect();
    Ok(TrigRoots {
        multiset: finish(&points, window, 0.0)?,
        flagged,
    })
}

fn classify(spec: &TrigPolySpec, x: f64, mult_threshold: f64, sign_change: bool) -> Root {
    let tiny_slope = spec.derivative(x).abs() < mult_threshold;
    Root {
        x,
        // an odd-order zero keeps multiplicity 1; only tangential zeros double
        multiplicity: if tiny_slope && !sign_change { 2 } else { 1 },
        flagged: tiny_slope,
    }
}

/// CLI-facing generator document, tagged by `kind`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum GeneratorSpec {
    Lattice {
        alpha: f64,
        shift: f64,
        window: [f64; 2],
    },
    Union {
        window: [f64; 2],
        lattices: Vec<LatticeParams>,
    },
    Trigpoly {
        /// `[re, im, freq]` triples
        terms: Vec<[f64; 3]>,
        window: [f64; 2],
        scan_step: f64,
        #[serde(default = "default_mult_threshold")]
        mult_threshold: f64,
    },
}

fn default_mult_threshold() -> f64 {
    1e-6
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeParams {
    pub alpha: f64,
    pub shift: f64,
}

impl GeneratorSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    fn lattices(&self) -> Result<Option<Vec<LatticeSpec>>> {
        match self {
            GeneratorSpec::Lattice { alpha, shift, window } => {
                let w = Window::closed(window[0], window[1])?;
                Ok(Some(vec![LatticeSpec::new(*alpha, *shift, w)?]))
            }
            GeneratorSpec::Union { window, lattices } => {
                let w = Window::closed(window[0], window[1])?;
                if lattices.is_empty() {
                    return Err(Error::InvalidInput("union needs at least one lattice".into()));
                }
                lattices
                    .iter()
                    .map(|l| LatticeSpec::new(l.alpha, l.shift, w))
                    .collect::<Result<Vec<_>>>()
                    .map(Some)
            }
            GeneratorSpec::Trigpoly { .. } => Ok(None),
        }
    }

    pub fn generate(&self) -> Result<PointMultiset> {
        match self {
            GeneratorSpec::Trigpoly {
                terms,
                window,
                scan_step,
                mult_threshold,
            } => {
                let terms = terms
                    .iter()
                    .map(|&[re, im, freq]| TrigTerm {
                        coeff: Complex64::new(re, im),
                        freq,
                    })
                    .collect();
                let spec = TrigPolySpec::new(terms, Window::closed(window[0], window[1])?)?;
                Ok(gen_trig_poly_zeros(&spec, *scan_step, *mult_threshold)?.multiset)
            }
            _ => {
                let specs = self.lattices()?.expect("lattice kinds");
                let parts = specs.iter().map(gen_lattice).collect::<Result<Vec<_>>>()?;
                gen_union(&parts)
            }
        }
    }

    /// Exact spectrum over `band`, available for lattice and union kinds.
    pub fn analytic_spectrum(&self, band: Window) -> Result<Spectrum> {
        let specs = self.lattices()?.ok_or_else(|| {
            Error::InvalidInput("analytic spectrum is only available for lattice and union fixtures".into())
        })?;
        let spectra = specs
            .iter()
            .map(|s| lattice_spectrum(s, band))
            .collect::<Result<Vec<_>>>()?;
        union_spectrum(&spectra)
    }
}
