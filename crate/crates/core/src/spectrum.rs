//! Pure point spectra `Σ b_γ δ_γ`, built exactly for lattice unions or
//! estimated from a multiset by Bohr means.
//!
//! Convention: analysis with `e^{-2πiγx}`, synthesis with `e^{+2πiγx}`;
//! frequencies in cycles.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::LatticeSpec;
use crate::multiset::{PointMultiset, Window};
use crate::summation::ComplexSum;

/// Atoms whose merged mass falls below this fraction of the merged
/// magnitudes are treated as cancelled.
pub const CANCEL_RTOL: f64 = 1e-12;

/// Frequencies closer than this (relative) are the same atom.
pub const GAMMA_RTOL: f64 = 1e-12;

/// Relative tolerance of the real-measure checks on spectra read from documents.
pub const HERMITIAN_RTOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Analytic,
    Empirical,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub gamma: f64,
    pub mass: Complex64,
}

/// Atom list complete over `band`, sorted by frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    atoms: Vec<Atom>,
    band: Window,
    provenance: Provenance,
}

fn same_gamma(a: f64, b: f64) -> bool {
    (a - b).abs() <= GAMMA_RTOL * a.abs().max(b.abs()).max(1.0)
}

impl Spectrum {
    pub fn new(mut atoms: Vec<Atom>, band: Window, provenance: Provenance) -> Result<Self> {
        let band = Window::closed(band.lo, band.hi)?;
        for a in &atoms {
            if !(a.gamma.is_finite() && a.mass.re.is_finite() && a.mass.im.is_finite()) {
                return Err(Error::InvalidInput("non-finite spectral atom".into()));
            }
            if !band.contains(a.gamma) {
                return Err(Error::InvalidInput(format!(
                    "atom at {} lies outside the band [{}, {}]",
                    a.gamma, band.lo, band.hi
                )));
            }
        }
        atoms.sort_by(|a, b| a.gamma.partial_cmp(&b.gamma).expect("finite"));
        if atoms.windows(2).any(|w| same_gamma(w[0].gamma, w[1].gamma)) {
            return Err(Error::InvalidInput("duplicate spectral frequency".into()));
        }
        Ok(Self {
            atoms,
            band,
            provenance,
        })
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn band(&self) -> Window {
        self.band
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Whether the atom list is complete on `[lo, hi]`.
    pub fn covers(&self, lo: f64, hi: f64) -> bool {
        self.band.lo <= lo && hi <= self.band.hi
    }

    pub fn require_cover(&self, lo: f64, hi: f64) -> Result<()> {
        if self.covers(lo, hi) {
            Ok(())
        } else {
            Err(Error::BandTooNarrow {
                lo: self.band.lo,
                hi: self.band.hi,
                need_lo: lo,
                need_hi: hi,
            })
        }
    }

    /// Mass of the atom at `gamma`, if there is one.
    pub fn mass_at(&self, gamma: f64) -> Option<Complex64> {
        let i = self.atoms.partition_point(|a| a.gamma < gamma);
        [i.wrapping_sub(1), i]
            .into_iter()
            .filter_map(|j| self.atoms.get(j))
            .find(|a| same_gamma(a.gamma, gamma))
            .map(|a| a.mass)
    }

    /// Mass at frequency 0 (zero if absent).
    pub fn zero_mass(&self) -> Complex64 {
        self.mass_at(0.0).unwrap_or_default()
    }

    /// Largest `|b_{−γ} − conj(b_γ)|` over atoms whose mirror lies in the band.
    /// An atom whose mirror is in the band but missing counts with its full mass.
    pub fn hermitian_defect(&self) -> f64 {
        self.atoms
            .iter()
            .filter(|a| self.band.contains(-a.gamma))
            .map(|a| {
                let mirror = self.mass_at(-a.gamma).unwrap_or_default();
                (mirror - a.mass.conj()).norm()
            })
            .fold(0.0, f64::max)
    }

    /// `M(t) = Σ_{0<γ≤t} |b_γ|`.
    pub fn mass_function(&self, t: f64) -> f64 {
        self.atoms
            .iter()
            .filter(|a| a.gamma > 0.0 && a.gamma <= t)
            .map(|a| a.mass.norm())
            .sum()
    }

    /// `Σ_{|γ|≤r} |b_γ|`.
    pub fn symmetric_mass(&self, r: f64) -> f64 {
        self.atoms
            .iter()
            .filter(|a| a.gamma.abs() <= r)
            .map(|a| a.mass.norm())
            .sum()
    }

    /// Largest total `|b|` over any closed unit frequency interval.
    pub fn unit_mass_bound(&self) -> f64 {
        let mut best: f64 = 0.0;
        let mut start = 0;
        let mut running = 0.0;
        for a in self.atoms.iter() {
            running += a.mass.norm();
            while a.gamma - self.atoms[start].gamma > 1.0 {
                running -= self.atoms[start].mass.norm();
                start += 1;
            }
            best = best.max(running);
        }
        best
    }

    /// Power law `C·max(t,1)^κ` dominating both one-sided mass functions on
    /// the band. Used to extend `M(t)` beyond the band for tail bounds.
    pub fn mass_law(&self) -> MassLaw {
        let reach = self.band.hi.min(-self.band.lo);
        let one_sided = |t: f64| -> f64 {
            let pos = self.mass_function(t);
            let neg: f64 = self
                .atoms
                .iter()
                .filter(|a| a.gamma < 0.0 && a.gamma >= -t)
                .map(|a| a.mass.norm())
                .sum();
            pos.max(neg)
        };
        let samples: Vec<(f64, f64)> = self
            .atoms
            .iter()
            .filter(|a| a.gamma > 0.0 && a.gamma <= reach)
            .map(|a| (a.gamma, one_sided(a.gamma)))
            .chain(std::iter::once((reach.max(1.0), one_sided(reach.max(1.0)))))
            .filter(|&(_, m)| m > 0.0)
            .collect();
        let fit: Vec<(f64, f64)> = samples.iter().filter(|&&(t, _)| t >= 1.0).copied().collect();
        let kappa = log_log_slope(&fit).max(0.0);
        let c = samples
            .iter()
            .map(|&(t, m)| m / t.max(1.0).powf(kappa))
            .fold(0.0, f64::max);
        MassLaw { c, kappa }
    }

    /// Upper bound for `Σ_{γ ≥ cutoff} |b_γ| e^{−2πγ|y|}` (and its mirror),
    /// `M(T)e^{−2πTy} + 2πy ∫_T^∞ e^{−2πty} M(t) dt` with `M` replaced by
    /// its power-law majorant.
    pub fn exponential_tail_bound(&self, cutoff: f64, y: f64) -> f64 {
        let law = self.mass_law();
        let a = 2.0 * PI * y.abs();
        let t = cutoff.max(1.0);
        if a <= law.kappa / t {
            return f64::INFINITY;
        }
        let m_t = law.c * t.powf(law.kappa);
        let integral = m_t * (-a * t).exp() / (a - law.kappa / t);
        m_t * (-a * t).exp() + a * integral
    }

    pub fn to_doc(&self) -> SpectrumDoc {
        SpectrumDoc {
            atoms: self.atoms.iter().map(|a| [a.gamma, a.mass.re, a.mass.im]).collect(),
            band: [self.band.lo, self.band.hi],
            provenance: self.provenance,
        }
    }

    pub fn from_doc(doc: &SpectrumDoc) -> Result<Self> {
        let atoms = doc
            .atoms
            .iter()
            .map(|&[gamma, re, im]| Atom {
                gamma,
                mass: Complex64::new(re, im),
            })
            .collect();
        let s = Self::new(atoms, Window::closed(doc.band[0], doc.band[1])?, doc.provenance)?;
        s.check_real_measure()?;
        Ok(s)
    }

    /// Checks `b_{−γ} = conj(b_γ)` and, when the band holds 0, a real
    /// positive `b_0`, as required of the transform of a real measure.
    pub fn check_real_measure(&self) -> Result<()> {
        let scale = self.atoms.iter().map(|a| a.mass.norm()).fold(1.0, f64::max);
        let defect = self.hermitian_defect();
        if defect > HERMITIAN_RTOL * scale {
            return Err(Error::InvalidInput(format!(
                "spectrum is not Hermitian: |b(-γ) - conj b(γ)| reaches {defect:e}"
            )));
        }
        if self.band.contains(0.0) {
            let b0 = self.zero_mass();
            if !(b0.re > 0.0 && b0.im.abs() <= HERMITIAN_RTOL * scale) {
                return Err(Error::InvalidInput(format!("b_0 must be real and positive, got {b0}")));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_doc()).expect("spectrum serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: SpectrumDoc = serde_json::from_str(text)?;
        Self::from_doc(&doc)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassLaw {
    pub c: f64,
    pub kappa: f64,
}

/// Wire format: `{"atoms": [[gamma, re, im], ...], "band": [lo, hi], "provenance": "..."}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumDoc {
    pub atoms: Vec<[f64; 3]>,
    pub band: [f64; 2],
    pub provenance: Provenance,
}

/// Exact spectrum of `{αn + s}`: atoms `k/α` with mass `α^{-1} e^{−2πi k s/α}`.
pub fn lattice_spectrum(spec: &LatticeSpec, band: Window) -> Result<Spectrum> {
    let LatticeSpec { alpha, shift, .. } = *spec;
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidInput(format!("lattice spacing must be positive, got {alpha}")));
    }
    let k_lo = (band.lo * alpha).ceil() as i64;
    let k_hi = (band.hi * alpha).floor() as i64;
    if k_hi - k_lo > crate::multiset::MAX_EXPANDED_LEN as i64 {
        return Err(Error::InvalidInput("band holds too many atoms".into()));
    }
    let atoms = (k_lo..=k_hi)
        .map(|k| {
            let gamma = k as f64 / alpha;
            // reduce the phase to [0,1) before scaling by 2π
            let turns = (k as f64 * shift / alpha).rem_euclid(1.0);
            Atom {
                gamma,
                mass: Complex64::cis(-2.0 * PI * turns) / alpha,
            }
        })
        .filter(|a| band.contains(a.gamma))
        .collect();
    Spectrum::new(atoms, band, Provenance::Analytic)
}

/// Sum of spectra sharing a band; coinciding atoms add, cancelled ones drop.
pub fn union_spectrum(spectra: &[Spectrum]) -> Result<Spectrum> {
    let first = spectra
        .first()
        .ok_or_else(|| Error::InvalidInput("union of zero spectra".into()))?;
    let band = first.band;
    let mut all: Vec<Atom> = Vec::new();
    let mut provenance = Provenance::Analytic;
    for s in spectra {
        if s.band.lo != band.lo || s.band.hi != band.hi {
            return Err(Error::InvalidInput(format!(
                "spectra have mismatched bands [{}, {}] and [{}, {}]",
                band.lo, band.hi, s.band.lo, s.band.hi
            )));
        }
        if s.provenance == Provenance::Empirical {
            provenance = Provenance::Empirical;
        }
        all.extend_from_slice(&s.atoms);
    }
    all.sort_by(|a, b| a.gamma.partial_cmp(&b.gamma).expect("finite"));

    let mut merged: Vec<Atom> = Vec::with_capacity(all.len());
    let mut scale: Vec<f64> = Vec::with_capacity(all.len());
    for a in all {
        match merged.last_mut() {
            Some(last) if same_gamma(last.gamma, a.gamma) => {
                last.mass += a.mass;
                *scale.last_mut().expect("parallel") += a.mass.norm();
            }
            _ => {
                merged.push(a);
                scale.push(a.mass.norm());
            }
        }
    }
    let atoms = merged
        .into_iter()
        .zip(scale)
        .filter(|(a, s)| a.mass.norm() > CANCEL_RTOL * s)
        .map(|(a, _)| a)
        .collect();
    Spectrum::new(atoms, band, provenance)
}

/// Bohr-mean estimate with its convergence defect along the schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BohrEstimate {
    pub value: Complex64,
    /// max successive difference along the `T` schedule
    pub defect: f64,
}

/// `(1/2T) Σ_{|a_n|≤T} e^{−2πiγ a_n}` at each `T` of the schedule.
pub fn bohr_coefficient(a: &PointMultiset, gamma: f64, t_schedule: &[f64]) -> Result<BohrEstimate> {
    if t_schedule.is_empty() {
        return Err(Error::InvalidInput("empty T schedule".into()));
    }
    let window = a.window();
    let mut values = Vec::with_capacity(t_schedule.len());
    for &t in t_schedule {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidInput(format!("Bohr radius must be positive, got {t}")));
        }
        if -t < window.lo || t > window.hi {
            return Err(Error::IncompleteData {
                lo: -t,
                hi: t,
                window_lo: window.lo,
                window_hi: window.hi,
            });
        }
        let pts = a.points();
        let start = pts.partition_point(|&p| p < -t);
        let end = pts.partition_point(|&p| p <= t);
        let mut acc = ComplexSum::new();
        for (p, m) in pts[start..end].iter().zip(&a.multiplicities()[start..end]) {
            let turns = (gamma * p).rem_euclid(1.0);
            acc.add(Complex64::cis(-2.0 * PI * turns) * f64::from(*m));
        }
        values.push(acc.value() / (2.0 * t));
    }
    let defect = values.windows(2).map(|w| (w[1] - w[0]).norm()).fold(0.0, f64::max);
    Ok(BohrEstimate {
        value: *values.last().expect("nonempty"),
        defect,
    })
}

/// Empirical spectrum over `band` from Bohr means at `candidates`.
///
/// An atom is accepted when its estimated magnitude exceeds three times the
/// median magnitude at the off-spectrum `probes`. Only nonnegative
/// candidates are estimated; negative frequencies are filled in by
/// conjugation.
pub fn empirical_spectrum(
    a: &PointMultiset,
    candidates: &[f64],
    probes: &[f64],
    t_schedule: &[f64],
    band: Window,
) -> Result<Spectrum> {
    if probes.is_empty() {
        return Err(Error::InvalidInput("empirical spectrum needs probe frequencies".into()));
    }
    let mut noise: Vec<f64> = probes
        .iter()
        .map(|&g| bohr_coefficient(a, g, t_schedule).map(|b| b.value.norm()))
        .collect::<Result<_>>()?;
    noise.sort_by(|x, y| x.partial_cmp(y).expect("finite"));
    let median = if noise.len() % 2 == 1 {
        noise[noise.len() / 2]
    } else {
        0.5 * (noise[noise.len() / 2 - 1] + noise[noise.len() / 2])
    };
    let threshold = 3.0 * median;

    let mut gammas: Vec<f64> = candidates
        .iter()
        .map(|g| g.abs())
        .chain(std::iter::once(0.0))
        .filter(|&g| band.contains(g) && band.contains(-g))
        .collect();
    gammas.sort_by(|x, y| x.partial_cmp(y).expect("finite"));
    gammas.dedup_by(|x, y| same_gamma(*x, *y));

    let mut atoms = Vec::new();
    for g in gammas {
        let b = bohr_coefficient(a, g, t_schedule)?.value;
        if b.norm() <= threshold {
            continue;
        }
        if g == 0.0 {
            atoms.push(Atom {
                gamma: 0.0,
                mass: Complex64::new(b.re, 0.0),
            });
        } else {
            atoms.push(Atom { gamma: g, mass: b });
            atoms.push(Atom {
                gamma: -g,
                mass: b.conj(),
            });
        }
    }
    Spectrum::new(atoms, band, Provenance::Empirical)
}

/// Integer combinations `Σ k_j ω_j` with `|k_j| ≤ order` that fall in `band`.
pub fn combination_candidates(freqs: &[f64], order: u32, band: Window) -> Vec<f64> {
    let mut out = vec![0.0];
    for &w in freqs {
        let mut next = Vec::with_capacity(out.len() * (2 * order as usize + 1));
        for &base in &out {
            for k in -(order as i64)..=order as i64 {
                next.push(base + k as f64 * w);
            }
        }
        next.sort_by(|x, y| x.partial_cmp(y).expect("finite"));
        next.dedup_by(|x, y| same_gamma(*x, *y));
        out = next;
    }
    out.retain(|&g| band.contains(g));
    out
}

/// Mass growth table and fitted exponent.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MassGrowth {
    /// `(r, Σ_{|γ|≤r} |b_γ|)`
    pub table: Vec<(f64, f64)>,
    pub kappa: f64,
}

pub fn mass_growth(s: &Spectrum, r_values: &[f64]) -> Result<MassGrowth> {
    if s.is_empty() {
        return Err(Error::InvalidInput("empty spectrum".into()));
    }
    let reach = s.band.hi.min(-s.band.lo);
    let mut table = Vec::with_capacity(r_values.len());
    for &r in r_values {
        if !(r >= 0.0) || r > reach {
            return Err(Error::BandTooNarrow {
                lo: s.band.lo,
                hi: s.band.hi,
                need_lo: -r,
                need_hi: r,
            });
        }
        table.push((r, s.symmetric_mass(r)));
    }
    let fit: Vec<(f64, f64)> = table.iter().copied().filter(|&(r, m)| r > 0.0 && m > 0.0).collect();
    Ok(MassGrowth {
        kappa: log_log_slope(&fit),
        table,
    })
}

/// Least-squares slope of `ln y` against `ln x`; 0 for fewer than two points.
fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    if points.len() < 2 {
        return 0.0;
    }
    let n = points.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().map(|&(x, y)| (x.ln(), y.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return 0.0;
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{gen_lattice, gen_union};
    use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

    fn band(r: f64) -> Window {
        Window::closed(-r, r).unwrap()
    }

    fn lattice(alpha: f64, shift: f64) -> LatticeSpec {
        LatticeSpec::new(alpha, shift, Window::closed(-1e4 - 2.0, 1e4 + 2.0).unwrap()).unwrap()
    }

    #[test]
    fn integer_lattice_has_unit_masses() {
        let s = lattice_spectrum(&lattice(1.0, 0.0), band(5.0)).unwrap();
        assert_eq!(s.atoms().len(), 11);
        for a in s.atoms() {
            assert_eq!(a.mass, Complex64::new(1.0, 0.0));
        }
    }

    #[test]
    fn half_shift_alternates() {
        let s = lattice_spectrum(&lattice(1.0, 0.5), band(5.0)).unwrap();
        for a in s.atoms() {
            let sign = if (a.gamma as i64) % 2 == 0 { 1.0 } else { -1.0 };
            assert!((a.mass - sign).norm() < 1e-15);
        }
    }

    #[test]
    fn sqrt2_lattice_scaling() {
        let s = lattice_spectrum(&lattice(SQRT_2, 0.0), band(3.0)).unwrap();
        for a in s.atoms() {
            assert!((a.gamma * SQRT_2 - (a.gamma * SQRT_2).round()).abs() < 1e-12);
            assert!((a.mass - FRAC_1_SQRT_2).norm() < 1e-15);
        }
    }

    #[test]
    fn union_of_integer_spectra_doubles() {
        let z = lattice_spectrum(&lattice(1.0, 0.0), band(4.0)).unwrap();
        let u = union_spectrum(&[z.clone(), z]).unwrap();
        assert!(u.atoms().iter().all(|a| a.mass == Complex64::new(2.0, 0.0)));
    }

    #[test]
    fn union_with_half_shift_cancels_odd_atoms() {
        let z = lattice_spectrum(&lattice(1.0, 0.0), band(4.0)).unwrap();
        let h = lattice_spectrum(&lattice(1.0, 0.5), band(4.0)).unwrap();
        let u = union_spectrum(&[z, h]).unwrap();
        let gammas: Vec<f64> = u.atoms().iter().map(|a| a.gamma).collect();
        assert_eq!(gammas, vec![-4.0, -2.0, 0.0, 2.0, 4.0]);
        assert!(u.atoms().iter().all(|a| (a.mass - 2.0).norm() < 1e-15));
    }

    #[test]
    fn union_of_incommensurate_lattices_interleaves() {
        let z = lattice_spectrum(&lattice(1.0, 0.0), band(3.0)).unwrap();
        let r = lattice_spectrum(&lattice(SQRT_2, 0.0), band(3.0)).unwrap();
        let u = union_spectrum(&[z.clone(), r.clone()]).unwrap();
        assert_eq!(u.atoms().len(), z.atoms().len() + r.atoms().len() - 1);
        assert!((u.zero_mass().re - (1.0 + FRAC_1_SQRT_2)).abs() < 1e-15);
        assert!(u.hermitian_defect() < 1e-15);
    }

    #[test]
    fn union_rejects_band_mismatch() {
        let z = lattice_spectrum(&lattice(1.0, 0.0), band(3.0)).unwrap();
        let w = lattice_spectrum(&lattice(1.0, 0.0), band(4.0)).unwrap();
        assert!(union_spectrum(&[z, w]).is_err());
    }

    #[test]
    fn shifted_spectra_are_hermitian() {
        for (alpha, shift) in [(1.0, 0.25), (SQRT_2, 0.25), (0.7, -1.3)] {
            let s = lattice_spectrum(&lattice(alpha, shift), band(10.0)).unwrap();
            assert!(s.hermitian_defect() < 1e-14, "{alpha} {shift}");
            assert!(s.zero_mass().im == 0.0 && s.zero_mass().re > 0.0);
        }
    }

    #[test]
    fn bohr_means_on_integer_lattices() {
        let z = gen_lattice(&lattice(1.0, 0.0)).unwrap();
        let b0 = bohr_coefficient(&z, 0.0, &[1e3, 1e4]).unwrap();
        assert!((b0.value - 1.0).norm() < 1e-3);
        let bh = bohr_coefficient(&z, 0.5, &[1e4]).unwrap();
        assert!(bh.value.norm() < 1e-3);
        let q = gen_lattice(&lattice(1.0, 0.25)).unwrap();
        // every summand is e^{−2πi(n+1/4)} = −i
        let b1 = bohr_coefficient(&q, 1.0, &[1e4]).unwrap();
        assert!((b1.value - Complex64::new(0.0, -1.0)).norm() < 1e-3);
    }

    #[test]
    fn bohr_schedule_outside_window_fails() {
        let z = gen_lattice(&lattice(1.0, 0.0)).unwrap();
        assert!(matches!(bohr_coefficient(&z, 0.0, &[1e5]), Err(Error::IncompleteData { .. })));
    }

    #[test]
    fn mass_growth_exponents() {
        let z = lattice_spectrum(&lattice(1.0, 0.0), band(1000.0)).unwrap();
        let g = mass_growth(&z, &[10.0, 100.0, 1000.0]).unwrap();
        assert_eq!(g.table[0].1, 21.0);
        assert_eq!(g.table[2].1, 2001.0);
        assert!((g.kappa - 1.0).abs() < 0.02);

        let zr = union_spectrum(&[
            lattice_spectrum(&lattice(1.0, 0.25), band(1000.0)).unwrap(),
            lattice_spectrum(&lattice(SQRT_2, 0.25), band(1000.0)).unwrap(),
        ])
        .unwrap();
        assert!((mass_growth(&zr, &[10.0, 100.0, 1000.0]).unwrap().kappa - 1.0).abs() < 0.02);

        let single = Spectrum::new(
            vec![Atom {
                gamma: 0.0,
                mass: Complex64::new(1.0, 0.0),
            }],
            band(100.0),
            Provenance::Analytic,
        )
        .unwrap();
        let g = mass_growth(&single, &[1.0, 10.0, 100.0]).unwrap();
        assert!(g.table.iter().all(|&(_, m)| m == 1.0));
        assert_eq!(g.kappa, 0.0);

        assert!(mass_growth(&z, &[2000.0]).is_err());
    }

    #[test]
    fn mass_function_is_nondecreasing() {
        let s = lattice_spectrum(&lattice(SQRT_2, 0.3), band(20.0)).unwrap();
        let mut last = 0.0;
        for i in 0..200 {
            let m = s.mass_function(i as f64 * 0.1);
            assert!(m >= last);
            last = m;
        }
    }

    #[test]
    fn tail_bound_dominates_actual_tail() {
        let s = lattice_spectrum(&lattice(SQRT_2, 0.25), band(60.0)).unwrap();
        for (cutoff, y) in [(3.0, 0.5), (5.0, 1.0), (2.0, 2.0)] {
            let actual: f64 = s
                .atoms()
                .iter()
                .filter(|a| a.gamma >= cutoff)
                .map(|a| a.mass.norm() * (-2.0 * PI * a.gamma * y).exp())
                .sum();
            assert!(s.exponential_tail_bound(cutoff, y) >= actual);
        }
    }

    #[test]
    fn empirical_spectrum_recovers_union_atoms() {
        let w = Window::closed(-2100.0, 2100.0).unwrap();
        let a = gen_union(&[
            gen_lattice(&LatticeSpec::new(1.0, 0.25, w).unwrap()).unwrap(),
            gen_lattice(&LatticeSpec::new(SQRT_2, 0.25, w).unwrap()).unwrap(),
        ])
        .unwrap();
        let cands = combination_candidates(&[1.0, FRAC_1_SQRT_2], 2, band(2.0));
        let probes: Vec<f64> = (0..15).map(|j| 0.137 + 0.1101 * j as f64).collect();
        let s = empirical_spectrum(&a, &cands, &probes, &[1000.0, 2000.0], band(2.0)).unwrap();
        assert_eq!(s.provenance(), Provenance::Empirical);
        for g in [0.0, 1.0, FRAC_1_SQRT_2, SQRT_2] {
            assert!(s.mass_at(g).is_some(), "missing atom {g}");
        }
        assert!(s.mass_at(1.0 + FRAC_1_SQRT_2).is_none());
        assert!(s.hermitian_defect() < 1e-15);
    }

    #[test]
    fn json_round_trip() {
        let s = lattice_spectrum(&lattice(SQRT_2, 0.25), band(5.0)).unwrap();
        assert_eq!(Spectrum::from_json(&s.to_json()).unwrap(), s);
        assert!(Spectrum::from_json(r#"{"atoms": [[3, 1, 0]], "band": [-1, 1], "provenance": "analytic"}"#).is_err());
    }

    #[test]
    fn documents_must_describe_real_measures() {
        let doc = |atoms: &str| format!(r#"{{"atoms": {atoms}, "band": [-1, 1], "provenance": "analytic"}}"#);
        assert!(Spectrum::from_json(&doc("[[-1,-1,0],[0,1,0],[1,-1,0]]")).is_ok());
        assert!(Spectrum::from_json(&doc("[[-0.5,0,-1],[0,2,0],[0.5,0,1]]")).is_ok());
        // missing mirror, wrong mirror, no b_0, complex b_0
        assert!(Spectrum::from_json(&doc("[[0,1,0],[1,1,0]]")).is_err());
        assert!(Spectrum::from_json(&doc("[[-0.5,0,1],[0,2,0],[0.5,0,1]]")).is_err());
        assert!(Spectrum::from_json(&doc("[[-1,1,0],[1,1,0]]")).is_err());
        assert!(Spectrum::from_json(&doc("[[0,1,0.5]]")).is_err());
        // a band away from 0 carries no b_0
        let off = r#"{"atoms": [], "band": [2, 3], "provenance": "empirical"}"#;
        assert!(Spectrum::from_json(off).is_ok());
    }
}
