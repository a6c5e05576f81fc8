//! The canonical product `f` over a real zero multiset, its logarithmic
//! derivative computed from the zeros and from the spectrum, the correction
//! `g`, the product `F = e^g f` and the exponential-type certificate.
//!
//! The spectral side uses the kernel `a_z(t) = −2πi e^{2πitz}` for `t > 0`
//! (`z` in the upper half-plane) and `a_z(t) = 2πi e^{2πitz}` for `t < 0`
//! (lower half-plane), whose transform is `1/(z − λ)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multiset::PointMultiset;
use crate::spectrum::Spectrum;
use crate::summation::{ComplexSum, NeumaierSum};

/// Distance below which `z` counts as sitting on a zero of `f`.
pub const POLE_GUARD: f64 = 1e-12;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailCorrection {
    None,
    /// Adds every `O(1/N)` term of the truncated tail, modelled by
    /// `a_{±n} ≈ ±n/d + φ̄_±` with `φ̄_±` the mean of `φ` over `N/2 < n ≤ N`.
    /// The remaining error is `O(1/N²)`.
    FirstOrder,
}

/// Truncation and tolerance settings shared by all evaluators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalConfig {
    /// symmetric index cutoff `N` of products and zero sums
    pub truncation: usize,
    pub tail_correction: TailCorrection,
    /// largest `|γ|` of spectral sums; chosen from the tail bound when `None`
    pub series_cutoff: Option<f64>,
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// add `∓πi·b_0` to the spectral log-derivative
    pub include_zero_atom: bool,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            truncation: 10_000,
            tail_correction: TailCorrection::FirstOrder,
            series_cutoff: None,
            abs_tol: 1e-10,
            rel_tol: 1e-8,
            include_zero_atom: true,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        if self.truncation < 1 {
            return Err(Error::InvalidInput("truncation N must be at least 1".into()));
        }
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::InvalidInput("tolerances must be positive".into()));
        }
        if let Some(c) = self.series_cutoff {
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::InvalidInput(format!("series cutoff must be positive, got {c}")));
            }
        }
        Ok(())
    }
}

/// A point `z = x + iy`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexPoint {
    pub x: f64,
    pub y: f64,
}

impl ComplexPoint {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn z(&self) -> Complex64 {
        Complex64::new(self.x, self.y)
    }
}

impl From<Complex64> for ComplexPoint {
    fn from(z: Complex64) -> Self {
        Self { x: z.re, y: z.im }
    }
}

/// `ln(1 + w)` without cancellation for small `w`.
fn ln_1p(w: Complex64) -> Complex64 {
    let re = 0.5 * (2.0 * w.re + w.norm_sqr()).ln_1p();
    let im = w.im.atan2(1.0 + w.re);
    Complex64::new(re, im)
}

/// `e^w − 1` without cancellation for small `w`.
fn exp_m1(w: Complex64) -> Complex64 {
    let half = (0.5 * w.im).sin();
    let cos_m1 = -2.0 * half * half;
    Complex64::new(
        w.re.exp_m1() * w.im.cos() + cos_m1,
        w.re.exp() * w.im.sin(),
    )
}

/// `e^{2πiγz}` with `γx` reduced modulo 1.
fn spectral_exp(gamma: f64, z: Complex64) -> Complex64 {
    let turns = (gamma * z.re).rem_euclid(1.0);
    Complex64::from_polar((-2.0 * PI * gamma * z.im).exp(), 2.0 * PI * turns)
}

/// Linear tail model `a_{±n} ≈ ±n/d + φ̄_±` fitted on `N/2 < n ≤ N`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct TailModel {
    d: f64,
    phi_sum: f64,
    n: f64,
}

impl TailModel {
    fn fit(a: &PointMultiset, n: usize) -> Result<Self> {
        let n_i = n as i64;
        let span = a.a(n_i)? - a.a(-n_i)?;
        if !(span > 0.0) {
            return Err(Error::InvalidInput("degenerate index span for the tail model".into()));
        }
        let d = 2.0 * n as f64 / span;
        let from = n_i / 2 + 1;
        let mut plus = NeumaierSum::new();
        let mut minus = NeumaierSum::new();
        for k in from..=n_i {
            plus.add(a.a(k)? - k as f64 / d);
            minus.add(a.a(-k)? + k as f64 / d);
        }
        let count = (n_i - from + 1) as f64;
        Ok(Self {
            d,
            phi_sum: (plus.value() + minus.value()) / count,
            n: n as f64,
        })
    }

    /// `Σ_{n>N} [ln(1 − z/a_n) + ln(1 − z/a_{−n})]` to first order in `1/N`.
    fn log_tail(&self, z: Complex64) -> Complex64 {
        (z * self.phi_sum - z * z) * (self.d * self.d / self.n)
    }

    /// `Σ_{n>N} [1/(z − a_n) + 1/(z − a_{−n})]` to first order in `1/N`.
    fn logderiv_tail(&self, z: Complex64) -> Complex64 {
        (Complex64::from(self.phi_sum) - 2.0 * z) * (self.d * self.d / self.n)
    }
}

fn check_truncation(a: &PointMultiset, cfg: &EvalConfig) -> Result<()> {
    cfg.validate()?;
    if a.contains_zero() {
        return Err(Error::ZeroInSet);
    }
    let (lo, hi) = a.index_range();
    let n = cfg.truncation as i64;
    if -n < lo || n > hi {
        return Err(Error::IndexOutOfRange {
            index: if -n < lo { -n } else { n },
            min: lo,
            max: hi,
        });
    }
    Ok(())
}

/// `(1 − z/a_0) Π_{n=1..N} (1 − z/a_n)(1 − z/a_{−n})`, summed in log form.
pub fn eval_f(a: &PointMultiset, z: ComplexPoint, cfg: &EvalConfig) -> Result<Complex64> {
    check_truncation(a, cfg)?;
    let z = z.z();
    let n = cfg.truncation as i64;
    if z.im == 0.0 && (-n..=n).any(|k| a.try_a(k) == Some(z.re)) {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let a0 = a.a(0)?;
    let first = Complex64::from(1.0) - z / a0;
    if first == Complex64::new(0.0, 0.0) {
        return Ok(first);
    }
    let mut log = ComplexSum::new();
    log.add(first.ln());
    for k in 1..=n {
        let (p, q) = (a.a(k)?, a.a(-k)?);
        // (1 − z/p)(1 − z/q) = 1 − z(p+q)/(pq) + z²/(pq)
        let pq = p * q;
        let w = -z * ((p + q) / pq) + z * z / pq;
        if w == Complex64::new(-1.0, 0.0) {
            return Ok(Complex64::new(0.0, 0.0));
        }
        log.add(ln_1p(w));
    }
    if cfg.tail_correction == TailCorrection::FirstOrder {
        log.add(TailModel::fit(a, cfg.truncation)?.log_tail(z));
    }
    Ok(log.value().exp())
}

/// Zero-side log-derivative together with convergence diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DirectLogDeriv {
    pub value: Complex64,
    /// distance to the same sum truncated at `N/2`
    pub defect: f64,
    /// `Σ |1/(z−a_n) + 1/(z−a_{−n})|`, evidence of absolute convergence
    pub abs_pair_sum: f64,
}

/// `1/(z−a_0) + Σ_{n=1..N} [1/(z−a_n) + 1/(z−a_{−n})]`.
pub fn eval_logderiv_direct(a: &PointMultiset, z: ComplexPoint, cfg: &EvalConfig) -> Result<DirectLogDeriv> {
    check_truncation(a, cfg)?;
    let zc = z.z();
    let n = cfg.truncation as i64;
    if z.y.abs() < POLE_GUARD {
        // nearest zero among the indices in use
        let exp = a.expanded();
        let origin = a.origin_index() as i64;
        let lo = (origin - n) as usize;
        let hi = (origin + n) as usize;
        let slice = &exp[lo..=hi];
        let pos = slice.partition_point(|&p| p < z.x);
        for j in [pos.wrapping_sub(1), pos] {
            if let Some(&p) = slice.get(j) {
                let dist = (zc - p).norm();
                if dist < POLE_GUARD {
                    return Err(Error::Pole {
                        index: (lo + j) as i64 - origin,
                        re: z.x,
                        im: z.y,
                        distance: dist,
                    });
                }
            }
        }
    }
    let tail = match cfg.tail_correction {
        TailCorrection::FirstOrder => Some((
            TailModel::fit(a, cfg.truncation)?,
            TailModel::fit(a, (cfg.truncation / 2).max(1))?,
        )),
        TailCorrection::None => None,
    };
    let mut acc = ComplexSum::new();
    let mut abs_acc = NeumaierSum::new();
    let mut half = Complex64::new(0.0, 0.0);
    acc.add(1.0 / (zc - a.a(0)?));
    let half_n = (n / 2).max(1);
    for k in 1..=n {
        let (p, q) = (a.a(k)?, a.a(-k)?);
        // 1/(z−p) + 1/(z−q) = (2z − p − q)/((z−p)(z−q))
        let pair = (2.0 * zc - (p + q)) / ((zc - p) * (zc - q));
        acc.add(pair);
        abs_acc.add(pair.norm());
        if k == half_n {
            half = acc.value();
        }
    }
    let mut value = acc.value();
    if let Some((full_model, half_model)) = tail {
        value += full_model.logderiv_tail(zc);
        half += half_model.logderiv_tail(zc);
    }
    Ok(DirectLogDeriv {
        value,
        defect: (value - half).norm(),
        abs_pair_sum: abs_acc.value(),
    })
}

/// Spectral log-derivative with the cutoff used and its tail bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralLogDeriv {
    pub value: Complex64,
    pub cutoff: f64,
    pub tail_bound: f64,
}

/// Smallest cutoff (on a 1/4 grid) whose exponential tail bound is below
/// `abs_tol / 10`.
pub fn spectral_cutoff(s: &Spectrum, y: f64, abs_tol: f64) -> Result<f64> {
    let reach = s.band().hi.min(-s.band().lo);
    let target = abs_tol / 10.0;
    let mut t = 1.0;
    while t <= reach {
        if s.exponential_tail_bound(t, y) <= target {
            return Ok(t);
        }
        t += 0.25;
    }
    // the smallest cutoff that would do, for the error message
    let mut need = t;
    while s.exponential_tail_bound(need, y) > target && need < 1e9 {
        need *= 1.25;
    }
    Err(Error::BandTooNarrow {
        lo: s.band().lo,
        hi: s.band().hi,
        need_lo: -need,
        need_hi: need,
    })
}

/// `−2πi Σ_{0<γ≤T} b_γ e^{2πiγz} (− πi b_0)` for `Im z > 0`, and
/// `2πi Σ_{−T≤γ<0} b_γ e^{2πiγz} (+ πi b_0)` for `Im z < 0`.
pub fn eval_logderiv_spectral(s: &Spectrum, z: ComplexPoint, cfg: &EvalConfig) -> Result<SpectralLogDeriv> {
    cfg.validate()?;
    if z.y == 0.0 || !z.y.is_finite() {
        return Err(Error::InvalidInput("spectral log-derivative needs Im z ≠ 0".into()));
    }
    let cutoff = match cfg.series_cutoff {
        Some(c) => {
            s.require_cover(-c, c)?;
            c
        }
        None => spectral_cutoff(s, z.y, cfg.abs_tol)?,
    };
    let zc = z.z();
    let upper = z.y > 0.0;
    let mut acc = ComplexSum::new();
    for atom in s.atoms() {
        let take = if upper {
            atom.gamma > 0.0 && atom.gamma <= cutoff
        } else {
            atom.gamma < 0.0 && atom.gamma >= -cutoff
        };
        if take {
            acc.add(atom.mass * spectral_exp(atom.gamma, zc));
        }
    }
    let sign = if upper { -1.0 } else { 1.0 };
    let mut value = acc.value() * (2.0 * PI * I * sign);
    if cfg.include_zero_atom {
        value += s.zero_mass() * (PI * I * sign);
    }
    Ok(SpectralLogDeriv {
        value,
        cutoff,
        tail_bound: 2.0 * PI * s.exponential_tail_bound(cutoff, z.y),
    })
}

fn require_unit_band(s: &Spectrum) -> Result<()> {
    s.require_cover(0.0, 1.0)
}

/// `Σ_{0<γ<1} b_γ (e^{2πiγz} − 1)/γ`.
pub fn eval_g(s: &Spectrum, z: ComplexPoint) -> Result<Complex64> {
    require_unit_band(s)?;
    let zc = z.z();
    let acc: ComplexSum = s
        .atoms()
        .iter()
        .filter(|a| a.gamma > 0.0 && a.gamma < 1.0)
        .map(|a| a.mass * exp_m1(2.0 * PI * I * a.gamma * zc) / a.gamma)
        .collect();
    Ok(acc.value())
}

/// `F = e^{g} f`.
#[allow(non_snake_case)]
pub fn eval_F(a: &PointMultiset, s: &Spectrum, z: ComplexPoint, cfg: &EvalConfig) -> Result<Complex64> {
    let g = eval_g(s, z)?;
    let f = eval_f(a, z, cfg)?;
    if f == Complex64::new(0.0, 0.0) {
        return Ok(f);
    }
    Ok(g.exp() * f)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TypeVerdict {
    /// `Σ_{0<γ<1} |b_γ|/γ` converges on the available atoms.
    ExponentialTypeCertified,
    /// Dyadic shells toward `γ → 0` keep contributing without decay.
    DivergentTrend,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TypeCriterion {
    #[serde(rename = "sup_g_on_R")]
    pub sup_g_on_r: f64,
    pub cor2_sum: f64,
    /// contribution of `γ ∈ [2^{−j−1}, 2^{−j})` to `cor2_sum`, `j = 0, 1, ...`
    pub shell_contributions: Vec<f64>,
    pub verdict: TypeVerdict,
}

/// Shells reaching below `2^{-MIN_TREND_DEPTH}` are needed before a
/// divergent trend is declared.
pub const MIN_TREND_DEPTH: usize = 8;

/// Exponential-type certificate from `Σ_{0<γ<1}|b_γ|/γ` with the sampled
/// `sup |g|` on the real grid as corroboration.
///
/// A finite atom list always has a finite sum, so divergence is judged by
/// trend: when atoms reach at least [`MIN_TREND_DEPTH`] dyadic shells below 1
/// and the deeper half of the shells contributes at least half as much per
/// shell as the upper half, the sum is flagged as divergent.
pub fn check_type_criterion(s: &Spectrum, x_grid: &[f64]) -> Result<TypeCriterion> {
    require_unit_band(s)?;
    let mut shells: Vec<f64> = Vec::new();
    let mut total = NeumaierSum::new();
    for atom in s.atoms().iter().filter(|a| a.gamma > 0.0 && a.gamma < 1.0) {
        let term = atom.mass.norm() / atom.gamma;
        total.add(term);
        let j = (-atom.gamma.log2()).floor().max(0.0) as usize;
        if shells.len() <= j {
            shells.resize(j + 1, 0.0);
        }
        shells[j] += term;
    }
    let mut sup: f64 = 0.0;
    for &x in x_grid {
        sup = sup.max(eval_g(s, ComplexPoint::new(x, 0.0))?.norm());
    }
    let verdict = if shells.len() > MIN_TREND_DEPTH {
        let mid = shells.len() / 2;
        let upper = shells[..mid].iter().sum::<f64>() / mid as f64;
        let deeper = shells[mid..].iter().sum::<f64>() / (shells.len() - mid) as f64;
        if deeper >= 0.5 * upper {
            TypeVerdict::DivergentTrend
        } else {
            TypeVerdict::ExponentialTypeCertified
        }
    } else {
        TypeVerdict::ExponentialTypeCertified
    };
    Ok(TypeCriterion {
        sup_g_on_r: sup,
        cor2_sum: total.value(),
        shell_contributions: shells,
        verdict,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinePeriodRow {
    pub tau: f64,
    pub sup_difference: f64,
    pub is_almost_period: bool,
}

/// For each candidate `τ`, `sup_x |E(x+τ+iy₀) − E(x+iy₀)|` over the grid.
pub fn check_almost_periodicity_on_line<E>(
    evaluator: E,
    y0: f64,
    tau_candidates: &[f64],
    epsilon: f64,
    x_grid: &[f64],
) -> Result<Vec<LinePeriodRow>>
where
    E: Fn(ComplexPoint) -> Result<Complex64>,
{
    if y0 == 0.0 || !y0.is_finite() {
        return Err(Error::InvalidInput("line must have y0 ≠ 0".into()));
    }
    if !(epsilon > 0.0) {
        return Err(Error::InvalidInput("epsilon must be positive".into()));
    }
    if x_grid.is_empty() {
        return Err(Error::InvalidInput("empty x grid".into()));
    }
    let base: Vec<Complex64> = x_grid
        .iter()
        .map(|&x| evaluator(ComplexPoint::new(x, y0)))
        .collect::<Result<_>>()?;
    tau_candidates
        .iter()
        .map(|&tau| {
            let mut sup: f64 = 0.0;
            for (&x, &e) in x_grid.iter().zip(&base) {
                sup = sup.max((evaluator(ComplexPoint::new(x + tau, y0))? - e).norm());
            }
            Ok(LinePeriodRow {
                tau,
                sup_difference: sup,
                is_almost_period: sup < epsilon,
            })
        })
        .collect()
}
