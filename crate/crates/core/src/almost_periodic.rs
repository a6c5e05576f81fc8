//! Almost-period detection, density, the decomposition `a_n = n/d + φ(n)`
//! and the symmetric reciprocal sums of almost periodic multisets.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::multiset::{PointMultiset, Window};
use crate::summation::NeumaierSum;

/// Outcome of testing one translation `τ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlmostPeriodReport {
    pub tau: f64,
    pub epsilon: f64,
    pub matched: bool,
    /// `h` of the index bijection `σ(n) = n + h`
    pub index_shift: i64,
    pub max_mismatch: f64,
}

/// Sup mismatch of the order-preserving matching of `xs + τ` onto `ys`.
///
/// For sorted sequences of equal length this matching minimizes the sup
/// mismatch over all bijections, so the bijection search in the definition of
/// an ε-almost period reduces to choosing an index shift.
pub fn monotone_mismatch(xs: &[f64], ys: &[f64], tau: f64) -> f64 {
    assert_eq!(xs.len(), ys.len(), "matching needs equal cardinalities");
    xs.iter()
        .zip(ys)
        .map(|(x, y)| (x + tau - y).abs())
        .fold(0.0, f64::max)
}

/// Precomputed matching context for translations with `|τ| ≤ reach`.
struct Matcher<'a> {
    expanded: &'a [f64],
    /// expanded positions of the interior elements
    interior: std::ops::Range<usize>,
    density: f64,
    slack: i64,
}

impl<'a> Matcher<'a> {
    fn new(a: &'a PointMultiset, reach: f64, epsilon: f64) -> Result<Self> {
        let w = a.window();
        let expanded = a.expanded();
        if expanded.len() < 2 || w.length() <= 0.0 {
            return Err(Error::WindowTooSmall("need at least two points".into()));
        }
        let density = expanded.len() as f64 / w.length();
        let margin = reach + epsilon + 1.0 / density + 1.0;
        let lo = expanded.partition_point(|&x| x < w.lo + margin);
        let hi = expanded.partition_point(|&x| x <= w.hi - margin);
        if hi <= lo {
            return Err(Error::WindowTooSmall(format!(
                "no interior points once a margin of {margin} is removed from [{}, {}]",
                w.lo, w.hi
            )));
        }
        // empirical k₂: spread of counts over windows of length `reach`
        let h = reach.max(1.0);
        let samples = 32.min(hi - lo);
        let mut spread: f64 = 0.0;
        for s in 0..samples {
            let x = expanded[lo + s * (hi - lo) / samples];
            if x + h > w.hi {
                continue;
            }
            let c = a.count_unchecked(&Window::starting_at(x, h)?) as f64;
            spread = spread.max((c - density * h).abs());
        }
        let slack = (density * epsilon).ceil() as i64 + spread.ceil() as i64 + 1;
        Ok(Self {
            expanded,
            interior: lo..hi,
            density,
            slack,
        })
    }

    /// Best `(h, mismatch)`; candidates whose mismatch exceeds `cap` abort early.
    fn best_shift(&self, tau: f64, cap: f64) -> (i64, f64) {
        let center = (self.density * tau).round() as i64;
        let mut best = (center, f64::INFINITY);
        let mut cap = cap;
        for h in center - self.slack..=center + self.slack {
            let mut worst: f64 = 0.0;
            let mut aborted = false;
            for i in self.interior.clone() {
                let j = i as i64 + h;
                let Some(&partner) = (j >= 0).then(|| self.expanded.get(j as usize)).flatten() else {
                    continue;
                };
                worst = worst.max((self.expanded[i] + tau - partner).abs());
                if worst > cap {
                    aborted = true;
                    break;
                }
            }
            if !aborted && worst < best.1 {
                best = (h, worst);
                cap = worst;
            }
        }
        best
    }

    fn mismatch(&self, tau: f64) -> (i64, f64) {
        self.best_shift(tau, f64::INFINITY)
    }
}

pub fn is_almost_period(a: &PointMultiset, tau: f64, epsilon: f64) -> Result<AlmostPeriodReport> {
    check_epsilon(epsilon)?;
    if !tau.is_finite() {
        return Err(Error::InvalidInput(format!("tau {tau} is not finite")));
    }
    let m = Matcher::new(a, tau.abs(), epsilon)?;
    let (h, mismatch) = m.mismatch(tau);
    Ok(AlmostPeriodReport {
        tau,
        epsilon,
        matched: mismatch < epsilon,
        index_shift: h,
        max_mismatch: mismatch,
    })
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("epsilon must be positive, got {epsilon}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlmostPeriodScan {
    pub reports: Vec<AlmostPeriodReport>,
    /// Longest subinterval of the scanned range free of detected periods.
    pub max_gap: f64,
}

impl AlmostPeriodScan {
    pub fn taus(&self) -> Vec<f64> {
        self.reports.iter().map(|r| r.tau).collect()
    }
}

fn max_gap(sorted: &[f64], lo: f64, hi: f64) -> f64 {
    if sorted.is_empty() {
        return hi - lo;
    }
    let inner = sorted.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    inner.max(sorted[0] - lo).max(hi - sorted[sorted.len() - 1])
}

/// Scans `tau_range` on a grid and refines every cluster of hits by a
/// golden-section search on the mismatch.
pub fn find_almost_periods(
    a: &PointMultiset,
    epsilon: f64,
    tau_range: Window,
    tau_step: f64,
) -> Result<AlmostPeriodScan> {
    check_epsilon(epsilon)?;
    if !(tau_range.length() > 0.0) {
        return Err(Error::InvalidInput("empty tau range".into()));
    }
    if !(tau_step > 0.0 && tau_step.is_finite()) {
        return Err(Error::InvalidInput(format!("tau step must be positive, got {tau_step}")));
    }
    let steps = (tau_range.length() / tau_step).floor() as usize;
    if steps > 1 << 24 {
        return Err(Error::InvalidInput(format!("tau scan would take {steps} steps")));
    }
    let reach = tau_range.lo.abs().max(tau_range.hi.abs()) + tau_step;
    let m = Matcher::new(a, reach, epsilon)?;

    let grid: Vec<f64> = (0..=steps).map(|i| tau_range.lo + i as f64 * tau_step).collect();
    let hits: Vec<Option<f64>> = grid
        .par_iter()
        .map(|&tau| {
            let (_, mm) = m.best_shift(tau, epsilon);
            (mm < epsilon).then_some(mm)
        })
        .collect();

    // clusters of consecutive grid hits
    let mut clusters: Vec<(usize, f64)> = Vec::new();
    let mut prev_hit = false;
    for (i, hit) in hits.iter().enumerate() {
        match (hit, prev_hit) {
            (Some(mm), true) => {
                let last = clusters.last_mut().expect("open cluster");
                if *mm < last.1 {
                    *last = (i, *mm);
                }
            }
            (Some(mm), false) => clusters.push((i, *mm)),
            _ => {}
        }
        prev_hit = hit.is_some();
    }

    let mut reports: Vec<AlmostPeriodReport> = clusters
        .par_iter()
        .map(|&(i, _)| {
            let tau = golden_section(|t| m.mismatch(t).1, grid[i] - tau_step, grid[i] + tau_step, 1e-12);
            let (h, mm) = m.mismatch(tau);
            AlmostPeriodReport {
                tau,
                epsilon,
                matched: mm < epsilon,
                index_shift: h,
                max_mismatch: mm,
            }
        })
        .filter(|r| r.matched && tau_range.contains(r.tau))
        .collect();
    reports.sort_by(|x, y| x.tau.partial_cmp(&y.tau).expect("finite"));
    reports.dedup_by(|x, y| (x.tau - y.tau).abs() < tau_step);
    let taus: Vec<f64> = reports.iter().map(|r| r.tau).collect();
    Ok(AlmostPeriodScan {
        max_gap: max_gap(&taus, tau_range.lo, tau_range.hi),
        reports,
    })
}

fn golden_section<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol * a.abs().max(1.0) {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityRow {
    pub length: f64,
    /// mean of count/length over the sampled window positions
    pub ratio: f64,
    /// max over positions of |count/length − d|
    pub eta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityEstimate {
    pub d: f64,
    pub rows: Vec<DensityRow>,
}

/// Number of window positions sampled per length.
const DENSITY_POSITIONS: usize = 2048;

/// Density from count/length, with the per-length deviation `eta`.
///
/// Each length is sampled at evenly spaced positions of half-open windows
/// inside the completeness window, and again at the first point after each
/// position; `d` is the mean ratio at the largest length.
pub fn estimate_density(a: &PointMultiset, window_lengths: &[f64]) -> Result<DensityEstimate> {
    if window_lengths.is_empty() {
        return Err(Error::InvalidInput("no window lengths".into()));
    }
    let w = a.window();
    let mut ratios: Vec<(f64, Vec<f64>)> = Vec::with_capacity(window_lengths.len());
    for &len in window_lengths {
        if !(len > 0.0 && len.is_finite()) {
            return Err(Error::InvalidInput(format!("degenerate window length {len}")));
        }
        if len > w.length() {
            return Err(Error::IncompleteData {
                lo: w.lo,
                hi: w.lo + len,
                window_lo: w.lo,
                window_hi: w.hi,
            });
        }
        let free = w.length() - len;
        let positions = if free > 0.0 { DENSITY_POSITIONS } else { 1 };
        let pts = a.points();
        let mut rs = Vec::with_capacity(2 * positions);
        for k in 0..positions {
            let x = if positions == 1 {
                w.lo
            } else {
                w.lo + free * k as f64 / (positions - 1) as f64
            };
            // the window starting at the next point holds the locally largest count
            let next = pts.get(pts.partition_point(|&p| p < x)).copied();
            let starts = std::iter::once(x).chain(next.filter(|&p| p + len <= w.hi));
            for x in starts {
                let c = a.count_in_window(&Window::half_open(x, (x + len).min(w.hi))?)?;
                rs.push(c as f64 / len);
            }
        }
        ratios.push((len, rs));
    }
    let largest = ratios
        .iter()
        .max_by(|x, y| x.0.partial_cmp(&y.0).expect("finite"))
        .expect("nonempty");
    let d = largest.1.iter().sum::<f64>() / largest.1.len() as f64;
    if !(d > 0.0) {
        return Err(Error::InvalidInput("multiset is empty on the largest window".into()));
    }
    let rows = ratios
        .into_iter()
        .map(|(length, rs)| DensityRow {
            length,
            ratio: rs.iter().sum::<f64>() / rs.len() as f64,
            eta: rs.iter().map(|r| (r - d).abs()).fold(0.0, f64::max),
        })
        .collect();
    Ok(DensityEstimate { d, rows })
}

/// `φ(n) = a_n − n/d` over the materialized index range.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    density: f64,
    n_min: i64,
    phi: Vec<f64>,
    sup_phi: f64,
}

impl Decomposition {
    pub fn density(&self) -> f64 {
        self.density
    }

    pub fn sup_phi(&self) -> f64 {
        self.sup_phi
    }

    pub fn index_range(&self) -> (i64, i64) {
        (self.n_min, self.n_min + self.phi.len() as i64 - 1)
    }

    pub fn phi(&self, n: i64) -> Option<f64> {
        let i = n - self.n_min;
        if i < 0 {
            return None;
        }
        self.phi.get(i as usize).copied()
    }

    fn phi_or_err(&self, n: i64) -> Result<f64> {
        self.phi(n).ok_or_else(|| {
            let (min, max) = self.index_range();
            Error::IndexOutOfRange { index: n, min, max }
        })
    }

    /// `(n, φ(n))` pairs in index order.
    pub fn series(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.phi.iter().enumerate().map(move |(i, &p)| (self.n_min + i as i64, p))
    }

    /// Restriction to `|n| ≤ radius`.
    pub fn restrict(&self, radius: i64) -> Result<Self> {
        let (lo, hi) = self.index_range();
        let a = lo.max(-radius);
        let b = hi.min(radius);
        if b < a {
            return Err(Error::IndexOutOfRange { index: radius, min: lo, max: hi });
        }
        let phi = self.phi[(a - lo) as usize..=(b - lo) as usize].to_vec();
        Ok(Self::from_parts(self.density, a, phi))
    }

    fn from_parts(density: f64, n_min: i64, phi: Vec<f64>) -> Self {
        let sup_phi = phi.iter().map(|p| p.abs()).fold(0.0, f64::max);
        Self {
            density,
            n_min,
            phi,
            sup_phi,
        }
    }

    /// Builds a decomposition straight from a `φ` series starting at `n_min`.
    pub fn from_phi(density: f64, n_min: i64, phi: Vec<f64>) -> Result<Self> {
        if !(density > 0.0 && density.is_finite()) {
            return Err(Error::InvalidInput(format!("density must be positive, got {density}")));
        }
        Ok(Self::from_parts(density, n_min, phi))
    }
}

pub fn decompose(a: &PointMultiset, d: f64) -> Result<Decomposition> {
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::InvalidInput(format!("density must be positive, got {d}")));
    }
    if a.is_empty() {
        return Err(Error::InvalidInput("empty multiset".into()));
    }
    let (n_min, _) = a.index_range();
    let phi = a
        .expanded()
        .iter()
        .enumerate()
        .map(|(i, &x)| x - (n_min + i as i64) as f64 / d)
        .collect();
    Ok(Decomposition::from_parts(d, n_min, phi))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhiPeriodScan {
    pub shifts: Vec<i64>,
    /// longest run of the scanned integer range without a detected period
    pub max_gap: i64,
}

/// Integers `h` in `h_range` with `sup_n |φ(n+h) − φ(n)| < ε`, the sup taken
/// over all `n` with both indices materialized.
pub fn phi_almost_periods(
    d: &Decomposition,
    epsilon: f64,
    h_range: std::ops::RangeInclusive<i64>,
) -> Result<PhiPeriodScan> {
    check_epsilon(epsilon)?;
    if h_range.is_empty() {
        return Err(Error::InvalidInput("empty shift range".into()));
    }
    let (lo, hi) = (*h_range.start(), *h_range.end());
    let len = d.phi.len() as i64;
    let shifts: Vec<i64> = h_range
        .into_par_iter()
        .filter(|&h| {
            if h.abs() >= len {
                return false;
            }
            let k = h.unsigned_abs() as usize;
            let (left, right) = if h >= 0 { (&d.phi[..], &d.phi[k..]) } else { (&d.phi[k..], &d.phi[..]) };
            left.iter().zip(right).all(|(p, q)| (q - p).abs() < epsilon)
        })
        .collect();
    let max_gap = if shifts.is_empty() {
        hi - lo
    } else {
        let inner = shifts.windows(2).map(|w| w[1] - w[0]).max().unwrap_or(0);
        inner.max(shifts[0] - lo).max(hi - shifts[shifts.len() - 1])
    };
    Ok(PhiPeriodScan { shifts, max_gap })
}

/// `Σ_{0<|n|≤N} n^{-1} [φ(n+τ) − φ(n)]`.
pub fn krein_levin_sum(d: &Decomposition, tau: i64, n: i64) -> Result<f64> {
    if n < 1 {
        return Err(Error::InvalidInput(format!("N must be positive, got {n}")));
    }
    let mut acc = NeumaierSum::new();
    for k in (-n..=n).filter(|&k| k != 0) {
        let diff = d.phi_or_err(k + tau)? - d.phi_or_err(k)?;
        acc.add(diff / k as f64);
    }
    Ok(acc.value())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Alpha0Report {
    pub value: f64,
    /// `(N, S_N)` along the schedule, ascending in `N`
    pub partial_sums: Vec<(f64, f64)>,
    /// entry `i` is `max_{j>i} |S_{N_i} − S_{N_j}|`
    pub cauchy_defects: Vec<f64>,
    /// defect of the first schedule entry
    pub defect: f64,
}

/// Partial sums `S_N = Σ_{|a_n|<N} 1/a_n` along a cutoff schedule.
pub fn alpha0(a: &PointMultiset, n_schedule: &[f64]) -> Result<Alpha0Report> {
    if a.contains_zero() {
        return Err(Error::ZeroInSet);
    }
    if n_schedule.is_empty() {
        return Err(Error::InvalidInput("empty cutoff schedule".into()));
    }
    let mut schedule = n_schedule.to_vec();
    if schedule.iter().any(|&n| !(n > 0.0 && n.is_finite())) {
        return Err(Error::InvalidInput("cutoffs must be positive".into()));
    }
    schedule.sort_by(|x, y| x.partial_cmp(y).expect("finite"));
    let w = a.window();
    let largest = *schedule.last().expect("nonempty");
    if -largest < w.lo || largest > w.hi {
        return Err(Error::IncompleteData {
            lo: -largest,
            hi: largest,
            window_lo: w.lo,
            window_hi: w.hi,
        });
    }

    // walk the points outward from 0, merging the shells between cutoffs
    let pts = a.points();
    let mults = a.multiplicities();
    let split = pts.partition_point(|&p| p < 0.0);
    let (mut left, mut right) = (split, split);
    let mut acc = NeumaierSum::new();
    let mut partial_sums = Vec::with_capacity(schedule.len());
    for &cut in &schedule {
        while right < pts.len() && pts[right] < cut {
            acc.add(f64::from(mults[right]) / pts[right]);
            right += 1;
        }
        while left > 0 && pts[left - 1] > -cut {
            left -= 1;
            acc.add(f64::from(mults[left]) / pts[left]);
        }
        partial_sums.push((cut, acc.value()));
    }
    let cauchy_defects: Vec<f64> = (0..partial_sums.len().saturating_sub(1))
        .map(|i| {
            partial_sums[i + 1..]
                .iter()
                .map(|&(_, s)| (s - partial_sums[i].1).abs())
                .fold(0.0, f64::max)
        })
        .collect();
    Ok(Alpha0Report {
        value: partial_sums.last().expect("nonempty").1,
        defect: cauchy_defects.first().copied().unwrap_or(0.0),
        cauchy_defects,
        partial_sums,
    })
}
