//! Locally finite real multisets with integer multiplicities.
//!
//! A [`PointMultiset`] stores the distinct points of a finite section of the
//! multiset together with the closed window over which that section is
//! complete. The expanded view `a_n` repeats every point by its multiplicity
//! and is indexed so that `a_0` is the smallest element `>= 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Upper limit on the expanded length; guards against absurd multiplicities.
pub const MAX_EXPANDED_LEN: usize = 1 << 28;

/// An interval of the real line with independently open or closed ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub lo: f64,
    pub hi: f64,
    pub closed_left: bool,
    pub closed_right: bool,
}

impl Window {
    pub fn new(lo: f64, hi: f64, closed_left: bool, closed_right: bool) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(Error::InvalidInput(format!("window [{lo}, {hi}] is not finite")));
        }
        if lo > hi {
            return Err(Error::InvalidInput(format!("window has lo {lo} > hi {hi}")));
        }
        Ok(Self {
            lo,
            hi,
            closed_left,
            closed_right,
        })
    }

    /// `[lo, hi]`
    pub fn closed(lo: f64, hi: f64) -> Result<Self> {
        Self::new(lo, hi, true, true)
    }

    /// `[lo, hi)`, the default shape for counting windows.
    pub fn half_open(lo: f64, hi: f64) -> Result<Self> {
        Self::new(lo, hi, true, false)
    }

    /// `[x, x + h)`
    pub fn starting_at(x: f64, h: f64) -> Result<Self> {
        Self::half_open(x, x + h)
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        let left = if self.closed_left { x >= self.lo } else { x > self.lo };
        let right = if self.closed_right { x <= self.hi } else { x < self.hi };
        left && right
    }

    /// Whether `other` is a subset of `self`.
    pub fn covers(&self, other: &Window) -> bool {
        let left_ok = other.lo > self.lo || (other.lo == self.lo && (self.closed_left || !other.closed_left));
        let right_ok = other.hi < self.hi || (other.hi == self.hi && (self.closed_right || !other.closed_right));
        left_ok && right_ok
    }
}

/// Sorted distinct points with multiplicities plus the completeness window.
#[derive(Debug, Clone, PartialEq)]
pub struct PointMultiset {
    points: Vec<f64>,
    multiplicities: Vec<u32>,
    /// cumulative[i] = total multiplicity of points[..i]
    cumulative: Vec<u64>,
    window: Window,
    nonzero: bool,
    expanded: Vec<f64>,
    origin: usize,
}

impl PointMultiset {
    /// Builds a multiset, merging exactly coincident coordinates.
    pub fn build(points: &[(f64, u32)], window: Window, nonzero_required: bool) -> Result<Self> {
        Self::build_with_tolerance(points, window, nonzero_required, 0.0)
    }

    /// Like [`PointMultiset::build`], but points closer than `merge_tol` to
    /// the first point of their cluster are merged into it.
    pub fn build_with_tolerance(
        points: &[(f64, u32)],
        window: Window,
        nonzero_required: bool,
        merge_tol: f64,
    ) -> Result<Self> {
        if !(merge_tol >= 0.0 && merge_tol.is_finite()) {
            return Err(Error::InvalidInput(format!("merge tolerance {merge_tol} must be finite and >= 0")));
        }
        let window = Window::closed(window.lo, window.hi)?;
        let mut sorted = Vec::with_capacity(points.len());
        let mut total: u64 = 0;
        for &(p, m) in points {
            if !p.is_finite() {
                return Err(Error::InvalidInput(format!("point {p} is not finite")));
            }
            if m == 0 {
                return Err(Error::InvalidInput(format!("point {p} has multiplicity 0")));
            }
            if !window.contains(p) {
                return Err(Error::OutsideWindow {
                    point: p,
                    lo: window.lo,
                    hi: window.hi,
                });
            }
            if nonzero_required && p == 0.0 {
                return Err(Error::ZeroInSet);
            }
            total += u64::from(m);
            sorted.push((p, m));
        }
        if total > MAX_EXPANDED_LEN as u64 {
            return Err(Error::InvalidInput(format!(
                "expanded multiset has {total} elements, limit is {MAX_EXPANDED_LEN}"
            )));
        }
        sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite"));

        let mut merged_points: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut merged_mults: Vec<u32> = Vec::with_capacity(sorted.len());
        for (p, m) in sorted {
            match merged_points.last() {
                Some(&head) if p - head <= merge_tol => {
                    let last = merged_mults.last_mut().expect("parallel vectors");
                    *last = last
                        .checked_add(m)
                        .ok_or_else(|| Error::InvalidInput("multiplicity overflow".into()))?;
                }
                _ => {
                    merged_points.push(p);
                    merged_mults.push(m);
                }
            }
        }

        let mut cumulative = Vec::with_capacity(merged_points.len() + 1);
        let mut expanded = Vec::with_capacity(total as usize);
        let mut running = 0u64;
        cumulative.push(0);
        for (&p, &m) in merged_points.iter().zip(&merged_mults) {
            running += u64::from(m);
            cumulative.push(running);
            expanded.extend(std::iter::repeat(p).take(m as usize));
        }
        let origin = expanded.partition_point(|&a| a < 0.0);

        Ok(Self {
            points: merged_points,
            multiplicities: merged_mults,
            cumulative,
            window,
            nonzero: nonzero_required,
            expanded,
            origin,
        })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn multiplicities(&self) -> &[u32] {
        &self.multiplicities
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn nonzero(&self) -> bool {
        self.nonzero
    }

    /// Total multiplicity.
    pub fn len(&self) -> usize {
        self.expanded.len()
    }

    pub fn is_empty(&self) -> bool {
        self.expanded.is_empty()
    }

    /// Expanded nondecreasing sequence; element `origin_index()` is `a_0`.
    pub fn expanded(&self) -> &[f64] {
        &self.expanded
    }

    /// Position of `a_0` inside [`PointMultiset::expanded`].
    pub fn origin_index(&self) -> usize {
        self.origin
    }

    /// Smallest and largest materialized index `n`.
    pub fn index_range(&self) -> (i64, i64) {
        let min = -(self.origin as i64);
        (min, min + self.expanded.len() as i64 - 1)
    }

    /// Whether `0` belongs to the multiset.
    pub fn contains_zero(&self) -> bool {
        self.points.binary_search_by(|p| p.partial_cmp(&0.0).expect("finite")).is_ok()
    }

    pub fn a(&self, n: i64) -> Result<f64> {
        self.try_a(n).ok_or_else(|| {
            let (min, max) = self.index_range();
            Error::IndexOutOfRange { index: n, min, max }
        })
    }

    #[inline]
    pub fn try_a(&self, n: i64) -> Option<f64> {
        let pos = self.origin as i64 + n;
        if pos < 0 {
            return None;
        }
        self.expanded.get(pos as usize).copied()
    }

    fn check_inside(&self, w: &Window) -> Result<()> {
        if self.window.covers(w) {
            Ok(())
        } else {
            Err(Error::IncompleteData {
                lo: w.lo,
                hi: w.hi,
                window_lo: self.window.lo,
                window_hi: self.window.hi,
            })
        }
    }

    /// `#A ∩ w`, counting multiplicity.
    pub fn count_in_window(&self, w: &Window) -> Result<u64> {
        self.check_inside(w)?;
        Ok(self.count_unchecked(w))
    }

    pub(crate) fn count_unchecked(&self, w: &Window) -> u64 {
        let start = if w.closed_left {
            self.points.partition_point(|&p| p < w.lo)
        } else {
            self.points.partition_point(|&p| p <= w.lo)
        };
        let end = if w.closed_right {
            self.points.partition_point(|&p| p <= w.hi)
        } else {
            self.points.partition_point(|&p| p < w.hi)
        };
        if end <= start {
            0
        } else {
            self.cumulative[end] - self.cumulative[start]
        }
    }

    /// Empirical discrepancy constants for windows `[x, x+h)`.
    pub fn discrepancy_stats(&self, h: f64, m: u32, x_samples: &[f64]) -> Result<DiscrepancyStats> {
        if x_samples.is_empty() {
            return Err(Error::InvalidInput("discrepancy_stats needs at least one sample".into()));
        }
        if !(h > 0.0 && h.is_finite()) || m == 0 {
            return Err(Error::InvalidInput(format!("need h > 0 and M >= 1, got h = {h}, M = {m}")));
        }
        let mut scale_defect: f64 = 0.0;
        let mut min_count = u64::MAX;
        let mut max_count = 0u64;
        for &x in x_samples {
            let short = self.count_in_window(&Window::starting_at(x, h)?)?;
            let long = self.count_in_window(&Window::starting_at(x, f64::from(m) * h)?)?;
            scale_defect = scale_defect.max((short as f64 - long as f64 / f64::from(m)).abs());
            min_count = min_count.min(short);
            max_count = max_count.max(short);
        }
        Ok(DiscrepancyStats {
            max_scale_defect: scale_defect,
            max_pair_difference: max_count - min_count,
        })
    }

    /// Largest `#A ∩ [x, x+h)` over the sampled `x`.
    pub fn max_count(&self, h: f64, x_samples: &[f64]) -> Result<u64> {
        let mut best = 0;
        for &x in x_samples {
            best = best.max(self.count_in_window(&Window::starting_at(x, h)?)?);
        }
        Ok(best)
    }

    /// Largest multiplicity-weighted count over unit windows tiling the
    /// completeness window. Used as the counting constant in tail bounds.
    pub fn unit_count_bound(&self) -> u64 {
        let mut best = 0;
        let mut i = 0;
        let n = self.points.len();
        // sliding window over the sorted points: max mass in any [p, p+1]
        for j in 0..n {
            while self.points[j] - self.points[i] > 1.0 {
                i += 1;
            }
            best = best.max(self.cumulative[j + 1] - self.cumulative[i]);
        }
        best
    }

    pub fn to_doc(&self) -> MultisetDoc {
        MultisetDoc {
            points: self.points.iter().copied().zip(self.multiplicities.iter().copied()).collect(),
            window: [self.window.lo, self.window.hi],
            nonzero: self.nonzero,
        }
    }

    pub fn from_doc(doc: &MultisetDoc) -> Result<Self> {
        Self::build(&doc.points, Window::closed(doc.window[0], doc.window[1])?, doc.nonzero)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_doc()).expect("multiset serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: MultisetDoc = serde_json::from_str(text)?;
        Self::from_doc(&doc)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiscrepancyStats {
    /// max |#A∩[x,x+h) − (1/M)#A∩[x,x+Mh)|
    pub max_scale_defect: f64,
    /// max over pairs of sampled windows of the count difference
    pub max_pair_difference: u64,
}

/// Wire format: `{"points": [[coord, mult], ...], "window": [lo, hi], "nonzero": bool}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultisetDoc {
    pub points: Vec<(f64, u32)>,
    pub window: [f64; 2],
    #[serde(default)]
    pub nonzero: bool,
}
