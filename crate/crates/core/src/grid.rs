//! Evaluation grids written as `x0:x1:step@y`.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Upper limit on grid points, to keep a typo from allocating gigabytes.
pub const MAX_GRID_POINTS: usize = 10_000_000;

/// Points `x0, x0+step, ...` up to `x1` (inclusive within round-off) on the
/// horizontal line `Im z = y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x0: f64,
    pub x1: f64,
    pub step: f64,
    pub y: f64,
}

impl GridSpec {
    pub fn new(x0: f64, x1: f64, step: f64, y: f64) -> Result<Self> {
        if ![x0, x1, step, y].iter().all(|v| v.is_finite()) {
            return Err(Error::Parse("grid values must be finite".into()));
        }
        if !(step > 0.0) {
            return Err(Error::Parse(format!("grid step must be positive, got {step}")));
        }
        if x1 < x0 {
            return Err(Error::Parse(format!("grid end {x1} lies before start {x0}")));
        }
        let g = Self { x0, x1, step, y };
        if g.count_f64() > MAX_GRID_POINTS as f64 {
            return Err(Error::Parse(format!("grid has more than {MAX_GRID_POINTS} points")));
        }
        Ok(g)
    }

    fn count_f64(&self) -> f64 {
        ((self.x1 - self.x0) / self.step * (1.0 + 1e-12)).floor() + 1.0
    }

    pub fn len(&self) -> usize {
        self.count_f64() as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.x0 + k as f64 * self.step).collect()
    }
}

impl FromStr for GridSpec {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("grid must look like x0:x1:step@y, got {text:?}"));
        let (range, y) = text.trim().split_once('@').ok_or_else(bad)?;
        let parts: Vec<&str> = range.split(':').collect();
        if parts.len() != 3 {
            return Err(bad());
        }
        let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
        GridSpec::new(num(parts[0])?, num(parts[1])?, num(parts[2])?, num(y)?)
    }
}
