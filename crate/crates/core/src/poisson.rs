//! Poisson formula `Σ_λ c_λ ĥ(λ) = Σ_γ b_γ h(γ)` checked on Gaussians.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multiset::PointMultiset;
use crate::spectrum::Spectrum;
use crate::summation::ComplexSum;

/// `h(x) = e^{−π((x−c)/s)²}` with `ĥ(ξ) = ∫h(x)e^{−2πixξ}dx = s e^{−2πicξ} e^{−π(sξ)²}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianTest {
    pub scale: f64,
    #[serde(default)]
    pub center: f64,
}

impl GaussianTest {
    pub fn new(scale: f64, center: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) || !center.is_finite() {
            return Err(Error::InvalidInput(format!(
                "gaussian needs scale > 0 and finite center, got scale {scale}, center {center}"
            )));
        }
        Ok(Self { scale, center })
    }

    pub fn h(&self, x: f64) -> f64 {
        let u = (x - self.center) / self.scale;
        (-PI * u * u).exp()
    }

    pub fn h_hat(&self, xi: f64) -> Complex64 {
        let turns = (self.center * xi).rem_euclid(1.0);
        let v = self.scale * xi;
        Complex64::from_polar(self.scale * (-PI * v * v).exp(), -2.0 * PI * turns)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailBounds {
    /// bound on `Σ_{|λ|>lambda_cutoff} c_λ |ĥ(λ)|`
    pub lambda: f64,
    /// bound on `Σ_{|γ|>gamma_cutoff} |b_γ| h(γ)`
    pub gamma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PoissonReport {
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub residual: f64,
    pub tail_bounds: TailBounds,
    pub lambda_cutoff: f64,
    pub gamma_cutoff: f64,
}

/// `2K Σ_{k≥0} e^{−π((start+k)/width)²}`: a unit-interval mass bound `K`
/// applied on both sides beyond `start`.
fn gaussian_tail(k: f64, start: f64, width: f64) -> f64 {
    let start = start.max(0.0);
    let mut total = 0.0;
    for j in 0.. {
        let u = (start + j as f64) / width;
        let term = (-PI * u * u).exp();
        total += term;
        if term < 1e-300 || term <= total * 1e-17 {
            break;
        }
    }
    2.0 * k * total
}

/// Both sides of the Poisson formula truncated at the given cutoffs.
///
/// Fails with [`Error::TailTooLarge`] when either neglected tail may exceed
/// `tail_tolerance`.
pub fn poisson_residual(
    a: &PointMultiset,
    s: &Spectrum,
    h: &GaussianTest,
    lambda_cutoff: f64,
    gamma_cutoff: f64,
    tail_tolerance: f64,
) -> Result<PoissonReport> {
    if !(lambda_cutoff > 0.0 && gamma_cutoff > 0.0) {
        return Err(Error::InvalidInput("cutoffs must be positive".into()));
    }
    let w = a.window();
    if w.lo > -lambda_cutoff || w.hi < lambda_cutoff {
        return Err(Error::IncompleteData {
            lo: -lambda_cutoff,
            hi: lambda_cutoff,
            window_lo: w.lo,
            window_hi: w.hi,
        });
    }
    s.require_cover(-gamma_cutoff, gamma_cutoff)?;

    // one unit of slack so that points just past the cutoff count in K
    let k_lambda = (a.unit_count_bound() + 1) as f64;
    let k_gamma = s.unit_mass_bound() * 2.0;
    let tails = TailBounds {
        lambda: gaussian_tail(k_lambda, lambda_cutoff, 1.0 / h.scale) * h.scale,
        gamma: gaussian_tail(k_gamma, gamma_cutoff - h.center.abs(), h.scale),
    };
    let worst = tails.lambda.max(tails.gamma);
    if worst > tail_tolerance {
        return Err(Error::TailTooLarge {
            bound: worst,
            tolerance: tail_tolerance,
        });
    }

    let mut lhs = ComplexSum::new();
    for (&p, &m) in a.points().iter().zip(a.multiplicities()) {
        if p.abs() <= lambda_cutoff {
            lhs.add(h.h_hat(p) * m as f64);
        }
    }
    let mut rhs = ComplexSum::new();
    for atom in s.atoms() {
        if atom.gamma.abs() <= gamma_cutoff {
            rhs.add(atom.mass * h.h(atom.gamma));
        }
    }
    let (lhs, rhs) = (lhs.value(), rhs.value());
    Ok(PoissonReport {
        lhs,
        rhs,
        residual: (lhs - rhs).norm(),
        tail_bounds: tails,
        lambda_cutoff,
        gamma_cutoff,
    })
}

/// [`poisson_residual`] for several test functions in parallel.
pub fn poisson_residuals(
    a: &PointMultiset,
    s: &Spectrum,
    tests: &[GaussianTest],
    lambda_cutoff: f64,
    gamma_cutoff: f64,
    tail_tolerance: f64,
) -> Result<Vec<PoissonReport>> {
    tests
        .par_iter()
        .map(|h| poisson_residual(a, s, h, lambda_cutoff, gamma_cutoff, tail_tolerance))
        .collect()
}
