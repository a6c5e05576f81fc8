//! Numerical toolkit for almost periodic point multisets on the real line:
//! their diffraction spectra, Bohr means, canonical products and the
//! Poisson formula linking the two sides.

pub mod almost_periodic;
pub mod entire_fn;
pub mod error;
pub mod generators;
pub mod grid;
pub mod multiset;
pub mod poisson;
pub mod spectrum;
pub mod summation;

pub use error::{Error, Result};
pub use multiset::{PointMultiset, Window};
pub use spectrum::{Atom, Provenance, Spectrum};

pub use num_complex::Complex64;
