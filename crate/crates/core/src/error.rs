use thiserror::Error;

/// Errors raised by the numerical routines.
///
/// Each variant carries a stable machine-readable code (see [`Error::code`])
/// which the CLI forwards in its JSON error object.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("point {point} lies outside the completeness window [{lo}, {hi}]")]
    OutsideWindow { point: f64, lo: f64, hi: f64 },

    #[error("query [{lo}, {hi}] exceeds the completeness window [{window_lo}, {window_hi}]")]
    IncompleteData {
        lo: f64,
        hi: f64,
        window_lo: f64,
        window_hi: f64,
    },

    #[error("0 is a point of the multiset")]
    ZeroInSet,

    #[error("index {index} outside the materialized range [{min}, {max}]")]
    IndexOutOfRange { index: i64, min: i64, max: i64 },

    #[error("z = {re}+{im}i is within {distance:e} of the point a_{index}")]
    Pole {
        index: i64,
        re: f64,
        im: f64,
        distance: f64,
    },

    #[error("frequency band [{lo}, {hi}] does not cover the required range [{need_lo}, {need_hi}]")]
    BandTooNarrow {
        lo: f64,
        hi: f64,
        need_lo: f64,
        need_hi: f64,
    },

    #[error("truncation tail bound {bound:e} exceeds tolerance {tolerance:e}; increase the cutoff")]
    TailTooLarge { bound: f64, tolerance: f64 },

    #[error("root scan unresolved near x = {x}: two sign changes inside one step of {step}")]
    MissedRoots { x: f64, step: f64 },

    #[error("window too small: {0}")]
    WindowTooSmall(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid_input",
            Error::OutsideWindow { .. } => "outside_window",
            Error::IncompleteData { .. } => "incomplete_data",
            Error::ZeroInSet => "zero_in_set",
            Error::IndexOutOfRange { .. } => "index_out_of_range",
            Error::Pole { .. } => "pole",
            Error::BandTooNarrow { .. } => "band_too_narrow",
            Error::TailTooLarge { .. } => "tail_too_large",
            Error::MissedRoots { .. } => "missed_roots",
            Error::WindowTooSmall(_) => "window_too_small",
            Error::Parse(_) => "parse_error",
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
