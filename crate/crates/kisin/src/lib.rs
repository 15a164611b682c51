//! Exact arithmetic for mod-p Kisin modules attached to CM p-divisible groups.
//!
//! The crate works with truncated power series over a finite field F_{p^f},
//! square Frobenius matrices over those series (row convention: the semilinear
//! map sends the row vector (f_1, ..., f_h) to (f_1^p, ..., f_h^p) * A with
//! u -> u^p applied coefficientwise), and derives from them:
//!
//! * saturated phi-stable lines and their valuations ([`line_solver`]),
//! * degrees, slopes and Harder-Narasimhan data ([`hn`]),
//! * reflex-type combinatorics for unramified CM types ([`cm_combinatorics`]),
//! * ramified quadratic/quartic presets built from Lubin-Tate division
//!   polynomials ([`lubin_tate`], [`presets`]),
//! * closed-form local coefficients for Faltings height variation under
//!   p-power isogenies ([`heights`]).
//!
//! All arithmetic is exact: coefficients live in F_{p^f}, valuations are
//! integers, and reported constants are arbitrary-precision rationals.
//! Operations that would need coefficients beyond a series' precision fail
//! with [`Error::PrecisionExhausted`] rather than silently truncating.

pub mod algebra;
pub mod cm_combinatorics;
pub mod heights;
pub mod hn;
pub mod kisin_core;
pub mod line_solver;
pub mod lubin_tate;
pub mod presets;

/// Crate-wide error type.
///
/// `Invalid` covers domain errors (bad primes, malformed matrices, violated
/// preconditions); `PrecisionExhausted` means a computation needed series
/// coefficients at or beyond the working precision. Callers that map errors
/// to process exit codes should treat the two differently.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
    pub(crate) fn precision(msg: impl Into<String>) -> Self {
        Error::PrecisionExhausted(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
