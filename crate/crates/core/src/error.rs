use thiserror::Error;

use crate::quadforms::QuadForm;

/// Errors raised by the computational kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid discriminant {0}: must be negative and congruent to 0 or 1 mod 4")]
    InvalidDiscriminant(i64),

    #[error("invalid form ({a}, {b}, {c}): {reason}")]
    InvalidForm {
        a: i64,
        b: i64,
        c: i64,
        reason: &'static str,
    },

    #[error("discriminant mismatch: {0} vs {1}")]
    DiscriminantMismatch(i64, i64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("insufficient precision at {bits} bits (residual {residual:e})")]
    InsufficientPrecision { bits: usize, residual: f64 },

    #[error("precision exhausted: still insufficient at {bits} bits after {retries} retries (residual {residual:e})")]
    PrecisionExhausted {
        bits: usize,
        retries: u32,
        residual: f64,
    },

    #[error("point is a singularity of the kernel")]
    Singular,

    #[error("cycle meets singularity: phi_m vanishes at ({z1}, {z2}) through coset {coset:?}")]
    CycleSingular {
        z1: QuadForm,
        z2: QuadForm,
        coset: (i64, i64, i64),
    },

    #[error("point pair lies on the Hecke graph through coset {coset:?}")]
    OnHeckeGraph { coset: (i64, i64, i64) },

    #[error("lattice tail budget {budget:e} unreachable: tail {tail:e} at cosh cutoff {cutoff:e}")]
    TailBudget { budget: f64, tail: f64, cutoff: f64 },

    #[error("quadrature did not reach {target:e} (last difference {achieved:e})")]
    Quadrature { target: f64, achieved: f64 },

    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
