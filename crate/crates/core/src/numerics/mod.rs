//! Precision control, arbitrary-precision complex arithmetic, Legendre functions
//! of the second kind and integer recognition.

pub mod legendre;
pub mod mp;
pub mod recognize;

use serde::Serialize;

use crate::error::{Error, Result};

pub use legendre::{
    legendre_p, legendre_q_closed, legendre_q_num, legendre_r, mk_constant, mk_constant_sampled,
};
pub use mp::MpComplex;
pub use recognize::{integer_recognize, Recognized};

/// Working precision and tolerances shared by every numerical routine.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PrecisionContext {
    /// Mantissa length in bits for arbitrary-precision work.
    pub mantissa_bits: usize,
    /// Base tolerance used when snapping a real number to an integer.
    pub integer_tolerance: f64,
    /// How many times a computation may double its precision before giving up.
    pub max_retries: u32,
    /// Target truncation error for series and quadrature.
    pub series_tail_bound: f64,
    /// Target truncation error for hyperbolic lattice sums.
    pub lattice_tail_bound: f64,
}

impl Default for PrecisionContext {
    fn default() -> Self {
        PrecisionContext {
            mantissa_bits: 256,
            integer_tolerance: 1e-9,
            max_retries: 4,
            series_tail_bound: 1e-12,
            lattice_tail_bound: 1e-6,
        }
    }
}

impl PrecisionContext {
    pub fn new(
        mantissa_bits: usize,
        integer_tolerance: f64,
        max_retries: u32,
        series_tail_bound: f64,
    ) -> Result<Self> {
        let ctx = PrecisionContext {
            mantissa_bits,
            integer_tolerance,
            max_retries,
            series_tail_bound,
            ..Default::default()
        };
        ctx.validate()?;
        Ok(ctx)
    }

    pub fn validate(&self) -> Result<()> {
        if self.mantissa_bits < 64 {
            return Err(Error::InvalidArgument(format!(
                "mantissa_bits must be at least 64, got {}",
                self.mantissa_bits
            )));
        }
        if !(self.integer_tolerance > 0.0 && self.integer_tolerance < 0.5) {
            return Err(Error::InvalidArgument(format!(
                "integer_tolerance must lie in (0, 0.5), got {}",
                self.integer_tolerance
            )));
        }
        for (name, v) in [
            ("series_tail_bound", self.series_tail_bound),
            ("lattice_tail_bound", self.lattice_tail_bound),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }

    pub fn with_bits(&self, mantissa_bits: usize) -> Self {
        PrecisionContext {
            mantissa_bits,
            ..self.clone()
        }
    }

    pub fn with_lattice_tail_bound(&self, lattice_tail_bound: f64) -> Self {
        PrecisionContext {
            lattice_tail_bound,
            ..self.clone()
        }
    }

    pub fn doubled(&self) -> Self {
        self.with_bits(self.mantissa_bits * 2)
    }

    /// Runs `f`, doubling the precision each time it reports
    /// [`Error::InsufficientPrecision`], at most `max_retries` times.
    pub fn retry<T>(&self, mut f: impl FnMut(&PrecisionContext) -> Result<T>) -> Result<T> {
        let mut ctx = self.clone();
        let mut attempt = 0;
        loop {
            match f(&ctx) {
                Err(Error::InsufficientPrecision { bits, residual }) => {
                    if attempt >= self.max_retries {
                        return Err(Error::PrecisionExhausted {
                            bits,
                            retries: attempt,
                            residual,
                        });
                    }
                    attempt += 1;
                    ctx = ctx.doubled();
                }
                other => return other,
            }
        }
    }
}
