use astro_float::BigFloat;
use num_bigint::BigInt;

use super::mp::{self, RM};
use super::PrecisionContext;
use crate::error::{Error, Result};

/// Bits the mantissa must carry beyond the integer part before a
/// value may be snapped to an integer.
pub const HEADROOM_BITS: usize = 32;

/// An integer snapped from a floating-point value.
#[derive(Clone, Debug, PartialEq)]
pub struct Recognized {
    pub value: BigInt,
    /// `|x - value|`.
    pub residual: f64,
}

/// Snaps `x` to the nearest integer when `|x - round(x)|` is below
/// `integer_tolerance * max(1, sqrt|x|)`, capped at 1/4 so that large values
/// still separate neighbouring integers.
///
/// Fails with [`Error::InsufficientPrecision`] when the test fails, or when the
/// mantissa of `x` cannot resolve its units digit with [`HEADROOM_BITS`] to spare.
pub fn integer_recognize(x: &BigFloat, ctx: &PrecisionContext) -> Result<Recognized> {
    let bits = x.precision().unwrap_or(0).max(ctx.mantissa_bits);
    if x.is_nan() || x.is_inf() {
        return Err(Error::InsufficientPrecision {
            bits,
            residual: f64::INFINITY,
        });
    }
    let r = x.round(0, RM);
    let p = x.precision().unwrap_or(64).max(64);
    let residual = mp::to_f64(&x.sub(&r, p, RM).abs());
    let mag = mp::log2_abs(x);
    if mag.is_finite() && mag + HEADROOM_BITS as f64 > p as f64 {
        return Err(Error::InsufficientPrecision { bits, residual });
    }
    let scale = if mag > 0.0 { (mag / 2.0).exp2() } else { 1.0 };
    if residual < (ctx.integer_tolerance * scale).min(0.25) {
        Ok(Recognized {
            value: mp::integer_to_bigint(&r),
            residual,
        })
    } else {
        Err(Error::InsufficientPrecision { bits, residual })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> PrecisionContext {
        PrecisionContext::default()
    }

    #[test]
    fn snaps_near_integers() {
        let x = BigFloat::from_f64(1727.999999999997, 64);
        let r = integer_recognize(&x, &ctx()).unwrap();
        assert_eq!(r.value, BigInt::from(1728));
        assert!(r.residual < 1e-11);
    }

    #[test]
    fn rejects_far_values() {
        let x = BigFloat::from_f64(1728.4, 64);
        assert!(matches!(
            integer_recognize(&x, &ctx()),
            Err(Error::InsufficientPrecision { .. })
        ));
    }

    #[test]
    fn rejects_values_beyond_the_mantissa() {
        // 2^100 at 64 bits cannot resolve its last digit.
        let x = BigFloat::from_f64(2f64.powi(100), 64);
        assert!(integer_recognize(&x, &ctx()).is_err());
        let mut y = x.clone();
        y.set_precision(192, RM).unwrap();
        let r = integer_recognize(&y, &ctx()).unwrap();
        assert_eq!(r.value, BigInt::from(2u8).pow(100));
    }

    #[test]
    fn tolerance_grows_with_sqrt() {
        // residual 1e-6 passes at |x| = 1e8 (scale 1e4) but not at |x| = 1.
        let big = BigFloat::from_f64(1e8 + 1e-6, 128);
        assert!(integer_recognize(&big, &ctx()).is_ok());
        let small = BigFloat::from_f64(1.0 + 1e-6, 128);
        assert!(integer_recognize(&small, &ctx()).is_err());
    }
}
