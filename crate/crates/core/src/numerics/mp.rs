//! Thin layer over `astro-float`: conversions to and from `f64` and `BigInt`,
//! a cached constant pool and a complex type.

use std::cell::RefCell;

use astro_float::{BigFloat, Consts, RoundingMode, Sign};
use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;

pub(crate) const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("astro-float constant cache"));
}

/// Runs `f` with this thread's constant cache (pi, ln 2, ...).
pub fn with_consts<R>(f: impl FnOnce(&mut Consts) -> R) -> R {
    CONSTS.with(|c| f(&mut c.borrow_mut()))
}

pub fn pi(p: usize) -> BigFloat {
    with_consts(|cc| cc.pi(p, RM))
}

pub fn from_i64(x: i64, p: usize) -> BigFloat {
    BigFloat::from_i64(x, p)
}

pub fn from_f64(x: f64, p: usize) -> BigFloat {
    BigFloat::from_f64(x, p)
}

/// Exact conversion; the precision is the bit length of `n` rounded up to words.
pub fn from_bigint(n: &BigInt) -> BigFloat {
    let (sign, digits) = n.to_u64_digits();
    if digits.is_empty() {
        return BigFloat::new(64);
    }
    let s = if sign == num_bigint::Sign::Minus {
        Sign::Neg
    } else {
        Sign::Pos
    };
    BigFloat::from_words(&digits, s, (64 * digits.len()) as i32)
}

/// Splits a nonzero finite `x` as `f * 2^e` with `0.5 <= |f| <= 1`.
pub fn split(x: &BigFloat) -> Option<(f64, i64)> {
    if x.is_zero() {
        return None;
    }
    let (m, _, s, e, _) = x.as_raw_parts()?;
    let top = *m.last()?;
    let next = if m.len() >= 2 { m[m.len() - 2] } else { 0 };
    let f = (top as f64 + next as f64 * 2f64.powi(-64)) * 2f64.powi(-64);
    let f = if s == Sign::Neg { -f } else { f };
    Some((f, e as i64))
}

/// `f * 2^e` without intermediate overflow.
pub fn ldexp(f: f64, e: i64) -> f64 {
    if f == 0.0 {
        return 0.0;
    }
    if e > 2200 {
        return f * f64::INFINITY;
    }
    if e < -2200 {
        return 0.0;
    }
    let half = (e / 2) as i32;
    f * 2f64.powi(half) * 2f64.powi(e as i32 - half)
}

pub fn to_f64(x: &BigFloat) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x.is_inf() {
        return if x.is_positive() {
            f64::INFINITY
        } else {
            f64::NEG_INFINITY
        };
    }
    match split(x) {
        None => 0.0,
        Some((f, e)) => ldexp(f, e),
    }
}

/// `log2 |x|`, valid far outside the `f64` exponent range.
pub fn log2_abs(x: &BigFloat) -> f64 {
    match split(x) {
        None => f64::NEG_INFINITY,
        Some((f, e)) => f.abs().log2() + e as f64,
    }
}

/// `log2(2^a + 2^b)` without leaving the logarithmic domain.
pub fn log2_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp2().ln_1p() / std::f64::consts::LN_2
}

/// Exact conversion of a value that is already an integer.
pub fn integer_to_bigint(x: &BigFloat) -> BigInt {
    if x.is_zero() {
        return BigInt::from(0);
    }
    let (m, _, s, e, _) = x.as_raw_parts().expect("finite value");
    let digits: Vec<u32> = m
        .iter()
        .flat_map(|w| [*w as u32, (*w >> 32) as u32])
        .collect();
    let mag = BigUint::new(digits);
    let shift = e as i64 - 64 * m.len() as i64;
    let mag = if shift >= 0 {
        mag << shift as usize
    } else {
        mag >> (-shift) as usize
    };
    let sign = if s == Sign::Neg {
        num_bigint::Sign::Minus
    } else {
        num_bigint::Sign::Plus
    };
    BigInt::from_biguint(sign, mag)
}

/// Nearest integer (ties to even).
pub fn round_to_bigint(x: &BigFloat) -> BigInt {
    let r = x.round(0, RM);
    integer_to_bigint(&r)
}

/// Complex number with arbitrary-precision parts.
#[derive(Clone, Debug)]
pub struct MpComplex {
    pub re: BigFloat,
    pub im: BigFloat,
}

impl MpComplex {
    pub fn new(re: BigFloat, im: BigFloat) -> Self {
        MpComplex { re, im }
    }

    pub fn zero(p: usize) -> Self {
        MpComplex::new(BigFloat::new(p), BigFloat::new(p))
    }

    pub fn one(p: usize) -> Self {
        MpComplex::new(BigFloat::from_u8(1, p), BigFloat::new(p))
    }

    pub fn from_real(re: BigFloat, p: usize) -> Self {
        MpComplex::new(re, BigFloat::new(p))
    }

    pub fn from_f64(re: f64, im: f64, p: usize) -> Self {
        MpComplex::new(from_f64(re, p), from_f64(im, p))
    }

    pub fn from_bigint(n: &BigInt, p: usize) -> Self {
        MpComplex::from_real(from_bigint(n), p)
    }

    /// `cos(theta) + i sin(theta)`.
    pub fn expi(theta: &BigFloat, p: usize) -> Self {
        with_consts(|cc| MpComplex::new(theta.cos(p, RM, cc), theta.sin(p, RM, cc)))
    }

    pub fn add(&self, o: &Self, p: usize) -> Self {
        MpComplex::new(self.re.add(&o.re, p, RM), self.im.add(&o.im, p, RM))
    }

    pub fn sub(&self, o: &Self, p: usize) -> Self {
        MpComplex::new(self.re.sub(&o.re, p, RM), self.im.sub(&o.im, p, RM))
    }

    pub fn neg(&self) -> Self {
        MpComplex::new(self.re.neg(), self.im.neg())
    }

    pub fn conj(&self) -> Self {
        MpComplex::new(self.re.clone(), self.im.neg())
    }

    pub fn mul(&self, o: &Self, p: usize) -> Self {
        let ac = self.re.mul(&o.re, p, RM);
        let bd = self.im.mul(&o.im, p, RM);
        let ad = self.re.mul(&o.im, p, RM);
        let bc = self.im.mul(&o.re, p, RM);
        MpComplex::new(ac.sub(&bd, p, RM), ad.add(&bc, p, RM))
    }

    pub fn mul_real(&self, r: &BigFloat, p: usize) -> Self {
        MpComplex::new(self.re.mul(r, p, RM), self.im.mul(r, p, RM))
    }

    pub fn norm_sqr(&self, p: usize) -> BigFloat {
        let a = self.re.mul(&self.re, p, RM);
        let b = self.im.mul(&self.im, p, RM);
        a.add(&b, p, RM)
    }

    pub fn div(&self, o: &Self, p: usize) -> Self {
        let n = o.norm_sqr(p);
        self.mul(&o.conj(), p)
            .mul_real(&n.reciprocal(p, RM), p)
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        !(self.re.is_nan() || self.im.is_nan() || self.re.is_inf() || self.im.is_inf())
    }

    /// `log2 |z|`; `-inf` for zero.
    pub fn log2_abs(&self) -> f64 {
        match (split(&self.re), split(&self.im)) {
            (None, None) => f64::NEG_INFINITY,
            (Some((f, e)), None) | (None, Some((f, e))) => f.abs().log2() + e as f64,
            (Some((fr, er)), Some((fi, ei))) => {
                let e = er.max(ei);
                let r = ldexp(fr, er - e).hypot(ldexp(fi, ei - e));
                r.log2() + e as f64
            }
        }
    }

    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(to_f64(&self.re), to_f64(&self.im))
    }
}
