//! The modular invariant `j`.
//!
//! The main route sums the q-expansion of `E_4^3 / Delta` with exact integer
//! coefficients, generated on demand and kept in a process-wide append-only
//! cache. A second, independent route through the eta quotient
//! `t = Delta(2z)/Delta(z)`, `j = (256 t + 1)^3 / t`, is kept for cross-checks.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock, RwLock};

use astro_float::BigFloat;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};

use super::domain::{fd_reduce, fd_reduce_mp};
use crate::error::{Error, Result};
use crate::numerics::mp::{self, RM};
use crate::numerics::{MpComplex, PrecisionContext};
use crate::quadforms::{CmPoint, QuadForm};

fn coefficient_store() -> &'static RwLock<Arc<Vec<BigInt>>> {
    static STORE: OnceLock<RwLock<Arc<Vec<BigInt>>>> = OnceLock::new();
    STORE.get_or_init(|| RwLock::new(Arc::new(Vec::new())))
}

fn extend_lock() -> &'static Mutex<()> {
    static LOCK: Mutex<()> = Mutex::new(());
    &LOCK
}

fn divisor_sums(n: usize, k: u32) -> Vec<BigInt> {
    let mut s = vec![BigInt::zero(); n + 1];
    for d in 1..=n {
        let dk = BigInt::from(d).pow(k);
        let mut m = d;
        while m <= n {
            s[m] += &dk;
            m += d;
        }
    }
    s
}

fn convolve(a: &[BigInt], b: &[BigInt], n: usize) -> Vec<BigInt> {
    (0..n)
        .map(|k| (0..=k).map(|i| &a[i] * &b[k - i]).sum())
        .collect()
}

/// The first `n` coefficients of `q j(q) = 1 + 744 q + 196884 q^2 + ...`.
fn compute_qj(n: usize) -> Vec<BigInt> {
    let s1 = divisor_sums(n, 1);
    let s3 = divisor_sums(n, 3);
    // 1/prod(1 - q^k)^24 via n a_n = 24 sum_k sigma_1(k) a_{n-k}
    let mut inv_delta = vec![BigInt::from(1)];
    for m in 1..n {
        let acc: BigInt = (1..=m).map(|k| &s1[k] * &inv_delta[m - k]).sum();
        inv_delta.push(acc * 24 / m);
    }
    let mut e4 = vec![BigInt::from(1)];
    e4.extend((1..n).map(|k| &s3[k] * 240));
    let e4sq = convolve(&e4, &e4, n);
    let e4cube = convolve(&e4sq, &e4, n);
    convolve(&e4cube, &inv_delta, n)
}

/// At least `n` coefficients of `q j(q)`; entry `k` is the coefficient of `q^{k-1}` in `j`.
pub fn j_coefficients(n: usize) -> Arc<Vec<BigInt>> {
    {
        let cur = coefficient_store().read().expect("coefficient cache poisoned");
        if cur.len() >= n {
            return cur.clone();
        }
    }
    let _guard = extend_lock().lock().expect("coefficient cache poisoned");
    let cur_len = coefficient_store().read().expect("poisoned").len();
    if cur_len >= n {
        return coefficient_store().read().expect("poisoned").clone();
    }
    let fresh = Arc::new(compute_qj(n.max(cur_len * 3 / 2).max(64)));
    *coefficient_store().write().expect("poisoned") = fresh.clone();
    fresh
}

/// Installs externally stored coefficients (for example from a disk cache)
/// after checking a prefix against a fresh computation.
pub fn seed_j_coefficients(coeffs: Vec<BigInt>) -> Result<()> {
    let check = compute_qj(coeffs.len().min(48));
    if coeffs[..check.len()] != check[..] {
        return Err(Error::InvalidArgument(
            "j coefficient prefix does not match".into(),
        ));
    }
    let _guard = extend_lock().lock().expect("poisoned");
    let mut store = coefficient_store().write().expect("poisoned");
    if coeffs.len() > store.len() {
        *store = Arc::new(coeffs);
    }
    Ok(())
}

/// Number of cached coefficients.
pub fn cached_coefficient_count() -> usize {
    coefficient_store().read().expect("poisoned").len()
}

const F64_TERMS: usize = 64;

fn f64_coefficients() -> &'static [f64] {
    static C: OnceLock<Vec<f64>> = OnceLock::new();
    C.get_or_init(|| {
        j_coefficients(F64_TERMS)[..F64_TERMS]
            .iter()
            .map(|c| c.to_f64().expect("finite"))
            .collect()
    })
}

/// `j(z)` in double precision.
pub fn j_eval_c64(z: Complex64) -> Complex64 {
    let (w, _) = fd_reduce(z);
    let q = Complex64::from_polar((-2.0 * PI * w.im).exp(), 2.0 * PI * w.re);
    let mut acc = Complex64::new(0.0, 0.0);
    for &c in f64_coefficients().iter().rev() {
        acc = acc * q + c;
    }
    acc / q
}

/// `log2 j(i y)`; `j(i y)` bounds `sum |c_n q^n|` for every point of height `y`.
pub fn log2_majorant(y: f64) -> f64 {
    if y < 50.0 {
        j_eval_c64(Complex64::new(0.0, y)).re.log2()
    } else {
        // j(iy) = e^{2 pi y} + 744 + O(e^{-2 pi y})
        2.0 * PI * y / std::f64::consts::LN_2 + 1e-9
    }
}

/// A value of `j` with an absolute error bound.
#[derive(Clone, Debug)]
pub struct JValue {
    pub value: MpComplex,
    /// `log2` of the absolute error bound.
    pub log2_error: f64,
    pub bits: usize,
}

/// Number of terms `N` such that the q-expansion tail after `q^N` is below
/// `2^-bits` relative to `1/|q|`, using `c(n) <= exp(4 pi sqrt n) / (sqrt 2 n^{3/4})`.
fn series_length(y: f64, bits: usize) -> usize {
    let log_q = -2.0 * PI * y;
    let target = -(bits as f64) * std::f64::consts::LN_2 - log_q;
    let log_bound = |n: f64| 4.0 * PI * n.sqrt() + n * log_q - 0.75 * n.ln() - 0.5 * 2f64.ln();
    let mut n = 1.0;
    loop {
        // geometric decay with ratio < 1/2 past n, so the tail is at most twice the next term
        let next = log_bound(n + 1.0);
        let ratio = log_bound(n + 2.0) - next;
        if next + 2f64.ln() < target && ratio < -2f64.ln() {
            return n as usize;
        }
        n += 1.0;
    }
}

/// `j(z)` for `z` already in the fundamental domain, by the q-expansion.
fn j_series_reduced(z: &MpComplex, bits: usize) -> JValue {
    let y = mp::to_f64(&z.im);
    let n = series_length(y, bits);
    let wp = bits + 32 + (n as f64).log2().ceil() as usize;
    let coeffs = j_coefficients(n + 2);
    let two_pi = mp::pi(wp).mul(&mp::from_i64(2, wp), wp, RM);
    let (modulus, inv_modulus) = mp::with_consts(|cc| {
        let e = two_pi.mul(&z.im, wp, RM).exp(wp, RM, cc);
        (e.reciprocal(wp, RM), e)
    });
    let phase = two_pi.mul(&z.re, wp, RM);
    let unit = MpComplex::expi(&phase, wp);
    let q = unit.mul_real(&modulus, wp);
    let inv_q = unit.conj().mul_real(&inv_modulus, wp);
    let mut acc = MpComplex::from_bigint(&coeffs[n + 1], wp);
    for c in coeffs[..=n].iter().rev() {
        acc = acc.mul(&q, wp);
        acc.re = acc.re.add(&mp::from_bigint(c), wp, RM);
    }
    let value = acc.mul(&inv_q, wp);
    JValue {
        value,
        log2_error: log2_majorant(y) + 2.0 - bits as f64,
        bits,
    }
}

fn round_bits(bits: usize) -> usize {
    bits.div_ceil(64) * 64
}

/// `j` at an arbitrary-precision point of the upper half plane.
pub fn j_eval_mp(z: &MpComplex, bits: usize) -> JValue {
    let bits = round_bits(bits);
    let (w, _) = fd_reduce_mp(z, bits + 64);
    j_series_reduced(&w, bits)
}

fn cm_cache() -> &'static Mutex<HashMap<(QuadForm, usize), Arc<JValue>>> {
    static CACHE: OnceLock<Mutex<HashMap<(QuadForm, usize), Arc<JValue>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// `j` at a CM point, cached by reduced form and precision.
pub fn j_of_cm(point: &CmPoint, bits: usize) -> Arc<JValue> {
    let bits = round_bits(bits);
    let r = point.reduced();
    let key = (r.form(), bits);
    if let Some(v) = cm_cache().lock().expect("poisoned").get(&key) {
        return v.clone();
    }
    let v = Arc::new(j_series_reduced(&r.z_mp(bits + 64), bits));
    cm_cache()
        .lock()
        .expect("poisoned")
        .entry(key)
        .or_insert(v)
        .clone()
}

/// A point of the upper half plane: exact CM point or a floating-point value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum HPoint {
    Cm(CmPoint),
    Complex(Complex64),
}

impl HPoint {
    pub fn z(&self) -> Complex64 {
        match self {
            HPoint::Cm(p) => p.z(),
            HPoint::Complex(z) => *z,
        }
    }

    pub fn z_mp(&self, bits: usize) -> MpComplex {
        match self {
            HPoint::Cm(p) => p.z_mp(bits),
            HPoint::Complex(z) => MpComplex::from_f64(z.re, z.im, bits),
        }
    }

    fn check(&self) -> Result<()> {
        let z = self.z();
        if z.im > 0.0 && z.re.is_finite() && z.im.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "point {z} is not in the upper half plane"
            )))
        }
    }
}

impl From<CmPoint> for HPoint {
    fn from(p: CmPoint) -> Self {
        HPoint::Cm(p)
    }
}

impl From<Complex64> for HPoint {
    fn from(z: Complex64) -> Self {
        HPoint::Complex(z)
    }
}

/// `j(z)` at the context precision.
pub fn j_eval(z: &HPoint, ctx: &PrecisionContext) -> Result<JValue> {
    z.check()?;
    Ok(match z {
        HPoint::Cm(p) => (*j_of_cm(p, ctx.mantissa_bits)).clone(),
        HPoint::Complex(_) => j_eval_mp(&z.z_mp(ctx.mantissa_bits + 64), ctx.mantissa_bits),
    })
}

/// `j(z)` through the eta quotient; independent of the coefficient cache.
pub fn j_eta_quotient(z: &MpComplex, bits: usize) -> MpComplex {
    let wp = round_bits(bits) + 64;
    let (w, _) = fd_reduce_mp(z, wp);
    let two_pi = mp::pi(wp).mul(&mp::from_i64(2, wp), wp, RM);
    let modulus = mp::with_consts(|cc| two_pi.mul(&w.im, wp, RM).neg().exp(wp, RM, cc));
    let q = MpComplex::expi(&two_pi.mul(&w.re, wp, RM), wp).mul_real(&modulus, wp);
    let q2 = q.mul(&q, wp);
    let log2_q = -2.0 * PI * mp::to_f64(&w.im) / std::f64::consts::LN_2;
    let euler = |x: &MpComplex, log2_x: f64| -> MpComplex {
        // sum over n of (-1)^n x^{n(3n-1)/2}, both signs of n
        let one = MpComplex::one(wp);
        let mut sum = one.clone();
        let x3 = x.mul(x, wp).mul(x, wp);
        let (mut pa, mut pb) = (x.clone(), x.mul(x, wp));
        let mut fa = x3.mul(x, wp);
        let mut n = 1i64;
        loop {
            let term = pa.add(&pb, wp);
            sum = if n % 2 == 1 {
                sum.sub(&term, wp)
            } else {
                sum.add(&term, wp)
            };
            let next_exp = ((n + 1) * (3 * n + 2) / 2) as f64;
            if next_exp * -log2_x > wp as f64 + 8.0 {
                return sum;
            }
            let fb = fa.mul(x, wp);
            pa = pa.mul(&fa, wp);
            pb = pb.mul(&fb, wp);
            fa = fa.mul(&x3, wp);
            n += 1;
        }
    };
    let ratio = euler(&q2, 2.0 * log2_q).div(&euler(&q, log2_q), wp);
    let mut r = ratio.clone();
    for _ in 0..3 {
        r = r.mul(&r, wp);
    }
    let r24 = r.mul(&r, wp).mul(&r, wp);
    let t = q.mul(&r24, wp);
    let s = t
        .mul_real(&mp::from_i64(256, wp), wp)
        .add(&MpComplex::one(wp), wp);
    s.mul(&s, wp).mul(&s, wp).div(&t, wp)
}

/// Real and imaginary parts of `v` as floats, for diagnostics.
pub fn to_pair(v: &MpComplex) -> (f64, f64) {
    (mp::to_f64(&v.re), mp::to_f64(&v.im))
}

/// `BigFloat` absolute value of `x - y`, for tests and diagnostics.
pub fn abs_diff(x: &MpComplex, y: &MpComplex, p: usize) -> BigFloat {
    x.sub(y, p).norm_sqr(p).sqrt(p, RM)
}
