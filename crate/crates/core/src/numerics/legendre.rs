//! Legendre polynomials and the Legendre function of the second kind
//! `Q_{s-1}(t)` for `t > 1`.
//!
//! For odd `k` the closed form `P_{k-1}(t)/2 * log((t+1)/(t-1)) - R_{k-1}(t)`
//! cancels catastrophically once `t` grows, so past [`LAURENT_FROM`] the same
//! function is summed from its exact expansion in `1/t`, whose coefficients are
//! those of `P_{k-1}(t) * artanh(1/t)` with the polynomial part (which is
//! `R_{k-1}`) removed.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use super::PrecisionContext;
use crate::error::{Error, Result};

/// `R_n` for `n = 0, 2, 4, 6` as `(numerator, denominator, power)` monomials.
const R_TABLE: [&[(i64, i64, i32)]; 4] = [
    &[],
    &[(3, 2, 1)],
    &[(35, 8, 3), (-55, 24, 1)],
    &[(231, 16, 5), (-119, 8, 3), (231, 80, 1)],
];

/// Below this the closed form is evaluated directly.
pub const LAURENT_FROM: f64 = 1.15;
const LAURENT_TERMS: usize = 240;

pub fn legendre_p(n: usize, t: f64) -> f64 {
    legendre_p_with_derivative(n, t).0
}

/// `(P_n(t), P_n'(t))`; the derivative formula is only used away from `t = ±1`.
fn legendre_p_with_derivative(n: usize, t: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p0, mut p1) = (1.0, t);
    for k in 1..n {
        let k = k as f64;
        let p2 = ((2.0 * k + 1.0) * t * p1 - k * p0) / (k + 1.0);
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (t * p1 - p0) / (t * t - 1.0);
    (p1, d)
}

pub fn legendre_r(n: usize, t: f64) -> Result<f64> {
    let row = r_row(n)?;
    Ok(row
        .iter()
        .map(|&(num, den, pow)| num as f64 / den as f64 * t.powi(pow))
        .sum())
}

fn r_row(n: usize) -> Result<&'static [(i64, i64, i32)]> {
    match n {
        0 | 2 | 4 | 6 => Ok(R_TABLE[n / 2]),
        _ => Err(Error::InvalidArgument(format!(
            "R_n is tabulated for n in {{0, 2, 4, 6}}, got {n}"
        ))),
    }
}

/// Coefficients of `P_n` in the monomial basis, as exact rationals.
fn p_coefficients(n: usize) -> Vec<BigRational> {
    let zero = BigRational::zero();
    let mut p0 = vec![BigRational::from_integer(1.into())];
    let mut p1 = vec![zero.clone(), BigRational::from_integer(1.into())];
    if n == 0 {
        return p0;
    }
    for k in 1..n {
        let mut p2 = vec![zero.clone(); k + 2];
        let a = BigRational::new(BigInt::from(2 * k + 1), BigInt::from(k + 1));
        let b = BigRational::new(BigInt::from(k), BigInt::from(k + 1));
        for (i, c) in p1.iter().enumerate() {
            p2[i + 1] += &a * c;
        }
        for (i, c) in p0.iter().enumerate() {
            p2[i] -= &b * c;
        }
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// Coefficients `a_j` with `Q_n(t) = t^{-(n+1)} * sum_j a_j t^{-2j}`.
fn laurent_coefficients(n: usize) -> Vec<f64> {
    let p = p_coefficients(n);
    let e0 = -(n as i64) - 1;
    (0..LAURENT_TERMS)
        .map(|j| {
            let e = e0 - 2 * j as i64;
            let mut c = BigRational::zero();
            for (i, pi) in p.iter().enumerate() {
                if pi.is_zero() {
                    continue;
                }
                // the t^e coefficient of t^i * t^{-(2l+1)}/(2l+1) needs 2l+1 = i - e
                c += pi / BigRational::from_integer(BigInt::from(i as i64 - e));
            }
            c.to_f64().expect("finite coefficient")
        })
        .collect()
}

fn laurent_table() -> &'static [Vec<f64>; 4] {
    static TABLE: OnceLock<[Vec<f64>; 4]> = OnceLock::new();
    TABLE.get_or_init(|| {
        [
            laurent_coefficients(0),
            laurent_coefficients(2),
            laurent_coefficients(4),
            laurent_coefficients(6),
        ]
    })
}

fn check_k(k: u32) -> Result<usize> {
    match k {
        1 | 3 | 5 | 7 => Ok(k as usize - 1),
        _ => Err(Error::InvalidArgument(format!(
            "k must be one of 1, 3, 5, 7, got {k}"
        ))),
    }
}

fn check_t(t: f64) -> Result<()> {
    if t == 1.0 {
        Err(Error::Singular)
    } else if t > 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("t must exceed 1, got {t}")))
    }
}

/// The closed form, evaluated literally. Loses accuracy for large `t`.
pub(crate) fn q_direct(n: usize, t: f64) -> f64 {
    let log = 0.5 * (2.0 / (t - 1.0)).ln_1p();
    legendre_p(n, t) * log - legendre_r(n, t).expect("tabulated n")
}

fn q_laurent(n: usize, t: f64) -> f64 {
    let coeffs = &laurent_table()[n / 2];
    let u = 1.0 / (t * t);
    let ratio = u / (1.0 - u);
    let mut sum = 0.0;
    let mut pow = 1.0;
    for &a in coeffs {
        let term = a * pow;
        sum += term;
        if term * ratio <= 1e-17 * sum {
            break;
        }
        pow *= u;
    }
    sum * t.powi(-(n as i32) - 1)
}

/// `Q_{k-1}(t)` for `k` in `{1, 3, 5, 7}` and `t > 1`.
pub fn legendre_q_closed(k: u32, t: f64) -> Result<f64> {
    let n = check_k(k)?;
    check_t(t)?;
    if t.is_infinite() {
        return Ok(0.0);
    }
    Ok(if t < LAURENT_FROM {
        q_direct(n, t)
    } else {
        q_laurent(n, t)
    })
}

const GL_ORDER: usize = 16;

fn gauss_legendre() -> &'static [(f64, f64); GL_ORDER] {
    static NODES: OnceLock<[(f64, f64); GL_ORDER]> = OnceLock::new();
    NODES.get_or_init(|| {
        let mut out = [(0.0, 0.0); GL_ORDER];
        let n = GL_ORDER as f64;
        for (i, slot) in out.iter_mut().enumerate() {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = legendre_p_with_derivative(GL_ORDER, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre_p_with_derivative(GL_ORDER, x);
            *slot = (x, 2.0 / ((1.0 - x * x) * dp * dp));
        }
        out
    })
}

fn composite_gl(f: &impl Fn(f64) -> f64, b: f64, panels: usize) -> f64 {
    let h = b / panels as f64;
    let nodes = gauss_legendre();
    let mut total = 0.0;
    for i in 0..panels {
        let mid = (i as f64 + 0.5) * h;
        let s: f64 = nodes
            .iter()
            .map(|&(x, w)| w * f(mid + 0.5 * h * x))
            .sum();
        total += 0.5 * h * s;
    }
    total
}

/// `Q_{s-1}(t)` from its integral representation
/// `int_0^inf (t + sqrt(t^2 - 1) cosh v)^{-s} dv`.
///
/// The range is cut at `V` where the integral of the tail is provably below
/// a tenth of `series_tail_bound`, and panels are halved until two successive
/// composite Gauss-Legendre sums agree to the same budget.
pub fn legendre_q_num(s: f64, t: f64, ctx: &PrecisionContext) -> Result<f64> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::InvalidArgument(format!("s must be positive, got {s}")));
    }
    check_t(t)?;
    let w = (t * t - 1.0).sqrt();
    let budget = ctx.series_tail_bound / 10.0;
    // cosh v >= e^v / 2, so the tail past V is at most (w/2)^{-s} e^{-sV} / s.
    let v_max = (((w / 2.0).ln() * -s - (budget * s).ln()) / s).max(1.0);
    let f = |v: f64| (-s * (t + w * v.cosh()).ln()).exp();
    let mut panels = (v_max / 0.5).ceil() as usize;
    let mut prev = composite_gl(&f, v_max, panels);
    let mut diff = f64::INFINITY;
    for _ in 0..12 {
        panels *= 2;
        let cur = composite_gl(&f, v_max, panels);
        diff = (cur - prev).abs();
        if diff <= budget + 1e-15 * cur.abs() {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::Quadrature {
        target: budget,
        achieved: diff,
    })
}

/// `m_k = 1 / max_{r in [-1, 1]} (-P_{k-1}(r))` for `k` in `{3, 5, 7}`.
pub fn mk_constant(k: u32) -> Result<f64> {
    match k {
        3 => Ok(2.0),
        5 => Ok(7.0 / 3.0),
        7 => Ok((7.0 * 15f64.sqrt() - 3.0) / 10.0),
        _ => Err(Error::InvalidArgument(format!(
            "m_k is defined for k in {{3, 5, 7}}, got {k}"
        ))),
    }
}

/// `m_k` from `samples + 1` equally spaced values of `-P_{k-1}` on `[-1, 1]`.
pub fn mk_constant_sampled(k: u32, samples: usize) -> Result<f64> {
    mk_constant(k)?;
    let n = k as usize - 1;
    let max = (0..=samples)
        .map(|i| -legendre_p(n, -1.0 + 2.0 * i as f64 / samples as f64))
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(1.0 / max)
}
