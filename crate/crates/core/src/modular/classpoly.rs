use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::jfunc::j_of_cm;
use crate::error::{Error, Result};
use crate::numerics::mp;
use crate::numerics::{integer_recognize, MpComplex, PrecisionContext};
use crate::quadforms::{enumerate_reduced, CmPoint, Discriminant};

/// The ring class polynomial `H_d`, monic with integer coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassPolynomial {
    pub d: Discriminant,
    /// Coefficients from the constant term up; the last one is 1.
    pub coeffs: Vec<BigInt>,
    /// Largest `|x - round(x)| / max(1, |round(x)|)` over the coefficients.
    pub max_rel_residual: f64,
    /// Precision of the successful attempt.
    pub bits: usize,
}

impl ClassPolynomial {
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }
}

impl fmt::Display for ClassPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let mono = match k {
                0 => String::new(),
                1 => "X".to_string(),
                _ => format!("X^{k}"),
            };
            if k == 0 {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{mono}")?;
            } else {
                write!(f, "{mag}*{mono}")?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// Bits needed to resolve every coefficient of `H_d`: the largest one is
/// at most `prod (|j_i| + 1)` with `|j_i| < exp(pi sqrt|d| / a_i) + 2079`.
pub fn classpoly_precision_estimate(d: Discriminant) -> usize {
    let sq = (-(d.value() as f64)).sqrt();
    let log2_max: f64 = enumerate_reduced(d)
        .forms()
        .iter()
        .map(|f| (std::f64::consts::PI * sq / f.a as f64).exp().ln_1p().max(12.0) / std::f64::consts::LN_2)
        .sum();
    log2_max.ceil() as usize + 64
}

fn poly_mul(a: &[MpComplex], b: &[MpComplex], p: usize) -> Vec<MpComplex> {
    let mut out = vec![MpComplex::zero(p); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] = out[i + j].add(&x.mul(y, p), p);
        }
    }
    out
}

fn product_tree(mut polys: Vec<Vec<MpComplex>>, p: usize) -> Vec<MpComplex> {
    while polys.len() > 1 {
        polys = polys
            .chunks(2)
            .map(|pair| match pair {
                [a, b] => poly_mul(a, b, p),
                [a] => a.clone(),
                _ => unreachable!(),
            })
            .collect();
    }
    polys.pop().unwrap_or_else(|| vec![MpComplex::one(p)])
}

fn attempt(d: Discriminant, ctx: &PrecisionContext) -> Result<ClassPolynomial> {
    let bits = ctx.mantissa_bits;
    let p = bits + 64;
    let linear: Vec<Vec<MpComplex>> = enumerate_reduced(d)
        .forms()
        .iter()
        .map(|f| {
            let j = j_of_cm(&CmPoint::new(*f).expect("reduced primitive form"), bits);
            vec![j.value.neg(), MpComplex::one(p)]
        })
        .collect();
    let expanded = product_tree(linear, p);
    let mut coeffs = Vec::with_capacity(expanded.len());
    let mut worst: f64 = 0.0;
    for c in &expanded {
        let r = integer_recognize(&c.re, ctx)?;
        let scale = mp::to_f64(&mp::from_bigint(&r.value)).abs().max(1.0);
        let imag = mp::to_f64(&c.im).abs();
        let tol = ctx.integer_tolerance * scale.sqrt();
        if imag >= tol {
            return Err(Error::InsufficientPrecision {
                bits,
                residual: imag,
            });
        }
        worst = worst.max(r.residual.max(imag) / scale);
        coeffs.push(r.value);
    }
    Ok(ClassPolynomial {
        d,
        coeffs,
        max_rel_residual: worst,
        bits,
    })
}

/// `prod over reduced forms of (X - j(z_form))`, coefficients snapped to integers.
pub fn classpoly(d: Discriminant, ctx: &PrecisionContext) -> Result<ClassPolynomial> {
    let start = ctx.with_bits(ctx.mantissa_bits.max(classpoly_precision_estimate(d)));
    start.retry(|c| attempt(d, c))
}
