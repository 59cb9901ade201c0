use astro_float::BigFloat;

use super::hecke::{hecke_cosets, Coset};
use super::jfunc::{j_eval, j_eval_mp, HPoint, JValue};
use crate::error::{Error, Result};
use crate::numerics::mp::{self, RM};
use crate::numerics::{MpComplex, PrecisionContext};

/// `phi_m(j(z1), j(z2))` with bookkeeping on each factor.
#[derive(Clone, Debug)]
pub struct ModpolyValue {
    pub value: MpComplex,
    /// `log2 |value|`; `-inf` when a factor vanishes.
    pub log2_abs: f64,
    /// `log2` of the summed relative errors of the factors.
    pub log2_rel_error: f64,
    /// Cosets whose factor is zero, exactly (CM points) or within its error bound.
    pub zero_factors: Vec<Coset>,
    /// `log2 |j(z1) - j(gamma z2)|` per coset, in coset order.
    pub factor_log2: Vec<f64>,
}

impl ModpolyValue {
    pub fn is_zero(&self) -> bool {
        !self.zero_factors.is_empty()
    }

    /// Relative error bound; underflows to zero below `f64` range.
    pub fn rel_error(&self) -> f64 {
        self.log2_rel_error.exp2()
    }
}

/// `gamma z` for an upper triangular coset matrix.
pub fn coset_image(z: &HPoint, coset: &Coset, bits: usize) -> Result<CosetImage> {
    Ok(match z {
        HPoint::Cm(p) => CosetImage::Cm(HPoint::Cm(p.apply_upper(coset.a, coset.b, coset.d)?)),
        HPoint::Complex(_) => {
            let w = z.z_mp(bits + 64);
            let a = mp::from_i64(coset.a, bits + 64);
            let b = MpComplex::from_f64(coset.b as f64, 0.0, bits + 64);
            let d = mp::from_i64(coset.d, bits + 64).reciprocal(bits + 64, RM);
            CosetImage::Mp(w.mul_real(&a, bits + 64).add(&b, bits + 64).mul_real(&d, bits + 64))
        }
    })
}

/// Image of a point under a coset matrix: exact for CM points.
#[derive(Clone, Debug)]
pub enum CosetImage {
    Cm(HPoint),
    Mp(MpComplex),
}

impl CosetImage {
    pub(crate) fn j(&self, ctx: &PrecisionContext) -> Result<JValue> {
        match self {
            CosetImage::Cm(p) => j_eval(p, ctx),
            CosetImage::Mp(w) => Ok(j_eval_mp(w, ctx.mantissa_bits)),
        }
    }
}

/// One factor `j(z1) - j(gamma z2)` with `log2` of its relative error bound;
/// `None` when it vanishes.
pub(crate) fn factor(
    j1: &JValue,
    z1: &HPoint,
    image: &CosetImage,
    ctx: &PrecisionContext,
) -> Result<Option<(MpComplex, f64)>> {
    if let (HPoint::Cm(a), CosetImage::Cm(HPoint::Cm(b))) = (z1, image) {
        if a.reduced() == b.reduced() {
            return Ok(None);
        }
    }
    let j2 = image.j(ctx)?;
    let p = ctx.mantissa_bits + 64;
    let diff = j1.value.sub(&j2.value, p);
    let err = mp::log2_add(j1.log2_error, j2.log2_error);
    let log2 = diff.log2_abs();
    if log2 <= err {
        // inequivalent CM points have distinct j, so this is a precision problem
        if matches!((z1, image), (HPoint::Cm(_), CosetImage::Cm(HPoint::Cm(_)))) {
            return Err(Error::InsufficientPrecision {
                bits: ctx.mantissa_bits,
                residual: err.exp2(),
            });
        }
        return Ok(None);
    }
    Ok(Some((diff, err - log2)))
}

/// `phi_m(j(z1), j(z2)) = prod over cosets of (j(z1) - j(gamma z2))`.
pub fn modpoly_eval(
    m: u64,
    z1: &HPoint,
    z2: &HPoint,
    ctx: &PrecisionContext,
) -> Result<ModpolyValue> {
    let cosets = hecke_cosets(m)?;
    let j1 = j_eval(z1, ctx)?;
    let p = ctx.mantissa_bits + 64;
    let mut value = MpComplex::one(p);
    let mut log2_rel_error = f64::NEG_INFINITY;
    let mut zero_factors = Vec::new();
    let mut factor_log2 = Vec::with_capacity(cosets.len());
    for coset in &cosets.reps {
        let image = coset_image(z2, coset, ctx.mantissa_bits)?;
        match factor(&j1, z1, &image, ctx)? {
            None => {
                zero_factors.push(*coset);
                factor_log2.push(f64::NEG_INFINITY);
            }
            Some((f, rel)) => {
                factor_log2.push(f.log2_abs());
                log2_rel_error = mp::log2_add(log2_rel_error, rel);
                value = value.mul(&f, p);
            }
        }
    }
    if !zero_factors.is_empty() {
        value = MpComplex::new(BigFloat::new(p), BigFloat::new(p));
    }
    let log2_abs = if zero_factors.is_empty() {
        value.log2_abs()
    } else {
        f64::NEG_INFINITY
    };
    Ok(ModpolyValue {
        value,
        log2_abs,
        log2_rel_error,
        zero_factors,
        factor_log2,
    })
}
