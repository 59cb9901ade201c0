//! Galois orbits of pairs of CM points and the exact norm of `phi_m` over them.
//!
//! For a big cycle (`d1 d2` not a square) the orbit is `Cl(d1) x Cl(d2)`, each
//! pair counted four times. The product `P` of `phi_m` over one copy of the
//! orbit is a rational integer and the norm is `|P|^4`. For a small cycle the
//! product over the `Cl(d')` branch lies in the ring of integers of the common
//! imaginary quadratic field, the conjugate branch contributes its complex
//! conjugate, and the norm is `|P|^2`.

use std::collections::BTreeMap;

use astro_float::BigFloat;
use num_bigint::BigInt;
use num_integer::{Integer, Roots};
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::modular::hecke::{hecke_cosets, HeckeCosetSet};
use crate::modular::jfunc::{j_of_cm, HPoint};
use crate::modular::modpoly::{coset_image, factor, modpoly_eval, CosetImage};
use crate::numerics::mp::{self, RM};
use crate::numerics::{integer_recognize, MpComplex, PrecisionContext};
use crate::quadforms::{compose, enumerate_reduced, project_class, CmPoint, Discriminant, QuadForm};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CycleKind {
    /// `d1 d2` not a square, coprime discriminants: the product is the norm.
    Big,
    /// `d1 d2` a square.
    Small,
    /// `d1 d2` not a square but `gcd(d1, d2) > 1`; the product over
    /// `Cl(d1) x Cl(d2)` is computed but not claimed to be the norm.
    Diagnostic,
}

impl std::fmt::Display for CycleKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CycleKind::Big => "big",
            CycleKind::Small => "small",
            CycleKind::Diagnostic => "diagnostic",
        })
    }
}

impl CycleKind {
    pub fn is_exact(&self) -> bool {
        !matches!(self, CycleKind::Diagnostic)
    }
}

/// Whether `(d1, d2)` gives a big or a small cycle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CycleCase {
    Big,
    Small,
}

/// A pair of fd-reduced CM points with its multiplicity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct CyclePair {
    pub z1: CmPoint,
    pub z2: CmPoint,
    pub multiplicity: u32,
}

impl CyclePair {
    pub fn key(&self) -> (QuadForm, QuadForm) {
        (self.z1.form(), self.z2.form())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CmCycle {
    pub kind: CycleKind,
    pub d1: Discriminant,
    pub d2: Discriminant,
    /// `d'` for small cycles.
    pub d_prime: Option<Discriminant>,
    /// The cycle as a multiset, sorted by pair key.
    pub pairs: Vec<CyclePair>,
    /// `|Z(W)|` counted with multiplicity.
    pub group_order: u64,
    /// Sub-multiset whose product `P` of `phi_m` satisfies `N = |P|^root_exponent`.
    root: Vec<CyclePair>,
    root_exponent: u32,
}

impl CmCycle {
    pub fn root_pairs(&self) -> &[CyclePair] {
        &self.root
    }

    pub fn root_exponent(&self) -> u32 {
        self.root_exponent
    }

    /// Total multiplicity, equal to `group_order`.
    pub fn size(&self) -> u64 {
        self.pairs.iter().map(|p| p.multiplicity as u64).sum()
    }
}

fn is_square(n: i128) -> bool {
    n >= 0 && {
        let r = (n as u128).sqrt();
        r * r == n as u128
    }
}

pub fn cycle_case(d1: Discriminant, d2: Discriminant) -> CycleCase {
    if is_square(d1.value() as i128 * d2.value() as i128) {
        CycleCase::Small
    } else {
        CycleCase::Big
    }
}

fn reduced_point(f: &QuadForm) -> CmPoint {
    CmPoint::new(*f).expect("class representatives are primitive").reduced()
}

fn merge(pairs: impl IntoIterator<Item = (CmPoint, CmPoint)>) -> Vec<CyclePair> {
    let mut counts: BTreeMap<(CmPoint, CmPoint), u32> = BTreeMap::new();
    for (a, b) in pairs {
        *counts.entry((a.reduced(), b.reduced())).or_default() += 1;
    }
    counts
        .into_iter()
        .map(|((z1, z2), multiplicity)| CyclePair { z1, z2, multiplicity })
        .collect()
}

/// The `Cl(d1) x Cl(d2)` orbit, each pair with multiplicity 4.
pub fn big_cm_cycle(d1: Discriminant, d2: Discriminant) -> Result<CmCycle> {
    if cycle_case(d1, d2) == CycleCase::Small {
        return Err(Error::InvalidArgument(format!(
            "big cycle needs d1 d2 not a square, got ({}, {})",
            d1.value(),
            d2.value()
        )));
    }
    let kind = if d1.value().gcd(&d2.value()) == 1 {
        CycleKind::Big
    } else {
        CycleKind::Diagnostic
    };
    let (g1, g2) = (enumerate_reduced(d1), enumerate_reduced(d2));
    let root = merge(
        g1.forms()
            .iter()
            .flat_map(|a| g2.forms().iter().map(move |b| (reduced_point(a), reduced_point(b)))),
    );
    let pairs = root
        .iter()
        .map(|p| CyclePair {
            multiplicity: 4 * p.multiplicity,
            ..*p
        })
        .collect();
    Ok(CmCycle {
        kind,
        d1,
        d2,
        d_prime: None,
        pairs,
        group_order: 4 * (g1.order() * g2.order()) as u64,
        root,
        root_exponent: 4,
    })
}

/// `lcm(f1, f2)^2 d_K` for discriminants with the same fundamental part.
pub fn small_d_prime(d1: Discriminant, d2: Discriminant) -> Result<Discriminant> {
    if d1.fundamental() != d2.fundamental() {
        return Err(Error::InvalidArgument(format!(
            "small cycle needs a common field, got ({}, {})",
            d1.value(),
            d2.value()
        )));
    }
    let f = d1.conductor().lcm(&d2.conductor());
    let v = f
        .checked_mul(f)
        .and_then(|x| x.checked_mul(d1.fundamental()))
        .ok_or(Error::Overflow("d'"))?;
    Discriminant::new(v)
}

/// The small cycle through the principal points of `d1` and `d2`.
pub fn small_cm_cycle(d1: Discriminant, d2: Discriminant) -> Result<CmCycle> {
    let z1 = CmPoint::new(QuadForm::identity(d1))?;
    let z2 = CmPoint::new(QuadForm::identity(d2))?;
    small_cm_cycle_at(z1, z2)
}

/// `sum over sigma in Cl(d')` of `(z1, z2)^sigma + (-conj z1, -conj z2)^sigma`.
pub fn small_cm_cycle_at(z1: CmPoint, z2: CmPoint) -> Result<CmCycle> {
    let (d1, d2) = (z1.discriminant(), z2.discriminant());
    if cycle_case(d1, d2) != CycleCase::Small {
        return Err(Error::InvalidArgument(format!(
            "small cycle needs d1 d2 a square, got ({}, {})",
            d1.value(),
            d2.value()
        )));
    }
    let dp = small_d_prime(d1, d2)?;
    let group = enumerate_reduced(dp);
    let act = |z: CmPoint, sigma: &QuadForm| -> Result<CmPoint> {
        let s = project_class(sigma, z.discriminant())?;
        Ok(reduced_point(&compose(&z.form(), &s)?))
    };
    let mut branch = Vec::with_capacity(group.order());
    let mut mirror = Vec::with_capacity(group.order());
    for sigma in group.forms() {
        branch.push((act(z1, sigma)?, act(z2, sigma)?));
        mirror.push((act(z1.neg_conj(), sigma)?, act(z2.neg_conj(), sigma)?));
    }
    let root = merge(branch.iter().copied());
    let pairs = merge(branch.into_iter().chain(mirror));
    Ok(CmCycle {
        kind: CycleKind::Small,
        d1,
        d2,
        d_prime: Some(dp),
        pairs,
        group_order: 2 * group.order() as u64,
        root,
        root_exponent: 2,
    })
}

/// The big or small cycle of `(d1, d2)` according to [`cycle_case`].
pub fn cm_cycle(d1: Discriminant, d2: Discriminant) -> Result<CmCycle> {
    match cycle_case(d1, d2) {
        CycleCase::Big => big_cm_cycle(d1, d2),
        CycleCase::Small => small_cm_cycle(d1, d2),
    }
}

/// `log |Nm|` as a sum of `log |phi_m|` over the cycle, with an error bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LogNorm {
    /// Natural logarithm.
    pub value: f64,
    pub error: f64,
}

fn singular(pair: &CyclePair, coset: &crate::modular::Coset) -> Error {
    Error::CycleSingular {
        z1: pair.z1.form(),
        z2: pair.z2.form(),
        coset: (coset.a, coset.b, coset.d),
    }
}

/// `sum over pairs (with multiplicity) of log |phi_m(j(z1), j(z2))|`.
pub fn cycle_log_norm(cycle: &CmCycle, m: u64, ctx: &PrecisionContext) -> Result<LogNorm> {
    hecke_cosets(m)?;
    let terms: Vec<Result<(f64, f64)>> = cycle
        .pairs
        .par_iter()
        .map(|pair| {
            let v = modpoly_eval(m, &HPoint::Cm(pair.z1), &HPoint::Cm(pair.z2), ctx)?;
            if let Some(c) = v.zero_factors.first() {
                return Err(singular(pair, c));
            }
            let k = pair.multiplicity as f64;
            Ok((k * v.log2_abs * std::f64::consts::LN_2, k * v.rel_error()))
        })
        .collect();
    let mut value = 0.0;
    let mut error = 0.0;
    for t in terms {
        let (v, e) = t?;
        value += v;
        error += e;
    }
    Ok(LogNorm { value, error })
}

/// Upper bound on `log2 |j|` at a point of the fundamental domain of height `y`.
fn log2_j_bound(y: f64) -> f64 {
    // |j(z) - 1/q| <= 2079 on the fundamental domain
    let e = 2.0 * std::f64::consts::PI * y;
    (e + (1.0 + 2079.0 * (-e).exp()).ln()) / std::f64::consts::LN_2
}

fn height(p: &CmPoint) -> f64 {
    let f = p.reduced().form();
    (-(f.discriminant() as f64)).sqrt() / (2.0 * f.a as f64)
}

/// Bits that resolve the root product `P` to below one unit: an upper bound on
/// `log2 |P|` from `|j1 - j2| <= |j1| + |j2|`, plus guard bits.
pub fn cycle_precision_estimate(cycle: &CmCycle, m: u64) -> Result<usize> {
    let cosets = hecke_cosets(m)?;
    let mut total = 0.0;
    let mut count = 0usize;
    for pair in &cycle.root {
        let a = log2_j_bound(height(&pair.z1));
        for c in &cosets.reps {
            let b = log2_j_bound(height(&pair.z2.apply_upper(c.a, c.b, c.d)?));
            let hi = a.max(b);
            total += pair.multiplicity as f64 * (hi + 1.0);
            count += pair.multiplicity as usize;
        }
    }
    Ok(total.max(0.0).ceil() as usize + 64 + (count.max(1) as f64).log2().ceil() as usize)
}

/// The root `P` recognized exactly.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "field", rename_all = "lowercase")]
pub enum CycleRoot {
    /// `P` is a rational integer.
    Rational {
        #[serde(serialize_with = "ser_bigint")]
        value: BigInt,
    },
    /// `P = (u + v sqrt(d_k)) / 2` in the ring of integers of `Q(sqrt d_k)`.
    Quadratic {
        #[serde(serialize_with = "ser_bigint")]
        u: BigInt,
        #[serde(serialize_with = "ser_bigint")]
        v: BigInt,
        d_k: i64,
    },
}

fn ser_bigint<S: serde::Serializer>(v: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

/// Exact norm of `phi_m` over a cycle.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CycleNorm {
    /// `|N|`; the sign is not certified.
    #[serde(serialize_with = "ser_bigint")]
    pub norm: BigInt,
    pub root: CycleRoot,
    pub root_exponent: u32,
    /// Precision at which the root was recognized.
    pub bits: usize,
    /// Largest distance to the recognized integers.
    pub residual: f64,
}

impl CycleNorm {
    pub fn ln(&self) -> f64 {
        ln_bigint(&self.norm)
    }
}

/// Natural logarithm of a positive integer of any size.
pub fn ln_bigint(n: &BigInt) -> f64 {
    let bits = n.bits();
    if bits < 1000 {
        let f: f64 = n.to_string().parse().unwrap_or(f64::INFINITY);
        if f.is_finite() {
            return f.ln();
        }
    }
    let shift = bits.saturating_sub(64);
    let top: f64 = (n >> shift).to_string().parse().expect("64-bit head");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// `P` at the precision of `ctx`, with its absolute error bound.
fn root_product(cycle: &CmCycle, cosets: &HeckeCosetSet, ctx: &PrecisionContext) -> Result<(MpComplex, f64)> {
    let bits = ctx.mantissa_bits;
    let p = bits + 64;
    // relative errors are carried as log2 since they fall below the f64 range
    let per_pair: Vec<Result<(MpComplex, f64)>> = cycle
        .root
        .par_iter()
        .map(|pair| {
            let z1 = HPoint::Cm(pair.z1);
            let z2 = HPoint::Cm(pair.z2);
            let j1 = j_of_cm(&pair.z1, bits);
            let mut acc = MpComplex::one(p);
            let mut rel = f64::NEG_INFINITY;
            for c in &cosets.reps {
                let image: CosetImage = coset_image(&z2, c, bits)?;
                match factor(&j1, &z1, &image, ctx)? {
                    None => return Err(singular(pair, c)),
                    Some((f, r)) => {
                        acc = acc.mul(&f, p);
                        rel = mp::log2_add(rel, r);
                    }
                }
            }
            let mut out = MpComplex::one(p);
            for _ in 0..pair.multiplicity {
                out = out.mul(&acc, p);
            }
            Ok((out, rel + (pair.multiplicity as f64).log2()))
        })
        .collect();
    let mut value = MpComplex::one(p);
    let mut rel = f64::NEG_INFINITY;
    for r in per_pair {
        let (v, e) = r?;
        value = value.mul(&v, p);
        rel = mp::log2_add(rel, e);
    }
    // rounding in the products themselves
    let ops = (cycle.root.len() * (cosets.len() + 2)) as f64;
    rel = mp::log2_add(rel, ops.log2() - bits as f64);
    let abs = (rel + value.log2_abs()).exp2();
    Ok((value, abs))
}

fn recognize_within(x: &BigFloat, abs_err: f64, ctx: &PrecisionContext) -> Result<(BigInt, f64)> {
    if !(abs_err < 0.25) {
        return Err(Error::InsufficientPrecision {
            bits: ctx.mantissa_bits,
            residual: abs_err,
        });
    }
    let r = integer_recognize(x, ctx)?;
    Ok((r.value, r.residual))
}

fn norm_attempt(cycle: &CmCycle, cosets: &HeckeCosetSet, ctx: &PrecisionContext) -> Result<CycleNorm> {
    let bits = ctx.mantissa_bits;
    let p = bits + 64;
    let (value, abs) = root_product(cycle, cosets, ctx)?;
    let (root, residual) = match cycle.kind {
        CycleKind::Big | CycleKind::Diagnostic => {
            let (n, res) = recognize_within(&value.re, abs, ctx)?;
            let imag = mp::to_f64(&value.im).abs();
            if imag > abs + ctx.integer_tolerance {
                return Err(Error::InsufficientPrecision { bits, residual: imag });
            }
            (CycleRoot::Rational { value: n }, res.max(imag))
        }
        CycleKind::Small => {
            let d_k = cycle.d1.fundamental();
            let two = mp::from_i64(2, p);
            let u = value.re.mul(&two, p, RM);
            let sq = mp::from_i64(-d_k, p).sqrt(p, RM);
            let v = value.im.mul(&two, p, RM).div(&sq, p, RM);
            let (u, ru) = recognize_within(&u, 2.0 * abs, ctx)?;
            let (v, rv) = recognize_within(&v, 2.0 * abs, ctx)?;
            if (&u - &v * d_k).is_odd() {
                return Err(Error::InsufficientPrecision {
                    bits,
                    residual: 0.5,
                });
            }
            (CycleRoot::Quadratic { u, v, d_k }, ru.max(rv))
        }
    };
    let norm = match &root {
        CycleRoot::Rational { value } => value.abs().pow(cycle.root_exponent),
        CycleRoot::Quadratic { u, v, d_k } => {
            // |P|^2 = (u^2 - d_k v^2) / 4
            let n2: BigInt = (u * u - v * v * *d_k) / 4;
            n2.pow(cycle.root_exponent / 2)
        }
    };
    Ok(CycleNorm {
        norm,
        root,
        root_exponent: cycle.root_exponent,
        bits,
        residual,
    })
}

/// `|Nm_{H/Q} phi_m(j(z1), j(z2))|` as an exact integer (for diagnostic cycles,
/// the full `Cl(d1) x Cl(d2)` product).
///
/// Starts at the larger of the context precision and
/// [`cycle_precision_estimate`], doubling on failure.
pub fn cycle_norm_integer(cycle: &CmCycle, m: u64, ctx: &PrecisionContext) -> Result<CycleNorm> {
    let cosets = hecke_cosets(m)?;
    let est = cycle_precision_estimate(cycle, m)?;
    let start = ctx.with_bits(ctx.mantissa_bits.max(est));
    start.retry(|c| norm_attempt(cycle, &cosets, c))
}

impl CycleNorm {
    pub fn is_unit(&self) -> bool {
        self.norm == BigInt::from(1)
    }

    pub fn is_zero(&self) -> bool {
        self.norm.is_zero()
    }
}
