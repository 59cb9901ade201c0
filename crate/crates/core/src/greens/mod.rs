//! Higher Green's functions on `Y(1)^2` and the distance to Hecke graphs.
//!
//! `G_s(z1, z2)` is summed over the orbit of `z2` up to a cutoff `T` on
//! `cosh d`; the rest is bounded using a count `N(t) <= A t + B Y sqrt(t)` of
//! orbit points with `cosh d <= t` (see `docs/lattice_tail.md`) and the fact
//! that `t^s Q_{s-1}(t)` is nonincreasing.

mod graph;

use num_complex::Complex64;
use num_rational::Ratio;
use rayon::prelude::*;
use serde::Serialize;

use crate::cmcycles::CmCycle;
use crate::error::{Error, Result};
use crate::modular::domain::{cosh_distance, fd_reduce, for_each_orbit_element, Mat2};
use crate::modular::hecke::{hecke_cosets, Coset};
use crate::modular::jfunc::{j_eval, HPoint};
use crate::modular::modpoly::{coset_image, CosetImage};
use crate::numerics::mp;
use crate::numerics::{legendre_q_closed, legendre_q_num, PrecisionContext};

pub use graph::{graph_distance, midpoint_objective, tm_count, GraphProximity};

/// Doubled calibrated constants of the orbit count bound `N(t) <= A t + B Y sqrt(t)`.
pub const COUNT_LINEAR: f64 = 13.0;
pub const COUNT_SQRT: f64 = 4.0 * std::f64::consts::SQRT_2;

/// Largest cosh-cutoff a lattice sum may use.
pub const MAX_CUTOFF: f64 = 4_194_304.0;

/// `cosh d` below which two points count as coincident.
const COINCIDENT: f64 = 1e-12;

/// `Q_{s-1}` for a fixed `s`.
#[derive(Clone, Debug)]
pub struct LegendreKernel {
    s: f64,
    odd: Option<u32>,
    /// `sqrt(pi) Gamma(s) / (Gamma(s + 1/2) 2^s)`.
    prefactor: f64,
    ctx: PrecisionContext,
}

impl LegendreKernel {
    pub fn new(s: f64, ctx: &PrecisionContext) -> Result<Self> {
        if !(s >= 1.0 && s.is_finite()) {
            return Err(Error::InvalidArgument(format!("s must be at least 1, got {s}")));
        }
        let odd = [1u32, 3, 5, 7].into_iter().find(|&k| k as f64 == s);
        let prefactor = std::f64::consts::PI.sqrt() * libm::tgamma(s)
            / (libm::tgamma(s + 0.5) * s.exp2());
        Ok(LegendreKernel {
            s,
            odd,
            prefactor,
            ctx: ctx.clone(),
        })
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    /// `Q_{s-1}(t)` for `t > 1`.
    pub fn q(&self, t: f64) -> Result<f64> {
        if let Some(k) = self.odd {
            return legendre_q_closed(k, t);
        }
        if t >= 1.5 {
            Ok(self.hypergeometric(t))
        } else {
            legendre_q_num(self.s, t, &self.ctx)
        }
    }

    /// `Q_{s-1}(t) = c_s t^{-s} 2F1(s/2, (s+1)/2; s+1/2; 1/t^2)`.
    fn hypergeometric(&self, t: f64) -> f64 {
        let s = self.s;
        let x = 1.0 / (t * t);
        let (a, b, c) = (s / 2.0, (s + 1.0) / 2.0, s + 0.5);
        let mut term = 1.0;
        let mut sum = 1.0;
        for n in 0..2000 {
            let n = n as f64;
            term *= (a + n) * (b + n) / ((c + n) * (n + 1.0)) * x;
            sum += term;
            if term <= 1e-17 * sum * (1.0 - x) {
                break;
            }
        }
        self.prefactor * t.powf(-s) * sum
    }

    /// Bound on `sum 2 Q_{s-1}(t)` over orbit points with `t > cutoff`.
    pub fn tail_bound(&self, cutoff: f64, height: f64) -> Result<f64> {
        let s = self.s;
        if s <= 1.0 {
            return Ok(f64::INFINITY);
        }
        let q = self.q(cutoff)?;
        Ok(2.0
            * q
            * (COUNT_LINEAR * cutoff * s / (s - 1.0)
                + COUNT_SQRT * height * cutoff.sqrt() * 2.0 * s / (2.0 * s - 1.0)))
    }

    /// Smallest power-of-two cutoff whose tail bound is within `budget`.
    pub fn cutoff_for(&self, budget: f64, height: f64) -> Result<f64> {
        let mut t = 4.0;
        loop {
            let tail = self.tail_bound(t, height)?;
            if tail <= budget {
                return Ok(t);
            }
            if t >= MAX_CUTOFF {
                return Err(Error::TailBudget {
                    budget,
                    tail,
                    cutoff: t,
                });
            }
            t *= 2.0;
        }
    }
}

/// `g_s(z1, z2) = -2 Q_{s-1}(cosh d(z1, z2))`.
pub fn g_s(s: f64, z1: Complex64, z2: Complex64, ctx: &PrecisionContext) -> Result<f64> {
    let t = cosh_distance(z1, z2);
    if t - 1.0 <= COINCIDENT {
        return Err(Error::Singular);
    }
    Ok(-2.0 * LegendreKernel::new(s, ctx)?.q(t)?)
}

/// A truncated orbit sum with its tail bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LatticeSum {
    pub value: f64,
    /// Bound on the omitted terms plus floating-point rounding.
    pub error: f64,
    pub tail_bound: f64,
    pub cutoff: f64,
    pub terms: usize,
}

/// Sums `-2 Q_{s-1}(cosh d(z1, gamma z2))` over the orbit for several kernels at
/// once, each to within `budget` of its full value.
pub fn lattice_sums(
    kernels: &[LegendreKernel],
    z1: Complex64,
    z2: Complex64,
    budget: f64,
) -> Result<Vec<LatticeSum>> {
    let (a, _) = fd_reduce(z1);
    let (b, _) = fd_reduce(z2);
    let height = a.im.max(b.im);
    let mut cutoff: f64 = 4.0;
    for k in kernels {
        cutoff = cutoff.max(k.cutoff_for(budget, height)?);
    }
    let mut sums = vec![0.0; kernels.len()];
    let mut abs = vec![0.0; kernels.len()];
    let mut terms = 0usize;
    let mut failure = None;
    for_each_orbit_element(a, b, cutoff, |_, _, t| {
        if failure.is_some() {
            return;
        }
        if t - 1.0 <= COINCIDENT {
            failure = Some(Error::Singular);
            return;
        }
        terms += 1;
        for (i, k) in kernels.iter().enumerate() {
            match k.q(t) {
                Ok(q) => {
                    sums[i] -= 2.0 * q;
                    abs[i] += 2.0 * q;
                }
                Err(e) => failure = Some(e),
            }
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    kernels
        .iter()
        .enumerate()
        .map(|(i, k)| {
            let tail = k.tail_bound(cutoff, height)?;
            Ok(LatticeSum {
                value: sums[i],
                error: tail + 1e-15 * (terms as f64 + 10.0) * abs[i],
                tail_bound: tail,
                cutoff,
                terms,
            })
        })
        .collect()
}

/// `G_s(z1, z2) = sum over gamma of g_s(z1, gamma z2)` for `s > 1`, to within
/// `ctx.lattice_tail_bound`.
pub fn g_s_sum(s: f64, z1: Complex64, z2: Complex64, ctx: &PrecisionContext) -> Result<LatticeSum> {
    if s <= 1.0 {
        return Err(Error::InvalidArgument(format!(
            "the orbit sum needs s > 1, got {s}"
        )));
    }
    let k = LegendreKernel::new(s, ctx)?;
    Ok(lattice_sums(&[k], z1, z2, ctx.lattice_tail_bound)?[0])
}

/// The elements `gamma` with `cosh d(z1, gamma z2) <= cutoff`.
pub fn orbit_elements(z1: Complex64, z2: Complex64, cutoff: f64) -> Vec<Mat2> {
    let mut out = Vec::new();
    for_each_orbit_element(z1, z2, cutoff, |g, _, _| out.push(g));
    out
}

/// `sum over a fixed set of gamma of g_s(z, gamma z2)`.
pub fn g_s_over(kernel: &LegendreKernel, z: Complex64, z2: Complex64, elements: &[Mat2]) -> Result<f64> {
    let mut sum = 0.0;
    for g in elements {
        let t = cosh_distance(z, g.apply(z2));
        if t - 1.0 <= COINCIDENT {
            return Err(Error::Singular);
        }
        sum -= 2.0 * kernel.q(t)?;
    }
    Ok(sum)
}

/// Five-point finite-difference hyperbolic Laplacian `-y^2 (f_xx + f_yy)` in
/// `z1` of the orbit sum over the elements within `cutoff` of `z1`.
///
/// Every summand is an eigenfunction, so the residual against `s(1-s)` times
/// the same sum measures the discretization alone. Returns
/// `(laplacian, value)`.
pub fn fd_laplacian(
    s: f64,
    z1: Complex64,
    z2: Complex64,
    h: f64,
    cutoff: f64,
    ctx: &PrecisionContext,
) -> Result<(f64, f64)> {
    let kernel = LegendreKernel::new(s, ctx)?;
    let elements = orbit_elements(z1, z2, cutoff);
    let f = |z: Complex64| g_s_over(&kernel, z, z2, &elements);
    let c = f(z1)?;
    let xp = f(z1 + Complex64::new(h, 0.0))?;
    let xm = f(z1 - Complex64::new(h, 0.0))?;
    let yp = f(z1 + Complex64::new(0.0, h))?;
    let ym = f(z1 - Complex64::new(0.0, h))?;
    let lap = -z1.im * z1.im * (xp + xm + yp + ym - 4.0 * c) / (h * h);
    Ok((lap, c))
}

/// `G_1(z1, z2) = 2 log |j(z1) - j(z2)|`.
pub fn g_1(z1: &HPoint, z2: &HPoint, ctx: &PrecisionContext) -> Result<f64> {
    if let (HPoint::Cm(a), HPoint::Cm(b)) = (z1, z2) {
        if a.reduced() == b.reduced() {
            return Err(Error::Singular);
        }
    }
    let (j1, j2) = (j_eval(z1, ctx)?, j_eval(z2, ctx)?);
    let diff = j1.value.sub(&j2.value, ctx.mantissa_bits + 64);
    let log2 = diff.log2_abs();
    if log2 <= mp::log2_add(j1.log2_error, j2.log2_error) {
        return Err(Error::Singular);
    }
    Ok(2.0 * log2 * std::f64::consts::LN_2)
}

/// One coset's contribution to `G_k^m`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CosetTerm {
    pub coset: Coset,
    pub value: f64,
    pub error: f64,
}

/// A Green's function value with an error bound and its per-coset terms.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GreenValue {
    pub value: f64,
    pub error: f64,
    pub terms: Vec<CosetTerm>,
}

fn check_k(k: u32) -> Result<()> {
    if matches!(k, 1 | 3 | 5 | 7) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "k must be one of 1, 3, 5, 7, got {k}"
        )))
    }
}

fn coset_key(c: &Coset) -> (i64, i64, i64) {
    (c.a, c.b, c.d)
}

/// `sum over cosets of 2 log |j(z1) - j(gamma z2)|`, one logarithm per coset.
fn g_1_m(m: u64, z1: &HPoint, z2: &HPoint, ctx: &PrecisionContext) -> Result<GreenValue> {
    let cosets = hecke_cosets(m)?;
    let j1 = j_eval(z1, ctx)?;
    let p = ctx.mantissa_bits + 64;
    let mut terms = Vec::with_capacity(cosets.len());
    for c in &cosets.reps {
        let image = coset_image(z2, c, ctx.mantissa_bits)?;
        if let (HPoint::Cm(a), CosetImage::Cm(HPoint::Cm(b))) = (z1, &image) {
            if a.reduced() == b.reduced() {
                return Err(Error::OnHeckeGraph { coset: coset_key(c) });
            }
        }
        let j2 = image.j(ctx)?;
        let diff = j1.value.sub(&j2.value, p);
        let log2 = diff.log2_abs();
        let err = mp::log2_add(j1.log2_error, j2.log2_error);
        if log2 <= err {
            return Err(Error::OnHeckeGraph { coset: coset_key(c) });
        }
        terms.push(CosetTerm {
            coset: *c,
            value: 2.0 * log2 * std::f64::consts::LN_2,
            // |d log|x|| <= relative error, plus rounding of the log itself
            error: 2.0 * (err - log2).exp2() + 1e-15 * log2.abs(),
        });
    }
    Ok(collect(terms))
}

fn collect(terms: Vec<CosetTerm>) -> GreenValue {
    GreenValue {
        value: terms.iter().map(|t| t.value).sum(),
        error: terms.iter().map(|t| t.error).sum(),
        terms,
    }
}

/// `G_k^m` for several `k` in `{3, 5, 7}` at once, sharing the orbit enumeration.
fn g_k_m_many(
    ks: &[u32],
    m: u64,
    z1: &HPoint,
    z2: &HPoint,
    ctx: &PrecisionContext,
) -> Result<Vec<GreenValue>> {
    let cosets = hecke_cosets(m)?;
    let kernels = ks
        .iter()
        .map(|&k| LegendreKernel::new(k as f64, ctx))
        .collect::<Result<Vec<_>>>()?;
    let w1 = z1.z();
    let mut per_k: Vec<Vec<CosetTerm>> = vec![Vec::with_capacity(cosets.len()); ks.len()];
    for c in &cosets.reps {
        let w2 = match z2 {
            HPoint::Cm(p) => {
                let img = p.apply_upper(c.a, c.b, c.d)?;
                if let HPoint::Cm(a) = z1 {
                    if a.reduced() == img.reduced() {
                        return Err(Error::OnHeckeGraph { coset: coset_key(c) });
                    }
                }
                img.z()
            }
            HPoint::Complex(w) => c.apply(*w),
        };
        let sums = lattice_sums(&kernels, w1, w2, ctx.lattice_tail_bound).map_err(|e| match e {
            Error::Singular => Error::OnHeckeGraph { coset: coset_key(c) },
            e => e,
        })?;
        for (i, s) in sums.iter().enumerate() {
            per_k[i].push(CosetTerm {
                coset: *c,
                value: s.value,
                error: s.error,
            });
        }
    }
    Ok(per_k.into_iter().map(collect).collect())
}

/// `G_k^m(z1, z2) = sum over gamma in Gamma \ Gamma_m of G_k(z1, gamma z2)`.
pub fn g_k_m(k: u32, m: u64, z1: &HPoint, z2: &HPoint, ctx: &PrecisionContext) -> Result<GreenValue> {
    check_k(k)?;
    if k == 1 {
        g_1_m(m, z1, z2, ctx)
    } else {
        Ok(g_k_m_many(&[k], m, z1, z2, ctx)?.remove(0))
    }
}

/// A weakly holomorphic form of weight `2 - 2k` through its principal part
/// `sum c_f(m) q^{-m}`.
#[derive(Clone, Debug, PartialEq)]
pub struct PrincipalPart {
    pub k: u32,
    /// `(m, c_f(m))`.
    pub coefficients: Vec<(u64, Ratio<i64>)>,
}

impl PrincipalPart {
    pub fn new(k: u32, coefficients: Vec<(u64, Ratio<i64>)>) -> Result<Self> {
        check_k(k)?;
        if coefficients.iter().all(|(_, c)| *c.numer() == 0) {
            return Err(Error::InvalidArgument(
                "principal part needs a nonzero coefficient".into(),
            ));
        }
        if coefficients.iter().any(|(m, _)| *m == 0) {
            return Err(Error::InvalidArgument("principal part indices start at 1".into()));
        }
        Ok(PrincipalPart { k, coefficients })
    }

    /// `J_m`, the form with principal part `q^{-m}` in weight 0.
    pub fn j_m(m: u64) -> Result<Self> {
        PrincipalPart::new(1, vec![(m, Ratio::from_integer(1))])
    }
}

/// `G_f = sum c_f(m) m^{k-1} G_k^m`; vanishing coefficients contribute nothing.
pub fn g_f(f: &PrincipalPart, z1: &HPoint, z2: &HPoint, ctx: &PrecisionContext) -> Result<GreenValue> {
    let mut value = 0.0;
    let mut error = 0.0;
    let mut terms = Vec::new();
    for &(m, c) in &f.coefficients {
        if *c.numer() == 0 {
            continue;
        }
        let w = (*c.numer() as f64 / *c.denom() as f64) * (m as f64).powi(f.k as i32 - 1);
        let g = g_k_m(f.k, m, z1, z2, ctx)?;
        value += w * g.value;
        error += w.abs() * g.error;
        terms.extend(g.terms.into_iter().map(|t| CosetTerm {
            value: w * t.value,
            error: w.abs() * t.error,
            ..t
        }));
    }
    Ok(GreenValue { value, error, terms })
}

/// `G_k^m` summed over a cycle with multiplicities.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CycleGreen {
    pub k: u32,
    pub value: f64,
    pub error: f64,
}

/// `G_k^m(Z(W))` for each requested `k`, pairs evaluated in parallel and
/// summed in cycle order.
pub fn cycle_green(cycle: &CmCycle, ks: &[u32], m: u64, ctx: &PrecisionContext) -> Result<Vec<CycleGreen>> {
    for &k in ks {
        check_k(k)?;
    }
    let higher: Vec<u32> = ks.iter().copied().filter(|&k| k != 1).collect();
    let per_pair: Vec<Result<Vec<(u32, GreenValue)>>> = cycle
        .pairs
        .par_iter()
        .map(|pair| {
            let (z1, z2) = (HPoint::Cm(pair.z1), HPoint::Cm(pair.z2));
            let mut out = Vec::new();
            if ks.contains(&1) {
                out.push((1, g_1_m(m, &z1, &z2, ctx)?));
            }
            if !higher.is_empty() {
                let vals = g_k_m_many(&higher, m, &z1, &z2, ctx)?;
                out.extend(higher.iter().copied().zip(vals));
            }
            Ok(out)
        })
        .collect();
    let mut totals: Vec<CycleGreen> = ks
        .iter()
        .map(|&k| CycleGreen {
            k,
            value: 0.0,
            error: 0.0,
        })
        .collect();
    for (pair, r) in cycle.pairs.iter().zip(per_pair) {
        let mult = pair.multiplicity as f64;
        for (k, g) in r? {
            let slot = totals.iter_mut().find(|t| t.k == k).expect("requested k");
            slot.value += mult * g.value;
            slot.error += mult * g.error;
        }
    }
    Ok(totals)
}
