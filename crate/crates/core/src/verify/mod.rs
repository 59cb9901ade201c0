//! Certification of norms as non-units, the lower bounds on `log |N|`, the
//! chain through `G_k^m` for `k = 3, 5, 7`, and isogeny witnesses.

pub mod factor;

use std::time::Instant;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::cmcycles::{cm_cycle, cycle_norm_integer, CmCycle, CycleKind, CycleNorm, CycleRoot};
use crate::error::{Error, Result};
use crate::greens::{cycle_green, tm_count};
use crate::numerics::{legendre_q_closed, mk_constant, PrecisionContext};
use crate::quadforms::{Discriminant, QuadForm};

pub use factor::{factor_integer, is_probable_prime, FactorOptions, Factorization};

/// What a report concludes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    /// Every requested assertion holds.
    Pass,
    /// `phi_m` vanishes on the cycle.
    Zero,
    /// Computed for a non-coprime big pair; nothing is asserted.
    Diagnostic,
    /// An assertion failed: a counterexample.
    Fail,
    /// The computation itself failed (precision, tail budget, ...).
    Error,
}

impl Outcome {
    /// Exit status: 0 pass, zero or diagnostic, 1 assertion failure, 2 computational failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Outcome::Pass | Outcome::Zero | Outcome::Diagnostic => 0,
            Outcome::Fail => 1,
            Outcome::Error => 2,
        }
    }
}

/// Where the cycle meets `T_m`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SingularPair {
    pub z1: QuadForm,
    pub z2: QuadForm,
    /// `(a, b, d)` of the vanishing coset.
    pub coset: (i64, i64, i64),
}

/// `log N >= 2 |Z(W) cap T_{m, eps}| Q_2(cosh(sqrt 2 eps))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LowerBound {
    pub epsilon: f64,
    pub count: u64,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

/// `2 log N >= m_k (-G_k^m(Z(W)))`, with the error of `G` added on the right.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChainBound {
    pub k: u32,
    pub m_k: f64,
    /// `-G_k^m(Z(W))`.
    pub minus_green: f64,
    pub green_error: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

/// Milliseconds spent per stage.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Timings {
    pub norm_ms: f64,
    pub factor_ms: f64,
    pub bounds_ms: f64,
    pub chain_ms: f64,
}

fn ser_opt_big<S: Serializer>(v: &Option<BigInt>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(n) => s.serialize_some(&n.to_string()),
        None => s.serialize_none(),
    }
}

fn ser_factorization<S: Serializer>(
    v: &Option<Factorization>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    #[derive(Serialize)]
    struct Out {
        factors: Vec<(String, u32)>,
        cofactor: Option<String>,
    }
    match v {
        None => s.serialize_none(),
        Some(f) => s.serialize_some(&Out {
            factors: f.factors.iter().map(|(p, e)| (p.to_string(), *e)).collect(),
            cofactor: f.cofactor.as_ref().map(|c| c.to_string()),
        }),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub d1: i64,
    pub d2: i64,
    pub m: u64,
    pub cycle_kind: Option<CycleKind>,
    pub group_order: Option<u64>,
    pub outcome: Outcome,
    /// Decimal `|N|`, `"zero"` or `"failed"`.
    pub norm: String,
    #[serde(skip)]
    pub norm_value: Option<BigInt>,
    pub non_unit: Option<bool>,
    pub log_norm: Option<f64>,
    pub precision_bits: Option<usize>,
    pub singular: Option<SingularPair>,
    #[serde(serialize_with = "ser_factorization")]
    pub factorization: Option<Factorization>,
    #[serde(serialize_with = "ser_opt_big")]
    pub isogeny_witness: Option<BigInt>,
    pub lower_bounds: Vec<LowerBound>,
    pub chain_bounds: Vec<ChainBound>,
    pub error: Option<String>,
    pub timings: Timings,
}

impl VerificationReport {
    fn new(d1: i64, d2: i64, m: u64) -> Self {
        VerificationReport {
            d1,
            d2,
            m,
            cycle_kind: None,
            group_order: None,
            outcome: Outcome::Error,
            norm: "failed".into(),
            norm_value: None,
            non_unit: None,
            log_norm: None,
            precision_bits: None,
            singular: None,
            factorization: None,
            isogeny_witness: None,
            lower_bounds: Vec::new(),
            chain_bounds: Vec::new(),
            error: None,
            timings: Timings::default(),
        }
    }

    fn fail_with(mut self, e: Error) -> Self {
        self.outcome = Outcome::Error;
        self.error = Some(e.to_string());
        self
    }
}

/// Which checks to run beyond the norm itself.
#[derive(Clone, Debug, PartialEq)]
pub struct VerifyOptions {
    pub epsilons: Vec<f64>,
    pub chain: bool,
    pub factor: bool,
    /// Overrides the instance-dependent trial division bound.
    pub factor_options: Option<FactorOptions>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            epsilons: Vec::new(),
            chain: false,
            factor: false,
            factor_options: None,
        }
    }
}

fn millis(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Integer `R` and exponent `e` with `N = R^e`; factoring `R` is cheaper.
fn norm_root(norm: &CycleNorm) -> (BigInt, u32) {
    match &norm.root {
        CycleRoot::Rational { value } => (value.magnitude().clone().into(), norm.root_exponent),
        CycleRoot::Quadratic { .. } => (norm.norm.clone(), 1),
    }
}

/// `Q_2(cosh(sqrt 2 eps))`.
fn q2_at(epsilon: f64) -> Result<f64> {
    legendre_q_closed(3, (std::f64::consts::SQRT_2 * epsilon).cosh())
}

fn lower_bound(cycle: &CmCycle, m: u64, ln_n: f64, epsilon: f64) -> Result<LowerBound> {
    let prox = tm_count(cycle, m, epsilon)?;
    let rhs = if prox.count == 0 {
        0.0
    } else {
        2.0 * prox.count as f64 * q2_at(epsilon)?
    };
    Ok(LowerBound {
        epsilon,
        count: prox.count,
        lhs: ln_n,
        rhs,
        pass: ln_n >= rhs,
    })
}

fn chain(cycle: &CmCycle, m: u64, ln_n: f64, ctx: &PrecisionContext) -> Result<Vec<ChainBound>> {
    let ks = [3, 5, 7];
    cycle_green(cycle, &ks, m, ctx)?
        .into_iter()
        .map(|g| {
            let m_k = mk_constant(g.k)?;
            let rhs = m_k * (-g.value + g.error);
            Ok(ChainBound {
                k: g.k,
                m_k,
                minus_green: -g.value,
                green_error: g.error,
                lhs: 2.0 * ln_n,
                rhs,
                pass: 2.0 * ln_n >= rhs,
            })
        })
        .collect()
}

/// Builds the cycle of `(d1, d2)`, computes the norm of `phi_m` over it and runs
/// the checks selected in `opts`. Never returns an error; failures are recorded
/// in the report.
pub fn verify(d1: i64, d2: i64, m: u64, opts: &VerifyOptions, ctx: &PrecisionContext) -> VerificationReport {
    match Discriminant::new(d1)
        .and_then(|a| Discriminant::new(d2).map(|b| (a, b)))
        .and_then(|(a, b)| cm_cycle(a, b))
    {
        Ok(cycle) => verify_cycle(&cycle, m, opts, ctx),
        Err(e) => VerificationReport::new(d1, d2, m).fail_with(e),
    }
}

/// [`verify`] on a prebuilt cycle, for example a small cycle at chosen base points.
pub fn verify_cycle(
    cycle: &CmCycle,
    m: u64,
    opts: &VerifyOptions,
    ctx: &PrecisionContext,
) -> VerificationReport {
    let (d1, d2) = (cycle.d1.value(), cycle.d2.value());
    let mut rep = VerificationReport::new(d1, d2, m);
    rep.cycle_kind = Some(cycle.kind);
    rep.group_order = Some(cycle.group_order);

    let t = Instant::now();
    let norm = cycle_norm_integer(cycle, m, ctx);
    rep.timings.norm_ms = millis(t);
    let norm = match norm {
        Ok(n) => n,
        Err(Error::CycleSingular { z1, z2, coset }) => {
            rep.outcome = Outcome::Zero;
            rep.norm = "zero".into();
            rep.norm_value = Some(BigInt::zero());
            rep.singular = Some(SingularPair { z1, z2, coset });
            return rep;
        }
        Err(e) => return rep.fail_with(e),
    };
    rep.precision_bits = Some(norm.bits);
    rep.norm = norm.norm.to_string();
    rep.norm_value = Some(norm.norm.clone());
    if norm.norm.is_zero() {
        return rep.fail_with(Error::InvalidArgument(
            "norm recognized as zero without a vanishing factor".into(),
        ));
    }
    let ln_n = norm.ln();
    rep.log_norm = Some(ln_n);
    rep.non_unit = Some(norm.norm > BigInt::one());

    if opts.factor {
        let t = Instant::now();
        let fopts = opts
            .factor_options
            .clone()
            .unwrap_or_else(|| FactorOptions::for_instance(d1, d2, m));
        let (root, e) = norm_root(&norm);
        let f = factor_integer(&root, &fopts).pow(e);
        debug_assert_eq!(BigInt::from(f.product()), norm.norm);
        rep.isogeny_witness = f.smallest_prime().map(|p| BigInt::from(p.clone()));
        rep.factorization = Some(f);
        rep.timings.factor_ms = millis(t);
    }

    let t = Instant::now();
    for &eps in &opts.epsilons {
        match lower_bound(cycle, m, ln_n, eps) {
            Ok(b) => rep.lower_bounds.push(b),
            Err(e) => return rep.fail_with(e),
        }
    }
    rep.timings.bounds_ms = millis(t);

    if opts.chain {
        let t = Instant::now();
        match chain(cycle, m, ln_n, ctx) {
            Ok(c) => rep.chain_bounds = c,
            Err(e) => return rep.fail_with(e),
        }
        rep.timings.chain_ms = millis(t);
    }

    rep.outcome = if cycle.kind == CycleKind::Diagnostic {
        Outcome::Diagnostic
    } else if rep.non_unit == Some(true)
        && rep.lower_bounds.iter().all(|b| b.pass)
        && rep.chain_bounds.iter().all(|b| b.pass)
    {
        Outcome::Pass
    } else {
        Outcome::Fail
    };
    rep
}

/// The norm and the non-unit assertion only.
pub fn verify_nonunit(d1: i64, d2: i64, m: u64, ctx: &PrecisionContext) -> VerificationReport {
    verify(d1, d2, m, &VerifyOptions::default(), ctx)
}

fn exact_norm(d1: i64, d2: i64, m: u64, ctx: &PrecisionContext) -> Result<(CmCycle, CycleNorm)> {
    let cycle = cm_cycle(Discriminant::new(d1)?, Discriminant::new(d2)?)?;
    if !cycle.kind.is_exact() {
        return Err(Error::InvalidArgument(format!(
            "({d1}, {d2}) is not an exact-mode pair"
        )));
    }
    let norm = cycle_norm_integer(&cycle, m, ctx)?;
    Ok((cycle, norm))
}

/// `(log N, 2 |Z(W) cap T_{m,eps}| Q_2(cosh(sqrt 2 eps)), pass)`.
pub fn verify_lower_bound(
    d1: i64,
    d2: i64,
    m: u64,
    epsilon: f64,
    ctx: &PrecisionContext,
) -> Result<LowerBound> {
    let (cycle, norm) = exact_norm(d1, d2, m, ctx)?;
    lower_bound(&cycle, m, norm.ln(), epsilon)
}

/// The chain `2 log N >= m_k (-G_k^m(Z(W)))` for `k = 3, 5, 7`.
pub fn verify_chain(d1: i64, d2: i64, m: u64, ctx: &PrecisionContext) -> Result<Vec<ChainBound>> {
    let (cycle, norm) = exact_norm(d1, d2, m, ctx)?;
    chain(&cycle, m, norm.ln(), ctx)
}

/// The smallest prime found dividing `N`; every prime divisor is a residue
/// characteristic where the two reductions are `m`-isogenous.
pub fn isogeny_witness(d1: i64, d2: i64, m: u64, ctx: &PrecisionContext) -> Result<Option<BigUint>> {
    let (_, norm) = exact_norm(d1, d2, m, ctx)?;
    let (root, _) = norm_root(&norm);
    let f = factor_integer(&root, &FactorOptions::for_instance(d1, d2, m));
    Ok(f.smallest_prime().cloned())
}

/// Which pairs a sweep visits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SweepPolicy {
    /// Keep non-coprime big pairs, reported as diagnostics.
    pub include_diagnostics: bool,
    /// Restrict to coprime pairs of fundamental discriminants.
    pub coprime_fundamental: bool,
}

impl Default for SweepPolicy {
    fn default() -> Self {
        SweepPolicy {
            include_diagnostics: false,
            coprime_fundamental: false,
        }
    }
}

/// The unordered pairs `{d1, d2}` (`d1 >= d2`) drawn from the two ranges that
/// the policy admits; integers that are not discriminants are skipped.
pub fn sweep_pairs(d1s: &[i64], d2s: &[i64], policy: SweepPolicy) -> Vec<(i64, i64)> {
    let mut out = Vec::new();
    for &a in d1s {
        for &b in d2s {
            let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
            let (Ok(x), Ok(y)) = (Discriminant::new(hi), Discriminant::new(lo)) else {
                continue;
            };
            let coprime = hi.gcd(&lo) == 1;
            if policy.coprime_fundamental && !(coprime && x.is_fundamental() && y.is_fundamental()) {
                continue;
            }
            let square = crate::cmcycles::cycle_case(x, y) == crate::cmcycles::CycleCase::Small;
            if !square && !coprime && !policy.include_diagnostics {
                continue;
            }
            out.push((hi, lo));
        }
    }
    out.sort_by(|p, q| q.cmp(p));
    out.dedup();
    out
}

/// Counts per outcome.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SweepSummary {
    pub total: usize,
    pub pass: usize,
    pub zero: usize,
    pub diagnostic: usize,
    pub fail: usize,
    pub error: usize,
}

impl SweepSummary {
    pub fn of(reports: &[VerificationReport]) -> Self {
        let mut s = SweepSummary {
            total: reports.len(),
            ..Default::default()
        };
        for r in reports {
            match r.outcome {
                Outcome::Pass => s.pass += 1,
                Outcome::Zero => s.zero += 1,
                Outcome::Diagnostic => s.diagnostic += 1,
                Outcome::Fail => s.fail += 1,
                Outcome::Error => s.error += 1,
            }
        }
        s
    }

    /// The worst exit status among the reports.
    pub fn exit_code(&self) -> i32 {
        if self.fail > 0 {
            1
        } else if self.error > 0 {
            2
        } else {
            0
        }
    }
}

/// Runs [`verify`] over every admitted pair and every `m`; instances run in
/// parallel and come back ordered by `(d1, d2, m)` as listed.
pub fn sweep(
    d1s: &[i64],
    d2s: &[i64],
    ms: &[u64],
    policy: SweepPolicy,
    opts: &VerifyOptions,
    ctx: &PrecisionContext,
) -> Vec<VerificationReport> {
    let jobs: Vec<(i64, i64, u64)> = sweep_pairs(d1s, d2s, policy)
        .into_iter()
        .flat_map(|(a, b)| ms.iter().map(move |&m| (a, b, m)))
        .collect();
    jobs.par_iter()
        .map(|&(a, b, m)| verify(a, b, m, opts, ctx))
        .collect()
}
