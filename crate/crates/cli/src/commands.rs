use std::fmt::Write as _;
use std::fs;
use std::time::Instant;

use astro_float::BigFloat;
use cmnorm::cmcycles::{cm_cycle, cycle_case, small_cm_cycle_at, CycleCase};
use cmnorm::greens::{cycle_green, g_k_m};
use cmnorm::modular::jfunc::{cached_coefficient_count, j_coefficients, seed_j_coefficients, to_pair};
use cmnorm::modular::{classpoly, j_of_cm, modpoly_eval, HPoint};
use cmnorm::numerics::mp;
use cmnorm::quadforms::enumerate_reduced;
use cmnorm::verify::{sweep, verify_cycle, SweepPolicy, SweepSummary, VerificationReport, VerifyOptions};
use cmnorm::{CmPoint, Discriminant, PrecisionContext};
use num_bigint::BigInt;
use serde::Serialize;
use serde_json::json;

use crate::cache::{Cache, CacheEntry};
use crate::input::CmSpec;
use crate::{Checks, Cli, Command, Global};

/// A failed command: message and exit status.
struct Failure {
    message: String,
    code: i32,
}

impl Failure {
    fn compute(e: impl ToString) -> Self {
        Failure {
            message: e.to_string(),
            code: 2,
        }
    }
}

type Outcome = Result<(String, i32), Failure>;

pub fn run(cli: &Cli) -> i32 {
    let g = &cli.global;
    let cache = match &g.cache_dir {
        Some(dir) => match Cache::open(dir) {
            Ok(c) => Some(c),
            Err(e) => return fail(g, Failure::compute(format!("cache dir {}: {e}", dir.display()))),
        },
        None => None,
    };
    let loaded = cache.as_ref().map_or(0, warm_j_series);
    let ctx = match g.context() {
        Ok(c) => c,
        Err(e) => return fail(g, Failure { message: e, code: 2 }),
    };
    let result = match &cli.command {
        Command::Classpoly { d } => cmd_classpoly(g, *d, &ctx, cache.as_ref()),
        Command::Cmpoints { d } => cmd_cmpoints(g, *d, &ctx),
        Command::ModpolyEval { m, z1, z2 } => cmd_modpoly(g, *m, z1, z2, &ctx),
        Command::Norm { d1, d2, m, checks } => cmd_norm(g, *d1, *d2, *m, checks, &ctx),
        Command::Greens { k, m, z1, z2, cycle } => cmd_greens(g, *k, *m, z1, z2, cycle, &ctx),
        Command::Sweep {
            dmin,
            dmax,
            mmin,
            mmax,
            coprime_fundamental,
            include_diagnostics,
            checks,
        } => {
            let policy = SweepPolicy {
                include_diagnostics: *include_diagnostics,
                coprime_fundamental: *coprime_fundamental,
            };
            cmd_sweep(g, (*dmin, *dmax), (*mmin, *mmax), policy, checks, &ctx)
        }
    };
    if let Some(c) = &cache {
        store_j_series(c, loaded);
    }
    match result {
        Ok((text, code)) => match emit(g, &text) {
            Ok(()) => code,
            Err(f) => fail(g, f),
        },
        Err(f) => fail(g, f),
    }
}

fn fail(g: &Global, f: Failure) -> i32 {
    if g.json {
        println!("{}", json!({ "error": f.message, "exit_code": f.code }));
    } else {
        eprintln!("error: {}", f.message);
    }
    f.code
}

fn emit(g: &Global, text: &str) -> Result<(), Failure> {
    match &g.out {
        Some(path) => fs::write(path, format!("{text}\n"))
            .map_err(|e| Failure::compute(format!("writing {}: {e}", path.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(v: &T) -> Result<String, Failure> {
    serde_json::to_string_pretty(v).map_err(Failure::compute)
}

/// Seeds the j series from the cache; returns how many coefficients were loaded.
fn warm_j_series(cache: &Cache) -> usize {
    match cache.best_jcoeffs() {
        Some(c) => {
            let n = c.len();
            match seed_j_coefficients(c) {
                Ok(()) => n,
                Err(_) => 0,
            }
        }
        None => 0,
    }
}

fn store_j_series(cache: &Cache, loaded: usize) {
    let n = cached_coefficient_count();
    if n > loaded {
        let coeffs = j_coefficients(n);
        let entry = CacheEntry::new(format!("jcoeffs:{}", coeffs.len()), coeffs.to_vec());
        if let Err(e) = cache.put(&entry) {
            eprintln!("warning: could not write j series to cache: {e}");
        }
    }
}

fn cmd_classpoly(g: &Global, d: Discriminant, ctx: &PrecisionContext, cache: Option<&Cache>) -> Outcome {
    let key = format!("classpoly:{}", d.value());
    let h = enumerate_reduced(d).order();
    let cached = cache
        .and_then(|c| c.get(&key))
        .filter(|p| p.len() == h + 1 && p.last() == Some(&BigInt::from(1)));
    let coeffs = match cached {
        Some(c) => c,
        None => {
            let poly = classpoly(d, ctx).map_err(Failure::compute)?;
            if let Some(c) = cache {
                if let Err(e) = c.put(&CacheEntry::new(key, poly.coeffs.clone())) {
                    eprintln!("warning: could not write class polynomial to cache: {e}");
                }
            }
            poly.coeffs
        }
    };
    let text = if g.json {
        // integers as JSON number literals, exact at any size
        let list: Vec<String> = coeffs.iter().map(|c| c.to_string()).collect();
        format!("{{\"d\": {}, \"coeffs\": [{}]}}", d.value(), list.join(", "))
    } else {
        let poly = cmnorm::modular::ClassPolynomial {
            d,
            coeffs,
            max_rel_residual: 0.0,
            bits: ctx.mantissa_bits,
        };
        poly.to_string()
    };
    Ok((text, 0))
}

#[derive(Serialize)]
struct PointRow {
    form: [i64; 3],
    tau: [f64; 2],
    j: [f64; 2],
}

fn cmd_cmpoints(g: &Global, d: Discriminant, ctx: &PrecisionContext) -> Outcome {
    let group = enumerate_reduced(d);
    let rows: Vec<PointRow> = group
        .forms()
        .iter()
        .map(|f| {
            let p = CmPoint::new(*f).expect("reduced primitive form");
            let z = p.z();
            let (re, im) = to_pair(&j_of_cm(&p, ctx.mantissa_bits).value);
            PointRow {
                form: [f.a, f.b, f.c],
                tau: [z.re, z.im],
                j: [re, im],
            }
        })
        .collect();
    let text = if g.json {
        to_json(&json!({ "d": d.value(), "class_number": rows.len(), "points": rows }))?
    } else {
        let mut s = format!("d = {}, h = {}\n", d.value(), rows.len());
        for r in &rows {
            let _ = writeln!(
                s,
                "({}, {}, {})  tau = {:.15} + {:.15}i  j = {:.12e} + {:.12e}i",
                r.form[0], r.form[1], r.form[2], r.tau[0], r.tau[1], r.j[0], r.j[1]
            );
        }
        s.trim_end().to_string()
    };
    Ok((text, 0))
}

/// Scientific decimal with 16 significant digits, valid far outside `f64` range.
fn sci(x: &BigFloat) -> String {
    let Some((f, e)) = mp::split(x) else {
        return "0".into();
    };
    let l = e as f64 * std::f64::consts::LOG10_2 + f.abs().log10();
    let k = l.floor();
    let mut mant = 10f64.powf(l - k);
    let mut k = k as i64;
    if mant >= 9.999_999_999_999_999_5 {
        mant /= 10.0;
        k += 1;
    }
    let sign = if f < 0.0 { "-" } else { "" };
    format!("{sign}{mant:.15}e{k}")
}

fn point_label(z: &HPoint) -> String {
    match z {
        HPoint::Cm(p) => {
            let f = p.form();
            format!("{},{},{}", f.a, f.b, f.c)
        }
        HPoint::Complex(w) => format!("{}{:+}i", w.re, w.im),
    }
}

fn cmd_modpoly(g: &Global, m: u64, z1: &HPoint, z2: &HPoint, ctx: &PrecisionContext) -> Outcome {
    let v = modpoly_eval(m, z1, z2, ctx).map_err(Failure::compute)?;
    let zero: Vec<[i64; 3]> = v.zero_factors.iter().map(|c| [c.a, c.b, c.d]).collect();
    let (re, im) = (sci(&v.value.re), sci(&v.value.im));
    let text = if g.json {
        to_json(&json!({
            "m": m,
            "z1": point_label(z1),
            "z2": point_label(z2),
            "value": { "re": re, "im": im },
            "log2_abs": finite_or_null(v.log2_abs),
            "log2_rel_error": finite_or_null(v.log2_rel_error),
            "zero": v.is_zero(),
            "zero_cosets": zero,
        }))?
    } else if v.is_zero() {
        format!("phi_{m} = 0 (vanishing cosets {zero:?})")
    } else {
        format!(
            "phi_{m} = {re} + {im}i\nlog2 |phi| = {:.6}, log2 relative error = {:.1}",
            v.log2_abs, v.log2_rel_error
        )
    };
    Ok((text, 0))
}

fn finite_or_null(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

fn verify_options(checks: &Checks) -> Result<VerifyOptions, Failure> {
    if let Some(e) = checks.epsilon.iter().find(|e| !(**e > 0.0)) {
        return Err(Failure {
            message: format!("epsilon must be positive, got {e}"),
            code: 2,
        });
    }
    Ok(VerifyOptions {
        epsilons: checks.epsilon.clone(),
        chain: checks.chain,
        factor: checks.factor,
        factor_options: None,
    })
}

fn cmd_norm(g: &Global, z1: CmSpec, z2: CmSpec, m: u64, checks: &Checks, ctx: &PrecisionContext) -> Outcome {
    let opts = verify_options(checks)?;
    let (d1, d2) = (z1.discriminant(), z2.discriminant());
    // explicit base points only matter for a small cycle
    let cycle = match cycle_case(d1, d2) {
        CycleCase::Small => small_cm_cycle_at(z1.point(), z2.point()),
        CycleCase::Big => cm_cycle(d1, d2),
    }
    .map_err(Failure::compute)?;
    let report = verify_cycle(&cycle, m, &opts, ctx);
    let code = report.outcome.exit_code();
    let text = if g.json { to_json(&report)? } else { report_text(&report) };
    Ok((text, code))
}

fn factorization_text(r: &VerificationReport) -> Option<String> {
    let f = r.factorization.as_ref()?;
    let mut parts: Vec<String> = f
        .factors
        .iter()
        .map(|(p, e)| if *e == 1 { p.to_string() } else { format!("{p}^{e}") })
        .collect();
    if let Some(c) = &f.cofactor {
        parts.push(format!("[{c}]"));
    }
    Some(parts.join(" * "))
}

fn report_text(r: &VerificationReport) -> String {
    let mut s = String::new();
    let kind = r.cycle_kind.map_or("-".to_string(), |k| k.to_string());
    let _ = writeln!(s, "({}, {}) m = {}  cycle {}  order {}", r.d1, r.d2, r.m, kind, r.group_order.unwrap_or(0));
    let _ = writeln!(s, "N = {}", r.norm);
    if let Some(sing) = &r.singular {
        let _ = writeln!(s, "vanishes at ({}, {}) through coset {:?}", sing.z1, sing.z2, sing.coset);
    }
    if let Some(l) = r.log_norm {
        let _ = writeln!(s, "log N = {l:.12}  bits {}", r.precision_bits.unwrap_or(0));
    }
    if let Some(f) = factorization_text(r) {
        let _ = writeln!(s, "N = {f}");
    }
    if let Some(w) = &r.isogeny_witness {
        let _ = writeln!(s, "isogeny witness p = {w}");
    }
    for b in &r.lower_bounds {
        let _ = writeln!(
            s,
            "eps {}: count {}  log N = {:.6} >= {:.6e}  {}",
            b.epsilon,
            b.count,
            b.lhs,
            b.rhs,
            verdict(b.pass)
        );
    }
    for c in &r.chain_bounds {
        let _ = writeln!(
            s,
            "k = {}: 2 log N = {:.6} >= m_k (-G + err) = {:.6}  {}",
            c.k,
            c.lhs,
            c.rhs,
            verdict(c.pass)
        );
    }
    if let Some(e) = &r.error {
        let _ = writeln!(s, "error: {e}");
    }
    let _ = write!(s, "outcome: {}", serde_json::to_value(r.outcome).unwrap().as_str().unwrap_or("?"));
    s
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "pass"
    } else {
        "FAIL"
    }
}

fn cmd_greens(
    g: &Global,
    k: u32,
    m: u64,
    z1: &Option<HPoint>,
    z2: &Option<HPoint>,
    cycle: &Option<Vec<Discriminant>>,
    ctx: &PrecisionContext,
) -> Outcome {
    let text = match (z1, z2, cycle) {
        (_, _, Some(ds)) => {
            let cyc = cm_cycle(ds[0], ds[1]).map_err(Failure::compute)?;
            let v = cycle_green(&cyc, &[k], m, ctx).map_err(Failure::compute)?.remove(0);
            if g.json {
                to_json(&json!({
                    "k": k, "m": m, "d1": ds[0].value(), "d2": ds[1].value(),
                    "cycle_size": cyc.size(), "value": v.value, "error": v.error,
                }))?
            } else {
                format!(
                    "G_{k}^{m}(Z) over ({}, {}), {} points: {:.15e} +- {:.3e}",
                    ds[0].value(),
                    ds[1].value(),
                    cyc.size(),
                    v.value,
                    v.error
                )
            }
        }
        (Some(a), Some(b), None) => {
            let v = g_k_m(k, m, a, b, ctx).map_err(Failure::compute)?;
            if g.json {
                to_json(&json!({
                    "k": k, "m": m, "z1": point_label(a), "z2": point_label(b),
                    "value": v.value, "error": v.error, "terms": v.terms,
                }))?
            } else {
                let mut s = format!("G_{k}^{m}({}, {}) = {:.15e} +- {:.3e}\n", point_label(a), point_label(b), v.value, v.error);
                for t in &v.terms {
                    let _ = writeln!(s, "  coset ({}, {}, {}): {:.15e} +- {:.3e}", t.coset.a, t.coset.b, t.coset.d, t.value, t.error);
                }
                s.trim_end().to_string()
            }
        }
        _ => {
            return Err(Failure {
                message: "give either --z1 and --z2 or --cycle D1 D2".into(),
                code: 2,
            })
        }
    };
    Ok((text, 0))
}

fn cmd_sweep(
    g: &Global,
    (dmin, dmax): (i64, i64),
    (mmin, mmax): (u64, u64),
    policy: SweepPolicy,
    checks: &Checks,
    ctx: &PrecisionContext,
) -> Outcome {
    let opts = verify_options(checks)?;
    let ds: Vec<i64> = (dmin.max(3)..=dmax).map(|d| -d).collect();
    let ms: Vec<u64> = (mmin.max(1)..=mmax).collect();
    let t = Instant::now();
    let reports = sweep(&ds, &ds, &ms, policy, &opts, ctx);
    let summary = SweepSummary::of(&reports);
    eprintln!(
        "{} instances: {} pass, {} zero, {} diagnostic, {} fail, {} error ({:.1} s)",
        summary.total,
        summary.pass,
        summary.zero,
        summary.diagnostic,
        summary.fail,
        summary.error,
        t.elapsed().as_secs_f64()
    );
    let text = if g.json || g.out.is_some() {
        to_json(&reports)?
    } else {
        let mut s = String::new();
        for r in &reports {
            let _ = writeln!(
                s,
                "({}, {}) m = {}: {}  N = {}",
                r.d1,
                r.d2,
                r.m,
                serde_json::to_value(r.outcome).unwrap().as_str().unwrap_or("?"),
                r.norm
            );
        }
        s.trim_end().to_string()
    };
    Ok((text, summary.exit_code()))
}
