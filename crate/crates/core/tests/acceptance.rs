//! Acceptance suite: one line per criterion, tolerances pinned.
//!
//! Criterion 10 contains a claim that is false at `z = i`, `m = 2` (the
//! endomorphism `1 + i` has degree 2, so `phi_2(1728, 1728) = 0`). Its line
//! reports the failure; it does not make the run fail. Any other failure does.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use cmnorm::cmcycles::{cm_cycle, cycle_log_norm, cycle_norm_integer};
use cmnorm::greens::{cycle_green, fd_laplacian, graph_distance, midpoint_objective};
use cmnorm::modular::classpoly;
use cmnorm::modular::domain::for_each_orbit_point;
use cmnorm::numerics::{legendre_p, legendre_q_closed, legendre_q_num, mk_constant};
use cmnorm::quadforms::{compose, enumerate_reduced, QuadForm};
use cmnorm::verify::{sweep, verify_nonunit, Outcome, SweepPolicy, VerifyOptions};
use cmnorm::{Discriminant, Error, PrecisionContext};
use common::{brute_graph_distance, det_m_matrices, dist, minimize_h, random_fd_point};
use num_bigint::BigInt;
use num_integer::Integer;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Criteria that cannot hold as stated; their failure is reported, not fatal.
const KNOWN_FALSE: &[u32] = &[10];

const EPSILONS: [f64; 5] = [0.25, 0.5, 1.0, 2.0, 4.0];

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn ctx() -> PrecisionContext {
    PrecisionContext::default()
}

fn disc(d: i64) -> Discriminant {
    Discriminant::new(d).unwrap()
}

/// Reduced primitive forms of discriminant `d` by exhaustive search.
fn brute_class_number(d: i64) -> usize {
    let mut h = 0;
    let amax = ((-d as f64) / 3.0).sqrt() as i64 + 1;
    for a in 1..=amax {
        for b in -a + 1..=a {
            let num = b * b - d;
            if num % (4 * a) != 0 {
                continue;
            }
            let c = num / (4 * a);
            if c < a || (a == c && b < 0) {
                continue;
            }
            if a.gcd(&b).gcd(&c) == 1 {
                h += 1;
            }
        }
    }
    h
}

fn criterion_1() -> Verdict {
    let t = Instant::now();
    for (d, want) in [(-23, 3), (-47, 5), (-71, 7)] {
        let h = enumerate_reduced(disc(d)).order();
        if h != want || brute_class_number(d) != want {
            return verdict(false, format!("h({d}) = {h}, expected {want}"));
        }
    }
    let mut discs = 0;
    let mut checks = 0u64;
    for n in 3..=500i64 {
        let d = -n;
        if !matches!(d.rem_euclid(4), 0 | 1) {
            continue;
        }
        discs += 1;
        let g = enumerate_reduced(disc(d));
        if g.order() != brute_class_number(d) {
            return verdict(false, format!("class number mismatch at {d}"));
        }
        let forms = g.forms();
        let e = QuadForm::identity(disc(d)).reduce();
        let c = |x: &QuadForm, y: &QuadForm| compose(x, y).unwrap().reduce();
        for f in forms {
            if c(f, &e) != *f || c(f, &f.inverse()) != e {
                return verdict(false, format!("identity or inverse fails at {d}, {f}"));
            }
            for g2 in forms {
                let fg = c(f, g2);
                if fg != c(g2, f) || !forms.contains(&fg) {
                    return verdict(false, format!("closure or commutativity fails at {d}"));
                }
                for h in forms {
                    checks += 1;
                    if c(&fg, h) != c(f, &c(g2, h)) {
                        return verdict(false, format!("associativity fails at {d}"));
                    }
                }
            }
        }
    }
    let secs = t.elapsed().as_secs_f64();
    verdict(
        secs < 10.0,
        format!("h(-23, -47, -71) = 3, 5, 7; axioms on {discs} discriminants ({checks} triples), {secs:.2} s"),
    )
}

fn criterion_2() -> Verdict {
    let t = Instant::now();
    let h4 = classpoly(disc(-4), &ctx()).unwrap();
    let h15 = classpoly(disc(-15), &ctx()).unwrap();
    let secs = t.elapsed().as_secs_f64();
    let b = |n: i64| BigInt::from(n);
    let ok = h4.coeffs == vec![b(-1728), b(1)]
        && h15.coeffs == vec![b(-121287375), b(191025), b(1)]
        && h4.max_rel_residual < 1e-20
        && h15.max_rel_residual < 1e-20
        && secs < 5.0;
    verdict(
        ok,
        format!(
            "H_-4 = {}, H_-15 = {}, residuals {:.1e}, {:.1e}, {secs:.2} s",
            h4, h15, h4.max_rel_residual, h15.max_rel_residual
        ),
    )
}

fn criterion_3() -> Verdict {
    let mut parts = Vec::new();
    let mut ok = true;
    for (d1, d2, j) in [(-3, -4, 1728), (-3, -7, 3375)] {
        let t = Instant::now();
        let cyc = cm_cycle(disc(d1), disc(d2)).unwrap();
        let n = cycle_norm_integer(&cyc, 1, &ctx()).unwrap();
        let doubled = cycle_norm_integer(&cyc, 1, &ctx().with_bits(2 * n.bits)).unwrap();
        let secs = t.elapsed().as_secs_f64();
        let want = BigInt::from(j).pow(4);
        ok &= n.norm == want && doubled.norm == want && secs < 10.0;
        parts.push(format!("({d1}, {d2}): {} at {} and {} bits, {secs:.2} s", n.norm, n.bits, doubled.bits));
    }
    verdict(ok, parts.join("; "))
}

fn instances() -> (Vec<i64>, SweepPolicy) {
    let ds: Vec<i64> = (3..=50).map(|n| -n).collect();
    let policy = SweepPolicy {
        coprime_fundamental: true,
        include_diagnostics: false,
    };
    (ds, policy)
}

fn criterion_4() -> Verdict {
    let (ds, policy) = instances();
    let t = Instant::now();
    let reports = sweep(&ds, &ds, &[1, 2, 3, 4], policy, &VerifyOptions::default(), &ctx());
    let secs = t.elapsed().as_secs_f64();
    let zero = reports.iter().filter(|r| r.outcome == Outcome::Zero).count();
    let bad: Vec<_> = reports
        .iter()
        .filter(|r| r.outcome != Outcome::Zero)
        .filter(|r| !(r.outcome == Outcome::Pass && r.norm_value.as_ref().is_some_and(|n| *n >= BigInt::from(2))))
        .collect();
    let min = reports
        .iter()
        .filter_map(|r| r.norm_value.clone())
        .filter(|n| *n > BigInt::from(0))
        .min()
        .unwrap_or_default();
    let bits = reports.iter().filter_map(|r| r.precision_bits).max().unwrap_or(0);
    let mut detail = format!(
        "{} instances ({} pairs x m <= 4), {zero} zero, smallest N = {min}, max precision {bits} bits, {secs:.1} s",
        reports.len(),
        reports.len() / 4
    );
    if let Some(r) = bad.first() {
        detail += &format!("; first failure ({}, {}, {}): {:?} {:?}", r.d1, r.d2, r.m, r.outcome, r.error);
    }
    verdict(bad.is_empty() && !reports.is_empty() && secs < 600.0, detail)
}

fn checked_sweep(chain: bool) -> Vec<cmnorm::VerificationReport> {
    let (ds, policy) = instances();
    let opts = VerifyOptions {
        epsilons: if chain { Vec::new() } else { EPSILONS.to_vec() },
        chain,
        ..Default::default()
    };
    sweep(&ds, &ds, &[1, 2, 3, 4], policy, &opts, &ctx())
}

fn criterion_5() -> Verdict {
    let t = Instant::now();
    let reports = checked_sweep(false);
    let mut checks = 0;
    let mut positive = 0;
    let mut failures = Vec::new();
    for r in &reports {
        if r.outcome == Outcome::Error || r.lower_bounds.len() != EPSILONS.len() {
            failures.push(format!("({}, {}, {}): {:?}", r.d1, r.d2, r.m, r.error));
            continue;
        }
        for b in &r.lower_bounds {
            checks += 1;
            positive += (b.count > 0) as usize;
            if !b.pass {
                failures.push(format!("({}, {}, {}) eps {}: {} < {}", r.d1, r.d2, r.m, b.epsilon, b.lhs, b.rhs));
            }
        }
    }
    let detail = format!(
        "{checks} (instance, eps) checks, {positive} with nonempty T_m,eps, {} failures, {:.1} s{}",
        failures.len(),
        t.elapsed().as_secs_f64(),
        failures.first().map(|f| format!("; first {f}")).unwrap_or_default()
    );
    verdict(failures.is_empty() && checks > 0, detail)
}

/// `1 / max (-P_{k-1})` by dense sampling refined with a ternary search.
fn mk_by_search(k: u32) -> f64 {
    let n = k as usize - 1;
    let f = |r: f64| -legendre_p(n, r);
    let samples = 20_000;
    let h = 2.0 / samples as f64;
    let best = (0..=samples)
        .map(|i| -1.0 + h * i as f64)
        .max_by(|a, b| f(*a).total_cmp(&f(*b)))
        .unwrap();
    let (mut lo, mut hi) = ((best - h).max(-1.0), (best + h).min(1.0));
    for _ in 0..200 {
        let (a, b) = (lo + (hi - lo) / 3.0, hi - (hi - lo) / 3.0);
        if f(a) < f(b) {
            lo = a;
        } else {
            hi = b;
        }
    }
    1.0 / f((lo + hi) / 2.0)
}

fn criterion_6() -> Verdict {
    let t = Instant::now();
    let stated = [(3, 2.0), (5, 7.0 / 3.0), (7, (7.0 * 15f64.sqrt() - 3.0) / 10.0)];
    for (k, want) in stated {
        let got = mk_constant(k).unwrap();
        let searched = mk_by_search(k);
        if (got - want).abs() > 1e-12 * want || (searched - want).abs() > 1e-12 * want {
            return verdict(false, format!("m_{k}: {got} vs {want} (search {searched})"));
        }
    }
    let reports = checked_sweep(true);
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    for r in &reports {
        if r.outcome == Outcome::Error || r.chain_bounds.len() != 3 {
            failures.push(format!("({}, {}, {}): {:?}", r.d1, r.d2, r.m, r.error));
            continue;
        }
        for c in &r.chain_bounds {
            worst = worst.max(c.rhs / c.lhs);
            if !c.pass || !(c.minus_green > 0.0) {
                failures.push(format!("({}, {}, {}) k = {}: {} < {}", r.d1, r.d2, r.m, c.k, c.lhs, c.rhs));
            }
        }
    }
    let detail = format!(
        "m_3, m_5, m_7 match to 1e-12; {} instances x k in {{3, 5, 7}}, largest rhs/lhs {worst:.3}, {} failures, {:.1} s{}",
        reports.len(),
        failures.len(),
        t.elapsed().as_secs_f64(),
        failures.first().map(|f| format!("; first {f}")).unwrap_or_default()
    );
    verdict(failures.is_empty() && !reports.is_empty(), detail)
}

/// `(1 - t^2) Q'' - 2 t Q' + nu (nu + 1) Q` by central differences of step `h`.
fn legendre_residual(k: u32, t: f64, h: f64) -> f64 {
    let q = |x: f64| legendre_q_closed(k, x).unwrap();
    let nu = (k - 1) as f64;
    let (qm, q0, qp) = (q(t - h), q(t), q(t + h));
    let d2 = (qp - 2.0 * q0 + qm) / (h * h);
    let d1 = (qp - qm) / (2.0 * h);
    (1.0 - t * t) * d2 - 2.0 * t * d1 + nu * (nu + 1.0) * q0
}

fn criterion_7() -> Verdict {
    let c = ctx();
    let ks = [1u32, 3, 5, 7];
    let ts = [1.05, 1.5, 2.0, 5.0, 20.0];
    let mut worst_diff: f64 = 0.0;
    for &k in &ks {
        for &t in &ts {
            let a = legendre_q_closed(k, t).unwrap();
            let b = legendre_q_num(k as f64, t, &c).unwrap();
            worst_diff = worst_diff.max((a - b).abs());
        }
    }
    let quad_ok = worst_diff <= 10.0 * c.series_tail_bound;

    // the residual must shrink like h^2 down to the rounding floor
    let mut ode_ok = true;
    let mut worst_ratio: f64 = 0.0;
    for &k in &ks {
        for &t in &ts {
            let h = 1e-3 * t;
            let (r1, r2) = (legendre_residual(k, t, 2.0 * h), legendre_residual(k, t, h));
            let fd_error = (r1 - r2).abs() * 4.0 / 3.0;
            let q = legendre_q_closed(k, t - h).unwrap().abs();
            let floor = 64.0 * f64::EPSILON * q * ((t * t - 1.0) * 4.0 / (h * h) + 2.0 * t / h + 64.0);
            let bound = fd_error + floor;
            worst_ratio = worst_ratio.max(r2.abs() / bound);
            ode_ok &= r2.abs() <= bound;
        }
    }

    let mut mono_ok = true;
    for &k in &ks {
        let mut prev = f64::INFINITY;
        for i in 0..=200 {
            let t = 1.0 + 1e-3 * 1e6f64.powf(i as f64 / 200.0);
            let q = legendre_q_closed(k, t).unwrap();
            mono_ok &= q > 0.0 && q < prev;
            prev = q;
        }
    }
    verdict(
        quad_ok && ode_ok && mono_ok,
        format!(
            "closed vs quadrature max {worst_diff:.1e} (limit {:.0e}) on 20 points; ODE residual at most {worst_ratio:.2} of the difference error; positivity and monotonicity {}",
            10.0 * c.series_tail_bound,
            if mono_ok { "hold" } else { "FAIL" }
        ),
    )
}

fn criterion_8() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mats: Vec<_> = (1..=4).map(|m| det_m_matrices(m, 8)).collect();
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let m = 1 + i % 4;
        let z1 = random_fd_point(&mut rng, 2.5);
        let z2 = random_fd_point(&mut rng, 2.5);
        let got = graph_distance(m as u64, z1, z2).unwrap();
        let want = brute_graph_distance(z1, z2, &mats[m - 1]);
        worst = worst.max((got - want).abs() / want.max(1e-3));
    }
    let mut worst_mid: f64 = 0.0;
    for _ in 0..100 {
        let z1 = random_fd_point(&mut rng, 3.0);
        let w = random_fd_point(&mut rng, 3.0) + 0.7;
        let min = minimize_h(|z| midpoint_objective(z1, w, z), (z1 + w) / 2.0);
        let want = dist(z1, w).powi(2) / 2.0;
        worst_mid = worst_mid.max((min - want).abs() / want.max(1e-6));
    }
    verdict(
        worst <= 1e-6 && worst_mid <= 1e-6,
        format!("100 distances, worst relative {worst:.1e}; 100 midpoint minima, worst relative {worst_mid:.1e}"),
    )
}

fn criterion_9() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut pairs = Vec::new();
    while pairs.len() < 10 {
        let z1 = random_fd_point(&mut rng, 2.0);
        let z2 = random_fd_point(&mut rng, 2.0);
        // stay away from the diagonal, where the kernel is singular
        let mut nearest = f64::INFINITY;
        for_each_orbit_point(z1, z2, 1.5, |_, t| nearest = nearest.min(t));
        if nearest > 1.05 {
            pairs.push((z1, z2));
        }
    }
    let mut worst: f64 = 0.0;
    for s in [1.5, 2.0, 3.0] {
        for &(z1, z2) in &pairs {
            let (lap, value) = fd_laplacian(s, z1, z2, 1e-4, 200.0, &ctx()).unwrap();
            let want = s * (1.0 - s) * value;
            worst = worst.max((lap - want).abs() / want.abs());
        }
    }
    verdict(worst < 1e-3, format!("30 evaluations, worst relative residual {worst:.1e}"))
}

/// The classical level-2 modular polynomial.
fn phi2(x: &BigInt, y: &BigInt) -> BigInt {
    let c = |n: i64| BigInt::from(n);
    x * x * x + y * y * y - x * x * y * y + c(1488) * (x * x * y + x * y * y)
        - c(162000) * (x * x + y * y)
        + c(40773375) * x * y
        + c(8748000000) * (x + y)
        - c(157464000000000)
}

fn criterion_10() -> Verdict {
    let r4 = verify_nonunit(-4, -4, 4, &ctx());
    let r2 = verify_nonunit(-4, -4, 2, &ctx());
    let r3 = verify_nonunit(-4, -4, 3, &ctx());
    let nonunit = |r: &cmnorm::VerificationReport| r.outcome == Outcome::Pass && r.non_unit == Some(true);
    let oracle = phi2(&BigInt::from(1728), &BigInt::from(1728));
    let ok = r4.outcome == Outcome::Zero && nonunit(&r2) && nonunit(&r3);
    verdict(
        ok,
        format!(
            "m = 4: {}; m = 2: {}; m = 3: N = {}; classical Phi_2(1728, 1728) = {oracle}",
            r4.norm,
            if r2.outcome == Outcome::Zero {
                format!("zero through coset {:?}", r2.singular.map(|s| s.coset))
            } else {
                format!("N = {}", r2.norm)
            },
            r3.norm
        ),
    )
}

fn criterion_11() -> Verdict {
    let candidates: [(i64, i64, u64); 28] = [
        (-3, -4, 1),
        (-3, -4, 2),
        (-3, -4, 3),
        (-3, -4, 4),
        (-3, -7, 1),
        (-3, -7, 2),
        (-3, -7, 3),
        (-4, -7, 1),
        (-4, -7, 2),
        (-7, -8, 1),
        (-3, -8, 2),
        (-4, -15, 1),
        (-11, -15, 1),
        (-7, -20, 2),
        (-3, -23, 1),
        (-8, -23, 3),
        (-3, -12, 1),
        (-3, -12, 2),
        (-4, -16, 1),
        (-4, -16, 3),
        (-3, -3, 2),
        (-4, -4, 3),
        (-3, -27, 1),
        (-7, -28, 1),
        (-8, -8, 3),
        (-15, -15, 2),
        (-11, -11, 2),
        (-3, -3, 5),
    ];
    let c = ctx();
    let mut used = 0;
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    for (d1, d2, m) in candidates {
        if used == 20 {
            break;
        }
        let cyc = cm_cycle(disc(d1), disc(d2)).unwrap();
        let log = match cycle_log_norm(&cyc, m, &c) {
            Ok(l) => l,
            Err(Error::CycleSingular { .. }) => continue,
            Err(e) => {
                failures.push(format!("({d1}, {d2}, {m}): {e}"));
                continue;
            }
        };
        used += 1;
        let g = cycle_green(&cyc, &[1], m, &c).unwrap()[0];
        let n = cycle_norm_integer(&cyc, m, &c).unwrap();
        let allowed = g.error + 2.0 * log.error + 1e-12 * g.value.abs();
        let d_log = (g.value - 2.0 * log.value).abs();
        let d_norm = (g.value - 2.0 * n.ln()).abs();
        worst = worst.max(d_log.max(d_norm) / allowed);
        if d_log > allowed || d_norm > allowed {
            failures.push(format!("({d1}, {d2}, {m}): G_1 = {}, 2 log = {}", g.value, 2.0 * log.value));
        }
    }
    verdict(
        failures.is_empty() && used == 20,
        format!(
            "{used} instances, largest difference {worst:.2} of the error bound{}",
            failures.first().map(|f| format!("; {f}")).unwrap_or_default()
        ),
    )
}

fn main() {
    let criteria: [(u32, &str, fn() -> Verdict); 11] = [
        (1, "class groups", criterion_1),
        (2, "class polynomials", criterion_2),
        (3, "exact norms", criterion_3),
        (4, "non-unit sweep", criterion_4),
        (5, "lower bound", criterion_5),
        (6, "chain inequality", criterion_6),
        (7, "special functions", criterion_7),
        (8, "geometry oracle", criterion_8),
        (9, "eigenfunction", criterion_9),
        (10, "vanishing only for square m", criterion_10),
        (11, "two routes to G_1", criterion_11),
    ];
    let only: Option<u32> = std::env::args().nth(1).and_then(|a| a.parse().ok());
    let mut fatal = 0;
    for (id, name, f) in criteria {
        if only.is_some_and(|o| o != id) {
            continue;
        }
        let t = Instant::now();
        let v = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            verdict(false, format!("panicked: {msg}"))
        });
        let status = match (v.pass, KNOWN_FALSE.contains(&id)) {
            (true, _) => "PASS",
            (false, true) => "FAIL (claim false as stated)",
            (false, false) => {
                fatal += 1;
                "FAIL"
            }
        };
        println!(
            "criterion {id:>2} [{name}]: {status}: {} ({:.1} s)",
            v.detail,
            t.elapsed().as_secs_f64()
        );
    }
    if fatal > 0 {
        println!("{fatal} criteria failed");
        std::process::exit(1);
    }
}
