//! Independent oracles for reduction, composition and class numbers.

use std::collections::{HashSet, VecDeque};

use cmnorm::quadforms::{
    compose, enumerate_reduced, inverse, project_class, reduce, Discriminant, QuadForm,
};
use proptest::prelude::*;

fn valid_discriminants(limit: i64) -> impl Iterator<Item = i64> {
    (1..=limit).map(|n| -n).filter(|d| matches!(d.rem_euclid(4), 0 | 1))
}

/// Kronecker symbol (d / n) for n > 0.
fn kronecker(d: i64, mut n: i64) -> i64 {
    let mut result = 1;
    while n % 2 == 0 {
        n /= 2;
        match d.rem_euclid(8) {
            1 | 7 => {}
            3 | 5 => result = -result,
            _ => return 0,
        }
    }
    // Jacobi symbol (d / n) for odd n
    let mut a = d.rem_euclid(n);
    let mut m = n;
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            if matches!(m % 8, 3 | 5) {
                result = -result;
            }
        }
        std::mem::swap(&mut a, &mut m);
        if a % 4 == 3 && m % 4 == 3 {
            result = -result;
        }
        a %= m;
    }
    if m == 1 {
        result
    } else {
        0
    }
}

/// Class number from the analytic formula for fundamental discriminants and
/// the conductor formula for orders.
fn class_number_formula(d: i64) -> i64 {
    let disc = Discriminant::new(d).unwrap();
    let dk = disc.fundamental();
    let f = disc.conductor();
    let wk = match dk {
        -3 => 6,
        -4 => 4,
        _ => 2,
    };
    let s: i64 = (1..-dk).map(|a| kronecker(dk, a) * a).sum();
    let hk = -wk * s / (2 * -dk);
    if f == 1 {
        return hk;
    }
    // h(f^2 dK) = h(dK) f / [O_K^* : O^*] prod_{p | f} (1 - (dK/p)/p)
    let mut num = hk * f;
    let mut den = wk / 2;
    let mut n = f;
    let mut p = 2;
    while n > 1 {
        if n % p == 0 {
            while n % p == 0 {
                n /= p;
            }
            num *= p - kronecker(dk, p);
            den *= p;
        }
        p += 1;
    }
    assert_eq!(num % den, 0);
    num / den
}

#[test]
fn class_numbers_match_the_analytic_formula() {
    for d in valid_discriminants(10_000) {
        let h = enumerate_reduced(Discriminant::new(d).unwrap()).order() as i64;
        assert_eq!(h, class_number_formula(d), "d = {d}");
    }
}

/// Finds the reduced form in the orbit of `f` under S and T^{+-1}.
fn reduce_by_orbit(f: QuadForm) -> QuadForm {
    let bound = 4 * (f.a.abs() + f.b.abs() + f.c.abs());
    let mut seen = HashSet::new();
    let mut queue = VecDeque::from([f]);
    while let Some(g) = queue.pop_front() {
        if !seen.insert(g) {
            continue;
        }
        if g.is_reduced() {
            return g;
        }
        let s = QuadForm { a: g.c, b: -g.b, c: g.a };
        let t = QuadForm { a: g.a, b: g.b + 2 * g.a, c: g.a + g.b + g.c };
        let ti = QuadForm { a: g.a, b: g.b - 2 * g.a, c: g.a - g.b + g.c };
        for h in [s, t, ti] {
            if h.a.abs() + h.b.abs() + h.c.abs() <= bound {
                queue.push_back(h);
            }
        }
    }
    panic!("orbit search failed for {f}");
}

/// Ideal `[a, (-b + sqrt d)/2]` in the basis `1, w` with `w = (d + sqrt d)/2`,
/// multiplied as lattices and brought back to a form.
fn compose_by_ideals(f1: QuadForm, f2: QuadForm) -> QuadForm {
    let d = f1.discriminant() as i128;
    // element x + y w
    type El = (i128, i128);
    let mul = |p: El, q: El| -> El {
        // w^2 = d w - (d^2 - d)/4
        let n = (d * d - d) / 4;
        (p.0 * q.0 - p.1 * q.1 * n, p.0 * q.1 + p.1 * q.0 + p.1 * q.1 * d)
    };
    let basis = |f: QuadForm| -> [El; 2] {
        [(f.a as i128, 0), ((-(f.b as i128) - d) / 2, 1)]
    };
    let (u, v) = (basis(f1), basis(f2));
    let mut rows: Vec<El> =
        u.iter().flat_map(|&x| v.iter().map(move |&y| mul(x, y))).collect();
    // row-reduce the w-coordinates until a single row carries one
    loop {
        let mut nz: Vec<usize> = (0..rows.len()).filter(|&i| rows[i].1 != 0).collect();
        if nz.len() <= 1 {
            break;
        }
        nz.sort_by_key(|&i| rows[i].1.abs());
        let (i, j) = (nz[0], nz[1]);
        let k = rows[j].1 / rows[i].1;
        rows[j] = (rows[j].0 - k * rows[i].0, rows[j].1 - k * rows[i].1);
    }
    let pivot = *rows.iter().find(|r| r.1 != 0).unwrap();
    let p = rows.iter().filter(|r| r.1 == 0).fold(0, |g, r| gcd(g, r.0));
    let (q, r) = if pivot.1 < 0 { (-pivot.0, -pivot.1) } else { pivot };
    let q = q.rem_euclid(p);
    // lattice = r [p/r, q/r + w]; q/r + w = (-B + sqrt d)/2 with B = -d - 2q/r
    assert_eq!(p % r, 0);
    assert_eq!(q % r, 0);
    let a = p / r;
    let b = -d - 2 * (q / r);
    let b = b.rem_euclid(2 * a);
    let c = (b * b - d) / (4 * a);
    reduce(&QuadForm { a: a as i64, b: b as i64, c: c as i64 })
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

#[test]
fn composition_matches_ideal_multiplication() {
    for d in valid_discriminants(600) {
        let g = enumerate_reduced(Discriminant::new(d).unwrap());
        for f1 in g.forms() {
            for f2 in g.forms() {
                assert_eq!(
                    compose(f1, f2).unwrap(),
                    compose_by_ideals(*f1, *f2),
                    "d = {d}, {f1} * {f2}"
                );
            }
        }
    }
    let f = QuadForm { a: 2, b: 1, c: 3 };
    assert_eq!(compose_by_ideals(f, f), QuadForm { a: 2, b: -1, c: 3 });
}

#[test]
fn group_tables_are_associative_and_commutative() {
    for d in valid_discriminants(3000) {
        let g = enumerate_reduced(Discriminant::new(d).unwrap());
        let h = g.order();
        if h > 16 {
            continue;
        }
        for i in 0..h {
            assert_eq!(g.compose(i, g.inverse(i)), 0);
            for j in 0..h {
                assert_eq!(g.compose(i, j), g.compose(j, i));
                for k in 0..h {
                    assert_eq!(g.compose(g.compose(i, j), k), g.compose(i, g.compose(j, k)));
                }
            }
        }
    }
}

#[test]
fn projection_is_a_homomorphism_for_small_discriminants() {
    for dp in valid_discriminants(200) {
        let src_disc = Discriminant::new(dp).unwrap();
        let src = enumerate_reduced(src_disc);
        let f = src_disc.conductor();
        for fi in (1..=f).filter(|x| f % x == 0) {
            let target = Discriminant::new(fi * fi * src_disc.fundamental()).unwrap();
            let img: Vec<_> =
                src.forms().iter().map(|s| project_class(s, target).unwrap()).collect();
            for i in 0..src.order() {
                for j in 0..src.order() {
                    assert_eq!(
                        img[src.compose(i, j)],
                        compose(&img[i], &img[j]).unwrap(),
                        "{dp} -> {}",
                        target.value()
                    );
                }
            }
        }
    }
}

fn arb_form() -> impl Strategy<Value = QuadForm> {
    (1i64..60, -80i64..80, 1i64..60).prop_filter_map("positive definite", |(a, b, c)| {
        let f = QuadForm { a, b, c };
        (f.discriminant() < 0).then_some(f)
    })
}

proptest! {
    #[test]
    fn reduce_agrees_with_orbit_search(f in arb_form()) {
        let r = reduce(&f);
        prop_assert!(r.is_reduced());
        prop_assert_eq!(r.discriminant(), f.discriminant());
        prop_assert_eq!(r, reduce_by_orbit(f));
    }

    #[test]
    fn inverse_is_an_involution(f in arb_form()) {
        let r = reduce(&f);
        prop_assert_eq!(inverse(&inverse(&r)), r);
    }

    #[test]
    fn reduced_points_lie_in_the_fundamental_domain(f in arb_form()) {
        let r = reduce(&f);
        if r.is_primitive() {
            let z = cmnorm::quadforms::cm_point(&r).unwrap().z();
            prop_assert!(z.re.abs() <= 0.5 + 1e-15);
            prop_assert!(z.norm() >= 1.0 - 1e-15);
        }
    }
}
