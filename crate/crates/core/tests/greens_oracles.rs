//! Oracles for Hecke-graph distances, lattice tails and the Green's functions.

mod common;

use cmnorm::greens::{
    g_k_m, graph_distance, lattice_sums, midpoint_objective, orbit_elements, g_s_over, LegendreKernel,
    COUNT_LINEAR, COUNT_SQRT,
};
use cmnorm::modular::domain::fd_reduce;
use cmnorm::modular::{modpoly_eval, HPoint};
use cmnorm::PrecisionContext;
use common::{brute_graph_distance, det_m_matrices, dist, minimize_h, random_fd_point};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn ctx() -> PrecisionContext {
    PrecisionContext::default()
}

#[test]
fn graph_distance_matches_direct_minimization() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mats: Vec<_> = (1..=4).map(|m| det_m_matrices(m, 8)).collect();
    for i in 0..40 {
        let m = 1 + i % 4;
        let z1 = random_fd_point(&mut rng, 2.5);
        let z2 = random_fd_point(&mut rng, 2.5);
        let got = graph_distance(m as u64, z1, z2).unwrap();
        let want = brute_graph_distance(z1, z2, &mats[m - 1]);
        assert!(
            (got - want).abs() <= 1e-6 * want.max(1e-3),
            "m = {m}, {z1}, {z2}: {got} vs {want}"
        );
    }
}

#[test]
fn midpoint_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..40 {
        let z1 = random_fd_point(&mut rng, 3.0);
        let w = random_fd_point(&mut rng, 3.0) + 0.7;
        let min = minimize_h(|z| midpoint_objective(z1, w, z), (z1 + w) / 2.0);
        let want = dist(z1, w).powi(2) / 2.0;
        assert!((min - want).abs() <= 1e-9 * want.max(1e-6), "{z1} {w}: {min} vs {want}");
    }
}

#[test]
fn orbit_count_stays_under_the_envelope() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst: f64 = 0.0;
    for _ in 0..30 {
        let z1 = random_fd_point(&mut rng, 4.0);
        let z2 = random_fd_point(&mut rng, 4.0);
        let y = z1.im.max(z2.im);
        let mut t: f64 = 2.0;
        while t <= 4096.0 {
            let n = orbit_elements(z1, z2, t).len() as f64;
            let env = COUNT_LINEAR * t + COUNT_SQRT * y * t.sqrt();
            worst = worst.max(n / env);
            t *= 2.0;
        }
    }
    // the constants are twice the calibrated ones
    assert!(worst <= 0.75, "count reached {worst} of the envelope");
}

#[test]
fn doubling_the_cutoff_stays_within_the_tail() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for s in [1.5, 2.0, 3.0, 4.5, 7.0] {
        let k = LegendreKernel::new(s, &ctx()).unwrap();
        for _ in 0..4 {
            let z1 = random_fd_point(&mut rng, 2.0);
            let z2 = random_fd_point(&mut rng, 2.0);
            let y = z1.im.max(z2.im);
            let far = orbit_elements(z1, z2, 8192.0);
            let total = g_s_over(&k, z1, z2, &far).unwrap();
            for t in [16.0, 64.0, 256.0, 1024.0] {
                let near = orbit_elements(z1, z2, t);
                let doubled = orbit_elements(z1, z2, 2.0 * t);
                let a = g_s_over(&k, z1, z2, &near).unwrap();
                let b = g_s_over(&k, z1, z2, &doubled).unwrap();
                let tail = k.tail_bound(t, y).unwrap();
                assert!((a - b).abs() <= tail, "s = {s}, T = {t}: {} > {tail}", (a - b).abs());
                assert!((a - total).abs() <= tail, "s = {s}, T = {t}");
            }
        }
    }
}

#[test]
fn lattice_sum_error_covers_a_longer_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (s, budget) in [(1.5, 0.2), (2.0, 1e-3), (3.0, 1e-5), (5.0, 1e-8)] {
        let k = LegendreKernel::new(s, &ctx()).unwrap();
        for _ in 0..3 {
            let z1 = random_fd_point(&mut rng, 2.0);
            let z2 = random_fd_point(&mut rng, 2.0);
            let sum = lattice_sums(&[k.clone()], z1, z2, budget).unwrap()[0];
            let long = g_s_over(&k, z1, z2, &orbit_elements(z1, z2, 16.0 * sum.cutoff)).unwrap();
            assert!((sum.value - long).abs() <= sum.error, "s = {s}");
        }
    }
}

#[test]
fn higher_green_functions_are_symmetric() {
    let z1 = Complex64::new(0.17, 1.21);
    let z2 = Complex64::new(-0.36, 1.05);
    for m in 1..=4u64 {
        for k in [3, 5] {
            let a = g_k_m(k, m, &HPoint::Complex(z1), &HPoint::Complex(z2), &ctx()).unwrap();
            let b = g_k_m(k, m, &HPoint::Complex(z2), &HPoint::Complex(z1), &ctx()).unwrap();
            assert!((a.value - b.value).abs() <= a.error + b.error, "k = {k}, m = {m}");
        }
    }
}

#[test]
fn green_one_is_the_log_of_the_modular_polynomial() {
    let z1 = HPoint::Complex(Complex64::new(0.11, 1.3));
    let z2 = HPoint::Complex(Complex64::new(-0.27, 0.99));
    for m in 1..=6u64 {
        let g = g_k_m(1, m, &z1, &z2, &ctx()).unwrap();
        let v = modpoly_eval(m, &z1, &z2, &ctx()).unwrap();
        let want = 2.0 * v.log2_abs * std::f64::consts::LN_2;
        assert!((g.value - want).abs() <= g.error + 1e-12 * want.abs(), "m = {m}");
        assert_eq!(g.terms.len() as u64, cmnorm::modular::sigma1(m));
    }
}

#[test]
fn green_functions_are_invariant() {
    let z1 = Complex64::new(0.23, 1.4);
    let z2 = Complex64::new(-0.1, 1.1);
    let (r2, _) = fd_reduce(-1.0 / z2 + 3.0);
    for k in [1, 3] {
        let a = g_k_m(k, 2, &HPoint::Complex(z1), &HPoint::Complex(z2), &ctx()).unwrap();
        let b = g_k_m(k, 2, &HPoint::Complex(z1 - 2.0), &HPoint::Complex(-1.0 / z2 + 3.0), &ctx()).unwrap();
        assert!((a.value - b.value).abs() <= a.error + b.error + 1e-9, "k = {k}");
        assert!((r2 - z2).norm() < 1e-12);
    }
}
