//! Shared test oracles: a derivative-free minimizer and a brute-force distance
//! to Hecke graphs.
#![allow(dead_code)]

use cmnorm::modular::domain::{cosh_distance, Mat2};
use num_complex::Complex64;
use rand::Rng;

/// Nelder-Mead on `R^2`.
pub fn nelder_mead(f: impl Fn([f64; 2]) -> f64, start: [f64; 2], step: f64) -> ([f64; 2], f64) {
    let mut pts = [start, [start[0] + step, start[1]], [start[0], start[1] + step]];
    let mut vals = pts.map(&f);
    for _ in 0..5000 {
        let mut idx = [0, 1, 2];
        idx.sort_by(|&i, &j| vals[i].total_cmp(&vals[j]));
        pts = idx.map(|i| pts[i]);
        vals = idx.map(|i| vals[i]);
        if (vals[2] - vals[0]).abs() <= 1e-16 * (1.0 + vals[0].abs()) {
            let spread = (pts[2][0] - pts[0][0]).abs() + (pts[2][1] - pts[0][1]).abs();
            if spread < 1e-10 {
                break;
            }
        }
        let c = [(pts[0][0] + pts[1][0]) / 2.0, (pts[0][1] + pts[1][1]) / 2.0];
        let at = |t: f64| [c[0] + t * (pts[2][0] - c[0]), c[1] + t * (pts[2][1] - c[1])];
        let r = at(-1.0);
        let fr = f(r);
        if fr < vals[0] {
            let e = at(-2.0);
            let fe = f(e);
            if fe < fr {
                pts[2] = e;
                vals[2] = fe;
            } else {
                pts[2] = r;
                vals[2] = fr;
            }
        } else if fr < vals[1] {
            pts[2] = r;
            vals[2] = fr;
        } else {
            let k = if fr < vals[2] { at(-0.5) } else { at(0.5) };
            let fk = f(k);
            if fk < vals[2].min(fr) {
                pts[2] = k;
                vals[2] = fk;
            } else {
                for i in 1..3 {
                    pts[i] = [(pts[i][0] + pts[0][0]) / 2.0, (pts[i][1] + pts[0][1]) / 2.0];
                    vals[i] = f(pts[i]);
                }
            }
        }
    }
    let best = (0..3).min_by(|&i, &j| vals[i].total_cmp(&vals[j])).unwrap();
    (pts[best], vals[best])
}

pub fn dist(z: Complex64, w: Complex64) -> f64 {
    cosh_distance(z, w).max(1.0).acosh()
}

/// `min over w of g(w)` for a function on the upper half plane, with `w = x + i e^u`
/// and restarts from the best point found.
pub fn minimize_h(g: impl Fn(Complex64) -> f64, start: Complex64) -> f64 {
    let f = |p: [f64; 2]| g(Complex64::new(p[0], p[1].exp()));
    let mut p = [start.re, start.im.ln()];
    let mut best = f64::INFINITY;
    for step in [0.2, 0.02, 0.002] {
        let (q, v) = nelder_mead(&f, p, step);
        if v < best {
            best = v;
            p = q;
        }
    }
    best
}

/// Integer matrices of determinant `m` with entries in `[-bound, bound]`, up to sign.
pub fn det_m_matrices(m: i64, bound: i64) -> Vec<Mat2> {
    let mut out = Vec::new();
    for a in -bound..=bound {
        for b in -bound..=bound {
            for c in -bound..=bound {
                for d in -bound..=bound {
                    let first = if a != 0 { a } else if b != 0 { b } else { c };
                    if a * d - b * c == m && first > 0 {
                        out.push(Mat2::new(a, b, c, d));
                    }
                }
            }
        }
    }
    out
}

/// `M^{-1} z` through the adjugate.
fn apply_inverse(g: &Mat2, z: Complex64) -> Complex64 {
    let adj = Mat2::new(g.d, -g.b, -g.c, g.a);
    adj.apply(z)
}

/// Distance in `H x H` from `(z1, z2)` to the union of graphs `{(w, M w)}` over
/// the given matrices, by direct minimization over `w`.
///
/// Candidates are pruned with `a^2 + b^2 >= (a + b)^2 / 2 >= d(z1, M^{-1} z2)^2 / 2`.
pub fn brute_graph_distance(z1: Complex64, z2: Complex64, mats: &[Mat2]) -> f64 {
    let mut cands: Vec<(f64, Complex64)> = mats
        .iter()
        .map(|g| {
            let w = apply_inverse(g, z2);
            (dist(z1, w), w)
        })
        .collect();
    cands.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut best = f64::INFINITY;
    for (lower, w) in cands {
        if lower * lower / 2.0 > best * (1.0 + 1e-9) {
            break;
        }
        let start = (z1 + w) / 2.0;
        let v = minimize_h(|p| dist(z1, p).powi(2) + dist(w, p).powi(2), start);
        best = best.min(v);
    }
    best.sqrt()
}

/// A point of the standard fundamental domain with height below `ymax`.
pub fn random_fd_point(rng: &mut impl Rng, ymax: f64) -> Complex64 {
    let x: f64 = rng.gen_range(-0.5..0.5);
    let y0 = (1.0 - x * x).sqrt();
    Complex64::new(x, rng.gen_range(y0..ymax))
}
