//! The standard fundamental domain of `SL_2(Z)`, hyperbolic distance and
//! enumeration of orbit points inside a hyperbolic ball.

use num_complex::Complex64;
use num_integer::Integer;
use serde::Serialize;

use crate::numerics::mp::{self, RM};
use crate::numerics::MpComplex;

/// An integer 2x2 matrix `[[a, b], [c, d]]` acting by Moebius transformations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Mat2 {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2 {
        a: 1,
        b: 0,
        c: 0,
        d: 1,
    };

    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Self {
        Mat2 { a, b, c, d }
    }

    pub fn det(&self) -> i64 {
        self.a * self.d - self.b * self.c
    }

    pub fn mul(&self, o: &Mat2) -> Mat2 {
        Mat2 {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }

    pub fn apply(&self, z: Complex64) -> Complex64 {
        (z * self.a as f64 + self.b as f64) / (z * self.c as f64 + self.d as f64)
    }

    pub fn apply_mp(&self, z: &MpComplex, p: usize) -> MpComplex {
        let num = z
            .mul_real(&mp::from_i64(self.a, p), p)
            .add(&MpComplex::from_f64(self.b as f64, 0.0, p), p);
        let den = z
            .mul_real(&mp::from_i64(self.c, p), p)
            .add(&MpComplex::from_f64(self.d as f64, 0.0, p), p);
        num.div(&den, p)
    }
}

/// Whether `z` lies in the closed standard fundamental domain, up to `slack`.
pub fn in_fundamental_domain(z: Complex64, slack: f64) -> bool {
    z.im > 0.0 && z.re.abs() <= 0.5 + slack && z.norm_sqr() >= 1.0 - slack
}

/// Moves `z` into the standard fundamental domain; returns the image and the
/// `SL_2(Z)` matrix that maps `z` to it.
pub fn fd_reduce(z: Complex64) -> (Complex64, Mat2) {
    assert!(z.im > 0.0, "fd_reduce needs Im z > 0");
    let mut w = z;
    let mut g = Mat2::IDENTITY;
    for _ in 0..10_000 {
        let n = w.re.round();
        if n != 0.0 {
            w.re -= n;
            g = Mat2::new(1, -(n as i64), 0, 1).mul(&g);
        }
        if w.norm_sqr() < 1.0 - 1e-15 {
            w = -w.inv();
            g = Mat2::new(0, -1, 1, 0).mul(&g);
        } else {
            break;
        }
    }
    (w, g)
}

/// Reduces an arbitrary-precision point, steering with `f64` and applying the
/// resulting matrix exactly.
pub fn fd_reduce_mp(z: &MpComplex, p: usize) -> (MpComplex, Mat2) {
    let (_, g) = fd_reduce(z.to_c64());
    if g == Mat2::IDENTITY {
        (z.clone(), g)
    } else {
        (g.apply_mp(z, p), g)
    }
}

/// `cosh d(z1, z2) = 1 + |z1 - z2|^2 / (2 y1 y2)`.
pub fn cosh_distance(z1: Complex64, z2: Complex64) -> f64 {
    1.0 + (z1 - z2).norm_sqr() / (2.0 * z1.im * z2.im)
}

/// Calls `visit(gamma w, cosh d(z, gamma w))` once for every `gamma` in
/// `PSL_2(Z)` with `cosh d(z, gamma w) <= cutoff`.
///
/// Points stabilized by a nontrivial element are visited once per element,
/// matching sums over the group. The enumeration order is deterministic.
pub fn for_each_orbit_point(
    z: Complex64,
    w: Complex64,
    cutoff: f64,
    mut visit: impl FnMut(Complex64, f64),
) {
    for_each_orbit_element(z, w, cutoff, |_, p, t| visit(p, t));
}

/// As [`for_each_orbit_point`], also passing the element `gamma`.
pub fn for_each_orbit_element(
    z: Complex64,
    w: Complex64,
    cutoff: f64,
    mut visit: impl FnMut(Mat2, Complex64, f64),
) {
    if cutoff < 1.0 {
        return;
    }
    // cosh d <= T forces Im(gamma w) >= y_z (T - sqrt(T^2 - 1))
    let y_min = z.im * (cutoff - (cutoff * cutoff - 1.0).sqrt());
    let (u, v) = (w.re, w.im);
    let r2 = v / y_min;
    let c_max = (r2 / (v * v)).sqrt().floor() as i64;
    for c in 0..=c_max {
        let rem = r2 - (c as f64 * v).powi(2);
        if rem < 0.0 {
            continue;
        }
        let rad = rem.sqrt();
        let (d_lo, d_hi) = if c == 0 {
            (1, 1)
        } else {
            let cu = c as f64 * u;
            ((-cu - rad).ceil() as i64, (-cu + rad).floor() as i64)
        };
        for d in d_lo..=d_hi {
            if c.gcd(&d) != 1 {
                continue;
            }
            let e = d.extended_gcd(&c);
            let (a, b) = (e.x * e.gcd, -e.y * e.gcd);
            let g0 = Mat2::new(a, b, c, d).apply(w);
            let (x0, y) = (g0.re, g0.im);
            let span = 2.0 * z.im * y * (cutoff - 1.0) - (z.im - y).powi(2);
            if span < 0.0 {
                continue;
            }
            let s = span.sqrt();
            let n_lo = (z.re - x0 - s).ceil() as i64;
            let n_hi = (z.re - x0 + s).floor() as i64;
            for n in n_lo..=n_hi {
                let p = Complex64::new(x0 + n as f64, y);
                let t = cosh_distance(z, p);
                if t <= cutoff {
                    visit(Mat2::new(a + n * c, b + n * d, c, d), p, t);
                }
            }
        }
    }
}

/// `min_gamma d(z1, gamma z2)` over `SL_2(Z)`.
///
/// Both points are reduced; the reduced pair's own distance bounds the
/// minimum, and every orbit point within that bound is examined.
pub fn y1_distance(z1: Complex64, z2: Complex64) -> f64 {
    let (a, _) = fd_reduce(z1);
    let (b, _) = fd_reduce(z2);
    let bound = cosh_distance(a, b);
    let mut best = bound;
    for_each_orbit_point(a, b, bound * (1.0 + 1e-12) + 1e-12, |_, t| {
        if t < best {
            best = t;
        }
    });
    best.max(1.0).acosh()
}

/// Exact `cosh d` between two arbitrary-precision points.
pub fn cosh_distance_mp(z1: &MpComplex, z2: &MpComplex, p: usize) -> astro_float::BigFloat {
    let diff = z1.sub(z2, p).norm_sqr(p);
    let den = z1.im.mul(&z2.im, p, RM).mul(&mp::from_i64(2, p), p, RM);
    diff.div(&den, p, RM).add(&mp::from_i64(1, p), p, RM)
}
