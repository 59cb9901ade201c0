//! Positive definite binary quadratic forms, class groups of imaginary
//! quadratic orders and the projection between nested orders.

mod cmpoint;

use std::collections::HashMap;
use std::fmt;

use num_integer::Integer;
use serde::Serialize;

use crate::error::{Error, Result};

pub use cmpoint::{cm_point, CmPoint};

/// A negative discriminant `d = f^2 d_K`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Discriminant {
    d: i64,
    fundamental: i64,
    conductor: i64,
}

impl Discriminant {
    pub fn new(d: i64) -> Result<Self> {
        if d >= 0 || !matches!(d.rem_euclid(4), 0 | 1) {
            return Err(Error::InvalidDiscriminant(d));
        }
        let (mut square, mut free) = (1i64, 1i64);
        for (p, e) in factor_small(d.unsigned_abs()) {
            let p = p as i64;
            square *= p.pow(e / 2);
            if e % 2 == 1 {
                free *= p;
            }
        }
        let (fundamental, conductor) = if (-free).rem_euclid(4) == 1 {
            (-free, square)
        } else {
            (-4 * free, square / 2)
        };
        Ok(Discriminant {
            d,
            fundamental,
            conductor,
        })
    }

    pub fn value(&self) -> i64 {
        self.d
    }

    /// The fundamental discriminant `d_K`.
    pub fn fundamental(&self) -> i64 {
        self.fundamental
    }

    /// The conductor `f` with `d = f^2 d_K`.
    pub fn conductor(&self) -> i64 {
        self.conductor
    }

    pub fn is_fundamental(&self) -> bool {
        self.conductor == 1
    }

    /// Number of units of the order.
    pub fn unit_count(&self) -> u32 {
        match self.d {
            -3 => 6,
            -4 => 4,
            _ => 2,
        }
    }
}

impl fmt::Display for Discriminant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.d)
    }
}

impl TryFrom<i64> for Discriminant {
    type Error = Error;
    fn try_from(d: i64) -> Result<Self> {
        Discriminant::new(d)
    }
}

/// Trial-division factorization, for the small integers met here.
pub(crate) fn factor_small(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// The form `a x^2 + b x y + c y^2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct QuadForm {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl fmt::Display for QuadForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.a, self.b, self.c)
    }
}

impl QuadForm {
    /// A positive definite form.
    pub fn new(a: i64, b: i64, c: i64) -> Result<Self> {
        let f = QuadForm { a, b, c };
        let d = b as i128 * b as i128 - 4 * a as i128 * c as i128;
        if a <= 0 || d >= 0 {
            return Err(Error::InvalidForm {
                a,
                b,
                c,
                reason: "not positive definite",
            });
        }
        if d < i64::MIN as i128 {
            return Err(Error::Overflow("form discriminant"));
        }
        Ok(f)
    }

    /// The form `(a, b, (b^2 - d)/(4a))`.
    pub fn from_ab(a: i64, b: i64, d: i64) -> Result<Self> {
        let num = b as i128 * b as i128 - d as i128;
        let den = 4 * a as i128;
        if a <= 0 || num % den != 0 {
            return Err(Error::InvalidForm {
                a,
                b,
                c: 0,
                reason: "b^2 - d is not divisible by 4a",
            });
        }
        QuadForm::new(a, b, narrow(num / den)?)
    }

    pub fn discriminant(&self) -> i64 {
        self.b * self.b - 4 * self.a * self.c
    }

    pub fn eval(&self, x: i64, y: i64) -> i64 {
        self.a * x * x + self.b * x * y + self.c * y * y
    }

    pub fn is_primitive(&self) -> bool {
        self.a.gcd(&self.b).gcd(&self.c) == 1
    }

    pub fn is_reduced(&self) -> bool {
        let (a, b, c) = (self.a, self.b, self.c);
        b.abs() <= a && a <= c && !((b.abs() == a || a == c) && b < 0)
    }

    /// The principal form of discriminant `d`.
    pub fn identity(d: Discriminant) -> QuadForm {
        let d = d.value();
        let b = d.rem_euclid(2);
        QuadForm {
            a: 1,
            b,
            c: (b * b - d) / 4,
        }
    }

    pub fn reduce(&self) -> QuadForm {
        reduce(self)
    }

    pub fn inverse(&self) -> QuadForm {
        inverse(self)
    }

    pub fn compose(&self, other: &QuadForm) -> Result<QuadForm> {
        compose(self, other)
    }

    /// The form `f(p x + q y, r x + s y)`.
    pub fn transform(&self, p: i64, q: i64, r: i64, s: i64) -> Result<QuadForm> {
        let (a, b, c) = (self.a as i128, self.b as i128, self.c as i128);
        let (p, q, r, s) = (p as i128, q as i128, r as i128, s as i128);
        let na = a * p * p + b * p * r + c * r * r;
        let nb = 2 * a * p * q + b * (p * s + q * r) + 2 * c * r * s;
        let nc = a * q * q + b * q * s + c * s * s;
        QuadForm::new(narrow(na)?, narrow(nb)?, narrow(nc)?)
    }
}

fn narrow(x: i128) -> Result<i64> {
    i64::try_from(x).map_err(|_| Error::Overflow("form coefficient"))
}

/// The reduced form equivalent to `f` under `SL_2(Z)`.
pub fn reduce(f: &QuadForm) -> QuadForm {
    let d = f.discriminant() as i128;
    let (mut a, mut b, mut c) = (f.a as i128, f.b as i128, f.c as i128);
    loop {
        if !(-a < b && b <= a) {
            let mut r = b.rem_euclid(2 * a);
            if r > a {
                r -= 2 * a;
            }
            b = r;
            c = (b * b - d) / (4 * a);
        }
        if a > c {
            (a, b, c) = (c, -b, a);
            continue;
        }
        if a == c && b < 0 {
            b = -b;
        }
        break;
    }
    QuadForm {
        a: a as i64,
        b: b as i64,
        c: c as i64,
    }
}

/// The inverse class, `reduce((a, -b, c))`.
pub fn inverse(f: &QuadForm) -> QuadForm {
    reduce(&QuadForm {
        a: f.a,
        b: -f.b,
        c: f.c,
    })
}

fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    let e = a.extended_gcd(&b);
    (e.gcd, e.x, e.y)
}

/// Dirichlet composition of two primitive forms of equal discriminant,
/// returned reduced.
pub fn compose(f1: &QuadForm, f2: &QuadForm) -> Result<QuadForm> {
    let d1 = f1.discriminant();
    let d2 = f2.discriminant();
    if d1 != d2 {
        return Err(Error::DiscriminantMismatch(d1, d2));
    }
    let d = d1 as i128;
    let (a1, b1) = (f1.a as i128, f1.b as i128);
    let (a2, b2) = (f2.a as i128, f2.b as i128);
    let s = (b1 + b2) / 2;
    let (g, x1, y1) = ext_gcd(a1, a2);
    let (e, x2, w) = ext_gcd(g, s);
    let (u, v) = (x1 * x2, y1 * x2);
    let big_a = a1 * a2 / (e * e);
    let big_b = (a1 * u * b2 + a2 * v * b1 + w * (b1 * b2 + d) / 2) / e;
    let big_b = big_b.rem_euclid(2 * big_a);
    let big_c = (big_b * big_b - d) / (4 * big_a);
    Ok(reduce(&QuadForm {
        a: narrow(big_a)?,
        b: narrow(big_b)?,
        c: narrow(big_c)?,
    }))
}

/// `Cl(d)` as its list of reduced primitive forms; the principal form comes first.
#[derive(Clone, Debug)]
pub struct ClassGroup {
    discriminant: Discriminant,
    forms: Vec<QuadForm>,
    index: HashMap<QuadForm, usize>,
}

impl ClassGroup {
    pub fn discriminant(&self) -> Discriminant {
        self.discriminant
    }

    pub fn order(&self) -> usize {
        self.forms.len()
    }

    pub fn forms(&self) -> &[QuadForm] {
        &self.forms
    }

    pub fn identity(&self) -> QuadForm {
        self.forms[0]
    }

    pub fn identity_index(&self) -> usize {
        0
    }

    /// Position of the class of `f` (reduced first).
    pub fn index_of(&self, f: &QuadForm) -> Option<usize> {
        self.index.get(&reduce(f)).copied()
    }

    pub fn compose(&self, i: usize, j: usize) -> usize {
        let f = compose(&self.forms[i], &self.forms[j]).expect("same discriminant");
        self.index[&f]
    }

    pub fn inverse(&self, i: usize) -> usize {
        self.index[&inverse(&self.forms[i])]
    }
}

/// All reduced primitive forms of discriminant `d`.
pub fn enumerate_reduced(d: Discriminant) -> ClassGroup {
    let dv = d.value();
    let mut forms = Vec::new();
    let mut a = 1i64;
    while 3 * a * a <= -dv {
        for b in (-a + 1..=a).rev() {
            if (b * b - dv) % (4 * a) != 0 {
                continue;
            }
            let c = (b * b - dv) / (4 * a);
            let f = QuadForm { a, b, c };
            if f.is_reduced() && f.is_primitive() {
                forms.push(f);
            }
        }
        a += 1;
    }
    let index = forms.iter().enumerate().map(|(i, f)| (*f, i)).collect();
    ClassGroup {
        discriminant: d,
        forms,
        index,
    }
}

/// Image of the class of `form` (discriminant `d' = g^2 d_i`) under
/// `Cl(d') -> Cl(d_i)`, the map sending an ideal to the ideal it generates
/// in the larger order.
///
/// A representative `(a, b, c)` with `gcd(a, g) = 1` is found by evaluating
/// the form at small coprime vectors; its image is `(a, b*, .)` with
/// `g b* = b (mod 2a)` and `b*^2 = d_i (mod 4a)`.
pub fn project_class(form: &QuadForm, target: Discriminant) -> Result<QuadForm> {
    let source = Discriminant::new(form.discriminant())?;
    if source.fundamental() != target.fundamental()
        || source.conductor() % target.conductor() != 0
    {
        return Err(Error::InvalidArgument(format!(
            "discriminant {} does not lie over {}",
            source, target
        )));
    }
    let g = source.conductor() / target.conductor();
    let rep = coprime_representative(form, g)?;
    let (a, b) = (rep.a as i128, rep.b as i128);
    let di = target.value() as i128;
    let m = 2 * a;
    let bstar = (0..m)
        .find(|&t| (g as i128 * t - b).rem_euclid(m) == 0 && (t * t - di).rem_euclid(4 * a) == 0)
        .expect("a form coprime to the relative conductor has a lift");
    Ok(reduce(&QuadForm::from_ab(rep.a, bstar as i64, target.value())?))
}

/// An equivalent form whose first coefficient is prime to `g`.
fn coprime_representative(form: &QuadForm, g: i64) -> Result<QuadForm> {
    if form.a.gcd(&g) == 1 {
        return Ok(*form);
    }
    for bound in 1..=64i64 {
        for x in -bound..=bound {
            for y in [-bound, bound] {
                if let Some(f) = try_vector(form, g, x, y)? {
                    return Ok(f);
                }
                if let Some(f) = try_vector(form, g, y, x)? {
                    return Ok(f);
                }
            }
        }
    }
    Err(Error::InvalidArgument(format!(
        "no representative of {form} prime to {g} found"
    )))
}

fn try_vector(form: &QuadForm, g: i64, x: i64, y: i64) -> Result<Option<QuadForm>> {
    if x.gcd(&y) != 1 {
        return Ok(None);
    }
    if form.eval(x, y).gcd(&g) != 1 {
        return Ok(None);
    }
    // complete (x, y) to a matrix [[x, r], [y, s]] of determinant 1
    let e = x.extended_gcd(&y);
    let (s, r) = (e.x * e.gcd, -e.y * e.gcd);
    form.transform(x, r, y, s).map(Some)
}
