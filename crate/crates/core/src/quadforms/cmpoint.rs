use num_complex::Complex64;
use num_integer::Integer;
use serde::Serialize;

use super::{reduce, Discriminant, QuadForm};
use crate::error::{Error, Result};
use crate::numerics::mp::{self, RM};
use crate::numerics::MpComplex;

/// The root `z = (-b + i sqrt|d|) / (2a)` of a primitive positive definite
/// form, kept exactly as the form itself.
///
/// Two CM points are `SL_2(Z)`-equivalent exactly when their reduced forms
/// coincide, which is what makes zero detection in products of
/// `j(z1) - j(z2)` exact.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct CmPoint {
    form: QuadForm,
}

/// The CM point of a primitive positive definite form.
pub fn cm_point(form: &QuadForm) -> Result<CmPoint> {
    CmPoint::new(*form)
}

impl CmPoint {
    pub fn new(form: QuadForm) -> Result<Self> {
        let f = QuadForm::new(form.a, form.b, form.c)?;
        if !f.is_primitive() {
            return Err(Error::InvalidForm {
                a: f.a,
                b: f.b,
                c: f.c,
                reason: "not primitive",
            });
        }
        Ok(CmPoint { form: f })
    }

    pub fn form(&self) -> QuadForm {
        self.form
    }

    pub fn discriminant(&self) -> Discriminant {
        Discriminant::new(self.form.discriminant()).expect("forms have valid discriminants")
    }

    pub fn z(&self) -> Complex64 {
        let a2 = 2.0 * self.form.a as f64;
        let d = self.form.discriminant() as f64;
        Complex64::new(-self.form.b as f64 / a2, (-d).sqrt() / a2)
    }

    pub fn z_mp(&self, p: usize) -> MpComplex {
        let a2 = mp::from_i64(2 * self.form.a, p);
        let re = mp::from_i64(-self.form.b, p).div(&a2, p, RM);
        let im = mp::from_i64(-self.form.discriminant(), p)
            .sqrt(p, RM)
            .div(&a2, p, RM);
        MpComplex::new(re, im)
    }

    pub fn is_reduced(&self) -> bool {
        self.form.is_reduced()
    }

    /// The `SL_2(Z)`-equivalent point in the standard fundamental domain.
    pub fn reduced(&self) -> CmPoint {
        CmPoint {
            form: reduce(&self.form),
        }
    }

    /// `-conj(z)`, the root of `(a, -b, c)`.
    pub fn neg_conj(&self) -> CmPoint {
        CmPoint {
            form: QuadForm {
                a: self.form.a,
                b: -self.form.b,
                c: self.form.c,
            },
        }
    }

    /// `(alpha z + beta) / delta` for `alpha, delta > 0`.
    ///
    /// The image is a root of `(a delta, alpha b - 2 a beta, f(beta, -alpha) / delta)`
    /// of discriminant `alpha^2 d`, scaled to integral and then primitive.
    pub fn apply_upper(&self, alpha: i64, beta: i64, delta: i64) -> Result<CmPoint> {
        if alpha <= 0 || delta <= 0 {
            return Err(Error::InvalidArgument(format!(
                "upper triangular action needs positive diagonal, got ({alpha}, {beta}, {delta})"
            )));
        }
        let (a, b, c) = (
            self.form.a as i128,
            self.form.b as i128,
            self.form.c as i128,
        );
        let (al, be, de) = (alpha as i128, beta as i128, delta as i128);
        let a0 = a * de;
        let b0 = al * b - 2 * a * be;
        let c_num = a * be * be - b * al * be + c * al * al;
        let k = de / de.gcd(&c_num);
        let (na, nb, nc) = (k * a0, k * b0, k * c_num / de);
        let g = na.gcd(&nb).gcd(&nc);
        let narrow = |x: i128| i64::try_from(x / g).map_err(|_| Error::Overflow("CM point image"));
        CmPoint::new(QuadForm {
            a: narrow(na)?,
            b: narrow(nb)?,
            c: narrow(nc)?,
        })
    }
}
