use num_complex::Complex64;
use num_integer::Integer;
use serde::Serialize;

use super::domain::Mat2;
use crate::error::{Error, Result};

/// The upper triangular matrix `[[a, b], [0, d]]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Coset {
    pub a: i64,
    pub b: i64,
    pub d: i64,
}

impl Coset {
    pub fn matrix(&self) -> Mat2 {
        Mat2::new(self.a, self.b, 0, self.d)
    }

    pub fn apply(&self, z: Complex64) -> Complex64 {
        (z * self.a as f64 + self.b as f64) / self.d as f64
    }

    pub fn is_primitive(&self) -> bool {
        self.a.gcd(&self.b).gcd(&self.d) == 1
    }
}

/// Representatives of `SL_2(Z) \ M_m`, `M_m` the integer matrices of determinant `m`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HeckeCosetSet {
    pub m: u64,
    pub reps: Vec<Coset>,
}

impl HeckeCosetSet {
    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }
}

/// All `(a, b, d)` with `a d = m`, `0 <= b < d`, imprimitive ones included.
pub fn hecke_cosets(m: u64) -> Result<HeckeCosetSet> {
    if m == 0 || m > i64::MAX as u64 {
        return Err(Error::InvalidArgument(format!("m must be positive, got {m}")));
    }
    let m_i = m as i64;
    let reps = (1..=m_i)
        .filter(|a| m_i % a == 0)
        .flat_map(|a| {
            let d = m_i / a;
            (0..d).map(move |b| Coset { a, b, d })
        })
        .collect();
    Ok(HeckeCosetSet { m, reps })
}

pub fn sigma1(m: u64) -> u64 {
    (1..=m).filter(|d| m % d == 0).sum()
}
