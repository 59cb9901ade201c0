//! Parsing of CM points, discriminants and half-plane points from the command line.

use cmnorm::modular::HPoint;
use cmnorm::{CmPoint, Discriminant, QuadForm};
use num_complex::Complex64;

/// A discriminant (standing for its principal class) or an explicit form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CmSpec {
    Principal(Discriminant),
    Form(QuadForm),
}

impl CmSpec {
    pub fn discriminant(&self) -> Discriminant {
        match self {
            CmSpec::Principal(d) => *d,
            CmSpec::Form(f) => Discriminant::new(f.discriminant()).expect("form has a valid discriminant"),
        }
    }

    pub fn point(&self) -> CmPoint {
        let form = match self {
            CmSpec::Principal(d) => QuadForm::identity(*d),
            CmSpec::Form(f) => *f,
        };
        CmPoint::new(form).expect("validated on parse")
    }
}

pub fn parse_discriminant(s: &str) -> Result<Discriminant, String> {
    let d: i64 = s.trim().parse().map_err(|_| format!("not an integer: {s}"))?;
    Discriminant::new(d).map_err(|e| e.to_string())
}

pub fn parse_cm(s: &str) -> Result<CmSpec, String> {
    if s.contains(',') {
        let parts: Vec<i64> = s
            .split(',')
            .map(|p| p.trim().parse::<i64>())
            .collect::<Result<_, _>>()
            .map_err(|_| format!("form must be three integers a,b,c: {s}"))?;
        let [a, b, c] = parts[..] else {
            return Err(format!("form must be three integers a,b,c: {s}"));
        };
        let f = QuadForm::new(a, b, c).map_err(|e| e.to_string())?;
        CmPoint::new(f).map_err(|e| e.to_string())?;
        Ok(CmSpec::Form(f))
    } else {
        parse_discriminant(s).map(CmSpec::Principal)
    }
}

/// `x+yi`, `x-yi`, `yi`, `i`, `-i`... with `y > 0` required downstream.
pub fn parse_complex(s: &str) -> Result<Complex64, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || format!("not a complex number: {s}");
    let Some(body) = t.strip_suffix('i') else {
        return t.parse::<f64>().map(|x| Complex64::new(x, 0.0)).map_err(|_| bad());
    };
    // split at the last sign that does not start the string or follow an exponent
    let bytes = body.as_bytes();
    let cut = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match cut {
        Some(k) => (&body[..k], &body[k..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        x => x.parse::<f64>().map_err(|_| bad())?,
    };
    let re = re.parse::<f64>().map_err(|_| bad())?;
    Ok(Complex64::new(re, im))
}

/// A point for the Green's function: a CM spec or a complex number.
pub fn parse_hpoint(s: &str) -> Result<HPoint, String> {
    if s.contains(',') || !s.contains('i') {
        if let Ok(cm) = parse_cm(s) {
            return Ok(HPoint::Cm(cm.point()));
        }
    }
    let z = parse_complex(s)?;
    if !(z.im > 0.0) {
        return Err(format!("{s} is not in the upper half plane"));
    }
    Ok(HPoint::Complex(z))
}

pub fn parse_k(s: &str) -> Result<u32, String> {
    match s.parse::<u32>() {
        Ok(k @ (1 | 3 | 5 | 7)) => Ok(k),
        _ => Err(format!("k must be odd in {{1, 3, 5, 7}}, got {s}")),
    }
}
