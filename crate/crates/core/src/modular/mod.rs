//! The modular invariant, the fundamental domain, Hecke cosets, values of
//! modular polynomials and class polynomials.

pub mod classpoly;
pub mod domain;
pub mod hecke;
pub mod jfunc;
pub mod modpoly;

pub use crate::quadforms::CmPoint;
pub use classpoly::{classpoly, ClassPolynomial};
pub use domain::{cosh_distance, fd_reduce, for_each_orbit_element, for_each_orbit_point, y1_distance, Mat2};
pub use hecke::{hecke_cosets, sigma1, Coset, HeckeCosetSet};
pub use jfunc::{j_coefficients, j_eval, j_eval_c64, j_eval_mp, j_of_cm, HPoint, JValue};
pub use modpoly::{modpoly_eval, ModpolyValue};
