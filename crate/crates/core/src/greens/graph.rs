use num_complex::Complex64;
use serde::Serialize;

use crate::cmcycles::CmCycle;
use crate::error::{Error, Result};
use crate::modular::domain::{cosh_distance, y1_distance};
use crate::modular::hecke::hecke_cosets;

/// Distance in `H^2` from `(z1, z2)` to the preimage of the Hecke graph `T_m`.
///
/// For fixed `gamma`, `min_z d(z1, z)^2 + d(z2, gamma z)^2` is
/// `d(gamma z1, z2)^2 / 2`, attained at the geodesic midpoint; so the distance
/// is `min over Gamma_m of d(z1, gamma z2) / sqrt 2`.
pub fn graph_distance(m: u64, z1: Complex64, z2: Complex64) -> Result<f64> {
    let cosets = hecke_cosets(m)?;
    let best = cosets
        .reps
        .iter()
        .map(|c| y1_distance(z1, c.apply(z2)))
        .fold(f64::INFINITY, f64::min);
    Ok(best / std::f64::consts::SQRT_2)
}

/// `d(z1, z)^2 + d(w, z)^2`, whose minimum over `z` is `d(z1, w)^2 / 2`.
pub fn midpoint_objective(z1: Complex64, w: Complex64, z: Complex64) -> f64 {
    let a = cosh_distance(z1, z).max(1.0).acosh();
    let b = cosh_distance(w, z).max(1.0).acosh();
    a * a + b * b
}

/// How much of a cycle lies within `epsilon` of `T_m`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GraphProximity {
    pub m: u64,
    pub epsilon: f64,
    /// `graph_distance` for each distinct pair, in cycle order.
    pub distances: Vec<f64>,
    /// Cycle points with distance below `epsilon`, counted with multiplicity.
    pub count: u64,
}

pub fn tm_count(cycle: &CmCycle, m: u64, epsilon: f64) -> Result<GraphProximity> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let mut distances = Vec::with_capacity(cycle.pairs.len());
    let mut count = 0;
    for pair in &cycle.pairs {
        let d = graph_distance(m, pair.z1.z(), pair.z2.z())?;
        if d < epsilon {
            count += pair.multiplicity as u64;
        }
        distances.push(d);
    }
    Ok(GraphProximity {
        m,
        epsilon,
        distances,
        count,
    })
}
