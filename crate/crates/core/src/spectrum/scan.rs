//! Size scans of the extremal decay rates.

use rayon::prelude::*;

use super::{assemble_heff, eigenmodes};
use crate::emfield::{DipoleOrientation, Point3};
use crate::error::{Error, Result};
use crate::geometry::{build_chain, build_ring, EmitterArray, PolarizationScheme};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ScanGeometry {
    Ring(PolarizationScheme),
    Chain(DipoleOrientation),
}

impl ScanGeometry {
    fn build(&self, n: usize, d: f64) -> Result<EmitterArray> {
        match *self {
            ScanGeometry::Ring(p) => build_ring(n, d, p, Point3::zeros(), 0.0),
            ScanGeometry::Chain(p) => build_chain(n, d, p),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayPoint {
    pub n: usize,
    /// Extremal collective decay rate, units of Γ0.
    pub rate: f64,
}

/// Most subradiant decay rate for each `n`, at fixed spacing `d = λ / lambda_over_d`.
///
/// Points are computed in parallel and returned in the order of `n_list`.
pub fn min_decay_scan(geometry: ScanGeometry, n_list: &[usize], lambda_over_d: f64) -> Result<Vec<DecayPoint>> {
    if n_list.is_empty() {
        return Err(Error::invalid("decay scan needs at least one emitter count"));
    }
    if !(lambda_over_d > 0.0 && lambda_over_d.is_finite()) {
        return Err(Error::invalid(format!("λ/d must be positive, got {lambda_over_d}")));
    }
    let d = 1.0 / lambda_over_d;
    n_list
        .par_iter()
        .map(|&n| {
            let spec = eigenmodes(&assemble_heff(&geometry.build(n, d)?)?)?;
            Ok(DecayPoint { n, rate: spec.min_decay_rate() })
        })
        .collect()
}

/// Brightest decay rate of a ring of fixed `radius` as emitters are added.
pub fn brightest_mode_scan(polarization: PolarizationScheme, radius: f64, n_list: &[usize]) -> Result<Vec<DecayPoint>> {
    if n_list.is_empty() {
        return Err(Error::invalid("decay scan needs at least one emitter count"));
    }
    if n_list.iter().any(|&n| n < 2) {
        return Err(Error::invalid("a fixed-radius ring needs at least two emitters"));
    }
    n_list
        .par_iter()
        .map(|&n| {
            let d = 2.0 * radius * (std::f64::consts::PI / n as f64).sin();
            let ring = build_ring(n, d, polarization, Point3::zeros(), 0.0)?;
            let spec = eigenmodes(&assemble_heff(&ring)?)?;
            Ok(DecayPoint { n, rate: spec.max_decay_rate() })
        })
        .collect()
}
