//! Radiated field and intensity of a single-excitation state.
//!
//! In the single-excitation manifold the positive-frequency field is
//! `E⁺(r) = Σ_i G(r − r_i)·p_i c_i`, with the dimensional prefactor
//! `|℘| k0² / ε0` set to one, so intensities are in arbitrary but consistent units.

use nalgebra::Vector3;
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::emfield::{green_tensor, Point3};
use crate::error::{Error, Result};
use crate::geometry::EmitterArray;
use crate::spectrum::ExcitationState;

/// Plane on which a grid is laid out. `u`/`v` are the in-plane coordinates.
#[derive(Clone, Debug, PartialEq)]
pub enum Plane {
    /// `u = x`, `v = y` at fixed `z`.
    Xy { z: f64 },
    /// `u = x`, `v = z` at fixed `y`.
    Xz { y: f64 },
    /// `u = y`, `v = z` at fixed `x`.
    Yz { x: f64 },
    /// `origin + u·u_axis + v·v_axis`.
    Custom { origin: Point3, u_axis: Point3, v_axis: Point3 },
}

impl Plane {
    pub fn point(&self, u: f64, v: f64) -> Point3 {
        match self {
            Plane::Xy { z } => Point3::new(u, v, *z),
            Plane::Xz { y } => Point3::new(u, *y, v),
            Plane::Yz { x } => Point3::new(*x, u, v),
            Plane::Custom { origin, u_axis, v_axis } => origin + u_axis * u + v_axis * v,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    pub plane: Plane,
    pub u_range: (f64, f64),
    pub v_range: (f64, f64),
    /// Points along `u` and `v`.
    pub resolution: (usize, usize),
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        let (nu, nv) = self.resolution;
        if nu < 2 || nv < 2 {
            return Err(Error::invalid(format!("grid needs at least 2 points per axis, got {nu}×{nv}")));
        }
        for (name, (lo, hi)) in [("u", self.u_range), ("v", self.v_range)] {
            if !(lo.is_finite() && hi.is_finite() && hi > lo) {
                return Err(Error::invalid(format!("degenerate {name} extent [{lo}, {hi}]")));
            }
        }
        if let Plane::Custom { u_axis, v_axis, .. } = &self.plane {
            if u_axis.cross(v_axis).norm() == 0.0 {
                return Err(Error::invalid("custom plane axes are parallel"));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.resolution.0 * self.resolution.1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// In-plane coordinates of flat index `idx` (row-major, `u` fastest).
    pub fn coords(&self, idx: usize) -> (f64, f64) {
        let (nu, nv) = self.resolution;
        let (iu, iv) = (idx % nu, idx / nu);
        let lerp = |(lo, hi): (f64, f64), i: usize, n: usize| lo + (hi - lo) * i as f64 / (n - 1) as f64;
        (lerp(self.u_range, iu, nu), lerp(self.v_range, iv, nv))
    }

    pub fn point(&self, idx: usize) -> Point3 {
        let (u, v) = self.coords(idx);
        self.plane.point(u, v)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IntensityMap {
    pub grid: GridSpec,
    /// `|E⁺|²` per grid point, row-major. Points on an emitter hold `+∞`.
    pub values: Vec<f64>,
    /// Points within the mask radius of an emitter.
    pub mask: Vec<bool>,
    pub mask_radius: f64,
}

impl IntensityMap {
    pub fn points(&self) -> impl Iterator<Item = Point3> + '_ {
        (0..self.values.len()).map(|i| self.grid.point(i))
    }

    /// Largest unmasked value.
    pub fn max_unmasked(&self) -> f64 {
        self.values
            .iter()
            .zip(&self.mask)
            .filter(|(_, &m)| !m)
            .map(|(v, _)| *v)
            .fold(0.0, f64::max)
    }
}

pub fn field_amplitude(array: &EmitterArray, state: &ExcitationState, point: &Point3) -> Result<Vector3<C64>> {
    if state.len() != array.len() {
        return Err(Error::invalid(format!(
            "state has {} amplitudes for {} emitters",
            state.len(),
            array.len()
        )));
    }
    let mut field = Vector3::<C64>::zeros();
    for ((r, p), &c) in array.positions().iter().zip(array.dipoles()).zip(state.amplitudes()) {
        if c == C64::from(0.0) {
            if point == r {
                return Err(Error::Singularity(format!("field point {point:?} sits on an emitter")));
            }
            continue;
        }
        let g = green_tensor(&(point - r))
            .map_err(|_| Error::Singularity(format!("field point {point:?} sits on an emitter")))?;
        field += g * p.vector() * c;
    }
    Ok(field)
}

pub fn intensity(array: &EmitterArray, state: &ExcitationState, point: &Point3) -> Result<f64> {
    Ok(field_amplitude(array, state, point)?.norm_squared())
}

/// `|E⁺|²` on every grid point, evaluated in parallel.
///
/// Points closer than a quarter of the smallest inter-emitter distance are
/// flagged in the mask but still evaluated.
pub fn intensity_map(array: &EmitterArray, state: &ExcitationState, grid: &GridSpec) -> Result<IntensityMap> {
    grid.validate()?;
    if state.len() != array.len() {
        return Err(Error::invalid("state and array sizes differ"));
    }
    let mask_radius = array.min_separation().map_or(0.0, |d| d / 4.0);
    let evaluated: Vec<(f64, bool)> = (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let p = grid.point(idx);
            let nearest = array.positions().iter().map(|r| (p - r).norm()).fold(f64::INFINITY, f64::min);
            if nearest == 0.0 {
                return Ok((f64::INFINITY, true));
            }
            Ok((intensity(array, state, &p)?, nearest < mask_radius))
        })
        .collect::<Result<_>>()?;
    let (values, mask) = evaluated.into_iter().unzip();
    Ok(IntensityMap { grid: grid.clone(), values, mask, mask_radius })
}
