//! Ring-to-ring coupling in the angular-momentum basis, the η figure of merit,
//! wave-packet dynamics and transfer fidelity.

mod dynamics;
mod fidelity;

pub use dynamics::{propagate, Propagation, PropagationMethod, Propagator};
pub use fidelity::{
    default_time_grid, farthest_site, fidelity_scan, fidelity_trace, gaussian_packet, FidelityMeasure,
    FidelityScan, FidelityScanSpec, FidelityTrace, PacketSpec, ScanPoint, TimeGrid,
};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::emfield::coupling_element;
use crate::error::{Error, Result};
use crate::geometry::{build_two_rings, EmitterArray, TwoRingConfig};
use crate::spectrum::{canonical_m, canonical_m_range, ring_spectrum, RingSpectrum};

/// `λ_{m1,m2} = (1/N) Σ_{i∈R1, j∈R2} h_ij e^{i(m1θ_i − m2θ_j)}` over the canonical ranges.
#[derive(Clone, Debug, PartialEq)]
pub struct RingRingCoupling {
    m_values: Vec<i64>,
    /// Rows indexed by `m1`, columns by `m2`.
    lambda: DMatrix<C64>,
}

impl RingRingCoupling {
    pub fn m_values(&self) -> &[i64] {
        &self.m_values
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.lambda
    }

    fn index(&self, m: i64) -> usize {
        (canonical_m(self.m_values.len(), m) - self.m_values[0]) as usize
    }

    pub fn lambda(&self, m1: i64, m2: i64) -> C64 {
        self.lambda[(self.index(m1), self.index(m2))]
    }

    /// Dispersive coupling `J_{m1,m2}`.
    pub fn j(&self, m1: i64, m2: i64) -> f64 {
        self.lambda(m1, m2).re
    }

    /// Dissipative coupling `Γ_{m1,m2}`.
    pub fn gamma(&self, m1: i64, m2: i64) -> f64 {
        -2.0 * self.lambda(m1, m2).im
    }
}

fn two_equal_rings(system: &EmitterArray) -> Result<usize> {
    if system.groups().len() != 2 {
        return Err(Error::invalid(format!("expected two rings, got {} groups", system.groups().len())));
    }
    let (_, r1) = system.ring(0)?;
    let (_, r2) = system.ring(1)?;
    if r1.len() != r2.len() {
        return Err(Error::invalid(format!("ring sizes differ: {} vs {}", r1.len(), r2.len())));
    }
    Ok(r1.len())
}

pub fn ring_ring_coupling(system: &EmitterArray) -> Result<RingRingCoupling> {
    let n = two_equal_rings(system)?;
    let (g1, r1) = system.ring(0)?;
    let (g2, r2) = system.ring(1)?;
    let (pos, dip) = (system.positions(), system.dipoles());

    let mut block = DMatrix::<C64>::zeros(n, n);
    for (a, i) in g1.range.clone().enumerate() {
        for (b, j) in g2.range.clone().enumerate() {
            block[(a, b)] = coupling_element(&pos[i], &dip[i], &pos[j], &dip[j])?;
        }
    }
    let m_values: Vec<i64> = canonical_m_range(n).collect();
    let left = DMatrix::from_fn(n, n, |row, i| C64::from_polar(1.0, m_values[row] as f64 * r1.angles[i]));
    let right = DMatrix::from_fn(n, n, |j, col| C64::from_polar(1.0, -(m_values[col] as f64) * r2.angles[j]));
    let lambda = left * block * right / C64::from(n as f64);
    Ok(RingRingCoupling { m_values, lambda })
}

/// `η_{m1,m2} = J²_{m1,m2} / [4Δ²_{m1,m2} + max(Γ²_{m1}, Γ²_{m2})]`.
#[derive(Clone, Debug, PartialEq)]
pub struct EtaMap {
    m_values: Vec<i64>,
    eta: DMatrix<f64>,
}

impl EtaMap {
    pub fn m_values(&self) -> &[i64] {
        &self.m_values
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.eta
    }

    pub fn get(&self, m1: i64, m2: i64) -> f64 {
        let n = self.m_values.len();
        let i = (canonical_m(n, m1) - self.m_values[0]) as usize;
        let j = (canonical_m(n, m2) - self.m_values[0]) as usize;
        self.eta[(i, j)]
    }
}

/// Combines the inter-ring couplings with the isolated-ring shifts `J_m` and
/// rates `Γ_m` of each ring.
pub fn eta_map(coupling: &RingRingCoupling, ring1: &RingSpectrum, ring2: &RingSpectrum) -> Result<EtaMap> {
    let n = coupling.m_values.len();
    if ring1.m_values().len() != n || ring2.m_values().len() != n {
        return Err(Error::invalid("ring spectra do not match the coupling dimension"));
    }
    let m = &coupling.m_values;
    let eta = DMatrix::from_fn(n, n, |a, b| {
        let j = coupling.lambda[(a, b)].re;
        let delta = (ring1.shift(m[a]) - ring2.shift(m[b])).abs();
        let rate = ring1.decay_rate(m[a]).abs().max(ring2.decay_rate(m[b]).abs());
        let denom = 4.0 * delta * delta + rate * rate;
        if j == 0.0 {
            0.0
        } else {
            j * j / denom
        }
    });
    Ok(EtaMap { m_values: m.clone(), eta })
}

/// Coupling, isolated-ring spectra and η for a two-ring system.
pub fn eta_for_system(system: &EmitterArray) -> Result<(RingRingCoupling, EtaMap)> {
    let coupling = ring_ring_coupling(system)?;
    let eta = eta_map(&coupling, &ring_spectrum(system, 0)?, &ring_spectrum(system, 1)?)?;
    Ok((coupling, eta))
}

/// Largest angular momentum of an `n`-site ring, `⌊n/2⌋`.
pub fn edge_momentum(n: usize) -> i64 {
    (n / 2) as i64
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EtaPoint {
    pub gap: f64,
    pub eta: f64,
}

/// `η` at `m1 = m2 = ⌊N/2⌋` as the ring gap varies; `base.gap` is ignored.
pub fn eta_distance_scan(base: &TwoRingConfig, gaps: &[f64]) -> Result<Vec<EtaPoint>> {
    if gaps.is_empty() {
        return Err(Error::invalid("gap list is empty"));
    }
    let m = edge_momentum(base.n);
    gaps.par_iter()
        .map(|&gap| {
            let system = build_two_rings(&TwoRingConfig { gap, ..*base })?;
            let (_, eta) = eta_for_system(&system)?;
            Ok(EtaPoint { gap, eta: eta.get(m, m) })
        })
        .collect()
}
