//! Gaussian wave packets on a ring and the transfer fidelity to the second ring.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use super::dynamics::{check_times, PropagationMethod, Propagator};
use super::ring_ring_coupling;
use crate::error::{Error, Result};
use crate::geometry::{build_two_rings, Arrangement, EmitterArray, PolarizationScheme, TwoRingConfig};
use crate::spectrum::{assemble_heff, ExcitationState};

/// `c_j ∝ e^{imθ_j} exp(−|r_j − r_k|² / (2R²Δθ²))` on ring `ring`, zero elsewhere.
///
/// `site` is the packet center, counted within the ring. An infinite
/// `delta_theta` gives the spin wave `ψ_m`.
pub fn gaussian_packet(
    system: &EmitterArray,
    ring: usize,
    site: usize,
    m: i64,
    delta_theta: f64,
) -> Result<ExcitationState> {
    let (group, meta) = system.ring(ring)?;
    if site >= meta.len() {
        return Err(Error::invalid(format!("site {site} is outside ring {ring} ({} sites)", meta.len())));
    }
    if !(delta_theta > 0.0) {
        return Err(Error::invalid(format!("angular spread must be positive, got {delta_theta}")));
    }
    let sites = &system.positions()[group.range.clone()];
    let center = sites[site];
    let width2 = 2.0 * (meta.radius * delta_theta).powi(2);
    let mut amps = vec![C64::from(0.0); system.len()];
    for ((slot, r), &theta) in amps[group.range.clone()].iter_mut().zip(sites).zip(&meta.angles) {
        let envelope = if delta_theta.is_infinite() {
            1.0
        } else if width2 == 0.0 {
            if r == &center { 1.0 } else { 0.0 }
        } else {
            (-(r - center).norm_squared() / width2).exp()
        };
        *slot = C64::from_polar(envelope, m as f64 * theta);
    }
    ExcitationState::new(amps).normalized()
}

/// Initial packet, always placed on ring 1 (group 0).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PacketSpec {
    pub site: usize,
    pub m: i64,
    pub delta_theta: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum FidelityMeasure {
    /// `|⟨target|Ψ(t)⟩|`.
    #[default]
    Modulus,
    /// `|⟨target|Ψ(t)⟩|²`.
    Squared,
}

impl FidelityMeasure {
    pub fn apply(&self, modulus: f64) -> f64 {
        match self {
            FidelityMeasure::Modulus => modulus,
            FidelityMeasure::Squared => modulus * modulus,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeGrid {
    pub t_max: f64,
    /// Number of intervals; the grid has `steps + 1` points including 0 and `t_max`.
    pub steps: usize,
}

impl TimeGrid {
    pub fn times(&self) -> Vec<f64> {
        (0..=self.steps).map(|i| self.t_max * i as f64 / self.steps as f64).collect()
    }

    fn validate(&self) -> Result<()> {
        if !(self.t_max > 0.0 && self.t_max.is_finite()) || self.steps == 0 {
            return Err(Error::invalid(format!("invalid time grid {self:?}")));
        }
        Ok(())
    }
}

/// `t_max = 20π / |J_{m,−m}|` with 2000 steps.
pub fn default_time_grid(system: &EmitterArray, m: i64) -> Result<TimeGrid> {
    let j = ring_ring_coupling(system)?.j(m, -m).abs();
    if j < 1e-12 {
        return Err(Error::invalid(format!(
            "inter-ring coupling J(m, −m) vanishes for m = {m}; give an explicit t_max"
        )));
    }
    Ok(TimeGrid { t_max: 20.0 * PI / j, steps: 2000 })
}

/// Site of ring 1 farthest from the center of ring 2.
pub fn farthest_site(system: &EmitterArray) -> Result<usize> {
    let (g1, _) = system.ring(0)?;
    let (_, r2) = system.ring(1)?;
    let sites = &system.positions()[g1.range.clone()];
    let mut best = 0;
    for (k, r) in sites.iter().enumerate() {
        if (r - r2.center).norm() > (sites[best] - r2.center).norm() + 1e-12 {
            best = k;
        }
    }
    Ok(best)
}

#[derive(Clone, Debug, PartialEq)]
pub struct FidelityTrace {
    pub times: Vec<f64>,
    /// `max_k |⟨Ψ^{−m}_{2,k}|Ψ(t)⟩|`.
    pub fidelity: Vec<f64>,
    /// Ring-2 site (within the ring) of the best target at each time.
    pub argmax_site: Vec<usize>,
    /// `‖Ψ(t)‖²`, the surviving excitation.
    pub population: Vec<f64>,
    pub method: PropagationMethod,
}

impl FidelityTrace {
    pub fn squared(&self) -> Vec<f64> {
        self.fidelity.iter().map(|f| f * f).collect()
    }

    /// `(t, F)` at the first maximum of the measure.
    pub fn max(&self, measure: FidelityMeasure) -> (f64, f64) {
        let mut best = (self.times[0], measure.apply(self.fidelity[0]));
        for (&t, &f) in self.times.iter().zip(&self.fidelity) {
            let v = measure.apply(f);
            if v > best.1 {
                best = (t, v);
            }
        }
        best
    }
}

/// Conjugated target packets `Ψ^{−m}_{2,k}` as rows, one per ring-2 site.
fn target_rows(system: &EmitterArray, packet: &PacketSpec) -> Result<DMatrix<C64>> {
    let (_, r2) = system.ring(1)?;
    let n2 = r2.len();
    let mut rows = DMatrix::<C64>::zeros(n2, system.len());
    for k in 0..n2 {
        let target = gaussian_packet(system, 1, k, -packet.m, packet.delta_theta)?;
        for (j, c) in target.amplitudes().iter().enumerate() {
            rows[(k, j)] = c.conj();
        }
    }
    Ok(rows)
}

fn trace_with(
    system: &EmitterArray,
    propagator: &Propagator,
    packet: &PacketSpec,
    times: &[f64],
) -> Result<FidelityTrace> {
    let psi0 = gaussian_packet(system, 0, packet.site, packet.m, packet.delta_theta)?;
    let rows = target_rows(system, packet)?;
    let states = propagator.evolve(&psi0, times)?;
    let mut fidelity = Vec::with_capacity(times.len());
    let mut argmax_site = Vec::with_capacity(times.len());
    let mut population = Vec::with_capacity(times.len());
    for s in &states {
        let overlaps = &rows * s.vector();
        let (k, f) = overlaps
            .iter()
            .map(|z| z.norm())
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (k, f)| if f > best.1 { (k, f) } else { best });
        fidelity.push(f);
        argmax_site.push(k);
        population.push(s.population());
    }
    Ok(FidelityTrace { times: times.to_vec(), fidelity, argmax_site, population, method: propagator.method() })
}

/// Evolves the packet from ring 1 under the full two-ring Hamiltonian and
/// tracks its best overlap with a momentum-reversed packet of equal width on ring 2.
pub fn fidelity_trace(system: &EmitterArray, packet: &PacketSpec, times: &[f64]) -> Result<FidelityTrace> {
    super::two_equal_rings(system)?;
    check_times(times)?;
    let propagator = Propagator::new(&assemble_heff(system)?)?;
    trace_with(system, &propagator, packet, times)
}

#[derive(Clone, Debug, PartialEq)]
pub struct FidelityScanSpec {
    pub n: usize,
    pub spacing: f64,
    pub polarization: PolarizationScheme,
    pub arrangement: Arrangement,
    pub m: i64,
    pub gaps: Vec<f64>,
    /// Packet widths `R·Δθ`, in wavelengths.
    pub widths: Vec<f64>,
    /// Shared time grid; per-gap default when `None`.
    pub time_grid: Option<TimeGrid>,
    pub measure: FidelityMeasure,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanPoint {
    pub gap: f64,
    pub width: f64,
    pub delta_theta: f64,
    pub max_fidelity: f64,
    pub t_at_max: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FidelityScan {
    /// Gap-major, width-minor order.
    pub points: Vec<ScanPoint>,
}

impl FidelityScan {
    pub fn best(&self) -> Option<&ScanPoint> {
        self.points.iter().fold(None, |best: Option<&ScanPoint>, p| match best {
            Some(b) if b.max_fidelity >= p.max_fidelity => Some(b),
            _ => Some(p),
        })
    }
}

/// Maximal fidelity over time on a (gap, width) grid, with the packet
/// starting at the ring-1 site farthest from ring 2.
pub fn fidelity_scan(spec: &FidelityScanSpec) -> Result<FidelityScan> {
    if spec.gaps.is_empty() || spec.widths.is_empty() {
        return Err(Error::invalid("fidelity scan needs at least one gap and one width"));
    }
    if spec.widths.iter().any(|w| !(*w > 0.0)) {
        return Err(Error::invalid("packet widths must be positive"));
    }
    if let Some(grid) = &spec.time_grid {
        grid.validate()?;
    }
    let per_gap: Vec<Vec<ScanPoint>> = spec
        .gaps
        .par_iter()
        .map(|&gap| {
            let config = TwoRingConfig {
                arrangement: spec.arrangement,
                gap,
                n: spec.n,
                spacing: spec.spacing,
                polarization: spec.polarization,
            };
            let system = build_two_rings(&config)?;
            let radius = system.ring(0)?.1.radius;
            let grid = match spec.time_grid {
                Some(g) => g,
                None => default_time_grid(&system, spec.m)?,
            };
            let times = grid.times();
            let propagator = Propagator::new(&assemble_heff(&system)?)?;
            let site = farthest_site(&system)?;
            spec.widths
                .iter()
                .map(|&width| {
                    let delta_theta = width / radius;
                    let packet = PacketSpec { site, m: spec.m, delta_theta };
                    let trace = trace_with(&system, &propagator, &packet, &times)?;
                    let (t_at_max, max_fidelity) = trace.max(spec.measure);
                    Ok(ScanPoint { gap, width, delta_theta, max_fidelity, t_at_max })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(FidelityScan { points: per_gap.into_iter().flatten().collect() })
}
