//! Effective non-Hermitian Hamiltonian of the single-excitation manifold and
//! its collective eigenmodes.
//!
//! Eigenvalues `λ_k` carry the collective shift `J_k = Re λ_k` and decay rate
//! `Γ_k = −2 Im λ_k`, both in units of Γ0.

mod ring;
mod scan;

pub use ring::{
    canonical_m, canonical_m_range, classify_modes, light_line_threshold, ring_eigenvalue,
    ring_spectrum, spin_wave_state, RingSpectrum,
};
pub use scan::{brightest_mode_scan, min_decay_scan, DecayPoint, ScanGeometry};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::emfield::coupling_element;
use crate::error::{Error, Result};
use crate::geometry::EmitterArray;
use crate::linalg;

/// Diagonal of the effective Hamiltonian: no self shift, unit self decay.
pub const SELF_TERM: C64 = C64 { re: 0.0, im: -0.5 };

/// `h_ij = Ω_ij − iΓ_ij/2` on the single-excitation manifold.
#[derive(Clone, Debug, PartialEq)]
pub struct CouplingMatrix {
    h: DMatrix<C64>,
}

impl CouplingMatrix {
    pub fn from_matrix(h: DMatrix<C64>) -> Result<Self> {
        if !h.is_square() {
            return Err(Error::invalid(format!("coupling matrix is {}×{}", h.nrows(), h.ncols())));
        }
        Ok(Self { h })
    }

    pub fn dim(&self) -> usize {
        self.h.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.h
    }

    /// Collective decay matrix `Γ_ij = −2 Im h_ij`.
    pub fn decay_matrix(&self) -> DMatrix<f64> {
        self.h.map(|z| -2.0 * z.im)
    }

    pub fn apply(&self, state: &ExcitationState) -> ExcitationState {
        ExcitationState::from_vector(&self.h * state.vector())
    }
}

pub fn assemble_heff(array: &EmitterArray) -> Result<CouplingMatrix> {
    let n = array.len();
    let pos = array.positions();
    let dip = array.dipoles();
    let mut h = DMatrix::from_element(n, n, SELF_TERM);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            h[(i, j)] = coupling_element(&pos[i], &dip[i], &pos[j], &dip[j]).map_err(|e| match e {
                Error::Singularity(_) => {
                    Error::Singularity(format!("emitters {i} and {j} share position {:?}", pos[i]))
                }
                other => other,
            })?;
        }
    }
    Ok(CouplingMatrix { h })
}

/// Amplitudes `c_j` of `|Ψ⟩ = Σ_j c_j σ^eg_j |g⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExcitationState {
    amplitudes: DVector<C64>,
}

impl ExcitationState {
    pub fn new(amplitudes: Vec<C64>) -> Self {
        Self { amplitudes: DVector::from_vec(amplitudes) }
    }

    pub fn from_vector(amplitudes: DVector<C64>) -> Self {
        Self { amplitudes }
    }

    pub fn zeros(n: usize) -> Self {
        Self { amplitudes: DVector::zeros(n) }
    }

    /// Amplitude 1 on `site`, 0 elsewhere.
    pub fn site(n: usize, site: usize) -> Result<Self> {
        if site >= n {
            return Err(Error::invalid(format!("site {site} out of range for {n} emitters")));
        }
        let mut s = Self::zeros(n);
        s.amplitudes[site] = C64::from(1.0);
        Ok(s)
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn amplitudes(&self) -> &[C64] {
        self.amplitudes.as_slice()
    }

    pub fn vector(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// Excited-state population `Σ|c_j|²`.
    pub fn population(&self) -> f64 {
        self.amplitudes.norm_squared()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &ExcitationState) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    pub fn normalized(&self) -> Result<Self> {
        let norm = self.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::invalid("cannot normalize a zero or non-finite state"));
        }
        Ok(Self { amplitudes: &self.amplitudes / C64::from(norm) })
    }

    pub(crate) fn check_unit_norm(&self, tol: f64) -> Result<()> {
        let norm = self.norm();
        if (norm - 1.0).abs() > tol {
            return Err(Error::invalid(format!("initial state must be unit norm, got ‖ψ‖ = {norm}")));
        }
        Ok(())
    }
}

/// Angular-momentum tag attached to a mode by [`classify_modes`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModeLabel {
    pub m: i64,
    /// `|⟨ψ_m|v_k⟩|` of the assigned spin wave.
    pub overlap: f64,
}

impl ModeLabel {
    /// Below this overlap the label is reported as a classification failure.
    pub const MIN_OVERLAP: f64 = 0.9;

    pub fn is_confident(&self) -> bool {
        self.overlap >= Self::MIN_OVERLAP
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModeSpectrum {
    eigenvalues: Vec<C64>,
    vectors: DMatrix<C64>,
    labels: Option<Vec<ModeLabel>>,
}

impl ModeSpectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn eigenvalues(&self) -> &[C64] {
        &self.eigenvalues
    }

    pub fn vectors(&self) -> &DMatrix<C64> {
        &self.vectors
    }

    pub fn mode(&self, k: usize) -> ExcitationState {
        ExcitationState::from_vector(self.vectors.column(k).into_owned())
    }

    pub fn shift(&self, k: usize) -> f64 {
        self.eigenvalues[k].re
    }

    pub fn decay_rate(&self, k: usize) -> f64 {
        -2.0 * self.eigenvalues[k].im
    }

    pub fn shifts(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|l| l.re).collect()
    }

    pub fn decay_rates(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|l| -2.0 * l.im).collect()
    }

    pub fn min_decay_rate(&self) -> f64 {
        self.decay_rates().into_iter().fold(f64::INFINITY, f64::min)
    }

    pub fn max_decay_rate(&self) -> f64 {
        self.decay_rates().into_iter().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn labels(&self) -> Option<&[ModeLabel]> {
        self.labels.as_deref()
    }

    /// Index of the mode labelled `m`, if labels exist.
    pub fn mode_with_label(&self, m: i64) -> Option<usize> {
        self.labels.as_ref()?.iter().position(|l| l.m == m)
    }
}

/// Rotates `v` so its first component of (numerically) maximal modulus is real positive.
pub(crate) fn fix_phase(v: &mut DVector<C64>) {
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return;
    }
    let pivot = v.iter().position(|z| z.norm() >= max * (1.0 - 1e-9)).unwrap();
    let phase = v[pivot] / C64::from(v[pivot].norm());
    *v /= phase;
    v[pivot] = C64::from(v[pivot].re);
}

/// Full eigendecomposition of `h`, sorted by (Re λ, Im λ) ascending.
pub fn eigenmodes(h: &CouplingMatrix) -> Result<ModeSpectrum> {
    let e = linalg::eig(&h.h)?;
    let n = e.values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        let (x, y) = (e.values[a], e.values[b]);
        x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im))
    });
    let eigenvalues = order.iter().map(|&k| e.values[k]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut v = e.vectors.column(src).into_owned();
        fix_phase(&mut v);
        vectors.set_column(dst, &v);
    }
    Ok(ModeSpectrum { eigenvalues, vectors, labels: None })
}
