//! Non-unitary evolution `dψ/dt = −i h ψ` on the single-excitation manifold.

use nalgebra::{DMatrix, DVector, LU};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg;
use crate::spectrum::{CouplingMatrix, ExcitationState};

/// Eigenvector condition number above which the spectral route is abandoned.
pub const MAX_CONDITION: f64 = 1e8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PropagationMethod {
    /// `V e^{−iΛt} V⁻¹ ψ0`.
    Spectral,
    /// Adaptive Dormand–Prince integration, used when `V` is ill-conditioned.
    Adaptive,
}

enum Route {
    Spectral { values: Vec<C64>, vectors: DMatrix<C64>, lu: LU<C64, nalgebra::Dyn, nalgebra::Dyn> },
    Adaptive,
}

/// Reusable propagator for one coupling matrix.
pub struct Propagator {
    h: DMatrix<C64>,
    route: Route,
    condition: f64,
}

impl Propagator {
    pub fn new(h: &CouplingMatrix) -> Result<Self> {
        Self::with_condition_limit(h, MAX_CONDITION)
    }

    pub fn with_condition_limit(h: &CouplingMatrix, limit: f64) -> Result<Self> {
        let e = linalg::eig(h.matrix())?;
        let condition = linalg::condition_number(&e.vectors);
        let route = if condition > limit {
            log::warn!("eigenvector condition number {condition:.3e} exceeds {limit:.1e}; integrating directly");
            Route::Adaptive
        } else {
            let lu = e.vectors.clone().lu();
            Route::Spectral { values: e.values, vectors: e.vectors, lu }
        };
        Ok(Self { h: h.matrix().clone(), route, condition })
    }

    pub fn method(&self) -> PropagationMethod {
        match self.route {
            Route::Spectral { .. } => PropagationMethod::Spectral,
            Route::Adaptive => PropagationMethod::Adaptive,
        }
    }

    /// Condition number of the eigenvector matrix.
    pub fn condition_number(&self) -> f64 {
        self.condition
    }

    pub fn dim(&self) -> usize {
        self.h.nrows()
    }

    /// States at each of `times` (non-negative, ascending).
    pub fn evolve(&self, psi0: &ExcitationState, times: &[f64]) -> Result<Vec<ExcitationState>> {
        if psi0.len() != self.dim() {
            return Err(Error::invalid(format!("state has {} amplitudes, system {}", psi0.len(), self.dim())));
        }
        check_times(times)?;
        match &self.route {
            Route::Spectral { values, vectors, lu } => {
                let coeffs = lu
                    .solve(psi0.vector())
                    .ok_or_else(|| Error::Numeric("eigenvector matrix is singular".into()))?;
                Ok(times
                    .iter()
                    .map(|&t| {
                        if t == 0.0 {
                            return psi0.clone();
                        }
                        let evolved = DVector::from_fn(coeffs.len(), |k, _| coeffs[k] * (C64::new(0.0, -t) * values[k]).exp());
                        ExcitationState::from_vector(vectors * evolved)
                    })
                    .collect())
            }
            Route::Adaptive => integrate(&self.h, psi0.vector(), times, 1e-11, 1e-13),
        }
    }
}

pub(crate) fn check_times(times: &[f64]) -> Result<()> {
    if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(Error::invalid("times must be finite and non-negative"));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::invalid("times must be ascending"));
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct Propagation {
    pub states: Vec<ExcitationState>,
    pub method: PropagationMethod,
    pub condition_number: f64,
}

/// Evolves a unit-norm `psi0` under `h`.
pub fn propagate(h: &CouplingMatrix, psi0: &ExcitationState, times: &[f64]) -> Result<Propagation> {
    psi0.check_unit_norm(1e-10)?;
    let prop = Propagator::new(h)?;
    Ok(Propagation {
        states: prop.evolve(psi0, times)?,
        method: prop.method(),
        condition_number: prop.condition_number(),
    })
}

// Dormand–Prince 5(4) tableau; the right-hand side is autonomous so the nodes are unused.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

fn integrate(h: &DMatrix<C64>, psi0: &DVector<C64>, times: &[f64], rtol: f64, atol: f64) -> Result<Vec<ExcitationState>> {
    let rhs = |y: &DVector<C64>| -> DVector<C64> { (h * y) * C64::new(0.0, -1.0) };
    let scale = h.norm().max(1e-300);
    let mut step = 1e-2 / scale;
    let mut t = 0.0;
    let mut y = psi0.clone();
    let mut out = Vec::with_capacity(times.len());
    let mut rejected = 0usize;

    for &target in times {
        while t < target {
            let dt = step.min(target - t);
            let mut k: Vec<DVector<C64>> = Vec::with_capacity(7);
            k.push(rhs(&y));
            for s in 1..7 {
                let mut ys = y.clone();
                for (j, kj) in k.iter().enumerate().take(s) {
                    if A[s][j] != 0.0 {
                        ys += kj * C64::from(dt * A[s][j]);
                    }
                }
                k.push(rhs(&ys));
            }
            let mut y5 = y.clone();
            let mut err = DVector::<C64>::zeros(y.len());
            for s in 0..7 {
                y5 += &k[s] * C64::from(dt * B5[s]);
                err += &k[s] * C64::from(dt * (B5[s] - B4[s]));
            }
            let norm = (err
                .iter()
                .zip(y.iter().zip(y5.iter()))
                .map(|(e, (a, b))| (e.norm() / (atol + rtol * a.norm().max(b.norm()))).powi(2))
                .sum::<f64>()
                / y.len() as f64)
                .sqrt();
            let factor = if norm == 0.0 { 5.0 } else { (0.9 * norm.powf(-0.2)).clamp(0.2, 5.0) };
            if norm <= 1.0 {
                t += dt;
                y = y5;
                if dt == step {
                    step *= factor;
                }
            } else {
                step = dt * factor;
                rejected += 1;
                if step < 1e-14 * (1.0 + t) || rejected > 10_000_000 {
                    return Err(Error::Numeric(format!("adaptive integration stalled at t = {t}")));
                }
            }
        }
        out.push(ExcitationState::from_vector(y.clone()));
    }
    Ok(out)
}
