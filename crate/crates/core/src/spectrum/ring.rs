//! Spin waves and analytic eigenvalues of rotationally symmetric rings.

use std::ops::RangeInclusive;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use super::{fix_phase, ExcitationState, ModeLabel, ModeSpectrum, SELF_TERM};
use crate::emfield::coupling_element;
use crate::error::{Error, Result};
use crate::geometry::{EmitterArray, RingMeta};

/// Distinct angular momenta of an `n`-site ring.
///
/// Odd `n`: `−(n−1)/2 ..= (n−1)/2`. Even `n`: `−n/2+1 ..= n/2`, since `±n/2`
/// coincide on the lattice.
pub fn canonical_m_range(n: usize) -> RangeInclusive<i64> {
    let n = n as i64;
    if n % 2 == 1 {
        -(n - 1) / 2..=(n - 1) / 2
    } else {
        -n / 2 + 1..=n / 2
    }
}

/// Maps any integer `m` onto its mod-`n` representative in [`canonical_m_range`].
pub fn canonical_m(n: usize, m: i64) -> i64 {
    let range = canonical_m_range(n);
    let len = n as i64;
    let lo = *range.start();
    (m - lo).rem_euclid(len) + lo
}

fn checked_m(n: usize, m: i64) -> i64 {
    let c = canonical_m(n, m);
    if c != m {
        log::warn!("angular momentum m = {m} outside canonical range for N = {n}; using m = {c}");
    }
    c
}

/// `ψ_m` with `c_j = N^{−1/2} e^{i m θ_j}` on the sites of ring `group`.
pub fn spin_wave_state(array: &EmitterArray, group: usize, m: i64) -> Result<ExcitationState> {
    let (g, ring) = array.ring(group)?;
    let n = ring.len();
    let m = checked_m(n, m);
    let amp = 1.0 / (n as f64).sqrt();
    let mut state = vec![C64::from(0.0); array.len()];
    for (slot, &theta) in state[g.range.clone()].iter_mut().zip(&ring.angles) {
        *slot = C64::from_polar(amp, m as f64 * theta);
    }
    Ok(ExcitationState::new(state))
}

fn symmetric_ring(array: &EmitterArray, group: usize) -> Result<(std::ops::Range<usize>, &RingMeta)> {
    let (g, ring) = array.ring(group)?;
    if !ring.polarization.is_symmetric() {
        return Err(Error::Unsupported(format!(
            "analytic ring eigenvalues need a rotationally symmetric polarization, got {:?}",
            ring.polarization
        )));
    }
    Ok((g.range.clone(), ring))
}

fn intra_ring_block(array: &EmitterArray, range: &std::ops::Range<usize>) -> Result<DMatrix<C64>> {
    let pos = &array.positions()[range.clone()];
    let dip = &array.dipoles()[range.clone()];
    let n = pos.len();
    let mut h = DMatrix::from_element(n, n, SELF_TERM);
    for j in 0..n {
        for l in 0..n {
            if j != l {
                h[(j, l)] = coupling_element(&pos[j], &dip[j], &pos[l], &dip[l])?;
            }
        }
    }
    Ok(h)
}

fn lambda_from_block(h: &DMatrix<C64>, angles: &[f64], m: i64) -> C64 {
    let n = angles.len();
    let mut sum = C64::from(0.0);
    for j in 0..n {
        for l in 0..n {
            sum += C64::from_polar(1.0, m as f64 * (angles[l] - angles[j])) * h[(j, l)];
        }
    }
    sum / n as f64
}

/// Analytic eigenvalue of spin wave `m` on an isolated ring, from the pair sum
/// `λ_m = (1/N) Σ_{jℓ} e^{im(θ_ℓ−θ_j)} h_{jℓ}` over that ring only.
pub fn ring_eigenvalue(array: &EmitterArray, group: usize, m: i64) -> Result<C64> {
    let (range, ring) = symmetric_ring(array, group)?;
    let m = checked_m(ring.len(), m);
    let h = intra_ring_block(array, &range)?;
    Ok(lambda_from_block(&h, &ring.angles, m))
}

/// Analytic eigenvalues of every canonical `m` of one ring.
#[derive(Clone, Debug, PartialEq)]
pub struct RingSpectrum {
    m_values: Vec<i64>,
    values: Vec<C64>,
}

impl RingSpectrum {
    pub fn m_values(&self) -> &[i64] {
        &self.m_values
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    /// Eigenvalue of angular momentum `m` (any integer, reduced mod N).
    pub fn get(&self, m: i64) -> C64 {
        let n = self.m_values.len();
        let idx = (canonical_m(n, m) - self.m_values[0]) as usize;
        self.values[idx]
    }

    pub fn shift(&self, m: i64) -> f64 {
        self.get(m).re
    }

    pub fn decay_rate(&self, m: i64) -> f64 {
        -2.0 * self.get(m).im
    }
}

pub fn ring_spectrum(array: &EmitterArray, group: usize) -> Result<RingSpectrum> {
    let (range, ring) = symmetric_ring(array, group)?;
    let h = intra_ring_block(array, &range)?;
    let m_values: Vec<i64> = canonical_m_range(ring.len()).collect();
    let values = m_values.iter().map(|&m| lambda_from_block(&h, &ring.angles, m)).collect();
    Ok(RingSpectrum { m_values, values })
}

/// Tags each mode of a single symmetric ring with its angular momentum.
///
/// Numerically degenerate eigenvalues are grouped and their eigenvectors are
/// replaced by the spin waves with the largest projection on the shared
/// eigenspace. Labels are then assigned greedily by overlap, which makes the
/// assignment a bijection onto the canonical `m` range.
pub fn classify_modes(spec: &ModeSpectrum, array: &EmitterArray, group: usize) -> Result<ModeSpectrum> {
    let (g, ring) = array.ring(group)?;
    let n = ring.len();
    if spec.len() != n || array.len() != n || g.range != (0..n) {
        return Err(Error::invalid("mode classification needs a spectrum of a single isolated ring"));
    }
    let m_values: Vec<i64> = canonical_m_range(n).collect();
    let amp = 1.0 / (n as f64).sqrt();
    let waves = DMatrix::from_fn(n, n, |j, col| C64::from_polar(amp, m_values[col] as f64 * ring.angles[j]));

    let mut vectors = spec.vectors.clone();
    let scale = spec.eigenvalues.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let tol = 1e-8 * scale;
    let mut seen = vec![false; n];
    for k in 0..n {
        if seen[k] {
            continue;
        }
        let cluster: Vec<usize> =
            (k..n).filter(|&i| !seen[i] && (spec.eigenvalues[i] - spec.eigenvalues[k]).norm() < tol).collect();
        for &i in &cluster {
            seen[i] = true;
        }
        if cluster.len() < 2 {
            continue;
        }
        let basis = DMatrix::from_columns(&cluster.iter().map(|&i| vectors.column(i).into_owned()).collect::<Vec<_>>());
        let q = basis.qr().q();
        let projections = q.adjoint() * &waves;
        let mut ranked: Vec<usize> = (0..n).collect();
        ranked.sort_by(|&a, &b| {
            projections.column(b).norm().total_cmp(&projections.column(a).norm()).then(a.cmp(&b))
        });
        let mut chosen = ranked[..cluster.len()].to_vec();
        chosen.sort_by_key(|&c| m_values[c]);
        for (&slot, &c) in cluster.iter().zip(&chosen) {
            let mut v: DVector<C64> = &q * projections.column(c);
            v /= C64::from(v.norm());
            fix_phase(&mut v);
            vectors.set_column(slot, &v);
        }
    }

    let overlaps = waves.adjoint() * &vectors;
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(n * n);
    for k in 0..n {
        for c in 0..n {
            pairs.push((overlaps[(c, k)].norm(), k, c));
        }
    }
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut labels: Vec<Option<ModeLabel>> = vec![None; n];
    let mut used = vec![false; n];
    for (overlap, k, c) in pairs {
        if labels[k].is_none() && !used[c] {
            labels[k] = Some(ModeLabel { m: m_values[c], overlap });
            used[c] = true;
        }
    }
    let labels: Vec<ModeLabel> = labels.into_iter().map(|l| l.expect("bijective assignment")).collect();
    for (k, l) in labels.iter().enumerate() {
        if !l.is_confident() {
            log::warn!("mode {k}: best spin-wave overlap {:.3} (m = {}) below threshold", l.overlap, l.m);
        }
    }
    Ok(ModeSpectrum { eigenvalues: spec.eigenvalues.clone(), vectors, labels: Some(labels) })
}

/// Angular momentum beyond which ring modes lie outside the light cone:
/// `k_m = 2πm/(Nd) > k0 ⇔ |m| > N·d` with `d` in wavelengths.
pub fn light_line_threshold(n: usize, d: f64) -> f64 {
    n as f64 * d
}
