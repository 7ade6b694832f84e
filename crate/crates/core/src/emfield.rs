//! Free-space dyadic Green's tensor and pairwise dipole-dipole couplings.
//!
//! All quantities use natural units of the emitter transition: lengths are
//! measured in wavelengths (so `k0 = 2π`) and rates in the single-emitter
//! decay rate `Γ0 = 1`.
//!
//! The Green's tensor acts on a unit dipole `p` as
//!
//! ```text
//! G(r)·p = e^{ik0 r}/(4πr) [ (r̂×p)×r̂ + (1/(k0 r)² − i/(k0 r)) (3 r̂(r̂·p) − p) ]
//! ```
//!
//! and the coherent and dissipative couplings follow as
//! `Ω_ij = −(3π/k0) Re{p_i*·G(r_i − r_j)·p_j}` and
//! `Γ_ij = (6π/k0) Im{p_i*·G(r_i − r_j)·p_j}`.

use std::f64::consts::{PI, TAU};

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Transition wavenumber in units of inverse wavelengths.
pub const K0: f64 = TAU;

/// A position, in wavelengths.
pub type Point3 = Vector3<f64>;

/// 3×3 complex dyadic.
pub type Tensor3 = Matrix3<C64>;

/// Unit (possibly complex) polarization vector of a transition dipole.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DipoleOrientation(Vector3<C64>);

impl DipoleOrientation {
    /// Normalizes `v` with respect to the conjugate inner product.
    pub fn new(v: Vector3<C64>) -> Result<Self> {
        let norm = v.norm();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::invalid(format!(
                "dipole orientation must be finite and non-zero, got {v:?}"
            )));
        }
        Ok(Self(v / C64::from(norm)))
    }

    pub fn real(x: f64, y: f64, z: f64) -> Result<Self> {
        Self::new(Vector3::new(x.into(), y.into(), z.into()))
    }

    pub fn x() -> Self {
        Self(Vector3::new(C64::from(1.0), C64::from(0.0), C64::from(0.0)))
    }

    pub fn y() -> Self {
        Self(Vector3::new(C64::from(0.0), C64::from(1.0), C64::from(0.0)))
    }

    pub fn z() -> Self {
        Self(Vector3::new(C64::from(0.0), C64::from(0.0), C64::from(1.0)))
    }

    pub fn vector(&self) -> &Vector3<C64> {
        &self.0
    }

    /// True if every component has a vanishing imaginary part.
    pub fn is_real(&self) -> bool {
        self.0.iter().all(|c| c.im == 0.0)
    }
}

/// Coherent exchange `omega` (Ω_ij) and collective decay `gamma` (Γ_ij) for
/// one emitter pair, both in units of Γ0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairCoupling {
    pub omega: f64,
    pub gamma: f64,
}

impl PairCoupling {
    /// Matrix element of the effective Hamiltonian, `Ω − iΓ/2`.
    pub fn h(&self) -> C64 {
        C64::new(self.omega, -0.5 * self.gamma)
    }
}

pub(crate) fn check_finite(p: &Point3, what: &str) -> Result<()> {
    if p.iter().all(|c| c.is_finite()) {
        Ok(())
    } else {
        Err(Error::invalid(format!("{what} has non-finite components: {p:?}")))
    }
}

/// Free-space Green's tensor `G(r, ω0)` for separation `r`.
pub fn green_tensor(r: &Point3) -> Result<Tensor3> {
    check_finite(r, "separation")?;
    let dist = r.norm();
    if dist == 0.0 {
        return Err(Error::Singularity(
            "Green's tensor evaluated at zero separation".into(),
        ));
    }
    let kr = K0 * dist;
    let rhat = r / dist;
    let outer = (rhat * rhat.transpose()).map(C64::from);
    let eye = Tensor3::identity();

    let prefactor = C64::new(0.0, kr).exp() / (4.0 * PI * dist);
    let near = C64::new(1.0 / (kr * kr), -1.0 / kr);

    let transverse = eye - outer;
    let quasi_static = outer * C64::from(3.0) - eye;
    Ok((transverse + quasi_static * near) * prefactor)
}

/// `p_a* · G(r_a − r_b) · p_b`, the dipole-projected propagator between two emitters.
pub fn projected_green(
    r_a: &Point3,
    p_a: &DipoleOrientation,
    r_b: &Point3,
    p_b: &DipoleOrientation,
) -> Result<C64> {
    let g = green_tensor(&(r_a - r_b))?;
    Ok(p_a.0.dotc(&(g * p_b.0)))
}

/// Effective-Hamiltonian element `h_ab = −(3π/k0) p_a*·G(r_a − r_b)·p_b`.
pub fn coupling_element(
    r_a: &Point3,
    p_a: &DipoleOrientation,
    r_b: &Point3,
    p_b: &DipoleOrientation,
) -> Result<C64> {
    Ok(projected_green(r_a, p_a, r_b, p_b)? * (-3.0 * PI / K0))
}

pub fn pair_coupling(
    r_i: &Point3,
    p_i: &DipoleOrientation,
    r_j: &Point3,
    p_j: &DipoleOrientation,
) -> Result<PairCoupling> {
    let g = projected_green(r_i, p_i, r_j, p_j)?;
    Ok(PairCoupling {
        omega: -3.0 * PI / K0 * g.re,
        gamma: 6.0 * PI / K0 * g.im,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn perpendicular_gamma(x: f64) -> f64 {
        1.5 * (x.sin() / x + x.cos() / (x * x) - x.sin() / x.powi(3))
    }

    #[test]
    fn axial_dipole_has_no_transverse_part() {
        let r = Point3::new(0.37, 0.0, 0.0);
        let g = green_tensor(&r).unwrap();
        let field = g * DipoleOrientation::x().vector();
        let kr = K0 * 0.37;
        let expected = C64::new(0.0, kr).exp() / (4.0 * PI * 0.37)
            * C64::new(2.0 / (kr * kr), -2.0 / kr);
        assert_relative_eq!(field[0].re, expected.re, max_relative = 1e-13);
        assert_relative_eq!(field[0].im, expected.im, max_relative = 1e-13);
        assert_eq!(field[1], C64::from(0.0));
        assert_eq!(field[2], C64::from(0.0));
    }

    #[test]
    fn half_wavelength_perpendicular_pair() {
        let c = pair_coupling(
            &Point3::new(0.5, 0.0, 0.0),
            &DipoleOrientation::z(),
            &Point3::zeros(),
            &DipoleOrientation::z(),
        )
        .unwrap();
        let oracle = perpendicular_gamma(PI);
        assert_relative_eq!(oracle, -3.0 / (2.0 * PI * PI), max_relative = 1e-14);
        assert_relative_eq!(c.gamma, oracle, epsilon = 1e-14);
        assert_eq!(c.h(), C64::new(c.omega, -0.5 * c.gamma));
    }

    #[test]
    fn dissipative_part_tends_to_single_emitter_rate() {
        let r = 1e-3 / K0;
        for p in [
            DipoleOrientation::x(),
            DipoleOrientation::z(),
            DipoleOrientation::real(1.0, -2.0, 0.5).unwrap(),
        ] {
            for dir in [Point3::x(), Point3::z(), Point3::new(1.0, 1.0, 1.0).normalize()] {
                let g = green_tensor(&(dir * r)).unwrap();
                let im = p.vector().dotc(&(g * p.vector())).im;
                assert_relative_eq!(im, K0 / (6.0 * PI), max_relative = 1e-5);
            }
        }
    }

    #[test]
    fn near_field_scales_as_inverse_cube() {
        let p = DipoleOrientation::z();
        for kr in [0.05, 0.02, 0.005] {
            let r = kr / K0;
            let at = |s: f64| {
                pair_coupling(&Point3::new(s, 0.0, 0.0), &p, &Point3::zeros(), &p)
                    .unwrap()
                    .omega
            };
            let ratio = at(r / 2.0) / at(r);
            assert!((ratio / 8.0 - 1.0).abs() < 0.05, "ratio {ratio} at k0 r = {kr}");
        }
    }

    #[test]
    fn couplings_fall_off_at_large_separation() {
        let p = DipoleOrientation::z();
        let far = pair_coupling(&Point3::new(1e4, 0.0, 0.0), &p, &Point3::zeros(), &p).unwrap();
        assert!(far.omega.abs() < 1e-3 && far.gamma.abs() < 1e-3);
    }

    #[test]
    fn zero_separation_is_singular() {
        assert!(matches!(green_tensor(&Point3::zeros()), Err(Error::Singularity(_))));
        let p = DipoleOrientation::z();
        let r = Point3::new(0.1, 0.2, 0.3);
        assert!(matches!(pair_coupling(&r, &p, &r, &p), Err(Error::Singularity(_))));
    }

    #[test]
    fn dipole_rejects_zero_vector() {
        assert!(DipoleOrientation::real(0.0, 0.0, 0.0).is_err());
        let p = DipoleOrientation::new(Vector3::new(C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::from(0.0)))
            .unwrap();
        assert_relative_eq!(p.vector().dotc(p.vector()).re, 1.0, epsilon = 1e-12);
        assert!(!p.is_real());
    }

    proptest! {
        #[test]
        fn green_tensor_is_reciprocal(
            x in -3.0f64..3.0, y in -3.0f64..3.0, z in -3.0f64..3.0,
        ) {
            let r = Point3::new(x, y, z);
            prop_assume!(r.norm() > 1e-3);
            let g = green_tensor(&r).unwrap();
            let back = green_tensor(&-r).unwrap();
            prop_assert!((g - back.transpose()).norm() < 1e-12 * g.norm());
        }

        #[test]
        fn swapping_real_dipoles_keeps_coupling(
            x in -2.0f64..2.0, y in -2.0f64..2.0, z in -2.0f64..2.0,
            a in -1.0f64..1.0, b in -1.0f64..1.0, c in 0.1f64..1.0,
        ) {
            let ri = Point3::new(x, y, z);
            let rj = Point3::new(0.1, -0.2, 0.05);
            prop_assume!((ri - rj).norm() > 1e-3);
            let pi = DipoleOrientation::real(a, b, c).unwrap();
            let pj = DipoleOrientation::real(c, a, b).unwrap();
            let fwd = pair_coupling(&ri, &pi, &rj, &pj).unwrap();
            let rev = pair_coupling(&rj, &pj, &ri, &pi).unwrap();
            prop_assert!((fwd.omega - rev.omega).abs() < 1e-12 * (1.0 + fwd.omega.abs()));
            prop_assert!((fwd.gamma - rev.gamma).abs() < 1e-12 * (1.0 + fwd.gamma.abs()));
        }
    }
}
