//! Collective radiative modes, field patterns and ring-to-ring excitation
//! transfer for rings of dipole-coupled two-level emitters.
//!
//! Units throughout: lengths in transition wavelengths (`k0 = 2π`), rates and
//! frequency shifts in the single-emitter decay rate `Γ0`.

pub mod cli;
pub mod emfield;
pub mod error;
pub mod fieldmap;
pub mod geometry;
mod linalg;
pub mod spectrum;
pub mod transfer;

pub use error::{Error, Result};
