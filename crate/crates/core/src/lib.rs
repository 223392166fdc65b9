//! Relativistic wavepacket toolkit: momentum probability amplitudes,
//! Newton-Wigner localization measures, Lorentz boosts of wavepackets and
//! their position-space widths, and wavepacket spreading.
//!
//! Natural units throughout: hbar = c = 1, so a particle of mass `m` has
//! Compton wavelength `1/m`. Metric signature +---, so the plane wave in the
//! position transform at t = 0 carries `e^{+i p.x}`.

pub mod boost;
pub mod error;
mod gauss;
pub mod observables;
pub mod quadrature;
pub mod specfun;
pub mod spreading;
pub mod states;
pub mod transforms;
pub mod vec3;

pub use error::{Error, Result};
pub use num_complex::Complex64;
