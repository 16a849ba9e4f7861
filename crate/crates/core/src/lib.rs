//! Numerical laboratory for semiclassical wavepackets guided along the
//! sign-changing mass interface of a 2-D magnetic Dirac operator.
//!
//! Two independent routes to the same physics are provided and
//! cross-validated:
//!
//! * an *asymptotic* route ([`geometry`], [`coefficients`], [`envelope`],
//!   [`assembler`]) that integrates the guided-center trajectory, transports
//!   a slowly varying envelope along it and assembles the leading-order
//!   wavepacket in lab coordinates, and
//! * a *direct* route ([`solver`]) that evolves the Dirac equation itself
//!   with a split-step Fourier method built from exact 2x2 unitaries.
//!
//! [`diagnostics`] extracts observables (center of mass, speed, phase
//! winding, amplitude decay) from either route so they can be compared
//! quantitatively: magnetic slowdown of the interface mode, flux-induced
//! phase winding, and curvature/field-gradient induced dispersion with its
//! `|nu_t|^{-1/2}` amplitude law.

pub mod assembler;
pub mod coefficients;
pub mod diagnostics;
pub mod envelope;
pub mod error;
pub mod geometry;
pub mod grid;
pub mod potential;
pub mod solver;
pub mod spin;
pub mod vec2;

pub use error::{CoreError, Result};
