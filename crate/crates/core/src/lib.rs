//! Simulation of dissipative coupled-cavity arrays (CCAs).
//!
//! Each cavity leaks into its own continuum, which is folded into a
//! quasi-boson with complex frequency `ω_eff = ω_c − iγ`. The array is then
//! an open tight-binding chain with hopping `−α·ω_eff`, and single-photon
//! transport follows from local scattering amplitudes.
//!
//! Every closed-form result is paired with a brute-force check:
//!
//! * [`scattering`] solves the finite lossy chain embedded in lossless leads
//!   with transfer matrices and compares against the product formula in
//!   [`transport`].
//! * [`bath`] discretizes the continuum, diagonalizes the full
//!   cavity-plus-bath Hamiltonian and recovers the golden-rule decay rate
//!   and principal-value frequency shift.
//! * [`overlap`] computes the nearest-neighbour coupling `α` from 1D
//!   finite-difference defect modes.
//!
//! Units: frequencies are in units of `ω_c` and lengths in units of the
//! array period `L` unless stated otherwise. The quality factor follows the
//! convention `Q = 2ω_c/γ`.

// `!(x > 0.0)` style checks are deliberate: they reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bath;
pub mod config;
pub mod error;
pub mod hamiltonian;
pub mod overlap;
pub mod params;
pub mod scattering;
pub mod transport;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use params::{ArrayParams, BandMode, DerivedRates};
