//! Collective scattering of a plane-wave drive by a one-dimensional emitter
//! array into the guided modes of a waveguide.
//!
//! Three models of increasing cost compute the right-mode scattering rate:
//! an analytic transfer sum ([`closed_form`]), the weak-drive linear steady
//! state ([`steady_state`]) and the full master equation ([`lindblad`]).
//! The [`experiments`] module builds spectra, angle maps, N-scalings and void
//! ensembles on top of them.

#![no_std]

extern crate alloc;

pub mod closed_form;
pub mod coupling;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod lindblad;
pub mod params;
pub mod steady_state;

pub use error::{Error, Result};
pub use params::{make_params, Coupling, ModelParams, RawParams};
