//! Optical response of atomic Λ media and hybrid optomechanical cooling.
//!
//! The crate is `no_std` (with `alloc`). Everything here is a pure function of
//! immutable parameter values; IO, configuration and sweeps live in the
//! `lambdacool` companion crate.
//!
//! All rates, detunings and frequencies are angular (rad/s) internally. The
//! [`units::AngularFrequency`] newtype carries them and converts from the
//! "Hz with 2π applied" convention used in configuration files.
//!
//! Module map:
//!
//! - [`units`], [`model`]: shared parameter types, constants, the dressed
//!   cavity response.
//! - [`eit`]: EIT susceptibility of a three-level ensemble in a cavity.
//! - [`rir`]: recoil-induced resonance susceptibility of a thermal 1-D gas.
//! - [`backaction`]: feedback and cascade coupling to an optomechanical
//!   cavity, optical damping, minimum phonon number, improvement factor.
//! - [`oracle`]: time-domain integration of the underlying equations of
//!   motion, used to check the closed-form steady states.

#![no_std]
// Guards are written as `!(x > 0.0)` so that NaN is rejected along with the
// out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(any(feature = "std", test))]
extern crate std;

pub mod backaction;
pub mod eit;
mod error;
pub mod model;
pub mod ode;
pub mod oracle;
pub mod rir;
pub mod scan;
pub mod units;

pub use error::{Error, Result};
pub use num_complex::Complex64;
