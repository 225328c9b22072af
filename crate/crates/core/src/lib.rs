//! Quantum van der Pol oscillators under repeated measurements.
//!
//! Two simulation branches share this crate:
//!
//! * a semiclassical Langevin (truncated Wigner) branch that propagates large
//!   ensembles of phase-space amplitudes with Euler–Maruyama steps
//!   ([`sde_core`], [`measurement`], [`coupled`]), analysed through phase-space
//!   histograms ([`phase_space`]) and spectra of the mean quadrature
//!   ([`spectral`]);
//! * an exact branch that integrates the Lindblad master equation in a
//!   truncated Fock basis and applies the dichotomic coherent-state POVM
//!   ([`fock`]).
//!
//! Every stochastic quantity is drawn from counter-addressable per-trajectory
//! streams ([`rng`]), so results are bit-identical for any worker count.
//! The [`cli`] module wires the pieces into named, seeded experiments.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod coupled;
pub mod error;
pub mod fock;
pub mod measurement;
pub mod phase_space;
pub mod rng;
pub mod sde_core;
pub mod spectral;

pub use error::{Error, Result};
pub use num_complex::Complex64;
