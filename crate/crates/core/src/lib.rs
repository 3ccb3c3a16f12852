//! Entanglement-depth certification for multimode W-type states prepared
//! by heralded collective excitation of an array of atomic ensembles.
//!
//! The crate is organised around the data flow of an experiment:
//!
//! - [`excitation`]: truncated Fock-space states with at most two
//!   excitations, W states and bi-separable test states.
//! - [`witness`]: the depth witness, its minimization over bi-separable
//!   states, and optimization of the witness parameters.
//! - [`simulator`]: a forward model of the multiplexed experiment that
//!   emits photon counts under each deflector configuration.
//! - [`inference`]: estimators from counts to populations and fidelity.
//! - [`bootstrap`]: Poisson resampling, confidence levels and intervals.
//! - [`dataset`] and [`config`]: file formats for counts and run settings.
//! - [`cli`]: the `wdepth` command-line workflows.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bootstrap;
pub mod cli;
pub mod config;
pub mod dataset;
pub mod error;
pub mod excitation;
pub mod inference;
pub mod simulator;
pub mod witness;

pub use error::{Error, Result};
