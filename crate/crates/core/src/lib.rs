//! Loss-landscape analysis for supervised learning of unitary operators
//! with entangled training samples.
//!
//! The crate is organized bottom-up:
//!
//! - [`qcore`]: bipartite states, unitaries, Schmidt decomposition, Haar sampling.
//! - [`samples`]: separable, maximally entangled and partially entangled training samples.
//! - [`losses`]: fidelity loss, Bures angle, phase-invariant Frobenius distance, risk.
//! - [`bounds`]: closed-form landscape geometry and the extremal operator construction.
//! - [`pqc`]: the four layered ansatz families, gradients and expressivity.
//! - [`optimize`]: ball-constrained minimization and radius sweeps.
//! - [`harness`]: experiment configuration, orchestration and CSV/JSON output.

pub mod bounds;
pub mod error;
pub mod harness;
pub mod losses;
pub mod optimize;
pub mod pqc;
pub mod qcore;
pub mod samples;
pub mod seed;

pub use error::{Error, Result};
