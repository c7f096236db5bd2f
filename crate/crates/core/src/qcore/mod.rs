//! Complex linear-algebra substrate: bipartite pure states on `H_X ⊗ H_R`,
//! unitaries acting on `H_X`, Schmidt decomposition and Haar sampling.
//!
//! Amplitude layout: the basis state `|i⟩_X ⊗ |k⟩_R` lives at index
//! `i * dim_r + k`, so the amplitude vector reshapes row-major into a
//! `dim_x × dim_r` matrix `A` with `|α⟩ = Σ A[i,k] |i⟩|k⟩`.

mod haar;
mod schmidt;
mod state;
mod unitary;

pub use haar::{haar_random_state, haar_random_unitary};
pub use schmidt::{schmidt_decompose, SchmidtData, RANK_TOLERANCE};
pub use state::{apply_to_subsystem, StateVector, NORM_TOLERANCE};
pub(crate) use state::inner;
pub use unitary::{UnitaryMatrix, UNITARY_TOLERANCE};

pub use num_complex::Complex64;

pub type CMatrix = nalgebra::DMatrix<Complex64>;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);
