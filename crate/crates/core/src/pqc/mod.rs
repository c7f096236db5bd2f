//! Layered parameterized circuits, their unitaries and loss gradients, and
//! the KL-divergence expressivity estimator.

mod ansatz;
mod expressivity;
mod sim;

pub use ansatz::{build_unitary, param_count, AnsatzFamily, AnsatzSpec, Gate, ParameterVector};
pub use expressivity::{expressivity, fidelity_kl, haar_bin_probability, ExpressivityReport};
pub use sim::{loss_gradient, Circuit, CircuitLoss, FD_STEP};
