//! Variational ground-state search for the transverse-field Ising chain.
//!
//! The crate bundles an exact statevector / density-matrix simulator, the
//! hardware-efficient and Hamiltonian variational ansätze, and two
//! optimizers over circuit parameters: a derivative-free tensor-train grid
//! search ([`tt::ttopt_minimize`]) and a finite-difference BFGS baseline
//! ([`classical::bfgs_minimize`]).

// `!(x > 0.0)` style checks deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ansatz;
pub mod circuit;
pub mod classical;
pub mod error;
pub mod pauli;
pub mod record;
pub mod sim;
pub mod state;
pub mod tt;
pub mod vqe;

pub use ansatz::{build_hea, build_hva, AnsatzKind, AnsatzSpec};
pub use circuit::{Angle, Circuit, Gate, GateKind};
pub use classical::{bfgs_minimize, fd_gradient, multistart, BfgsConfig, MultistartSummary};
pub use error::{Error, Result};
pub use pauli::{tfim, Hamiltonian, Pauli, PauliString};
pub use record::{OptRecord, Termination};
pub use sim::{depolarize, run_noisy, run_pure, NoiseModel};
pub use state::{DensityMatrix, StateVector};
pub use tt::{ttopt_minimize, GridSpec, TTOptConfig, ValueMap};
pub use vqe::{
    make_objective, relative_error, run_vqe, Backend, Optimizer, VqeMetadata, VqeObjective,
    VqeProblem, VqeResult,
};
