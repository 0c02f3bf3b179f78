//! Tensor-train machinery: maxvol, two-dimensional cross approximation,
//! mode quantization, and the sweep-based grid optimizer.

pub mod cross;
pub mod maxvol;
pub mod optimizer;
pub mod qtt;

pub use cross::{cross_approx_2d, CrossConfig, CrossResult};
pub use maxvol::{maxvol, maxvol_with, Maxvol};
pub use optimizer::{ttopt_minimize, unfolding_ranks, GridSpec, TTOptConfig, ValueMap};
