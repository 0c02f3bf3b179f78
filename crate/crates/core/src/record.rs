use serde::{Deserialize, Serialize};

/// Why an optimizer stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// Gradient norm fell below tolerance.
    Converged,
    /// A full sweep (or line search) produced no improvement.
    NoImprovement,
    /// Objective-call budget ran out mid-pass; result is best-so-far.
    Truncated,
    /// Sweep cap reached.
    SweepCap,
    /// Iteration cap reached.
    IterationCap,
    /// Line search could not satisfy the Wolfe conditions.
    LineSearchFailed,
}

impl Termination {
    /// Early stops that leave the result usable but flagged.
    pub fn is_flagged(self) -> bool {
        matches!(self, Termination::Truncated | Termination::LineSearchFailed)
    }
}

/// Common output of every optimizer in this crate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptRecord {
    pub best_theta: Vec<f64>,
    pub best_value: f64,
    /// Objective calls actually made.
    pub evals_used: u64,
    /// Lookups answered from a memo table instead of the objective.
    pub cache_hits: u64,
    /// `(evals_used, best_value_so_far)` checkpoints.
    pub trace: Vec<(u64, f64)>,
    pub wall_time: f64,
    pub status: Termination,
    /// Quasi-Newton updates skipped because `s·y <= 0`; zero for TTOpt.
    #[serde(default)]
    pub skipped_updates: u64,
}

impl OptRecord {
    /// True when every trace checkpoint is no worse than the one before.
    pub fn trace_is_monotone(&self) -> bool {
        self.trace
            .windows(2)
            .all(|w| w[1].1 <= w[0].1 && w[1].0 >= w[0].0)
    }
}
