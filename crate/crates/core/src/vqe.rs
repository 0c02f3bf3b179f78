//! Wires a Hamiltonian, an ansatz, and a noise model into a counted energy
//! objective, and runs one VQE instance with either optimizer.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::ansatz::{AnsatzKind, AnsatzSpec};
use crate::circuit::Circuit;
use crate::classical::{multistart, BfgsConfig, MultistartSummary};
use crate::error::{Error, Result};
use crate::pauli::{tfim, tfim_fixture, Hamiltonian, DENSE_QUBIT_CAP};
use crate::record::OptRecord;
use crate::sim::{run_noisy, run_pure, NoiseModel};
use crate::state::StateVector;
use crate::tt::{ttopt_minimize, GridSpec, TTOptConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Pure,
    Density,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VqeProblem {
    pub hamiltonian: Hamiltonian,
    pub ansatz: AnsatzSpec,
    pub noise: NoiseModel,
    pub backend: Backend,
    /// Field strength when the Hamiltonian is a TFIM, used to look up
    /// frozen ground energies.
    pub tfim_field: Option<f64>,
}

impl VqeProblem {
    /// Picks the density backend when noise is enabled, statevector otherwise.
    pub fn new(hamiltonian: Hamiltonian, ansatz: AnsatzSpec, noise: NoiseModel) -> Result<Self> {
        let backend = if noise.enabled() {
            Backend::Density
        } else {
            Backend::Pure
        };
        let p = Self {
            hamiltonian,
            ansatz,
            noise,
            backend,
            tfim_field: None,
        };
        p.validate()?;
        Ok(p)
    }

    /// Open-chain TFIM with the given ansatz.
    pub fn tfim(
        n: usize,
        h: f64,
        kind: AnsatzKind,
        layers: usize,
        noise: NoiseModel,
    ) -> Result<Self> {
        let mut p = Self::new(tfim(n, h)?, AnsatzSpec::new(kind, n, layers), noise)?;
        p.tfim_field = Some(h);
        Ok(p)
    }

    pub fn with_backend(mut self, backend: Backend) -> Result<Self> {
        self.backend = backend;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.hamiltonian.num_qubits() != self.ansatz.n {
            return Err(Error::DimensionMismatch {
                expected: self.hamiltonian.num_qubits(),
                got: self.ansatz.n,
            });
        }
        if self.noise.enabled() && self.backend != Backend::Density {
            return Err(Error::InvalidConfig(
                "noisy simulation requires the density backend".into(),
            ));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.ansatz.param_count()
    }

    /// Ground energy from the frozen fixtures when available, otherwise by
    /// dense diagonalization.
    pub fn exact_energy(&self) -> Result<f64> {
        let n = self.hamiltonian.num_qubits();
        if let Some(e) = self.tfim_field.and_then(|h| tfim_fixture(n, h)) {
            return Ok(e);
        }
        if n > DENSE_QUBIT_CAP {
            return Err(Error::NoExactEnergy(format!(
                "{n} qubits exceeds the dense cap"
            )));
        }
        self.hamiltonian.ground_energy()
    }
}

/// `θ ↦ E(θ)` with a call counter and a best-seen register. Safe to call
/// from several threads.
pub struct VqeObjective {
    circuit: Circuit,
    hamiltonian: Hamiltonian,
    noise: NoiseModel,
    backend: Backend,
    initial: StateVector,
    calls: AtomicU64,
    best: Mutex<Option<(f64, Vec<f64>)>>,
}

impl fmt::Debug for VqeObjective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VqeObjective")
            .field("gates", &self.circuit.len())
            .field("params", &self.circuit.param_count())
            .field("backend", &self.backend)
            .field("calls", &self.calls())
            .finish()
    }
}

impl VqeObjective {
    pub fn dim(&self) -> usize {
        self.circuit.param_count()
    }

    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    /// Energy at `theta`; counts the call.
    pub fn energy(&self, theta: &[f64]) -> Result<f64> {
        let e = match self.backend {
            Backend::Pure => {
                let psi = run_pure(&self.circuit, theta, &self.initial)?;
                self.hamiltonian.expectation_pure(&psi)?
            }
            Backend::Density => {
                let rho = run_noisy(&self.circuit, theta, &self.noise)?;
                self.hamiltonian.expectation_mixed(&rho)?
            }
        };
        self.calls.fetch_add(1, Ordering::Relaxed);
        let mut best = self.best.lock().expect("best-seen lock");
        if best.as_ref().is_none_or(|(b, _)| e < *b) {
            *best = Some((e, theta.to_vec()));
        }
        Ok(e)
    }

    /// Infallible form for optimizers, which always pass `dim()` parameters.
    pub fn value(&self, theta: &[f64]) -> f64 {
        self.energy(theta)
            .expect("parameter vector matches the ansatz")
    }

    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }

    pub fn best_seen(&self) -> Option<(f64, Vec<f64>)> {
        self.best.lock().expect("best-seen lock").clone()
    }
}

pub fn make_objective(problem: &VqeProblem) -> Result<VqeObjective> {
    problem.validate()?;
    Ok(VqeObjective {
        circuit: problem.ansatz.build()?,
        hamiltonian: problem.hamiltonian.clone(),
        noise: problem.noise,
        backend: problem.backend,
        initial: problem.ansatz.initial_state(),
        calls: AtomicU64::new(0),
        best: Mutex::new(None),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum Optimizer {
    /// Tensor-train grid search; `grid` defaults to [`GridSpec::angles`].
    TTOpt {
        config: TTOptConfig,
        grid: Option<GridSpec>,
    },
    /// Multistart BFGS.
    Bfgs(BfgsConfig),
}

impl Optimizer {
    pub fn ttopt(config: TTOptConfig) -> Self {
        Optimizer::TTOpt { config, grid: None }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Optimizer::TTOpt { .. } => "ttopt",
            Optimizer::Bfgs(_) => "bfgs",
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            Optimizer::TTOpt { config, .. } => config.seed,
            Optimizer::Bfgs(c) => c.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VqeMetadata {
    pub n: usize,
    pub ansatz: AnsatzKind,
    pub layers: usize,
    pub lambda: f64,
    pub optimizer: String,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VqeResult {
    /// The TTOpt record, or the best BFGS restart with `evals_used` and
    /// `skipped_updates` summed over all restarts.
    pub record: OptRecord,
    pub exact_energy: f64,
    pub rel_error: f64,
    pub metadata: VqeMetadata,
    /// Present for BFGS runs.
    pub summary: Option<MultistartSummary>,
    /// Number of optimizer runs behind `record` (restarts for BFGS).
    pub runs: usize,
    /// Seconds spent inside the optimizer, all runs included.
    pub wall_time: f64,
    /// Mean of each run's own wall time; restarts may overlap in parallel.
    pub mean_run_time: f64,
}

impl VqeResult {
    pub fn best_energy(&self) -> f64 {
        self.record.best_value
    }

    /// Relative error of an arbitrary energy against this run's exact value.
    pub fn rel_error_of(&self, energy: f64) -> f64 {
        relative_error(energy, self.exact_energy)
    }
}

pub fn relative_error(energy: f64, exact: f64) -> f64 {
    (energy - exact).abs() / exact.abs()
}

pub fn run_vqe(problem: &VqeProblem, optimizer: &Optimizer) -> Result<VqeResult> {
    let exact_energy = problem.exact_energy()?;
    let objective = make_objective(problem)?;
    let f = |t: &[f64]| objective.value(t);
    let d = problem.dim();

    let start = Instant::now();
    let (record, summary, runs, mean_run_time) = match optimizer {
        Optimizer::TTOpt { config, grid } => {
            let grid = grid.clone().unwrap_or_else(|| GridSpec::angles(d));
            if grid.d != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: grid.d,
                });
            }
            let rec = ttopt_minimize(&f, &grid, config)?;
            let t = rec.wall_time;
            (rec, None, 1, t)
        }
        Optimizer::Bfgs(cfg) => {
            let (records, summary) = multistart(&f, d, cfg)?;
            let runs = records.len();
            let mean_run_time = records.iter().map(|r| r.wall_time).sum::<f64>() / runs as f64;
            let evals = records.iter().map(|r| r.evals_used).sum();
            let skipped = records.iter().map(|r| r.skipped_updates).sum();
            let mut best = records
                .into_iter()
                .min_by(|a, b| a.best_value.total_cmp(&b.best_value))
                .expect("at least one restart");
            best.evals_used = evals;
            best.skipped_updates = skipped;
            (best, Some(summary), runs, mean_run_time)
        }
    };
    let wall_time = start.elapsed().as_secs_f64();
    debug_assert_eq!(record.evals_used, objective.calls());

    Ok(VqeResult {
        rel_error: relative_error(record.best_value, exact_energy),
        exact_energy,
        metadata: VqeMetadata {
            n: problem.ansatz.n,
            ansatz: problem.ansatz.kind,
            layers: problem.ansatz.layers,
            lambda: if problem.noise.enabled() {
                problem.noise.lambda()
            } else {
                0.0
            },
            optimizer: optimizer.name().to_string(),
            seed: optimizer.seed(),
        },
        summary,
        runs,
        wall_time,
        mean_run_time,
        record,
    })
}
