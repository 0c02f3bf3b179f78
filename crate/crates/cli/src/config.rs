//! Sweep configuration: a TOML file whose keys are fixed; unknown keys are errors.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use serde::{Deserialize, Serialize};
use ttvqe::{AnsatzKind, BfgsConfig, GridSpec, NoiseModel, Optimizer, TTOptConfig, ValueMap};

/// Depolarizing strength used when noise is enabled without an explicit value.
pub const DEFAULT_LAMBDA: f64 = 0.005;
/// TTOpt evaluation budget when noise is enabled without an explicit `max_evals`.
pub const NOISY_TTOPT_BUDGET: u64 = 100_000;
/// Default depth sweep.
pub const DEFAULT_LAYERS: [usize; 5] = [1, 2, 4, 8, 16];
/// Recorded in every manifest.
pub const LAYERS_NOTE: &str =
    "default depth sweep L in {1, 2, 4, 8, 16} spans the reference figure's axis; its exact tick values are not readable";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    pub model: ModelConfig,
    pub ansatz: AnsatzConfig,
    pub optimizers: Vec<OptimizerConfig>,
    #[serde(default)]
    pub noise: NoiseConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub n: Vec<usize>,
    #[serde(default = "default_field")]
    pub h: f64,
    #[serde(default)]
    pub boundary: Boundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    #[default]
    Open,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnsatzConfig {
    /// One kind or a list of kinds.
    pub kind: OneOrMany<AnsatzKind>,
    #[serde(default = "default_layers")]
    pub layers: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    pub fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(x) => vec![x.clone()],
            OneOrMany::Many(xs) => xs.clone(),
        }
    }
}

/// Per-optimizer settings; omitted keys take the library defaults.
/// Seeds come from the top-level `seeds` list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "lowercase")]
pub enum OptimizerConfig {
    Ttopt(TTOptSettings),
    Bfgs(BfgsSettings),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TTOptSettings {
    pub rank: Option<usize>,
    pub max_evals: Option<u64>,
    pub max_sweeps: Option<usize>,
    pub maxvol_tol: Option<f64>,
    pub value_map: Option<ValueMap>,
    pub keep_incumbent: Option<bool>,
    pub parallel: Option<bool>,
    /// Grid nodes per angle on `[0, 2π)`; a power of two when `qtt` is on.
    pub grid_points: Option<usize>,
    pub qtt: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BfgsSettings {
    pub restarts: Option<usize>,
    pub max_iters: Option<usize>,
    pub grad_step: Option<f64>,
    pub grad_tol: Option<f64>,
    pub wolfe_c1: Option<f64>,
    pub wolfe_c2: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    #[serde(default)]
    pub enabled: bool,
    /// One strength or a list; ignored unless `enabled`.
    #[serde(default = "default_lambda")]
    pub lambda: OneOrMany<f64>,
    /// TTOpt evaluation budget for noisy cells unless the optimizer sets `max_evals`.
    #[serde(default = "default_noisy_budget")]
    pub budget: u64,
    /// Apply the channel after state-preparation Hadamards as well.
    #[serde(default = "default_true")]
    pub state_prep: bool,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            enabled: false,
            lambda: default_lambda(),
            budget: NOISY_TTOPT_BUDGET,
            state_prep: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: None,
            formats: default_formats(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}
fn default_field() -> f64 {
    1.0
}
fn default_layers() -> Vec<usize> {
    DEFAULT_LAYERS.to_vec()
}
fn default_lambda() -> OneOrMany<f64> {
    OneOrMany::One(DEFAULT_LAMBDA)
}
fn default_noisy_budget() -> u64 {
    NOISY_TTOPT_BUDGET
}
fn default_true() -> bool {
    true
}
fn default_formats() -> Vec<Format> {
    vec![Format::Csv]
}

/// One point of the sweep lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub n: usize,
    pub kind: AnsatzKind,
    pub layers: usize,
    pub lambda: f64,
    pub optimizer: usize,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("invalid config {}", path.display()))
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(
            !self.model.n.is_empty(),
            "model.n must list at least one size"
        );
        ensure!(
            self.model.n.iter().all(|&n| n >= 1),
            "model.n entries must be at least 1"
        );
        ensure!(self.model.h.is_finite(), "model.h must be finite");
        ensure!(
            !self.ansatz.kind.to_vec().is_empty(),
            "ansatz.kind must name at least one ansatz"
        );
        ensure!(
            !self.ansatz.layers.is_empty(),
            "ansatz.layers must list at least one depth"
        );
        ensure!(
            self.ansatz.layers.iter().all(|&l| l >= 1),
            "ansatz.layers entries must be at least 1"
        );
        ensure!(
            !self.optimizers.is_empty(),
            "at least one [[optimizers]] entry is required"
        );
        ensure!(!self.seeds.is_empty(), "seeds must list at least one seed");
        ensure!(
            !self.output.formats.is_empty(),
            "output.formats must name at least one format"
        );
        if self.noise.enabled {
            let lambdas = self.noise.lambda.to_vec();
            ensure!(
                !lambdas.is_empty(),
                "noise.lambda must list at least one value"
            );
            for l in lambdas {
                NoiseModel::depolarizing(l)?;
            }
            ensure!(self.noise.budget >= 1, "noise.budget must be positive");
        }
        for opt in &self.optimizers {
            // Probe with a one-parameter grid; the real dimension comes per cell.
            self.optimizer(opt, 1, 0, self.noise.enabled)?;
        }
        Ok(())
    }

    /// Depolarizing strengths swept; `[0]` when noise is off.
    pub fn lambdas(&self) -> Vec<f64> {
        if self.noise.enabled {
            self.noise.lambda.to_vec()
        } else {
            vec![0.0]
        }
    }

    pub fn noise_model(&self, lambda: f64) -> Result<NoiseModel> {
        Ok(if self.noise.enabled {
            NoiseModel::depolarizing(lambda)?.with_state_prep_noise(self.noise.state_prep)
        } else {
            NoiseModel::noiseless()
        })
    }

    /// Lattice in row order: n, ansatz, layers, lambda, optimizer, seed.
    pub fn cells(&self) -> Vec<Cell> {
        let mut cells = Vec::new();
        for &n in &self.model.n {
            for kind in self.ansatz.kind.to_vec() {
                for &layers in &self.ansatz.layers {
                    for lambda in self.lambdas() {
                        for optimizer in 0..self.optimizers.len() {
                            for &seed in &self.seeds {
                                cells.push(Cell {
                                    n,
                                    kind,
                                    layers,
                                    lambda,
                                    optimizer,
                                    seed,
                                });
                            }
                        }
                    }
                }
            }
        }
        cells
    }

    /// Library optimizer for a cell with `d` parameters.
    pub fn optimizer(
        &self,
        opt: &OptimizerConfig,
        d: usize,
        seed: u64,
        noisy: bool,
    ) -> Result<Optimizer> {
        match opt {
            OptimizerConfig::Ttopt(s) => {
                let base = TTOptConfig::default();
                let default_budget = if noisy {
                    self.noise.budget
                } else {
                    base.max_evals
                };
                let config = TTOptConfig {
                    rank: s.rank.unwrap_or(base.rank),
                    max_evals: s.max_evals.unwrap_or(default_budget),
                    max_sweeps: s.max_sweeps.unwrap_or(base.max_sweeps),
                    seed,
                    maxvol_tol: s.maxvol_tol.unwrap_or(base.maxvol_tol),
                    value_map: s.value_map.unwrap_or(base.value_map),
                    keep_incumbent: s.keep_incumbent.unwrap_or(base.keep_incumbent),
                    parallel: s.parallel.unwrap_or(base.parallel),
                };
                config.validate()?;
                let points = s.grid_points.unwrap_or(256);
                let grid = GridSpec::uniform(d, 0.0, 2.0 * PI, points);
                let grid = if s.qtt.unwrap_or(true) {
                    if !points.is_power_of_two() || points < 2 {
                        bail!("ttopt.grid_points must be a power of two with qtt on, got {points}");
                    }
                    grid.with_qtt(2, points.trailing_zeros() as usize)?
                } else {
                    grid.validate()?;
                    grid
                };
                Ok(Optimizer::TTOpt {
                    config,
                    grid: Some(grid),
                })
            }
            OptimizerConfig::Bfgs(s) => {
                let base = BfgsConfig::default();
                let config = BfgsConfig {
                    max_iters: s.max_iters.unwrap_or(base.max_iters),
                    grad_step: s.grad_step.unwrap_or(base.grad_step),
                    wolfe_c1: s.wolfe_c1.unwrap_or(base.wolfe_c1),
                    wolfe_c2: s.wolfe_c2.unwrap_or(base.wolfe_c2),
                    grad_tol: s.grad_tol.unwrap_or(base.grad_tol),
                    restarts: s.restarts.unwrap_or(base.restarts),
                    seed,
                };
                config.validate()?;
                Ok(Optimizer::Bfgs(config))
            }
        }
    }
}
