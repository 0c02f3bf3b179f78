//! Sweep execution and result files.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::sync::mpsc;

use anyhow::{Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use ttvqe::pauli::TFIM_CRITICAL_GROUND_ENERGIES;
use ttvqe::{run_vqe, VqeProblem};

use crate::config::{Cell, ExperimentConfig, Format, LAYERS_NOTE};

/// Bumped whenever [`COLUMNS`] changes.
pub const SCHEMA_VERSION: u32 = 1;

pub const COLUMNS: [&str; 18] = [
    "n",
    "ansatz",
    "layers",
    "optimizer",
    "lambda",
    "seed",
    "best_energy",
    "exact_energy",
    "rel_error",
    "evals",
    "wall_time_s",
    "mean_energy",
    "median_energy",
    "min_energy",
    "max_energy",
    "restarts",
    "status",
    "error",
];

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "TTVQE_OUT_DIR";

/// One CSV row. Statistics across restarts are empty for TTOpt; everything
/// after `seed` except `error` is empty for failed cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub n: usize,
    pub ansatz: String,
    pub layers: usize,
    pub optimizer: String,
    pub lambda: f64,
    pub seed: u64,
    pub best_energy: Option<f64>,
    pub exact_energy: Option<f64>,
    pub rel_error: Option<f64>,
    pub evals: Option<u64>,
    /// TTOpt: the single run. BFGS: mean over restarts.
    pub wall_time_s: Option<f64>,
    pub mean_energy: Option<f64>,
    pub median_energy: Option<f64>,
    pub min_energy: Option<f64>,
    pub max_energy: Option<f64>,
    pub restarts: Option<usize>,
    pub status: Option<String>,
    pub error: Option<String>,
}

impl Row {
    fn empty(cell: &Cell, optimizer: &str) -> Self {
        Self {
            n: cell.n,
            ansatz: cell.kind.to_string(),
            layers: cell.layers,
            optimizer: optimizer.to_string(),
            lambda: cell.lambda,
            seed: cell.seed,
            best_energy: None,
            exact_energy: None,
            rel_error: None,
            evals: None,
            wall_time_s: None,
            mean_energy: None,
            median_energy: None,
            min_energy: None,
            max_energy: None,
            restarts: None,
            status: None,
            error: None,
        }
    }

    pub fn failed(&self) -> bool {
        self.error.is_some()
    }
}

pub fn header_hash() -> String {
    hex::encode(Sha256::digest(COLUMNS.join(",").as_bytes()))
}

pub fn fixture_hash() -> String {
    let text: String = TFIM_CRITICAL_GROUND_ENERGIES
        .iter()
        .map(|(n, e)| format!("{n}:{e:?}\n"))
        .collect();
    hex::encode(Sha256::digest(text.as_bytes()))
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Worker threads for cells and restarts; `None` uses the rayon default.
    pub jobs: Option<usize>,
    /// Overrides `output.dir` and the environment.
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub out_dir: PathBuf,
    pub rows: Vec<Row>,
    pub failures: usize,
    pub files: Vec<PathBuf>,
}

/// `--out`, then `output.dir`, then the environment, then `results`.
pub fn resolve_out_dir(cfg: &ExperimentConfig, opts: &RunOptions) -> PathBuf {
    opts.out
        .clone()
        .or_else(|| cfg.output.dir.clone())
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("results"))
}

pub fn run_cell(cfg: &ExperimentConfig, cell: &Cell) -> Row {
    let spec = &cfg.optimizers[cell.optimizer];
    let name = match spec {
        crate::config::OptimizerConfig::Ttopt(_) => "ttopt",
        crate::config::OptimizerConfig::Bfgs(_) => "bfgs",
    };
    let mut row = Row::empty(cell, name);
    let attempt = catch_unwind(AssertUnwindSafe(|| -> Result<()> {
        let noise = cfg.noise_model(cell.lambda)?;
        let problem = VqeProblem::tfim(cell.n, cfg.model.h, cell.kind, cell.layers, noise)?;
        let optimizer = cfg.optimizer(spec, problem.dim(), cell.seed, cfg.noise.enabled)?;
        let res = run_vqe(&problem, &optimizer)?;
        row.best_energy = Some(res.best_energy());
        row.exact_energy = Some(res.exact_energy);
        row.rel_error = Some(res.rel_error);
        row.evals = Some(res.record.evals_used);
        row.wall_time_s = Some(res.mean_run_time);
        row.restarts = Some(res.runs);
        row.status = Some(
            serde_json::to_value(res.record.status)?
                .as_str()
                .unwrap_or_default()
                .to_string(),
        );
        if let Some(s) = &res.summary {
            row.mean_energy = Some(s.mean);
            row.median_energy = Some(s.median);
            row.min_energy = Some(s.min);
            row.max_energy = Some(s.max);
        }
        Ok(())
    }));
    let err = match attempt {
        Ok(Ok(())) => return row,
        Ok(Err(e)) => format!("{e:#}"),
        Err(panic) => panic
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panic".into()),
    };
    let mut failed = Row::empty(cell, name);
    failed.error = Some(err);
    failed
}

/// Runs every cell, streaming rows to `results.csv` in lattice order.
pub fn run_experiment(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<RunSummary> {
    cfg.validate()?;
    let out_dir = resolve_out_dir(cfg, opts);
    fs::create_dir_all(&out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let cells = cfg.cells();
    let csv_path = out_dir.join("results.csv");
    let mut writer = if cfg.output.formats.contains(&Format::Csv) {
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .from_path(&csv_path)
            .with_context(|| format!("creating {}", csv_path.display()))?;
        w.write_record(COLUMNS)?;
        w.flush()?;
        Some(w)
    } else {
        None
    };

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = opts.jobs {
        builder = builder.num_threads(jobs.max(1));
    }
    let pool = builder.build()?;

    let (tx, rx) = mpsc::channel::<(usize, Row)>();
    let rows = std::thread::scope(|scope| -> Result<Vec<Row>> {
        let cells = &cells;
        scope.spawn(move || {
            pool.install(|| {
                cells
                    .par_iter()
                    .enumerate()
                    .for_each_with(tx, |tx, (i, cell)| {
                        // The receiver only hangs up after a write error, already reported.
                        let _ = tx.send((i, run_cell(cfg, cell)));
                    });
            });
        });
        // Single sink: rows are released strictly in lattice order.
        let mut pending = BTreeMap::new();
        let mut rows = Vec::with_capacity(cells.len());
        for (i, row) in rx {
            pending.insert(i, row);
            while let Some(row) = pending.remove(&rows.len()) {
                if let Some(w) = writer.as_mut() {
                    w.serialize(&row)?;
                    w.flush()?;
                }
                rows.push(row);
            }
        }
        Ok(rows)
    })?;

    let mut files = Vec::new();
    if writer.is_some() {
        files.push(csv_path);
    }
    if cfg.output.formats.contains(&Format::Json) {
        let path = out_dir.join("results.json");
        fs::write(&path, serde_json::to_string_pretty(&rows)?)?;
        files.push(path);
    }
    let failures = rows.iter().filter(|r| r.failed()).count();
    let manifest_path = out_dir.join("manifest.json");
    let manifest = serde_json::json!({
        "tool": "ttvqe",
        "version": env!("CARGO_PKG_VERSION"),
        "schema_version": SCHEMA_VERSION,
        "columns": COLUMNS,
        "header_sha256": header_hash(),
        "fixtures": TFIM_CRITICAL_GROUND_ENERGIES
            .iter()
            .map(|(n, e)| serde_json::json!({ "n": n, "h": 1.0, "ground_energy": e }))
            .collect::<Vec<_>>(),
        "fixtures_sha256": fixture_hash(),
        "layers_note": LAYERS_NOTE,
        "config": cfg,
        "lattice_size": cells.len(),
        "rows": rows.len(),
        "failures": failures,
        "files": files
            .iter()
            .map(|p| p.file_name().map(|s| s.to_string_lossy().into_owned()))
            .collect::<Vec<_>>(),
    });
    let mut f = File::create(&manifest_path)?;
    writeln!(f, "{}", serde_json::to_string_pretty(&manifest)?)?;
    files.push(manifest_path);

    Ok(RunSummary {
        out_dir,
        rows,
        failures,
        files,
    })
}

/// Reads rows back from a results CSV.
pub fn read_rows(path: &Path) -> Result<Vec<Row>> {
    let mut reader =
        csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    reader
        .deserialize()
        .map(|r| r.with_context(|| format!("reading {}", path.display())))
        .collect()
}
