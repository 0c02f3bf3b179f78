//! Derivative-free minimization over a tensor grid by tensor-train cross
//! sweeps.
//!
//! The objective on the grid is viewed as an implicit tensor (optionally
//! quantized into a longer tensor of small modes). A forward sweep walks the
//! unfoldings left to right: at mode `k` it evaluates the fibre block
//! `left[k] x mode_k x right[k+1]`, then runs maxvol on the
//! `(r_k m_k) x r_{k+1}` matricization to choose the next left index set. A
//! backward sweep does the same right to left over row sets. Every evaluated
//! entry competes for the incumbent.

use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::maxvol::maxvol;
use super::qtt;
use crate::error::{Error, Result};
use crate::record::{OptRecord, Termination};

/// Discretization of a box into `nodes_per_dim` points per axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub d: usize,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub nodes_per_dim: usize,
    /// Quantize each mode of size `p^q` into `q` modes of size `p`.
    pub qtt: bool,
    pub qtt_p: usize,
    pub qtt_q: usize,
}

impl GridSpec {
    /// `[0, 2π)^d` with `2^8` nodes per axis, quantized with `p = 2, q = 8`.
    pub fn angles(d: usize) -> Self {
        Self {
            qtt: true,
            qtt_q: 8,
            ..Self::uniform(d, 0.0, 2.0 * PI, 256)
        }
    }

    /// Unquantized box `[lower, upper)^d`.
    pub fn uniform(d: usize, lower: f64, upper: f64, nodes_per_dim: usize) -> Self {
        Self {
            d,
            lower: vec![lower; d],
            upper: vec![upper; d],
            nodes_per_dim,
            qtt: false,
            qtt_p: 2,
            qtt_q: 0,
        }
    }

    pub fn with_qtt(mut self, p: usize, q: usize) -> Result<Self> {
        self.qtt = true;
        self.qtt_p = p;
        self.qtt_q = q;
        self.validate()?;
        Ok(self)
    }

    pub fn without_qtt(mut self) -> Self {
        self.qtt = false;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::InvalidGrid(
                "grid needs at least one dimension".into(),
            ));
        }
        if self.lower.len() != self.d || self.upper.len() != self.d {
            return Err(Error::InvalidGrid(format!(
                "bounds must have {} entries, got {} and {}",
                self.d,
                self.lower.len(),
                self.upper.len()
            )));
        }
        if self
            .lower
            .iter()
            .zip(&self.upper)
            .any(|(l, u)| !(l < u) || !l.is_finite() || !u.is_finite())
        {
            return Err(Error::InvalidGrid(
                "each lower bound must be below its upper bound".into(),
            ));
        }
        if self.nodes_per_dim < 2 {
            return Err(Error::InvalidGrid(
                "need at least two nodes per dimension".into(),
            ));
        }
        if self.qtt {
            if self.qtt_p < 2 || self.qtt_q < 2 {
                return Err(Error::InvalidGrid(format!(
                    "quantization needs p >= 2 and q >= 2, got p = {}, q = {}",
                    self.qtt_p, self.qtt_q
                )));
            }
            let q = qtt::exponent(self.nodes_per_dim, self.qtt_p)?;
            if q != self.qtt_q {
                return Err(Error::InvalidGrid(format!(
                    "{} nodes is {}^{q}, not {}^{}",
                    self.nodes_per_dim, self.qtt_p, self.qtt_p, self.qtt_q
                )));
            }
        }
        Ok(())
    }

    /// Coordinate of node `k` along `axis`; the upper endpoint is excluded.
    pub fn point(&self, axis: usize, k: usize) -> f64 {
        let (l, u) = (self.lower[axis], self.upper[axis]);
        l + (u - l) * k as f64 / self.nodes_per_dim as f64
    }

    pub fn to_theta(&self, index: &[usize]) -> Vec<f64> {
        index
            .iter()
            .enumerate()
            .map(|(a, &k)| self.point(a, k))
            .collect()
    }

    /// Mode sizes of the tensor the sweeps actually run over.
    pub fn modes(&self) -> Vec<usize> {
        if self.qtt {
            vec![self.qtt_p; self.d * self.qtt_q]
        } else {
            vec![self.nodes_per_dim; self.d]
        }
    }

    /// Long (swept) index -> grid index.
    pub fn grid_index(&self, long: &[usize]) -> Vec<usize> {
        if self.qtt {
            long.chunks(self.qtt_q)
                .map(|c| qtt::undigits(c, self.qtt_p))
                .collect()
        } else {
            long.to_vec()
        }
    }

    /// Grid index -> long (swept) index.
    pub fn long_index(&self, grid: &[usize]) -> Result<Vec<usize>> {
        if self.qtt {
            qtt::unfold(grid, self.qtt_p, self.qtt_q)
        } else {
            Ok(grid.to_vec())
        }
    }
}

/// How objective values are turned into the quantity maxvol maximizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueMap {
    /// `g = -f`.
    Negate,
    /// `g = π/2 - atan(f - f_best)`: positive, peaked at the incumbent.
    #[default]
    Arctan,
}

impl fmt::Display for ValueMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ValueMap::Negate => "negate",
            ValueMap::Arctan => "arctan",
        })
    }
}

impl FromStr for ValueMap {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "negate" => Ok(ValueMap::Negate),
            "arctan" => Ok(ValueMap::Arctan),
            other => Err(Error::InvalidConfig(format!("unknown value map {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TTOptConfig {
    /// Uniform TT rank across unfoldings.
    pub rank: usize,
    pub max_evals: u64,
    pub max_sweeps: usize,
    pub seed: u64,
    pub maxvol_tol: f64,
    pub value_map: ValueMap,
    /// Keep the incumbent's prefix/suffix in the index sets after maxvol.
    pub keep_incumbent: bool,
    /// Evaluate each fibre block on the rayon pool. The objective must be
    /// safe to call concurrently.
    pub parallel: bool,
}

impl Default for TTOptConfig {
    fn default() -> Self {
        Self {
            rank: 10,
            max_evals: 5_000_000,
            max_sweeps: 1_000,
            seed: 0,
            maxvol_tol: 0.01,
            value_map: ValueMap::Arctan,
            keep_incumbent: true,
            parallel: false,
        }
    }
}

impl TTOptConfig {
    pub fn validate(&self) -> Result<()> {
        if self.rank == 0 {
            return Err(Error::InvalidConfig("rank must be at least 1".into()));
        }
        if self.max_evals < (self.rank * self.rank) as u64 {
            return Err(Error::InvalidConfig(format!(
                "max_evals = {} is below rank^2 = {}",
                self.max_evals,
                self.rank * self.rank
            )));
        }
        if !(self.maxvol_tol > 0.0) {
            return Err(Error::InvalidConfig("maxvol_tol must be positive".into()));
        }
        if self.max_sweeps == 0 {
            return Err(Error::InvalidConfig("max_sweeps must be at least 1".into()));
        }
        Ok(())
    }
}

/// Ranks `r_0 = 1, r_1, ..., r_D = 1` capped by the unfolding sizes.
pub fn unfolding_ranks(modes: &[usize], rank: usize) -> Vec<usize> {
    let dd = modes.len();
    let mut ranks = vec![1; dd + 1];
    for k in 1..dd {
        let left = modes[..k].iter().fold(1usize, |a, &m| a.saturating_mul(m));
        let right = modes[k..].iter().fold(1usize, |a, &m| a.saturating_mul(m));
        ranks[k] = rank.min(left).min(right);
    }
    ranks
}

/// Sweep state over a long tensor with mode sizes `modes`.
struct Search<'a, F> {
    f: &'a F,
    grid: &'a GridSpec,
    cfg: &'a TTOptConfig,
    modes: Vec<usize>,
    ranks: Vec<usize>,
    left: Vec<Vec<Vec<usize>>>,
    right: Vec<Vec<Vec<usize>>>,
    cache: HashMap<Vec<usize>, f64>,
    evals: u64,
    cache_hits: u64,
    /// (value, long index) of the best evaluated entry.
    best: Option<(f64, Vec<usize>)>,
    trace: Vec<(u64, f64)>,
}

enum Block {
    Done(Vec<f64>),
    Truncated,
}

impl<'a, F> Search<'a, F>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    fn new(f: &'a F, grid: &'a GridSpec, cfg: &'a TTOptConfig) -> Self {
        let modes = grid.modes();
        let ranks = unfolding_ranks(&modes, cfg.rank);
        let dd = modes.len();
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

        // nested random right index sets, built from the last mode backwards
        let mut right = vec![Vec::new(); dd + 1];
        right[dd] = vec![Vec::new()];
        for k in (1..dd).rev() {
            let next = &right[k + 1];
            let pool = modes[k] * next.len();
            let picks = rand::seq::index::sample(&mut rng, pool, ranks[k]).into_vec();
            right[k] = picks
                .into_iter()
                .map(|p| {
                    let (i, b) = (p / next.len(), p % next.len());
                    let mut idx = Vec::with_capacity(dd - k);
                    idx.push(i);
                    idx.extend_from_slice(&next[b]);
                    idx
                })
                .collect();
        }
        let mut left = vec![Vec::new(); dd + 1];
        left[0] = vec![Vec::new()];

        Self {
            f,
            grid,
            cfg,
            modes,
            ranks,
            left,
            right,
            cache: HashMap::new(),
            evals: 0,
            cache_hits: 0,
            best: None,
            trace: Vec::new(),
        }
    }

    fn objective(&self, long: &[usize]) -> f64 {
        (self.f)(&self.grid.to_theta(&self.grid.grid_index(long)))
    }

    /// Evaluates `left[k] x mode_k x right[k+1]`, laid out `[a][i][b]`.
    fn block(&mut self, k: usize) -> Block {
        let m = self.modes[k];
        let (ls, rs) = (&self.left[k], &self.right[k + 1]);
        let mut indices = Vec::with_capacity(ls.len() * m * rs.len());
        for l in ls {
            for i in 0..m {
                for r in rs {
                    let mut idx = Vec::with_capacity(self.modes.len());
                    idx.extend_from_slice(l);
                    idx.push(i);
                    idx.extend_from_slice(r);
                    indices.push(idx);
                }
            }
        }

        let mut misses: Vec<&Vec<usize>> = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for idx in &indices {
            if self.cache.contains_key(idx) {
                self.cache_hits += 1;
            } else if seen.insert(idx) {
                misses.push(idx);
            }
        }
        let remaining = self.cfg.max_evals.saturating_sub(self.evals) as usize;
        let truncated = misses.len() > remaining;
        misses.truncate(remaining);

        let values: Vec<f64> = if self.cfg.parallel {
            misses.par_iter().map(|idx| self.objective(idx)).collect()
        } else {
            misses.iter().map(|idx| self.objective(idx)).collect()
        };
        self.evals += values.len() as u64;
        for (idx, v) in misses.into_iter().zip(values) {
            self.cache.insert(idx.clone(), v);
        }

        // incumbent update in block order; ties keep the lowest grid index
        for idx in &indices {
            if let Some(&v) = self.cache.get(idx) {
                let better = match &self.best {
                    None => true,
                    Some((b, bi)) => {
                        v < *b || (v == *b && self.grid.grid_index(idx) < self.grid.grid_index(bi))
                    }
                };
                if better {
                    self.best = Some((v, idx.clone()));
                    self.trace.push((self.evals, v));
                }
            }
        }
        if truncated {
            return Block::Truncated;
        }
        Block::Done(indices.iter().map(|idx| self.cache[idx]).collect())
    }

    fn mapped(&self, v: f64) -> f64 {
        match self.cfg.value_map {
            ValueMap::Negate => -v,
            ValueMap::Arctan => {
                let best = self.best.as_ref().map_or(v, |b| b.0);
                FRAC_PI_2 - (v - best).atan()
            }
        }
    }

    /// Chooses `keep` rows of `m`; `incumbent_row` is forced in when set.
    fn select_rows(
        &self,
        m: DMatrix<f64>,
        keep: usize,
        incumbent_row: Option<usize>,
    ) -> Result<Vec<usize>> {
        if m.nrows() == keep {
            return Ok((0..keep).collect());
        }
        let row_peak: Vec<f64> = (0..m.nrows())
            .map(|i| m.row(i).iter().copied().fold(f64::NEG_INFINITY, f64::max))
            .collect();
        let mut rows = maxvol(&m.qr().q(), self.cfg.maxvol_tol)?;
        if let Some(inc) = incumbent_row {
            if !rows.contains(&inc) {
                // drop the selected row with the lowest peak; ties drop the later one
                let (pos, _) = rows
                    .iter()
                    .enumerate()
                    .fold(None::<(usize, f64)>, |acc, (p, &r)| match acc {
                        Some((_, v)) if row_peak[r] > v => acc,
                        _ => Some((p, row_peak[r])),
                    })
                    .expect("non-empty selection");
                rows[pos] = inc;
            }
        }
        Ok(rows)
    }

    fn forward_step(&mut self, k: usize, values: &[f64]) -> Result<()> {
        let (r0, m, r1) = (self.left[k].len(), self.modes[k], self.right[k + 1].len());
        let mat = DMatrix::from_fn(r0 * m, r1, |row, b| {
            let (a, i) = (row / m, row % m);
            self.mapped(values[(a * m + i) * r1 + b])
        });
        let inc = if self.cfg.keep_incumbent {
            self.best.as_ref().and_then(|(_, bi)| {
                let a = self.left[k].iter().position(|l| l[..] == bi[..k])?;
                Some(a * m + bi[k])
            })
        } else {
            None
        };
        let rows = self.select_rows(mat, self.ranks[k + 1], inc)?;
        self.left[k + 1] = rows
            .into_iter()
            .map(|row| {
                let mut idx = self.left[k][row / m].clone();
                idx.push(row % m);
                idx
            })
            .collect();
        Ok(())
    }

    fn backward_step(&mut self, k: usize, values: &[f64]) -> Result<()> {
        let (r0, m, r1) = (self.left[k].len(), self.modes[k], self.right[k + 1].len());
        let mat = DMatrix::from_fn(m * r1, r0, |row, a| {
            let (i, b) = (row / r1, row % r1);
            self.mapped(values[(a * m + i) * r1 + b])
        });
        let inc = if self.cfg.keep_incumbent {
            self.best.as_ref().and_then(|(_, bi)| {
                let b = self.right[k + 1]
                    .iter()
                    .position(|r| r[..] == bi[k + 1..])?;
                Some(bi[k] * r1 + b)
            })
        } else {
            None
        };
        let rows = self.select_rows(mat, self.ranks[k], inc)?;
        self.right[k] = rows
            .into_iter()
            .map(|row| {
                let mut idx = vec![row / r1];
                idx.extend_from_slice(&self.right[k + 1][row % r1]);
                idx
            })
            .collect();
        Ok(())
    }

    fn run(&mut self) -> Result<Termination> {
        let dd = self.modes.len();
        let mut sweeps = 0;
        loop {
            let before = self.best.as_ref().map(|b| b.0);
            for k in 0..dd {
                let Block::Done(values) = self.block(k) else {
                    return Ok(Termination::Truncated);
                };
                if k + 1 < dd {
                    self.forward_step(k, &values)?;
                }
            }
            for k in (0..dd).rev() {
                let Block::Done(values) = self.block(k) else {
                    return Ok(Termination::Truncated);
                };
                if k > 0 {
                    self.backward_step(k, &values)?;
                }
            }
            sweeps += 1;
            let after = self.best.as_ref().map(|b| b.0);
            if before.is_some() && after >= before {
                return Ok(Termination::NoImprovement);
            }
            if sweeps >= self.cfg.max_sweeps {
                return Ok(Termination::SweepCap);
            }
            if self.evals >= self.cfg.max_evals {
                return Ok(Termination::Truncated);
            }
        }
    }
}

/// Minimizes `f` over the grid by tensor-train cross sweeps.
pub fn ttopt_minimize<F>(f: &F, grid: &GridSpec, cfg: &TTOptConfig) -> Result<OptRecord>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    grid.validate()?;
    cfg.validate()?;
    let start = Instant::now();
    let mut search = Search::new(f, grid, cfg);
    let status = search.run()?;
    let (best_value, best_long) = search.best.clone().ok_or_else(|| {
        Error::InvalidConfig("evaluation budget allows no objective calls".into())
    })?;
    Ok(OptRecord {
        best_theta: grid.to_theta(&grid.grid_index(&best_long)),
        best_value,
        evals_used: search.evals,
        cache_hits: search.cache_hits,
        trace: search.trace,
        wall_time: start.elapsed().as_secs_f64(),
        status,
        skipped_updates: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::{AtomicU64, Ordering};

    fn cosine_bowl(theta: &[f64]) -> f64 {
        theta.iter().map(|t| 1.0 - t.cos()).sum()
    }

    #[test]
    fn grid_points_exclude_upper_endpoint() {
        let g = GridSpec::angles(2);
        assert_eq!(g.point(0, 0), 0.0);
        assert!((g.point(1, 255) - 2.0 * PI * 255.0 / 256.0).abs() < 1e-15);
        assert_eq!(g.modes().len(), 16);
    }

    #[test]
    fn grid_validation() {
        assert!(GridSpec::angles(0).validate().is_err());
        assert!(GridSpec::uniform(2, 0.0, 1.0, 100).with_qtt(2, 7).is_err());
        assert!(GridSpec::uniform(2, 0.0, 1.0, 16).with_qtt(2, 4).is_ok());
        assert!(GridSpec::uniform(2, 0.0, 1.0, 2).with_qtt(2, 1).is_err());
        assert!(GridSpec::uniform(2, 1.0, 1.0, 16).validate().is_err());
    }

    #[test]
    fn config_validation() {
        let bad = TTOptConfig {
            max_evals: 3,
            ..TTOptConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = TTOptConfig {
            rank: 0,
            ..TTOptConfig::default()
        };
        assert!(bad.validate().is_err());
        assert!(
            ttopt_minimize(&cosine_bowl, &GridSpec::angles(0), &TTOptConfig::default()).is_err()
        );
    }

    #[test]
    fn ranks_respect_unfolding_sizes() {
        assert_eq!(unfolding_ranks(&[2, 2, 2, 2], 4), vec![1, 2, 4, 2, 1]);
        assert_eq!(unfolding_ranks(&[16], 4), vec![1, 1]);
    }

    #[test]
    fn separable_minimum_on_grid() {
        let rec =
            ttopt_minimize(&cosine_bowl, &GridSpec::angles(4), &TTOptConfig::default()).unwrap();
        assert!(rec.best_value <= 1e-12, "{}", rec.best_value);
        assert!(rec.best_theta.iter().all(|&t| t == 0.0));
        assert!(rec.trace_is_monotone());
    }

    #[test]
    fn one_dimension_scans_the_vector() {
        let grid = GridSpec::uniform(1, -1.0, 1.0, 64);
        let f = |t: &[f64]| (t[0] - 0.3).powi(2);
        let rec = ttopt_minimize(&f, &grid, &TTOptConfig::default()).unwrap();
        let exact = (0..64)
            .map(|k| f(&[grid.point(0, k)]))
            .fold(f64::INFINITY, f64::min);
        assert_eq!(rec.best_value, exact);
        assert_eq!(rec.evals_used, 64);
    }

    #[test]
    fn every_call_is_counted_and_budget_respected() {
        let calls = AtomicU64::new(0);
        let f = |t: &[f64]| {
            calls.fetch_add(1, Ordering::Relaxed);
            cosine_bowl(t)
        };
        let cfg = TTOptConfig {
            max_evals: 500,
            ..TTOptConfig::default()
        };
        let rec = ttopt_minimize(&f, &GridSpec::angles(6), &cfg).unwrap();
        assert_eq!(rec.evals_used, calls.load(Ordering::Relaxed));
        assert!(rec.evals_used <= 500);
        assert_eq!(rec.status, Termination::Truncated);
    }

    #[test]
    fn reported_value_is_reproducible() {
        let f = |t: &[f64]| (t[0] - 1.0).sin() * (t[1] + 0.5).cos() + 0.1 * t[2];
        let cfg = TTOptConfig {
            seed: 7,
            ..TTOptConfig::default()
        };
        let a = ttopt_minimize(&f, &GridSpec::angles(3), &cfg).unwrap();
        let b = ttopt_minimize(&f, &GridSpec::angles(3), &cfg).unwrap();
        assert_eq!(f(&a.best_theta), a.best_value);
        assert_eq!(a.best_theta, b.best_theta);
        assert_eq!(a.trace, b.trace);
        let par = TTOptConfig {
            parallel: true,
            ..cfg
        };
        let c = ttopt_minimize(&f, &GridSpec::angles(3), &par).unwrap();
        assert_eq!(a.trace, c.trace);
    }

    #[test]
    fn value_map_parsing() {
        assert_eq!("negate".parse::<ValueMap>().unwrap(), ValueMap::Negate);
        assert!("log".parse::<ValueMap>().is_err());
    }
}
