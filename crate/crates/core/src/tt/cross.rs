//! Two-dimensional cross approximation `A ≈ A_C Â^{-1} A_R` built by
//! alternating maxvol passes over columns and rows of an implicit matrix.

use std::collections::HashMap;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::maxvol::{maxvol, select_rows};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossConfig {
    pub rank: usize,
    /// Number of column/row alternations.
    pub iterations: usize,
    pub seed: u64,
    pub maxvol_tol: f64,
    /// Cap on distinct entry evaluations.
    pub max_evals: Option<usize>,
    /// Keep the row and column of the best entry in the index sets.
    pub keep_incumbent: bool,
    /// When the index sets stop changing before `iterations` is reached,
    /// continue from fresh random columns. The incumbent survives in the
    /// entry cache.
    pub restart_on_stall: bool,
}

impl Default for CrossConfig {
    fn default() -> Self {
        Self {
            rank: 2,
            iterations: 10,
            seed: 0,
            maxvol_tol: 0.01,
            max_evals: None,
            keep_incumbent: true,
            restart_on_stall: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CrossResult {
    /// Position and value of the evaluated entry with the largest modulus.
    pub best_index: (usize, usize),
    pub best_value: f64,
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    /// `A[:, cols]`
    pub a_c: DMatrix<f64>,
    /// `A[rows, cols]`
    pub a_hat: DMatrix<f64>,
    /// `A[rows, :]`
    pub a_r: DMatrix<f64>,
    pub evals: usize,
    pub iterations: usize,
    pub truncated: bool,
}

impl CrossResult {
    /// `A_C Â^{-1} A_R`.
    pub fn reconstruct(&self) -> Result<DMatrix<f64>> {
        let inv = self
            .a_hat
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Singular("cross intersection matrix is singular".into()))?;
        Ok(&self.a_c * inv * &self.a_r)
    }
}

struct Entries<F> {
    f: F,
    cache: HashMap<(usize, usize), f64>,
    budget: Option<usize>,
    best: Option<((usize, usize), f64)>,
}

impl<F: Fn(usize, usize) -> f64> Entries<F> {
    fn get(&mut self, i: usize, j: usize) -> Option<f64> {
        if let Some(&v) = self.cache.get(&(i, j)) {
            return Some(v);
        }
        if self.budget.is_some_and(|b| self.cache.len() >= b) {
            return None;
        }
        let v = (self.f)(i, j);
        self.cache.insert((i, j), v);
        let better = match self.best {
            None => true,
            Some((idx, b)) => v.abs() > b.abs() || (v.abs() == b.abs() && (i, j) < idx),
        };
        if better {
            self.best = Some(((i, j), v));
        }
        Some(v)
    }

    fn block(&mut self, rows: &[usize], cols: &[usize]) -> Option<DMatrix<f64>> {
        let mut m = DMatrix::zeros(rows.len(), cols.len());
        for (a, &i) in rows.iter().enumerate() {
            for (b, &j) in cols.iter().enumerate() {
                m[(a, b)] = self.get(i, j)?;
            }
        }
        Some(m)
    }
}

/// Maxvol rows of `block`. A forced row replaces the selected row whose
/// removal keeps the largest volume.
fn select(block: DMatrix<f64>, tol: f64, forced: Option<usize>) -> Result<Vec<usize>> {
    if block.nrows() == block.ncols() {
        return Ok((0..block.nrows()).collect());
    }
    let q = block.qr().q();
    let mut rows = maxvol(&q, tol)?;
    if let Some(inc) = forced.filter(|i| !rows.contains(i)) {
        if let Some(inv) = select_rows(&q, &rows).try_inverse() {
            let coeff = q.row(inc) * inv;
            let (pos, c) = coeff.iter().enumerate().fold((0, 0.0f64), |acc, (p, &c)| {
                if c.abs() > acc.1 {
                    (p, c.abs())
                } else {
                    acc
                }
            });
            if c > 0.0 {
                rows[pos] = inc;
            }
        }
    }
    Ok(rows)
}

/// Searches the `shape.0 x shape.1` matrix given by `f` for its largest
/// entry in modulus, alternating maxvol over `rank` columns and rows,
/// starting from `rank` random columns. Every evaluated entry is a
/// candidate for the maximum. The returned factors belong to the last
/// alternation.
pub fn cross_approx_2d<F>(f: F, shape: (usize, usize), cfg: &CrossConfig) -> Result<CrossResult>
where
    F: Fn(usize, usize) -> f64,
{
    let (n1, n2) = shape;
    let r = cfg.rank;
    if r == 0 || r > n1.min(n2) {
        return Err(Error::InvalidConfig(format!(
            "cross rank {r} must lie in 1..={} for a {n1}x{n2} matrix",
            n1.min(n2)
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut cols: Vec<usize> = rand::seq::index::sample(&mut rng, n2, r).into_vec();
    let mut rows: Vec<usize> = Vec::new();
    let all_rows: Vec<usize> = (0..n1).collect();
    let all_cols: Vec<usize> = (0..n2).collect();
    let mut entries = Entries {
        f,
        cache: HashMap::new(),
        budget: cfg.max_evals,
        best: None,
    };
    let mut truncated = false;
    let mut done = 0;
    let iterations = cfg.iterations.max(1);

    for it in 0..iterations {
        let Some(col_block) = entries.block(&all_rows, &cols) else {
            truncated = true;
            break;
        };
        let best_row = entries
            .best
            .filter(|_| cfg.keep_incumbent)
            .map(|((i, _), _)| i);
        let new_rows: Vec<usize> = select(col_block, cfg.maxvol_tol, best_row)?;
        let Some(row_block) = entries.block(&new_rows, &all_cols) else {
            truncated = true;
            rows = new_rows;
            break;
        };
        let best_col = entries
            .best
            .filter(|_| cfg.keep_incumbent)
            .map(|((_, j), _)| j);
        let new_cols: Vec<usize> = select(row_block.transpose(), cfg.maxvol_tol, best_col)?;
        done = it + 1;
        let stable = sorted(&new_rows) == sorted(&rows) && sorted(&new_cols) == sorted(&cols);
        rows = new_rows;
        cols = new_cols;
        if stable {
            if !cfg.restart_on_stall || it + 1 == iterations || r == n2 {
                break;
            }
            cols = rand::seq::index::sample(&mut rng, n2, r).into_vec();
        }
    }

    if !truncated && entries.block(&all_rows, &cols).is_none() {
        truncated = true;
    }

    let (best_index, best_value) = entries
        .best
        .ok_or_else(|| Error::InvalidConfig("evaluation budget allows no entries".into()))?;
    let cached = |i: usize, j: usize| entries.cache.get(&(i, j)).copied().unwrap_or(f64::NAN);
    let a_c = DMatrix::from_fn(n1, cols.len(), |i, b| cached(i, cols[b]));
    let a_hat = DMatrix::from_fn(rows.len(), cols.len(), |a, b| cached(rows[a], cols[b]));
    let a_r = DMatrix::from_fn(rows.len(), n2, |a, j| cached(rows[a], j));

    Ok(CrossResult {
        best_index,
        best_value,
        rows,
        cols,
        a_c,
        a_hat,
        a_r,
        evals: entries.cache.len(),
        iterations: done,
        truncated,
    })
}

fn sorted(v: &[usize]) -> Vec<usize> {
    let mut s = v.to_vec();
    s.sort_unstable();
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_one_outer_product_is_exact() {
        let u: Vec<f64> = (0..12).map(|i| (i as f64 * 0.7).sin() + 0.1).collect();
        let v: Vec<f64> = (0..9).map(|j| (j as f64 * 1.3).cos() - 0.2).collect();
        let cfg = CrossConfig {
            rank: 1,
            ..CrossConfig::default()
        };
        let res = cross_approx_2d(|i, j| u[i] * v[j], (12, 9), &cfg).unwrap();
        let approx = res.reconstruct().unwrap();
        let mut true_max = 0.0f64;
        for i in 0..12 {
            for j in 0..9 {
                assert!((approx[(i, j)] - u[i] * v[j]).abs() < 1e-8);
                true_max = true_max.max((u[i] * v[j]).abs());
            }
        }
        assert_eq!(res.best_value.abs(), true_max);
    }

    #[test]
    fn identity_best_entry_is_one() {
        let cfg = CrossConfig {
            rank: 2,
            ..CrossConfig::default()
        };
        let res = cross_approx_2d(|i, j| if i == j { 1.0 } else { 0.0 }, (8, 8), &cfg).unwrap();
        assert_eq!(res.best_value, 1.0);
        let approx = res.reconstruct().unwrap();
        let err = (0..8)
            .flat_map(|i| (0..8).map(move |j| (i, j)))
            .map(|(i, j)| (approx[(i, j)] - if i == j { 1.0 } else { 0.0 }).abs())
            .fold(0.0, f64::max);
        assert!(err > 0.5);
    }

    #[test]
    fn budget_exhaustion_flags_truncation() {
        let cfg = CrossConfig {
            rank: 2,
            max_evals: Some(10),
            ..CrossConfig::default()
        };
        let res = cross_approx_2d(|i, j| (i * j) as f64, (20, 20), &cfg).unwrap();
        assert!(res.truncated);
        assert_eq!(res.evals, 10);
    }

    #[test]
    fn rank_bounds() {
        let cfg = CrossConfig {
            rank: 5,
            ..CrossConfig::default()
        };
        assert!(cross_approx_2d(|_, _| 1.0, (4, 10), &cfg).is_err());
    }
}
