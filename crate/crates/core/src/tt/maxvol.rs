//! Rectangular maximal-volume row selection.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub const DEFAULT_MAX_SWAPS: usize = 100;

const JITTER: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Maxvol {
    /// Selected rows; `rows[j]` is the row occupying position `j` of the
    /// square submatrix.
    pub rows: Vec<usize>,
    pub swaps: usize,
    /// `ln |det|` of the submatrix after initialization and after each swap.
    pub log_volumes: Vec<f64>,
    /// Whether the dominance bound was reached before the swap cap.
    pub converged: bool,
    /// Whether jitter had to be added to break rank deficiency.
    pub jittered: bool,
}

/// Selects `R` rows of the `N x R` matrix `b` whose square submatrix `B̂`
/// satisfies `|B B̂^{-1}| <= 1 + tol` entrywise.
pub fn maxvol(b: &DMatrix<f64>, tol: f64) -> Result<Vec<usize>> {
    maxvol_with(b, tol, DEFAULT_MAX_SWAPS).map(|m| m.rows)
}

pub fn maxvol_with(b: &DMatrix<f64>, tol: f64, max_swaps: usize) -> Result<Maxvol> {
    let (n, r) = b.shape();
    if r == 0 || n < r {
        return Err(Error::InvalidConfig(format!(
            "maxvol needs a tall matrix, got {n}x{r}"
        )));
    }
    if tol <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "maxvol tolerance must be positive, got {tol}"
        )));
    }
    if b.iter().any(|x| !x.is_finite()) {
        return Err(Error::Singular(
            "maxvol input contains non-finite entries".into(),
        ));
    }

    let (rows, jittered, work) = match pivot_rows(b) {
        Some(rows) => (rows, false, None),
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(0x6d61_7876);
            let noisy = b.map(|x| x + JITTER * (2.0 * rng.random::<f64>() - 1.0));
            let rows = pivot_rows(&noisy).ok_or_else(|| {
                Error::Singular(format!(
                    "{n}x{r} matrix is rank deficient even after jitter"
                ))
            })?;
            (rows, true, Some(noisy))
        }
    };
    let b = work.as_ref().unwrap_or(b);

    let mut rows = rows;
    let square = select_rows(b, &rows);
    let lu = square.clone().lu();
    let det = lu.determinant();
    let inv = lu
        .try_inverse()
        .ok_or_else(|| Error::Singular("initial maxvol submatrix is singular".into()))?;
    let mut coeffs = b * inv;
    let mut log_volumes = vec![det.abs().ln()];
    let mut swaps = 0;
    let mut converged = false;

    loop {
        let (i, j, pivot) = argmax_abs(&coeffs);
        if pivot.abs() <= 1.0 + tol {
            converged = true;
            break;
        }
        if swaps == max_swaps {
            break;
        }
        // C <- C - C[:, j] (C[i, :] - e_j^T) / C[i, j]
        let col = coeffs.column(j).clone_owned();
        let mut row = coeffs.row(i).clone_owned();
        row[j] -= 1.0;
        coeffs -= (col / pivot) * row;
        rows[j] = i;
        swaps += 1;
        let last = *log_volumes.last().expect("non-empty");
        log_volumes.push(last + pivot.abs().ln());
    }

    Ok(Maxvol {
        rows,
        swaps,
        log_volumes,
        converged,
        jittered,
    })
}

/// `B[rows, :]`.
pub fn select_rows(b: &DMatrix<f64>, rows: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), b.ncols(), |i, j| b[(rows[i], j)])
}

/// Initial rows from Gaussian elimination with partial pivoting. `None`
/// when a pivot vanishes.
fn pivot_rows(b: &DMatrix<f64>) -> Option<Vec<usize>> {
    let (n, r) = b.shape();
    let scale = b.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return None;
    }
    let floor = scale * f64::EPSILON * n as f64;
    let mut a = b.clone();
    let mut chosen = vec![false; n];
    let mut rows = Vec::with_capacity(r);
    for j in 0..r {
        let mut best = None;
        let mut best_abs = 0.0;
        for i in 0..n {
            if !chosen[i] && a[(i, j)].abs() > best_abs {
                best_abs = a[(i, j)].abs();
                best = Some(i);
            }
        }
        let p = best.filter(|_| best_abs > floor)?;
        chosen[p] = true;
        rows.push(p);
        let pivot = a[(p, j)];
        for i in 0..n {
            if chosen[i] {
                continue;
            }
            let factor = a[(i, j)] / pivot;
            if factor != 0.0 {
                for k in j + 1..r {
                    let v = a[(p, k)];
                    a[(i, k)] -= factor * v;
                }
            }
        }
    }
    Some(rows)
}

/// Entry of largest modulus; ties go to the lowest row-major position.
fn argmax_abs(m: &DMatrix<f64>) -> (usize, usize, f64) {
    let mut best = (0, 0, m[(0, 0)]);
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if m[(i, j)].abs() > best.2.abs() {
                best = (i, j, m[(i, j)]);
            }
        }
    }
    best
}

/// Largest `|B B̂^{-1}|` entry for a given row selection.
pub fn dominance(b: &DMatrix<f64>, rows: &[usize]) -> Result<f64> {
    let inv = select_rows(b, rows)
        .try_inverse()
        .ok_or_else(|| Error::Singular("selected submatrix is singular".into()))?;
    Ok((b * inv).iter().fold(0.0, |m, x| m.max(x.abs())))
}
