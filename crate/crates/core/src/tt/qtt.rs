//! Quantization of tensor modes: a mode of size `p^q` becomes `q` modes of
//! size `p`. Digits are most significant first, and the long index lists
//! all digits of dimension 1, then all digits of dimension 2, and so on.

use crate::error::{Error, Result};

/// `q` such that `p^q == size`.
pub fn exponent(size: usize, p: usize) -> Result<usize> {
    if p < 2 {
        return Err(Error::InvalidGrid(format!(
            "quantization base must be >= 2, got {p}"
        )));
    }
    let mut q = 0;
    let mut acc = 1usize;
    while acc < size {
        acc = acc
            .checked_mul(p)
            .ok_or_else(|| Error::InvalidGrid(format!("{size} overflows powers of {p}")))?;
        q += 1;
    }
    if acc != size {
        return Err(Error::InvalidGrid(format!("{size} is not a power of {p}")));
    }
    Ok(q)
}

/// Base-`p` digits of `k`, `q` of them, most significant first.
pub fn digits(k: usize, p: usize, q: usize) -> Vec<usize> {
    let mut out = vec![0; q];
    let mut rest = k;
    for slot in out.iter_mut().rev() {
        *slot = rest % p;
        rest /= p;
    }
    out
}

/// Inverse of [`digits`].
pub fn undigits(ds: &[usize], p: usize) -> usize {
    ds.iter().fold(0, |acc, &x| acc * p + x)
}

/// Expands a `d`-dimensional grid index (each entry `< p^q`) into `d * q`
/// digits.
pub fn unfold(index: &[usize], p: usize, q: usize) -> Result<Vec<usize>> {
    let size = p.pow(q as u32);
    let mut out = Vec::with_capacity(index.len() * q);
    for &k in index {
        if k >= size {
            return Err(Error::InvalidGrid(format!(
                "index {k} out of range for {p}^{q}"
            )));
        }
        out.extend(digits(k, p, q));
    }
    Ok(out)
}

/// Collapses `d * q` digits back into a `d`-dimensional grid index.
pub fn fold(long: &[usize], p: usize, q: usize) -> Result<Vec<usize>> {
    if q == 0 || !long.len().is_multiple_of(q) {
        return Err(Error::InvalidGrid(format!(
            "long index of length {} is not a multiple of q = {q}",
            long.len()
        )));
    }
    if let Some(&bad) = long.iter().find(|&&x| x >= p) {
        return Err(Error::InvalidGrid(format!(
            "digit {bad} out of range for base {p}"
        )));
    }
    Ok(long.chunks(q).map(|c| undigits(c, p)).collect())
}
