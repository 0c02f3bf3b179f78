//! Pure and mixed quantum states over `n` qubits.
//!
//! Basis convention: qubit 1 is the most significant bit of the basis index,
//! so `|q1 q2 ... qn>` has index `q1 * 2^(n-1) + ... + qn`.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Bit mask of 1-based qubit `q` in an `n`-qubit basis index.
#[inline]
pub(crate) fn qubit_mask(n: usize, q: usize) -> usize {
    1 << (n - q)
}

/// A normalized statevector of `2^n` amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<C64>,
}

impl StateVector {
    /// `|0...0>`.
    pub fn zero(n: usize) -> Self {
        let mut amps = vec![C64::new(0.0, 0.0); 1 << n];
        amps[0] = C64::new(1.0, 0.0);
        Self { n, amps }
    }

    /// `|+...+>`, the ground state of `-sum X_i`.
    pub fn plus(n: usize) -> Self {
        let dim = 1usize << n;
        let a = C64::new((dim as f64).sqrt().recip(), 0.0);
        Self {
            n,
            amps: vec![a; dim],
        }
    }

    /// Wraps raw amplitudes. The length must be a power of two; the vector is
    /// not renormalized.
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        let dim = amps.len();
        if dim == 0 || !dim.is_power_of_two() {
            return Err(Error::DimensionMismatch {
                expected: dim.next_power_of_two().max(1),
                got: dim,
            });
        }
        Ok(Self {
            n: dim.trailing_zeros() as usize,
            amps,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// The projector `|psi><psi|`.
    pub fn to_density(&self) -> DensityMatrix {
        let dim = self.dim();
        let mut entries = vec![C64::new(0.0, 0.0); dim * dim];
        for (r, a) in self.amps.iter().enumerate() {
            for (c, b) in self.amps.iter().enumerate() {
                entries[r * dim + c] = a * b.conj();
            }
        }
        DensityMatrix { n: self.n, entries }
    }
}

/// A `2^n x 2^n` density matrix stored row-major.
///
/// Flattened, the storage is itself a `2n`-qubit vector whose first `n`
/// qubits index rows and last `n` qubits index columns, which lets the
/// simulator reuse the statevector kernels for `U rho U^dagger`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n: usize,
    entries: Vec<C64>,
}

impl DensityMatrix {
    /// `|0...0><0...0|`.
    pub fn zero(n: usize) -> Self {
        StateVector::zero(n).to_density()
    }

    /// The maximally mixed state `I / 2^n`.
    pub fn maximally_mixed(n: usize) -> Self {
        let dim = 1usize << n;
        let mut entries = vec![C64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = C64::new(1.0 / dim as f64, 0.0);
        }
        Self { n, entries }
    }

    /// Wraps a row-major `dim x dim` buffer, `dim` a power of two.
    pub fn from_row_major(dim: usize, entries: Vec<C64>) -> Result<Self> {
        if dim == 0 || !dim.is_power_of_two() {
            return Err(Error::DimensionMismatch {
                expected: dim.next_power_of_two().max(1),
                got: dim,
            });
        }
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: entries.len(),
            });
        }
        Ok(Self {
            n: dim.trailing_zeros() as usize,
            entries,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.entries[row * self.dim() + col]
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub(crate) fn entries_mut(&mut self) -> &mut [C64] {
        &mut self.entries
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim()).map(|i| self.get(i, i)).sum()
    }

    /// Largest `|rho - rho^dagger|` entry.
    pub fn hermiticity_error(&self) -> f64 {
        let dim = self.dim();
        let mut worst = 0.0f64;
        for r in 0..dim {
            for c in r..dim {
                worst = worst.max((self.get(r, c) - self.get(c, r).conj()).norm());
            }
        }
        worst
    }

    /// Smallest eigenvalue, via a dense Hermitian eigensolve.
    pub fn min_eigenvalue(&self) -> f64 {
        let dim = self.dim();
        let m = nalgebra::DMatrix::from_fn(dim, dim, |r, c| self.get(r, c));
        m.symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest absolute entry difference.
    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_states() {
        let z = StateVector::zero(3);
        assert_eq!(z.amplitudes()[0], C64::new(1.0, 0.0));
        assert!((z.norm() - 1.0).abs() < 1e-15);
        let p = StateVector::plus(3);
        assert!((p.norm() - 1.0).abs() < 1e-15);
        assert!((p.amplitudes()[5].re - 8f64.sqrt().recip()).abs() < 1e-15);
    }

    #[test]
    fn qubit_one_is_most_significant() {
        assert_eq!(qubit_mask(3, 1), 0b100);
        assert_eq!(qubit_mask(3, 3), 0b001);
    }

    #[test]
    fn projector_is_a_state() {
        let rho = StateVector::plus(2).to_density();
        assert!((rho.trace().re - 1.0).abs() < 1e-14);
        assert!(rho.hermiticity_error() < 1e-15);
        assert!(rho.min_eigenvalue() > -1e-12);
        let mixed = DensityMatrix::maximally_mixed(2);
        assert!((mixed.get(3, 3).re - 0.25).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_power_of_two() {
        assert!(StateVector::from_amplitudes(vec![C64::new(1.0, 0.0); 3]).is_err());
        assert!(DensityMatrix::from_row_major(2, vec![C64::new(0.0, 0.0); 3]).is_err());
    }
}
