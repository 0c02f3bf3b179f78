//! Hamiltonians as weighted sums of Pauli strings.
//!
//! Expectation values are computed term by term with bit masks; the dense
//! matrix route ([`Hamiltonian::to_dense`]) is built from Kronecker products
//! and serves as the exact-diagonalization oracle.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::{DensityMatrix, StateVector};

/// Largest qubit count for which a dense matrix is ever materialized.
pub const DENSE_QUBIT_CAP: usize = 12;

/// Terms whose merged coefficient falls below this magnitude are dropped.
const ZERO_COEFF_TOL: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn matrix(self) -> [[C64; 2]; 2] {
        let o = C64::new(0.0, 0.0);
        let l = C64::new(1.0, 0.0);
        let i = C64::new(0.0, 1.0);
        match self {
            Pauli::I => [[l, o], [o, l]],
            Pauli::X => [[o, l], [l, o]],
            Pauli::Y => [[o, -i], [i, o]],
            Pauli::Z => [[l, o], [o, -l]],
        }
    }

    fn from_char(c: char) -> Option<Self> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// A real-weighted tensor product of single-qubit Paulis; `letters[0]` acts
/// on qubit 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliString {
    letters: Vec<Pauli>,
    coefficient: f64,
}

impl PauliString {
    pub fn new(letters: Vec<Pauli>, coefficient: f64) -> Result<Self> {
        if letters.is_empty() {
            return Err(Error::TooFewQubits { min: 1, got: 0 });
        }
        if !coefficient.is_finite() {
            return Err(Error::InvalidPauli(format!(
                "coefficient must be finite, got {coefficient}"
            )));
        }
        Ok(Self {
            letters,
            coefficient,
        })
    }

    /// Parses a label such as `"ZZII"`.
    pub fn parse(label: &str, coefficient: f64) -> Result<Self> {
        let letters = label
            .chars()
            .map(|c| {
                Pauli::from_char(c).ok_or_else(|| {
                    Error::InvalidPauli(format!("unknown letter {c:?} in {label:?}"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(letters, coefficient)
    }

    /// Identity everywhere except the given `(qubit, letter)` pairs (1-based).
    pub fn sparse(n: usize, ops: &[(usize, Pauli)], coefficient: f64) -> Result<Self> {
        let mut letters = vec![Pauli::I; n];
        for &(q, p) in ops {
            if q == 0 || q > n {
                return Err(Error::QubitOutOfRange { index: q, n });
            }
            letters[q - 1] = p;
        }
        Self::new(letters, coefficient)
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    pub fn coefficient(&self) -> f64 {
        self.coefficient
    }

    pub fn num_qubits(&self) -> usize {
        self.letters.len()
    }

    pub fn label(&self) -> String {
        self.letters.iter().map(|p| p.as_char()).collect()
    }

    /// Bit-mask form: `P = i^{ny} X^{x_mask} Z^{z_mask}`.
    fn masks(&self) -> (usize, usize, u32) {
        let n = self.letters.len();
        let (mut x, mut z, mut ny) = (0usize, 0usize, 0u32);
        for (k, p) in self.letters.iter().enumerate() {
            let bit = 1usize << (n - 1 - k);
            match p {
                Pauli::I => {}
                Pauli::X => x |= bit,
                Pauli::Z => z |= bit,
                Pauli::Y => {
                    x |= bit;
                    z |= bit;
                    ny += 1;
                }
            }
        }
        (x, z, ny)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:+} {}", self.coefficient, self.label())
    }
}

fn i_pow(k: u32) -> C64 {
    match k % 4 {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    }
}

/// A Hermitian operator `sum_k c_k P_k` in canonical form: one term per
/// distinct letter sequence, sorted, with zero coefficients removed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hamiltonian {
    n: usize,
    terms: Vec<PauliString>,
}

impl Hamiltonian {
    pub fn new(n: usize, terms: impl IntoIterator<Item = PauliString>) -> Result<Self> {
        if n == 0 {
            return Err(Error::TooFewQubits { min: 1, got: 0 });
        }
        let mut merged: BTreeMap<Vec<Pauli>, f64> = BTreeMap::new();
        for t in terms {
            if t.num_qubits() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: t.num_qubits(),
                });
            }
            *merged.entry(t.letters).or_insert(0.0) += t.coefficient;
        }
        let terms = merged
            .into_iter()
            .filter(|(_, c)| c.abs() > ZERO_COEFF_TOL)
            .map(|(letters, coefficient)| PauliString {
                letters,
                coefficient,
            })
            .collect();
        Ok(Self { n, terms })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[PauliString] {
        &self.terms
    }

    /// Dense `2^n x 2^n` matrix, built from Kronecker products with qubit 1
    /// as the leftmost factor.
    pub fn to_dense(&self) -> Result<DMatrix<C64>> {
        if self.n > DENSE_QUBIT_CAP {
            return Err(Error::TooManyQubits {
                cap: DENSE_QUBIT_CAP,
                got: self.n,
            });
        }
        let dim = 1usize << self.n;
        let mut out = DMatrix::<C64>::zeros(dim, dim);
        for term in &self.terms {
            let mut m = DMatrix::<C64>::from_element(1, 1, C64::new(term.coefficient, 0.0));
            for p in &term.letters {
                let pm = p.matrix();
                let local = DMatrix::from_fn(2, 2, |r, c| pm[r][c]);
                m = m.kronecker(&local);
            }
            out += m;
        }
        Ok(out)
    }

    /// Smallest eigenvalue of the dense matrix.
    pub fn ground_energy(&self) -> Result<f64> {
        let dense = self.to_dense()?;
        Ok(dense
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min))
    }

    /// `Re <psi|H|psi>`, applied term by term.
    pub fn expectation_pure(&self, psi: &StateVector) -> Result<f64> {
        let dim = 1usize << self.n;
        if psi.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: psi.dim(),
            });
        }
        let amps = psi.amplitudes();
        let mut total = 0.0;
        for term in &self.terms {
            let (x, z, ny) = term.masks();
            // <psi|P|psi> = sum_b conj(psi[b^x]) i^ny (-1)^{|b&z|} psi[b]
            let mut acc = C64::new(0.0, 0.0);
            for (b, a) in amps.iter().enumerate() {
                let v = amps[b ^ x].conj() * a;
                if (b & z).count_ones() % 2 == 0 {
                    acc += v;
                } else {
                    acc -= v;
                }
            }
            total += term.coefficient * (i_pow(ny) * acc).re;
        }
        Ok(total)
    }

    /// `Re Tr(H rho)`.
    pub fn expectation_mixed(&self, rho: &DensityMatrix) -> Result<f64> {
        let dim = 1usize << self.n;
        if rho.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: rho.dim(),
            });
        }
        let mut total = 0.0;
        for term in &self.terms {
            let (x, z, ny) = term.masks();
            // P|c> = i^ny (-1)^{|c&z|} |c^x>, so Tr(P rho) = sum_c phase(c) rho[c][c^x]
            let mut acc = C64::new(0.0, 0.0);
            for c in 0..dim {
                let v = rho.get(c, c ^ x);
                if (c & z).count_ones() % 2 == 0 {
                    acc += v;
                } else {
                    acc -= v;
                }
            }
            total += term.coefficient * (i_pow(ny) * acc).re;
        }
        Ok(total)
    }
}

impl fmt::Display for Hamiltonian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, t) in self.terms.iter().enumerate() {
            if k > 0 {
                writeln!(f)?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

/// Transverse-field Ising chain with open boundaries:
/// `H = -sum_{i<n} Z_i Z_{i+1} - h sum_i X_i`.
pub fn tfim(n: usize, h: f64) -> Result<Hamiltonian> {
    if n == 0 {
        return Err(Error::TooFewQubits { min: 1, got: 0 });
    }
    if !h.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "field strength must be finite, got {h}"
        )));
    }
    let mut terms = Vec::with_capacity(2 * n - 1);
    for i in 1..n {
        terms.push(PauliString::sparse(
            n,
            &[(i, Pauli::Z), (i + 1, Pauli::Z)],
            -1.0,
        )?);
    }
    for i in 1..=n {
        terms.push(PauliString::sparse(n, &[(i, Pauli::X)], -h)?);
    }
    Hamiltonian::new(n, terms)
}

/// Ground energies of `tfim(n, 1.0)` frozen from a dense eigensolve and
/// agreeing with the free-fermion solution to 1e-14.
pub const TFIM_CRITICAL_GROUND_ENERGIES: [(usize, f64); 3] = [
    (4, -4.758770483143628),
    (6, -7.296229810558749),
    (8, -9.837951447459417),
];

/// Frozen fixture for `tfim(n, 1.0)` when one exists.
pub fn tfim_fixture(n: usize, h: f64) -> Option<f64> {
    if h != 1.0 {
        return None;
    }
    TFIM_CRITICAL_GROUND_ENERGIES
        .iter()
        .find(|(m, _)| *m == n)
        .map(|&(_, e)| e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn tfim_structure() {
        let h = tfim(4, 1.0).unwrap();
        assert_eq!(h.terms().len(), 7);
        let zz = h
            .terms()
            .iter()
            .filter(|t| t.label().matches('Z').count() == 2)
            .count();
        let x = h
            .terms()
            .iter()
            .filter(|t| t.label().matches('X').count() == 1)
            .count();
        assert_eq!((zz, x), (3, 4));
        assert!(h.terms().iter().all(|t| t.coefficient() == -1.0));
        assert!(!h.terms().iter().any(|t| t.label() == "ZIIZ"));
    }

    #[test]
    fn tfim_rejects_empty_chain() {
        assert_eq!(tfim(0, 1.0), Err(Error::TooFewQubits { min: 1, got: 0 }));
    }

    #[test]
    fn tfim_zero_field_drops_x_terms() {
        let h = tfim(2, 0.0).unwrap();
        assert_eq!(h.terms().len(), 1);
        assert_eq!(h.terms()[0].label(), "ZZ");
        assert!((h.ground_energy().unwrap() + 1.0).abs() < 1e-14);
    }

    #[test]
    fn single_site_is_minus_x() {
        let h = tfim(1, 1.0).unwrap();
        let m = h.to_dense().unwrap();
        assert_eq!(m[(0, 0)], c(0.0));
        assert_eq!(m[(0, 1)], c(-1.0));
        assert_eq!(m[(1, 0)], c(-1.0));
        assert_eq!(h.ground_energy().unwrap(), -1.0);
    }

    #[test]
    fn two_site_dense_matrix() {
        let m = tfim(2, 1.0).unwrap().to_dense().unwrap();
        let diag: Vec<f64> = (0..4).map(|i| m[(i, i)].re).collect();
        assert_eq!(diag, vec![-1.0, 1.0, 1.0, -1.0]);
        for r in 0..4usize {
            for col in 0..4usize {
                let flips = (r ^ col).count_ones();
                let expected = match flips {
                    0 => m[(r, r)].re,
                    1 => -1.0,
                    _ => 0.0,
                };
                assert_eq!(m[(r, col)], c(expected), "entry ({r},{col})");
            }
        }
    }

    #[test]
    fn two_site_ground_energy_is_minus_sqrt5() {
        let e = tfim(2, 1.0).unwrap().ground_energy().unwrap();
        assert!((e + 5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn frozen_fixtures_match_dense_oracle() {
        for &(n, e) in &TFIM_CRITICAL_GROUND_ENERGIES {
            let dense = tfim(n, 1.0).unwrap().ground_energy().unwrap();
            assert!((dense - e).abs() < 1e-12, "n={n}: {dense} vs {e}");
        }
    }

    #[test]
    fn duplicates_merge_and_cancel() {
        let a = PauliString::parse("XZ", 0.5).unwrap();
        let b = PauliString::parse("XZ", 0.25).unwrap();
        let d = PauliString::parse("YY", 1.0).unwrap();
        let e = PauliString::parse("YY", -1.0).unwrap();
        let h = Hamiltonian::new(2, [a, b, d, e]).unwrap();
        assert_eq!(h.terms().len(), 1);
        assert_eq!(h.terms()[0].coefficient(), 0.75);
    }

    #[test]
    fn mismatched_term_width_is_rejected() {
        let t = PauliString::parse("XZZ", 1.0).unwrap();
        assert!(matches!(
            Hamiltonian::new(2, [t]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(PauliString::parse("XQ", 1.0).is_err());
        assert!(PauliString::parse("X", f64::NAN).is_err());
    }

    #[test]
    fn dense_cap_enforced() {
        let h = tfim(13, 1.0).unwrap();
        assert_eq!(
            h.to_dense().unwrap_err(),
            Error::TooManyQubits { cap: 12, got: 13 }
        );
        assert!(h.ground_energy().is_err());
    }

    #[test]
    fn product_state_expectations() {
        let h = tfim(4, 1.0).unwrap();
        assert!((h.expectation_pure(&StateVector::plus(4)).unwrap() + 4.0).abs() < 1e-12);
        assert!((h.expectation_pure(&StateVector::zero(4)).unwrap() + 3.0).abs() < 1e-12);
        assert!(h.expectation_pure(&StateVector::zero(3)).is_err());
        assert!(h.expectation_mixed(&DensityMatrix::zero(3)).is_err());
    }

    #[test]
    fn maximally_mixed_has_zero_energy() {
        for n in 1..=5 {
            for h in [0.0, 0.5, 1.0, 2.0] {
                let e = tfim(n, h)
                    .unwrap()
                    .expectation_mixed(&DensityMatrix::maximally_mixed(n))
                    .unwrap();
                assert!(e.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn y_terms_use_correct_phase() {
        // |+i> = (|0> + i|1>)/sqrt2 has <Y> = 1
        let s = 0.5f64.sqrt();
        let psi = StateVector::from_amplitudes(vec![C64::new(s, 0.0), C64::new(0.0, s)]).unwrap();
        let h = Hamiltonian::new(1, [PauliString::parse("Y", 1.0).unwrap()]).unwrap();
        assert!((h.expectation_pure(&psi).unwrap() - 1.0).abs() < 1e-14);
        assert!((h.expectation_mixed(&psi.to_density()).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn ground_energy_non_increasing_in_chain_length() {
        let energies: Vec<f64> = (1..=8)
            .map(|n| tfim(n, 1.0).unwrap().ground_energy().unwrap())
            .collect();
        for w in energies.windows(2) {
            assert!(w[1] <= w[0]);
        }
    }
}
