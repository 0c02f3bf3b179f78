//! Deliberately naive dense oracles shared by the integration tests.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ttvqe::{Angle, Circuit, DensityMatrix, Gate, GateKind, StateVector};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Bit of basis index `i` for 1-based qubit `q` (qubit 1 most significant).
pub fn bit(i: usize, n: usize, q: usize) -> usize {
    (i >> (n - q)) & 1
}

/// Full `2^n` matrix of a local gate, by explicit index matching.
pub fn embed(local: &DMatrix<C64>, qubits: &[usize], n: usize) -> DMatrix<C64> {
    let dim = 1 << n;
    DMatrix::from_fn(dim, dim, |i, j| {
        let others_equal = (1..=n)
            .filter(|q| !qubits.contains(q))
            .all(|q| bit(i, n, q) == bit(j, n, q));
        if !others_equal {
            return C64::new(0.0, 0.0);
        }
        let li = qubits.iter().fold(0, |acc, &q| 2 * acc + bit(i, n, q));
        let lj = qubits.iter().fold(0, |acc, &q| 2 * acc + bit(j, n, q));
        local[(li, lj)]
    })
}

pub fn gate_matrix(gate: &Gate, theta: &[f64], n: usize) -> DMatrix<C64> {
    let angle = match gate.angle() {
        Some(Angle::Fixed(a)) => a,
        Some(Angle::Param(k)) => theta[k - 1],
        None => 0.0,
    };
    embed(&gate.kind().unitary(angle), gate.qubits(), n)
}

pub fn circuit_unitary(c: &Circuit, theta: &[f64]) -> DMatrix<C64> {
    let n = c.num_qubits();
    c.gates()
        .iter()
        .fold(DMatrix::identity(1 << n, 1 << n), |u, g| {
            gate_matrix(g, theta, n) * u
        })
}

pub fn to_vector(psi: &StateVector) -> DVector<C64> {
    DVector::from_column_slice(psi.amplitudes())
}

pub fn to_matrix(rho: &DensityMatrix) -> DMatrix<C64> {
    let d = rho.dim();
    DMatrix::from_fn(d, d, |i, j| rho.get(i, j))
}

pub fn from_matrix(m: &DMatrix<C64>) -> DensityMatrix {
    let d = m.nrows();
    let entries = (0..d * d).map(|k| m[(k / d, k % d)]).collect();
    DensityMatrix::from_row_major(d, entries).expect("square density matrix")
}

/// `Tr_S(ρ) ⊗ I_S / 2^|S|` written out entry by entry.
pub fn naive_traced_out(rho: &DMatrix<C64>, support: &[usize], n: usize) -> DMatrix<C64> {
    let dim = 1 << n;
    let k = support.len();
    let scale = 1.0 / (1 << k) as f64;
    let set_support = |i: usize, s: usize| {
        support.iter().enumerate().fold(i, |acc, (p, &q)| {
            let b = (s >> (k - 1 - p)) & 1;
            let mask = 1 << (n - q);
            if b == 1 {
                acc | mask
            } else {
                acc & !mask
            }
        })
    };
    DMatrix::from_fn(dim, dim, |i, j| {
        let diag_on_support = support.iter().all(|&q| bit(i, n, q) == bit(j, n, q));
        if !diag_on_support {
            return C64::new(0.0, 0.0);
        }
        let sum: C64 = (0..1 << k)
            .map(|s| rho[(set_support(i, s), set_support(j, s))])
            .sum();
        sum * scale
    })
}

pub fn naive_depolarize(
    rho: &DMatrix<C64>,
    support: &[usize],
    n: usize,
    lambda: f64,
) -> DMatrix<C64> {
    rho * C64::new(1.0 - lambda, 0.0) + naive_traced_out(rho, support, n) * C64::new(lambda, 0.0)
}

pub fn random_state(rng: &mut ChaCha8Rng, n: usize) -> StateVector {
    let amps: Vec<C64> = (0..1 << n)
        .map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    StateVector::from_amplitudes(amps.into_iter().map(|a| a / norm).collect()).expect("normalized")
}

/// Random mixture of `k` random pure states.
pub fn random_density(rng: &mut ChaCha8Rng, n: usize, k: usize) -> DensityMatrix {
    let dim = 1 << n;
    let mut acc = DMatrix::<C64>::zeros(dim, dim);
    let weights: Vec<f64> = (0..k).map(|_| rng.random::<f64>() + 0.01).collect();
    let total: f64 = weights.iter().sum();
    for w in weights {
        let v = to_vector(&random_state(rng, n));
        acc += (&v * v.adjoint()) * C64::new(w / total, 0.0);
    }
    from_matrix(&acc)
}

/// Random circuit over every gate kind; `d` parameters, shared freely.
pub fn random_circuit(rng: &mut ChaCha8Rng, n: usize, gates: usize, d: usize) -> Circuit {
    let mut c = Circuit::new(n, d).expect("valid circuit size");
    let kinds = [
        GateKind::H,
        GateKind::RX,
        GateKind::RY,
        GateKind::RZ,
        GateKind::RZZ,
        GateKind::CNOT,
    ];
    for _ in 0..gates {
        let mut kind = kinds[rng.random_range(0..kinds.len())];
        if n == 1 && kind.arity() == 2 {
            kind = GateKind::RY;
        }
        let a = rng.random_range(1..=n);
        let gate = match kind {
            GateKind::H => Gate::h(a),
            GateKind::CNOT | GateKind::RZZ => {
                let mut b = rng.random_range(1..=n);
                while b == a {
                    b = rng.random_range(1..=n);
                }
                if kind == GateKind::CNOT {
                    Gate::cnot(a, b).unwrap()
                } else if rng.random::<bool>() {
                    Gate::rzz(a, b, rng.random_range(1..=d)).unwrap()
                } else {
                    Gate::new(kind, &[a, b], Some(Angle::Fixed(rng.random::<f64>() * 6.0))).unwrap()
                }
            }
            _ => {
                if rng.random::<bool>() {
                    Gate::rotation(kind, a, rng.random_range(1..=d)).unwrap()
                } else {
                    Gate::new(
                        kind,
                        &[a],
                        Some(Angle::Fixed(rng.random::<f64>() * 6.0 - 3.0)),
                    )
                    .unwrap()
                }
            }
        };
        c.push(gate).unwrap();
    }
    c
}

pub fn random_theta(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    (0..d)
        .map(|_| rng.random::<f64>() * std::f64::consts::TAU)
        .collect()
}
