//! Exact circuit simulation: statevector for noiseless runs, density matrix
//! with per-gate local depolarizing noise otherwise.
//!
//! Gates are applied in place with bit-mask strides over their support
//! qubits. A density matrix is evolved as a `2n`-qubit vector: `U` acts on
//! the row qubits and `conj(U)` on the column qubits.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate, GateKind};
use crate::error::{Error, Result};
use crate::state::{qubit_mask, DensityMatrix, StateVector};

/// Per-gate depolarizing noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    lambda: f64,
    enabled: bool,
    /// Whether state-preparation Hadamards are also followed by the channel.
    noise_on_state_prep: bool,
}

impl NoiseModel {
    pub fn noiseless() -> Self {
        Self {
            lambda: 0.0,
            enabled: false,
            noise_on_state_prep: true,
        }
    }

    pub fn depolarizing(lambda: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::InvalidLambda(lambda));
        }
        Ok(Self {
            lambda,
            enabled: true,
            noise_on_state_prep: true,
        })
    }

    pub fn with_state_prep_noise(mut self, on: bool) -> Self {
        self.noise_on_state_prep = on;
        self
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn enabled(&self) -> bool {
        self.enabled
    }

    pub fn noise_on_state_prep(&self) -> bool {
        self.noise_on_state_prep
    }

    /// The λ actually applied after `gate`.
    fn lambda_after(&self, gate: &Gate) -> f64 {
        if !self.enabled || (gate.kind() == GateKind::H && !self.noise_on_state_prep) {
            0.0
        } else {
            self.lambda
        }
    }
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self::noiseless()
    }
}

fn apply_single(buf: &mut [C64], mask: usize, m: &[[C64; 2]; 2]) {
    for i in 0..buf.len() {
        if i & mask == 0 {
            let a = buf[i];
            let b = buf[i | mask];
            buf[i] = m[0][0] * a + m[0][1] * b;
            buf[i | mask] = m[1][0] * a + m[1][1] * b;
        }
    }
}

fn apply_cnot(buf: &mut [C64], control: usize, target: usize) {
    for i in 0..buf.len() {
        if i & control != 0 && i & target == 0 {
            buf.swap(i, i | target);
        }
    }
}

fn apply_rzz(buf: &mut [C64], a: usize, b: usize, angle: f64) {
    let even = C64::from_polar(1.0, -0.5 * angle);
    let odd = even.conj();
    for (i, amp) in buf.iter_mut().enumerate() {
        let parity = ((i & a != 0) as u8) ^ ((i & b != 0) as u8);
        *amp *= if parity == 0 { even } else { odd };
    }
}

fn conj2(m: [[C64; 2]; 2]) -> [[C64; 2]; 2] {
    [
        [m[0][0].conj(), m[0][1].conj()],
        [m[1][0].conj(), m[1][1].conj()],
    ]
}

/// Applies `gate` to a flat buffer whose qubit `q` lives at `mask_of(q)`.
/// With `conjugate`, applies the entrywise conjugate of the gate matrix.
fn apply_gate(
    buf: &mut [C64],
    gate: &Gate,
    angle: f64,
    conjugate: bool,
    mask_of: impl Fn(usize) -> usize,
) {
    let q = gate.qubits();
    match gate.kind() {
        GateKind::CNOT => apply_cnot(buf, mask_of(q[0]), mask_of(q[1])),
        GateKind::RZZ => {
            let a = if conjugate { -angle } else { angle };
            apply_rzz(buf, mask_of(q[0]), mask_of(q[1]), a)
        }
        kind => {
            let m = kind.single_qubit_matrix(angle);
            let m = if conjugate { conj2(m) } else { m };
            apply_single(buf, mask_of(q[0]), &m)
        }
    }
}

fn check_inputs(circuit: &Circuit, theta: &[f64], n: usize) -> Result<()> {
    if theta.len() != circuit.param_count() {
        return Err(Error::ParameterCount {
            expected: circuit.param_count(),
            got: theta.len(),
        });
    }
    if n != circuit.num_qubits() {
        return Err(Error::DimensionMismatch {
            expected: 1 << circuit.num_qubits(),
            got: 1 << n,
        });
    }
    Ok(())
}

/// Applies `circuit(theta)` to `initial`.
pub fn run_pure(circuit: &Circuit, theta: &[f64], initial: &StateVector) -> Result<StateVector> {
    check_inputs(circuit, theta, initial.num_qubits())?;
    let n = circuit.num_qubits();
    let mut psi = initial.clone();
    let buf = psi.amplitudes_mut();
    for gate in circuit.gates() {
        apply_gate(buf, gate, gate.resolve(theta), false, |q| qubit_mask(n, q));
    }
    Ok(psi)
}

/// `rho <- U rho U^dagger` for one gate.
fn conjugate_by_gate(rho: &mut DensityMatrix, gate: &Gate, angle: f64) {
    let n = rho.num_qubits();
    let buf = rho.entries_mut();
    // row qubit q sits at bit (2n - q), column qubit q at bit (n - q)
    apply_gate(buf, gate, angle, false, |q| 1 << (2 * n - q));
    apply_gate(buf, gate, angle, true, |q| 1 << (n - q));
}

/// Evolves `initial` through `circuit(theta)`, applying the local
/// depolarizing channel on each gate's support right after the gate.
pub fn run_noisy_from(
    circuit: &Circuit,
    theta: &[f64],
    noise: &NoiseModel,
    initial: &DensityMatrix,
) -> Result<DensityMatrix> {
    check_inputs(circuit, theta, initial.num_qubits())?;
    let mut rho = initial.clone();
    for gate in circuit.gates() {
        conjugate_by_gate(&mut rho, gate, gate.resolve(theta));
        let lambda = noise.lambda_after(gate);
        if lambda > 0.0 {
            depolarize_in_place(&mut rho, gate.qubits(), lambda)?;
        }
    }
    Ok(rho)
}

/// [`run_noisy_from`] starting at `|0...0><0...0|`.
pub fn run_noisy(circuit: &Circuit, theta: &[f64], noise: &NoiseModel) -> Result<DensityMatrix> {
    run_noisy_from(
        circuit,
        theta,
        noise,
        &DensityMatrix::zero(circuit.num_qubits()),
    )
}

/// Local depolarizing channel on the `support` qubits:
/// `rho <- (1 - λ) rho + λ Tr_S(rho) ⊗ I_S / 2^|S|`.
pub fn depolarize(rho: &DensityMatrix, support: &[usize], lambda: f64) -> Result<DensityMatrix> {
    let mut out = rho.clone();
    depolarize_in_place(&mut out, support, lambda)?;
    Ok(out)
}

pub fn depolarize_in_place(rho: &mut DensityMatrix, support: &[usize], lambda: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidLambda(lambda));
    }
    let n = rho.num_qubits();
    if support.is_empty() || support.len() > 2 {
        return Err(Error::InvalidGate(format!(
            "depolarizing support must have 1 or 2 qubits, got {}",
            support.len()
        )));
    }
    for &q in support {
        if q == 0 || q > n {
            return Err(Error::QubitOutOfRange { index: q, n });
        }
    }
    if support.len() == 2 && support[0] == support[1] {
        return Err(Error::InvalidGate(
            "repeated qubit in depolarizing support".into(),
        ));
    }
    if lambda == 0.0 {
        return Ok(());
    }

    let dim = rho.dim();
    let masks: Vec<usize> = support.iter().map(|&q| qubit_mask(n, q)).collect();
    let support_mask: usize = masks.iter().fold(0, |acc, m| acc | m);
    let offsets: Vec<usize> = (0..1usize << masks.len())
        .map(|s| {
            masks
                .iter()
                .enumerate()
                .filter(|(k, _)| s >> k & 1 == 1)
                .fold(0, |acc, (_, m)| acc | m)
        })
        .collect();
    let keep = 1.0 - lambda;
    let mix = lambda / offsets.len() as f64;
    let buf = rho.entries_mut();

    for r0 in (0..dim).filter(|r| r & support_mask == 0) {
        for c0 in (0..dim).filter(|c| c & support_mask == 0) {
            let partial: C64 = offsets.iter().map(|o| buf[(r0 | o) * dim + (c0 | o)]).sum();
            for &a in &offsets {
                for &b in &offsets {
                    let idx = (r0 | a) * dim + (c0 | b);
                    buf[idx] *= keep;
                    if a == b {
                        buf[idx] += mix * partial;
                    }
                }
            }
        }
    }
    Ok(())
}
