//! Gate-level description of parametrized circuits.
//!
//! Qubit and parameter indices are 1-based throughout the public API.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateKind {
    H,
    RX,
    RY,
    RZ,
    /// `exp(-i theta Z_a Z_b / 2)`.
    RZZ,
    /// Control first, target second.
    CNOT,
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            GateKind::H | GateKind::RX | GateKind::RY | GateKind::RZ => 1,
            GateKind::RZZ | GateKind::CNOT => 2,
        }
    }

    pub fn is_parametrized(self) -> bool {
        matches!(
            self,
            GateKind::RX | GateKind::RY | GateKind::RZ | GateKind::RZZ
        )
    }

    /// 2x2 matrix of a single-qubit gate at `angle`.
    pub(crate) fn single_qubit_matrix(self, angle: f64) -> [[C64; 2]; 2] {
        let (s, c) = (0.5 * angle).sin_cos();
        let z = C64::new(0.0, 0.0);
        match self {
            GateKind::H => {
                let h = C64::new(FRAC_1_SQRT_2, 0.0);
                [[h, h], [h, -h]]
            }
            GateKind::RX => [
                [C64::new(c, 0.0), C64::new(0.0, -s)],
                [C64::new(0.0, -s), C64::new(c, 0.0)],
            ],
            GateKind::RY => [
                [C64::new(c, 0.0), C64::new(-s, 0.0)],
                [C64::new(s, 0.0), C64::new(c, 0.0)],
            ],
            GateKind::RZ => [[C64::new(c, -s), z], [z, C64::new(c, s)]],
            GateKind::RZZ | GateKind::CNOT => unreachable!("two-qubit gate"),
        }
    }

    /// Dense local unitary (2x2 or 4x4, first listed qubit most significant).
    /// Only used by tests and oracles; simulation never builds these.
    pub fn unitary(self, angle: f64) -> DMatrix<C64> {
        match self {
            GateKind::RZZ => {
                let even = C64::from_polar(1.0, -0.5 * angle);
                let odd = C64::from_polar(1.0, 0.5 * angle);
                DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![even, odd, odd, even]))
            }
            GateKind::CNOT => {
                let mut m = DMatrix::<C64>::zeros(4, 4);
                let one = C64::new(1.0, 0.0);
                m[(0, 0)] = one;
                m[(1, 1)] = one;
                m[(2, 3)] = one;
                m[(3, 2)] = one;
                m
            }
            _ => {
                let a = self.single_qubit_matrix(angle);
                DMatrix::from_fn(2, 2, |r, c| a[r][c])
            }
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            GateKind::H => "H",
            GateKind::RX => "RX",
            GateKind::RY => "RY",
            GateKind::RZ => "RZ",
            GateKind::RZZ => "RZZ",
            GateKind::CNOT => "CNOT",
        };
        f.write_str(s)
    }
}

/// Where a rotation gate takes its angle from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Angle {
    /// A fixed angle in radians.
    Fixed(f64),
    /// 1-based index into the parameter vector.
    Param(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    kind: GateKind,
    qubits: Vec<usize>,
    angle: Option<Angle>,
}

impl Gate {
    pub fn new(kind: GateKind, qubits: &[usize], angle: Option<Angle>) -> Result<Self> {
        if qubits.len() != kind.arity() {
            return Err(Error::InvalidGate(format!(
                "{kind} acts on {} qubit(s), got {}",
                kind.arity(),
                qubits.len()
            )));
        }
        if qubits.len() == 2 && qubits[0] == qubits[1] {
            return Err(Error::InvalidGate(format!(
                "{kind} needs two distinct qubits, got {} twice",
                qubits[0]
            )));
        }
        if kind.is_parametrized() != angle.is_some() {
            return Err(Error::InvalidGate(if angle.is_some() {
                format!("{kind} takes no angle")
            } else {
                format!("{kind} requires an angle")
            }));
        }
        Ok(Self {
            kind,
            qubits: qubits.to_vec(),
            angle,
        })
    }

    pub fn h(q: usize) -> Self {
        Self::new(GateKind::H, &[q], None).expect("valid H")
    }

    pub fn cnot(control: usize, target: usize) -> Result<Self> {
        Self::new(GateKind::CNOT, &[control, target], None)
    }

    /// Single-qubit rotation bound to parameter `param` (1-based).
    pub fn rotation(kind: GateKind, q: usize, param: usize) -> Result<Self> {
        Self::new(kind, &[q], Some(Angle::Param(param)))
    }

    pub fn rzz(a: usize, b: usize, param: usize) -> Result<Self> {
        Self::new(GateKind::RZZ, &[a, b], Some(Angle::Param(param)))
    }

    pub fn kind(&self) -> GateKind {
        self.kind
    }

    pub fn qubits(&self) -> &[usize] {
        &self.qubits
    }

    pub fn angle(&self) -> Option<Angle> {
        self.angle
    }

    /// Resolved angle for a given parameter vector (0 for unparametrized gates).
    pub fn resolve(&self, theta: &[f64]) -> f64 {
        match self.angle {
            None => 0.0,
            Some(Angle::Fixed(a)) => a,
            Some(Angle::Param(p)) => theta[p - 1],
        }
    }
}

/// An ordered gate list on `n` qubits with `param_count` free parameters.
/// Parameters may be shared between gates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    n: usize,
    param_count: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n: usize, param_count: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::TooFewQubits { min: 1, got: 0 });
        }
        Ok(Self {
            n,
            param_count,
            gates: Vec::new(),
        })
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        self.check_gate(&gate)?;
        self.gates.push(gate);
        Ok(())
    }

    fn check_gate(&self, gate: &Gate) -> Result<()> {
        for &q in gate.qubits() {
            if q == 0 || q > self.n {
                return Err(Error::QubitOutOfRange {
                    index: q,
                    n: self.n,
                });
            }
        }
        if let Some(Angle::Param(p)) = gate.angle() {
            if p == 0 || p > self.param_count {
                return Err(Error::ParameterOutOfRange {
                    index: p,
                    count: self.param_count,
                });
            }
        }
        Ok(())
    }

    /// Re-checks every gate against the circuit's bounds.
    pub fn validate(&self) -> Result<()> {
        self.gates.iter().try_for_each(|g| self.check_gate(g))
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn param_count(&self) -> usize {
        self.param_count
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn count(&self, kind: GateKind) -> usize {
        self.gates.iter().filter(|g| g.kind == kind).count()
    }
}
