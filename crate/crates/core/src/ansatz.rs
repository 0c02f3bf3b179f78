//! The hardware-efficient ansatz (HEA) and the Hamiltonian variational
//! ansatz (HVA) for the Ising chain.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate, GateKind};
use crate::error::{Error, Result};
use crate::state::StateVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnsatzKind {
    Hea,
    Hva,
}

impl fmt::Display for AnsatzKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AnsatzKind::Hea => "hea",
            AnsatzKind::Hva => "hva",
        })
    }
}

impl FromStr for AnsatzKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hea" => Ok(AnsatzKind::Hea),
            "hva" => Ok(AnsatzKind::Hva),
            other => Err(Error::InvalidConfig(format!("unknown ansatz {other:?}"))),
        }
    }
}

/// First rotation of each HEA qubit block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FirstRotation {
    #[default]
    Ry,
    Rx,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AnsatzSpec {
    pub kind: AnsatzKind,
    pub n: usize,
    pub layers: usize,
    #[serde(default)]
    pub hea_first_rotation: FirstRotation,
}

impl AnsatzSpec {
    pub fn new(kind: AnsatzKind, n: usize, layers: usize) -> Self {
        Self {
            kind,
            n,
            layers,
            hea_first_rotation: FirstRotation::Ry,
        }
    }

    pub fn hea(n: usize, layers: usize) -> Self {
        Self::new(AnsatzKind::Hea, n, layers)
    }

    pub fn hva(n: usize, layers: usize) -> Self {
        Self::new(AnsatzKind::Hva, n, layers)
    }

    /// `2nL` for the HEA, `2L` for the HVA.
    pub fn param_count(&self) -> usize {
        match self.kind {
            AnsatzKind::Hea => 2 * self.n * self.layers,
            AnsatzKind::Hva => 2 * self.layers,
        }
    }

    pub fn build(&self) -> Result<Circuit> {
        match self.kind {
            AnsatzKind::Hea => build_hea_with(self.n, self.layers, self.hea_first_rotation),
            AnsatzKind::Hva => build_hva(self.n, self.layers),
        }
    }

    /// Reference state the circuit is applied to. Both ansätze start from
    /// `|0...0>`; the HVA prepares `|+...+>` with its own Hadamard layer.
    pub fn initial_state(&self) -> StateVector {
        StateVector::zero(self.n)
    }
}

fn check_shape(n: usize, layers: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::TooFewQubits { min: 2, got: n });
    }
    if layers == 0 {
        return Err(Error::InvalidConfig(
            "ansatz needs at least one layer".into(),
        ));
    }
    Ok(())
}

/// Hardware-efficient ansatz: per layer `RY, RZ` on every qubit (parameters
/// numbered qubit-major) followed by the ladder `CNOT(i+1 -> i)`, i = 1..n-1.
pub fn build_hea(n: usize, layers: usize) -> Result<Circuit> {
    build_hea_with(n, layers, FirstRotation::Ry)
}

pub fn build_hea_with(n: usize, layers: usize, first: FirstRotation) -> Result<Circuit> {
    check_shape(n, layers)?;
    let first = match first {
        FirstRotation::Ry => GateKind::RY,
        FirstRotation::Rx => GateKind::RX,
    };
    let mut c = Circuit::new(n, 2 * n * layers)?;
    for l in 0..layers {
        let base = 2 * n * l;
        for q in 1..=n {
            c.push(Gate::rotation(first, q, base + 2 * q - 1)?)?;
            c.push(Gate::rotation(GateKind::RZ, q, base + 2 * q)?)?;
        }
        for q in 1..n {
            c.push(Gate::cnot(q + 1, q)?)?;
        }
    }
    Ok(c)
}

/// Nearest-neighbour pairs in brick order: (1,2), (3,4), ... then (2,3), (4,5), ...
pub fn brick_pairs(n: usize) -> Vec<(usize, usize)> {
    let even = (1..n).step_by(2).map(|i| (i, i + 1));
    let odd = (2..n).step_by(2).map(|i| (i, i + 1));
    even.chain(odd).collect()
}

/// Hamiltonian variational ansatz: a Hadamard layer preparing `|+...+>`,
/// then per layer `l` an `RZZ(θ_{2l-1})` on every bond followed by
/// `RX(θ_{2l})` on every qubit.
pub fn build_hva(n: usize, layers: usize) -> Result<Circuit> {
    check_shape(n, layers)?;
    let mut c = Circuit::new(n, 2 * layers)?;
    for q in 1..=n {
        c.push(Gate::h(q))?;
    }
    let pairs = brick_pairs(n);
    for l in 0..layers {
        let (zz, x) = (2 * l + 1, 2 * l + 2);
        for &(a, b) in &pairs {
            c.push(Gate::rzz(a, b, zz)?)?;
        }
        for q in 1..=n {
            c.push(Gate::rotation(GateKind::RX, q, x)?)?;
        }
    }
    Ok(c)
}
