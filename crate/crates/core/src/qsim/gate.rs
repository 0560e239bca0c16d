use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::SimError;

/// Gates the simulator can apply. Qubit 0 is the least significant bit of a
/// basis-state index.
#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    X(usize),
    Y(usize),
    Z(usize),
    H(usize),
    S(usize),
    Sdg(usize),
    T(usize),
    Tdg(usize),
    Cnot { control: usize, target: usize },
    Swap(usize, usize),
    /// diag(1, 1, 1, e^{i angle}) on (control, target).
    CPhase { control: usize, target: usize, angle: f64 },
    /// Phase flip on the all-ones state of `controls` + `target`.
    Mcz { controls: Vec<usize>, target: usize },
    /// Phase flip on every basis state whose bits on `qubits` (first entry
    /// least significant) spell one of `marked`.
    DiagonalPhase { qubits: Vec<usize>, marked: Vec<u64> },
}

impl Gate {
    pub fn qubits(&self) -> Vec<usize> {
        use Gate::*;
        match self {
            X(q) | Y(q) | Z(q) | H(q) | S(q) | Sdg(q) | T(q) | Tdg(q) => vec![*q],
            Cnot { control, target } | CPhase { control, target, .. } => vec![*control, *target],
            Swap(a, b) => vec![*a, *b],
            Mcz { controls, target } => {
                let mut v = controls.clone();
                v.push(*target);
                v
            }
            DiagonalPhase { qubits, .. } => qubits.clone(),
        }
    }

    pub fn name(&self) -> &'static str {
        use Gate::*;
        match self {
            X(_) => "X",
            Y(_) => "Y",
            Z(_) => "Z",
            H(_) => "H",
            S(_) => "S",
            Sdg(_) => "SDG",
            T(_) => "T",
            Tdg(_) => "TDG",
            Cnot { .. } => "CNOT",
            Swap(..) => "SWAP",
            CPhase { .. } => "CPHASE",
            Mcz { .. } => "MCZ",
            DiagonalPhase { .. } => "DIAGONAL_PHASE",
        }
    }

    /// Checks qubit indices against a register of `num_qubits`.
    pub fn validate(&self, num_qubits: usize) -> Result<(), SimError> {
        let qs = self.qubits();
        for &q in &qs {
            if q >= num_qubits {
                return Err(SimError::QubitIndex { index: q, num_qubits });
            }
        }
        for (i, a) in qs.iter().enumerate() {
            if qs[i + 1..].contains(a) {
                return Err(SimError::DuplicateQubit(*a));
            }
        }
        if let Gate::DiagonalPhase { qubits, marked } = self {
            if qubits.is_empty() {
                return Err(SimError::UnsupportedGate("diagonal phase on zero qubits".into()));
            }
            let bound = 1u64 << qubits.len();
            if let Some(m) = marked.iter().find(|&&m| m >= bound) {
                return Err(SimError::UnsupportedGate(format!(
                    "marked string {m} does not fit {} qubits",
                    qubits.len()
                )));
            }
        }
        Ok(())
    }

    pub fn inverse(&self) -> Gate {
        use Gate::*;
        match self {
            S(q) => Sdg(*q),
            Sdg(q) => S(*q),
            T(q) => Tdg(*q),
            Tdg(q) => T(*q),
            CPhase { control, target, angle } => CPhase {
                control: *control,
                target: *target,
                angle: -angle,
            },
            g => g.clone(),
        }
    }

    pub fn cz(control: usize, target: usize) -> Gate {
        Gate::CPhase { control, target, angle: PI }
    }
}

/// The basis gate set circuits are transpiled into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BasisGate {
    #[serde(rename = "CNOT")]
    Cnot,
    #[serde(rename = "SWAP")]
    Swap,
    H,
    #[serde(rename = "PREP_PLUS")]
    PrepPlus,
    #[serde(rename = "PREP_ZERO")]
    PrepZero,
    #[serde(rename = "MEAS_X")]
    MeasX,
    #[serde(rename = "MEAS_Z")]
    MeasZ,
    X,
    Y,
    Z,
    S,
    T,
}

impl BasisGate {
    pub const ALL: [BasisGate; 12] = [
        BasisGate::Cnot,
        BasisGate::Swap,
        BasisGate::H,
        BasisGate::PrepPlus,
        BasisGate::PrepZero,
        BasisGate::MeasX,
        BasisGate::MeasZ,
        BasisGate::X,
        BasisGate::Y,
        BasisGate::Z,
        BasisGate::S,
        BasisGate::T,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BasisGate::Cnot => "CNOT",
            BasisGate::Swap => "SWAP",
            BasisGate::H => "H",
            BasisGate::PrepPlus => "PREP_PLUS",
            BasisGate::PrepZero => "PREP_ZERO",
            BasisGate::MeasX => "MEAS_X",
            BasisGate::MeasZ => "MEAS_Z",
            BasisGate::X => "X",
            BasisGate::Y => "Y",
            BasisGate::Z => "Z",
            BasisGate::S => "S",
            BasisGate::T => "T",
        }
    }

    pub fn from_name(name: &str) -> Option<BasisGate> {
        BasisGate::ALL.into_iter().find(|g| g.name() == name)
    }
}

impl fmt::Display for BasisGate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}
