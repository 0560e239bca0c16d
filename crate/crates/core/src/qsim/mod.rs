//! Dense statevector simulator with shot sampling and basis-gate counting.

mod circuit;
mod gate;
mod state;
pub mod synth;
mod transpile;

use thiserror::Error;

pub use circuit::{Basis, Circuit, Instruction};
pub use gate::{BasisGate, Gate};
pub use state::{
    apply_gate, bit_string, measure_all, uniform_superposition, MeasurementHistogram, StateVector,
    MAX_QUBITS,
};
pub use transpile::{
    expand_circuit, transpile_counts, DecompositionTable, GateCounts, Term, TABLE_MAX_CONTROLS,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("qubit count {0} outside 1..=12")]
    QubitCountOutOfRange(usize),
    #[error("qubit {index} out of range for a {num_qubits}-qubit register")]
    QubitIndex { index: usize, num_qubits: usize },
    #[error("qubit {0} used twice in one gate")]
    DuplicateQubit(usize),
    #[error("basis index {index} out of range for dimension {dim}")]
    BasisIndex { index: usize, dim: usize },
    #[error("state norm deviates from 1 by {0}")]
    NotNormalized(f64),
    #[error("shot count must be positive")]
    ZeroShots,
    #[error("unsupported gate: {0}")]
    UnsupportedGate(String),
    #[error("a Z with {controls} controls needs a spare qubit")]
    NoFreeAncilla { controls: usize },
}
