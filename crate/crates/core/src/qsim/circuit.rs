use super::{Gate, SimError, StateVector};
use crate::Real;

/// Preparation / measurement basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    /// |0> preparation, Z measurement.
    Z,
    /// |+> preparation, X measurement.
    X,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Instruction {
    Gate(Gate),
    Prepare { qubit: usize, basis: Basis },
    Measure { qubit: usize, basis: Basis },
}

/// Ordered gate list over a fixed register.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Circuit {
    num_qubits: usize,
    ops: Vec<Instruction>,
}

impl Circuit {
    pub fn new(num_qubits: usize) -> Self {
        Circuit { num_qubits, ops: Vec::new() }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn instructions(&self) -> &[Instruction] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    fn check_qubit(&self, q: usize) -> Result<(), SimError> {
        if q < self.num_qubits {
            Ok(())
        } else {
            Err(SimError::QubitIndex { index: q, num_qubits: self.num_qubits })
        }
    }

    pub fn gate(&mut self, gate: Gate) -> Result<&mut Self, SimError> {
        gate.validate(self.num_qubits)?;
        self.ops.push(Instruction::Gate(gate));
        Ok(self)
    }

    pub fn gates(&mut self, gates: impl IntoIterator<Item = Gate>) -> Result<&mut Self, SimError> {
        for g in gates {
            self.gate(g)?;
        }
        Ok(self)
    }

    pub fn prepare(&mut self, qubit: usize, basis: Basis) -> Result<&mut Self, SimError> {
        self.check_qubit(qubit)?;
        self.ops.push(Instruction::Prepare { qubit, basis });
        Ok(self)
    }

    pub fn measure(&mut self, qubit: usize, basis: Basis) -> Result<&mut Self, SimError> {
        self.check_qubit(qubit)?;
        self.ops.push(Instruction::Measure { qubit, basis });
        Ok(self)
    }

    /// Appends `other`, which must not be wider than `self`.
    pub fn append(&mut self, other: &Circuit) -> Result<&mut Self, SimError> {
        if other.num_qubits > self.num_qubits {
            return Err(SimError::QubitIndex { index: other.num_qubits - 1, num_qubits: self.num_qubits });
        }
        self.ops.extend(other.ops.iter().cloned());
        Ok(self)
    }

    /// Applies the unitary part of the circuit to `state`. Preparations and
    /// measurements are skipped.
    pub fn apply_to<F: Real>(&self, state: &mut StateVector<F>) -> Result<(), SimError> {
        for op in &self.ops {
            if let Instruction::Gate(g) = op {
                state.apply(g)?;
            }
        }
        Ok(())
    }

    /// Runs from |0...0>. A `Prepare` must come before any gate on its
    /// qubit; `|+>` preparation acts as a Hadamard on the fresh qubit.
    /// Returns the state just before measurement.
    pub fn run<F: Real>(&self) -> Result<StateVector<F>, SimError> {
        let mut state = StateVector::zero(self.num_qubits)?;
        let mut touched = vec![false; self.num_qubits];
        for op in &self.ops {
            match op {
                Instruction::Gate(g) => {
                    for q in g.qubits() {
                        touched[q] = true;
                    }
                    state.apply(g)?;
                }
                Instruction::Prepare { qubit, basis } => {
                    if touched[*qubit] {
                        return Err(SimError::UnsupportedGate(format!(
                            "mid-circuit preparation of qubit {qubit}"
                        )));
                    }
                    if *basis == Basis::X {
                        state.apply(&Gate::H(*qubit))?;
                    }
                    touched[*qubit] = true;
                }
                Instruction::Measure { .. } => {}
            }
        }
        Ok(state)
    }
}
