use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};

use super::circuit::{Basis, Circuit, Instruction};
use super::{synth, BasisGate, Gate, SimError};

const SHIPPED_TABLE: &str = include_str!("../../data/decompositions.json");

/// Basis-gate tally of a circuit.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GateCounts(BTreeMap<BasisGate, u64>);

impl GateCounts {
    pub fn new() -> Self {
        GateCounts::default()
    }

    pub fn add_count(&mut self, gate: BasisGate, n: u64) {
        if n > 0 {
            *self.0.entry(gate).or_insert(0) += n;
        }
    }

    pub fn get(&self, gate: BasisGate) -> u64 {
        self.0.get(&gate).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.0.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.total() == 0
    }

    /// Non-zero entries in basis order.
    pub fn iter(&self) -> impl Iterator<Item = (BasisGate, u64)> + '_ {
        self.0.iter().map(|(&g, &n)| (g, n))
    }

    pub fn scaled(&self, k: u64) -> GateCounts {
        GateCounts(self.0.iter().map(|(&g, &n)| (g, n * k)).collect())
    }

    fn add_terms(&mut self, terms: &[Term], times: u64) {
        for t in terms {
            self.add_count(t.gate, t.count * times);
        }
    }
}

impl AddAssign<&GateCounts> for GateCounts {
    fn add_assign(&mut self, rhs: &GateCounts) {
        for (g, n) in rhs.iter() {
            self.add_count(g, n);
        }
    }
}

impl Add for GateCounts {
    type Output = GateCounts;
    fn add(mut self, rhs: GateCounts) -> GateCounts {
        self += &rhs;
        self
    }
}

impl FromIterator<(BasisGate, u64)> for GateCounts {
    fn from_iter<I: IntoIterator<Item = (BasisGate, u64)>>(iter: I) -> Self {
        let mut c = GateCounts::new();
        for (g, n) in iter {
            c.add_count(g, n);
        }
        c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Term {
    pub gate: BasisGate,
    pub count: u64,
}

/// Native gate -> basis gate multiplicities. `mcz` is indexed by the number
/// of controls and assumes one spare qubit for three or more controls.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompositionTable {
    pub version: u32,
    pub basis: Vec<BasisGate>,
    pub gates: BTreeMap<String, Vec<Term>>,
    pub mcz: BTreeMap<usize, Vec<Term>>,
}

impl Default for DecompositionTable {
    fn default() -> Self {
        DecompositionTable::from_json(SHIPPED_TABLE).expect("shipped decomposition table parses")
    }
}

fn terms(counts: &GateCounts) -> Vec<Term> {
    counts.iter().map(|(gate, count)| Term { gate, count }).collect()
}

fn single_rule(name: &str) -> Option<GateCounts> {
    use BasisGate as B;
    let one = |g| [(g, 1)].into_iter().collect::<GateCounts>();
    Some(match name {
        "X" => one(B::X),
        "Y" => one(B::Y),
        "Z" => one(B::Z),
        "H" => one(B::H),
        "S" => one(B::S),
        "T" => one(B::T),
        "CNOT" => one(B::Cnot),
        "SWAP" => one(B::Swap),
        // S^dagger = Z S, T^dagger = Z S T
        "SDG" => [(B::Z, 1), (B::S, 1)].into_iter().collect(),
        "TDG" => [(B::Z, 1), (B::S, 1), (B::T, 1)].into_iter().collect(),
        "PREP_ZERO" => one(B::PrepZero),
        "PREP_PLUS" => one(B::PrepPlus),
        "MEAS_Z" => one(B::MeasZ),
        "MEAS_X" => one(B::MeasX),
        _ => return None,
    })
}

fn count_primitive(gates: &[Gate]) -> GateCounts {
    let mut c = GateCounts::new();
    for g in gates {
        c += &single_rule(g.name()).expect("synthesized gates are primitive");
    }
    c
}

impl DecompositionTable {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("table serializes")
    }

    /// Rebuilds the table from the constructive decompositions, covering
    /// multi-controlled Z with up to `max_controls` controls.
    pub fn synthesize(max_controls: usize) -> Self {
        let mut gates = BTreeMap::new();
        for name in [
            "X", "Y", "Z", "H", "S", "SDG", "T", "TDG", "CNOT", "SWAP", "PREP_ZERO", "PREP_PLUS",
            "MEAS_Z", "MEAS_X",
        ] {
            gates.insert(name.to_string(), terms(&single_rule(name).unwrap()));
        }
        for (name, angle) in [("CZ", PI), ("CS", PI / 2.0), ("CSDG", -PI / 2.0)] {
            let g = synth::controlled_phase(0, 1, angle).unwrap();
            gates.insert(name.to_string(), terms(&count_primitive(&g)));
        }
        let mcz = (0..=max_controls)
            .map(|c| {
                let controls: Vec<usize> = (0..c).collect();
                let g = synth::mcz(&controls, c, &[c + 1]).unwrap();
                (c, terms(&count_primitive(&g)))
            })
            .collect();
        DecompositionTable { version: 1, basis: BasisGate::ALL.to_vec(), gates, mcz }
    }

    fn rule(&self, key: &str) -> Result<&[Term], SimError> {
        self.gates
            .get(key)
            .map(Vec::as_slice)
            .ok_or_else(|| SimError::UnsupportedGate(format!("no decomposition for {key}")))
    }

    fn mcz_rule(&self, controls: usize, num_qubits: usize) -> Result<&[Term], SimError> {
        if controls >= 3 && num_qubits < controls + 2 {
            return Err(SimError::NoFreeAncilla { controls });
        }
        self.mcz
            .get(&controls)
            .map(Vec::as_slice)
            .ok_or_else(|| SimError::UnsupportedGate(format!("no decomposition for MCZ with {controls} controls")))
    }

    fn gate_counts(&self, gate: &Gate, num_qubits: usize, out: &mut GateCounts) -> Result<(), SimError> {
        match gate {
            Gate::CPhase { angle, .. } => {
                let near = |x: f64| (angle - x).abs() < 1e-12;
                let key = if near(PI) || near(-PI) {
                    "CZ"
                } else if near(PI / 2.0) {
                    "CS"
                } else if near(-PI / 2.0) {
                    "CSDG"
                } else {
                    return Err(SimError::UnsupportedGate(format!("controlled phase {angle}")));
                };
                out.add_terms(self.rule(key)?, 1);
            }
            Gate::Mcz { controls, .. } => out.add_terms(self.mcz_rule(controls.len(), num_qubits)?, 1),
            Gate::DiagonalPhase { qubits, marked } => {
                let mcz = self.mcz_rule(qubits.len() - 1, num_qubits)?;
                let x = self.rule("X")?;
                for &m in marked {
                    let zeros = (0..qubits.len()).filter(|k| (m >> k) & 1 == 0).count() as u64;
                    out.add_terms(x, 2 * zeros);
                    out.add_terms(mcz, 1);
                }
            }
            g => out.add_terms(self.rule(g.name())?, 1),
        }
        Ok(())
    }
}

/// Counts the basis gates `circuit` expands to under `table`.
pub fn transpile_counts(circuit: &Circuit, table: &DecompositionTable) -> Result<GateCounts, SimError> {
    let mut counts = GateCounts::new();
    let n = circuit.num_qubits();
    for op in circuit.instructions() {
        match op {
            Instruction::Gate(g) => table.gate_counts(g, n, &mut counts)?,
            Instruction::Prepare { basis: Basis::Z, .. } => counts.add_terms(table.rule("PREP_ZERO")?, 1),
            Instruction::Prepare { basis: Basis::X, .. } => counts.add_terms(table.rule("PREP_PLUS")?, 1),
            Instruction::Measure { basis: Basis::Z, .. } => counts.add_terms(table.rule("MEAS_Z")?, 1),
            Instruction::Measure { basis: Basis::X, .. } => counts.add_terms(table.rule("MEAS_X")?, 1),
        }
    }
    Ok(counts)
}

/// Rewrites `circuit` into single-qubit gates, CNOT and SWAP. `Sdg`/`Tdg`
/// are kept as gates; the counting table maps them onto the basis.
pub fn expand_circuit(circuit: &Circuit) -> Result<Circuit, SimError> {
    let n = circuit.num_qubits();
    let mut out = Circuit::new(n);
    let spare = |used: &[usize]| -> Vec<usize> { (0..n).filter(|q| !used.contains(q)).collect() };
    for op in circuit.instructions() {
        match op {
            Instruction::Gate(g) => match g {
                Gate::CPhase { control, target, angle } => {
                    out.gates(synth::controlled_phase(*control, *target, *angle)?)?;
                }
                Gate::Mcz { controls, target } => {
                    let mut used = controls.clone();
                    used.push(*target);
                    out.gates(synth::mcz(controls, *target, &spare(&used))?)?;
                }
                Gate::DiagonalPhase { qubits, marked } => {
                    out.gates(synth::diagonal_phase(qubits, marked, &spare(qubits))?)?;
                }
                g => {
                    out.gate(g.clone())?;
                }
            },
            Instruction::Prepare { qubit, basis } => {
                out.prepare(*qubit, *basis)?;
            }
            Instruction::Measure { qubit, basis } => {
                out.measure(*qubit, *basis)?;
            }
        }
    }
    Ok(out)
}

/// Largest control count covered by the shipped table.
pub const TABLE_MAX_CONTROLS: usize = 15;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::StateVector;
    use num_complex::Complex;
    use BasisGate as B;

    fn table() -> DecompositionTable {
        DecompositionTable::default()
    }

    #[test]
    fn shipped_table_matches_synthesis() {
        let synthesized = DecompositionTable::synthesize(TABLE_MAX_CONTROLS);
        if std::env::var_os("FLIGHTQ_WRITE_TABLE").is_some() {
            let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/decompositions.json");
            std::fs::write(path, synthesized.to_json() + "\n").unwrap();
        }
        assert_eq!(table(), synthesized);
    }

    #[test]
    fn empty_circuit_counts_nothing() {
        assert!(transpile_counts(&Circuit::new(3), &table()).unwrap().is_empty());
    }

    #[test]
    fn single_hadamard() {
        let mut c = Circuit::new(1);
        c.gate(Gate::H(0)).unwrap();
        let counts = transpile_counts(&c, &table()).unwrap();
        assert_eq!(counts, [(B::H, 1)].into_iter().collect());
    }

    #[test]
    fn small_multi_controlled_z_sizes() {
        let t = table();
        let total = |c: usize| t.mcz[&c].iter().map(|x| x.count).sum::<u64>();
        assert_eq!(total(0), 1);
        assert_eq!(total(1), 3);
        let ccz: GateCounts = t.mcz[&2].iter().map(|x| (x.gate, x.count)).collect();
        assert_eq!(ccz.get(B::Cnot), 6);
        assert_eq!(ccz.get(B::H), 0);
        // four T-daggers contribute a Z, S and T each
        assert_eq!(ccz.get(B::T), 7);
    }

    #[test]
    fn two_qubit_grover_iteration() {
        // oracle marking |11> then H/X/CZ/X/H diffusion
        let mut c = Circuit::new(2);
        c.gate(Gate::DiagonalPhase { qubits: vec![0, 1], marked: vec![3] }).unwrap();
        c.gates([Gate::H(0), Gate::H(1), Gate::X(0), Gate::X(1)]).unwrap();
        c.gate(Gate::Mcz { controls: vec![0], target: 1 }).unwrap();
        c.gates([Gate::X(0), Gate::X(1), Gate::H(0), Gate::H(1)]).unwrap();
        let counts = transpile_counts(&c, &table()).unwrap();
        // each CZ: H, CNOT, H
        let expect: GateCounts = [(B::H, 8), (B::X, 4), (B::Cnot, 2)].into_iter().collect();
        assert_eq!(counts, expect);
    }

    #[test]
    fn counts_are_additive() {
        let mut a = Circuit::new(4);
        a.gates([Gate::H(0), Gate::Tdg(1), Gate::Swap(2, 3), Gate::cz(0, 2)]).unwrap();
        a.prepare(0, Basis::Z).unwrap();
        let mut b = Circuit::new(4);
        b.gate(Gate::Mcz { controls: vec![0, 1], target: 3 }).unwrap();
        b.gate(Gate::DiagonalPhase { qubits: vec![0, 1, 2], marked: vec![0, 5] }).unwrap();
        b.measure(2, Basis::X).unwrap();
        let mut ab = a.clone();
        ab.append(&b).unwrap();
        let t = table();
        assert_eq!(
            transpile_counts(&ab, &t).unwrap(),
            transpile_counts(&a, &t).unwrap() + transpile_counts(&b, &t).unwrap()
        );
    }

    #[test]
    fn large_mcz_needs_a_spare_qubit() {
        let mut c = Circuit::new(4);
        c.gate(Gate::Mcz { controls: vec![0, 1, 2], target: 3 }).unwrap();
        assert_eq!(transpile_counts(&c, &table()), Err(SimError::NoFreeAncilla { controls: 3 }));
        let mut c = Circuit::new(3);
        c.gate(Gate::CPhase { control: 0, target: 1, angle: 0.25 }).unwrap();
        assert!(matches!(transpile_counts(&c, &table()), Err(SimError::UnsupportedGate(_))));
    }

    fn random_state(n: usize, seed: u64) -> StateVector<f64> {
        let mut x = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
        let mut next = || {
            x ^= x << 13;
            x ^= x >> 7;
            x ^= x << 17;
            (x >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let amps: Vec<Complex<f64>> = (0..1 << n).map(|_| Complex::new(next(), next())).collect();
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        StateVector::from_amplitudes(amps.into_iter().map(|a| a / norm).collect()).unwrap()
    }

    fn assert_same_action(native: &Circuit, seed: u64) {
        let expanded = expand_circuit(native).unwrap();
        let mut a = random_state(native.num_qubits(), seed);
        let mut b = a.clone();
        native.apply_to(&mut a).unwrap();
        expanded.apply_to(&mut b).unwrap();
        for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
            assert!((x - y).norm() < 1e-10, "{native:?}");
        }
    }

    #[test]
    fn expansions_act_like_native_gates() {
        for c in 0..=5usize {
            let mut circ = Circuit::new(c + 2);
            circ.gate(Gate::Mcz { controls: (0..c).collect(), target: c }).unwrap();
            assert_same_action(&circ, c as u64);
        }
        for angle in [std::f64::consts::PI, std::f64::consts::FRAC_PI_2, -std::f64::consts::FRAC_PI_2] {
            let mut circ = Circuit::new(2);
            circ.gate(Gate::CPhase { control: 1, target: 0, angle }).unwrap();
            assert_same_action(&circ, 7);
        }
        let mut circ = Circuit::new(5);
        circ.gate(Gate::DiagonalPhase { qubits: vec![0, 1, 2, 3], marked: vec![0, 6, 9, 15] }).unwrap();
        assert_same_action(&circ, 11);
    }

    #[test]
    fn expansion_counts_agree_with_table() {
        let mut circ = Circuit::new(6);
        circ.gate(Gate::Mcz { controls: vec![0, 1, 2, 3], target: 4 }).unwrap();
        circ.gate(Gate::DiagonalPhase { qubits: vec![0, 1, 2], marked: vec![1, 2] }).unwrap();
        circ.gate(Gate::CPhase { control: 0, target: 5, angle: std::f64::consts::FRAC_PI_2 }).unwrap();
        let t = table();
        let expanded = expand_circuit(&circ).unwrap();
        assert_eq!(transpile_counts(&expanded, &t).unwrap(), transpile_counts(&circ, &t).unwrap());
    }
}
