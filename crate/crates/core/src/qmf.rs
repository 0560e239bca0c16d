//! Quantum minimum finding: repeated Grover search for an element below the
//! current guess, simulated on the index register.
//!
//! The simulated register holds `ceil(log2 N)` index qubits. Circuits built
//! for gate counting carry one extra workspace qubit, which stays in |0> for
//! the oracle used here and serves as the spare qubit of the multi-controlled
//! Z gates.

use std::f64::consts::FRAC_PI_4;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qsim::{uniform_superposition, Basis, Circuit, Gate, SimError, StateVector, MAX_QUBITS};
use crate::Real;

/// Largest list `quantum_minimum` accepts.
pub const MAX_VALUES: usize = 1 << MAX_QUBITS;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QmfError {
    #[error("empty value list")]
    Empty,
    #[error("need at least 2 values, got {0}")]
    TooSmall(usize),
    #[error("{0} values exceed the simulator limit of 4096")]
    TooLarge(usize),
    #[error("value {0} is NaN")]
    NotANumber(usize),
    #[error("threshold index {index} out of range for {len} values")]
    ThresholdOutOfRange { index: usize, len: usize },
    #[error("no marked elements: the guess is already minimal")]
    NothingMarked,
    #[error("marked count {marked} exceeds search space {size}")]
    TooManyMarked { marked: usize, size: usize },
    #[error("shots_per_round must be positive")]
    ZeroShots,
    #[error("no verified minimum after {0} rounds")]
    RoundsExhausted(usize),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Threshold oracle input: mark every `i` with `values[i] < values[threshold_index]`.
#[derive(Debug, Clone, Copy)]
pub struct OracleSpec<'a, F> {
    pub values: &'a [F],
    pub threshold_index: usize,
}

impl<'a, F: Real> OracleSpec<'a, F> {
    pub fn new(values: &'a [F], threshold_index: usize) -> Result<Self, QmfError> {
        check_values(values)?;
        if threshold_index >= values.len() {
            return Err(QmfError::ThresholdOutOfRange { index: threshold_index, len: values.len() });
        }
        Ok(OracleSpec { values, threshold_index })
    }

    pub fn marked(&self) -> Vec<usize> {
        let t = self.values[self.threshold_index];
        (0..self.values.len()).filter(|&i| self.values[i] < t).collect()
    }
}

fn check_values<F: Real>(values: &[F]) -> Result<(), QmfError> {
    match values.len() {
        0 => return Err(QmfError::Empty),
        1 => return Err(QmfError::TooSmall(1)),
        n if n > MAX_VALUES => return Err(QmfError::TooLarge(n)),
        _ => {}
    }
    if let Some(i) = values.iter().position(|v| v.is_nan()) {
        return Err(QmfError::NotANumber(i));
    }
    Ok(())
}

/// Index qubits needed for `n` values: `ceil(log2 n)`, at least 1.
pub fn index_qubits(n: usize) -> usize {
    (n.max(2).next_power_of_two().trailing_zeros()) as usize
}

/// Diagonal phase flip on the marked indices of the index register
/// (qubits `0..ceil(log2 N)`). Padding indices are never marked.
pub fn build_phase_oracle<F: Real>(spec: &OracleSpec<'_, F>) -> Gate {
    let n = index_qubits(spec.values.len());
    Gate::DiagonalPhase {
        qubits: (0..n).collect(),
        marked: spec.marked().into_iter().map(|i| i as u64).collect(),
    }
}

/// `floor(pi/4 * sqrt(n / m))`.
pub fn grover_iterations(n: usize, m: usize) -> Result<usize, QmfError> {
    if m == 0 {
        return Err(QmfError::NothingMarked);
    }
    if m > n {
        return Err(QmfError::TooManyMarked { marked: m, size: n });
    }
    Ok((FRAC_PI_4 * (n as f64 / m as f64).sqrt()).floor() as usize)
}

/// Reflection about the uniform state: `a_i -> 2 mean(a) - a_i`.
pub fn diffusion<F: Real>(state: &mut StateVector<F>) {
    let amps = state.amplitudes_mut();
    let n = F::from_usize(amps.len()).unwrap();
    let sum = amps.iter().fold(num_complex::Complex::new(F::zero(), F::zero()), |s, a| s + a);
    let twice_mean = sum.scale(F::lit(2.0) / n);
    for a in amps.iter_mut() {
        *a = twice_mean - *a;
    }
}

/// Gate-level reflection about the uniform state on `qubits`, up to a global
/// phase of -1.
pub fn diffusion_gates(qubits: &[usize]) -> Vec<Gate> {
    let (&target, controls) = qubits.split_last().expect("at least one qubit");
    let mut g: Vec<Gate> = qubits.iter().map(|&q| Gate::H(q)).collect();
    g.extend(qubits.iter().map(|&q| Gate::X(q)));
    g.push(Gate::Mcz { controls: controls.to_vec(), target });
    g.extend(qubits.iter().map(|&q| Gate::X(q)));
    g.extend(qubits.iter().map(|&q| Gate::H(q)));
    g
}

/// `k` Grover iterations for `marked` on a fresh uniform state of `n_idx` qubits.
pub fn amplify<F: Real>(n_idx: usize, marked: &[usize], k: usize) -> Result<StateVector<F>, SimError> {
    let mut state = uniform_superposition::<F>(n_idx)?;
    let oracle = Gate::DiagonalPhase {
        qubits: (0..n_idx).collect(),
        marked: marked.iter().map(|&i| i as u64).collect(),
    };
    for _ in 0..k {
        state.apply(&oracle)?;
        diffusion(&mut state);
    }
    Ok(state)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct QmfConfig {
    pub shots_per_round: u64,
    /// Cap on Grover rounds, counted across restarts.
    pub max_rounds: usize,
    /// Confirm the result with a classical scan and restart on failure.
    pub verify: bool,
}

impl Default for QmfConfig {
    fn default() -> Self {
        QmfConfig { shots_per_round: 64, max_rounds: 256, verify: false }
    }
}

impl QmfConfig {
    pub fn verified() -> Self {
        QmfConfig { verify: true, ..QmfConfig::default() }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QmfStats {
    pub oracle_invocations: u64,
    pub grover_iterations_total: u64,
    pub measurements: u64,
    pub outer_rounds: u64,
    pub shots_per_round: u64,
    pub restarts: u64,
}

impl QmfStats {
    /// Sums counters; `shots_per_round` keeps the larger value.
    pub fn merge(&mut self, other: &QmfStats) {
        self.oracle_invocations += other.oracle_invocations;
        self.grover_iterations_total += other.grover_iterations_total;
        self.measurements += other.measurements;
        self.outer_rounds += other.outer_rounds;
        self.restarts += other.restarts;
        self.shots_per_round = self.shots_per_round.max(other.shots_per_round);
    }
}

/// One Grover round as executed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QmfRound {
    pub threshold_index: usize,
    pub marked: Vec<usize>,
    pub iterations: usize,
    /// Most common in-range outcome, if any shot landed in range.
    pub outcome: Option<usize>,
    pub improved: bool,
}

impl QmfRound {
    /// The round's circuit on `index_qubits + 1` qubits: preparation,
    /// Hadamards, the scheduled iterations, and index-register measurement.
    pub fn circuit(&self, index_qubits: usize) -> Result<Circuit, SimError> {
        qmf_round_circuit(index_qubits, &self.marked, self.iterations)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QmfResult<F> {
    pub min_index: usize,
    pub min_value: F,
    pub stats: QmfStats,
    pub verified: bool,
    pub len: usize,
    pub index_qubits: usize,
    pub rounds: Vec<QmfRound>,
}

/// Stats document for one call.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QmfExport {
    #[serde(rename = "N")]
    pub n: usize,
    pub rounds: u64,
    pub oracle_invocations: u64,
    pub iterations: u64,
    pub shots: u64,
    pub verified: bool,
    pub min_index: usize,
}

impl<F: Real> QmfResult<F> {
    pub fn export(&self) -> QmfExport {
        QmfExport {
            n: self.len,
            rounds: self.stats.outer_rounds,
            oracle_invocations: self.stats.oracle_invocations,
            iterations: self.stats.grover_iterations_total,
            shots: self.stats.measurements,
            verified: self.verified,
            min_index: self.min_index,
        }
    }
}

/// Circuit for one round: `index_qubits` index qubits plus one workspace qubit.
pub fn qmf_round_circuit(index_qubits: usize, marked: &[usize], k: usize) -> Result<Circuit, SimError> {
    let width = index_qubits + 1;
    let idx: Vec<usize> = (0..index_qubits).collect();
    let mut c = Circuit::new(width);
    for q in 0..width {
        c.prepare(q, Basis::Z)?;
    }
    c.gates(idx.iter().map(|&q| Gate::H(q)))?;
    let oracle = Gate::DiagonalPhase {
        qubits: idx.clone(),
        marked: marked.iter().map(|&i| i as u64).collect(),
    };
    let diff = diffusion_gates(&idx);
    for _ in 0..k {
        c.gate(oracle.clone())?;
        c.gates(diff.iter().cloned())?;
    }
    for &q in &idx {
        c.measure(q, Basis::Z)?;
    }
    Ok(c)
}

fn most_common(counts: &[u64], len: usize) -> Option<usize> {
    let mut best: Option<(usize, u64)> = None;
    for (i, &c) in counts.iter().enumerate().take(len) {
        if c > 0 && best.is_none_or(|(_, b)| c > b) {
            best = Some((i, c));
        }
    }
    best.map(|(i, _)| i)
}

fn argmin<F: Real>(values: &[F]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v < values[best] {
            best = i;
        }
    }
    best
}

/// Finds a minimum of `values` by threshold Grover search.
///
/// Each round marks the values below the current guess, runs the scheduled
/// number of iterations, samples `shots_per_round` outcomes and moves to the
/// most common in-range outcome (lowest index on ties) if it is strictly
/// smaller. The search stops at the first round without improvement. With
/// `verify`, a classical scan checks the answer and a failed check restarts
/// the search from a fresh random guess.
pub fn quantum_minimum<F: Real>(values: &[F], seed: u64, config: &QmfConfig) -> Result<QmfResult<F>, QmfError> {
    check_values(values)?;
    if config.shots_per_round == 0 {
        return Err(QmfError::ZeroShots);
    }
    let len = values.len();
    let n_idx = index_qubits(len);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stats = QmfStats { shots_per_round: config.shots_per_round, ..QmfStats::default() };
    let mut rounds = Vec::new();
    let true_min = if config.verify { Some(values[argmin(values)]) } else { None };

    loop {
        let mut guess = rng.gen_range(0..len);
        loop {
            let marked = OracleSpec { values, threshold_index: guess }.marked();
            if marked.is_empty() {
                break;
            }
            if rounds.len() >= config.max_rounds {
                if config.verify {
                    return Err(QmfError::RoundsExhausted(config.max_rounds));
                }
                break;
            }
            let k = grover_iterations(len, marked.len())?;
            let state = amplify::<F>(n_idx, &marked, k)?;
            let counts = state.sample_counts(config.shots_per_round, &mut rng)?;
            stats.outer_rounds += 1;
            stats.oracle_invocations += k as u64;
            stats.grover_iterations_total += k as u64;
            stats.measurements += config.shots_per_round;
            let outcome = most_common(&counts, len);
            let improved = outcome.is_some_and(|o| values[o] < values[guess]);
            rounds.push(QmfRound { threshold_index: guess, marked, iterations: k, outcome, improved });
            match outcome {
                Some(o) if improved => guess = o,
                _ => break,
            }
        }
        match true_min {
            None => {
                return Ok(QmfResult {
                    min_index: guess,
                    min_value: values[guess],
                    stats,
                    verified: false,
                    len,
                    index_qubits: n_idx,
                    rounds,
                })
            }
            Some(m) if values[guess] == m => {
                return Ok(QmfResult {
                    min_index: guess,
                    min_value: m,
                    stats,
                    verified: true,
                    len,
                    index_qubits: n_idx,
                    rounds,
                })
            }
            Some(_) => {
                if rounds.len() >= config.max_rounds {
                    return Err(QmfError::RoundsExhausted(config.max_rounds));
                }
                stats.restarts += 1;
            }
        }
    }
}
