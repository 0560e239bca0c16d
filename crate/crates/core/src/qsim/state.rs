use std::collections::BTreeMap;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{Gate, SimError};
use crate::Real;

pub const MAX_QUBITS: usize = 12;

/// Dense pure state of up to [`MAX_QUBITS`] qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector<F> {
    num_qubits: usize,
    amps: Vec<Complex<F>>,
}

fn check_width(n: usize) -> Result<(), SimError> {
    if (1..=MAX_QUBITS).contains(&n) {
        Ok(())
    } else {
        Err(SimError::QubitCountOutOfRange(n))
    }
}

impl<F: Real> StateVector<F> {
    /// |0...0>
    pub fn zero(num_qubits: usize) -> Result<Self, SimError> {
        Self::basis(num_qubits, 0)
    }

    pub fn basis(num_qubits: usize, index: usize) -> Result<Self, SimError> {
        check_width(num_qubits)?;
        let dim = 1usize << num_qubits;
        if index >= dim {
            return Err(SimError::BasisIndex { index, dim });
        }
        let mut amps = vec![Complex::new(F::zero(), F::zero()); dim];
        amps[index] = Complex::new(F::one(), F::zero());
        Ok(StateVector { num_qubits, amps })
    }

    /// Wraps raw amplitudes; the length must be a power of two and the norm 1.
    pub fn from_amplitudes(amps: Vec<Complex<F>>) -> Result<Self, SimError> {
        let dim = amps.len();
        if !dim.is_power_of_two() {
            return Err(SimError::QubitCountOutOfRange(0));
        }
        let num_qubits = dim.trailing_zeros() as usize;
        check_width(num_qubits)?;
        let sv = StateVector { num_qubits, amps };
        let dev = (sv.norm_sqr() - F::one()).abs();
        if dev > F::epsilon().sqrt() {
            return Err(SimError::NotNormalized(dev.to_f64_lossy()));
        }
        Ok(sv)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex<F>] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex<F>] {
        &mut self.amps
    }

    pub fn norm_sqr(&self) -> F {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probability(&self, index: usize) -> F {
        self.amps[index].norm_sqr()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr().to_f64_lossy()).collect()
    }

    /// Applies `gate` in place.
    pub fn apply(&mut self, gate: &Gate) -> Result<(), SimError> {
        gate.validate(self.num_qubits)?;
        let zero = F::zero();
        let one = F::one();
        let i_unit = Complex::new(zero, one);
        match gate {
            Gate::X(q) => self.for_pairs(*q, std::mem::swap),
            Gate::Y(q) => self.for_pairs(*q, |a, b| {
                let (a0, a1) = (*a, *b);
                *a = -i_unit * a1;
                *b = i_unit * a0;
            }),
            Gate::Z(q) => self.for_pairs(*q, |_, b| *b = -*b),
            Gate::H(q) => {
                let r = F::FRAC_1_SQRT_2();
                self.for_pairs(*q, |a, b| {
                    let (a0, a1) = (*a, *b);
                    *a = (a0 + a1).scale(r);
                    *b = (a0 - a1).scale(r);
                })
            }
            Gate::S(q) => self.for_pairs(*q, |_, b| *b *= i_unit),
            Gate::Sdg(q) => self.for_pairs(*q, |_, b| *b *= -i_unit),
            Gate::T(q) => {
                let w = Complex::from_polar(one, F::FRAC_PI_4());
                self.for_pairs(*q, |_, b| *b *= w)
            }
            Gate::Tdg(q) => {
                let w = Complex::from_polar(one, -F::FRAC_PI_4());
                self.for_pairs(*q, |_, b| *b *= w)
            }
            Gate::Cnot { control, target } => {
                let (c, t) = (1usize << control, 1usize << target);
                for i in 0..self.amps.len() {
                    if i & c != 0 && i & t == 0 {
                        self.amps.swap(i, i | t);
                    }
                }
            }
            Gate::Swap(a, b) => {
                let (ma, mb) = (1usize << a, 1usize << b);
                for i in 0..self.amps.len() {
                    if i & ma != 0 && i & mb == 0 {
                        self.amps.swap(i, i ^ ma ^ mb);
                    }
                }
            }
            Gate::CPhase { control, target, angle } => {
                let mask = (1usize << control) | (1usize << target);
                let w = Complex::from_polar(one, F::lit(*angle));
                for (i, a) in self.amps.iter_mut().enumerate() {
                    if i & mask == mask {
                        *a *= w;
                    }
                }
            }
            Gate::Mcz { controls, target } => {
                let mask = controls.iter().fold(1usize << target, |m, q| m | (1 << q));
                for (i, a) in self.amps.iter_mut().enumerate() {
                    if i & mask == mask {
                        *a = -*a;
                    }
                }
            }
            Gate::DiagonalPhase { qubits, marked } => {
                let mut flip = vec![false; 1 << qubits.len()];
                for &m in marked {
                    flip[m as usize] = true;
                }
                for (i, a) in self.amps.iter_mut().enumerate() {
                    let sub = qubits
                        .iter()
                        .enumerate()
                        .fold(0usize, |s, (k, &q)| s | (((i >> q) & 1) << k));
                    if flip[sub] {
                        *a = -*a;
                    }
                }
            }
        }
        Ok(())
    }

    fn for_pairs(&mut self, q: usize, mut f: impl FnMut(&mut Complex<F>, &mut Complex<F>)) {
        let bit = 1usize << q;
        for base in 0..self.amps.len() {
            if base & bit == 0 {
                let (lo, hi) = self.amps.split_at_mut(base | bit);
                f(&mut lo[base], &mut hi[0]);
            }
        }
    }

    /// Draws `shots` outcomes from |amplitude|^2 and returns counts per basis index.
    pub fn sample_counts<R: Rng>(&self, shots: u64, rng: &mut R) -> Result<Vec<u64>, SimError> {
        if shots == 0 {
            return Err(SimError::ZeroShots);
        }
        let mut cumulative = Vec::with_capacity(self.amps.len());
        let mut acc = 0.0f64;
        for a in &self.amps {
            acc += a.norm_sqr().to_f64_lossy();
            cumulative.push(acc);
        }
        let total = acc;
        let mut counts = vec![0u64; self.amps.len()];
        for _ in 0..shots {
            let r = rng.gen::<f64>() * total;
            let idx = cumulative.partition_point(|&c| c <= r).min(self.amps.len() - 1);
            counts[idx] += 1;
        }
        Ok(counts)
    }
}

/// Equal superposition over all 2^n basis states.
pub fn uniform_superposition<F: Real>(num_qubits: usize) -> Result<StateVector<F>, SimError> {
    check_width(num_qubits)?;
    let dim = 1usize << num_qubits;
    let a = F::one() / F::from_usize(dim).unwrap().sqrt();
    Ok(StateVector { num_qubits, amps: vec![Complex::new(a, F::zero()); dim] })
}

/// Applies `gate` to a copy of `state`.
pub fn apply_gate<F: Real>(state: &StateVector<F>, gate: &Gate) -> Result<StateVector<F>, SimError> {
    let mut out = state.clone();
    out.apply(gate)?;
    Ok(out)
}

/// Outcome bit strings (qubit 0 rightmost) and their shot counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MeasurementHistogram {
    pub counts: BTreeMap<String, u64>,
    pub shots: u64,
}

impl MeasurementHistogram {
    pub fn get(&self, bits: &str) -> u64 {
        self.counts.get(bits).copied().unwrap_or(0)
    }
}

pub fn bit_string(index: usize, num_qubits: usize) -> String {
    (0..num_qubits)
        .rev()
        .map(|q| if (index >> q) & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// Samples every qubit `shots` times with a ChaCha8 stream seeded by `seed`.
pub fn measure_all<F: Real>(
    state: &StateVector<F>,
    shots: u64,
    seed: u64,
) -> Result<MeasurementHistogram, SimError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let counts = state.sample_counts(shots, &mut rng)?;
    let counts = counts
        .into_iter()
        .enumerate()
        .filter(|&(_, c)| c > 0)
        .map(|(i, c)| (bit_string(i, state.num_qubits()), c))
        .collect();
    Ok(MeasurementHistogram { counts, shots })
}
