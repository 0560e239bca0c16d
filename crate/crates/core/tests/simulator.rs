use std::f64::consts::{FRAC_1_SQRT_2, PI};

use flightq::qsim::{
    apply_gate, bit_string, measure_all, uniform_superposition, Gate, SimError, StateVector,
};
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type C = Complex<f64>;

fn random_state(n: usize, rng: &mut ChaCha8Rng) -> StateVector<f64> {
    let amps: Vec<C> = (0..1 << n)
        .map(|_| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    StateVector::from_amplitudes(amps.into_iter().map(|a| a / norm).collect()).unwrap()
}

fn close(a: &StateVector<f64>, b: &StateVector<f64>, tol: f64) -> bool {
    a.amplitudes().iter().zip(b.amplitudes()).all(|(x, y)| (x - y).norm() < tol)
}

fn all_gates(n: usize) -> Vec<Gate> {
    let mut g = Vec::new();
    for q in 0..n {
        g.extend([
            Gate::X(q),
            Gate::Y(q),
            Gate::Z(q),
            Gate::H(q),
            Gate::S(q),
            Gate::Sdg(q),
            Gate::T(q),
            Gate::Tdg(q),
        ]);
    }
    for a in 0..n {
        for b in 0..n {
            if a != b {
                g.push(Gate::Cnot { control: a, target: b });
                g.push(Gate::Swap(a, b));
                g.push(Gate::CPhase { control: a, target: b, angle: 0.37 });
            }
        }
    }
    if n >= 3 {
        g.push(Gate::Mcz { controls: vec![0, 2], target: 1 });
        g.push(Gate::DiagonalPhase { qubits: vec![2, 0], marked: vec![1, 2] });
    }
    g
}

/// Reference 2x2 / 4x4 matrices lifted to the full register by index
/// arithmetic.
fn dense_apply(gate: &Gate, n: usize, input: usize) -> Vec<C> {
    let dim = 1 << n;
    let mut out = vec![C::new(0.0, 0.0); dim];
    let bit = |i: usize, q: usize| (i >> q) & 1;
    let i = C::new(0.0, 1.0);
    let one_q = |q: usize, m: [[C; 2]; 2], out: &mut Vec<C>| {
        let b = bit(input, q);
        for r in 0..2 {
            out[(input & !(1 << q)) | (r << q)] += m[r][b];
        }
    };
    let r = C::new(FRAC_1_SQRT_2, 0.0);
    let z = C::new(0.0, 0.0);
    let o = C::new(1.0, 0.0);
    match gate {
        Gate::X(q) => one_q(*q, [[z, o], [o, z]], &mut out),
        Gate::Y(q) => one_q(*q, [[z, -i], [i, z]], &mut out),
        Gate::Z(q) => one_q(*q, [[o, z], [z, -o]], &mut out),
        Gate::H(q) => one_q(*q, [[r, r], [r, -r]], &mut out),
        Gate::S(q) => one_q(*q, [[o, z], [z, i]], &mut out),
        Gate::Sdg(q) => one_q(*q, [[o, z], [z, -i]], &mut out),
        Gate::T(q) => one_q(*q, [[o, z], [z, C::from_polar(1.0, PI / 4.0)]], &mut out),
        Gate::Tdg(q) => one_q(*q, [[o, z], [z, C::from_polar(1.0, -PI / 4.0)]], &mut out),
        Gate::Cnot { control, target } => {
            out[if bit(input, *control) == 1 { input ^ (1 << target) } else { input }] = o;
        }
        Gate::Swap(a, b) => {
            let (x, y) = (bit(input, *a), bit(input, *b));
            let j = (input & !(1 << a) & !(1 << b)) | (y << a) | (x << b);
            out[j] = o;
        }
        Gate::CPhase { control, target, angle } => {
            let both = bit(input, *control) == 1 && bit(input, *target) == 1;
            out[input] = if both { C::from_polar(1.0, *angle) } else { o };
        }
        Gate::Mcz { controls, target } => {
            let all = controls.iter().all(|&c| bit(input, c) == 1) && bit(input, *target) == 1;
            out[input] = if all { -o } else { o };
        }
        Gate::DiagonalPhase { qubits, marked } => {
            let sub = qubits.iter().enumerate().fold(0u64, |s, (k, &q)| s | ((bit(input, q) as u64) << k));
            out[input] = if marked.contains(&sub) { -o } else { o };
        }
    }
    out
}

#[test]
fn hadamard_on_zero() {
    let s = apply_gate(&StateVector::<f64>::zero(1).unwrap(), &Gate::H(0)).unwrap();
    assert!((s.amplitudes()[0].re - FRAC_1_SQRT_2).abs() < 1e-15);
    assert!((s.amplitudes()[1].re - FRAC_1_SQRT_2).abs() < 1e-15);
}

#[test]
fn cnot_flips_target_when_control_set() {
    // |10>: qubit 1 set; control on qubit 1, target qubit 0
    let s = StateVector::<f64>::basis(2, 0b10).unwrap();
    let s = apply_gate(&s, &Gate::Cnot { control: 1, target: 0 }).unwrap();
    assert_eq!(s.probability(0b11), 1.0);
}

#[test]
fn x_twice_is_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..20 {
        let s = random_state(3, &mut rng);
        let t = apply_gate(&apply_gate(&s, &Gate::X(1)).unwrap(), &Gate::X(1)).unwrap();
        assert!(close(&s, &t, 1e-15));
    }
}

#[test]
fn uniform_superposition_amplitudes() {
    let s = uniform_superposition::<f64>(1).unwrap();
    assert!(s.amplitudes().iter().all(|a| (a.re - FRAC_1_SQRT_2).abs() < 1e-15));
    let s = uniform_superposition::<f64>(2).unwrap();
    assert!(s.amplitudes().iter().all(|a| (a.re - 0.5).abs() < 1e-15));
    for n in 1..=12 {
        assert!((uniform_superposition::<f64>(n).unwrap().norm_sqr() - 1.0).abs() < 1e-12);
    }
    assert_eq!(uniform_superposition::<f64>(0), Err(SimError::QubitCountOutOfRange(0)));
    assert_eq!(uniform_superposition::<f64>(13), Err(SimError::QubitCountOutOfRange(13)));
}

#[test]
fn bad_indices_are_rejected() {
    let mut s = StateVector::<f64>::zero(2).unwrap();
    assert_eq!(s.apply(&Gate::H(2)), Err(SimError::QubitIndex { index: 2, num_qubits: 2 }));
    assert_eq!(s.apply(&Gate::Cnot { control: 1, target: 1 }), Err(SimError::DuplicateQubit(1)));
}

#[test]
fn every_gate_matches_its_matrix() {
    for n in 1..=3 {
        for g in all_gates(n) {
            for input in 0..1 << n {
                let s = apply_gate(&StateVector::<f64>::basis(n, input).unwrap(), &g).unwrap();
                let expect = dense_apply(&g, n, input);
                for (a, b) in s.amplitudes().iter().zip(&expect) {
                    assert!((a - b).norm() < 1e-10, "{g:?} on |{input}>");
                }
            }
        }
    }
}

#[test]
fn gates_preserve_norm_and_invert() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let gates = all_gates(3);
    for _ in 0..20 {
        let s0 = random_state(3, &mut rng);
        let mut s = s0.clone();
        let seq: Vec<&Gate> = (0..40).map(|_| &gates[rng.gen_range(0..gates.len())]).collect();
        for g in &seq {
            s.apply(g).unwrap();
            assert!((s.norm_sqr() - 1.0).abs() < 1e-10);
        }
        for g in seq.iter().rev() {
            s.apply(&g.inverse()).unwrap();
        }
        assert!(close(&s, &s0, 1e-10));
    }
}

#[test]
fn single_precision_state_tracks_double() {
    let mut a = StateVector::<f32>::zero(3).unwrap();
    let mut b = StateVector::<f64>::zero(3).unwrap();
    for g in all_gates(3) {
        a.apply(&g).unwrap();
        b.apply(&g).unwrap();
    }
    for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
        assert!((x.re as f64 - y.re).abs() < 1e-4 && (x.im as f64 - y.im).abs() < 1e-4);
    }
}

#[test]
fn basis_state_measures_deterministically() {
    let s = StateVector::<f64>::basis(2, 0b01).unwrap();
    let h = measure_all(&s, 100, 7).unwrap();
    assert_eq!(h.counts.len(), 1);
    assert_eq!(h.get("01"), 100);
    assert_eq!(bit_string(0b0110, 4), "0110");
    assert_eq!(measure_all(&s, 0, 7), Err(SimError::ZeroShots));
}

#[test]
fn uniform_histogram_within_binomial_bounds() {
    let s = uniform_superposition::<f64>(2).unwrap();
    let shots = 100_000u64;
    let h = measure_all(&s, shots, 42).unwrap();
    let sigma = (shots as f64 * 0.25 * 0.75).sqrt();
    assert_eq!(h.counts.values().sum::<u64>(), shots);
    for bits in ["00", "01", "10", "11"] {
        assert!((h.get(bits) as f64 - 25_000.0).abs() < 3.0 * sigma, "{bits}: {}", h.get(bits));
    }
    assert_eq!(h, measure_all(&s, shots, 42).unwrap());
}
