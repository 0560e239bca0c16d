//! Exact Clifford+T expansions of the multi-qubit gates.
//!
//! Multi-controlled X is reduced to Toffolis with dirty ancillas (Barenco et
//! al., lemmas 7.2 and 7.3), and every Toffoli becomes the 15-gate
//! H/CNOT/T/T-dagger circuit. The output only uses gates the transpiler
//! counts directly or maps one-to-one (`Sdg`, `Tdg`), so simulating it
//! checks the decomposition table.

use std::f64::consts::PI;

use super::{Gate, SimError};

/// Toffoli-level building block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReversibleGate {
    Cnot { control: usize, target: usize },
    Toffoli { c0: usize, c1: usize, target: usize },
}

pub fn toffoli(c0: usize, c1: usize, t: usize) -> Vec<Gate> {
    use Gate::*;
    vec![
        H(t),
        Cnot { control: c1, target: t },
        Tdg(t),
        Cnot { control: c0, target: t },
        T(t),
        Cnot { control: c1, target: t },
        Tdg(t),
        Cnot { control: c0, target: t },
        T(c1),
        T(t),
        H(t),
        Cnot { control: c0, target: c1 },
        T(c0),
        Tdg(c1),
        Cnot { control: c0, target: c1 },
    ]
}

/// Doubly-controlled Z: the Toffoli circuit without its two Hadamards.
pub fn ccz(c0: usize, c1: usize, t: usize) -> Vec<Gate> {
    let mut g = toffoli(c0, c1, t);
    g.remove(10);
    g.remove(0);
    g
}

/// C^m X with at least m - 2 dirty ancillas: 4(m - 2) Toffolis.
fn mcx_v_chain(controls: &[usize], target: usize, dirty: &[usize], out: &mut Vec<ReversibleGate>) {
    let m = controls.len();
    debug_assert!(m >= 3 && dirty.len() >= m - 2);
    let a = &dirty[..m - 2];
    let tof = |c0, c1, target| ReversibleGate::Toffoli { c0, c1, target };
    let mut half = vec![tof(controls[m - 1], a[m - 3], target)];
    for k in (2..=m - 2).rev() {
        half.push(tof(controls[k], a[k - 2], a[k - 1]));
    }
    half.push(tof(controls[0], controls[1], a[0]));
    for k in 2..=m - 2 {
        half.push(tof(controls[k], a[k - 2], a[k - 1]));
    }
    out.extend_from_slice(&half);
    out.extend_from_slice(&half);
}

/// C^m X on `target` using the qubits in `free` as dirty ancillas.
pub fn mcx_reversible(
    controls: &[usize],
    target: usize,
    free: &[usize],
) -> Result<Vec<ReversibleGate>, SimError> {
    let mut out = Vec::new();
    mcx_into(controls, target, free, &mut out)?;
    Ok(out)
}

fn mcx_into(
    controls: &[usize],
    target: usize,
    free: &[usize],
    out: &mut Vec<ReversibleGate>,
) -> Result<(), SimError> {
    let m = controls.len();
    match m {
        0 => return Err(SimError::UnsupportedGate("multi-controlled X without controls".into())),
        1 => out.push(ReversibleGate::Cnot { control: controls[0], target }),
        2 => out.push(ReversibleGate::Toffoli { c0: controls[0], c1: controls[1], target }),
        _ if free.len() >= m - 2 => mcx_v_chain(controls, target, free, out),
        _ if !free.is_empty() => {
            // split the controls around one dirty ancilla
            let anc = free[0];
            let k1 = m.div_ceil(2);
            let (g1, g2) = controls.split_at(k1);
            let mut g2a = g2.to_vec();
            g2a.push(anc);
            let mut dirty1 = g2.to_vec();
            dirty1.push(target);
            for _ in 0..2 {
                mcx_into(g1, anc, &dirty1, out)?;
                mcx_into(&g2a, target, g1, out)?;
            }
        }
        _ => return Err(SimError::NoFreeAncilla { controls: m }),
    }
    Ok(())
}

pub fn expand_reversible(gates: &[ReversibleGate]) -> Vec<Gate> {
    gates
        .iter()
        .flat_map(|g| match *g {
            ReversibleGate::Cnot { control, target } => vec![Gate::Cnot { control, target }],
            ReversibleGate::Toffoli { c0, c1, target } => toffoli(c0, c1, target),
        })
        .collect()
}

/// Clifford+T circuit for a Z controlled on `controls`. Three or more
/// controls need at least one qubit in `free`.
pub fn mcz(controls: &[usize], target: usize, free: &[usize]) -> Result<Vec<Gate>, SimError> {
    Ok(match controls.len() {
        0 => vec![Gate::Z(target)],
        1 => vec![
            Gate::H(target),
            Gate::Cnot { control: controls[0], target },
            Gate::H(target),
        ],
        2 => ccz(controls[0], controls[1], target),
        _ => {
            let mut g = vec![Gate::H(target)];
            g.extend(expand_reversible(&mcx_reversible(controls, target, free)?));
            g.push(Gate::H(target));
            g
        }
    })
}

/// Clifford+T circuit for a controlled phase of pi, pi/2 or -pi/2.
pub fn controlled_phase(control: usize, target: usize, angle: f64) -> Result<Vec<Gate>, SimError> {
    use Gate::*;
    let near = |x: f64| (angle - x).abs() < 1e-12;
    if near(PI) || near(-PI) {
        Ok(mcz(&[control], target, &[])?)
    } else if near(PI / 2.0) {
        Ok(vec![
            T(control),
            T(target),
            Cnot { control, target },
            Tdg(target),
            Cnot { control, target },
        ])
    } else if near(-PI / 2.0) {
        Ok(vec![
            Tdg(control),
            Tdg(target),
            Cnot { control, target },
            T(target),
            Cnot { control, target },
        ])
    } else {
        Err(SimError::UnsupportedGate(format!(
            "controlled phase {angle} has no exact Clifford+T expansion here"
        )))
    }
}

/// Phase flip on each marked string of `qubits`: X-conjugated multi-controlled Z per string.
pub fn diagonal_phase(qubits: &[usize], marked: &[u64], free: &[usize]) -> Result<Vec<Gate>, SimError> {
    let (&target, controls) = qubits
        .split_last()
        .ok_or_else(|| SimError::UnsupportedGate("diagonal phase on zero qubits".into()))?;
    let mut out = Vec::new();
    for &m in marked {
        let flips: Vec<Gate> = qubits
            .iter()
            .enumerate()
            .filter(|&(k, _)| (m >> k) & 1 == 0)
            .map(|(_, &q)| Gate::X(q))
            .collect();
        out.extend(flips.iter().cloned());
        out.extend(mcz(controls, target, free)?);
        out.extend(flips);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_reversible(gates: &[ReversibleGate], mut bits: u64) -> u64 {
        for g in gates {
            match *g {
                ReversibleGate::Cnot { control, target } => {
                    if bits >> control & 1 == 1 {
                        bits ^= 1 << target;
                    }
                }
                ReversibleGate::Toffoli { c0, c1, target } => {
                    if bits >> c0 & 1 == 1 && bits >> c1 & 1 == 1 {
                        bits ^= 1 << target;
                    }
                }
            }
        }
        bits
    }

    fn check_mcx(m: usize, n_free: usize) -> usize {
        let controls: Vec<usize> = (0..m).collect();
        let target = m;
        let free: Vec<usize> = (m + 1..m + 1 + n_free).collect();
        let gates = mcx_reversible(&controls, target, &free).unwrap();
        let width = m + 1 + n_free;
        let cmask = (1u64 << m) - 1;
        for bits in 0..(1u64 << width) {
            let expect = if bits & cmask == cmask { bits ^ (1 << target) } else { bits };
            assert_eq!(run_reversible(&gates, bits), expect, "m={m} free={n_free} in={bits:b}");
        }
        gates.len()
    }

    #[test]
    fn v_chain_is_exact_and_sized() {
        for m in 3..=6 {
            assert_eq!(check_mcx(m, m - 2), 4 * (m - 2));
        }
    }

    #[test]
    fn one_ancilla_split_is_exact() {
        for m in 3..=8 {
            check_mcx(m, 1);
        }
    }

    #[test]
    fn no_ancilla_fails_beyond_two_controls() {
        assert!(matches!(
            mcx_reversible(&[0, 1, 2], 3, &[]),
            Err(SimError::NoFreeAncilla { controls: 3 })
        ));
        assert!(mcz(&[0, 1, 2], 3, &[]).is_err());
        assert!(mcz(&[0, 1], 2, &[]).is_ok());
    }

    #[test]
    fn unsupported_phase_angle() {
        assert!(controlled_phase(0, 1, 0.3).is_err());
    }
}
