//! Runtime estimates for transpiled circuits on three qubit modalities, and
//! a parametric cost model for a classical linear-scan minimum.
//!
//! The shipped unit times are placeholders: single-gate durations picked so
//! that cross-modality ratios match published aggregate timings. Replace them
//! with measured values for real estimates.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qsim::{BasisGate, GateCounts};

const DEFAULT_TABLES: &str = include_str!("../data/gate_times.json");

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimateError {
    #[error("modality {modality} has no unit time for {gate}")]
    MissingUnitTime { modality: String, gate: BasisGate },
    #[error("modality {modality}: unit time for {gate} must be positive and finite, got {value}")]
    BadUnitTime { modality: String, gate: BasisGate, value: f64 },
    #[error("no gate-time tables given")]
    NoTables,
    #[error("invalid classical cost model: {0}")]
    BadClassicalModel(String),
    #[error("cannot parse gate-time tables: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Modality {
    Superconducting,
    NeutralAtom,
    IonTrap,
}

impl Modality {
    pub const ALL: [Modality; 3] = [Modality::Superconducting, Modality::NeutralAtom, Modality::IonTrap];

    pub fn name(self) -> &'static str {
        match self {
            Modality::Superconducting => "superconducting",
            Modality::NeutralAtom => "neutral_atom",
            Modality::IonTrap => "ion_trap",
        }
    }
}

/// Seconds per basis gate for one modality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModalityGateTimes {
    pub modality: String,
    pub unit_times: BTreeMap<BasisGate, f64>,
}

impl ModalityGateTimes {
    pub fn validate(&self) -> Result<(), EstimateError> {
        for (&gate, &value) in &self.unit_times {
            if !(value.is_finite() && value > 0.0) {
                return Err(EstimateError::BadUnitTime { modality: self.modality.clone(), gate, value });
            }
        }
        Ok(())
    }

    pub fn unit_time(&self, gate: BasisGate) -> Option<f64> {
        self.unit_times.get(&gate).copied()
    }

    /// Copy with every unit time multiplied by `k`.
    pub fn scaled(&self, k: f64) -> ModalityGateTimes {
        ModalityGateTimes {
            modality: self.modality.clone(),
            unit_times: self.unit_times.iter().map(|(&g, &t)| (g, t * k)).collect(),
        }
    }
}

/// Parses `{modality: {gate: seconds}}`; tables come back sorted by name.
pub fn parse_gate_times(json: &str) -> Result<Vec<ModalityGateTimes>, EstimateError> {
    let raw: BTreeMap<String, BTreeMap<BasisGate, f64>> =
        serde_json::from_str(json).map_err(|e| EstimateError::Parse(e.to_string()))?;
    let tables: Vec<ModalityGateTimes> = raw
        .into_iter()
        .map(|(modality, unit_times)| ModalityGateTimes { modality, unit_times })
        .collect();
    if tables.is_empty() {
        return Err(EstimateError::NoTables);
    }
    for t in &tables {
        t.validate()?;
    }
    Ok(tables)
}

pub fn gate_times_to_json(tables: &[ModalityGateTimes]) -> String {
    let raw: BTreeMap<&str, &BTreeMap<BasisGate, f64>> =
        tables.iter().map(|t| (t.modality.as_str(), &t.unit_times)).collect();
    serde_json::to_string_pretty(&raw).expect("tables serialize")
}

/// The shipped placeholder tables for the three modalities.
pub fn default_gate_times() -> Vec<ModalityGateTimes> {
    parse_gate_times(DEFAULT_TABLES).expect("shipped gate-time tables are valid")
}

pub fn default_gate_times_for(modality: Modality) -> ModalityGateTimes {
    default_gate_times()
        .into_iter()
        .find(|t| t.modality == modality.name())
        .expect("every modality has a shipped table")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostLine {
    pub gate: BasisGate,
    pub count: u64,
    pub unit_time_s: f64,
    pub subtotal_s: f64,
}

/// Priced gate counts for one modality. `total_s` covers a single circuit
/// execution, with one preparation per qubit and one measurement per
/// measured qubit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostReport {
    pub modality: String,
    pub lines: Vec<CostLine>,
    pub total_s: f64,
}

impl CostReport {
    /// Total if the whole circuit, preparations and measurements included,
    /// is re-run for every shot.
    pub fn total_for_shots(&self, shots: u64) -> f64 {
        self.total_s * shots as f64
    }

    pub fn subtotal(&self, gate: BasisGate) -> f64 {
        self.lines.iter().find(|l| l.gate == gate).map_or(0.0, |l| l.subtotal_s)
    }

    pub fn counts(&self) -> GateCounts {
        self.lines.iter().map(|l| (l.gate, l.count)).collect()
    }
}

/// Prices `counts` with `times`. Lines follow basis-gate order and the total
/// is their sum in that order.
pub fn estimate_runtime(counts: &GateCounts, times: &ModalityGateTimes) -> Result<CostReport, EstimateError> {
    let mut lines = Vec::new();
    for (gate, count) in counts.iter() {
        let unit = times
            .unit_time(gate)
            .ok_or_else(|| EstimateError::MissingUnitTime { modality: times.modality.clone(), gate })?;
        lines.push(CostLine { gate, count, unit_time_s: unit, subtotal_s: count as f64 * unit });
    }
    let total_s = lines.iter().fold(0.0, |acc, l| acc + l.subtotal_s);
    Ok(CostReport { modality: times.modality.clone(), lines, total_s })
}

/// Reports for every table, fastest first; equal totals order by modality name.
pub fn compare_modalities(
    counts: &GateCounts,
    tables: &[ModalityGateTimes],
) -> Result<Vec<CostReport>, EstimateError> {
    if tables.is_empty() {
        return Err(EstimateError::NoTables);
    }
    let mut reports = tables
        .iter()
        .map(|t| estimate_runtime(counts, t))
        .collect::<Result<Vec<_>, _>>()?;
    reports.sort_by(|a, b| a.total_s.total_cmp(&b.total_s).then_with(|| a.modality.cmp(&b.modality)));
    Ok(reports)
}

/// Cost of a naive linear-scan minimum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassicalCostModel {
    pub per_comparison_s: f64,
    pub overhead_s: f64,
}

impl Default for ClassicalCostModel {
    /// Placeholder host figures: 1 ns per comparison, 1 us call overhead.
    fn default() -> Self {
        ClassicalCostModel { per_comparison_s: 1e-9, overhead_s: 1e-6 }
    }
}

impl ClassicalCostModel {
    pub fn validate(&self) -> Result<(), EstimateError> {
        let ok = |x: f64| x.is_finite() && x >= 0.0;
        if ok(self.per_comparison_s) && ok(self.overhead_s) {
            Ok(())
        } else {
            Err(EstimateError::BadClassicalModel(format!("{self:?}")))
        }
    }
}

/// `overhead + (n - 1) * per_comparison`.
pub fn classical_min_cost(n: usize, model: &ClassicalCostModel) -> f64 {
    model.overhead_s + n.saturating_sub(1) as f64 * model.per_comparison_s
}

/// Smallest `n` in `sizes` (taken in order) whose quantum time beats the
/// classical scan.
pub fn crossover(
    sizes: impl IntoIterator<Item = usize>,
    mut quantum_s: impl FnMut(usize) -> f64,
    model: &ClassicalCostModel,
) -> Option<usize> {
    sizes.into_iter().find(|&n| quantum_s(n) < classical_min_cost(n, model))
}

/// CSV with columns `modality,gate,count,unit_time_s,subtotal_s`; each
/// report ends with a `TOTAL` row.
pub fn reports_to_csv(reports: &[CostReport]) -> String {
    let mut out = String::from("modality,gate,count,unit_time_s,subtotal_s\n");
    for r in reports {
        for l in &r.lines {
            let _ = writeln!(out, "{},{},{},{:e},{:e}", r.modality, l.gate, l.count, l.unit_time_s, l.subtotal_s);
        }
        let total: u64 = r.lines.iter().map(|l| l.count).sum();
        let _ = writeln!(out, "{},TOTAL,{},,{:e}", r.modality, total, r.total_s);
    }
    out
}
