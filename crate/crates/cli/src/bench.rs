//! Multi-route benchmark harness.

use std::collections::BTreeMap;

use anyhow::{bail, Result};
use flightq::estimate::{classical_min_cost, crossover, estimate_runtime, ClassicalCostModel, ModalityGateTimes};
use flightq::grid::structural_counts;
use flightq::qmf::{quantum_minimum, QmfConfig};
use flightq::qsim::{transpile_counts, DecompositionTable, GateCounts};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{route_seed, BenchConfig, BenchRoute};
use crate::output::{json_bytes, Bundle};
use crate::pipeline::{load_gate_times, run_stages, AtStage, Stage, StageError};

/// One benchmarked route. Failed routes keep their name and category and
/// carry the error instead of figures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRow {
    pub route: String,
    pub category: String,
    pub distance_km: Option<f64>,
    pub layers: Option<usize>,
    pub nodes: Option<usize>,
    pub edges: Option<usize>,
    pub classical_kg: Option<f64>,
    pub quantum_kg: Option<f64>,
    pub qmf_oracle_calls: Option<u64>,
    /// Every circuit run once.
    pub modality_s: BTreeMap<String, f64>,
    /// Every circuit re-run for each shot.
    pub modality_per_shot_s: BTreeMap<String, f64>,
    pub error: Option<String>,
}

impl BenchmarkRow {
    fn failed(r: &BenchRoute, e: impl std::fmt::Display) -> Self {
        BenchmarkRow {
            route: r.name.clone(),
            category: r.category.clone(),
            distance_km: None,
            layers: None,
            nodes: None,
            edges: None,
            classical_kg: None,
            quantum_kg: None,
            qmf_oracle_calls: None,
            modality_s: BTreeMap::new(),
            modality_per_shot_s: BTreeMap::new(),
            error: Some(e.to_string()),
        }
    }
}

/// Means over the successful rows of one category. Table columns are
/// rounded to 2 decimals; modality seconds are not.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryAverage {
    pub category: String,
    pub routes: usize,
    pub distance_km: f64,
    pub layers: f64,
    pub nodes: f64,
    pub edges: f64,
    pub classical_kg: Option<f64>,
    pub quantum_kg: Option<f64>,
    pub qmf_oracle_calls: Option<f64>,
    pub modality_s: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossoverPoint {
    pub n: usize,
    pub quantum_s: f64,
    pub classical_s: f64,
}

/// Where minimum finding on the superconducting table first undercuts a
/// classical scan. Quantum time counts every shot of every round, averaged
/// over [`CROSSOVER_TRIALS`] searches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossoverReport {
    pub modality: String,
    pub classical_model: ClassicalCostModel,
    pub classical_model_placeholder: bool,
    pub points: Vec<CrossoverPoint>,
    /// `None` when no probed size crosses over.
    pub crossover_n: Option<usize>,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub seed: u64,
    pub rows: Vec<BenchmarkRow>,
    pub averages: Vec<CategoryAverage>,
    pub crossover: Option<CrossoverReport>,
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

fn bench_row(cfg: &BenchConfig, r: &BenchRoute) -> BenchmarkRow {
    let pipeline = cfg.pipeline_for(r);
    if !pipeline.route.is_file() {
        return BenchmarkRow::failed(r, format!("route file {} does not exist", pipeline.route.display()));
    }
    let run = match run_stages(&pipeline) {
        Ok(run) => run,
        Err(e) => return BenchmarkRow::failed(r, e),
    };
    let s = &run.summary;
    match structural_counts(s.layers, pipeline.perturbation.copies) {
        Ok(counts) if counts == (s.nodes, s.edges) => {}
        _ => return BenchmarkRow::failed(r, "grid size disagrees with the structural counts"),
    }
    BenchmarkRow {
        route: r.name.clone(),
        category: r.category.clone(),
        distance_km: Some(s.distance_km),
        layers: Some(s.layers),
        nodes: Some(s.nodes),
        edges: Some(s.edges),
        classical_kg: s.classical_weight_kg,
        quantum_kg: s.quantum_weight_kg,
        qmf_oracle_calls: s.qmf.as_ref().map(|q| q.oracle_invocations),
        modality_s: s.costs.iter().map(|c| (c.modality.clone(), c.per_circuit_s)).collect(),
        modality_per_shot_s: s.costs.iter().map(|c| (c.modality.clone(), c.per_shot_s)).collect(),
        error: None,
    }
}

fn raw_mean<I: Iterator<Item = f64>>(it: I) -> Option<f64> {
    let (sum, n) = it.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| sum / n as f64)
}

fn mean<I: Iterator<Item = f64>>(it: I) -> Option<f64> {
    raw_mean(it).map(round2)
}

/// Category means in order of first appearance; rows with errors are skipped.
pub fn category_averages(rows: &[BenchmarkRow]) -> Vec<CategoryAverage> {
    let mut order: Vec<&str> = Vec::new();
    for r in rows {
        if !order.contains(&r.category.as_str()) {
            order.push(&r.category);
        }
    }
    order
        .into_iter()
        .filter_map(|cat| {
            let ok: Vec<&BenchmarkRow> = rows.iter().filter(|r| r.category == cat && r.error.is_none()).collect();
            if ok.is_empty() {
                return None;
            }
            let f = |g: fn(&BenchmarkRow) -> Option<f64>| mean(ok.iter().filter_map(|r| g(r)));
            let modalities: Vec<&String> = ok[0].modality_s.keys().collect();
            Some(CategoryAverage {
                category: cat.to_string(),
                routes: ok.len(),
                distance_km: f(|r| r.distance_km).unwrap_or(0.0),
                layers: f(|r| r.layers.map(|x| x as f64)).unwrap_or(0.0),
                nodes: f(|r| r.nodes.map(|x| x as f64)).unwrap_or(0.0),
                edges: f(|r| r.edges.map(|x| x as f64)).unwrap_or(0.0),
                classical_kg: f(|r| r.classical_kg),
                quantum_kg: f(|r| r.quantum_kg),
                qmf_oracle_calls: f(|r| r.qmf_oracle_calls.map(|x| x as f64)),
                modality_s: modalities
                    .into_iter()
                    .filter_map(|m| Some((m.clone(), raw_mean(ok.iter().filter_map(|r| r.modality_s.get(m).copied()))?)))
                    .collect(),
            })
        })
        .collect()
}

/// Runs drawn per probed size; a single search costs nothing when its random
/// first guess is already the minimum.
pub const CROSSOVER_TRIALS: u64 = 16;

/// Mean seconds of one full minimum search over `n` random values on `times`.
pub fn qmf_search_seconds(n: usize, seed: u64, qmf: &QmfConfig, times: &ModalityGateTimes) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ n as u64);
    let table = DecompositionTable::default();
    let mut counts = GateCounts::new();
    for _ in 0..CROSSOVER_TRIALS {
        let values: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1000.0)).collect();
        let result = quantum_minimum(&values, rng.gen(), qmf)?;
        for round in &result.rounds {
            counts += &transpile_counts(&round.circuit(result.index_qubits)?, &table)?;
        }
    }
    let total = estimate_runtime(&counts, times)?.total_for_shots(qmf.shots_per_round);
    Ok(total / CROSSOVER_TRIALS as f64)
}

pub fn crossover_report(cfg: &BenchConfig, tables: &[ModalityGateTimes]) -> Result<Option<CrossoverReport>> {
    let Some(times) = tables.iter().find(|t| t.modality == "superconducting").or(tables.first()) else {
        return Ok(None);
    };
    let model = cfg.classical_cost.unwrap_or_default();
    model.validate()?;
    let seed = route_seed(cfg.seed, "crossover");
    let points = cfg
        .crossover_sizes
        .par_iter()
        .map(|&n| {
            if n < 2 {
                bail!("crossover sizes must be at least 2, got {n}");
            }
            Ok(CrossoverPoint {
                n,
                quantum_s: qmf_search_seconds(n, seed, &cfg.qmf, times)?,
                classical_s: classical_min_cost(n, &model),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let at = |n: usize| points.iter().find(|p| p.n == n).map_or(f64::INFINITY, |p| p.quantum_s);
    let crossover_n = crossover(cfg.crossover_sizes.iter().copied(), at, &model);
    let note = match crossover_n {
        Some(n) => format!("quantum search first beats the classical scan at N = {n}"),
        None => "none in range".to_string(),
    };
    Ok(Some(CrossoverReport {
        modality: times.modality.clone(),
        classical_model: model,
        classical_model_placeholder: cfg.classical_cost.is_none(),
        points,
        crossover_n,
        note,
    }))
}

/// Runs every route (concurrently) and the crossover probe. A failing route
/// only marks its own row.
pub fn run_benchmark(cfg: &BenchConfig) -> Result<BenchReport, StageError> {
    let tables = load_gate_times(cfg.gate_times.as_deref()).at(Stage::Config)?;
    let rows: Vec<BenchmarkRow> = cfg.routes.par_iter().map(|r| bench_row(cfg, r)).collect();
    let averages = category_averages(&rows);
    let crossover = crossover_report(cfg, &tables).at(Stage::Estimate)?;
    Ok(BenchReport { seed: cfg.seed, rows, averages, crossover })
}

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// Rows followed by one `Avg. <category>` line per category.
pub fn bench_csv(report: &BenchReport) -> Result<Vec<u8>> {
    let modalities: Vec<String> = {
        let mut m: Vec<String> = report.rows.iter().flat_map(|r| r.modality_s.keys().cloned()).collect();
        m.sort();
        m.dedup();
        m
    };
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = [
        "route",
        "category",
        "distance_km",
        "layers",
        "nodes",
        "edges",
        "classical_kg",
        "quantum_kg",
        "qmf_oracle_calls",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    header.extend(modalities.iter().map(|m| format!("{m}_s")));
    header.push("error".into());
    w.write_record(&header)?;
    for r in &report.rows {
        let mut rec = vec![
            r.route.clone(),
            r.category.clone(),
            opt(r.distance_km),
            opt(r.layers),
            opt(r.nodes),
            opt(r.edges),
            opt(r.classical_kg),
            opt(r.quantum_kg),
            opt(r.qmf_oracle_calls),
        ];
        rec.extend(modalities.iter().map(|m| opt(r.modality_s.get(m))));
        rec.push(r.error.clone().unwrap_or_default());
        w.write_record(&rec)?;
    }
    let two = |x: Option<f64>| x.map(|v| format!("{v:.2}")).unwrap_or_default();
    for a in &report.averages {
        let mut rec = vec![
            format!("Avg. {}", a.category),
            a.category.clone(),
            two(Some(a.distance_km)),
            two(Some(a.layers)),
            two(Some(a.nodes)),
            two(Some(a.edges)),
            two(a.classical_kg),
            two(a.quantum_kg),
            two(a.qmf_oracle_calls),
        ];
        rec.extend(modalities.iter().map(|m| opt(a.modality_s.get(m))));
        rec.push(String::new());
        w.write_record(&rec)?;
    }
    Ok(w.into_inner().map_err(|e| e.into_error())?)
}

pub fn bench_bundle(report: &BenchReport) -> Result<Bundle, StageError> {
    let mut bundle = Bundle::default();
    bundle.insert("bench.csv", bench_csv(report).at(Stage::Output)?);
    bundle.insert("bench.json", json_bytes(report).at(Stage::Output)?);
    Ok(bundle)
}
