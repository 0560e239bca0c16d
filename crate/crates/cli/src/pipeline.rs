//! The ingest, grid, weigh, solve and estimate stages, and the output bundle
//! they produce.

use std::fmt;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use flightq::estimate::{
    compare_modalities, default_gate_times, parse_gate_times, reports_to_csv, ClassicalCostModel,
    CostReport, ModalityGateTimes,
};
use flightq::fuel::{edge_breakdowns, AircraftConfig, AircraftModel, AtmosphereModel, EdgeFuelBreakdown};
use flightq::grid::{build_dag, perturb_route, LayeredDag, NodeId};
use flightq::qsim::{transpile_counts, DecompositionTable, GateCounts};
use flightq::route::{insert_midpoints, load_route_file, Route, Waypoint};
use flightq::sssp::{dijkstra_classical, dijkstra_quantum, path_weight, SsspReport};
use serde::{Deserialize, Serialize};

use crate::config::PipelineConfig;
use crate::output::{csv_bytes, json_bytes, Bundle};

/// Pipeline stage named in error reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Config,
    Ingest,
    Grid,
    Weigh,
    Solve,
    Estimate,
    Output,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Config => "config",
            Stage::Ingest => "ingest",
            Stage::Grid => "grid",
            Stage::Weigh => "weigh",
            Stage::Solve => "solve",
            Stage::Estimate => "estimate",
            Stage::Output => "output",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A failure tagged with the stage that raised it.
#[derive(Debug)]
pub struct StageError {
    pub stage: Stage,
    pub source: anyhow::Error,
}

impl fmt::Display for StageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} stage failed: {:#}", self.stage, self.source)
    }
}

impl std::error::Error for StageError {}

pub(crate) trait AtStage<T> {
    fn at(self, stage: Stage) -> Result<T, StageError>;
}

impl<T, E: Into<anyhow::Error>> AtStage<T> for Result<T, E> {
    fn at(self, stage: Stage) -> Result<T, StageError> {
        self.map_err(|e| StageError { stage, source: e.into() })
    }
}

/// How far a run goes; each command includes the outputs of the ones before.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Command {
    Grid,
    Weigh,
    Solve,
    Estimate,
}

/// Seed stream for the quantum solver, kept apart from the perturbation seed.
fn solver_seed(seed: u64) -> u64 {
    seed ^ 0x9e37_79b9_7f4a_7c15
}

pub struct GridStage {
    /// Densified route with the altitude profile applied.
    pub route: Route<f64>,
    pub distance_km: f64,
    pub dag: LayeredDag<f64>,
}

pub struct WeighStage {
    pub dag: LayeredDag<f64>,
    pub breakdowns: Vec<EdgeFuelBreakdown<f64>>,
}

pub struct SolveStage {
    pub classical: Option<SsspReport<f64>>,
    pub quantum: Option<SsspReport<f64>>,
}

pub struct EstimateStage {
    pub circuits: Vec<(String, GateCounts)>,
    pub total: GateCounts,
    pub reports: Vec<CostReport>,
}

pub fn ingest(cfg: &PipelineConfig) -> Result<Route<f64>, StageError> {
    load_route_file(&cfg.route)
        .with_context(|| format!("route {}", cfg.route.display()))
        .at(Stage::Ingest)
}

pub fn build_grid(cfg: &PipelineConfig) -> Result<GridStage, StageError> {
    let route = ingest(cfg)?;
    let distance_km = route.length_km();
    let mut dense = insert_midpoints(&route, cfg.midpoints);
    if let Some(p) = &cfg.altitude_profile {
        let highest = route.waypoints.iter().map(|w| w.alt_ft).fold(0.0, f64::max);
        dense = p.profile(highest).apply(&dense).at(Stage::Grid)?;
    }
    let perturbed = perturb_route(&dense, &cfg.perturbation.spec(cfg.seed)).at(Stage::Grid)?;
    let dag = build_dag(&dense.waypoints, &perturbed).at(Stage::Grid)?;
    Ok(GridStage { route: dense, distance_km, dag })
}

pub fn load_aircraft(cfg: &PipelineConfig) -> Result<AircraftModel<f64>> {
    let config = match &cfg.aircraft {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
            serde_json::from_str::<AircraftConfig>(&text)
                .with_context(|| format!("invalid aircraft file {}", path.display()))?
        }
        None => AircraftConfig::default(),
    };
    Ok(config.to_model()?)
}

pub fn load_gate_times(path: Option<&Path>) -> Result<Vec<ModalityGateTimes>> {
    match path {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
            Ok(parse_gate_times(&text).with_context(|| format!("gate times {}", path.display()))?)
        }
        None => Ok(default_gate_times()),
    }
}

pub fn weigh(cfg: &PipelineConfig, grid: &GridStage) -> Result<WeighStage, StageError> {
    let aircraft = load_aircraft(cfg).at(Stage::Weigh)?;
    let breakdowns = edge_breakdowns(&grid.dag, &aircraft, &AtmosphereModel::default()).at(Stage::Weigh)?;
    let dag = grid
        .dag
        .clone()
        .with_weights(breakdowns.iter().map(|b| b.fuel_kg).collect())
        .at(Stage::Weigh)?;
    Ok(WeighStage { dag, breakdowns })
}

pub fn solve(cfg: &PipelineConfig, weighed: &WeighStage) -> Result<SolveStage, StageError> {
    let dag = &weighed.dag;
    let classical = if cfg.solver.classical() {
        Some(dijkstra_classical(dag, dag.source()).at(Stage::Solve)?)
    } else {
        None
    };
    let quantum = if cfg.solver.quantum() {
        Some(dijkstra_quantum(dag, dag.source(), &cfg.qmf, solver_seed(cfg.seed)).at(Stage::Solve)?)
    } else {
        None
    };
    Ok(SolveStage { classical, quantum })
}

/// Transpiles every minimum-finding round of the quantum run and prices the
/// total with each modality table.
pub fn estimate(cfg: &PipelineConfig, solved: &SolveStage) -> Result<EstimateStage, StageError> {
    let tables = load_gate_times(cfg.gate_times.as_deref()).at(Stage::Estimate)?;
    let table = DecompositionTable::default();
    let mut circuits = Vec::new();
    if let Some(q) = &solved.quantum {
        for (i, call) in q.qmf_calls.iter().enumerate() {
            for (j, round) in call.rounds.iter().enumerate() {
                let circuit = round.circuit(call.index_qubits).at(Stage::Estimate)?;
                let counts = transpile_counts(&circuit, &table).at(Stage::Estimate)?;
                circuits.push((format!("call{i}_round{j}"), counts));
            }
        }
    }
    let mut total = GateCounts::new();
    for (_, c) in &circuits {
        total += c;
    }
    let reports = compare_modalities(&total, &tables).at(Stage::Estimate)?;
    Ok(EstimateStage { circuits, total, reports })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QmfSummary {
    pub calls: usize,
    pub circuits: usize,
    pub rounds: u64,
    pub oracle_invocations: u64,
    pub grover_iterations: u64,
    pub measurements: u64,
    pub restarts: u64,
    pub shots_per_round: u64,
    pub max_index_qubits: usize,
}

/// Runtime of one modality under both accounting conventions: every circuit
/// run once, or every circuit re-run for each shot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModalityCost {
    pub modality: String,
    pub rank: usize,
    pub per_circuit_s: f64,
    pub per_shot_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub route: String,
    pub seed: u64,
    pub distance_km: f64,
    pub layers: usize,
    pub nodes: usize,
    pub edges: usize,
    pub original_weight_kg: f64,
    pub classical_weight_kg: Option<f64>,
    pub quantum_weight_kg: Option<f64>,
    /// Classical and quantum weights within 1e-9 relative.
    pub weights_agree: Option<bool>,
    pub qmf: Option<QmfSummary>,
    pub total_gates: u64,
    pub costs: Vec<ModalityCost>,
    pub classical_cost_model: ClassicalCostModel,
    /// True while the classical model holds the built-in placeholder figures.
    pub classical_cost_placeholder: bool,
}

fn target_weight(dag: &LayeredDag<f64>, r: &SsspReport<f64>) -> f64 {
    r.distance(dag.sink())
}

pub fn weights_agree(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs())
}

pub fn summarize(
    cfg: &PipelineConfig,
    grid: &GridStage,
    weighed: &WeighStage,
    solved: &SolveStage,
    est: &EstimateStage,
) -> Summary {
    let dag = &weighed.dag;
    let classical = solved.classical.as_ref().map(|r| target_weight(dag, r));
    let quantum = solved.quantum.as_ref().map(|r| target_weight(dag, r));
    let qmf = solved.quantum.as_ref().map(|q| {
        let s = q.min_find_stats.unwrap_or_default();
        QmfSummary {
            calls: q.qmf_calls.len(),
            circuits: est.circuits.len(),
            rounds: s.outer_rounds,
            oracle_invocations: s.oracle_invocations,
            grover_iterations: s.grover_iterations_total,
            measurements: s.measurements,
            restarts: s.restarts,
            shots_per_round: cfg.qmf.shots_per_round,
            max_index_qubits: q.qmf_calls.iter().map(|c| c.index_qubits).max().unwrap_or(0),
        }
    });
    let costs = est
        .reports
        .iter()
        .enumerate()
        .map(|(i, r)| ModalityCost {
            modality: r.modality.clone(),
            rank: i + 1,
            per_circuit_s: r.total_s,
            per_shot_s: r.total_for_shots(cfg.qmf.shots_per_round),
        })
        .collect();
    let model = cfg.classical_cost.unwrap_or_default();
    Summary {
        route: format!("{}-{}", grid.route.origin, grid.route.destination),
        seed: cfg.seed,
        distance_km: grid.distance_km,
        layers: dag.layers().len(),
        nodes: dag.node_count(),
        edges: dag.edge_count(),
        original_weight_kg: path_weight(dag, &dag.original_path()).unwrap_or(f64::NAN),
        classical_weight_kg: classical,
        quantum_weight_kg: quantum,
        weights_agree: classical.zip(quantum).map(|(a, b)| weights_agree(a, b)),
        qmf,
        total_gates: est.total.total(),
        costs,
        classical_cost_model: model,
        classical_cost_placeholder: cfg.classical_cost.is_none(),
    }
}

/// Everything a full run computes.
pub struct PipelineRun {
    pub grid: GridStage,
    pub weighed: WeighStage,
    pub solved: SolveStage,
    pub estimated: EstimateStage,
    pub summary: Summary,
}

/// Runs every stage in memory.
pub fn run_stages(cfg: &PipelineConfig) -> Result<PipelineRun, StageError> {
    let grid = build_grid(cfg)?;
    let weighed = weigh(cfg, &grid)?;
    let solved = solve(cfg, &weighed)?;
    let estimated = estimate(cfg, &solved)?;
    let summary = summarize(cfg, &grid, &weighed, &solved, &estimated);
    Ok(PipelineRun { grid, weighed, solved, estimated, summary })
}

const EDGE_HEADER: &[&str] = &[
    "from",
    "to",
    "from_layer",
    "fuel_kg",
    "distance_m",
    "climb_m",
    "gamma_rad",
    "mean_altitude_m",
    "density_kg_m3",
    "drag_n",
    "thrust_n",
    "fuel_flow_kg_s",
];

#[derive(Serialize)]
struct EdgeRow {
    from: usize,
    to: usize,
    from_layer: usize,
    fuel_kg: f64,
    distance_m: f64,
    climb_m: f64,
    gamma_rad: f64,
    mean_altitude_m: f64,
    density_kg_m3: f64,
    drag_n: f64,
    thrust_n: f64,
    fuel_flow_kg_s: f64,
}

fn edges_csv(w: &WeighStage) -> Result<Vec<u8>> {
    let rows = w.dag.edges().iter().zip(&w.breakdowns).map(|(e, b)| EdgeRow {
        from: e.from.0,
        to: e.to.0,
        from_layer: w.dag.node(e.from).layer,
        fuel_kg: b.fuel_kg,
        distance_m: b.distance_m,
        climb_m: b.climb_m,
        gamma_rad: b.gamma_rad,
        mean_altitude_m: b.mean_altitude_m,
        density_kg_m3: b.density_kg_m3,
        drag_n: b.drag_n,
        thrust_n: b.thrust_n,
        fuel_flow_kg_s: b.fuel_flow_kg_s,
    });
    csv_bytes(EDGE_HEADER, rows)
}

#[derive(Serialize)]
struct PathRow<'a> {
    path: &'a str,
    seq: usize,
    node: usize,
    lat: f64,
    lon: f64,
    alt_ft: f64,
}

fn paths_csv(dag: &LayeredDag<f64>, paths: &[(&str, Vec<NodeId>)]) -> Result<Vec<u8>> {
    let rows = paths.iter().flat_map(|(name, path)| {
        path.iter().enumerate().map(move |(seq, &id)| {
            let Waypoint { lat, lon, alt_ft } = dag.node(id).coord;
            PathRow { path: name, seq, node: id.0, lat, lon, alt_ft }
        })
    });
    csv_bytes(&["path", "seq", "node", "lat", "lon", "alt_ft"], rows)
}

#[derive(Serialize)]
struct GateRow<'a> {
    circuit_id: &'a str,
    gate_name: &'static str,
    count: u64,
}

fn gate_counts_csv(est: &EstimateStage) -> Result<Vec<u8>> {
    let all = est.circuits.iter().map(|(id, c)| (id.as_str(), c)).chain([("total", &est.total)]);
    let rows = all.flat_map(|(id, c)| {
        c.iter()
            .filter(|&(_, n)| n > 0)
            .map(move |(g, n)| GateRow { circuit_id: id, gate_name: g.name(), count: n })
    });
    csv_bytes(&["circuit_id", "gate_name", "count"], rows)
}

fn sssp_json(dag: &LayeredDag<f64>, r: &SsspReport<f64>) -> Result<Vec<u8>> {
    json_bytes(&r.export(dag.sink())?)
}

/// Runs the stages `command` needs and collects its output files.
pub fn run_command(cfg: &PipelineConfig, command: Command) -> Result<Bundle, StageError> {
    let mut bundle = Bundle::default();
    let grid = build_grid(cfg)?;
    if command == Command::Grid {
        bundle.insert("grid.json", json_bytes(&grid.dag.export()).at(Stage::Output)?);
        return Ok(bundle);
    }
    let weighed = weigh(cfg, &grid)?;
    let dag = &weighed.dag;
    bundle.insert("grid.json", json_bytes(&dag.export()).at(Stage::Output)?);
    bundle.insert("edges.csv", edges_csv(&weighed).at(Stage::Output)?);
    if command == Command::Weigh {
        return Ok(bundle);
    }
    let solved = solve(cfg, &weighed)?;
    let mut paths = vec![("original", dag.original_path())];
    for (name, report) in [("classical", &solved.classical), ("quantum", &solved.quantum)] {
        if let Some(r) = report {
            bundle.insert(format!("sssp_{name}.json"), sssp_json(dag, r).at(Stage::Output)?);
            paths.push((name, r.path_to(dag.sink()).at(Stage::Solve)?));
        }
    }
    bundle.insert("paths.csv", paths_csv(dag, &paths).at(Stage::Output)?);
    if command == Command::Solve {
        return Ok(bundle);
    }
    let est = estimate(cfg, &solved)?;
    bundle.insert("gate_counts.csv", gate_counts_csv(&est).at(Stage::Output)?);
    bundle.insert("cost.csv", reports_to_csv(&est.reports).into_bytes());
    let summary = summarize(cfg, &grid, &weighed, &solved, &est);
    bundle.insert("summary.json", json_bytes(&summary).at(Stage::Output)?);
    Ok(bundle)
}

/// Runs `command` and writes its bundle under `out`.
pub fn run_pipeline(cfg: &PipelineConfig, command: Command, out: &Path) -> Result<Bundle, StageError> {
    let bundle = run_command(cfg, command)?;
    bundle.write_to(out).at(Stage::Output)?;
    Ok(bundle)
}
