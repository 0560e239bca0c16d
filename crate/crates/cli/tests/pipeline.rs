use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command as Process;

use flightq::grid::structural_counts;
use flightq_cli::bench::{bench_bundle, category_averages};
use flightq_cli::pipeline::weights_agree;
use flightq_cli::{run_benchmark, run_command, run_pipeline, BenchConfig, Command, PipelineConfig, Solver};
use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn schema(name: &str) -> Value {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas").join(format!("{name}.schema.json"));
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn assert_valid(schema_name: &str, bytes: &[u8]) {
    let instance: Value = serde_json::from_slice(bytes).unwrap();
    if let Err(e) = jsonschema::validate(&schema(schema_name), &instance) {
        panic!("{schema_name}: {e} at {}", e.instance_path);
    }
}

fn csv_header(bytes: &[u8]) -> Vec<String> {
    let text = std::str::from_utf8(bytes).unwrap();
    text.lines().next().unwrap().split(',').map(str::to_string).collect()
}

fn csv_columns() -> Value {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas/csv_columns.json");
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn summary(bundle: &flightq_cli::Bundle) -> Value {
    serde_json::from_slice(bundle.get("summary.json").unwrap()).unwrap()
}

#[test]
fn minimal_route_gives_the_smallest_grid() {
    let cfg = PipelineConfig::load(&fixture("minimal.json")).unwrap();
    let bundle = run_command(&cfg, Command::Estimate).unwrap();
    let s = summary(&bundle);
    let (nodes, edges) = structural_counts(3, 1).unwrap();
    assert_eq!((nodes, edges), (4, 4));
    assert_eq!(s["nodes"], nodes);
    assert_eq!(s["edges"], edges);
    assert!(s["quantum_weight_kg"].is_null());
    assert!(bundle.get("sssp_classical.json").is_some());
    assert!(bundle.get("sssp_quantum.json").is_none());
}

#[test]
fn philadelphia_boston_grid_size() {
    let cfg = PipelineConfig::load(&fixture("phl_bos.json")).unwrap();
    let bundle = run_command(&cfg, Command::Grid).unwrap();
    let grid: Value = serde_json::from_slice(bundle.get("grid.json").unwrap()).unwrap();
    assert_eq!(grid["node_count"], 44);
    assert_eq!(grid["edge_count"], 228);
    assert_eq!(bundle.names().collect::<Vec<_>>(), ["grid.json"]);
}

#[test]
fn verified_quantum_path_matches_classical() {
    let cfg = PipelineConfig::load(&fixture("phl_bos.json")).unwrap();
    assert_eq!(cfg.solver, Solver::Both);
    let s = summary(&run_command(&cfg, Command::Estimate).unwrap());
    let c = s["classical_weight_kg"].as_f64().unwrap();
    let q = s["quantum_weight_kg"].as_f64().unwrap();
    assert!(weights_agree(c, q), "{c} vs {q}");
    assert!(c <= s["original_weight_kg"].as_f64().unwrap());
    assert_eq!(s["costs"][0]["modality"], "superconducting");
}

#[test]
fn every_output_matches_its_schema() {
    let cfg = PipelineConfig::load(&fixture("phl_bos.json")).unwrap();
    let bundle = run_command(&cfg, Command::Estimate).unwrap();
    assert_valid("grid", bundle.get("grid.json").unwrap());
    assert_valid("sssp", bundle.get("sssp_classical.json").unwrap());
    assert_valid("sssp", bundle.get("sssp_quantum.json").unwrap());
    assert_valid("summary", bundle.get("summary.json").unwrap());
    let layouts = csv_columns();
    for (name, cols) in layouts["files"].as_object().unwrap() {
        let expected: Vec<String> = cols.as_array().unwrap().iter().map(|c| c.as_str().unwrap().to_string()).collect();
        assert_eq!(csv_header(bundle.get(name).unwrap()), expected, "{name}");
    }
}

#[test]
fn fixtures_match_their_schemas() {
    assert_valid("pipeline_config", &fs::read(fixture("phl_bos.json")).unwrap());
    assert_valid("pipeline_config", &fs::read(fixture("minimal.json")).unwrap());
    assert_valid("bench_config", &fs::read(fixture("bench.json")).unwrap());
    assert_valid("aircraft", &fs::read(fixture("aircraft_a320.json")).unwrap());
    let tables = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/data/gate_times.json");
    assert_valid("gate_times", &fs::read(tables).unwrap());
    for entry in fs::read_dir(fixture("routes")).unwrap() {
        assert_valid("route", &fs::read(entry.unwrap().path()).unwrap());
    }
}

#[test]
fn commands_emit_cumulative_bundles() {
    let cfg = PipelineConfig::load(&fixture("phl_bos.json")).unwrap();
    let names = |c| run_command(&cfg, c).unwrap().names().map(str::to_string).collect::<Vec<_>>();
    assert_eq!(names(Command::Weigh), ["edges.csv", "grid.json"]);
    assert_eq!(
        names(Command::Solve),
        ["edges.csv", "grid.json", "paths.csv", "sssp_classical.json", "sssp_quantum.json"]
    );
    assert_eq!(names(Command::Estimate).len(), 8);
}

#[test]
fn paths_csv_holds_three_polylines() {
    let cfg = PipelineConfig::load(&fixture("phl_bos.json")).unwrap();
    let bundle = run_command(&cfg, Command::Solve).unwrap();
    let text = std::str::from_utf8(bundle.get("paths.csv").unwrap()).unwrap();
    for name in ["original", "classical", "quantum"] {
        let rows = text.lines().filter(|l| l.starts_with(&format!("{name},"))).count();
        assert_eq!(rows, 9, "{name}");
    }
}

#[test]
fn bundle_is_written_to_disk() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = PipelineConfig::load(&fixture("minimal.json")).unwrap();
    let bundle = run_pipeline(&cfg, Command::Estimate, dir.path()).unwrap();
    for (name, bytes) in bundle.iter() {
        assert_eq!(fs::read(dir.path().join(name)).unwrap(), bytes);
    }
}

#[test]
fn single_route_benchmark_averages_equal_the_row() {
    let mut cfg = BenchConfig::load(&fixture("bench.json")).unwrap();
    cfg.routes.truncate(1);
    cfg.crossover_sizes = vec![4, 8];
    let report = run_benchmark(&cfg).unwrap();
    assert_eq!(report.rows.len(), 1);
    let (row, avg) = (&report.rows[0], &report.averages[0]);
    assert_eq!(avg.routes, 1);
    assert_eq!(avg.nodes, row.nodes.unwrap() as f64);
    assert_eq!(avg.edges, row.edges.unwrap() as f64);
    assert_eq!(avg.distance_km, (row.distance_km.unwrap() * 100.0).round() / 100.0);
    assert_eq!(avg.modality_s, row.modality_s);
}

#[test]
fn nine_route_benchmark_reproduces_grid_sizes() {
    let cfg = BenchConfig::load(&fixture("bench.json")).unwrap();
    let report = run_benchmark(&cfg).unwrap();
    let sizes: Vec<(usize, usize)> = report.rows.iter().map(|r| (r.nodes.unwrap(), r.edges.unwrap())).collect();
    assert_eq!(
        sizes,
        [(44, 228), (146, 840), (128, 732), (164, 948), (272, 1596), (314, 1848), (248, 1452), (674, 4008), (422, 2496)]
    );
    for r in &report.rows {
        assert!(r.error.is_none());
        assert!(weights_agree(r.classical_kg.unwrap(), r.quantum_kg.unwrap()), "{}", r.route);
    }
    assert_eq!(report.averages.len(), 3);
    assert_eq!(report.averages[0].nodes, 106.0);
    assert_eq!(report.averages[1].edges, 1464.0);
    let bundle = bench_bundle(&report).unwrap();
    assert_valid("bench", bundle.get("bench.json").unwrap());
    let header = csv_header(bundle.get("bench.csv").unwrap());
    let prefix: Vec<String> =
        csv_columns()["bench_prefix"].as_array().unwrap().iter().map(|c| c.as_str().unwrap().to_string()).collect();
    assert_eq!(header[..prefix.len()], prefix[..]);
    assert_eq!(header.last().unwrap(), "error");
    assert!(report.crossover.is_some());
}

#[test]
fn benchmark_is_deterministic_and_order_free() {
    let mut cfg = BenchConfig::load(&fixture("bench.json")).unwrap();
    cfg.crossover_sizes = vec![4, 16];
    let a = bench_bundle(&run_benchmark(&cfg).unwrap()).unwrap();
    let b = bench_bundle(&run_benchmark(&cfg).unwrap()).unwrap();
    assert_eq!(a.get("bench.csv"), b.get("bench.csv"));
    assert_eq!(a.get("bench.json"), b.get("bench.json"));

    let forward = run_benchmark(&cfg).unwrap();
    cfg.routes.reverse();
    let backward = run_benchmark(&cfg).unwrap();
    let mut rows = backward.rows.clone();
    rows.reverse();
    assert_eq!(rows, forward.rows);
}

#[test]
fn missing_route_is_recorded_in_its_row() {
    let mut cfg = BenchConfig::load(&fixture("bench.json")).unwrap();
    cfg.routes.truncate(2);
    cfg.routes[1].route = fixture("routes/XXX-YYY.json");
    cfg.crossover_sizes = vec![4];
    let report = run_benchmark(&cfg).unwrap();
    assert!(report.rows[0].error.is_none());
    assert!(report.rows[1].error.as_deref().unwrap().contains("does not exist"));
    assert_eq!(category_averages(&report.rows)[0].routes, 1);
}

fn flightq(args: &[&str]) -> std::process::Output {
    Process::new(env!("CARGO_BIN_EXE_flightq")).args(args).output().unwrap()
}

#[test]
fn binary_applies_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let config = fixture("phl_bos.json");
    let o = flightq(&["solve", "--config", config.to_str().unwrap(), "--out", out, "--algorithm", "classical", "--seed", "9"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("sssp_classical.json").exists());
    assert!(!dir.path().join("sssp_quantum.json").exists());

    let mut cfg = PipelineConfig::load(&config).unwrap();
    cfg.seed = 9;
    cfg.solver = Solver::Classical;
    let expected = run_command(&cfg, Command::Solve).unwrap();
    assert_eq!(fs::read(dir.path().join("grid.json")).unwrap(), expected.get("grid.json").unwrap());
}

#[test]
fn binary_reports_failures_on_one_line() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"route": "nowhere.json", "perturbation": {"lat_step": 0.1, "lon_step": 0.1, "alt_step_ft": 1, "copies": 1}}"#)
        .unwrap();
    let o = flightq(&["grid", "--config", bad.to_str().unwrap()]);
    assert!(!o.status.success());
    let stderr = String::from_utf8(o.stderr).unwrap();
    assert_eq!(stderr.trim_end().lines().count(), 1);
    let v: Value = serde_json::from_str(stderr.trim_end()).unwrap();
    assert_eq!(v["error"]["stage"], "config");
    assert!(v["error"]["message"].as_str().unwrap().contains("does not exist"));

    let route = dir.path().join("short.json");
    fs::write(&route, r#"{"origin": "A", "destination": "B", "max_altitude_ft": 1000, "waypoints": [{"lat": 0, "lon": 0, "alt_ft": 0}, {"lat": 1, "lon": 1, "alt_ft": 0}]}"#)
        .unwrap();
    fs::write(&bad, r#"{"route": "short.json", "perturbation": {"lat_step": 0.1, "lon_step": 0.1, "alt_step_ft": 1, "copies": 1}}"#)
        .unwrap();
    let o = flightq(&["grid", "--config", bad.to_str().unwrap()]);
    assert!(!o.status.success());
    let v: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(v["error"]["stage"], "grid");
}
