//! Command-line pipeline for flightq: route ingestion, grid building, fuel
//! weighting, shortest-path solving, runtime estimation and the multi-route
//! benchmark.

pub mod bench;
pub mod config;
pub mod output;
pub mod pipeline;

pub use bench::{run_benchmark, BenchReport, BenchmarkRow};
pub use config::{BenchConfig, PipelineConfig, Solver};
pub use output::Bundle;
pub use pipeline::{run_command, run_pipeline, Command, Stage, StageError};

/// One-line JSON error record: `{"error":{"stage":..,"message":..}}`.
pub fn error_line(stage: Stage, err: &anyhow::Error) -> String {
    let message = format!("{err:#}").replace('\n', " ");
    serde_json::json!({ "error": { "stage": stage.name(), "message": message } }).to_string()
}
