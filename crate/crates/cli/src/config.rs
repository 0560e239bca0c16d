//! Pipeline and benchmark configuration files.
//!
//! Relative paths inside a config resolve against the directory holding the
//! config file.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use flightq::estimate::ClassicalCostModel;
use flightq::grid::{AltitudeProfile, PerturbationSpec};
use flightq::qmf::QmfConfig;
use serde::{Deserialize, Serialize};

pub const DEFAULT_SEED: u64 = 2024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    Classical,
    Quantum,
    #[default]
    Both,
}

impl Solver {
    pub fn classical(self) -> bool {
        matches!(self, Solver::Classical | Solver::Both)
    }

    pub fn quantum(self) -> bool {
        matches!(self, Solver::Quantum | Solver::Both)
    }
}

/// Perturbation steps and copy count; the seed comes from the pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationConfig {
    pub lat_step: f64,
    pub lon_step: f64,
    pub alt_step_ft: f64,
    pub copies: usize,
}

impl PerturbationConfig {
    pub fn spec(&self, seed: u64) -> PerturbationSpec<f64> {
        PerturbationSpec {
            lat_step: self.lat_step,
            lon_step: self.lon_step,
            alt_step_ft: self.alt_step_ft,
            copies: self.copies,
            seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileConfig {
    #[serde(default = "default_climb")]
    pub climb_fraction: f64,
    #[serde(default = "default_descent")]
    pub descent_fraction: f64,
    /// Defaults to the highest waypoint of the route.
    #[serde(default)]
    pub cruise_altitude_ft: Option<f64>,
}

fn default_climb() -> f64 {
    0.15
}

fn default_descent() -> f64 {
    0.85
}

impl ProfileConfig {
    pub fn profile(&self, highest_ft: f64) -> AltitudeProfile<f64> {
        AltitudeProfile {
            climb_fraction: self.climb_fraction,
            descent_fraction: self.descent_fraction,
            cruise_altitude_ft: self.cruise_altitude_ft.unwrap_or(highest_ft),
        }
    }
}

fn default_qmf() -> QmfConfig {
    QmfConfig::verified()
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub route: PathBuf,
    #[serde(default)]
    pub midpoints: usize,
    pub perturbation: PerturbationConfig,
    #[serde(default)]
    pub altitude_profile: Option<ProfileConfig>,
    /// Built-in A320 figures when absent.
    #[serde(default)]
    pub aircraft: Option<PathBuf>,
    /// Shipped placeholder tables when absent.
    #[serde(default)]
    pub gate_times: Option<PathBuf>,
    #[serde(default)]
    pub solver: Solver,
    #[serde(default = "default_qmf")]
    pub qmf: QmfConfig,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub classical_cost: Option<ClassicalCostModel>,
}

/// One route of a benchmark set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchRoute {
    pub name: String,
    pub category: String,
    pub route: PathBuf,
    #[serde(default)]
    pub midpoints: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    pub perturbation: PerturbationConfig,
    #[serde(default)]
    pub altitude_profile: Option<ProfileConfig>,
    #[serde(default)]
    pub aircraft: Option<PathBuf>,
    #[serde(default)]
    pub gate_times: Option<PathBuf>,
    #[serde(default)]
    pub solver: Solver,
    #[serde(default = "default_qmf")]
    pub qmf: QmfConfig,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub classical_cost: Option<ClassicalCostModel>,
    /// Sizes probed for the quantum/classical crossover.
    #[serde(default = "default_crossover_sizes")]
    pub crossover_sizes: Vec<usize>,
    pub routes: Vec<BenchRoute>,
}

fn default_crossover_sizes() -> Vec<usize> {
    (1..=10).map(|k| 1 << k).collect()
}

impl BenchConfig {
    /// The pipeline settings for one route of the set.
    pub fn pipeline_for(&self, r: &BenchRoute) -> PipelineConfig {
        PipelineConfig {
            route: r.route.clone(),
            midpoints: r.midpoints,
            perturbation: self.perturbation,
            altitude_profile: self.altitude_profile,
            aircraft: self.aircraft.clone(),
            gate_times: self.gate_times.clone(),
            solver: self.solver,
            qmf: self.qmf,
            seed: route_seed(self.seed, &r.name),
            output_dir: None,
            classical_cost: self.classical_cost,
        }
    }
}

/// Mixes the route name into the base seed (64-bit FNV-1a), so a route's
/// result does not depend on its position in the set.
pub fn route_seed(base: u64, name: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    base ^ h
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn resolve(base: &Path, p: &mut PathBuf) {
    if p.is_relative() {
        *p = base.join(&*p);
    }
}

fn require(path: &Path, what: &str) -> Result<()> {
    if !path.is_file() {
        bail!("{what} file {} does not exist", path.display());
    }
    Ok(())
}

fn base_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

impl PipelineConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).context("invalid pipeline config")
    }

    /// Reads a config file, resolves its paths and checks that they exist.
    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg = Self::from_json(&read(path)?)?;
        cfg.resolve_paths(&base_dir(path));
        cfg.check_files()?;
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        resolve(base, &mut self.route);
        for p in [&mut self.aircraft, &mut self.gate_times, &mut self.output_dir].into_iter().flatten() {
            resolve(base, p);
        }
    }

    pub fn check_files(&self) -> Result<()> {
        require(&self.route, "route")?;
        if let Some(p) = &self.aircraft {
            require(p, "aircraft")?;
        }
        if let Some(p) = &self.gate_times {
            require(p, "gate-time")?;
        }
        Ok(())
    }
}

impl BenchConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).context("invalid benchmark config")
    }

    /// Reads a benchmark file and resolves its paths. Missing route files are
    /// reported per row rather than here.
    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg = Self::from_json(&read(path)?)?;
        let base = base_dir(path);
        for r in &mut cfg.routes {
            resolve(&base, &mut r.route);
        }
        for p in [&mut cfg.aircraft, &mut cfg.gate_times, &mut cfg.output_dir].into_iter().flatten() {
            resolve(&base, p);
        }
        if let Some(p) = &cfg.aircraft {
            require(p, "aircraft")?;
        }
        if let Some(p) = &cfg.gate_times {
            require(p, "gate-time")?;
        }
        Ok(cfg)
    }
}
