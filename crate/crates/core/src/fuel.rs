//! Cruise fuel-burn model used to weigh grid edges.
//!
//! Per edge: drag from the ISA troposphere density at the edge's mean
//! altitude, required thrust as drag plus the weight component along the
//! flight path, fuel flow as thrust times TSFC, and fuel mass as flow times
//! the time needed to cover the edge at constant true airspeed. Everything
//! inside is SI; unit conversion happens at the configuration boundary.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::LayeredDag;
use crate::route::{node_distance, Waypoint};
use crate::Real;

pub const STANDARD_GRAVITY: f64 = 9.80665;
pub const MPS_PER_MPH: f64 = 0.44704;
/// Thrust-specific fuel consumption used when none is configured, kg/(N s).
/// A CFM56-class cruise magnitude, not a measured value for any one engine.
pub const DEFAULT_TSFC: f64 = 1.56e-5;

#[derive(Debug, Error, PartialEq)]
pub enum FuelError {
    #[error("altitude {0} m outside the atmosphere model range [0, 20000]")]
    AltitudeOutOfRange(f64),
    #[error("velocity must be positive, got {0} m/s")]
    NonPositiveVelocity(f64),
    #[error("invalid aircraft model: {0}")]
    InvalidAircraft(String),
    #[error("edge {0} has no coordinates in the grid")]
    MissingNode(usize),
}

/// Aircraft performance parameters in SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AircraftModel<F> {
    pub mtow_kg: F,
    pub mlw_kg: F,
    pub tas_mps: F,
    pub drag_coefficient: F,
    pub reference_area_m2: F,
    pub tsfc_kg_per_n_s: F,
    /// Mass used for the weight term of required thrust; held constant.
    pub mass_kg: F,
}

impl<F: Real> AircraftModel<F> {
    /// A320 with CFM56-5B4 engines at MTOW.
    pub fn a320() -> Self {
        AircraftModel {
            mtow_kg: F::lit(77_000.0),
            mlw_kg: F::lit(64_500.0),
            tas_mps: F::lit(500.0 * MPS_PER_MPH),
            drag_coefficient: F::lit(0.022),
            reference_area_m2: F::lit(122.6),
            tsfc_kg_per_n_s: F::lit(DEFAULT_TSFC),
            mass_kg: F::lit(77_000.0),
        }
    }

    pub fn validate(&self) -> Result<(), FuelError> {
        let fields = [
            ("mtow_kg", self.mtow_kg),
            ("mlw_kg", self.mlw_kg),
            ("tas_mps", self.tas_mps),
            ("drag_coefficient", self.drag_coefficient),
            ("reference_area_m2", self.reference_area_m2),
            ("tsfc_kg_per_n_s", self.tsfc_kg_per_n_s),
            ("mass_kg", self.mass_kg),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > F::zero()) {
                return Err(FuelError::InvalidAircraft(format!("{name} must be positive, got {v}")));
            }
        }
        if self.mass_kg > self.mtow_kg {
            return Err(FuelError::InvalidAircraft("mass exceeds MTOW".into()));
        }
        if self.mlw_kg > self.mtow_kg {
            return Err(FuelError::InvalidAircraft("MLW exceeds MTOW".into()));
        }
        Ok(())
    }
}

/// Aircraft configuration file, with units spelled out in the keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AircraftConfig {
    pub mtow_kg: f64,
    pub mlw_kg: f64,
    pub tas_mph: f64,
    pub drag_coefficient: f64,
    pub reference_area_m2: f64,
    #[serde(rename = "tsfc_kg_per_N_s", default = "default_tsfc")]
    pub tsfc_kg_per_n_s: f64,
    /// Defaults to `mtow_kg`.
    #[serde(default)]
    pub mass_kg: Option<f64>,
}

fn default_tsfc() -> f64 {
    DEFAULT_TSFC
}

impl Default for AircraftConfig {
    fn default() -> Self {
        AircraftConfig {
            mtow_kg: 77_000.0,
            mlw_kg: 64_500.0,
            tas_mph: 500.0,
            drag_coefficient: 0.022,
            reference_area_m2: 122.6,
            tsfc_kg_per_n_s: DEFAULT_TSFC,
            mass_kg: None,
        }
    }
}

impl AircraftConfig {
    pub fn to_model<F: Real>(&self) -> Result<AircraftModel<F>, FuelError> {
        let model = AircraftModel {
            mtow_kg: F::lit(self.mtow_kg),
            mlw_kg: F::lit(self.mlw_kg),
            tas_mps: F::lit(self.tas_mph * MPS_PER_MPH),
            drag_coefficient: F::lit(self.drag_coefficient),
            reference_area_m2: F::lit(self.reference_area_m2),
            tsfc_kg_per_n_s: F::lit(self.tsfc_kg_per_n_s),
            mass_kg: F::lit(self.mass_kg.unwrap_or(self.mtow_kg)),
        };
        model.validate()?;
        Ok(model)
    }
}

/// ISA troposphere density law rho0 (1 - k h)^n.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtmosphereModel<F> {
    pub sea_level_density: F,
    pub lapse_coefficient_per_m: F,
    pub exponent: F,
    pub max_altitude_m: F,
}

impl<F: Real> Default for AtmosphereModel<F> {
    fn default() -> Self {
        AtmosphereModel {
            sea_level_density: F::lit(1.225),
            lapse_coefficient_per_m: F::lit(2.25577e-5),
            exponent: F::lit(4.25588),
            max_altitude_m: F::lit(20_000.0),
        }
    }
}

impl<F: Real> AtmosphereModel<F> {
    /// Air density in kg/m^3 at `altitude_m`.
    pub fn air_density(&self, altitude_m: F) -> Result<F, FuelError> {
        if !(altitude_m >= F::zero() && altitude_m <= self.max_altitude_m) {
            return Err(FuelError::AltitudeOutOfRange(altitude_m.to_f64_lossy()));
        }
        let base = F::one() - self.lapse_coefficient_per_m * altitude_m;
        Ok(self.sea_level_density * base.powf(self.exponent))
    }
}

/// Clean drag 0.5 rho V^2 S C_D, newtons.
pub fn drag<F: Real>(density: F, tas_mps: F, reference_area_m2: F, drag_coefficient: F) -> F {
    F::lit(0.5) * density * tas_mps * tas_mps * reference_area_m2 * drag_coefficient
}

/// Drag plus the weight component along the flight path, never negative.
pub fn thrust_required<F: Real>(drag_n: F, mass_kg: F, gamma_rad: F) -> F {
    let t = drag_n + mass_kg * F::lit(STANDARD_GRAVITY) * gamma_rad.sin();
    t.max(F::zero())
}

pub fn fuel_flow_cruise<F: Real>(thrust_n: F, tsfc: F) -> F {
    thrust_n * tsfc
}

/// Fuel mass burned over `distance_m` at fuel flow `flow_kg_s` and speed `velocity_mps`.
pub fn edge_fuel<F: Real>(flow_kg_s: F, distance_m: F, velocity_mps: F) -> Result<F, FuelError> {
    if !(velocity_mps > F::zero()) {
        return Err(FuelError::NonPositiveVelocity(velocity_mps.to_f64_lossy()));
    }
    Ok(flow_kg_s * distance_m / velocity_mps)
}

/// Every intermediate quantity of one edge's fuel computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EdgeFuelBreakdown<F> {
    pub distance_m: F,
    pub horizontal_m: F,
    pub climb_m: F,
    pub gamma_rad: F,
    pub mean_altitude_m: F,
    pub density_kg_m3: F,
    pub drag_n: F,
    pub thrust_n: F,
    pub fuel_flow_kg_s: F,
    pub velocity_mps: F,
    pub fuel_kg: F,
}

/// Fuel breakdown for flying from `a` to `b`.
///
/// The straight-line distance d is split into the climb dh and a horizontal
/// leg sqrt(d^2 - dh^2), so sin(gamma) = dh / d. Density is taken at the mean
/// of the two altitudes and the average velocity is the constant TAS.
pub fn edge_breakdown<F: Real>(
    a: &Waypoint<F>,
    b: &Waypoint<F>,
    aircraft: &AircraftModel<F>,
    atmosphere: &AtmosphereModel<F>,
) -> Result<EdgeFuelBreakdown<F>, FuelError> {
    let distance_m = node_distance(a, b) * F::lit(1000.0);
    let climb_m = b.alt_m() - a.alt_m();
    let horizontal_m = (distance_m * distance_m - climb_m * climb_m).max(F::zero()).sqrt();
    let gamma_rad = climb_m.atan2(horizontal_m);
    let mean_altitude_m = (a.alt_m() + b.alt_m()) * F::lit(0.5);
    let density_kg_m3 = atmosphere.air_density(mean_altitude_m)?;
    let drag_n = drag(
        density_kg_m3,
        aircraft.tas_mps,
        aircraft.reference_area_m2,
        aircraft.drag_coefficient,
    );
    let thrust_n = thrust_required(drag_n, aircraft.mass_kg, gamma_rad);
    let fuel_flow_kg_s = fuel_flow_cruise(thrust_n, aircraft.tsfc_kg_per_n_s);
    let velocity_mps = aircraft.tas_mps;
    let fuel_kg = edge_fuel(fuel_flow_kg_s, distance_m, velocity_mps)?;
    Ok(EdgeFuelBreakdown {
        distance_m,
        horizontal_m,
        climb_m,
        gamma_rad,
        mean_altitude_m,
        density_kg_m3,
        drag_n,
        thrust_n,
        fuel_flow_kg_s,
        velocity_mps,
        fuel_kg,
    })
}

/// Breakdowns for every edge of `dag`, in edge order. Edges are evaluated
/// in parallel; each result depends only on its own edge.
pub fn edge_breakdowns<F: Real>(
    dag: &LayeredDag<F>,
    aircraft: &AircraftModel<F>,
    atmosphere: &AtmosphereModel<F>,
) -> Result<Vec<EdgeFuelBreakdown<F>>, FuelError> {
    aircraft.validate()?;
    dag.edges()
        .par_iter()
        .map(|e| {
            edge_breakdown(
                &dag.node(e.from).coord,
                &dag.node(e.to).coord,
                aircraft,
                atmosphere,
            )
        })
        .collect()
}

/// Returns `dag` with every edge weighted by its fuel burn in kg.
pub fn weigh_edges<F: Real>(
    dag: &LayeredDag<F>,
    aircraft: &AircraftModel<F>,
    atmosphere: &AtmosphereModel<F>,
) -> Result<LayeredDag<F>, FuelError> {
    let weights = edge_breakdowns(dag, aircraft, atmosphere)?
        .into_iter()
        .map(|b| b.fuel_kg)
        .collect();
    Ok(dag
        .clone()
        .with_weights(weights)
        .expect("one weight per edge"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn sea_level_and_tropopause_density() {
        let atm = AtmosphereModel::<f64>::default();
        assert_eq!(atm.air_density(0.0).unwrap(), 1.225);
        let expected = 1.225 * (1.0 - 2.25577e-5 * 11_000.0f64).powf(4.25588);
        let rho = atm.air_density(11_000.0).unwrap();
        assert!(rel(rho, expected) < 1e-14);
        assert!((rho - 0.364).abs() < 5e-4);
        assert!(atm.air_density(-1.0).is_err());
        assert!(atm.air_density(20_001.0).is_err());
    }

    #[test]
    fn density_strictly_decreasing() {
        let atm = AtmosphereModel::<f64>::default();
        let mut prev = f64::INFINITY;
        for i in 0..=110 {
            let rho = atm.air_density(i as f64 * 100.0 * 0.3048 * 36.0 / 11.0).unwrap();
            assert!(rho < prev);
            prev = rho;
        }
    }

    #[test]
    fn drag_reference_value() {
        let d = drag(1.225, 223.52, 122.6, 0.022);
        assert!(rel(d, 0.5 * 1.225 * 223.52f64.powi(2) * 122.6 * 0.022) < 1e-15);
        assert!((d - 82_540.0).abs() < 5.0);
        assert!(rel(drag(1.225, 447.04, 122.6, 0.022), 4.0 * d) < 1e-15);
        assert_eq!(drag(0.0, 223.52, 122.6, 0.022), 0.0);
    }

    #[test]
    fn thrust_cases() {
        assert_eq!(thrust_required(82_540.0, 77_000.0, 0.0), 82_540.0);
        let t = thrust_required(82_540.0, 77_000.0, 0.05);
        assert!(rel(t, 82_540.0 + 77_000.0 * 9.80665 * 0.05f64.sin()) < 1e-15);
        assert!((t - 120_280.0).abs() < 10.0);
        assert_eq!(thrust_required(1_000.0, 77_000.0, -0.2), 0.0);
    }

    #[test]
    fn fuel_flow_and_edge_fuel() {
        assert_eq!(fuel_flow_cruise(0.0, 1.56e-5), 0.0);
        let wf: f64 = fuel_flow_cruise(82_540.0, 1.56e-5);
        assert!((wf - 1.288).abs() < 1e-3);
        assert!(rel(fuel_flow_cruise(2.0 * 82_540.0, 1.56e-5), 2.0 * wf) < 1e-15);
        assert_eq!(edge_fuel(1.288, 0.0, 223.52).unwrap(), 0.0);
        let we: f64 = edge_fuel(1.288, 100_000.0, 223.52).unwrap();
        assert!((we - 576.2).abs() < 0.05);
        assert!(rel(edge_fuel(1.288, 200_000.0, 223.52).unwrap(), 2.0 * we) < 1e-15);
        assert!(matches!(edge_fuel(1.0, 1.0, 0.0), Err(FuelError::NonPositiveVelocity(_))));
        assert!(edge_fuel(1.0, 1.0, -3.0).is_err());
    }

    #[test]
    fn aircraft_config_defaults_and_conversion() {
        let m: AircraftModel<f64> = AircraftConfig::default().to_model().unwrap();
        assert!((m.tas_mps - 223.52).abs() < 1e-12);
        assert_eq!(m.mass_kg, 77_000.0);
        assert_eq!(m, AircraftModel::a320());
        let json = r#"{"mtow_kg":77000,"mlw_kg":64500,"tas_mph":500,"drag_coefficient":0.022,
                       "reference_area_m2":122.6,"tsfc_kg_per_N_s":1.6e-5,"mass_kg":70000}"#;
        let cfg: AircraftConfig = serde_json::from_str(json).unwrap();
        let m: AircraftModel<f64> = cfg.to_model().unwrap();
        assert_eq!(m.tsfc_kg_per_n_s, 1.6e-5);
        assert_eq!(m.mass_kg, 70_000.0);
    }

    #[test]
    fn aircraft_validation() {
        let mut cfg = AircraftConfig::default();
        cfg.mass_kg = Some(80_000.0);
        assert!(cfg.to_model::<f64>().is_err());
        let mut cfg = AircraftConfig::default();
        cfg.drag_coefficient = 0.0;
        assert!(cfg.to_model::<f64>().is_err());
    }

    #[test]
    fn level_edge_matches_manual_composition() {
        let ac = AircraftModel::<f64>::a320();
        let atm = AtmosphereModel::default();
        let a = Waypoint { lat: 40.0, lon: -80.0, alt_ft: 35_000.0 };
        let b = Waypoint { lat: 40.0, lon: -79.0, alt_ft: 35_000.0 };
        let br = edge_breakdown(&a, &b, &ac, &atm).unwrap();
        let h: f64 = 35_000.0 * 0.3048;
        let rho = 1.225 * (1.0 - 2.25577e-5 * h).powf(4.25588);
        let d = 0.5 * rho * 223.52f64.powi(2) * 122.6 * 0.022;
        let we = d * 1.56e-5 * br.distance_m / 223.52;
        assert_eq!(br.gamma_rad, 0.0);
        assert!(rel(br.fuel_kg, we) < 1e-12);
        assert!(rel(br.fuel_kg, br.fuel_flow_kg_s * br.distance_m / br.velocity_mps) < 1e-15);
    }

    #[test]
    fn climb_costs_more_than_level() {
        let ac = AircraftModel::<f64>::a320();
        let atm = AtmosphereModel::default();
        let level = edge_breakdown(
            &Waypoint { lat: 0.0, lon: 0.0, alt_ft: 30_000.0 },
            &Waypoint { lat: 0.0, lon: 0.5, alt_ft: 30_000.0 },
            &ac,
            &atm,
        )
        .unwrap();
        let climb = edge_breakdown(
            &Waypoint { lat: 0.0, lon: 0.0, alt_ft: 29_000.0 },
            &Waypoint { lat: 0.0, lon: 0.5, alt_ft: 31_000.0 },
            &ac,
            &atm,
        )
        .unwrap();
        assert!(climb.gamma_rad > 0.0);
        assert!(climb.fuel_kg > level.fuel_kg);
    }

    #[test]
    fn single_precision_model_tracks_double() {
        let a64 = Waypoint { lat: 40.0, lon: -80.0, alt_ft: 33_000.0 };
        let b64 = Waypoint { lat: 40.5, lon: -79.0, alt_ft: 34_000.0 };
        let w64 = edge_breakdown(&a64, &b64, &AircraftModel::a320(), &AtmosphereModel::default())
            .unwrap()
            .fuel_kg;
        let a32 = Waypoint { lat: 40.0f32, lon: -80.0, alt_ft: 33_000.0 };
        let b32 = Waypoint { lat: 40.5f32, lon: -79.0, alt_ft: 34_000.0 };
        let w32 = edge_breakdown(&a32, &b32, &AircraftModel::a320(), &AtmosphereModel::default())
            .unwrap()
            .fuel_kg;
        assert!(rel(w32 as f64, w64) < 1e-3);
    }
}
