//! Flight-trajectory optimization over layered route graphs.
//!
//! The pipeline is: load a route, densify it with midpoints, perturb it into
//! a layered DAG of alternative 3D paths, weigh every edge with a cruise
//! fuel-burn model, then solve single-source shortest path either with a
//! classical array-scan Dijkstra or with a Dijkstra whose minimum extraction
//! runs quantum minimum finding on a statevector simulator. Quantum circuits
//! are transpiled into a small basis gate set and priced per qubit modality.
//!
//! Numeric kernels are generic over [`Real`] (`f32` or `f64`). The crate root
//! re-exports `f64` aliases for the common types; `*32` aliases exist where
//! single precision is useful.

pub mod estimate;
pub mod fuel;
pub mod grid;
pub mod qmf;
pub mod qsim;
pub mod route;
pub mod sssp;

mod real;

pub use real::Real;

use thiserror::Error;

pub type Waypoint = route::Waypoint<f64>;
pub type Route = route::Route<f64>;
pub type LayeredDag = grid::LayeredDag<f64>;
pub type AircraftModel = fuel::AircraftModel<f64>;
pub type AtmosphereModel = fuel::AtmosphereModel<f64>;
pub type EdgeFuelBreakdown = fuel::EdgeFuelBreakdown<f64>;
pub type StateVector = qsim::StateVector<f64>;
pub type SsspReport = sssp::SsspReport<f64>;

pub type Waypoint32 = route::Waypoint<f32>;
pub type LayeredDag32 = grid::LayeredDag<f32>;
pub type AircraftModel32 = fuel::AircraftModel<f32>;
pub type StateVector32 = qsim::StateVector<f32>;

/// Any failure raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Route(#[from] route::RouteError),
    #[error(transparent)]
    Grid(#[from] grid::GridError),
    #[error(transparent)]
    Fuel(#[from] fuel::FuelError),
    #[error(transparent)]
    Sim(#[from] qsim::SimError),
    #[error(transparent)]
    Qmf(#[from] qmf::QmfError),
    #[error(transparent)]
    Sssp(#[from] sssp::SsspError),
    #[error(transparent)]
    Estimate(#[from] estimate::EstimateError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
