//! Route documents, waypoint geometry and midpoint densification.
//!
//! Routes come from a local JSON document format that stands in for a flight
//! plan service. Distances are straight-line chords through a spherical Earth
//! (radius 6371 km) with the waypoint altitude added to the radius.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Real;

pub const EARTH_RADIUS_KM: f64 = 6371.0;
pub const METERS_PER_FOOT: f64 = 0.3048;

#[derive(Debug, Error)]
pub enum RouteError {
    #[error("route document is malformed: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("waypoint {index}: {reason}")]
    InvalidWaypoint { index: usize, reason: String },
    #[error("route needs at least 2 waypoints, got {0}")]
    TooFewWaypoints(usize),
    #[error("waypoint {0} repeats the position of the one before it")]
    RepeatedWaypoint(usize),
    #[error("max altitude must be finite and non-negative, got {0}")]
    InvalidMaxAltitude(f64),
    #[error("no route document for {origin}-{destination}")]
    NotFound { origin: String, destination: String },
}

/// A geodetic point: degrees latitude/longitude, altitude in feet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Waypoint<F> {
    pub lat: F,
    pub lon: F,
    pub alt_ft: F,
}

impl<F: Real> Waypoint<F> {
    pub fn new(lat: F, lon: F, alt_ft: F) -> Result<Self, RouteError> {
        let wp = Waypoint { lat, lon, alt_ft };
        wp.validate(0)?;
        Ok(wp)
    }

    fn validate(&self, index: usize) -> Result<(), RouteError> {
        let bad = |reason: String| Err(RouteError::InvalidWaypoint { index, reason });
        let (lat, lon, alt) = (
            self.lat.to_f64_lossy(),
            self.lon.to_f64_lossy(),
            self.alt_ft.to_f64_lossy(),
        );
        if !(-90.0..=90.0).contains(&lat) {
            return bad(format!("latitude {lat} outside [-90, 90]"));
        }
        if !(lon > -180.0 && lon <= 180.0) {
            return bad(format!("longitude {lon} outside (-180, 180]"));
        }
        if !(alt.is_finite() && alt >= 0.0) {
            return bad(format!("altitude {alt} ft is negative or not finite"));
        }
        Ok(())
    }

    pub fn alt_m(&self) -> F {
        self.alt_ft * F::lit(METERS_PER_FOOT)
    }

    /// Earth-centered Cartesian coordinates in kilometers.
    pub fn ecef_km(&self) -> [F; 3] {
        let r = F::lit(EARTH_RADIUS_KM) + self.alt_m() / F::lit(1000.0);
        let (lat, lon) = (self.lat.to_radians(), self.lon.to_radians());
        [
            r * lat.cos() * lon.cos(),
            r * lat.cos() * lon.sin(),
            r * lat.sin(),
        ]
    }
}

/// Straight-line distance in kilometers between two waypoints.
pub fn node_distance<F: Real>(a: &Waypoint<F>, b: &Waypoint<F>) -> F {
    let (p, q) = (a.ecef_km(), b.ecef_km());
    p.iter()
        .zip(q.iter())
        .map(|(&x, &y)| (x - y) * (x - y))
        .sum::<F>()
        .sqrt()
}

/// Maps any longitude into (-180, 180].
pub fn wrap_lon<F: Real>(lon: F) -> F {
    let full = F::lit(360.0);
    let half = F::lit(180.0);
    let mut x = (lon + half) % full;
    if x < F::zero() {
        x += full;
    }
    let x = x - half;
    if x <= -half {
        x + full
    } else {
        x
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Route<F> {
    pub origin: String,
    pub destination: String,
    pub max_altitude_ft: F,
    pub waypoints: Vec<Waypoint<F>>,
}

impl<F: Real> Route<F> {
    pub fn new(
        origin: impl Into<String>,
        destination: impl Into<String>,
        max_altitude_ft: F,
        waypoints: Vec<Waypoint<F>>,
    ) -> Result<Self, RouteError> {
        let route = Route {
            origin: origin.into(),
            destination: destination.into(),
            max_altitude_ft,
            waypoints,
        };
        route.validate()?;
        Ok(route)
    }

    pub fn validate(&self) -> Result<(), RouteError> {
        let max_alt = self.max_altitude_ft.to_f64_lossy();
        if !(max_alt.is_finite() && max_alt >= 0.0) {
            return Err(RouteError::InvalidMaxAltitude(max_alt));
        }
        if self.waypoints.len() < 2 {
            return Err(RouteError::TooFewWaypoints(self.waypoints.len()));
        }
        for (i, wp) in self.waypoints.iter().enumerate() {
            wp.validate(i)?;
        }
        for (i, pair) in self.waypoints.windows(2).enumerate() {
            if pair[0].lat == pair[1].lat && pair[0].lon == pair[1].lon {
                return Err(RouteError::RepeatedWaypoint(i + 1));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.waypoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.waypoints.is_empty()
    }

    /// Sum of segment chord lengths, km.
    pub fn length_km(&self) -> F {
        self.waypoints
            .windows(2)
            .map(|w| node_distance(&w[0], &w[1]))
            .sum()
    }

    /// Cumulative fraction of route length at each waypoint; first is 0, last is 1.
    pub fn cumulative_fractions(&self) -> Vec<F> {
        let mut acc = F::zero();
        let mut out = vec![F::zero()];
        for w in self.waypoints.windows(2) {
            acc += node_distance(&w[0], &w[1]);
            out.push(acc);
        }
        let total = acc;
        if total > F::zero() {
            for x in out.iter_mut() {
                *x /= total;
            }
        }
        if let Some(last) = out.last_mut() {
            *last = F::one();
        }
        out
    }

    pub fn to_document(&self) -> RouteDocument {
        RouteDocument {
            origin: self.origin.clone(),
            destination: self.destination.clone(),
            max_altitude_ft: self.max_altitude_ft.to_f64_lossy(),
            waypoints: self
                .waypoints
                .iter()
                .map(|w| WaypointRecord {
                    lat: w.lat.to_f64_lossy(),
                    lon: w.lon.to_f64_lossy(),
                    alt_ft: w.alt_ft.to_f64_lossy(),
                })
                .collect(),
        }
    }
}

/// On-disk route format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RouteDocument {
    pub origin: String,
    pub destination: String,
    pub max_altitude_ft: f64,
    pub waypoints: Vec<WaypointRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaypointRecord {
    pub lat: f64,
    pub lon: f64,
    pub alt_ft: f64,
}

impl RouteDocument {
    pub fn from_json(text: &str) -> Result<Self, RouteError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("route document serializes")
    }
}

/// Builds a validated [`Route`] from a parsed document.
pub fn load_route<F: Real>(doc: &RouteDocument) -> Result<Route<F>, RouteError> {
    let waypoints = doc
        .waypoints
        .iter()
        .map(|w| Waypoint {
            lat: F::lit(w.lat),
            lon: F::lit(w.lon),
            alt_ft: F::lit(w.alt_ft),
        })
        .collect();
    Route::new(
        doc.origin.clone(),
        doc.destination.clone(),
        F::lit(doc.max_altitude_ft),
        waypoints,
    )
}

pub fn load_route_file<F: Real>(path: &Path) -> Result<Route<F>, RouteError> {
    let text = fs::read_to_string(path).map_err(|source| RouteError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    load_route(&RouteDocument::from_json(&text)?)
}

/// Source of route documents keyed by airport pair.
pub trait RouteSource {
    fn fetch(&self, origin: &str, destination: &str) -> Result<RouteDocument, RouteError>;
}

/// Reads `<ORIGIN>-<DESTINATION>.json` from a directory.
#[derive(Debug, Clone)]
pub struct FileRouteSource {
    dir: PathBuf,
}

impl FileRouteSource {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        FileRouteSource { dir: dir.into() }
    }

    pub fn path_for(&self, origin: &str, destination: &str) -> PathBuf {
        self.dir.join(format!("{origin}-{destination}.json"))
    }
}

impl RouteSource for FileRouteSource {
    fn fetch(&self, origin: &str, destination: &str) -> Result<RouteDocument, RouteError> {
        let path = self.path_for(origin, destination);
        if !path.exists() {
            return Err(RouteError::NotFound {
                origin: origin.to_string(),
                destination: destination.to_string(),
            });
        }
        let text = fs::read_to_string(&path).map_err(|source| RouteError::Io { path, source })?;
        RouteDocument::from_json(&text)
    }
}

fn lerp_waypoint<F: Real>(a: &Waypoint<F>, b: &Waypoint<F>, t: F) -> Waypoint<F> {
    // shortest way round in longitude
    let mut dlon = b.lon - a.lon;
    if dlon > F::lit(180.0) {
        dlon -= F::lit(360.0);
    } else if dlon < F::lit(-180.0) {
        dlon += F::lit(360.0);
    }
    Waypoint {
        lat: a.lat + (b.lat - a.lat) * t,
        lon: wrap_lon(a.lon + dlon * t),
        alt_ft: a.alt_ft + (b.alt_ft - a.alt_ft) * t,
    }
}

/// How many midpoints each segment receives. Each point goes to the segment
/// whose sub-gap (length / (assigned + 1)) is currently largest; ties go to
/// the earlier segment.
pub fn midpoint_allocation<F: Real>(route: &Route<F>, count: usize) -> Vec<usize> {
    let gaps: Vec<F> = route
        .waypoints
        .windows(2)
        .map(|w| node_distance(&w[0], &w[1]))
        .collect();
    let mut alloc = vec![0usize; gaps.len()];
    for _ in 0..count {
        let mut best = 0;
        let mut best_gap = F::neg_infinity();
        for (i, (&gap, &k)) in gaps.iter().zip(alloc.iter()).enumerate() {
            let sub = gap / F::from_usize(k + 1).unwrap();
            if sub > best_gap {
                best = i;
                best_gap = sub;
            }
        }
        alloc[best] += 1;
    }
    alloc
}

/// Densifies a route with `count` evenly spaced points on its largest gaps.
pub fn insert_midpoints<F: Real>(route: &Route<F>, count: usize) -> Route<F> {
    if count == 0 {
        return route.clone();
    }
    let alloc = midpoint_allocation(route, count);
    let mut waypoints = Vec::with_capacity(route.len() + count);
    for (seg, &k) in route.waypoints.windows(2).zip(alloc.iter()) {
        waypoints.push(seg[0]);
        let denom = F::from_usize(k + 1).unwrap();
        for j in 1..=k {
            let t = F::from_usize(j).unwrap() / denom;
            waypoints.push(lerp_waypoint(&seg[0], &seg[1], t));
        }
    }
    waypoints.push(*route.waypoints.last().expect("validated route"));
    Route {
        origin: route.origin.clone(),
        destination: route.destination.clone(),
        max_altitude_ft: route.max_altitude_ft,
        waypoints,
    }
}
