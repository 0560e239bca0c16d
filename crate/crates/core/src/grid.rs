//! Mesh grid generation: altitude profile, route perturbation and the
//! layered DAG that connects the original and perturbed paths.
//!
//! Layer 0 holds the origin airport, the last layer the destination, and each
//! interior layer the i-th point of every path (original first). Adjacent
//! layers are fully connected, so node ids in layer order are a topological
//! order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::route::{wrap_lon, Route, Waypoint};
use crate::Real;

#[derive(Debug, Error, PartialEq)]
pub enum GridError {
    #[error("route has {0} points; perturbation needs at least 3")]
    RouteTooShort(usize),
    #[error("invalid perturbation spec: {0}")]
    InvalidSpec(String),
    #[error("invalid altitude profile: {0}")]
    InvalidProfile(String),
    #[error("profile fraction {0} outside [0, 1]")]
    FractionOutOfRange(f64),
    #[error("path {index} has {len} points, expected {expected}")]
    LengthMismatch { index: usize, len: usize, expected: usize },
    #[error("path {0} does not share the original endpoints")]
    EndpointMismatch(usize),
    #[error("grid needs at least 3 layers, got {0}")]
    TooFewLayers(usize),
    #[error("layered graph is malformed: {0}")]
    Malformed(String),
}

/// Granularity and count of route perturbations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationSpec<F> {
    pub lat_step: F,
    pub lon_step: F,
    pub alt_step_ft: F,
    pub copies: usize,
    pub seed: u64,
}

impl<F: Real> PerturbationSpec<F> {
    pub fn validate(&self) -> Result<(), GridError> {
        let steps = [self.lat_step, self.lon_step, self.alt_step_ft];
        if steps.iter().any(|s| !(s.is_finite() && *s > F::zero())) {
            return Err(GridError::InvalidSpec("steps must be positive".into()));
        }
        if self.copies == 0 {
            return Err(GridError::InvalidSpec("copies must be at least 1".into()));
        }
        Ok(())
    }
}

/// Trapezoidal climb / cruise / descent profile over the route fraction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AltitudeProfile<F> {
    pub climb_fraction: F,
    pub descent_fraction: F,
    pub cruise_altitude_ft: F,
}

impl<F: Real> AltitudeProfile<F> {
    pub fn new(cruise_altitude_ft: F) -> Self {
        AltitudeProfile {
            climb_fraction: F::lit(0.15),
            descent_fraction: F::lit(0.85),
            cruise_altitude_ft,
        }
    }

    pub fn validate(&self) -> Result<(), GridError> {
        let (c, d) = (self.climb_fraction, self.descent_fraction);
        let half = F::lit(0.5);
        if !(c >= F::zero() && c < half) {
            return Err(GridError::InvalidProfile(format!("climb fraction {c} not in [0, 0.5)")));
        }
        if !(d > half && d <= F::one()) {
            return Err(GridError::InvalidProfile(format!("descent fraction {d} not in (0.5, 1]")));
        }
        if !(self.cruise_altitude_ft.is_finite() && self.cruise_altitude_ft >= F::zero()) {
            return Err(GridError::InvalidProfile("cruise altitude must be non-negative".into()));
        }
        Ok(())
    }

    pub fn altitude_at(&self, fraction: F) -> Result<F, GridError> {
        if !(fraction >= F::zero() && fraction <= F::one()) {
            return Err(GridError::FractionOutOfRange(fraction.to_f64_lossy()));
        }
        let cruise = self.cruise_altitude_ft;
        let alt = if fraction < self.climb_fraction {
            cruise * fraction / self.climb_fraction
        } else if fraction <= self.descent_fraction {
            cruise
        } else {
            cruise * (F::one() - fraction) / (F::one() - self.descent_fraction)
        };
        Ok(alt)
    }

    /// Re-assigns every waypoint altitude from its cumulative distance fraction.
    pub fn apply(&self, route: &Route<F>) -> Result<Route<F>, GridError> {
        self.validate()?;
        let fractions = route.cumulative_fractions();
        let mut out = route.clone();
        for (wp, f) in out.waypoints.iter_mut().zip(fractions) {
            wp.alt_ft = self.altitude_at(f)?;
        }
        Ok(out)
    }
}

/// Per-axis step multiples applied to one interior point.
pub type Offset = [i32; 3];

fn displace<F: Real>(wp: &Waypoint<F>, off: Offset, spec: &PerturbationSpec<F>) -> Waypoint<F> {
    let k = |i: i32| F::from_i32(i).unwrap();
    let lat = (wp.lat + k(off[0]) * spec.lat_step).max(F::lit(-90.0)).min(F::lit(90.0));
    let lon = wrap_lon(wp.lon + k(off[1]) * spec.lon_step);
    let alt_ft = (wp.alt_ft + k(off[2]) * spec.alt_step_ft).max(F::zero());
    Waypoint { lat, lon, alt_ft }
}

/// Builds one perturbed path from explicit offsets for the interior points.
pub fn apply_offsets<F: Real>(
    route: &Route<F>,
    spec: &PerturbationSpec<F>,
    offsets: &[Offset],
) -> Vec<Waypoint<F>> {
    let n = route.len();
    assert_eq!(offsets.len(), n.saturating_sub(2), "one offset per interior point");
    let mut path = Vec::with_capacity(n);
    path.push(route.waypoints[0]);
    for (wp, &off) in route.waypoints[1..n - 1].iter().zip(offsets) {
        path.push(displace(wp, off, spec));
    }
    path.push(route.waypoints[n - 1]);
    path
}

/// Produces `spec.copies` perturbed paths. Each interior point moves by a
/// multiple in {-1, 0, +1} of the step on each axis, drawn from a ChaCha8
/// stream seeded with `spec.seed`. Endpoints never move.
pub fn perturb_route<F: Real>(
    route: &Route<F>,
    spec: &PerturbationSpec<F>,
) -> Result<Vec<Vec<Waypoint<F>>>, GridError> {
    spec.validate()?;
    if route.len() < 3 {
        return Err(GridError::RouteTooShort(route.len()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let interior = route.len() - 2;
    let paths = (0..spec.copies)
        .map(|_| {
            let offsets: Vec<Offset> = (0..interior)
                .map(|_| {
                    [
                        rng.gen_range(-1..=1),
                        rng.gen_range(-1..=1),
                        rng.gen_range(-1..=1),
                    ]
                })
                .collect();
            apply_offsets(route, spec, &offsets)
        })
        .collect();
    Ok(paths)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl std::fmt::Display for NodeId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node<F> {
    pub id: NodeId,
    pub layer: usize,
    /// 0 for the original path (and both airports), `j + 1` for perturbed path `j`.
    pub variant: usize,
    pub coord: Waypoint<F>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge<F> {
    pub from: NodeId,
    pub to: NodeId,
    pub weight: Option<F>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayeredDag<F> {
    layers: Vec<Vec<NodeId>>,
    nodes: Vec<Node<F>>,
    edges: Vec<Edge<F>>,
    out_edges: Vec<Vec<usize>>,
    source: NodeId,
    sink: NodeId,
}

impl<F: Real> LayeredDag<F> {
    /// Fully connects adjacent layers of coordinates. The first and last
    /// layers must hold exactly one node each. Node k of a layer gets
    /// variant k.
    pub fn from_layers(layers: Vec<Vec<Waypoint<F>>>) -> Result<Self, GridError> {
        if layers.is_empty() {
            return Err(GridError::Malformed("no layers".into()));
        }
        if layers[0].len() != 1 || layers[layers.len() - 1].len() != 1 {
            return Err(GridError::Malformed("first and last layers need exactly one node".into()));
        }
        if let Some(i) = layers.iter().position(|l| l.is_empty()) {
            return Err(GridError::Malformed(format!("layer {i} is empty")));
        }
        let mut nodes = Vec::new();
        let mut layer_ids = Vec::with_capacity(layers.len());
        for (li, layer) in layers.into_iter().enumerate() {
            let ids: Vec<NodeId> = layer
                .into_iter()
                .enumerate()
                .map(|(k, coord)| {
                    let id = NodeId(nodes.len());
                    nodes.push(Node { id, layer: li, variant: k, coord });
                    id
                })
                .collect();
            layer_ids.push(ids);
        }
        let mut edges = Vec::new();
        let mut out_edges = vec![Vec::new(); nodes.len()];
        for pair in layer_ids.windows(2) {
            for &u in &pair[0] {
                for &v in &pair[1] {
                    out_edges[u.0].push(edges.len());
                    edges.push(Edge { from: u, to: v, weight: None });
                }
            }
        }
        let source = layer_ids[0][0];
        let sink = layer_ids[layer_ids.len() - 1][0];
        Ok(LayeredDag { layers: layer_ids, nodes, edges, out_edges, source, sink })
    }

    pub fn layers(&self) -> &[Vec<NodeId>] {
        &self.layers
    }

    pub fn nodes(&self) -> &[Node<F>] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &Node<F> {
        &self.nodes[id.0]
    }

    pub fn edges(&self) -> &[Edge<F>] {
        &self.edges
    }

    pub fn source(&self) -> NodeId {
        self.source
    }

    pub fn sink(&self) -> NodeId {
        self.sink
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn out_edges(&self, u: NodeId) -> impl Iterator<Item = &Edge<F>> + '_ {
        self.out_edges[u.0].iter().map(move |&e| &self.edges[e])
    }

    pub fn is_weighted(&self) -> bool {
        self.edges.iter().all(|e| e.weight.is_some())
    }

    /// Replaces every edge weight; `weights` is in edge order.
    pub fn with_weights(mut self, weights: Vec<F>) -> Result<Self, GridError> {
        if weights.len() != self.edges.len() {
            return Err(GridError::Malformed(format!(
                "{} weights for {} edges",
                weights.len(),
                self.edges.len()
            )));
        }
        for (e, w) in self.edges.iter_mut().zip(weights) {
            e.weight = Some(w);
        }
        Ok(self)
    }

    /// Node ids of the original path, origin to destination.
    pub fn original_path(&self) -> Vec<NodeId> {
        self.layers.iter().map(|l| l[0]).collect()
    }

    /// Checks the layering invariants.
    pub fn validate(&self) -> Result<(), GridError> {
        for e in &self.edges {
            if self.node(e.to).layer != self.node(e.from).layer + 1 {
                return Err(GridError::Malformed(format!(
                    "edge {} -> {} skips layers",
                    e.from, e.to
                )));
            }
        }
        let mut reach = vec![false; self.nodes.len()];
        reach[self.source.0] = true;
        for u in 0..self.nodes.len() {
            if reach[u] {
                for e in self.out_edges(NodeId(u)) {
                    reach[e.to.0] = true;
                }
            }
        }
        let mut coreach = vec![false; self.nodes.len()];
        coreach[self.sink.0] = true;
        for u in (0..self.nodes.len()).rev() {
            if self.out_edges(NodeId(u)).any(|e| coreach[e.to.0]) {
                coreach[u] = true;
            }
        }
        if let Some(u) = (0..self.nodes.len()).find(|&u| !(reach[u] && coreach[u])) {
            return Err(GridError::Malformed(format!("node {u} is not on a source-sink path")));
        }
        Ok(())
    }

    pub fn export(&self) -> DagExport {
        DagExport {
            source: self.source.0,
            sink: self.sink.0,
            node_count: self.nodes.len(),
            edge_count: self.edges.len(),
            layers: self.layers.iter().map(|l| l.iter().map(|n| n.0).collect()).collect(),
            nodes: self
                .nodes
                .iter()
                .map(|n| NodeRecord {
                    id: n.id.0,
                    layer: n.layer,
                    variant: n.variant,
                    lat: n.coord.lat.to_f64_lossy(),
                    lon: n.coord.lon.to_f64_lossy(),
                    alt_ft: n.coord.alt_ft.to_f64_lossy(),
                })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeRecord {
                    from: e.from.0,
                    to: e.to.0,
                    weight: e.weight.map(|w| w.to_f64_lossy()),
                })
                .collect(),
        }
    }
}

/// JSON form of a [`LayeredDag`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DagExport {
    pub source: usize,
    pub sink: usize,
    pub node_count: usize,
    pub edge_count: usize,
    pub layers: Vec<Vec<usize>>,
    pub nodes: Vec<NodeRecord>,
    pub edges: Vec<EdgeRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub id: usize,
    pub layer: usize,
    pub variant: usize,
    pub lat: f64,
    pub lon: f64,
    pub alt_ft: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub from: usize,
    pub to: usize,
    pub weight: Option<f64>,
}

/// Assembles the layered DAG from the original path and its perturbations.
pub fn build_dag<F: Real>(
    original: &[Waypoint<F>],
    perturbed: &[Vec<Waypoint<F>>],
) -> Result<LayeredDag<F>, GridError> {
    let len = original.len();
    if len < 3 {
        return Err(GridError::TooFewLayers(len));
    }
    for (j, path) in perturbed.iter().enumerate() {
        if path.len() != len {
            return Err(GridError::LengthMismatch { index: j, len: path.len(), expected: len });
        }
        if path[0] != original[0] || path[len - 1] != original[len - 1] {
            return Err(GridError::EndpointMismatch(j));
        }
    }
    let mut layers = Vec::with_capacity(len);
    layers.push(vec![original[0]]);
    for i in 1..len - 1 {
        let mut layer = Vec::with_capacity(perturbed.len() + 1);
        layer.push(original[i]);
        layer.extend(perturbed.iter().map(|p| p[i]));
        layers.push(layer);
    }
    layers.push(vec![original[len - 1]]);
    LayeredDag::from_layers(layers)
}

/// Node and edge counts of a grid with `layers` total layers and `copies`
/// perturbed paths.
pub fn structural_counts(layers: usize, copies: usize) -> Result<(usize, usize), GridError> {
    if layers < 3 {
        return Err(GridError::TooFewLayers(layers));
    }
    let width = copies + 1;
    let nodes = (layers - 2) * width + 2;
    let edges = 2 * width + (layers - 3) * width * width;
    Ok((nodes, edges))
}

/// |E| over the undirected simple-graph maximum V(V-1)/2. Zero for graphs
/// with fewer than two nodes.
pub fn density<F: Real>(dag: &LayeredDag<F>) -> f64 {
    let v = dag.node_count() as f64;
    if v < 2.0 {
        return 0.0;
    }
    dag.edge_count() as f64 / (v * (v - 1.0) / 2.0)
}
