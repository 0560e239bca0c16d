//! Single-source shortest paths on weighted layered DAGs.
//!
//! Both solvers keep the queue as an unsorted membership array. The classical
//! one extracts by linear scan; the quantum one hands the finite keys in the
//! queue to [`quantum_minimum`].

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::grid::{Edge, LayeredDag, NodeId};
use crate::qmf::{quantum_minimum, QmfConfig, QmfError, QmfRound, QmfStats};
use crate::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SsspError {
    #[error("edge {from} -> {to} has no weight")]
    Unweighted { from: NodeId, to: NodeId },
    #[error("edge {from} -> {to} has weight {weight}, expected a finite non-negative value")]
    BadWeight { from: NodeId, to: NodeId, weight: f64 },
    #[error("node {0} is not in the graph")]
    UnknownNode(NodeId),
    #[error("node {0} is unreachable")]
    Unreachable(NodeId),
    #[error("edge {from} -> {to} does not leave node {u}")]
    ForeignEdge { u: NodeId, from: NodeId, to: NodeId },
    #[error(transparent)]
    Qmf(#[from] QmfError),
}

/// How [`parallel_relax`] executes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RelaxMode {
    Sequential,
    #[default]
    Parallel,
}

/// Minimum-finding rounds of one extraction, kept for circuit costing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QmfCall {
    pub queue_len: usize,
    pub index_qubits: usize,
    pub rounds: Vec<QmfRound>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SsspReport<F> {
    pub source: NodeId,
    /// Indexed by node id; unreachable nodes hold `+inf`.
    pub dist: Vec<F>,
    pub pred: Vec<Option<NodeId>>,
    pub extraction_order: Vec<NodeId>,
    pub min_find_stats: Option<QmfStats>,
    /// Key comparisons spent by linear-scan extraction.
    pub scan_comparisons: u64,
    pub qmf_calls: Vec<QmfCall>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SsspExport {
    /// `null` for unreachable nodes.
    pub distances: Vec<Option<f64>>,
    pub path: Vec<NodeId>,
    pub extraction_order: Vec<NodeId>,
    pub qmf_stats: Option<QmfStats>,
}

impl<F: Real> SsspReport<F> {
    pub fn distance(&self, v: NodeId) -> F {
        self.dist[v.0]
    }

    pub fn path_to(&self, d: NodeId) -> Result<Vec<NodeId>, SsspError> {
        extract_path(&self.pred, self.source, d)
    }

    pub fn export(&self, target: NodeId) -> Result<SsspExport, SsspError> {
        Ok(SsspExport {
            distances: self
                .dist
                .iter()
                .map(|d| if d.is_finite() { Some(d.to_f64_lossy()) } else { None })
                .collect(),
            path: self.path_to(target)?,
            extraction_order: self.extraction_order.clone(),
            qmf_stats: self.min_find_stats,
        })
    }
}

fn check_weights<F: Real>(dag: &LayeredDag<F>) -> Result<(), SsspError> {
    for e in dag.edges() {
        let w = e.weight.ok_or(SsspError::Unweighted { from: e.from, to: e.to })?;
        if !(w.is_finite() && w >= F::zero()) {
            return Err(SsspError::BadWeight { from: e.from, to: e.to, weight: w.to_f64_lossy() });
        }
    }
    Ok(())
}

struct Run<F> {
    dist: Vec<F>,
    pred: Vec<Option<NodeId>>,
    in_q: Vec<bool>,
    order: Vec<NodeId>,
}

impl<F: Real> Run<F> {
    fn start(dag: &LayeredDag<F>, s: NodeId) -> Result<Self, SsspError> {
        check_weights(dag)?;
        let n = dag.node_count();
        if s.0 >= n {
            return Err(SsspError::UnknownNode(s));
        }
        let mut dist = vec![F::infinity(); n];
        dist[s.0] = F::zero();
        Ok(Run { dist, pred: vec![None; n], in_q: vec![true; n], order: Vec::with_capacity(n) })
    }

    fn finalize(&mut self, dag: &LayeredDag<F>, u: NodeId, mode: RelaxMode) -> Result<(), SsspError> {
        self.in_q[u.0] = false;
        self.order.push(u);
        let edges: Vec<Edge<F>> = dag.out_edges(u).copied().collect();
        parallel_relax(u, &edges, &mut self.dist, &mut self.pred, &self.in_q, mode)?;
        Ok(())
    }
}

/// Dijkstra with an unsorted-array queue. Extraction scans the queue for the
/// smallest key, lowest node id first on ties, and stops once only
/// unreachable nodes remain.
pub fn dijkstra_classical<F: Real>(dag: &LayeredDag<F>, s: NodeId) -> Result<SsspReport<F>, SsspError> {
    let mut run = Run::start(dag, s)?;
    let mut comparisons = 0u64;
    loop {
        let mut best: Option<usize> = None;
        for v in (0..run.dist.len()).filter(|&v| run.in_q[v]) {
            match best {
                None => best = Some(v),
                Some(b) => {
                    comparisons += 1;
                    if run.dist[v] < run.dist[b] {
                        best = Some(v);
                    }
                }
            }
        }
        match best {
            Some(u) if run.dist[u].is_finite() => run.finalize(dag, NodeId(u), RelaxMode::Sequential)?,
            _ => break,
        }
    }
    Ok(SsspReport {
        source: s,
        dist: run.dist,
        pred: run.pred,
        extraction_order: run.order,
        min_find_stats: None,
        scan_comparisons: comparisons,
        qmf_calls: Vec::new(),
    })
}

/// Dijkstra whose extraction runs quantum minimum finding over the finite
/// keys still queued. A single finite key is taken directly. With
/// `config.verify` the verified minimum is resolved to its lowest node id,
/// so results match [`dijkstra_classical`] exactly; without it the returned
/// node is used as is and the result may be suboptimal.
pub fn dijkstra_quantum<F: Real>(
    dag: &LayeredDag<F>,
    s: NodeId,
    config: &QmfConfig,
    seed: u64,
) -> Result<SsspReport<F>, SsspError> {
    let mut run = Run::start(dag, s)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stats = QmfStats { shots_per_round: config.shots_per_round, ..QmfStats::default() };
    let mut calls = Vec::new();
    loop {
        let candidates: Vec<usize> =
            (0..run.dist.len()).filter(|&v| run.in_q[v] && run.dist[v].is_finite()).collect();
        let u = match candidates.len() {
            0 => break,
            1 => candidates[0],
            _ => {
                let keys: Vec<F> = candidates.iter().map(|&v| run.dist[v]).collect();
                let r = quantum_minimum(&keys, rng.next_u64(), config)?;
                stats.merge(&r.stats);
                calls.push(QmfCall { queue_len: keys.len(), index_qubits: r.index_qubits, rounds: r.rounds });
                if r.verified {
                    candidates[keys.iter().position(|&k| k == r.min_value).unwrap()]
                } else {
                    candidates[r.min_index]
                }
            }
        };
        run.finalize(dag, NodeId(u), RelaxMode::Parallel)?;
    }
    Ok(SsspReport {
        source: s,
        dist: run.dist,
        pred: run.pred,
        extraction_order: run.order,
        min_find_stats: Some(stats),
        scan_comparisons: 0,
        qmf_calls: calls,
    })
}

/// Relaxes the out-edges of the finalized node `u` into targets still
/// queued. Targets of one node in a layered DAG are distinct, so the
/// parallel mode computes every update independently; repeated targets fall
/// back to sequential order. Returns the number of improved targets.
pub fn parallel_relax<F: Real>(
    u: NodeId,
    out_edges: &[Edge<F>],
    dist: &mut [F],
    pred: &mut [Option<NodeId>],
    in_q: &[bool],
    mode: RelaxMode,
) -> Result<usize, SsspError> {
    for e in out_edges {
        if e.from != u {
            return Err(SsspError::ForeignEdge { u, from: e.from, to: e.to });
        }
        if e.to.0 >= dist.len() {
            return Err(SsspError::UnknownNode(e.to));
        }
        if e.weight.is_none() {
            return Err(SsspError::Unweighted { from: e.from, to: e.to });
        }
    }
    let du = dist[u.0];
    let distinct = {
        let mut t: Vec<usize> = out_edges.iter().map(|e| e.to.0).collect();
        t.sort_unstable();
        t.windows(2).all(|w| w[0] != w[1])
    };
    if mode == RelaxMode::Sequential || !distinct {
        let mut updated = 0;
        for e in out_edges {
            let v = e.to.0;
            let nd = du + e.weight.unwrap();
            if in_q[v] && nd < dist[v] {
                dist[v] = nd;
                pred[v] = Some(u);
                updated += 1;
            }
        }
        return Ok(updated);
    }
    let snapshot: &[F] = dist;
    let updates: Vec<(usize, F)> = out_edges
        .par_iter()
        .filter_map(|e| {
            let v = e.to.0;
            let nd = du + e.weight.unwrap();
            (in_q[v] && nd < snapshot[v]).then_some((v, nd))
        })
        .collect();
    for &(v, nd) in &updates {
        dist[v] = nd;
        pred[v] = Some(u);
    }
    Ok(updates.len())
}

/// Source-to-`d` node sequence following `pred`.
pub fn extract_path(pred: &[Option<NodeId>], source: NodeId, d: NodeId) -> Result<Vec<NodeId>, SsspError> {
    if d.0 >= pred.len() {
        return Err(SsspError::UnknownNode(d));
    }
    let mut path = vec![d];
    let mut cur = d;
    while cur != source {
        cur = pred[cur.0].ok_or(SsspError::Unreachable(d))?;
        path.push(cur);
        if path.len() > pred.len() {
            return Err(SsspError::Unreachable(d));
        }
    }
    path.reverse();
    Ok(path)
}

/// Weight of `path` in `dag`, or `None` if some step is not an edge.
pub fn path_weight<F: Real>(dag: &LayeredDag<F>, path: &[NodeId]) -> Option<F> {
    path.windows(2).try_fold(F::zero(), |acc, w| {
        dag.out_edges(w[0]).find(|e| e.to == w[1]).and_then(|e| e.weight).map(|x| acc + x)
    })
}
