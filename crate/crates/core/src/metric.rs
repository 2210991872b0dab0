//! Exact integer metrics on finite vertex sets.
//!
//! Three implementations sit behind the [`Metric`] trait:
//!
//! * [`MetricTable`] — the dense all-pairs table of a graph, one BFS per
//!   source. This is the workhorse for exhaustive scans.
//! * [`LazyMetric`] — BFS rows computed on demand with a small cache, for
//!   spaces too large to tabulate (big Cayley balls).
//! * [`FiniteMetric`] — an arbitrary validated finite metric (symmetric,
//!   triangle inequality), not necessarily graph-realized. Only the rescale
//!   pipeline accepts these.
//!
//! Distance cells are u16; vertex counts above `u16::MAX - 1` distances are
//! rejected at construction.

use std::collections::HashMap;
use std::ops::Deref;
use std::sync::{Arc, RwLock};

use thiserror::Error;

use crate::exec;
use crate::graph::{FiniteGraph, VertexId};

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("distance {0} does not fit the u16 cell type")]
    DistanceOverflow(u32),
    #[error("metric table must be n*n, got {0} cells for n = {1}")]
    BadShape(usize, usize),
    #[error("d({0},{0}) must be 0")]
    NonzeroDiagonal(VertexId),
    #[error("d({0},{1}) = 0 with {0} != {1}")]
    ZeroOffDiagonal(VertexId, VertexId),
    #[error("asymmetric: d({0},{1}) = {2} but d({1},{0}) = {3}")]
    Asymmetric(VertexId, VertexId, u32, u32),
    #[error("triangle inequality fails: d({0},{2}) > d({0},{1}) + d({1},{2})")]
    Triangle(VertexId, VertexId, VertexId),
    #[error("metric validation limited to {1} points, got {0}")]
    TooLargeToValidate(usize, usize),
}

/// A distance row, either borrowed from a dense table or shared from a cache.
pub enum MetricRow<'a> {
    Slice(&'a [u16]),
    Shared(Arc<[u16]>),
}

impl Deref for MetricRow<'_> {
    type Target = [u16];
    fn deref(&self) -> &[u16] {
        match self {
            MetricRow::Slice(s) => s,
            MetricRow::Shared(a) => a,
        }
    }
}

/// Exact integer metric on points `0..n`.
pub trait Metric: Sync {
    fn n(&self) -> usize;
    fn dist(&self, u: VertexId, v: VertexId) -> u32;
    /// All distances from `u`. Callers that loop over a row should fetch it
    /// once; implementations may have to run a BFS to produce it.
    fn row(&self, u: VertexId) -> MetricRow<'_>;
}

impl<M: Metric + ?Sized> Metric for &M {
    fn n(&self) -> usize {
        (**self).n()
    }
    fn dist(&self, u: VertexId, v: VertexId) -> u32 {
        (**self).dist(u, v)
    }
    fn row(&self, u: VertexId) -> MetricRow<'_> {
        (**self).row(u)
    }
}

fn rows_to_cells(n: usize, rows: Vec<Vec<u32>>) -> Result<Vec<u16>, MetricError> {
    let mut cells = vec![0u16; n * n];
    for (u, row) in rows.into_iter().enumerate() {
        for (v, d) in row.into_iter().enumerate() {
            if d > u16::MAX as u32 {
                return Err(MetricError::DistanceOverflow(d));
            }
            cells[u * n + v] = d as u16;
        }
    }
    Ok(cells)
}

/// Dense all-pairs distance table of a connected graph.
#[derive(Debug, Clone)]
pub struct MetricTable {
    n: usize,
    cells: Vec<u16>,
}

impl MetricTable {
    /// One BFS per source vertex, in parallel.
    pub fn from_graph(g: &FiniteGraph) -> Result<Self, MetricError> {
        let n = g.n();
        let rows = exec::map_range(n, |u| g.bfs_row(u as VertexId));
        Ok(MetricTable {
            n,
            cells: rows_to_cells(n, rows)?,
        })
    }

    /// Validate the metric axioms and graph-realizedness against `g`.
    /// Exhaustive (the triangle scan is O(n^3)), so capped at 512 points.
    pub fn validate_against(&self, g: &FiniteGraph) -> Result<(), MetricError> {
        const CAP: usize = 512;
        if self.n > CAP {
            return Err(MetricError::TooLargeToValidate(self.n, CAP));
        }
        validate_axioms(self)?;
        let n = self.n as VertexId;
        for u in 0..n {
            for v in 0..n {
                let d = self.dist(u, v);
                if (d == 1) != g.has_edge(u, v) {
                    return Err(MetricError::Triangle(u, v, v));
                }
            }
        }
        // Geodesicity: every distance k > 0 admits a neighbor one step closer.
        for u in 0..n {
            for v in 0..n {
                let d = self.dist(u, v);
                if d > 0 {
                    let ok = g.neighbors(v).iter().any(|&w| self.dist(u, w) == d - 1);
                    if !ok {
                        return Err(MetricError::Triangle(u, v, v));
                    }
                }
            }
        }
        Ok(())
    }
}

impl Metric for MetricTable {
    fn n(&self) -> usize {
        self.n
    }
    fn dist(&self, u: VertexId, v: VertexId) -> u32 {
        self.cells[u as usize * self.n + v as usize] as u32
    }
    fn row(&self, u: VertexId) -> MetricRow<'_> {
        MetricRow::Slice(&self.cells[u as usize * self.n..(u as usize + 1) * self.n])
    }
}

/// BFS-on-demand metric for graphs too large to tabulate densely. Keeps up
/// to `cache_cap` rows; past that, rows are recomputed per request.
pub struct LazyMetric<'g> {
    graph: &'g FiniteGraph,
    cache: RwLock<HashMap<VertexId, Arc<[u16]>>>,
    cache_cap: usize,
}

impl<'g> LazyMetric<'g> {
    pub fn new(graph: &'g FiniteGraph) -> Self {
        LazyMetric {
            graph,
            cache: RwLock::new(HashMap::new()),
            cache_cap: 64,
        }
    }

    pub fn graph(&self) -> &'g FiniteGraph {
        self.graph
    }

    fn compute_row(&self, u: VertexId) -> Arc<[u16]> {
        let row32 = self.graph.bfs_row(u);
        let row: Vec<u16> = row32.iter().map(|&d| d as u16).collect();
        Arc::from(row)
    }

    fn row_arc(&self, u: VertexId) -> Arc<[u16]> {
        if let Some(r) = self.cache.read().unwrap().get(&u) {
            return Arc::clone(r);
        }
        let fresh = self.compute_row(u);
        let mut cache = self.cache.write().unwrap();
        if cache.len() < self.cache_cap {
            cache.entry(u).or_insert_with(|| Arc::clone(&fresh));
        }
        fresh
    }
}

impl Metric for LazyMetric<'_> {
    fn n(&self) -> usize {
        self.graph.n()
    }
    fn dist(&self, u: VertexId, v: VertexId) -> u32 {
        self.row_arc(u)[v as usize] as u32
    }
    fn row(&self, u: VertexId) -> MetricRow<'_> {
        MetricRow::Shared(self.row_arc(u))
    }
}

/// A general finite metric: validated symmetric table with triangle
/// inequality, not necessarily coming from a graph.
#[derive(Debug, Clone)]
pub struct FiniteMetric {
    n: usize,
    cells: Vec<u16>,
}

impl FiniteMetric {
    /// Validation cap: the triangle scan is cubic.
    pub const MAX_POINTS: usize = 4096;

    pub fn new(n: usize, cells: Vec<u16>) -> Result<Self, MetricError> {
        if cells.len() != n * n {
            return Err(MetricError::BadShape(cells.len(), n));
        }
        if n > Self::MAX_POINTS {
            return Err(MetricError::TooLargeToValidate(n, Self::MAX_POINTS));
        }
        let m = FiniteMetric { n, cells };
        validate_axioms(&m)?;
        Ok(m)
    }

    /// Pointwise scale of an existing metric (used to build non-graph
    /// fixtures, e.g. a graph metric times 3).
    pub fn scaled<M: Metric>(m: &M, factor: u32) -> Result<Self, MetricError> {
        let n = m.n();
        let mut cells = vec![0u16; n * n];
        for u in 0..n {
            let row = m.row(u as VertexId);
            for v in 0..n {
                let d = row[v] as u32 * factor;
                if d > u16::MAX as u32 {
                    return Err(MetricError::DistanceOverflow(d));
                }
                cells[u * n + v] = d as u16;
            }
        }
        FiniteMetric::new(n, cells)
    }

    /// Is every distance realized along unit steps? Graph metrics are; a
    /// scaled metric is not. Non-graph metrics are rejected by the measure
    /// flow and must go through the rescale pipeline.
    pub fn is_graph_realized(&self) -> bool {
        let n = self.n as VertexId;
        for u in 0..n {
            for v in 0..n {
                let d = self.dist(u, v);
                if d > 0 {
                    let ok = (0..n).any(|w| self.dist(u, w) == d - 1 && self.dist(w, v) == 1);
                    if !ok {
                        return false;
                    }
                }
            }
        }
        true
    }
}

impl Metric for FiniteMetric {
    fn n(&self) -> usize {
        self.n
    }
    fn dist(&self, u: VertexId, v: VertexId) -> u32 {
        self.cells[u as usize * self.n + v as usize] as u32
    }
    fn row(&self, u: VertexId) -> MetricRow<'_> {
        MetricRow::Slice(&self.cells[u as usize * self.n..(u as usize + 1) * self.n])
    }
}

fn validate_axioms<M: Metric>(m: &M) -> Result<(), MetricError> {
    let n = m.n() as VertexId;
    for u in 0..n {
        if m.dist(u, u) != 0 {
            return Err(MetricError::NonzeroDiagonal(u));
        }
        for v in (u + 1)..n {
            let duv = m.dist(u, v);
            let dvu = m.dist(v, u);
            if duv != dvu {
                return Err(MetricError::Asymmetric(u, v, duv, dvu));
            }
            if duv == 0 {
                return Err(MetricError::ZeroOffDiagonal(u, v));
            }
        }
    }
    for u in 0..n {
        for v in 0..n {
            let duv = m.dist(u, v);
            for w in 0..n {
                if m.dist(u, w) > duv + m.dist(v, w) {
                    return Err(MetricError::Triangle(u, v, w));
                }
            }
        }
    }
    Ok(())
}

/// Closed ball `B(x, r)`, sorted by vertex id.
pub fn ball<M: Metric>(m: &M, x: VertexId, r: u32) -> Vec<VertexId> {
    let row = m.row(x);
    row.iter()
        .enumerate()
        .filter(|&(_, &d)| (d as u32) <= r)
        .map(|(v, _)| v as VertexId)
        .collect()
}

/// Sphere `S(x, r)`, sorted by vertex id. Empty when r exceeds the
/// eccentricity of x.
pub fn sphere<M: Metric>(m: &M, x: VertexId, r: u32) -> Vec<VertexId> {
    let row = m.row(x);
    row.iter()
        .enumerate()
        .filter(|&(_, &d)| d as u32 == r)
        .map(|(v, _)| v as VertexId)
        .collect()
}

/// The eps-geodesic set: `{z : d(x,z) + d(z,y) <= d(x,y) + eps}`. With
/// eps = 0 this is the set of points on geodesics from x to y.
pub fn eps_geod<M: Metric>(m: &M, x: VertexId, y: VertexId, eps: u32) -> Vec<VertexId> {
    let rx = m.row(x);
    let ry = m.row(y);
    let bound = rx[y as usize] as u32 + eps;
    (0..m.n())
        .filter(|&z| rx[z] as u32 + ry[z] as u32 <= bound)
        .map(|z| z as VertexId)
        .collect()
}

/// The ordered-pair index of `{(x, y) : d(x, y) <= radius}` with a
/// bidirectional pair <-> position map.
#[derive(Debug, Clone)]
pub struct PairIndex {
    radius: u32,
    pairs: Vec<(VertexId, VertexId)>,
    positions: HashMap<(VertexId, VertexId), usize>,
}

impl PairIndex {
    pub fn radius(&self) -> u32 {
        self.radius
    }
    pub fn len(&self) -> usize {
        self.pairs.len()
    }
    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
    pub fn pairs(&self) -> &[(VertexId, VertexId)] {
        &self.pairs
    }
    pub fn pair_at(&self, i: usize) -> (VertexId, VertexId) {
        self.pairs[i]
    }
    pub fn position(&self, pair: (VertexId, VertexId)) -> Option<usize> {
        self.positions.get(&pair).copied()
    }
}

/// Enumerate `X^{<=R}` in lexicographic order.
pub fn pair_index<M: Metric>(m: &M, radius: u32) -> PairIndex {
    let n = m.n();
    let mut pairs = Vec::new();
    for x in 0..n {
        let row = m.row(x as VertexId);
        for y in 0..n {
            if (row[y] as u32) <= radius {
                pairs.push((x as VertexId, y as VertexId));
            }
        }
    }
    let positions = pairs.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    PairIndex {
        radius,
        pairs,
        positions,
    }
}
