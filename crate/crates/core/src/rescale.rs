//! Chain-metric rescaling: repair a weakly delta-geodesic metric into a
//! graph metric d' with steps of size at most delta + 1, quasi-isometric to
//! the source: `d <= (delta + 1) d'` and `d' <= d + 1`.
//!
//! This is the only module that accepts metrics that are not graph
//! realized. Weak geodesicity is a checked precondition for the lower
//! inequality, not an assumption: the chain argument splits distances at
//! s = delta + 1, an integer, so the integer-grid check in
//! [`crate::hyperbolicity::weakly_geodesic_check`] covers everything the
//! argument uses.

use serde::Serialize;
use thiserror::Error;

use crate::flow::{AnnulusSchedule, FlowError, MuFamily};
use crate::graph::{FiniteGraph, GraphError, VertexId};
use crate::hyperbolicity::{report_for_graph, weakly_geodesic_check, WeakGeodesicViolation};
use crate::metric::{Metric, MetricError, MetricTable};

#[derive(Debug, Error)]
pub enum RescaleError {
    #[error("no chain of steps <= {step} joins {x} and {y}")]
    ChainDisconnected { step: u32, x: VertexId, y: VertexId },
    #[error("source metric is not weakly {delta}-geodesic: no split for ({x},{y}) at s = {s}")]
    NotWeaklyGeodesic {
        delta: u32,
        x: VertexId,
        y: VertexId,
        s: u32,
    },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Flow(#[from] FlowError),
}

/// The derived chain structure of a metric: edges join points at distance
/// at most delta + 1, and d' is the graph metric of that graph.
#[derive(Debug)]
pub struct ChainRescaling {
    pub delta: u32,
    pub step_bound: u32,
    pub derived: FiniteGraph,
    pub dprime: MetricTable,
}

/// Build the chain graph and its metric. `ChainDisconnected` reports an
/// unreachable pair (e.g. two points at distance 5 with delta = 1).
pub fn chain_metric<M: Metric>(m: &M, delta: u32) -> Result<ChainRescaling, RescaleError> {
    let n = m.n();
    let step_bound = delta + 1;
    let mut edges = Vec::new();
    for u in 0..n as VertexId {
        let row = m.row(u);
        for v in (u + 1)..n as VertexId {
            let d = row[v as usize] as u32;
            if d > 0 && d <= step_bound {
                edges.push((u, v));
            }
        }
    }
    let derived = match FiniteGraph::from_parts(n, &edges) {
        Ok(g) => g,
        Err(GraphError::Disconnected { components }) => {
            let x = components[0][0];
            let y = components[1][0];
            return Err(RescaleError::ChainDisconnected {
                step: step_bound,
                x,
                y,
            });
        }
        Err(e) => return Err(e.into()),
    };
    let dprime = MetricTable::from_graph(&derived)?;
    Ok(ChainRescaling {
        delta,
        step_bound,
        derived,
        dprime,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct InequalityReport {
    pub delta: u32,
    pub step_bound: u32,
    pub pairs: u64,
    /// d <= (delta + 1) d' everywhere (uses weak geodesicity).
    pub lower_ok: bool,
    /// d' <= d + 1 everywhere.
    pub upper_ok: bool,
    /// Largest observed d / d' over distinct pairs (at most delta + 1).
    pub max_ratio: f64,
    /// Largest observed d' - d (at most 1).
    pub max_excess: i64,
    pub violations: Vec<(VertexId, VertexId, u32, u32)>,
    pub weakly_geodesic_checked: bool,
}

impl InequalityReport {
    pub fn passed(&self) -> bool {
        self.lower_ok && self.upper_ok
    }
}

/// Verify both chain-metric inequalities on every pair.
///
/// `graph_realized` marks sources that are graph metrics themselves; those
/// are weakly delta-geodesic for every delta (unit steps split distances
/// exactly) and skip the explicit scan. Other sources are scanned and the
/// function refuses to assert the lower inequality without the property.
pub fn verify_chain_inequalities<M: Metric>(
    m: &M,
    chain: &ChainRescaling,
    graph_realized: bool,
) -> Result<InequalityReport, RescaleError> {
    let delta = chain.delta;
    if !graph_realized {
        if let Err(v) = weakly_geodesic_check(m, delta) {
            let WeakGeodesicViolation { x, y, s } = v;
            return Err(RescaleError::NotWeaklyGeodesic { delta, x, y, s });
        }
    }
    let n = m.n();
    let mut pairs = 0u64;
    let mut max_ratio = 0.0f64;
    let mut max_excess = i64::MIN;
    let mut lower_ok = true;
    let mut upper_ok = true;
    let mut violations = Vec::new();
    for u in 0..n as VertexId {
        let row = m.row(u);
        let drow = chain.dprime.row(u);
        for v in 0..n as VertexId {
            if u == v {
                continue;
            }
            pairs += 1;
            let d = row[v as usize] as u32;
            let dp = drow[v as usize] as u32;
            let lower = d <= chain.step_bound * dp;
            let upper = dp <= d + 1;
            lower_ok &= lower;
            upper_ok &= upper;
            if (!lower || !upper) && violations.len() < 8 {
                violations.push((u, v, d, dp));
            }
            max_ratio = max_ratio.max(d as f64 / dp as f64);
            max_excess = max_excess.max(dp as i64 - d as i64);
        }
    }
    Ok(InequalityReport {
        delta,
        step_bound: chain.step_bound,
        pairs,
        lower_ok,
        upper_ok,
        max_ratio,
        max_excess: if pairs == 0 { 0 } else { max_excess },
        violations,
        weakly_geodesic_checked: !graph_realized,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct PipelineReport {
    pub source_delta: u32,
    pub inequalities: InequalityReport,
    pub rescaled_delta_min: u32,
    pub rescaled_delta_use: u32,
    /// Support radius R = 4 delta'_use in the rescaled metric.
    pub support_radius: u32,
    /// Supports re-expressed in the source metric: radius (delta+1) R.
    pub source_radius_bound: u32,
    pub pairs_checked: u64,
    pub support_ok: bool,
}

/// Run the whole pipeline on a (small) weakly delta-geodesic source: chain
/// rescaling, hyperbolicity of d', the measure flow on (X, d'), and the
/// bounded-support statement translated back to the source metric.
pub fn rescale_pipeline<M: Metric>(
    m: &M,
    delta: u32,
    graph_realized: bool,
) -> Result<PipelineReport, RescaleError> {
    let chain = chain_metric(m, delta)?;
    let inequalities = verify_chain_inequalities(m, &chain, graph_realized)?;
    let report = report_for_graph(&chain.derived, &chain.dprime);
    let sched = AnnulusSchedule::new(report.delta_use)?;
    let support_radius = 4 * report.delta_use;
    let source_radius_bound = chain.step_bound * support_radius;
    let domain: Vec<VertexId> = (0..m.n() as VertexId).collect();
    let family = MuFamily::build(&chain.dprime, Some(&chain.derived), sched, &domain, &domain)?;
    let mut support_ok = family.support_violations.is_empty();
    let mut pairs_checked = family.pairs_checked;
    for &a in &domain {
        let row_src = m.row(a);
        for &x in &domain {
            let mu = family.get(a, x).expect("family covers the full domain");
            pairs_checked += 1;
            for (z, _) in mu.atoms() {
                if row_src[z as usize] as u32 > source_radius_bound {
                    support_ok = false;
                }
            }
        }
    }
    Ok(PipelineReport {
        source_delta: delta,
        inequalities,
        rescaled_delta_min: report.delta_min,
        rescaled_delta_use: report.delta_use,
        support_radius,
        source_radius_bound,
        pairs_checked,
        support_ok,
    })
}
