//! Four-point hyperbolicity, local finiteness, weak geodesicity, and the
//! three metric lemmas used by the measure flow, each as a checkable
//! predicate plus an exhaustive suite runner.
//!
//! The four-point defect of an ordered quadruple is
//!
//! ```text
//! defect(x1,x2,x3,x4) = d(x1,x4) + d(x2,x3)
//!                       - max(d(x1,x2) + d(x3,x4), d(x1,x3) + d(x2,x4))
//! ```
//!
//! clamped below at 0; `delta_min` is its maximum over all quadruples. The
//! defect is invariant under the 8 symmetries preserving the pairing
//! {(1,4),(2,3)}, which the scanner exploits; the reported witness is still
//! the lexicographically smallest ordered quadruple attaining the maximum,
//! so a naive four-loop scan produces the identical result.

use serde::Serialize;

use crate::exec;
use crate::graph::{FiniteGraph, VertexId};
use crate::metric::Metric;

/// Result of the quadruple scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DeltaScan {
    pub delta_min: u32,
    pub witness: [VertexId; 4],
}

/// Constants feeding the measure flow, derived from the metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HyperbolicityReport {
    pub delta_min: u32,
    pub witness: [VertexId; 4],
    /// max(1, delta_min): the flow needs a nonzero integer delta.
    pub delta_use: u32,
    /// Largest radius-1 sphere, i.e. the maximum degree.
    pub k_sphere: u32,
    /// C = max over vertices of |B(v, 2*delta_use)|; bounds every measure
    /// support produced by the flow.
    pub c_support: u32,
    /// -ln(1 - 1/C); infinite on a single point.
    pub eps_ann: f64,
}

fn orbit_lex_min(q: [VertexId; 4]) -> [VertexId; 4] {
    let [a, b, c, d] = q;
    let orbit = [
        [a, b, c, d],
        [d, b, c, a],
        [a, c, b, d],
        [d, c, b, a],
        [b, a, d, c],
        [b, d, a, c],
        [c, a, d, b],
        [c, d, a, b],
    ];
    *orbit.iter().min().unwrap()
}

#[derive(Clone, Copy)]
struct Best {
    defect: i64,
    witness: [VertexId; 4],
}

fn better(a: Best, b: Best) -> Best {
    match a.defect.cmp(&b.defect) {
        std::cmp::Ordering::Greater => a,
        std::cmp::Ordering::Less => b,
        std::cmp::Ordering::Equal => {
            if a.witness <= b.witness {
                a
            } else {
                b
            }
        }
    }
}

/// Exhaustive four-point scan. O(n^4 / 8) over canonical quadruples,
/// parallel over the first coordinate.
pub fn four_point_delta<M: Metric>(m: &M) -> DeltaScan {
    let n = m.n();
    let identity = Best {
        defect: 0,
        witness: [0, 0, 0, 0],
    };
    let best = exec::reduce_range(
        n,
        identity,
        |x1| {
            let x1 = x1 as VertexId;
            let row1 = m.row(x1);
            let mut best = identity;
            for x4 in x1 as usize..n {
                let row4 = m.row(x4 as VertexId);
                let d14 = row1[x4] as i64;
                for x2 in x1 as usize..n {
                    let row2 = m.row(x2 as VertexId);
                    let d12 = row1[x2] as i64;
                    let d24 = row4[x2] as i64;
                    // Canonical form: x1 <= x4, x2 <= x3, (x1,x4) <= (x2,x3).
                    let x3_start = if x2 == x1 as usize { x4.max(x2) } else { x2 };
                    for x3 in x3_start..n {
                        let defect = d14 + row2[x3] as i64
                            - (d12 + row4[x3] as i64).max(row1[x3] as i64 + d24);
                        if defect > best.defect || (defect == best.defect && defect > 0) {
                            let w =
                                orbit_lex_min([x1, x2 as VertexId, x3 as VertexId, x4 as VertexId]);
                            best = better(best, Best { defect, witness: w });
                        }
                    }
                }
            }
            best
        },
        better,
    );
    DeltaScan {
        delta_min: best.defect.max(0) as u32,
        witness: best.witness,
    }
}

/// Max over x of |B(x, r)|, computed from adjacency alone so it also works
/// on spaces too large to tabulate.
pub fn local_finiteness_k(g: &FiniteGraph, r: u32) -> u32 {
    let counts = exec::map_range(g.n(), |v| g.bfs_ball(v as VertexId, r).len() as u32);
    counts.into_iter().max().unwrap_or(0)
}

pub fn eps_ann_for(c_support: u32) -> f64 {
    if c_support <= 1 {
        f64::INFINITY
    } else {
        -(1.0 - 1.0 / c_support as f64).ln()
    }
}

fn assemble_report(g: &FiniteGraph, scan: DeltaScan) -> HyperbolicityReport {
    let delta_use = scan.delta_min.max(1);
    let c_support = local_finiteness_k(g, 2 * delta_use);
    HyperbolicityReport {
        delta_min: scan.delta_min,
        witness: scan.witness,
        delta_use,
        k_sphere: g.max_degree() as u32,
        c_support,
        eps_ann: eps_ann_for(c_support),
    }
}

/// Full report. Trees skip the quadruple scan: they satisfy the four-point
/// condition with defect 0, and a zero maximum makes the all-zero quadruple
/// the lexicographic witness, exactly what the scan returns.
pub fn report_for_graph<M: Metric>(g: &FiniteGraph, m: &M) -> HyperbolicityReport {
    let scan = if g.is_tree() {
        DeltaScan {
            delta_min: 0,
            witness: [0, 0, 0, 0],
        }
    } else {
        four_point_delta(m)
    };
    assemble_report(g, scan)
}

/// Report assembled from an externally known delta (e.g. to rerun suites at
/// delta_use + 1).
pub fn report_with_delta(g: &FiniteGraph, scan: DeltaScan) -> HyperbolicityReport {
    assemble_report(g, scan)
}

/// Violation of weak delta-geodesicity: no point splits d(x,y) at
/// parameter s within slack delta.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct WeakGeodesicViolation {
    pub x: VertexId,
    pub y: VertexId,
    pub s: u32,
}

/// Check weak delta-geodesicity: for every pair (x, y) and every integer
/// s in [0, d(x,y) + delta] there must be z with d(x,z) <= s and
/// d(z,y) <= d(x,y) - s + delta.
///
/// On integer metrics with integer delta this integer grid, endpoint
/// included, is the whole contract; the chain-metric argument only ever
/// splits at s = delta + 1.
pub fn weakly_geodesic_check<M: Metric>(m: &M, delta: u32) -> Result<(), WeakGeodesicViolation> {
    let n = m.n();
    let violations = exec::flat_map_range(n, |x| {
        let x = x as VertexId;
        let row_x = m.row(x);
        let mut found = Vec::new();
        for y in 0..n as VertexId {
            let row_y = m.row(y);
            let d = row_x[y as usize] as i64;
            let smax = d + delta as i64;
            // z covers the s-interval [d(x,z), d + delta - d(z,y)].
            let mut intervals: Vec<(i64, i64)> = (0..n)
                .filter_map(|z| {
                    let lo = row_x[z] as i64;
                    let hi = d + delta as i64 - row_y[z] as i64;
                    (lo <= hi).then_some((lo, hi))
                })
                .collect();
            intervals.sort_unstable();
            let mut reach: i64 = -1;
            for (lo, hi) in intervals {
                if lo > reach + 1 {
                    break;
                }
                reach = reach.max(hi);
                if reach >= smax {
                    break;
                }
            }
            if reach < smax {
                found.push(WeakGeodesicViolation {
                    x,
                    y,
                    s: (reach + 1) as u32,
                });
            }
        }
        found
    });
    match violations.into_iter().next() {
        None => Ok(()),
        Some(v) => Err(v),
    }
}

/// Outcome of a single lemma instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LemmaOutcome {
    Pass,
    PreconditionUnmet,
    Violation { tuple: Vec<u32>, detail: String },
}

impl LemmaOutcome {
    pub fn is_violation(&self) -> bool {
        matches!(self, LemmaOutcome::Violation { .. })
    }
}

/// Two points of a common sphere around `a`, both alpha-geodesic towards x,
/// are at distance at most alpha + delta.
pub fn check_sphere_spread<M: Metric>(
    m: &M,
    delta: u32,
    a: VertexId,
    x: VertexId,
    y: VertexId,
    yp: VertexId,
    alpha: u32,
) -> LemmaOutcome {
    let dax = m.dist(a, x);
    let day = m.dist(a, y);
    let dayp = m.dist(a, yp);
    if day != dayp {
        return LemmaOutcome::PreconditionUnmet;
    }
    if day + m.dist(y, x) > dax + alpha || dayp + m.dist(yp, x) > dax + alpha {
        return LemmaOutcome::PreconditionUnmet;
    }
    let dyyp = m.dist(y, yp);
    if dyyp <= alpha + delta {
        LemmaOutcome::Pass
    } else {
        LemmaOutcome::Violation {
            tuple: vec![a, x, y, yp, alpha],
            detail: format!("d(y,y') = {dyyp} > alpha + delta = {}", alpha + delta),
        }
    }
}

/// If y is alpha-geodesic from a to x, z is beta-geodesic from a to y, and
/// d(y,z) >= (alpha+beta)/2, then z is (beta+delta)-geodesic from a to x.
#[allow(clippy::too_many_arguments)]
pub fn check_geodesic_relay<M: Metric>(
    m: &M,
    delta: u32,
    a: VertexId,
    x: VertexId,
    y: VertexId,
    z: VertexId,
    alpha: u32,
    beta: u32,
) -> LemmaOutcome {
    let day = m.dist(a, y);
    if day + m.dist(y, x) > m.dist(a, x) + alpha {
        return LemmaOutcome::PreconditionUnmet;
    }
    if m.dist(a, z) + m.dist(z, y) > day + beta {
        return LemmaOutcome::PreconditionUnmet;
    }
    if 2 * m.dist(y, z) < alpha + beta {
        return LemmaOutcome::PreconditionUnmet;
    }
    let excess = m.dist(a, z) + m.dist(z, x);
    if excess <= m.dist(a, x) + beta + delta {
        LemmaOutcome::Pass
    } else {
        LemmaOutcome::Violation {
            tuple: vec![a, x, y, z, alpha, beta],
            detail: format!(
                "z outside (beta+delta)-geod(a,x): d(a,z)+d(z,x) = {excess} > {}",
                m.dist(a, x) + beta + delta
            ),
        }
    }
}

/// If a is eps-geodesic between x and x', then the eps-geodesic sets from x
/// and x' to a intersect only inside B(a, 3 eps/2). Needs no hyperbolicity.
pub fn check_center_pinch<M: Metric>(
    m: &M,
    a: VertexId,
    x: VertexId,
    xp: VertexId,
    eps: u32,
) -> LemmaOutcome {
    if m.dist(x, a) + m.dist(a, xp) > m.dist(x, xp) + eps {
        return LemmaOutcome::PreconditionUnmet;
    }
    let row_x = m.row(x);
    let row_xp = m.row(xp);
    let row_a = m.row(a);
    let dxa = row_x[a as usize] as u32;
    let dxpa = row_xp[a as usize] as u32;
    for z in 0..m.n() {
        let in_x = row_x[z] as u32 + row_a[z] as u32 <= dxa + eps;
        let in_xp = row_xp[z] as u32 + row_a[z] as u32 <= dxpa + eps;
        if in_x && in_xp && 2 * row_a[z] as u32 > 3 * eps {
            return LemmaOutcome::Violation {
                tuple: vec![a, x, xp, eps, z as u32],
                detail: format!(
                    "z = {z} in both eps-geod sets but d(a,z) = {} > 3*eps/2",
                    row_a[z]
                ),
            };
        }
    }
    LemmaOutcome::Pass
}

/// Aggregated result of an exhaustive lemma scan.
#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub name: String,
    pub checked: u64,
    pub violations: u64,
    pub precondition_unmet: u64,
    /// First few violating tuples, for diagnostics.
    pub witnesses: Vec<Vec<u32>>,
}

impl SuiteReport {
    fn new(name: &str) -> Self {
        SuiteReport {
            name: name.to_string(),
            checked: 0,
            violations: 0,
            precondition_unmet: 0,
            witnesses: Vec::new(),
        }
    }

    fn merge(mut self, other: SuiteReport) -> SuiteReport {
        self.checked += other.checked;
        self.violations += other.violations;
        self.precondition_unmet += other.precondition_unmet;
        for w in other.witnesses {
            if self.witnesses.len() < MAX_WITNESSES {
                self.witnesses.push(w);
            }
        }
        self
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

const MAX_WITNESSES: usize = 8;

/// Members of `bound`-geod(a, x) with their excess d(a,z)+d(z,x)-d(a,x)
/// and their distance from a.
fn geod_slack<M: Metric>(m: &M, a: VertexId, x: VertexId, bound: u32) -> Vec<(VertexId, u32, u32)> {
    let row_a = m.row(a);
    let row_x = m.row(x);
    let dax = row_a[x as usize] as u32;
    (0..m.n())
        .filter_map(|z| {
            let da = row_a[z] as u32;
            let total = da + row_x[z] as u32;
            (total <= dax + bound).then(|| (z as VertexId, total - dax, da))
        })
        .collect()
}

/// Exhaustive sphere-spread scan: all (a, x) in the domain, all unordered pairs
/// y <= y' on a common sphere inside alpha-geod(a, x), all alpha up to
/// `alpha_max`. The inequality is tightest at the smallest admissible alpha,
/// so one check per pair covers every alpha; `checked` counts the
/// (pair, alpha) combinations exactly.
pub fn sphere_spread_suite<M: Metric>(
    m: &M,
    delta: u32,
    alpha_max: u32,
    domain: &[VertexId],
) -> SuiteReport {
    let reports = exec::map_range(domain.len(), |ai| {
        let a = domain[ai];
        let mut rep = SuiteReport::new("sphere_spread");
        for &x in domain {
            let members = geod_slack(m, a, x, alpha_max);
            // Bucket by distance from a.
            let mut by_dist: std::collections::BTreeMap<u32, Vec<(VertexId, u32)>> =
                std::collections::BTreeMap::new();
            for (z, excess, da) in members {
                by_dist.entry(da).or_default().push((z, excess));
            }
            for bucket in by_dist.values() {
                for i in 0..bucket.len() {
                    for j in i..bucket.len() {
                        let (y, ey) = bucket[i];
                        let (yp, eyp) = bucket[j];
                        let alpha_min = ey.max(eyp);
                        rep.checked += (alpha_max - alpha_min + 1) as u64;
                        if m.dist(y, yp) > alpha_min + delta {
                            rep.violations += 1;
                            if rep.witnesses.len() < MAX_WITNESSES {
                                rep.witnesses.push(vec![a, x, y, yp, alpha_min]);
                            }
                        }
                    }
                }
            }
        }
        rep
    });
    reports
        .into_iter()
        .fold(SuiteReport::new("sphere_spread"), SuiteReport::merge)
}

/// Exhaustive geodesic-relay scan over (a, x) in the domain, y in
/// ab_max-geod(a,x), z in ab_max-geod(a,y), and all integer (alpha, beta)
/// up to `ab_max` admissible for the tuple. The conclusion depends only on
/// beta and is tightest at the smallest admissible beta; `checked` counts
/// (tuple, alpha, beta) combinations, `violations` counts violating tuples.
pub fn geodesic_relay_suite<M: Metric>(
    m: &M,
    delta: u32,
    ab_max: u32,
    domain: &[VertexId],
) -> SuiteReport {
    let reports = exec::map_range(domain.len(), |ai| {
        let a = domain[ai];
        let row_a = m.row(a);
        let mut rep = SuiteReport::new("geodesic_relay");
        for &x in domain {
            let row_x = m.row(x);
            let dax = row_a[x as usize] as u32;
            let ys = geod_slack(m, a, x, ab_max);
            // Candidates for z across all y: anything within 2*ab_max slack.
            let zs = geod_slack(m, a, x, 2 * ab_max);
            for &(y, ey, day) in &ys {
                let row_y = m.row(y);
                for &(z, _, daz) in &zs {
                    let ez = daz + row_y[z as usize] as u32;
                    if ez < day {
                        continue;
                    }
                    let ez = ez - day;
                    if ez > ab_max || ey + ez > 2 * m.dist(y, z) {
                        continue;
                    }
                    let dyz2 = 2 * m.dist(y, z);
                    // Count admissible integer (alpha, beta) pairs.
                    let mut combos = 0u64;
                    for beta in ez..=ab_max.min(dyz2.saturating_sub(ey)) {
                        let alpha_hi = ab_max.min(dyz2 - beta);
                        if alpha_hi >= ey {
                            combos += (alpha_hi - ey + 1) as u64;
                        }
                    }
                    if combos == 0 {
                        continue;
                    }
                    rep.checked += combos;
                    let excess_z = daz + row_x[z as usize] as u32;
                    if excess_z > dax + ez + delta {
                        rep.violations += 1;
                        if rep.witnesses.len() < MAX_WITNESSES {
                            rep.witnesses.push(vec![a, x, y, z, ey, ez]);
                        }
                    }
                }
            }
        }
        rep
    });
    reports
        .into_iter()
        .fold(SuiteReport::new("geodesic_relay"), SuiteReport::merge)
}

/// Exhaustive center-pinch scan over (x, x') in the domain, a in
/// eps-geod(x, x'), eps up to `eps_max`. `checked` counts admissible
/// (x, x', a, eps) tuples, `violations` counts those where some z escapes
/// B(a, 3 eps/2).
pub fn center_pinch_suite<M: Metric>(m: &M, eps_max: u32, domain: &[VertexId]) -> SuiteReport {
    assert!(eps_max < 32, "eps mask is a u32 bitset");
    let reports = exec::map_range(domain.len(), |xi| {
        let x = domain[xi];
        let row_x = m.row(x);
        let mut rep = SuiteReport::new("center_pinch");
        for &xp in domain {
            let row_xp = m.row(xp);
            let dxxp = row_x[xp as usize] as u32;
            let centers = geod_slack(m, x, xp, eps_max);
            // Candidate escapees z for any admissible (a, eps).
            let zs = geod_slack(m, x, xp, 2 * eps_max);
            for &(a, ea, _) in &centers {
                rep.checked += (eps_max - ea + 1) as u64;
                let row_a = m.row(a);
                let dxa = row_x[a as usize] as u32;
                let dxpa = row_xp[a as usize] as u32;
                debug_assert_eq!(dxa + dxpa, dxxp + ea);
                let mut violated_eps: u32 = 0;
                let mut first_witness: Option<Vec<u32>> = None;
                for &(z, _, _) in &zs {
                    let daz = row_a[z as usize] as u32;
                    // Smallest eps with z in both eps-geod sets.
                    let exc_x = (row_x[z as usize] as u32 + daz).saturating_sub(dxa);
                    let exc_xp = (row_xp[z as usize] as u32 + daz).saturating_sub(dxpa);
                    let eps_lo = ea.max(exc_x).max(exc_xp);
                    // Violating eps must also satisfy 2 d(a,z) > 3 eps.
                    if 3 * eps_lo >= 2 * daz {
                        continue;
                    }
                    let eps_hi = eps_max.min((2 * daz - 1) / 3);
                    if eps_lo > eps_hi {
                        continue;
                    }
                    for eps in eps_lo..=eps_hi {
                        violated_eps |= 1 << eps;
                    }
                    if first_witness.is_none() {
                        first_witness = Some(vec![x, xp, a, eps_lo, z]);
                    }
                }
                let count = violated_eps.count_ones() as u64;
                if count > 0 {
                    rep.violations += count;
                    if let Some(w) = first_witness {
                        if rep.witnesses.len() < MAX_WITNESSES {
                            rep.witnesses.push(w);
                        }
                    }
                }
            }
        }
        rep
    });
    reports
        .into_iter()
        .fold(SuiteReport::new("center_pinch"), SuiteReport::merge)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::FiniteGraph;
    use crate::metric::MetricTable;

    fn cycle(n: u32) -> (FiniteGraph, MetricTable) {
        let edges: Vec<(u32, u32)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        let g = FiniteGraph::build(&edges).unwrap();
        let m = MetricTable::from_graph(&g).unwrap();
        (g, m)
    }

    fn path(n: u32) -> (FiniteGraph, MetricTable) {
        let edges: Vec<(u32, u32)> = (0..n - 1).map(|i| (i, i + 1)).collect();
        let g = FiniteGraph::build(&edges).unwrap();
        let m = MetricTable::from_graph(&g).unwrap();
        (g, m)
    }

    fn regular_tree_ball(q: u32, r: u32) -> (FiniteGraph, MetricTable) {
        let mut edges = Vec::new();
        let mut next = 1u32;
        let mut frontier = vec![0u32];
        for depth in 0..r {
            let mut nf = Vec::new();
            for &v in &frontier {
                let children = if depth == 0 { q } else { q - 1 };
                for _ in 0..children {
                    edges.push((v, next));
                    nf.push(next);
                    next += 1;
                }
            }
            frontier = nf;
        }
        let g = FiniteGraph::build(&edges).unwrap();
        let m = MetricTable::from_graph(&g).unwrap();
        (g, m)
    }

    /// Independent oracle: the definition, four plain loops, first witness
    /// in lexicographic scan order.
    fn naive_delta<M: Metric>(m: &M) -> DeltaScan {
        let n = m.n() as VertexId;
        let mut best: i64 = 0;
        let mut witness = [0, 0, 0, 0];
        for x1 in 0..n {
            for x2 in 0..n {
                for x3 in 0..n {
                    for x4 in 0..n {
                        let defect = m.dist(x1, x4) as i64 + m.dist(x2, x3) as i64
                            - (m.dist(x1, x2) as i64 + m.dist(x3, x4) as i64)
                                .max(m.dist(x1, x3) as i64 + m.dist(x2, x4) as i64);
                        if defect > best {
                            best = defect;
                            witness = [x1, x2, x3, x4];
                        }
                    }
                }
            }
        }
        DeltaScan {
            delta_min: best.max(0) as u32,
            witness,
        }
    }

    #[test]
    fn tree_delta_is_zero() {
        let (_, m) = regular_tree_ball(4, 2);
        let scan = four_point_delta(&m);
        assert_eq!(scan.delta_min, 0);
        assert_eq!(scan.witness, [0, 0, 0, 0]);
        assert_eq!(naive_delta(&m).delta_min, 0);
    }

    #[test]
    fn c6_delta_is_two() {
        let (_, m) = cycle(6);
        let scan = four_point_delta(&m);
        assert_eq!(scan.delta_min, 2);
        let naive = naive_delta(&m);
        assert_eq!(scan, naive);
    }

    #[test]
    fn single_vertex_delta_zero() {
        let g = FiniteGraph::from_parts(1, &[]).unwrap();
        let m = MetricTable::from_graph(&g).unwrap();
        assert_eq!(four_point_delta(&m).delta_min, 0);
    }

    #[test]
    fn pruned_scan_matches_naive_on_small_graphs() {
        for (_, m) in [cycle(5), cycle(8), path(7), regular_tree_ball(3, 3)] {
            let scan = four_point_delta(&m);
            let naive = naive_delta(&m);
            assert_eq!(scan, naive);
        }
        // Ladder-like graph with 60 vertices.
        let mut edges = Vec::new();
        for i in 0..30u32 {
            edges.push((2 * i, 2 * i + 1));
            if i + 1 < 30 {
                edges.push((2 * i, 2 * (i + 1)));
                edges.push((2 * i + 1, 2 * (i + 1) + 1));
            }
        }
        let g = FiniteGraph::build(&edges).unwrap();
        let m = MetricTable::from_graph(&g).unwrap();
        assert_eq!(four_point_delta(&m), naive_delta(&m));
    }

    #[test]
    fn local_finiteness_bounds() {
        let (g, _) = regular_tree_ball(4, 3);
        assert_eq!(local_finiteness_k(&g, 0), 1);
        assert_eq!(local_finiteness_k(&g, 1), 5);
        let (g6, _) = cycle(6);
        assert_eq!(local_finiteness_k(&g6, 2), 5);
    }

    #[test]
    fn report_tree_shortcut_matches_scan() {
        let (g, m) = regular_tree_ball(3, 3);
        let rep = report_for_graph(&g, &m);
        let scan = four_point_delta(&m);
        assert_eq!(rep.delta_min, scan.delta_min);
        assert_eq!(rep.witness, scan.witness);
        assert_eq!(rep.delta_use, 1);
        // C = max |B(v,2)| on the 3-regular ball: 1 + 3 + 6.
        assert_eq!(rep.c_support, 10);
        assert!(rep.eps_ann > 0.0);
    }

    #[test]
    fn weakly_geodesic_graph_metrics_pass() {
        let (_, m) = path(3);
        weakly_geodesic_check(&m, 0).unwrap();
        let (_, m6) = cycle(6);
        weakly_geodesic_check(&m6, 0).unwrap();
        weakly_geodesic_check(&m6, 3).unwrap();
    }

    #[test]
    fn weakly_geodesic_detects_gap() {
        let m = crate::metric::FiniteMetric::new(2, vec![0, 5, 5, 0]).unwrap();
        let err = weakly_geodesic_check(&m, 0).unwrap_err();
        assert_eq!((err.x, err.y), (0, 1));
        assert_eq!(err.s, 1);
        // At s = 2 specifically there is no midpoint either.
        assert!(err.s <= 2);
    }

    #[test]
    fn sphere_spread_trivial_and_tree() {
        let (_, m) = path(7);
        // y = y' passes trivially.
        assert_eq!(
            check_sphere_spread(&m, 0, 0, 6, 3, 3, 0),
            LemmaOutcome::Pass
        );
        // Tree, alpha = 0: equal-distance geodesic points coincide.
        let (_, mt) = regular_tree_ball(3, 3);
        assert_eq!(
            check_sphere_spread(&mt, 0, 0, 4, 1, 1, 0),
            LemmaOutcome::Pass
        );
    }

    #[test]
    fn lemma_suites_clean_on_c6() {
        let (_, m) = cycle(6);
        let domain: Vec<u32> = (0..6).collect();
        let delta = 2;
        let r33 = sphere_spread_suite(&m, delta, 4 * delta, &domain);
        assert!(r33.passed(), "{:?}", r33.witnesses);
        assert!(r33.checked > 0);
        let r34 = geodesic_relay_suite(&m, delta, 4 * delta, &domain);
        assert!(r34.passed(), "{:?}", r34.witnesses);
        let r35 = center_pinch_suite(&m, 4 * delta, &domain);
        assert!(r35.passed(), "{:?}", r35.witnesses);
        // Robustness at delta_use + 1 as well.
        let r33b = sphere_spread_suite(&m, delta + 1, 4 * (delta + 1), &domain);
        assert!(r33b.passed());
    }

    #[test]
    fn sphere_spread_suite_catches_understated_delta() {
        // C6 is not 0-hyperbolic; claiming delta = 0 must produce violations.
        let (_, m) = cycle(6);
        let domain: Vec<u32> = (0..6).collect();
        let rep = sphere_spread_suite(&m, 0, 4, &domain);
        assert!(rep.violations > 0);
        assert!(!rep.witnesses.is_empty());
    }

    #[test]
    fn center_pinch_eps_zero_intersection_is_center() {
        let (_, m) = path(5);
        // a = 2 is the midpoint of 0 and 4.
        assert_eq!(check_center_pinch(&m, 2, 0, 4, 0), LemmaOutcome::Pass);
        // Exhaustively: on a path, the eps = 0 intersection is {a}.
        let geod_x = crate::metric::eps_geod(&m, 0, 2, 0);
        let geod_xp = crate::metric::eps_geod(&m, 4, 2, 0);
        let common: Vec<u32> = geod_x
            .iter()
            .filter(|v| geod_xp.contains(v))
            .copied()
            .collect();
        assert_eq!(common, vec![2]);
    }

    #[test]
    fn suite_scans_match_naive_predicates_on_c5() {
        // Cross-check the aggregated sphere-spread suite against brute-force
        // evaluation over all tuples.
        let (_, m) = cycle(5);
        let domain: Vec<u32> = (0..5).collect();
        let scan = four_point_delta(&m);
        let delta = scan.delta_min.max(1);
        let alpha_max = 4 * delta;
        let rep = sphere_spread_suite(&m, delta, alpha_max, &domain);
        let mut checked = 0u64;
        let mut violations = 0u64;
        for a in 0..5 {
            for x in 0..5 {
                for y in 0..5 {
                    for yp in y..5 {
                        for alpha in 0..=alpha_max {
                            match check_sphere_spread(&m, delta, a, x, y, yp, alpha) {
                                LemmaOutcome::Pass => checked += 1,
                                LemmaOutcome::Violation { .. } => {
                                    checked += 1;
                                    violations += 1;
                                }
                                LemmaOutcome::PreconditionUnmet => {}
                            }
                        }
                    }
                }
            }
        }
        assert_eq!(rep.checked, checked);
        // The suite counts violating pairs once at the tightest alpha; the
        // per-alpha count is an upper bound, both agree on zero/nonzero.
        assert_eq!(rep.violations == 0, violations == 0);
    }
}
