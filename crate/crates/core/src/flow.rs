//! The measure flow: the annulus schedule, the projection operator `T_a`,
//! its stationary limits `mu_x(a)`, and exhaustive checkers for the
//! support, decay and disjointness properties of the construction.
//!
//! For a center `a`, the operator sends a Dirac at `x` to itself when
//! `d(x,a) <= 4 delta`, and otherwise to the uniform measure on
//!
//! ```text
//! A = delta-geod(x, a)  intersect  S(a, delta_bar(n))
//! ```
//!
//! where `delta_bar(n) = (4 + 5n) delta` and `n` is the largest index with
//! `delta_bar(n) < d(x, a)`. The operator extends to measures by linearity;
//! iterating it is stationary after `n + 2` steps. On graph-realized
//! metrics `A` is never empty; other metrics are rejected with
//! [`FlowError::EmptyTarget`] and belong to the rescale pipeline.
//!
//! On trees with delta = 1 the target sets are singletons found by walking
//! toward the center, which avoids sphere scans entirely; the generic path
//! is the reference implementation and the two are checked against each
//! other in the tests.

use std::collections::{BTreeMap, HashMap};
use std::rc::Rc;

use num_bigint::BigInt;
use num_rational::BigRational;

use serde::Serialize;
use thiserror::Error;

use crate::exec;
use crate::graph::{FiniteGraph, VertexId};
use crate::hyperbolicity::eps_ann_for;
use crate::isometry::Isometry;
use crate::measure::{l1_distance, SparseProbMeasure};
use crate::metric::Metric;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FlowError {
    #[error("the annulus schedule needs a nonzero integer delta")]
    ZeroDelta,
    #[error("no annulus index below t = {t} (needs t > 4*delta = {floor})")]
    NoValidIndex { t: u32, floor: u32 },
    #[error(
        "empty projection target from vertex {from} to sphere S({center}, {radius}): \
         the metric is not graph-realized"
    )]
    EmptyTarget {
        from: VertexId,
        center: VertexId,
        radius: u32,
    },
    #[error("operation requires a tree, but the graph has cycles")]
    NotATree,
    #[error("vertex {0} out of range")]
    BadVertex(VertexId),
}

/// The annulus schedule `delta_bar(n) = (4 + 5n) delta`, delta >= 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AnnulusSchedule {
    delta: u32,
}

impl AnnulusSchedule {
    pub fn new(delta: u32) -> Result<Self, FlowError> {
        if delta == 0 {
            return Err(FlowError::ZeroDelta);
        }
        Ok(AnnulusSchedule { delta })
    }

    pub fn delta(&self) -> u32 {
        self.delta
    }

    /// Radius below which Diracs are fixed points.
    pub fn fixed_radius(&self) -> u32 {
        4 * self.delta
    }

    pub fn delta_bar(&self, n: u32) -> u32 {
        (4 + 5 * n) * self.delta
    }

    /// Largest n with `delta_bar(n) < t`.
    pub fn n_below(&self, t: u32) -> Result<u32, FlowError> {
        if t <= 4 * self.delta {
            return Err(FlowError::NoValidIndex {
                t,
                floor: 4 * self.delta,
            });
        }
        Ok((t - 4 * self.delta - 1) / (5 * self.delta))
    }
}

/// Decay constants derived from delta and the support bound C:
/// `eps_ann = -ln(1 - 1/C)` governs per-annulus contraction, and the
/// per-distance form uses `eps_dist = eps_ann / (5 delta)` with
/// `C_dist = 2 e^{4 eps_ann / 5} e^{eps_dist (4 delta + 1)}`, obtained by
/// spending one annulus-alignment step and converting annulus counts to
/// distances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayConstants {
    pub delta: u32,
    pub c_support: u32,
    pub eps_ann: f64,
    pub eps_dist: f64,
    pub c_dist: f64,
}

impl DecayConstants {
    pub fn derive(delta: u32, c_support: u32) -> Self {
        let eps_ann = eps_ann_for(c_support);
        let eps_dist = eps_ann / (5.0 * delta as f64);
        let c_dist = 2.0 * (4.0 * eps_ann / 5.0).exp() * (eps_dist * (4 * delta + 1) as f64).exp();
        DecayConstants {
            delta,
            c_support,
            eps_ann,
            eps_dist,
            c_dist,
        }
    }

    /// `2 e^{-eps_ann n}` as the exact rational `2 ((C-1)/C)^n`.
    pub fn ann_bound_exact(&self, n: u32) -> BigRational {
        let c = BigInt::from(self.c_support);
        let base = BigRational::new(&c - 1, c);
        let mut out = BigRational::from_integer(2.into());
        for _ in 0..n {
            out *= &base;
        }
        out
    }

    /// `C_dist e^{-eps_dist d}` for the neighbor-pair form.
    pub fn dist_bound(&self, d: u32) -> f64 {
        self.c_dist * (-self.eps_dist * d as f64).exp()
    }
}

/// Per-center evaluation context. Holds the distance row of the center,
/// sphere buckets (general mode), and memoized Dirac images and limits.
pub struct CenterEngine<'m, M: Metric> {
    metric: &'m M,
    graph: Option<&'m FiniteGraph>,
    sched: AnnulusSchedule,
    center: VertexId,
    center_row: Vec<u32>,
    spheres: Option<Vec<Vec<VertexId>>>,
    tree_descent: bool,
    dirac_memo: HashMap<VertexId, Rc<SparseProbMeasure>>,
    mu_memo: HashMap<VertexId, Rc<SparseProbMeasure>>,
}

impl<'m, M: Metric> CenterEngine<'m, M> {
    pub fn new(
        metric: &'m M,
        graph: Option<&'m FiniteGraph>,
        sched: AnnulusSchedule,
        center: VertexId,
    ) -> Self {
        let center_row: Vec<u32> = metric.row(center).iter().map(|&d| d as u32).collect();
        let tree_descent =
            sched.delta() == 1 && graph.is_some_and(|g| g.n() == metric.n() && g.is_tree());
        CenterEngine {
            metric,
            graph,
            sched,
            center,
            center_row,
            spheres: None,
            tree_descent,
            dirac_memo: HashMap::new(),
            mu_memo: HashMap::new(),
        }
    }

    pub fn center(&self) -> VertexId {
        self.center
    }

    pub fn schedule(&self) -> AnnulusSchedule {
        self.sched
    }

    pub fn dist_to_center(&self, v: VertexId) -> u32 {
        self.center_row[v as usize]
    }

    fn sphere_bucket(&mut self, r: u32) -> &[VertexId] {
        if self.spheres.is_none() {
            let max = self.center_row.iter().copied().max().unwrap_or(0) as usize;
            let mut buckets: Vec<Vec<VertexId>> = vec![Vec::new(); max + 1];
            for (v, &d) in self.center_row.iter().enumerate() {
                buckets[d as usize].push(v as VertexId);
            }
            self.spheres = Some(buckets);
        }
        let buckets = self.spheres.as_ref().unwrap();
        buckets.get(r as usize).map_or(&[], Vec::as_slice)
    }

    /// The projection target `A = delta-geod(y, a) intersect S(a, r)` with
    /// `r = delta_bar(n_below(d(y,a)))`. Only valid for `d(y,a) > 4 delta`.
    pub fn annulus_target(&mut self, y: VertexId) -> Result<(u32, Vec<VertexId>), FlowError> {
        let dya = self.dist_to_center(y);
        let n = self.sched.n_below(dya)?;
        let r = self.sched.delta_bar(n);
        let delta = self.sched.delta();
        let set = if self.tree_descent {
            // Unique geodesic point at distance r from the center: walk from
            // y toward the center. Parity in a tree forces the delta = 1
            // slack to vanish, so this equals the generic filter below.
            let g = self.graph.unwrap();
            let mut w = y;
            while self.dist_to_center(w) > r {
                let next = g
                    .neighbors(w)
                    .iter()
                    .copied()
                    .find(|&u| self.dist_to_center(u) + 1 == self.dist_to_center(w));
                match next {
                    Some(u) => w = u,
                    None => {
                        return Err(FlowError::EmptyTarget {
                            from: y,
                            center: self.center,
                            radius: r,
                        })
                    }
                }
            }
            vec![w]
        } else {
            let row_y = self.metric.row(y);
            self.sphere_bucket(r)
                .iter()
                .copied()
                .filter(|&z| row_y[z as usize] as u32 + r <= dya + delta)
                .collect()
        };
        if set.is_empty() {
            return Err(FlowError::EmptyTarget {
                from: y,
                center: self.center,
                radius: r,
            });
        }
        Ok((r, set))
    }

    /// One application of `T_a` to a Dirac.
    pub fn step_dirac(&mut self, y: VertexId) -> Result<Rc<SparseProbMeasure>, FlowError> {
        if let Some(m) = self.dirac_memo.get(&y) {
            return Ok(Rc::clone(m));
        }
        let out = if self.dist_to_center(y) <= self.sched.fixed_radius() {
            SparseProbMeasure::dirac(y)
        } else {
            let (_, set) = self.annulus_target(y)?;
            SparseProbMeasure::uniform_on(&set).expect("annulus target checked nonempty")
        };
        let rc = Rc::new(out);
        self.dirac_memo.insert(y, Rc::clone(&rc));
        Ok(rc)
    }

    /// `T_a` extended to measures by linearity; exact rational arithmetic.
    pub fn step_measure(&mut self, mu: &SparseProbMeasure) -> Result<SparseProbMeasure, FlowError> {
        let mut atoms: BTreeMap<VertexId, BigRational> = BTreeMap::new();
        for (y, mass) in mu.atoms() {
            let image = self.step_dirac(y)?;
            for (z, part) in image.atoms() {
                let contribution = mass * part;
                atoms
                    .entry(z)
                    .and_modify(|m| *m += &contribution)
                    .or_insert(contribution);
            }
        }
        Ok(SparseProbMeasure::from_atoms(atoms).expect("linearity preserves total mass"))
    }

    /// All iterates `delta_x, T delta_x, ..., mu_x(a)`, stopping at the
    /// exact fixpoint (guaranteed within n_below + 2 applications).
    pub fn mu_iterates(&mut self, x: VertexId) -> Result<Vec<SparseProbMeasure>, FlowError> {
        let mut iterates = vec![SparseProbMeasure::dirac(x)];
        let cap = match self.sched.n_below(self.dist_to_center(x)) {
            Ok(n) => n + 2,
            Err(_) => 1,
        };
        loop {
            let last = iterates.last().unwrap();
            let next = self.step_measure(last)?;
            if &next == last {
                return Ok(iterates);
            }
            iterates.push(next);
            assert!(
                iterates.len() as u32 <= cap + 1,
                "flow failed to become stationary within {cap} steps"
            );
        }
    }

    /// The stationary limit `mu_x(a)`, memoized per source.
    pub fn mu(&mut self, x: VertexId) -> Result<Rc<SparseProbMeasure>, FlowError> {
        if let Some(m) = self.mu_memo.get(&x) {
            return Ok(Rc::clone(m));
        }
        let iterates = self.mu_iterates(x)?;
        let rc = Rc::new(iterates.into_iter().last().unwrap());
        self.mu_memo.insert(x, Rc::clone(&rc));
        Ok(rc)
    }
}

/// One-shot `T_a(mu)`.
pub fn step_t<M: Metric>(
    m: &M,
    graph: Option<&FiniteGraph>,
    sched: AnnulusSchedule,
    a: VertexId,
    mu: &SparseProbMeasure,
) -> Result<SparseProbMeasure, FlowError> {
    CenterEngine::new(m, graph, sched, a).step_measure(mu)
}

/// One-shot `mu_x(a)`.
pub fn mu<M: Metric>(
    m: &M,
    graph: Option<&FiniteGraph>,
    sched: AnnulusSchedule,
    a: VertexId,
    x: VertexId,
) -> Result<SparseProbMeasure, FlowError> {
    Ok(CenterEngine::new(m, graph, sched, a)
        .mu(x)?
        .as_ref()
        .clone())
}

/// Tree fast path: the Dirac at the neighbor of `a` nearest to `x` (at `a`
/// itself when x = a).
pub fn tree_mu<M: Metric>(
    m: &M,
    graph: &FiniteGraph,
    x: VertexId,
    a: VertexId,
) -> Result<SparseProbMeasure, FlowError> {
    if !graph.is_tree() {
        return Err(FlowError::NotATree);
    }
    if x == a {
        return Ok(SparseProbMeasure::dirac(a));
    }
    let row_x = m.row(x);
    let nearest = graph
        .neighbors(a)
        .iter()
        .copied()
        .min_by_key(|&z| row_x[z as usize])
        .ok_or(FlowError::BadVertex(a))?;
    Ok(SparseProbMeasure::dirac(nearest))
}

fn excess<M: Metric>(m: &M, x: VertexId, z: VertexId, a: VertexId) -> u32 {
    m.dist(x, z) + m.dist(z, a) - m.dist(x, a)
}

fn max_support_dist<M: Metric>(m: &M, s: &SparseProbMeasure, t: &SparseProbMeasure) -> u32 {
    let mut best = 0;
    for (y, _) in s.atoms() {
        for (yp, _) in t.atoms() {
            best = best.max(m.dist(y, yp));
        }
    }
    best
}

fn support_diameter<M: Metric>(m: &M, s: &SparseProbMeasure) -> u32 {
    max_support_dist(m, s, s)
}

/// Detail of a support-confinement failure.
#[derive(Debug, Clone, Serialize)]
pub struct SupportViolation {
    pub a: VertexId,
    pub x: VertexId,
    pub iterate: usize,
    pub detail: String,
}

/// Check support confinement for one (x, a): every iterate
/// stays in `2 delta-geod(x, a)`; the limit lies in `B(a, 4 delta)`, and on
/// `S(a, 4 delta)` when `d(x, a) >= 4 delta`; iterate l >= 1 is supported
/// on the sphere `S(a, delta_bar(n + 1 - l))`.
pub fn check_support<M: Metric>(
    engine: &mut CenterEngine<'_, M>,
    x: VertexId,
) -> Result<Vec<SupportViolation>, FlowError> {
    let m = engine.metric;
    let a = engine.center();
    let sched = engine.schedule();
    let delta = sched.delta();
    let dxa = engine.dist_to_center(x);
    let iterates = engine.mu_iterates(x)?;
    let mut violations = Vec::new();
    let n_idx = sched.n_below(dxa).ok();
    for (l, it) in iterates.iter().enumerate() {
        for (z, _) in it.atoms() {
            if excess(m, x, z, a) > 2 * delta {
                violations.push(SupportViolation {
                    a,
                    x,
                    iterate: l,
                    detail: format!("atom {z} outside 2delta-geod(x,a)"),
                });
            }
        }
        if let Some(n) = n_idx {
            // The l-th iterate (1 <= l <= n+1) sits on S(a, delta_bar(n+1-l)).
            if l >= 1 && (l as u32) <= n + 1 {
                let r = sched.delta_bar(n + 1 - l as u32);
                if it.support().any(|z| engine.dist_to_center(z) != r) {
                    violations.push(SupportViolation {
                        a,
                        x,
                        iterate: l,
                        detail: format!("iterate not supported on S(a, {r})"),
                    });
                }
            }
        }
    }
    let last = iterates.last().unwrap();
    for (z, _) in last.atoms() {
        let dza = engine.dist_to_center(z);
        if dza > 4 * delta {
            violations.push(SupportViolation {
                a,
                x,
                iterate: iterates.len() - 1,
                detail: format!("limit atom {z} outside B(a, 4delta)"),
            });
        }
        if dxa >= 4 * delta && dza != 4 * delta {
            violations.push(SupportViolation {
                a,
                x,
                iterate: iterates.len() - 1,
                detail: format!("limit atom {z} off S(a, 4delta) despite d(x,a) >= 4delta"),
            });
        }
    }
    Ok(violations)
}

/// Precomputed measure family: `mu_x(a)` for all sources x and centers a in
/// a scan domain, plus the support-check outcome gathered while building.
pub struct MuFamily {
    pub sched: AnnulusSchedule,
    per_center: HashMap<VertexId, HashMap<VertexId, SparseProbMeasure>>,
    pub support_violations: Vec<SupportViolation>,
    pub pairs_checked: u64,
}

impl MuFamily {
    /// Build in parallel over centers; also runs the full support check on
    /// every (x, a) pair.
    pub fn build<M: Metric>(
        m: &M,
        graph: Option<&FiniteGraph>,
        sched: AnnulusSchedule,
        centers: &[VertexId],
        sources: &[VertexId],
    ) -> Result<Self, FlowError> {
        let results = exec::map_range(centers.len(), |ci| {
            let a = centers[ci];
            let mut engine = CenterEngine::new(m, graph, sched, a);
            let mut measures = HashMap::with_capacity(sources.len());
            let mut violations = Vec::new();
            for &x in sources {
                match check_support(&mut engine, x) {
                    Ok(mut v) => violations.append(&mut v),
                    Err(e) => return Err(e),
                }
                let limit = engine.mu(x)?;
                measures.insert(x, limit.as_ref().clone());
            }
            Ok((a, measures, violations))
        });
        let mut per_center = HashMap::with_capacity(centers.len());
        let mut support_violations = Vec::new();
        let mut pairs = 0u64;
        for r in results {
            let (a, measures, mut violations) = r?;
            pairs += measures.len() as u64;
            per_center.insert(a, measures);
            support_violations.append(&mut violations);
        }
        Ok(MuFamily {
            sched,
            per_center,
            support_violations,
            pairs_checked: pairs,
        })
    }

    pub fn get(&self, a: VertexId, x: VertexId) -> Option<&SparseProbMeasure> {
        self.per_center.get(&a).and_then(|c| c.get(&x))
    }

    pub fn centers(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.per_center.keys().copied()
    }

    /// Number of centers whose measures for x and x' have disjoint supports.
    pub fn disjoint_support_count(&self, x: VertexId, xp: VertexId, centers: &[VertexId]) -> u64 {
        centers
            .iter()
            .filter(|&&a| {
                let (Some(mx), Some(mxp)) = (self.get(a, x), self.get(a, xp)) else {
                    return false;
                };
                !mx.supports_intersect(mxp)
            })
            .count() as u64
    }
}

/// One-shot disjoint-support count over a center domain.
pub fn disjoint_support_count<M: Metric>(
    m: &M,
    graph: Option<&FiniteGraph>,
    sched: AnnulusSchedule,
    x: VertexId,
    xp: VertexId,
    centers: &[VertexId],
) -> Result<u64, FlowError> {
    let counts = exec::map_range(centers.len(), |ci| {
        let a = centers[ci];
        let mut engine = CenterEngine::new(m, graph, sched, a);
        let mx = engine.mu(x)?;
        let mxp = engine.mu(xp)?;
        Ok::<u64, FlowError>(u64::from(!mx.supports_intersect(&mxp)))
    });
    let mut total = 0;
    for c in counts {
        total += c?;
    }
    Ok(total)
}

/// Violation record shared by the flow-side suites.
#[derive(Debug, Clone, Serialize)]
pub struct FlowViolation {
    pub rule: String,
    pub tuple: Vec<u32>,
    pub detail: String,
}

/// Aggregate result of a flow-side scan.
#[derive(Debug, Clone, Serialize)]
pub struct FlowSuiteReport {
    pub name: String,
    pub checked: u64,
    pub violations: u64,
    pub witnesses: Vec<FlowViolation>,
}

impl FlowSuiteReport {
    fn new(name: &str) -> Self {
        FlowSuiteReport {
            name: name.into(),
            checked: 0,
            violations: 0,
            witnesses: Vec::new(),
        }
    }

    fn add_violation(&mut self, v: FlowViolation) {
        self.violations += 1;
        if self.witnesses.len() < 8 {
            self.witnesses.push(v);
        }
    }

    fn merge(mut self, other: FlowSuiteReport) -> FlowSuiteReport {
        self.checked += other.checked;
        self.violations += other.violations;
        for w in other.witnesses {
            if self.witnesses.len() < 8 {
                self.witnesses.push(w);
            }
        }
        self
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Outcome of a single flow-side predicate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FlowCheck {
    Pass,
    PreconditionUnmet,
    Violation(String),
}

impl FlowCheck {
    pub fn is_violation(&self) -> bool {
        matches!(self, FlowCheck::Violation(_))
    }
}

/// One-step alignment for a single neighbor pair: with x, x' in a common
/// open annulus their one-step images share the inner sphere; with x
/// exactly on `S(a, delta_bar(n))` and x' one step outside, the Dirac at x
/// and the image of x' do. Either way the supports stay within 4 delta of
/// each other. Builds its own engine; suites use the batched scan instead.
pub fn check_step_alignment<M: Metric>(
    m: &M,
    sched: AnnulusSchedule,
    a: VertexId,
    x: VertexId,
    xp: VertexId,
) -> FlowCheck {
    if m.dist(x, xp) != 1 {
        return FlowCheck::PreconditionUnmet;
    }
    let mut engine = CenterEngine::new(m, None, sched, a);
    let delta = sched.delta();
    let dx = engine.dist_to_center(x);
    let dxp = engine.dist_to_center(xp);
    // Common open annulus.
    if let (Ok(n), Ok(np)) = (sched.n_below(dx), sched.n_below(dxp)) {
        if n == np {
            let r = sched.delta_bar(n);
            let tx = engine.step_dirac(x).unwrap();
            let txp = engine.step_dirac(xp).unwrap();
            let on_sphere = tx
                .support()
                .chain(txp.support())
                .all(|z| engine.dist_to_center(z) == r);
            let spread = max_support_dist(m, &tx, &txp);
            return if on_sphere && spread <= 4 * delta {
                FlowCheck::Pass
            } else {
                FlowCheck::Violation(format!("on_sphere={on_sphere} spread={spread}"))
            };
        }
    }
    // Sphere boundary: inner point on S(a, delta_bar(n)), outer one past it.
    let (inner, outer, d_inner) = if dxp == dx + 1 {
        (x, xp, dx)
    } else if dx == dxp + 1 {
        (xp, x, dxp)
    } else {
        return FlowCheck::PreconditionUnmet;
    };
    match sched.n_below(d_inner + 1) {
        Ok(n) if d_inner == sched.delta_bar(n) => {
            let dirac = SparseProbMeasure::dirac(inner);
            let t_out = engine.step_dirac(outer).unwrap();
            let on_sphere = t_out.support().all(|z| engine.dist_to_center(z) == d_inner);
            let spread = max_support_dist(m, &dirac, &t_out);
            if on_sphere && spread <= 4 * delta {
                FlowCheck::Pass
            } else {
                FlowCheck::Violation(format!("on_sphere={on_sphere} spread={spread}"))
            }
        }
        _ => FlowCheck::PreconditionUnmet,
    }
}

/// One-step overlap for a single same-sphere pair on `S(a, delta_bar(n))`,
/// n >= 1, within 4 delta of each other: images on the inner sphere, with
/// cardinality at most C, diameter at most 2 delta, mutual spread at most
/// 3 delta, and intersecting supports.
pub fn check_step_overlap<M: Metric>(
    m: &M,
    sched: AnnulusSchedule,
    c_support: u32,
    a: VertexId,
    x: VertexId,
    xp: VertexId,
) -> FlowCheck {
    let delta = sched.delta();
    let dx = m.dist(a, x);
    if dx != m.dist(a, xp) || m.dist(x, xp) > 4 * delta {
        return FlowCheck::PreconditionUnmet;
    }
    let Ok(n) = sched.n_below(dx + 1) else {
        return FlowCheck::PreconditionUnmet;
    };
    if n < 1 || dx != sched.delta_bar(n) {
        return FlowCheck::PreconditionUnmet;
    }
    let mut engine = CenterEngine::new(m, None, sched, a);
    let tx = engine.step_dirac(x).unwrap();
    let txp = engine.step_dirac(xp).unwrap();
    let inner = sched.delta_bar(n - 1);
    let on_inner = tx
        .support()
        .chain(txp.support())
        .all(|z| engine.dist_to_center(z) == inner);
    let card_ok =
        tx.support_size() as u32 <= c_support && txp.support_size() as u32 <= c_support;
    let diam_ok =
        support_diameter(m, &tx) <= 2 * delta && support_diameter(m, &txp) <= 2 * delta;
    let spread = max_support_dist(m, &tx, &txp);
    let intersects = tx.supports_intersect(&txp);
    if on_inner && card_ok && diam_ok && spread <= 3 * delta && intersects {
        FlowCheck::Pass
    } else {
        FlowCheck::Violation(format!(
            "on_inner={on_inner} card_ok={card_ok} diam_ok={diam_ok} spread={spread} \
             intersects={intersects}"
        ))
    }
}

/// Result of a single decay comparison between two limit measures.
#[derive(Debug, Clone, Serialize)]
pub struct DecayObservation {
    pub a: VertexId,
    pub x: VertexId,
    pub xp: VertexId,
    /// Annulus index n (same-sphere form) or d(x, a) (neighbor form).
    pub parameter: u32,
    pub l1: String,
    pub bound: f64,
    pub ok: bool,
}

/// Per-annulus decay for one same-sphere pair: x, x' on
/// `S(a, delta_bar(n))` within 4 delta of each other must satisfy
/// `||mu_x(a) - mu_x'(a)||_1 <= 2 (1 - 1/C)^n`, compared exactly.
pub fn check_decay_same_sphere<M: Metric>(
    m: &M,
    graph: Option<&FiniteGraph>,
    sched: AnnulusSchedule,
    consts: &DecayConstants,
    a: VertexId,
    x: VertexId,
    xp: VertexId,
) -> Option<DecayObservation> {
    let dx = m.dist(a, x);
    if dx != m.dist(a, xp) || m.dist(x, xp) > 4 * sched.delta() {
        return None;
    }
    let n = sched.n_below(dx + 1).ok()?;
    if dx != sched.delta_bar(n) {
        return None;
    }
    let mut engine = CenterEngine::new(m, graph, sched, a);
    let mu_x = engine.mu(x).unwrap();
    let mu_xp = engine.mu(xp).unwrap();
    let l1 = l1_distance(&mu_x, &mu_xp);
    let bound = consts.ann_bound_exact(n);
    Some(DecayObservation {
        a,
        x,
        xp,
        parameter: n,
        l1: l1.to_string(),
        bound: rational_to_f64(&bound),
        ok: l1 <= bound,
    })
}

/// Per-distance decay for one neighbor pair:
/// `||mu_x(a) - mu_x'(a)||_1 <= C_dist e^{-eps_dist d(x, a)}`.
pub fn check_decay_neighbor<M: Metric>(
    m: &M,
    graph: Option<&FiniteGraph>,
    sched: AnnulusSchedule,
    consts: &DecayConstants,
    a: VertexId,
    x: VertexId,
    xp: VertexId,
) -> Option<DecayObservation> {
    if m.dist(x, xp) != 1 {
        return None;
    }
    let mut engine = CenterEngine::new(m, graph, sched, a);
    let dxa = engine.dist_to_center(x);
    let mu_x = engine.mu(x).unwrap();
    let mu_xp = engine.mu(xp).unwrap();
    let l1 = l1_distance(&mu_x, &mu_xp);
    let bound = consts.dist_bound(dxa);
    Some(DecayObservation {
        a,
        x,
        xp,
        parameter: dxa,
        l1: l1.to_string(),
        bound,
        ok: rational_to_f64(&l1) <= bound,
    })
}

/// Step alignment: neighbors x, x' in a common open annulus (case i), or x on
/// `S(a, delta_bar(n))` with x' one step further (case ii). The one-step
/// images land on `S(a, delta_bar(n))` with supports at maximal distance
/// at most 4 delta.
pub fn step_alignment_suite<M: Metric>(
    m: &M,
    graph: &FiniteGraph,
    sched: AnnulusSchedule,
    domain: &[VertexId],
) -> FlowSuiteReport {
    let delta = sched.delta();
    let in_domain: std::collections::HashSet<VertexId> = domain.iter().copied().collect();
    let reports = exec::map_range(domain.len(), |ci| {
        let a = domain[ci];
        let mut engine = CenterEngine::new(m, None, sched, a);
        let mut rep = FlowSuiteReport::new("step_alignment");
        for &x in domain {
            for &xp in graph.neighbors(x) {
                if !in_domain.contains(&xp) {
                    continue;
                }
                let dx = engine.dist_to_center(x);
                let dxp = engine.dist_to_center(xp);
                // Case (i): both strictly inside a common annulus.
                let ni = sched.n_below(dx).ok();
                let nip = sched.n_below(dxp).ok();
                if let (Some(n), Some(np)) = (ni, nip) {
                    if n == np
                        && x < xp
                        && dxp <= sched.delta_bar(n + 1)
                        && dx <= sched.delta_bar(n + 1)
                    {
                        rep.checked += 1;
                        let r = sched.delta_bar(n);
                        let tx = engine.step_dirac(x).unwrap();
                        let txp = engine.step_dirac(xp).unwrap();
                        let on_sphere = tx
                            .support()
                            .chain(txp.support())
                            .all(|z| engine.dist_to_center(z) == r);
                        let spread = max_support_dist(m, &tx, &txp);
                        if !on_sphere || spread > 4 * delta {
                            rep.add_violation(FlowViolation {
                                rule: "step_alignment(i)".into(),
                                tuple: vec![a, x, xp],
                                detail: format!("on_sphere={on_sphere} spread={spread}"),
                            });
                        }
                    }
                }
                // Case (ii): x exactly on an annulus sphere, x' one outside.
                if let Ok(n) = sched.n_below(dx + 1) {
                    if dx == sched.delta_bar(n) && dxp == dx + 1 {
                        rep.checked += 1;
                        let dirac_x = SparseProbMeasure::dirac(x);
                        let txp = engine.step_dirac(xp).unwrap();
                        let on_sphere = txp.support().all(|z| engine.dist_to_center(z) == dx);
                        let spread = max_support_dist(m, &dirac_x, &txp);
                        if !on_sphere || spread > 4 * delta {
                            rep.add_violation(FlowViolation {
                                rule: "step_alignment(ii)".into(),
                                tuple: vec![a, x, xp],
                                detail: format!("on_sphere={on_sphere} spread={spread}"),
                            });
                        }
                    }
                }
            }
        }
        rep
    });
    reports.into_iter().fold(
        FlowSuiteReport::new("step_alignment"),
        FlowSuiteReport::merge,
    )
}

/// Step overlap: for n >= 1 and x, x' on `S(a, delta_bar(n))` within 4 delta
/// of each other, the one-step images live on `S(a, delta_bar(n-1))`, have
/// support cardinality at most C, diameter at most 2 delta, maximal mutual
/// distance at most 3 delta, and intersecting supports.
pub fn step_overlap_suite<M: Metric>(
    m: &M,
    sched: AnnulusSchedule,
    c_support: u32,
    domain: &[VertexId],
) -> FlowSuiteReport {
    let delta = sched.delta();
    let reports = exec::map_range(domain.len(), |ci| {
        let a = domain[ci];
        let mut engine = CenterEngine::new(m, None, sched, a);
        let mut rep = FlowSuiteReport::new("step_overlap");
        let max_d = domain
            .iter()
            .map(|&v| engine.dist_to_center(v))
            .max()
            .unwrap_or(0);
        let mut n = 1;
        while sched.delta_bar(n) <= max_d {
            let r = sched.delta_bar(n);
            let on_sphere: Vec<VertexId> = domain
                .iter()
                .copied()
                .filter(|&v| engine.dist_to_center(v) == r)
                .collect();
            for (i, &x) in on_sphere.iter().enumerate() {
                for &xp in &on_sphere[i..] {
                    if m.dist(x, xp) > 4 * delta {
                        continue;
                    }
                    rep.checked += 1;
                    let tx = engine.step_dirac(x).unwrap();
                    let txp = engine.step_dirac(xp).unwrap();
                    let inner = sched.delta_bar(n - 1);
                    let on_inner = tx
                        .support()
                        .chain(txp.support())
                        .all(|z| engine.dist_to_center(z) == inner);
                    let card_ok = tx.support_size() as u32 <= c_support
                        && txp.support_size() as u32 <= c_support;
                    let diam_ok = support_diameter(m, &tx) <= 2 * delta
                        && support_diameter(m, &txp) <= 2 * delta;
                    let spread = max_support_dist(m, &tx, &txp);
                    let intersects = tx.supports_intersect(&txp);
                    if !(on_inner && card_ok && diam_ok && spread <= 3 * delta && intersects) {
                        rep.add_violation(FlowViolation {
                            rule: "step_overlap".into(),
                            tuple: vec![a, x, xp, n],
                            detail: format!(
                                "on_inner={on_inner} card_ok={card_ok} diam_ok={diam_ok} \
                                 spread={spread} intersects={intersects}"
                            ),
                        });
                    }
                }
            }
            n += 1;
        }
        rep
    });
    reports
        .into_iter()
        .fold(FlowSuiteReport::new("step_overlap"), FlowSuiteReport::merge)
}

/// Per-annulus decay over a measure family:
/// `||mu_x(a) - mu_x'(a)||_1 <= 2 (1 - 1/C)^n` for x, x' on
/// `S(a, delta_bar(n))` with d(x, x') <= 4 delta. The bound is compared as
/// an exact rational.
pub fn decay_same_sphere_suite<M: Metric>(
    m: &M,
    family: &MuFamily,
    consts: &DecayConstants,
    domain: &[VertexId],
) -> FlowSuiteReport {
    let sched = family.sched;
    let delta = sched.delta();
    let centers: Vec<VertexId> = {
        let mut c: Vec<VertexId> = family.centers().collect();
        c.sort_unstable();
        c
    };
    let reports = exec::map_range(centers.len(), |ci| {
        let a = centers[ci];
        let row_a = m.row(a);
        let mut rep = FlowSuiteReport::new("decay_same_sphere");
        let max_d = domain
            .iter()
            .map(|&v| row_a[v as usize] as u32)
            .max()
            .unwrap_or(0);
        let mut n = 0;
        while sched.delta_bar(n) <= max_d {
            let r = sched.delta_bar(n);
            let on_sphere: Vec<VertexId> = domain
                .iter()
                .copied()
                .filter(|&v| row_a[v as usize] as u32 == r)
                .collect();
            let bound = consts.ann_bound_exact(n);
            for (i, &x) in on_sphere.iter().enumerate() {
                for &xp in &on_sphere[i..] {
                    if m.dist(x, xp) > 4 * delta {
                        continue;
                    }
                    rep.checked += 1;
                    let l1 = l1_distance(family.get(a, x).unwrap(), family.get(a, xp).unwrap());
                    if l1 > bound {
                        rep.add_violation(FlowViolation {
                            rule: "annulus_decay".into(),
                            tuple: vec![a, x, xp, n],
                            detail: format!("l1 = {l1} > bound(n={n})"),
                        });
                    }
                }
            }
            n += 1;
        }
        rep
    });
    reports.into_iter().fold(
        FlowSuiteReport::new("decay_same_sphere"),
        FlowSuiteReport::merge,
    )
}

/// Per-distance decay over neighbor pairs:
/// `||mu_x(a) - mu_x'(a)||_1 <= C_dist e^{-eps_dist d(x,a)}`.
pub fn decay_neighbor_suite<M: Metric>(
    m: &M,
    graph: &FiniteGraph,
    family: &MuFamily,
    consts: &DecayConstants,
    domain: &[VertexId],
) -> FlowSuiteReport {
    let in_domain: std::collections::HashSet<VertexId> = domain.iter().copied().collect();
    let centers: Vec<VertexId> = {
        let mut c: Vec<VertexId> = family.centers().collect();
        c.sort_unstable();
        c
    };
    let reports = exec::map_range(centers.len(), |ci| {
        let a = centers[ci];
        let row_a = m.row(a);
        let mut rep = FlowSuiteReport::new("decay_neighbor");
        for &x in domain {
            for &xp in graph.neighbors(x) {
                if xp < x || !in_domain.contains(&xp) {
                    continue;
                }
                rep.checked += 1;
                let dxa = row_a[x as usize] as u32;
                let l1 = l1_distance(family.get(a, x).unwrap(), family.get(a, xp).unwrap());
                let bound = consts.dist_bound(dxa);
                let l1_f = rational_to_f64(&l1);
                if l1_f > bound {
                    rep.add_violation(FlowViolation {
                        rule: "distance_decay".into(),
                        tuple: vec![a, x, xp, dxa],
                        detail: format!("l1 = {l1_f} > {bound}"),
                    });
                }
            }
        }
        rep
    });
    reports.into_iter().fold(
        FlowSuiteReport::new("decay_neighbor"),
        FlowSuiteReport::merge,
    )
}

pub(crate) fn rational_to_f64(q: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    q.to_f64().unwrap_or(f64::NAN)
}

/// Equivariance scan: `mu_{g x}(g a) = g . mu_x(a)` atom for atom. Total
/// isometries are checked on every (x, a) in the domain. Partial ones are
/// checked only where the whole computation tube `3 delta-geod(x, a)` maps
/// into the domain of g and the image tube back under g^{-1}; outside that
/// the sample is skipped (truncation, not a mathematical failure).
pub fn equivariance_suite<M: Metric>(
    m: &M,
    graph: Option<&FiniteGraph>,
    sched: AnnulusSchedule,
    domain: &[VertexId],
    isos: &[Isometry],
) -> FlowSuiteReport {
    let delta = sched.delta();
    let reports = exec::map_range(domain.len(), |ci| {
        let a = domain[ci];
        let mut engine_a = CenterEngine::new(m, graph, sched, a);
        let mut rep = FlowSuiteReport::new("equivariance");
        for iso in isos {
            let Some(ga) = iso.try_act(a) else { continue };
            let inv = iso.inverse();
            let mut engine_ga = CenterEngine::new(m, graph, sched, ga);
            for &x in domain {
                let Some(gx) = iso.try_act(x) else { continue };
                if !iso.is_total() && !tube_ok(m, iso, &inv, x, a, gx, ga, 3 * delta) {
                    continue;
                }
                rep.checked += 1;
                let lhs = engine_ga.mu(gx).unwrap();
                let rhs = engine_a
                    .mu(x)
                    .unwrap()
                    .push(|v| iso.try_act(v))
                    .expect("tube check guarantees atom images");
                if *lhs.as_ref() != rhs {
                    rep.add_violation(FlowViolation {
                        rule: "equivariance".into(),
                        tuple: vec![a, x, ga, gx],
                        detail: format!("iso {}", iso.name()),
                    });
                }
            }
        }
        rep
    });
    reports
        .into_iter()
        .fold(FlowSuiteReport::new("equivariance"), FlowSuiteReport::merge)
}

/// Every vertex the flow can touch for (x, a) lies in `slack`-geod(x, a);
/// the sample is admissible when g covers that tube and g^{-1} covers the
/// image tube, which forces the two computations to be isomorphic.
#[allow(clippy::too_many_arguments)]
fn tube_ok<M: Metric>(
    m: &M,
    iso: &Isometry,
    inv: &Isometry,
    x: VertexId,
    a: VertexId,
    gx: VertexId,
    ga: VertexId,
    slack: u32,
) -> bool {
    let row_x = m.row(x);
    let row_a = m.row(a);
    let dxa = row_x[a as usize] as u32;
    for z in 0..m.n() {
        if row_x[z] as u32 + row_a[z] as u32 <= dxa + slack && !iso.in_domain(z as VertexId) {
            return false;
        }
    }
    let row_gx = m.row(gx);
    let row_ga = m.row(ga);
    let dgxga = row_gx[ga as usize] as u32;
    for w in 0..m.n() {
        if row_gx[w] as u32 + row_ga[w] as u32 <= dgxga + slack && !inv.in_domain(w as VertexId) {
            return false;
        }
    }
    true
}

/// A single-step insufficiency configuration: `T_a delta_x` splits over two
/// points while `T_a delta_x'` is the Dirac at one of them, keeping the
/// one-step l1 difference at 1 however far the center is; the stationary
/// limits still merge exponentially.
#[derive(Debug, Clone, Serialize)]
pub struct DemoSample {
    pub a: VertexId,
    pub x: VertexId,
    pub xp: VertexId,
    pub d_xa: u32,
    pub single_step_l1: String,
    pub full_l1: String,
    pub n: u32,
    pub bound: String,
    pub full_below_bound: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SingleStepDemo {
    pub found: bool,
    pub samples: Vec<DemoSample>,
}

/// Search the space for configurations (a, x, x') of neighbors with
/// `|A_x| = 2` and `A_x' = {z}` a singleton inside `A_x`, the picture that
/// shows one application of `T_a` cannot contract. Returns the samples with
/// both the one-step and the stationary l1 differences.
pub fn single_step_demo<M: Metric>(
    m: &M,
    graph: &FiniteGraph,
    sched: AnnulusSchedule,
    consts: &DecayConstants,
    domain: &[VertexId],
    max_samples: usize,
) -> SingleStepDemo {
    let reports = exec::map_range(domain.len(), |ci| {
        let a = domain[ci];
        let mut engine = CenterEngine::new(m, None, sched, a);
        let mut samples = Vec::new();
        for &x in domain {
            let dxa = engine.dist_to_center(x);
            if dxa <= sched.fixed_radius() {
                continue;
            }
            let Ok((rx, ax)) = engine.annulus_target(x) else {
                continue;
            };
            if ax.len() != 2 {
                continue;
            }
            for &xp in graph.neighbors(x) {
                if engine.dist_to_center(xp) <= sched.fixed_radius() {
                    continue;
                }
                let Ok((rxp, axp)) = engine.annulus_target(xp) else {
                    continue;
                };
                if rxp != rx || axp.len() != 1 || !ax.contains(&axp[0]) {
                    continue;
                }
                let tx = engine.step_dirac(x).unwrap();
                let txp = engine.step_dirac(xp).unwrap();
                let single = l1_distance(&tx, &txp);
                let mu_x = engine.mu(x).unwrap();
                let mu_xp = engine.mu(xp).unwrap();
                let full = l1_distance(&mu_x, &mu_xp);
                let n = sched.n_below(dxa).unwrap();
                let bound = consts.ann_bound_exact(n);
                samples.push(DemoSample {
                    a,
                    x,
                    xp,
                    d_xa: dxa,
                    single_step_l1: single.to_string(),
                    full_l1: full.to_string(),
                    n,
                    bound: bound.to_string(),
                    full_below_bound: full <= bound,
                });
            }
        }
        samples
    });
    let mut samples: Vec<DemoSample> = reports.into_iter().flatten().collect();
    samples.sort_by_key(|s| (s.d_xa, s.a, s.x, s.xp));
    // One witness per distance keeps the whole d-range in view.
    samples.dedup_by_key(|s| s.d_xa);
    samples.truncate(max_samples);
    SingleStepDemo {
        found: !samples.is_empty(),
        samples,
    }
}
