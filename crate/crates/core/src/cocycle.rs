//! Cocycle fields `c = mu_o - mu_{o'}` on the pair set `X^{<= 4 delta}`,
//! their `ℓ^p` growth, and the `ℓ^infty` word-metric reference cocycle.
//!
//! A field is stored as sparse signed rows indexed by the center: the row
//! at `a` is the difference `mu_o(a) - mu_{o'}(a)`, which sums to zero and
//! is supported within distance `4 delta` of `a`. The `ℓ^p` norm treats the
//! field as the family of those fiber differences: the `ℓ^1` mass of each
//! row, combined in `ℓ^p` across centers. On a tree this gives the exact
//! closed form `||c||_p = 2 (d(o, o') + 1)^{1/p}`.
//!
//! On trees (delta = 1) rows vanish off `8 delta-geod(o, o')`: away from
//! the geodesic the two measures are the same Dirac, so assembly only
//! visits that candidate set. Other spaces assemble every row.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::exec;
use crate::flow::{rational_to_f64, AnnulusSchedule, CenterEngine, DecayConstants, FlowError};
use crate::graph::{FiniteGraph, VertexId};
use crate::isometry::Isometry;
use crate::measure::SparseProbMeasure;
use crate::metric::{eps_geod, Metric};

/// Which measure family backs a field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MuKind {
    /// The annulus flow of the main construction.
    Flow,
    /// The nearest-neighbor Dirac map, defined on trees only.
    Tree,
}

/// A mover is just where the group element sends the origin; assembling
/// the field `mu_o - mu_{g o}` needs nothing else of g.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Mover {
    pub label: String,
    pub target: VertexId,
}

impl Mover {
    pub fn new(label: impl Into<String>, target: VertexId) -> Self {
        Mover {
            label: label.into(),
            target,
        }
    }
}

pub type SignedRow = BTreeMap<VertexId, BigRational>;

/// The cocycle field of one mover.
#[derive(Debug, Clone, PartialEq)]
pub struct CocycleField {
    pub base: VertexId,
    pub target: VertexId,
    pub delta: u32,
    rows: BTreeMap<VertexId, SignedRow>,
}

fn signed_diff(a: &SparseProbMeasure, b: &SparseProbMeasure) -> SignedRow {
    let mut row: SignedRow = a.atoms().map(|(v, m)| (v, m.clone())).collect();
    for (v, m) in b.atoms() {
        let entry = row.entry(v).or_insert_with(BigRational::zero);
        *entry -= m;
        if entry.is_zero() {
            row.remove(&v);
        }
    }
    row
}

impl CocycleField {
    pub fn from_rows(
        base: VertexId,
        target: VertexId,
        delta: u32,
        rows: BTreeMap<VertexId, SignedRow>,
    ) -> Self {
        let rows = rows.into_iter().filter(|(_, r)| !r.is_empty()).collect();
        CocycleField {
            base,
            target,
            delta,
            rows,
        }
    }

    pub fn rows(&self) -> impl Iterator<Item = (VertexId, &SignedRow)> {
        self.rows.iter().map(|(&a, r)| (a, r))
    }

    pub fn row(&self, a: VertexId) -> Option<&SignedRow> {
        self.rows.get(&a)
    }

    pub fn nonzero_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn is_zero(&self) -> bool {
        self.rows.is_empty()
    }

    /// Every row of a difference of probability measures sums to zero.
    pub fn row_sums_zero(&self) -> bool {
        self.rows
            .values()
            .all(|r| r.values().sum::<BigRational>().is_zero())
    }

    /// Every entry sits at a pair (a, y) with d(a, y) <= 4 delta.
    pub fn support_confined<M: Metric>(&self, m: &M) -> bool {
        self.rows.iter().all(|(&a, r)| {
            let row_a = m.row(a);
            r.keys()
                .all(|&y| (row_a[y as usize] as u32) <= 4 * self.delta)
        })
    }

    /// Exact `ℓ^1` mass of the row at `a` (zero when absent).
    pub fn row_l1(&self, a: VertexId) -> BigRational {
        self.rows
            .get(&a)
            .map(|r| r.values().map(|m| m.abs()).sum())
            .unwrap_or_else(BigRational::zero)
    }

    /// Exact total `ℓ^1` norm.
    pub fn l1_norm_exact(&self) -> BigRational {
        self.rows
            .values()
            .map(|r| r.values().map(|m| m.abs()).sum::<BigRational>())
            .sum()
    }

    /// `ℓ^p` across centers of the fiber `ℓ^1` masses; p = infinity gives
    /// the largest fiber mass.
    pub fn lp_norm(&self, p: f64) -> f64 {
        assert!(p >= 1.0);
        if self.rows.is_empty() {
            return 0.0;
        }
        if p.is_infinite() {
            return self
                .rows
                .values()
                .map(|r| rational_to_f64(&r.values().map(|m| m.abs()).sum::<BigRational>()))
                .fold(0.0, f64::max);
        }
        if p == 1.0 {
            return rational_to_f64(&self.l1_norm_exact());
        }
        let sum: f64 = self
            .rows
            .values()
            .map(|r| rational_to_f64(&r.values().map(|m| m.abs()).sum::<BigRational>()).powf(p))
            .sum();
        sum.powf(1.0 / p)
    }

    /// Count of centers where the two measures have disjoint supports,
    /// equivalently fiber mass exactly 2, restricted to `centers`.
    pub fn disjoint_count(&self, centers: &[VertexId]) -> u64 {
        let two = BigRational::from_integer(BigInt::from(2));
        centers.iter().filter(|&&a| self.row_l1(a) == two).count() as u64
    }

    /// Push the field along a total isometry: entries (a, y) move to
    /// (g a, g y). `None` if any touched vertex leaves the domain.
    pub fn apply_isometry(&self, iso: &Isometry) -> Option<CocycleField> {
        let mut rows: BTreeMap<VertexId, SignedRow> = BTreeMap::new();
        for (&a, row) in &self.rows {
            let ga = iso.try_act(a)?;
            let mut new_row = SignedRow::new();
            for (&y, mass) in row {
                new_row.insert(iso.try_act(y)?, mass.clone());
            }
            rows.insert(ga, new_row);
        }
        Some(CocycleField {
            base: iso.try_act(self.base)?,
            target: iso.try_act(self.target)?,
            delta: self.delta,
            rows,
        })
    }

    /// Entrywise sum (the cocycle identity produces these).
    pub fn add(&self, other: &CocycleField) -> CocycleField {
        let mut rows = self.rows.clone();
        for (&a, row) in &other.rows {
            let target_row = rows.entry(a).or_default();
            for (&y, mass) in row {
                let e = target_row.entry(y).or_insert_with(BigRational::zero);
                *e += mass;
                if e.is_zero() {
                    target_row.remove(&y);
                }
            }
        }
        rows.retain(|_, r| !r.is_empty());
        CocycleField {
            base: self.base,
            target: other.target,
            delta: self.delta,
            rows,
        }
    }
}

fn row_for<M: Metric>(
    kind: MuKind,
    m: &M,
    graph: Option<&FiniteGraph>,
    sched: AnnulusSchedule,
    o: VertexId,
    target: VertexId,
    a: VertexId,
) -> Result<SignedRow, FlowError> {
    match kind {
        MuKind::Flow => {
            let mut engine = CenterEngine::new(m, graph, sched, a);
            let mo = engine.mu(o)?.as_ref().clone();
            let mt = engine.mu(target)?.as_ref().clone();
            Ok(signed_diff(&mo, &mt))
        }
        MuKind::Tree => {
            let g = graph.ok_or(FlowError::NotATree)?;
            let mo = crate::flow::tree_mu(m, g, o, a)?;
            let mt = crate::flow::tree_mu(m, g, target, a)?;
            Ok(signed_diff(&mo, &mt))
        }
    }
}

/// Centers that can carry a nonzero row. On a tree with delta = 1 both
/// measure maps agree at any center whose geodesic projection is farther
/// than 4 delta from the [o, o'] geodesic, so `8 delta-geod(o, o')`
/// suffices; elsewhere every center is scanned.
fn candidate_centers<M: Metric>(
    m: &M,
    graph: Option<&FiniteGraph>,
    delta: u32,
    o: VertexId,
    target: VertexId,
) -> Vec<VertexId> {
    let tree = graph.is_some_and(|g| g.is_tree() && g.n() == m.n());
    if tree && delta == 1 {
        eps_geod(m, o, target, 8 * delta)
    } else {
        (0..m.n() as VertexId).collect()
    }
}

/// Assemble the field `mu_o - mu_{target}` over all centers (or the tree
/// candidate set), in parallel over centers.
pub fn cocycle_field<M: Metric>(
    m: &M,
    graph: Option<&FiniteGraph>,
    sched: AnnulusSchedule,
    kind: MuKind,
    o: VertexId,
    target: VertexId,
) -> Result<CocycleField, FlowError> {
    let delta = sched.delta();
    let centers = candidate_centers(m, graph, delta, o, target);
    let rows = exec::map_range(centers.len(), |ci| {
        let a = centers[ci];
        let row = row_for(kind, m, graph, sched, o, target, a)?;
        Ok::<(VertexId, SignedRow), FlowError>((a, row))
    });
    let mut map = BTreeMap::new();
    for r in rows {
        let (a, row) = r?;
        if !row.is_empty() {
            map.insert(a, row);
        }
    }
    Ok(CocycleField::from_rows(o, target, delta, map))
}

/// The base function (x, y) -> mu_o(x)({y}) on `X^{<= 4 delta}`, one
/// probability row per center.
pub struct BaseField {
    pub origin: VertexId,
    pub delta: u32,
    pub rows: Vec<SparseProbMeasure>,
}

pub fn xi_origin<M: Metric>(
    m: &M,
    graph: Option<&FiniteGraph>,
    sched: AnnulusSchedule,
    kind: MuKind,
    o: VertexId,
) -> Result<BaseField, FlowError> {
    let rows = exec::map_range(m.n(), |a| {
        let a = a as VertexId;
        match kind {
            MuKind::Flow => {
                let mut engine = CenterEngine::new(m, graph, sched, a);
                Ok(engine.mu(o)?.as_ref().clone())
            }
            MuKind::Tree => {
                let g = graph.ok_or(FlowError::NotATree)?;
                crate::flow::tree_mu(m, g, o, a)
            }
        }
    });
    let rows = rows.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(BaseField {
        origin: o,
        delta: sched.delta(),
        rows,
    })
}

/// Default mover family on a Cayley ball: powers of one generator while
/// the target keeps `margin` away from the truncation boundary.
pub fn generator_movers(
    ball: &crate::cayley::GroupBall,
    generator: u32,
    margin: u32,
) -> Vec<Mover> {
    let cap = ball.outer_radius().saturating_sub(margin);
    (1..=cap)
        .filter_map(|k| {
            ball.generator_power(generator, k)
                .map(|target| Mover::new(format!("g{generator}^{k}"), target))
        })
        .collect()
}

/// The word-metric reference cocycle x -> d(o, x) - d(o', x), with its sup
/// norm; the triangle inequality caps it at d(o, o') and the value at
/// x = o' attains it.
#[derive(Debug, Clone, Serialize)]
pub struct LinfCocycle {
    pub base: VertexId,
    pub target: VertexId,
    pub norm: u32,
    pub values: Vec<i64>,
}

pub fn linf_word_cocycle<M: Metric>(m: &M, o: VertexId, target: VertexId) -> LinfCocycle {
    let row_o = m.row(o);
    let row_t = m.row(target);
    let values: Vec<i64> = (0..m.n())
        .map(|x| row_o[x] as i64 - row_t[x] as i64)
        .collect();
    let norm = values.iter().map(|v| v.unsigned_abs()).max().unwrap_or(0) as u32;
    LinfCocycle {
        base: o,
        target,
        norm,
        values,
    }
}

/// One growth-report row per mover.
#[derive(Debug, Clone, Serialize)]
pub struct GrowthRow {
    pub label: String,
    pub d: u32,
    pub l1_exact: String,
    pub l1: f64,
    pub lp_norms: Vec<f64>,
    pub linf_reference: u32,
    pub disjoint_count: u64,
    pub nonzero_rows: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GrowthReport {
    pub origin: VertexId,
    pub delta: u32,
    pub c_support: u32,
    pub ps: Vec<f64>,
    pub rows: Vec<GrowthRow>,
    /// Least-squares slope of ln|S(o, r)| against r.
    pub sphere_growth_h: f64,
    pub sphere_fit_points: usize,
    pub eps_ann: f64,
    pub eps_dist: f64,
    /// h / eps_dist: the provable summability threshold.
    pub p_min_estimate: f64,
    /// min over rows with d >= 8 delta of disjoint_count / d.
    pub eta_hat: Option<f64>,
}

/// Least-squares slope of ln(count) against radius.
fn fit_log_slope(points: &[(u32, usize)]) -> (f64, usize) {
    let data: Vec<(f64, f64)> = points
        .iter()
        .filter(|&&(_, c)| c > 0)
        .map(|&(r, c)| (r as f64, (c as f64).ln()))
        .collect();
    if data.len() < 2 {
        return (0.0, data.len());
    }
    let n = data.len() as f64;
    let sx: f64 = data.iter().map(|p| p.0).sum();
    let sy: f64 = data.iter().map(|p| p.1).sum();
    let sxx: f64 = data.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = data.iter().map(|p| p.0 * p.1).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    (slope, data.len())
}

/// Build the full growth report: per-mover norms and disjoint counts, the
/// sphere-growth fit at the origin, and the derived summability threshold.
#[allow(clippy::too_many_arguments)]
pub fn growth_report<M: Metric>(
    m: &M,
    graph: Option<&FiniteGraph>,
    sched: AnnulusSchedule,
    consts: &DecayConstants,
    o: VertexId,
    movers: &[Mover],
    ps: &[f64],
    disjoint_centers: &[VertexId],
    fit_radius_max: u32,
) -> Result<GrowthReport, FlowError> {
    let delta = sched.delta();
    let mut rows = Vec::with_capacity(movers.len());
    for mv in movers {
        let field = cocycle_field(m, graph, sched, MuKind::Flow, o, mv.target)?;
        let d = m.dist(o, mv.target);
        let l1_exact = field.l1_norm_exact();
        let lp_norms: Vec<f64> = ps
            .iter()
            .map(|&p| crate::util::sig12(field.lp_norm(p)))
            .collect();
        let linf = linf_word_cocycle(m, o, mv.target);
        rows.push(GrowthRow {
            label: mv.label.clone(),
            d,
            l1_exact: l1_exact.to_string(),
            l1: crate::util::sig12(rational_to_f64(&l1_exact)),
            lp_norms,
            linf_reference: linf.norm,
            disjoint_count: field.disjoint_count(disjoint_centers),
            nonzero_rows: field.nonzero_rows() as u64,
        });
    }
    let row_o = m.row(o);
    let mut counts: Vec<(u32, usize)> = Vec::new();
    for r in 1..=fit_radius_max {
        let c = row_o.iter().filter(|&&d| d as u32 == r).count();
        counts.push((r, c));
    }
    let (h, fit_points) = fit_log_slope(&counts);
    let eta_hat = rows
        .iter()
        .filter(|r| r.d >= 8 * delta && r.d > 0)
        .map(|r| r.disjoint_count as f64 / r.d as f64)
        .fold(None, |acc: Option<f64>, v| {
            Some(acc.map_or(v, |a| a.min(v)))
        });
    Ok(GrowthReport {
        origin: o,
        delta,
        c_support: consts.c_support,
        ps: ps.to_vec(),
        rows,
        sphere_growth_h: crate::util::sig12(h),
        sphere_fit_points: fit_points,
        eps_ann: crate::util::sig12(consts.eps_ann),
        eps_dist: crate::util::sig12(consts.eps_dist),
        p_min_estimate: crate::util::sig12(h / consts.eps_dist),
        eta_hat: eta_hat.map(crate::util::sig12),
    })
}
