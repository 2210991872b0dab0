//! The full verification battery over one space: hyperbolicity constants,
//! the three metric lemmas, support confinement, the one-step alignment
//! and overlap structure, both decay forms, the disjoint-support bound,
//! equivariance, and the single-step insufficiency demo. This is what the
//! `verify` subcommand serializes.

use serde::Serialize;

use crate::cocycle::linf_word_cocycle;
use crate::exec;
use crate::flow::{
    decay_neighbor_suite, decay_same_sphere_suite, equivariance_suite, single_step_demo,
    step_alignment_suite, step_overlap_suite, AnnulusSchedule, DecayConstants, FlowError,
    FlowSuiteReport, MuFamily, SingleStepDemo,
};
use crate::graph::{FiniteGraph, VertexId};
use crate::hyperbolicity::{
    center_pinch_suite, geodesic_relay_suite, report_for_graph, report_with_delta,
    sphere_spread_suite, weakly_geodesic_check, DeltaScan, HyperbolicityReport, SuiteReport,
};
use crate::isometry::Isometry;
use crate::metric::Metric;
use crate::util::sig12;

fn finite_or_none(x: f64) -> Option<f64> {
    x.is_finite().then(|| sig12(x))
}

/// Round to the 12 significant digits used everywhere in report output.
pub fn round_sig(x: f64) -> f64 {
    sig12(x)
}

#[derive(Debug, Clone, Serialize)]
pub struct DeltaSection {
    pub delta_min: u32,
    pub witness: [VertexId; 4],
    pub delta_use: u32,
    pub k_1: u32,
    pub c: u32,
    pub eps_ann: Option<f64>,
    pub eps_dist: Option<f64>,
    pub c_dist: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SupportSection {
    pub pairs_checked: u64,
    pub violations: u64,
    pub witnesses: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DisjointSection {
    pub pairs_checked: u64,
    /// Pairs with d(x,x') >= 8 delta whose count fell below d + 1 - 8 delta.
    pub violations: u64,
    pub witnesses: Vec<(VertexId, VertexId, u32, u64)>,
    pub eta_hat: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LinfSection {
    pub movers_checked: u64,
    pub violations: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyBattery {
    pub schema_version: u32,
    pub n: usize,
    pub domain_size: usize,
    pub delta: DeltaSection,
    pub weakly_geodesic: bool,
    pub sphere_spread: SuiteReport,
    pub geodesic_relay: SuiteReport,
    pub center_pinch: SuiteReport,
    pub support: SupportSection,
    pub step_alignment: FlowSuiteReport,
    pub step_overlap: FlowSuiteReport,
    pub decay_same_sphere: FlowSuiteReport,
    pub decay_neighbor: FlowSuiteReport,
    pub disjoint: DisjointSection,
    pub equivariance: FlowSuiteReport,
    pub linf_reference: LinfSection,
    pub single_step_demo: SingleStepDemo,
    pub passed: bool,
}

/// Inputs to [`run_battery`] beyond the space itself.
#[derive(Default)]
pub struct BatteryConfig<'a> {
    /// Scan domain (safe region); all vertices when None.
    pub domain: Option<Vec<VertexId>>,
    /// Override the computed delta (fault injection / robustness runs).
    pub delta_override: Option<u32>,
    pub total_autos: &'a [Isometry],
    pub partial_autos: &'a [Isometry],
}

pub fn run_battery<M: Metric>(
    graph: &FiniteGraph,
    metric: &M,
    config: &BatteryConfig<'_>,
) -> Result<VerifyBattery, FlowError> {
    let n = metric.n();
    let domain: Vec<VertexId> = config
        .domain
        .clone()
        .unwrap_or_else(|| (0..n as VertexId).collect());
    let report: HyperbolicityReport = match config.delta_override {
        None => report_for_graph(graph, metric),
        Some(d) => report_with_delta(
            graph,
            DeltaScan {
                delta_min: d,
                witness: four_point_delta_witness_or_zero(),
            },
        ),
    };
    let delta = report.delta_use;
    let consts = DecayConstants::derive(delta, report.c_support);
    let sched = AnnulusSchedule::new(delta)?;
    let weakly_geodesic = weakly_geodesic_check(metric, delta).is_ok();

    let sphere_spread = sphere_spread_suite(metric, delta, 4 * delta, &domain);
    let geodesic_relay = geodesic_relay_suite(metric, delta, 4 * delta, &domain);
    let center_pinch = center_pinch_suite(metric, 4 * delta, &domain);

    let family = MuFamily::build(metric, Some(graph), sched, &domain, &domain)?;
    let support = SupportSection {
        pairs_checked: family.pairs_checked,
        violations: family.support_violations.len() as u64,
        witnesses: family
            .support_violations
            .iter()
            .take(8)
            .map(|v| format!("a={} x={} iterate={}: {}", v.a, v.x, v.iterate, v.detail))
            .collect(),
    };
    let step_alignment = step_alignment_suite(metric, graph, sched, &domain);
    let step_overlap = step_overlap_suite(metric, sched, report.c_support, &domain);
    let decay_same_sphere = decay_same_sphere_suite(metric, &family, &consts, &domain);
    let decay_neighbor = decay_neighbor_suite(metric, graph, &family, &consts, &domain);
    let disjoint = disjoint_section(metric, &family, delta, &domain);

    let mut isos: Vec<Isometry> = config.total_autos.to_vec();
    isos.extend(config.partial_autos.iter().cloned());
    let equivariance = equivariance_suite(metric, Some(graph), sched, &domain, &isos);

    let mut linf = LinfSection {
        movers_checked: 0,
        violations: 0,
    };
    for iso in config.total_autos {
        if !iso.is_total() {
            continue;
        }
        let o = domain.first().copied().unwrap_or(0);
        let target = iso.try_act(o).unwrap();
        linf.movers_checked += 1;
        if linf_word_cocycle(metric, o, target).norm != metric.dist(o, target) {
            linf.violations += 1;
        }
    }

    // The one-step insufficiency picture needs singleton projection
    // targets, which only the tightest schedule produces; the demo is
    // illustrative and does not feed `passed`.
    let demo_sched = AnnulusSchedule::new(1)?;
    let demo_consts = DecayConstants::derive(1, crate::hyperbolicity::local_finiteness_k(graph, 2));
    let demo = single_step_demo(metric, graph, demo_sched, &demo_consts, &domain, 16);

    let passed = sphere_spread.passed()
        && geodesic_relay.passed()
        && center_pinch.passed()
        && support.violations == 0
        && step_alignment.passed()
        && step_overlap.passed()
        && decay_same_sphere.passed()
        && decay_neighbor.passed()
        && disjoint.violations == 0
        && equivariance.passed()
        && linf.violations == 0
        && weakly_geodesic;

    Ok(VerifyBattery {
        schema_version: crate::doc::SCHEMA_VERSION,
        n,
        domain_size: domain.len(),
        delta: DeltaSection {
            delta_min: report.delta_min,
            witness: report.witness,
            delta_use: report.delta_use,
            k_1: report.k_sphere,
            c: report.c_support,
            eps_ann: finite_or_none(report.eps_ann),
            eps_dist: finite_or_none(consts.eps_dist),
            c_dist: finite_or_none(consts.c_dist),
        },
        weakly_geodesic,
        sphere_spread,
        geodesic_relay,
        center_pinch,
        support,
        step_alignment,
        step_overlap,
        decay_same_sphere,
        decay_neighbor,
        disjoint,
        equivariance,
        linf_reference: linf,
        single_step_demo: demo,
        passed,
    })
}

fn four_point_delta_witness_or_zero() -> [VertexId; 4] {
    [0, 0, 0, 0]
}

fn disjoint_section<M: Metric>(
    metric: &M,
    family: &MuFamily,
    delta: u32,
    domain: &[VertexId],
) -> DisjointSection {
    let results = exec::map_range(domain.len(), |xi| {
        let x = domain[xi];
        let row_x = metric.row(x);
        let mut pairs = 0u64;
        let mut violations = Vec::new();
        let mut eta: Option<f64> = None;
        for &xp in domain {
            if xp <= x {
                continue;
            }
            let d = row_x[xp as usize] as u32;
            if d < 8 * delta {
                continue;
            }
            pairs += 1;
            let count = family.disjoint_support_count(x, xp, domain);
            let needed = (d + 1 - 8 * delta) as u64;
            if count < needed {
                violations.push((x, xp, d, count));
            }
            let ratio = count as f64 / d as f64;
            eta = Some(eta.map_or(ratio, |e: f64| e.min(ratio)));
        }
        (pairs, violations, eta)
    });
    let mut section = DisjointSection {
        pairs_checked: 0,
        violations: 0,
        witnesses: Vec::new(),
        eta_hat: None,
    };
    let mut eta: Option<f64> = None;
    for (pairs, violations, e) in results {
        section.pairs_checked += pairs;
        section.violations += violations.len() as u64;
        for v in violations {
            if section.witnesses.len() < 8 {
                section.witnesses.push(v);
            }
        }
        if let Some(e) = e {
            eta = Some(eta.map_or(e, |acc: f64| acc.min(e)));
        }
    }
    section.eta_hat = eta.map(sig12);
    section
}

/// Serialize any report with a trailing newline; struct field order is
/// fixed, floats already rounded.
pub fn to_json_pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serialization");
    s.push('\n');
    s
}
