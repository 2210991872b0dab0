//! Acceptance suite: one test per criterion, each printing a PASS line.
//!
//! The corpus is built once and shared; the per-criterion stopwatch starts
//! after the shared corpus is materialized, so each budget measures the
//! verification work itself.
//!
//! Corpus: P11, C6, C8, ladder(30), the F2 Cayley ball with inner radius 4,
//! the 3-regular tree ball of radius 7, and a 3-regular tree ball of radius
//! 3 with every edge subdivided into three. Truncated Cayley balls scan
//! only their safe region; complete spaces scan everything.

use std::sync::OnceLock;
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use hypflow::cayley::{free_group_ball, pair_identification, GroupBall};
use hypflow::cocycle::{cocycle_field, growth_report, linf_word_cocycle, Mover, MuKind};
use hypflow::flow::{
    decay_neighbor_suite, decay_same_sphere_suite, equivariance_suite, single_step_demo,
    step_alignment_suite, step_overlap_suite, AnnulusSchedule, CenterEngine, DecayConstants,
    MuFamily,
};
use hypflow::graph::{FiniteGraph, VertexId};
use hypflow::hyperbolicity::{
    center_pinch_suite, geodesic_relay_suite, local_finiteness_k, report_for_graph,
    sphere_spread_suite, weakly_geodesic_check, HyperbolicityReport,
};
use hypflow::isometry::{verify_isometry, Isometry};
use hypflow::measure::l1_distance;
use hypflow::metric::{FiniteMetric, LazyMetric, Metric, MetricTable};
use hypflow::rescale::{chain_metric, verify_chain_inequalities};
use hypflow::spaces::{
    cycle, ladder, line, regular_tree, sample_tree_automorphism, subdivide, RootedTree,
};

struct CorpusSpace {
    name: &'static str,
    graph: FiniteGraph,
    metric: MetricTable,
    report: HyperbolicityReport,
    sched: AnnulusSchedule,
    consts: DecayConstants,
    /// Scan domain: the safe region on truncated balls, everything else
    /// whole.
    domain: Vec<VertexId>,
    total_autos: Vec<Isometry>,
    partial_autos: Vec<Isometry>,
    /// Origin for cocycle-style checks; not fixed by tree automorphisms.
    origin: VertexId,
    family: OnceLock<MuFamily>,
}

impl CorpusSpace {
    fn family(&self) -> &MuFamily {
        self.family.get_or_init(|| {
            MuFamily::build(
                &self.metric,
                Some(&self.graph),
                self.sched,
                &self.domain,
                &self.domain,
            )
            .expect("corpus spaces are graph metrics")
        })
    }
}

struct Corpus {
    spaces: Vec<CorpusSpace>,
    f2_inner_radius: u32,
}

fn sampled_tree_autos(graph: &FiniteGraph, root: VertexId, count: u64) -> Vec<Isometry> {
    let rt = RootedTree::new(graph, root);
    (0..count)
        .map(|seed| sample_tree_automorphism(graph, &rt, seed))
        .collect()
}

fn make_space(
    name: &'static str,
    graph: FiniteGraph,
    domain: Option<Vec<VertexId>>,
    total_autos: Vec<Isometry>,
    partial_autos: Vec<Isometry>,
    origin: VertexId,
) -> CorpusSpace {
    let metric = MetricTable::from_graph(&graph).expect("corpus graphs fit in u16");
    let report = report_for_graph(&graph, &metric);
    let sched = AnnulusSchedule::new(report.delta_use).unwrap();
    let consts = DecayConstants::derive(report.delta_use, report.c_support);
    let domain = domain.unwrap_or_else(|| (0..graph.n() as VertexId).collect());
    CorpusSpace {
        name,
        graph,
        metric,
        report,
        sched,
        consts,
        domain,
        total_autos,
        partial_autos,
        origin,
        family: OnceLock::new(),
    }
}

fn build_corpus() -> Corpus {
    let mut spaces = Vec::new();

    let p11 = line(10);
    let mut p11_autos = p11.total_autos.clone();
    p11_autos.extend(sampled_tree_autos(&p11.graph, 0, 50));
    spaces.push(make_space(
        "P11",
        p11.graph,
        None,
        p11_autos,
        p11.partial_autos,
        0,
    ));

    for n in [6u32, 8] {
        let c = cycle(n);
        let rot = c.total_autos[0].clone();
        let mut autos: Vec<Isometry> = (1..n).map(|k| rot.power(k)).collect();
        autos.push(c.total_autos[1].clone());
        let name: &'static str = if n == 6 { "C6" } else { "C8" };
        spaces.push(make_space(name, c.graph, None, autos, Vec::new(), 0));
    }

    let lad = ladder(30);
    spaces.push(make_space(
        "ladder30",
        lad.graph,
        None,
        lad.total_autos,
        lad.partial_autos,
        0,
    ));

    let ball = free_group_ball(2, 4).expect("F2 ball of inner radius 4");
    let safe = ball.safe_region(4).unwrap();
    let mut f2_autos = ball.letter_autos();
    f2_autos.extend(sampled_tree_autos(&ball.graph, 0, 50));
    let f2_partial = vec![ball.translation(&[1]), ball.translation(&[2])];
    // Origin off the fixed point of the letter automorphisms.
    let f2_origin = ball.lookup(&[1, 2]).unwrap();
    spaces.push(make_space(
        "F2_ball_N4",
        ball.graph.clone(),
        Some(safe),
        f2_autos,
        f2_partial,
        f2_origin,
    ));

    let tree = regular_tree(3, 7);
    let mid = tree.graph.bfs_row(0).iter().position(|&d| d == 3).unwrap() as VertexId;
    let mut tree_autos = tree.total_autos.clone();
    tree_autos.extend(sampled_tree_autos(&tree.graph, 0, 50));
    spaces.push(make_space(
        "tree3_r7",
        tree.graph,
        None,
        tree_autos,
        Vec::new(),
        mid,
    ));

    let base = regular_tree(3, 3);
    let sub = subdivide(&base.graph, 3);
    let sub_autos = sampled_tree_autos(&sub, 0, 50);
    let sub_mid = sub.bfs_row(0).iter().position(|&d| d == 4).unwrap() as VertexId;
    spaces.push(make_space(
        "subdivided_tree",
        sub,
        None,
        sub_autos,
        Vec::new(),
        sub_mid,
    ));

    Corpus {
        spaces,
        f2_inner_radius: 4,
    }
}

fn corpus() -> &'static Corpus {
    static CORPUS: OnceLock<Corpus> = OnceLock::new();
    CORPUS.get_or_init(build_corpus)
}

fn f2_n5() -> &'static GroupBall {
    static BALL: OnceLock<GroupBall> = OnceLock::new();
    BALL.get_or_init(|| free_group_ball(2, 5).expect("F2 ball of inner radius 5"))
}

fn rational(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Criterion 1: on F1 (N = 8) and F2 (N = 5) balls, the tree cocycle of
/// movers g^k with d(o, g^k o) in 1..=8 has lp norm exactly 2 (D+1) for
/// p = 1 and 2 (D+1)^{1/p} within 1e-12 for p in {2, 4, 8}.
#[test]
fn criterion_01_tree_cocycle_closed_form() {
    let f1 = free_group_ball(1, 8).unwrap();
    let f2 = f2_n5();
    let start = Instant::now();
    let sched = AnnulusSchedule::new(1).unwrap();
    for (name, ball) in [("F1_N8", &f1), ("F2_N5", f2)] {
        let lazy = LazyMetric::new(&ball.graph);
        for k in 1..=8u32 {
            let target = ball.generator_power(1, k).expect("a^k inside the ball");
            let field =
                cocycle_field(&lazy, Some(&ball.graph), sched, MuKind::Tree, 0, target).unwrap();
            let d = lazy.dist(0, target);
            assert_eq!(d, k, "{name}: mover a^{k}");
            assert!(field.row_sums_zero());
            assert!(field.support_confined(&lazy));
            assert_eq!(
                field.l1_norm_exact(),
                rational(2 * (d as i64 + 1)),
                "{name}: exact l1 for D = {d}"
            );
            for p in [2.0, 4.0, 8.0] {
                let want = 2.0 * ((d + 1) as f64).powf(1.0 / p);
                let got = field.lp_norm(p);
                assert!(
                    (got - want).abs() < 1e-12,
                    "{name}: p = {p}, D = {d}: {got} vs {want}"
                );
            }
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "criterion 1 took {elapsed:?}");
    println!("criterion 01 PASS: tree cocycle norms equal 2(D+1)^(1/p) ({elapsed:?})");
}

/// Criterion 2: the word-metric reference cocycle has sup norm exactly
/// d(o, g o) for every total isometry of every corpus space.
#[test]
fn criterion_02_linf_reference_cocycle() {
    let corpus = corpus();
    let start = Instant::now();
    let mut movers = 0u64;
    for space in &corpus.spaces {
        for iso in &space.total_autos {
            assert!(iso.is_total());
            for o in [space.origin, space.domain[0], *space.domain.last().unwrap()] {
                let target = iso.try_act(o).unwrap();
                let c = linf_word_cocycle(&space.metric, o, target);
                assert_eq!(
                    c.norm,
                    space.metric.dist(o, target),
                    "{}: iso {} origin {o}",
                    space.name,
                    iso.name()
                );
                movers += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "criterion 2 took {elapsed:?}");
    println!("criterion 02 PASS: linf cocycle norm = d(o, g.o) on {movers} movers ({elapsed:?})");
}

/// Criterion 3: exhaustive scans of the metric lemmas (sphere spread,
/// geodesic relay, center pinch; alpha, beta, eps up to 4 delta_use) and of
/// the flow lemmas (iterate confinement, step alignment, step overlap,
/// per-annulus decay) over the corpus safe regions; zero violations, under
/// 10 minutes.
#[test]
fn criterion_03_lemma_suites_zero_violations() {
    let corpus = corpus();
    let start = Instant::now();
    for space in &corpus.spaces {
        let delta = space.report.delta_use;
        let bound = 4 * delta;
        let m = &space.metric;
        let spread = sphere_spread_suite(m, delta, bound, &space.domain);
        assert!(
            spread.passed() && spread.checked > 0,
            "{}: sphere spread {:?}",
            space.name,
            spread.witnesses
        );
        let relay = geodesic_relay_suite(m, delta, bound, &space.domain);
        assert!(
            relay.passed() && relay.checked > 0,
            "{}: geodesic relay {:?}",
            space.name,
            relay.witnesses
        );
        let pinch = center_pinch_suite(m, bound, &space.domain);
        assert!(
            pinch.passed() && pinch.checked > 0,
            "{}: center pinch {:?}",
            space.name,
            pinch.witnesses
        );
        // Iterate-support confinement runs inside the family build
        // (criterion 4 asserts it); alignment and overlap here.
        let align = step_alignment_suite(m, &space.graph, space.sched, &space.domain);
        assert!(
            align.passed(),
            "{}: alignment {:?}",
            space.name,
            align.witnesses
        );
        let overlap = step_overlap_suite(m, space.sched, space.report.c_support, &space.domain);
        assert!(
            overlap.passed(),
            "{}: overlap {:?}",
            space.name,
            overlap.witnesses
        );
        // Per-annulus decay in its same-sphere form.
        let decay_rep = decay_same_sphere_suite(m, space.family(), &space.consts, &space.domain);
        assert!(
            decay_rep.passed(),
            "{}: decay {:?}",
            space.name,
            decay_rep.witnesses
        );
        println!(
            "  {}: spread x{} relay x{} pinch x{} align x{} overlap x{} decay x{}",
            space.name,
            spread.checked,
            relay.checked,
            pinch.checked,
            align.checked,
            overlap.checked,
            decay_rep.checked
        );
    }
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 600.0,
        "criterion 3 took {elapsed:?}"
    );
    println!("criterion 03 PASS: all lemma suites clean ({elapsed:?})");
}

/// Criterion 4: the support of every mu_x(a) lies in B(a, 4 delta)
/// intersect 2 delta-geod(x, a), on the sphere S(a, 4 delta) once
/// d(x, a) >= 4 delta, with every intermediate iterate confined too.
#[test]
fn criterion_04_support_confinement() {
    let corpus = corpus();
    let start = Instant::now();
    let mut pairs = 0u64;
    for space in &corpus.spaces {
        let family = space.family();
        assert!(
            family.support_violations.is_empty(),
            "{}: {:?}",
            space.name,
            family.support_violations.first()
        );
        pairs += family.pairs_checked;
    }
    let elapsed = start.elapsed();
    println!("criterion 04 PASS: support confinement on {pairs} (x,a) pairs ({elapsed:?})");
}

/// Criterion 5: same-sphere pairs obey the exact-rational annulus bound
/// 2 (1 - 1/C)^n and neighbor pairs the derived per-distance bound
/// C_dist e^{-eps_dist d(x,a)}; zero violations.
#[test]
fn criterion_05_decay_bounds() {
    let corpus = corpus();
    let start = Instant::now();
    let mut same_sphere = 0u64;
    let mut neighbor = 0u64;
    for space in &corpus.spaces {
        let family = space.family();
        let r_sphere = decay_same_sphere_suite(&space.metric, family, &space.consts, &space.domain);
        assert!(
            r_sphere.passed(),
            "{}: same-sphere {:?}",
            space.name,
            r_sphere.witnesses
        );
        let r_nbr = decay_neighbor_suite(
            &space.metric,
            &space.graph,
            family,
            &space.consts,
            &space.domain,
        );
        assert!(
            r_nbr.passed(),
            "{}: neighbor {:?}",
            space.name,
            r_nbr.witnesses
        );
        same_sphere += r_sphere.checked;
        neighbor += r_nbr.checked;
    }
    let elapsed = start.elapsed();
    println!(
        "criterion 05 PASS: decay bounds on {same_sphere} same-sphere and {neighbor} neighbor pairs ({elapsed:?})"
    );
}

/// Criterion 6: disjoint-support counts over safe centers reach
/// d(x,x') + 1 - 8 delta for every safe pair at distance >= 8 delta, and
/// the measured eta is positive wherever such pairs exist.
#[test]
fn criterion_06_disjoint_support_lower_bound() {
    let corpus = corpus();
    let start = Instant::now();
    for space in &corpus.spaces {
        let delta = space.report.delta_use;
        let family = space.family();
        let mut pairs = 0u64;
        let mut eta: Option<f64> = None;
        for (i, &x) in space.domain.iter().enumerate() {
            let row = space.metric.row(x);
            for &xp in &space.domain[i + 1..] {
                let d = row[xp as usize] as u32;
                if d < 8 * delta {
                    continue;
                }
                pairs += 1;
                let count = family.disjoint_support_count(x, xp, &space.domain);
                let needed = (d + 1 - 8 * delta) as u64;
                assert!(
                    count >= needed,
                    "{}: pair ({x},{xp}) d = {d}: count {count} < {needed}",
                    space.name
                );
                let ratio = count as f64 / d as f64;
                eta = Some(eta.map_or(ratio, |e| e.min(ratio)));
            }
        }
        match eta {
            Some(e) => {
                assert!(e > 0.0, "{}: eta_hat must be positive", space.name);
                println!("  {}: {pairs} far pairs, eta_hat = {e:.4}", space.name);
            }
            None => println!(
                "  {}: no pairs at distance >= 8 delta (vacuous)",
                space.name
            ),
        }
    }
    let elapsed = start.elapsed();
    println!("criterion 06 PASS: disjointness lower bound holds ({elapsed:?})");
}

/// Criterion 7: mu_{g x}(g a) = g . mu_x(a) atom for atom, for rotations,
/// ladder symmetries and >= 50 sampled tree automorphisms per tree space
/// (plus the window translations where the tube fits).
#[test]
fn criterion_07_equivariance() {
    let corpus = corpus();
    let start = Instant::now();
    for space in &corpus.spaces {
        for iso in space.total_autos.iter().chain(&space.partial_autos) {
            verify_isometry(&space.metric, iso).unwrap_or_else(|e| panic!("{}: {e}", space.name));
        }
        let mut isos = space.total_autos.clone();
        isos.extend(space.partial_autos.iter().cloned());
        let rep = equivariance_suite(
            &space.metric,
            Some(&space.graph),
            space.sched,
            &space.domain,
            &isos,
        );
        assert!(rep.passed(), "{}: {:?}", space.name, rep.witnesses);
        assert!(rep.checked > 0, "{}: no samples", space.name);
        println!("  {}: {} equivariance samples", space.name, rep.checked);
    }
    let elapsed = start.elapsed();
    println!("criterion 07 PASS: equivariance exact ({elapsed:?})");
}

/// Criterion 8: on the ladder with schedule delta = 1, a fixed rung pair
/// (x, x') admits a family of centers with d(x, a) up to 25 where one
/// application of T_a stays at l1 distance 1 while the stationary limits
/// obey 2 e^{-eps_ann n}.
#[test]
fn criterion_08_single_step_insufficiency() {
    let corpus = corpus();
    let space = corpus.spaces.iter().find(|s| s.name == "ladder30").unwrap();
    let start = Instant::now();
    let sched = AnnulusSchedule::new(1).unwrap();
    let c = local_finiteness_k(&space.graph, 2);
    assert_eq!(c, 8);
    let consts = DecayConstants::derive(1, c);
    // Fixed rung pair at column 24; the center walks away along rail 0.
    let x = 2 * 24 + 1; // (24, 1)
    let xp = 2 * 24; // (24, 0)
    let mut family = 0;
    for col in (0..=16u32).rev() {
        let a = 2 * col;
        let mut engine = CenterEngine::new(&space.metric, Some(&space.graph), sched, a);
        let dxa = engine.dist_to_center(x);
        if dxa <= 4 {
            continue;
        }
        let tx = engine.step_dirac(x).unwrap();
        let txp = engine.step_dirac(xp).unwrap();
        let single = l1_distance(&tx, &txp);
        assert!(
            single >= rational(1),
            "single-step difference decayed at d(x,a) = {dxa}"
        );
        let mu_x = engine.mu(x).unwrap();
        let mu_xp = engine.mu(xp).unwrap();
        let full = l1_distance(&mu_x, &mu_xp);
        let n = sched.n_below(dxa).unwrap();
        assert!(
            full <= consts.ann_bound_exact(n),
            "full difference above bound at d(x,a) = {dxa}"
        );
        family += 1;
        if dxa == 25 {
            assert_eq!(n, 4);
        }
    }
    assert!(family >= 15, "family only reached {family} centers");
    // The generic search finds the same picture.
    let domain: Vec<VertexId> = (0..space.graph.n() as VertexId).collect();
    let demo = single_step_demo(&space.metric, &space.graph, sched, &consts, &domain, 32);
    assert!(demo.found);
    assert!(demo.samples.iter().any(|s| s.d_xa >= 25));
    assert!(demo.samples.iter().all(|s| s.full_below_bound));
    let elapsed = start.elapsed();
    println!(
        "criterion 08 PASS: single-step l1 pinned at 1 over {family} centers while the limit decays ({elapsed:?})"
    );
}

/// Criterion 9: both chain-metric inequalities hold on every corpus metric
/// and on the non-graph fixture (a tree metric scaled by 3, delta = 2);
/// delta = 0 rescaling is the identity.
#[test]
fn criterion_09_chain_metric_inequalities() {
    let corpus = corpus();
    let start = Instant::now();
    for space in &corpus.spaces {
        let delta = space.report.delta_use;
        let chain = chain_metric(&space.metric, delta).unwrap();
        let rep = verify_chain_inequalities(&space.metric, &chain, true).unwrap();
        assert!(rep.passed(), "{}: {:?}", space.name, rep.violations);
        assert!(rep.max_ratio <= (delta + 1) as f64 + 1e-12);
        assert!(rep.max_excess <= 1);
        // Identity rescaling at delta = 0: the chain graph is the graph.
        let chain0 = chain_metric(&space.metric, 0).unwrap();
        assert_eq!(&chain0.derived, &space.graph, "{}", space.name);
        println!(
            "  {}: chain inequalities over {} pairs",
            space.name, rep.pairs
        );
    }
    // Non-graph fixture: scale the radius-3 tree metric by 3, delta = 2.
    let base = regular_tree(3, 3);
    let m = MetricTable::from_graph(&base.graph).unwrap();
    let scaled = FiniteMetric::scaled(&m, 3).unwrap();
    assert!(!scaled.is_graph_realized());
    weakly_geodesic_check(&scaled, 2).unwrap();
    let chain = chain_metric(&scaled, 2).unwrap();
    let rep = verify_chain_inequalities(&scaled, &chain, false).unwrap();
    assert!(rep.weakly_geodesic_checked);
    assert!(rep.passed(), "scaled fixture: {:?}", rep.violations);
    for u in 0..scaled.n() as VertexId {
        for v in 0..scaled.n() as VertexId {
            let d = scaled.dist(u, v);
            let dp = chain.dprime.dist(u, v);
            assert!(d <= 3 * dp && dp <= d + 1);
        }
    }
    let elapsed = start.elapsed();
    println!("criterion 09 PASS: chain-metric inequalities exact ({elapsed:?})");
}

/// Criterion 10: the identification (x, y) -> (x, x^{-1} y) is a bijection
/// onto B(1, N) x B(1, R) on the F2 ball for R in {1, 2, 4}.
#[test]
fn criterion_10_pair_identification() {
    let corpus = corpus();
    let space = corpus
        .spaces
        .iter()
        .find(|s| s.name == "F2_ball_N4")
        .unwrap();
    let ball = free_group_ball(2, corpus.f2_inner_radius).unwrap();
    let start = Instant::now();
    for radius in [1u32, 2, 4] {
        let rep = pair_identification(&ball, &space.metric, radius).unwrap();
        assert!(
            rep.passed(),
            "R = {radius}: pairs {} expected {} failures {:?}",
            rep.pairs,
            rep.expected,
            rep.failures.first()
        );
        assert!(rep.equivariant_samples > 0);
        println!("  R = {radius}: {} pairs identified", rep.pairs);
    }
    let elapsed = start.elapsed();
    println!("criterion 10 PASS: pair identification bijective ({elapsed:?})");
}

/// Criterion 11: on the F2 ball of inner radius 5, growth rows satisfy
/// l1 >= 2 (D + 1 - 8 delta) for D >= 8 delta, the sphere-growth fit lands
/// within 10% of ln 3, and p_min = h / eps_dist is finite.
#[test]
fn criterion_11_growth_trend() {
    let ball = f2_n5();
    let start = Instant::now();
    let lazy = LazyMetric::new(&ball.graph);
    assert!(ball.graph.is_tree());
    let delta = 1u32;
    let sched = AnnulusSchedule::new(delta).unwrap();
    let c = local_finiteness_k(&ball.graph, 2 * delta);
    assert_eq!(c, 17);
    let consts = DecayConstants::derive(delta, c);
    let movers: Vec<Mover> = (1..=8u32)
        .map(|k| Mover::new(format!("a^{k}"), ball.generator_power(1, k).unwrap()))
        .collect();
    let domain = ball.safe_region(5).unwrap();
    let report = growth_report(
        &lazy,
        Some(&ball.graph),
        sched,
        &consts,
        0,
        &movers,
        &[1.0, 2.0, 4.0],
        &domain,
        2 * 5,
    )
    .unwrap();
    for row in &report.rows {
        assert_eq!(row.linf_reference, row.d);
        if row.d >= 8 * delta {
            let lower = 2.0 * (row.d as f64 + 1.0 - (8 * delta) as f64);
            assert!(
                row.l1 >= lower - 1e-9,
                "row {}: l1 {} below {lower}",
                row.label,
                row.l1
            );
            assert!(row.disjoint_count >= (row.d + 1 - 8 * delta) as u64);
        }
    }
    let ln3 = 3.0f64.ln();
    assert!(
        (report.sphere_growth_h - ln3).abs() / ln3 < 0.10,
        "fitted h = {} vs ln 3 = {ln3}",
        report.sphere_growth_h
    );
    assert!(report.p_min_estimate.is_finite() && report.p_min_estimate > 0.0);
    assert!(report.eta_hat.unwrap_or(0.0) > 0.0);
    let elapsed = start.elapsed();
    println!(
        "criterion 11 PASS: growth rows bounded, h = {:.4} (ln 3 = {ln3:.4}), p_min = {:.1} ({elapsed:?})",
        report.sphere_growth_h, report.p_min_estimate
    );
}

/// Every tabulated corpus metric satisfies the metric axioms and is
/// graph-realized (exhaustive scans on the spaces small enough to check).
#[test]
fn corpus_metrics_validate() {
    let corpus = corpus();
    let mut scanned = 0;
    for space in &corpus.spaces {
        if space.graph.n() <= 512 {
            space.metric.validate_against(&space.graph).unwrap();
            scanned += 1;
        }
    }
    assert!(scanned >= 5);
    println!("metric axioms PASS: {scanned} corpus tables validated exhaustively");
}

/// Robustness: the metric lemma suites stay clean one notch above the
/// computed constant (monotonicity in delta, confirmed empirically).
#[test]
fn lemma_suites_robust_at_delta_plus_one() {
    let corpus = corpus();
    for space in &corpus.spaces {
        if space.graph.n() > 100 {
            continue;
        }
        let delta = space.report.delta_use + 1;
        let bound = 4 * delta;
        let spread = sphere_spread_suite(&space.metric, delta, bound, &space.domain);
        assert!(spread.passed(), "{}: {:?}", space.name, spread.witnesses);
        let relay = geodesic_relay_suite(&space.metric, delta, bound, &space.domain);
        assert!(relay.passed(), "{}: {:?}", space.name, relay.witnesses);
        let pinch = center_pinch_suite(&space.metric, bound, &space.domain);
        assert!(pinch.passed(), "{}: {:?}", space.name, pinch.witnesses);
    }
    println!("robustness PASS: lemma suites clean at delta_use + 1");
}

/// Stationarity and conservation hold across the corpus families: applying
/// the projection once more leaves every limit unchanged, with total mass
/// exactly 1.
#[test]
fn flow_families_are_stationary() {
    let corpus = corpus();
    for space in &corpus.spaces {
        let family = space.family();
        let mut checked = 0;
        for &a in space.domain.iter().step_by(7) {
            let mut engine = CenterEngine::new(&space.metric, Some(&space.graph), space.sched, a);
            for &x in space.domain.iter().step_by(5) {
                let mu = family.get(a, x).unwrap();
                assert!(mu.total_mass().is_one());
                let stepped = engine.step_measure(mu).unwrap();
                assert_eq!(&stepped, mu, "{}: a={a} x={x}", space.name);
                checked += 1;
            }
        }
        assert!(checked > 0);
    }
    println!("stationarity PASS: T_a fixes every limit measure exactly");
}

/// The tree-cocycle closed form holds on every tree in the corpus, with
/// movers taken from the sampled automorphisms.
#[test]
fn tree_cocycle_closed_form_across_corpus_trees() {
    let corpus = corpus();
    let sched = AnnulusSchedule::new(1).unwrap();
    for space in &corpus.spaces {
        if !space.graph.is_tree() {
            continue;
        }
        let o = space.origin;
        let mut targets: Vec<VertexId> = space
            .total_autos
            .iter()
            .filter_map(|iso| iso.try_act(o))
            .filter(|&t| t != o)
            .collect();
        targets.sort_unstable();
        targets.dedup();
        targets.truncate(12);
        assert!(
            !targets.is_empty(),
            "{}: no moving automorphisms",
            space.name
        );
        for t in targets {
            let field = cocycle_field(&space.metric, Some(&space.graph), sched, MuKind::Tree, o, t)
                .unwrap();
            let d = space.metric.dist(o, t) as i64;
            assert_eq!(
                field.l1_norm_exact(),
                rational(2 * (d + 1)),
                "{}",
                space.name
            );
            for p in [2.0, 4.0, 8.0] {
                let want = 2.0 * ((d + 1) as f64).powf(1.0 / p);
                assert!((field.lp_norm(p) - want).abs() < 1e-12, "{}", space.name);
            }
        }
    }
    println!("tree closed form PASS: corpus trees match 2(D+1)^(1/p)");
}

/// The tree specialization agrees with the generic flow on disjointness
/// along geodesics, and satisfies the if-and-only-if of the tree picture.
#[test]
fn tree_mu_disjointness_iff_on_geodesic() {
    let corpus = corpus();
    let space = corpus.spaces.iter().find(|s| s.name == "P11").unwrap();
    let (x, xp) = (1u32, 9u32);
    let geod = hypflow::metric::eps_geod(&space.metric, x, xp, 0);
    for a in 0..space.graph.n() as VertexId {
        let tx = hypflow::flow::tree_mu(&space.metric, &space.graph, x, a).unwrap();
        let txp = hypflow::flow::tree_mu(&space.metric, &space.graph, xp, a).unwrap();
        let disjoint = !tx.supports_intersect(&txp);
        assert_eq!(
            disjoint,
            geod.contains(&a),
            "tree disjointness must match geodesic membership at a = {a}"
        );
        let l1 = l1_distance(&tx, &txp);
        if disjoint {
            assert_eq!(l1, rational(2));
        } else {
            assert!(l1.is_zero());
        }
    }
    println!("tree specialization PASS: disjoint iff on geodesic");
}
