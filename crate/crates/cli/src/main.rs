//! Command-line front end: build or import spaces, run the verification
//! battery, compute cocycle growth, and rescale metrics.
//!
//! Exit codes: 0 pass, 1 mathematical violation, 2 usage or input error,
//! 3 internal invariant breach. Output is byte-deterministic for a fixed
//! invocation: maps are sorted, floats carry 12 significant digits, and
//! `--jobs` changes only the wall clock.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use hypflow::cayley::free_group_ball;
use hypflow::cocycle::{growth_report, Mover};
use hypflow::doc::{parse_edge_list, GraphDoc, MetricDoc};
use hypflow::flow::{AnnulusSchedule, CenterEngine, DecayConstants};
use hypflow::graph::{FiniteGraph, VertexId};
use hypflow::hyperbolicity::report_for_graph;
use hypflow::isometry::Isometry;
use hypflow::metric::{ball, Metric, MetricTable};
use hypflow::report::{round_sig, run_battery, to_json_pretty, BatteryConfig};
use hypflow::rescale::{chain_metric, verify_chain_inequalities};

#[derive(Parser)]
#[command(
    name = "hypflow",
    version,
    about = "Measure flows and lp cocycles on hyperbolic graphs"
)]
struct Cli {
    /// Cap the worker thread count (default: all cores). Results do not
    /// depend on this.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the four-point hyperbolicity constant and derived constants.
    Delta(DeltaArgs),
    /// Generate a free-group Cayley ball document.
    CayleyBall(CayleyBallArgs),
    /// Emit the measures mu_x(a) for chosen bases and centers.
    Measures(MeasuresArgs),
    /// Run the full lemma and property battery.
    Verify(VerifyArgs),
    /// Cocycle growth report over a mover family.
    CocycleGrowth(CocycleGrowthArgs),
    /// Chain-metric rescaling of a general finite metric.
    Rescale(RescaleArgs),
}

#[derive(Args)]
struct DeltaArgs {
    /// Graph input: .json graph document or plain edge list.
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CayleyBallArgs {
    #[arg(long)]
    rank: u32,
    /// Inner radius N; the emitted graph is the ball of radius 2N.
    #[arg(long)]
    radius: u32,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct MeasuresArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Comma-separated base vertices x.
    #[arg(long)]
    base: String,
    /// Comma-separated center vertices a, or "all".
    #[arg(long, default_value = "all")]
    centers: String,
    /// Override the schedule delta (default: delta_use of the space).
    #[arg(long)]
    delta: Option<u32>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, conflicts_with = "metric")]
    graph: Option<PathBuf>,
    /// General metric document; verified through the rescale pipeline
    /// preconditions rather than the graph battery.
    #[arg(long)]
    metric: Option<PathBuf>,
    /// Override the hyperbolicity constant (fault injection / robustness).
    #[arg(long)]
    delta: Option<u32>,
    /// Restrict scans to the ball "v:r" (safe region of a truncated space).
    #[arg(long)]
    domain_ball: Option<String>,
    /// Deterministic seed for domain thinning.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Thin the scan domain to at most this many vertices (seeded).
    #[arg(long)]
    sample_domain: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CocycleGrowthArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, default_value_t = 0)]
    origin: VertexId,
    /// Comma-separated movers: "name^k" iterates a named automorphism of
    /// the document, "name" once, "v:ID" targets a vertex directly.
    #[arg(long)]
    movers: String,
    /// Comma-separated exponents for the lp norms.
    #[arg(long, default_value = "1,2,4")]
    p: String,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct RescaleArgs {
    #[arg(long)]
    metric: PathBuf,
    #[arg(long)]
    delta: u32,
    /// Output graph document for the derived chain graph.
    #[arg(long)]
    out: PathBuf,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }
    fn internal(message: impl Into<String>) -> Self {
        Failure {
            code: 3,
            message: message.into(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .is_err()
        {
            eprintln!("warning: thread pool already initialized; --jobs ignored");
        }
    }
    let result = match cli.command {
        Command::Delta(args) => cmd_delta(args),
        Command::CayleyBall(args) => cmd_cayley_ball(args),
        Command::Measures(args) => cmd_measures(args),
        Command::Verify(args) => cmd_verify(args),
        Command::CocycleGrowth(args) => cmd_cocycle_growth(args),
        Command::Rescale(args) => cmd_rescale(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn read_file(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))
}

fn write_output(path: Option<&Path>, content: &str) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, content)
            .map_err(|e| Failure::usage(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

/// Load a graph (+ named automorphisms) from a .json document or an edge
/// list.
fn load_graph(path: &Path) -> Result<(FiniteGraph, Vec<Isometry>), Failure> {
    let text = read_file(path)?;
    if path.extension().is_some_and(|e| e == "json") {
        let doc = GraphDoc::from_json(&text).map_err(|e| Failure::usage(e.to_string()))?;
        doc.build().map_err(|e| Failure::usage(e.to_string()))
    } else {
        Ok((
            parse_edge_list(&text).map_err(|e| Failure::usage(e.to_string()))?,
            Vec::new(),
        ))
    }
}

const TABLE_CAP: usize = 20_000;

fn table_for(graph: &FiniteGraph) -> Result<MetricTable, Failure> {
    if graph.n() > TABLE_CAP {
        return Err(Failure::usage(format!(
            "graph has {} vertices; dense verification is capped at {TABLE_CAP}",
            graph.n()
        )));
    }
    MetricTable::from_graph(graph).map_err(|e| Failure::internal(e.to_string()))
}

fn parse_vertex_list(s: &str, n: usize) -> Result<Vec<VertexId>, Failure> {
    let mut out = Vec::new();
    for tok in s.split(',') {
        let v: VertexId = tok
            .trim()
            .parse()
            .map_err(|_| Failure::usage(format!("bad vertex id {tok:?}")))?;
        if v as usize >= n {
            return Err(Failure::usage(format!("vertex {v} out of range (n = {n})")));
        }
        out.push(v);
    }
    Ok(out)
}

#[derive(Serialize)]
struct DeltaOutput {
    schema_version: u32,
    input: String,
    n: usize,
    delta_min: u32,
    witness: [VertexId; 4],
    delta_use: u32,
    k_1: u32,
    c: u32,
    eps_ann: Option<f64>,
}

fn cmd_delta(args: DeltaArgs) -> Result<u8, Failure> {
    let (graph, _) = load_graph(&args.graph)?;
    let metric = table_for(&graph)?;
    let report = report_for_graph(&graph, &metric);
    let out = DeltaOutput {
        schema_version: hypflow::doc::SCHEMA_VERSION,
        input: args.graph.display().to_string(),
        n: graph.n(),
        delta_min: report.delta_min,
        witness: report.witness,
        delta_use: report.delta_use,
        k_1: report.k_sphere,
        c: report.c_support,
        eps_ann: report
            .eps_ann
            .is_finite()
            .then(|| round_sig(report.eps_ann)),
    };
    write_output(args.out.as_deref(), &to_json_pretty(&out))?;
    Ok(0)
}

fn cmd_cayley_ball(args: CayleyBallArgs) -> Result<u8, Failure> {
    let ball =
        free_group_ball(args.rank, args.radius).map_err(|e| Failure::usage(e.to_string()))?;
    let mut translations = Vec::new();
    for g in 1..=args.rank as i8 {
        translations.push(ball.translation(&[g]));
        translations.push(ball.translation(&[-g]));
    }
    let doc = GraphDoc::new(&ball.graph)
        .with_labels(ball.labels().to_vec())
        .with_automorphisms(&translations);
    write_output(Some(&args.out), &doc.to_json())?;
    Ok(0)
}

#[derive(Serialize)]
struct AtomOutput {
    v: VertexId,
    num: String,
    den: String,
}

#[derive(Serialize)]
struct MeasureRow {
    x: VertexId,
    a: VertexId,
    atoms: Vec<AtomOutput>,
}

#[derive(Serialize)]
struct MeasuresOutput {
    schema_version: u32,
    input: String,
    delta: u32,
    rows: Vec<MeasureRow>,
}

fn cmd_measures(args: MeasuresArgs) -> Result<u8, Failure> {
    let (graph, _) = load_graph(&args.graph)?;
    let metric = table_for(&graph)?;
    let delta = match args.delta {
        Some(d) if d >= 1 => d,
        Some(_) => return Err(Failure::usage("delta must be at least 1")),
        None => report_for_graph(&graph, &metric).delta_use,
    };
    let sched = AnnulusSchedule::new(delta).map_err(|e| Failure::usage(e.to_string()))?;
    let bases = parse_vertex_list(&args.base, graph.n())?;
    let centers: Vec<VertexId> = if args.centers == "all" {
        (0..graph.n() as VertexId).collect()
    } else {
        parse_vertex_list(&args.centers, graph.n())?
    };
    let mut rows = Vec::new();
    for &a in &centers {
        let mut engine = CenterEngine::new(&metric, Some(&graph), sched, a);
        for &x in &bases {
            let mu = engine.mu(x).map_err(|e| Failure::internal(e.to_string()))?;
            rows.push(MeasureRow {
                x,
                a,
                atoms: mu
                    .atoms()
                    .map(|(v, mass)| AtomOutput {
                        v,
                        num: mass.numer().to_string(),
                        den: mass.denom().to_string(),
                    })
                    .collect(),
            });
        }
    }
    rows.sort_by_key(|r| (r.x, r.a));
    let out = MeasuresOutput {
        schema_version: hypflow::doc::SCHEMA_VERSION,
        input: args.graph.display().to_string(),
        delta,
        rows,
    };
    write_output(args.out.as_deref(), &to_json_pretty(&out))?;
    Ok(0)
}

fn cmd_verify(args: VerifyArgs) -> Result<u8, Failure> {
    if let Some(metric_path) = &args.metric {
        return cmd_verify_metric(&args, metric_path);
    }
    let Some(graph_path) = &args.graph else {
        return Err(Failure::usage("verify needs --graph or --metric"));
    };
    let (graph, autos) = load_graph(graph_path)?;
    let metric = table_for(&graph)?;
    let mut domain: Vec<VertexId> = match &args.domain_ball {
        None => (0..graph.n() as VertexId).collect(),
        Some(spec) => {
            let (v, r) = spec
                .split_once(':')
                .ok_or_else(|| Failure::usage("expected --domain-ball v:r"))?;
            let v: VertexId = v
                .parse()
                .map_err(|_| Failure::usage("bad vertex in --domain-ball"))?;
            let r: u32 = r
                .parse()
                .map_err(|_| Failure::usage("bad radius in --domain-ball"))?;
            if v as usize >= graph.n() {
                return Err(Failure::usage(format!("vertex {v} out of range")));
            }
            ball(&metric, v, r)
        }
    };
    if let Some(cap) = args.sample_domain {
        domain = thin_domain(domain, cap, args.seed);
    }
    let (total, partial): (Vec<Isometry>, Vec<Isometry>) =
        autos.into_iter().partition(|iso| iso.is_total());
    let config = BatteryConfig {
        domain: Some(domain),
        delta_override: args.delta,
        total_autos: &total,
        partial_autos: &partial,
    };
    let battery =
        run_battery(&graph, &metric, &config).map_err(|e| Failure::internal(e.to_string()))?;
    let passed = battery.passed;
    let output = VerifyOutput {
        config: VerifyConfigEcho {
            input: graph_path.display().to_string(),
            delta_override: args.delta,
            domain_ball: args.domain_ball.clone(),
            seed: args.seed,
            sample_domain: args.sample_domain,
        },
        report: &battery,
    };
    write_output(args.out.as_deref(), &to_json_pretty(&output))?;
    Ok(if passed { 0 } else { 1 })
}

/// Everything needed to reproduce a verify run, echoed into its output.
#[derive(Serialize)]
struct VerifyConfigEcho {
    input: String,
    delta_override: Option<u32>,
    domain_ball: Option<String>,
    seed: u64,
    sample_domain: Option<usize>,
}

#[derive(Serialize)]
struct VerifyOutput<'a> {
    config: VerifyConfigEcho,
    #[serde(flatten)]
    report: &'a hypflow::report::VerifyBattery,
}

/// Deterministic domain thinning from the run seed.
fn thin_domain(mut domain: Vec<VertexId>, cap: usize, seed: u64) -> Vec<VertexId> {
    if domain.len() <= cap {
        return domain;
    }
    let mut state = seed;
    let mut next = move || {
        state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    };
    for i in (1..domain.len()).rev() {
        let j = (next() % (i as u64 + 1)) as usize;
        domain.swap(i, j);
    }
    domain.truncate(cap);
    domain.sort_unstable();
    domain
}

#[derive(Serialize)]
struct MetricVerifyOutput {
    schema_version: u32,
    input: String,
    delta: u32,
    points: usize,
    weakly_geodesic: bool,
    graph_realized: bool,
    chain_lower_ok: Option<bool>,
    chain_upper_ok: Option<bool>,
    passed: bool,
}

fn cmd_verify_metric(args: &VerifyArgs, path: &Path) -> Result<u8, Failure> {
    let delta = args
        .delta
        .ok_or_else(|| Failure::usage("--metric verification needs an explicit --delta"))?;
    let doc = MetricDoc::from_json(&read_file(path)?).map_err(|e| Failure::usage(e.to_string()))?;
    let metric = doc.build().map_err(|e| Failure::usage(e.to_string()))?;
    let weakly = hypflow::hyperbolicity::weakly_geodesic_check(&metric, delta).is_ok();
    let realized = metric.is_graph_realized();
    let (lower, upper) = if weakly {
        match chain_metric(&metric, delta) {
            Ok(chain) => match verify_chain_inequalities(&metric, &chain, realized) {
                Ok(rep) => (Some(rep.lower_ok), Some(rep.upper_ok)),
                Err(_) => (Some(false), Some(false)),
            },
            Err(_) => (Some(false), Some(false)),
        }
    } else {
        (None, None)
    };
    let passed = weakly && lower == Some(true) && upper == Some(true);
    let out = MetricVerifyOutput {
        schema_version: hypflow::doc::SCHEMA_VERSION,
        input: path.display().to_string(),
        delta,
        points: metric.n(),
        weakly_geodesic: weakly,
        graph_realized: realized,
        chain_lower_ok: lower,
        chain_upper_ok: upper,
        passed,
    };
    write_output(args.out.as_deref(), &to_json_pretty(&out))?;
    Ok(if passed { 0 } else { 1 })
}

fn parse_movers(
    spec: &str,
    isos: &[Isometry],
    origin: VertexId,
    n: usize,
) -> Result<Vec<Mover>, Failure> {
    let mut movers = Vec::new();
    for tok in spec.split(',') {
        let tok = tok.trim();
        if let Some(id) = tok.strip_prefix("v:") {
            let target: VertexId = id
                .parse()
                .map_err(|_| Failure::usage(format!("bad mover vertex {id:?}")))?;
            if target as usize >= n {
                return Err(Failure::usage(format!(
                    "mover vertex {target} out of range"
                )));
            }
            movers.push(Mover::new(tok, target));
            continue;
        }
        let (name, power) = match tok.split_once('^') {
            Some((name, k)) => (
                name,
                k.parse::<u32>()
                    .map_err(|_| Failure::usage(format!("bad mover power in {tok:?}")))?,
            ),
            None => (tok, 1),
        };
        let iso = isos
            .iter()
            .find(|i| i.name() == name)
            .ok_or_else(|| Failure::usage(format!("unknown automorphism {name:?}")))?;
        let mut target = origin;
        for _ in 0..power {
            target = iso.try_act(target).ok_or_else(|| {
                Failure::usage(format!(
                    "mover {tok} leaves the safe region (origin {origin})"
                ))
            })?;
        }
        movers.push(Mover::new(tok, target));
    }
    Ok(movers)
}

fn cmd_cocycle_growth(args: CocycleGrowthArgs) -> Result<u8, Failure> {
    let (graph, isos) = load_graph(&args.graph)?;
    let metric = table_for(&graph)?;
    if args.origin as usize >= graph.n() {
        return Err(Failure::usage(format!(
            "origin {} out of range",
            args.origin
        )));
    }
    let ps: Vec<f64> = args
        .p
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .ok()
                .filter(|&p| p >= 1.0)
                .ok_or_else(|| Failure::usage(format!("bad exponent {s:?}")))
        })
        .collect::<Result<_, _>>()?;
    let movers = parse_movers(&args.movers, &isos, args.origin, graph.n())?;
    let hyp = report_for_graph(&graph, &metric);
    let sched =
        AnnulusSchedule::new(hyp.delta_use).map_err(|e| Failure::internal(e.to_string()))?;
    let consts = DecayConstants::derive(hyp.delta_use, hyp.c_support);
    let domain: Vec<VertexId> = (0..graph.n() as VertexId).collect();
    let ecc = {
        let row = metric.row(args.origin);
        row.iter().map(|&d| d as u32).max().unwrap_or(0)
    };
    let report = growth_report(
        &metric,
        Some(&graph),
        sched,
        &consts,
        args.origin,
        &movers,
        &ps,
        &domain,
        ecc,
    )
    .map_err(|e| Failure::internal(e.to_string()))?;
    let output = GrowthOutput {
        config: GrowthConfigEcho {
            input: args.graph.display().to_string(),
            origin: args.origin,
            movers: args.movers.clone(),
            p: args.p.clone(),
        },
        report: &report,
    };
    write_output(args.out.as_deref(), &to_json_pretty(&output))?;
    if let Some(csv_path) = &args.csv {
        let mut csv = String::new();
        let p_cols: Vec<String> = ps.iter().map(|p| format!("l{p}")).collect();
        csv.push_str(&format!("label,D,{},disjoint_count\n", p_cols.join(",")));
        for row in &report.rows {
            let norms: Vec<String> = row.lp_norms.iter().map(|x| x.to_string()).collect();
            csv.push_str(&format!(
                "{},{},{},{}\n",
                row.label,
                row.d,
                norms.join(","),
                row.disjoint_count
            ));
        }
        std::fs::write(csv_path, csv)
            .map_err(|e| Failure::usage(format!("cannot write {}: {e}", csv_path.display())))?;
    }
    Ok(0)
}

#[derive(Serialize)]
struct GrowthConfigEcho {
    input: String,
    origin: VertexId,
    movers: String,
    p: String,
}

#[derive(Serialize)]
struct GrowthOutput<'a> {
    config: GrowthConfigEcho,
    #[serde(flatten)]
    report: &'a hypflow::cocycle::GrowthReport,
}

fn cmd_rescale(args: RescaleArgs) -> Result<u8, Failure> {
    let doc = MetricDoc::from_json(&read_file(&args.metric)?)
        .map_err(|e| Failure::usage(e.to_string()))?;
    let metric = doc.build().map_err(|e| Failure::usage(e.to_string()))?;
    let chain = chain_metric(&metric, args.delta).map_err(|e| Failure::usage(e.to_string()))?;
    let realized = metric.is_graph_realized();
    let report = verify_chain_inequalities(&metric, &chain, realized)
        .map_err(|e| Failure::usage(e.to_string()))?;
    let doc = GraphDoc::new(&chain.derived);
    write_output(Some(&args.out), &doc.to_json())?;
    if !report.passed() {
        eprintln!(
            "rescale: quasi-isometry inequalities violated on {} pairs",
            report.violations.len()
        );
        return Ok(1);
    }
    Ok(0)
}
