//! `supanova`: fragmentation, consistency diagnostics, adaptive runs and
//! verification suites from the command line.
//!
//! Exit codes: 0 success, 1 usage, 2 input error, 3 evaluator failure,
//! 4 verification failure.

mod config;
mod parse;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use supanova::adaptive::{AdaptiveRun, GridEvaluator, IterationRecord, Strategy};
use supanova::cost::{cost_of_method, sizes_for_centers, CostParams, Method, SurrogateConfig, SystemSizes};
use supanova::expansions::n_body_ideal;
use supanova::graph::{diagnose_conn_consistency, ForbiddenSubgraph, is_convex_subset, GraphPoset, InteractionGraph};
use supanova::poset::{combination_coefficients, GridElement, OrderIdeal};
use supanova::potentials::{ExternalEvaluator, Ledger, SyntheticEvaluator};
use supanova::verify;

use config::{fragment_geometry, fragment_graph, read_geometry, EvaluatorKind, GraphMode, RunConfig, SubsetAxis};
use parse::{parse_element, parse_grid};

#[derive(Parser)]
#[command(name = "supanova", version, about = "Möbius-inversion expansions over poset grids")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fragment a structure and write the fragment-level graph.
    Fragment(FragmentArgs),
    /// Check whether conn[G] and M_g[G] are closed under intersection.
    CheckConsistency(ConsistencyArgs),
    /// Run adaptive refinement from a TOML configuration.
    Adapt(AdaptArgs),
    /// Combination coefficients of an ideal.
    Coeffs(CoeffsArgs),
    /// Möbius function values on a grid.
    Moebius(MoebiusArgs),
    /// Abstract cost estimates for each method.
    Cost(CostArgs),
    /// Run the brute-force property suites.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Args)]
struct FragmentArgs {
    /// XYZ file with a BONDS block.
    structure: PathBuf,
    /// `heuristic`, `singleton`, or a fragmentation file.
    #[arg(long, default_value = "heuristic")]
    mode: String,
    #[arg(long, value_enum, default_value = "bonds")]
    graph_mode: GraphModeArg,
    #[arg(long)]
    r_cut: Option<f64>,
    /// Where to write the fragmentation (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Where to write the fragment graph as an edge list.
    #[arg(long)]
    graph_out: Option<PathBuf>,
    /// Print a JSON summary instead of the fragmentation text.
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum GraphModeArg {
    Bonds,
    Threshold,
}

#[derive(Args)]
struct ConsistencyArgs {
    /// Edge-list file (1-based `i j` lines).
    graph: PathBuf,
    #[arg(long)]
    vertices: Option<u32>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Also write the JSON report here.
    #[arg(long)]
    json_out: Option<PathBuf>,
}

#[derive(Args)]
struct AdaptArgs {
    /// TOML run configuration; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// best, all or threshold:α
    #[arg(long)]
    strategy: Option<String>,
    #[arg(long)]
    cost_budget: Option<f64>,
    #[arg(long)]
    error_threshold: Option<f64>,
    #[arg(long)]
    max_iterations: Option<usize>,
    #[arg(long)]
    wall_clock_limit: Option<f64>,
    #[arg(long)]
    concurrency: Option<usize>,
    /// Seed of the synthetic evaluator.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    methods: Option<u32>,
    #[arg(long)]
    bases: Option<u32>,
    /// boolean, conn, convex or simplex
    #[arg(long)]
    subsets: Option<String>,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    jsonl: Option<PathBuf>,
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args)]
struct CoeffsArgs {
    /// Grid such as `B5` or `convex x [2] x [2]`.
    #[arg(long)]
    grid: String,
    /// Edge list for graph axes.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Generators of the ideal, e.g. `{1,2}` or `({1},2)`.
    #[arg(long, num_args = 1..)]
    generators: Vec<String>,
    /// Use the n-body ideal of a Boolean grid instead of generators.
    #[arg(long)]
    n_body: Option<u32>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct MoebiusArgs {
    #[arg(long)]
    grid: String,
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Lower element.
    s: String,
    /// Upper element; with only one element given, prints μ(q, s) for all q ≤ s.
    t: Option<String>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args)]
struct CostArgs {
    #[arg(long)]
    n_ao: Option<u64>,
    #[arg(long)]
    n_occ: Option<u64>,
    #[arg(long)]
    n_corr: Option<u64>,
    #[arg(long)]
    n_virt: Option<u64>,
    #[arg(long)]
    n_eri: Option<u64>,
    /// Estimate sizes for every atom of this XYZ file instead.
    #[arg(long)]
    structure: Option<PathBuf>,
    /// Basis level for the size surrogate.
    #[arg(long, default_value_t = 1)]
    basis: u32,
    /// Highest method index to report.
    #[arg(long, default_value_t = 4)]
    max_method: u32,
    #[arg(long)]
    n_hf_iter: Option<u32>,
    #[arg(long)]
    n_cc_iter: Option<u32>,
    #[arg(long)]
    f_eri: Option<f64>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Suites to run (default: all).
    #[arg(long)]
    suite: Vec<String>,
    #[arg(long, default_value_t = 2024)]
    seed: u64,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

/// A failure with the exit code it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl Failure {
    fn input(error: impl Into<anyhow::Error>) -> Self {
        Failure { code: 2, error: error.into() }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        let code = match error.chain().find_map(|e| e.downcast_ref::<supanova::Error>()) {
            Some(supanova::Error::Evaluation { .. }) => 3,
            _ => 2,
        };
        Failure { code, error }
    }
}

impl From<supanova::Error> for Failure {
    fn from(e: supanova::Error) -> Self {
        anyhow::Error::from(e).into()
    }
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let result = match cli.command {
        Command::Fragment(a) => cmd_fragment(a),
        Command::CheckConsistency(a) => cmd_check_consistency(a),
        Command::Adapt(a) => cmd_adapt(a),
        Command::Coeffs(a) => cmd_coeffs(a),
        Command::Moebius(a) => cmd_moebius(a),
        Command::Cost(a) => cmd_cost(a),
        Command::Verify(a) => cmd_verify(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn write_text(path: Option<&Path>, text: &str) -> CmdResult {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes()).context("writing to stdout")?;
        }
    }
    Ok(())
}

fn to_json<T: Serialize>(value: &T) -> Result<String, Failure> {
    Ok(serde_json::to_string_pretty(value).context("encoding JSON")? + "\n")
}

fn edge_list(g: &InteractionGraph, comment: &str) -> String {
    let mut s = format!("# {comment}\n# vertices {}\n", g.vertex_count());
    for (i, j) in g.edges() {
        s.push_str(&format!("{} {}\n", i + 1, j + 1));
    }
    s
}

fn read_graph(path: &Path, vertices: Option<u32>) -> Result<InteractionGraph, Failure> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(InteractionGraph::parse_edge_list(&text, vertices).with_context(|| format!("parsing {}", path.display()))?)
}

fn cmd_fragment(a: FragmentArgs) -> CmdResult {
    let geometry = read_geometry(&a.structure)?;
    let frag = fragment_geometry(&geometry, &a.mode)?.canonical();
    let mode = match a.graph_mode {
        GraphModeArg::Bonds => GraphMode::Bonds,
        GraphModeArg::Threshold => GraphMode::Threshold,
    };
    let graph = fragment_graph(&geometry, &frag, mode, a.r_cut)?;
    if let Some(p) = &a.graph_out {
        write_text(Some(p), &edge_list(&graph, "fragment graph"))?;
    }
    if a.json {
        let fragments: Vec<Vec<u32>> = frag.fragments().iter().map(|f| f.iter().map(|v| v + 1).collect()).collect();
        let summary = json!({
            "atoms": geometry.len(),
            "fragment_count": frag.len(),
            "fragments": fragments,
            "edges": graph.edges().iter().map(|(i, j)| [i + 1, j + 1]).collect::<Vec<_>>(),
        });
        if let Some(p) = &a.out {
            write_text(Some(p), &frag.to_text())?;
        }
        write_text(None, &to_json(&summary)?)
    } else {
        write_text(a.out.as_deref(), &frag.to_text())
    }
}

fn finding_kind(f: &ForbiddenSubgraph) -> &'static str {
    match f {
        ForbiddenSubgraph::ChordlessCycle { .. } => "chordless_cycle",
        ForbiddenSubgraph::Diamond { .. } => "diamond",
    }
}

/// One-line description with 1-based labels.
fn describe(f: &ForbiddenSubgraph) -> String {
    let label = |v: &u32| (v + 1).to_string();
    match f {
        ForbiddenSubgraph::ChordlessCycle { cycle } => {
            format!("chordless {}-cycle {}", cycle.len(), cycle.iter().map(label).collect::<Vec<_>>().join("-"))
        }
        ForbiddenSubgraph::Diamond { vertices, chord } => format!(
            "4-cycle with one chord {} (chord {}-{})",
            vertices.iter().map(label).collect::<Vec<_>>().join("-"),
            chord.0 + 1,
            chord.1 + 1
        ),
    }
}

#[derive(Serialize)]
struct ConvexCheck {
    element_count: usize,
    closed_under_intersection: bool,
    witness: Option<(String, String)>,
}

/// Pairwise intersections of geodesically convex sets, checked directly.
fn convex_closure(g: &InteractionGraph) -> Result<ConvexCheck, Failure> {
    let poset = GraphPoset::convex(g.clone());
    let sets = poset.elements()?;
    for (k, a) in sets.iter().enumerate() {
        for b in &sets[k + 1..] {
            let m = a.intersection(b);
            if !m.is_empty() && !is_convex_subset(poset.oracle(), &m)? {
                return Ok(ConvexCheck {
                    element_count: sets.len(),
                    closed_under_intersection: false,
                    witness: Some((a.to_string(), b.to_string())),
                });
            }
        }
    }
    Ok(ConvexCheck { element_count: sets.len(), closed_under_intersection: true, witness: None })
}

fn cmd_check_consistency(a: ConsistencyArgs) -> CmdResult {
    let g = read_graph(&a.graph, a.vertices)?;
    let conn = diagnose_conn_consistency(&g);
    let convex = convex_closure(&g)?;
    let findings: Vec<serde_json::Value> = conn
        .findings
        .iter()
        .map(|f| {
            let (x, y) = f.witness();
            json!({
                "kind": finding_kind(f),
                "description": describe(f),
                "vertices": f.vertex_set().to_string(),
                "witness": [x.to_string(), y.to_string()],
            })
        })
        .collect();
    let report = json!({
        "vertices": g.vertex_count(),
        "edges": g.edge_count(),
        "conn": {
            "consistent": conn.consistent,
            "exhaustive_consistent": conn.exhaustive_consistent,
            "cross_validated": conn.cross_validated(),
            "truncated": conn.truncated,
            "findings": findings,
            "witness": conn.witness.as_ref().map(|(x, y)| [x.to_string(), y.to_string(), x.intersection(y).to_string()]),
        },
        "convex": convex,
    });
    let json_text = to_json(&report)?;
    if let Some(p) = &a.json_out {
        write_text(Some(p), &json_text)?;
    }
    match a.format {
        Format::Json => write_text(None, &json_text),
        _ => {
            let mut s = format!("graph: {} vertices, {} edges\n", g.vertex_count(), g.edge_count());
            let verdict = |ok: bool| if ok { "consistent" } else { "inconsistent" };
            s.push_str(&format!("conn[G]: {}\n", verdict(conn.consistent)));
            for f in &conn.findings {
                s.push_str(&format!("  {}\n", describe(f)));
            }
            if let Some((x, y)) = &conn.witness {
                s.push_str(&format!("  {x} ∩ {y} = {} is not connected\n", x.intersection(y)));
            }
            if let Some(e) = conn.exhaustive_consistent {
                s.push_str(&format!("  exhaustive check: {}\n", verdict(e)));
            }
            s.push_str(&format!(
                "M_g[G]: {} ({} sets)\n",
                verdict(convex.closed_under_intersection),
                convex.element_count
            ));
            write_text(None, &s)
        }
    }
}

#[derive(Serialize)]
struct RunSummary {
    termination: supanova::adaptive::Termination,
    iterations: usize,
    ideal_size: usize,
    #[serde(rename = "S")]
    s: f64,
    #[serde(rename = "E_ind")]
    e_ind: f64,
    cost: f64,
    #[serde(rename = "dS")]
    ds: f64,
    grid: String,
    antichain: Vec<String>,
    failed: Vec<String>,
    /// Synthetic runs only: the value of the full expansion.
    target: Option<f64>,
    abs_error: Option<f64>,
}

fn apply_overrides(cfg: &mut RunConfig, a: &AdaptArgs) -> Result<(), Failure> {
    if let Some(s) = &a.strategy {
        cfg.adaptive.strategy = s.parse::<Strategy>()?;
    }
    if a.cost_budget.is_some() {
        cfg.adaptive.cost_budget = a.cost_budget;
    }
    if a.error_threshold.is_some() {
        cfg.adaptive.error_threshold = a.error_threshold;
    }
    if a.max_iterations.is_some() {
        cfg.adaptive.max_iterations = a.max_iterations;
    }
    if a.wall_clock_limit.is_some() {
        cfg.adaptive.wall_clock_limit = a.wall_clock_limit;
    }
    if let Some(c) = a.concurrency {
        cfg.adaptive.concurrency = c;
    }
    if let Some(s) = a.seed {
        cfg.evaluator.synthetic.seed = s;
    }
    if let Some(m) = a.methods {
        cfg.grid.methods = m;
    }
    if let Some(b) = a.bases {
        cfg.grid.bases = b;
    }
    if let Some(s) = &a.subsets {
        cfg.grid.subsets = match s.as_str() {
            "boolean" => SubsetAxis::Boolean,
            "conn" => SubsetAxis::Conn,
            "convex" => SubsetAxis::Convex,
            "simplex" => SubsetAxis::Simplex,
            other => return Err(Failure::input(anyhow!("unknown subset axis {other:?}"))),
        };
    }
    for (slot, flag) in [(&mut cfg.output.csv, &a.csv), (&mut cfg.output.jsonl, &a.jsonl), (&mut cfg.output.summary, &a.summary)] {
        if flag.is_some() {
            slot.clone_from(flag);
        }
    }
    Ok(())
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(io::stdout()),
    })
}

fn cmd_adapt(a: AdaptArgs) -> CmdResult {
    let mut cfg = match &a.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    apply_overrides(&mut cfg, &a)?;
    cfg.adaptive.validate()?;

    let (graph, molecule) = match &cfg.structure {
        Some(s) => {
            let m = s.load()?;
            let g = fragment_graph(&m.geometry, &m.fragmentation, cfg.graph.mode, cfg.graph.r_cut)?;
            (g, Some(m))
        }
        None => (cfg.graph.standalone(cfg.evaluator.synthetic.vertex_count)?, None),
    };
    let grid = cfg.grid.build(&graph)?;

    let mut target = None;
    let evaluator: Box<dyn GridEvaluator> = match cfg.evaluator.kind {
        EvaluatorKind::Synthetic => {
            let mut p = cfg.evaluator.synthetic.clone();
            p.vertex_count = graph.vertex_count();
            p.method_levels = cfg.grid.methods;
            p.basis_levels = cfg.grid.bases;
            if p.graph.is_none() {
                p.graph = Some(graph.edges());
            }
            let ev = SyntheticEvaluator::new(p)?;
            target = Some(ev.target_value());
            Box::new(ev)
        }
        EvaluatorKind::External => {
            let m = molecule.ok_or_else(|| Failure::input(anyhow!("the external evaluator needs a [structure] section")))?;
            let ledger = match &cfg.evaluator.ledger {
                Some(p) => Ledger::open(p)?,
                None => Ledger::in_memory(),
            };
            let ev = ExternalEvaluator::new(cfg.evaluator.external.clone(), m.geometry, m.fragmentation, Arc::new(ledger))?
                .with_radii(m.radii)
                .with_surrogate(m.surrogate)
                .with_cost_params(cfg.evaluator.synthetic.cost);
            Box::new(ev)
        }
    };

    let mut csv_out = csv::WriterBuilder::new().from_writer(open_output(cfg.output.csv.as_deref())?);
    let mut jsonl_out = match &cfg.output.jsonl {
        Some(p) => Some(open_output(Some(p))?),
        None => None,
    };
    let mut io_error: Option<anyhow::Error> = None;
    let mut record = |r: &IterationRecord| {
        if io_error.is_some() {
            return;
        }
        let mut go = || -> anyhow::Result<()> {
            csv_out.serialize(r)?;
            csv_out.flush()?;
            if let Some(w) = jsonl_out.as_mut() {
                writeln!(w, "{}", serde_json::to_string(r)?)?;
            }
            Ok(())
        };
        if let Err(e) = go() {
            io_error = Some(e.context("writing iteration output"));
        }
    };
    let report = AdaptiveRun::new(&grid, &*evaluator, cfg.adaptive.clone())?.run_with(&mut record)?;
    drop(record);
    if let Some(e) = io_error {
        return Err(Failure::input(e));
    }
    if let Some(w) = jsonl_out.as_mut() {
        w.flush().context("writing JSON lines")?;
    }

    let last = report.last();
    let summary = RunSummary {
        termination: report.termination,
        iterations: report.history.len(),
        ideal_size: report.ideal_size,
        s: last.s,
        e_ind: last.e_ind,
        cost: last.cost,
        ds: last.ds,
        grid: grid.name(),
        antichain: report.antichain.iter().map(GridElement::to_string).collect(),
        failed: report.failed.iter().map(GridElement::to_string).collect(),
        target,
        abs_error: target.map(|t| (last.s - t).abs()),
    };
    let text = to_json(&summary)?;
    match &cfg.output.summary {
        Some(p) => write_text(Some(p), &text)?,
        None => eprint!("{text}"),
    }
    Ok(())
}

fn optional_graph(path: &Option<PathBuf>) -> Result<Option<InteractionGraph>, Failure> {
    path.as_deref().map(|p| read_graph(p, None)).transpose()
}

fn cmd_coeffs(a: CoeffsArgs) -> CmdResult {
    let graph = optional_graph(&a.graph)?;
    let grid = parse_grid(&a.grid, graph.as_ref())?;
    let ideal = match a.n_body {
        Some(n) => {
            let m = match grid.axes() {
                [supanova::poset::PosetAxis::Boolean(m)] => *m,
                _ => return Err(Failure::input(anyhow!("--n-body needs a single Boolean axis"))),
            };
            n_body_ideal(m, n)?.1
        }
        None => {
            if a.generators.is_empty() {
                return Err(Failure::input(anyhow!("give --generators or --n-body")));
            }
            let gens = a.generators.iter().map(|g| parse_element(g, &grid)).collect::<anyhow::Result<Vec<_>>>()?;
            OrderIdeal::generated_by(&grid, gens)?
        }
    };
    let d = combination_coefficients(&grid, &ideal)?;
    match a.format {
        Format::Json => {
            let coeffs: Vec<_> = d.iter().map(|(p, c)| json!({"element": p.to_string(), "coefficient": c})).collect();
            let antichain: Vec<String> = ideal.antichain().iter().map(GridElement::to_string).collect();
            write_text(
                None,
                &to_json(&json!({
                    "grid": grid.name(),
                    "ideal_size": ideal.len(),
                    "antichain": antichain,
                    "coefficients": coeffs,
                }))?,
            )
        }
        _ => {
            let mut w = csv::Writer::from_writer(io::stdout());
            w.write_record(["element", "coefficient"]).context("writing CSV")?;
            for (p, c) in d.iter() {
                w.write_record([p.to_string(), c.to_string()]).context("writing CSV")?;
            }
            w.flush().context("writing CSV")?;
            Ok(())
        }
    }
}

fn cmd_moebius(a: MoebiusArgs) -> CmdResult {
    let graph = optional_graph(&a.graph)?;
    let grid = parse_grid(&a.grid, graph.as_ref())?;
    let s = parse_element(&a.s, &grid)?;
    let rows: Vec<(GridElement, GridElement, i64)> = match &a.t {
        Some(t) => {
            let t = parse_element(t, &grid)?;
            let mu = grid.moebius(&s, &t)?;
            vec![(s, t, mu)]
        }
        None => grid.moebius_tensor(&s)?.iter().map(|(q, mu)| (q.clone(), s.clone(), mu)).collect(),
    };
    match a.format {
        Format::Csv | Format::Text => {
            let mut w = csv::Writer::from_writer(io::stdout());
            w.write_record(["s", "t", "mu"]).context("writing CSV")?;
            for (x, y, mu) in &rows {
                w.write_record([x.to_string(), y.to_string(), mu.to_string()]).context("writing CSV")?;
            }
            w.flush().context("writing CSV")?;
            Ok(())
        }
        Format::Json => {
            let values: Vec<_> =
                rows.iter().map(|(x, y, mu)| json!({"s": x.to_string(), "t": y.to_string(), "mu": mu})).collect();
            let body = if values.len() == 1 && a.t.is_some() { values[0].clone() } else { json!(values) };
            write_text(None, &to_json(&body)?)
        }
    }
}

fn cmd_cost(a: CostArgs) -> CmdResult {
    let mut params = CostParams::default();
    if let Some(v) = a.n_hf_iter {
        params.n_hf_iter = v;
    }
    if let Some(v) = a.n_cc_iter {
        params.n_cc_iter = v;
    }
    if let Some(v) = a.f_eri {
        params.f_eri = v;
    }
    params.validate()?;
    let sizes = if let Some(p) = &a.structure {
        let g = read_geometry(p)?;
        let centers: Vec<(u32, [f64; 3])> = g.atoms().iter().map(|x| (x.z, x.position)).collect();
        Some(sizes_for_centers(&centers, a.basis, &SurrogateConfig::default())?)
    } else {
        match (a.n_ao, a.n_occ, a.n_corr, a.n_virt, a.n_eri) {
            (None, None, None, None, None) => None,
            (Some(n_ao), Some(n_occ), Some(n_corr), Some(n_virt), Some(n_eri)) => {
                Some(SystemSizes { n_ao, n_occ, n_corr, n_virt, n_eri })
            }
            _ => return Err(Failure::input(anyhow!("give all of --n-ao --n-occ --n-corr --n-virt --n-eri"))),
        }
    };
    let mut methods = Vec::new();
    if let Some(s) = &sizes {
        for m in 1..=a.max_method {
            let name = Method::from_index(m)?.name();
            methods.push(json!({"index": m, "method": name, "cost": cost_of_method(&params, m, s)?}));
        }
    }
    write_text(None, &to_json(&json!({"params": params, "sizes": sizes, "methods": methods}))?)
}

fn cmd_verify(a: VerifyArgs) -> CmdResult {
    let names: Vec<String> = if a.suite.is_empty() {
        verify::suite_names().into_iter().map(str::to_string).collect()
    } else {
        a.suite.clone()
    };
    let mut outcomes = Vec::new();
    for n in &names {
        outcomes.push(verify::run_suite(n, a.seed)?);
    }
    let failed = outcomes.iter().filter(|o| !o.passed()).count();
    match a.format {
        Format::Json => write_text(None, &to_json(&json!({"seed": a.seed, "suites": outcomes, "failed": failed}))?)?,
        _ => {
            let mut s = String::new();
            for o in &outcomes {
                let tag = if o.passed() { "PASS" } else { "FAIL" };
                s.push_str(&format!("{tag} {:<18} {:>6} cases  {:.2}s\n", o.name, o.cases, o.elapsed_s));
                for f in &o.failures {
                    s.push_str(&format!("     {f}\n"));
                }
            }
            s.push_str(&format!("{} of {} suites passed\n", outcomes.len() - failed, outcomes.len()));
            write_text(None, &s)?;
        }
    }
    if failed > 0 {
        return Err(Failure { code: 4, error: anyhow!("{failed} verification suite(s) failed") });
    }
    Ok(())
}
