use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use flowseed::driver::{cluster, AlphaUpdate, ClusterResult, Mode, SolveOptions};
use flowseed::eval::{evaluate, make_seed, EvalReport};
use flowseed::io::{
    format_node_list, load_graph, load_node_list, load_seed_file, read_result_members, seed_spec_from_rows,
    write_result, EdgeListOptions, IdMap, LoadedGraph, ResultDocument, ResultFormat, SeedOptions,
};
use flowseed::synth::generate_planted;
use flowseed::{Error, Graph, NodeSet, SeedSpec};

const EXIT_USAGE: u8 = 2;
const EXIT_INPUT: u8 = 3;
const EXIT_INFEASIBLE: u8 = 4;

/// Local graph clustering from a seed set, with strict and soft seed penalties.
#[derive(Debug, Parser)]
#[command(name = "flowseed", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Grow a seed set into a low-conductance cluster.
    Cluster(ClusterArgs),
    /// Score a result against a ground-truth node list.
    Eval(EvalArgs),
    /// Sample a seed set from a target community.
    SeedGen(SeedGenArgs),
    /// Planted-community benchmark comparing penalty settings.
    SynthBench(BenchArgs),
    /// Per-solve telemetry against the local volume bound.
    Stats(ClusterArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Flowseed,
    Simplelocal,
    Mqi,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Flowseed => Mode::FlowSeed,
            ModeArg::Simplelocal => Mode::SimpleLocal,
            ModeArg::Mqi => Mode::Mqi,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum UpdateArg {
    Pi,
    Phi,
}

impl From<UpdateArg> for AlphaUpdate {
    fn from(u: UpdateArg) -> AlphaUpdate {
        match u {
            UpdateArg::Pi => AlphaUpdate::Pi,
            UpdateArg::Phi => AlphaUpdate::Phi,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Members,
}

#[derive(Debug, Args)]
struct GraphArgs {
    /// Edge list: "u v [w]" per line, '#' comments.
    #[arg(long)]
    graph: PathBuf,
    /// Smallest node id in the files.
    #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u64).range(0..=1))]
    index_base: u64,
    /// Ignore a third column in the edge list.
    #[arg(long)]
    unweighted: bool,
}

impl GraphArgs {
    fn load(&self) -> Result<LoadedGraph, Error> {
        let opts = EdgeListOptions {
            index_base: self.index_base,
            weighted: !self.unweighted,
        };
        let lg = load_graph(&self.graph, opts)?;
        log::info!(
            "loaded {} nodes, {} edges ({} self-loops dropped, {} duplicates merged)",
            lg.graph.node_count(),
            lg.graph.edge_count(),
            lg.graph.dropped_self_loops(),
            lg.graph.merged_duplicates()
        );
        Ok(lg)
    }
}

#[derive(Debug, Args)]
struct ClusterArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// Seed file: "node [strict] [penalty]" per line.
    #[arg(long)]
    seeds: PathBuf,
    /// Locality parameter; required unless --mode mqi.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Soft penalty for non-strict seeds without one in the seed file.
    #[arg(long, default_value_t = 0.0)]
    penalty: f64,
    /// Treat every seed as strict.
    #[arg(long)]
    strict_all: bool,
    #[arg(long, value_enum, default_value = "flowseed")]
    mode: ModeArg,
    #[arg(long, value_enum, default_value = "pi")]
    alpha_update: UpdateArg,
    #[arg(long)]
    max_iterations: Option<usize>,
    /// Result file; printed to stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: FormatArg,
    /// Ground-truth node list to evaluate against.
    #[arg(long)]
    target: Option<PathBuf>,
    /// Record wall time in the result (makes output run-dependent).
    #[arg(long)]
    timing: bool,
}

#[derive(Debug, Args)]
struct EvalArgs {
    /// Result file in either output format.
    #[arg(long)]
    result: PathBuf,
    /// Ground-truth node list.
    #[arg(long)]
    target: PathBuf,
    /// Graph for conductance; optional.
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u64).range(0..=1))]
    index_base: u64,
    /// Seed file for the seed-penalized score; needs --graph and --epsilon.
    #[arg(long, requires_all = ["graph", "epsilon"])]
    seeds: Option<PathBuf>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    penalty: f64,
}

#[derive(Debug, Args)]
struct SeedGenArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// Target community node list.
    #[arg(long)]
    target: PathBuf,
    /// Fraction of target nodes sampled as starters.
    #[arg(long, default_value_t = 0.05)]
    fraction: f64,
    #[arg(long, default_value_t = 0)]
    rng: u64,
    /// Mark the sampled starters strict.
    #[arg(long)]
    strict_starters: bool,
    /// Soft penalty written for the non-starter seeds.
    #[arg(long)]
    penalty: Option<f64>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Block sizes; the first block is the target.
    #[arg(long, value_delimiter = ',', default_value = "100,100")]
    blocks: Vec<usize>,
    #[arg(long, default_value_t = 0.3)]
    p_in: f64,
    #[arg(long, default_value_t = 0.02)]
    p_out: f64,
    #[arg(long, default_value_t = 0.05)]
    fraction: f64,
    #[arg(long, default_value_t = 1.0)]
    epsilon: f64,
    /// Soft penalty on non-starter seeds for the strict+soft method.
    #[arg(long, default_value_t = 1.0)]
    penalty: f64,
    #[arg(long, default_value_t = 1)]
    instances: u64,
    #[arg(long, default_value_t = 0)]
    rng: u64,
    /// Instances solved in parallel.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

enum Failure {
    Usage(String),
    Run(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Run(e)
    }
}

type CliResult<T> = Result<T, Failure>;

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::Run(Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn emit(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| io_failure(p, e)),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| io_failure(Path::new("<stdout>"), e)),
    }
}

fn resolve_epsilon(args: &ClusterArgs) -> CliResult<f64> {
    match (args.epsilon, Mode::from(args.mode)) {
        (Some(e), _) => Ok(e),
        (None, Mode::Mqi) => Ok(f64::INFINITY),
        (None, _) => Err(Failure::Usage("--epsilon is required unless --mode mqi".into())),
    }
}

fn seed_spec(args: &ClusterArgs, lg: &LoadedGraph, epsilon: f64) -> CliResult<SeedSpec> {
    let rows = load_seed_file(&args.seeds)?;
    let opts = SeedOptions {
        epsilon,
        default_penalty: args.penalty,
        strict_all: args.strict_all,
    };
    Ok(seed_spec_from_rows(&lg.graph, &lg.ids, &rows, opts)?)
}

fn target_set(path: &Path, ids: &IdMap) -> CliResult<NodeSet> {
    Ok(ids.to_internal_set(&load_node_list(path)?)?)
}

fn run_cluster(args: &ClusterArgs) -> CliResult<(LoadedGraph, SeedSpec, ClusterResult)> {
    let epsilon = resolve_epsilon(args)?;
    let lg = args.graph.load()?;
    let spec = seed_spec(args, &lg, epsilon)?;
    let opts = SolveOptions {
        mode: args.mode.into(),
        alpha_update: args.alpha_update.into(),
        max_outer_iterations: args.max_iterations,
        ..Default::default()
    };
    let res = cluster(&lg.graph, &spec, &opts)?;
    log::info!(
        "{} outer iterations, best set of {} nodes, pi {}",
        res.outer_iterations,
        res.best_set.len(),
        res.pi_score
    );
    Ok((lg, spec, res))
}

fn cmd_cluster(args: &ClusterArgs) -> CliResult<()> {
    let (lg, spec, res) = run_cluster(args)?;
    let evaluation = match &args.target {
        Some(t) => {
            let target = target_set(t, &lg.ids)?;
            Some(evaluate(&res.best_set, &target)?.with_scores(&lg.graph, Some(&spec), &res.best_set))
        }
        None => None,
    };
    let doc = ResultDocument::new(
        &res,
        &lg.ids,
        args.mode.into(),
        args.alpha_update.into(),
        spec.epsilon(),
        evaluation,
        args.timing,
    )?;
    let format = match args.format {
        FormatArg::Json => ResultFormat::Json,
        FormatArg::Members => ResultFormat::Members,
    };
    match &args.output {
        Some(path) => {
            write_result(path, &doc, format)?;
            println!(
                "wrote {} members to {} (pi {}, conductance {})",
                doc.size,
                path.display(),
                fmt_opt(doc.pi_score),
                fmt_opt(doc.conductance)
            );
            Ok(())
        }
        None => match format {
            ResultFormat::Json => emit(None, &doc.to_json()),
            ResultFormat::Members => emit(None, &format_node_list(&doc.members)),
        },
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "undefined".to_string(), |v| format!("{v:.6}"))
}

fn cmd_eval(args: &EvalArgs) -> CliResult<()> {
    let members = read_result_members(&args.result)?;
    let target = load_node_list(&args.target)?;
    let report = match &args.graph {
        Some(path) => {
            let opts = EdgeListOptions {
                index_base: args.index_base,
                weighted: true,
            };
            let lg = load_graph(path, opts)?;
            let output = lg.ids.to_internal_set(&members)?;
            let target = lg.ids.to_internal_set(&target)?;
            let spec = match (&args.seeds, args.epsilon) {
                (Some(seeds), Some(epsilon)) => {
                    let rows = load_seed_file(seeds)?;
                    let opts = SeedOptions {
                        epsilon,
                        default_penalty: args.penalty,
                        strict_all: false,
                    };
                    Some(seed_spec_from_rows(&lg.graph, &lg.ids, &rows, opts)?)
                }
                _ => None,
            };
            evaluate(&output, &target)?.with_scores(&lg.graph, spec.as_ref(), &output)
        }
        None => {
            // no graph: compare raw ids
            let ids = IdMap::from_ids(members.iter().chain(&target).copied());
            evaluate(&ids.to_internal_set(&members)?, &ids.to_internal_set(&target)?)?
        }
    };
    print_eval(&report);
    Ok(())
}

fn print_eval(r: &EvalReport) {
    println!("precision   {:.6}", r.precision);
    println!("recall      {:.6}", r.recall);
    println!("f1          {:.6}", r.f1);
    println!("set_size    {}", r.set_size);
    println!("conductance {}", fmt_opt(r.conductance));
    println!("pi_score    {}", fmt_opt(r.pi_score));
}

fn cmd_seed_gen(args: &SeedGenArgs) -> CliResult<()> {
    let lg = args.graph.load()?;
    let target = target_set(&args.target, &lg.ids)?;
    let sample = make_seed(&lg.graph, &target, args.fraction, args.rng)?;
    let mut out = format!(
        "# {} starters grown to {} seeds (fraction {}, rng {})\n",
        sample.starters.len(),
        sample.seeds.len(),
        args.fraction,
        args.rng
    );
    for v in &sample.seeds {
        let id = lg.ids.external(v);
        let starter = sample.starters.contains(v);
        match args.penalty {
            _ if starter && args.strict_starters => out.push_str(&format!("{id} 1\n")),
            Some(p) if !starter => out.push_str(&format!("{id} 0 {p}\n")),
            _ => out.push_str(&format!("{id}\n")),
        }
    }
    emit(args.output.as_deref(), &out)
}

#[derive(Debug, Clone)]
struct BenchRow {
    instance: u64,
    method: &'static str,
    size: usize,
    conductance: Option<f64>,
    millis: f64,
    eval: EvalReport,
}

const METHODS: [&str; 3] = ["no-penalty", "strict", "strict+soft"];

fn bench_instance(args: &BenchArgs, instance: u64) -> Result<Vec<BenchRow>, Error> {
    let seed = args.rng.wrapping_add(instance);
    let pl = generate_planted(&args.blocks, args.p_in, args.p_out, seed)?;
    let g: &Graph = &pl.graph;
    let sample = make_seed(g, &pl.target, args.fraction, seed)?;
    let soft = sample
        .seeds
        .iter()
        .filter(|&v| !sample.starters.contains(v))
        .map(|v| (v, args.penalty))
        .collect();
    let specs = [
        SeedSpec::plain(g, sample.seeds.clone(), args.epsilon)?,
        SeedSpec::new(g, sample.seeds.clone(), sample.starters.clone(), &Default::default(), args.epsilon)?,
        SeedSpec::new(g, sample.seeds.clone(), sample.starters.clone(), &soft, args.epsilon)?,
    ];
    let mut rows = Vec::new();
    for (method, spec) in METHODS.iter().zip(&specs) {
        let started = Instant::now();
        let res = cluster(g, spec, &SolveOptions::default())?;
        let millis = started.elapsed().as_secs_f64() * 1e3;
        rows.push(BenchRow {
            instance,
            method,
            size: res.best_set.len(),
            conductance: res.conductance,
            millis,
            eval: evaluate(&res.best_set, &pl.target)?,
        });
    }
    Ok(rows)
}

fn cmd_synth_bench(args: &BenchArgs) -> CliResult<()> {
    if args.instances == 0 {
        return Err(Failure::Usage("--instances must be at least 1".into()));
    }
    let jobs = args.jobs.max(1).min(args.instances as usize);
    let ids: Vec<u64> = (0..args.instances).collect();
    let chunk = ids.len().div_ceil(jobs);
    let results: Vec<Result<Vec<BenchRow>, Error>> = std::thread::scope(|scope| {
        let handles: Vec<_> = ids
            .chunks(chunk)
            .map(|part| scope.spawn(move || part.iter().map(|&i| bench_instance(args, i)).collect::<Vec<_>>()))
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("benchmark worker panicked"))
            .collect()
    });
    let mut rows = Vec::new();
    for r in results {
        rows.extend(r?);
    }

    println!(
        "{:>8}  {:<12} {:>6} {:>10} {:>10} {:>9} {:>9} {:>9}",
        "instance", "method", "size", "phi", "time_ms", "precision", "recall", "f1"
    );
    for r in &rows {
        println!(
            "{:>8}  {:<12} {:>6} {:>10} {:>10.2} {:>9.4} {:>9.4} {:>9.4}",
            r.instance,
            r.method,
            r.size,
            r.conductance.map_or_else(|| "-".to_string(), |c| format!("{c:.4}")),
            r.millis,
            r.eval.precision,
            r.eval.recall,
            r.eval.f1
        );
    }
    if args.instances > 1 {
        for method in METHODS {
            let mine: Vec<&BenchRow> = rows.iter().filter(|r| r.method == method).collect();
            let n = mine.len() as f64;
            let mean = |f: &dyn Fn(&BenchRow) -> f64| mine.iter().map(|r| f(r)).sum::<f64>() / n;
            println!(
                "{:>8}  {:<12} {:>6.1} {:>10} {:>10.2} {:>9.4} {:>9.4} {:>9.4}",
                "mean",
                method,
                mean(&|r| r.size as f64),
                "",
                mean(&|r| r.millis),
                mean(&|r| r.eval.precision),
                mean(&|r| r.eval.recall),
                mean(&|r| r.eval.f1)
            );
        }
    }
    Ok(())
}

fn cmd_stats(args: &ClusterArgs) -> CliResult<()> {
    let (lg, spec, res) = run_cluster(args)?;
    let g = &lg.graph;
    let vol_r = g.volume(spec.seeds())?;
    let cut_r = g.cut(spec.seeds())?;
    let bound = |k: f64| vol_r * (1.0 + k / spec.epsilon()) + cut_r;
    println!("seeds {} vol(R) {vol_r} cut(R) {cut_r} epsilon {}", spec.seeds().len(), spec.epsilon());
    if spec.epsilon().is_finite() {
        println!("volume bound {} (stated form {})", bound(2.0), bound(1.0));
    }
    println!(
        "{:>4} {:>12} {:>6} {:>6} {:>9} {:>12} {:>9} {:>9} {:>8} {:>8}",
        "iter", "alpha", "size", "rounds", "edges", "local_vol", "pushes", "relabels", "global", "accepted"
    );
    for (i, it) in res.iterations.iter().enumerate() {
        let r = &it.report;
        println!(
            "{:>4} {:>12.6e} {:>6} {:>6} {:>9} {:>12} {:>9} {:>9} {:>8} {:>8}",
            i + 1,
            it.alpha,
            r.minimizer.len(),
            r.rounds,
            r.explored_edges,
            r.peak_local_volume,
            r.pushes,
            r.relabels,
            r.global_relabels,
            it.accepted
        );
    }
    let peak = res
        .iterations
        .iter()
        .map(|it| it.report.peak_local_volume)
        .fold(0.0, f64::max);
    println!("peak local volume {peak} of graph volume {}", g.total_volume());
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Infeasible(_) => EXIT_INFEASIBLE,
        Error::Contract(_) => 1,
        _ => EXIT_INPUT,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Cluster(a) => cmd_cluster(a),
        Command::Eval(a) => cmd_eval(a),
        Command::SeedGen(a) => cmd_seed_gen(a),
        Command::SynthBench(a) => cmd_synth_bench(a),
        Command::Stats(a) => cmd_stats(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            Cli::command()
                .error(clap::error::ErrorKind::MissingRequiredArgument, msg)
                .print()
                .ok();
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
