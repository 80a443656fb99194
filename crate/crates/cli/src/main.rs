use std::fs::{self, File};
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use nise::evaluation::{
    coverage, coverage_curve, match_report, read_communities, read_ground_truth, write_communities,
    AucMode,
};
use nise::expansion::{
    dedup_communities, expand_seeds_measured, Community, PprParams, Ranking, SweepMeasure,
    DEFAULT_GAMMAS,
};
use nise::filtering::{decompose, CoreDecomposition};
use nise::graph::{graph_stats, write_edge_list, LoadOptions};
use nise::partition::write_partition;
use nise::pipeline::{
    core_partition, load_component, read_seeds, run_pipeline, select_seeds, with_threads,
    write_json, write_seeds, write_with, CommunityRecord, RunConfig,
};
use nise::propagation::propagate_certified;
use nise::seeding::SeedStrategy;
use nise::{Graph, VertexId, VertexSet};

#[derive(Parser)]
#[command(
    name = "nise",
    version,
    about = "Overlapping community detection by neighborhood-inflated seed expansion"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every phase and write all artifacts.
    Run(RunArgs),
    /// Print statistics of the largest connected component.
    Stats(InputArgs),
    /// Split the graph into its core and whiskers.
    Filter(FilterArgs),
    /// Partition the core.
    Partition(PartitionArgs),
    /// Choose seeds on the core.
    Seed(SeedArgs),
    /// Expand seeds into core communities.
    Expand(ExpandArgs),
    /// Attach whiskers to core communities.
    Propagate(PropagateArgs),
    /// Score a communities file.
    Eval(EvalArgs),
}

#[derive(Args, Clone)]
struct InputArgs {
    /// Edge list, one `u v [w]` pair per line.
    #[arg(long)]
    input: PathBuf,
    /// Read a third column as a positive edge weight.
    #[arg(long)]
    weighted: bool,
    /// Shift ids in the file down by one.
    #[arg(long)]
    one_indexed: bool,
}

impl InputArgs {
    fn load(&self) -> Result<Graph> {
        let opts = LoadOptions {
            one_indexed: self.one_indexed,
            weighted: self.weighted,
        };
        load_component(&self.input, opts).with_context(|| format!("load {}", self.input.display()))
    }

    fn load_decomposed(&self) -> Result<(Graph, CoreDecomposition)> {
        let g = self.load()?;
        let d = decompose(&g).context("filter")?;
        Ok((g, d))
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Graclus,
    Spread,
    Lcm,
    Random,
}

impl From<StrategyArg> for SeedStrategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Graclus => SeedStrategy::GraclusCenters,
            StrategyArg::Spread => SeedStrategy::SpreadHubs,
            StrategyArg::Lcm => SeedStrategy::LocallyMinimal,
            StrategyArg::Random => SeedStrategy::Random,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum RankingArg {
    Fppr,
    Ppr,
}

#[derive(Clone, Copy, ValueEnum)]
enum AucArg {
    /// Count the uncovered remainder at conductance 1.
    One,
    /// Stop at the final coverage.
    Final,
}

impl From<AucArg> for AucMode {
    fn from(a: AucArg) -> Self {
        match a {
            AucArg::One => AucMode::BeyondCoverageIsOne,
            AucArg::Final => AucMode::FinalCoverageOnly,
        }
    }
}

#[derive(Args, Clone)]
struct SeedingArgs {
    #[arg(long, value_enum)]
    strategy: StrategyArg,
    /// Seed count; required by every strategy except lcm.
    #[arg(long)]
    k: Option<usize>,
    /// Kernel shift used by graclus partitioning and centers.
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    /// Root seed for all randomness.
    #[arg(long, default_value_t = 0)]
    seed_rng: u64,
    /// Use this core partition (`external_id cluster` lines) for graclus.
    #[arg(long)]
    partition_file: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct PprArgs {
    #[arg(long, default_value_t = 0.99)]
    alpha: f64,
    /// Accuracy multipliers; each run uses eps = 1 / (gamma * vol(T)).
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_GAMMAS.to_vec())]
    gammas: Vec<f64>,
    #[arg(long, value_enum, default_value = "fppr")]
    ranking: RankingArg,
    /// Restart from the seed alone rather than its closed neighborhood.
    #[arg(long)]
    singleton_seeds: bool,
    /// Measure sweep conductance inside the core rather than the whole graph.
    #[arg(long)]
    sweep_in_core: bool,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

impl PprArgs {
    fn params(&self) -> PprParams {
        PprParams {
            alpha: self.alpha,
            gammas: self.gammas.clone(),
            ranking: match self.ranking {
                RankingArg::Fppr => Ranking::FiedlerPpr,
                RankingArg::Ppr => Ranking::Ppr,
            },
            singleton_seeds: self.singleton_seeds,
        }
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    seeding: SeedingArgs,
    #[command(flatten)]
    ppr: PprArgs,
    /// Ground-truth communities for F1/F2.
    #[arg(long)]
    ground_truth: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "one")]
    auc_mode: AucArg,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct FilterArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PartitionArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    #[arg(long, default_value_t = 0)]
    seed_rng: u64,
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Partition file to write.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SeedArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    seeding: SeedingArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ExpandArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Seeds file from `seed`.
    #[arg(long)]
    seeds: PathBuf,
    #[command(flatten)]
    ppr: PprArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PropagateArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Core communities file from `expand`.
    #[arg(long)]
    communities: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    communities: PathBuf,
    #[arg(long)]
    ground_truth: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "one")]
    auc_mode: AucArg,
    /// Also write report.json and curve.csv here.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("NISE_LOG", "info")).init();
    match dispatch(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("nise: {}", describe(&e));
            ExitCode::FAILURE
        }
    }
}

// Phase errors already print their source, so a cause whose text ends the
// message so far is not repeated.
fn describe(e: &anyhow::Error) -> String {
    let mut msg = String::new();
    for cause in e.chain() {
        let text = cause.to_string();
        if msg.ends_with(&text) {
            continue;
        }
        if !msg.is_empty() {
            msg.push_str(": ");
        }
        msg.push_str(&text);
    }
    msg
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Run(a) => run(a),
        Command::Stats(a) => stats(a),
        Command::Filter(a) => filter(a),
        Command::Partition(a) => partition(a),
        Command::Seed(a) => seed(a),
        Command::Expand(a) => expand(a),
        Command::Propagate(a) => propagate(a),
        Command::Eval(a) => eval(a),
    }
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn run(a: RunArgs) -> Result<()> {
    let mut cfg = RunConfig::new(&a.input.input, &a.out, a.seeding.strategy.into());
    cfg.one_indexed = a.input.one_indexed;
    cfg.weighted = a.input.weighted;
    cfg.k = a.seeding.k;
    cfg.sigma = a.seeding.sigma;
    cfg.rng_seed = a.seeding.seed_rng;
    cfg.partition_file = a.seeding.partition_file.clone();
    cfg.ppr = a.ppr.params();
    cfg.threads = a.ppr.threads;
    cfg.sweep_in_core = a.ppr.sweep_in_core;
    cfg.ground_truth = a.ground_truth.clone();
    cfg.auc_mode = a.auc_mode.into();
    log::info!("run: {cfg}");
    let out = run_pipeline(&cfg)?;
    print_json(&out.report)
}

fn stats(a: InputArgs) -> Result<()> {
    let g = a.load()?;
    print_json(&graph_stats(&g))
}

fn filter(a: FilterArgs) -> Result<()> {
    let (g, d) = a.input.load_decomposed()?;
    fs::create_dir_all(&a.out)?;
    let summary = d.summary();
    write_json(&a.out.join("filter_summary.json"), &summary)?;
    write_with(&a.out.join("core.txt"), |w| {
        write_edge_list(&d.core, w, !g.has_unit_weights())
    })?;
    write_with(&a.out.join("whiskers.txt"), |w| {
        for (i, wh) in d.whiskers.iter().enumerate() {
            let ids: Vec<String> = wh
                .vertices
                .iter()
                .map(|&v| g.external_id(v).to_string())
                .collect();
            writeln!(w, "{i}: {}", ids.join(" "))?;
        }
        Ok(())
    })?;
    print_json(&summary)
}

fn partition(a: PartitionArgs) -> Result<()> {
    let (_, d) = a.input.load_decomposed()?;
    let p = with_threads(a.threads, || {
        core_partition(&d.core, a.k.min(d.core.n()), a.sigma, a.seed_rng, None)
    })
    .context("partition")?;
    if let Some(dir) = a.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    write_with(&a.out, |w| write_partition(&d.core, &p, w))?;
    log::info!("{} clusters written to {}", p.k(), a.out.display());
    Ok(())
}

fn seed(a: SeedArgs) -> Result<()> {
    let (_, d) = a.input.load_decomposed()?;
    let s = &a.seeding;
    let strategy: SeedStrategy = s.strategy.into();
    fs::create_dir_all(&a.out)?;
    let partition = if strategy == SeedStrategy::GraclusCenters {
        let k = s.k.context("graclus seeding needs --k")?;
        let p = core_partition(
            &d.core,
            k.min(d.core.n()),
            s.sigma,
            s.seed_rng,
            s.partition_file.as_deref(),
        )
        .context("partition")?;
        write_with(&a.out.join("partition.txt"), |w| {
            write_partition(&d.core, &p, w)
        })?;
        Some(p)
    } else {
        None
    };
    let seeds = select_seeds(
        &d.core,
        strategy,
        s.k,
        s.sigma,
        s.seed_rng,
        partition.as_ref(),
    )
    .context("seed")?;
    write_seeds(&a.out, &d.core, &seeds, s.k)?;
    log::info!("{} seeds written", seeds.len());
    Ok(())
}

fn expand(a: ExpandArgs) -> Result<()> {
    let (g, d) = a.input.load_decomposed()?;
    let seeds = read_seeds(&a.seeds, &d.core).context("read seeds")?;
    let measure = if a.ppr.sweep_in_core {
        SweepMeasure::of_graph(&d.core)
    } else {
        SweepMeasure::of_parent(&g, &d)?
    };
    let params = a.ppr.params();
    let raw = with_threads(a.ppr.threads, || {
        expand_seeds_measured(&d.core, &measure, &seeds, &params)
    })
    .context("expand")?;
    let removed = raw.len();
    let comms = dedup_communities(raw);
    log::info!(
        "{} communities, {} duplicates removed",
        comms.len(),
        removed - comms.len()
    );
    fs::create_dir_all(&a.out)?;
    write_with(&a.out.join("core_communities.txt"), |w| {
        write_communities(&d.core, &comms, w)
    })?;
    let records: Vec<CommunityRecord> = comms
        .iter()
        .map(|c| CommunityRecord {
            seed: d.core.external_id(c.source_seed),
            epsilon: c.epsilon_used,
            conductance: c.conductance,
            size: c.len(),
        })
        .collect();
    write_json(&a.out.join("core_communities.json"), &records)?;
    Ok(())
}

fn propagate(a: PropagateArgs) -> Result<()> {
    let (g, d) = a.input.load_decomposed()?;
    let sets =
        read_file(&a.communities, |r| read_communities(&d.core, r)).context("read communities")?;
    let measure = SweepMeasure::of_parent(&g, &d)?;
    let core_comms: Vec<Community> = sets
        .into_iter()
        .filter(|s| !s.is_empty())
        .map(|s| {
            let seed = s[0];
            let members = VertexSet::new(&d.core, s)?;
            Ok(Community {
                conductance: measure.conductance(&members).unwrap_or(1.0),
                members,
                source_seed: seed,
                epsilon_used: None,
            })
        })
        .collect::<nise::Result<_>>()?;
    let (comms, summary) = propagate_certified(&g, &d, &core_comms).context("propagate")?;
    fs::create_dir_all(&a.out)?;
    write_with(&a.out.join("communities.txt"), |w| {
        write_communities(&g, &comms, w)
    })?;
    write_json(&a.out.join("propagation.json"), &summary)?;
    print_json(&summary)
}

#[derive(serde::Serialize)]
struct EvalReport {
    coverage: f64,
    auc: f64,
    auc_mode: AucMode,
    avg_f1: Option<f64>,
    avg_f2: Option<f64>,
    community_count: usize,
}

fn eval(a: EvalArgs) -> Result<()> {
    let g = a.input.load()?;
    let comms =
        read_file(&a.communities, |r| read_communities(&g, r)).context("read communities")?;
    let scored: Vec<(f64, usize)> = comms
        .iter()
        .map(|c| {
            let set = VertexSet::new(&g, c.clone())?;
            Ok((set.conductance().unwrap_or(1.0), set.len()))
        })
        .collect::<nise::Result<_>>()?;
    let members: Vec<&[VertexId]> = comms.iter().map(Vec::as_slice).collect();
    let curve = coverage_curve(g.n(), &scored, &members, a.auc_mode.into());
    let matches = match &a.ground_truth {
        Some(path) => {
            let gt = read_file(path, |r| read_ground_truth(&g, r)).context("read ground truth")?;
            Some(match_report(&gt, &comms).context("evaluate")?)
        }
        None => None,
    };
    let report = EvalReport {
        coverage: coverage(g.n(), &comms),
        auc: curve.auc,
        auc_mode: curve.mode,
        avg_f1: matches.as_ref().map(|m| m.avg_f1),
        avg_f2: matches.as_ref().map(|m| m.avg_f2),
        community_count: comms.len(),
    };
    if let Some(out) = &a.out {
        fs::create_dir_all(out)?;
        write_json(&out.join("report.json"), &report)?;
        write_with(&out.join("curve.csv"), |w| curve.write_csv(w))?;
    }
    print_json(&report)
}

fn read_file<T>(path: &Path, f: impl FnOnce(BufReader<File>) -> nise::Result<T>) -> Result<T> {
    let file = File::open(path).with_context(|| format!("open {}", path.display()))?;
    Ok(f(BufReader::new(file))?)
}
