//! End-to-end batch runs and the artifact files they leave behind.

use std::fmt;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluation::{
    coverage_curve, match_report, read_ground_truth, size_distribution, write_communities, AucMode,
    CoverageCurve,
};
use crate::expansion::{
    dedup_communities, expand_seeds_measured, Community, PprParams, Ranking, SweepMeasure,
};
use crate::filtering::{decompose, CoreDecomposition, FilterSummary};
use crate::graph::{
    degree_histogram, graph_stats, largest_connected_component, load_edge_list_file, Graph,
    LoadOptions, VertexId,
};
use crate::partition::{
    hierarchical_partition, read_partition, write_partition, KernelParams, Partition,
    PartitionConfig,
};
use crate::propagation::{propagate_certified, PropagationSummary};
use crate::rng::mix_seed;
use crate::seeding::{
    seeds_graclus_centers, seeds_locally_minimal, seeds_random, seeds_spread_hubs, SeedSet,
    SeedStrategy,
};

/// Stream labels for splitting the root seed.
const STREAM_PARTITION: u64 = 1;
const STREAM_SEEDING: u64 = 2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub input: PathBuf,
    pub one_indexed: bool,
    pub weighted: bool,
    pub strategy: SeedStrategy,
    /// Required by every strategy except locally minimal neighborhoods.
    pub k: Option<usize>,
    pub ppr: PprParams,
    pub sigma: f64,
    pub rng_seed: u64,
    /// Worker threads; 0 uses every available core.
    pub threads: usize,
    pub out_dir: PathBuf,
    pub ground_truth: Option<PathBuf>,
    /// A precomputed core partition used instead of the built-in one.
    pub partition_file: Option<PathBuf>,
    pub auc_mode: AucMode,
    /// Measure sweep conductance inside the core instead of the whole graph.
    pub sweep_in_core: bool,
}

impl RunConfig {
    pub fn new(
        input: impl Into<PathBuf>,
        out_dir: impl Into<PathBuf>,
        strategy: SeedStrategy,
    ) -> Self {
        RunConfig {
            input: input.into(),
            one_indexed: false,
            weighted: false,
            strategy,
            k: None,
            ppr: PprParams::default(),
            sigma: 0.0,
            rng_seed: 0,
            threads: 0,
            out_dir: out_dir.into(),
            ground_truth: None,
            partition_file: None,
            auc_mode: AucMode::default(),
            sweep_in_core: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.strategy.needs_k() && self.k.is_none() {
            return Err(Error::InvalidParameter(format!(
                "strategy {} needs k",
                self.strategy
            )));
        }
        if self.k == Some(0) {
            return Err(Error::InvalidParameter("k must be at least 1".into()));
        }
        KernelParams::new(self.sigma)?;
        self.ppr.validate()
    }

    pub fn load_options(&self) -> LoadOptions {
        LoadOptions {
            one_indexed: self.one_indexed,
            weighted: self.weighted,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Config,
    Load,
    Filter,
    Partition,
    Seed,
    Expand,
    Propagate,
    Evaluate,
    Write,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Phase::Config => "config",
            Phase::Load => "load",
            Phase::Filter => "filter",
            Phase::Partition => "partition",
            Phase::Seed => "seed",
            Phase::Expand => "expand",
            Phase::Propagate => "propagate",
            Phase::Evaluate => "evaluate",
            Phase::Write => "write",
        };
        f.write_str(name)
    }
}

#[derive(Debug, thiserror::Error)]
#[error("{phase}: {source}")]
pub struct PhaseError {
    pub phase: Phase,
    #[source]
    pub source: Error,
}

trait InPhase<T> {
    fn phase(self, phase: Phase) -> std::result::Result<T, PhaseError>;
}

impl<T> InPhase<T> for Result<T> {
    fn phase(self, phase: Phase) -> std::result::Result<T, PhaseError> {
        self.map_err(|source| PhaseError { phase, source })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeedSummary {
    pub strategy: SeedStrategy,
    pub k_requested: Option<usize>,
    pub k_returned: usize,
}

/// One line of `communities.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommunityRecord {
    /// External id of the seed.
    pub seed: u64,
    pub epsilon: Option<f64>,
    pub conductance: f64,
    pub size: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub coverage: f64,
    pub auc: f64,
    pub auc_mode: AucMode,
    pub avg_f1: Option<f64>,
    pub avg_f2: Option<f64>,
    pub community_count: usize,
    pub core_community_count: usize,
    pub duplicates_removed: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Manifest<'a> {
    pub version: &'static str,
    pub config: &'a RunConfig,
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub graph: Graph,
    pub decomposition: CoreDecomposition,
    pub seeds: SeedSet,
    pub core_communities: Vec<Community>,
    pub communities: Vec<Community>,
    pub filter: FilterSummary,
    pub propagation: PropagationSummary,
    pub curve: CoverageCurve,
    pub report: Report,
}

/// Loads an edge list and keeps its largest connected component.
pub fn load_component(path: &Path, opts: LoadOptions) -> Result<Graph> {
    let g = load_edge_list_file(path, opts)?;
    let n = g.n();
    let lcc = largest_connected_component(&g)?;
    if lcc.n() < n {
        log::info!("kept the largest component: {} of {n} vertices", lcc.n());
    }
    Ok(lcc)
}

/// The core partition: imported from `partition_file` when given, else
/// computed with `k` clusters from a seed derived from `rng_seed`.
pub fn core_partition(
    core: &Graph,
    k: usize,
    sigma: f64,
    rng_seed: u64,
    partition_file: Option<&Path>,
) -> Result<Partition> {
    match partition_file {
        Some(path) => read_partition(core, BufReader::new(File::open(path)?)),
        None => {
            let config = PartitionConfig {
                kernel: KernelParams::new(sigma)?,
                ..PartitionConfig::default()
            };
            hierarchical_partition(core, k, &config, mix_seed(rng_seed, &[STREAM_PARTITION]))
        }
    }
}

/// Seeds on the core. `partition` is only used by the graclus strategy.
pub fn select_seeds(
    core: &Graph,
    strategy: SeedStrategy,
    k: Option<usize>,
    sigma: f64,
    rng_seed: u64,
    partition: Option<&Partition>,
) -> Result<SeedSet> {
    let need_k =
        || k.ok_or_else(|| Error::InvalidParameter(format!("strategy {strategy} needs k")));
    let seeds = match strategy {
        SeedStrategy::GraclusCenters => {
            let p = partition
                .ok_or_else(|| Error::InvalidInput("graclus seeding needs a partition".into()))?;
            seeds_graclus_centers(core, p, KernelParams::new(sigma)?)?
        }
        SeedStrategy::SpreadHubs => seeds_spread_hubs(core, need_k()?)?,
        SeedStrategy::LocallyMinimal => seeds_locally_minimal(core),
        SeedStrategy::Random => seeds_random(
            core,
            need_k()?.min(core.n()),
            mix_seed(rng_seed, &[STREAM_SEEDING]),
        )?,
    };
    Ok(seeds)
}

/// Runs every phase and writes all artifacts into `config.out_dir`.
pub fn run_pipeline(config: &RunConfig) -> std::result::Result<RunOutput, PhaseError> {
    config.validate().phase(Phase::Config)?;
    let pool = thread_pool(config.threads).phase(Phase::Config)?;
    pool.install(|| run_phases(config))
}

fn thread_pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))
}

/// Runs `f` on a fresh pool of `threads` workers (0 picks the rayon
/// default).
pub fn with_threads<T, F>(threads: usize, f: F) -> Result<T>
where
    T: Send,
    F: FnOnce() -> Result<T> + Send,
{
    thread_pool(threads)?.install(f)
}

fn run_phases(config: &RunConfig) -> std::result::Result<RunOutput, PhaseError> {
    let out = &config.out_dir;
    fs::create_dir_all(out)
        .map_err(Error::from)
        .phase(Phase::Write)?;

    let graph = load_component(&config.input, config.load_options()).phase(Phase::Load)?;
    log::info!(
        "graph: {} vertices, {} edges",
        graph.n(),
        graph.edge_count()
    );
    write_json(&out.join("stats.json"), &graph_stats(&graph)).phase(Phase::Write)?;
    write_with(&out.join("degree_histogram.csv"), |w| {
        writeln!(w, "degree,count")?;
        for (d, c) in degree_histogram(&graph) {
            writeln!(w, "{d},{c}")?;
        }
        Ok(())
    })
    .phase(Phase::Write)?;

    let decomp = decompose(&graph).phase(Phase::Filter)?;
    let filter = decomp.summary();
    log::info!(
        "core: {} vertices ({:.2}%), {} edges",
        filter.core_vertices,
        filter.core_vertex_pct,
        filter.core_edges
    );
    write_json(&out.join("filter_summary.json"), &filter).phase(Phase::Write)?;
    let core = &decomp.core;

    let partition = if config.strategy == SeedStrategy::GraclusCenters {
        let k = config.k.unwrap_or(1).min(core.n());
        let p = core_partition(
            core,
            k,
            config.sigma,
            config.rng_seed,
            config.partition_file.as_deref(),
        )
        .phase(Phase::Partition)?;
        write_with(&out.join("partition.txt"), |w| write_partition(core, &p, w))
            .phase(Phase::Write)?;
        Some(p)
    } else {
        None
    };

    let seeds = select_seeds(
        core,
        config.strategy,
        config.k,
        config.sigma,
        config.rng_seed,
        partition.as_ref(),
    )
    .phase(Phase::Seed)?;
    log::info!("{} seeds", seeds.len());
    write_seeds(out, core, &seeds, config.k).phase(Phase::Write)?;

    let measure = if config.sweep_in_core {
        SweepMeasure::of_graph(core)
    } else {
        SweepMeasure::of_parent(&graph, &decomp).phase(Phase::Expand)?
    };
    let raw =
        expand_seeds_measured(core, &measure, &seeds.seeds, &config.ppr).phase(Phase::Expand)?;
    let raw_count = raw.len();
    let core_communities = dedup_communities(raw);
    log::info!(
        "{} communities after removing {} duplicates",
        core_communities.len(),
        raw_count - core_communities.len()
    );
    write_with(&out.join("core_communities.txt"), |w| {
        write_communities(core, &core_communities, w)
    })
    .phase(Phase::Write)?;

    let (communities, propagation) =
        propagate_certified(&graph, &decomp, &core_communities).phase(Phase::Propagate)?;
    write_json(&out.join("propagation.json"), &propagation).phase(Phase::Write)?;
    write_with(&out.join("communities.txt"), |w| {
        write_communities(&graph, &communities, w)
    })
    .phase(Phase::Write)?;
    let records: Vec<CommunityRecord> = communities
        .iter()
        .map(|c| CommunityRecord {
            seed: graph.external_id(c.source_seed),
            epsilon: c.epsilon_used,
            conductance: c.conductance,
            size: c.len(),
        })
        .collect();
    write_json(&out.join("communities.json"), &records).phase(Phase::Write)?;

    let report_parts = evaluate(&graph, &communities, config).phase(Phase::Evaluate)?;
    let (curve, matches) = report_parts;
    write_with(&out.join("curve.csv"), |w| curve.write_csv(w)).phase(Phase::Write)?;
    let sizes: Vec<(usize, usize)> = size_distribution(&communities).into_iter().collect();
    write_with(&out.join("sizes.csv"), |w| {
        writeln!(w, "size,count")?;
        for (s, c) in &sizes {
            writeln!(w, "{s},{c}")?;
        }
        Ok(())
    })
    .phase(Phase::Write)?;
    let report = Report {
        coverage: propagation.coverage,
        auc: curve.auc,
        auc_mode: curve.mode,
        avg_f1: matches.map(|m| m.0),
        avg_f2: matches.map(|m| m.1),
        community_count: communities.len(),
        core_community_count: core_communities.len(),
        duplicates_removed: raw_count - core_communities.len(),
    };
    write_json(&out.join("report.json"), &report).phase(Phase::Write)?;
    write_json(
        &out.join("manifest.json"),
        &Manifest {
            version: env!("CARGO_PKG_VERSION"),
            config,
        },
    )
    .phase(Phase::Write)?;

    Ok(RunOutput {
        graph,
        decomposition: decomp,
        seeds,
        core_communities,
        communities,
        filter,
        propagation,
        curve,
        report,
    })
}

fn evaluate(
    graph: &Graph,
    communities: &[Community],
    config: &RunConfig,
) -> Result<(CoverageCurve, Option<(f64, f64)>)> {
    // stored conductances: a community grown to all of V is scored 1
    let scored: Vec<(f64, usize)> = communities
        .iter()
        .map(|c| (c.conductance, c.len()))
        .collect();
    let members: Vec<&[VertexId]> = communities.iter().map(|c| c.as_ref()).collect();
    let curve = coverage_curve(graph.n(), &scored, &members, config.auc_mode);
    let matches = match &config.ground_truth {
        Some(path) => {
            let gt = read_ground_truth(graph, BufReader::new(File::open(path)?))?;
            let m = match_report(&gt, communities)?;
            Some((m.avg_f1, m.avg_f2))
        }
        None => None,
    };
    Ok((curve, matches))
}

/// `seeds.txt` (external ids, one per line) and `seeds.json`.
pub fn write_seeds(out: &Path, core: &Graph, seeds: &SeedSet, k: Option<usize>) -> Result<()> {
    write_with(&out.join("seeds.txt"), |w| {
        for &s in &seeds.seeds {
            writeln!(w, "{}", core.external_id(s))?;
        }
        Ok(())
    })?;
    write_json(
        &out.join("seeds.json"),
        &SeedSummary {
            strategy: seeds.strategy,
            k_requested: k,
            k_returned: seeds.len(),
        },
    )
}

/// Reads a seeds file of external ids, one per line.
pub fn read_seeds(path: &Path, core: &Graph) -> Result<Vec<VertexId>> {
    let text = fs::read_to_string(path)?;
    let mut seeds = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let id: u64 = line
            .parse()
            .map_err(|_| Error::parse(i + 1, format!("bad vertex id {line:?}")))?;
        seeds.push(core.internal_id(id).ok_or(Error::UnknownVertex(id))?);
    }
    Ok(seeds)
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    write_with(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        writeln!(w)?;
        Ok(())
    })
}

pub fn write_with<F>(path: &Path, body: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<File>) -> Result<()>,
{
    let mut w = BufWriter::new(File::create(path)?);
    body(&mut w)?;
    w.flush()?;
    Ok(())
}

impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ranking = match self.ppr.ranking {
            Ranking::FiedlerPpr => "fppr",
            Ranking::Ppr => "ppr",
        };
        write!(
            f,
            "{} strategy={} k={:?} ranking={ranking} alpha={} threads={}",
            self.input.display(),
            self.strategy,
            self.k,
            self.ppr.alpha,
            self.threads
        )
    }
}
