//! Seed expansion by neighborhood-inflated personalized PageRank.
//!
//! Each seed is inflated to its closed neighborhood `T`, a lazy-walk PPR
//! vector from `T` is approximated by local pushes, and a sweep over the
//! ranked support picks the prefix of smallest conductance. This is repeated
//! for a schedule of accuracies and the best candidate wins.

use std::collections::{BTreeMap, HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filtering::CoreDecomposition;
use crate::graph::{Graph, VertexId, VertexSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Ranking {
    /// Sort by `x_v / deg(v)`.
    #[serde(rename = "fppr")]
    FiedlerPpr,
    /// Sort by `x_v`.
    #[serde(rename = "ppr")]
    Ppr,
}

impl fmt::Display for Ranking {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Ranking::FiedlerPpr => "fppr",
            Ranking::Ppr => "ppr",
        })
    }
}

impl FromStr for Ranking {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fppr" | "fiedler_ppr" => Ok(Ranking::FiedlerPpr),
            "ppr" => Ok(Ranking::Ppr),
            other => Err(Error::InvalidParameter(format!(
                "unknown ranking {other:?}"
            ))),
        }
    }
}

pub const DEFAULT_GAMMAS: [f64; 5] = [10.0, 1e2, 1e3, 1e4, 5e4];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PprParams {
    /// Probability of following a link rather than restarting.
    pub alpha: f64,
    /// Accuracy multipliers: the run for `γ` uses `ε = 1 / (γ · vol(T))`.
    pub gammas: Vec<f64>,
    pub ranking: Ranking,
    /// Restart from the seed alone instead of its closed neighborhood.
    pub singleton_seeds: bool,
}

impl Default for PprParams {
    fn default() -> Self {
        PprParams {
            alpha: 0.99,
            gammas: DEFAULT_GAMMAS.to_vec(),
            ranking: Ranking::FiedlerPpr,
            singleton_seeds: false,
        }
    }
}

impl PprParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        if self.gammas.is_empty() {
            return Err(Error::InvalidParameter(
                "the gamma schedule is empty".into(),
            ));
        }
        if self.gammas.iter().any(|&g| !(g > 0.0 && g.is_finite())) {
            return Err(Error::InvalidParameter(
                "gammas must be positive and finite".into(),
            ));
        }
        if self.gammas.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter(
                "gammas must be strictly increasing".into(),
            ));
        }
        Ok(())
    }

    /// The strictly decreasing accuracies for a restart set of volume `vol_t`.
    pub fn epsilons(&self, vol_t: f64) -> Vec<f64> {
        self.gammas.iter().map(|g| 1.0 / (g * vol_t)).collect()
    }
}

/// The restart distribution's support.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RestartSet {
    members: Vec<VertexId>,
    origin_seed: VertexId,
}

impl RestartSet {
    /// The closed neighborhood of `seed`.
    pub fn inflate(core: &Graph, seed: VertexId) -> Result<Self> {
        core.check_vertex(seed)?;
        let mut members = core.neighbors(seed).to_vec();
        members.push(seed);
        members.sort_unstable();
        Ok(RestartSet {
            members,
            origin_seed: seed,
        })
    }

    pub fn singleton(core: &Graph, seed: VertexId) -> Result<Self> {
        core.check_vertex(seed)?;
        Ok(RestartSet {
            members: vec![seed],
            origin_seed: seed,
        })
    }

    /// An arbitrary restart support; `members` must contain `origin_seed`.
    pub fn from_members(
        core: &Graph,
        mut members: Vec<VertexId>,
        origin_seed: VertexId,
    ) -> Result<Self> {
        for &v in &members {
            core.check_vertex(v)?;
        }
        members.sort_unstable();
        members.dedup();
        if members.binary_search(&origin_seed).is_err() {
            return Err(Error::InvalidInput(
                "restart set must contain its seed".into(),
            ));
        }
        Ok(RestartSet {
            members,
            origin_seed,
        })
    }

    pub fn members(&self) -> &[VertexId] {
        &self.members
    }

    pub fn origin_seed(&self) -> VertexId {
        self.origin_seed
    }

    pub fn volume(&self, core: &Graph) -> f64 {
        self.members.iter().map(|&v| core.degree(v)).sum()
    }
}

/// Solution and residual vectors of a push run. Only positive entries are
/// stored.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SparseScores {
    pub x: BTreeMap<VertexId, f64>,
    pub r: BTreeMap<VertexId, f64>,
}

impl SparseScores {
    /// Scores with the given solution values and no residual.
    pub fn from_solution<I: IntoIterator<Item = (VertexId, f64)>>(x: I) -> Self {
        SparseScores {
            x: x.into_iter().filter(|&(_, v)| v > 0.0).collect(),
            r: BTreeMap::new(),
        }
    }

    pub fn total_mass(&self) -> f64 {
        self.x.values().sum::<f64>() + self.r.values().sum::<f64>()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Community {
    pub members: VertexSet,
    /// Under the sweep measure used to find the community.
    pub conductance: f64,
    pub source_seed: VertexId,
    /// The accuracy of the winning run, or `None` when no run had any
    /// support and the restart set was returned.
    pub epsilon_used: Option<f64>,
}

impl Community {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Where sweep conductances are measured. Pushes always walk the core,
/// but a core community also has edges to the rest of its parent graph
/// (the bridges), so its conductance can be taken in either graph. Sets
/// equal to the measuring graph's whole vertex set are never candidates.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepMeasure {
    degrees: Vec<f64>,
    total_volume: f64,
    order: usize,
}

impl SweepMeasure {
    /// Conductance inside `core` itself.
    pub fn of_graph(core: &Graph) -> Self {
        SweepMeasure {
            degrees: core.degrees().to_vec(),
            total_volume: core.volume(),
            order: core.n(),
        }
    }

    /// Conductance in the parent graph of a decomposition. Every parent
    /// edge between two core vertices is a core edge, so only degrees and
    /// the total volume change.
    pub fn of_parent(parent: &Graph, decomp: &CoreDecomposition) -> Result<Self> {
        if parent.n() != decomp.parent_vertex_count() {
            return Err(Error::InvalidInput(
                "the decomposition does not belong to this graph".into(),
            ));
        }
        Ok(SweepMeasure {
            degrees: decomp
                .core_vertices
                .iter()
                .map(|&v| parent.degree(v))
                .collect(),
            total_volume: parent.volume(),
            order: parent.n(),
        })
    }

    pub fn degree(&self, v: VertexId) -> f64 {
        self.degrees[v]
    }

    /// Conductance of a core set under this measure, `None` where it is
    /// undefined.
    pub fn conductance(&self, set: &VertexSet) -> Option<f64> {
        if set.is_empty() || set.len() == self.order {
            return None;
        }
        let internal = set.volume() - set.cut();
        let vol: f64 = set.members().iter().map(|&v| self.degrees[v]).sum();
        let denom = vol.min(self.total_volume - vol);
        (denom > 0.0).then(|| (vol - internal) / denom)
    }

    fn check(&self, core: &Graph) -> Result<()> {
        if self.degrees.len() != core.n() {
            return Err(Error::InvalidInput(
                "sweep measure does not match the core".into(),
            ));
        }
        Ok(())
    }
}

/// Dense scratch space reused across push runs on one graph. Only touched
/// entries are reset, so a run costs time proportional to the work done.
pub struct Workspace {
    x: Vec<f64>,
    r: Vec<f64>,
    queued: Vec<bool>,
    in_set: Vec<bool>,
    touched: Vec<VertexId>,
    queue: VecDeque<VertexId>,
}

impl Workspace {
    pub fn new(n: usize) -> Self {
        Workspace {
            x: vec![0.0; n],
            r: vec![0.0; n],
            queued: vec![false; n],
            in_set: vec![false; n],
            touched: Vec::new(),
            queue: VecDeque::new(),
        }
    }

    fn touch(&mut self, v: VertexId) {
        if self.x[v] == 0.0 && self.r[v] == 0.0 {
            self.touched.push(v);
        }
    }

    fn reset(&mut self) {
        for &v in &self.touched {
            self.x[v] = 0.0;
            self.r[v] = 0.0;
            self.queued[v] = false;
        }
        self.touched.clear();
        self.queue.clear();
    }

    /// Runs the push loop, leaving the result in the dense vectors.
    fn push(&mut self, core: &Graph, t: &RestartSet, alpha: f64, epsilon: f64) {
        self.reset();
        let start = 1.0 / t.members.len() as f64;
        for &v in &t.members {
            self.touched.push(v);
            self.r[v] = start;
        }
        for &v in &t.members {
            if violates(self.r[v], core.degree(v), epsilon) {
                self.queued[v] = true;
                self.queue.push_back(v);
            }
        }
        while let Some(v) = self.queue.pop_front() {
            self.queued[v] = false;
            let dv = core.degree(v);
            let rv = self.r[v];
            self.x[v] += (1.0 - alpha) * rv;
            let spread = alpha * rv / (2.0 * dv);
            for (u, w) in core.edges_of(v) {
                self.touch(u);
                self.r[u] += spread * w;
                if !self.queued[u] && violates(self.r[u], core.degree(u), epsilon) {
                    self.queued[u] = true;
                    self.queue.push_back(u);
                }
            }
            self.r[v] = alpha * rv / 2.0;
            if violates(self.r[v], dv, epsilon) {
                self.queued[v] = true;
                self.queue.push_back(v);
            }
        }
    }

    fn scores(&self) -> SparseScores {
        let mut out = SparseScores::default();
        for &v in &self.touched {
            if self.x[v] > 0.0 {
                out.x.insert(v, self.x[v]);
            }
            if self.r[v] > 0.0 {
                out.r.insert(v, self.r[v]);
            }
        }
        out
    }

    /// Support of `x`, ranked.
    fn ranked_support(&self, core: &Graph, ranking: Ranking) -> Vec<(VertexId, f64)> {
        let mut ranked: Vec<(VertexId, f64)> = self
            .touched
            .iter()
            .filter(|&&v| self.x[v] > 0.0)
            .map(|&v| (v, rank_key(core, ranking, v, self.x[v])))
            .collect();
        sort_ranked(&mut ranked);
        ranked
    }

    /// Best proper prefix of `ranked`: `(length, conductance)`.
    fn sweep(
        &mut self,
        core: &Graph,
        measure: &SweepMeasure,
        ranked: &[(VertexId, f64)],
    ) -> Option<(usize, f64)> {
        let total = measure.total_volume;
        let (mut vol, mut cut) = (0.0, 0.0);
        let mut best: Option<(usize, f64)> = None;
        for (i, &(v, _)) in ranked.iter().enumerate() {
            let dv = measure.degree(v);
            let inside: f64 = core
                .edges_of(v)
                .filter(|&(u, _)| self.in_set[u])
                .map(|(_, w)| w)
                .sum();
            self.in_set[v] = true;
            vol += dv;
            cut += dv - 2.0 * inside;
            let len = i + 1;
            let denom = vol.min(total - vol);
            if len == measure.order || denom <= 0.0 {
                continue;
            }
            let phi = cut / denom;
            if best.is_none_or(|(_, b)| phi < b) {
                best = Some((len, phi));
            }
        }
        for &(v, _) in ranked {
            self.in_set[v] = false;
        }
        best
    }
}

#[inline]
fn violates(r: f64, deg: f64, epsilon: f64) -> bool {
    deg > 0.0 && r > deg * epsilon
}

#[inline]
fn rank_key(core: &Graph, ranking: Ranking, v: VertexId, x: f64) -> f64 {
    match ranking {
        Ranking::FiedlerPpr => x / core.degree(v),
        Ranking::Ppr => x,
    }
}

fn sort_ranked(ranked: &mut [(VertexId, f64)]) {
    ranked.sort_unstable_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
}

/// Approximate lazy-walk personalized PageRank from the uniform
/// distribution on `t`. Pushes repeat in FIFO order while some vertex has
/// `r_v > deg(v) · ε`.
pub fn ppr_push(core: &Graph, t: &RestartSet, alpha: f64, epsilon: f64) -> Result<SparseScores> {
    if !(alpha > 0.0 && alpha < 1.0 && epsilon > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < alpha < 1 and epsilon > 0, got {alpha} and {epsilon}"
        )));
    }
    let mut ws = Workspace::new(core.n());
    ws.push(core, t, alpha, epsilon);
    Ok(ws.scores())
}

/// The minimum-conductance prefix of the support of `scores.x`, ranked
/// descending with ties to the smaller id. The full vertex set is never a
/// candidate. Returns `None` when no proper prefix exists, in particular
/// when `x` is zero.
pub fn sweep_cut(
    core: &Graph,
    scores: &SparseScores,
    ranking: Ranking,
) -> Result<Option<VertexSet>> {
    sweep_cut_measured(core, &SweepMeasure::of_graph(core), scores, ranking)
}

/// [`sweep_cut`] with conductances taken under `measure`.
pub fn sweep_cut_measured(
    core: &Graph,
    measure: &SweepMeasure,
    scores: &SparseScores,
    ranking: Ranking,
) -> Result<Option<VertexSet>> {
    measure.check(core)?;
    for &v in scores.x.keys() {
        core.check_vertex(v)?;
    }
    let mut ranked: Vec<(VertexId, f64)> = scores
        .x
        .iter()
        .filter(|&(_, &x)| x > 0.0)
        .map(|(&v, &x)| (v, rank_key(core, ranking, v, x)))
        .collect();
    sort_ranked(&mut ranked);
    let mut ws = Workspace::new(core.n());
    match ws.sweep(core, measure, &ranked) {
        Some((len, _)) => {
            let members = ranked[..len].iter().map(|&(v, _)| v).collect();
            Ok(Some(VertexSet::new(core, members)?))
        }
        None => Ok(None),
    }
}

/// Expands one seed over the whole accuracy schedule, measuring
/// conductance inside `core`.
pub fn expand_seed(core: &Graph, seed: VertexId, params: &PprParams) -> Result<Community> {
    expand_seed_measured(core, &SweepMeasure::of_graph(core), seed, params)
}

pub fn expand_seed_measured(
    core: &Graph,
    measure: &SweepMeasure,
    seed: VertexId,
    params: &PprParams,
) -> Result<Community> {
    params.validate()?;
    measure.check(core)?;
    let mut ws = Workspace::new(core.n());
    expand_with(core, measure, seed, params, &mut ws)
}

fn expand_with(
    core: &Graph,
    measure: &SweepMeasure,
    seed: VertexId,
    params: &PprParams,
    ws: &mut Workspace,
) -> Result<Community> {
    let t = if params.singleton_seeds {
        RestartSet::singleton(core, seed)?
    } else {
        RestartSet::inflate(core, seed)?
    };
    let mut best: Option<Community> = None;
    let mut last_support = 0;
    for eps in params.epsilons(t.volume(core)) {
        ws.push(core, &t, params.alpha, eps);
        let ranked = ws.ranked_support(core, params.ranking);
        if ranked.len() < last_support {
            log::debug!(
                "seed {seed}: support shrank from {last_support} to {} at eps {eps:e}",
                ranked.len()
            );
        }
        last_support = ranked.len();
        let Some((len, _)) = ws.sweep(core, measure, &ranked) else {
            continue;
        };
        let members = VertexSet::new(core, ranked[..len].iter().map(|&(v, _)| v).collect())?;
        let Some(conductance) = measure.conductance(&members) else {
            continue;
        };
        // epsilons decrease, so an equal conductance only wins on size
        let better = best.as_ref().is_none_or(|b| {
            conductance < b.conductance
                || (conductance == b.conductance && members.len() < b.members.len())
        });
        if better {
            best = Some(Community {
                members,
                conductance,
                source_seed: seed,
                epsilon_used: Some(eps),
            });
        }
    }
    ws.reset();
    match best {
        Some(c) => Ok(c),
        None => {
            let members = VertexSet::new(core, t.members.clone())?;
            // the restart set may be all of V, where conductance is undefined
            let conductance = measure.conductance(&members).unwrap_or(1.0);
            Ok(Community {
                members,
                conductance,
                source_seed: seed,
                epsilon_used: None,
            })
        }
    }
}

/// Expands every seed in parallel, keeping seed order. No deduplication.
pub fn expand_seeds(
    core: &Graph,
    seeds: &[VertexId],
    params: &PprParams,
) -> Result<Vec<Community>> {
    expand_seeds_measured(core, &SweepMeasure::of_graph(core), seeds, params)
}

pub fn expand_seeds_measured(
    core: &Graph,
    measure: &SweepMeasure,
    seeds: &[VertexId],
    params: &PprParams,
) -> Result<Vec<Community>> {
    params.validate()?;
    measure.check(core)?;
    for &s in seeds {
        core.check_vertex(s)?;
    }
    seeds
        .par_iter()
        .map_init(
            || Workspace::new(core.n()),
            |ws, &s| expand_with(core, measure, s, params, ws),
        )
        .collect()
}

/// Drops communities whose member set repeats an earlier one.
pub fn dedup_communities(communities: Vec<Community>) -> Vec<Community> {
    let mut seen: HashSet<Vec<VertexId>> = HashSet::new();
    communities
        .into_iter()
        .filter(|c| seen.insert(c.members.members().to_vec()))
        .collect()
}

/// Expands all seeds on a pool of `workers` threads (0 picks the rayon
/// default) and removes duplicates. The result does not depend on `workers`.
pub fn expand_all(
    core: &Graph,
    seeds: &[VertexId],
    params: &PprParams,
    workers: usize,
) -> Result<Vec<Community>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    let raw = pool.install(|| expand_seeds(core, seeds, params))?;
    Ok(dedup_communities(raw))
}
