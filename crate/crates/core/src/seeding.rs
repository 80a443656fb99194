//! Seed selection on the biconnected core.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, VertexId};
use crate::partition::{cluster_stats, distance_from_parts, KernelParams, Partition};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedStrategy {
    GraclusCenters,
    SpreadHubs,
    LocallyMinimal,
    Random,
}

impl SeedStrategy {
    /// Whether the strategy takes a seed count.
    pub fn needs_k(self) -> bool {
        !matches!(self, SeedStrategy::LocallyMinimal)
    }
}

impl fmt::Display for SeedStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SeedStrategy::GraclusCenters => "graclus",
            SeedStrategy::SpreadHubs => "spread",
            SeedStrategy::LocallyMinimal => "lcm",
            SeedStrategy::Random => "random",
        })
    }
}

impl FromStr for SeedStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "graclus" | "grc" | "graclus_centers" => Ok(SeedStrategy::GraclusCenters),
            "spread" | "sph" | "spread_hubs" => Ok(SeedStrategy::SpreadHubs),
            "lcm" | "locally_minimal" => Ok(SeedStrategy::LocallyMinimal),
            "random" | "rnd" => Ok(SeedStrategy::Random),
            other => Err(Error::InvalidParameter(format!(
                "unknown seeding strategy {other:?}"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeedSet {
    pub seeds: Vec<VertexId>,
    pub strategy: SeedStrategy,
}

impl SeedSet {
    pub fn len(&self) -> usize {
        self.seeds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seeds.is_empty()
    }
}

/// Every vertex attaining the minimum kernel distance to its own cluster,
/// ordered by cluster index and then vertex id.
pub fn seeds_graclus_centers(
    core: &Graph,
    partition: &Partition,
    params: KernelParams,
) -> Result<SeedSet> {
    if partition.len() != core.n() {
        return Err(Error::InvalidInput(format!(
            "partition covers {} vertices but the core has {}",
            partition.len(),
            core.n()
        )));
    }
    let clusters = partition.clusters();
    if let Some(c) = clusters.iter().position(|c| c.is_empty()) {
        return Err(Error::InvalidInput(format!("cluster {c} is empty")));
    }
    let (vol, internal) = cluster_stats(core, partition);
    let per_cluster: Vec<Vec<VertexId>> = clusters
        .par_iter()
        .enumerate()
        .map(|(c, members)| {
            if vol[c] <= 0.0 {
                return Err(Error::InvalidInput(format!("cluster {c} has zero volume")));
            }
            let mut dist = Vec::with_capacity(members.len());
            for &v in members {
                let dv = core.degree(v);
                if dv <= 0.0 {
                    return Err(Error::InvalidInput(format!(
                        "vertex {} has zero degree",
                        core.external_id(v)
                    )));
                }
                let lvc: f64 = core
                    .edges_of(v)
                    .filter(|&(u, _)| partition.cluster_of(u) == c)
                    .map(|(_, w)| w)
                    .sum();
                dist.push(distance_from_parts(
                    lvc,
                    dv,
                    internal[c],
                    vol[c],
                    params.sigma,
                ));
            }
            let min = dist.iter().copied().fold(f64::INFINITY, f64::min);
            let tol = 1e-12 * min.abs().max(f64::MIN_POSITIVE);
            Ok(members
                .iter()
                .zip(&dist)
                .filter(|&(_, &d)| d <= min + tol)
                .map(|(&v, _)| v)
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(SeedSet {
        seeds: per_cluster.into_iter().flatten().collect(),
        strategy: SeedStrategy::GraclusCenters,
    })
}

/// Greedy independent set of hubs. Each round takes all unmarked vertices
/// of the current maximum degree, scans them in ascending id, and adds each
/// one that is still unmarked, marking it and its neighbors. Rounds repeat
/// while fewer than `k` seeds exist and unmarked vertices remain.
pub fn seeds_spread_hubs(core: &Graph, k: usize) -> Result<SeedSet> {
    if k < 1 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    let order = by_degree_descending(core);
    let mut marked = vec![false; core.n()];
    let mut seeds = Vec::new();
    let mut i = 0;
    while seeds.len() < k {
        while i < order.len() && marked[order[i]] {
            i += 1;
        }
        if i == order.len() {
            break;
        }
        let d = core.degree(order[i]);
        while i < order.len() && core.degree(order[i]) == d {
            let t = order[i];
            if !marked[t] {
                seeds.push(t);
                marked[t] = true;
                for &u in core.neighbors(t) {
                    marked[u] = true;
                }
            }
            i += 1;
        }
    }
    Ok(SeedSet {
        seeds,
        strategy: SeedStrategy::SpreadHubs,
    })
}

/// Vertices by degree descending, ties by ascending id. Integer degrees are
/// bucket-sorted; anything else falls back to a comparison sort.
fn by_degree_descending(graph: &Graph) -> Vec<VertexId> {
    let degrees = graph.degrees();
    let integral = degrees
        .iter()
        .all(|&d| d.fract() == 0.0 && d >= 0.0 && d <= graph.n() as f64 * 64.0);
    if integral {
        let max = degrees.iter().copied().fold(0.0, f64::max) as usize;
        let mut buckets: Vec<Vec<VertexId>> = vec![Vec::new(); max + 1];
        for (v, &d) in degrees.iter().enumerate() {
            buckets[d as usize].push(v);
        }
        buckets.into_iter().rev().flatten().collect()
    } else {
        let mut order: Vec<VertexId> = (0..graph.n()).collect();
        order.sort_by(|&a, &b| degrees[b].total_cmp(&degrees[a]).then(a.cmp(&b)));
        order
    }
}

/// Conductance of the closed neighborhood `N[v]` of every vertex. A
/// neighborhood covering the whole graph (or of zero volume) has no defined
/// conductance and is reported as `+∞`.
pub fn neighborhood_conductances(core: &Graph) -> Vec<f64> {
    let n = core.n();
    let total = core.volume();
    (0..n)
        .into_par_iter()
        .map_init(
            || vec![usize::MAX; n],
            |mark, v| {
                if core.neighbor_count(v) + 1 == n {
                    return f64::INFINITY;
                }
                mark[v] = v;
                for &u in core.neighbors(v) {
                    mark[u] = v;
                }
                let mut vol = core.degree(v);
                let mut internal = 0.0;
                for (u, w) in core.edges_of(v) {
                    vol += core.degree(u);
                    internal += 2.0 * w;
                    for (x, wx) in core.edges_of(u) {
                        if x != v && mark[x] == v {
                            internal += wx;
                        }
                    }
                }
                let denom = vol.min(total - vol);
                if denom > 0.0 {
                    (vol - internal) / denom
                } else {
                    f64::INFINITY
                }
            },
        )
        .collect()
}

/// Vertices whose closed-neighborhood conductance is no larger than that of
/// any neighbor (ties count as minimal).
pub fn seeds_locally_minimal(core: &Graph) -> SeedSet {
    let phi = neighborhood_conductances(core);
    let seeds = (0..core.n())
        .filter(|&v| core.neighbors(v).iter().all(|&u| phi[v] <= phi[u]))
        .collect();
    SeedSet {
        seeds,
        strategy: SeedStrategy::LocallyMinimal,
    }
}

/// `k` distinct vertices drawn uniformly without replacement, ascending.
pub fn seeds_random(core: &Graph, k: usize, rng_seed: u64) -> Result<SeedSet> {
    if k < 1 || k > core.n() {
        return Err(Error::InvalidParameter(format!(
            "k must lie in 1..={}, got {k}",
            core.n()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut seeds = rand::seq::index::sample(&mut rng, core.n(), k).into_vec();
    seeds.sort_unstable();
    Ok(SeedSet {
        seeds,
        strategy: SeedStrategy::Random,
    })
}
