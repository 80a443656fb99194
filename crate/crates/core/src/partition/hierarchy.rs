use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::coarsen::{coarsen, CoarseGraph};
use super::refine::{refine_level, RefineOptions};
use super::{KernelParams, Partition};
use crate::error::{Error, Result};
use crate::graph::{Graph, VertexId};
use crate::rng::mix_seed;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionConfig {
    pub kernel: KernelParams,
    /// Coarsening stops once a level has at most this many vertices.
    pub coarsest_size: usize,
    /// Refinement sweeps per level.
    pub max_iters: usize,
    pub boundary_only: bool,
    /// Region-growing starts tried on the coarsest level; the best by
    /// normalized cut is kept.
    pub init_trials: usize,
}

impl Default for PartitionConfig {
    fn default() -> Self {
        PartitionConfig {
            kernel: KernelParams::default(),
            coarsest_size: 64,
            max_iters: 20,
            boundary_only: true,
            init_trials: 8,
        }
    }
}

/// Top-down clustering by repeated multilevel bisection.
///
/// Clusters are split breadth-first until `2^⌈log₂ k⌉` leaves exist or no
/// cluster with two or more vertices is left. Splits on one level run in
/// parallel on the current rayon pool; each split draws from its own RNG
/// stream derived from `rng_seed`, the level and the cluster index, so the
/// result does not depend on the thread count.
pub fn hierarchical_partition(
    graph: &Graph,
    k: usize,
    config: &PartitionConfig,
    rng_seed: u64,
) -> Result<Partition> {
    let n = graph.n();
    if k < 1 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    if k > n {
        return Err(Error::InvalidParameter(format!(
            "k = {k} exceeds the vertex count {n}"
        )));
    }
    let target = k.next_power_of_two();
    let mut clusters: Vec<Vec<VertexId>> = vec![(0..n).collect()];
    let mut depth = 0u64;
    while clusters.len() < target {
        let mut budget = target - clusters.len();
        let plan: Vec<bool> = clusters
            .iter()
            .map(|c| {
                let split = budget > 0 && c.len() > 1;
                if split {
                    budget -= 1;
                }
                split
            })
            .collect();
        if !plan.iter().any(|&s| s) {
            break;
        }
        let next: Vec<Vec<Vec<VertexId>>> = clusters
            .par_iter()
            .zip(plan.par_iter())
            .enumerate()
            .map(|(i, (members, &split))| {
                if !split {
                    return Ok(vec![members.clone()]);
                }
                let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(rng_seed, &[depth, i as u64]));
                let (a, b) = bisect(graph, members, config, &mut rng)?;
                Ok(vec![a, b])
            })
            .collect::<Result<_>>()?;
        clusters = next.into_iter().flatten().collect();
        depth += 1;
    }

    let mut assignment = vec![0; n];
    for (c, members) in clusters.iter().enumerate() {
        for &v in members {
            assignment[v] = c;
        }
    }
    Partition::new(assignment)
}

/// Splits `members` (at least two vertices) into two non-empty parts.
fn bisect<R: Rng>(
    graph: &Graph,
    members: &[VertexId],
    config: &PartitionConfig,
    rng: &mut R,
) -> Result<(Vec<VertexId>, Vec<VertexId>)> {
    let sub = graph.induced_subgraph(members)?;
    let sigma = config.kernel.sigma;
    let refine = RefineOptions {
        max_iters: config.max_iters,
        boundary_only: config.boundary_only,
    };

    let mut levels = vec![CoarseGraph::from_graph(&sub)];
    let mut maps: Vec<Vec<VertexId>> = Vec::new();
    while levels.last().unwrap().n() > config.coarsest_size.max(2) {
        let current = levels.last().unwrap();
        let (next, map) = coarsen(current, rng);
        // stalled: mostly unmatched vertices (stars, isolated vertices)
        if next.n() as f64 > 0.95 * current.n() as f64 {
            break;
        }
        levels.push(next);
        maps.push(map);
    }

    let coarsest = levels.last().unwrap();
    let full = RefineOptions {
        max_iters: config.max_iters,
        boundary_only: false,
    };
    let mut best: Option<(f64, Vec<usize>)> = None;
    for _ in 0..config.init_trials.max(1) {
        let mut labels = region_growing(coarsest, rng);
        refine_level(coarsest, &mut labels, 2, sigma, &full);
        let score = two_way_ncut(coarsest, &labels);
        if best.as_ref().is_none_or(|(s, _)| score < *s) {
            best = Some((score, labels));
        }
    }
    let mut labels = best.expect("at least one trial").1;

    for depth in (0..maps.len()).rev() {
        let map = &maps[depth];
        labels = map.iter().map(|&c| labels[c]).collect();
        refine_level(&levels[depth], &mut labels, 2, sigma, &refine);
    }

    let mut parts = (Vec::new(), Vec::new());
    for (i, &v) in members.iter().enumerate() {
        if labels[i] == 0 {
            parts.0.push(v);
        } else {
            parts.1.push(v);
        }
    }
    debug_assert!(!parts.0.is_empty() && !parts.1.is_empty());
    Ok(parts)
}

/// Grows two regions breadth-first from two distinct random vertices, the
/// lighter region taking the next step. Vertices unreachable from both go
/// to the lighter region.
fn region_growing<R: Rng>(level: &CoarseGraph, rng: &mut R) -> Vec<usize> {
    let n = level.n();
    let g = level.graph();
    let a = rng.gen_range(0..n);
    let mut b = rng.gen_range(0..n - 1);
    if b >= a {
        b += 1;
    }
    let mut labels = vec![usize::MAX; n];
    let mut weight = [0.0f64; 2];
    let mut frontier = [VecDeque::new(), VecDeque::new()];
    for (r, s) in [(0, a), (1, b)] {
        labels[s] = r;
        weight[r] += level.vertex_weight(s);
        frontier[r].push_back(s);
    }
    loop {
        let r = match (frontier[0].is_empty(), frontier[1].is_empty()) {
            (true, true) => break,
            (false, true) => 0,
            (true, false) => 1,
            (false, false) => usize::from(weight[1] < weight[0]),
        };
        let u = frontier[r].pop_front().unwrap();
        for &v in g.neighbors(u) {
            if labels[v] == usize::MAX {
                labels[v] = r;
                weight[r] += level.vertex_weight(v);
                frontier[r].push_back(v);
            }
        }
    }
    for (v, label) in labels.iter_mut().enumerate() {
        if *label == usize::MAX {
            let r = usize::from(weight[1] < weight[0]);
            *label = r;
            weight[r] += level.vertex_weight(v);
        }
    }
    labels
}

/// Sum of normalized cuts of a two-way labelling; zero-volume sides
/// contribute nothing.
fn two_way_ncut(level: &CoarseGraph, labels: &[usize]) -> f64 {
    let mut vol = [0.0; 2];
    let mut internal = [0.0; 2];
    for v in 0..level.n() {
        let c = labels[v];
        vol[c] += level.vertex_weight(v);
        internal[c] += level.self_links(v);
        for (u, w) in level.graph().edges_of(v) {
            if labels[u] == c {
                internal[c] += w;
            }
        }
    }
    (0..2)
        .filter(|&c| vol[c] > 0.0)
        .map(|c| (vol[c] - internal[c]) / vol[c])
        .sum()
}
