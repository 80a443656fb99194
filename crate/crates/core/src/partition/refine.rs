use super::{CoarseGraph, KernelParams, Partition};
use crate::error::Result;
use crate::graph::Graph;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RefineOptions {
    pub max_iters: usize,
    /// Only vertices with a neighbor in another cluster are move
    /// candidates, and only clusters they touch are considered.
    pub boundary_only: bool,
}

impl Default for RefineOptions {
    fn default() -> Self {
        RefineOptions {
            max_iters: 20,
            boundary_only: true,
        }
    }
}

/// Batch weighted kernel k-means sweeps with default options except for
/// the sweep limit.
pub fn refine_weighted_kernel_kmeans(
    graph: &Graph,
    partition: &Partition,
    params: KernelParams,
    max_iters: usize,
) -> Result<Partition> {
    let opts = RefineOptions {
        max_iters,
        ..RefineOptions::default()
    };
    refine_with_options(graph, partition, params, &opts)
}

/// Each sweep computes, for every candidate vertex, its kernel distance to
/// the current centroid of each cluster; all moves are then applied and the
/// cluster statistics updated. A move that would empty its source cluster is
/// skipped. Stops after `max_iters` sweeps or when nothing moves.
pub fn refine_with_options(
    graph: &Graph,
    partition: &Partition,
    params: KernelParams,
    opts: &RefineOptions,
) -> Result<Partition> {
    partition.check_graph(graph)?;
    let level = CoarseGraph::from_graph(graph);
    let mut labels = partition.assignment().to_vec();
    refine_level(&level, &mut labels, partition.k(), params.sigma, opts);
    Partition::new(labels)
}

/// Squared distance from a vertex to a centroid, minus the vertex's own
/// `K_vv` term (the same for every cluster).
#[inline]
fn centroid_score(links: f64, dv: f64, internal: f64, vol: f64, sigma: f64, own: bool) -> f64 {
    let s = -2.0 * links / (dv * vol) + internal / (vol * vol) + sigma / vol;
    if own {
        s - 2.0 * sigma / vol
    } else {
        s
    }
}

/// Refines `labels` in place; returns the number of sweeps that moved
/// at least one vertex.
pub(crate) fn refine_level(
    level: &CoarseGraph,
    labels: &mut [usize],
    k: usize,
    sigma: f64,
    opts: &RefineOptions,
) -> usize {
    let g = level.graph();
    let n = level.n();
    let mut vol = vec![0.0; k];
    let mut internal = vec![0.0; k];
    let mut count = vec![0usize; k];
    for v in 0..n {
        let c = labels[v];
        vol[c] += level.vertex_weight(v);
        internal[c] += level.self_links(v);
        count[c] += 1;
        for (u, w) in g.edges_of(v) {
            if labels[u] == c {
                internal[c] += w;
            }
        }
    }

    let mut acc = vec![0.0; k];
    let mut touched: Vec<usize> = Vec::new();
    let mut moves: Vec<(usize, usize)> = Vec::new();
    let mut active_sweeps = 0;
    for _ in 0..opts.max_iters {
        moves.clear();
        for v in 0..n {
            let dv = level.vertex_weight(v);
            if dv <= 0.0 {
                continue;
            }
            let own = labels[v];
            let mut own_links = level.self_links(v);
            for (u, w) in g.edges_of(v) {
                let c = labels[u];
                if c == own {
                    own_links += w;
                } else {
                    if acc[c] == 0.0 {
                        touched.push(c);
                    }
                    acc[c] += w;
                }
            }
            if !(opts.boundary_only && touched.is_empty()) {
                let own_score = centroid_score(own_links, dv, internal[own], vol[own], sigma, true);
                let mut best = own;
                let mut best_score = f64::INFINITY;
                let mut consider = |c: usize| {
                    if c != own && vol[c] > 0.0 {
                        let s = centroid_score(acc[c], dv, internal[c], vol[c], sigma, false);
                        if s < best_score {
                            best = c;
                            best_score = s;
                        }
                    }
                };
                if opts.boundary_only {
                    touched.sort_unstable();
                    touched.iter().for_each(|&c| consider(c));
                } else {
                    (0..k).for_each(consider);
                }
                let scale = own_score.abs().max(best_score.abs()).max(f64::MIN_POSITIVE);
                if best != own && best_score < own_score - 1e-12 * scale {
                    moves.push((v, best));
                }
            }
            for &c in &touched {
                acc[c] = 0.0;
            }
            touched.clear();
        }
        if moves.is_empty() {
            break;
        }

        let mut moved = false;
        for &(v, to) in &moves {
            let from = labels[v];
            if count[from] == 1 {
                continue;
            }
            let (mut l_from, mut l_to) = (0.0, 0.0);
            for (u, w) in g.edges_of(v) {
                if labels[u] == from {
                    l_from += w;
                } else if labels[u] == to {
                    l_to += w;
                }
            }
            let dv = level.vertex_weight(v);
            let own = level.self_links(v);
            internal[from] -= 2.0 * l_from + own;
            internal[to] += 2.0 * l_to + own;
            vol[from] -= dv;
            vol[to] += dv;
            count[from] -= 1;
            count[to] += 1;
            labels[v] = to;
            moved = true;
        }
        if !moved {
            break;
        }
        active_sweeps += 1;
    }
    active_sweeps
}
