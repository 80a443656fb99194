use rand::seq::SliceRandom;
use rand::Rng;

use crate::graph::{Graph, VertexId};

/// A graph level in the multilevel hierarchy.
///
/// Each vertex stands for a set `S` of finest-level vertices. Its weight is
/// the total finest degree of `S`, and `self_links` holds `links(S, S)`, the
/// weight of edges that collapsed inside `S`. Keeping both lets the kernel
/// statistics of any cluster be evaluated exactly on coarse levels, and the
/// total weight is conserved from level to level.
#[derive(Clone, Debug)]
pub struct CoarseGraph {
    graph: Graph,
    vertex_weights: Vec<f64>,
    self_links: Vec<f64>,
}

impl CoarseGraph {
    pub fn from_graph(graph: &Graph) -> Self {
        CoarseGraph {
            graph: graph.clone(),
            vertex_weights: graph.degrees().to_vec(),
            self_links: vec![0.0; graph.n()],
        }
    }

    /// Loopless adjacency between the merged vertices.
    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn vertex_weight(&self, v: VertexId) -> f64 {
        self.vertex_weights[v]
    }

    pub fn self_links(&self, v: VertexId) -> f64 {
        self.self_links[v]
    }

    /// Total vertex weight; equals the finest graph's volume.
    pub fn volume(&self) -> f64 {
        self.vertex_weights.iter().sum()
    }
}

/// Heavy-edge matching in a random visiting order.
pub fn coarsen<R: Rng + ?Sized>(level: &CoarseGraph, rng: &mut R) -> (CoarseGraph, Vec<VertexId>) {
    let mut order: Vec<VertexId> = (0..level.n()).collect();
    order.shuffle(rng);
    coarsen_with_order(level, &order)
}

/// Heavy-edge matching visiting vertices in `order`: each unmatched vertex
/// is matched with its unmatched neighbor of largest edge weight (ties to
/// the lowest id), or left alone if none remains. Returns the coarse level
/// and the fine-to-coarse map. Coarse ids follow the smallest fine id of
/// each merged pair.
pub fn coarsen_with_order(level: &CoarseGraph, order: &[VertexId]) -> (CoarseGraph, Vec<VertexId>) {
    let n = level.n();
    let g = &level.graph;
    let mut mate = vec![usize::MAX; n];
    for &v in order {
        if mate[v] != usize::MAX {
            continue;
        }
        let mut best = v;
        let mut best_w = f64::NEG_INFINITY;
        for (u, w) in g.edges_of(v) {
            if mate[u] == usize::MAX && w > best_w {
                best = u;
                best_w = w;
            }
        }
        mate[v] = best;
        mate[best] = v;
    }

    let mut map = vec![usize::MAX; n];
    let mut nc = 0;
    for v in 0..n {
        if map[v] == usize::MAX {
            map[v] = nc;
            map[mate[v]] = nc;
            nc += 1;
        }
    }

    let mut vertex_weights = vec![0.0; nc];
    let mut self_links = vec![0.0; nc];
    let mut acc = vec![0.0; nc];
    let mut touched: Vec<VertexId> = Vec::new();
    let mut edges = Vec::new();
    let mut members = vec![[usize::MAX; 2]; nc];
    for v in 0..n {
        let slot = &mut members[map[v]];
        if slot[0] == usize::MAX {
            slot[0] = v;
        } else {
            slot[1] = v;
        }
    }
    for (c, pair) in members.iter().enumerate() {
        for &v in pair.iter().filter(|&&v| v != usize::MAX) {
            vertex_weights[c] += level.vertex_weights[v];
            self_links[c] += level.self_links[v];
            for (u, w) in g.edges_of(v) {
                let d = map[u];
                if d == c {
                    self_links[c] += w;
                } else {
                    if acc[d] == 0.0 {
                        touched.push(d);
                    }
                    acc[d] += w;
                }
            }
        }
        touched.sort_unstable();
        for &d in &touched {
            if d > c {
                edges.push((c, d, acc[d]));
            }
            acc[d] = 0.0;
        }
        touched.clear();
    }

    let graph = Graph::from_canonical((0..nc as u64).collect(), edges, true);
    (
        CoarseGraph {
            graph,
            vertex_weights,
            self_links,
        },
        map,
    )
}
