use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::Graph;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphStats {
    pub n: usize,
    pub m: usize,
    pub max_degree: f64,
    pub avg_degree: f64,
    #[serde(rename = "avg_cc")]
    pub avg_clustering_coefficient: f64,
}

/// Vertex/edge counts, degree summary and the average local clustering
/// coefficient. The clustering coefficient ignores edge weights; vertices
/// with fewer than two neighbors contribute 0 to the average.
pub fn graph_stats(graph: &Graph) -> GraphStats {
    let n = graph.n();
    let max_degree = graph.degrees().iter().copied().fold(0.0, f64::max);
    let avg_degree = if n == 0 {
        0.0
    } else {
        graph.volume() / n as f64
    };

    let mut mark = vec![usize::MAX; n];
    let mut cc_sum = 0.0;
    for v in 0..n {
        let d = graph.neighbor_count(v);
        if d < 2 {
            continue;
        }
        for &u in graph.neighbors(v) {
            mark[u] = v;
        }
        // every edge among the neighbors is seen from both endpoints
        let mut twice_links = 0usize;
        for &u in graph.neighbors(v) {
            twice_links += graph.neighbors(u).iter().filter(|&&w| mark[w] == v).count();
        }
        let pairs = (d * (d - 1)) as f64;
        cc_sum += twice_links as f64 / pairs;
    }
    let avg_clustering_coefficient = if n == 0 { 0.0 } else { cc_sum / n as f64 };

    GraphStats {
        n,
        m: graph.edge_count(),
        max_degree,
        avg_degree,
        avg_clustering_coefficient,
    }
}

/// Number of vertices per neighbor count.
pub fn degree_histogram(graph: &Graph) -> BTreeMap<usize, usize> {
    let mut hist = BTreeMap::new();
    for v in 0..graph.n() {
        *hist.entry(graph.neighbor_count(v)).or_insert(0) += 1;
    }
    hist
}
