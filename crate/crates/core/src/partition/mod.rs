//! Disjoint k-way clustering by multilevel weighted kernel k-means.
//!
//! With vertex weights equal to degrees and the kernel
//! `K = σ·D⁻¹ + D⁻¹·A·D⁻¹`, the weighted kernel k-means objective differs
//! from the sum of normalized cuts by a constant that depends only on `n`,
//! `k` and `σ`. Minimizing one minimizes the other, so the refinement below
//! works directly with cluster volumes and internal link weights and never
//! forms `K`.

mod coarsen;
mod hierarchy;
mod refine;

pub use coarsen::{coarsen, coarsen_with_order, CoarseGraph};
pub use hierarchy::{hierarchical_partition, PartitionConfig};
pub use refine::{refine_weighted_kernel_kmeans, refine_with_options, RefineOptions};

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{links, volume, Graph, VertexId};

/// Kernel shift `σ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    pub sigma: f64,
}

impl Default for KernelParams {
    fn default() -> Self {
        KernelParams { sigma: 0.0 }
    }
}

impl KernelParams {
    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "sigma must be finite and non-negative, got {sigma}"
            )));
        }
        Ok(KernelParams { sigma })
    }
}

/// Exhaustive, disjoint clustering with clusters numbered `0..k`, none empty.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    assignment: Vec<usize>,
    k: usize,
}

impl Partition {
    /// `assignment[v]` is the cluster of vertex `v`; labels must cover
    /// `0..k` without gaps.
    pub fn new(assignment: Vec<usize>) -> Result<Self> {
        let k = assignment.iter().max().map_or(0, |&m| m + 1);
        let mut seen = vec![false; k];
        for &c in &assignment {
            seen[c] = true;
        }
        if let Some(empty) = seen.iter().position(|&s| !s) {
            return Err(Error::InvalidInput(format!("cluster {empty} is empty")));
        }
        Ok(Partition { assignment, k })
    }

    /// Relabels arbitrary cluster labels to `0..k`, keeping their order.
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut distinct = labels.to_vec();
        distinct.sort_unstable();
        distinct.dedup();
        let assignment = labels
            .iter()
            .map(|l| distinct.binary_search(l).expect("label collected above"))
            .collect();
        Partition {
            assignment,
            k: distinct.len(),
        }
    }

    pub fn single(n: usize) -> Self {
        Partition {
            assignment: vec![0; n],
            k: usize::from(n > 0),
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn cluster_of(&self, v: VertexId) -> usize {
        self.assignment[v]
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    /// Members of every cluster, each ascending.
    pub fn clusters(&self) -> Vec<Vec<VertexId>> {
        let mut clusters = vec![Vec::new(); self.k];
        for (v, &c) in self.assignment.iter().enumerate() {
            clusters[c].push(v);
        }
        clusters
    }

    fn check_graph(&self, graph: &Graph) -> Result<()> {
        if self.assignment.len() != graph.n() {
            return Err(Error::InvalidInput(format!(
                "partition covers {} vertices but the graph has {}",
                self.assignment.len(),
                graph.n()
            )));
        }
        Ok(())
    }
}

/// Per-cluster volume and internal link weight `links(C, C)`.
pub(crate) fn cluster_stats(graph: &Graph, partition: &Partition) -> (Vec<f64>, Vec<f64>) {
    let mut vol = vec![0.0; partition.k()];
    let mut internal = vec![0.0; partition.k()];
    for v in 0..graph.n() {
        let c = partition.cluster_of(v);
        vol[c] += graph.degree(v);
        for (u, w) in graph.edges_of(v) {
            if partition.cluster_of(u) == c {
                internal[c] += w;
            }
        }
    }
    (vol, internal)
}

/// Kernel distance between `v` and the centroid of `cluster`, treating `v`
/// as a member of the cluster:
///
/// `−2·links(v,C)/(deg(v)·deg(C)) + links(C,C)/deg(C)² + σ/deg(v) − σ/deg(C)`
pub fn kernel_distance(
    graph: &Graph,
    v: VertexId,
    cluster: &[VertexId],
    params: KernelParams,
) -> Result<f64> {
    graph.check_vertex(v)?;
    let dv = graph.degree(v);
    if dv <= 0.0 {
        return Err(Error::InvalidInput(format!("vertex {v} has zero degree")));
    }
    if cluster.is_empty() {
        return Err(Error::InvalidInput("empty cluster".into()));
    }
    let dc = volume(graph, cluster)?;
    if dc <= 0.0 {
        return Err(Error::InvalidInput("cluster has zero volume".into()));
    }
    let lvc = links(graph, &[v], cluster)?;
    let lcc = links(graph, cluster, cluster)?;
    Ok(distance_from_parts(lvc, dv, lcc, dc, params.sigma))
}

#[inline]
pub(crate) fn distance_from_parts(lvc: f64, dv: f64, lcc: f64, dc: f64, sigma: f64) -> f64 {
    -2.0 * lvc / (dv * dc) + lcc / (dc * dc) + sigma / dv - sigma / dc
}

/// `Σ_c ncut(C_c)`.
pub fn normalized_cut_sum(graph: &Graph, partition: &Partition) -> Result<f64> {
    partition.check_graph(graph)?;
    let (vol, internal) = cluster_stats(graph, partition);
    let mut total = 0.0;
    for (v, i) in vol.into_iter().zip(internal) {
        if v <= 0.0 {
            return Err(Error::UndefinedMetric {
                metric: "normalized cut",
                reason: "a cluster with zero volume",
            });
        }
        total += (v - i) / v;
    }
    Ok(total)
}

/// Weighted kernel k-means objective `Σ_v deg(v)·‖φ(v) − m_c(v)‖²`,
/// evaluated in closed form from cluster statistics.
pub fn kernel_kmeans_objective(
    graph: &Graph,
    partition: &Partition,
    params: KernelParams,
) -> Result<f64> {
    partition.check_graph(graph)?;
    let (vol, internal) = cluster_stats(graph, partition);
    // Σ_v w_v K_vv = σ·n on a loopless graph
    let mut total = params.sigma * graph.n() as f64;
    for (v, i) in vol.into_iter().zip(internal) {
        if v <= 0.0 {
            return Err(Error::UndefinedMetric {
                metric: "kernel k-means objective",
                reason: "a cluster with zero volume",
            });
        }
        total -= (i + params.sigma * v) / v;
    }
    Ok(total)
}

/// Reads `external_id cluster_index` lines. Every vertex of `graph` must
/// appear exactly once; cluster labels are compacted to `0..k` in order.
pub fn read_partition<R: BufRead>(graph: &Graph, reader: R) -> Result<Partition> {
    let mut labels = vec![usize::MAX; graph.n()];
    for (index, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = index + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let (Some(id), Some(label), None) = (tokens.next(), tokens.next(), tokens.next()) else {
            return Err(Error::parse(lineno, "expected `external_id cluster_index`"));
        };
        let id: u64 = id
            .parse()
            .map_err(|_| Error::parse(lineno, format!("invalid vertex id {id:?}")))?;
        let label: usize = label
            .parse()
            .map_err(|_| Error::parse(lineno, format!("invalid cluster index {label:?}")))?;
        let v = graph.internal_id(id).ok_or(Error::UnknownVertex(id))?;
        if labels[v] != usize::MAX {
            return Err(Error::parse(lineno, format!("vertex {id} listed twice")));
        }
        labels[v] = label;
    }
    if let Some(v) = labels.iter().position(|&l| l == usize::MAX) {
        return Err(Error::InvalidInput(format!(
            "vertex {} missing from partition file",
            graph.external_id(v)
        )));
    }
    Ok(Partition::from_labels(&labels))
}

/// One `external_id cluster_index` line per vertex in ascending id order.
pub fn write_partition<W: Write>(graph: &Graph, partition: &Partition, mut out: W) -> Result<()> {
    partition.check_graph(graph)?;
    for v in 0..graph.n() {
        writeln!(out, "{} {}", graph.external_id(v), partition.cluster_of(v))?;
    }
    out.flush()?;
    Ok(())
}
