//! Undirected weighted graphs in compressed adjacency form.
//!
//! Internal vertex ids are dense `0..n`. Every graph also carries the
//! external id of each vertex (the id used in the input file), and the
//! external ids are kept strictly increasing so internal order and
//! external order always agree. Subgraphs inherit the external ids of the
//! vertices they keep.

mod io;
mod metrics;
mod stats;

pub use io::{load_edge_list, load_edge_list_file, write_edge_list, LoadOptions};
pub use metrics::{conductance, cut, links, ncut, volume, VertexSet};
pub use stats::{degree_histogram, graph_stats, GraphStats};

use std::collections::VecDeque;

use crate::error::{Error, Result};

pub type VertexId = usize;

#[derive(Clone, Debug, PartialEq)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<VertexId>,
    weights: Vec<f64>,
    degrees: Vec<f64>,
    volume: f64,
    external_ids: Vec<u64>,
    unit_weights: bool,
}

impl Graph {
    /// Builds an unweighted graph on `n` vertices whose external ids are
    /// `0..n`. Duplicate and reciprocal pairs collapse to one unit edge;
    /// self-loops are dropped.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (VertexId, VertexId)>,
    {
        let mut list = Vec::new();
        for (u, v) in edges {
            check_range(u, n)?;
            check_range(v, n)?;
            if u != v {
                list.push((u.min(v), u.max(v), 1.0));
            }
        }
        Ok(Self::from_canonical((0..n as u64).collect(), list, false))
    }

    /// Weighted variant of [`Graph::from_edges`]; duplicate pairs have
    /// their weights summed.
    pub fn from_weighted_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (VertexId, VertexId, f64)>,
    {
        let mut list = Vec::new();
        for (u, v, w) in edges {
            check_range(u, n)?;
            check_range(v, n)?;
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "edge ({u}, {v}) has non-positive weight {w}"
                )));
            }
            if u != v {
                list.push((u.min(v), u.max(v), w));
            }
        }
        Ok(Self::from_canonical((0..n as u64).collect(), list, true))
    }

    /// `edges` must hold `(u, v, w)` with `u < v < external_ids.len()`.
    pub(crate) fn from_canonical(
        external_ids: Vec<u64>,
        mut edges: Vec<(VertexId, VertexId, f64)>,
        sum_duplicates: bool,
    ) -> Self {
        debug_assert!(external_ids.windows(2).all(|w| w[0] < w[1]));
        let n = external_ids.len();
        edges.sort_unstable_by_key(|e| (e.0, e.1));
        edges.dedup_by(|next, kept| {
            if next.0 == kept.0 && next.1 == kept.1 {
                if sum_duplicates {
                    kept.2 += next.2;
                }
                true
            } else {
                false
            }
        });

        let mut counts = vec![0usize; n + 1];
        for &(u, v, _) in &edges {
            counts[u + 1] += 1;
            counts[v + 1] += 1;
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let offsets = counts;
        let mut cursor = offsets.clone();
        let mut targets = vec![0; 2 * edges.len()];
        let mut weights = vec![0.0; 2 * edges.len()];
        // Filling in sorted edge order leaves every neighbor list sorted.
        for &(u, v, w) in &edges {
            targets[cursor[u]] = v;
            weights[cursor[u]] = w;
            cursor[u] += 1;
            targets[cursor[v]] = u;
            weights[cursor[v]] = w;
            cursor[v] += 1;
        }
        let degrees: Vec<f64> = (0..n)
            .map(|v| weights[offsets[v]..offsets[v + 1]].iter().sum())
            .collect();
        let volume = degrees.iter().sum();
        let unit_weights = weights.iter().all(|&w| w == 1.0);
        Graph {
            offsets,
            targets,
            weights,
            degrees,
            volume,
            external_ids,
            unit_weights,
        }
    }

    pub fn n(&self) -> usize {
        self.degrees.len()
    }

    /// Number of undirected edges.
    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    pub fn is_empty(&self) -> bool {
        self.n() == 0
    }

    #[inline]
    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    #[inline]
    pub fn neighbor_weights(&self, v: VertexId) -> &[f64] {
        &self.weights[self.offsets[v]..self.offsets[v + 1]]
    }

    /// `(neighbor, weight)` pairs of `v` in ascending neighbor order.
    #[inline]
    pub fn edges_of(&self, v: VertexId) -> impl Iterator<Item = (VertexId, f64)> + '_ {
        self.neighbors(v)
            .iter()
            .copied()
            .zip(self.neighbor_weights(v).iter().copied())
    }

    /// Each undirected edge once, as `(u, v, w)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId, f64)> + '_ {
        (0..self.n()).flat_map(move |u| {
            self.edges_of(u)
                .filter(move |&(v, _)| v > u)
                .map(move |(v, w)| (u, v, w))
        })
    }

    /// Number of incident edges, ignoring weights.
    #[inline]
    pub fn neighbor_count(&self, v: VertexId) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    /// Weighted degree `links(v, V)`.
    #[inline]
    pub fn degree(&self, v: VertexId) -> f64 {
        self.degrees[v]
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    /// Total weighted degree `links(V, V)`.
    pub fn volume(&self) -> f64 {
        self.volume
    }

    pub fn has_unit_weights(&self) -> bool {
        self.unit_weights
    }

    /// Weight of edge `(u, v)`, zero when absent.
    pub fn edge_weight(&self, u: VertexId, v: VertexId) -> f64 {
        match self.neighbors(u).binary_search(&v) {
            Ok(i) => self.neighbor_weights(u)[i],
            Err(_) => 0.0,
        }
    }

    pub fn external_id(&self, v: VertexId) -> u64 {
        self.external_ids[v]
    }

    pub fn external_ids(&self) -> &[u64] {
        &self.external_ids
    }

    pub fn internal_id(&self, external: u64) -> Option<VertexId> {
        self.external_ids.binary_search(&external).ok()
    }

    pub fn check_vertex(&self, v: VertexId) -> Result<()> {
        check_range(v, self.n())
    }

    /// Component label per vertex and the component count. Labels are
    /// assigned in order of each component's smallest vertex.
    pub fn connected_components(&self) -> (Vec<usize>, usize) {
        const UNSEEN: usize = usize::MAX;
        let mut label = vec![UNSEEN; self.n()];
        let mut queue = VecDeque::new();
        let mut count = 0;
        for start in 0..self.n() {
            if label[start] != UNSEEN {
                continue;
            }
            label[start] = count;
            queue.push_back(start);
            while let Some(u) = queue.pop_front() {
                for &v in self.neighbors(u) {
                    if label[v] == UNSEEN {
                        label[v] = count;
                        queue.push_back(v);
                    }
                }
            }
            count += 1;
        }
        (label, count)
    }

    pub fn is_connected(&self) -> bool {
        self.n() > 0 && self.connected_components().1 == 1
    }

    /// Subgraph induced by `members`, relabelled densely in ascending order
    /// of the given ids. The sub-vertex `i` corresponds to the `i`-th
    /// smallest member.
    pub fn induced_subgraph(&self, members: &[VertexId]) -> Result<Graph> {
        let mut members = members.to_vec();
        members.sort_unstable();
        members.dedup();
        for &v in &members {
            self.check_vertex(v)?;
        }
        let mut edges = Vec::new();
        for (i, &u) in members.iter().enumerate() {
            for (v, w) in self.edges_of(u) {
                if v > u {
                    if let Ok(j) = members.binary_search(&v) {
                        edges.push((i, j, w));
                    }
                }
            }
        }
        let external_ids = members.iter().map(|&v| self.external_ids[v]).collect();
        Ok(Graph::from_canonical(external_ids, edges, false))
    }
}

/// Largest connected component by vertex count; ties go to the component
/// holding the smallest external id.
pub fn largest_connected_component(graph: &Graph) -> Result<Graph> {
    if graph.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let (label, count) = graph.connected_components();
    if count == 1 {
        return Ok(graph.clone());
    }
    let best = largest_label(&label, count);
    let members: Vec<VertexId> = (0..graph.n()).filter(|&v| label[v] == best).collect();
    graph.induced_subgraph(&members)
}

/// Largest label by member count, ties to the lowest label. Labels from
/// [`Graph::connected_components`] are ordered by smallest member, which
/// (with ascending external ids) is the smallest external id.
pub(crate) fn largest_label(label: &[usize], count: usize) -> usize {
    let mut sizes = vec![0usize; count];
    for &l in label {
        sizes[l] += 1;
    }
    let mut best = 0;
    for (l, &size) in sizes.iter().enumerate() {
        if size > sizes[best] {
            best = l;
        }
    }
    best
}

fn check_range(v: VertexId, n: usize) -> Result<()> {
    if v < n {
        Ok(())
    } else {
        Err(Error::VertexOutOfRange { vertex: v, n })
    }
}
