//! Biconnected-core filtering.
//!
//! Single-edge biconnected components are cut edges. Removing all of them
//! and keeping the largest remaining component gives the core; everything
//! else falls apart into whiskers, each hanging off the core by exactly
//! one bridge.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{largest_label, Graph, VertexId};

/// Maximal biconnected components as edge lists. Each edge is reported
/// once as `(u, v)` with `u < v`, and each component's edges are sorted.
///
/// The depth-first search uses an explicit stack and visits neighbors in
/// ascending id order.
pub fn biconnected_components(graph: &Graph) -> Vec<Vec<(VertexId, VertexId)>> {
    let n = graph.n();
    let mut disc = vec![0usize; n]; // 0 = unvisited, otherwise discovery time + 1
    let mut low = vec![0usize; n];
    let mut time = 0usize;
    let mut edge_stack: Vec<(VertexId, VertexId)> = Vec::new();
    let mut components = Vec::new();
    // (vertex, parent, next neighbor position)
    let mut stack: Vec<(VertexId, VertexId, usize)> = Vec::new();

    for root in 0..n {
        if disc[root] != 0 {
            continue;
        }
        time += 1;
        disc[root] = time;
        low[root] = time;
        stack.push((root, usize::MAX, 0));

        while let Some(frame) = stack.last_mut() {
            let (v, parent, next) = *frame;
            let nbrs = graph.neighbors(v);
            if next < nbrs.len() {
                frame.2 += 1;
                let u = nbrs[next];
                if u == parent {
                    continue;
                }
                if disc[u] == 0 {
                    edge_stack.push((v, u));
                    time += 1;
                    disc[u] = time;
                    low[u] = time;
                    stack.push((u, v, 0));
                } else if disc[u] < disc[v] {
                    edge_stack.push((v, u));
                    low[v] = low[v].min(disc[u]);
                }
            } else {
                stack.pop();
                if let Some(&(p, _, _)) = stack.last() {
                    low[p] = low[p].min(low[v]);
                    if low[v] >= disc[p] {
                        let mut component = Vec::new();
                        while let Some((a, b)) = edge_stack.pop() {
                            component.push((a.min(b), a.max(b)));
                            if (a, b) == (p, v) {
                                break;
                            }
                        }
                        component.sort_unstable();
                        components.push(component);
                    }
                }
            }
        }
    }
    components
}

/// A single-edge component with exactly one endpoint in the core.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Bridge {
    pub core_vertex: VertexId,
    pub whisker_vertex: VertexId,
    /// Index into [`CoreDecomposition::whiskers`].
    pub whisker: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Whisker {
    /// Parent-graph ids, ascending.
    pub vertices: Vec<VertexId>,
    /// Index into [`CoreDecomposition::bridges`].
    pub bridge: usize,
}

/// Core / detached split of a connected graph. All vertex ids refer to the
/// decomposed (parent) graph unless stated otherwise.
#[derive(Clone, Debug)]
pub struct CoreDecomposition {
    /// The core, relabelled densely: core vertex `i` is parent vertex
    /// `core_vertices[i]`.
    pub core: Graph,
    pub core_vertices: Vec<VertexId>,
    /// All single-edge biconnected components, `(u, v)` with `u < v`, sorted.
    pub single_edge_components: Vec<(VertexId, VertexId)>,
    /// Sorted by `(core_vertex, whisker_vertex)`.
    pub bridges: Vec<Bridge>,
    /// Ordered by smallest member.
    pub whiskers: Vec<Whisker>,
    /// `V \ V_C`, ascending.
    pub detached_vertices: Vec<VertexId>,
    /// Edges with both endpoints detached.
    pub detached_edge_count: usize,
    parent_vertices: usize,
    parent_edges: usize,
}

impl CoreDecomposition {
    pub fn is_core(&self, v: VertexId) -> bool {
        self.core_vertices.binary_search(&v).is_ok()
    }

    /// Core index of a parent vertex.
    pub fn core_index(&self, v: VertexId) -> Option<VertexId> {
        self.core_vertices.binary_search(&v).ok()
    }

    /// Parent vertex of a core index.
    pub fn parent_of(&self, core_index: VertexId) -> VertexId {
        self.core_vertices[core_index]
    }

    /// Bridges whose core endpoint is `v` (a parent id).
    pub fn bridges_at(&self, v: VertexId) -> &[Bridge] {
        let start = self.bridges.partition_point(|b| b.core_vertex < v);
        let end = self.bridges.partition_point(|b| b.core_vertex <= v);
        &self.bridges[start..end]
    }

    pub fn parent_vertex_count(&self) -> usize {
        self.parent_vertices
    }

    pub fn parent_edge_count(&self) -> usize {
        self.parent_edges
    }

    pub fn summary(&self) -> FilterSummary {
        let nv = self.parent_vertices as f64;
        let ne = self.parent_edges as f64;
        let detached_lcc = self
            .whiskers
            .iter()
            .map(|w| w.vertices.len())
            .max()
            .unwrap_or(0);
        FilterSummary {
            vertices: self.parent_vertices,
            edges: self.parent_edges,
            core_vertices: self.core.n(),
            core_vertex_pct: 100.0 * self.core.n() as f64 / nv,
            core_edges: self.core.edge_count(),
            core_edge_pct: if ne > 0.0 {
                100.0 * self.core.edge_count() as f64 / ne
            } else {
                0.0
            },
            detached_components: self.whiskers.len(),
            detached_lcc,
            detached_lcc_pct: 100.0 * detached_lcc as f64 / nv,
            bridges: self.bridges.len(),
            single_edge_components: self.single_edge_components.len(),
            detached_edges: self.detached_edge_count,
        }
    }
}

/// Core and detached-graph sizes, with percentages relative to the
/// decomposed graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FilterSummary {
    pub vertices: usize,
    pub edges: usize,
    pub core_vertices: usize,
    pub core_vertex_pct: f64,
    pub core_edges: usize,
    pub core_edge_pct: f64,
    pub detached_components: usize,
    pub detached_lcc: usize,
    pub detached_lcc_pct: f64,
    pub bridges: usize,
    pub single_edge_components: usize,
    pub detached_edges: usize,
}

/// Splits a connected graph into its biconnected core and whiskers.
pub fn decompose(graph: &Graph) -> Result<CoreDecomposition> {
    if graph.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let (_, components) = graph.connected_components();
    if components != 1 {
        return Err(Error::Disconnected { components });
    }
    let n = graph.n();

    let mut single: Vec<(VertexId, VertexId)> = biconnected_components(graph)
        .into_iter()
        .filter(|c| c.len() == 1)
        .map(|c| c[0])
        .collect();
    single.sort_unstable();
    let is_single = |u: VertexId, v: VertexId| single.binary_search(&(u.min(v), u.max(v))).is_ok();

    // components of (V, E \ E_S)
    let mut label = vec![usize::MAX; n];
    let mut count = 0;
    let mut stack = Vec::new();
    for start in 0..n {
        if label[start] != usize::MAX {
            continue;
        }
        label[start] = count;
        stack.push(start);
        while let Some(u) = stack.pop() {
            for &v in graph.neighbors(u) {
                if label[v] == usize::MAX && !is_single(u, v) {
                    label[v] = count;
                    stack.push(v);
                }
            }
        }
        count += 1;
    }
    let core_label = largest_label(&label, count);
    let in_core: Vec<bool> = label.iter().map(|&l| l == core_label).collect();
    let core_vertices: Vec<VertexId> = (0..n).filter(|&v| in_core[v]).collect();
    let detached_vertices: Vec<VertexId> = (0..n).filter(|&v| !in_core[v]).collect();
    let core = graph.induced_subgraph(&core_vertices)?;

    // whiskers: components of the graph induced by the detached vertices
    let mut whisker_of = vec![usize::MAX; n];
    let mut whiskers: Vec<Whisker> = Vec::new();
    let mut detached_edge_count = 0;
    for &start in &detached_vertices {
        for &v in graph.neighbors(start) {
            if !in_core[v] && v > start {
                detached_edge_count += 1;
            }
        }
        if whisker_of[start] != usize::MAX {
            continue;
        }
        let id = whiskers.len();
        let mut vertices = vec![start];
        whisker_of[start] = id;
        stack.push(start);
        while let Some(u) = stack.pop() {
            for &v in graph.neighbors(u) {
                if !in_core[v] && whisker_of[v] == usize::MAX {
                    whisker_of[v] = id;
                    vertices.push(v);
                    stack.push(v);
                }
            }
        }
        vertices.sort_unstable();
        whiskers.push(Whisker {
            vertices,
            bridge: usize::MAX,
        });
    }

    let mut bridges: Vec<Bridge> = single
        .iter()
        .filter(|&&(u, v)| in_core[u] != in_core[v])
        .map(|&(u, v)| {
            let (c, w) = if in_core[u] { (u, v) } else { (v, u) };
            Bridge {
                core_vertex: c,
                whisker_vertex: w,
                whisker: whisker_of[w],
            }
        })
        .collect();
    bridges.sort_unstable_by_key(|b| (b.core_vertex, b.whisker_vertex));
    for (i, b) in bridges.iter().enumerate() {
        let slot = &mut whiskers[b.whisker].bridge;
        if *slot != usize::MAX {
            return Err(Error::InvalidInput(format!(
                "whisker {} is attached by more than one bridge",
                b.whisker
            )));
        }
        *slot = i;
    }
    if let Some(w) = whiskers.iter().position(|w| w.bridge == usize::MAX) {
        return Err(Error::InvalidInput(format!("whisker {w} has no bridge")));
    }

    Ok(CoreDecomposition {
        core,
        core_vertices,
        single_edge_components: single,
        bridges,
        whiskers,
        detached_vertices,
        detached_edge_count,
        parent_vertices: n,
        parent_edges: graph.edge_count(),
    })
}
