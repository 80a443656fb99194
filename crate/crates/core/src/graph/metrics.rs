//! Cut, normalized cut and conductance of vertex sets.

use super::{Graph, VertexId};
use crate::error::{Error, Result};

/// Sorted, duplicate-free vertex set with its volume and cut cached.
#[derive(Clone, Debug, PartialEq)]
pub struct VertexSet {
    members: Vec<VertexId>,
    volume: f64,
    cut: f64,
    graph_volume: f64,
    graph_order: usize,
}

impl VertexSet {
    pub fn new(graph: &Graph, mut members: Vec<VertexId>) -> Result<Self> {
        members.sort_unstable();
        members.dedup();
        for &v in &members {
            graph.check_vertex(v)?;
        }
        let (volume, cut) = volume_and_cut_sorted(graph, &members);
        Ok(VertexSet {
            members,
            volume,
            cut,
            graph_volume: graph.volume(),
            graph_order: graph.n(),
        })
    }

    pub fn members(&self) -> &[VertexId] {
        &self.members
    }

    pub fn into_members(self) -> Vec<VertexId> {
        self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.members.binary_search(&v).is_ok()
    }

    /// `deg(C) = links(C, V)`.
    pub fn volume(&self) -> f64 {
        self.volume
    }

    pub fn cut(&self) -> f64 {
        self.cut
    }

    pub fn ncut(&self) -> Result<f64> {
        self.check_proper("normalized cut")?;
        if self.volume <= 0.0 {
            return Err(Error::UndefinedMetric {
                metric: "normalized cut",
                reason: "a set of zero volume",
            });
        }
        Ok(self.cut / self.volume)
    }

    pub fn conductance(&self) -> Result<f64> {
        self.check_proper("conductance")?;
        if self.volume.min(self.graph_volume - self.volume) <= 0.0 {
            return Err(Error::UndefinedMetric {
                metric: "conductance",
                reason: "a side of zero volume",
            });
        }
        Ok(conductance_from_parts(
            self.cut,
            self.volume,
            self.graph_volume,
        ))
    }

    fn check_proper(&self, metric: &'static str) -> Result<()> {
        if self.members.is_empty() {
            return Err(Error::UndefinedMetric {
                metric,
                reason: "the empty set",
            });
        }
        if self.members.len() == self.graph_order {
            return Err(Error::UndefinedMetric {
                metric,
                reason: "the full vertex set",
            });
        }
        Ok(())
    }
}

/// `cut / min(vol, total - vol)`.
#[inline]
pub(crate) fn conductance_from_parts(cut: f64, volume: f64, total_volume: f64) -> f64 {
    cut / volume.min(total_volume - volume)
}

/// Sum of edge weights over ordered pairs `(u, v)` with `u ∈ p`, `v ∈ q`.
/// Internal edges of `p ∩ q` therefore count twice.
pub fn links(graph: &Graph, p: &[VertexId], q: &[VertexId]) -> Result<f64> {
    for &v in p.iter().chain(q) {
        graph.check_vertex(v)?;
    }
    let q = sorted_unique(q);
    let mut p = p.to_vec();
    p.sort_unstable();
    p.dedup();
    Ok(p.iter()
        .map(|&u| {
            graph
                .edges_of(u)
                .filter(|(v, _)| q.binary_search(v).is_ok())
                .map(|(_, w)| w)
                .sum::<f64>()
        })
        .sum())
}

pub fn volume(graph: &Graph, c: &[VertexId]) -> Result<f64> {
    let c = checked_sorted(graph, c)?;
    Ok(c.iter().map(|&v| graph.degree(v)).sum())
}

/// `cut(C) = links(C, V \ C)`.
pub fn cut(graph: &Graph, c: &[VertexId]) -> Result<f64> {
    let c = checked_sorted(graph, c)?;
    Ok(volume_and_cut_sorted(graph, &c).1)
}

/// `cut(C) / links(C, V)`.
pub fn ncut(graph: &Graph, c: &[VertexId]) -> Result<f64> {
    VertexSet::new(graph, c.to_vec())?.ncut()
}

/// `cut(C) / min(links(C, V), links(V \ C, V))`.
pub fn conductance(graph: &Graph, c: &[VertexId]) -> Result<f64> {
    VertexSet::new(graph, c.to_vec())?.conductance()
}

fn checked_sorted(graph: &Graph, c: &[VertexId]) -> Result<Vec<VertexId>> {
    for &v in c {
        graph.check_vertex(v)?;
    }
    Ok(sorted_unique(c))
}

fn sorted_unique(c: &[VertexId]) -> Vec<VertexId> {
    let mut c = c.to_vec();
    c.sort_unstable();
    c.dedup();
    c
}

pub(crate) fn volume_and_cut_sorted(graph: &Graph, members: &[VertexId]) -> (f64, f64) {
    let mut volume = 0.0;
    let mut cut = 0.0;
    for &u in members {
        volume += graph.degree(u);
        for (v, w) in graph.edges_of(u) {
            if members.binary_search(&v).is_err() {
                cut += w;
            }
        }
    }
    (volume, cut)
}
