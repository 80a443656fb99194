//! Extending core communities over bridges into the whiskers they hold.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expansion::Community;
use crate::filtering::CoreDecomposition;
use crate::graph::{links, Graph, VertexId, VertexSet};

/// Adds to `members` (parent ids, all in the core) every whisker whose
/// bridge starts inside it. Returns the grown set and the indices of the
/// attached whiskers, ascending.
pub fn propagate_members(
    decomp: &CoreDecomposition,
    members: &[VertexId],
) -> Result<(Vec<VertexId>, Vec<usize>)> {
    let mut grown = members.to_vec();
    let mut attached = Vec::new();
    for &v in members {
        if !decomp.is_core(v) {
            return Err(Error::InvalidInput(format!(
                "vertex {v} of a community is not in the core"
            )));
        }
        for b in decomp.bridges_at(v) {
            attached.push(b.whisker);
            grown.extend_from_slice(&decomp.whiskers[b.whisker].vertices);
        }
    }
    grown.sort_unstable();
    grown.dedup();
    attached.sort_unstable();
    attached.dedup();
    Ok((grown, attached))
}

/// Lifts core communities to the parent graph and propagates each one.
/// Output order follows input order and no deduplication is done.
pub fn propagate(
    graph: &Graph,
    decomp: &CoreDecomposition,
    core_communities: &[Community],
) -> Result<Vec<Community>> {
    check_parent(graph, decomp)?;
    core_communities
        .par_iter()
        .map(|c| {
            let lifted: Vec<VertexId> = c
                .members
                .members()
                .iter()
                .map(|&v| decomp.parent_of(v))
                .collect();
            let (grown, _) = propagate_members(decomp, &lifted)?;
            let members = VertexSet::new(graph, grown)?;
            let conductance = members.conductance().unwrap_or(1.0);
            Ok(Community {
                members,
                conductance,
                source_seed: decomp.parent_of(c.source_seed),
                epsilon_used: c.epsilon_used,
            })
        })
        .collect()
}

fn check_parent(graph: &Graph, decomp: &CoreDecomposition) -> Result<()> {
    if graph.n() != decomp.parent_vertex_count() || graph.edge_count() != decomp.parent_edge_count()
    {
        return Err(Error::InvalidInput(
            "the decomposition does not belong to this graph".into(),
        ));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Certificate {
    pub bridges_attached: usize,
    pub cut_before: f64,
    pub cut_after: f64,
    /// `links(V_W, C)` for the union `V_W` of attached whiskers.
    pub whisker_links: f64,
    pub ncut_before: f64,
    pub ncut_after: f64,
}

/// Checks `cut(C') = cut(C) - links(V_W, C)` and `ncut(C') ≤ ncut(C)`, the
/// latter strict exactly when a bridge is attached, by recomputing every
/// metric on `graph`. Both sets use parent ids. Comparisons are exact on
/// unit-weight graphs and relative to `1e-9` otherwise.
pub fn certify_propagation(
    graph: &Graph,
    decomp: &CoreDecomposition,
    before: &[VertexId],
    after: &[VertexId],
) -> Result<Certificate> {
    check_parent(graph, decomp)?;
    let (expected, attached) = propagate_members(decomp, before)?;
    let after_set = VertexSet::new(graph, after.to_vec())?;
    if after_set.members() != expected.as_slice() {
        return Err(Error::CertificateViolation(
            "the propagated set is not the input plus its attached whiskers".into(),
        ));
    }
    let before_set = VertexSet::new(graph, before.to_vec())?;
    if before_set.is_empty() {
        return Err(Error::InvalidInput("empty community".into()));
    }
    let whisker_vertices: Vec<VertexId> = attached
        .iter()
        .flat_map(|&w| decomp.whiskers[w].vertices.iter().copied())
        .collect();
    let whisker_links = links(graph, &whisker_vertices, before_set.members())?;
    let cert = Certificate {
        bridges_attached: attached.len(),
        cut_before: before_set.cut(),
        cut_after: after_set.cut(),
        whisker_links,
        ncut_before: before_set.cut() / before_set.volume(),
        ncut_after: after_set.cut() / after_set.volume(),
    };

    let tol = |x: f64| {
        if graph.has_unit_weights() {
            0.0
        } else {
            1e-9 * x.abs().max(1.0)
        }
    };
    let identity = cert.cut_before - cert.whisker_links;
    if (cert.cut_after - identity).abs() > tol(identity) {
        return Err(Error::CertificateViolation(format!(
            "cut after propagation is {} but cut before minus whisker links is {identity}",
            cert.cut_after
        )));
    }
    let holds = if cert.bridges_attached > 0 {
        cert.ncut_after < cert.ncut_before + tol(cert.ncut_before)
            && cert.ncut_after != cert.ncut_before
    } else {
        (cert.ncut_after - cert.ncut_before).abs() <= tol(cert.ncut_before)
    };
    if !holds {
        return Err(Error::CertificateViolation(format!(
            "ncut went from {} to {} with {} bridges attached",
            cert.ncut_before, cert.ncut_after, cert.bridges_attached
        )));
    }
    Ok(cert)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PropagationSummary {
    pub coverage: f64,
    pub community_count: usize,
    pub theorem_checks_passed: usize,
    /// Whiskers whose bridge endpoint lies in no community.
    pub unassigned_whiskers: usize,
}

/// Propagates and certifies every community.
pub fn propagate_certified(
    graph: &Graph,
    decomp: &CoreDecomposition,
    core_communities: &[Community],
) -> Result<(Vec<Community>, PropagationSummary)> {
    let out = propagate(graph, decomp, core_communities)?;
    let checks = core_communities
        .par_iter()
        .zip(out.par_iter())
        .map(|(before, after)| {
            let lifted: Vec<VertexId> = before
                .members
                .members()
                .iter()
                .map(|&v| decomp.parent_of(v))
                .collect();
            certify_propagation(graph, decomp, &lifted, after.members.members()).map(|_| ())
        })
        .collect::<Result<Vec<()>>>()?;

    let mut covered = vec![false; graph.n()];
    for c in &out {
        for &v in c.members.members() {
            covered[v] = true;
        }
    }
    let unassigned_whiskers = decomp
        .whiskers
        .iter()
        .filter(|w| !covered[decomp.bridges[w.bridge].core_vertex])
        .count();
    let summary = PropagationSummary {
        coverage: crate::evaluation::coverage(graph.n(), &out),
        community_count: out.len(),
        theorem_checks_passed: checks.len(),
        unassigned_whiskers,
    };
    Ok((out, summary))
}
