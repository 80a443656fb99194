//! Scoring community sets: coverage, the conductance-vs-coverage curve and
//! its area, and F-measures against ground truth.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expansion::Community;
use crate::graph::{Graph, VertexId, VertexSet};

impl AsRef<[VertexId]> for VertexSet {
    fn as_ref(&self) -> &[VertexId] {
        self.members()
    }
}

impl AsRef<[VertexId]> for Community {
    fn as_ref(&self) -> &[VertexId] {
        self.members.members()
    }
}

/// Fraction of the `n` vertices lying in at least one community.
pub fn coverage<S: AsRef<[VertexId]>>(n: usize, communities: &[S]) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let mut seen = vec![false; n];
    let mut covered = 0usize;
    for c in communities {
        for &v in c.as_ref() {
            if v < n && !seen[v] {
                seen[v] = true;
                covered += 1;
            }
        }
    }
    covered as f64 / n as f64
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AucMode {
    /// The curve is 1 past the final coverage and the area spans `[0, 1]`.
    #[default]
    BeyondCoverageIsOne,
    /// The area stops at the final coverage.
    FinalCoverageOnly,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoveragePoint {
    pub coverage: f64,
    pub max_conductance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoverageCurve {
    /// Coverage strictly increasing; conductance non-decreasing.
    pub points: Vec<CoveragePoint>,
    pub auc: f64,
    pub mode: AucMode,
}

impl CoverageCurve {
    pub fn final_coverage(&self) -> f64 {
        self.points.last().map_or(0.0, |p| p.coverage)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "coverage,max_conductance")?;
        for p in &self.points {
            writeln!(out, "{},{}", p.coverage, p.max_conductance)?;
        }
        Ok(())
    }
}

/// Takes communities greedily by ascending conductance (ties: larger first,
/// then input order) and records the running maximum conductance each time
/// coverage grows. The curve on `(c_{j-1}, c_j]` is the maximum conductance
/// reached at `c_j`.
pub fn conductance_coverage_auc<S: AsRef<[VertexId]> + Sync>(
    graph: &Graph,
    communities: &[S],
    mode: AucMode,
) -> Result<CoverageCurve> {
    let scored: Vec<(f64, usize)> = communities
        .par_iter()
        .map(|c| {
            let set = VertexSet::new(graph, c.as_ref().to_vec())?;
            Ok((set.conductance()?, set.len()))
        })
        .collect::<Result<_>>()?;
    let members: Vec<&[VertexId]> = communities.iter().map(|c| c.as_ref()).collect();
    Ok(coverage_curve(graph.n(), &scored, &members, mode))
}

/// The curve for precomputed `(conductance, size)` scores of `members`
/// over `n` vertices.
pub fn coverage_curve(
    n: usize,
    scored: &[(f64, usize)],
    members: &[&[VertexId]],
    mode: AucMode,
) -> CoverageCurve {
    let mut order: Vec<usize> = (0..members.len()).collect();
    order.sort_by(|&a, &b| {
        scored[a]
            .0
            .total_cmp(&scored[b].0)
            .then(scored[b].1.cmp(&scored[a].1))
            .then(a.cmp(&b))
    });

    let mut seen = vec![false; n];
    let mut covered = 0usize;
    let mut running = f64::NEG_INFINITY;
    let mut points: Vec<CoveragePoint> = Vec::new();
    let mut auc = 0.0;
    let mut last = 0.0;
    for i in order {
        running = running.max(scored[i].0);
        let before = covered;
        for &v in members[i] {
            if !seen[v] {
                seen[v] = true;
                covered += 1;
            }
        }
        if covered > before {
            let c = covered as f64 / n as f64;
            auc += running * (c - last);
            last = c;
            points.push(CoveragePoint {
                coverage: c,
                max_conductance: running,
            });
        }
    }
    if mode == AucMode::BeyondCoverageIsOne {
        auc += 1.0 - last;
    }
    CoverageCurve { points, auc, mode }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Match {
    /// Index of the best community, or `None` when nothing overlaps.
    pub best: Option<usize>,
    pub precision: f64,
    pub recall: f64,
    pub f_beta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FBetaReport {
    pub beta: f64,
    pub average: f64,
    pub per_ground_truth: Vec<Match>,
}

/// `(1 + β²) p r / (β² p + r)`, zero when both vanish.
pub fn f_beta(precision: f64, recall: f64, beta: f64) -> f64 {
    let b2 = beta * beta;
    let denom = b2 * precision + recall;
    if denom == 0.0 {
        0.0
    } else {
        (1.0 + b2) * precision * recall / denom
    }
}

/// For every ground-truth set, the community of highest F-beta (ties to
/// the lowest index), with precision `|S ∩ C| / |C|` and recall
/// `|S ∩ C| / |S|`, averaged over the ground truth.
pub fn f_beta_report<A, B>(ground_truth: &[A], communities: &[B], beta: f64) -> Result<FBetaReport>
where
    A: AsRef<[VertexId]> + Sync,
    B: AsRef<[VertexId]> + Sync,
{
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "beta must be positive, got {beta}"
        )));
    }
    if ground_truth.is_empty() || communities.is_empty() {
        return Err(Error::InvalidInput(
            "need at least one ground-truth set and one community".into(),
        ));
    }
    let sizes: Vec<usize> = communities
        .iter()
        .map(|c| distinct_len(c.as_ref()))
        .collect();
    if sizes.contains(&0) {
        return Err(Error::InvalidInput("empty community".into()));
    }
    if ground_truth.iter().any(|s| s.as_ref().is_empty()) {
        return Err(Error::InvalidInput("empty ground-truth set".into()));
    }
    let span = communities
        .iter()
        .flat_map(|c| c.as_ref().iter())
        .max()
        .map_or(0, |&v| v + 1);
    let mut index: Vec<Vec<usize>> = vec![Vec::new(); span];
    for (j, c) in communities.iter().enumerate() {
        let mut members = c.as_ref().to_vec();
        members.sort_unstable();
        members.dedup();
        for v in members {
            index[v].push(j);
        }
    }

    let per_ground_truth: Vec<Match> = ground_truth
        .par_iter()
        .map_init(
            || (vec![0usize; communities.len()], Vec::new()),
            |(overlap, touched), s| {
                let mut s = s.as_ref().to_vec();
                s.sort_unstable();
                s.dedup();
                for &v in &s {
                    for &j in index.get(v).map_or(&[][..], |l| l.as_slice()) {
                        if overlap[j] == 0 {
                            touched.push(j);
                        }
                        overlap[j] += 1;
                    }
                }
                touched.sort_unstable();
                let mut best = Match {
                    best: None,
                    precision: 0.0,
                    recall: 0.0,
                    f_beta: 0.0,
                };
                for &j in touched.iter() {
                    let p = overlap[j] as f64 / sizes[j] as f64;
                    let r = overlap[j] as f64 / s.len() as f64;
                    let f = f_beta(p, r, beta);
                    if best.best.is_none() || f > best.f_beta {
                        best = Match {
                            best: Some(j),
                            precision: p,
                            recall: r,
                            f_beta: f,
                        };
                    }
                    overlap[j] = 0;
                }
                touched.clear();
                best
            },
        )
        .collect();
    let average =
        per_ground_truth.iter().map(|m| m.f_beta).sum::<f64>() / per_ground_truth.len() as f64;
    Ok(FBetaReport {
        beta,
        average,
        per_ground_truth,
    })
}

fn distinct_len(members: &[VertexId]) -> usize {
    let mut m = members.to_vec();
    m.sort_unstable();
    m.dedup();
    m.len()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MatchReport {
    pub avg_f1: f64,
    pub avg_f2: f64,
    pub f1: Vec<Match>,
    pub f2: Vec<Match>,
}

pub fn match_report<A, B>(ground_truth: &[A], communities: &[B]) -> Result<MatchReport>
where
    A: AsRef<[VertexId]> + Sync,
    B: AsRef<[VertexId]> + Sync,
{
    let f1 = f_beta_report(ground_truth, communities, 1.0)?;
    let f2 = f_beta_report(ground_truth, communities, 2.0)?;
    Ok(MatchReport {
        avg_f1: f1.average,
        avg_f2: f2.average,
        f1: f1.per_ground_truth,
        f2: f2.per_ground_truth,
    })
}

/// Community count by size.
pub fn size_distribution<S: AsRef<[VertexId]>>(communities: &[S]) -> BTreeMap<usize, usize> {
    let mut hist = BTreeMap::new();
    for c in communities {
        *hist.entry(c.as_ref().len()).or_insert(0) += 1;
    }
    hist
}

/// One community per line as space-separated external ids, ascending.
pub fn write_communities<S: AsRef<[VertexId]>, W: Write>(
    graph: &Graph,
    communities: &[S],
    mut out: W,
) -> Result<()> {
    for c in communities {
        let mut ids: Vec<u64> = c.as_ref().iter().map(|&v| graph.external_id(v)).collect();
        ids.sort_unstable();
        let line: Vec<String> = ids.iter().map(u64::to_string).collect();
        writeln!(out, "{}", line.join(" "))?;
    }
    Ok(())
}

/// Reads a communities file; every id must belong to `graph`. Blank and
/// `#` lines are skipped.
pub fn read_communities<R: BufRead>(graph: &Graph, reader: R) -> Result<Vec<Vec<VertexId>>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut members = Vec::new();
        for tok in line.split_whitespace() {
            let id: u64 = tok
                .parse()
                .map_err(|_| Error::parse(i + 1, format!("bad vertex id {tok:?}")))?;
            members.push(graph.internal_id(id).ok_or(Error::UnknownVertex(id))?);
        }
        members.sort_unstable();
        members.dedup();
        out.push(members);
    }
    Ok(out)
}

/// Reads ground truth in the communities format. Ids outside `graph` are
/// dropped, as are sets left empty; both are logged.
pub fn read_ground_truth<R: BufRead>(graph: &Graph, reader: R) -> Result<Vec<Vec<VertexId>>> {
    let mut out = Vec::new();
    let (mut dropped_ids, mut dropped_sets) = (0usize, 0usize);
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut members = Vec::new();
        for tok in line.split_whitespace() {
            let id: u64 = tok
                .parse()
                .map_err(|_| Error::parse(i + 1, format!("bad vertex id {tok:?}")))?;
            match graph.internal_id(id) {
                Some(v) => members.push(v),
                None => dropped_ids += 1,
            }
        }
        members.sort_unstable();
        members.dedup();
        if members.is_empty() {
            dropped_sets += 1;
        } else {
            out.push(members);
        }
    }
    if dropped_ids > 0 || dropped_sets > 0 {
        log::warn!("ground truth: dropped {dropped_ids} unknown ids and {dropped_sets} empty sets");
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::two_triangles;
    use proptest::prelude::*;

    #[test]
    fn coverage_examples() {
        let empty: Vec<Vec<VertexId>> = Vec::new();
        assert_eq!(coverage(6, &empty), 0.0);
        assert_eq!(coverage(6, &[(0..6).collect::<Vec<_>>()]), 1.0);
        assert_eq!(coverage(6, &[vec![0, 1, 2], vec![2, 3]]), 4.0 / 6.0);
        assert_eq!(coverage(6, &[vec![0, 1], vec![2, 3], vec![4, 5]]), 1.0);
    }

    /// Ten vertices as two 5-cliques joined by one edge: each clique has
    /// cut 1 and volume 21.
    fn cliques() -> Graph {
        let mut edges = Vec::new();
        for base in [0, 5] {
            for a in 0..5 {
                for b in a + 1..5 {
                    edges.push((base + a, base + b));
                }
            }
        }
        edges.push((4, 5));
        Graph::from_edges(10, edges).unwrap()
    }

    #[test]
    fn auc_step_integration() {
        let g = two_triangles();
        // {0,1,2}: 1/7 over half the graph, then {3,4,5} reaching all of it
        let c = conductance_coverage_auc(&g, &[vec![3, 4, 5], vec![0, 1, 2]], AucMode::default())
            .unwrap();
        assert_eq!(c.points.len(), 2);
        assert!((c.auc - 1.0 / 7.0).abs() < 1e-15);

        // a single community at 1/7 covering half: 0.5/7 + 0.5
        let c =
            conductance_coverage_auc(&g, &[vec![0, 1, 2]], AucMode::BeyondCoverageIsOne).unwrap();
        assert!((c.auc - (0.5 / 7.0 + 0.5)).abs() < 1e-15);
        let c = conductance_coverage_auc(&g, &[vec![0, 1, 2]], AucMode::FinalCoverageOnly).unwrap();
        assert!((c.auc - 0.5 / 7.0).abs() < 1e-15);
        assert_eq!(c.final_coverage(), 0.5);
    }

    #[test]
    fn curve_from_scores() {
        let all: Vec<usize> = (0..10).collect();
        let c = coverage_curve(10, &[(0.2, 10)], &[&all], AucMode::default());
        assert!((c.auc - 0.2).abs() < 1e-15);
        let c = coverage_curve(
            10,
            &[(0.3, 5), (0.1, 5)],
            &[&all[5..], &all[..5]],
            AucMode::default(),
        );
        assert!((c.auc - 0.2).abs() < 1e-15);
        let c = coverage_curve(10, &[(0.1, 6)], &[&all[..6]], AucMode::default());
        assert!((c.auc - 0.46).abs() < 1e-15);
        // equal conductance: the larger set goes first
        let c = coverage_curve(
            10,
            &[(0.1, 2), (0.1, 6)],
            &[&all[..2], &all[..6]],
            AucMode::default(),
        );
        assert_eq!(c.points.len(), 1);
        assert_eq!(c.points[0].coverage, 0.6);
    }

    #[test]
    fn auc_running_max_and_repeats() {
        let g = cliques();
        // {0} has conductance 1, the cliques 1/21 each
        let comms = vec![
            vec![0],
            vec![5, 6, 7, 8, 9],
            vec![0, 1, 2, 3, 4],
            vec![5, 6, 7, 8, 9],
        ];
        let c = conductance_coverage_auc(&g, &comms, AucMode::default()).unwrap();
        let phi = 1.0 / 21.0;
        assert_eq!(
            c.points,
            vec![
                CoveragePoint {
                    coverage: 0.5,
                    max_conductance: phi
                },
                CoveragePoint {
                    coverage: 1.0,
                    max_conductance: phi
                },
            ]
        );
        assert!((c.auc - phi).abs() < 1e-15);
    }

    #[test]
    fn auc_rejects_the_full_set() {
        let g = two_triangles();
        assert!(matches!(
            conductance_coverage_auc(&g, &[(0..6).collect::<Vec<_>>()], AucMode::default()),
            Err(Error::UndefinedMetric { .. })
        ));
    }

    #[test]
    fn f_beta_examples() {
        let r = match_report(&[vec![0, 1, 2]], &[vec![0, 1, 2]]).unwrap();
        assert_eq!((r.avg_f1, r.avg_f2), (1.0, 1.0));
        let r = match_report(&[vec![0, 1, 2]], &[vec![0, 1, 2, 3]]).unwrap();
        assert_eq!(r.f1[0].precision, 0.75);
        assert_eq!(r.f1[0].recall, 1.0);
        assert!((r.avg_f1 - 6.0 / 7.0).abs() < 1e-15);
        assert!((r.avg_f2 - 0.9375).abs() < 1e-15);
        let r = match_report(&[vec![7, 8]], &[vec![0, 1, 2]]).unwrap();
        assert_eq!(r.avg_f1, 0.0);
        assert_eq!(r.f1[0].best, None);
    }

    #[test]
    fn f_beta_errors() {
        let empty: Vec<Vec<VertexId>> = Vec::new();
        assert!(match_report(&empty, &[vec![0]]).is_err());
        assert!(match_report(&[vec![0]], &[Vec::<VertexId>::new()]).is_err());
        assert!(f_beta_report(&[vec![0]], &[vec![0]], 0.0).is_err());
    }

    #[test]
    fn size_distribution_examples() {
        let h = size_distribution(&[vec![0, 1, 2], vec![3, 4]]);
        assert_eq!(h.into_iter().collect::<Vec<_>>(), vec![(2, 1), (3, 1)]);
        assert!(size_distribution::<Vec<VertexId>>(&[]).is_empty());
        let h = size_distribution(&[vec![0], vec![1], vec![2]]);
        assert_eq!(h.into_iter().collect::<Vec<_>>(), vec![(1, 3)]);
    }

    #[test]
    fn communities_round_trip() {
        let g = Graph::from_canonical(vec![10, 20, 30, 40], vec![(0, 1, 1.0), (2, 3, 1.0)], false);
        let comms = vec![vec![2, 0], vec![3]];
        let mut buf = Vec::new();
        write_communities(&g, &comms, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "10 30\n40\n");
        assert_eq!(
            read_communities(&g, &buf[..]).unwrap(),
            vec![vec![0, 2], vec![3]]
        );
        assert!(matches!(
            read_communities(&g, &b"10 99\n"[..]),
            Err(Error::UnknownVertex(99))
        ));
        assert_eq!(
            read_ground_truth(&g, &b"10 99\n99\n"[..]).unwrap(),
            vec![vec![0]]
        );
    }

    fn brute_force(
        gt: &[Vec<usize>],
        comms: &[Vec<usize>],
        beta: f64,
    ) -> Vec<(Option<usize>, f64)> {
        gt.iter()
            .map(|s| {
                let mut best = (None, 0.0);
                for (j, c) in comms.iter().enumerate() {
                    let inter = s.iter().filter(|v| c.contains(v)).count();
                    if inter == 0 {
                        continue;
                    }
                    let p = inter as f64 / c.len() as f64;
                    let r = inter as f64 / s.len() as f64;
                    let f = (1.0 + beta * beta) * p * r / (beta * beta * p + r);
                    if best.0.is_none() || f > best.1 {
                        best = (Some(j), f);
                    }
                }
                best
            })
            .collect()
    }

    fn arb_sets() -> impl Strategy<Value = Vec<Vec<usize>>> {
        proptest::collection::vec(proptest::collection::btree_set(0usize..100, 1..20), 1..15)
            .prop_map(|v| v.into_iter().map(|s| s.into_iter().collect()).collect())
    }

    proptest! {
        #[test]
        fn inverted_index_matches_brute_force(gt in arb_sets(), comms in arb_sets()) {
            for beta in [1.0, 2.0] {
                let r = f_beta_report(&gt, &comms, beta).unwrap();
                let b = brute_force(&gt, &comms, beta);
                for (m, (j, f)) in r.per_ground_truth.iter().zip(&b) {
                    prop_assert_eq!(m.best, *j);
                    prop_assert_eq!(m.f_beta, *f);
                    prop_assert_eq!(m.f_beta, f_beta(m.precision, m.recall, beta));
                }
            }
            let r = match_report(&gt, &comms).unwrap();
            for (a, b) in r.f1.iter().zip(&r.f2) {
                if a.best.is_some() && a.best == b.best && a.precision == a.recall {
                    prop_assert!((a.f_beta - b.f_beta).abs() < 1e-15);
                }
            }
        }
    }
}
