//! Approximate scattering partitions built from strong-diameter clusterings.
//!
//! Heavy edges (weight above Δ) are pruned first; the clustering is taken on
//! the pruned graph. For a pair `u, v` the witness path follows a hop-shortest
//! route `C₁ … C_t` through the cluster graph, joining consecutive clusters by
//! a crossing edge and crossing each cluster along a shortest path inside it.
//! Each intra-cluster piece and each crossing edge weighs at most Δ, so the
//! witness has length at most `2·t·Δ` and touches exactly `t` clusters.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{dijkstra_restricted, prune_heavy_edges, set_diameter, DiameterMode, Path, VertexId, WeightedGraph};
use crate::pairs::{for_each_source, PairCount, PairSelection};
use crate::shortcut::{run_provider, ClusterGraph, ClusterId, ClusterTree, Clustering, ShortcutError, ShortcutProvider};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScatterError {
    #[error(transparent)]
    Provider(#[from] ShortcutError),
    #[error("vertices {u} and {v} lie in different components of the pruned graph")]
    Infeasible { u: VertexId, v: VertexId },
    #[error("vertex {0} is not in the partitioned graph")]
    InvalidVertex(VertexId),
}

/// A clustering of the pruned graph `G′` together with the budget Δ it was
/// built for.
#[derive(Debug, Clone)]
pub struct ScatteringPartition {
    delta: f64,
    pruned: WeightedGraph,
    clustering: Clustering,
    cluster_graph: ClusterGraph,
    provider: String,
}

impl ScatteringPartition {
    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// The graph with every edge heavier than Δ removed.
    pub fn pruned(&self) -> &WeightedGraph {
        &self.pruned
    }

    pub fn clustering(&self) -> &Clustering {
        &self.clustering
    }

    pub fn cluster_graph(&self) -> &ClusterGraph {
        &self.cluster_graph
    }

    pub fn provider(&self) -> &str {
        &self.provider
    }
}

pub fn build_scattering_partition(
    g: &WeightedGraph,
    delta: f64,
    provider: &dyn ShortcutProvider,
    seed: u64,
) -> Result<ScatteringPartition, ScatterError> {
    let pruned = prune_heavy_edges(g, delta);
    let clustering = run_provider(provider, &pruned, delta, seed)?;
    let cluster_graph = ClusterGraph::new(&pruned, &clustering)?;
    Ok(ScatteringPartition {
        delta,
        pruned,
        clustering,
        cluster_graph,
        provider: provider.name().to_string(),
    })
}

/// Witness path for one pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteredPath {
    pub path: Path,
    pub max_edge: f64,
    /// Clusters along the path, in order, each listed once.
    pub clusters: Vec<ClusterId>,
}

impl ScatteredPath {
    pub fn length(&self) -> f64 {
        self.path.length()
    }
}

/// Builds witness paths from one fixed source, caching the cluster-graph BFS
/// and every intra-cluster shortest-path tree it grows.
struct WitnessBuilder<'a> {
    sp: &'a ScatteringPartition,
    source: VertexId,
    hop_parent: Vec<Option<ClusterId>>,
    hops: Vec<Option<usize>>,
    trees: HashMap<VertexId, ClusterTree>,
}

impl<'a> WitnessBuilder<'a> {
    fn new(sp: &'a ScatteringPartition, source: VertexId) -> Self {
        let (hops, hop_parent) = sp.cluster_graph.bfs(sp.clustering.cluster_of(source));
        WitnessBuilder {
            sp,
            source,
            hop_parent,
            hops,
            trees: HashMap::new(),
        }
    }

    fn inside(&mut self, from: VertexId, to: VertexId) -> Vec<VertexId> {
        let sp = self.sp;
        let tree = self
            .trees
            .entry(from)
            .or_insert_with(|| sp.clustering.tree_from(&sp.pruned, from));
        sp.clustering
            .tree_path(tree, to)
            .expect("clusters are connected in the pruned graph")
    }

    fn path_to(&mut self, target: VertexId) -> Result<ScatteredPath, ScatterError> {
        let sp = self.sp;
        let c = &sp.clustering;
        let last = c.cluster_of(target);
        if self.hops[last].is_none() {
            return Err(ScatterError::Infeasible {
                u: self.source,
                v: target,
            });
        }
        let mut route = vec![last];
        while let Some(p) = self.hop_parent[*route.last().expect("nonempty")] {
            route.push(p);
        }
        route.reverse();

        let mut vertices = Vec::new();
        let mut entry = self.source;
        for (i, &cluster) in route.iter().enumerate() {
            let (exit, next_entry) = match route.get(i + 1) {
                Some(&next) => {
                    let (x, y) = sp
                        .cluster_graph
                        .crossing_edge(cluster, next)
                        .expect("BFS follows cluster-graph edges");
                    (x, Some(y))
                }
                None => (target, None),
            };
            vertices.extend(self.inside(entry, exit));
            if let Some(y) = next_entry {
                entry = y;
            }
        }
        let path = Path::new(&sp.pruned, vertices).expect("witness uses pruned-graph edges");
        let max_edge = path.edge_weights(&sp.pruned).fold(0.0, f64::max);
        Ok(ScatteredPath {
            path,
            max_edge,
            clusters: route,
        })
    }
}

/// Concatenation of intra-cluster shortest paths and crossing edges along a
/// hop-shortest cluster route from `u` to `v`.
pub fn scattered_path(sp: &ScatteringPartition, u: VertexId, v: VertexId) -> Result<ScatteredPath, ScatterError> {
    let n = sp.pruned.vertex_count();
    for x in [u, v] {
        if x >= n {
            return Err(ScatterError::InvalidVertex(x));
        }
    }
    WitnessBuilder::new(sp, u).path_to(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationReason {
    /// No witness path exists inside the pruned graph.
    ScatterInfeasible,
    /// Witness longer than `2 · clusters · Δ`.
    LengthBound,
    /// Witness uses an edge heavier than Δ.
    EdgeBound,
    /// Witness does not start in `u`'s cluster or end in `v`'s.
    EndpointClusters,
    /// Two members of one cluster are farther apart than Δ in the host graph.
    WeakDiameter,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterViolation {
    pub u: VertexId,
    pub v: VertexId,
    pub reason: ViolationReason,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatteringReport {
    pub delta: f64,
    /// Largest witness length divided by Δ.
    pub beta_emp: f64,
    /// Largest number of clusters touched by a witness.
    pub tau_emp: usize,
    /// Largest cluster-graph hop count over checked pairs.
    pub max_hops: usize,
    pub pairs_checked: usize,
    pub violations: Vec<ScatterViolation>,
}

impl ScatteringReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Default)]
struct SourceSummary {
    pairs: usize,
    beta: f64,
    tau: usize,
    hops: usize,
    violations: Vec<ScatterViolation>,
}

impl PairCount for SourceSummary {
    fn pair_count(&self) -> usize {
        self.pairs
    }
}

/// Checks one witness against the construction's guarantees.
pub fn witness_violation(
    sp: &ScatteringPartition,
    u: VertexId,
    v: VertexId,
    w: &ScatteredPath,
) -> Option<ViolationReason> {
    let c = sp.clustering();
    let delta = sp.delta();
    if w.path.first() != u
        || w.path.last() != v
        || w.clusters.first() != Some(&c.cluster_of(u))
        || w.clusters.last() != Some(&c.cluster_of(v))
    {
        Some(ViolationReason::EndpointClusters)
    } else if w.max_edge > delta {
        Some(ViolationReason::EdgeBound)
    } else if w.length() > 2.0 * w.clusters.len() as f64 * delta {
        Some(ViolationReason::LengthBound)
    } else {
        None
    }
}

/// Builds a witness for every pair of `g` at distance at most Δ (or a
/// sample of them) and records the empirical β and τ. `g` is the graph the
/// partition was built from.
pub fn verify_scattering(
    g: &WeightedGraph,
    sp: &ScatteringPartition,
    selection: PairSelection,
    seed: u64,
) -> ScatteringReport {
    let delta = sp.delta;
    let exhaustive = selection.resolve(g.vertex_count()) == PairSelection::All;
    let per_source = |u: VertexId| {
        let (dist, _) = dijkstra_restricted(g, &[u], Some(delta), |_| true);
        let mut builder = WitnessBuilder::new(sp, u);
        let mut s = SourceSummary::default();
        for (v, d) in dist.iter().enumerate() {
            if v == u || d.is_none() || (exhaustive && v < u) {
                continue;
            }
            s.pairs += 1;
            match builder.path_to(v) {
                Ok(w) => {
                    s.beta = s.beta.max(w.length() / delta);
                    s.tau = s.tau.max(w.clusters.len());
                    s.hops = s.hops.max(w.clusters.len() - 1);
                    if let Some(reason) = witness_violation(sp, u, v, &w) {
                        s.violations.push(ScatterViolation { u, v, reason });
                    }
                }
                Err(_) => s.violations.push(ScatterViolation {
                    u,
                    v,
                    reason: ViolationReason::ScatterInfeasible,
                }),
            }
        }
        s
    };
    let summaries = for_each_source(g.vertex_count(), selection, seed, per_source);

    let mut violations: Vec<ScatterViolation> = Vec::new();
    // Strong diameter in the pruned subgraph bounds the weak diameter in
    // `g`; only clusters whose certificate exceeds Δ need a direct check.
    let c = sp.clustering();
    for k in 0..c.len() {
        if c.strong_diameter(k) <= delta {
            continue;
        }
        let members = c.members(k);
        if let Ok(Some(weak)) = set_diameter(g, members, DiameterMode::Weak) {
            if weak <= delta {
                continue;
            }
        }
        let (a, b) = weak_witness(g, members, delta);
        violations.push(ScatterViolation {
            u: a,
            v: b,
            reason: ViolationReason::WeakDiameter,
        });
    }
    for s in &summaries {
        violations.extend(s.violations.iter().cloned());
    }
    ScatteringReport {
        delta,
        beta_emp: summaries.iter().map(|s| s.beta).fold(0.0, f64::max),
        tau_emp: summaries.iter().map(|s| s.tau).max().unwrap_or(0),
        max_hops: summaries.iter().map(|s| s.hops).max().unwrap_or(0),
        pairs_checked: summaries.iter().map(|s| s.pairs).sum(),
        violations,
    }
}

fn weak_witness(g: &WeightedGraph, members: &[VertexId], delta: f64) -> (VertexId, VertexId) {
    for &a in members {
        let (dist, _) = dijkstra_restricted(g, &[a], Some(delta), |_| true);
        if let Some(&b) = members.iter().find(|&&b| dist[b].is_none()) {
            return (a, b);
        }
    }
    (members[0], members[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shortcut::{BallCarving, Singletons};

    struct Fixed(Vec<usize>);
    impl ShortcutProvider for Fixed {
        fn name(&self) -> &str {
            "fixed"
        }
        fn cluster_labels(&self, _g: &WeightedGraph, _d: f64, _s: u64) -> Result<Vec<usize>, ShortcutError> {
            Ok(self.0.clone())
        }
    }

    fn unit_path(n: usize) -> WeightedGraph {
        WeightedGraph::from_edges(n, (1..n).map(|i| (i - 1, i, 1.0))).unwrap()
    }

    #[test]
    fn build_examples() {
        let g = unit_path(3);
        let sp = build_scattering_partition(&g, 2.0, &Fixed(vec![0, 0, 0]), 0).unwrap();
        assert_eq!(sp.clustering().len(), 1);
        assert_eq!(sp.pruned(), &g);

        let tri = WeightedGraph::from_edges(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 5.0)]).unwrap();
        let sp = build_scattering_partition(&tri, 2.0, &BallCarving, 4).unwrap();
        assert_eq!(sp.pruned().edge_count(), 2);
        assert_eq!(sp.pruned().weight(0, 2), None);

        let sp = build_scattering_partition(&tri, 0.5, &BallCarving, 4).unwrap();
        assert_eq!(sp.pruned().edge_count(), 0);
        assert_eq!(sp.clustering().len(), 3);
    }

    #[test]
    fn provider_error_propagates() {
        let g = unit_path(3);
        let err = build_scattering_partition(&g, 1.0, &Fixed(vec![0, 0, 0]), 0).unwrap_err();
        assert!(matches!(err, ScatterError::Provider(ShortcutError::DiameterExceeded { .. })));
    }

    #[test]
    fn trivial_witness() {
        let g = unit_path(3);
        let sp = build_scattering_partition(&g, 1.0, &Singletons, 0).unwrap();
        let w = scattered_path(&sp, 1, 1).unwrap();
        assert_eq!(w.path.vertices(), &[1]);
        assert_eq!((w.length(), w.clusters.len()), (0.0, 1));
    }

    #[test]
    fn single_cluster_witness_is_shortest_path() {
        let g = unit_path(3);
        let sp = build_scattering_partition(&g, 2.0, &Fixed(vec![0, 0, 0]), 0).unwrap();
        let w = scattered_path(&sp, 0, 2).unwrap();
        assert_eq!(w.path.vertices(), &[0, 1, 2]);
        assert_eq!(w.length(), 2.0);
        assert_eq!(w.clusters, vec![0]);
    }

    #[test]
    fn two_cluster_witness() {
        let g = unit_path(4);
        let sp = build_scattering_partition(&g, 1.0, &Fixed(vec![0, 0, 1, 1]), 0).unwrap();
        let w = scattered_path(&sp, 0, 3).unwrap();
        assert_eq!(w.path.vertices(), &[0, 1, 2, 3]);
        assert_eq!(w.length(), 3.0);
        assert_eq!(w.clusters, vec![0, 1]);
        assert_eq!(w.max_edge, 1.0);
        assert_eq!(witness_violation(&sp, 0, 3, &w), None);
    }

    #[test]
    fn infeasible_across_pruned_components() {
        let g = WeightedGraph::from_edges(2, [(0, 1, 5.0)]).unwrap();
        let sp = build_scattering_partition(&g, 1.0, &BallCarving, 0).unwrap();
        assert_eq!(
            scattered_path(&sp, 0, 1),
            Err(ScatterError::Infeasible { u: 0, v: 1 })
        );
        assert_eq!(scattered_path(&sp, 0, 9), Err(ScatterError::InvalidVertex(9)));
    }

    #[test]
    fn verify_single_cluster() {
        let g = unit_path(4);
        let sp = build_scattering_partition(&g, 3.0, &Fixed(vec![0; 4]), 0).unwrap();
        let r = verify_scattering(&g, &sp, PairSelection::All, 0);
        assert_eq!(r.tau_emp, 1);
        assert!(r.beta_emp <= 1.0);
        assert_eq!(r.pairs_checked, 6);
        assert!(r.passed());
    }

    #[test]
    fn verify_singletons_unit_path() {
        let g = unit_path(4);
        let sp = build_scattering_partition(&g, 1.0, &Singletons, 0).unwrap();
        let r = verify_scattering(&g, &sp, PairSelection::All, 0);
        assert_eq!(r.pairs_checked, 3);
        assert_eq!((r.tau_emp, r.beta_emp), (2, 1.0));
        assert!(r.passed());
    }

    #[test]
    fn verify_two_clusters_budget_two() {
        let g = unit_path(4);
        let sp = build_scattering_partition(&g, 2.0, &Fixed(vec![0, 0, 1, 1]), 0).unwrap();
        let w = scattered_path(&sp, 1, 3).unwrap();
        assert_eq!(w.path.vertices(), &[1, 2, 3]);
        assert_eq!((w.length(), w.clusters.len()), (2.0, 2));
        let r = verify_scattering(&g, &sp, PairSelection::All, 0);
        // Pairs within distance 2: (0,1) (0,2) (1,2) (1,3) (2,3).
        assert_eq!(r.pairs_checked, 5);
        assert_eq!(r.tau_emp, 2);
        assert_eq!(r.beta_emp, 1.0);
        assert!(r.passed());
    }
}
