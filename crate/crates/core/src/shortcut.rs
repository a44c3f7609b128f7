//! Strong-diameter clusterings, their cluster graphs, and an empirical check
//! of the low-hop property a shortcut partition is expected to have.
//!
//! Clusterings come from a [`ShortcutProvider`]. The default provider carves
//! shortest-path balls; any other construction can be registered by name.
//! Whatever a provider returns is validated before use: clusters must
//! partition the vertex set, induce connected subgraphs, and have strong
//! diameter at most the requested budget.

use std::collections::{BTreeMap, BinaryHeap, HashMap, VecDeque};
use std::sync::Arc;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{dijkstra_restricted, VertexId, WeightedGraph};
use crate::pairs::{for_each_source, PairCount, PairSelection};
use crate::rng;

pub type ClusterId = usize;

pub const DEFAULT_PROVIDER: &str = "ball-carving";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ShortcutError {
    #[error("clustering labels {found} vertices but the graph has {expected}")]
    SizeMismatch { expected: usize, found: usize },
    #[error("cluster containing vertex {a} is disconnected (vertex {b} unreachable inside it)")]
    DisconnectedCluster { a: VertexId, b: VertexId },
    #[error("provider {provider} returned a cluster of strong diameter {diameter} > {delta} (contains vertex {witness})")]
    DiameterExceeded {
        provider: String,
        witness: VertexId,
        diameter: f64,
        delta: f64,
    },
    #[error("diameter budget must be positive, got {0}")]
    BadDelta(f64),
    #[error("unknown clustering provider {0:?}")]
    UnknownProvider(String),
    #[error("cluster {0} does not exist")]
    InvalidCluster(ClusterId),
}

/// Shortest-path tree grown inside one cluster, indexed by position within
/// the cluster's member list.
#[derive(Debug, Clone)]
pub struct ClusterTree {
    pub cluster: ClusterId,
    pub root: VertexId,
    dist: Vec<f64>,
    parent: Vec<Option<usize>>,
}

/// A partition of the vertex set into connected clusters.
///
/// Cluster ids are canonical: clusters are numbered by ascending smallest
/// member, independent of the order a provider produced them in.
#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    cluster_of: Vec<ClusterId>,
    position: Vec<usize>,
    members: Vec<Vec<VertexId>>,
    strong_diameters: Vec<f64>,
}

impl Clustering {
    /// Validates `labels` (arbitrary cluster label per vertex) as a clustering
    /// of `g` and computes each cluster's strong diameter.
    pub fn from_labels(g: &WeightedGraph, labels: &[usize]) -> Result<Self, ShortcutError> {
        let n = g.vertex_count();
        if labels.len() != n {
            return Err(ShortcutError::SizeMismatch {
                expected: n,
                found: labels.len(),
            });
        }
        // First occurrence in vertex order fixes the canonical id.
        let mut canon: HashMap<usize, ClusterId> = HashMap::new();
        let mut members: Vec<Vec<VertexId>> = Vec::new();
        let mut cluster_of = vec![0; n];
        let mut position = vec![0; n];
        for (v, label) in labels.iter().enumerate() {
            let next = canon.len();
            let c = *canon.entry(*label).or_insert(next);
            if c == members.len() {
                members.push(Vec::new());
            }
            cluster_of[v] = c;
            position[v] = members[c].len();
            members[c].push(v);
        }
        let mut clustering = Clustering {
            cluster_of,
            position,
            members,
            strong_diameters: Vec::new(),
        };
        let mut diameters = Vec::with_capacity(clustering.len());
        for c in 0..clustering.len() {
            diameters.push(clustering.compute_strong_diameter(g, c)?);
        }
        clustering.strong_diameters = diameters;
        Ok(clustering)
    }

    pub fn singletons(g: &WeightedGraph) -> Self {
        let labels: Vec<usize> = (0..g.vertex_count()).collect();
        Self::from_labels(g, &labels).expect("singletons are always a valid clustering")
    }

    fn compute_strong_diameter(&self, g: &WeightedGraph, c: ClusterId) -> Result<f64, ShortcutError> {
        let members = &self.members[c];
        if members.len() == 1 {
            return Ok(0.0);
        }
        let mut best = 0.0f64;
        for &s in members {
            let tree = self.tree_from(g, s);
            if let Some(p) = tree.dist.iter().position(|d| d.is_infinite()) {
                return Err(ShortcutError::DisconnectedCluster {
                    a: s,
                    b: members[p],
                });
            }
            best = tree.dist.iter().copied().fold(best, f64::max);
        }
        Ok(best)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn vertex_count(&self) -> usize {
        self.cluster_of.len()
    }

    pub fn cluster_of(&self, v: VertexId) -> ClusterId {
        self.cluster_of[v]
    }

    pub fn assignment(&self) -> &[ClusterId] {
        &self.cluster_of
    }

    /// Members of cluster `c`, ascending.
    pub fn members(&self, c: ClusterId) -> &[VertexId] {
        &self.members[c]
    }

    pub fn clusters(&self) -> &[Vec<VertexId>] {
        &self.members
    }

    pub fn strong_diameter(&self, c: ClusterId) -> f64 {
        self.strong_diameters[c]
    }

    pub fn max_strong_diameter(&self) -> f64 {
        self.strong_diameters.iter().copied().fold(0.0, f64::max)
    }

    /// Dijkstra from `root` using only edges inside `root`'s cluster.
    /// Unreached members get distance `+inf`.
    pub fn tree_from(&self, g: &WeightedGraph, root: VertexId) -> ClusterTree {
        let c = self.cluster_of[root];
        let members = &self.members[c];
        let size = members.len();
        let mut dist = vec![f64::INFINITY; size];
        let mut parent = vec![None; size];
        let mut done = vec![false; size];
        let mut heap = BinaryHeap::new();
        let r = self.position[root];
        dist[r] = 0.0;
        heap.push(Frontier { dist: 0.0, local: r });
        while let Some(Frontier { dist: d, local: x }) = heap.pop() {
            if done[x] {
                continue;
            }
            done[x] = true;
            for &(y, w) in g.neighbors(members[x]) {
                if self.cluster_of[y] != c {
                    continue;
                }
                let ly = self.position[y];
                let nd = d + w;
                if !done[ly] && (nd < dist[ly] || (nd == dist[ly] && parent[ly].is_some_and(|p| x < p))) {
                    dist[ly] = nd;
                    parent[ly] = Some(x);
                    heap.push(Frontier { dist: nd, local: ly });
                }
            }
        }
        ClusterTree {
            cluster: c,
            root,
            dist,
            parent,
        }
    }

    /// Vertex sequence from `tree.root` to `target` inside the cluster.
    pub fn tree_path(&self, tree: &ClusterTree, target: VertexId) -> Option<Vec<VertexId>> {
        if self.cluster_of[target] != tree.cluster {
            return None;
        }
        let members = &self.members[tree.cluster];
        let mut cur = self.position[target];
        if tree.dist[cur].is_infinite() {
            return None;
        }
        let mut out = vec![members[cur]];
        while let Some(p) = tree.parent[cur] {
            out.push(members[p]);
            cur = p;
        }
        out.reverse();
        Some(out)
    }
}

#[derive(Clone, Copy, PartialEq)]
struct Frontier {
    dist: f64,
    local: usize,
}

impl Eq for Frontier {}

impl Ord for Frontier {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.local.cmp(&self.local))
    }
}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Unweighted graph with one supernode per cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterGraph {
    adj: Vec<Vec<ClusterId>>,
    /// Lexicographically smallest host edge `(x, y)` with `x` in the first
    /// cluster and `y` in the second, for every ordered adjacent pair.
    crossing: HashMap<(ClusterId, ClusterId), (VertexId, VertexId)>,
}

impl ClusterGraph {
    pub fn new(g: &WeightedGraph, c: &Clustering) -> Result<Self, ShortcutError> {
        if c.vertex_count() != g.vertex_count() {
            return Err(ShortcutError::SizeMismatch {
                expected: g.vertex_count(),
                found: c.vertex_count(),
            });
        }
        let mut adj = vec![Vec::new(); c.len()];
        let mut crossing: HashMap<(ClusterId, ClusterId), (VertexId, VertexId)> = HashMap::new();
        for e in g.edges() {
            let (a, b) = (c.cluster_of(e.u), c.cluster_of(e.v));
            if a == b {
                continue;
            }
            adj[a].push(b);
            adj[b].push(a);
            for key in [((a, b), (e.u, e.v)), ((b, a), (e.v, e.u))] {
                crossing
                    .entry(key.0)
                    .and_modify(|cur| *cur = (*cur).min(key.1))
                    .or_insert(key.1);
            }
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        Ok(ClusterGraph { adj, crossing })
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn neighbors(&self, c: ClusterId) -> &[ClusterId] {
        &self.adj[c]
    }

    pub fn has_edge(&self, a: ClusterId, b: ClusterId) -> bool {
        self.adj.get(a).is_some_and(|l| l.binary_search(&b).is_ok())
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn crossing_edge(&self, from: ClusterId, to: ClusterId) -> Option<(VertexId, VertexId)> {
        self.crossing.get(&(from, to)).copied()
    }

    /// BFS from `source`, scanning neighbours in ascending id. Returns hop
    /// counts and the BFS parent of every reached supernode.
    pub fn bfs(&self, source: ClusterId) -> (Vec<Option<usize>>, Vec<Option<ClusterId>>) {
        let mut hops = vec![None; self.node_count()];
        let mut parent = vec![None; self.node_count()];
        let mut queue = VecDeque::new();
        hops[source] = Some(0);
        queue.push_back(source);
        while let Some(x) = queue.pop_front() {
            let h = hops[x].expect("queued nodes are reached");
            for &y in &self.adj[x] {
                if hops[y].is_none() {
                    hops[y] = Some(h + 1);
                    parent[y] = Some(x);
                    queue.push_back(y);
                }
            }
        }
        (hops, parent)
    }
}

pub fn cluster_graph(g: &WeightedGraph, c: &Clustering) -> Result<ClusterGraph, ShortcutError> {
    ClusterGraph::new(g, c)
}

/// Hop count between two supernodes, or `None` if they are disconnected.
pub fn hop_distance(cg: &ClusterGraph, a: ClusterId, b: ClusterId) -> Result<Option<usize>, ShortcutError> {
    for x in [a, b] {
        if x >= cg.node_count() {
            return Err(ShortcutError::InvalidCluster(x));
        }
    }
    Ok(cg.bfs(a).0[b])
}

/// Greedy ball carving in the given center order.
///
/// Each still-unclustered center grows a shortest-path ball of radius
/// `delta / 2` in the graph induced on unclustered vertices. A ball contains
/// the shortest-path tree to each of its members, so its strong diameter is
/// at most `delta`; clusters that still measure above `delta` (rounding) are
/// re-carved with half the radius.
pub fn ball_carving_in_order(g: &WeightedGraph, delta: f64, order: &[VertexId]) -> Clustering {
    let labels = carve_labels(g, delta / 2.0, order, |_| true);
    let mut clustering = Clustering::from_labels(g, &labels).expect("balls are connected");
    let mut radius = delta / 2.0;
    while clustering.max_strong_diameter() > delta {
        radius /= 2.0;
        let mut labels: Vec<usize> = clustering.assignment().to_vec();
        let mut next = clustering.len();
        for c in 0..clustering.len() {
            if clustering.strong_diameter(c) <= delta {
                continue;
            }
            let inside = clustering.members(c);
            let sub = carve_labels(g, radius, inside, |v| clustering.cluster_of(v) == c);
            for &v in inside {
                labels[v] = next + sub[v];
            }
            next += inside.len();
        }
        clustering = Clustering::from_labels(g, &labels).expect("balls are connected");
    }
    clustering
}

fn carve_labels<F>(g: &WeightedGraph, radius: f64, order: &[VertexId], allowed: F) -> Vec<usize>
where
    F: Fn(VertexId) -> bool,
{
    let n = g.vertex_count();
    let mut label = vec![usize::MAX; n];
    let mut next = 0;
    for &center in order {
        if label[center] != usize::MAX {
            continue;
        }
        let free = |v: VertexId| label[v] == usize::MAX && allowed(v);
        let (dist, _) = dijkstra_restricted(g, &[center], Some(radius), free);
        let ball: Vec<VertexId> = dist
            .iter()
            .enumerate()
            .filter_map(|(v, d)| d.map(|_| v))
            .collect();
        for v in ball {
            label[v] = next;
        }
        next += 1;
    }
    label
}

/// Ball carving with centers visited in a seed-derived random order.
pub fn ball_carving(g: &WeightedGraph, delta: f64, seed: u64) -> Clustering {
    let mut order: Vec<VertexId> = (0..g.vertex_count()).collect();
    order.shuffle(&mut rng::substream(seed, "ball-carving", 0));
    ball_carving_in_order(g, delta, &order)
}

/// A source of strong-diameter clusterings.
pub trait ShortcutProvider: Send + Sync {
    fn name(&self) -> &str;

    /// A cluster label per vertex. The result is validated by
    /// [`run_provider`]; implementations need not canonicalize labels.
    fn cluster_labels(&self, g: &WeightedGraph, delta: f64, seed: u64) -> Result<Vec<usize>, ShortcutError>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct BallCarving;

impl ShortcutProvider for BallCarving {
    fn name(&self) -> &str {
        DEFAULT_PROVIDER
    }

    fn cluster_labels(&self, g: &WeightedGraph, delta: f64, seed: u64) -> Result<Vec<usize>, ShortcutError> {
        Ok(ball_carving(g, delta, seed).assignment().to_vec())
    }
}

/// Every vertex in its own cluster. Always valid, usually many hops.
#[derive(Debug, Clone, Copy, Default)]
pub struct Singletons;

impl ShortcutProvider for Singletons {
    fn name(&self) -> &str {
        "singletons"
    }

    fn cluster_labels(&self, g: &WeightedGraph, _delta: f64, _seed: u64) -> Result<Vec<usize>, ShortcutError> {
        Ok((0..g.vertex_count()).collect())
    }
}

/// Runs a provider and enforces its contract.
pub fn run_provider(
    provider: &dyn ShortcutProvider,
    g: &WeightedGraph,
    delta: f64,
    seed: u64,
) -> Result<Clustering, ShortcutError> {
    if !(delta > 0.0) {
        return Err(ShortcutError::BadDelta(delta));
    }
    let labels = provider.cluster_labels(g, delta, seed)?;
    let clustering = Clustering::from_labels(g, &labels)?;
    for c in 0..clustering.len() {
        let diameter = clustering.strong_diameter(c);
        if diameter > delta {
            return Err(ShortcutError::DiameterExceeded {
                provider: provider.name().to_string(),
                witness: clustering.members(c)[0],
                diameter,
                delta,
            });
        }
    }
    Ok(clustering)
}

/// Name-indexed set of providers.
#[derive(Clone)]
pub struct ProviderRegistry {
    providers: BTreeMap<String, Arc<dyn ShortcutProvider>>,
}

impl Default for ProviderRegistry {
    fn default() -> Self {
        let mut r = ProviderRegistry {
            providers: BTreeMap::new(),
        };
        r.register(Arc::new(BallCarving));
        r.register(Arc::new(Singletons));
        r
    }
}

impl ProviderRegistry {
    pub fn register(&mut self, provider: Arc<dyn ShortcutProvider>) {
        self.providers.insert(provider.name().to_string(), provider);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn ShortcutProvider>, ShortcutError> {
        self.providers
            .get(name)
            .cloned()
            .ok_or_else(|| ShortcutError::UnknownProvider(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.providers.keys().map(String::as_str)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiameterViolation {
    pub cluster: ClusterId,
    pub witness: VertexId,
    pub diameter: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShortcutReport {
    pub delta: f64,
    pub max_strong_diameter: f64,
    pub worst_hop: usize,
    /// Largest `hop · Δ / max(dist, Δ)` over checked pairs.
    pub realized_kappa: f64,
    pub pairs_checked: usize,
    pub violations: Vec<DiameterViolation>,
}

impl ShortcutReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Default)]
struct HopSummary {
    pairs: usize,
    worst_hop: usize,
    kappa: f64,
}

impl PairCount for HopSummary {
    fn pair_count(&self) -> usize {
        self.pairs
    }
}

/// Checks every cluster's strong diameter against `delta` and measures the
/// hop/distance ratio over all vertex pairs.
pub fn verify_shortcut(g: &WeightedGraph, c: &Clustering, delta: f64) -> Result<ShortcutReport, ShortcutError> {
    verify_shortcut_with(g, c, delta, PairSelection::All, 0)
}

/// As [`verify_shortcut`], with the pair set chosen by `selection`.
pub fn verify_shortcut_with(
    g: &WeightedGraph,
    c: &Clustering,
    delta: f64,
    selection: PairSelection,
    seed: u64,
) -> Result<ShortcutReport, ShortcutError> {
    if !(delta > 0.0) {
        return Err(ShortcutError::BadDelta(delta));
    }
    let cg = ClusterGraph::new(g, c)?;
    let violations = (0..c.len())
        .filter(|&k| c.strong_diameter(k) > delta)
        .map(|k| DiameterViolation {
            cluster: k,
            witness: c.members(k)[0],
            diameter: c.strong_diameter(k),
        })
        .collect();
    let exhaustive = selection.resolve(g.vertex_count()) == PairSelection::All;
    let per_source = |u: VertexId| {
        let (dist, _) = dijkstra_restricted(g, &[u], None, |_| true);
        let (hops, _) = cg.bfs(c.cluster_of(u));
        let mut s = HopSummary::default();
        for (v, d) in dist.iter().enumerate() {
            // Exhaustive mode counts each unordered pair once.
            if v == u || (exhaustive && v < u) {
                continue;
            }
            let Some(d) = *d else { continue };
            let hop = hops[c.cluster_of(v)].expect("connected vertices have connected clusters");
            s.pairs += 1;
            s.worst_hop = s.worst_hop.max(hop);
            s.kappa = s.kappa.max(hop as f64 * delta / d.max(delta));
        }
        s
    };
    let summaries = for_each_source(g.vertex_count(), selection, seed, per_source);
    Ok(ShortcutReport {
        delta,
        max_strong_diameter: c.max_strong_diameter(),
        worst_hop: summaries.iter().map(|s| s.worst_hop).max().unwrap_or(0),
        realized_kappa: summaries.iter().map(|s| s.kappa).fold(0.0, f64::max),
        pairs_checked: summaries.iter().map(|s| s.pairs).sum(),
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_path(n: usize) -> WeightedGraph {
        WeightedGraph::from_edges(n, (1..n).map(|i| (i - 1, i, 1.0))).unwrap()
    }

    fn cycle4() -> WeightedGraph {
        WeightedGraph::from_edges(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)]).unwrap()
    }

    #[test]
    fn canonical_ids_and_diameters() {
        let g = unit_path(4);
        let c = Clustering::from_labels(&g, &[9, 9, 4, 4]).unwrap();
        assert_eq!(c.assignment(), &[0, 0, 1, 1]);
        assert_eq!(c.members(1), &[2, 3]);
        assert_eq!(c.strong_diameter(0), 1.0);
    }

    #[test]
    fn rejects_disconnected_cluster() {
        let err = Clustering::from_labels(&cycle4(), &[0, 1, 0, 1]).unwrap_err();
        assert_eq!(err, ShortcutError::DisconnectedCluster { a: 0, b: 2 });
        assert!(matches!(
            Clustering::from_labels(&cycle4(), &[0, 0]),
            Err(ShortcutError::SizeMismatch { .. })
        ));
    }

    #[test]
    fn carving_unit_path_with_half_radius_gives_singletons() {
        let g = unit_path(4);
        let c = ball_carving_in_order(&g, 1.0, &[0, 1, 2, 3]);
        assert_eq!(c.clusters(), &[vec![0], vec![1], vec![2], vec![3]]);
        // Budget 2 lets radius-1 balls swallow a neighbour.
        let c = ball_carving_in_order(&g, 2.0, &[0, 1, 2, 3]);
        assert_eq!(c.clusters(), &[vec![0, 1], vec![2, 3]]);
    }

    #[test]
    fn carving_large_budget_single_cluster() {
        let g = unit_path(6);
        let c = ball_carving(&g, 10.0, 3);
        assert_eq!(c.len(), 1);
        let bare = WeightedGraph::empty(3);
        assert_eq!(ball_carving(&bare, 1.0, 0).len(), 3);
    }

    #[test]
    fn cluster_graph_examples() {
        let g = unit_path(4);
        let c = Clustering::from_labels(&g, &[0, 0, 1, 1]).unwrap();
        let cg = cluster_graph(&g, &c).unwrap();
        assert_eq!(cg.edge_count(), 1);
        assert_eq!(cg.crossing_edge(0, 1), Some((1, 2)));
        assert_eq!(cg.crossing_edge(1, 0), Some((2, 1)));
        let single = Clustering::from_labels(&g, &[0, 0, 0, 0]).unwrap();
        let cg = cluster_graph(&g, &single).unwrap();
        assert_eq!((cg.node_count(), cg.edge_count()), (1, 0));
        let s = Clustering::singletons(&g);
        let cg = cluster_graph(&g, &s).unwrap();
        assert_eq!(cg.edge_count(), 3);
        assert!(cg.has_edge(1, 2) && !cg.has_edge(0, 2));
    }

    #[test]
    fn hop_distance_examples() {
        let g = unit_path(4);
        let cg = cluster_graph(&g, &Clustering::singletons(&g)).unwrap();
        assert_eq!(hop_distance(&cg, 2, 2), Ok(Some(0)));
        assert_eq!(hop_distance(&cg, 1, 2), Ok(Some(1)));
        assert_eq!(hop_distance(&cg, 0, 3), Ok(Some(3)));
        assert_eq!(hop_distance(&cg, 0, 4), Err(ShortcutError::InvalidCluster(4)));
        let bare = WeightedGraph::empty(2);
        let cg = cluster_graph(&bare, &Clustering::singletons(&bare)).unwrap();
        assert_eq!(hop_distance(&cg, 0, 1), Ok(None));
    }

    #[test]
    fn verify_one_cluster() {
        let g = unit_path(4);
        let c = Clustering::from_labels(&g, &[0; 4]).unwrap();
        let r = verify_shortcut(&g, &c, 3.0).unwrap();
        assert_eq!(r.realized_kappa, 0.0);
        assert_eq!(r.worst_hop, 0);
        assert!(r.passed());
    }

    #[test]
    fn verify_singletons_on_path() {
        for len in 1..6 {
            let g = unit_path(len + 1);
            let r = verify_shortcut(&g, &Clustering::singletons(&g), 1.0).unwrap();
            assert_eq!(r.worst_hop, len);
            assert_eq!(r.realized_kappa, 1.0);
            assert_eq!(r.pairs_checked, (len + 1) * len / 2);
        }
    }

    #[test]
    fn verify_two_clusters() {
        let g = unit_path(4);
        let c = Clustering::from_labels(&g, &[0, 0, 1, 1]).unwrap();
        let r = verify_shortcut(&g, &c, 1.0).unwrap();
        // Pairs (0,2),(1,2),(1,3) and (0,3) cross with one hop; the adjacent
        // crossing pair (1,2) sits at distance 1 and gives ratio 1.
        assert_eq!(r.worst_hop, 1);
        assert_eq!(r.realized_kappa, 1.0);
        assert!(r.passed());
        let tight = verify_shortcut(&g, &c, 0.5).unwrap();
        assert_eq!(tight.violations.len(), 2);
    }

    struct Broken;
    impl ShortcutProvider for Broken {
        fn name(&self) -> &str {
            "broken"
        }
        fn cluster_labels(&self, _g: &WeightedGraph, _d: f64, _s: u64) -> Result<Vec<usize>, ShortcutError> {
            Ok(vec![0, 1, 0, 1])
        }
    }

    struct OneCluster;
    impl ShortcutProvider for OneCluster {
        fn name(&self) -> &str {
            "one"
        }
        fn cluster_labels(&self, g: &WeightedGraph, _d: f64, _s: u64) -> Result<Vec<usize>, ShortcutError> {
            Ok(vec![0; g.vertex_count()])
        }
    }

    #[test]
    fn provider_contract() {
        let g = cycle4();
        assert!(matches!(
            run_provider(&Broken, &g, 5.0, 0),
            Err(ShortcutError::DisconnectedCluster { .. })
        ));
        assert_eq!(run_provider(&OneCluster, &g, 2.0, 0).unwrap().len(), 1);
        assert!(matches!(
            run_provider(&OneCluster, &g, 1.0, 0),
            Err(ShortcutError::DiameterExceeded { .. })
        ));
        assert_eq!(run_provider(&BallCarving, &g, 2.0, 1).unwrap(), ball_carving(&g, 2.0, 1));
        assert_eq!(run_provider(&BallCarving, &g, 100.0, 1).unwrap().len(), 1);
        assert!(matches!(run_provider(&BallCarving, &g, 0.0, 1), Err(ShortcutError::BadDelta(_))));
    }

    #[test]
    fn registry() {
        let mut r = ProviderRegistry::default();
        assert_eq!(r.names().collect::<Vec<_>>(), vec!["ball-carving", "singletons"]);
        assert!(r.get("nope").is_err());
        r.register(Arc::new(OneCluster));
        assert_eq!(r.get("one").unwrap().name(), "one");
    }
}
