//! Weighted undirected graphs and the shortest-path machinery everything else
//! is built on.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type VertexId = usize;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("vertex {vertex} out of range for graph on {n} vertices")]
    InvalidVertex { vertex: VertexId, n: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(VertexId),
    #[error("edge ({u}, {v}) has weight {weight}; weights must be finite and strictly positive")]
    BadWeight { u: VertexId, v: VertexId, weight: f64 },
    #[error("terminal set is empty")]
    EmptyTerminals,
    #[error("vertex set is empty")]
    EmptySet,
    #[error("component containing vertex {0} has no terminal")]
    ComponentWithoutTerminal(VertexId),
    #[error("graph needs at least two vertices, found {0}")]
    TooSmall(usize),
    #[error("assignment is undefined at vertex {0}")]
    AssignmentNotTotal(VertexId),
    #[error("assignment maps vertex {vertex} to {target}, which is not a terminal")]
    AssignmentNotTerminal { vertex: VertexId, target: VertexId },
    #[error("terminal {0} is not assigned to itself")]
    TerminalNotFixed(VertexId),
    #[error("branch set of terminal {terminal} is disconnected: {a} and {b} are not joined inside it")]
    DisconnectedBranchSet {
        terminal: VertexId,
        a: VertexId,
        b: VertexId,
    },
    #[error("vertices {u} and {v} are not adjacent")]
    NotAdjacent { u: VertexId, v: VertexId },
    #[error("assignment has length {found}, expected {expected}")]
    AssignmentLength { expected: usize, found: usize },
}

/// An undirected edge with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: VertexId,
    pub v: VertexId,
    pub weight: f64,
}

/// Undirected graph on dense vertex ids `0..n` with strictly positive weights.
///
/// Adjacency lists are sorted by neighbour id, so lookups are binary searches
/// and every traversal visits neighbours in a fixed order.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    adj: Vec<Vec<(VertexId, f64)>>,
    edges: Vec<Edge>,
}

impl WeightedGraph {
    /// Builds a graph from an edge list. Parallel edges collapse to the
    /// lightest one; self-loops and non-positive weights are rejected.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (VertexId, VertexId, f64)>,
    {
        let mut list: Vec<Edge> = Vec::new();
        for (a, b, w) in edges {
            for x in [a, b] {
                if x >= n {
                    return Err(GraphError::InvalidVertex { vertex: x, n });
                }
            }
            if a == b {
                return Err(GraphError::SelfLoop(a));
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(GraphError::BadWeight { u: a, v: b, weight: w });
            }
            let (u, v) = if a < b { (a, b) } else { (b, a) };
            list.push(Edge { u, v, weight: w });
        }
        list.sort_by(|x, y| (x.u, x.v).cmp(&(y.u, y.v)).then(x.weight.total_cmp(&y.weight)));
        list.dedup_by(|later, kept| later.u == kept.u && later.v == kept.v);
        Ok(Self::from_sorted_edges(n, list))
    }

    fn from_sorted_edges(n: usize, edges: Vec<Edge>) -> Self {
        let mut adj = vec![Vec::new(); n];
        for e in &edges {
            adj[e.u].push((e.v, e.weight));
            adj[e.v].push((e.u, e.weight));
        }
        for list in &mut adj {
            list.sort_by_key(|&(x, _)| x);
        }
        WeightedGraph { adj, edges }
    }

    pub fn empty(n: usize) -> Self {
        Self::from_sorted_edges(n, Vec::new())
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges sorted by `(u, v)` with `u < v`.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn neighbors(&self, v: VertexId) -> &[(VertexId, f64)] {
        &self.adj[v]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.adj[v].len()
    }

    pub fn weight(&self, u: VertexId, v: VertexId) -> Option<f64> {
        let list = self.adj.get(u)?;
        list.binary_search_by_key(&v, |&(x, _)| x)
            .ok()
            .map(|i| list[i].1)
    }

    pub fn check_vertex(&self, v: VertexId) -> Result<(), GraphError> {
        if v < self.vertex_count() {
            Ok(())
        } else {
            Err(GraphError::InvalidVertex {
                vertex: v,
                n: self.vertex_count(),
            })
        }
    }

    pub fn min_edge_weight(&self) -> Option<f64> {
        self.edges.iter().map(|e| e.weight).min_by(f64::total_cmp)
    }

    /// Component label per vertex, numbered in order of smallest member.
    pub fn components(&self) -> Vec<usize> {
        let n = self.vertex_count();
        let mut comp = vec![usize::MAX; n];
        let mut next = 0;
        let mut queue = VecDeque::new();
        for s in 0..n {
            if comp[s] != usize::MAX {
                continue;
            }
            comp[s] = next;
            queue.push_back(s);
            while let Some(x) = queue.pop_front() {
                for &(y, _) in &self.adj[x] {
                    if comp[y] == usize::MAX {
                        comp[y] = next;
                        queue.push_back(y);
                    }
                }
            }
            next += 1;
        }
        comp
    }

    /// Multiplies every weight by `factor` (which must be positive).
    pub fn scaled(&self, factor: f64) -> WeightedGraph {
        let edges = self
            .edges
            .iter()
            .map(|e| Edge {
                weight: e.weight * factor,
                ..*e
            })
            .collect();
        Self::from_sorted_edges(self.vertex_count(), edges)
    }
}

/// A nonempty set of terminal vertices, stored sorted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TerminalSet {
    terminals: Vec<VertexId>,
}

impl TerminalSet {
    pub fn new(g: &WeightedGraph, ids: impl IntoIterator<Item = VertexId>) -> Result<Self, GraphError> {
        let mut terminals: Vec<VertexId> = ids.into_iter().collect();
        for &t in &terminals {
            g.check_vertex(t)?;
        }
        terminals.sort_unstable();
        terminals.dedup();
        if terminals.is_empty() {
            return Err(GraphError::EmptyTerminals);
        }
        Ok(TerminalSet { terminals })
    }

    pub fn all(g: &WeightedGraph) -> Result<Self, GraphError> {
        Self::new(g, 0..g.vertex_count())
    }

    pub fn as_slice(&self) -> &[VertexId] {
        &self.terminals
    }

    pub fn len(&self) -> usize {
        self.terminals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terminals.is_empty()
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.terminals.binary_search(&v).is_ok()
    }

    /// Position of `v` in the sorted terminal list.
    pub fn index_of(&self, v: VertexId) -> Option<usize> {
        self.terminals.binary_search(&v).ok()
    }

    /// Every connected component must hold at least one terminal.
    pub fn check_covers_components(&self, g: &WeightedGraph) -> Result<(), GraphError> {
        let comp = g.components();
        let count = comp.iter().copied().max().map_or(0, |c| c + 1);
        let mut covered = vec![false; count];
        for &t in &self.terminals {
            covered[comp[t]] = true;
        }
        match covered.iter().position(|c| !c) {
            Some(c) => Err(GraphError::ComponentWithoutTerminal(
                comp.iter().position(|&x| x == c).expect("component has a member"),
            )),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Source {
    Vertex(VertexId),
    Set(Vec<VertexId>),
}

/// Result of a shortest-path computation: distance (or `None` for
/// unreachable) and the predecessor on one shortest path per vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMap {
    pub source: Source,
    dist: Vec<Option<f64>>,
    parent: Vec<Option<VertexId>>,
}

impl DistanceMap {
    pub fn get(&self, v: VertexId) -> Option<f64> {
        self.dist[v]
    }

    pub fn distances(&self) -> &[Option<f64>] {
        &self.dist
    }

    pub fn parent(&self, v: VertexId) -> Option<VertexId> {
        self.parent[v]
    }

    /// Vertex sequence from the (nearest) source to `target`.
    pub fn path_to(&self, target: VertexId) -> Option<Vec<VertexId>> {
        self.dist[target]?;
        let mut out = vec![target];
        let mut cur = target;
        while let Some(p) = self.parent[cur] {
            out.push(p);
            cur = p;
        }
        out.reverse();
        Some(out)
    }

    pub fn max_finite(&self) -> Option<f64> {
        self.dist.iter().flatten().copied().max_by(f64::total_cmp)
    }
}

#[derive(Clone, Copy, PartialEq)]
struct HeapItem {
    dist: f64,
    vertex: VertexId,
}

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.vertex.cmp(&self.vertex))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Dijkstra from a set of sources, restricted to vertices accepted by
/// `allowed` and stopping once the frontier exceeds `limit`.
///
/// Vertices beyond `limit` are reported unreachable. Ties are broken by
/// vertex id so parents are deterministic.
pub fn dijkstra_restricted<F>(
    g: &WeightedGraph,
    sources: &[VertexId],
    limit: Option<f64>,
    allowed: F,
) -> (Vec<Option<f64>>, Vec<Option<VertexId>>)
where
    F: Fn(VertexId) -> bool,
{
    let n = g.vertex_count();
    let mut dist: Vec<Option<f64>> = vec![None; n];
    let mut parent = vec![None; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    for &s in sources {
        if allowed(s) && dist[s].is_none() {
            dist[s] = Some(0.0);
            heap.push(HeapItem { dist: 0.0, vertex: s });
        }
    }
    while let Some(HeapItem { dist: d, vertex: x }) = heap.pop() {
        if done[x] {
            continue;
        }
        done[x] = true;
        for &(y, w) in g.neighbors(x) {
            if done[y] || !allowed(y) {
                continue;
            }
            let nd = d + w;
            if limit.is_some_and(|l| nd > l) {
                continue;
            }
            let better = match dist[y] {
                None => true,
                Some(old) => nd < old || (nd == old && parent[y].is_some_and(|p| x < p)),
            };
            if better {
                dist[y] = Some(nd);
                parent[y] = Some(x);
                heap.push(HeapItem { dist: nd, vertex: y });
            }
        }
    }
    (dist, parent)
}

/// Exact single-source shortest paths.
pub fn sssp(g: &WeightedGraph, source: VertexId) -> Result<DistanceMap, GraphError> {
    g.check_vertex(source)?;
    let (dist, parent) = dijkstra_restricted(g, &[source], None, |_| true);
    Ok(DistanceMap {
        source: Source::Vertex(source),
        dist,
        parent,
    })
}

/// Distance from every vertex to the nearest member of `terminals`, in a
/// single multi-source pass.
pub fn dist_to_set(g: &WeightedGraph, terminals: &[VertexId]) -> Result<DistanceMap, GraphError> {
    if terminals.is_empty() {
        return Err(GraphError::EmptyTerminals);
    }
    for &t in terminals {
        g.check_vertex(t)?;
    }
    let (dist, parent) = dijkstra_restricted(g, terminals, None, |_| true);
    Ok(DistanceMap {
        source: Source::Set(terminals.to_vec()),
        dist,
        parent,
    })
}

/// Copy of `g` keeping exactly the edges of weight at most `delta`.
pub fn prune_heavy_edges(g: &WeightedGraph, delta: f64) -> WeightedGraph {
    let edges = g.edges.iter().filter(|e| e.weight <= delta).copied().collect();
    WeightedGraph::from_sorted_edges(g.vertex_count(), edges)
}

/// An induced subgraph together with the id mapping back to its host.
#[derive(Debug, Clone)]
pub struct Subgraph {
    pub graph: WeightedGraph,
    /// Local id -> host id (ascending).
    pub to_host: Vec<VertexId>,
    /// Host id -> local id.
    pub from_host: Vec<Option<VertexId>>,
}

pub fn induced_subgraph(g: &WeightedGraph, vertices: &[VertexId]) -> Result<Subgraph, GraphError> {
    let mut to_host = vertices.to_vec();
    for &v in &to_host {
        g.check_vertex(v)?;
    }
    to_host.sort_unstable();
    to_host.dedup();
    let mut from_host = vec![None; g.vertex_count()];
    for (local, &host) in to_host.iter().enumerate() {
        from_host[host] = Some(local);
    }
    let edges = g
        .edges
        .iter()
        .filter_map(|e| match (from_host[e.u], from_host[e.v]) {
            (Some(a), Some(b)) => Some(Edge {
                u: a,
                v: b,
                weight: e.weight,
            }),
            _ => None,
        })
        .collect();
    Ok(Subgraph {
        graph: WeightedGraph::from_sorted_edges(to_host.len(), edges),
        to_host,
        from_host,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DiameterMode {
    /// Distances measured in the host graph.
    Weak,
    /// Distances measured inside the subgraph induced by the set.
    Strong,
}

/// Largest pairwise distance within `set`. `Ok(None)` means some pair is
/// disconnected under the chosen mode.
pub fn set_diameter(
    g: &WeightedGraph,
    set: &[VertexId],
    mode: DiameterMode,
) -> Result<Option<f64>, GraphError> {
    if set.is_empty() {
        return Err(GraphError::EmptySet);
    }
    let mut member = vec![false; g.vertex_count()];
    for &v in set {
        g.check_vertex(v)?;
        member[v] = true;
    }
    let mut best = 0.0f64;
    for &s in set {
        let (dist, _) = match mode {
            DiameterMode::Weak => dijkstra_restricted(g, &[s], None, |_| true),
            DiameterMode::Strong => dijkstra_restricted(g, &[s], None, |x| member[x]),
        };
        for &t in set {
            match dist[t] {
                Some(d) => best = best.max(d),
                None => return Ok(None),
            }
        }
    }
    Ok(Some(best))
}

/// Rescales `g` so the smallest distance between distinct vertices is 1.
///
/// Returns the rescaled graph and the factor applied. With positive weights
/// the closest pair of distinct vertices is always the endpoints of a
/// lightest edge; an edgeless graph has no connected pair and keeps factor 1.
pub fn normalize_scale(g: &WeightedGraph) -> Result<(WeightedGraph, f64), GraphError> {
    if g.vertex_count() < 2 {
        return Err(GraphError::TooSmall(g.vertex_count()));
    }
    match g.min_edge_weight() {
        Some(d_min) => {
            // Dividing keeps every rescaled weight at or above exactly 1.
            let edges = g.edges.iter().map(|e| Edge { weight: e.weight / d_min, ..*e }).collect();
            Ok((WeightedGraph::from_sorted_edges(g.vertex_count(), edges), 1.0 / d_min))
        }
        None => Ok((g.clone(), 1.0)),
    }
}

/// A walk through the host graph with its total weight cached.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Path {
    vertices: Vec<VertexId>,
    length: f64,
}

impl Path {
    pub fn new(g: &WeightedGraph, vertices: Vec<VertexId>) -> Result<Self, GraphError> {
        if vertices.is_empty() {
            return Err(GraphError::EmptySet);
        }
        for &v in &vertices {
            g.check_vertex(v)?;
        }
        let mut length = 0.0;
        for pair in vertices.windows(2) {
            length += g
                .weight(pair[0], pair[1])
                .ok_or(GraphError::NotAdjacent { u: pair[0], v: pair[1] })?;
        }
        Ok(Path { vertices, length })
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn hops(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn first(&self) -> VertexId {
        self.vertices[0]
    }

    pub fn last(&self) -> VertexId {
        *self.vertices.last().expect("paths are nonempty")
    }

    pub fn edge_weights<'a>(&'a self, g: &'a WeightedGraph) -> impl Iterator<Item = f64> + 'a {
        self.vertices
            .windows(2)
            .map(|p| g.weight(p[0], p[1]).expect("validated at construction"))
    }
}

/// A minor on the terminal set: vertex `i` of `graph` is terminal
/// `terminals[i]`, and `branch_sets[i]` lists the host vertices contracted
/// into it.
#[derive(Debug, Clone, PartialEq)]
pub struct Minor {
    pub terminals: Vec<VertexId>,
    pub graph: WeightedGraph,
    pub branch_sets: Vec<Vec<VertexId>>,
}

/// Contracts each branch set `f⁻¹(t)` into `t` and weights every resulting
/// edge by the exact host distance between its terminals.
pub fn contract_assignment(
    g: &WeightedGraph,
    terminals: &TerminalSet,
    assignment: &[Option<VertexId>],
) -> Result<Minor, GraphError> {
    let n = g.vertex_count();
    if assignment.len() != n {
        return Err(GraphError::AssignmentLength {
            expected: n,
            found: assignment.len(),
        });
    }
    let k = terminals.len();
    let mut owner = vec![0usize; n];
    let mut branch_sets = vec![Vec::new(); k];
    for (v, target) in assignment.iter().enumerate() {
        let t = target.ok_or(GraphError::AssignmentNotTotal(v))?;
        let idx = terminals
            .index_of(t)
            .ok_or(GraphError::AssignmentNotTerminal { vertex: v, target: t })?;
        owner[v] = idx;
        branch_sets[idx].push(v);
    }
    for &t in terminals.as_slice() {
        if assignment[t] != Some(t) {
            return Err(GraphError::TerminalNotFixed(t));
        }
    }
    for (idx, set) in branch_sets.iter().enumerate() {
        let (dist, _) = dijkstra_restricted(g, &[terminals.as_slice()[idx]], None, |x| owner[x] == idx);
        if let Some(&b) = set.iter().find(|&&v| dist[v].is_none()) {
            return Err(GraphError::DisconnectedBranchSet {
                terminal: terminals.as_slice()[idx],
                a: terminals.as_slice()[idx],
                b,
            });
        }
    }

    let mut pairs: Vec<(usize, usize)> = g
        .edges()
        .iter()
        .filter_map(|e| {
            let (a, b) = (owner[e.u], owner[e.v]);
            (a != b).then(|| (a.min(b), a.max(b)))
        })
        .collect();
    pairs.sort_unstable();
    pairs.dedup();

    let mut from_terminal: Vec<Option<Vec<Option<f64>>>> = vec![None; k];
    for &(a, _) in &pairs {
        if from_terminal[a].is_none() {
            let (dist, _) = dijkstra_restricted(g, &[terminals.as_slice()[a]], None, |_| true);
            from_terminal[a] = Some(dist);
        }
    }
    let weighted = pairs.iter().map(|&(a, b)| {
        let dist = from_terminal[a].as_ref().expect("computed above");
        let w = dist[terminals.as_slice()[b]].expect("adjacent branch sets are connected");
        (a, b, w)
    });
    let graph = WeightedGraph::from_edges(k, weighted)?;
    Ok(Minor {
        terminals: terminals.as_slice().to_vec(),
        graph,
        branch_sets,
    })
}
