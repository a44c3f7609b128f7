//! Iterative terminal assignment and minor construction.
//!
//! Distances are rescaled so the closest pair of vertices is at distance 1.
//! Iteration `i` handles the unassigned vertices whose distance to the
//! terminal set lies in `[ζ^{i-1}, ζ^i)`: it builds a scattering partition
//! with budget `ζ^{i-1}` on the graph induced by all unassigned vertices,
//! keeps the clusters that contain such a vertex, and attaches each kept
//! cluster to the already-assigned region through a chain of edges of weight
//! at most `ζ^i`. A cluster inherits the terminal of the vertex it attaches
//! to. Once every vertex is assigned, each terminal's branch set is
//! contracted and minor edges are weighted by exact host distances.

use std::sync::Arc;

use log::warn;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{
    contract_assignment, dijkstra_restricted, dist_to_set, induced_subgraph, normalize_scale, GraphError, Minor,
    Subgraph, TerminalSet, VertexId, WeightedGraph,
};
use crate::pairs::PairSelection;
use crate::rng;
use crate::scattering::{build_scattering_partition, verify_scattering, ScatterError, ScatterViolation, ScatteringPartition};
use crate::shortcut::{ProviderRegistry, ShortcutError, ShortcutProvider, DEFAULT_PROVIDER};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SprError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Scatter(#[from] ScatterError),
    #[error(transparent)]
    Shortcut(#[from] ShortcutError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("iteration {iteration}: cluster containing vertex {witness} cannot be reached through light edges")]
    LevelUnreachable { iteration: usize, witness: VertexId },
    #[error("every vertex is already assigned")]
    NothingToAssign,
    #[error("assignment did not finish within {0} iterations")]
    Nontermination(usize),
    #[error("invariant violated: {0}")]
    Invariant(InvariantViolation),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Error)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InvariantViolation {
    #[error("vertex {vertex} changed terminal in iteration {iteration}")]
    Monotonicity { vertex: VertexId, iteration: usize },
    #[error("vertex {vertex} at distance {distance} to the terminals is unassigned after iteration {iteration}")]
    Coverage {
        vertex: VertexId,
        iteration: usize,
        distance: f64,
    },
    #[error("branch set of terminal {terminal} does not reach vertex {vertex} after iteration {iteration}")]
    BranchSet {
        terminal: VertexId,
        vertex: VertexId,
        iteration: usize,
    },
    #[error("iteration {iteration}: scattering check failed for ({u}, {v})")]
    Scattering { iteration: usize, u: VertexId, v: VertexId },
    #[error("{0}")]
    Window(WindowViolation),
    #[error("{0}")]
    Radius(RadiusViolation),
    #[error("{iterations} iterations exceed the bound {bound}")]
    Termination { iterations: usize, bound: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SprConfig {
    /// Target length factor of the scattering partitions.
    pub beta: f64,
    /// Target number of clusters a scattered path may touch.
    pub tau: f64,
    /// Replaces the derived ζ by `c · β · τ`.
    pub c_override: Option<f64>,
    pub max_iterations: usize,
    pub provider: String,
    pub seed: u64,
    /// Turn invariant violations into errors instead of report entries.
    pub strict: bool,
    pub pairs: PairSelection,
    /// How many times ζ may be raised when measured β/τ exceed the targets.
    pub max_escalations: usize,
}

impl Default for SprConfig {
    fn default() -> Self {
        SprConfig {
            beta: 2.0,
            tau: 3.0,
            c_override: None,
            max_iterations: 64,
            provider: DEFAULT_PROVIDER.to_string(),
            seed: 0,
            strict: false,
            pairs: PairSelection::Auto,
            max_escalations: 1,
        }
    }
}

impl SprConfig {
    pub fn zeta(&self) -> Result<f64, SprError> {
        derive_zeta(self.beta, self.tau, self.c_override)
    }
}

/// Smallest admissible scale base: `max(4, (τ + 2)·β + 4)`.
///
/// The analysis needs ζ > 3, ζ > β and
/// `ζ^{i-1} + 2ζ^i + (τ+2)·β·ζ^i < ζ^{i+1}`; the last one holds whenever
/// `ζ ≥ (τ+2)·β + 4`. An override `c` gives `ζ = c·β·τ` and must meet the
/// same conditions.
pub fn derive_zeta(beta: f64, tau: f64, c_override: Option<f64>) -> Result<f64, SprError> {
    if !(beta >= 1.0 && beta.is_finite()) || !(tau >= 1.0 && tau.is_finite()) {
        return Err(SprError::Config(format!("beta and tau must be >= 1, got beta={beta} tau={tau}")));
    }
    let floor = f64::max(4.0, (tau + 2.0) * beta + 4.0);
    match c_override {
        None => Ok(floor),
        Some(c) => {
            let zeta = c * beta * tau;
            if zeta.is_finite() && zeta >= floor {
                Ok(zeta)
            } else {
                Err(SprError::Config(format!(
                    "c={c} gives zeta={zeta}, below the admissible minimum {floor}"
                )))
            }
        }
    }
}

fn scale(zeta: f64, exp: i32) -> f64 {
    zeta.powi(exp)
}

/// `R_i`: vertices with `ζ^{i-1} ≤ dist(v, K) < ζ^i`; `R_0 = K`.
pub fn relevant_vertices(
    g: &WeightedGraph,
    terminals: &TerminalSet,
    zeta: f64,
    i: usize,
) -> Result<Vec<VertexId>, SprError> {
    let dist = dist_to_set(g, terminals.as_slice())?;
    Ok(relevant_from(dist.distances(), terminals, zeta, i))
}

fn relevant_from(dist: &[Option<f64>], terminals: &TerminalSet, zeta: f64, i: usize) -> Vec<VertexId> {
    if i == 0 {
        return terminals.as_slice().to_vec();
    }
    let lo = scale(zeta, i as i32 - 1);
    let hi = scale(zeta, i as i32);
    dist.iter()
        .enumerate()
        .filter_map(|(v, d)| d.filter(|&d| lo <= d && d < hi).map(|_| v))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterLevel {
    pub level: usize,
    /// Already-leveled endpoint of the attaching edge.
    pub linking: VertexId,
    /// Endpoint of the attaching edge inside the cluster.
    pub attach: VertexId,
}

/// Levels clusters by breadth-first search from `previous` (level 0) over
/// edges of weight at most `threshold`. Among the candidate attaching edges
/// `(v, x)` of a cluster the lexicographically smallest is kept.
pub fn level_and_link(
    g: &WeightedGraph,
    clusters: &[Vec<VertexId>],
    previous: &[bool],
    threshold: f64,
) -> Result<Vec<ClusterLevel>, SprError> {
    let n = g.vertex_count();
    let mut owner: Vec<Option<usize>> = vec![None; n];
    for (ci, members) in clusters.iter().enumerate() {
        for &v in members {
            owner[v] = Some(ci);
        }
    }
    let mut levels: Vec<Option<ClusterLevel>> = vec![None; clusters.len()];
    let mut frontier: Vec<VertexId> = (0..n).filter(|&v| previous[v]).collect();
    let mut level = 1;
    while !frontier.is_empty() {
        let mut best: Vec<Option<(VertexId, VertexId)>> = vec![None; clusters.len()];
        for &v in &frontier {
            for &(x, w) in g.neighbors(v) {
                if w > threshold {
                    continue;
                }
                if let Some(ci) = owner[x] {
                    if levels[ci].is_none() {
                        let cand = (v, x);
                        best[ci] = Some(best[ci].map_or(cand, |b| b.min(cand)));
                    }
                }
            }
        }
        frontier.clear();
        for (ci, b) in best.into_iter().enumerate() {
            if let Some((linking, attach)) = b {
                levels[ci] = Some(ClusterLevel { level, linking, attach });
                frontier.extend_from_slice(&clusters[ci]);
            }
        }
        level += 1;
    }
    levels
        .into_iter()
        .enumerate()
        .map(|(ci, l)| {
            l.ok_or(SprError::LevelUnreachable {
                iteration: 0,
                witness: clusters[ci].iter().copied().min().unwrap_or(0),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub vertex: VertexId,
    pub iteration: usize,
    pub terminal: VertexId,
    pub level: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterRecord {
    pub members: Vec<VertexId>,
    #[serde(flatten)]
    pub level: ClusterLevel,
}

/// State after iteration `iteration`.
#[derive(Debug, Clone, PartialEq)]
pub struct AssignmentState {
    pub iteration: usize,
    /// `f_i`; `None` is ⊥.
    pub assignment: Vec<Option<VertexId>>,
    pub assigned_at: Vec<Option<usize>>,
    /// `R_i` of the latest iteration.
    pub relevant: Vec<VertexId>,
    /// Clusters assigned in the latest iteration, in scan order.
    pub clusters: Vec<ClusterRecord>,
    pub trace: Vec<TraceRecord>,
    dist_to_terminals: Vec<Option<f64>>,
}

impl AssignmentState {
    /// `f_0`: every terminal maps to itself, everything else is ⊥.
    pub fn initial(g: &WeightedGraph, terminals: &TerminalSet) -> Result<Self, SprError> {
        let n = g.vertex_count();
        let dist = dist_to_set(g, terminals.as_slice())?;
        let mut assignment = vec![None; n];
        let mut assigned_at = vec![None; n];
        let mut trace = Vec::with_capacity(n);
        for &t in terminals.as_slice() {
            assignment[t] = Some(t);
            assigned_at[t] = Some(0);
            trace.push(TraceRecord {
                vertex: t,
                iteration: 0,
                terminal: t,
                level: 0,
            });
        }
        Ok(AssignmentState {
            iteration: 0,
            assignment,
            assigned_at,
            relevant: terminals.as_slice().to_vec(),
            clusters: Vec::new(),
            trace,
            dist_to_terminals: dist.distances().to_vec(),
        })
    }

    pub fn dist_to_terminals(&self) -> &[Option<f64>] {
        &self.dist_to_terminals
    }

    pub fn is_assigned(&self, v: VertexId) -> bool {
        self.assignment[v].is_some()
    }

    pub fn unassigned(&self) -> Vec<VertexId> {
        (0..self.assignment.len()).filter(|&v| !self.is_assigned(v)).collect()
    }

    pub fn is_complete(&self) -> bool {
        self.assignment.iter().all(Option::is_some)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationStats {
    pub attempt: usize,
    pub i: usize,
    /// Cluster diameter budget `ζ^{i-1}`.
    pub delta: f64,
    /// Attaching-edge threshold `ζ^i`.
    pub threshold: f64,
    pub unassigned_before: usize,
    pub relevant: usize,
    /// Clusters in the scattering partition of the unassigned subgraph.
    pub clusters: usize,
    /// Clusters assigned in this iteration.
    pub selected: usize,
    pub assigned: usize,
    pub max_level: usize,
    pub tau_emp: usize,
    pub beta_emp: f64,
    pub max_hops: usize,
    pub pairs_checked: usize,
    pub scatter_violations: Vec<ScatterViolation>,
}

/// Everything produced by one iteration, including the partition (in the
/// local ids of `subgraph`).
#[derive(Debug, Clone)]
pub struct IterationOutput {
    pub state: AssignmentState,
    pub stats: IterationStats,
    pub subgraph: Subgraph,
    pub partition: ScatteringPartition,
}

/// Runs one iteration and returns the successor state.
pub fn spr_iteration(
    g: &WeightedGraph,
    terminals: &TerminalSet,
    state: &AssignmentState,
    config: &SprConfig,
) -> Result<AssignmentState, SprError> {
    let provider = ProviderRegistry::default().get(&config.provider)?;
    Ok(spr_step(g, terminals, state, config, provider.as_ref(), 0)?.state)
}

/// One iteration with full diagnostics.
pub fn spr_step(
    g: &WeightedGraph,
    terminals: &TerminalSet,
    state: &AssignmentState,
    config: &SprConfig,
    provider: &dyn ShortcutProvider,
    attempt: usize,
) -> Result<IterationOutput, SprError> {
    let zeta = config.zeta()?;
    let i = state.iteration + 1;
    let unassigned = state.unassigned();
    if unassigned.is_empty() {
        return Err(SprError::NothingToAssign);
    }
    let delta = scale(zeta, i as i32 - 1);
    let threshold = scale(zeta, i as i32);

    let sub = induced_subgraph(g, &unassigned)?;
    let partition = build_scattering_partition(&sub.graph, delta, provider, rng::subseed(config.seed, "scatter", i as u64))?;
    let report = verify_scattering(
        &sub.graph,
        &partition,
        config.pairs,
        rng::subseed(config.seed, "verify", i as u64),
    );

    let relevant: Vec<VertexId> = relevant_from(&state.dist_to_terminals, terminals, zeta, i)
        .into_iter()
        .filter(|&v| !state.is_assigned(v))
        .collect();
    let clustering = partition.clustering();
    let mut keep = vec![false; clustering.len()];
    for &v in &relevant {
        keep[clustering.cluster_of(sub.from_host[v].expect("relevant vertices are unassigned"))] = true;
    }
    let selected: Vec<Vec<VertexId>> = (0..clustering.len())
        .filter(|&c| keep[c])
        .map(|c| clustering.members(c).iter().map(|&l| sub.to_host[l]).collect())
        .collect();

    let previous: Vec<bool> = state.assignment.iter().map(Option::is_some).collect();
    let levels = level_and_link(g, &selected, &previous, threshold).map_err(|e| match e {
        SprError::LevelUnreachable { witness, .. } => SprError::LevelUnreachable { iteration: i, witness },
        other => other,
    })?;

    // Members are ascending, so the first member is the cluster minimum.
    let mut order: Vec<usize> = (0..selected.len()).collect();
    order.sort_by_key(|&c| (levels[c].level, selected[c][0]));

    let mut next = state.clone();
    next.iteration = i;
    next.relevant = relevant;
    next.clusters = Vec::with_capacity(order.len());
    let mut assigned = 0;
    for &c in &order {
        let lv = levels[c];
        let terminal = next.assignment[lv.linking].expect("linking vertex is assigned before its cluster");
        for &u in &selected[c] {
            next.assignment[u] = Some(terminal);
            next.assigned_at[u] = Some(i);
            next.trace.push(TraceRecord {
                vertex: u,
                iteration: i,
                terminal,
                level: lv.level,
            });
            assigned += 1;
        }
        next.clusters.push(ClusterRecord {
            members: selected[c].clone(),
            level: lv,
        });
    }

    check_step_invariants(g, state, &next, threshold)?;

    let stats = IterationStats {
        attempt,
        i,
        delta,
        threshold,
        unassigned_before: unassigned.len(),
        relevant: next.relevant.len(),
        clusters: clustering.len(),
        selected: selected.len(),
        assigned,
        max_level: levels.iter().map(|l| l.level).max().unwrap_or(0),
        tau_emp: report.tau_emp,
        beta_emp: report.beta_emp,
        max_hops: report.max_hops,
        pairs_checked: report.pairs_checked,
        scatter_violations: report
            .violations
            .iter()
            .map(|x| ScatterViolation {
                u: sub.to_host[x.u],
                v: sub.to_host[x.v],
                reason: x.reason,
            })
            .collect(),
    };
    if config.strict {
        if let Some(x) = stats.scatter_violations.first() {
            return Err(SprError::Invariant(InvariantViolation::Scattering {
                iteration: i,
                u: x.u,
                v: x.v,
            }));
        }
    }
    Ok(IterationOutput {
        state: next,
        stats,
        subgraph: sub,
        partition,
    })
}

/// Monotonicity, coverage of every `R_j` with `j ≤ i`, and connectivity of
/// every branch set.
fn check_step_invariants(
    g: &WeightedGraph,
    before: &AssignmentState,
    after: &AssignmentState,
    threshold: f64,
) -> Result<(), SprError> {
    let i = after.iteration;
    for v in 0..g.vertex_count() {
        if let Some(t) = before.assignment[v] {
            if after.assignment[v] != Some(t) {
                return Err(SprError::Invariant(InvariantViolation::Monotonicity { vertex: v, iteration: i }));
            }
        }
        if let Some(d) = after.dist_to_terminals[v] {
            if d < threshold && after.assignment[v].is_none() {
                return Err(SprError::Invariant(InvariantViolation::Coverage {
                    vertex: v,
                    iteration: i,
                    distance: d,
                }));
            }
        }
    }
    if let Some((terminal, vertex)) = disconnected_branch(g, &after.assignment) {
        return Err(SprError::Invariant(InvariantViolation::BranchSet {
            terminal,
            vertex,
            iteration: i,
        }));
    }
    Ok(())
}

/// First `(terminal, vertex)` with `vertex` assigned to `terminal` but not
/// reachable from it inside the branch set.
fn disconnected_branch(g: &WeightedGraph, assignment: &[Option<VertexId>]) -> Option<(VertexId, VertexId)> {
    let roots: Vec<VertexId> = (0..g.vertex_count()).filter(|&v| assignment[v] == Some(v)).collect();
    let mut reached = vec![false; g.vertex_count()];
    for &t in &roots {
        let (dist, _) = dijkstra_restricted(g, &[t], None, |x| assignment[x] == Some(t));
        for (v, d) in dist.iter().enumerate() {
            if d.is_some() {
                reached[v] = true;
            }
        }
    }
    (0..g.vertex_count())
        .find(|&v| assignment[v].is_some() && !reached[v])
        .map(|v| (assignment[v].expect("checked"), v))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowViolation {
    pub vertex: VertexId,
    pub iteration: usize,
    pub distance: f64,
}

impl std::fmt::Display for WindowViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "vertex {} assigned in iteration {} lies at distance {} outside its window",
            self.vertex, self.iteration, self.distance
        )
    }
}

/// A vertex assigned in iteration `i ≥ 1` must satisfy
/// `ζ^{i-1} ≤ dist(v, K) < ζ^{i+1}`. Terminals are exempt.
pub fn check_assignment_window(
    trace: &[TraceRecord],
    g: &WeightedGraph,
    terminals: &TerminalSet,
    zeta: f64,
) -> Result<Vec<WindowViolation>, SprError> {
    let dist = dist_to_set(g, terminals.as_slice())?;
    Ok(window_violations(trace, dist.distances(), zeta))
}

fn window_violations(trace: &[TraceRecord], dist: &[Option<f64>], zeta: f64) -> Vec<WindowViolation> {
    trace
        .iter()
        .filter(|r| r.iteration > 0)
        .filter_map(|r| {
            let d = dist[r.vertex].unwrap_or(f64::INFINITY);
            let i = r.iteration as i32;
            let inside = scale(zeta, i - 1) <= d && d < scale(zeta, i + 1);
            (!inside).then_some(WindowViolation {
                vertex: r.vertex,
                iteration: r.iteration,
                distance: d,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusViolation {
    pub vertex: VertexId,
    pub terminal: VertexId,
    pub distance: f64,
    pub bound: f64,
}

impl std::fmt::Display for RadiusViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "vertex {} is at distance {} from its terminal {}, above {}",
            self.vertex, self.distance, self.terminal, self.bound
        )
    }
}

/// Every vertex must satisfy `dist(v, f(v)) ≤ 3·τ·ζ²·dist(v, K)`.
pub fn check_assignment_radius(
    assignment: &[VertexId],
    g: &WeightedGraph,
    terminals: &TerminalSet,
    zeta: f64,
    tau: f64,
) -> Result<Vec<RadiusViolation>, SprError> {
    if assignment.len() != g.vertex_count() {
        return Err(GraphError::AssignmentLength {
            expected: g.vertex_count(),
            found: assignment.len(),
        }
        .into());
    }
    let to_k = dist_to_set(g, terminals.as_slice())?;
    let mut out = Vec::new();
    for &t in terminals.as_slice() {
        let members: Vec<VertexId> = (0..assignment.len()).filter(|&v| assignment[v] == t).collect();
        if members.is_empty() {
            continue;
        }
        let (from_t, _) = dijkstra_restricted(g, &[t], None, |_| true);
        for v in members {
            let distance = from_t[v].unwrap_or(f64::INFINITY);
            let bound = 3.0 * tau * zeta * zeta * to_k.get(v).unwrap_or(f64::INFINITY);
            if !(distance <= bound) {
                out.push(RadiusViolation {
                    vertex: v,
                    terminal: t,
                    distance,
                    bound,
                });
            }
        }
    }
    // Vertices mapped to a non-terminal can never meet the bound.
    for (v, &t) in assignment.iter().enumerate() {
        if !terminals.contains(t) {
            out.push(RadiusViolation {
                vertex: v,
                terminal: t,
                distance: f64::INFINITY,
                bound: 0.0,
            });
        }
    }
    Ok(out)
}

/// `⌈log_ζ D⌉ + 1` for the largest terminal distance `D` (0 when `D = 0`).
pub fn iteration_bound(max_dist: f64, zeta: f64) -> usize {
    if max_dist <= 0.0 {
        return 0;
    }
    let mut k = 0;
    while scale(zeta, k) < max_dist {
        k += 1;
    }
    k as usize + 1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Escalation {
    pub from_zeta: f64,
    pub to_zeta: f64,
    pub tau_emp: usize,
    pub beta_emp: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ClaimReport {
    pub window: Vec<WindowViolation>,
    pub radius: Vec<RadiusViolation>,
    pub iterations: usize,
    pub iteration_bound: usize,
}

impl ClaimReport {
    pub fn passed(&self) -> bool {
        self.window.is_empty() && self.radius.is_empty() && self.iterations <= self.iteration_bound
    }
}

/// The finished minor with the provenance needed to audit it.
#[derive(Debug, Clone)]
pub struct SprMinor {
    pub minor: Minor,
    /// `f(v)` for every vertex.
    pub assignment: Vec<VertexId>,
    pub zeta: f64,
    /// Factor the input weights were multiplied by before assignment.
    pub scale_factor: f64,
    /// Configuration actually used (after any escalation).
    pub config: SprConfig,
    pub iterations: Vec<IterationStats>,
    pub trace: Vec<TraceRecord>,
    pub escalations: Vec<Escalation>,
    pub claims: ClaimReport,
    pub warnings: Vec<String>,
}

impl SprMinor {
    /// Largest number of clusters touched by a scattered path, over all
    /// iterations (at least 1).
    pub fn tau_emp(&self) -> usize {
        self.iterations.iter().map(|s| s.tau_emp).max().unwrap_or(0).max(1)
    }

    /// Largest scattered-path length over Δ, over all iterations (at least 1).
    pub fn beta_emp(&self) -> f64 {
        self.iterations.iter().map(|s| s.beta_emp).fold(1.0, f64::max)
    }

    pub fn scatter_violations(&self) -> impl Iterator<Item = &ScatterViolation> {
        self.iterations.iter().flat_map(|s| s.scatter_violations.iter())
    }
}

pub fn run_spr(g: &WeightedGraph, terminals: &TerminalSet, config: &SprConfig) -> Result<SprMinor, SprError> {
    run_spr_observed(g, terminals, config, &ProviderRegistry::default(), &mut |_| {})
}

/// Full pipeline; `observer` sees every iteration (of every attempt) with
/// its partition, in the normalized graph's units.
pub fn run_spr_observed(
    g: &WeightedGraph,
    terminals: &TerminalSet,
    config: &SprConfig,
    registry: &ProviderRegistry,
    observer: &mut dyn FnMut(&IterationOutput),
) -> Result<SprMinor, SprError> {
    for &t in terminals.as_slice() {
        g.check_vertex(t)?;
    }
    terminals.check_covers_components(g)?;
    let provider: Arc<dyn ShortcutProvider> = registry.get(&config.provider)?;
    let (normalized, scale_factor) = if g.vertex_count() >= 2 {
        normalize_scale(g)?
    } else {
        (g.clone(), 1.0)
    };

    let mut cfg = config.clone();
    let mut escalations = Vec::new();
    let mut warnings = Vec::new();
    let (state, stats, zeta) = loop {
        let zeta = cfg.zeta()?;
        let mut state = AssignmentState::initial(&normalized, terminals)?;
        let mut stats = Vec::new();
        while !state.is_complete() {
            if state.iteration >= cfg.max_iterations {
                return Err(SprError::Nontermination(cfg.max_iterations));
            }
            let out = spr_step(&normalized, terminals, &state, &cfg, provider.as_ref(), escalations.len())?;
            observer(&out);
            stats.push(out.stats);
            state = out.state;
        }
        let tau_emp = stats.iter().map(|s: &IterationStats| s.tau_emp).max().unwrap_or(0);
        let beta_emp = stats.iter().map(|s| s.beta_emp).fold(0.0, f64::max);
        if (tau_emp as f64) <= cfg.tau && beta_emp <= cfg.beta {
            break (state, stats, zeta);
        }
        let msg = format!(
            "measured tau={tau_emp} beta={beta_emp:.3} exceed targets tau={} beta={}",
            cfg.tau, cfg.beta
        );
        if escalations.len() >= cfg.max_escalations {
            warn!("{msg}");
            warnings.push(msg);
            break (state, stats, zeta);
        }
        let mut raised = cfg.clone();
        raised.tau = cfg.tau.max(tau_emp as f64);
        raised.beta = cfg.beta.max(beta_emp);
        let to_zeta = raised.zeta()?;
        warn!("{msg}; raising zeta from {zeta} to {to_zeta} and restarting");
        warnings.push(format!("{msg}; zeta raised to {to_zeta}"));
        escalations.push(Escalation {
            from_zeta: zeta,
            to_zeta,
            tau_emp,
            beta_emp,
        });
        cfg = raised;
    };

    let assignment: Vec<VertexId> = state
        .assignment
        .iter()
        .map(|a| a.expect("complete assignment"))
        .collect();
    let minor = contract_assignment(g, terminals, &state.assignment)?;

    let tau_run = stats.iter().map(|s| s.tau_emp).max().unwrap_or(0).max(1) as f64;
    let max_dist = state
        .dist_to_terminals
        .iter()
        .flatten()
        .copied()
        .fold(0.0, f64::max);
    let claims = ClaimReport {
        window: window_violations(&state.trace, &state.dist_to_terminals, zeta),
        radius: check_assignment_radius(&assignment, &normalized, terminals, zeta, tau_run)?,
        iterations: state.iteration,
        iteration_bound: iteration_bound(max_dist, zeta),
    };
    if cfg.strict {
        if let Some(w) = claims.window.first() {
            return Err(SprError::Invariant(InvariantViolation::Window(w.clone())));
        }
        if let Some(r) = claims.radius.first() {
            return Err(SprError::Invariant(InvariantViolation::Radius(r.clone())));
        }
        if claims.iterations > claims.iteration_bound {
            return Err(SprError::Invariant(InvariantViolation::Termination {
                iterations: claims.iterations,
                bound: claims.iteration_bound,
            }));
        }
    }
    Ok(SprMinor {
        minor,
        assignment,
        zeta,
        scale_factor,
        config: cfg,
        iterations: stats,
        trace: state.trace,
        escalations,
        claims,
        warnings,
    })
}
