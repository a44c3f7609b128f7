//! Instance generators, minor validation, distortion measurement and a
//! brute-force distance oracle for small graphs.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};
use spade::{DelaunayTriangulation, Point2, Triangulation};
use thiserror::Error;

use crate::graph::{dijkstra_restricted, GraphError, Minor, TerminalSet, VertexId, WeightedGraph};
use crate::rng;
use crate::spr::SprMinor;

/// Largest graph [`brute_force_distances`] accepts.
pub const BRUTE_FORCE_CAP: usize = 10;

/// Ratios below `1 - NON_CONTRACTION_TOLERANCE` count as contraction.
pub const NON_CONTRACTION_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HarnessError {
    #[error("invalid instance spec: {0}")]
    Spec(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("graph has {n} vertices, brute force is capped at {cap}")]
    TooLarge { n: usize, cap: usize },
    #[error("terminals {t1} and {t2} are connected in the graph but not in the minor")]
    Disconnected { t1: VertexId, t2: VertexId },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Family {
    Grid { width: usize, height: usize },
    Tree { n: usize },
    RandomPlanar { n: usize },
    Outerplanar { n: usize },
    Path { n: usize },
    Star { leaves: usize },
}

impl Family {
    pub fn vertex_count(&self) -> usize {
        match *self {
            Family::Grid { width, height } => width * height,
            Family::Tree { n } | Family::RandomPlanar { n } | Family::Outerplanar { n } | Family::Path { n } => n,
            Family::Star { leaves } => leaves + 1,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Grid { width, height } => write!(f, "grid:{width}x{height}"),
            Family::Tree { n } => write!(f, "tree:{n}"),
            Family::RandomPlanar { n } => write!(f, "random-planar:{n}"),
            Family::Outerplanar { n } => write!(f, "outerplanar:{n}"),
            Family::Path { n } => write!(f, "path:{n}"),
            Family::Star { leaves } => write!(f, "star:{leaves}"),
        }
    }
}

fn parse_count(s: &str, what: &str) -> Result<usize, HarnessError> {
    s.trim()
        .parse::<usize>()
        .map_err(|_| HarnessError::Spec(format!("expected a non-negative integer for {what}, got {s:?}")))
}

impl FromStr for Family {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (name, args) = s
            .split_once(':')
            .ok_or_else(|| HarnessError::Spec(format!("expected FAMILY:SIZE, got {s:?}")))?;
        match name {
            "grid" => {
                let (w, h) = args.split_once('x').unwrap_or((args, args));
                Ok(Family::Grid {
                    width: parse_count(w, "grid width")?,
                    height: parse_count(h, "grid height")?,
                })
            }
            "tree" => Ok(Family::Tree { n: parse_count(args, "n")? }),
            "random-planar" => Ok(Family::RandomPlanar { n: parse_count(args, "n")? }),
            "outerplanar" => Ok(Family::Outerplanar { n: parse_count(args, "n")? }),
            "path" => Ok(Family::Path { n: parse_count(args, "n")? }),
            "star" => Ok(Family::Star {
                leaves: parse_count(args, "leaves")?,
            }),
            _ => Err(HarnessError::Spec(format!("unknown family {name:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Weights {
    Unit,
    Uniform { lo: f64, hi: f64 },
    /// Exponentially distributed with mean 1, floored at `EXP_FLOOR`.
    Exp,
    /// Point distances; only for random-planar instances.
    Euclidean,
}

const EXP_FLOOR: f64 = 1e-3;

impl fmt::Display for Weights {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Weights::Unit => write!(f, "unit"),
            Weights::Uniform { lo, hi } => write!(f, "uniform:{lo},{hi}"),
            Weights::Exp => write!(f, "exp"),
            Weights::Euclidean => write!(f, "euclidean"),
        }
    }
}

impl FromStr for Weights {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "unit" => Ok(Weights::Unit),
            "exp" => Ok(Weights::Exp),
            "euclidean" => Ok(Weights::Euclidean),
            _ => {
                let bad = || HarnessError::Spec(format!("expected unit, exp, euclidean or uniform:LO,HI, got {s:?}"));
                let (lo, hi) = s.strip_prefix("uniform:").and_then(|r| r.split_once(',')).ok_or_else(bad)?;
                let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
                let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
                if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
                    return Err(HarnessError::Spec(format!("uniform weights need 0 < lo <= hi, got {lo},{hi}")));
                }
                Ok(Weights::Uniform { lo, hi })
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Terminals {
    /// Grid corners or path ends.
    Corners,
    /// `k` vertices drawn without replacement.
    Random { k: usize },
    /// Degree-one vertices.
    Leaves,
    All,
    List { ids: Vec<VertexId> },
}

impl fmt::Display for Terminals {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Terminals::Corners => write!(f, "corners"),
            Terminals::Random { k } => write!(f, "random:{k}"),
            Terminals::Leaves => write!(f, "leaves"),
            Terminals::All => write!(f, "all"),
            Terminals::List { ids } => {
                let ids: Vec<String> = ids.iter().map(|i| i.to_string()).collect();
                write!(f, "list:{}", ids.join(","))
            }
        }
    }
}

impl FromStr for Terminals {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "corners" => Ok(Terminals::Corners),
            "leaves" => Ok(Terminals::Leaves),
            "all" => Ok(Terminals::All),
            _ => {
                if let Some(k) = s.strip_prefix("random:") {
                    return Ok(Terminals::Random { k: parse_count(k, "k")? });
                }
                if let Some(ids) = s.strip_prefix("list:") {
                    let ids = ids
                        .split(',')
                        .map(|i| parse_count(i, "terminal id"))
                        .collect::<Result<Vec<_>, _>>()?;
                    return Ok(Terminals::List { ids });
                }
                Err(HarnessError::Spec(format!(
                    "expected corners, leaves, all, random:K or list:IDS, got {s:?}"
                )))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub family: Family,
    /// Defaults to Euclidean for random-planar and unit otherwise.
    pub weights: Option<Weights>,
    pub terminals: Terminals,
    pub seed: u64,
}

impl InstanceSpec {
    pub fn new(family: Family, terminals: Terminals, seed: u64) -> Self {
        InstanceSpec {
            family,
            weights: None,
            terminals,
            seed,
        }
    }

    pub fn with_weights(mut self, weights: Weights) -> Self {
        self.weights = Some(weights);
        self
    }

    pub fn effective_weights(&self) -> Weights {
        self.weights.unwrap_or(match self.family {
            Family::RandomPlanar { .. } => Weights::Euclidean,
            _ => Weights::Unit,
        })
    }
}

impl fmt::Display for InstanceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} weights={} terminals={} seed={}",
            self.family,
            self.effective_weights(),
            self.terminals,
            self.seed
        )
    }
}

/// Builds the instance described by `spec`; identical specs give identical
/// instances.
pub fn generate(spec: &InstanceSpec) -> Result<(WeightedGraph, TerminalSet), HarnessError> {
    let n = spec.family.vertex_count();
    if n == 0 {
        return Err(HarnessError::Spec("instance has no vertices".into()));
    }
    let weights = spec.effective_weights();
    let mut topo = rng::substream(spec.seed, "gen-graph", 0);
    let (pairs, lengths): (Vec<(VertexId, VertexId)>, Option<Vec<f64>>) = match spec.family {
        Family::Grid { width, height } => (grid_edges(width, height), None),
        Family::Tree { n } => ((1..n).map(|v| (topo.random_range(0..v), v)).collect(), None),
        Family::RandomPlanar { n } => {
            let (pairs, lengths) = delaunay_edges(n, &mut topo);
            (pairs, Some(lengths))
        }
        Family::Outerplanar { n } => (outerplanar_edges(n, &mut topo), None),
        Family::Path { n } => ((1..n).map(|v| (v - 1, v)).collect(), None),
        Family::Star { leaves } => ((1..=leaves).map(|v| (0, v)).collect(), None),
    };

    let mut wr = rng::substream(spec.seed, "gen-weights", 0);
    let w: Vec<f64> = match weights {
        Weights::Unit => vec![1.0; pairs.len()],
        Weights::Uniform { lo, hi } => pairs
            .iter()
            .map(|_| if hi > lo { wr.random_range(lo..=hi) } else { lo })
            .collect(),
        Weights::Exp => {
            let exp: Exp<f64> = Exp::new(1.0).expect("rate 1 is valid");
            pairs.iter().map(|_| exp.sample(&mut wr).max(EXP_FLOOR)).collect()
        }
        Weights::Euclidean => lengths.ok_or_else(|| {
            HarnessError::Spec(format!("euclidean weights need point coordinates; {} has none", spec.family))
        })?,
    };
    let g = WeightedGraph::from_edges(n, pairs.iter().zip(w).map(|(&(u, v), w)| (u, v, w)))?;
    let terminals = pick_terminals(&g, spec)?;
    Ok((g, terminals))
}

fn grid_edges(width: usize, height: usize) -> Vec<(VertexId, VertexId)> {
    let mut out = Vec::new();
    for r in 0..height {
        for c in 0..width {
            let v = r * width + c;
            if c + 1 < width {
                out.push((v, v + 1));
            }
            if r + 1 < height {
                out.push((v, v + width));
            }
        }
    }
    out
}

/// Delaunay triangulation of `n` uniform points in a square of side `√n`,
/// so typical edges have length about 1.
fn delaunay_edges(n: usize, r: &mut impl Rng) -> (Vec<(VertexId, VertexId)>, Vec<f64>) {
    let side = (n as f64).sqrt().max(1.0);
    let mut tri: DelaunayTriangulation<Point2<f64>> = DelaunayTriangulation::new();
    while tri.num_vertices() < n {
        let p = Point2::new(r.random_range(0.0..side), r.random_range(0.0..side));
        // A repeated point maps onto an existing vertex; draw again.
        tri.insert(p).expect("finite coordinates");
    }
    let mut pairs = Vec::with_capacity(tri.num_undirected_edges());
    let mut lengths = Vec::with_capacity(tri.num_undirected_edges());
    let mut edges: Vec<_> = tri
        .undirected_edges()
        .map(|e| {
            let [a, b] = e.vertices();
            let (u, v) = (a.fix().index(), b.fix().index());
            (u.min(v), u.max(v), e.length_2().sqrt())
        })
        .collect();
    edges.sort_by_key(|e| (e.0, e.1));
    for (u, v, len) in edges {
        pairs.push((u, v));
        lengths.push(len);
    }
    (pairs, lengths)
}

/// The cycle `0..n` plus a random subset of the chords of a random
/// triangulation of the polygon; each chord is kept with probability 1/2.
fn outerplanar_edges(n: usize, r: &mut impl Rng) -> Vec<(VertexId, VertexId)> {
    let mut out: Vec<(VertexId, VertexId)> = (1..n).map(|v| (v - 1, v)).collect();
    if n >= 3 {
        out.push((0, n - 1));
    }
    let mut stack = vec![(0, n.saturating_sub(1))];
    while let Some((a, b)) = stack.pop() {
        if b < a + 2 {
            continue;
        }
        let c = r.random_range(a + 1..b);
        for (x, y) in [(a, c), (c, b)] {
            if y >= x + 2 {
                if r.random_bool(0.5) {
                    out.push((x, y));
                }
                stack.push((x, y));
            }
        }
    }
    out
}

fn pick_terminals(g: &WeightedGraph, spec: &InstanceSpec) -> Result<TerminalSet, HarnessError> {
    let n = g.vertex_count();
    let ids: Vec<VertexId> = match &spec.terminals {
        Terminals::Corners => match spec.family {
            Family::Grid { width, height } => vec![0, width - 1, (height - 1) * width, n - 1],
            Family::Path { n } => vec![0, n - 1],
            other => return Err(HarnessError::Spec(format!("corner terminals are undefined for {other}"))),
        },
        Terminals::Random { k } => {
            if *k > n {
                return Err(HarnessError::Spec(format!("{k} terminals requested but only {n} vertices")));
            }
            let mut perm: Vec<VertexId> = (0..n).collect();
            perm.shuffle(&mut rng::substream(spec.seed, "gen-terminals", 0));
            perm.truncate(*k);
            perm
        }
        Terminals::Leaves => (0..n).filter(|&v| g.degree(v) == 1).collect(),
        Terminals::All => (0..n).collect(),
        Terminals::List { ids } => ids.clone(),
    };
    if ids.is_empty() {
        return Err(HarnessError::Spec(format!("terminal selection {} is empty", spec.terminals)));
    }
    Ok(TerminalSet::new(g, ids)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MinorViolation {
    /// `V(M)` differs from the terminal set.
    TerminalSet { expected: Vec<VertexId>, found: Vec<VertexId> },
    BranchSetCount { expected: usize, found: usize },
    /// A host vertex in zero or several branch sets.
    NotPartition { vertex: VertexId, count: usize },
    InvalidVertex { vertex: VertexId },
    MissingTerminal { terminal: VertexId },
    Disconnected { terminal: VertexId, vertex: VertexId },
    /// A minor edge with no host edge between the two branch sets.
    NoCrossingEdge { t1: VertexId, t2: VertexId },
    /// A minor edge whose weight is not the host distance.
    WeightMismatch { t1: VertexId, t2: VertexId, weight: f64, distance: f64 },
}

impl MinorViolation {
    /// Human-readable description with vertices rendered by `name`.
    pub fn describe(&self, name: &dyn Fn(VertexId) -> String) -> String {
        let list = |ids: &[VertexId]| ids.iter().map(|&v| name(v)).collect::<Vec<_>>().join(", ");
        match self {
            MinorViolation::TerminalSet { expected, found } => {
                format!("minor vertices [{}] differ from terminals [{}]", list(found), list(expected))
            }
            MinorViolation::BranchSetCount { expected, found } => {
                format!("{found} branch sets for {expected} terminals")
            }
            MinorViolation::NotPartition { vertex, count } => {
                format!("vertex {} lies in {count} branch sets", name(*vertex))
            }
            MinorViolation::InvalidVertex { vertex } => format!("branch set names unknown vertex {vertex}"),
            MinorViolation::MissingTerminal { terminal } => {
                format!("branch set of {} does not contain it", name(*terminal))
            }
            MinorViolation::Disconnected { terminal, vertex } => format!(
                "vertex {} is not connected to {} inside its branch set",
                name(*vertex),
                name(*terminal)
            ),
            MinorViolation::NoCrossingEdge { t1, t2 } => format!(
                "minor edge ({}, {}) has no host edge between the branch sets",
                name(*t1),
                name(*t2)
            ),
            MinorViolation::WeightMismatch { t1, t2, weight, distance } => format!(
                "minor edge ({}, {}) has weight {weight}, host distance is {distance}",
                name(*t1),
                name(*t2)
            ),
        }
    }
}

impl fmt::Display for MinorViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe(&|v| v.to_string()))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MinorReport {
    pub violations: Vec<MinorViolation>,
}

impl MinorReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks that `minor` is a minor of `g` on exactly the terminals, with
/// minor edges weighted by host distances.
pub fn validate_minor(g: &WeightedGraph, terminals: &TerminalSet, minor: &Minor) -> MinorReport {
    let mut out = Vec::new();
    let n = g.vertex_count();
    if minor.terminals != terminals.as_slice() || minor.graph.vertex_count() != minor.terminals.len() {
        out.push(MinorViolation::TerminalSet {
            expected: terminals.as_slice().to_vec(),
            found: minor.terminals.clone(),
        });
    }
    if minor.branch_sets.len() != minor.terminals.len() {
        out.push(MinorViolation::BranchSetCount {
            expected: minor.terminals.len(),
            found: minor.branch_sets.len(),
        });
        return MinorReport { violations: out };
    }

    let mut owner: Vec<Option<usize>> = vec![None; n];
    let mut count = vec![0usize; n];
    for (idx, set) in minor.branch_sets.iter().enumerate() {
        for &v in set {
            if v >= n {
                out.push(MinorViolation::InvalidVertex { vertex: v });
                continue;
            }
            count[v] += 1;
            owner[v] = Some(idx);
        }
    }
    for (v, &c) in count.iter().enumerate() {
        if c != 1 {
            out.push(MinorViolation::NotPartition { vertex: v, count: c });
        }
    }

    for (idx, set) in minor.branch_sets.iter().enumerate() {
        let t = minor.terminals[idx];
        if t >= n || !set.contains(&t) {
            out.push(MinorViolation::MissingTerminal { terminal: t });
            continue;
        }
        let (dist, _) = dijkstra_restricted(g, &[t], None, |x| owner[x] == Some(idx) && count[x] == 1);
        if let Some(&v) = set.iter().find(|&&v| v < n && dist[v].is_none()) {
            out.push(MinorViolation::Disconnected { terminal: t, vertex: v });
        }
    }

    let mut crossing = std::collections::HashSet::new();
    for e in g.edges() {
        if let (Some(a), Some(b)) = (owner[e.u], owner[e.v]) {
            if a != b {
                crossing.insert((a.min(b), a.max(b)));
            }
        }
    }
    let mut from: Vec<Option<Vec<Option<f64>>>> = vec![None; minor.terminals.len()];
    for e in minor.graph.edges() {
        let (t1, t2) = (minor.terminals[e.u], minor.terminals[e.v]);
        if !crossing.contains(&(e.u, e.v)) {
            out.push(MinorViolation::NoCrossingEdge { t1, t2 });
        }
        if t1 >= n || t2 >= n {
            continue;
        }
        let dist = from[e.u].get_or_insert_with(|| dijkstra_restricted(g, &[t1], None, |_| true).0);
        let distance = dist[t2].unwrap_or(f64::INFINITY);
        if (e.weight - distance).abs() > NON_CONTRACTION_TOLERANCE * distance.max(1.0) {
            out.push(MinorViolation::WeightMismatch {
                t1,
                t2,
                weight: e.weight,
                distance,
            });
        }
    }
    MinorReport { violations: out }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRatio {
    pub t1: VertexId,
    pub t2: VertexId,
    pub dg: f64,
    pub dm: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationSummary {
    pub i: usize,
    pub delta: f64,
    pub tau_emp: usize,
    pub beta_emp: f64,
    pub clusters: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceInfo {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub zeta: Option<f64>,
    pub tau_emp: Option<usize>,
    pub beta_emp: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistortionReport {
    pub instance: InstanceInfo,
    /// Largest `dist_M / dist_G` over terminal pairs; 1 without pairs.
    pub alpha: f64,
    pub mean: f64,
    pub pairs: Vec<PairRatio>,
    pub iterations: Vec<IterationSummary>,
    pub audit_bound: Option<f64>,
    pub flags: Vec<String>,
}

impl DistortionReport {
    pub fn min_ratio(&self) -> f64 {
        self.pairs.iter().map(|p| p.ratio).fold(f64::INFINITY, f64::min)
    }
}

/// Distortion of a bare minor; no run provenance.
pub fn measure_minor_distortion(
    g: &WeightedGraph,
    terminals: &TerminalSet,
    minor: &Minor,
) -> Result<DistortionReport, HarnessError> {
    let ts = terminals.as_slice();
    let mut pairs = Vec::new();
    for (a, &t1) in ts.iter().enumerate() {
        let (dg, _) = dijkstra_restricted(g, &[t1], None, |_| true);
        let (dm, _) = dijkstra_restricted(&minor.graph, &[a], None, |_| true);
        for (b, &t2) in ts.iter().enumerate().skip(a + 1) {
            let Some(dg) = dg[t2] else { continue };
            let dm = dm[b].ok_or(HarnessError::Disconnected { t1, t2 })?;
            pairs.push(PairRatio {
                t1,
                t2,
                dg,
                dm,
                ratio: dm / dg,
            });
        }
    }
    let alpha = pairs.iter().map(|p| p.ratio).fold(1.0, f64::max);
    let mean = if pairs.is_empty() {
        1.0
    } else {
        pairs.iter().map(|p| p.ratio).sum::<f64>() / pairs.len() as f64
    };
    let mut flags = Vec::new();
    if pairs.iter().any(|p| p.ratio < 1.0 - NON_CONTRACTION_TOLERANCE) {
        flags.push("contraction".to_string());
    }
    Ok(DistortionReport {
        instance: InstanceInfo {
            n: g.vertex_count(),
            m: g.edge_count(),
            k: ts.len(),
            zeta: None,
            tau_emp: None,
            beta_emp: None,
        },
        alpha,
        mean,
        pairs,
        iterations: Vec::new(),
        audit_bound: None,
        flags,
    })
}

/// Distortion of a finished run, with its iterations and audit bound.
///
/// When `α` exceeds the audit bound the report is flagged, not failed; the
/// flag says whether the partitions missed their configured targets.
pub fn measure_distortion(
    g: &WeightedGraph,
    terminals: &TerminalSet,
    run: &SprMinor,
) -> Result<DistortionReport, HarnessError> {
    let mut report = measure_minor_distortion(g, terminals, &run.minor)?;
    let (tau, beta) = (run.tau_emp(), run.beta_emp());
    let bound = audit_bound(run.zeta, tau as f64, beta);
    report.instance.zeta = Some(run.zeta);
    report.instance.tau_emp = Some(tau);
    report.instance.beta_emp = Some(beta);
    report.iterations = run
        .iterations
        .iter()
        .map(|s| IterationSummary {
            i: s.i,
            delta: s.delta,
            tau_emp: s.tau_emp,
            beta_emp: s.beta_emp,
            clusters: s.clusters,
        })
        .collect();
    report.audit_bound = Some(bound);
    if report.alpha > bound {
        let cause = if tau as f64 > run.config.tau || beta > run.config.beta {
            "provider-below-target"
        } else {
            "unexplained"
        };
        report.flags.push(format!("alpha-exceeds-audit-bound:{cause}"));
    }
    if !run.warnings.is_empty() {
        report.flags.push("targets-exceeded".to_string());
    }
    if run.scatter_violations().next().is_some() {
        report.flags.push("scattering-violations".to_string());
    }
    if !run.claims.passed() {
        report.flags.push("claim-violations".to_string());
    }
    Ok(report)
}

/// Explicit distortion bound of the construction for scale base `zeta` and
/// measured partition quality `tau`, `beta` (both clamped to at least 1):
///
/// ```text
/// g = τ(τ+2)
/// α ≤ 2·(24ζ⁴τ(τ+3)βg + 4ζ²(τ+2)β) + 1 + 48τζ⁴(τ+3)β
/// ```
///
/// The first term bounds the minor distance across one interval of a
/// shortest path (scaled by the total interval length, at most twice the
/// path), the rest bounds the hops between consecutive intervals.
pub fn audit_bound(zeta: f64, tau: f64, beta: f64) -> f64 {
    let tau = tau.max(1.0);
    let beta = beta.max(1.0);
    let z2 = zeta * zeta;
    let z4 = z2 * z2;
    let g = tau * (tau + 2.0);
    let interval = 24.0 * z4 * tau * (tau + 3.0) * beta * g + 4.0 * z2 * (tau + 2.0) * beta;
    2.0 * interval + 1.0 + 48.0 * tau * z4 * (tau + 3.0) * beta
}

/// All-pairs distances by enumerating every simple path.
pub fn brute_force_distances(g: &WeightedGraph) -> Result<Vec<Vec<Option<f64>>>, HarnessError> {
    let n = g.vertex_count();
    if n > BRUTE_FORCE_CAP {
        return Err(HarnessError::TooLarge { n, cap: BRUTE_FORCE_CAP });
    }
    let mut out = vec![vec![None; n]; n];
    for s in 0..n {
        let mut on_path = vec![false; n];
        on_path[s] = true;
        explore(g, s, 0.0, &mut on_path, &mut out[s]);
    }
    Ok(out)
}

fn explore(g: &WeightedGraph, v: VertexId, len: f64, on_path: &mut [bool], best: &mut [Option<f64>]) {
    if best[v].is_none_or(|b| len < b) {
        best[v] = Some(len);
    }
    for &(x, w) in g.neighbors(v) {
        if !on_path[x] {
            on_path[x] = true;
            explore(g, x, len + w, on_path, best);
            on_path[x] = false;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::sssp;
    use crate::spr::{run_spr, SprConfig};

    fn strict() -> SprConfig {
        SprConfig {
            strict: true,
            ..SprConfig::default()
        }
    }

    #[test]
    fn grid_2x2_corners() {
        let spec = InstanceSpec::new(Family::Grid { width: 2, height: 2 }, Terminals::Corners, 0);
        let (g, k) = generate(&spec).unwrap();
        assert_eq!(g.edge_count(), 4);
        assert!(g.edges().iter().all(|e| e.weight == 1.0));
        assert_eq!(k.as_slice(), &[0, 1, 2, 3]);
    }

    #[test]
    fn path3_ends() {
        let spec = InstanceSpec::new(Family::Path { n: 3 }, Terminals::Corners, 0);
        let (g, k) = generate(&spec).unwrap();
        assert_eq!(g.edge_count(), 2);
        assert_eq!(k.as_slice(), &[0, 2]);
    }

    #[test]
    fn generator_errors() {
        let spec = InstanceSpec::new(Family::Path { n: 3 }, Terminals::Random { k: 4 }, 0);
        assert!(matches!(generate(&spec), Err(HarnessError::Spec(_))));
        let spec = InstanceSpec::new(Family::Tree { n: 5 }, Terminals::All, 0).with_weights(Weights::Euclidean);
        assert!(matches!(generate(&spec), Err(HarnessError::Spec(_))));
        let spec = InstanceSpec::new(Family::Grid { width: 3, height: 3 }, Terminals::Leaves, 0);
        assert!(matches!(generate(&spec), Err(HarnessError::Spec(_))));
    }

    #[test]
    fn generators_are_deterministic_and_connected() {
        let families = [
            Family::Grid { width: 5, height: 4 },
            Family::Tree { n: 40 },
            Family::RandomPlanar { n: 50 },
            Family::Outerplanar { n: 30 },
            Family::Star { leaves: 6 },
        ];
        for family in families {
            for weights in [Weights::Unit, Weights::Exp, Weights::Uniform { lo: 1.0, hi: 3.0 }] {
                let spec = InstanceSpec::new(family, Terminals::Random { k: 3 }, 9).with_weights(weights);
                let (g, k) = generate(&spec).unwrap();
                assert_eq!((g.clone(), k.clone()), generate(&spec).unwrap());
                assert!(g.components().iter().all(|&c| c == 0), "{spec}");
                assert_eq!(k.len(), 3);
            }
        }
    }

    #[test]
    fn random_planar_is_sparse() {
        let spec = InstanceSpec::new(Family::RandomPlanar { n: 50 }, Terminals::Random { k: 5 }, 7);
        let (g, _) = generate(&spec).unwrap();
        assert_eq!(g.vertex_count(), 50);
        assert!(g.edge_count() <= 3 * 50 - 6);
    }

    #[test]
    fn spec_strings_roundtrip() {
        for s in ["grid:3x4", "tree:10", "random-planar:50", "outerplanar:8", "path:3", "star:4"] {
            assert_eq!(s.parse::<Family>().unwrap().to_string(), s);
        }
        assert_eq!("grid:5".parse::<Family>().unwrap(), Family::Grid { width: 5, height: 5 });
        for s in ["unit", "exp", "euclidean", "uniform:1,2"] {
            assert_eq!(s.parse::<Weights>().unwrap().to_string(), s);
        }
        for s in ["corners", "leaves", "all", "random:8", "list:1,2"] {
            assert_eq!(s.parse::<Terminals>().unwrap().to_string(), s);
        }
        assert!("uniform:2,1".parse::<Weights>().is_err());
        assert!("hexgrid:3".parse::<Family>().is_err());
    }

    #[test]
    fn validate_path3_and_identity() {
        let g = WeightedGraph::from_edges(3, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let k = TerminalSet::new(&g, [0, 2]).unwrap();
        let run = run_spr(&g, &k, &strict()).unwrap();
        assert!(validate_minor(&g, &k, &run.minor).passed());

        let all = TerminalSet::all(&g).unwrap();
        let run = run_spr(&g, &all, &strict()).unwrap();
        assert!(validate_minor(&g, &all, &run.minor).passed());
        assert_eq!(run.minor.branch_sets, vec![vec![0], vec![1], vec![2]]);
    }

    #[test]
    fn validate_catches_tampering() {
        let g = WeightedGraph::from_edges(3, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let k = TerminalSet::new(&g, [0, 2]).unwrap();
        let mut m = run_spr(&g, &k, &strict()).unwrap().minor;
        // Move the middle vertex away, leaving 0 and 2 joined by nothing.
        m.branch_sets = vec![vec![0, 2], vec![1]];
        let r = validate_minor(&g, &k, &m);
        assert!(r.violations.contains(&MinorViolation::Disconnected { terminal: 0, vertex: 2 }));
        assert!(r.violations.contains(&MinorViolation::MissingTerminal { terminal: 2 }));

        let mut m = run_spr(&g, &k, &strict()).unwrap().minor;
        m.graph = WeightedGraph::from_edges(2, [(0, 1, 1.5)]).unwrap();
        assert_eq!(
            validate_minor(&g, &k, &m).violations,
            vec![MinorViolation::WeightMismatch { t1: 0, t2: 2, weight: 1.5, distance: 2.0 }]
        );

        let mut m = run_spr(&g, &k, &strict()).unwrap().minor;
        m.branch_sets = vec![vec![0, 1], vec![1, 2]];
        assert!(validate_minor(&g, &k, &m)
            .violations
            .contains(&MinorViolation::NotPartition { vertex: 1, count: 2 }));
    }

    #[test]
    fn distortion_examples() {
        let g = WeightedGraph::from_edges(3, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let k = TerminalSet::new(&g, [0, 2]).unwrap();
        let run = run_spr(&g, &k, &strict()).unwrap();
        let r = measure_distortion(&g, &k, &run).unwrap();
        assert_eq!(r.alpha, 1.0);
        assert!(r.audit_bound.unwrap() >= 1.0);
        assert!(r.flags.is_empty());

        let star = WeightedGraph::from_edges(4, [(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0)]).unwrap();
        let leaves = TerminalSet::new(&star, [1, 2, 3]).unwrap();
        let run = run_spr(&star, &leaves, &strict()).unwrap();
        let r = measure_distortion(&star, &leaves, &run).unwrap();
        let bf = brute_force_distances(&star).unwrap();
        let bm = brute_force_distances(&run.minor.graph).unwrap();
        assert_eq!(r.pairs.len(), 3);
        let mut alpha: f64 = 1.0;
        for p in &r.pairs {
            assert_eq!(Some(p.dg), bf[p.t1][p.t2]);
            let (a, b) = (leaves.index_of(p.t1).unwrap(), leaves.index_of(p.t2).unwrap());
            assert_eq!(Some(p.dm), bm[a][b]);
            alpha = alpha.max(p.dm / p.dg);
        }
        // The centre joins leaf 1, so leaves 2 and 3 meet only through it.
        assert_eq!(r.alpha, alpha);
        assert_eq!(r.alpha, 2.0);
    }

    #[test]
    fn distortion_needs_connected_minor() {
        let g = WeightedGraph::from_edges(3, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let k = TerminalSet::new(&g, [0, 2]).unwrap();
        let m = Minor {
            terminals: vec![0, 2],
            graph: WeightedGraph::empty(2),
            branch_sets: vec![vec![0, 1], vec![2]],
        };
        assert_eq!(
            measure_minor_distortion(&g, &k, &m),
            Err(HarnessError::Disconnected { t1: 0, t2: 2 })
        );
    }

    #[test]
    fn audit_bound_values() {
        // τ = β = 1, ζ = 7: g = 3, interval = 24·2401·4·3 + 4·49·3 = 692_076.
        assert_eq!(audit_bound(7.0, 1.0, 1.0), 2.0 * 692_076.0 + 1.0 + 48.0 * 2401.0 * 4.0);
        assert_eq!(audit_bound(7.0, 0.0, 0.5), audit_bound(7.0, 1.0, 1.0));
    }

    #[test]
    fn brute_force_oracle() {
        let tri = WeightedGraph::from_edges(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 5.0)]).unwrap();
        let d = brute_force_distances(&tri).unwrap();
        assert_eq!(d[0][2], Some(2.0));
        let c4 = WeightedGraph::from_edges(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)]).unwrap();
        let d = brute_force_distances(&c4).unwrap();
        assert_eq!(d[0][2], Some(2.0));
        let p3 = WeightedGraph::from_edges(3, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let d = brute_force_distances(&p3).unwrap();
        for s in 0..3 {
            assert_eq!(&d[s], sssp(&p3, s).unwrap().distances());
        }
        assert_eq!(
            brute_force_distances(&WeightedGraph::empty(11)),
            Err(HarnessError::TooLarge { n: 11, cap: 10 })
        );
    }
}
