//! JSON payloads written by the command-line tool. Every payload carries
//! `schema: 1`; vertices are referred to by their input labels.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{GraphError, Minor, VertexId, WeightedGraph};
use crate::harness::{DistortionReport, InstanceInfo, IterationSummary};
use crate::io::Instance;
use crate::spr::{ClaimReport, Escalation, IterationStats, SprConfig, SprMinor, TraceRecord};

pub const SCHEMA: u32 = 1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ArtifactError {
    #[error("unsupported schema version {0}")]
    Schema(u32),
    #[error("unknown vertex label {0:?}")]
    UnknownLabel(String),
    #[error("minor edge names {0:?}, which is not a minor vertex")]
    NotAMinorVertex(String),
    #[error("no branch set listed for terminal {0:?}")]
    MissingBranchSet(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinorEdge {
    pub t1: String,
    pub t2: String,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinorFile {
    pub schema: u32,
    pub terminals: Vec<String>,
    pub edges: Vec<MinorEdge>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchSet {
    pub terminal: String,
    pub vertices: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchSetFile {
    pub schema: u32,
    pub branch_sets: Vec<BranchSet>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub vertex: String,
    pub iteration: usize,
    pub terminal: String,
    pub level: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceFile<'a> {
    pub schema: u32,
    pub config: &'a SprConfig,
    pub zeta: f64,
    pub scale_factor: f64,
    /// Labels by dense vertex id; iteration statistics use the ids.
    pub labels: &'a [String],
    pub escalations: &'a [Escalation],
    pub iterations: &'a [IterationStats],
    pub claims: &'a ClaimReport,
    pub warnings: &'a [String],
    pub trace: Vec<TraceEntry>,
}

/// The part of a trace file needed to re-check assignment windows.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct TraceRecords {
    pub schema: u32,
    pub zeta: f64,
    pub trace: Vec<TraceEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairEntry {
    pub t1: String,
    pub t2: String,
    pub dg: f64,
    pub dm: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportFile<'a> {
    pub schema: u32,
    pub instance: &'a InstanceInfo,
    pub alpha: f64,
    pub mean: f64,
    pub pairs: Vec<PairEntry>,
    pub iterations: &'a [IterationSummary],
    pub audit_bound: Option<f64>,
    pub flags: &'a [String],
}

pub fn minor_file(inst: &Instance, minor: &Minor) -> MinorFile {
    let label = |i: usize| inst.label(minor.terminals[i]).to_string();
    MinorFile {
        schema: SCHEMA,
        terminals: minor.terminals.iter().map(|&t| inst.label(t).to_string()).collect(),
        edges: minor
            .graph
            .edges()
            .iter()
            .map(|e| MinorEdge {
                t1: label(e.u),
                t2: label(e.v),
                weight: e.weight,
            })
            .collect(),
    }
}

pub fn branch_set_file(inst: &Instance, minor: &Minor) -> BranchSetFile {
    BranchSetFile {
        schema: SCHEMA,
        branch_sets: minor
            .terminals
            .iter()
            .zip(&minor.branch_sets)
            .map(|(&t, set)| BranchSet {
                terminal: inst.label(t).to_string(),
                vertices: set.iter().map(|&v| inst.label(v).to_string()).collect(),
            })
            .collect(),
    }
}

pub fn trace_entries(inst: &Instance, trace: &[TraceRecord]) -> Vec<TraceEntry> {
    trace
        .iter()
        .map(|r| TraceEntry {
            vertex: inst.label(r.vertex).to_string(),
            iteration: r.iteration,
            terminal: inst.label(r.terminal).to_string(),
            level: r.level,
        })
        .collect()
}

pub fn trace_file<'a>(inst: &'a Instance, run: &'a SprMinor) -> TraceFile<'a> {
    TraceFile {
        schema: SCHEMA,
        config: &run.config,
        zeta: run.zeta,
        scale_factor: run.scale_factor,
        labels: &inst.labels,
        escalations: &run.escalations,
        iterations: &run.iterations,
        claims: &run.claims,
        warnings: &run.warnings,
        trace: trace_entries(inst, &run.trace),
    }
}

pub fn report_file<'a>(inst: &Instance, report: &'a DistortionReport) -> ReportFile<'a> {
    ReportFile {
        schema: SCHEMA,
        instance: &report.instance,
        alpha: report.alpha,
        mean: report.mean,
        pairs: report
            .pairs
            .iter()
            .map(|p| PairEntry {
                t1: inst.label(p.t1).to_string(),
                t2: inst.label(p.t2).to_string(),
                dg: p.dg,
                dm: p.dm,
                ratio: p.ratio,
            })
            .collect(),
        iterations: &report.iterations,
        audit_bound: report.audit_bound,
        flags: &report.flags,
    }
}

fn label_index(inst: &Instance) -> HashMap<&str, VertexId> {
    inst.labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect()
}

fn lookup(ids: &HashMap<&str, VertexId>, label: &str) -> Result<VertexId, ArtifactError> {
    ids.get(label).copied().ok_or_else(|| ArtifactError::UnknownLabel(label.to_string()))
}

/// Rebuilds a minor from its files. Structural problems that a [`Minor`]
/// can represent are left for validation to report.
pub fn minor_from_files(inst: &Instance, minor: &MinorFile, sets: &BranchSetFile) -> Result<Minor, ArtifactError> {
    for schema in [minor.schema, sets.schema] {
        if schema != SCHEMA {
            return Err(ArtifactError::Schema(schema));
        }
    }
    let ids = label_index(inst);
    let terminals = minor
        .terminals
        .iter()
        .map(|l| lookup(&ids, l))
        .collect::<Result<Vec<_>, _>>()?;
    let slot: HashMap<&str, usize> = minor.terminals.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
    let mut edges = Vec::with_capacity(minor.edges.len());
    for e in &minor.edges {
        let a = *slot.get(e.t1.as_str()).ok_or_else(|| ArtifactError::NotAMinorVertex(e.t1.clone()))?;
        let b = *slot.get(e.t2.as_str()).ok_or_else(|| ArtifactError::NotAMinorVertex(e.t2.clone()))?;
        edges.push((a, b, e.weight));
    }
    let graph = WeightedGraph::from_edges(terminals.len(), edges)?;
    let mut branch_sets = Vec::with_capacity(terminals.len());
    for label in &minor.terminals {
        let set = sets
            .branch_sets
            .iter()
            .find(|b| &b.terminal == label)
            .ok_or_else(|| ArtifactError::MissingBranchSet(label.clone()))?;
        branch_sets.push(
            set.vertices
                .iter()
                .map(|l| lookup(&ids, l))
                .collect::<Result<Vec<_>, _>>()?,
        );
    }
    Ok(Minor {
        terminals,
        graph,
        branch_sets,
    })
}

pub fn trace_from_entries(inst: &Instance, entries: &[TraceEntry]) -> Result<Vec<TraceRecord>, ArtifactError> {
    let ids = label_index(inst);
    entries
        .iter()
        .map(|e| {
            Ok(TraceRecord {
                vertex: lookup(&ids, &e.vertex)?,
                iteration: e.iteration,
                terminal: lookup(&ids, &e.terminal)?,
                level: e.level,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::parse_instance;
    use crate::spr::run_spr;

    #[test]
    fn minor_roundtrip_through_json() {
        let inst = parse_instance("4 3 2\na b 1\nb c 2\nc d 1\na\nd\n").unwrap();
        let run = run_spr(&inst.graph, &inst.terminals, &SprConfig::default()).unwrap();
        let mf = minor_file(&inst, &run.minor);
        let bf = branch_set_file(&inst, &run.minor);
        let mf: MinorFile = serde_json::from_str(&serde_json::to_string(&mf).unwrap()).unwrap();
        let bf: BranchSetFile = serde_json::from_str(&serde_json::to_string(&bf).unwrap()).unwrap();
        assert_eq!(mf.terminals, vec!["a", "d"]);
        assert_eq!(minor_from_files(&inst, &mf, &bf).unwrap(), run.minor);

        let trace = serde_json::to_string(&trace_file(&inst, &run)).unwrap();
        let back: TraceRecords = serde_json::from_str(&trace).unwrap();
        assert_eq!(trace_from_entries(&inst, &back.trace).unwrap(), run.trace);
    }

    #[test]
    fn rejects_foreign_labels() {
        let inst = parse_instance("3 2 2\na b 1\nb c 1\na\nc\n").unwrap();
        let run = run_spr(&inst.graph, &inst.terminals, &SprConfig::default()).unwrap();
        let mf = minor_file(&inst, &run.minor);
        let mut bf = branch_set_file(&inst, &run.minor);
        bf.branch_sets[0].vertices.push("zz".into());
        assert_eq!(
            minor_from_files(&inst, &mf, &bf),
            Err(ArtifactError::UnknownLabel("zz".into()))
        );
        let mut bf = branch_set_file(&inst, &run.minor);
        bf.schema = 2;
        assert_eq!(minor_from_files(&inst, &mf, &bf), Err(ArtifactError::Schema(2)));
    }
}
