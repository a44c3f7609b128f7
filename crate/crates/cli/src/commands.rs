use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use spr_core::artifacts::{self, BranchSetFile, MinorFile, TraceRecords, SCHEMA};
use spr_core::graph::{normalize_scale, GraphError, Minor, VertexId};
use spr_core::harness::{
    self, generate, measure_distortion, measure_minor_distortion, validate_minor, Family, HarnessError,
    InstanceSpec, Terminals, NON_CONTRACTION_TOLERANCE,
};
use spr_core::io::{parse_instance, Instance};
use spr_core::rng;
use spr_core::shortcut::{verify_shortcut_with, ProviderRegistry, ShortcutError};
use spr_core::spr::{
    check_assignment_radius, check_assignment_window, run_spr, run_spr_observed, SprConfig, SprError,
};
use spr_core::PairSelection;

use crate::{BenchArgs, ConfigArgs, GenArgs, InputArgs, SolveArgs, VerifyArgs};

#[derive(Debug)]
pub enum CliError {
    /// Unreadable or malformed input, bad flags.
    Input(String),
    /// The pipeline ran but an invariant or check failed.
    Violation(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 1,
            CliError::Violation(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "{m}"),
            CliError::Violation(m) => write!(f, "verification failed: {m}"),
        }
    }
}

impl From<SprError> for CliError {
    fn from(e: SprError) -> Self {
        match e {
            SprError::Config(_) | SprError::Shortcut(ShortcutError::UnknownProvider(_)) => CliError::Input(e.to_string()),
            SprError::Graph(
                GraphError::ComponentWithoutTerminal(_)
                | GraphError::EmptyTerminals
                | GraphError::InvalidVertex { .. }
                | GraphError::TooSmall(_),
            ) => CliError::Input(e.to_string()),
            _ => CliError::Violation(e.to_string()),
        }
    }
}

impl From<HarnessError> for CliError {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Disconnected { .. } => CliError::Violation(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum InputSource<'a> {
    File(&'a Path),
    Generator(&'a InstanceSpec),
}

#[derive(Debug, Serialize)]
struct RunManifest<'a> {
    schema: u32,
    subcommand: &'a str,
    input: InputSource<'a>,
    config: &'a SprConfig,
}

#[derive(Debug, Serialize)]
struct Timing {
    schema: u32,
    started_unix_ms: u128,
    wall_ms: f64,
}

fn default_terminals(n: usize) -> Terminals {
    Terminals::Random {
        k: ((n as f64).sqrt().ceil() as usize).clamp(1, n.max(1)),
    }
}

fn load_instance(args: &InputArgs, seed: u64) -> Result<(Instance, Option<InstanceSpec>)> {
    if let Some(path) = &args.input {
        let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let inst = parse_instance(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        return Ok((inst, None));
    }
    let family = args.gen.expect("clap requires --input or --gen");
    let spec = InstanceSpec {
        family,
        weights: args.gen_opts.weights,
        terminals: args
            .gen_opts
            .terminals
            .clone()
            .unwrap_or_else(|| default_terminals(family.vertex_count())),
        seed,
    };
    let (g, k) = generate(&spec)?;
    Ok((Instance::numbered(g, k), Some(spec)))
}

fn config_from(args: &ConfigArgs) -> SprConfig {
    SprConfig {
        beta: args.beta,
        tau: args.tau,
        c_override: args.c,
        max_iterations: args.max_iterations,
        provider: args.provider.clone(),
        seed: args.seed,
        strict: args.strict,
        pairs: args.pairs,
        max_escalations: args.max_escalations,
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Input(e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::Input(format!("{}: {e}", dir.display())))
}

pub fn solve(args: SolveArgs) -> Result<()> {
    let started = SystemTime::now();
    let clock = Instant::now();
    let (inst, spec) = load_instance(&args.input, args.config.seed)?;
    let config = config_from(&args.config);
    let run = run_spr(&inst.graph, &inst.terminals, &config)?;
    let check = validate_minor(&inst.graph, &inst.terminals, &run.minor);
    let report = measure_distortion(&inst.graph, &inst.terminals, &run)?;
    let wall_ms = clock.elapsed().as_secs_f64() * 1e3;

    match &args.out {
        Some(dir) => {
            create_dir(dir)?;
            let input = match (&args.input.input, &spec) {
                (Some(path), _) => InputSource::File(path),
                (None, Some(spec)) => InputSource::Generator(spec),
                (None, None) => unreachable!("an instance was loaded"),
            };
            write_json(
                &dir.join("manifest.json"),
                &RunManifest {
                    schema: SCHEMA,
                    subcommand: "solve",
                    input,
                    config: &config,
                },
            )?;
            write_json(&dir.join("minor.json"), &artifacts::minor_file(&inst, &run.minor))?;
            write_json(&dir.join("branch_sets.json"), &artifacts::branch_set_file(&inst, &run.minor))?;
            write_json(&dir.join("trace.json"), &artifacts::trace_file(&inst, &run))?;
            write_json(&dir.join("report.json"), &artifacts::report_file(&inst, &report))?;
            write_json(
                &dir.join("timing.json"),
                &Timing {
                    schema: SCHEMA,
                    started_unix_ms: started.duration_since(UNIX_EPOCH).map(|d| d.as_millis()).unwrap_or(0),
                    wall_ms,
                },
            )?;
            println!(
                "n={} k={} iterations={} zeta={} alpha={} minor_edges={}",
                inst.graph.vertex_count(),
                inst.terminals.len(),
                run.iterations.len(),
                run.zeta,
                report.alpha,
                run.minor.graph.edge_count()
            );
        }
        None => {
            let text = serde_json::to_string_pretty(&artifacts::report_file(&inst, &report))
                .map_err(|e| CliError::Input(e.to_string()))?;
            println!("{text}");
        }
    }
    if let Some(v) = check.violations.first() {
        return Err(CliError::Violation(v.describe(&|x| inst.label(x).to_string())));
    }
    if config.strict && report.min_ratio() < 1.0 - NON_CONTRACTION_TOLERANCE {
        return Err(CliError::Violation(format!("minor contracts a terminal pair (ratio {})", report.min_ratio())));
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct Check {
    name: &'static str,
    passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    detail: Option<String>,
}

#[derive(Debug, Serialize)]
struct VerificationReport {
    schema: u32,
    passed: bool,
    checks: Vec<Check>,
}

fn check(name: &'static str, failure: Option<String>) -> Check {
    Check {
        name,
        passed: failure.is_none(),
        detail: failure,
    }
}

/// The part of a trace file that echoes the run configuration.
#[derive(Deserialize)]
struct TraceConfig {
    config: SprConfig,
}

fn assignment_of(minor: &Minor, n: usize) -> Option<Vec<VertexId>> {
    let mut f = vec![None; n];
    for (&t, set) in minor.terminals.iter().zip(&minor.branch_sets) {
        for &v in set {
            if v >= n || f[v].is_some() {
                return None;
            }
            f[v] = Some(t);
        }
    }
    f.into_iter().collect()
}

pub fn verify(args: VerifyArgs) -> Result<()> {
    let (inst, _) = load_instance(&args.input, args.config.seed)?;
    let (g, terminals) = (&inst.graph, &inst.terminals);
    let mut config = match &args.artifacts {
        Some(dir) => read_json::<TraceConfig>(&dir.join("trace.json"))?.config,
        None => config_from(&args.config),
    };
    let recorded_pairs = config.pairs;
    if args.config.pairs != PairSelection::Auto || args.artifacts.is_none() {
        config.pairs = args.config.pairs;
    }
    // Collect every violation instead of stopping at the first.
    config.strict = false;

    let mut shortcut_failures: Vec<String> = Vec::new();
    let mut shortcut_checked = 0usize;
    let registry = ProviderRegistry::default();
    let mut observer = |out: &spr_core::spr::IterationOutput| {
        let p = &out.partition;
        match verify_shortcut_with(
            p.pruned(),
            p.clustering(),
            p.delta(),
            config.pairs,
            rng::subseed(config.seed, "verify-shortcut", out.stats.i as u64),
        ) {
            Ok(r) => {
                shortcut_checked += r.pairs_checked;
                if let Some(v) = r.violations.first() {
                    shortcut_failures.push(format!(
                        "attempt {} iteration {}: cluster of vertex {} has strong diameter {} > {}",
                        out.stats.attempt,
                        out.stats.i,
                        inst.label(out.subgraph.to_host[v.witness]),
                        v.diameter,
                        r.delta
                    ));
                }
            }
            Err(e) => shortcut_failures.push(format!("iteration {}: {e}", out.stats.i)),
        }
    };
    let run = run_spr_observed(g, terminals, &config, &registry, &mut observer)?;

    let (minor, trace) = match &args.artifacts {
        Some(dir) => {
            let mf: MinorFile = read_json(&dir.join("minor.json"))?;
            let bf: BranchSetFile = read_json(&dir.join("branch_sets.json"))?;
            let minor =
                artifacts::minor_from_files(&inst, &mf, &bf).map_err(|e| CliError::Violation(e.to_string()))?;
            let tr: TraceRecords = read_json(&dir.join("trace.json"))?;
            let trace =
                artifacts::trace_from_entries(&inst, &tr.trace).map_err(|e| CliError::Violation(e.to_string()))?;
            (minor, trace)
        }
        None => (run.minor.clone(), run.trace.clone()),
    };

    let mut checks = Vec::new();
    let structure = validate_minor(g, terminals, &minor);
    checks.push(check(
        "minor-valid",
        structure.violations.first().map(|v| {
            let text = v.describe(&|x| inst.labels.get(x).cloned().unwrap_or_else(|| x.to_string()));
            match structure.violations.len() - 1 {
                0 => text,
                more => format!("{text} (and {more} more)"),
            }
        }),
    ));
    checks.push(check(
        "non-contraction",
        match measure_minor_distortion(g, terminals, &minor) {
            Ok(r) => r
                .pairs
                .iter()
                .find(|p| p.ratio < 1.0 - NON_CONTRACTION_TOLERANCE)
                .map(|p| format!("{} - {}: minor distance {} below {}", inst.label(p.t1), inst.label(p.t2), p.dm, p.dg)),
            Err(e) => Some(e.to_string()),
        },
    ));
    if args.artifacts.is_some() && config.pairs == recorded_pairs {
        checks.push(check(
            "reproducible",
            (run.minor != minor).then(|| "a fresh run with the recorded configuration gives a different minor".into()),
        ));
    }
    checks.push(check(
        "shortcut-partitions",
        shortcut_failures.first().cloned(),
    ));
    checks.push(check(
        "scattering-partitions",
        run.scatter_violations().next().map(|v| {
            format!(
                "pair ({}, {}): {:?}",
                inst.label(v.u),
                inst.label(v.v),
                v.reason
            )
        }),
    ));
    let normalized = if g.vertex_count() >= 2 {
        normalize_scale(g).map_err(SprError::from)?.0
    } else {
        g.clone()
    };
    let window = check_assignment_window(&trace, &normalized, terminals, run.zeta)?;
    checks.push(check(
        "assignment-window",
        window.first().map(|w| format!("{} ({})", w, inst.label(w.vertex))),
    ));
    checks.push(check(
        "assignment-radius",
        match assignment_of(&minor, g.vertex_count()) {
            Some(f) => check_assignment_radius(&f, g, terminals, run.zeta, run.tau_emp() as f64)?
                .first()
                .map(|r| format!("{r} ({})", inst.label(r.vertex))),
            None => Some("branch sets do not partition the vertices".into()),
        },
    ));
    checks.push(check(
        "termination",
        (run.claims.iterations > run.claims.iteration_bound).then(|| {
            format!(
                "{} iterations exceed the bound {}",
                run.claims.iterations, run.claims.iteration_bound
            )
        }),
    ));

    let passed = checks.iter().all(|c| c.passed);
    let report = VerificationReport {
        schema: SCHEMA,
        passed,
        checks,
    };
    match &args.out {
        Some(dir) => {
            create_dir(dir)?;
            write_json(&dir.join("verification.json"), &report)?;
        }
        None => println!(
            "{}",
            serde_json::to_string_pretty(&report).map_err(|e| CliError::Input(e.to_string()))?
        ),
    }
    log::info!("shortcut verification checked {shortcut_checked} pairs");
    match report.checks.iter().find(|c| !c.passed) {
        Some(c) => Err(CliError::Violation(format!(
            "{}: {}",
            c.name,
            c.detail.as_deref().unwrap_or("failed")
        ))),
        None => Ok(()),
    }
}

fn parse_sweep(s: &str) -> Result<Vec<usize>> {
    let bad = || CliError::Input(format!("expected sizes like 5,10,20 or 5..50:5, got {s:?}"));
    if let Some((range, step)) = s.split_once("..").map(|(a, rest)| (a, rest.split_once(':').unwrap_or((rest, "1")))) {
        let lo: usize = range.trim().parse().map_err(|_| bad())?;
        let hi: usize = step.0.trim().parse().map_err(|_| bad())?;
        let step: usize = step.1.trim().parse().map_err(|_| bad())?;
        if step == 0 || hi < lo {
            return Err(bad());
        }
        return Ok((lo..=hi).step_by(step).collect());
    }
    s.split(',').map(|x| x.trim().parse().map_err(|_| bad())).collect()
}

fn family_of(name: &str, size: usize) -> Result<Family> {
    let text = if name == "grid" {
        format!("grid:{size}x{size}")
    } else {
        format!("{name}:{size}")
    };
    Ok(text.parse::<Family>()?)
}

#[derive(Debug, Serialize)]
struct BenchRow {
    family: String,
    seed: u64,
    n: usize,
    m: usize,
    k: usize,
    iterations: usize,
    zeta: f64,
    alpha: f64,
    tau_emp: usize,
    beta_emp: f64,
    escalations: usize,
    wall_ms: f64,
}

fn bench_one(spec: &InstanceSpec, config: &SprConfig) -> Result<BenchRow> {
    let clock = Instant::now();
    let (g, k) = generate(spec)?;
    let run = run_spr(&g, &k, config)?;
    let wall_ms = clock.elapsed().as_secs_f64() * 1e3;
    let report = harness::measure_distortion(&g, &k, &run)?;
    Ok(BenchRow {
        family: spec.family.to_string(),
        seed: spec.seed,
        n: g.vertex_count(),
        m: g.edge_count(),
        k: k.len(),
        iterations: run.iterations.len(),
        zeta: run.zeta,
        alpha: report.alpha,
        tau_emp: run.tau_emp(),
        beta_emp: run.beta_emp(),
        escalations: run.escalations.len(),
        wall_ms,
    })
}

pub fn bench(args: BenchArgs) -> Result<()> {
    let config = config_from(&args.config);
    let mut specs = Vec::new();
    for size in parse_sweep(&args.sweep)? {
        let family = family_of(&args.family, size)?;
        for r in 0..args.repeats {
            specs.push(InstanceSpec {
                family,
                weights: args.gen_opts.weights,
                terminals: args
                    .gen_opts
                    .terminals
                    .clone()
                    .unwrap_or_else(|| default_terminals(family.vertex_count())),
                seed: args.config.seed + r,
            });
        }
    }
    let rows: Vec<Result<BenchRow>> = specs.par_iter().map(|s| bench_one(s, &config)).collect();
    let sink: Box<dyn std::io::Write> = match &args.out {
        Some(path) => Box::new(
            fs::File::create(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?,
        ),
        None => Box::new(std::io::stdout().lock()),
    };
    let mut w = csv::Writer::from_writer(sink);
    for row in rows {
        w.serialize(row?).map_err(|e| CliError::Input(e.to_string()))?;
    }
    w.flush().map_err(|e| CliError::Input(e.to_string()))?;
    Ok(())
}

pub fn gen(args: GenArgs) -> Result<()> {
    let spec = InstanceSpec {
        family: args.gen,
        weights: args.weights,
        terminals: args
            .terminals
            .unwrap_or_else(|| default_terminals(args.gen.vertex_count())),
        seed: args.seed,
    };
    let (g, k) = generate(&spec)?;
    let text = Instance::numbered(g, k).to_text();
    match &args.out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::Input(format!("{}: {e}", path.display()))),
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Input(e.to_string())),
    }
}
