//! Scenario files and the command surface.
//!
//! A scenario is a JSON document describing the graph, weights, objectives,
//! initial estimates, stepsizes, asynchronous schedules and outputs. Agent ids
//! in scenario files are one-based. Emission uses sorted keys so that equal
//! scenarios and reports serialize to identical bytes.

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::adversary::{self, GroundTruth, ProbeSchedule, RecoveryReport, RecoveryVerdict, RECOVERY_TOLERANCE};
use crate::asynchronous::{default_window, run_async, verify_assumption4, AsyncConfig, UpdateSchedule};
use crate::error::{Error, Result};
use crate::metrics::{lemma1_bound, summarize, RunSummary};
use crate::model::{analyze_discoverability, build_metropolis_weights, partition, AdjacencyMatrix, NetworkGraph};
use crate::objectives::{network_subgradient_bound, sum_minimizer, ObjectiveSpec};
use crate::projection::{contains, ProjectionSet};
use crate::sync::{run_sync, MaliciousInput, Network, StepsizeSchedule};
use crate::trace::{read_oracle, read_visible, write_oracle, write_visible, OracleTrace, Trace, VisibleTrace};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GraphSpec {
    Ring {
        n: usize,
    },
    Complete {
        n: usize,
    },
    /// One-based arcs; undirected unless `directed` is set.
    Edges {
        n: usize,
        edges: Vec<[usize; 2]>,
        #[serde(default)]
        directed: bool,
    },
}

impl GraphSpec {
    pub fn n(&self) -> usize {
        match self {
            GraphSpec::Ring { n } | GraphSpec::Complete { n } | GraphSpec::Edges { n, .. } => *n,
        }
    }

    pub fn build(&self) -> Result<NetworkGraph> {
        match self {
            GraphSpec::Ring { n } => NetworkGraph::ring(*n),
            GraphSpec::Complete { n } => NetworkGraph::complete(*n),
            GraphSpec::Edges { n, edges, directed } => {
                let mut arcs = Vec::new();
                for &[a, b] in edges {
                    if a == 0 || b == 0 || a > *n || b > *n {
                        return Err(Error::Reference(format!("edge ({a}, {b}) names an agent outside 1..={n}")));
                    }
                    arcs.push((a - 1, b - 1));
                    if !directed {
                        arcs.push((b - 1, a - 1));
                    }
                }
                NetworkGraph::new(*n, arcs)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightRule {
    #[default]
    Metropolis,
    Explicit {
        matrix: Vec<Vec<f64>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentObjective {
    pub agent: usize,
    pub objective: ObjectiveSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentSchedule {
    pub agent: usize,
    pub schedule: UpdateSchedule,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSpec {
    #[default]
    Zeros,
    /// One row per agent.
    Explicit { values: Vec<Vec<f64>> },
    /// Independent uniform draws from the scenario seed.
    Uniform { low: f64, high: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AsyncSpec {
    /// Schedules for every agent (the malicious agent's may be omitted).
    pub schedules: Vec<AgentSchedule>,
    /// Window `T`; defaults to the least common multiple of the periods.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<usize>,
    /// Defaults to a box around the objective centers.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub projection: Option<ProjectionSet>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSpec {
    pub windows: usize,
}

fn default_trace() -> String {
    "trace.csv".into()
}
fn default_oracle() -> String {
    "oracle.csv".into()
}
fn default_report() -> String {
    "report.json".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    #[serde(default = "default_trace")]
    pub trace: String,
    #[serde(default = "default_oracle")]
    pub oracle: String,
    #[serde(default = "default_report")]
    pub report: String,
}

impl Default for OutputPaths {
    fn default() -> Self {
        Self { trace: default_trace(), oracle: default_oracle(), report: default_report() }
    }
}

fn default_dim() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub network: GraphSpec,
    #[serde(default)]
    pub weights: WeightRule,
    /// One-based id of the malicious agent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub malicious: Option<usize>,
    #[serde(default = "default_dim")]
    pub dim: usize,
    pub objectives: Vec<AgentObjective>,
    #[serde(default)]
    pub initial: InitialSpec,
    #[serde(default)]
    pub stepsize: StepsizeSchedule,
    #[serde(default, rename = "async", skip_serializing_if = "Option::is_none")]
    pub asynchronous: Option<AsyncSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe: Option<ProbeSpec>,
    pub horizon: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub outputs: OutputPaths,
}

/// A validated scenario with every cross-reference resolved.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub network: Network,
    /// Zero-based malicious index.
    pub malicious: Option<usize>,
    /// Objectives of the agents that run the algorithm.
    pub regular_objectives: Vec<ObjectiveSpec>,
    pub async_config: Option<AsyncConfig>,
    /// Set used for the reference solution: `X` for async scenarios, the
    /// default box otherwise.
    pub reference_set: ProjectionSet,
    pub x_star: DVector<f64>,
    pub f_star: f64,
}

/// Box spanning the objective centers, widened on each side by twice their
/// spread (at least 1). Contains every unconstrained minimizer of the sum.
pub fn default_projection(specs: &[ObjectiveSpec], dim: usize) -> Result<ProjectionSet> {
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for c in specs.iter().filter_map(ObjectiveSpec::center) {
        for j in 0..dim {
            lo[j] = lo[j].min(c[j]);
            hi[j] = hi[j].max(c[j]);
        }
    }
    if lo[0].is_infinite() {
        return ProjectionSet::cube(dim, 1.0);
    }
    let spread = (0..dim).map(|j| hi[j] - lo[j]).fold(0.0, f64::max);
    let pad = (2.0 * spread).max(1.0);
    ProjectionSet::boxed(lo.iter().map(|v| v - pad).collect(), hi.iter().map(|v| v + pad).collect())
}

fn weight_matrix(s: &Scenario, graph: &NetworkGraph) -> Result<AdjacencyMatrix> {
    match &s.weights {
        WeightRule::Metropolis => build_metropolis_weights(graph),
        WeightRule::Explicit { matrix } => {
            let m = AdjacencyMatrix::from_rows(matrix).map_err(|e| Error::config(format!("weights: {e}")))?;
            if m.n() != graph.n() {
                return Err(Error::config(format!("weight matrix is {0}x{0} for {1} agents", m.n(), graph.n())));
            }
            for (i, j) in m.graph().arcs() {
                if !graph.has_arc(i, j) {
                    return Err(Error::config(format!(
                        "weight ({}, {}) is positive but the graph has no such arc",
                        i + 1,
                        j + 1
                    )));
                }
            }
            Ok(m)
        }
    }
}

fn initial_estimates(s: &Scenario, n: usize) -> Result<DMatrix<f64>> {
    match &s.initial {
        InitialSpec::Zeros => Ok(DMatrix::zeros(n, s.dim)),
        InitialSpec::Explicit { values } => {
            if values.len() != n || values.iter().any(|r| r.len() != s.dim) {
                return Err(Error::config(format!("initial values must be {n} rows of length {}", s.dim)));
            }
            Ok(DMatrix::from_fn(n, s.dim, |i, j| values[i][j]))
        }
        InitialSpec::Uniform { low, high } => {
            if !(low < high) {
                return Err(Error::config("uniform initial range needs low < high"));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
            Ok(DMatrix::from_fn(n, s.dim, |_, _| rng.gen_range(*low..*high)))
        }
    }
}

/// Places per-agent entries by id; every agent except `optional` must appear
/// exactly once.
fn by_agent<T: Clone>(entries: &[(usize, T)], n: usize, what: &str, optional: Option<usize>) -> Result<Vec<Option<T>>> {
    let mut out: Vec<Option<T>> = vec![None; n];
    for (agent, item) in entries {
        if *agent == 0 || *agent > n {
            return Err(Error::Reference(format!("{what} for agent {agent} in a network of {n} agents")));
        }
        if out[agent - 1].is_some() {
            return Err(Error::Reference(format!("duplicate {what} for agent {agent}")));
        }
        out[agent - 1] = Some(item.clone());
    }
    if let Some(missing) = (0..n).find(|&i| out[i].is_none() && Some(i) != optional) {
        return Err(Error::Reference(format!("no {what} for agent {}", missing + 1)));
    }
    Ok(out)
}

/// Validates a scenario and resolves it into simulation inputs.
pub fn prepare(s: &Scenario) -> Result<Prepared> {
    let n = s.network.n();
    if s.dim == 0 {
        return Err(Error::config("dim must be at least 1"));
    }
    let malicious = match s.malicious {
        Some(id) if id == 0 || id > n => {
            return Err(Error::Reference(format!("malicious agent {id} in a network of {n} agents")))
        }
        Some(id) => Some(id - 1),
        None => None,
    };
    let graph = s.network.build().map_err(|e| match e {
        Error::Reference(_) => e,
        other => Error::config(format!("network: {other}")),
    })?;
    let weights = weight_matrix(s, &graph)?;

    let entries: Vec<(usize, ObjectiveSpec)> = s.objectives.iter().map(|o| (o.agent, o.objective.clone())).collect();
    let objectives: Vec<ObjectiveSpec> = by_agent(&entries, n, "objective", malicious)?
        .into_iter()
        .map(|o| o.unwrap_or_else(|| ObjectiveSpec::constant(0.0, s.dim)))
        .collect();
    for (i, o) in objectives.iter().enumerate() {
        o.validate().map_err(|e| Error::config(format!("objective of agent {}: {e}", i + 1)))?;
        if o.dim() != s.dim {
            return Err(Error::config(format!(
                "objective of agent {} has dimension {}, expected {}",
                i + 1,
                o.dim(),
                s.dim
            )));
        }
    }
    s.stepsize.validate()?;
    let network = Network::new(weights, objectives, initial_estimates(s, n)?)?;
    let regular_objectives: Vec<ObjectiveSpec> =
        (0..n).filter(|&i| Some(i) != malicious).map(|i| network.objectives[i].clone()).collect();
    let wide = default_projection(&regular_objectives, s.dim)?;

    let async_config = match &s.asynchronous {
        None => None,
        Some(a) => {
            let entries: Vec<(usize, UpdateSchedule)> =
                a.schedules.iter().map(|x| (x.agent, x.schedule.clone())).collect();
            let schedules: Vec<UpdateSchedule> = by_agent(&entries, n, "update schedule", malicious)?
                .into_iter()
                .map(|x| x.unwrap_or_else(|| UpdateSchedule::periodic(1)))
                .collect();
            let regular: Vec<UpdateSchedule> =
                (0..n).filter(|&i| Some(i) != malicious).map(|i| schedules[i].clone()).collect();
            let window = match a.window {
                Some(t) => t,
                None => default_window(&regular)
                    .ok_or_else(|| Error::config("async.window is required when any schedule is explicit"))?,
            };
            let report = verify_assumption4(&regular, window, s.horizon);
            if !report.holds {
                let ids: Vec<usize> = (0..n).filter(|&i| Some(i) != malicious).collect();
                let msgs: Vec<String> = report.violations.iter().map(|v| relabel(v, &ids)).collect();
                return Err(Error::Assumption4(msgs.join("; ")));
            }
            let set = a.projection.clone().unwrap_or_else(|| wide.clone());
            set.validate()?;
            if set.dim() != s.dim {
                return Err(Error::config("projection set dimension differs from dim"));
            }
            Some(AsyncConfig { schedules, window, set })
        }
    };

    let (x_star, f_star) = sum_minimizer(&regular_objectives, &wide)?;
    let reference_set = match &async_config {
        Some(cfg) => {
            if !contains(&cfg.set, &x_star)? {
                return Err(Error::config("projection set does not contain the minimizer of the sum objective"));
            }
            cfg.set.clone()
        }
        None => wide,
    };
    Ok(Prepared { network, malicious, regular_objectives, async_config, reference_set, x_star, f_star })
}

/// Maps "agent k" (position among regular agents) back to the scenario id.
fn relabel(msg: &str, ids: &[usize]) -> String {
    let Some(rest) = msg.strip_prefix("agent ") else {
        return msg.to_string();
    };
    let digits: String = rest.chars().take_while(|c| c.is_ascii_digit()).collect();
    match digits.parse::<usize>().ok().and_then(|k| ids.get(k.wrapping_sub(1))) {
        Some(id) => format!("agent {}{}", id + 1, &rest[digits.len()..]),
        None => msg.to_string(),
    }
}

pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let s: Scenario = serde_json::from_str(text)?;
    prepare(&s)?;
    Ok(s)
}

/// Reads and validates a scenario file.
pub fn load_scenario(path: &Path) -> Result<Scenario> {
    parse_scenario(&fs::read_to_string(path)?)
}

/// Pretty JSON with sorted keys and a trailing newline.
pub fn canonical_json<T: Serialize>(value: &T) -> Result<String> {
    let v: Value = serde_json::to_value(value)?;
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    RunSync,
    RunAsync,
    AttackConsensus,
    AttackDssoa,
    AttackAsync,
    AnalyzeDiscoverability,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::RunSync => "run-sync",
            Command::RunAsync => "run-async",
            Command::AttackConsensus => "attack-consensus",
            Command::AttackDssoa => "attack-dssoa",
            Command::AttackAsync => "attack-async",
            Command::AnalyzeDiscoverability => "analyze-discoverability",
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct ExecOptions {
    pub out: PathBuf,
    /// Existing visible trace for attack commands (no simulation).
    pub trace: Option<PathBuf>,
    /// Oracle file used only to score an attack on `trace`.
    pub oracle: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExecStatus {
    Success,
    /// The computation finished but the numeric verdict is negative.
    Verdict(String),
}

impl ExecStatus {
    pub fn exit_code(&self) -> i32 {
        match self {
            ExecStatus::Success => 0,
            ExecStatus::Verdict(_) => 3,
        }
    }
}

/// Exit code for a failed command: 2 for rejected input, 3 for numeric
/// verdicts, 1 otherwise.
pub fn error_exit_code(e: &Error) -> i32 {
    match e {
        Error::Configuration(_)
        | Error::Reference(_)
        | Error::Assumption4(_)
        | Error::Json(_)
        | Error::Domain(_)
        | Error::ConstructionUnsupported(_)
        | Error::NotStronglyConnected
        | Error::UnboundedSubgradient(_)
        | Error::Unsupported(_) => 2,
        Error::SingularData { .. } | Error::CertificateNotConstructible(_) | Error::BoundInapplicable(_) => 3,
        _ => 1,
    }
}

fn require_malicious(p: &Prepared, cmd: Command) -> Result<usize> {
    p.malicious.ok_or_else(|| Error::config(format!("{} needs a malicious agent in the scenario", cmd.name())))
}

fn probe_for(s: &Scenario, n: usize) -> Result<ProbeSchedule> {
    let len = 2 * n - 1;
    let windows = match &s.probe {
        Some(p) => p.windows,
        None => s.horizon / len,
    };
    if windows * len > s.horizon {
        return Err(Error::config(format!(
            "{windows} probe windows need a horizon of at least {}, got {}",
            windows * len,
            s.horizon
        )));
    }
    ProbeSchedule::new(n, windows).map_err(|e| Error::config(e.to_string()))
}

/// Probe input covering the whole horizon.
fn probe_input(p: &Prepared, index: usize, horizon: usize) -> Result<MaliciousInput> {
    let n = p.network.n();
    let windows = horizon.div_ceil(2 * n - 1).max(1);
    let seq = adversary::windowed_probe(n, windows)?;
    Ok(MaliciousInput::broadcast(index, &seq, p.network.dim()))
}

fn simulate_sync(p: &Prepared, s: &Scenario) -> Result<Trace> {
    let input = p.malicious.map(|i| probe_input(p, i, s.horizon)).transpose()?;
    run_sync(&p.network, &s.stepsize, s.horizon, input.as_ref())
}

fn simulate_async(p: &Prepared, s: &Scenario) -> Result<Trace> {
    let cfg = p.async_config.as_ref().ok_or_else(|| Error::config("this command needs an \"async\" section"))?;
    let input = p.malicious.map(|i| probe_input(p, i, s.horizon)).transpose()?;
    run_async(&p.network, cfg, s.horizon, input.as_ref())
}

fn write_trace(trace: &Trace, s: &Scenario, out: &Path) -> Result<()> {
    write_visible(&trace.visible, fs::File::create(out.join(&s.outputs.trace))?)?;
    write_oracle(trace, fs::File::create(out.join(&s.outputs.oracle))?)?;
    Ok(())
}

fn write_report(report: &Value, s: &Scenario, out: &Path) -> Result<()> {
    fs::write(out.join(&s.outputs.report), canonical_json(report)?)?;
    Ok(())
}

fn vec_json(v: &DVector<f64>) -> Vec<f64> {
    v.iter().copied().collect()
}

fn sync_bound(p: &Prepared, s: &Scenario, trace: &Trace) -> Option<f64> {
    let idx = p.malicious?;
    let part = partition(&p.network.weights, idx).ok()?;
    let l = network_subgradient_bound(&p.regular_objectives, None).ok()?;
    let x0 = &trace.visible.steps.first()?.estimates;
    lemma1_bound(x0, 1.0, s.stepsize.cap(), l, &part.a).ok()
}

fn run_report(cmd: Command, p: &Prepared, s: &Scenario, summary: &RunSummary, extra: Value) -> Value {
    json!({
        "command": cmd.name(),
        "seed": s.seed,
        "horizon": s.horizon,
        "reference": { "x_star": vec_json(&p.x_star), "f_star": p.f_star },
        "summary": summary,
        "details": extra,
    })
}

fn attack_trace(
    p: &Prepared,
    s: &Scenario,
    opts: &ExecOptions,
    asynchronous: bool,
) -> Result<(VisibleTrace, Option<OracleTrace>)> {
    match &opts.trace {
        Some(path) => {
            let visible = read_visible(fs::File::open(path)?)?;
            let oracle = opts.oracle.as_ref().map(|o| read_oracle(fs::File::open(o)?)).transpose()?;
            Ok((visible, oracle))
        }
        None => {
            let trace = if asynchronous { simulate_async(p, s)? } else { simulate_sync(p, s)? };
            write_trace(&trace, s, &opts.out)?;
            Ok((trace.visible, Some(trace.oracle)))
        }
    }
}

/// Runs one command and writes its outputs into `opts.out`.
pub fn execute(s: &Scenario, cmd: Command, opts: &ExecOptions) -> Result<ExecStatus> {
    let p = prepare(s)?;
    fs::create_dir_all(&opts.out)?;
    match cmd {
        Command::RunSync => {
            let trace = simulate_sync(&p, s)?;
            let bound = sync_bound(&p, s, &trace);
            let summary = summarize(&trace, &p.regular_objectives, &p.x_star, p.f_star, bound)?;
            write_trace(&trace, s, &opts.out)?;
            let extra = json!({
                "bound_respected": bound.map(|b| summary.max_abs_estimate <= b),
            });
            write_report(&run_report(cmd, &p, s, &summary, extra), s, &opts.out)?;
            Ok(ExecStatus::Success)
        }
        Command::RunAsync => {
            let trace = simulate_async(&p, s)?;
            let summary = summarize(&trace, &p.regular_objectives, &p.x_star, p.f_star, None)?;
            write_trace(&trace, s, &opts.out)?;
            let cfg = p.async_config.as_ref().expect("checked by simulate_async");
            let k = trace.horizon();
            let start = k.saturating_sub(cfg.window);
            let omega = trace.oracle.steps[start..k]
                .iter()
                .filter_map(|st| st.omega.as_ref().map(|o| o.amax()))
                .fold(0.0, f64::max);
            let extra = json!({
                "window": cfg.window,
                "projection": cfg.set,
                "max_omega_final_window": omega,
            });
            write_report(&run_report(cmd, &p, s, &summary, extra), s, &opts.out)?;
            Ok(ExecStatus::Success)
        }
        Command::AttackConsensus => {
            let idx = require_malicious(&p, cmd)?;
            let n = p.network.n();
            let visible = match &opts.trace {
                Some(path) => read_visible(fs::File::open(path)?)?,
                None => {
                    let consensus = Network::new(
                        p.network.weights.clone(),
                        vec![ObjectiveSpec::constant(0.0, s.dim); n],
                        p.network.initial.clone(),
                    )?;
                    let seq = adversary::probe_sequence(n)?;
                    let input = MaliciousInput::broadcast(idx, &seq, s.dim);
                    let trace =
                        run_sync(&consensus, &StepsizeSchedule::Constant { alpha: 1.0 }, seq.len(), Some(&input))?;
                    write_trace(&trace, s, &opts.out)?;
                    trace.visible
                }
            };
            let truth = partition(&p.network.weights, idx)?;
            let (report, status) = match adversary::attack_consensus(&visible, RECOVERY_TOLERANCE) {
                Ok(rec) => (
                    json!({
                        "verdict": RecoveryVerdict::Recovered,
                        "a": rec.a.row_iter().map(|r| r.iter().copied().collect::<Vec<_>>()).collect::<Vec<_>>(),
                        "b": vec_json(&rec.b),
                        "conditioning": rec.conditioning,
                        "frobenius_error": rec.frobenius_error(&truth),
                    }),
                    ExecStatus::Success,
                ),
                Err(Error::SingularData { conditioning, tolerance }) => (
                    json!({
                        "verdict": RecoveryVerdict::IllConditioned,
                        "conditioning": conditioning,
                        "tolerance": tolerance,
                    }),
                    ExecStatus::Verdict("ill_conditioned".into()),
                ),
                Err(e) => return Err(e),
            };
            write_report(&json!({ "command": cmd.name(), "recovery": report }), s, &opts.out)?;
            Ok(status)
        }
        Command::AttackDssoa | Command::AttackAsync => {
            let idx = require_malicious(&p, cmd)?;
            let asynchronous = cmd == Command::AttackAsync;
            let probe = probe_for(s, p.network.n())?;
            let (visible, oracle) = attack_trace(&p, s, opts, asynchronous)?;
            let outcome = if asynchronous {
                adversary::attack_async(&visible, &probe, &s.stepsize)?
            } else {
                adversary::attack_dssoa(&visible, &probe, &s.stepsize)?
            };
            let truth = partition(&p.network.weights, idx)?;
            let ground = oracle.map(|o| GroundTruth::from_oracle(truth.clone(), &o));
            let report = RecoveryReport::build(&outcome, ground.as_ref());
            let status = match report.verdict {
                RecoveryVerdict::IllConditioned => ExecStatus::Verdict("ill_conditioned".into()),
                _ => ExecStatus::Success,
            };
            write_report(&json!({ "command": cmd.name(), "recovery": report }), s, &opts.out)?;
            Ok(status)
        }
        Command::AnalyzeDiscoverability => {
            let idx = require_malicious(&p, cmd)?;
            let part = partition(&p.network.weights, idx)?;
            let mut coords = Vec::with_capacity(s.dim);
            let mut all = true;
            for c in 0..s.dim {
                let x0: DVector<f64> = p
                    .network
                    .initial
                    .select_rows((0..p.network.n()).filter(|&i| i != idx).collect::<Vec<_>>().iter())
                    .column(c)
                    .into_owned();
                match analyze_discoverability(&part, &x0) {
                    Ok(v) => {
                        all &= v.discoverable;
                        coords.push(json!({ "coord": c, "verdict": v }));
                    }
                    Err(Error::CertificateNotConstructible(msg)) => {
                        all = false;
                        coords.push(json!({ "coord": c, "certificate_error": msg }));
                    }
                    Err(e) => return Err(e),
                }
            }
            let verdict = if all { "discoverable" } else { "not_discoverable" };
            write_report(&json!({ "command": cmd.name(), "verdict": verdict, "coordinates": coords }), s, &opts.out)?;
            Ok(if all { ExecStatus::Success } else { ExecStatus::Verdict(verdict.into()) })
        }
    }
}
