//! Classical-versus-quantum comparison campaigns.
//!
//! For every classical incumbent the earliest emulated quantum incumbent
//! with equal or better profit is paired with it; classical incumbents
//! without such a partner are dropped. Campaign output:
//!
//! * `records.csv`: one row per pairing against an external classical
//!   trace, columns `instance,n,d,classical_seconds,quantum_cycles,
//!   quantum_seconds,gap` in that order;
//! * `internal_records.csv`: the same columns for pairings against the
//!   internal greedy/exact baseline, whose times are nominal work counts;
//! * `summary.json`: configuration echo and per-instance counts;
//! * `traces/`, `estimates/`, `runs/`: per-instance files.

use std::fs;
use std::io::Write;
use std::path::{Path as FsPath, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::amplification::{AmplificationConfig, BiasPolicy, CycleCosts, QMaxSearch, QuantumRunRecord};
use crate::baseline::{exact_optimum, greedy_incumbent, DEFAULT_ORACLE_LIMIT};
use crate::error::{Error, Result};
use crate::formats::{load_instance, Format, FormatOptions};
use crate::instance::KnapsackInstance;
use crate::resources::{estimate_qtg, CostModel, ResourceEstimate, Variant};
use crate::rng::derive_seed;
use crate::trace::{ingest_external_trace, SearchTrace, Timestamp, TraceEntry, TraceSource};

/// Nominal time charged per unit of internal baseline work.
pub const INTERNAL_SECONDS_PER_STEP: f64 = 1e-9;

pub const RECORDS_HEADER: [&str; 7] =
    ["instance", "n", "d", "classical_seconds", "quantum_cycles", "quantum_seconds", "gap"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gap {
    pub value: f64,
    /// The bound lies below the objective (for example a stale bound file).
    pub inconsistent: bool,
}

/// `|bound - obj| / |obj|`.
pub fn relative_gap(obj: i64, bound: i64) -> Result<Gap> {
    if obj == 0 {
        return Err(Error::UndefinedGap);
    }
    let diff = (bound as i128 - obj as i128).unsigned_abs() as f64;
    Ok(Gap { value: diff / (obj as i128).unsigned_abs() as f64, inconsistent: bound < obj })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRecord {
    pub instance: String,
    pub n: usize,
    pub d: usize,
    pub classical_seconds: f64,
    pub classical_profit: u64,
    pub quantum_cycles: u64,
    pub quantum_seconds: f64,
    pub quantum_profit: u64,
    /// `None` when no bound is known or the objective is zero.
    pub gap: Option<f64>,
    pub gap_inconsistent: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MatchOutcome {
    pub records: Vec<ComparisonRecord>,
    pub dropped: usize,
}

/// Pairs each classical incumbent with the earliest quantum incumbent of
/// equal or better profit. The gap of a record is taken against the
/// entry's own bound, else the trace's best bound, else `known_bound`.
pub fn match_incumbents(
    instance: &KnapsackInstance,
    classical: &SearchTrace,
    quantum: &SearchTrace,
    cycle_time_ns: f64,
    known_bound: Option<u64>,
) -> Result<MatchOutcome> {
    if classical.instance != instance.name() || quantum.instance != instance.name() {
        return Err(Error::input(format!(
            "traces for {:?} and {:?} do not belong to instance {:?}",
            classical.instance,
            quantum.instance,
            instance.name()
        )));
    }
    if classical.source == TraceSource::QuantumEmulated || quantum.source != TraceSource::QuantumEmulated {
        return Err(Error::input("expected a classical trace and a quantum-emulated trace"));
    }
    let mut outcome = MatchOutcome::default();
    for entry in classical.entries() {
        let seconds = entry.timestamp.seconds().expect("classical traces are timed in seconds");
        // quantum profits increase along the trace, so the first qualifying
        // entry is also the earliest
        let Some(q) = quantum.entries().iter().find(|q| q.profit >= entry.profit) else {
            outcome.dropped += 1;
            continue;
        };
        let cycles = q.timestamp.cycles().expect("quantum traces are timed in cycles");
        let bound = entry.bound.or(classical.best_bound).or(known_bound);
        let gap = match bound {
            Some(b) => match relative_gap(to_i64(entry.profit)?, to_i64(b)?) {
                Ok(g) => Some(g),
                Err(Error::UndefinedGap) => None,
                Err(e) => return Err(e),
            },
            None => None,
        };
        outcome.records.push(ComparisonRecord {
            instance: instance.name().to_string(),
            n: instance.n(),
            d: instance.d(),
            classical_seconds: seconds,
            classical_profit: entry.profit,
            quantum_cycles: cycles,
            quantum_seconds: crate::amplification::cycles_to_runtime(cycles, cycle_time_ns)?,
            quantum_profit: q.profit,
            gap: gap.map(|g| g.value),
            gap_inconsistent: gap.is_some_and(|g| g.inconsistent),
        });
    }
    Ok(outcome)
}

fn to_i64(v: u64) -> Result<i64> {
    i64::try_from(v).map_err(|_| Error::input(format!("value {v} exceeds the signed 64-bit range")))
}

/// Classical trace from the greedy heuristic and, for small `n`, the exact
/// optimum. Timestamps are nominal: one step per item for greedy, one per
/// search node for the exact solver.
pub fn internal_baseline(instance: &KnapsackInstance, oracle_limit: usize) -> Result<(SearchTrace, Option<u64>)> {
    let mut trace = SearchTrace::new(instance.name(), TraceSource::InternalClassical);
    let greedy = greedy_incumbent(instance);
    let greedy_steps = instance.n() as f64;
    let optimum = match exact_optimum(instance, oracle_limit) {
        Ok(opt) => Some(opt),
        Err(Error::TooLarge { .. }) => None,
        Err(e) => return Err(e),
    };
    let bound = optimum.as_ref().map(|o| o.profit());
    trace.push(TraceEntry {
        timestamp: Timestamp::Seconds(greedy_steps * INTERNAL_SECONDS_PER_STEP),
        profit: greedy.profit,
        bits: Some(greedy.bits),
        bound,
    })?;
    if let Some(opt) = optimum {
        if opt.profit() > greedy.profit {
            trace.push(TraceEntry {
                timestamp: Timestamp::Seconds((greedy_steps + opt.nodes as f64) * INTERNAL_SECONDS_PER_STEP),
                profit: opt.profit(),
                bits: Some(opt.path.bits.clone()),
                bound,
            })?;
        }
    }
    Ok((trace, bound))
}

#[derive(Debug, Clone)]
pub struct CampaignConfig {
    pub instances_dir: PathBuf,
    pub format: Format,
    pub format_options: FormatOptions,
    /// Directory holding `<instance name>.csv` classical traces.
    pub classical_traces_dir: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub seed: u64,
    /// Grover iterations per search round; `None` means `n^2`.
    pub max_grover_iterations: Option<u64>,
    pub global_iteration_cap: Option<u64>,
    pub bias_policy: BiasPolicy,
    pub cost_model: CostModel,
    pub variant: Variant,
    pub cycle_time_ns: f64,
    pub oracle_limit: usize,
    /// Keep an instance only if some pairing has strictly better quantum
    /// profit (otherwise equal profit suffices).
    pub strict_filter: bool,
    pub workers: usize,
}

impl CampaignConfig {
    pub fn new(instances_dir: impl Into<PathBuf>, format: Format, out_dir: impl Into<PathBuf>) -> Self {
        CampaignConfig {
            instances_dir: instances_dir.into(),
            format,
            format_options: FormatOptions::default(),
            classical_traces_dir: None,
            out_dir: out_dir.into(),
            seed: 0,
            max_grover_iterations: None,
            global_iteration_cap: None,
            bias_policy: BiasPolicy::default(),
            cost_model: CostModel::default(),
            variant: Variant::ParallelTree,
            cycle_time_ns: 1.0,
            oracle_limit: DEFAULT_ORACLE_LIMIT,
            strict_filter: false,
            workers: 1,
        }
    }
}

/// Worker count from `QTG_BENCH_WORKERS`, defaulting to the available
/// parallelism.
pub fn workers_from_env() -> usize {
    std::env::var("QTG_BENCH_WORKERS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&w| w > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstanceSummary {
    pub file: String,
    pub instance: Option<String>,
    pub n: Option<usize>,
    pub d: Option<usize>,
    /// `external`, or `internal` when no external trace was found.
    pub classical_source: Option<String>,
    pub classical_entries: usize,
    pub matched: usize,
    pub dropped: usize,
    /// Passed the instance filter, so its records were emitted.
    pub included: bool,
    pub inconsistent_gaps: usize,
    pub max_grover_iterations: Option<u64>,
    pub greedy_profit: Option<u64>,
    pub quantum_profit: Option<u64>,
    pub known_optimum: Option<u64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigEcho {
    pub format: String,
    pub seed: u64,
    pub max_grover_iterations: String,
    pub global_iteration_cap: Option<u64>,
    pub growth: f64,
    pub bias_policy: String,
    pub variant: Variant,
    pub cycle_time_ns: f64,
    pub oracle_limit: usize,
    pub instance_filter: String,
    pub cost_model: CostModel,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CampaignSummary {
    pub config: ConfigEcho,
    pub instances: usize,
    pub failures: usize,
    pub matched: usize,
    pub dropped: usize,
    pub records: usize,
    pub internal_records: usize,
    pub notes: Vec<String>,
    pub per_instance: Vec<InstanceSummary>,
}

impl CampaignSummary {
    pub fn succeeded(&self) -> bool {
        self.failures == 0
    }
}

struct InstanceResult {
    summary: InstanceSummary,
    records: Vec<ComparisonRecord>,
    internal: bool,
}

/// Runs a campaign and writes its outputs; individual instance failures
/// are logged, recorded in the summary and skipped.
pub fn run_campaign(config: &CampaignConfig) -> Result<CampaignSummary> {
    config.cost_model.validate()?;
    let files = instance_files(&config.instances_dir)?;
    for sub in ["traces", "estimates", "runs"] {
        let dir = config.out_dir.join(sub);
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers.max(1))
        .build()
        .map_err(|e| Error::input(format!("cannot start worker pool: {e}")))?;
    let results: Vec<InstanceResult> =
        pool.install(|| files.par_iter().map(|file| process_file(config, file)).collect());

    let mut summary = CampaignSummary {
        config: echo(config),
        instances: results.len(),
        failures: 0,
        matched: 0,
        dropped: 0,
        records: 0,
        internal_records: 0,
        notes: Vec::new(),
        per_instance: Vec::new(),
    };
    let mut external = Vec::new();
    let mut internal = Vec::new();
    for r in results {
        summary.failures += r.summary.error.is_some() as usize;
        summary.matched += r.summary.matched;
        summary.dropped += r.summary.dropped;
        if r.summary.included {
            if r.internal {
                internal.extend(r.records);
            } else {
                external.extend(r.records);
            }
        }
        summary.per_instance.push(r.summary);
    }
    summary.records = external.len();
    summary.internal_records = internal.len();
    if summary.per_instance.iter().any(|s| s.classical_source.as_deref() == Some("internal")) {
        let note = "internal classical baselines use nominal work-count times; they are not comparable to solver wall-times";
        log::warn!("{note}");
        summary.notes.push(note.to_string());
    }
    write_records(&config.out_dir.join("records.csv"), &external)?;
    write_records(&config.out_dir.join("internal_records.csv"), &internal)?;
    let mut json = serde_json::to_string_pretty(&summary)?;
    json.push('\n');
    write_atomic(&config.out_dir.join("summary.json"), json.as_bytes())?;
    Ok(summary)
}

fn echo(config: &CampaignConfig) -> ConfigEcho {
    ConfigEcho {
        format: config.format.to_string(),
        seed: config.seed,
        max_grover_iterations: config.max_grover_iterations.map_or("n^2".to_string(), |m| m.to_string()),
        global_iteration_cap: config.global_iteration_cap,
        growth: AmplificationConfig::default().growth,
        bias_policy: match config.bias_policy {
            BiasPolicy::Fixed(b) => format!("fixed:{b}"),
            BiasPolicy::Distance(delta) => format!("distance:{delta}"),
            BiasPolicy::FollowIncumbent => "follow-incumbent".to_string(),
        },
        variant: config.variant,
        cycle_time_ns: config.cycle_time_ns,
        oracle_limit: config.oracle_limit,
        instance_filter: if config.strict_filter { "strictly-better" } else { "equal-or-better" }.to_string(),
        cost_model: config.cost_model.clone(),
    }
}

/// Regular, non-hidden files of a directory in name order.
fn instance_files(dir: &FsPath) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let path = entry.path();
        let hidden = entry.file_name().to_string_lossy().starts_with('.');
        if path.is_file() && !hidden {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

fn process_file(config: &CampaignConfig, file: &FsPath) -> InstanceResult {
    let mut summary = InstanceSummary {
        file: file.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default(),
        instance: None,
        n: None,
        d: None,
        classical_source: None,
        classical_entries: 0,
        matched: 0,
        dropped: 0,
        included: false,
        inconsistent_gaps: 0,
        max_grover_iterations: None,
        greedy_profit: None,
        quantum_profit: None,
        known_optimum: None,
        error: None,
    };
    match process_instance(config, file, &mut summary) {
        Ok((records, internal)) => InstanceResult { summary, records, internal },
        Err(e) => {
            log::error!("{}: {e}", file.display());
            summary.error = Some(e.to_string());
            InstanceResult { summary, records: Vec::new(), internal: false }
        }
    }
}

fn process_instance(
    config: &CampaignConfig,
    file: &FsPath,
    summary: &mut InstanceSummary,
) -> Result<(Vec<ComparisonRecord>, bool)> {
    let loaded = load_instance(file, config.format, &config.format_options)?;
    let instance = &loaded.instance;
    let name = instance.name().to_string();
    summary.instance = Some(name.clone());
    summary.n = Some(instance.n());
    summary.d = Some(instance.d());
    summary.known_optimum = loaded.known_optimum;
    let stem = file_stem(&name);

    let estimate = estimate_qtg(instance, &config.cost_model, config.variant)?;
    write_atomic(&config.out_dir.join("estimates").join(format!("{stem}.json")), estimate_json(&estimate).as_bytes())?;

    let amp = AmplificationConfig {
        max_grover_iterations: config.max_grover_iterations,
        global_iteration_cap: config.global_iteration_cap,
        seed: derive_seed(config.seed, &name),
        bias_policy: config.bias_policy,
        costs: CycleCosts::from_estimate(&estimate, &config.cost_model),
        ..AmplificationConfig::default()
    };
    let (quantum, run) = QMaxSearch::new(instance, amp.clone())?.run(amp.seed)?;
    write_atomic(&config.out_dir.join("traces").join(format!("{stem}.quantum.csv")), quantum.to_csv_string().as_bytes())?;
    write_atomic(&config.out_dir.join("runs").join(format!("{stem}.json")), run_json(&run)?.as_bytes())?;
    summary.max_grover_iterations = Some(run.max_grover_iterations);
    summary.greedy_profit = Some(run.greedy_profit);
    summary.quantum_profit = Some(run.final_profit);

    let external = match &config.classical_traces_dir {
        Some(dir) => {
            let path = dir.join(format!("{name}.csv"));
            if path.is_file() {
                Some(ingest_external_trace(&path, instance)?)
            } else {
                log::warn!("{name}: no classical trace at {}, using the internal baseline", path.display());
                None
            }
        }
        None => None,
    };
    let internal = external.is_none();
    let (classical, bound) = match external {
        Some(trace) => (trace, loaded.known_optimum),
        None => {
            let (trace, optimum) = internal_baseline(instance, config.oracle_limit)?;
            (trace, optimum.or(loaded.known_optimum))
        }
    };
    summary.classical_source = Some(if internal { "internal" } else { "external" }.to_string());
    summary.classical_entries = classical.len();
    write_atomic(
        &config.out_dir.join("traces").join(format!("{stem}.{}.csv", if internal { "internal" } else { "classical" })),
        classical.to_csv_string().as_bytes(),
    )?;

    let outcome = match_incumbents(instance, &classical, &quantum, config.cycle_time_ns, bound)?;
    summary.matched = outcome.records.len();
    summary.dropped = outcome.dropped;
    summary.inconsistent_gaps = outcome.records.iter().filter(|r| r.gap_inconsistent).count();
    summary.included = outcome.records.iter().any(|r| {
        if config.strict_filter {
            r.quantum_profit > r.classical_profit
        } else {
            r.quantum_profit >= r.classical_profit
        }
    });
    Ok((outcome.records, internal))
}

fn estimate_json(estimate: &ResourceEstimate) -> String {
    let mut s = estimate.to_json();
    s.push('\n');
    s
}

fn run_json(run: &QuantumRunRecord) -> Result<String> {
    let mut s = serde_json::to_string_pretty(run)?;
    s.push('\n');
    Ok(s)
}

/// File-system safe form of an instance name.
fn file_stem(name: &str) -> String {
    name.chars().map(|c| if c.is_ascii_alphanumeric() || "-_.#".contains(c) { c } else { '_' }).collect()
}

pub fn write_records(path: &FsPath, records: &[ComparisonRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(RECORDS_HEADER)?;
    for r in records {
        w.write_record([
            r.instance.clone(),
            r.n.to_string(),
            r.d.to_string(),
            r.classical_seconds.to_string(),
            r.quantum_cycles.to_string(),
            r.quantum_seconds.to_string(),
            r.gap.map(|g| g.to_string()).unwrap_or_default(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::input(format!("csv buffer: {e}")))?;
    write_atomic(path, &bytes)
}

/// Writes through a temporary sibling and renames it into place.
pub fn write_atomic(path: &FsPath, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    f.write_all(bytes).map_err(|e| Error::io(&tmp, e))?;
    f.sync_all().map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}
