use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use qtg_core::amplification::{cycles_to_runtime, AmplificationConfig, BiasPolicy, CycleCosts, QMaxSearch};
use qtg_core::baseline::{exact_optimum, greedy_incumbent, DEFAULT_ORACLE_LIMIT};
use qtg_core::bench::{run_campaign, workers_from_env, CampaignConfig};
use qtg_core::formats::{load_instance, Format, FormatOptions, LoadedInstance, QkpDescriptor};
use qtg_core::resources::{estimate_qtg, CostModel, Variant};
use qtg_core::rng::StreamKey;
use qtg_core::sampler::{QtgModel, SampleScratch};
use qtg_core::{Bits, KnapsackInstance};

#[derive(Parser)]
#[command(name = "qtg", version, about = "Emulated tree-generator search and resource estimates for knapsack problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate an instance file.
    Validate(InstanceArgs),
    /// Exact optimum by exhaustive search.
    Oracle {
        #[command(flatten)]
        input: InstanceArgs,
        #[arg(long, default_value_t = DEFAULT_ORACLE_LIMIT)]
        limit: usize,
    },
    /// Greedy density incumbent.
    Greedy(InstanceArgs),
    /// Draw paths from the biased tree distribution.
    Sample(SampleArgs),
    /// Emulated maximum finding from the greedy incumbent.
    Search(SearchArgs),
    /// Qubit, gate and cycle counts.
    Estimate(EstimateArgs),
    /// Classical-versus-quantum comparison campaign.
    Bench(BenchArgs),
}

#[derive(Args)]
struct InstanceArgs {
    file: PathBuf,
    /// json, orlib or qkplib; inferred from a .json extension.
    #[arg(long)]
    format: Option<Format>,
    /// Problem index inside a multi-problem ORLIB file (0-based).
    #[arg(long)]
    orlib_index: Option<usize>,
    /// QKPLIB section layout: standard, billionnet-soutif or a comma list.
    #[arg(long, default_value = "standard")]
    qkp_layout: QkpDescriptor,
}

impl InstanceArgs {
    fn load(&self) -> Result<LoadedInstance> {
        let format = match self.format {
            Some(f) => f,
            None if self.file.extension().is_some_and(|e| e == "json") => Format::Json,
            None => bail!("cannot infer the format of {}; pass --format", self.file.display()),
        };
        let options = FormatOptions { orlib_index: self.orlib_index, qkp_descriptor: self.qkp_layout.clone() };
        Ok(load_instance(&self.file, format, &options)?)
    }
}

#[derive(Args)]
struct BiasArgs {
    /// Fixed bias b.
    #[arg(long, conflicts_with_all = ["bias_delta", "follow_incumbent"])]
    bias: Option<f64>,
    /// Target Hamming distance; the bias becomes n / delta.
    #[arg(long)]
    bias_delta: Option<usize>,
    /// Always reproduce the incumbent (the infinite-bias limit).
    #[arg(long, conflicts_with = "bias_delta")]
    follow_incumbent: bool,
}

impl BiasArgs {
    fn policy(&self) -> BiasPolicy {
        if self.follow_incumbent {
            BiasPolicy::FollowIncumbent
        } else if let Some(b) = self.bias {
            BiasPolicy::Fixed(b)
        } else {
            BiasPolicy::Distance(self.bias_delta.unwrap_or(4))
        }
    }
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    input: InstanceArgs,
    #[command(flatten)]
    bias: BiasArgs,
    /// greedy, zeros, or an explicit 0/1 string.
    #[arg(long, default_value = "greedy")]
    incumbent: String,
    #[arg(long, default_value_t = 1000)]
    draws: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CostArgs {
    #[arg(long, default_value = "parallel-tree")]
    variant: Variant,
    /// TOML cost table; built-in defaults when omitted.
    #[arg(long)]
    cost_model: Option<PathBuf>,
}

impl CostArgs {
    fn model(&self) -> Result<CostModel> {
        Ok(match &self.cost_model {
            Some(path) => CostModel::load(path)?,
            None => CostModel::default(),
        })
    }
}

#[derive(Args)]
struct SearchArgs {
    #[command(flatten)]
    input: InstanceArgs,
    #[command(flatten)]
    bias: BiasArgs,
    #[command(flatten)]
    cost: CostArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Grover iterations per round (default n^2).
    #[arg(long)]
    max_iters: Option<u64>,
    /// Cap on the iterations of the whole run.
    #[arg(long)]
    global_cap: Option<u64>,
    /// Keep the greedy incumbent as the bias center.
    #[arg(long)]
    no_recenter: bool,
    #[arg(long, default_value_t = 1.0)]
    cycle_time_ns: f64,
    /// Quantum trace CSV; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-round run record as JSON.
    #[arg(long)]
    record: Option<PathBuf>,
}

#[derive(Args)]
struct EstimateArgs {
    #[command(flatten)]
    input: InstanceArgs,
    #[command(flatten)]
    cost: CostArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    instances: PathBuf,
    #[arg(long, default_value = "json")]
    format: Format,
    #[arg(long)]
    orlib_index: Option<usize>,
    #[arg(long, default_value = "standard")]
    qkp_layout: QkpDescriptor,
    /// Directory of `<instance>.csv` classical traces.
    #[arg(long)]
    classical_traces: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    max_iters: Option<u64>,
    #[arg(long)]
    global_cap: Option<u64>,
    #[command(flatten)]
    bias: BiasArgs,
    #[command(flatten)]
    cost: CostArgs,
    #[arg(long, default_value_t = 1.0)]
    cycle_time_ns: f64,
    #[arg(long, default_value_t = DEFAULT_ORACLE_LIMIT)]
    oracle_limit: usize,
    /// Keep only instances where some quantum incumbent is strictly better.
    #[arg(long)]
    strict_filter: bool,
    /// Worker threads (default: QTG_BENCH_WORKERS, then all cores).
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Validate(input) => {
            let loaded = input.load()?;
            let inst = &loaded.instance;
            println!("{}: {} n={} d={} capacities={:?}", inst.name(), inst.kind(), inst.n(), inst.d(), inst.capacities());
            if let Some(opt) = loaded.known_optimum {
                println!("recorded optimum {opt}");
            }
        }
        Command::Oracle { input, limit } => {
            let inst = input.load()?.instance;
            let opt = exact_optimum(&inst, limit)?;
            println!("optimum {} bits {} nodes {}", opt.profit(), opt.path.bits, opt.nodes);
        }
        Command::Greedy(input) => {
            let inst = input.load()?.instance;
            let g = greedy_incumbent(&inst);
            println!("greedy {} bits {}", g.profit, g.bits);
        }
        Command::Sample(args) => sample(args)?,
        Command::Search(args) => search(args)?,
        Command::Estimate(args) => {
            let inst = args.input.load()?.instance;
            let est = estimate_qtg(&inst, &args.cost.model()?, args.cost.variant)?;
            emit(args.out.as_deref(), est.to_json() + "\n")?;
        }
        Command::Bench(args) => return bench(args),
    }
    Ok(ExitCode::SUCCESS)
}

fn incumbent_bits(inst: &KnapsackInstance, spec: &str) -> Result<Bits> {
    Ok(match spec {
        "greedy" => greedy_incumbent(inst).bits,
        "zeros" => Bits::zeros(inst.n()),
        bits => bits.parse().with_context(|| format!("invalid incumbent {bits:?}"))?,
    })
}

fn sample(args: SampleArgs) -> Result<()> {
    let inst = args.input.load()?.instance;
    let incumbent = incumbent_bits(&inst, &args.incumbent)?;
    let bias = args.bias.policy().bias(inst.n())?;
    let model = QtgModel::new(&inst, incumbent, bias)?;
    let key = StreamKey::new(args.seed, 0);
    let mut scratch = SampleScratch::new(&inst);
    let mut out = String::from("draw,bits,profit\n");
    for i in 0..args.draws {
        let profit = model.sample_into(&mut key.rng(i), &mut scratch);
        let bits = Bits::from_bools(scratch.bits.clone());
        out.push_str(&format!("{i},{bits},{profit}\n"));
    }
    emit(args.out.as_deref(), out)
}

fn search(args: SearchArgs) -> Result<()> {
    let inst = args.input.load()?.instance;
    let model = args.cost.model()?;
    let est = estimate_qtg(&inst, &model, args.cost.variant)?;
    let config = AmplificationConfig {
        max_grover_iterations: args.max_iters,
        global_iteration_cap: args.global_cap,
        seed: args.seed,
        bias_policy: args.bias.policy(),
        recenter_on_improvement: !args.no_recenter,
        costs: CycleCosts::from_estimate(&est, &model),
        ..AmplificationConfig::default()
    };
    let (trace, record) = QMaxSearch::new(&inst, config)?.run(args.seed)?;
    let seconds = cycles_to_runtime(record.total_cycles, args.cycle_time_ns)?;
    eprintln!(
        "greedy {} final {} after {} rounds, {} Grover iterations, {} cycles ({seconds:e} s)",
        record.greedy_profit,
        record.final_profit,
        record.rounds.len(),
        record.total_iterations,
        record.total_cycles
    );
    if let Some(path) = &args.record {
        emit(Some(path), serde_json::to_string_pretty(&record)? + "\n")?;
    }
    emit(args.out.as_deref(), trace.to_csv_string())
}

fn bench(args: BenchArgs) -> Result<ExitCode> {
    let mut config = CampaignConfig::new(&args.instances, args.format, &args.out);
    config.format_options = FormatOptions { orlib_index: args.orlib_index, qkp_descriptor: args.qkp_layout.clone() };
    config.classical_traces_dir = args.classical_traces.clone();
    config.seed = args.seed;
    config.max_grover_iterations = args.max_iters;
    config.global_iteration_cap = args.global_cap;
    config.bias_policy = args.bias.policy();
    config.cost_model = args.cost.model()?;
    config.variant = args.cost.variant;
    config.cycle_time_ns = args.cycle_time_ns;
    config.oracle_limit = args.oracle_limit;
    config.strict_filter = args.strict_filter;
    config.workers = args.workers.unwrap_or_else(workers_from_env);
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let summary = run_campaign(&config)?;
    println!(
        "{} instances, {} failed; {} matched, {} dropped; {} records, {} internal records",
        summary.instances, summary.failures, summary.matched, summary.dropped, summary.records, summary.internal_records
    );
    Ok(if summary.succeeded() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn emit(path: Option<&Path>, text: String) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => Ok(std::io::stdout().lock().write_all(text.as_bytes())?),
    }
}
