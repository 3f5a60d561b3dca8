//! `depolar` — measure the polarization of a two-sided follow graph and plan
//! which external accounts to add to reduce it.
//!
//! Subcommands: `rwc` (score a graph), `select` (rank and pick k additions),
//! `simulate` (strategy baselines plus unfollow robustness), `generate`
//! (write a synthetic graph/partition/pool to disk).
//!
//! Exit codes: 0 success, 2 configuration or input error, 3 estimation or
//! internal failure.

mod config;
mod manifest;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use depolar_core::rwc::{EvalMode, RwcEvaluator};
use depolar_core::selection::select_addition_plan;
use depolar_core::sim::{
    run_baseline_comparison, run_unfollow_simulation, Strategy,
};
use depolar_core::{Error, Result, RwcEstimate64};

use config::{materialize, ExperimentConfig};
use manifest::RunManifest;
use output::{write_baseline_csv, write_json, write_plan_csv, write_unfollow_csv};

#[derive(Debug, Parser)]
#[command(name = "depolar", version, about, disable_help_subcommand = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Experiment configuration file (TOML); defaults apply when omitted.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Global seed; every stage derives its own stream from it.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,

    /// Output directory for artifacts and the run manifest.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Worker threads (default: one per CPU).
    #[arg(long, value_name = "N")]
    threads: Option<usize>,

    /// Force the exact absorbing-chain solver (errors on large graphs).
    #[arg(long)]
    exact: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Estimate the random-walk controversy score of the input graph.
    Rwc {
        #[command(flatten)]
        common: Common,
    },
    /// Rank the candidate pool and select the k best additions.
    Select {
        #[command(flatten)]
        common: Common,
        /// Number of nodes to add (overrides the config).
        #[arg(long, value_name = "N")]
        k: Option<usize>,
    },
    /// Run the strategy baseline comparison and the unfollow robustness
    /// simulation.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Number of nodes to add (overrides the config).
        #[arg(long, value_name = "N")]
        k: Option<usize>,
        /// Comma-separated strategy filter (popular_and_neutral,
        /// popular_only, random_fixed).
        #[arg(long, value_delimiter = ',', value_name = "LIST")]
        strategies: Option<Vec<String>>,
        /// Trials per removal fraction (overrides the config).
        #[arg(long, value_name = "N")]
        trials: Option<usize>,
    },
    /// Generate a synthetic graph, partition and candidate pool as files.
    Generate {
        #[command(flatten)]
        common: Common,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Rwc { .. } => "rwc",
            Command::Select { .. } => "select",
            Command::Simulate { .. } => "simulate",
            Command::Generate { .. } => "generate",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::Rwc { common }
            | Command::Select { common, .. }
            | Command::Simulate { common, .. }
            | Command::Generate { common } => common,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_input_error() {
                ExitCode::from(2)
            } else {
                ExitCode::from(3)
            }
        }
    }
}

fn run(command: &Command) -> Result<()> {
    let config = resolve_config(command)?;
    config.validate()?;
    std::fs::create_dir_all(&config.out_dir)?;
    let mut manifest = RunManifest::new(command.name(), &config);
    let exact = command.common().exact;
    let mut body = || match command {
        Command::Rwc { .. } => cmd_rwc(&config, exact, &mut manifest),
        Command::Select { .. } => cmd_select(&config, exact, &mut manifest),
        Command::Simulate { .. } => cmd_simulate(&config, exact, &mut manifest),
        Command::Generate { .. } => cmd_generate(&config, &mut manifest),
    };
    match config.threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().map_err(|e| {
                Error::InvalidParameter(format!("cannot build a {n}-thread pool: {e}"))
            })?;
            pool.install(body)?;
        }
        None => body()?,
    }
    let path = manifest.write(&config.out_dir)?;
    eprintln!("manifest: {}", path.display());
    Ok(())
}

/// Loads the config file (or defaults) and applies flag overrides on top.
fn resolve_config(command: &Command) -> Result<ExperimentConfig> {
    let common = command.common();
    let mut config = match &common.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    if let Some(out) = &common.out {
        config.out_dir = out.clone();
    }
    if let Some(threads) = common.threads {
        config.threads = Some(threads);
    }
    match command {
        Command::Select { k, .. } => {
            if let Some(k) = k {
                config.k = *k;
            }
        }
        Command::Simulate { k, strategies, trials, .. } => {
            if let Some(k) = k {
                config.k = *k;
            }
            if let Some(trials) = trials {
                config.trials = *trials;
            }
            if let Some(names) = strategies {
                config.strategies = names
                    .iter()
                    .map(|name| name.parse::<Strategy>())
                    .collect::<Result<Vec<_>>>()?;
            }
        }
        Command::Rwc { .. } | Command::Generate { .. } => {}
    }
    Ok(config)
}

/// What `rwc.json` holds: the resolved solver plus the estimate.
#[derive(Debug, serde::Serialize)]
struct RwcReport {
    mode: EvalMode,
    estimate: RwcEstimate64,
}

fn cmd_rwc(config: &ExperimentConfig, exact: bool, manifest: &mut RunManifest) -> Result<()> {
    let input = manifest.stage("input", || materialize(config, false))?;
    manifest.record_inputs(&input.input_files)?;
    let mode = if exact { EvalMode::Exact } else { EvalMode::MonteCarlo };
    let evaluator = RwcEvaluator::new(config.walk_config(), mode);
    let estimate =
        manifest.stage("estimate", || evaluator.evaluate::<f64>(&input.graph, &input.labeling))?;
    let resolved =
        if evaluator.use_exact(&input.graph) { EvalMode::Exact } else { EvalMode::MonteCarlo };
    println!("mode = {}", if resolved == EvalMode::Exact { "exact" } else { "monte_carlo" });
    println!("rwc = {}", estimate.rwc);
    println!("stderr = {}", estimate.stderr_rwc);
    println!("p_xx = {}  p_xy = {}", estimate.p_xx, estimate.p_xy);
    println!("p_yx = {}  p_yy = {}", estimate.p_yx, estimate.p_yy);
    println!(
        "walks: {} from X, {} from Y, {} discarded",
        estimate.completed_walks_x, estimate.completed_walks_y, estimate.discarded_walks
    );
    write_json(&config.out_dir, "rwc.json", &RwcReport { mode: resolved, estimate }, manifest)?;
    Ok(())
}

fn cmd_select(config: &ExperimentConfig, exact: bool, manifest: &mut RunManifest) -> Result<()> {
    let input = manifest.stage("input", || materialize(config, true))?;
    manifest.record_inputs(&input.input_files)?;
    let pool = input.pool.as_ref().expect("materialize(need_pool) returned a pool");
    if config.k > pool.len() {
        eprintln!(
            "warning: k = {} exceeds the pool size {}; selecting the whole pool",
            config.k,
            pool.len()
        );
    }
    let mode = if exact { EvalMode::Exact } else { EvalMode::Auto };
    let evaluator = RwcEvaluator::new(config.walk_config(), mode);
    let plan = manifest.stage("select", || {
        select_addition_plan::<f64>(
            &input.graph,
            &input.labeling,
            pool,
            config.k,
            config.candidate_multiplier,
            &evaluator,
        )
    })?;
    println!("baseline rwc = {}", plan.baseline_rwc);
    println!("selected {} node(s) of {} requested", plan.selected.len(), config.k);
    if let Some(final_rwc) = plan.cumulative_rwc.last() {
        println!("final rwc = {final_rwc}");
    }
    write_json(&config.out_dir, "plan.json", &plan, manifest)?;
    write_plan_csv(&config.out_dir, &plan, manifest)?;
    Ok(())
}

fn cmd_simulate(config: &ExperimentConfig, exact: bool, manifest: &mut RunManifest) -> Result<()> {
    let input = manifest.stage("input", || materialize(config, true))?;
    manifest.record_inputs(&input.input_files)?;
    let pool = input.pool.as_ref().expect("materialize(need_pool) returned a pool");
    let mode = if exact { EvalMode::Exact } else { EvalMode::Auto };
    let evaluator = RwcEvaluator::new(config.walk_config(), mode);

    let table = manifest.stage("baseline", || {
        run_baseline_comparison::<f64>(
            &input.graph,
            &input.labeling,
            pool,
            config.k,
            &config.strategies,
            &evaluator,
        )
    })?;

    let plan = manifest.stage("select", || {
        select_addition_plan::<f64>(
            &input.graph,
            &input.labeling,
            pool,
            config.k,
            config.candidate_multiplier,
            &evaluator,
        )
    })?;
    let mut fractions = config.fractions.clone();
    if !fractions.contains(&0.0) {
        eprintln!("note: removal fractions did not include 0; inserting it");
        fractions.push(0.0);
    }
    let curve = manifest.stage("unfollow", || {
        run_unfollow_simulation(
            &input.graph,
            &input.labeling,
            pool,
            &plan,
            &fractions,
            config.trials,
            &evaluator,
        )
    })?;

    println!("baseline rwc = {}", curve.baseline_rwc);
    println!("augmented rwc (k = {}) = {}", plan.selected.len(), curve.augmented_rwc);
    for (i, f) in curve.removal_fractions.iter().enumerate() {
        println!("f = {f}: mean rwc = {}", curve.mean_rwc[i]);
    }
    write_json(&config.out_dir, "baseline.json", &table, manifest)?;
    write_baseline_csv(&config.out_dir, &table, manifest)?;
    write_json(&config.out_dir, "plan.json", &plan, manifest)?;
    write_plan_csv(&config.out_dir, &plan, manifest)?;
    write_json(&config.out_dir, "unfollow.json", &curve, manifest)?;
    write_unfollow_csv(&config.out_dir, &curve, manifest)?;
    Ok(())
}

fn cmd_generate(config: &ExperimentConfig, manifest: &mut RunManifest) -> Result<()> {
    let (graph_params, pool_params) = config.generator_params()?;
    let (graph, labeling) = manifest.stage("generate.graph", || {
        depolar_core::sim::generate_polarized_graph(&graph_params)
    })?;
    let pool = manifest.stage("generate.pool", || {
        depolar_core::sim::generate_candidate_pool(&graph, &labeling, &pool_params)
    })?;
    let edges = config.out_dir.join("edges.tsv");
    let partition = config.out_dir.join("partition.tsv");
    let pool_path = config.out_dir.join("pool.tsv");
    manifest.stage("write", || {
        depolar_core::graph::io::write_edge_list(&edges, &graph)?;
        depolar_core::graph::io::write_partition(&partition, &graph, &labeling)?;
        depolar_core::graph::io::write_candidate_pool(&pool_path, &graph, &pool)?;
        Ok(())
    })?;
    for path in [&edges, &partition, &pool_path] {
        manifest.record_output(path)?;
        println!("wrote {}", path.display());
    }
    println!(
        "graph: {} nodes, {} edges; pool: {} candidate(s)",
        graph.node_count(),
        graph.edge_count(),
        pool.len()
    );
    Ok(())
}
