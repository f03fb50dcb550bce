//! Command-line front end: run one solver or baseline, sweep a parameter
//! grid over many seeds, print the theory-implied parameter chain, certify a
//! finished run's endpoint, and plot trajectories.
//!
//! Exit codes: 0 on success, 2 for configuration or usage errors, 3 for
//! numerical failures and output I/O failures. Errors go to stderr as
//! `error[kind]: message`.

mod config;
mod exec;
mod plot;
mod sweep;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use minmax_core::certify::{certify_point, CertifyParams};
use minmax_core::minmax::RunConfig;
use minmax_core::oracle::{OracleCounters, OracleSet};
use minmax_core::testbed::make_function;
use minmax_core::trajectory::{read_csv, write_csv};
use minmax_core::tuning::theoretical_params;
use serde::Serialize;

use crate::config::{
    config_err, load_file, parse_floats, resolve, CliError, FileConfig, Overrides, Settings,
    SCHEMA_VERSION,
};
use crate::exec::execute;

#[derive(Parser)]
#[command(
    name = "minmax",
    version,
    about = "Annealed greedy min-max solver with baselines, sweeps, tuning, certification, and plots"
)]
struct Cli {
    /// Directory for output artifacts (default: $MINMAX_OUT_DIR, then ".").
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one algorithm once and write trajectory + summary artifacts.
    Run(RunArgs),
    /// Run every (grid cell, seed) pair and aggregate success statistics.
    Sweep(SweepArgs),
    /// Print the solver parameters implied by smoothness and accuracy targets.
    Tune(TuneArgs),
    /// Re-test a finished run's endpoint as an approximate equilibrium.
    Certify(CertifyArgs),
    /// Overlay trajectory CSVs as a deterministic SVG phase plot.
    Plot(PlotArgs),
}

/// Flags shared by `run` and `sweep`; every one overrides the config file.
#[derive(Args, Clone, Default)]
struct OverrideFlags {
    /// Objective name from the built-in registry (e.g. F1, BilinearCompact).
    #[arg(long)]
    function: Option<String>,
    /// greedy | greedy-compact | gda | omd | eg
    #[arg(long)]
    algorithm: Option<String>,
    /// Joint start point "x..,y.." (comma separated, x block first).
    #[arg(long)]
    init: Option<String>,
    /// Inner ascent step size.
    #[arg(long)]
    eta: Option<f64>,
    /// Stationarity target for the max player.
    #[arg(long)]
    eps: Option<f64>,
    /// Required decrease per accepted proposal.
    #[arg(long)]
    delta: Option<f64>,
    /// Failure-probability budget.
    #[arg(long)]
    omega: Option<f64>,
    /// Annealing time constant (enables the cooling coin when accept=annealed).
    #[arg(long)]
    tau1: Option<f64>,
    /// Consecutive rejections tolerated before stopping.
    #[arg(long, alias = "rmax")]
    r_max: Option<u64>,
    /// Outer-iteration budget.
    #[arg(long)]
    budget: Option<u64>,
    /// Proposal kind: gaussian:VAR | stoch-grad:SCALE | projected-gaussian:VAR
    /// | projected-stoch-grad:SCALE,VAR
    #[arg(long)]
    proposal: Option<String>,
    /// Accept rule: deterministic | annealed | fixed-rate:P
    #[arg(long)]
    accept: Option<String>,
    /// Inner ascent step cap per invocation.
    #[arg(long)]
    inner_cap: Option<usize>,
    /// Gradient smoothness constant; enables the tolerance schedule.
    #[arg(long)]
    lipschitz: Option<f64>,
    /// Re-measure the defended value at each compact-mode iteration.
    #[arg(long)]
    remeasure_on_reject: Option<bool>,
    /// Stop the whole run when an inner ascent hits its cap.
    #[arg(long)]
    abort_on_hitcap: Option<bool>,
    /// RNG seed for proposals and accept coins.
    #[arg(long)]
    seed: Option<u64>,
    /// Baseline learning rate.
    #[arg(long)]
    lr: Option<f64>,
    /// Max-player substeps per baseline iteration (gda only).
    #[arg(long)]
    substeps: Option<usize>,
    /// Baseline iteration count.
    #[arg(long)]
    iters: Option<u64>,
}

impl OverrideFlags {
    fn to_overrides(&self) -> Overrides {
        Overrides {
            function: self.function.clone(),
            algorithm: self.algorithm.clone(),
            init: self.init.clone(),
            eta: self.eta,
            eps: self.eps,
            delta: self.delta,
            omega: self.omega,
            tau1: self.tau1,
            r_max: self.r_max,
            budget: self.budget,
            proposal: self.proposal.clone(),
            accept: self.accept.clone(),
            inner_cap: self.inner_cap,
            lipschitz: self.lipschitz,
            remeasure_on_reject: self.remeasure_on_reject,
            abort_on_hitcap: self.abort_on_hitcap,
            seed: self.seed,
            lr: self.lr,
            substeps: self.substeps,
            iters: self.iters,
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// Flat JSON config file; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Basename for artifacts; default FUNCTION-ALGORITHM-seedSEED.
    #[arg(long)]
    stem: Option<String>,
    #[command(flatten)]
    flags: OverrideFlags,
}

#[derive(Args)]
struct SweepArgs {
    /// Flat JSON config file holding `seeds` and optionally `grid`.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Basename for the aggregate; default: the config file's stem.
    #[arg(long)]
    stem: Option<String>,
    #[command(flatten)]
    flags: OverrideFlags,
}

#[derive(Args)]
struct TuneArgs {
    /// Gradient norm bound on the chosen domain.
    #[arg(long, default_value_t = 1.0)]
    b: f64,
    /// Gradient smoothness constant.
    #[arg(long, default_value_t = 1.0)]
    l: f64,
    /// Stationarity target.
    #[arg(long, default_value_t = 0.5)]
    eps: f64,
    /// Required decrease per accepted proposal.
    #[arg(long, default_value_t = 0.5)]
    delta: f64,
    /// Failure-probability budget.
    #[arg(long, default_value_t = 0.5)]
    omega: f64,
    /// Annealing time constant.
    #[arg(long, default_value_t = 1.0)]
    tau1: f64,
    /// Also write the JSON to this path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CertifyArgs {
    /// Summary JSON written by `run` (solver algorithms only).
    #[arg(long)]
    summary: PathBuf,
    /// Rejection-probability trials.
    #[arg(long, default_value_t = 400)]
    trials: u64,
    /// Also write the certificate JSON to this path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PlotArgs {
    /// Trajectory CSV files to overlay.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    /// Target point "x,y" to mark with a star.
    #[arg(long, default_value = "0,0")]
    target: String,
    /// Output basename; default "plot".
    #[arg(long)]
    stem: Option<String>,
}

#[derive(Serialize)]
struct Summary {
    schema_version: u32,
    function: String,
    algorithm: String,
    seed: u64,
    final_x: Vec<f64>,
    final_y: Vec<f64>,
    final_f: Option<f64>,
    final_eps: Option<f64>,
    termination: String,
    iterations: u64,
    accepts: Option<u64>,
    counters: OracleCounters,
    wall_time_ms: u64,
    trajectory_csv: String,
    config: serde_json::Value,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.kind());
            ExitCode::from(e.exit_code())
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let out_dir = resolve_out_dir(cli.out_dir)?;
    match cli.command {
        Command::Run(a) => cmd_run(a, &out_dir),
        Command::Sweep(a) => cmd_sweep(a, &out_dir),
        Command::Tune(a) => cmd_tune(a),
        Command::Certify(a) => cmd_certify(a),
        Command::Plot(a) => cmd_plot(a, &out_dir),
    }
}

fn resolve_out_dir(flag: Option<PathBuf>) -> Result<PathBuf, CliError> {
    let dir = flag
        .or_else(|| std::env::var_os("MINMAX_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir).map_err(|e| {
        CliError::Runtime(format!(
            "cannot create output directory {}: {e}",
            dir.display()
        ))
    })?;
    Ok(dir)
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text)
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))
}

fn to_pretty<T: Serialize>(value: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Runtime(format!("cannot serialize output: {e}")))
}

fn merged_settings(config: &Option<PathBuf>, flags: &OverrideFlags) -> Result<Settings, CliError> {
    let mut file = match config {
        Some(p) => load_file(p)?,
        None => FileConfig::default(),
    };
    flags.to_overrides().apply(&mut file);
    resolve(&file)
}

fn cmd_run(a: RunArgs, out_dir: &Path) -> Result<(), CliError> {
    let settings = merged_settings(&a.config, &a.flags)?;
    let started = Instant::now();
    let out = execute(&settings)?;
    let wall_time_ms = started.elapsed().as_millis() as u64;

    let stem = a.stem.unwrap_or_else(|| {
        format!(
            "{}-{}-seed{}",
            settings.function,
            settings.algorithm.label(),
            settings.run.seed
        )
    });
    let csv_name = format!("{stem}.trajectory.csv");
    write_text(
        &out_dir.join(&csv_name),
        &write_csv(&out.rows, settings.dim_x, settings.dim_y),
    )?;

    let config_echo = if settings.algorithm.is_greedy() {
        serde_json::to_value(&settings.run)
            .map_err(|e| CliError::Runtime(format!("cannot serialize config echo: {e}")))?
    } else {
        serde_json::json!({
            "lr": settings.lr,
            "substeps": settings.substeps,
            "iters": settings.iters,
        })
    };
    let summary = Summary {
        schema_version: SCHEMA_VERSION,
        function: settings.function.clone(),
        algorithm: settings.algorithm.label().to_string(),
        seed: settings.run.seed,
        final_x: out.final_x,
        final_y: out.final_y,
        final_f: out.final_f,
        final_eps: out.final_eps,
        termination: out.termination,
        iterations: out.iterations,
        accepts: out.accepts,
        counters: out.counters,
        wall_time_ms,
        trajectory_csv: csv_name,
        config: config_echo,
    };
    let text = to_pretty(&summary)?;
    write_text(&out_dir.join(format!("{stem}.summary.json")), &text)?;
    println!("{text}");
    Ok(())
}

fn cmd_sweep(a: SweepArgs, out_dir: &Path) -> Result<(), CliError> {
    let path = a
        .config
        .ok_or_else(|| config_err("sweep requires --config (the grid and seeds live there)"))?;
    let file = load_file(&path)?;
    let agg = sweep::run_sweep(&file, &a.flags.to_overrides())?;
    let text = to_pretty(&agg)?;
    let stem = a.stem.clone().unwrap_or_else(|| {
        path.file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "sweep".to_string())
    });
    write_text(&out_dir.join(format!("{stem}.aggregate.json")), &text)?;
    println!("{text}");
    Ok(())
}

fn cmd_tune(a: TuneArgs) -> Result<(), CliError> {
    let params = theoretical_params::<f64>(a.b, a.l, a.eps, a.delta, a.omega, a.tau1)?;
    let text = to_pretty(&params)?;
    if let Some(out) = &a.out {
        write_text(out, &text)?;
    }
    println!("{text}");
    Ok(())
}

fn json_point(v: &serde_json::Value, key: &str) -> Result<Vec<f64>, CliError> {
    v.get(key)
        .and_then(|a| a.as_array())
        .and_then(|a| a.iter().map(|x| x.as_f64()).collect::<Option<Vec<f64>>>())
        .ok_or_else(|| config_err(format!("summary is missing a numeric '{key}' array")))
}

fn cmd_certify(a: CertifyArgs) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&a.summary)
        .map_err(|e| config_err(format!("cannot read summary {}: {e}", a.summary.display())))?;
    let v: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| config_err(format!("invalid summary {}: {e}", a.summary.display())))?;

    let function = v
        .get("function")
        .and_then(|f| f.as_str())
        .ok_or_else(|| config_err("summary is missing 'function'"))?;
    let run_config: RunConfig<f64> = serde_json::from_value(
        v.get("config").cloned().unwrap_or(serde_json::Value::Null),
    )
    .map_err(|e| {
        config_err(format!(
            "summary 'config' is not a solver configuration (baseline summaries cannot be certified): {e}"
        ))
    })?;
    let final_x = json_point(&v, "final_x")?;
    let final_y = json_point(&v, "final_y")?;
    let eps_star = v
        .get("final_eps")
        .and_then(|e| e.as_f64())
        .ok_or_else(|| config_err("summary is missing 'final_eps'"))?;

    let mut oracle = OracleSet::deterministic(make_function::<f64>(function)?);
    let params = CertifyParams {
        proposal: run_config.proposal.clone(),
        eps_star,
        delta: run_config.delta,
        omega: run_config.omega,
        eta: run_config.eta,
        inner_cap: run_config.inner_cap,
        n_trials: a.trials,
        seed: run_config.seed,
    };
    let cert = certify_point(&mut oracle, &final_x, &final_y, &params)?;
    let text = to_pretty(&cert)?;
    if let Some(out) = &a.out {
        write_text(out, &text)?;
    }
    println!("{text}");
    Ok(())
}

fn cmd_plot(a: PlotArgs, out_dir: &Path) -> Result<(), CliError> {
    let target = parse_floats(&a.target)?;
    if target.len() != 2 {
        return Err(config_err(format!(
            "target needs exactly 2 coordinates, got {}",
            target.len()
        )));
    }
    let mut series = Vec::with_capacity(a.inputs.len());
    for path in &a.inputs {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        let (rows, dim_x, dim_y) = read_csv::<f64>(&text)?;
        if dim_x != 1 || dim_y != 1 {
            return Err(config_err(format!(
                "plot draws 1-by-1 trajectories only, {} has dims {dim_x}/{dim_y}",
                path.display()
            )));
        }
        let label = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        series.push(plot::series_from_rows(label, &rows)?);
    }
    let svg = plot::render(&series, (target[0], target[1]));
    let stem = a.stem.as_deref().unwrap_or("plot");
    let out_path = out_dir.join(format!("{stem}.svg"));
    write_text(&out_path, &svg)?;
    println!("{}", out_path.display());
    Ok(())
}
