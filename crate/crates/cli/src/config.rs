//! Flat JSON config files, flag merging, and the parsers for the compact
//! flag syntaxes (`--proposal gaussian:0.25`, `--accept fixed-rate:0.1`,
//! `--init 5.5,5.5`).
//!
//! Precedence: sweep-grid overrides > command-line flags > config file >
//! built-in defaults.

use std::fmt;
use std::path::Path;

use minmax_core::error::CoreError;
use minmax_core::minmax::{AcceptMode, ProposalSpec, RunConfig};
use minmax_core::testbed::make_function;
use serde::Deserialize;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, bad config file, bad input data. Exit code 2.
    Config(String),
    /// Numerical failure or output I/O failure. Exit code 3.
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Runtime(_) => "runtime",
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) | CliError::Runtime(m) => f.write_str(m),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match &e {
            CoreError::Evaluation { .. } => CliError::Runtime(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

pub fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// One flat config file. Every field is optional so files can be partial;
/// flags fill the rest. Unknown keys are rejected.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub schema_version: Option<u32>,
    pub function: Option<String>,
    pub algorithm: Option<String>,
    pub init: Option<String>,
    pub eta: Option<f64>,
    pub eps: Option<f64>,
    pub delta: Option<f64>,
    pub omega: Option<f64>,
    pub tau1: Option<f64>,
    pub r_max: Option<u64>,
    pub budget: Option<u64>,
    pub proposal: Option<String>,
    pub accept: Option<String>,
    pub inner_cap: Option<usize>,
    pub lipschitz: Option<f64>,
    pub remeasure_on_reject: Option<bool>,
    pub abort_on_hitcap: Option<bool>,
    pub seed: Option<u64>,
    pub lr: Option<f64>,
    pub substeps: Option<usize>,
    pub iters: Option<u64>,
    // sweep-only fields
    pub seeds: Option<Vec<u64>>,
    pub grid: Option<serde_json::Map<String, serde_json::Value>>,
    pub success_radius: Option<f64>,
    pub target: Option<Vec<f64>>,
}

pub fn load_file(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| config_err(format!("cannot read config {}: {e}", path.display())))?;
    let cfg: FileConfig = serde_json::from_str(&text)
        .map_err(|e| config_err(format!("invalid config {}: {e}", path.display())))?;
    match cfg.schema_version {
        Some(SCHEMA_VERSION) => Ok(cfg),
        Some(v) => Err(config_err(format!(
            "config schema_version {v} unsupported, expected {SCHEMA_VERSION}"
        ))),
        None => Err(config_err("config file must declare schema_version")),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algorithm {
    Greedy,
    GreedyCompact,
    Gda,
    Omd,
    Eg,
}

impl Algorithm {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s.to_ascii_lowercase().as_str() {
            "greedy" => Ok(Algorithm::Greedy),
            "greedy-compact" => Ok(Algorithm::GreedyCompact),
            "gda" => Ok(Algorithm::Gda),
            "omd" => Ok(Algorithm::Omd),
            "eg" => Ok(Algorithm::Eg),
            other => Err(config_err(format!(
                "unknown algorithm '{other}' (expected greedy, greedy-compact, gda, omd, eg)"
            ))),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Algorithm::Greedy => "greedy",
            Algorithm::GreedyCompact => "greedy-compact",
            Algorithm::Gda => "gda",
            Algorithm::Omd => "omd",
            Algorithm::Eg => "eg",
        }
    }

    pub fn is_greedy(&self) -> bool {
        matches!(self, Algorithm::Greedy | Algorithm::GreedyCompact)
    }
}

/// `kind:params` proposal syntax used by flags and config files.
pub fn parse_proposal(s: &str) -> Result<ProposalSpec<f64>, CliError> {
    let (kind, params) = s.split_once(':').unwrap_or((s, ""));
    let nums: Vec<f64> = if params.is_empty() {
        vec![]
    } else {
        params
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|_| config_err(format!("bad proposal parameter '{p}' in '{s}'")))
            })
            .collect::<Result<_, _>>()?
    };
    let want = |n: usize| {
        if nums.len() == n {
            Ok(())
        } else {
            Err(config_err(format!(
                "proposal '{kind}' takes {n} parameter(s), got {}",
                nums.len()
            )))
        }
    };
    match kind.to_ascii_lowercase().as_str() {
        "gaussian" => {
            want(1)?;
            Ok(ProposalSpec::Gaussian { sigma2: nums[0] })
        }
        "stoch-grad" => {
            want(1)?;
            Ok(ProposalSpec::StochGrad { scale: nums[0] })
        }
        "projected-gaussian" => {
            want(1)?;
            Ok(ProposalSpec::ProjectedGaussian { sigma2: nums[0] })
        }
        "projected-stoch-grad" => {
            want(2)?;
            Ok(ProposalSpec::ProjectedStochGrad {
                scale: nums[0],
                noise_sigma2: nums[1],
            })
        }
        other => Err(config_err(format!(
            "unknown proposal kind '{other}' (expected gaussian, stoch-grad, projected-gaussian, projected-stoch-grad)"
        ))),
    }
}

pub fn parse_accept(s: &str) -> Result<AcceptMode<f64>, CliError> {
    let (kind, params) = s.split_once(':').unwrap_or((s, ""));
    match kind.to_ascii_lowercase().as_str() {
        "annealed" => Ok(AcceptMode::Annealed),
        "deterministic" => Ok(AcceptMode::Deterministic),
        "fixed-rate" => {
            let p = params
                .trim()
                .parse::<f64>()
                .map_err(|_| config_err(format!("fixed-rate needs a probability, got '{s}'")))?;
            Ok(AcceptMode::FixedRate(p))
        }
        other => Err(config_err(format!(
            "unknown accept mode '{other}' (expected annealed, deterministic, fixed-rate:p)"
        ))),
    }
}

pub fn parse_floats(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| config_err(format!("bad number '{p}' in '{s}'")))
        })
        .collect()
}

/// Everything a single run needs, resolved from defaults, file, and flags.
#[derive(Clone, Debug)]
pub struct Settings {
    pub function: String,
    pub algorithm: Algorithm,
    pub init_x: Vec<f64>,
    pub init_y: Vec<f64>,
    pub dim_x: usize,
    pub dim_y: usize,
    pub run: RunConfig<f64>,
    pub lr: f64,
    pub substeps: usize,
    pub iters: u64,
}

/// The optional per-field values a caller (flags or a sweep cell) lays over
/// a file config. Mirrors FileConfig's run-relevant fields.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub function: Option<String>,
    pub algorithm: Option<String>,
    pub init: Option<String>,
    pub eta: Option<f64>,
    pub eps: Option<f64>,
    pub delta: Option<f64>,
    pub omega: Option<f64>,
    pub tau1: Option<f64>,
    pub r_max: Option<u64>,
    pub budget: Option<u64>,
    pub proposal: Option<String>,
    pub accept: Option<String>,
    pub inner_cap: Option<usize>,
    pub lipschitz: Option<f64>,
    pub remeasure_on_reject: Option<bool>,
    pub abort_on_hitcap: Option<bool>,
    pub seed: Option<u64>,
    pub lr: Option<f64>,
    pub substeps: Option<usize>,
    pub iters: Option<u64>,
}

impl Overrides {
    /// Lay `self` over `base`, field by field.
    pub fn apply(&self, base: &mut FileConfig) {
        macro_rules! lay {
            ($($field:ident),*) => {
                $(if let Some(v) = &self.$field { base.$field = Some(v.clone()); })*
            };
        }
        lay!(
            function,
            algorithm,
            init,
            eta,
            eps,
            delta,
            omega,
            tau1,
            r_max,
            budget,
            proposal,
            accept,
            inner_cap,
            lipschitz,
            remeasure_on_reject,
            abort_on_hitcap,
            seed,
            lr,
            substeps,
            iters
        );
    }
}

/// Resolve a complete Settings from a merged file config.
pub fn resolve(cfg: &FileConfig) -> Result<Settings, CliError> {
    let function = cfg
        .function
        .clone()
        .ok_or_else(|| config_err("missing required setting: function (flag --function)"))?;
    let algorithm =
        Algorithm::parse(cfg.algorithm.as_deref().ok_or_else(|| {
            config_err("missing required setting: algorithm (flag --algorithm)")
        })?)?;
    let spec = make_function::<f64>(&function)?;
    let (dim_x, dim_y) = (spec.dim_x, spec.dim_y);

    let init_text = cfg
        .init
        .as_deref()
        .ok_or_else(|| config_err("missing required setting: init (flag --init x..,y..)"))?;
    let init = parse_floats(init_text)?;
    if init.len() != dim_x + dim_y {
        return Err(config_err(format!(
            "init has {} coordinates, {} needs {} (x) + {} (y)",
            init.len(),
            spec.name,
            dim_x,
            dim_y
        )));
    }
    let (init_x, init_y) = (init[..dim_x].to_vec(), init[dim_x..].to_vec());

    let run = RunConfig {
        epsilon: cfg.eps.unwrap_or(0.05),
        delta: cfg.delta.unwrap_or(0.05),
        omega: cfg.omega.unwrap_or(0.1),
        eta: cfg.eta.unwrap_or(0.05),
        tau1: cfg.tau1,
        r_max: cfg.r_max.unwrap_or(50),
        max_outer_iters: cfg.budget.unwrap_or(5000),
        proposal: parse_proposal(cfg.proposal.as_deref().unwrap_or("gaussian:0.25"))?,
        accept_mode: parse_accept(cfg.accept.as_deref().unwrap_or("deterministic"))?,
        inner_cap: cfg.inner_cap.unwrap_or(10_000),
        lipschitz: cfg.lipschitz,
        remeasure_on_reject: cfg.remeasure_on_reject.unwrap_or(false),
        abort_on_hitcap: cfg.abort_on_hitcap.unwrap_or(false),
        record_paths: false,
        seed: cfg.seed.unwrap_or(0),
    };

    Ok(Settings {
        function: spec.name,
        algorithm,
        init_x,
        init_y,
        dim_x,
        dim_y,
        run,
        lr: cfg.lr.unwrap_or(0.05),
        substeps: cfg.substeps.unwrap_or(1),
        iters: cfg.iters.unwrap_or(2000),
    })
}
