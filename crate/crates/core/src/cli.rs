//! Command-line front end: configuration, campaign dispatch and output files.
//!
//! Results go to one file per run (CSV or JSON rows with the fixed schema
//! `quantity,N,estimate,std_error,samples,seed`) and a sidecar
//! `<output>.meta.json` with the parameter echo, tool version and timing.
//! The results file depends only on the configuration and the master seed.

use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::Error;
use crate::montecarlo::{
    estimate_gap_probability, extreme_value_suite, run_condensate_campaign, single_path_fraction,
    ExtremeValueOptions, GapEventParams,
};
use crate::point_process::ModelParams;
use crate::thermodynamics::{critical_density, verify_assumptions, IdsRatioOptions};

pub const CSV_HEADER: &str = "quantity,N,estimate,std_error,samples,seed";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    CriticalDensity,
    GapProbability,
    Condensate,
    SinglePath,
    Extremes,
    VerifyAssumptions,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::CriticalDensity => "critical-density",
            Command::GapProbability => "gap-probability",
            Command::Condensate => "condensate",
            Command::SinglePath => "single-path",
            Command::Extremes => "extremes",
            Command::VerifyAssumptions => "verify-assumptions",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// A validated run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    /// Model parameters at the first entry of `n_grid`.
    pub params: ModelParams,
    pub gap: GapEventParams,
    pub n_grid: Vec<u64>,
    pub samples: usize,
    pub master_seed: u64,
    pub output_path: PathBuf,
    pub format: Format,
    /// Thread pool size; `None` uses one thread per logical core.
    pub workers: Option<usize>,
}

/// Why a command line or config file was rejected.
#[derive(Debug)]
pub enum ConfigError {
    /// Help, version or malformed flags; clap knows how to report these.
    Usage(clap::Error),
    Field {
        field: String,
        message: String,
    },
}

impl ConfigError {
    fn field(field: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError::Field {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Usage(e) => write!(f, "{e}"),
            ConfigError::Field { field, message } => write!(f, "invalid {field}: {message}"),
        }
    }
}

impl std::error::Error for ConfigError {}

impl From<Error> for ConfigError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter { field, reason } => ConfigError::field(field, reason),
            other => ConfigError::field("config", other.to_string()),
        }
    }
}

fn parse_count(s: &str) -> Result<u64, String> {
    if let Ok(n) = s.parse::<u64>() {
        return Ok(n);
    }
    // Accept 1e6 and friends as long as they are exact integers.
    match s.parse::<f64>() {
        Ok(x) if x >= 0.0 && x.fract() == 0.0 && x <= 2f64.powi(53) => Ok(x as u64),
        _ => Err(format!("expected a nonnegative integer, got {s:?}")),
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "lsbec",
    version,
    about = "Bose gas in the Luttinger-Sy random potential"
)]
struct Flags {
    /// Experiment to run.
    #[arg(value_enum)]
    command: Option<Command>,
    /// Impurity intensity.
    #[arg(long)]
    nu: Option<f64>,
    /// Particle density N/L.
    #[arg(long)]
    rho: Option<f64>,
    /// Inverse temperature.
    #[arg(long)]
    beta: Option<f64>,
    /// Number of levels in the condensate.
    #[arg(long)]
    c2: Option<usize>,
    /// Gap scale in the gap event.
    #[arg(long)]
    c3: Option<f64>,
    /// Exponent in (0,1) of the gap event.
    #[arg(long)]
    eta1: Option<f64>,
    /// Comma-separated particle numbers, ascending.
    #[arg(long, value_delimiter = ',', value_parser = parse_count)]
    n: Option<Vec<u64>>,
    /// Monte Carlo samples per particle number.
    #[arg(long, value_parser = parse_count)]
    samples: Option<u64>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Results file; the metadata goes to <output>.meta.json.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Worker threads (default: logical cores).
    #[arg(long)]
    workers: Option<usize>,
    /// JSON file with the same keys as the flags.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    command: Option<Command>,
    nu: Option<f64>,
    rho: Option<f64>,
    beta: Option<f64>,
    c2: Option<usize>,
    c3: Option<f64>,
    eta1: Option<f64>,
    n: Option<Vec<u64>>,
    samples: Option<u64>,
    seed: Option<u64>,
    output: Option<PathBuf>,
    format: Option<Format>,
    workers: Option<usize>,
}

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_SAMPLES: u64 = 1000;

/// Parses `argv` (including the program name), merging an optional
/// `--config` JSON file underneath the flags.
pub fn parse_config<I, T>(argv: I) -> Result<RunConfig, ConfigError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let flags = Flags::try_parse_from(argv).map_err(ConfigError::Usage)?;
    let file = match &flags.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| ConfigError::field("config", format!("{}: {e}", path.display())))?;
            parse_config_file(&text)?
        }
        None => FileConfig::default(),
    };
    build(flags, file)
}

fn parse_config_file(text: &str) -> Result<FileConfig, ConfigError> {
    serde_json::from_str(text).map_err(|e| ConfigError::field("config", e.to_string()))
}

fn build(flags: Flags, file: FileConfig) -> Result<RunConfig, ConfigError> {
    let command = flags
        .command
        .or(file.command)
        .ok_or_else(|| ConfigError::field("command", "no experiment given"))?;
    let nu = flags.nu.or(file.nu).unwrap_or(1.0);
    let rho = flags.rho.or(file.rho).unwrap_or(1.0);
    let beta = flags.beta.or(file.beta).unwrap_or(1.0);
    let c2 = flags.c2.or(file.c2).unwrap_or(1);
    let c3 = flags.c3.or(file.c3).unwrap_or(1.0);
    let eta1 = flags.eta1.or(file.eta1).unwrap_or(0.4);
    let n_grid = flags.n.or(file.n).unwrap_or_else(|| vec![1000]);
    let samples = flags.samples.or(file.samples).unwrap_or(DEFAULT_SAMPLES);
    let master_seed = flags.seed.or(file.seed).unwrap_or(DEFAULT_SEED);
    let format = flags.format.or(file.format).unwrap_or(Format::Csv);
    let workers = flags.workers.or(file.workers);
    let output_path = flags
        .output
        .or(file.output)
        .unwrap_or_else(|| PathBuf::from(format!("{}.{}", command.name(), format.extension())));

    if n_grid.is_empty() {
        return Err(ConfigError::field("n", "grid must be nonempty"));
    }
    if n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ConfigError::field("n", "grid must be strictly ascending"));
    }
    if workers == Some(0) {
        return Err(ConfigError::field("workers", "must be >= 1"));
    }
    let samples = usize::try_from(samples)
        .map_err(|_| ConfigError::field("samples", "does not fit in memory"))?;
    let params = ModelParams::new(nu, rho, beta, n_grid[0])?;
    let gap = GapEventParams::new(c2, c3, eta1)?;
    Ok(RunConfig {
        command,
        params,
        gap,
        n_grid,
        samples,
        master_seed,
        output_path,
        format,
        workers,
    })
}

/// Flags that [`parse_config`] turns back into `config`.
pub fn render_args(config: &RunConfig) -> Vec<String> {
    let n_list = config
        .n_grid
        .iter()
        .map(u64::to_string)
        .collect::<Vec<_>>()
        .join(",");
    let mut args = vec![
        "lsbec".to_string(),
        config.command.name().to_string(),
        format!("--nu={}", config.params.nu()),
        format!("--rho={}", config.params.rho()),
        format!("--beta={}", config.params.beta()),
        format!("--c2={}", config.gap.c2()),
        format!("--c3={}", config.gap.c3()),
        format!("--eta1={}", config.gap.eta1()),
        format!("--n={n_list}"),
        format!("--samples={}", config.samples),
        format!("--seed={}", config.master_seed),
        format!("--output={}", config.output_path.display()),
        format!("--format={}", config.format.extension()),
    ];
    if let Some(w) = config.workers {
        args.push(format!("--workers={w}"));
    }
    args
}

/// One line of the results file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub quantity: String,
    #[serde(rename = "N")]
    pub n: Option<u64>,
    pub estimate: f64,
    pub std_error: f64,
    pub samples: usize,
    pub seed: u64,
}

/// Output of one campaign before it is written.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub rows: Vec<ResultRow>,
    /// Extra per-experiment detail for the metadata file.
    pub details: Value,
}

fn row(
    quantity: impl Into<String>,
    n: Option<u64>,
    estimate: f64,
    std_error: f64,
    samples: usize,
    seed: u64,
) -> ResultRow {
    ResultRow {
        quantity: quantity.into(),
        n,
        estimate,
        std_error,
        samples,
        seed,
    }
}

/// Runs the campaign in the current thread pool.
pub fn execute(config: &RunConfig) -> Result<Outcome, Error> {
    let seed = config.master_seed;
    let base = config.params;
    let mut rows = Vec::new();
    let mut details = Vec::new();
    match config.command {
        Command::CriticalDensity => {
            let r = critical_density(base.beta(), base.nu())?;
            rows.push(row("rho_c", None, r.rho_c, r.abs_error_estimate, 0, seed));
            details.push(serde_json::to_value(r).expect("serializable"));
        }
        Command::GapProbability => {
            for &n in &config.n_grid {
                let p = base.with_n_particles(n)?;
                let r = estimate_gap_probability(&p, &config.gap, config.samples, seed)?;
                rows.push(row(
                    r.quantity.clone(),
                    Some(n),
                    r.estimate,
                    r.std_error,
                    r.samples,
                    seed,
                ));
                details.push(r.params_echo);
            }
        }
        Command::Condensate => {
            for &n in &config.n_grid {
                let p = base.with_n_particles(n)?;
                let c = run_condensate_campaign(&p, config.gap.c2(), config.samples, seed)?;
                let reports = [
                    c.deviation_moment(1),
                    c.deviation_moment(2),
                    c.next_level_moment(1),
                    c.next_level_moment(2),
                    c.ground_mean(),
                ];
                for r in reports {
                    rows.push(row(
                        r.quantity,
                        Some(n),
                        r.estimate,
                        r.std_error,
                        r.samples,
                        seed,
                    ));
                }
                details.push(json!({ "n": n, "rho_c": c.rho_c, "target": c.target }));
            }
        }
        Command::SinglePath => {
            let path = single_path_fraction(&base, &config.n_grid, seed)?;
            for pt in &path.points {
                rows.push(row(
                    "ground_fraction",
                    Some(pt.n_particles),
                    pt.ground_fraction,
                    0.0,
                    1,
                    seed,
                ));
            }
            let last = config.n_grid.last().copied();
            rows.push(row(
                "tail_max_ground_fraction",
                last,
                path.tail_max,
                0.0,
                1,
                seed,
            ));
        }
        Command::Extremes => {
            let opts = ExtremeValueOptions::default();
            for &n in &config.n_grid {
                let p = base.with_n_particles(n)?;
                let r = extreme_value_suite(&p, config.samples, seed, &opts)?;
                for c in &r.checks {
                    rows.push(row(
                        c.name.clone(),
                        Some(n),
                        c.estimate,
                        c.std_error,
                        c.samples,
                        seed,
                    ));
                }
                details.push(serde_json::to_value(&r).expect("serializable"));
            }
        }
        Command::VerifyAssumptions => {
            let largest = *config.n_grid.last().expect("grid is nonempty");
            let p = base.with_n_particles(largest)?;
            let mc = IdsRatioOptions {
                samples: config.samples,
                seed,
                ..Default::default()
            };
            let r = verify_assumptions(config.gap.eta1(), &p, &config.n_grid, &mc)?;
            for pt in &r.decay_sequence {
                rows.push(row("decay_term", Some(pt.x as u64), pt.value, 0.0, 0, seed));
            }
            for pt in &r.lifshitz_ratio {
                rows.push(row(
                    format!("lifshitz_ratio@E={:e}", pt.x),
                    None,
                    pt.value,
                    0.0,
                    0,
                    seed,
                ));
            }
            rows.push(row(
                "lifshitz_integral",
                None,
                r.integral,
                r.integral_error,
                0,
                seed,
            ));
            for pt in &r.ids_ratio {
                rows.push(row(
                    format!("ids_ratio@E={:e}", pt.x),
                    Some(largest),
                    pt.value,
                    0.0,
                    config.samples,
                    seed,
                ));
            }
            details.push(serde_json::to_value(&r).expect("serializable"));
        }
    }
    Ok(Outcome {
        rows,
        details: Value::Array(details),
    })
}

/// Results in the requested format, LF line endings.
pub fn render_rows(rows: &[ResultRow], format: Format) -> String {
    match format {
        Format::Csv => {
            let mut out = String::from(CSV_HEADER);
            out.push('\n');
            for r in rows {
                let n = r.n.map(|n| n.to_string()).unwrap_or_default();
                out.push_str(&format!(
                    "{},{},{:.16e},{:.16e},{},{}\n",
                    r.quantity, n, r.estimate, r.std_error, r.samples, r.seed
                ));
            }
            out
        }
        Format::Json => {
            let mut out = serde_json::to_string_pretty(rows).expect("rows serialize");
            out.push('\n');
            out
        }
    }
}

/// `<output>.meta.json`.
pub fn metadata_path(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Precondition(_) | Error::InvalidParameter { .. } => 2,
        _ => 1,
    }
}

fn write_file(path: &Path, contents: &str) -> std::io::Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(contents.as_bytes())?;
    f.sync_all()
}

/// Runs `config` and writes its files. Returns the process exit code:
/// 0 on success, 2 when the parameters rule the experiment out, 1 otherwise.
pub fn run(config: &RunConfig) -> i32 {
    let started = SystemTime::now();
    let clock = Instant::now();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = config.workers {
        builder = builder.num_threads(w);
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return 1;
        }
    };
    let outcome = match pool.install(|| execute(config)) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    let threads = pool.current_num_threads();
    let body = render_rows(&outcome.rows, config.format);
    if let Err(e) = write_file(&config.output_path, &body) {
        eprintln!("error: cannot write {}: {e}", config.output_path.display());
        return 1;
    }
    let meta = json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "command": config.command.name(),
        "master_seed": config.master_seed,
        "config": config,
        "argv": render_args(config),
        "workers": threads,
        "started_unix_seconds": started.duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0),
        "wall_clock_seconds": clock.elapsed().as_secs_f64(),
        "details": outcome.details,
    });
    let meta_path = metadata_path(&config.output_path);
    let mut text = serde_json::to_string_pretty(&meta).expect("metadata serializes");
    text.push('\n');
    if let Err(e) = write_file(&meta_path, &text) {
        eprintln!("error: cannot write {}: {e}", meta_path.display());
        return 1;
    }
    0
}
