//! Command-line front end: `run`, `validate` and `synth`.
//!
//! Standard output carries `key=value` summary lines only; progress and
//! diagnostics go to standard error through `log`. Exit codes:
//! 0 success, 1 input or runtime failure, 2 usage or configuration error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use coemap::analytics::{emit_reports, ReportFormat};
use coemap::corpus::{load_corpus, YearRange};
use coemap::excellence::{run_pipeline_with, PipelineConfig, UnitLevel};
use coemap::manifest::{build_timestamp, RunManifest};
use coemap::par::{with_workers, Execution};
use coemap::scoring::FssScope;
use coemap::synth::{generate, SynthError, SynthSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "coemap", version, about = "Map centers of scientific excellence from bibliometric records")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the pipeline and write reports and audit files.
    Run(RunArgs),
    /// Load and check an input directory, printing entity counts.
    Validate(ValidateArgs),
    /// Write a synthetic corpus with planted clusters.
    Synth(SynthArgs),
}

/// Options shared by `run`; flags override values from `--config`.
#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long, value_name = "DIR")]
    input: Option<PathBuf>,
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Fraction of researchers per macro-area selected as top scientists.
    #[arg(long, value_name = "F")]
    decile: Option<String>,
    #[arg(long, value_name = "N")]
    min_cluster_size: Option<String>,
    #[arg(long, value_name = "N")]
    top_k: Option<String>,
    /// org|site
    #[arg(long, value_name = "LEVEL")]
    unit_level: Option<String>,
    /// category|all
    #[arg(long, value_name = "SCOPE")]
    fss_scope: Option<String>,
    /// Observation window, e.g. 2001-2003.
    #[arg(long, value_name = "A-B")]
    years: Option<String>,
    /// csv|markdown
    #[arg(long, value_name = "FORMAT")]
    format: Option<String>,
    /// Worker threads (default: machine parallelism).
    #[arg(long, value_name = "N")]
    workers: Option<String>,
    /// File of key=value lines using the flag names as keys.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    #[arg(long, value_name = "DIR")]
    input: PathBuf,
    #[arg(long, value_name = "A-B", default_value = "2001-2003")]
    years: String,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 200)]
    researchers: usize,
    #[arg(long, default_value_t = 1000)]
    publications: usize,
    /// Number of planted clusters.
    #[arg(long, default_value_t = 1)]
    planted: usize,
    #[arg(long, default_value_t = 4)]
    planted_size: usize,
    #[arg(long, default_value_t = 4)]
    min_cluster_size: usize,
    #[arg(long, default_value_t = 3)]
    macro_areas: usize,
    #[arg(long, default_value_t = 4)]
    categories_per_area: usize,
    #[arg(long, default_value_t = 8)]
    researchers_per_unit: usize,
    /// Share of mentions made deliberately ambiguous.
    #[arg(long, default_value_t = 0.05)]
    ambiguity: f64,
}

/// Fully resolved settings for `run`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSettings {
    pub input: PathBuf,
    pub out: PathBuf,
    pub config: PipelineConfig,
    pub format: ReportFormat,
    pub workers: Option<usize>,
}

const CONFIG_KEYS: [&str; 10] = [
    "decile",
    "format",
    "fss_scope",
    "input",
    "min_cluster_size",
    "out",
    "top_k",
    "unit_level",
    "workers",
    "years",
];

/// Parses a `key=value` config file. Blank lines and `#` comments are
/// skipped; keys may use `-` or `_`.
pub fn parse_config(text: &str, origin: &Path) -> Result<BTreeMap<String, String>, String> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            format!("{}:{}: expected key=value, got {line:?}", origin.display(), i + 1)
        })?;
        let key = k.trim().replace('-', "_");
        if !CONFIG_KEYS.contains(&key.as_str()) {
            return Err(format!("{}:{}: unknown key {:?}", origin.display(), i + 1, k.trim()));
        }
        out.insert(key, v.trim().to_string());
    }
    Ok(out)
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    value
        .trim()
        .parse()
        .map_err(|e| format!("invalid value {value:?} for {key}: {e}"))
}

fn resolve_settings(args: &RunArgs) -> Result<RunSettings, String> {
    let mut values = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("{}: {e}", path.display()))?;
            parse_config(&text, path)?
        }
        None => BTreeMap::new(),
    };
    let flags = [
        ("input", args.input.as_ref().map(|p| p.display().to_string())),
        ("out", args.out.as_ref().map(|p| p.display().to_string())),
        ("decile", args.decile.clone()),
        ("min_cluster_size", args.min_cluster_size.clone()),
        ("top_k", args.top_k.clone()),
        ("unit_level", args.unit_level.clone()),
        ("fss_scope", args.fss_scope.clone()),
        ("years", args.years.clone()),
        ("format", args.format.clone()),
        ("workers", args.workers.clone()),
    ];
    for (k, v) in flags {
        if let Some(v) = v {
            values.insert(k.to_string(), v);
        }
    }

    let mut config = PipelineConfig::default();
    let mut format = ReportFormat::default();
    let mut workers = None;
    if let Some(v) = values.get("decile") {
        config.decile_fraction = parse_value("--decile", v)?;
    }
    if let Some(v) = values.get("min_cluster_size") {
        config.min_cluster_size = parse_value("--min-cluster-size", v)?;
    }
    if let Some(v) = values.get("top_k") {
        config.top_k = parse_value("--top-k", v)?;
    }
    if let Some(v) = values.get("unit_level") {
        config.unit_level = parse_value::<UnitLevel>("--unit-level", v)?;
    }
    if let Some(v) = values.get("fss_scope") {
        config.fss_scope = parse_value::<FssScope>("--fss-scope", v)?;
    }
    if let Some(v) = values.get("years") {
        config.window = parse_value::<YearRange>("--years", v)?;
    }
    if let Some(v) = values.get("format") {
        format = parse_value("--format", v)?;
    }
    if let Some(v) = values.get("workers") {
        let n: usize = parse_value("--workers", v)?;
        if n == 0 {
            return Err("--workers must be positive".into());
        }
        workers = Some(n);
    }
    config.validate().map_err(|e| e.to_string())?;
    let input = values
        .get("input")
        .map(PathBuf::from)
        .ok_or("missing --input")?;
    let out = values.get("out").map(PathBuf::from).ok_or("missing --out")?;
    Ok(RunSettings {
        input,
        out,
        config,
        format,
        workers,
    })
}

fn execution() -> Execution {
    if Execution::parallel_available() {
        Execution::Parallel
    } else {
        Execution::Sequential
    }
}

fn cmd_run<W: Write>(args: &RunArgs, stdout: &mut W) -> i32 {
    let settings = match resolve_settings(args) {
        Ok(s) => s,
        Err(e) => {
            log::error!("{e}");
            return EXIT_USAGE;
        }
    };
    log::info!("loading corpus from {}", settings.input.display());
    let corpus = match load_corpus(&settings.input, settings.config.window) {
        Ok(c) => c,
        Err(e) => {
            log::error!("{e}");
            return EXIT_FAILURE;
        }
    };
    log::info!(
        "{} publications, {} researchers; running pipeline",
        corpus.publications().len(),
        corpus.researchers().len()
    );
    let map = match with_workers(settings.workers, || {
        run_pipeline_with(&corpus, &settings.config, execution())
    }) {
        Ok(m) => m,
        Err(e) => {
            log::error!("{e}");
            return EXIT_FAILURE;
        }
    };

    let mut manifest = RunManifest::for_run(&map, &corpus);
    manifest.insert("config.format", settings.format.as_str());
    if let Err(e) = manifest.add_input_digests(&settings.input) {
        log::error!("{e}");
        return EXIT_FAILURE;
    }
    manifest.set_timestamp(build_timestamp());

    let audit = match map.write_audit_files(&corpus, &settings.out) {
        Ok(files) => files,
        Err(e) => {
            log::error!("{e}");
            return EXIT_FAILURE;
        }
    };
    let reports = match emit_reports(&map, &corpus, &settings.out, settings.format, &manifest) {
        Ok(files) => files,
        Err(e) => {
            log::error!("{e}");
            return EXIT_FAILURE;
        }
    };
    log::info!("wrote {} files to {}", audit.len() + reports.len(), settings.out.display());

    let lines = [
        ("publications", corpus.publications().len()),
        ("links", map.authorships.links().len()),
        ("unresolved_mentions", map.authorships.unresolved().len()),
        ("top_scientists", map.top_scientists.len()),
        ("tsc", map.tsc_count()),
        ("coe", map.coe_count()),
        ("files", audit.len() + reports.len()),
    ];
    print_lines(stdout, &lines)
}

fn print_lines<W: Write>(stdout: &mut W, lines: &[(&str, usize)]) -> i32 {
    for (k, v) in lines {
        if writeln!(stdout, "{k}={v}").is_err() {
            return EXIT_FAILURE;
        }
    }
    EXIT_OK
}

fn cmd_validate<W: Write>(args: &ValidateArgs, stdout: &mut W) -> i32 {
    let window = match parse_value::<YearRange>("--years", &args.years) {
        Ok(w) => w,
        Err(e) => {
            log::error!("{e}");
            return EXIT_USAGE;
        }
    };
    match load_corpus(&args.input, window) {
        Ok(c) => print_lines(
            stdout,
            &[
                ("categories", c.categories().len()),
                ("journals", c.journals().len()),
                ("impact_factors", c.impact_factor_count()),
                ("organizations", c.organizations().len()),
                ("researchers", c.researchers().len()),
                ("publications", c.publications().len()),
            ],
        ),
        Err(e) => {
            log::error!("{e}");
            EXIT_FAILURE
        }
    }
}

fn cmd_synth<W: Write>(args: &SynthArgs, stdout: &mut W) -> i32 {
    let spec = SynthSpec {
        seed: args.seed,
        researchers: args.researchers,
        publications: args.publications,
        planted: args.planted,
        planted_size: args.planted_size,
        min_cluster_size: args.min_cluster_size,
        macro_areas: args.macro_areas,
        categories_per_area: args.categories_per_area,
        researchers_per_unit: args.researchers_per_unit,
        ambiguity: args.ambiguity,
        ..SynthSpec::default()
    };
    let exit_code = |e: SynthError| {
        log::error!("{e}");
        match e {
            SynthError::Infeasible(_) => EXIT_USAGE,
            _ => EXIT_FAILURE,
        }
    };
    let corpus = match generate(&spec) {
        Ok(c) => c,
        Err(e) => return exit_code(e),
    };
    if let Err(e) = corpus.write(&args.out) {
        return exit_code(e);
    }
    log::info!("synthetic corpus written to {}", args.out.display());
    print_lines(
        stdout,
        &[
            ("researchers", corpus.data.researchers.len()),
            ("publications", corpus.data.publications.len()),
            ("planted", corpus.planted.len()),
            ("ambiguous_mentions", corpus.ambiguous_mentions),
        ],
    )
}

/// Parses `args` (including the program name) and runs the command,
/// writing summary lines to `stdout`. Returns the exit code.
pub fn run_with<I, T, W>(args: I, stdout: &mut W) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
    W: Write,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            // help and version go to stdout, usage errors to stderr
            let _ = e.print();
            return code;
        }
    };
    match &cli.command {
        Command::Run(a) => cmd_run(a, stdout),
        Command::Validate(a) => cmd_validate(a, stdout),
        Command::Synth(a) => cmd_synth(a, stdout),
    }
}

/// Runs with the process arguments and standard output.
pub fn run() -> i32 {
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .try_init();
    run_with(std::env::args_os(), &mut std::io::stdout().lock())
}
