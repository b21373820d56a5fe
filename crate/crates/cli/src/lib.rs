//! Command-line front end: projections, metric evaluation, verification
//! reports and horizontal geodesics on curve files.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use curvemetrics::curve::CONSTANT_SPEED_TOLERANCE;
use curvemetrics::{
    horizontal_geodesic, io, metric_from_operator, DiscreteCurve, Error, GeodesicOptions, Recipe,
    SplittingKind, SymmetryCheck, TangentField, VerifyTolerances,
};
use serde::Deserialize;

pub const CONFIG_ENV: &str = "CURVEMETRICS_CONFIG";

/// Tolerance names accepted by `--tol.<name>`.
pub const TOLERANCE_NAMES: [&str; 4] = ["orthogonality", "decomposition", "symmetry", "geodesic"];

pub mod exit {
    pub const OK: i32 = 0;
    pub const VERIFY_FAILED: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const PRECONDITION: i32 = 3;
    pub const DEGENERATE: i32 = 4;
    pub const NON_CONVERGENCE: i32 = 5;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Core(e) => match e {
                Error::NotImmersed { .. } | Error::GridTooSmall(_) => exit::DEGENERATE,
                Error::NotConstantSpeed { .. } | Error::NotSymmetricPositive { .. } => {
                    exit::PRECONDITION
                }
                _ => exit::USAGE,
            },
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Settings read from the file named by `CURVEMETRICS_CONFIG`. Flags win.
#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Expected grid size of every input curve.
    pub n: Option<usize>,
    /// Derivative scheme; only `central` exists.
    pub scheme: Option<String>,
    pub tolerances: BTreeMap<String, f64>,
    pub recipe: Option<String>,
    pub splitting: Option<String>,
    pub seed: Option<u64>,
    pub strict: Option<bool>,
    pub m: Option<usize>,
    pub max_iters: Option<usize>,
}

impl Config {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
        let config: Config = serde_json::from_str(&text)
            .map_err(|e| usage(format!("invalid config {}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> CliResult<()> {
        if let Some(scheme) = &self.scheme {
            if scheme != "central" {
                return Err(usage(format!(
                    "unknown derivative scheme {scheme:?} (expected central)"
                )));
            }
        }
        for (name, value) in &self.tolerances {
            check_tolerance(name, *value)?;
        }
        if let Some(recipe) = &self.recipe {
            recipe.parse::<Recipe>()?;
        }
        if let Some(splitting) = &self.splitting {
            splitting.parse::<SplittingKind>()?;
        }
        Ok(())
    }
}

fn check_tolerance(name: &str, value: f64) -> CliResult<()> {
    if !TOLERANCE_NAMES.contains(&name) {
        return Err(usage(format!(
            "unknown tolerance {name:?} (expected one of {})",
            TOLERANCE_NAMES.join(", ")
        )));
    }
    if !(value > 0.0 && value.is_finite()) {
        return Err(usage(format!(
            "tolerance {name} must be positive, got {value}"
        )));
    }
    Ok(())
}

#[derive(Debug, Parser)]
#[command(
    name = "curvemetrics",
    version,
    about = "Metrics on discretized closed planar curves"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Split a tangent field into its two splitting components.
    Project(ProjectArgs),
    /// Evaluate G_c(h, k) for an operator recipe.
    Metric(MetricArgs),
    /// Report orthogonality and decomposition defects of a metric.
    Verify(VerifyArgs),
    /// Compute a horizontal geodesic between two curves.
    Geodesic(GeodesicArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Seed for sampled checks.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Fail instead of resampling non-constant-speed curves.
    #[arg(long)]
    pub strict: bool,
    /// Tolerance override, given on the command line as --tol.<name> <value>.
    #[arg(long = "tol", value_name = "NAME=VALUE", hide = true)]
    pub tol: Vec<String>,
}

#[derive(Debug, Args)]
pub struct ProjectArgs {
    #[arg(long)]
    pub curve: PathBuf,
    #[arg(long)]
    pub field: PathBuf,
    #[arg(long)]
    pub splitting: Option<String>,
    /// Output directory for `<label>.csv` files.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct MetricArgs {
    #[arg(long)]
    pub curve: PathBuf,
    #[arg(long)]
    pub field: PathBuf,
    /// Second field; defaults to the first.
    #[arg(long)]
    pub field2: Option<PathBuf>,
    #[arg(long)]
    pub recipe: Option<String>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub curve: PathBuf,
    #[arg(long)]
    pub recipe: Option<String>,
    #[arg(long)]
    pub splitting: Option<String>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Also write the report to this file.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct GeodesicArgs {
    /// Start and end curve, in that order.
    #[arg(long, num_args = 1, required = true)]
    pub curve: Vec<PathBuf>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub recipe: Option<String>,
    #[arg(long)]
    pub splitting: Option<String>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Output directory for path.json and diagnostics.csv.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[command(flatten)]
    pub common: Common,
}

/// Rewrites `--tol.<name> v` and `--tol.<name>=v` into `--tol <name>=v`.
pub fn expand_tolerance_flags(args: impl IntoIterator<Item = OsString>) -> Vec<OsString> {
    let mut out = Vec::new();
    let mut iter = args.into_iter();
    while let Some(arg) = iter.next() {
        let Some(rest) = arg.to_str().and_then(|s| s.strip_prefix("--tol.")) else {
            out.push(arg);
            continue;
        };
        let pair = match rest.split_once('=') {
            Some((name, value)) => format!("{name}={value}"),
            None => match iter.next() {
                Some(value) => format!("{rest}={}", value.to_string_lossy()),
                None => format!("{rest}="),
            },
        };
        out.push("--tol".into());
        out.push(pair.into());
    }
    out
}

/// Everything a command needs after merging config and flags.
#[derive(Debug, Clone)]
pub struct Settings {
    pub config: Config,
    pub tolerances: BTreeMap<String, f64>,
    pub seed: u64,
    pub strict: bool,
}

impl Settings {
    pub fn new(config: Config, common: &Common) -> CliResult<Self> {
        let mut tolerances = config.tolerances.clone();
        for entry in &common.tol {
            let (name, value) = entry
                .split_once('=')
                .ok_or_else(|| usage(format!("malformed tolerance {entry:?}")))?;
            let value: f64 = value
                .parse()
                .map_err(|_| usage(format!("tolerance {name} needs a number, got {value:?}")))?;
            check_tolerance(name, value)?;
            tolerances.insert(name.to_owned(), value);
        }
        Ok(Self {
            seed: common.seed.or(config.seed).unwrap_or(0),
            strict: common.strict || config.strict.unwrap_or(false),
            config,
            tolerances,
        })
    }

    fn recipe(&self, flag: &Option<String>) -> CliResult<Recipe> {
        match flag.as_ref().or(self.config.recipe.as_ref()) {
            Some(text) => Ok(text.parse()?),
            None => Ok(Recipe::L2),
        }
    }

    fn splitting(&self, flag: &Option<String>) -> CliResult<SplittingKind> {
        match flag.as_ref().or(self.config.splitting.as_ref()) {
            Some(text) => Ok(text.parse()?),
            None => Ok(SplittingKind::TanNor),
        }
    }

    fn verify_tolerances(&self) -> VerifyTolerances {
        let d = VerifyTolerances::default();
        let get = |name: &str, default: f64| self.tolerances.get(name).copied().unwrap_or(default);
        VerifyTolerances {
            orthogonality: get("orthogonality", d.orthogonality),
            decomposition: get("decomposition", d.decomposition),
            symmetry: get("symmetry", d.symmetry),
        }
    }

    fn read_curve(&self, path: &Path) -> CliResult<DiscreteCurve> {
        let file =
            File::open(path).map_err(|e| usage(format!("cannot open {}: {e}", path.display())))?;
        let curve = io::read_curve(BufReader::new(file))?;
        if let Some(n) = self.config.n {
            if curve.n() != n {
                return Err(Error::GridMismatch {
                    expected: n,
                    found: curve.n(),
                }
                .into());
            }
        }
        Ok(curve)
    }

    /// Makes a curve constant-speed when the computation needs it:
    /// resampled with a warning, or an error under `--strict`.
    fn prepare(
        &self,
        curve: DiscreteCurve,
        needs_constant_speed: bool,
    ) -> CliResult<DiscreteCurve> {
        if !needs_constant_speed || curve.is_constant_speed(CONSTANT_SPEED_TOLERANCE) {
            return Ok(curve);
        }
        if self.strict {
            return Err(Error::NotConstantSpeed {
                deviation: curve.speed_deviation(),
                tolerance: CONSTANT_SPEED_TOLERANCE,
            }
            .into());
        }
        eprintln!(
            "warning: curve speed varies by {:.3e}; resampling to constant speed",
            curve.speed_deviation()
        );
        let resampled = curve.reparametrize_constant_speed()?;
        if !resampled.is_constant_speed(CONSTANT_SPEED_TOLERANCE) {
            return Err(Error::NotConstantSpeed {
                deviation: resampled.speed_deviation(),
                tolerance: CONSTANT_SPEED_TOLERANCE,
            }
            .into());
        }
        Ok(resampled)
    }
}

fn read_field(path: &Path, n: usize) -> CliResult<TangentField> {
    let file =
        File::open(path).map_err(|e| usage(format!("cannot open {}: {e}", path.display())))?;
    let field = io::read_tangent_field(BufReader::new(file))?;
    if field.len() != n {
        return Err(Error::GridMismatch {
            expected: n,
            found: field.len(),
        }
        .into());
    }
    Ok(field)
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| usage(format!("cannot write {}: {e}", path.display())))
}

fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| usage(format!("cannot create {}: {e}", dir.display())))
}

/// `x` with 12 significant digits.
pub fn format_sig12(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exponent = x.abs().log10().floor() as i32;
    if (-4..12).contains(&exponent) {
        format!("{:.*}", (11 - exponent) as usize, x)
    } else {
        format!("{x:.11e}")
    }
}

pub fn cmd_project(args: &ProjectArgs, settings: &Settings) -> CliResult<Vec<PathBuf>> {
    let kind = settings.splitting(&args.splitting)?;
    let curve = settings.read_curve(&args.curve)?;
    let field = read_field(&args.field, curve.n())?;
    let curve = settings.prepare(curve, kind == SplittingKind::Arc0)?;
    let splitting = kind.build(&curve)?;
    let (first, second) = splitting.project(&field)?;
    let (l1, l2) = splitting.labels();
    ensure_dir(&args.out)?;
    let mut written = Vec::new();
    for (label, part) in [(l1, &first), (l2, &second)] {
        let path = args.out.join(format!("{}.csv", label.to_lowercase()));
        let mut w = create(&path)?;
        io::write_tangent_field(part, &mut w)?;
        w.flush().map_err(Error::from)?;
        written.push(path);
    }
    Ok(written)
}

pub fn cmd_metric(args: &MetricArgs, settings: &Settings) -> CliResult<f64> {
    let recipe = settings.recipe(&args.recipe)?;
    let curve = settings.read_curve(&args.curve)?;
    let h = read_field(&args.field, curve.n())?;
    let k = match &args.field2 {
        Some(path) => read_field(path, curve.n())?,
        None => h.clone(),
    };
    let curve = settings.prepare(curve, recipe.needs_constant_speed())?;
    let metric = metric_from_operator(&curve, recipe.build(&curve)?)?;
    Ok(metric.eval(&h, &k)?)
}

pub fn cmd_verify(args: &VerifyArgs, settings: &Settings) -> CliResult<curvemetrics::MetricReport> {
    let recipe = settings.recipe(&args.recipe)?;
    let kind = settings.splitting(&args.splitting)?;
    let curve = settings.read_curve(&args.curve)?;
    let needs = recipe.needs_constant_speed() || kind == SplittingKind::Arc0;
    let curve = settings.prepare(curve, needs)?;
    let operator = recipe.build(&curve)?;
    let metric = metric_from_operator(&curve, operator)?;
    let sampling = SymmetryCheck {
        seed: settings.seed,
        ..SymmetryCheck::default()
    };
    Ok(metric.report(
        &kind.build(&curve)?,
        &settings.verify_tolerances(),
        &sampling,
    )?)
}

fn render_report(report: &curvemetrics::MetricReport, format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string(report).expect("report serializes"),
        Format::Csv => format!(
            "orthogonality_defect,decomposition_residual,symmetry_defect,min_rayleigh,pass\n{},{},{},{},{}",
            format_sig12(report.orthogonality_defect),
            format_sig12(report.decomposition_residual),
            format_sig12(report.symmetry_defect),
            format_sig12(report.min_rayleigh),
            report.pass
        ),
    }
}

pub fn cmd_geodesic(
    args: &GeodesicArgs,
    settings: &Settings,
) -> CliResult<curvemetrics::GeodesicResult> {
    let [first, second] = args.curve.as_slice() else {
        return Err(usage(format!(
            "geodesic needs exactly two --curve files, got {}",
            args.curve.len()
        )));
    };
    let m = args.m.or(settings.config.m).unwrap_or(16);
    if m < 3 {
        return Err(usage(format!("--m must be at least 3, got {m}")));
    }
    let recipe = settings.recipe(&args.recipe)?;
    let kind = settings.splitting(&args.splitting)?;
    let needs = recipe.needs_constant_speed() || kind == SplittingKind::Arc0;
    let c0 = settings.prepare(settings.read_curve(first)?, needs)?;
    let c1 = settings.prepare(settings.read_curve(second)?, needs)?;
    let defaults = GeodesicOptions::default();
    let opts = GeodesicOptions {
        tol: settings
            .tolerances
            .get("geodesic")
            .copied()
            .unwrap_or(defaults.tol),
        max_iters: args
            .max_iters
            .or(settings.config.max_iters)
            .unwrap_or(defaults.max_iters),
        splitting: kind,
        ..defaults
    };
    let result = horizontal_geodesic(&c0, &c1, m, &recipe, &opts)?;
    ensure_dir(&args.out)?;
    let mut w = create(&args.out.join("path.json"))?;
    io::write_path(&result.path, &mut w)?;
    w.flush().map_err(Error::from)?;
    let mut w = create(&args.out.join("diagnostics.csv"))?;
    io::write_diagnostics(&result.history, &mut w)?;
    w.flush().map_err(Error::from)?;
    Ok(result)
}

fn load_config() -> CliResult<Config> {
    match std::env::var_os(CONFIG_ENV) {
        Some(path) if !path.is_empty() => Config::load(Path::new(&path)),
        _ => Ok(Config::default()),
    }
}

fn dispatch(cli: Cli) -> CliResult<i32> {
    let config = load_config()?;
    match &cli.command {
        Command::Project(args) => {
            let settings = Settings::new(config, &args.common)?;
            for path in cmd_project(args, &settings)? {
                println!("{}", path.display());
            }
            Ok(exit::OK)
        }
        Command::Metric(args) => {
            let settings = Settings::new(config, &args.common)?;
            println!("{}", format_sig12(cmd_metric(args, &settings)?));
            Ok(exit::OK)
        }
        Command::Verify(args) => {
            let settings = Settings::new(config, &args.common)?;
            let report = cmd_verify(args, &settings)?;
            let text = render_report(&report, args.format);
            println!("{text}");
            if let Some(path) = &args.out {
                fs::write(path, format!("{text}\n")).map_err(Error::from)?;
            }
            Ok(if report.pass {
                exit::OK
            } else {
                exit::VERIFY_FAILED
            })
        }
        Command::Geodesic(args) => {
            let settings = Settings::new(config, &args.common)?;
            let result = cmd_geodesic(args, &settings)?;
            println!(
                "energy {} after {} iterations",
                format_sig12(result.energy()),
                result.iterations
            );
            if result.converged {
                Ok(exit::OK)
            } else {
                eprintln!("warning: iteration limit reached before convergence; path written");
                Ok(exit::NON_CONVERGENCE)
            }
        }
    }
}

/// Runs the CLI on raw arguments and returns the process exit code.
pub fn run(args: impl IntoIterator<Item = OsString>) -> i32 {
    let cli = match Cli::try_parse_from(expand_tolerance_flags(args)) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                exit::USAGE
            } else {
                exit::OK
            };
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.to_string().replace('\n', " "));
            e.exit_code()
        }
    }
}
