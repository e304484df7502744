use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use copreg_core::metrics::{
    d_metric, phi, quantile_metric_identity, regression_distance, verify_bounds, BoundParams, BoundTag, BoundTarget,
};
use copreg_core::simulation::{summarize_boxplot, ExperimentConfig};
use copreg_core::{CopulaModel, QuadratureSpec};
use serde_json::json;

use crate::config::{pick, pick_list, ConfigFile, SEED_ENV};
use crate::density::{emit_density, file_list, DensityRequest, DensitySource};
use crate::error::{CliError, CliResult};
use crate::family::parse_family;
use crate::formats::{boxplot_csv, errors_csv, num, parse_sample, rank_columns, write_file};
use crate::runner::{run_convergence_parallel, RunOptions};

const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Parser)]
#[command(name = "copreg", version, about = "Copula-based mean and quantile regression")]
struct Cli {
    /// JSON file with default values for any long flag.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Regression, quantile or kernel values on a covariate grid (CSV).
    Eval(EvalArgs),
    /// Check the sharp inequalities for one model or a pair (JSON report).
    Bounds(BoundsArgs),
    /// Distances between two models.
    Metric(MetricArgs),
    /// Convergence study of the empirical checkerboard estimators.
    Convergence(ConvergenceArgs),
    /// Empirical checkerboard density, estimated and true regression curves.
    Density(DensityArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// Family specification, e.g. "mo alpha=0.35 beta=0.65" or "grid file=g.csv".
    #[arg(long)]
    family: Option<String>,
    /// Midpoint-rule cells per axis.
    #[arg(long)]
    cells: Option<usize>,
    /// Output file (eval, bounds, metric) or directory (convergence, density).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum EvalWhat {
    Regression,
    Quantile,
    Kernel,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[command(flatten)]
    common: Common,
    /// Quantity to tabulate (default: regression).
    #[arg(long, value_enum)]
    what: Option<EvalWhat>,
    /// Grid points per covariate axis, placed at (k + 1/2) / grid.
    #[arg(long)]
    grid: Option<usize>,
    /// Quantile levels for `--what quantile`.
    #[arg(long, value_delimiter = ',')]
    tau: Vec<f64>,
    /// Response values for `--what kernel`.
    #[arg(long, value_delimiter = ',')]
    y: Vec<f64>,
}

#[derive(Debug, Args)]
struct BoundsArgs {
    #[command(flatten)]
    common: Common,
    /// Second model; switches to pairwise checks.
    #[arg(long)]
    other: Option<String>,
    /// Checks to run (default: every check that fits the number of models).
    #[arg(long, value_delimiter = ',')]
    check: Vec<String>,
    /// Norm orders.
    #[arg(long, value_delimiter = ',')]
    p: Vec<f64>,
    /// Quantile levels.
    #[arg(long, value_delimiter = ',')]
    tau: Vec<f64>,
    /// Thresholds for the survival curve.
    #[arg(long, value_delimiter = ',')]
    a: Vec<f64>,
    /// Response values for the phi check.
    #[arg(long, value_delimiter = ',')]
    y: Vec<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MetricWhat {
    Phi,
    D,
    Identity,
    Regression,
}

#[derive(Debug, Args)]
struct MetricArgs {
    #[command(flatten)]
    common: Common,
    /// Second model.
    #[arg(long)]
    other: Option<String>,
    /// Quantity to compute (default: d).
    #[arg(long, value_enum)]
    what: Option<MetricWhat>,
    /// Norm order.
    #[arg(long, value_delimiter = ',')]
    p: Vec<f64>,
    /// Response values for `--what phi`.
    #[arg(long, value_delimiter = ',')]
    y: Vec<f64>,
}

#[derive(Debug, Args)]
struct ConvergenceArgs {
    #[command(flatten)]
    common: Common,
    /// Sample sizes, strictly increasing.
    #[arg(long, value_delimiter = ',')]
    sizes: Vec<usize>,
    /// Replications per sample size.
    #[arg(long)]
    reps: Option<usize>,
    /// Resolution exponent, N = floor(n^s).
    #[arg(long)]
    s: Option<f64>,
    /// Quantile levels for the quantile estimator.
    #[arg(long, value_delimiter = ',')]
    tau: Vec<f64>,
    /// Base seed; overrides COPREG_SEED and the config file.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (results do not depend on it).
    #[arg(long)]
    threads: Option<usize>,
    /// Fill the seconds column with wall times (output is then not reproducible).
    #[arg(long)]
    timing: bool,
}

#[derive(Debug, Args)]
struct DensityArgs {
    #[command(flatten)]
    common: Common,
    /// Sample size.
    #[arg(long)]
    n: Option<usize>,
    /// Resolution exponent, N = floor(n^s).
    #[arg(long)]
    s: Option<f64>,
    /// Fixed resolution instead of floor(n^s).
    #[arg(long)]
    resolution: Option<usize>,
    /// Quantile level for the quantile step.
    #[arg(long)]
    tau: Option<f64>,
    /// Sampling seed; overrides COPREG_SEED and the config file.
    #[arg(long)]
    seed: Option<u64>,
    /// Two-column CSV sample used instead of drawing from the family.
    #[arg(long)]
    data: Option<PathBuf>,
}

struct Ctx {
    file: ConfigFile,
    env_seed: Option<String>,
}

impl Ctx {
    fn family(&self, flag: &Option<String>) -> CliResult<CopulaModel> {
        let spec = flag
            .clone()
            .or_else(|| self.file.family.clone())
            .ok_or_else(|| CliError::Usage("missing --family".into()))?;
        parse_family(&spec)
    }

    fn quad(&self, flag: Option<usize>) -> CliResult<QuadratureSpec> {
        match flag.or(self.file.cells) {
            Some(c) => Ok(QuadratureSpec::new(c)?),
            None => Ok(QuadratureSpec::default()),
        }
    }

    fn out(&self, flag: &Option<PathBuf>) -> Option<PathBuf> {
        flag.clone().or_else(|| self.file.out.clone())
    }

    fn seed(&self, flag: Option<u64>) -> CliResult<u64> {
        let base = self.file.seed_with_env(self.env_seed.as_deref())?;
        Ok(pick(flag, base, DEFAULT_SEED))
    }
}

fn emit(out: Option<&Path>, contents: &str) -> CliResult<()> {
    match out {
        Some(path) => write_file(path, contents),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(contents.as_bytes()).map_err(|e| CliError::io("<stdout>", e))
        }
    }
}

fn eval(args: EvalArgs, ctx: &Ctx) -> CliResult<()> {
    let model = ctx.family(&args.common.family)?;
    let quad = ctx.quad(args.common.cells)?;
    let what = match (args.what, ctx.file.what.as_deref()) {
        (Some(w), _) => w,
        (None, Some(raw)) => {
            EvalWhat::from_str(raw, true).map_err(|_| CliError::Config(format!("bad what `{raw}`")))?
        }
        (None, None) => EvalWhat::Regression,
    };
    let k = pick(args.grid, ctx.file.grid, 16);
    if k == 0 {
        return Err(CliError::Config("--grid must be at least 1".into()));
    }
    let axis: Vec<f64> = (0..k).map(|i| (i as f64 + 0.5) / k as f64).collect();
    let points: Vec<Vec<f64>> = match model.covariate_dim() {
        1 => axis.iter().map(|&x| vec![x]).collect(),
        _ => axis.iter().flat_map(|&a| axis.iter().map(move |&b| vec![a, b])).collect(),
    };
    let xcols = if model.covariate_dim() == 1 { "x" } else { "x1,x2" };
    let coords = |x: &[f64]| x.iter().map(|v| num(*v)).collect::<Vec<_>>().join(",");
    let mut out = String::new();
    match what {
        EvalWhat::Regression => {
            writeln!(out, "{xcols},value").unwrap();
            for x in &points {
                writeln!(out, "{},{}", coords(x), num(model.regression(x, quad))).unwrap();
            }
        }
        EvalWhat::Quantile => {
            let taus = pick_list(args.tau, ctx.file.tau.clone(), vec![0.5]);
            writeln!(out, "{xcols},tau,value").unwrap();
            for x in &points {
                for &t in &taus {
                    writeln!(out, "{},{},{}", coords(x), num(t), num(model.quantile(x, t)?)).unwrap();
                }
            }
        }
        EvalWhat::Kernel => {
            let ys = pick_list(args.y, ctx.file.y.clone(), (0..=10).map(|j| j as f64 / 10.0).collect());
            writeln!(out, "{xcols},y,value").unwrap();
            for x in &points {
                for &y in &ys {
                    writeln!(out, "{},{},{}", coords(x), num(y), num(model.kernel_cdf(x, y))).unwrap();
                }
            }
        }
    }
    emit(ctx.out(&args.common.out).as_deref(), &out)
}

fn bounds(args: BoundsArgs, ctx: &Ctx) -> CliResult<()> {
    let model = ctx.family(&args.common.family)?;
    let other = args.other.or_else(|| ctx.file.other.clone()).map(|s| parse_family(&s)).transpose()?;
    let defaults = BoundParams::default();
    let params = BoundParams {
        p_list: pick_list(args.p, ctx.file.p.clone(), defaults.p_list),
        a_grid: pick_list(args.a, ctx.file.a.clone(), defaults.a_grid),
        tau_list: pick_list(args.tau, ctx.file.tau.clone(), defaults.tau_list),
        y_grid: pick_list(args.y, ctx.file.y.clone(), defaults.y_grid),
        quad: ctx.quad(args.common.cells)?,
    };
    let pairwise = other.is_some();
    let names = pick_list(args.check, ctx.file.check.clone(), Vec::new());
    let tags: Vec<BoundTag> = if names.is_empty() {
        BoundTag::ALL.into_iter().filter(|t| t.is_pairwise() == pairwise).collect()
    } else {
        names
            .iter()
            .map(|n| n.parse::<BoundTag>().map_err(|e| CliError::Usage(e.to_string())))
            .collect::<CliResult<_>>()?
    };
    let target = match &other {
        Some(o) => BoundTarget::Pair(&model, o),
        None => BoundTarget::Single(&model),
    };
    let report = verify_bounds(target, &tags, &params).map_err(|e| match e {
        copreg_core::Error::Precondition(msg) => CliError::Usage(msg),
        other => CliError::Core(other),
    })?;
    let json = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    emit(ctx.out(&args.common.out).as_deref(), &json)
}

fn metric(args: MetricArgs, ctx: &Ctx) -> CliResult<()> {
    let c1 = ctx.family(&args.common.family)?;
    let spec =
        args.other.or_else(|| ctx.file.other.clone()).ok_or_else(|| CliError::Usage("metric needs --other".into()))?;
    let c2 = parse_family(&spec)?;
    let quad = ctx.quad(args.common.cells)?;
    let what = match (args.what, ctx.file.what.as_deref()) {
        (Some(w), _) => w,
        (None, Some(raw)) => {
            MetricWhat::from_str(raw, true).map_err(|_| CliError::Config(format!("bad what `{raw}`")))?
        }
        (None, None) => MetricWhat::D,
    };
    let p = pick_list(args.p, ctx.file.p.clone(), vec![1.0]);
    let p = *p.first().expect("non-empty");
    let out = match what {
        MetricWhat::Phi => {
            let ys = pick_list(args.y, ctx.file.y.clone(), (0..=100).map(|j| j as f64 / 100.0).collect());
            let mut csv = String::from("y,phi\n");
            for y in ys {
                writeln!(csv, "{},{}", num(y), num(phi(&c1, &c2, y, p, quad)?)).unwrap();
            }
            csv
        }
        MetricWhat::D => json_line(json!({ "metric": "d", "p": p, "value": d_metric(&c1, &c2, p, quad)? })),
        MetricWhat::Regression => json_line(
            json!({ "metric": "regression_distance", "p": p, "value": regression_distance(&c1, &c2, p, quad)? }),
        ),
        MetricWhat::Identity => {
            let (lhs, rhs) = quantile_metric_identity(&c1, &c2, quad)?;
            json_line(json!({ "metric": "quantile_identity", "lhs": lhs, "rhs": rhs, "difference": lhs - rhs }))
        }
    };
    emit(ctx.out(&args.common.out).as_deref(), &out)
}

fn json_line(v: serde_json::Value) -> String {
    serde_json::to_string_pretty(&v).expect("value serializes") + "\n"
}

fn convergence(args: ConvergenceArgs, ctx: &Ctx) -> CliResult<()> {
    let f = &ctx.file;
    let config = ExperimentConfig {
        family: ctx.family(&args.common.family)?,
        sizes: pick_list(args.sizes, f.sizes.clone(), vec![100, 1000, 10_000]),
        reps: pick(args.reps, f.reps, 50),
        s: pick(args.s, f.s, 0.4),
        tau_list: pick_list(args.tau, f.tau.clone(), vec![0.2]),
        seed: ctx.seed(args.seed)?,
        quad: ctx.quad(args.common.cells)?,
    };
    let opts = RunOptions { threads: args.threads.or(f.threads), timing: args.timing || f.timing.unwrap_or(false) };
    let table = run_convergence_parallel(&config, opts)?;
    let summary = summarize_boxplot(&table)?;
    let dir = ctx.out(&args.common.out).unwrap_or_else(|| PathBuf::from("."));
    write_file(&dir.join("errors.csv"), &errors_csv(&table))?;
    write_file(&dir.join("boxplot.csv"), &boxplot_csv(&summary))?;
    emit(None, &format!("{}\n{}\n", dir.join("errors.csv").display(), dir.join("boxplot.csv").display()))
}

fn density(args: DensityArgs, ctx: &Ctx) -> CliResult<()> {
    let f = &ctx.file;
    let family_given = args.common.family.is_some() || f.family.is_some();
    let source = match args.data.clone().or_else(|| f.data.clone()) {
        Some(path) => {
            let model = if family_given { Some(ctx.family(&args.common.family)?) } else { None };
            DensitySource::Data { ranked: rank_columns(&parse_sample(&path)?)?, model }
        }
        None => DensitySource::Model {
            model: ctx.family(&args.common.family)?,
            n: pick(args.n, f.n, 10_000),
            seed: ctx.seed(args.seed)?,
        },
    };
    let tau = args.tau.or_else(|| f.tau.as_ref().and_then(|t| t.first().copied())).unwrap_or(0.2);
    let req = DensityRequest {
        source,
        s: pick(args.s, f.s, 0.4),
        resolution: args.resolution.or(f.resolution),
        tau,
        quad: ctx.quad(args.common.cells)?,
        out: ctx.out(&args.common.out).unwrap_or_else(|| PathBuf::from(".")),
    };
    if !(req.tau > 0.0 && req.tau <= 1.0) {
        return Err(CliError::Config("--tau must lie in (0, 1]".into()));
    }
    let written = emit_density(&req)?;
    emit(None, &file_list(&written))
}

fn dispatch(cli: Cli, env_seed: Option<String>) -> CliResult<()> {
    let file = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let ctx = Ctx { file, env_seed };
    match cli.command {
        Command::Eval(a) => eval(a, &ctx),
        Command::Bounds(a) => bounds(a, &ctx),
        Command::Metric(a) => metric(a, &ctx),
        Command::Convergence(a) => convergence(a, &ctx),
        Command::Density(a) => density(a, &ctx),
    }
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(cli, std::env::var(SEED_ENV).ok()) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("copreg: {e}");
            e.exit_code()
        }
    }
}
