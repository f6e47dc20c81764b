//! Command-line frontend: tests, intervals and group tests on CSV data, and
//! simulation sweeps.

use std::fmt;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;
use nalgebra::DVector;
use serde::Serialize;
use serde_json::json;

use descore::bootstrap::group_test;
use descore::decorrelate::{build_decorrelated_fit, DecorrelateConfig, DecorrelatedFit, DirectionMethod};
use descore::inference::{one_step, sandwich_test, score_test, score_test_unknown_sigma, Alternative, VarianceKind};
use descore::model::{Dataset, ModelFamily};
use descore::penalty::PenaltyConfig;
use descore::sim::{
    generate_dataset, rep_seed, run_size_power, select_lambda, select_lambda_prime, BetaPattern, LambdaPolicy,
    LambdaPrimePolicy, NoiseModel, SimConfig, SimulationReport, TestVariant,
};

pub mod io;
pub mod presets;

pub use io::{read_dataset, write_dataset_csv};
pub use presets::Preset;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Numerical(descore::error::Error),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(_) => EXIT_DATA,
            CliError::Numerical(_) => EXIT_NUMERICAL,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Data(m) => write!(f, "data error: {m}"),
            CliError::Numerical(e) => write!(f, "{}: {e}", e.name()),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<descore::error::Error> for CliError {
    fn from(e: descore::error::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e)
        } else {
            CliError::Data(format!("{}: {e}", e.name()))
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "descore", version, about = "Decorrelated score inference for sparse high-dimensional regression")]
pub struct Cli {
    /// Worker threads for parallel work.
    #[arg(long, global = true, env = "DESCORE_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Score test of one coefficient. Prints a JSON object.
    Test(TestArgs),
    /// One-step estimate and confidence interval. Prints a JSON object.
    Ci(CiArgs),
    /// Multiplier-bootstrap test of several coefficients. Prints a JSON object.
    GroupTest(GroupArgs),
    /// Monte Carlo size/power sweep. Prints CSV, one row per grid point and test.
    Simulate(SimArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum FamilyArg {
    /// Linear model, noise variance estimated.
    Gaussian,
    /// Linear model with the variance given by --sigma2.
    GaussianKnown,
    Logistic,
    Poisson,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum MethodArg {
    Dantzig,
    LassoQuadratic,
    LassoResidual,
}

impl From<MethodArg> for DirectionMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Dantzig => DirectionMethod::Dantzig,
            MethodArg::LassoQuadratic => DirectionMethod::LassoQuadratic,
            MethodArg::LassoResidual => DirectionMethod::LassoResidual,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum AlternativeArg {
    TwoSided,
    Greater,
    Less,
}

impl From<AlternativeArg> for Alternative {
    fn from(a: AlternativeArg) -> Self {
        match a {
            AlternativeArg::TwoSided => Alternative::TwoSided,
            AlternativeArg::Greater => Alternative::Greater,
            AlternativeArg::Less => Alternative::Less,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarianceArg {
    /// Plug-in σ for `gaussian`, model information otherwise.
    Auto,
    Model,
    Sandwich,
}

/// Tuning shared by the commands that fit user data.
#[derive(Args, Debug, Clone)]
pub struct FitArgs {
    /// Headered, comma-separated numeric file.
    #[arg(long)]
    pub data: PathBuf,
    /// Response column (name or 0-based index).
    #[arg(long)]
    pub response: String,
    #[arg(long, value_enum, default_value_t = FamilyArg::Gaussian)]
    pub family: FamilyArg,
    /// Noise variance for `gaussian-known`.
    #[arg(long)]
    pub sigma2: Option<f64>,
    /// How the decorrelation direction is estimated.
    #[arg(long, value_enum, default_value_t = MethodArg::LassoQuadratic)]
    pub method: MethodArg,
    /// Fixed nuisance penalty; chosen by cross-validation when absent.
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
    /// Fixed direction penalty; `c·√(ln d / n)` when absent.
    #[arg(long)]
    pub lambda_prime: Option<f64>,
    #[arg(long, default_value_t = 0.5)]
    pub lambda_prime_c: f64,
    /// Choose the direction penalty by cross-validation instead of the rule.
    #[arg(long, conflicts_with = "lambda_prime")]
    pub lambda_prime_cv: bool,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Output file, written atomically; stdout when absent.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct TestArgs {
    #[command(flatten)]
    pub fit: FitArgs,
    /// Tested column (name or 0-based index).
    #[arg(long)]
    pub interest: String,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value_t = AlternativeArg::TwoSided)]
    pub alternative: AlternativeArg,
    #[arg(long, value_enum, default_value_t = VarianceArg::Auto)]
    pub variance: VarianceArg,
    /// Null value of the tested coefficient.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub theta0: f64,
}

#[derive(Args, Debug)]
pub struct CiArgs {
    #[command(flatten)]
    pub fit: FitArgs,
    #[arg(long)]
    pub interest: String,
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
}

#[derive(Args, Debug)]
pub struct GroupArgs {
    #[command(flatten)]
    pub fit: FitArgs,
    /// Tested columns, comma-separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub interest: Vec<String>,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Bootstrap draws.
    #[arg(long, short = 'B', default_value_t = descore::bootstrap::DEFAULT_BOOTSTRAP_DRAWS)]
    pub draws: usize,
    /// Standardize each coordinate by its estimated information.
    #[arg(long)]
    pub rescaled: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum SimFamilyArg {
    /// Linear model with N(0, 1) noise.
    Linear,
    Logistic,
    Poisson,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum PatternArg {
    /// Support coefficients all 1.
    Dirac,
    /// Support coefficients uniform on [0, 2].
    Uniform,
}

impl From<PatternArg> for BetaPattern {
    fn from(p: PatternArg) -> Self {
        match p {
            PatternArg::Dirac => BetaPattern::Dirac,
            PatternArg::Uniform => BetaPattern::UniformRange { lo: 0.0, hi: 2.0 },
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum VariantArg {
    ModelInfo,
    PluginSigma,
    Sandwich,
    Bootstrap,
    BootstrapRescaled,
}

#[derive(Args, Debug)]
pub struct SimArgs {
    /// Start from a published configuration grid; other flags override it.
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Dimensions, comma-separated.
    #[arg(long, value_delimiter = ',')]
    pub d: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    pub rho: Vec<f64>,
    #[arg(long, value_enum, value_delimiter = ',')]
    pub pattern: Vec<PatternArg>,
    /// Support sizes, comma-separated.
    #[arg(long, value_delimiter = ',')]
    pub s: Vec<usize>,
    #[arg(long, value_enum)]
    pub family: Option<SimFamilyArg>,
    /// True values of the tested coefficients, comma-separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub theta: Vec<f64>,
    /// Number of tested coefficients.
    #[arg(long)]
    pub d0: Option<usize>,
    /// First index of the nuisance support.
    #[arg(long)]
    pub support_offset: Option<usize>,
    /// Noise scale 0.5 + |Q_ij| for this column j.
    #[arg(long)]
    pub heteroscedastic: Option<usize>,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = MethodArg::LassoQuadratic)]
    pub method: MethodArg,
    /// Fixed nuisance penalty; cross-validated when absent.
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
    #[arg(long)]
    pub lambda_prime: Option<f64>,
    #[arg(long, default_value_t = 0.5)]
    pub lambda_prime_c: f64,
    #[arg(long, conflicts_with = "lambda_prime")]
    pub lambda_prime_cv: bool,
    /// Tests to run on every replication, comma-separated.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub variants: Vec<VariantArg>,
    /// Bootstrap draws for the bootstrap variants.
    #[arg(long, short = 'B', default_value_t = descore::bootstrap::DEFAULT_BOOTSTRAP_DRAWS)]
    pub draws: usize,
    /// Also record one-step interval coverage.
    #[arg(long)]
    pub ci: bool,
    /// Write replication 0 of the first grid point as CSV.
    #[arg(long)]
    pub write_dataset: Option<PathBuf>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

/// Parses `argv` (program name first), runs the command and returns the exit
/// code. Diagnostics go to stderr.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).try_init();
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("descore: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: Cli) -> Result<(), CliError> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    match cli.threads {
        Some(0) => return Err(CliError::Usage("--threads must be at least 1".into())),
        Some(t) => pool = pool.num_threads(t),
        None => {}
    }
    let pool = pool.build().map_err(|e| CliError::Io(e.to_string()))?;
    pool.install(|| match cli.command {
        Command::Test(a) => cmd_test(&a),
        Command::Ci(a) => cmd_ci(&a),
        Command::GroupTest(a) => cmd_group(&a),
        Command::Simulate(a) => cmd_simulate(&a),
    })
}

fn check_unit_open(name: &str, x: f64) -> Result<(), CliError> {
    if x > 0.0 && x < 1.0 {
        Ok(())
    } else {
        Err(CliError::Usage(format!("{name} must lie in (0, 1), got {x}")))
    }
}

fn check_nonneg(name: &str, x: Option<f64>) -> Result<(), CliError> {
    match x {
        Some(v) if !(v >= 0.0 && v.is_finite()) => Err(CliError::Usage(format!("{name} must be finite and >= 0, got {v}"))),
        _ => Ok(()),
    }
}

fn lambda_policy(lambda: Option<f64>, folds: usize) -> Result<LambdaPolicy, CliError> {
    check_nonneg("--lambda", lambda)?;
    if lambda.is_none() && folds < 2 {
        return Err(CliError::Usage(format!("--folds must be at least 2, got {folds}")));
    }
    Ok(lambda.map_or(LambdaPolicy::CrossValidated { folds }, LambdaPolicy::Fixed))
}

fn lambda_prime_policy(fixed: Option<f64>, c: f64, cv: bool, folds: usize) -> Result<LambdaPrimePolicy, CliError> {
    check_nonneg("--lambda-prime", fixed)?;
    check_nonneg("--lambda-prime-c", Some(c))?;
    Ok(match (fixed, cv) {
        (Some(l), _) => LambdaPrimePolicy::Fixed(l),
        (None, true) => LambdaPrimePolicy::CrossValidated { folds },
        (None, false) => LambdaPrimePolicy::Rule { c },
    })
}

fn family_of(a: &FitArgs) -> Result<ModelFamily, CliError> {
    match (a.family, a.sigma2) {
        (FamilyArg::GaussianKnown, Some(s2)) if s2 > 0.0 && s2.is_finite() => Ok(ModelFamily::GaussianKnownVar { sigma2: s2 }),
        (FamilyArg::GaussianKnown, Some(s2)) => Err(CliError::Usage(format!("--sigma2 must be positive, got {s2}"))),
        (FamilyArg::GaussianKnown, None) => Err(CliError::Usage("gaussian-known requires --sigma2".into())),
        (_, Some(_)) => Err(CliError::Usage("--sigma2 applies only to gaussian-known".into())),
        (FamilyArg::Gaussian, None) => Ok(ModelFamily::GaussianUnknownVar),
        (FamilyArg::Logistic, None) => Ok(ModelFamily::Logistic),
        (FamilyArg::Poisson, None) => Ok(ModelFamily::Poisson),
    }
}

struct Fitted {
    data: Dataset,
    fit: DecorrelatedFit,
    lambda: f64,
    lambda_prime: f64,
}

fn load_and_fit(a: &FitArgs, interest: &[String], theta0: f64) -> Result<Fitted, CliError> {
    let family = family_of(a)?;
    let lp = lambda_policy(a.lambda, a.folds)?;
    let lpp = lambda_prime_policy(a.lambda_prime, a.lambda_prime_c, a.lambda_prime_cv, a.folds)?;
    let data = read_dataset(&a.data, &a.response, interest)?;
    if lpp == (LambdaPrimePolicy::CrossValidated { folds: a.folds }) && data.d0() > 1 {
        return Err(CliError::Usage("--lambda-prime-cv supports a single interest column".into()));
    }
    let lambda = select_lambda(lp, &data, &family, a.seed)?;
    let lambda_prime = select_lambda_prime(lpp, &data, a.seed)?;
    info!("lambda = {lambda:.6}, lambda' = {lambda_prime:.6}");
    let mut cfg = DecorrelateConfig::new(PenaltyConfig::l1(lambda), lambda_prime);
    cfg.method = a.method.into();
    cfg.theta_null = Some(DVector::from_element(data.d0(), theta0));
    let fit = build_decorrelated_fit(&data, &family, &cfg)?;
    Ok(Fitted { data, fit, lambda, lambda_prime })
}

fn variance_label(k: VarianceKind) -> &'static str {
    match k {
        VarianceKind::ModelInfo => "model_info",
        VarianceKind::PluginSigma => "plugin_sigma",
        VarianceKind::Sandwich => "sandwich",
        VarianceKind::GeneralizedSandwich => "generalized_sandwich",
    }
}

fn write_json(path: Option<&std::path::Path>, value: &serde_json::Value) -> Result<(), CliError> {
    io::write_output(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        writeln!(w)
    })
}

fn cmd_test(a: &TestArgs) -> Result<(), CliError> {
    check_unit_open("--alpha", a.alpha)?;
    if !a.theta0.is_finite() {
        return Err(CliError::Usage("--theta0 must be finite".into()));
    }
    let unknown = a.fit.family == FamilyArg::Gaussian;
    if unknown && a.variance == VarianceArg::Model {
        return Err(CliError::Usage("model-based variance needs a known-variance family; use gaussian-known".into()));
    }
    let f = load_and_fit(&a.fit, std::slice::from_ref(&a.interest), a.theta0)?;
    let alt = a.alternative.into();
    let mut sigma2 = None;
    let r = match a.variance {
        VarianceArg::Sandwich => sandwich_test(&f.data, &f.fit, a.alpha, alt)?,
        VarianceArg::Auto if unknown => {
            let (r, s2) = score_test_unknown_sigma(&f.data, &f.fit, a.alpha, alt)?;
            sigma2 = Some(s2);
            r
        }
        _ => score_test(&f.fit, a.alpha, alt)?,
    };
    let out = json!({
        "statistic": r.statistic,
        "p_value": r.p_value,
        "reject": r.reject,
        "variance_kind": variance_label(r.variance_kind),
        "lambda": f.lambda,
        "lambda_prime": f.lambda_prime,
        "alpha": a.alpha,
        "alternative": a.alternative.to_possible_value().map(|v| v.get_name().to_string()),
        "theta0": a.theta0,
        "sigma2_hat": sigma2,
        "n": f.data.n(),
        "d": f.data.d(),
    });
    write_json(a.fit.output.as_deref(), &out)
}

fn cmd_ci(a: &CiArgs) -> Result<(), CliError> {
    check_unit_open("--level", a.level)?;
    let f = load_and_fit(&a.fit, std::slice::from_ref(&a.interest), 0.0)?;
    let est = one_step(&f.data, &f.fit, a.level)?;
    let out = json!({
        "theta_hat": est.theta_hat,
        "theta_tilde": est.theta_tilde,
        "std_err": est.std_err,
        "ci_lower": est.ci_lower,
        "ci_upper": est.ci_upper,
        "level": est.level,
        "lambda": f.lambda,
        "lambda_prime": f.lambda_prime,
        "n": f.data.n(),
        "d": f.data.d(),
    });
    write_json(a.fit.output.as_deref(), &out)
}

fn cmd_group(a: &GroupArgs) -> Result<(), CliError> {
    check_unit_open("--alpha", a.alpha)?;
    if a.draws == 0 {
        return Err(CliError::Usage("--draws must be at least 1".into()));
    }
    let f = load_and_fit(&a.fit, &a.interest, 0.0)?;
    let r = group_test(&f.fit, a.alpha, a.draws, a.fit.seed, a.rescaled)?;
    let out = json!({
        "t_stat": r.t_stat,
        "critical_value": r.critical_value,
        "p_value": r.p_value_boot,
        "reject": r.reject,
        "draws": r.b,
        "rescaled": r.rescaled,
        "per_coordinate": r.per_coordinate.iter().copied().collect::<Vec<f64>>(),
        "d0": f.data.d0(),
        "lambda": f.lambda,
        "lambda_prime": f.lambda_prime,
        "n": f.data.n(),
        "d": f.data.d(),
    });
    write_json(a.fit.output.as_deref(), &out)
}

/// One CSV row of a sweep.
#[derive(Debug, Serialize)]
struct SweepRow {
    preset: String,
    family: String,
    n: usize,
    d: usize,
    rho: f64,
    s: usize,
    pattern: String,
    theta: f64,
    d0: usize,
    reps: usize,
    alpha: f64,
    seed: u64,
    method: String,
    variant: String,
    rejections: usize,
    completed: usize,
    failures: usize,
    rejection_rate: f64,
    mc_se: f64,
    coverage_rate: Option<f64>,
    mean_ci_width: Option<f64>,
    mean_lambda: f64,
    mean_lambda_prime: f64,
    wall_time_secs: f64,
}

fn sweep_rows(preset: &str, report: &SimulationReport) -> Vec<SweepRow> {
    let c = &report.config;
    let family = match c.family {
        ModelFamily::Logistic => "logistic",
        ModelFamily::Poisson => "poisson",
        _ => "linear",
    };
    let pattern = match c.pattern {
        BetaPattern::Dirac => "dirac".to_string(),
        BetaPattern::UniformRange { lo, hi } => format!("uniform[{lo},{hi}]"),
    };
    let method = match c.method {
        DirectionMethod::Dantzig => "dantzig",
        DirectionMethod::LassoQuadratic => "lasso_quadratic",
        DirectionMethod::LassoResidual => "lasso_residual",
    };
    report
        .rates
        .iter()
        .map(|v| SweepRow {
            preset: preset.to_string(),
            family: family.to_string(),
            n: c.n,
            d: c.d,
            rho: c.rho,
            s: c.s,
            pattern: pattern.clone(),
            theta: c.theta_true,
            d0: c.d0,
            reps: c.reps,
            alpha: c.alpha,
            seed: c.seed,
            method: method.to_string(),
            variant: v.variant.label(),
            rejections: v.rejections,
            completed: report.completed,
            failures: report.failure_count,
            rejection_rate: v.rate,
            mc_se: v.mc_se,
            coverage_rate: report.coverage_rate,
            mean_ci_width: report.mean_ci_width,
            mean_lambda: report.mean_lambda,
            mean_lambda_prime: report.mean_lambda_prime,
            wall_time_secs: report.wall_time_secs,
        })
        .collect()
}

/// Expands the preset and overrides into one config per grid point.
pub fn sweep_configs(a: &SimArgs) -> Result<Vec<SimConfig>, CliError> {
    let grid = presets::grid(a.preset);
    let pick = |given: &[f64], default: Vec<f64>| if given.is_empty() { default } else { given.to_vec() };
    let ds = if a.d.is_empty() { grid.d } else { a.d.clone() };
    let ss = if a.s.is_empty() { grid.s } else { a.s.clone() };
    let rhos = pick(&a.rho, grid.rho);
    let thetas = pick(&a.theta, grid.theta);
    let patterns: Vec<BetaPattern> =
        if a.pattern.is_empty() { grid.pattern } else { a.pattern.iter().map(|&p| p.into()).collect() };
    let family = match a.family {
        None => grid.family,
        Some(SimFamilyArg::Linear) => ModelFamily::GaussianKnownVar { sigma2: 1.0 },
        Some(SimFamilyArg::Logistic) => ModelFamily::Logistic,
        Some(SimFamilyArg::Poisson) => ModelFamily::Poisson,
    };
    let gaussian = matches!(family, ModelFamily::GaussianKnownVar { .. });
    let variants: Vec<TestVariant> = if a.variants.is_empty() {
        vec![TestVariant::ModelInfo]
    } else {
        a.variants
            .iter()
            .map(|v| match v {
                VariantArg::ModelInfo => TestVariant::ModelInfo,
                VariantArg::PluginSigma => TestVariant::PluginSigma,
                VariantArg::Sandwich => TestVariant::Sandwich,
                VariantArg::Bootstrap => TestVariant::Bootstrap { b: a.draws, rescaled: false },
                VariantArg::BootstrapRescaled => TestVariant::Bootstrap { b: a.draws, rescaled: true },
            })
            .collect()
    };
    if !gaussian && variants.contains(&TestVariant::PluginSigma) {
        return Err(CliError::Usage("plugin-sigma applies only to the linear family".into()));
    }
    if !gaussian && a.heteroscedastic.is_some() {
        return Err(CliError::Usage("--heteroscedastic applies only to the linear family".into()));
    }
    let base = SimConfig::default();
    let mut out = Vec::new();
    for &d in &ds {
        for &rho in &rhos {
            for &pattern in &patterns {
                for &s in &ss {
                    for &theta in &thetas {
                        let cfg = SimConfig {
                            n: a.n.unwrap_or(base.n),
                            d,
                            rho,
                            s,
                            pattern,
                            family,
                            theta_true: theta,
                            d0: a.d0.unwrap_or(base.d0),
                            support_offset: a.support_offset.unwrap_or(base.support_offset),
                            noise: a.heteroscedastic.map_or(NoiseModel::Standard, |column| NoiseModel::Heteroscedastic { column }),
                            reps: a.reps.unwrap_or(grid.reps),
                            alpha: a.alpha.unwrap_or(base.alpha),
                            seed: a.seed,
                            method: a.method.into(),
                            lambda: lambda_policy(a.lambda, a.folds)?,
                            lambda_prime: lambda_prime_policy(a.lambda_prime, a.lambda_prime_c, a.lambda_prime_cv, a.folds)?,
                            variants: variants.clone(),
                            confidence_interval: a.ci,
                        };
                        cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
                        out.push(cfg);
                    }
                }
            }
        }
    }
    Ok(out)
}

fn cmd_simulate(a: &SimArgs) -> Result<(), CliError> {
    let configs = sweep_configs(a)?;
    let preset = a.preset.map_or("none".to_string(), |p| p.name().to_string());
    if let Some(path) = &a.write_dataset {
        let (data, _) = generate_dataset(&configs[0], rep_seed(a.seed, 0))?;
        io::write_output(Some(path), |w| write_dataset_csv(w, &data))?;
    }
    let mut rows = Vec::new();
    for (k, cfg) in configs.iter().enumerate() {
        info!("grid point {}/{}: d = {}, rho = {}, s = {}, theta = {}", k + 1, configs.len(), cfg.d, cfg.rho, cfg.s, cfg.theta_true);
        let report = run_size_power(cfg)?;
        rows.extend(sweep_rows(&preset, &report));
    }
    io::write_output(a.output.as_deref(), |w| {
        let mut csv = csv::Writer::from_writer(w);
        for r in &rows {
            csv.serialize(r)?;
        }
        csv.flush()
    })
}
