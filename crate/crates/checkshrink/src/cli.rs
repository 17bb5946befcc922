//! The `checkshrink` command line.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use checkshrink_core::are::{make_tuning_with, AreTuning};
use checkshrink_core::check_loss::predict_class;
use checkshrink_core::competitors::{are_grid, are_select, ebml, ebmm, oracle_select, unshrunken, Objective};
use checkshrink_core::experiments::newsvendor::{default_comparisons, default_methods};
use checkshrink_core::experiments::{
    are_curve, risk_curve, Case3, CustomScenario, EvalReport, ItemSource, MethodSpec, NewsvendorConfig, Scenario,
    ScenarioSpec,
};
use checkshrink_core::grids::Grid;
use checkshrink_core::stats::mean;
use checkshrink_core::{ClassTag, HyperParams, ProblemInstance, RngSeed, Tau, TruthInstance, TuningConfig};

use crate::io::{self, DataError};
use crate::output::{to_json, write_output};
use crate::parallel::{run_scenario_parallel, thread_count};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "checkshrink", version, about = "Shrinkage prediction under check loss")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Select hyperparameters on a data file and print the predictions.
    Estimate(EstimateArgs),
    /// Run a simulation scenario and report inefficiencies.
    Simulate(SimulateArgs),
    /// Closed-form risk against the shrinkage factor.
    RiskCurve(RiskCurveArgs),
    /// ARE of a data file against tau.
    AreCurve(AreCurveArgs),
    /// Newsvendor study on synthetic or supplied demand.
    Newsvendor(NewsvendorArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ClassArg {
    Origin,
    GrandMean,
    DataDriven,
}

impl From<ClassArg> for ClassTag {
    fn from(c: ClassArg) -> Self {
        match c {
            ClassArg::Origin => ClassTag::Origin,
            ClassArg::GrandMean => ClassTag::GrandMean,
            ClassArg::DataDriven => ClassTag::DataDriven,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScenarioArg {
    Example1,
    Example2,
    Example3,
    Custom,
}

fn parse_method(s: &str) -> Result<MethodSpec, String> {
    MethodSpec::parse(s).ok_or_else(|| {
        format!("unknown method `{s}`; one of are, are-g, are-d, ebml, ebmm, oracle-risk, oracle-loss, unshrunken")
    })
}

fn parse_pair(s: &str) -> Result<(MethodSpec, MethodSpec), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("expected METHOD:BASELINE, got `{s}`"))?;
    Ok((parse_method(a)?, parse_method(b)?))
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    /// Output file (written atomically); stdout when omitted.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Output format [default: json for reports, csv for curves].
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Args, Debug, Clone)]
pub struct TuningArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Auxiliary noise draws averaged per coordinate.
    #[arg(long, default_value_t = 5)]
    pub rb_reps: usize,
    /// Fraction of the admissible threshold bound.
    #[arg(long, default_value_t = 0.5)]
    pub rho: f64,
    /// Threshold constant where the bound is not positive.
    #[arg(long, default_value_t = 0.8)]
    pub fallback_gamma: f64,
    /// Minimum number of points of the ARE grid.
    #[arg(long)]
    pub grid_size: Option<usize>,
}

impl TuningArgs {
    fn config(&self) -> Result<TuningConfig, CliError> {
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(CliError::Usage(format!("--rho must lie in (0, 1), got {}", self.rho)));
        }
        if self.rb_reps == 0 {
            return Err(CliError::Usage("--rb-reps must be at least 1".into()));
        }
        if self.fallback_gamma.is_nan() || self.fallback_gamma <= 0.0 {
            return Err(CliError::Usage("--fallback-gamma must be positive".into()));
        }
        if self.grid_size.is_some_and(|g| g < 2) {
            return Err(CliError::Usage("--grid-size must be at least 2".into()));
        }
        Ok(TuningConfig {
            rho: self.rho,
            rb_reps: self.rb_reps,
            seed: RngSeed::new(self.seed),
            fallback_gamma: self.fallback_gamma,
        })
    }
}

#[derive(Args, Debug)]
pub struct EstimateArgs {
    /// CSV with columns x,sigma_p,sigma_f,b,h and optionally theta.
    #[arg(long, short)]
    pub input: PathBuf,
    /// Selection method; oracles need a theta column.
    #[arg(long, default_value = "are", value_parser = parse_method)]
    pub method: MethodSpec,
    #[arg(long, value_enum, default_value_t = ClassArg::Origin)]
    pub class: ClassArg,
    #[command(flatten)]
    pub tuning: TuningArgs,
    /// Size of the oracle grid.
    #[arg(long, default_value_t = 2001)]
    pub fine_points: usize,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[arg(value_enum)]
    pub scenario: ScenarioArg,
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    #[arg(long, default_value_t = 50)]
    pub reps: usize,
    /// sigma_p / sigma_f for example2.
    #[arg(long, default_value_t = 1.0 / 3.0)]
    pub sigma_ratio: f64,
    /// Design of example3 (I to VI).
    #[arg(long, default_value = "I")]
    pub case: String,
    /// Fixed design for `custom`: x,sigma_p,sigma_f,b,h,theta (x is ignored).
    #[arg(long, short)]
    pub input: Option<PathBuf>,
    /// Comma-separated methods [default: the class's ARE, ebml, ebmm, oracle-risk].
    #[arg(long, value_delimiter = ',', value_parser = parse_method)]
    pub methods: Vec<MethodSpec>,
    /// Class of the non-ARE methods [default: grand-mean for example3, origin otherwise].
    #[arg(long, value_enum)]
    pub class: Option<ClassArg>,
    /// Relative-efficiency comparison METHOD:BASELINE (repeatable).
    #[arg(long = "compare", value_parser = parse_pair)]
    pub compare: Vec<(MethodSpec, MethodSpec)>,
    /// Size of the oracle grid in tau.
    #[arg(long, default_value_t = 2001)]
    pub fine_points: usize,
    /// Size of the oracle grid in eta (data-driven class).
    #[arg(long, default_value_t = 201)]
    pub fine_eta_points: usize,
    #[command(flatten)]
    pub tuning: TuningArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Debug)]
pub struct RiskCurveArgs {
    /// True means (comma-separated; one per coordinate).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
    pub theta: Vec<f64>,
    /// Underestimation weights (one value or one per coordinate).
    #[arg(long, value_delimiter = ',', required = true)]
    pub b: Vec<f64>,
    /// Overestimation weights [default: 1 - b].
    #[arg(long, value_delimiter = ',')]
    pub h: Vec<f64>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub sigma_p: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub sigma_f: Vec<f64>,
    #[arg(long, value_enum, default_value_t = ClassArg::Origin)]
    pub class: ClassArg,
    /// Shrinkage location for the data-driven class.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub eta: f64,
    #[arg(long, default_value_t = 200)]
    pub resolution: usize,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Debug)]
pub struct AreCurveArgs {
    /// CSV with columns x,sigma_p,sigma_f,b,h.
    #[arg(long, short)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = ClassArg::Origin)]
    pub class: ClassArg,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub eta: f64,
    /// Number of equispaced shrinkage factors in [0, 1].
    #[arg(long, default_value_t = 101)]
    pub resolution: usize,
    #[command(flatten)]
    pub tuning: TuningArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Debug)]
pub struct NewsvendorArgs {
    /// CSV with columns theta,price; synthetic items when omitted.
    #[arg(long, short)]
    pub input: Option<PathBuf>,
    /// Number of synthetic items.
    #[arg(long, default_value_t = 200)]
    pub items: usize,
    /// Share of high-volume synthetic items.
    #[arg(long, default_value_t = 0.25)]
    pub high_fraction: f64,
    /// Standard deviation of monthly demand (required; no default).
    #[arg(long)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0.15)]
    pub markup: f64,
    /// Annual cost of capital.
    #[arg(long, default_value_t = 0.15)]
    pub capital_rate: f64,
    /// Extra shortage cost for high-volume items.
    #[arg(long, default_value_t = 0.0)]
    pub flat_cost: f64,
    #[arg(long, default_value_t = 50)]
    pub reps: usize,
    #[arg(long, value_enum, default_value_t = ClassArg::GrandMean)]
    pub class: ClassArg,
    /// Comma-separated methods [default: unshrunken, ebml, the class's ARE].
    #[arg(long, value_delimiter = ',', value_parser = parse_method)]
    pub methods: Vec<MethodSpec>,
    /// Extra comparison METHOD:BASELINE (repeatable).
    #[arg(long = "compare", value_parser = parse_pair)]
    pub compare: Vec<(MethodSpec, MethodSpec)>,
    #[command(flatten)]
    pub tuning: TuningArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(_) => EXIT_DATA,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Data(m) => write!(f, "data error: {m}"),
        }
    }
}

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<checkshrink_core::Error> for CliError {
    fn from(e: checkshrink_core::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

/// Parses `args` (program name first), runs, and returns the exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("checkshrink: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Estimate(a) => estimate(a),
        Command::Simulate(a) => simulate(a),
        Command::RiskCurve(a) => risk_curve_cmd(a),
        Command::AreCurve(a) => are_curve_cmd(a),
        Command::Newsvendor(a) => newsvendor(a),
    }
}

fn emit(out: &OutputArgs, bytes: Vec<u8>) -> Result<(), CliError> {
    write_output(out.output.as_deref(), &bytes).map_err(|e| {
        let target = out.output.as_ref().map_or("stdout".to_string(), |p| p.display().to_string());
        CliError::Data(format!("cannot write {target}: {e}"))
    })
}

fn json<T: Serialize>(v: &T) -> Result<Vec<u8>, CliError> {
    to_json(v).map_err(|e| CliError::Data(format!("serialization failed: {e}")))
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> csv::Result<()>) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    f(&mut buf).map_err(|e| CliError::Data(format!("CSV output failed: {e}")))?;
    Ok(buf)
}

fn report_warnings(warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

#[derive(Serialize)]
struct EstimateOutput {
    method: String,
    class: ClassTag,
    n: usize,
    eta: f64,
    tau: Tau,
    /// Shrinkage factor at the mean past variance.
    alpha: f64,
    objective_value: f64,
    grid_points: Option<usize>,
    predictions: Vec<f64>,
    warnings: Vec<String>,
}

fn estimate(a: EstimateArgs) -> Result<(), CliError> {
    let cfg = a.tuning.config()?;
    let data = io::read_instance_path(&a.input)?;
    let inst = &data.inst;
    let class = a.method.class(a.class.into());
    let truth = || -> Result<&TruthInstance, CliError> {
        data.truth
            .as_ref()
            .ok_or_else(|| CliError::Usage(format!("{} needs a theta column in the input", a.method.label())))
    };
    let oracle_grid = || -> Result<Grid, CliError> {
        Ok(match class {
            ClassTag::DataDriven => Grid::fine_product(inst, a.fine_points, 201)?,
            _ => Grid::fine(inst, a.fine_points)?,
        })
    };
    let sel = match a.method {
        m if m.is_are() => {
            let tuning: AreTuning = make_tuning_with(inst, &cfg)?;
            let grid = are_grid(inst, class, a.tuning.grid_size)?;
            are_select(inst, class, &tuning, &grid)?
        }
        MethodSpec::Ebml => ebml(inst, class)?,
        MethodSpec::Ebmm => ebmm(inst, class)?,
        MethodSpec::Unshrunken => unshrunken(inst, class),
        MethodSpec::OracleRisk => oracle_select(truth()?, inst, class, Objective::Risk, &oracle_grid()?)?,
        MethodSpec::OracleLoss => oracle_select(truth()?, inst, class, Objective::Loss, &oracle_grid()?)?,
        _ => unreachable!("all methods handled"),
    };
    let hp: HyperParams = sel.hp;
    let predictions = predict_class(inst, &hp);
    let label = if a.method.is_are() { MethodSpec::are_for(class) } else { a.method };
    let out = EstimateOutput {
        method: label.label().to_string(),
        class,
        n: inst.len(),
        eta: hp.location(inst),
        tau: hp.tau,
        alpha: hp.tau.tilde(mean(inst.sigma_p())),
        objective_value: sel.objective_value,
        grid_points: sel.grid_used.as_ref().map(Grid::len),
        predictions,
        warnings: sel.warnings,
    };
    let bytes = match a.out.format.unwrap_or(Format::Json) {
        Format::Json => json(&out)?,
        Format::Csv => {
            report_warnings(&out.warnings);
            csv_bytes(|buf| {
                let mut w = csv::Writer::from_writer(buf);
                w.write_record(["index", "x", "prediction"])?;
                for (i, (x, q)) in inst.x().iter().zip(&out.predictions).enumerate() {
                    w.write_record([i.to_string(), x.to_string(), q.to_string()])?;
                }
                w.flush()?;
                Ok(())
            })?
        }
    };
    emit(&a.out, bytes)
}

fn emit_report(out: &OutputArgs, report: &EvalReport) -> Result<(), CliError> {
    let bytes = match out.format.unwrap_or(Format::Json) {
        Format::Json => json(report)?,
        Format::Csv => {
            report_warnings(&report.warnings);
            csv_bytes(|buf| io::write_report_rows(buf, report))?
        }
    };
    emit(out, bytes)
}

fn check_reps(reps: usize) -> Result<(), CliError> {
    if reps == 0 {
        return Err(CliError::Usage("--reps must be at least 1".into()));
    }
    Ok(())
}

fn simulate(a: SimulateArgs) -> Result<(), CliError> {
    let cfg = a.tuning.config()?;
    check_reps(a.reps)?;
    let scenario = match a.scenario {
        ScenarioArg::Example1 => Scenario::Example1,
        ScenarioArg::Example2 => Scenario::Example2 { sigma_ratio: a.sigma_ratio },
        ScenarioArg::Example3 => Scenario::Example3 {
            case: Case3::parse(&a.case)
                .ok_or_else(|| CliError::Usage(format!("unknown case `{}`; one of I..VI", a.case)))?,
        },
        ScenarioArg::Custom => {
            let path = a.input.as_ref().ok_or_else(|| CliError::Usage("custom scenarios need --input".into()))?;
            let d = io::read_instance_path(path)?;
            let truth = d
                .truth
                .ok_or_else(|| CliError::Data(format!("{}: custom scenarios need a theta column", path.display())))?;
            Scenario::Custom(CustomScenario {
                theta: truth.theta,
                sigma_p: d.inst.sigma_p().to_vec(),
                sigma_f: d.inst.sigma_f().to_vec(),
                b: d.inst.b().to_vec(),
                h: d.inst.h().to_vec(),
            })
        }
    };
    let mut spec = ScenarioSpec::new(scenario, a.n, a.reps, RngSeed::new(a.tuning.seed));
    spec.tuning = cfg;
    spec.class = a.class.map(Into::into);
    spec.grid_min_points = a.tuning.grid_size;
    spec.fine_points = a.fine_points;
    spec.fine_eta_points = a.fine_eta_points;
    spec.comparisons = a.compare;
    let methods = if a.methods.is_empty() {
        vec![MethodSpec::are_for(spec.class()), MethodSpec::Ebml, MethodSpec::Ebmm, MethodSpec::OracleRisk]
    } else {
        a.methods
    };
    spec.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let report = run_scenario_parallel(&spec, &methods, thread_count())?;
    emit_report(&a.out, &report)
}

fn broadcast(name: &str, v: &[f64], n: usize) -> Result<Vec<f64>, CliError> {
    match v.len() {
        1 => Ok(vec![v[0]; n]),
        m if m == n => Ok(v.to_vec()),
        m => Err(CliError::Usage(format!("--{name} has {m} values; expected 1 or {n}"))),
    }
}

#[derive(Serialize)]
struct RiskRow {
    alpha: f64,
    risk: f64,
}

fn risk_curve_cmd(a: RiskCurveArgs) -> Result<(), CliError> {
    let n = a.theta.len();
    if a.resolution < 2 {
        return Err(CliError::Usage("--resolution must be at least 2".into()));
    }
    let b = broadcast("b", &a.b, n)?;
    let h = if a.h.is_empty() {
        if let Some(bad) = b.iter().find(|&&v| !(v > 0.0 && v < 1.0)) {
            return Err(CliError::Usage(format!("--h is required when b is outside (0, 1), got b = {bad}")));
        }
        b.iter().map(|v| 1.0 - v).collect()
    } else {
        broadcast("h", &a.h, n)?
    };
    let sp = broadcast("sigma-p", &a.sigma_p, n)?;
    let sf = broadcast("sigma-f", &a.sigma_f, n)?;
    let inst = ProblemInstance::new(a.theta.clone(), sp, sf, b, h).map_err(|e| CliError::Usage(e.to_string()))?;
    let truth = TruthInstance::new(a.theta);
    let pts = risk_curve(&truth, &inst, a.class.into(), a.eta, a.resolution)?;
    let bytes = match a.out.format.unwrap_or(Format::Csv) {
        Format::Csv => csv_bytes(|buf| io::write_risk_curve(buf, &pts))?,
        Format::Json => json(&pts.iter().map(|p| RiskRow { alpha: p.alpha, risk: p.value }).collect::<Vec<_>>())?,
    };
    emit(&a.out, bytes)
}

#[derive(Serialize)]
struct AreRow {
    tau: Tau,
    are_value: f64,
}

fn are_curve_cmd(a: AreCurveArgs) -> Result<(), CliError> {
    let cfg = a.tuning.config()?;
    if a.resolution < 2 {
        return Err(CliError::Usage("--resolution must be at least 2".into()));
    }
    let data = io::read_instance_path(&a.input)?;
    let inst = &data.inst;
    let tuning = make_tuning_with(inst, &cfg)?;
    report_warnings(&tuning.warnings());
    let s = mean(inst.sigma_p());
    let taus: Vec<Tau> = (0..a.resolution).map(|k| Tau::from_tilde(k as f64 / (a.resolution - 1) as f64, s)).collect();
    let pts = are_curve(inst, a.class.into(), a.eta, &tuning, &taus)?;
    let bytes = match a.out.format.unwrap_or(Format::Csv) {
        Format::Csv => csv_bytes(|buf| io::write_are_curve(buf, &pts))?,
        Format::Json => json(&pts.iter().map(|p| AreRow { tau: p.tau, are_value: p.value }).collect::<Vec<_>>())?,
    };
    emit(&a.out, bytes)
}

fn newsvendor(a: NewsvendorArgs) -> Result<(), CliError> {
    let cfg = a.tuning.config()?;
    check_reps(a.reps)?;
    let items = match &a.input {
        Some(p) => ItemSource::Given(io::read_items_path(p)?),
        None => ItemSource::Synthetic { count: a.items, high_fraction: a.high_fraction },
    };
    let config = NewsvendorConfig {
        items,
        sigma: a.sigma,
        markup: a.markup,
        capital_rate: a.capital_rate,
        flat_cost: a.flat_cost,
        ..NewsvendorConfig::synthetic(a.sigma)
    };
    let class: ClassTag = a.class.into();
    let mut spec = ScenarioSpec::new(Scenario::Newsvendor(config), 0, a.reps, RngSeed::new(a.tuning.seed));
    spec.tuning = cfg;
    spec.class = Some(class);
    spec.grid_min_points = a.tuning.grid_size;
    let methods = if a.methods.is_empty() { default_methods(class) } else { a.methods };
    let mut comparisons: Vec<_> =
        default_comparisons(class).into_iter().filter(|(x, y)| methods.contains(x) && methods.contains(y)).collect();
    for pair in a.compare {
        if !(methods.contains(&pair.0) && methods.contains(&pair.1)) {
            return Err(CliError::Usage(format!(
                "--compare {}:{} uses a method that is not run",
                pair.0.label(),
                pair.1.label()
            )));
        }
        comparisons.push(pair);
    }
    spec.comparisons = comparisons;
    spec.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let report = run_scenario_parallel(&spec, &methods, thread_count())?;
    emit_report(&a.out, &report)
}
