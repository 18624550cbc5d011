//! Command-line front end.
//!
//! Every subcommand also reads an optional JSON config (`--config`) whose
//! flat keys are the flag names with `-` replaced by `_`. Flags given on
//! the command line take precedence. Exit codes: 0 success, 1 domain
//! failure, 2 usage or input error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::analysis::{self, AnalysisOptions, Certificate};
use crate::benchmark::{self, DiskParameters};
use crate::ctrlparam::{ControllerParameterization, Factor, SchedulingBasis};
use crate::error::{Error, Result};
use crate::frfdata::{
    load_frf_dataset, weight_frf, Channel, DataFormat, Domain, FrequencyGrid, FrfDataset,
    OperatingPointSet, WeightSet,
};
use crate::ltikit::c2d_zoh;
use crate::realize::realize;
use crate::simulate::{self, SimScenario};
use crate::synthesis::{self, channel_factors, SynthesisOptions, SynthesisProblem};

#[derive(Debug, Parser)]
#[command(name = "lpvsynth", version, about = "Data-driven gain-scheduled controller synthesis")]
struct Cli {
    /// JSON file with default values for the subcommand's flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample the benchmark plant's coprime factors on a frequency grid.
    GenerateData(GenerateArgs),
    /// Bisect the performance level and write the optimal controller.
    Synthesize(SynthesizeArgs),
    /// Certify stability (and performance, given weights and gamma).
    Analyze(AnalyzeArgs),
    /// Simulate a frozen or nonlinear closed loop.
    Simulate(SimulateArgs),
    /// Write closed-loop magnitude tables for plotting.
    Export(ExportArgs),
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
struct GenerateArgs {
    /// Output file (.csv or .json).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Number of equidistant operating points on [0, 1].
    #[arg(long)]
    points: Option<usize>,
    /// Number of log-spaced frequencies.
    #[arg(long)]
    grid_points: Option<usize>,
    #[arg(long)]
    omega_min: Option<f64>,
    /// Defaults to the Nyquist frequency.
    #[arg(long)]
    omega_max: Option<f64>,
    /// Sample time (s).
    #[arg(long)]
    ts: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
struct SynthesizeArgs {
    #[arg(long)]
    data: Option<PathBuf>,
    /// Weight set JSON; defaults to the benchmark weights.
    #[arg(long)]
    weights: Option<PathBuf>,
    /// Directory for controller.json, margins.csv and synthesis.json.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Pulse basis order of both controller factors.
    #[arg(long)]
    order: Option<usize>,
    #[arg(long)]
    margin: Option<f64>,
    #[arg(long)]
    gamma_lo: Option<f64>,
    #[arg(long)]
    gamma_hi: Option<f64>,
    /// Bisection tolerance on gamma.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
struct AnalyzeArgs {
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    controller: Option<PathBuf>,
    #[arg(long)]
    weights: Option<PathBuf>,
    #[arg(long)]
    gamma: Option<f64>,
    /// Certificate JSON output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Exit with status 1 unless every check passes.
    #[arg(long)]
    expect_stable: bool,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
struct SimulateArgs {
    #[arg(long)]
    controller: Option<PathBuf>,
    /// Unit-step response of the frozen loop at this scheduling value.
    #[arg(long, conflicts_with = "nonlinear")]
    frozen: Option<f64>,
    /// Nonlinear plant simulation.
    #[arg(long)]
    nonlinear: bool,
    /// Scenario JSON; defaults to the staircase scenario.
    #[arg(long, requires = "nonlinear")]
    scenario: Option<PathBuf>,
    /// Frozen step duration (s).
    #[arg(long)]
    duration: Option<f64>,
    /// CSV output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
struct ExportArgs {
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    controller: Option<PathBuf>,
    #[arg(long)]
    weights: Option<PathBuf>,
    /// CSV output.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failure classes mapped to exit codes.
enum Failure {
    Usage(String),
    Domain(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io { .. } | Error::Json(_) | Error::Csv(_) | Error::Parse(_) => Failure::Usage(e.to_string()),
            other => Failure::Domain(other.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

/// Runs the front end on `args` (including the program name) and returns
/// the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = if code == 0 {
                write!(stdout, "{}", e.render())
            } else {
                write!(stderr, "{}", e.render())
            };
            return code;
        }
    };
    match dispatch(cli, stdout) {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            2
        }
        Err(Failure::Domain(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            1
        }
    }
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> CliResult<i32> {
    let config = match &cli.config {
        Some(path) => Some(read_config(path)?),
        None => None,
    };
    let cfg = config.as_ref();
    match cli.command {
        Command::GenerateData(a) => generate(merge(&a, cfg)?, out),
        Command::Synthesize(a) => synthesize(merge(&a, cfg)?, out),
        Command::Analyze(a) => analyze(merge(&a, cfg)?, out),
        Command::Simulate(a) => simulate_cmd(merge(&a, cfg)?, out),
        Command::Export(a) => export(merge(&a, cfg)?, out),
    }
}

fn read_config(path: &Path) -> CliResult<Map<String, Value>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    match serde_json::from_str(&text).map_err(Error::from)? {
        Value::Object(map) => Ok(map),
        _ => Err(Failure::Usage(format!("{}: config must be a JSON object", path.display()))),
    }
}

/// Config values fill in flags that were not given.
fn merge<T: Serialize + DeserializeOwned>(args: &T, config: Option<&Map<String, Value>>) -> CliResult<T> {
    let empty = Map::new();
    let config = config.unwrap_or(&empty);
    let Value::Object(given) = serde_json::to_value(args).map_err(Error::from)? else {
        unreachable!("argument structs serialize to objects");
    };
    let mut merged = Map::new();
    for (key, value) in given {
        let unset = value.is_null() || value == Value::Bool(false);
        let value = match config.get(&key) {
            Some(c) if unset => c.clone(),
            _ => value,
        };
        merged.insert(key, value);
    }
    serde_json::from_value(Value::Object(merged))
        .map_err(|e| Failure::Usage(format!("config: {e}")))
}

fn required<T: Clone>(value: &Option<T>, flag: &str) -> CliResult<T> {
    value
        .clone()
        .ok_or_else(|| Failure::Usage(format!("missing required flag --{flag}")))
}

fn load_data(path: &Path) -> CliResult<FrfDataset> {
    Ok(load_frf_dataset(path, DataFormat::from_path(path)?)?)
}

fn load_weights(path: Option<&PathBuf>) -> CliResult<WeightSet> {
    match path {
        Some(p) => Ok(WeightSet::load(p)?),
        None => Ok(benchmark::default_weights()),
    }
}

fn data_ts(data: &FrfDataset) -> CliResult<f64> {
    data.grid()
        .domain()
        .sample_time()
        .ok_or_else(|| Failure::Domain("controllers are synthesized against discrete-time data".into()))
}

fn generate(a: GenerateArgs, out: &mut dyn Write) -> CliResult<i32> {
    let path = required(&a.out, "out")?;
    let ts = a.ts.unwrap_or(benchmark::TS);
    let points = OperatingPointSet::equidistant(a.points.unwrap_or(9), (0.0, 1.0))?;
    let grid = FrequencyGrid::logspace(
        a.omega_min.unwrap_or(1e-2),
        a.omega_max.unwrap_or(std::f64::consts::PI / ts),
        a.grid_points.unwrap_or(400),
        Domain::Discrete { ts },
    )?;
    let lpv = benchmark::build_unbalanced_disk(&DiskParameters::default())?;
    let data = benchmark::generate_dataset(&lpv, ts, &grid, &points)?;
    data.save(&path, DataFormat::from_path(&path)?)?;
    let _ = writeln!(
        out,
        "wrote {} ({} frequencies x {} operating points, Ts = {ts} s)",
        path.display(),
        grid.len(),
        points.len()
    );
    Ok(0)
}

#[derive(Serialize)]
struct SynthesisSummary<'a> {
    gamma: f64,
    slack: f64,
    worst_margin: f64,
    constraints: usize,
    trace: &'a [synthesis::BisectionStep],
}

fn synthesize(a: SynthesizeArgs, out: &mut dyn Write) -> CliResult<i32> {
    let data = load_data(&required(&a.data, "data")?)?;
    let weights = load_weights(a.weights.as_ref())?;
    let ts = data_ts(&data)?;
    let sched = SchedulingBasis::affine(data.points().range())?;
    let param = ControllerParameterization::pulse(a.order.unwrap_or(5), ts, sched)?;
    let defaults = SynthesisOptions::default();
    let options = SynthesisOptions {
        margin: a.margin.unwrap_or(defaults.margin),
        gamma_bracket: (
            a.gamma_lo.unwrap_or(defaults.gamma_bracket.0),
            a.gamma_hi.unwrap_or(defaults.gamma_bracket.1),
        ),
        bisect_tol: a.tol.unwrap_or(defaults.bisect_tol),
        ..defaults
    };
    let problem = SynthesisProblem::new(data, weights, param, options)?;
    let result = problem.solve()?;
    let dir = a.out_dir.unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    result.controller.save(&dir.join("controller.json"))?;
    result.save_margins(&dir.join("margins.csv"))?;
    let summary = SynthesisSummary {
        gamma: result.gamma,
        slack: result.slack,
        worst_margin: result.worst_margin(),
        constraints: result.margins.len(),
        trace: &result.trace,
    };
    let path = dir.join("synthesis.json");
    let text = serde_json::to_string_pretty(&summary).map_err(Error::from)?;
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    let _ = writeln!(out, "{result}");
    let _ = writeln!(out, "wrote controller.json, margins.csv, synthesis.json to {}", dir.display());
    Ok(0)
}

fn analyze(a: AnalyzeArgs, out: &mut dyn Write) -> CliResult<i32> {
    let data = load_data(&required(&a.data, "data")?)?;
    let controller = ControllerParameterization::load(&required(&a.controller, "controller")?)?;
    let opts = AnalysisOptions::default();
    let cert = match a.gamma {
        Some(gamma) => {
            let weights = load_weights(a.weights.as_ref())?;
            let perf = analysis::check_performance_with(&data, &weights, &controller, gamma, &opts)?;
            let _ = writeln!(out, "{perf}");
            Certificate {
                stability: perf.stability.clone(),
                performance: Some(perf),
            }
        }
        None => {
            let stability = analysis::certify_stability(&data, &controller, &opts)?;
            let _ = writeln!(out, "{stability}");
            Certificate {
                stability,
                performance: None,
            }
        }
    };
    let path = a.out.unwrap_or_else(|| PathBuf::from("certificate.json"));
    cert.save(&path)?;
    let verdict = if cert.passes() { "PASS" } else { "FAIL" };
    let _ = writeln!(out, "certificate: {verdict} (written to {})", path.display());
    Ok(if a.expect_stable && !cert.passes() { 1 } else { 0 })
}

fn simulate_cmd(a: SimulateArgs, out: &mut dyn Write) -> CliResult<i32> {
    let controller = ControllerParameterization::load(&required(&a.controller, "controller")?)?;
    let mut filter = realize(&controller)?;
    let params = DiskParameters::default();
    let result = match (a.frozen, a.nonlinear) {
        (Some(p), false) => {
            let lpv = benchmark::build_unbalanced_disk(&params)?;
            let plant = c2d_zoh(&lpv.freeze(p)?, controller.ts())?;
            simulate::simulate_frozen_step(&plant, &mut filter, p, a.duration.unwrap_or(8.0))?
        }
        (None, true) => {
            let scenario = match &a.scenario {
                Some(path) => SimScenario::load(path)?,
                None => SimScenario::staircase(controller.ts()),
            };
            simulate::simulate_nonlinear(&params, &mut filter, &scenario)?
        }
        _ => return Err(Failure::Usage("choose exactly one of --frozen <p> or --nonlinear".into())),
    };
    let path = a.out.unwrap_or_else(|| PathBuf::from("simulation.csv"));
    result.save_csv(&path)?;
    let end = result.t.last().copied().unwrap_or(0.0);
    let _ = writeln!(
        out,
        "{} samples over {end} s; max|y| = {:.4}, max|u| = {:.4}, final |e| = {:.3e}; written to {}",
        result.len(),
        simulate::SimResult::max_abs(&result.y),
        simulate::SimResult::max_abs(&result.u),
        result.e.last().map_or(0.0, |e| e.abs()),
        path.display()
    );
    Ok(0)
}

fn export(a: ExportArgs, out: &mut dyn Write) -> CliResult<i32> {
    let data = load_data(&required(&a.data, "data")?)?;
    let controller = ControllerParameterization::load(&required(&a.controller, "controller")?)?;
    let weights = load_weights(a.weights.as_ref())?;
    let path = a.out.unwrap_or_else(|| PathBuf::from("bode.csv"));
    let table = bode_table(&data, &controller, &weights)?;
    let file = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
    let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
    let mut header = vec!["omega".to_string(), "p".to_string()];
    header.extend(Channel::ALL.iter().map(|c| format!("abs_{c}")));
    header.extend(table.channels.iter().map(|c| format!("abs_W_{c}")));
    w.write_record(&header).map_err(Error::from)?;
    for row in &table.rows {
        w.write_record(row.iter().map(|v| v.to_string())).map_err(Error::from)?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    let _ = writeln!(out, "wrote {} rows to {}", table.rows.len(), path.display());
    Ok(0)
}

struct BodeTable {
    channels: Vec<Channel>,
    rows: Vec<Vec<f64>>,
}

fn bode_table(
    data: &FrfDataset,
    controller: &ControllerParameterization,
    weights: &WeightSet,
) -> Result<BodeTable> {
    let grid = data.grid();
    let channels: Vec<Channel> = weights.channels().collect();
    let wfrf = channels
        .iter()
        .map(|&c| weight_frf(weights, c, grid))
        .collect::<Result<Vec<_>>>()?;
    let theta = controller.theta();
    let mut rows = Vec::with_capacity(grid.len() * data.points().len());
    for (j, &p) in data.points().points().iter().enumerate() {
        for (k, &w) in grid.omegas().iter().enumerate() {
            let rn = controller.regressor_row(Factor::N, w, p)?;
            let rd = controller.regressor_row(Factor::D, w, p)?;
            let mut row = vec![w, p];
            for ch in Channel::ALL {
                let f = channel_factors((data.n(k, j), data.d(k, j)), (&rn, &rd), ch);
                row.push((f.np.eval(theta.as_slice()) / f.dp.eval(theta.as_slice())).norm());
            }
            row.extend(wfrf.iter().map(|wf| wf[k].norm()));
            rows.push(row);
        }
    }
    Ok(BodeTable { channels, rows })
}
