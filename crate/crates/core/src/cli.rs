//! The `tensormono` command-line driver.
//!
//! Every grid command writes CSV (or JSON with `--format json`) to `--out`
//! or stdout. A run manifest with the effective arguments, seed, version and
//! wall time goes to `<out>.manifest.json`, or to stderr when writing to
//! stdout, so data files stay byte-identical across runs.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::algebra::eigh3;
use crate::error::Error;
use crate::geometry::{analytic_curvature_canonical, Geometry, Regauge, Steps, DEFAULT_STEP};
use crate::models::{
    circuit_full_offset, circuit_full_spectrum, parse_list, parse_real, Axis, CanonicalChart, CircuitParams, Model,
    PhasePoint, SignConvention, TripleDotParams,
};
use crate::topology::{
    classify_region, dd_charge_cube, dd_charge_sphere, locate_monopoles, ChargeResult, CubeMethod, DEFAULT_HALF_WIDTH,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_) | Error::NotChiralRegime(_) | Error::CutoffTooSmall(_) => {
                CliError::Config(e.to_string())
            }
            e => CliError::Numerical(e.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(name = "tensormono", version, about = "Tensor Berry curvature and tensor-monopole charges")]
#[command(args_override_self = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Three eigenvalues over a 1D or 2D phase grid.
    Spectrum(GridArgs),
    /// One curvature component over a phase grid.
    Curvature(CurvatureArgs),
    /// Charge enclosed by a cube or sphere.
    Charge(ChargeArgs),
    /// Triple degeneracies of a chiral model.
    Locate(PlainArgs),
    /// Region classification over a grid of coupling ratios.
    PhaseDiagram(PhaseDiagramArgs),
    /// Built-in numerical checks.
    Validate(ValidateArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Canonical,
    Circuit,
    Tripledot,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

fn real(s: &str) -> std::result::Result<f64, String> {
    parse_real(s).map_err(|e| e.to_string())
}

fn list3(s: &str) -> std::result::Result<[f64; 3], String> {
    let v = parse_list(s).map_err(|e| e.to_string())?;
    v.try_into().map_err(|_| "expected three comma-separated values".to_string())
}

fn list4(s: &str) -> std::result::Result<[f64; 4], String> {
    let v = parse_list(s).map_err(|e| e.to_string())?;
    v.try_into().map_err(|_| "expected four comma-separated values".to_string())
}

fn point(s: &str) -> std::result::Result<PhasePoint, String> {
    list4(s).map(PhasePoint)
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ModelArgs {
    #[arg(long, value_enum, default_value = "circuit")]
    pub model: ModelKind,
    /// Left Josephson energies E_JL1,E_JL2,E_JL3.
    #[arg(long, value_parser = list3, allow_hyphen_values = true, default_value = "1,1,1")]
    pub ejl: [f64; 3],
    /// Right Josephson energies E_JR1,E_JR2,E_JR3.
    #[arg(long, value_parser = list3, allow_hyphen_values = true, default_value = "1,1,1")]
    pub ejr: [f64; 3],
    /// Charging energy.
    #[arg(long, value_parser = real, allow_hyphen_values = true, default_value = "50")]
    pub ec: f64,
    #[arg(long = "ng-l", value_parser = real, allow_hyphen_values = true, default_value = "0.5")]
    pub ng_l: f64,
    #[arg(long = "ng-r", value_parser = real, allow_hyphen_values = true, default_value = "0.5")]
    pub ng_r: f64,
    /// Left dot coupling v_L.
    #[arg(long, value_parser = real, allow_hyphen_values = true, default_value = "1")]
    pub vl: f64,
    /// Right dot coupling v_R.
    #[arg(long, value_parser = real, allow_hyphen_values = true, default_value = "1")]
    pub vr: f64,
    /// Non-local couplings Γx,Γy,Γz,Γw.
    #[arg(long, value_parser = list4, allow_hyphen_values = true, default_value = "1,1,1,1")]
    pub gamma: [f64; 4],
    /// Dot energies ε_L,ε_M,ε_R.
    #[arg(long, value_parser = list3, allow_hyphen_values = true, default_value = "0,0,0")]
    pub eps: [f64; 3],
    #[arg(long, value_parser = |s: &str| s.parse::<SignConvention>().map_err(|e| e.to_string()), default_value = "corrected")]
    pub convention: SignConvention,
    /// Origin of the canonical chart.
    #[arg(long, value_parser = point, allow_hyphen_values = true, default_value = "0,0,0,0")]
    pub origin: PhasePoint,
    /// Scale of the canonical chart.
    #[arg(long, value_parser = real, allow_hyphen_values = true, default_value = "1")]
    pub scale: f64,
}

impl ModelArgs {
    pub fn build(&self) -> CliResult<Model> {
        let m = match self.model {
            ModelKind::Canonical => Model::Canonical(CanonicalChart::scaled(self.origin, self.scale)),
            ModelKind::Circuit => Model::Circuit(CircuitParams {
                ej_l: self.ejl,
                ej_r: self.ejr,
                e_c: self.ec,
                ng_l: self.ng_l,
                ng_r: self.ng_r,
            }),
            ModelKind::Tripledot => Model::TripleDot(TripleDotParams {
                v_l: self.vl,
                v_r: self.vr,
                gamma: self.gamma,
                eps: self.eps,
                convention: self.convention,
            }),
        };
        m.validate()?;
        Ok(m)
    }
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct CommonArgs {
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; machine parallelism when absent.
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// key = value file mirroring the long flag names; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// `name:min:max:count` with `name` one of x, y, z, w.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AxisSpec {
    pub axis: Axis,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl AxisSpec {
    pub fn values(&self) -> Vec<f64> {
        (0..self.count)
            .map(|i| self.min + (self.max - self.min) * i as f64 / (self.count - 1) as f64)
            .collect()
    }
}

fn range_parts(s: &str) -> std::result::Result<(f64, f64, usize), String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [min, max, count] = parts[..] else {
        return Err(format!("'{s}': expected min:max:count"));
    };
    let count: usize = count.trim().parse().map_err(|_| format!("'{count}': count must be an integer"))?;
    if count < 2 {
        return Err("count must be at least 2".into());
    }
    Ok((real(min)?, real(max)?, count))
}

fn axis_spec(s: &str) -> std::result::Result<AxisSpec, String> {
    let (name, rest) = s.split_once(':').ok_or_else(|| format!("'{s}': expected name:min:max:count"))?;
    let axis: Axis = name.parse().map_err(|e: Error| e.to_string())?;
    let (min, max, count) = range_parts(rest)?;
    Ok(AxisSpec { axis, min, max, count })
}

/// `min:max:count` for a coupling-ratio axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RangeSpec {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl RangeSpec {
    fn values(&self) -> Vec<f64> {
        (0..self.count)
            .map(|i| self.min + (self.max - self.min) * i as f64 / (self.count - 1) as f64)
            .collect()
    }
}

fn range_spec(s: &str) -> std::result::Result<RangeSpec, String> {
    let (min, max, count) = range_parts(s)?;
    Ok(RangeSpec { min, max, count })
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct GridArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub common: CommonArgs,
    /// Grid axis `name:min:max:count`; give once or twice.
    #[arg(long = "axis", value_parser = axis_spec, allow_hyphen_values = true, required = true, num_args = 1)]
    pub axes: Vec<AxisSpec>,
    /// Values of the coordinates not swept.
    #[arg(long, value_parser = point, allow_hyphen_values = true, default_value = "0,0,0,0")]
    pub at: PhasePoint,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct CurvatureArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    /// Component, e.g. `xyz`.
    #[arg(long, default_value = "xyz")]
    pub indices: String,
    #[arg(long = "h-outer", value_parser = real, allow_hyphen_values = true, default_value_t = DEFAULT_STEP)]
    pub h_outer: f64,
    #[arg(long = "h-inner", value_parser = real, allow_hyphen_values = true, default_value_t = DEFAULT_STEP)]
    pub h_inner: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Surface {
    Cube,
    Sphere,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Integrator {
    Quadrature,
    Montecarlo,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ChargeArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub common: CommonArgs,
    /// Surface centre.
    #[arg(long, value_parser = point, allow_hyphen_values = true, conflicts_with = "monopole")]
    pub center: Option<PhasePoint>,
    /// Index into the `locate` output, used as the centre.
    #[arg(long)]
    pub monopole: Option<usize>,
    #[arg(long, value_enum, default_value = "cube")]
    pub surface: Surface,
    #[arg(long, value_enum, default_value = "quadrature")]
    pub method: Integrator,
    #[arg(long = "half-width", value_parser = real, allow_hyphen_values = true, default_value_t = DEFAULT_HALF_WIDTH)]
    pub half_width: f64,
    #[arg(long, value_parser = real, allow_hyphen_values = true, default_value = "0.2")]
    pub radius: f64,
    /// Quadrature nodes per face axis.
    #[arg(long, default_value_t = 16)]
    pub nodes: usize,
    /// Monte-Carlo samples.
    #[arg(long, default_value_t = 20_000)]
    pub samples: usize,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct PlainArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct PhaseDiagramArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub common: CommonArgs,
    /// First ratio axis: E_JL2/E_JL1 (circuit) or v_L/Γ (triple dot).
    #[arg(long, value_parser = range_spec, allow_hyphen_values = true, default_value = "0:2:41")]
    pub ratio1: RangeSpec,
    /// Second ratio axis: E_JL3/E_JL1 (circuit) or v_R/Γ (triple dot).
    #[arg(long, value_parser = range_spec, allow_hyphen_values = true, default_value = "0:2:41")]
    pub ratio2: RangeSpec,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Level {
    Quick,
    Full,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_enum, default_value = "quick")]
    pub level: Level,
}

/// Deterministic record accompanying every output.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub arguments: Vec<String>,
    pub parameters: Value,
    pub seed: u64,
    pub version: &'static str,
    pub wall_time_seconds: f64,
}

/// Table of rows with optional cells, rendered as CSV or JSON records.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Option<Cell>>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => format!("{x:?}"),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) => json!(x),
            Cell::Int(i) => json!(i),
            Cell::Text(s) => json!(s),
        }
    }
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => {
                let mut s = self.header.join(",");
                s.push('\n');
                for row in &self.rows {
                    let cells: Vec<String> = row.iter().map(|c| c.as_ref().map(Cell::csv).unwrap_or_default()).collect();
                    s.push_str(&cells.join(","));
                    s.push('\n');
                }
                s
            }
            Format::Json => {
                let records: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|row| {
                        let obj: serde_json::Map<String, Value> = self
                            .header
                            .iter()
                            .zip(row)
                            .map(|(k, c)| (k.clone(), c.as_ref().map(Cell::json).unwrap_or(Value::Null)))
                            .collect();
                        Value::Object(obj)
                    })
                    .collect();
                let mut s = serde_json::to_string_pretty(&records).expect("serializable");
                s.push('\n');
                s
            }
        }
    }
}

/// Merges `key = value` lines from a config file in front of the command-line
/// flags. Keys must be long flag names of the chosen subcommand.
pub fn merge_config(argv: &[String]) -> CliResult<Vec<String>> {
    let Some(sub_pos) = argv.iter().skip(1).position(|a| !a.starts_with('-')).map(|p| p + 1) else {
        return Ok(argv.to_vec());
    };
    let sub_name = &argv[sub_pos];
    let mut config_path = None;
    for (i, a) in argv.iter().enumerate().skip(sub_pos + 1) {
        if let Some(v) = a.strip_prefix("--config=") {
            config_path = Some(v.to_string());
        } else if a == "--config" {
            config_path = argv.get(i + 1).cloned();
        }
    }
    let Some(path) = config_path else {
        return Ok(argv.to_vec());
    };
    let text = fs::read_to_string(&path).map_err(|e| CliError::Config(format!("cannot read config '{path}': {e}")))?;
    let cmd = Cli::command();
    let Some(sub) = cmd.find_subcommand(sub_name) else {
        return Ok(argv.to_vec());
    };
    let mut injected = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("{path}:{}: expected key = value", lineno + 1)))?;
        let (key, value) = (key.trim(), value.trim());
        let arg = sub
            .get_arguments()
            .find(|a| a.get_long() == Some(key) && key != "config")
            .ok_or_else(|| CliError::Config(format!("{path}:{}: unknown key '{key}'", lineno + 1)))?;
        if arg.get_action().takes_values() {
            injected.push(format!("--{key}={value}"));
        } else {
            match value {
                "true" => injected.push(format!("--{key}")),
                "false" => {}
                _ => {
                    return Err(CliError::Config(format!(
                        "{path}:{}: key '{key}' expects true or false",
                        lineno + 1
                    )))
                }
            }
        }
    }
    let mut out = argv[..=sub_pos].to_vec();
    out.extend(injected);
    out.extend_from_slice(&argv[sub_pos + 1..]);
    Ok(out)
}

/// Parses, runs, and returns the process exit code.
pub fn run_from_args(argv: Vec<String>) -> i32 {
    let argv = match merge_config(&argv) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("{e}");
            return e.exit_code();
        }
    };
    let matches = match Cli::command().try_get_matches_from(&argv) {
        Ok(m) => m,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_CONFIG,
            };
            let _ = e.print();
            return code;
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return EXIT_CONFIG;
        }
    };
    match run(&cli, &argv) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}

fn common_of(cmd: &Command) -> &CommonArgs {
    match cmd {
        Command::Spectrum(g) => &g.common,
        Command::Curvature(c) => &c.grid.common,
        Command::Charge(c) => &c.common,
        Command::Locate(p) => &p.common,
        Command::PhaseDiagram(p) => &p.common,
        Command::Validate(v) => &v.common,
    }
}

pub fn run(cli: &Cli, argv: &[String]) -> CliResult<()> {
    let common = common_of(&cli.command);
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = common.jobs {
        if j == 0 {
            return Err(CliError::Config("--jobs must be at least 1".into()));
        }
        builder = builder.num_threads(j);
    }
    let pool = builder.build().map_err(|e| CliError::Config(e.to_string()))?;
    let start = Instant::now();
    let (name, params, output, failed) = pool.install(|| execute(&cli.command))?;
    let manifest = RunManifest {
        command: name.to_string(),
        arguments: argv.iter().skip(1).cloned().collect(),
        parameters: params,
        seed: common.seed,
        version: env!("CARGO_PKG_VERSION"),
        wall_time_seconds: start.elapsed().as_secs_f64(),
    };
    emit(common.out.as_deref(), &output, &manifest)?;
    match failed {
        Some(msg) => Err(CliError::Numerical(msg)),
        None => Ok(()),
    }
}

fn emit(out: Option<&Path>, body: &str, manifest: &RunManifest) -> CliResult<()> {
    let manifest_text = serde_json::to_string_pretty(manifest).expect("serializable");
    match out {
        Some(path) => {
            let io = |e: std::io::Error| CliError::Config(format!("cannot write '{}': {e}", path.display()));
            fs::write(path, body).map_err(io)?;
            let mut side = path.as_os_str().to_owned();
            side.push(".manifest.json");
            fs::write(PathBuf::from(side), manifest_text + "\n").map_err(io)?;
        }
        None => {
            print!("{body}");
            eprintln!("{}", serde_json::to_string(manifest).expect("serializable"));
        }
    }
    Ok(())
}

type Executed = (&'static str, Value, String, Option<String>);

fn execute(cmd: &Command) -> CliResult<Executed> {
    match cmd {
        Command::Spectrum(g) => {
            let m = g.model.build()?;
            let t = spectrum_table(&m, g)?;
            Ok(("spectrum", params(&m, to_value(g)), t.render(g.common.format), None))
        }
        Command::Curvature(c) => {
            let m = c.grid.model.build()?;
            let t = curvature_table(&m, c)?;
            Ok(("curvature", params(&m, to_value(c)), t.render(c.grid.common.format), None))
        }
        Command::Charge(c) => {
            let m = c.model.build()?;
            let r = charge(&m, c)?;
            let body = match c.common.format {
                Format::Json => serde_json::to_string_pretty(&r).expect("serializable") + "\n",
                Format::Csv => {
                    let mut t = Table::new(&[
                        "q_value",
                        "q_rounded",
                        "error_estimate",
                        "method",
                        "evaluations",
                        "surface_parameter",
                    ]);
                    t.rows.push(vec![
                        Some(Cell::Num(r.q_value)),
                        Some(Cell::Int(r.q_rounded)),
                        Some(Cell::Num(r.error_estimate)),
                        Some(Cell::Text(format!("{:?}", r.method))),
                        Some(Cell::Int(r.evaluations as i64)),
                        Some(Cell::Num(r.surface_parameter)),
                    ]);
                    t.render(Format::Csv)
                }
            };
            Ok(("charge", params(&m, to_value(c)), body, None))
        }
        Command::Locate(p) => {
            let m = p.model.build()?;
            let t = locate_table(&m)?;
            Ok(("locate", params(&m, to_value(p)), t.render(p.common.format), None))
        }
        Command::PhaseDiagram(p) => {
            let m = p.model.build()?;
            let t = phase_diagram_table(&m, p)?;
            Ok(("phase-diagram", params(&m, to_value(p)), t.render(p.common.format), None))
        }
        Command::Validate(v) => {
            let report = validate(v.level, v.common.seed);
            let failed = report.iter().filter(|s| !s.pass).count();
            for s in &report {
                eprintln!("{} {}: {}", if s.pass { "PASS" } else { "FAIL" }, s.name, s.detail);
            }
            let body = match v.common.format {
                Format::Json => serde_json::to_string_pretty(&report).expect("serializable") + "\n",
                Format::Csv => {
                    let mut t = Table::new(&["suite", "pass", "detail"]);
                    for s in &report {
                        t.rows.push(vec![
                            Some(Cell::Text(s.name.clone())),
                            Some(Cell::Text(s.pass.to_string())),
                            Some(Cell::Text(s.detail.replace(',', ";"))),
                        ]);
                    }
                    t.render(Format::Csv)
                }
            };
            let msg = (failed > 0).then(|| format!("{failed} validation suites failed"));
            Ok(("validate", to_value(v), body, msg))
        }
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

fn params(m: &Model, args: Value) -> Value {
    json!({ "model": m, "arguments": args })
}

fn grid_points(g: &GridArgs) -> CliResult<Vec<(Vec<f64>, PhasePoint)>> {
    match g.axes.len() {
        1 | 2 => {}
        n => return Err(CliError::Config(format!("expected one or two --axis flags, got {n}"))),
    }
    if g.axes.len() == 2 && g.axes[0].axis == g.axes[1].axis {
        return Err(CliError::Config("--axis directions must differ".into()));
    }
    let mut out = Vec::new();
    let first = g.axes[0].values();
    let second = g.axes.get(1).map(|a| a.values()).unwrap_or_else(|| vec![f64::NAN]);
    for &a in &first {
        for &b in &second {
            let mut p = g.at;
            p.set(g.axes[0].axis, a);
            let mut coords = vec![a];
            if let Some(ax) = g.axes.get(1) {
                p.set(ax.axis, b);
                coords.push(b);
            }
            out.push((coords, p));
        }
    }
    Ok(out)
}

fn axis_header(g: &GridArgs) -> Vec<String> {
    g.axes.iter().map(|a| format!("phi_{}", a.axis.name())).collect()
}

pub fn spectrum_table(m: &Model, g: &GridArgs) -> CliResult<Table> {
    let pts = grid_points(g)?;
    let rows: Vec<Vec<Option<Cell>>> = pts
        .par_iter()
        .map(|(coords, p)| {
            let es = eigh3(&m.hamiltonian(p))?;
            let mut row: Vec<Option<Cell>> = coords.iter().map(|c| Some(Cell::Num(*c))).collect();
            row.extend(es.values.iter().map(|v| Some(Cell::Num(*v))));
            Ok(row)
        })
        .collect::<crate::error::Result<_>>()?;
    let mut header = axis_header(g);
    header.extend(["E_minus", "E_0", "E_plus"].map(String::from));
    Ok(Table { header, rows })
}

fn parse_indices(s: &str) -> CliResult<[Axis; 3]> {
    let chars: Vec<char> = s.trim().chars().collect();
    let [a, b, c] = chars[..] else {
        return Err(CliError::Config(format!("--indices '{s}': expected three axis letters")));
    };
    let p = |ch: char| ch.to_string().parse::<Axis>().map_err(|e| CliError::Config(e.to_string()));
    Ok([p(a)?, p(b)?, p(c)?])
}

pub fn curvature_table(m: &Model, c: &CurvatureArgs) -> CliResult<Table> {
    let idx = parse_indices(&c.indices)?;
    if !(c.h_outer > 0.0 && c.h_inner > 0.0) {
        return Err(CliError::Config("finite-difference steps must be positive".into()));
    }
    let geo = Geometry::new(m).with_steps(Steps {
        outer: c.h_outer,
        inner: c.h_inner,
    });
    let pts = grid_points(&c.grid)?;
    let rows: Vec<Vec<Option<Cell>>> = pts
        .par_iter()
        .map(|(coords, p)| {
            let mut row: Vec<Option<Cell>> = coords.iter().map(|c| Some(Cell::Num(*c))).collect();
            let v = match geo.curvature(p, idx[0], idx[1], idx[2]) {
                Ok(v) => Some(Cell::Num(v)),
                Err(Error::DegeneracyTooClose { .. } | Error::BranchJump { .. } | Error::ImaginaryResidue { .. }) => {
                    None
                }
                Err(e) => return Err(e),
            };
            row.push(v);
            Ok(row)
        })
        .collect::<crate::error::Result<_>>()?;
    let mut header = axis_header(&c.grid);
    header.push(format!("H_{}", idx.map(Axis::name).concat()));
    Ok(Table { header, rows })
}

pub fn charge(m: &Model, c: &ChargeArgs) -> CliResult<ChargeResult> {
    let center = match (c.center, c.monopole) {
        (Some(p), _) => p,
        (None, Some(k)) => {
            let pts = locate_monopoles(m)?;
            pts.get(k)
                .map(|d| d.point)
                .ok_or_else(|| CliError::Config(format!("--monopole {k}: model has {} degenerate points", pts.len())))?
        }
        (None, None) => return Err(CliError::Config("give --center or --monopole".into())),
    };
    let r = match (c.surface, c.method) {
        (Surface::Cube, Integrator::Quadrature) => {
            dd_charge_cube(m, &center, c.half_width, c.nodes, CubeMethod::Quadrature, c.common.seed)
        }
        (Surface::Cube, Integrator::Montecarlo) => {
            dd_charge_cube(m, &center, c.half_width, c.samples, CubeMethod::MonteCarlo, c.common.seed)
        }
        (Surface::Sphere, Integrator::Montecarlo) => dd_charge_sphere(m, &center, c.radius, c.samples, c.common.seed),
        (Surface::Sphere, Integrator::Quadrature) => {
            return Err(CliError::Config("the sphere surface supports --method montecarlo only".into()))
        }
    };
    Ok(r?)
}

pub fn locate_table(m: &Model) -> CliResult<Table> {
    let mut t = Table::new(&[
        "s1",
        "s2",
        "phi_x",
        "phi_y",
        "phi_z",
        "phi_w",
        "residual",
        "expected_charge",
    ]);
    for d in locate_monopoles(m)? {
        let mut row = vec![Some(Cell::Int(d.labels.0 as i64)), Some(Cell::Int(d.labels.1 as i64))];
        row.extend(d.point.0.iter().map(|v| Some(Cell::Num(*v))));
        row.push(Some(Cell::Num(d.residual)));
        row.push(Some(Cell::Int(d.expected_charge as i64)));
        t.rows.push(row);
    }
    Ok(t)
}

pub fn phase_diagram_table(m: &Model, p: &PhaseDiagramArgs) -> CliResult<Table> {
    let (h1, h2) = match m {
        Model::Circuit(_) => ("ejl2_over_ejl1", "ejl3_over_ejl1"),
        Model::TripleDot(_) => ("vl_over_gamma", "vr_over_gamma"),
        Model::Canonical(_) => {
            return Err(CliError::Config("phase-diagram needs --model circuit or tripledot".into()))
        }
    };
    let grid: Vec<(f64, f64)> = p
        .ratio1
        .values()
        .into_iter()
        .flat_map(|a| p.ratio2.values().into_iter().map(move |b| (a, b)))
        .collect();
    let rows: Vec<Vec<Option<Cell>>> = grid
        .par_iter()
        .map(|&(a, b)| {
            let sample = match *m {
                Model::Circuit(mut c) => {
                    c.ej_l = [c.ej_l[0], a * c.ej_l[0], b * c.ej_l[0]];
                    Model::Circuit(c)
                }
                Model::TripleDot(mut t) => {
                    // ratios against Γx on the left and Γz on the right
                    t.v_l = a * t.gamma[0];
                    t.v_r = b * t.gamma[2];
                    Model::TripleDot(t)
                }
                Model::Canonical(_) => unreachable!(),
            };
            let (l, r) = classify_region(&sample);
            vec![
                Some(Cell::Num(a)),
                Some(Cell::Num(b)),
                Some(Cell::Text(format!("{:?}", l.tag))),
                Some(Cell::Num(l.margin)),
                Some(Cell::Text(format!("{:?}", r.tag))),
                Some(Cell::Num(r.margin)),
            ]
        })
        .collect();
    let mut t = Table::new(&[h1, h2, "left_class", "left_margin", "right_class", "right_margin"]);
    t.rows = rows;
    Ok(t)
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteResult {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

fn suite(name: &str, f: impl FnOnce() -> crate::error::Result<(bool, String)>) -> SuiteResult {
    let (pass, detail) = f().unwrap_or_else(|e| (false, format!("error: {e}")));
    SuiteResult {
        name: name.into(),
        pass,
        detail,
    }
}

/// Runs the built-in checks. `Quick` finishes in seconds.
pub fn validate(level: Level, seed: u64) -> Vec<SuiteResult> {
    let full = level == Level::Full;
    let circuit = Model::Circuit(CircuitParams::equal(1.0));
    let canonical = Model::Canonical(CanonicalChart::identity());
    let nodes = if full { 16 } else { 8 };
    let mut out = Vec::new();

    out.push(suite("gauge-invariance", || {
        let gamma: Regauge = |p| 0.7 * p.0[0] + 0.3 * p.0[1].sin();
        let mut worst: f64 = 0.0;
        for p in probe_points(if full { 10 } else { 4 }, seed) {
            let a = Geometry::new(&circuit).curvature_all(&p)?;
            let b = Geometry::new(&circuit).with_regauge(gamma).curvature_all(&p)?;
            for k in 0..4 {
                worst = worst.max((a[k] - b[k]).abs());
            }
        }
        Ok((worst <= 1e-6, format!("max deviation {worst:.2e}")))
    }));

    out.push(suite("oracle-equivalence", || {
        let mut worst: f64 = 0.0;
        for p in probe_points(if full { 20 } else { 6 }, seed) {
            let q = PhasePoint(p.0.map(|c| c / 2.0));
            let num = Geometry::new(&canonical).curvature_all(&q)?;
            let qv = crate::algebra::QVector::from_array(q.0);
            for (k, comp) in crate::geometry::COMPONENTS.iter().enumerate() {
                let want = analytic_curvature_canonical(qv, *comp)?;
                worst = worst.max((num[k] - want).abs() / want.abs().max(1e-3));
            }
        }
        Ok((worst <= 1e-3, format!("max relative error {worst:.2e}")))
    }));

    out.push(suite("truncation-convergence", || {
        let p = CircuitParams::equal(1.0);
        let pt = PhasePoint::new(0.5, 1.0, -0.7, 2.2);
        let a = circuit_full_spectrum(&p, &pt, 3)?;
        let b = circuit_full_spectrum(&p, &pt, 6)?;
        let worst = (0..3).map(|k| (a[k] - b[k]).abs()).fold(0.0, f64::max);
        let off = circuit_full_offset(&p);
        Ok((
            worst <= 1e-6 * p.e_c,
            format!("cutoff 3 vs 6: {worst:.2e}, lowest level {:.6}", b[0] - off),
        ))
    }));

    out.push(suite("quantization", || {
        let mut parts = Vec::new();
        let mut pass = true;
        for d in locate_monopoles(&circuit)? {
            let r = dd_charge_cube(&circuit, &d.point, DEFAULT_HALF_WIDTH, nodes, CubeMethod::Quadrature, seed)?;
            pass &= (r.q_value - d.expected_charge as f64).abs() <= 0.02;
            parts.push(format!("{:.4}", r.q_value));
        }
        if full {
            let td = Model::TripleDot(TripleDotParams::symmetric(1.0, 1.0));
            for d in locate_monopoles(&td)? {
                let r = dd_charge_cube(&td, &d.point, DEFAULT_HALF_WIDTH, nodes, CubeMethod::Quadrature, seed)?;
                pass &= (r.q_value - d.expected_charge as f64).abs() <= 0.02;
                parts.push(format!("{:.4}", r.q_value));
            }
        }
        Ok((pass, format!("charges {}", parts.join(" "))))
    }));

    out.push(suite("surface-independence", || {
        let d = locate_monopoles(&circuit)?[0];
        let c1 = dd_charge_cube(&circuit, &d.point, 0.3, nodes, CubeMethod::Quadrature, seed)?;
        let c2 = dd_charge_cube(&circuit, &d.point, 0.15, nodes, CubeMethod::Quadrature, seed)?;
        let s = dd_charge_sphere(&circuit, &d.point, 0.2, if full { 20_000 } else { 4_000 }, seed)?;
        let agree = |a: &ChargeResult, b: &ChargeResult| {
            (a.q_value - b.q_value).abs() <= 3.0 * a.error_estimate.hypot(b.error_estimate)
        };
        Ok((
            agree(&c1, &c2) && agree(&c1, &s) && agree(&c2, &s),
            format!("{:.4} / {:.4} / {:.4}", c1.q_value, c2.q_value, s.q_value),
        ))
    }));

    if full {
        out.push(suite("monte-carlo-scaling", || {
            let d = locate_monopoles(&circuit)?[0];
            let a = dd_charge_sphere(&circuit, &d.point, 0.2, 2_000, seed)?;
            let b = dd_charge_sphere(&circuit, &d.point, 0.2, 20_000, seed)?;
            let ratio = a.error_estimate / b.error_estimate;
            let ideal = 10f64.sqrt();
            Ok((
                ratio >= ideal / 1.5 && ratio <= ideal * 1.5,
                format!("standard-error ratio {ratio:.3} over one decade"),
            ))
        }));

        out.push(suite("convergence-order", || {
            let (mut e1, mut e2) = (0.0, 0.0);
            for p in probe_points(20, seed) {
                let q = PhasePoint(p.0.map(|c| c / 2.0));
                let qv = crate::algebra::QVector::from_array(q.0);
                let want = analytic_curvature_canonical(qv, crate::geometry::COMPONENTS[0])?;
                let err = |h: f64| -> crate::error::Result<f64> {
                    let g = Geometry::new(&canonical).with_steps(Steps::uniform(h));
                    Ok((g.curvature(&q, Axis::X, Axis::Y, Axis::Z)? - want).abs())
                };
                e1 += err(1e-3)?;
                e2 += err(5e-4)?;
            }
            let factor = e1 / e2;
            Ok(((2.5..=6.0).contains(&factor), format!("halving factor {factor:.3}")))
        }));
    }
    out
}

/// Points with every coordinate in `[1, 2.5]·±1`, away from the equal-EJ
/// circuit monopoles and from the canonical origin.
fn probe_points(n: usize, seed: u64) -> Vec<PhasePoint> {
    use rand::Rng;
    let circuit = Model::Circuit(CircuitParams::equal(1.0));
    let monopoles = locate_monopoles(&circuit).unwrap_or_default();
    let mut out = Vec::with_capacity(n);
    let mut i = 0u64;
    while out.len() < n {
        let mut rng = crate::topology::sample_rng(seed, i);
        i += 1;
        let p = PhasePoint(std::array::from_fn(|_| {
            let s = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            s * rng.random_range(1.0..2.5)
        }));
        if monopoles.iter().all(|d| d.point.torus_distance(&p) > 0.3) {
            out.push(p);
        }
    }
    out
}
