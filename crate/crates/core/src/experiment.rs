//! Batch experiment driver behind the `buscomp` binary.
//!
//! One JSON spec file describes one experiment (command, game config,
//! positions, run sizes, seed); outputs are written atomically into a
//! directory so interrupted runs never leave half-written artifacts.
//! Sweeps expand in-process, one subdirectory per parameter value, all
//! under the same master seed.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dynamics::{
    self, estimate_boundary_law, estimate_survival, noisy_regime_summary, run_trace_on_stream,
    DistanceTrace, Mode, TRACE_CSV_HEADER,
};
use crate::equilibria::{solve_coop, solve_noncoop, EquilibriumKind, EquilibriumProfile, QPolicy};
use crate::error::{Error, Result};
use crate::game_core::GameConfig;
use crate::oracle::{verify_epsilon_equilibrium, verify_social_optimum, Verdict, DEFAULT_GRID_N, DEFAULT_TOLERANCE_FACTOR};
use crate::strategy::MixedStrategy;
use crate::torus::{self, TorusPosition};

/// Fixed default seed so artifacts are reproducible even when the spec
/// omits one.
pub const DEFAULT_SEED: u64 = 20_240_817;

const DEFAULT_HORIZON: usize = 1000;
const DEFAULT_N_RUNS: usize = 10_000;
const DEFAULT_K_MAX: usize = 10;
const DEFAULT_N_TRACES: usize = 1;

/// Bins per uniform segment in strategy density output.
const DENSITY_BINS: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Solve,
    Verify,
    Simulate,
    Survival,
    Boundary,
    Noisy,
    Sweep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// A parameter axis: the inner command is re-run once per value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    /// A `GameConfig` field name (canonical JSON spelling).
    pub parameter: String,
    pub values: Vec<f64>,
    pub command: Command,
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}
fn default_horizon() -> usize {
    DEFAULT_HORIZON
}
fn default_n_runs() -> usize {
    DEFAULT_N_RUNS
}
fn default_k_max() -> usize {
    DEFAULT_K_MAX
}
fn default_n_traces() -> usize {
    DEFAULT_N_TRACES
}
fn default_grid_n() -> usize {
    DEFAULT_GRID_N
}
fn default_mode() -> Mode {
    Mode::Noncoop
}

/// One experiment, loadable from a single JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    pub config: GameConfig,
    /// Initial positions; alternatively give `d0` to place the buses at
    /// `(0, d0)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d0: Option<f64>,
    #[serde(default = "default_mode")]
    pub mode: Mode,
    #[serde(default = "default_horizon")]
    pub horizon: usize,
    #[serde(default = "default_n_runs")]
    pub n_runs: usize,
    #[serde(default = "default_n_traces")]
    pub n_traces: usize,
    #[serde(default = "default_k_max")]
    pub k_max: usize,
    #[serde(default = "default_grid_n")]
    pub grid_n: usize,
    /// Verification tolerance; defaults to `1e-6 * D`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
}

impl ExperimentSpec {
    pub fn from_json(json: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(json)?;
        spec.config.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    fn positions(&self) -> Result<(TorusPosition, TorusPosition)> {
        let big_d = self.config.route_length;
        match (self.x0, self.y0, self.d0) {
            (Some(x), Some(y), None) => {
                Ok((torus::reduce(x, big_d)?, torus::reduce(y, big_d)?))
            }
            (None, None, Some(d0)) => {
                Ok((torus::reduce(0.0, big_d)?, torus::reduce(d0, big_d)?))
            }
            (None, None, None) => Err(Error::Config(
                "spec needs either (x0, y0) or d0".into(),
            )),
            _ => Err(Error::Config(
                "give either both x0 and y0, or d0 alone".into(),
            )),
        }
    }

    fn d0(&self) -> Result<f64> {
        if let Some(d0) = self.d0 {
            return Ok(d0);
        }
        let (x, y) = self.positions()?;
        Ok(torus::minimal_distance(x, y, self.config.route_length))
    }

    fn tolerance(&self) -> f64 {
        self.tolerance
            .unwrap_or(DEFAULT_TOLERANCE_FACTOR * self.config.route_length)
    }
}

/// What an invocation produced.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    /// 0 success; 3 verification failure. Validation errors surface as
    /// `Err` and map to exit 2.
    pub exit_code: i32,
    pub summaries: Vec<String>,
    pub files: Vec<PathBuf>,
}

impl RunOutput {
    fn ok() -> Self {
        Self {
            exit_code: 0,
            summaries: vec![],
            files: vec![],
        }
    }
}

/// Writes via a temp file in the same directory, then renames into place.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let tmp = path.with_extension(format!(
        "{}.tmp",
        path.extension().and_then(|e| e.to_str()).unwrap_or("out")
    ));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

/// Discretizes a strategy into plot-ready rows: atoms as single rows,
/// each uniform segment as 40 equal-mass-density bins.
pub fn strategy_density_csv(s: &MixedStrategy) -> String {
    let mut out = String::from("component,speed_lo,speed_hi,mass\n");
    for &(v, p) in s.atoms() {
        out.push_str(&format!("atom,{v},{v},{p}\n"));
    }
    for &(lo, hi, p) in s.segments() {
        let w = (hi - lo) / DENSITY_BINS as f64;
        for i in 0..DENSITY_BINS {
            let a = lo + w * i as f64;
            let b = lo + w * (i + 1) as f64;
            out.push_str(&format!("bin,{a},{b},{}\n", p / DENSITY_BINS as f64));
        }
    }
    out
}

fn traces_csv(traces: &[DistanceTrace]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(vec![]);
    w.write_record(TRACE_CSV_HEADER)
        .map_err(|e| Error::Regime(format!("csv write failed: {e}")))?;
    for (i, t) in traces.iter().enumerate() {
        dynamics::write_trace_csv(&mut w, i as u64, t)?;
    }
    w.into_inner()
        .map_err(|e| Error::Regime(format!("csv flush failed: {e}")))
}

fn survival_csv(est: &dynamics::SurvivalEstimate) -> String {
    let mut out = String::from("k,p_hat,std_error,bound\n");
    for r in &est.rows {
        out.push_str(&format!("{},{},{},{}\n", r.k, r.p_hat, r.std_error, r.bound));
    }
    out
}

fn solve_profile(spec: &ExperimentSpec) -> Result<EquilibriumProfile> {
    let (x0, y0) = spec.positions()?;
    match spec.mode {
        Mode::Noncoop => solve_noncoop(x0, y0, &spec.config, QPolicy::default()),
        Mode::Coop => solve_coop(x0, y0, &spec.config),
    }
}

fn cmd_solve(spec: &ExperimentSpec, out_dir: &Path, format: Format) -> Result<RunOutput> {
    let profile = solve_profile(spec)?;
    let mut out = RunOutput::ok();
    let path = out_dir.join("profile.json");
    write_json(&path, &profile)?;
    out.files.push(path);
    if format == Format::Csv {
        for (name, s) in [
            ("strategy_x.csv", &profile.strategy_x),
            ("strategy_y.csv", &profile.strategy_y),
        ] {
            let path = out_dir.join(name);
            write_atomic(&path, strategy_density_csv(s).as_bytes())?;
            out.files.push(path);
        }
    }
    out.summaries.push(format!(
        "solve: case {} kind {:?} roles_swapped {}",
        profile.case_tag, profile.kind, profile.roles_swapped
    ));
    Ok(out)
}

fn cmd_verify(spec: &ExperimentSpec, out_dir: &Path, _format: Format) -> Result<RunOutput> {
    let profile = solve_profile(spec)?;
    let (x0, y0) = spec.positions()?;
    let report = if profile.kind == EquilibriumKind::SocialOptimum {
        verify_social_optimum(&profile, x0, y0, &spec.config, spec.grid_n, spec.tolerance())?
    } else {
        verify_epsilon_equilibrium(&profile, x0, y0, &spec.config, spec.grid_n, spec.tolerance())?
    };
    let mut out = RunOutput::ok();
    let path = out_dir.join("report.json");
    write_json(&path, &report)?;
    out.files.push(path);
    out.summaries.push(format!(
        "verify: case {} verdict {:?} max_gain ({:.3e}, {:.3e})",
        profile.case_tag, report.verdict, report.max_gain_x, report.max_gain_y
    ));
    if report.verdict == Verdict::Fail {
        out.exit_code = 3;
    }
    Ok(out)
}

fn cmd_simulate(spec: &ExperimentSpec, out_dir: &Path, format: Format) -> Result<RunOutput> {
    let (x0, y0) = spec.positions()?;
    let traces: Vec<DistanceTrace> = (0..spec.n_traces)
        .map(|i| {
            run_trace_on_stream(
                &spec.config,
                x0,
                y0,
                spec.mode,
                spec.horizon,
                spec.seed,
                i as u64,
            )
        })
        .collect::<Result<_>>()?;
    let mut out = RunOutput::ok();
    let path = out_dir.join("traces.csv");
    write_atomic(&path, &traces_csv(&traces)?)?;
    out.files.push(path);
    if format == Format::Json {
        let path = out_dir.join("traces.json");
        write_json(&path, &traces)?;
        out.files.push(path);
    }
    let escaped = traces.iter().filter(|t| t.n_escape.is_some()).count();
    out.summaries.push(format!(
        "simulate: {} trace(s), horizon {}, escaped {}",
        traces.len(),
        spec.horizon,
        escaped
    ));
    Ok(out)
}

fn cmd_survival(spec: &ExperimentSpec, out_dir: &Path, format: Format) -> Result<RunOutput> {
    let est = estimate_survival(&spec.config, spec.d0()?, spec.k_max, spec.n_runs, spec.seed)?;
    let mut out = RunOutput::ok();
    match format {
        Format::Csv => {
            let path = out_dir.join("survival.csv");
            write_atomic(&path, survival_csv(&est).as_bytes())?;
            out.files.push(path);
        }
        Format::Json => {
            let path = out_dir.join("survival.json");
            write_json(&path, &est)?;
            out.files.push(path);
        }
    }
    let tail = est.rows.last().map(|r| r.p_hat).unwrap_or(f64::NAN);
    out.summaries.push(format!(
        "survival: {} runs, P(N > {}) = {}",
        est.n_runs, spec.k_max, tail
    ));
    Ok(out)
}

fn cmd_boundary(spec: &ExperimentSpec, out_dir: &Path, format: Format) -> Result<RunOutput> {
    let est = estimate_boundary_law(&spec.config, spec.n_runs, spec.seed)?;
    let mut out = RunOutput::ok();
    let path = out_dir.join("boundary.json");
    write_json(&path, &est)?;
    out.files.push(path);
    if format == Format::Csv {
        let mut csv = String::from("m,probability\n");
        for &(m, p) in &est.m_pmf {
            csv.push_str(&format!("{m},{p}\n"));
        }
        let path = out_dir.join("boundary_m_pmf.csv");
        write_atomic(&path, csv.as_bytes())?;
        out.files.push(path);
    }
    out.summaries.push(format!(
        "boundary: mean M = {:.4}, P(d_M = 0) = {:.5}",
        est.mean_m, est.p_zero
    ));
    Ok(out)
}

fn cmd_noisy(spec: &ExperimentSpec, out_dir: &Path, _format: Format) -> Result<RunOutput> {
    let summary =
        noisy_regime_summary(&spec.config, spec.d0()?, spec.horizon, spec.n_runs, spec.seed)?;
    let mut out = RunOutput::ok();
    let path = out_dir.join("noisy.json");
    write_json(&path, &summary)?;
    out.files.push(path);
    out.summaries.push(format!(
        "noisy: sigma {}, noncoop reach {:.3}, occupation above d {:.2}",
        summary.sigma, summary.noncoop.reach_fraction, summary.noncoop.mean_occupation_above
    ));
    Ok(out)
}

/// Sets a `GameConfig` field by its canonical JSON name.
pub fn set_config_parameter(cfg: &mut GameConfig, name: &str, value: f64) -> Result<()> {
    match name {
        "D" => cfg.route_length = value,
        "T" => cfg.period = value,
        "v_min" => cfg.v_min = value,
        "v_max" => cfg.v_max = value,
        "p" => cfg.p = value,
        "lambda" => cfg.lambda = value,
        "c" => cfg.c = value,
        "k" => cfg.k = value,
        "epsilon" => cfg.epsilon = value,
        "sigma" => cfg.sigma = value,
        _ => {
            return Err(Error::Config(format!(
                "unknown sweep parameter '{name}' (expected a GameConfig field name)"
            )))
        }
    }
    Ok(())
}

fn cmd_sweep(spec: &ExperimentSpec, out_dir: &Path, format: Format) -> Result<RunOutput> {
    let sweep = spec
        .sweep
        .as_ref()
        .ok_or_else(|| Error::Config("sweep command needs a sweep section".into()))?;
    if sweep.command == Command::Sweep {
        return Err(Error::Config("sweeps do not nest".into()));
    }
    if sweep.values.is_empty() {
        return Err(Error::Config("sweep needs at least one value".into()));
    }
    let mut out = RunOutput::ok();
    for &value in &sweep.values {
        let mut point = spec.clone();
        point.sweep = None;
        point.command = Some(sweep.command);
        set_config_parameter(&mut point.config, &sweep.parameter, value)?;
        point.config.validate()?;
        let sub = out_dir.join(format!("{}={}", sweep.parameter, value));
        let mut result = run(&point, &sub, format)?;
        out.exit_code = out.exit_code.max(result.exit_code);
        out.files.append(&mut result.files);
        for line in result.summaries {
            out.summaries.push(format!("[{}={}] {}", sweep.parameter, value, line));
        }
    }
    Ok(out)
}

/// Dispatches a spec to its command handler, writing outputs under
/// `out_dir`.
pub fn run(spec: &ExperimentSpec, out_dir: &Path, format: Format) -> Result<RunOutput> {
    spec.config.validate()?;
    let command = spec
        .command
        .ok_or_else(|| Error::Config("no command given".into()))?;
    match command {
        Command::Solve => cmd_solve(spec, out_dir, format),
        Command::Verify => cmd_verify(spec, out_dir, format),
        Command::Simulate => cmd_simulate(spec, out_dir, format),
        Command::Survival => cmd_survival(spec, out_dir, format),
        Command::Boundary => cmd_boundary(spec, out_dir, format),
        Command::Noisy => cmd_noisy(spec, out_dir, format),
        Command::Sweep => cmd_sweep(spec, out_dir, format),
    }
}
