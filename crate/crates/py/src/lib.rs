//! Python bindings: thin wrappers over the core crate.
//!
//! Structured values (configs, strategies, profiles, reports, traces)
//! cross the boundary as their canonical JSON strings, so the Python
//! side works with plain dicts after `json.loads` and nothing here can
//! drift from the Rust serialization.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use bus_competition::dynamics::{self, Mode};
use bus_competition::equilibria::{self, QPolicy};
use bus_competition::error::Error;
use bus_competition::game_core::GameConfig;
use bus_competition::oracle;
use bus_competition::strategy::{self, MixedStrategy, Player};
use bus_competition::torus;

fn err(e: Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn config(json: &str) -> PyResult<GameConfig> {
    GameConfig::from_json(json).map_err(err)
}

fn position(v: f64, cfg: &GameConfig) -> PyResult<torus::TorusPosition> {
    torus::reduce(v, cfg.route_length).map_err(err)
}

fn parse_player(name: &str) -> PyResult<Player> {
    match name {
        "x" => Ok(Player::X),
        "y" => Ok(Player::Y),
        other => Err(PyValueError::new_err(format!(
            "unknown player '{other}' (expected 'x' or 'y')"
        ))),
    }
}

fn parse_mode(name: &str) -> PyResult<Mode> {
    match name {
        "noncoop" => Ok(Mode::Noncoop),
        "coop" => Ok(Mode::Coop),
        other => Err(PyValueError::new_err(format!(
            "unknown mode '{other}' (expected 'noncoop' or 'coop')"
        ))),
    }
}

fn strategy_from_json(json: &str, cfg: &GameConfig) -> PyResult<MixedStrategy> {
    let s: MixedStrategy =
        serde_json::from_str(json).map_err(|e| PyValueError::new_err(e.to_string()))?;
    s.validate(cfg).map_err(err)?;
    Ok(s)
}

fn to_json<T: serde::Serialize>(value: &T) -> PyResult<String> {
    serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Reduce an absolute traveled distance to a position in `[0, D)`.
#[pyfunction]
fn reduce(r: f64, circumference: f64) -> PyResult<f64> {
    Ok(torus::reduce(r, circumference).map_err(err)?.value())
}

/// Directed distances `(dx, dy)` between two positions.
#[pyfunction]
fn directed_distances(x: f64, y: f64, circumference: f64) -> PyResult<(f64, f64)> {
    let px = torus::reduce(x, circumference).map_err(err)?;
    let py = torus::reduce(y, circumference).map_err(err)?;
    Ok((
        torus::dx(px, py, circumference),
        torus::dy(px, py, circumference),
    ))
}

/// The smaller of the two directed distances.
#[pyfunction]
fn minimal_distance(x: f64, y: f64, circumference: f64) -> PyResult<f64> {
    let px = torus::reduce(x, circumference).map_err(err)?;
    let py = torus::reduce(y, circumference).map_err(err)?;
    Ok(torus::minimal_distance(px, py, circumference))
}

/// Escape distance `T*(v_max - v_min)` of a config (JSON string).
#[pyfunction]
fn escape_distance(config_json: &str) -> PyResult<f64> {
    Ok(config(config_json)?.escape_distance())
}

/// Non-cooperative case tag ("NC-a" .. "NC-d") at the given positions.
#[pyfunction]
fn classify(x0: f64, y0: f64, config_json: &str) -> PyResult<String> {
    let cfg = config(config_json)?;
    let tag = equilibria::classify(position(x0, &cfg)?, position(y0, &cfg)?, &cfg).map_err(err)?;
    Ok(tag.as_str().to_string())
}

/// Solve the non-cooperative stage game; returns the profile as JSON.
#[pyfunction]
#[pyo3(signature = (x0, y0, config_json, q2=None))]
fn solve_noncoop(x0: f64, y0: f64, config_json: &str, q2: Option<f64>) -> PyResult<String> {
    let cfg = config(config_json)?;
    let profile = equilibria::solve_noncoop(
        position(x0, &cfg)?,
        position(y0, &cfg)?,
        &cfg,
        QPolicy { q2 },
    )
    .map_err(err)?;
    to_json(&profile)
}

/// Solve the cooperative stage game; returns the profile as JSON.
#[pyfunction]
fn solve_coop(x0: f64, y0: f64, config_json: &str) -> PyResult<String> {
    let cfg = config(config_json)?;
    let profile =
        equilibria::solve_coop(position(x0, &cfg)?, position(y0, &cfg)?, &cfg).map_err(err)?;
    to_json(&profile)
}

/// Expected utility of `player` ("x" or "y") under two mixed strategies
/// given as JSON.
#[pyfunction]
fn expected_utility(
    x0: f64,
    y0: f64,
    strategy_x_json: &str,
    strategy_y_json: &str,
    config_json: &str,
    player: &str,
) -> PyResult<f64> {
    let cfg = config(config_json)?;
    let sx = strategy_from_json(strategy_x_json, &cfg)?;
    let sy = strategy_from_json(strategy_y_json, &cfg)?;
    strategy::expected_utility(
        position(x0, &cfg)?,
        position(y0, &cfg)?,
        &sx,
        &sy,
        &cfg,
        parse_player(player)?,
    )
    .map_err(err)
}

/// Grid-verify a solved profile (JSON); returns the report as JSON.
#[pyfunction]
#[pyo3(signature = (profile_json, x0, y0, config_json, grid_n=2001, tolerance=None))]
fn verify_epsilon_equilibrium(
    profile_json: &str,
    x0: f64,
    y0: f64,
    config_json: &str,
    grid_n: usize,
    tolerance: Option<f64>,
) -> PyResult<String> {
    let cfg = config(config_json)?;
    let profile: bus_competition::equilibria::EquilibriumProfile =
        serde_json::from_str(profile_json).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let tol = tolerance.unwrap_or(1e-6 * cfg.route_length);
    let report = oracle::verify_epsilon_equilibrium(
        &profile,
        position(x0, &cfg)?,
        position(y0, &cfg)?,
        &cfg,
        grid_n,
        tol,
    )
    .map_err(err)?;
    to_json(&report)
}

/// Simulate one repeated-game trace; returns the trace as JSON.
#[pyfunction]
fn run_trace(
    config_json: &str,
    x0: f64,
    y0: f64,
    mode: &str,
    horizon: usize,
    seed: u64,
) -> PyResult<String> {
    let cfg = config(config_json)?;
    let trace = dynamics::run_trace(
        &cfg,
        position(x0, &cfg)?,
        position(y0, &cfg)?,
        parse_mode(mode)?,
        horizon,
        seed,
    )
    .map_err(err)?;
    to_json(&trace)
}

/// Monte Carlo survival curve of the escape time; returns JSON.
#[pyfunction]
fn estimate_survival(
    config_json: &str,
    d0: f64,
    k_max: usize,
    n_runs: usize,
    seed: u64,
) -> PyResult<String> {
    let cfg = config(config_json)?;
    let est = dynamics::estimate_survival(&cfg, d0, k_max, n_runs, seed).map_err(err)?;
    to_json(&est)
}

/// Monte Carlo law of the boundary exit time; returns JSON.
#[pyfunction]
fn estimate_boundary_law(config_json: &str, n_runs: usize, seed: u64) -> PyResult<String> {
    let cfg = config(config_json)?;
    let est = dynamics::estimate_boundary_law(&cfg, n_runs, seed).map_err(err)?;
    to_json(&est)
}

#[pymodule]
fn bus_competition_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(reduce, m)?)?;
    m.add_function(wrap_pyfunction!(directed_distances, m)?)?;
    m.add_function(wrap_pyfunction!(minimal_distance, m)?)?;
    m.add_function(wrap_pyfunction!(escape_distance, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(solve_noncoop, m)?)?;
    m.add_function(wrap_pyfunction!(solve_coop, m)?)?;
    m.add_function(wrap_pyfunction!(expected_utility, m)?)?;
    m.add_function(wrap_pyfunction!(verify_epsilon_equilibrium, m)?)?;
    m.add_function(wrap_pyfunction!(run_trace, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_survival, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_boundary_law, m)?)?;
    Ok(())
}
