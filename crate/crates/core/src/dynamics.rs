//! Repeated play: each period the stage game is re-solved for the
//! current gap, one speed is sampled per player, and positions advance
//! (plus Gaussian displacement noise when `sigma > 0`).
//!
//! The object of interest is the minimal-distance process `{d_n}` and
//! two stopping times: `N`, the first period with `d_n` above the escape
//! distance, and `M`, the first period the process leaves the boundary
//! state `d_0 = d`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::equilibria::{
    epsilon_bound, solve_coop, solve_noncoop, CaseTag, QPolicy, BOUNDARY_TOL,
};
use crate::error::{Error, Result};
use crate::game_core::{final_positions, sample_noise, GameConfig, SpeedChoice};
use crate::torus::{self, PositionPair, TorusPosition};

/// Which stage game is replayed each period.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Noncoop,
    Coop,
}

/// Floor for the per-step slack, as a multiple of `D`.
const EPS_FLOOR: f64 = 1e-9;

/// The running state of a repeated game.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RepeatedGameState {
    pub positions: PositionPair,
    pub period: usize,
    pub d_n: f64,
    pub mode: Mode,
    /// Index of the random stream driving this trajectory.
    pub rng_stream: u64,
}

impl RepeatedGameState {
    pub fn new(x0: TorusPosition, y0: TorusPosition, cfg: &GameConfig, mode: Mode, rng_stream: u64) -> Self {
        let positions = PositionPair::new(x0, y0, cfg.route_length);
        Self {
            positions,
            period: 0,
            d_n: positions.minimal_distance(),
            mode,
            rng_stream,
        }
    }
}

/// One executed period of a trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub period: usize,
    /// Positions after the period.
    pub x: f64,
    pub y: f64,
    /// Minimal distance after the period.
    pub d_n: f64,
    pub vx_sampled: f64,
    pub vy_sampled: f64,
    /// Case of the stage game solved at the start of the period.
    pub case_tag: CaseTag,
    pub roles_swapped: bool,
}

/// A full simulated trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceTrace {
    /// `d_0, d_1, ..., d_horizon`.
    pub d_sequence: Vec<f64>,
    pub steps: Vec<StepRecord>,
    /// `N = min{n >= 0 : d_n > d}`, if reached within the horizon.
    pub n_escape: Option<usize>,
    /// First period the process leaves the boundary state, when started
    /// at `d_0 = d`.
    pub m_boundary: Option<usize>,
    /// `d_M`, when `M` is defined.
    pub d_m: Option<f64>,
    pub seed: u64,
    pub horizon: usize,
}

/// The stage configuration for gap `d_n`: the slack is pulled inside the
/// case's moving feasibility window (half the bound, floored at
/// `1e-9*D`), since a fixed epsilon cannot be feasible along the whole
/// path.
pub fn stage_config(d_n: f64, cfg: &GameConfig) -> GameConfig {
    let bound = epsilon_bound(d_n, cfg);
    let mut out = *cfg;
    if bound.is_finite() {
        let base = if cfg.epsilon > 0.0 {
            cfg.epsilon
        } else {
            bound / 10.0
        };
        // Half the bound keeps the slack strictly feasible; the floor
        // must itself respect that cap (noise can park d_n arbitrarily
        // close to 0 or d, shrinking the window below the nominal floor).
        let cap = bound / 2.0;
        out.epsilon = base.min(cap).max((EPS_FLOOR * cfg.route_length).min(cap));
    }
    out
}

/// Advances the state one period, returning the new state and the record
/// of what happened.
pub fn step(
    state: &RepeatedGameState,
    cfg: &GameConfig,
    rng: &mut ChaCha8Rng,
) -> Result<(RepeatedGameState, StepRecord)> {
    let scfg = stage_config(state.d_n, cfg);
    let (x0, y0) = (state.positions.x, state.positions.y);
    let profile = match state.mode {
        Mode::Noncoop => solve_noncoop(x0, y0, &scfg, QPolicy::default())?,
        Mode::Coop => solve_coop(x0, y0, &scfg)?,
    };
    let vx = SpeedChoice::new(profile.strategy_x.sample(rng), &scfg)?;
    let vy = SpeedChoice::new(profile.strategy_y.sample(rng), &scfg)?;
    let noise = if cfg.sigma > 0.0 {
        Some(sample_noise(rng))
    } else {
        None
    };
    let positions = final_positions(x0, y0, vx, vy, cfg, noise);
    let next = RepeatedGameState {
        positions,
        period: state.period + 1,
        d_n: positions.minimal_distance(),
        mode: state.mode,
        rng_stream: state.rng_stream,
    };
    let record = StepRecord {
        period: next.period,
        x: positions.x.value(),
        y: positions.y.value(),
        d_n: next.d_n,
        vx_sampled: vx.value(),
        vy_sampled: vy.value(),
        case_tag: profile.case_tag,
        roles_swapped: profile.roles_swapped,
    };
    Ok((next, record))
}

/// Simulates one trajectory on an explicit random stream; run indices map
/// to streams so batches are reproducible and order-independent.
pub fn run_trace_on_stream(
    cfg: &GameConfig,
    x0: TorusPosition,
    y0: TorusPosition,
    mode: Mode,
    horizon: usize,
    seed: u64,
    stream: u64,
) -> Result<DistanceTrace> {
    cfg.validate()?;
    if horizon < 1 {
        return Err(Error::Config("horizon must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut state = RepeatedGameState::new(x0, y0, cfg, mode, stream);
    let mut d_sequence = Vec::with_capacity(horizon + 1);
    let mut steps = Vec::with_capacity(horizon);
    d_sequence.push(state.d_n);
    for _ in 0..horizon {
        let (next, record) = step(&state, cfg, &mut rng)?;
        d_sequence.push(next.d_n);
        steps.push(record);
        state = next;
    }

    let d = cfg.escape_distance();
    let n_escape = d_sequence.iter().position(|&dn| dn > d);
    let boundary_tol = BOUNDARY_TOL * cfg.route_length;
    let started_on_boundary = (d_sequence[0] - d).abs() <= boundary_tol;
    let m_boundary = if started_on_boundary {
        d_sequence
            .iter()
            .enumerate()
            .skip(1)
            .find(|(_, &dn)| (dn - d).abs() > boundary_tol)
            .map(|(n, _)| n)
    } else {
        None
    };
    let d_m = m_boundary.map(|m| d_sequence[m]);
    Ok(DistanceTrace {
        d_sequence,
        steps,
        n_escape,
        m_boundary,
        d_m,
        seed,
        horizon,
    })
}

/// Simulates one trajectory; deterministic given `(cfg, seed)`.
pub fn run_trace(
    cfg: &GameConfig,
    x0: TorusPosition,
    y0: TorusPosition,
    mode: Mode,
    horizon: usize,
    seed: u64,
) -> Result<DistanceTrace> {
    run_trace_on_stream(cfg, x0, y0, mode, horizon, seed, 0)
}

/// One row of the empirical survival curve of `N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurvivalRow {
    pub k: usize,
    /// Empirical `P(N > k)`.
    pub p_hat: f64,
    pub std_error: f64,
    /// Reference geometric curve `(d/D)^k`.
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivalEstimate {
    pub rows: Vec<SurvivalRow>,
    pub n_runs: usize,
    pub seed: u64,
}

/// Monte Carlo survival curve of the escape time from the interior
/// regime `0 < d0 < d` under non-cooperative play without noise.
pub fn estimate_survival(
    cfg: &GameConfig,
    d0: f64,
    k_max: usize,
    n_runs: usize,
    seed: u64,
) -> Result<SurvivalEstimate> {
    cfg.validate()?;
    if cfg.sigma != 0.0 {
        return Err(Error::Regime("survival estimation requires sigma = 0".into()));
    }
    let d = cfg.escape_distance();
    let tol = BOUNDARY_TOL * cfg.route_length;
    if !(d0 > tol && d0 < d - tol) {
        return Err(Error::Regime(format!(
            "survival estimation needs 0 < d0 < d strictly, got d0 = {d0}, d = {d}"
        )));
    }
    if n_runs == 0 {
        return Err(Error::Config("n_runs must be >= 1".into()));
    }
    let x0 = torus::reduce(0.0, cfg.route_length)?;
    let y0 = torus::reduce(d0, cfg.route_length)?;
    // survive[k] counts runs with N > k; integer accumulation keeps the
    // result independent of run completion order.
    let mut survive = vec![0u64; k_max + 1];
    for run in 0..n_runs {
        let trace = run_trace_on_stream(cfg, x0, y0, Mode::Noncoop, k_max + 1, seed, run as u64)?;
        let escape = trace.n_escape.unwrap_or(usize::MAX);
        for (k, slot) in survive.iter_mut().enumerate() {
            if escape > k {
                *slot += 1;
            }
        }
    }
    let n = n_runs as f64;
    let rows = survive
        .iter()
        .enumerate()
        .map(|(k, &count)| {
            let p_hat = count as f64 / n;
            SurvivalRow {
                k,
                p_hat,
                std_error: (p_hat * (1.0 - p_hat) / n).sqrt(),
                bound: (d / cfg.route_length).powi(k as i32),
            }
        })
        .collect();
    Ok(SurvivalEstimate {
        rows,
        n_runs,
        seed,
    })
}

/// Empirical law of the boundary exit time `M` and of the exit state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryLawEstimate {
    /// `(m, empirical P(M = m))`, for observed values of `M`.
    pub m_pmf: Vec<(usize, f64)>,
    pub mean_m: f64,
    pub std_error_mean_m: f64,
    /// Empirical `P(d_M = 0)`.
    pub p_zero: f64,
    pub std_error_p_zero: f64,
    /// Fraction of exits with `0 < d_M <= d`.
    pub p_low_positive: f64,
    pub n_runs: usize,
    pub seed: u64,
}

/// Monte Carlo law of `M` starting exactly on the boundary `d0 = d`
/// under non-cooperative play without noise.
pub fn estimate_boundary_law(cfg: &GameConfig, n_runs: usize, seed: u64) -> Result<BoundaryLawEstimate> {
    cfg.validate()?;
    if cfg.sigma != 0.0 {
        return Err(Error::Regime("boundary estimation requires sigma = 0".into()));
    }
    if n_runs == 0 {
        return Err(Error::Config("n_runs must be >= 1".into()));
    }
    let d = cfg.escape_distance();
    if !(d > 0.0) {
        return Err(Error::Regime("boundary regime needs v_min < v_max".into()));
    }
    let x0 = torus::reduce(0.0, cfg.route_length)?;
    let y0 = torus::reduce(d, cfg.route_length)?;
    // M is geometric, so a horizon of a few hundred makes truncation
    // astronomically unlikely; truncated runs are counted at the horizon.
    let horizon = 512;
    let tol = BOUNDARY_TOL * cfg.route_length;

    let mut m_counts: std::collections::BTreeMap<usize, u64> = Default::default();
    let mut sum_m: u64 = 0;
    let mut sum_m_sq: u128 = 0;
    let mut zeros: u64 = 0;
    let mut low_positive: u64 = 0;
    for run in 0..n_runs {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(run as u64);
        let mut state = RepeatedGameState::new(x0, y0, cfg, Mode::Noncoop, run as u64);
        let mut m = horizon;
        let mut dm = f64::NAN;
        for n in 1..=horizon {
            let (next, _) = step(&state, cfg, &mut rng)?;
            state = next;
            if (state.d_n - d).abs() > tol {
                m = n;
                dm = state.d_n;
                break;
            }
        }
        *m_counts.entry(m).or_insert(0) += 1;
        sum_m += m as u64;
        sum_m_sq += (m as u128) * (m as u128);
        if dm.abs() <= tol {
            zeros += 1;
        } else if dm <= d {
            low_positive += 1;
        }
    }
    let n = n_runs as f64;
    let mean_m = sum_m as f64 / n;
    let var_m = (sum_m_sq as f64 / n - mean_m * mean_m).max(0.0);
    let p_zero = zeros as f64 / n;
    Ok(BoundaryLawEstimate {
        m_pmf: m_counts
            .into_iter()
            .map(|(m, c)| (m, c as f64 / n))
            .collect(),
        mean_m,
        std_error_mean_m: (var_m / n).sqrt(),
        p_zero,
        std_error_p_zero: (p_zero * (1.0 - p_zero) / n).sqrt(),
        p_low_positive: low_positive as f64 / n,
        n_runs,
        seed,
    })
}

/// Noise summaries for one mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeNoiseSummary {
    /// Fraction of runs in which `d_n` reached the escape distance from
    /// below within the horizon.
    pub reach_fraction: f64,
    /// Mean first passage period among runs that reached.
    pub mean_first_passage: Option<f64>,
    /// Mean number of periods per run with `d_n > d`.
    pub mean_occupation_above: f64,
    /// Largest `|d_n - D/2|` observed after the gap first hits `D/2`
    /// (cooperative mode only): with noise the gap never locks.
    pub sup_gap_deviation_after_lock: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoisySummary {
    pub noncoop: ModeNoiseSummary,
    pub coop: ModeNoiseSummary,
    pub sigma: f64,
    pub horizon: usize,
    pub n_runs: usize,
    pub seed: u64,
}

/// Monte Carlo noise summary for one mode. Streams are split by mode
/// (even for non-cooperative, odd for cooperative play) so the two
/// summaries of [`noisy_regime_summary`] are independent.
pub fn noisy_mode_summary(
    cfg: &GameConfig,
    d0: f64,
    mode: Mode,
    horizon: usize,
    n_runs: usize,
    seed: u64,
) -> Result<ModeNoiseSummary> {
    cfg.validate()?;
    if n_runs == 0 || horizon == 0 {
        return Err(Error::Config("n_runs and horizon must be >= 1".into()));
    }
    let x0 = torus::reduce(0.0, cfg.route_length)?;
    let y0 = torus::reduce(d0, cfg.route_length)?;
    let d = cfg.escape_distance();
    let half = cfg.route_length / 2.0;
    let lock_tol = BOUNDARY_TOL * cfg.route_length;

    let mut reached: u64 = 0;
    let mut first_passage_sum: u64 = 0;
    let mut occupation: u64 = 0;
    let mut sup_dev = f64::NEG_INFINITY;
    let mut any_lock = false;
    for run in 0..n_runs {
        let stream = 2 * run as u64 + if mode == Mode::Coop { 1 } else { 0 };
        let trace = run_trace_on_stream(cfg, x0, y0, mode, horizon, seed, stream)?;
        if let Some(n) = trace.d_sequence.iter().position(|&dn| dn >= d) {
            reached += 1;
            first_passage_sum += n as u64;
        }
        occupation += trace.d_sequence.iter().filter(|&&dn| dn > d).count() as u64;
        if mode == Mode::Coop {
            if let Some(first) = trace
                .d_sequence
                .iter()
                .position(|&dn| (dn - half).abs() <= lock_tol)
            {
                any_lock = true;
                for &dn in &trace.d_sequence[first..] {
                    sup_dev = sup_dev.max((dn - half).abs());
                }
            }
        }
    }
    let n = n_runs as f64;
    Ok(ModeNoiseSummary {
        reach_fraction: reached as f64 / n,
        mean_first_passage: (reached > 0).then(|| first_passage_sum as f64 / reached as f64),
        mean_occupation_above: occupation as f64 / n,
        sup_gap_deviation_after_lock: (mode == Mode::Coop && any_lock).then_some(sup_dev),
    })
}

/// Monte Carlo summaries of the noisy regime, for both modes.
pub fn noisy_regime_summary(
    cfg: &GameConfig,
    d0: f64,
    horizon: usize,
    n_runs: usize,
    seed: u64,
) -> Result<NoisySummary> {
    Ok(NoisySummary {
        noncoop: noisy_mode_summary(cfg, d0, Mode::Noncoop, horizon, n_runs, seed)?,
        coop: noisy_mode_summary(cfg, d0, Mode::Coop, horizon, n_runs, seed)?,
        sigma: cfg.sigma,
        horizon,
        n_runs,
        seed,
    })
}

/// Writes one trace as CSV rows (one per executed period).
pub fn write_trace_csv<W: std::io::Write>(
    writer: &mut csv::Writer<W>,
    run_id: u64,
    trace: &DistanceTrace,
) -> Result<()> {
    for s in &trace.steps {
        writer
            .write_record(&[
                run_id.to_string(),
                s.period.to_string(),
                s.x.to_string(),
                s.y.to_string(),
                s.d_n.to_string(),
                s.vx_sampled.to_string(),
                s.vy_sampled.to_string(),
                s.case_tag.as_str().to_string(),
                s.roles_swapped.to_string(),
            ])
            .map_err(|e| Error::Regime(format!("csv write failed: {e}")))?;
    }
    Ok(())
}

/// The CSV header matching [`write_trace_csv`].
pub const TRACE_CSV_HEADER: [&str; 9] = [
    "run_id",
    "period",
    "x",
    "y",
    "d_n",
    "vx_sampled",
    "vy_sampled",
    "case_tag",
    "roles_swapped",
];

/// Periods a cooperative gap needs to reach `D/2` without noise.
pub fn coop_lock_horizon(cfg: &GameConfig) -> usize {
    let d = cfg.escape_distance();
    if d <= 0.0 {
        return usize::MAX;
    }
    (cfg.route_length / (2.0 * d)).ceil() as usize
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::reduce;
    use approx::assert_abs_diff_eq;

    fn cfg() -> GameConfig {
        GameConfig {
            route_length: 10.0,
            period: 1.0,
            v_min: 1.0,
            v_max: 4.0,
            p: 1.0,
            lambda: 1.0,
            c: 0.0,
            k: 1.0,
            epsilon: 0.05,
            sigma: 0.0,
        }
    }

    fn pos(v: f64) -> TorusPosition {
        reduce(v, 10.0).unwrap()
    }

    #[test]
    fn absorbing_regimes() {
        let c = cfg();
        // d0 > d: both crawl, rigid translation, N = 0
        let t = run_trace(&c, pos(0.0), pos(5.0), Mode::Noncoop, 20, 7).unwrap();
        assert_eq!(t.n_escape, Some(0));
        assert!(t.d_sequence.iter().all(|&dn| (dn - 5.0).abs() < 1e-9));

        // d0 = 0: coincidence forever
        let t = run_trace(&c, pos(2.0), pos(2.0), Mode::Noncoop, 20, 7).unwrap();
        assert_eq!(t.n_escape, None);
        assert!(t.d_sequence.iter().all(|&dn| dn.abs() < 1e-9));
    }

    #[test]
    fn coop_reaches_half_circumference_and_locks() {
        let c = cfg();
        for d0 in [0.5, 1.0, 3.0, 4.9] {
            let t = run_trace(&c, pos(0.0), pos(d0), Mode::Coop, 10, 3).unwrap();
            let lock = coop_lock_horizon(&c); // ceil(10/6) = 2
            assert_eq!(lock, 2);
            let hit = t
                .d_sequence
                .iter()
                .position(|&dn| (dn - 5.0).abs() < 1e-9)
                .unwrap();
            assert!(hit <= lock, "d0 = {d0}: reached at {hit}");
            assert!(t.d_sequence[hit..]
                .iter()
                .all(|&dn| (dn - 5.0).abs() < 1e-9));
        }
    }

    #[test]
    fn coop_gap_growth_step() {
        // d_n = 1 grows by the full escape distance in one period
        let c = cfg();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let state = RepeatedGameState::new(pos(0.0), pos(1.0), &c, Mode::Coop, 0);
        let (next, rec) = step(&state, &c, &mut rng).unwrap();
        assert_abs_diff_eq!(next.d_n, 4.0);
        assert_eq!(rec.case_tag, CaseTag::CoopB);
    }

    #[test]
    fn deterministic_replay() {
        let c = cfg();
        let a = run_trace(&c, pos(0.0), pos(1.0), Mode::Noncoop, 50, 42).unwrap();
        let b = run_trace(&c, pos(0.0), pos(1.0), Mode::Noncoop, 50, 42).unwrap();
        assert_eq!(a, b);
        let other = run_trace(&c, pos(0.0), pos(1.0), Mode::Noncoop, 50, 43).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn minimal_distance_never_exceeds_half() {
        let mut c = cfg();
        c.sigma = 0.1;
        for seed in 0..5 {
            for mode in [Mode::Noncoop, Mode::Coop] {
                let t = run_trace(&c, pos(0.0), pos(1.0), mode, 100, seed).unwrap();
                assert!(t.d_sequence.iter().all(|&dn| dn <= 5.0 + 1e-9));
            }
        }
    }

    #[test]
    fn survival_estimate_shape() {
        let c = cfg();
        let est = estimate_survival(&c, 1.0, 4, 4000, 11).unwrap();
        assert_eq!(est.rows.len(), 5);
        // not yet escaped at time zero
        assert_abs_diff_eq!(est.rows[0].p_hat, 1.0);
        assert_abs_diff_eq!(est.rows[0].bound, 1.0);
        assert_abs_diff_eq!(est.rows[3].bound, 0.027, epsilon = 1e-12);
        // survival is non-increasing in k
        for w in est.rows.windows(2) {
            assert!(w[1].p_hat <= w[0].p_hat + 1e-12);
        }
        // escape happens: the curve decays
        assert!(est.rows[4].p_hat < 0.5);

        // regime guards
        assert!(estimate_survival(&c, 0.0, 4, 10, 1).is_err());
        assert!(estimate_survival(&c, 3.0, 4, 10, 1).is_err());
        assert!(estimate_survival(&c, 5.0, 4, 10, 1).is_err());
        let mut noisy = c;
        noisy.sigma = 0.1;
        assert!(estimate_survival(&noisy, 1.0, 4, 10, 1).is_err());
    }

    #[test]
    fn boundary_law_matches_geometric_parameter() {
        // parameter 1 - (1 - 2e/D)(2d/D) = 0.406 -> E[M] ~ 2.4631
        let c = cfg();
        let est = estimate_boundary_law(&c, 20_000, 5).unwrap();
        let theory_mean = 1.0 / 0.406;
        assert!(
            (est.mean_m - theory_mean).abs() <= 4.0 * est.std_error_mean_m,
            "mean {} vs {}",
            est.mean_m,
            theory_mean
        );
        let theory_p0 = 4.0 * 0.05 * 3.0 / (100.0 * 0.406);
        assert!(
            (est.p_zero - theory_p0).abs() <= 4.0 * est.std_error_p_zero.max(1e-3),
            "p_zero {} vs {}",
            est.p_zero,
            theory_p0
        );
        let mass: f64 = est.m_pmf.iter().map(|&(_, p)| p).sum();
        assert_abs_diff_eq!(mass, 1.0, epsilon = 1e-9);

        assert!(estimate_boundary_law(&GameConfig { sigma: 0.1, ..c }, 10, 1).is_err());
    }

    #[test]
    fn noisy_summary_smoke() {
        let mut c = cfg();
        c.sigma = 0.1;
        let s = noisy_regime_summary(&c, 1.0, 200, 50, 9).unwrap();
        // noise guarantees eventual escape
        assert!(s.noncoop.reach_fraction > 0.9);
        assert!(s.noncoop.mean_first_passage.is_some());
        // the cooperative gap cannot lock at D/2 under noise
        let dev = s.coop.sup_gap_deviation_after_lock;
        if let Some(dev) = dev {
            assert!(dev > 0.0);
        }
        // sigma = 0 reduces to the deterministic trace
        let mut c0 = c;
        c0.sigma = 0.0;
        let s0 = noisy_regime_summary(&c0, 1.0, 20, 3, 9).unwrap();
        assert_abs_diff_eq!(s0.coop.reach_fraction, 1.0);
        assert_eq!(s0.coop.mean_first_passage, Some(1.0)); // 1 -> 4 >= d in one step
        assert_abs_diff_eq!(s0.coop.sup_gap_deviation_after_lock.unwrap(), 0.0);
    }

    #[test]
    fn trace_csv_format() {
        let c = cfg();
        let t = run_trace(&c, pos(0.0), pos(1.0), Mode::Noncoop, 3, 1).unwrap();
        let mut w = csv::Writer::from_writer(vec![]);
        w.write_record(TRACE_CSV_HEADER).unwrap();
        write_trace_csv(&mut w, 0, &t).unwrap();
        let data = String::from_utf8(w.into_inner().unwrap()).unwrap();
        let mut lines = data.lines();
        assert_eq!(
            lines.next().unwrap(),
            "run_id,period,x,y,d_n,vx_sampled,vy_sampled,case_tag,roles_swapped"
        );
        assert_eq!(lines.count(), 3);
        assert!(data.contains("NC-"));
    }
}
