//! Brute-force verification of equilibria by dense grid search.
//!
//! Expected payoff is linear in the deviator's mixture, so the best pure
//! deviation dominates every mixed one; searching pure speeds suffices.
//! Conditional payoffs are piecewise linear in the deviation speed with
//! breakpoints where the deviator exactly catches (or is caught by) a
//! feature of the opponent's support, so the uniform grid is augmented
//! with those alignment speeds and small offsets around them.
//!
//! All verification runs in normalized units (`p*lambda = 1`, `c = 0`)
//! so tolerances have a single scale: distance.

use serde::{Deserialize, Serialize};

use crate::equilibria::EquilibriumProfile;
use crate::error::{Error, Result};
use crate::game_core::{coop_utility, GameConfig, SpeedChoice};
use crate::strategy::{self, MixedStrategy, Player};
use crate::torus::{self, TorusPosition};

pub const DEFAULT_GRID_N: usize = 2001;

/// Default verification tolerance, as a multiple of `D`.
pub const DEFAULT_TOLERANCE_FACTOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
}

/// Outcome of a grid verification, in normalized (distance) units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub max_gain_x: f64,
    pub max_gain_y: f64,
    pub best_deviation_x: SpeedChoice,
    pub best_deviation_y: SpeedChoice,
    /// Largest spread of conditional payoffs across a player's own
    /// support; near zero when the mixture makes the opponent indifferent.
    pub indifference_residual: f64,
    pub grid_n: usize,
    pub tolerance: f64,
    /// The slack the profile claims; pass means no deviation gains more
    /// than this (plus tolerance).
    pub epsilon: f64,
    pub verdict: Verdict,
}

fn normalized(cfg: &GameConfig) -> GameConfig {
    GameConfig {
        p: 1.0,
        lambda: 1.0,
        c: 0.0,
        ..*cfg
    }
}

fn own_gap(x0: TorusPosition, y0: TorusPosition, cfg: &GameConfig, player: Player) -> f64 {
    match player {
        Player::X => torus::dx(x0, y0, cfg.route_length),
        Player::Y => torus::dy(x0, y0, cfg.route_length),
    }
}

/// Candidate deviation speeds: uniform grid plus payoff breakpoints.
fn candidate_speeds(
    opponent: &MixedStrategy,
    gap: f64,
    cfg: &GameConfig,
    grid_n: usize,
) -> Vec<f64> {
    let (lo, hi) = (cfg.v_min, cfg.v_max);
    let width = hi - lo;
    let mut cands: Vec<f64> = Vec::with_capacity(grid_n + 24 * opponent.support_features().len());
    if grid_n >= 2 && width > 0.0 {
        for i in 0..grid_n {
            cands.push(lo + width * i as f64 / (grid_n - 1) as f64);
        }
    } else {
        cands.push(lo);
    }
    let t = cfg.period;
    let eps = if cfg.epsilon > 0.0 {
        cfg.epsilon
    } else {
        DEFAULT_TOLERANCE_FACTOR * cfg.route_length
    };
    let delta = 1e-9 * width.max(1.0);
    for f in opponent.support_features() {
        // Alignment speeds: catching the feature (shift by gap) or being
        // lapped by it (shift by gap - D), plus the feature itself.
        for base in [f, f + gap / t, f + (gap - cfg.route_length) / t] {
            for off in [0.0, eps / t, -eps / t, delta, -delta] {
                let v = base + off;
                if (lo..=hi).contains(&v) {
                    cands.push(v);
                }
            }
        }
    }
    cands.push(lo);
    cands.push(hi);
    cands.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    cands.dedup();
    cands
}

/// Best pure response over the augmented grid; ties break toward the
/// lower speed. Returns the speed and its expected payoff in normalized
/// units.
pub fn grid_best_reply(
    opponent: &MixedStrategy,
    x0: TorusPosition,
    y0: TorusPosition,
    cfg: &GameConfig,
    player: Player,
    grid_n: usize,
) -> Result<(SpeedChoice, f64)> {
    let ncfg = normalized(cfg);
    opponent.validate(&ncfg)?;
    let gap = own_gap(x0, y0, &ncfg, player);
    let mut best_v = ncfg.v_min;
    let mut best_u = f64::NEG_INFINITY;
    for v in candidate_speeds(opponent, gap, &ncfg, grid_n) {
        let u = strategy::conditional_expected_utility(
            x0,
            y0,
            SpeedChoice::new(v, &ncfg)?,
            opponent,
            &ncfg,
            player,
        );
        if u > best_u {
            best_u = u;
            best_v = v;
        }
    }
    Ok((SpeedChoice::new(best_v, &ncfg)?, best_u))
}

/// Conditional payoffs at a strategy's own support points (segment
/// endpoints are probed just inside the open interval).
fn support_payoffs(
    own: &MixedStrategy,
    opponent: &MixedStrategy,
    x0: TorusPosition,
    y0: TorusPosition,
    cfg: &GameConfig,
    player: Player,
) -> Vec<f64> {
    let mut out = vec![];
    let mut eval = |v: f64| {
        if let Ok(s) = SpeedChoice::new(v, cfg) {
            out.push(strategy::conditional_expected_utility(
                x0, y0, s, opponent, cfg, player,
            ));
        }
    };
    for &(v, p) in own.atoms() {
        if p > 0.0 {
            eval(v);
        }
    }
    for &(lo, hi, p) in own.segments() {
        if p > 0.0 {
            let inset = 1e-9 * (hi - lo);
            eval(lo + inset);
            eval((lo + hi) / 2.0);
            eval(hi - inset);
        }
    }
    out
}

/// Checks that no unilateral pure deviation gains more than the profile's
/// slack, and measures how close the mixtures come to making the opponent
/// indifferent across their own support.
pub fn verify_epsilon_equilibrium(
    profile: &EquilibriumProfile,
    x0: TorusPosition,
    y0: TorusPosition,
    cfg: &GameConfig,
    grid_n: usize,
    tolerance: f64,
) -> Result<VerificationReport> {
    let ncfg = normalized(cfg);
    ncfg.validate()?;
    profile.strategy_x.validate(&ncfg)?;
    profile.strategy_y.validate(&ncfg)?;
    let eps = profile.epsilon.unwrap_or(0.0);

    let base_x = strategy::expected_utility(
        x0,
        y0,
        &profile.strategy_x,
        &profile.strategy_y,
        &ncfg,
        Player::X,
    )?;
    let base_y = strategy::expected_utility(
        x0,
        y0,
        &profile.strategy_x,
        &profile.strategy_y,
        &ncfg,
        Player::Y,
    )?;
    let (dev_x, best_x) =
        grid_best_reply(&profile.strategy_y, x0, y0, &ncfg, Player::X, grid_n)?;
    let (dev_y, best_y) =
        grid_best_reply(&profile.strategy_x, x0, y0, &ncfg, Player::Y, grid_n)?;
    let max_gain_x = best_x - base_x;
    let max_gain_y = best_y - base_y;

    let spread = |vals: &[f64]| -> f64 {
        match vals
            .iter()
            .fold(None::<(f64, f64)>, |acc, &v| match acc {
                None => Some((v, v)),
                Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
            }) {
            Some((lo, hi)) => hi - lo,
            None => 0.0,
        }
    };
    let res_x = spread(&support_payoffs(
        &profile.strategy_x,
        &profile.strategy_y,
        x0,
        y0,
        &ncfg,
        Player::X,
    ));
    let res_y = spread(&support_payoffs(
        &profile.strategy_y,
        &profile.strategy_x,
        x0,
        y0,
        &ncfg,
        Player::Y,
    ));

    let pass = max_gain_x <= eps + tolerance && max_gain_y <= eps + tolerance;
    Ok(VerificationReport {
        max_gain_x,
        max_gain_y,
        best_deviation_x: dev_x,
        best_deviation_y: dev_y,
        indifference_residual: res_x.max(res_y),
        grid_n,
        tolerance,
        epsilon: eps,
        verdict: if pass { Verdict::Pass } else { Verdict::Fail },
    })
}

fn point_speed(s: &MixedStrategy, label: &str) -> Result<f64> {
    if s.segments().is_empty() && s.atoms().len() == 1 {
        Ok(s.atoms()[0].0)
    } else {
        Err(Error::Strategy(format!(
            "social-optimum verification needs a pure profile, {label} is mixed"
        )))
    }
}

/// Sweeps the grid of pure speed pairs and checks none beats the
/// profile's joint utility by more than the tolerance.
pub fn verify_social_optimum(
    profile: &EquilibriumProfile,
    x0: TorusPosition,
    y0: TorusPosition,
    cfg: &GameConfig,
    grid_n: usize,
    tolerance: f64,
) -> Result<VerificationReport> {
    let ncfg = normalized(cfg);
    ncfg.validate()?;
    if !(ncfg.k > 0.0) {
        return Err(Error::Regime(
            "social-optimum verification needs k > 0".into(),
        ));
    }
    let vx = point_speed(&profile.strategy_x, "strategy_x")?;
    let vy = point_speed(&profile.strategy_y, "strategy_y")?;
    let speed = |v: f64| SpeedChoice::new(v, &ncfg);
    let base = coop_utility(x0, y0, speed(vx)?, speed(vy)?, &ncfg);

    let n = grid_n.max(2);
    let width = ncfg.v_max - ncfg.v_min;
    let at = |i: usize| ncfg.v_min + width * i as f64 / (n - 1) as f64;
    let mut max_gain = f64::NEG_INFINITY;
    let mut best = (ncfg.v_min, ncfg.v_min);
    for i in 0..n {
        for j in 0..n {
            let (a, b) = (at(i), at(j));
            let u = coop_utility(x0, y0, speed(a)?, speed(b)?, &ncfg);
            if u - base > max_gain {
                max_gain = u - base;
                best = (a, b);
            }
        }
    }
    let pass = max_gain <= tolerance;
    Ok(VerificationReport {
        max_gain_x: max_gain,
        max_gain_y: max_gain,
        best_deviation_x: speed(best.0)?,
        best_deviation_y: speed(best.1)?,
        indifference_residual: 0.0,
        grid_n,
        tolerance,
        epsilon: 0.0,
        verdict: if pass { Verdict::Pass } else { Verdict::Fail },
    })
}
