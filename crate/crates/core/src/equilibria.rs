//! Closed-form equilibrium solvers.
//!
//! The case analysis is driven by the minimal distance `d0` between the
//! buses relative to the escape distance `d = T*(v_max - v_min)`:
//!
//! * `NC-a` (`d0 = 0`): both race at `v_max`; a Nash equilibrium.
//! * `NC-b` (`0 < d0 < d`): no Nash equilibrium exists; an
//!   epsilon-equilibrium mixes an atom at `v_min` with uniform pieces and
//!   an epsilon-shifted jump atom for the leader.
//! * `NC-c` (`d0 = d`): boundary epsilon-equilibrium in two-point mixtures.
//! * `NC-d` (`d0 > d`): the trailer can never catch up; both crawl at
//!   `v_min`, a Nash equilibrium.
//!
//! Cooperative play maximizes `ux + uy - k*|ux - uy|`. The sum is
//! constant, so for `k > 0` the optimum pushes the final gap as close to
//! `D/2` as possible.
//!
//! Throughout, "x" in the case formulas denotes the trailing player (the
//! one whose forward distance to the opponent is the minimal distance).
//! When the caller's labels are the other way around the solved profile
//! is swapped back and flagged via `roles_swapped`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game_core::{GameConfig, SpeedChoice, TIE_TOL};
use crate::strategy::MixedStrategy;
use crate::torus::{self, TorusPosition};

/// Relative tolerance (times `D`) for the `d0 = d` boundary case.
pub const BOUNDARY_TOL: f64 = 1e-9;

/// Which case of the closed-form analysis applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CaseTag {
    #[serde(rename = "NC-a")]
    NcA,
    #[serde(rename = "NC-b")]
    NcB,
    #[serde(rename = "NC-c")]
    NcC,
    #[serde(rename = "NC-d")]
    NcD,
    #[serde(rename = "COOP-a")]
    CoopA,
    #[serde(rename = "COOP-b")]
    CoopB,
    #[serde(rename = "COOP-c")]
    CoopC,
}

impl CaseTag {
    pub fn as_str(self) -> &'static str {
        match self {
            CaseTag::NcA => "NC-a",
            CaseTag::NcB => "NC-b",
            CaseTag::NcC => "NC-c",
            CaseTag::NcD => "NC-d",
            CaseTag::CoopA => "COOP-a",
            CaseTag::CoopB => "COOP-b",
            CaseTag::CoopC => "COOP-c",
        }
    }
}

impl std::fmt::Display for CaseTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// What kind of solution a profile is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EquilibriumKind {
    Nash,
    Epsilon,
    SocialOptimum,
}

/// Free parameter of the NC-b leader mixture: `q2` is the mass of the
/// uniform piece, constrained to `[0, (d-d0)/D]`; `q1 = d/D - q2` is the
/// mass of the `v_min` atom. `None` selects the canonical maximal value
/// `(d-d0)/D`, the unique choice making the trailer exactly indifferent.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct QPolicy {
    pub q2: Option<f64>,
}

/// Realized mixture weights of an NC-b profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixtureWeights {
    pub p1: f64,
    pub p2: f64,
    pub q1: f64,
    pub q2: f64,
}

/// The one-parameter family of cooperative optima in case COOP-c:
/// every feasible pair with `v_leader - v_trailer = speed_gap` is optimal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoopFamily {
    /// Required speed surplus of the leading over the trailing player.
    pub speed_gap: f64,
}

/// A solved stage game, in the caller's original player labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumProfile {
    pub strategy_x: MixedStrategy,
    pub strategy_y: MixedStrategy,
    pub case_tag: CaseTag,
    pub kind: EquilibriumKind,
    /// True when `y` is the trailing player, i.e. the case formulas were
    /// applied with the labels exchanged.
    pub roles_swapped: bool,
    /// Realized slack of an epsilon-equilibrium, in distance units.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weights: Option<MixtureWeights>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coop_family: Option<CoopFamily>,
    /// Other pure optima tied with the returned one (COOP-a orientation
    /// swap), as `(vx, vy)` pairs in original labels.
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub alternates: Vec<(f64, f64)>,
}

/// Minimal distance plus whether `y` (rather than `x`) is trailing.
fn orient(x0: TorusPosition, y0: TorusPosition, cfg: &GameConfig) -> (f64, bool) {
    let dx = torus::dx(x0, y0, cfg.route_length);
    let dy = torus::dy(x0, y0, cfg.route_length);
    if dy < dx {
        (dy, true)
    } else {
        (dx, false)
    }
}

/// Non-cooperative case for the initial positions.
pub fn classify(x0: TorusPosition, y0: TorusPosition, cfg: &GameConfig) -> Result<CaseTag> {
    cfg.validate()?;
    let (d0, _) = orient(x0, y0, cfg);
    Ok(classify_distance(d0, cfg))
}

/// Case tag from the minimal distance alone.
pub fn classify_distance(d0: f64, cfg: &GameConfig) -> CaseTag {
    let d = cfg.escape_distance();
    let big_d = cfg.route_length;
    if d0 <= TIE_TOL * big_d {
        CaseTag::NcA
    } else if (d0 - d).abs() <= BOUNDARY_TOL * big_d {
        CaseTag::NcC
    } else if d0 < d {
        CaseTag::NcB
    } else {
        CaseTag::NcD
    }
}

/// Strict upper bound on the feasible slack for the case at `d0`:
/// `min(d0, d-d0)/2` in NC-b, `d/2` in NC-c, unbounded otherwise.
pub fn epsilon_bound(d0: f64, cfg: &GameConfig) -> f64 {
    match classify_distance(d0, cfg) {
        CaseTag::NcB => d0.min(cfg.escape_distance() - d0) / 2.0,
        CaseTag::NcC => cfg.escape_distance() / 2.0,
        _ => f64::INFINITY,
    }
}

/// The slack the solvers will actually use: the configured epsilon when
/// one is given (rejecting infeasible values), otherwise a tenth of the
/// feasibility bound.
pub fn effective_epsilon(d0: f64, cfg: &GameConfig) -> Result<f64> {
    let bound = epsilon_bound(d0, cfg);
    if cfg.epsilon > 0.0 {
        if cfg.epsilon >= bound {
            return Err(Error::Epsilon(format!(
                "epsilon {} must be < {} for this case",
                cfg.epsilon, bound
            )));
        }
        Ok(cfg.epsilon)
    } else if bound.is_finite() {
        Ok(bound / 10.0)
    } else {
        // Pure Nash cases never read the slack.
        Ok(0.0)
    }
}

/// Solves the non-cooperative stage game.
pub fn solve_noncoop(
    x0: TorusPosition,
    y0: TorusPosition,
    cfg: &GameConfig,
    qpolicy: QPolicy,
) -> Result<EquilibriumProfile> {
    cfg.validate()?;
    let (d0, swapped) = orient(x0, y0, cfg);
    let tag = classify_distance(d0, cfg);
    let point = |v: f64| MixedStrategy::point_mass(SpeedChoice::new(v, cfg).expect("in band"));

    let profile = match tag {
        CaseTag::NcA => EquilibriumProfile {
            strategy_x: point(cfg.v_max),
            strategy_y: point(cfg.v_max),
            case_tag: tag,
            kind: EquilibriumKind::Nash,
            roles_swapped: swapped,
            epsilon: None,
            weights: None,
            coop_family: None,
            alternates: vec![],
        },
        CaseTag::NcD => EquilibriumProfile {
            strategy_x: point(cfg.v_min),
            strategy_y: point(cfg.v_min),
            case_tag: tag,
            kind: EquilibriumKind::Nash,
            roles_swapped: swapped,
            epsilon: None,
            weights: None,
            coop_family: None,
            alternates: vec![],
        },
        CaseTag::NcB => {
            let eps = effective_epsilon(d0, cfg)?;
            let (trailer, leader, weights) = case_b_strategies(d0, eps, cfg, qpolicy)?;
            let (sx, sy) = if swapped {
                (leader, trailer)
            } else {
                (trailer, leader)
            };
            EquilibriumProfile {
                strategy_x: sx,
                strategy_y: sy,
                case_tag: tag,
                kind: EquilibriumKind::Epsilon,
                roles_swapped: swapped,
                epsilon: Some(eps),
                weights: Some(weights),
                coop_family: None,
                alternates: vec![],
            }
        }
        CaseTag::NcC => {
            let eps = effective_epsilon(d0, cfg)?;
            let (trailer, leader) = case_c_strategies(eps, cfg)?;
            let (sx, sy) = if swapped {
                (leader, trailer)
            } else {
                (trailer, leader)
            };
            EquilibriumProfile {
                strategy_x: sx,
                strategy_y: sy,
                case_tag: tag,
                kind: EquilibriumKind::Epsilon,
                roles_swapped: swapped,
                epsilon: Some(eps),
                weights: None,
                coop_family: None,
                alternates: vec![],
            }
        }
        _ => unreachable!("classify_distance returns non-cooperative tags"),
    };
    Ok(profile)
}

/// The NC-b (trailer, leader) mixtures and realized weights.
fn case_b_strategies(
    d0: f64,
    eps: f64,
    cfg: &GameConfig,
    qpolicy: QPolicy,
) -> Result<(MixedStrategy, MixedStrategy, MixtureWeights)> {
    let d = cfg.escape_distance();
    let big_d = cfg.route_length;
    let t = cfg.period;
    // Case hypothesis also needs d below the leader's backward distance;
    // that follows from the short-horizon assumption (d < D/2 <= D - d0).
    debug_assert!(d < big_d - d0);

    let p2 = (d - d0) / big_d;
    let p1 = 1.0 - p2;
    let q2 = qpolicy.q2.unwrap_or(p2);
    if !(0.0..=p2 + 1e-15).contains(&q2) {
        return Err(Error::Strategy(format!(
            "q2 = {} outside [0, {}]",
            q2, p2
        )));
    }
    let q1 = d / big_d - q2;

    let trailer = MixedStrategy::new(
        vec![(cfg.v_min, p1)],
        vec![(cfg.v_min + d0 / t, cfg.v_max, p2)],
        cfg,
    )?;

    let jump_speed = cfg.v_max - d0 / t + eps / t;
    let mut atoms = vec![(cfg.v_min, q1), (jump_speed, 1.0 - d / big_d)];
    let mut segments = vec![];
    if q2 > 0.0 {
        segments.push((
            cfg.v_max - d0 / t - q2 * big_d / t,
            cfg.v_max - d0 / t,
            q2,
        ));
    }
    atoms.retain(|&(_, p)| p > 0.0);
    let leader = MixedStrategy::new(atoms, segments, cfg)?;

    Ok((trailer, leader, MixtureWeights { p1, p2, q1, q2 }))
}

/// The NC-c (trailer, leader) two-point mixtures.
fn case_c_strategies(eps: f64, cfg: &GameConfig) -> Result<(MixedStrategy, MixedStrategy)> {
    let d = cfg.escape_distance();
    let big_d = cfg.route_length;
    let trailer = MixedStrategy::new(
        vec![(cfg.v_min, 1.0 - 2.0 * eps / big_d), (cfg.v_max, 2.0 * eps / big_d)],
        vec![],
        cfg,
    )?;
    let leader = MixedStrategy::new(
        vec![
            (cfg.v_min, 2.0 * d / big_d),
            (cfg.v_min + eps / cfg.period, 1.0 - 2.0 * d / big_d),
        ],
        vec![],
        cfg,
    )?;
    Ok((trailer, leader))
}

/// Solves the cooperative stage game (requires `k > 0`; for `k = 0` the
/// joint utility is the constant zero-sum total and every profile is
/// optimal).
pub fn solve_coop(x0: TorusPosition, y0: TorusPosition, cfg: &GameConfig) -> Result<EquilibriumProfile> {
    cfg.validate()?;
    if !(cfg.k > 0.0) {
        return Err(Error::Regime(
            "cooperative solver needs k > 0; with k = 0 the joint utility is constant and all profiles are optimal".into(),
        ));
    }
    let (d0, swapped) = orient(x0, y0, cfg);
    let d = cfg.escape_distance();
    let big_d = cfg.route_length;
    let t = cfg.period;
    let point = |v: f64| MixedStrategy::point_mass(SpeedChoice::new(v, cfg).expect("in band"));

    if d0 <= TIE_TOL * big_d {
        // Coincident buses: split maximally; both orientations tie.
        return Ok(EquilibriumProfile {
            strategy_x: point(cfg.v_min),
            strategy_y: point(cfg.v_max),
            case_tag: CaseTag::CoopA,
            kind: EquilibriumKind::SocialOptimum,
            roles_swapped: swapped,
            epsilon: None,
            weights: None,
            coop_family: None,
            alternates: vec![(cfg.v_max, cfg.v_min)],
        });
    }

    // The final gap is d0 + T*(v_leader - v_trailer); push it to D/2.
    let (tag, v_trailer, v_leader, family) = if d0 + d < big_d / 2.0 {
        // Cannot reach D/2: widen maximally.
        (CaseTag::CoopB, cfg.v_min, cfg.v_max, None)
    } else {
        // Exactly reachable: one-parameter family; canonical member
        // minimizes total speed.
        let gap = (big_d / 2.0 - d0) / t;
        (
            CaseTag::CoopC,
            cfg.v_min,
            cfg.v_min + gap,
            Some(CoopFamily { speed_gap: gap }),
        )
    };
    let (sx, sy) = if swapped {
        (point(v_leader), point(v_trailer))
    } else {
        (point(v_trailer), point(v_leader))
    };
    Ok(EquilibriumProfile {
        strategy_x: sx,
        strategy_y: sy,
        case_tag: tag,
        kind: EquilibriumKind::SocialOptimum,
        roles_swapped: swapped,
        epsilon: None,
        weights: None,
        coop_family: family,
        alternates: vec![],
    })
}

fn require_case_b(d0: f64, cfg: &GameConfig) -> Result<f64> {
    cfg.validate()?;
    if classify_distance(d0, cfg) != CaseTag::NcB {
        return Err(Error::Regime(format!(
            "best replies are defined for 0 < d0 < d only, got d0 = {}, d = {}",
            d0,
            cfg.escape_distance()
        )));
    }
    effective_epsilon(d0, cfg)
}

/// Trailing player's analytic epsilon-best reply to the leader's pure
/// speed `v`, in the NC-b regime.
pub fn best_reply_x(v: f64, d0: f64, cfg: &GameConfig) -> Result<SpeedChoice> {
    let eps = require_case_b(d0, cfg)?;
    let t = cfg.period;
    let pivot = cfg.v_max - d0 / t;
    let tol = TIE_TOL * cfg.v_max.max(1.0);
    let reply = if (v - pivot).abs() <= tol {
        cfg.v_max
    } else if v < pivot {
        // Land epsilon past the leader; clamp keeps the band edge optimal.
        (v + d0 / t + eps / t).min(cfg.v_max)
    } else {
        cfg.v_min
    };
    SpeedChoice::new(reply, cfg)
}

/// Leading player's analytic epsilon-best reply to the trailer's pure
/// speed `v`, in the NC-b regime.
pub fn best_reply_y(v: f64, d0: f64, cfg: &GameConfig) -> Result<SpeedChoice> {
    let eps = require_case_b(d0, cfg)?;
    let t = cfg.period;
    let tol = TIE_TOL * cfg.v_max.max(1.0);
    let reply = if v < cfg.v_min + d0 / t - tol {
        cfg.v_min
    } else {
        v - d0 / t + eps / t
    };
    SpeedChoice::new(reply, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::reduce;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

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
    fn classification() {
        let c = cfg();
        assert_eq!(classify(pos(0.0), pos(0.0), &c).unwrap(), CaseTag::NcA);
        assert_eq!(classify(pos(0.0), pos(1.0), &c).unwrap(), CaseTag::NcB);
        assert_eq!(classify(pos(0.0), pos(3.0), &c).unwrap(), CaseTag::NcC);
        assert_eq!(classify(pos(0.0), pos(5.0), &c).unwrap(), CaseTag::NcD);
        // label order is irrelevant: minimal distance decides
        assert_eq!(classify(pos(1.0), pos(0.0), &c).unwrap(), CaseTag::NcB);
        assert_eq!(classify(pos(0.0), pos(9.0), &c).unwrap(), CaseTag::NcB);
        // boundary tolerance
        assert_eq!(
            classify_distance(3.0 + 1e-10, &c),
            CaseTag::NcC
        );
        assert_eq!(classify_distance(3.0 + 1e-7, &c), CaseTag::NcD);
    }

    #[test]
    fn case_tags_serialize_with_dashes() {
        assert_eq!(serde_json::to_string(&CaseTag::NcB).unwrap(), "\"NC-b\"");
        assert_eq!(
            serde_json::to_string(&CaseTag::CoopC).unwrap(),
            "\"COOP-c\""
        );
        assert_eq!(
            serde_json::to_string(&EquilibriumKind::SocialOptimum).unwrap(),
            "\"social_optimum\""
        );
    }

    #[test]
    fn nash_cases() {
        let c = cfg();
        let a = solve_noncoop(pos(0.0), pos(0.0), &c, QPolicy::default()).unwrap();
        assert_eq!(a.case_tag, CaseTag::NcA);
        assert_eq!(a.kind, EquilibriumKind::Nash);
        assert_eq!(a.strategy_x.atoms(), &[(4.0, 1.0)]);
        assert_eq!(a.strategy_y.atoms(), &[(4.0, 1.0)]);

        let d = solve_noncoop(pos(0.0), pos(5.0), &c, QPolicy::default()).unwrap();
        assert_eq!(d.case_tag, CaseTag::NcD);
        assert_eq!(d.kind, EquilibriumKind::Nash);
        assert_eq!(d.strategy_x.atoms(), &[(1.0, 1.0)]);
        assert_eq!(d.strategy_y.atoms(), &[(1.0, 1.0)]);
    }

    #[test]
    fn case_b_fixture() {
        let c = cfg();
        let p = solve_noncoop(pos(0.0), pos(1.0), &c, QPolicy::default()).unwrap();
        assert_eq!(p.case_tag, CaseTag::NcB);
        assert_eq!(p.kind, EquilibriumKind::Epsilon);
        assert!(!p.roles_swapped);

        let x = &p.strategy_x;
        assert_eq!(x.atoms().len(), 1);
        assert_abs_diff_eq!(x.atoms()[0].0, 1.0);
        assert_abs_diff_eq!(x.atoms()[0].1, 0.8);
        assert_eq!(x.segments(), &[(2.0, 4.0, 0.2)]);

        let y = &p.strategy_y;
        assert_eq!(y.atoms().len(), 2);
        assert_abs_diff_eq!(y.atoms()[0].0, 1.0);
        assert_abs_diff_eq!(y.atoms()[0].1, 0.1);
        assert_abs_diff_eq!(y.atoms()[1].0, 3.05);
        assert_abs_diff_eq!(y.atoms()[1].1, 0.7);
        assert_eq!(y.segments().len(), 1);
        assert_abs_diff_eq!(y.segments()[0].0, 1.0);
        assert_abs_diff_eq!(y.segments()[0].1, 3.0);
        assert_abs_diff_eq!(y.segments()[0].2, 0.2);

        let w = p.weights.unwrap();
        assert_abs_diff_eq!(w.p1, 0.8);
        assert_abs_diff_eq!(w.p2, 0.2);
        assert_abs_diff_eq!(w.q1, 0.1);
        assert_abs_diff_eq!(w.q2, 0.2);
        assert_abs_diff_eq!(p.epsilon.unwrap(), 0.05);
    }

    #[test]
    fn case_b_roles_swap() {
        let c = cfg();
        // y at 0, x at 1: y trails x by 9? no — dy(x0=1, y0=0) = dx(0,1) = 1.
        let p = solve_noncoop(pos(1.0), pos(0.0), &c, QPolicy::default()).unwrap();
        assert!(p.roles_swapped);
        // trailer form lands on y now
        assert_eq!(p.strategy_y.segments(), &[(2.0, 4.0, 0.2)]);
        assert_eq!(p.strategy_x.atoms().len(), 2);
    }

    #[test]
    fn case_b_segment_mean_identities() {
        // E(U) = v_max - p2*D/(2T), E(V) = v_max - d0/T - q2*D/(2T)
        let c = cfg();
        for d0 in [0.5, 1.0, 1.7, 2.5, 2.9] {
            let p = solve_noncoop(pos(0.0), pos(d0), &c, QPolicy::default()).unwrap();
            let w = p.weights.unwrap();
            let (lo, hi, _) = p.strategy_x.segments()[0];
            assert_abs_diff_eq!(
                (lo + hi) / 2.0,
                c.v_max - w.p2 * c.route_length / 2.0,
                epsilon = 1e-12
            );
            let (lo, hi, _) = p.strategy_y.segments()[0];
            assert_abs_diff_eq!(
                (lo + hi) / 2.0,
                c.v_max - d0 - w.q2 * c.route_length / 2.0,
                epsilon = 1e-12
            );
            assert_abs_diff_eq!(w.q1 + w.q2, 3.0 / 10.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn q_policy_override() {
        let c = cfg();
        let p = solve_noncoop(pos(0.0), pos(1.0), &c, QPolicy { q2: Some(0.1) }).unwrap();
        let w = p.weights.unwrap();
        assert_abs_diff_eq!(w.q1, 0.2);
        assert_abs_diff_eq!(w.q2, 0.1);
        // segment shrinks to width q2*D/T = 1
        assert_abs_diff_eq!(p.strategy_y.segments()[0].0, 2.0);
        assert_abs_diff_eq!(p.strategy_y.segments()[0].1, 3.0);

        // q2 = 0 degenerates the segment away
        let p = solve_noncoop(pos(0.0), pos(1.0), &c, QPolicy { q2: Some(0.0) }).unwrap();
        assert!(p.strategy_y.segments().is_empty());

        assert!(solve_noncoop(pos(0.0), pos(1.0), &c, QPolicy { q2: Some(0.3) }).is_err());
        assert!(solve_noncoop(pos(0.0), pos(1.0), &c, QPolicy { q2: Some(-0.1) }).is_err());
    }

    #[test]
    fn case_c_fixture() {
        let c = cfg();
        let p = solve_noncoop(pos(0.0), pos(3.0), &c, QPolicy::default()).unwrap();
        assert_eq!(p.case_tag, CaseTag::NcC);
        let x = &p.strategy_x;
        assert_abs_diff_eq!(x.atoms()[0].0, 1.0);
        assert_abs_diff_eq!(x.atoms()[0].1, 0.99);
        assert_abs_diff_eq!(x.atoms()[1].0, 4.0);
        assert_abs_diff_eq!(x.atoms()[1].1, 0.01);
        let y = &p.strategy_y;
        assert_abs_diff_eq!(y.atoms()[0].0, 1.0);
        assert_abs_diff_eq!(y.atoms()[0].1, 0.6);
        assert_abs_diff_eq!(y.atoms()[1].0, 1.05);
        assert_abs_diff_eq!(y.atoms()[1].1, 0.4);
    }

    #[test]
    fn epsilon_feasibility() {
        let mut c = cfg();
        // NC-b at d0 = 1 needs eps < min(1, 2)/2 = 0.5
        c.epsilon = 0.5;
        assert!(solve_noncoop(pos(0.0), pos(1.0), &c, QPolicy::default()).is_err());
        c.epsilon = 0.49;
        assert!(solve_noncoop(pos(0.0), pos(1.0), &c, QPolicy::default()).is_ok());
        // unspecified -> bound/10
        c.epsilon = 0.0;
        let p = solve_noncoop(pos(0.0), pos(1.0), &c, QPolicy::default()).unwrap();
        assert_abs_diff_eq!(p.epsilon.unwrap(), 0.05);
        // NC-c needs eps < d/2
        c.epsilon = 1.5;
        assert!(solve_noncoop(pos(0.0), pos(3.0), &c, QPolicy::default()).is_err());
        c.epsilon = 1.4;
        assert!(solve_noncoop(pos(0.0), pos(3.0), &c, QPolicy::default()).is_ok());
    }

    #[test]
    fn best_reply_examples() {
        let c = cfg();
        let d0 = 1.0;
        assert_abs_diff_eq!(best_reply_x(3.0, d0, &c).unwrap().value(), 4.0);
        assert_abs_diff_eq!(best_reply_x(3.5, d0, &c).unwrap().value(), 1.0);
        assert_abs_diff_eq!(best_reply_x(2.0, d0, &c).unwrap().value(), 3.05);
        // clamped near the top of the band
        assert_abs_diff_eq!(best_reply_x(2.98, d0, &c).unwrap().value(), 4.0);
        assert_abs_diff_eq!(best_reply_y(2.5, d0, &c).unwrap().value(), 1.55);
        assert_abs_diff_eq!(best_reply_y(1.5, d0, &c).unwrap().value(), 1.0);
        // outside the case-b regime
        assert!(best_reply_x(2.0, 0.0, &c).is_err());
        assert!(best_reply_x(2.0, 3.0, &c).is_err());
        assert!(best_reply_y(2.0, 5.0, &c).is_err());
    }

    #[test]
    fn coop_cases() {
        let c = cfg();
        let a = solve_coop(pos(0.0), pos(0.0), &c).unwrap();
        assert_eq!(a.case_tag, CaseTag::CoopA);
        assert_eq!(a.kind, EquilibriumKind::SocialOptimum);
        assert_eq!(a.strategy_x.atoms(), &[(1.0, 1.0)]);
        assert_eq!(a.strategy_y.atoms(), &[(4.0, 1.0)]);
        assert_eq!(a.alternates, vec![(4.0, 1.0)]);

        // d0 = 1: 1 + 3 < 5, widen maximally (trailer slow, leader fast)
        let b = solve_coop(pos(0.0), pos(1.0), &c).unwrap();
        assert_eq!(b.case_tag, CaseTag::CoopB);
        assert_eq!(b.strategy_x.atoms(), &[(1.0, 1.0)]);
        assert_eq!(b.strategy_y.atoms(), &[(4.0, 1.0)]);
        assert!(!b.roles_swapped);

        // swapped labels
        let b = solve_coop(pos(1.0), pos(0.0), &c).unwrap();
        assert!(b.roles_swapped);
        assert_eq!(b.strategy_x.atoms(), &[(4.0, 1.0)]);
        assert_eq!(b.strategy_y.atoms(), &[(1.0, 1.0)]);

        // d0 = 3: 3 + 3 >= 5, family with gap (5-3)/1 = 2
        let cc = solve_coop(pos(0.0), pos(3.0), &c).unwrap();
        assert_eq!(cc.case_tag, CaseTag::CoopC);
        assert_eq!(cc.strategy_x.atoms(), &[(1.0, 1.0)]);
        assert_eq!(cc.strategy_y.atoms(), &[(3.0, 1.0)]);
        assert_abs_diff_eq!(cc.coop_family.unwrap().speed_gap, 2.0);

        // d0 = D/2: every (v, v); canonical (v_min, v_min)
        let half = solve_coop(pos(0.0), pos(5.0), &c).unwrap();
        assert_eq!(half.case_tag, CaseTag::CoopC);
        assert_eq!(half.strategy_x.atoms(), &[(1.0, 1.0)]);
        assert_eq!(half.strategy_y.atoms(), &[(1.0, 1.0)]);
        assert_abs_diff_eq!(half.coop_family.unwrap().speed_gap, 0.0);

        let mut c0 = c;
        c0.k = 0.0;
        assert!(solve_coop(pos(0.0), pos(1.0), &c0).is_err());
    }

    #[test]
    fn profile_json_round_trip() {
        let c = cfg();
        let p = solve_noncoop(pos(0.0), pos(1.0), &c, QPolicy::default()).unwrap();
        let json = serde_json::to_string(&p).unwrap();
        assert!(json.contains("\"case_tag\":\"NC-b\""));
        assert!(json.contains("\"kind\":\"epsilon\""));
        assert!(json.contains("\"roles_swapped\":false"));
        for field in ["\"p1\"", "\"p2\"", "\"q1\"", "\"q2\"", "\"epsilon\""] {
            assert!(json.contains(field), "missing {field}");
        }
        let back: EquilibriumProfile = serde_json::from_str(&json).unwrap();
        assert_eq!(p, back);
    }

    proptest! {
        #[test]
        fn classify_is_total_and_solvers_succeed(
            x0 in 0.0f64..20.0,
            y0 in 0.0f64..20.0,
            big_d in 6.0f64..50.0,
            v_min in 0.1f64..2.0,
            spread in 0.0f64..1.5,
        ) {
            let mut c = cfg();
            c.route_length = big_d;
            c.v_min = v_min;
            c.v_max = v_min + spread;
            c.epsilon = 0.0; // let the solver pick a feasible slack
            prop_assume!(c.validate().is_ok());
            let (px, py) = (
                reduce(x0, big_d).unwrap(),
                reduce(y0, big_d).unwrap(),
            );
            let tag = classify(px, py, &c).unwrap();
            let p = solve_noncoop(px, py, &c, QPolicy::default()).unwrap();
            prop_assert_eq!(p.case_tag, tag);
            // strategies validate and weights are consistent in NC-b
            p.strategy_x.validate(&c).unwrap();
            p.strategy_y.validate(&c).unwrap();
            if let Some(w) = p.weights {
                prop_assert!((w.p1 + w.p2 - 1.0).abs() < 1e-12);
                prop_assert!(
                    (w.q1 + w.q2 - c.escape_distance() / big_d).abs() < 1e-12
                );
            }
            let sp = solve_coop(px, py, &c).unwrap();
            prop_assert_eq!(sp.kind, EquilibriumKind::SocialOptimum);
        }
    }
}
