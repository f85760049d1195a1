//! Game parameters, pure-strategy utilities and position kinematics.
//!
//! Utilities are linear in the directed distance between the final
//! positions, so the two-player game is zero-sum with total payoff
//! `p*lambda*D - 2*c*T`. Solvers work in normalized units `p*lambda = 1`,
//! `c = 0` and rescale on output.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::torus::{self, PositionPair, TorusPosition};

/// Relative tolerance (times `D`) for declaring two final positions tied.
pub const TIE_TOL: f64 = 1e-12;

/// All exogenous parameters of the games.
///
/// Canonical JSON field names are `D`, `T`, `v_min`, `v_max`, `p`,
/// `lambda`, `c`, `k`, `epsilon`, `sigma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameConfig {
    /// Route length (circumference of the circuit).
    #[serde(rename = "D")]
    pub route_length: f64,
    /// Period length: how long a chosen speed is held.
    #[serde(rename = "T")]
    pub period: f64,
    pub v_min: f64,
    pub v_max: f64,
    /// Fare per passenger.
    pub p: f64,
    /// Passenger arrival intensity per unit of time.
    pub lambda: f64,
    /// Driving cost per unit of time.
    pub c: f64,
    /// Inequality-aversion weight in the cooperative utility.
    pub k: f64,
    /// Equilibrium slack, in normalized utility units (= distance).
    /// Zero means "unspecified": solvers pick a tenth of the feasibility
    /// bound for the case at hand.
    #[serde(default)]
    pub epsilon: f64,
    /// Standard deviation of the Gaussian displacement noise.
    #[serde(default)]
    pub sigma: f64,
}

impl GameConfig {
    /// Checks every validity invariant, including the short-horizon
    /// assumption `T*v_max < D/2`.
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if !(self.route_length > 0.0) {
            return fail(format!("D must be positive, got {}", self.route_length));
        }
        if !(self.period > 0.0) {
            return fail(format!("T must be positive, got {}", self.period));
        }
        if !(self.v_min > 0.0) {
            return fail(format!("v_min must be positive, got {}", self.v_min));
        }
        if !(self.v_min <= self.v_max) {
            return fail(format!(
                "speed bounds must satisfy v_min <= v_max, got {} > {}",
                self.v_min, self.v_max
            ));
        }
        if !(self.period * self.v_max < self.route_length / 2.0) {
            return fail(format!(
                "short-horizon assumption violated: T*v_max = {} must be < D/2 = {}",
                self.period * self.v_max,
                self.route_length / 2.0
            ));
        }
        if !(self.p >= 0.0) {
            return fail(format!("p must be non-negative, got {}", self.p));
        }
        if !(self.lambda > 0.0) {
            return fail(format!("lambda must be positive, got {}", self.lambda));
        }
        if !(self.c >= 0.0) {
            return fail(format!("c must be non-negative, got {}", self.c));
        }
        if !(self.k >= 0.0) {
            return fail(format!("k must be non-negative, got {}", self.k));
        }
        if !(self.epsilon >= 0.0) {
            return fail(format!("epsilon must be non-negative, got {}", self.epsilon));
        }
        if !(self.sigma >= 0.0) {
            return fail(format!("sigma must be non-negative, got {}", self.sigma));
        }
        Ok(())
    }

    /// Parses and validates the canonical JSON representation.
    pub fn from_json(json: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(json)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("GameConfig serializes")
    }

    /// Expected income per unit of distance, `p*lambda`.
    pub fn income_rate(&self) -> f64 {
        self.p * self.lambda
    }

    /// The escape distance `d = T*(v_max - v_min)`: the largest per-period
    /// change in the gap between the buses.
    pub fn escape_distance(&self) -> f64 {
        self.period * (self.v_max - self.v_min)
    }

    /// Total payoff of the two-player game, `p*lambda*D - 2*c*T`.
    pub fn zero_sum_total(&self) -> f64 {
        self.income_rate() * self.route_length - 2.0 * self.c * self.period
    }

    /// Converts a normalized utility (a distance) to money.
    pub(crate) fn rescale_utility(&self, normalized: f64) -> f64 {
        self.income_rate() * normalized - self.c * self.period
    }
}

/// A pure strategy: a speed within the admissible band.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SpeedChoice {
    value: f64,
}

impl SpeedChoice {
    pub fn new(value: f64, cfg: &GameConfig) -> Result<Self> {
        // Allow a hair of roundoff at the band edges.
        let slack = 1e-12 * (cfg.v_max - cfg.v_min).max(cfg.v_max);
        if value < cfg.v_min - slack || value > cfg.v_max + slack {
            return Err(Error::Config(format!(
                "speed {} outside [{}, {}]",
                value, cfg.v_min, cfg.v_max
            )));
        }
        Ok(Self {
            value: value.clamp(cfg.v_min, cfg.v_max),
        })
    }

    pub fn value(self) -> f64 {
        self.value
    }
}

/// Both players' payoffs; their sum is always `p*lambda*D - 2*c*T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UtilityPair {
    pub ux: f64,
    pub uy: f64,
}

/// `escape_distance` as a free function, mirroring the library surface.
pub fn escape_distance(cfg: &GameConfig) -> f64 {
    cfg.escape_distance()
}

/// Single-player fixed-distance utility `(p*lambda - c) * D / v`.
pub fn single_fixed_distance_utility(v: SpeedChoice, cfg: &GameConfig) -> f64 {
    (cfg.income_rate() - cfg.c) * cfg.route_length / v.value()
}

/// Single-player fixed-time utility `p*lambda*T*v - c*T`.
pub fn single_fixed_time_utility(v: SpeedChoice, cfg: &GameConfig) -> f64 {
    cfg.income_rate() * cfg.period * v.value() - cfg.c * cfg.period
}

/// Which single-player game is being played.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SingleGameKind {
    FixedDistance,
    FixedTime,
}

/// The optimal single-player speed, when it is determinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SingleOptimum {
    Speed(SpeedChoice),
    /// Every speed in `[v_min, v_max]` is optimal (`p*lambda = c`).
    Indifferent,
}

/// Closed-form optimum of the single-player games.
pub fn optimal_single_speed(cfg: &GameConfig, kind: SingleGameKind) -> SingleOptimum {
    match kind {
        SingleGameKind::FixedTime => {
            SingleOptimum::Speed(SpeedChoice::new(cfg.v_max, cfg).expect("v_max is feasible"))
        }
        SingleGameKind::FixedDistance => {
            let net = cfg.income_rate() - cfg.c;
            if net > 0.0 {
                SingleOptimum::Speed(SpeedChoice::new(cfg.v_min, cfg).expect("v_min is feasible"))
            } else if net < 0.0 {
                SingleOptimum::Speed(SpeedChoice::new(cfg.v_max, cfg).expect("v_max is feasible"))
            } else {
                SingleOptimum::Indifferent
            }
        }
    }
}

/// Advances both buses one period. `noise` carries a pair of standard
/// normal draws scaled by `sigma`; pass `None` for the deterministic
/// kinematics.
pub fn final_positions(
    x0: TorusPosition,
    y0: TorusPosition,
    vx: SpeedChoice,
    vy: SpeedChoice,
    cfg: &GameConfig,
    noise: Option<(f64, f64)>,
) -> PositionPair {
    let (zx, zy) = noise.unwrap_or((0.0, 0.0));
    let d = cfg.route_length;
    let xt = torus::reduce(x0.value() + cfg.period * vx.value() + cfg.sigma * zx, d)
        .expect("valid circumference");
    let yt = torus::reduce(y0.value() + cfg.period * vy.value() + cfg.sigma * zy, d)
        .expect("valid circumference");
    PositionPair::new(xt, yt, d)
}

/// Draws one pair of independent standard normals for the displacement noise.
pub fn sample_noise<R: Rng + ?Sized>(rng: &mut R) -> (f64, f64) {
    (rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Deterministic two-player payoffs on the realized final positions.
pub fn noncoop_utilities(
    x0: TorusPosition,
    y0: TorusPosition,
    vx: SpeedChoice,
    vy: SpeedChoice,
    cfg: &GameConfig,
) -> UtilityPair {
    let finals = final_positions(x0, y0, vx, vy, cfg, None);
    let d = cfg.route_length;
    let tied = finals.minimal_distance() <= TIE_TOL * d;
    if tied {
        let u = cfg.income_rate() * d / 2.0 - cfg.c * cfg.period;
        UtilityPair { ux: u, uy: u }
    } else {
        UtilityPair {
            ux: cfg.income_rate() * finals.dx() - cfg.c * cfg.period,
            uy: cfg.income_rate() * finals.dy() - cfg.c * cfg.period,
        }
    }
}

/// Joint utility with the inequality penalty: `ux + uy - k*|ux - uy|`.
pub fn coop_utility(
    x0: TorusPosition,
    y0: TorusPosition,
    vx: SpeedChoice,
    vy: SpeedChoice,
    cfg: &GameConfig,
) -> f64 {
    let u = noncoop_utilities(x0, y0, vx, vy, cfg);
    u.ux + u.uy - cfg.k * (u.ux - u.uy).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::reduce;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    pub(crate) fn base_config() -> GameConfig {
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
    fn config_validation() {
        assert!(base_config().validate().is_ok());

        let mut bad = base_config();
        bad.v_min = 0.0;
        assert!(bad.validate().is_err());

        let mut bad = base_config();
        bad.v_max = 6.0; // T*v_max = 6 >= D/2
        assert!(bad.validate().is_err());

        let mut bad = base_config();
        bad.epsilon = -0.1;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn config_json_round_trip() {
        let cfg = base_config();
        let parsed = GameConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(cfg, parsed);
        // canonical field names
        let json = cfg.to_json();
        for field in ["\"D\"", "\"T\"", "\"v_min\"", "\"lambda\"", "\"epsilon\""] {
            assert!(json.contains(field), "missing {field} in {json}");
        }
        assert!(GameConfig::from_json("{\"D\": 10}").is_err());
        assert!(GameConfig::from_json("{\"D\": 10, \"bogus\": 1}").is_err());
    }

    #[test]
    fn escape_distance_examples() {
        let mut cfg = base_config();
        assert_abs_diff_eq!(escape_distance(&cfg), 3.0);
        cfg.v_min = 2.0;
        cfg.v_max = 2.0;
        assert_abs_diff_eq!(escape_distance(&cfg), 0.0);
        cfg = base_config();
        cfg.period = 0.5;
        cfg.v_max = 3.0;
        assert_abs_diff_eq!(escape_distance(&cfg), 1.0);
    }

    #[test]
    fn single_player_utilities() {
        let mut cfg = base_config();
        cfg.p = 3.0;
        cfg.c = 1.0;
        let v = SpeedChoice::new(2.0, &cfg).unwrap();
        assert_abs_diff_eq!(single_fixed_distance_utility(v, &cfg), 10.0);

        cfg.p = 1.0;
        cfg.c = 1.0;
        let v = SpeedChoice::new(3.0, &cfg).unwrap();
        assert_abs_diff_eq!(single_fixed_distance_utility(v, &cfg), 0.0);

        cfg.p = 1.0;
        cfg.c = 2.0;
        cfg.v_max = 4.9;
        let v = SpeedChoice::new(4.9, &cfg).unwrap();
        assert_abs_diff_eq!(
            single_fixed_distance_utility(v, &cfg),
            (1.0 - 2.0) * 10.0 / 4.9
        );

        let mut cfg = base_config();
        cfg.p = 2.0;
        cfg.c = 1.0;
        let v = SpeedChoice::new(4.0, &cfg).unwrap();
        assert_abs_diff_eq!(single_fixed_time_utility(v, &cfg), 7.0);

        cfg.p = 1.0;
        cfg.c = 1.0;
        cfg.period = 2.0;
        cfg.route_length = 20.0;
        assert!(cfg.validate().is_ok());
        let v = SpeedChoice::new(3.0, &cfg).unwrap();
        assert_abs_diff_eq!(single_fixed_time_utility(v, &cfg), 4.0);
    }

    #[test]
    fn single_player_optima() {
        let mut cfg = base_config();
        cfg.p = 2.0;
        cfg.c = 1.0;
        assert_eq!(
            optimal_single_speed(&cfg, SingleGameKind::FixedDistance),
            SingleOptimum::Speed(SpeedChoice::new(1.0, &cfg).unwrap())
        );
        cfg.p = 1.0;
        assert_eq!(
            optimal_single_speed(&cfg, SingleGameKind::FixedDistance),
            SingleOptimum::Indifferent
        );
        assert_eq!(
            optimal_single_speed(&cfg, SingleGameKind::FixedTime),
            SingleOptimum::Speed(SpeedChoice::new(4.0, &cfg).unwrap())
        );
    }

    #[test]
    fn final_positions_examples() {
        let cfg = base_config();
        let v = |s| SpeedChoice::new(s, &cfg).unwrap();
        let f = final_positions(pos(0.0), pos(1.0), v(2.0), v(2.0), &cfg, None);
        assert_abs_diff_eq!(f.x.value(), 2.0);
        assert_abs_diff_eq!(f.y.value(), 3.0);

        let f = final_positions(pos(9.0), pos(1.0), v(3.0), v(1.0), &cfg, None);
        assert_abs_diff_eq!(f.x.value(), 2.0);
        assert_abs_diff_eq!(f.y.value(), 2.0);
    }

    #[test]
    fn noncoop_utility_examples() {
        let cfg = base_config();
        let v = |s| SpeedChoice::new(s, &cfg).unwrap();
        let u = noncoop_utilities(pos(0.0), pos(1.0), v(1.0), v(1.0), &cfg);
        assert_abs_diff_eq!(u.ux, 1.0);
        assert_abs_diff_eq!(u.uy, 9.0);

        // tie: x at 9 catches y at 1 exactly (final positions both 2)
        let u = noncoop_utilities(pos(9.0), pos(1.0), v(3.0), v(1.0), &cfg);
        assert_abs_diff_eq!(u.ux, 5.0);
        assert_abs_diff_eq!(u.uy, 5.0);
    }

    #[test]
    fn coop_utility_examples() {
        let cfg = base_config();
        let v = |s| SpeedChoice::new(s, &cfg).unwrap();
        // final gap D/2: payoff equality, no penalty
        let u = coop_utility(pos(0.0), pos(2.0), v(1.0), v(4.0), &cfg);
        assert_abs_diff_eq!(u, 10.0);
        // |1 - 9| penalty with k = 1
        let u = coop_utility(pos(0.0), pos(1.0), v(1.0), v(1.0), &cfg);
        assert_abs_diff_eq!(u, 2.0);
        // k = 0 disables the penalty
        let mut cfg0 = cfg;
        cfg0.k = 0.0;
        let u = coop_utility(pos(0.0), pos(1.0), v(1.0), v(1.0), &cfg0);
        assert_abs_diff_eq!(u, 10.0);
    }

    proptest! {
        #[test]
        fn zero_sum_constancy(
            x0 in 0.0f64..10.0,
            y0 in 0.0f64..10.0,
            vx in 1.0f64..4.0,
            vy in 1.0f64..4.0,
            p in 0.0f64..3.0,
            c in 0.0f64..2.0,
        ) {
            let mut cfg = base_config();
            cfg.p = p;
            cfg.c = c;
            let u = noncoop_utilities(
                pos(x0), pos(y0),
                SpeedChoice::new(vx, &cfg).unwrap(),
                SpeedChoice::new(vy, &cfg).unwrap(),
                &cfg,
            );
            prop_assert!((u.ux + u.uy - cfg.zero_sum_total()).abs() <= 1e-9 * (1.0 + cfg.zero_sum_total().abs()));
        }

        #[test]
        fn utilities_shift_invariant(
            x0 in 0.0f64..10.0,
            y0 in 0.0f64..10.0,
            r in -20.0f64..20.0,
            vx in 1.0f64..4.0,
            vy in 1.0f64..4.0,
        ) {
            let cfg = base_config();
            let sx = reduce(x0 + r, 10.0).unwrap();
            let sy = reduce(y0 + r, 10.0).unwrap();
            let v = |s| SpeedChoice::new(s, &cfg).unwrap();
            let a = noncoop_utilities(pos(x0), pos(y0), v(vx), v(vy), &cfg);
            let b = noncoop_utilities(sx, sy, v(vx), v(vy), &cfg);
            prop_assert!((a.ux - b.ux).abs() <= 1e-9 * cfg.route_length);
        }

        #[test]
        fn coop_never_exceeds_sum(
            x0 in 0.0f64..10.0,
            y0 in 0.0f64..10.0,
            vx in 1.0f64..4.0,
            vy in 1.0f64..4.0,
            k in 0.0f64..3.0,
        ) {
            let mut cfg = base_config();
            cfg.k = k;
            let v = |s| SpeedChoice::new(s, &cfg).unwrap();
            let u = noncoop_utilities(pos(x0), pos(y0), v(vx), v(vy), &cfg);
            let joint = coop_utility(pos(x0), pos(y0), v(vx), v(vy), &cfg);
            prop_assert!(joint <= u.ux + u.uy + 1e-12);
        }
    }
}
