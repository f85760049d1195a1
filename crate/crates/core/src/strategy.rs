//! Mixed strategies over the speed band and exact expected utilities.
//!
//! A mixed strategy is a finite set of atoms plus disjoint uniform
//! segments. For a fixed pair of initial positions the payoff of player
//! `x` depends on the speeds only through the signed gap
//! `delta = d_x(x0,y0) + T*(vy - vx)`, and equals `delta mod D` away from
//! ties. Over the attainable window (width `2*T*(v_max - v_min) < D`)
//! that expression crosses at most one multiple of `D`, so
//!
//! `E[u] = E[delta] + D*P(delta < 0) - D*P(delta >= D)`
//!
//! is exact for atom/uniform mixtures; no quadrature is involved. The
//! tie payoff `D/2` only ever applies to atom-vs-atom coincidences —
//! the tie event has probability zero against a uniform piece.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game_core::{GameConfig, SpeedChoice, TIE_TOL};
use crate::torus::{self, TorusPosition};

/// Atoms closer than this (times the band width) are merged.
const ATOM_MERGE_TOL: f64 = 1e-12;
/// Total probability mass must equal one within this tolerance.
const MASS_TOL: f64 = 1e-12;

/// Which player's payoff is being evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Player {
    X,
    Y,
}

/// A distribution over speeds: point masses plus uniform segments.
///
/// Serializes as `{"atoms": [[speed, prob], ...], "segments": [[lo, hi, prob], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedStrategy {
    atoms: Vec<(f64, f64)>,
    segments: Vec<(f64, f64, f64)>,
}

impl MixedStrategy {
    /// Builds and validates a strategy against the speed bounds of `cfg`.
    pub fn new(
        atoms: Vec<(f64, f64)>,
        segments: Vec<(f64, f64, f64)>,
        cfg: &GameConfig,
    ) -> Result<Self> {
        let mut s = Self { atoms, segments };
        s.merge_close_atoms(cfg);
        s.validate(cfg)?;
        Ok(s)
    }

    /// A degenerate strategy: the pure strategy `v` with probability one.
    pub fn point_mass(v: SpeedChoice) -> Self {
        Self {
            atoms: vec![(v.value(), 1.0)],
            segments: vec![],
        }
    }

    /// Uniform distribution on `(lo, hi)`.
    pub fn uniform(lo: f64, hi: f64, cfg: &GameConfig) -> Result<Self> {
        Self::new(vec![], vec![(lo, hi, 1.0)], cfg)
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn segments(&self) -> &[(f64, f64, f64)] {
        &self.segments
    }

    fn merge_close_atoms(&mut self, cfg: &GameConfig) {
        let tol = ATOM_MERGE_TOL * (cfg.v_max - cfg.v_min).max(f64::MIN_POSITIVE);
        self.atoms
            .sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(self.atoms.len());
        for &(v, p) in &self.atoms {
            match merged.last_mut() {
                Some(last) if (v - last.0).abs() <= tol => last.1 += p,
                _ => merged.push((v, p)),
            }
        }
        self.atoms = merged;
    }

    /// Checks mass, support bounds and segment disjointness.
    pub fn validate(&self, cfg: &GameConfig) -> Result<()> {
        let slack = 1e-9 * (cfg.v_max - cfg.v_min).max(cfg.v_max);
        let in_band = |v: f64| v >= cfg.v_min - slack && v <= cfg.v_max + slack;
        let mut mass = 0.0;
        for &(v, p) in &self.atoms {
            if !(p >= 0.0) {
                return Err(Error::Strategy(format!("negative atom probability {p}")));
            }
            if !in_band(v) {
                return Err(Error::Strategy(format!(
                    "atom speed {} outside [{}, {}]",
                    v, cfg.v_min, cfg.v_max
                )));
            }
            mass += p;
        }
        let mut segs = self.segments.clone();
        segs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
        for w in segs.windows(2) {
            if w[0].1 > w[1].0 + slack {
                return Err(Error::Strategy(format!(
                    "overlapping segments ({}, {}) and ({}, {})",
                    w[0].0, w[0].1, w[1].0, w[1].1
                )));
            }
        }
        for &(lo, hi, p) in &self.segments {
            if !(p >= 0.0) {
                return Err(Error::Strategy(format!("negative segment probability {p}")));
            }
            if !(lo < hi) {
                return Err(Error::Strategy(format!("segment ({lo}, {hi}) not increasing")));
            }
            if !in_band(lo) || !in_band(hi) {
                return Err(Error::Strategy(format!(
                    "segment ({}, {}) outside [{}, {}]",
                    lo, hi, cfg.v_min, cfg.v_max
                )));
            }
            mass += p;
        }
        if (mass - 1.0).abs() > MASS_TOL {
            return Err(Error::Strategy(format!("total mass {mass} != 1")));
        }
        Ok(())
    }

    /// Mean of the distribution.
    pub fn mean(&self) -> f64 {
        let atoms: f64 = self.atoms.iter().map(|&(v, p)| v * p).sum();
        let segs: f64 = self
            .segments
            .iter()
            .map(|&(lo, hi, p)| p * (lo + hi) / 2.0)
            .sum();
        atoms + segs
    }

    /// Inverse-CDF sampling: atoms first, then segments, in stored order.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for &(v, p) in &self.atoms {
            acc += p;
            if u < acc {
                return v;
            }
        }
        for &(lo, hi, p) in &self.segments {
            if p <= 0.0 {
                continue;
            }
            if u < acc + p {
                return lo + (hi - lo) * (u - acc) / p;
            }
            acc += p;
        }
        // u landed in the roundoff sliver at the top of the CDF.
        self.segments
            .last()
            .map(|&(_, hi, _)| hi)
            .or_else(|| self.atoms.last().map(|&(v, _)| v))
            .expect("strategy has support")
    }

    fn components(&self) -> impl Iterator<Item = Component> + '_ {
        let atoms = self.atoms.iter().map(|&(v, p)| Component {
            kind: Kind::Atom(v),
            weight: p,
        });
        let segs = self.segments.iter().map(|&(lo, hi, p)| Component {
            kind: Kind::Uniform(lo, hi),
            weight: p,
        });
        atoms.chain(segs)
    }

    /// Every atom location and segment endpoint, in support order.
    pub fn support_features(&self) -> Vec<f64> {
        let mut f: Vec<f64> = self.atoms.iter().map(|&(v, _)| v).collect();
        for &(lo, hi, _) in &self.segments {
            f.push(lo);
            f.push(hi);
        }
        f
    }
}

#[derive(Clone, Copy)]
struct Component {
    kind: Kind,
    weight: f64,
}

#[derive(Clone, Copy)]
enum Kind {
    Atom(f64),
    Uniform(f64, f64),
}

impl Kind {
    fn mean(self) -> f64 {
        match self {
            Kind::Atom(v) => v,
            Kind::Uniform(lo, hi) => (lo + hi) / 2.0,
        }
    }
}

/// `P(A - B > c)` for independent atom/uniform components.
fn prob_diff_exceeds(a: Kind, b: Kind, c: f64) -> f64 {
    match (a, b) {
        (Kind::Atom(av), Kind::Atom(bv)) => {
            if av - bv > c {
                1.0
            } else {
                0.0
            }
        }
        // P(B < a - c)
        (Kind::Atom(av), Kind::Uniform(lo, hi)) => ((av - c - lo) / (hi - lo)).clamp(0.0, 1.0),
        // P(A > b + c)
        (Kind::Uniform(lo, hi), Kind::Atom(bv)) => ((hi - bv - c) / (hi - lo)).clamp(0.0, 1.0),
        (Kind::Uniform(a1, b1), Kind::Uniform(a2, b2)) => {
            // Integrate P(B < t - c) over t ~ U(a1, b1). The integrand is the
            // clamped ramp rising from 0 at t = c + a2 to 1 at t = c + b2.
            let ramp_lo = c + a2;
            let ramp_hi = c + b2;
            // integral over [a1, b1] of clamp((t - ramp_lo)/(ramp_hi - ramp_lo), 0, 1) dt
            let flat_part = (b1 - ramp_hi.min(b1).max(a1)).max(0.0);
            let s_lo = ramp_lo.clamp(a1, b1);
            let s_hi = ramp_hi.clamp(a1, b1);
            let ramp_part = if s_hi > s_lo {
                let mid = (s_lo + s_hi) / 2.0;
                (s_hi - s_lo) * (mid - ramp_lo) / (ramp_hi - ramp_lo)
            } else {
                0.0
            };
            (flat_part + ramp_part) / (b1 - a1)
        }
    }
}

/// Exact expected distance captured by the "own" player whose directed
/// distance to the opponent is `gap`, in normalized units.
///
/// `delta = gap + T*(v_opp - v_own)`; the captured distance is
/// `delta mod D`, with `D/2` on atom-vs-atom coincidences.
pub(crate) fn expected_distance(
    gap: f64,
    own: &MixedStrategy,
    opp: &MixedStrategy,
    cfg: &GameConfig,
) -> f64 {
    let d = cfg.route_length;
    let t = cfg.period;
    let tie_tol = TIE_TOL * d;
    let mut total = 0.0;
    for co in own.components() {
        for cp in opp.components() {
            let w = co.weight * cp.weight;
            if w == 0.0 {
                continue;
            }
            let value = match (co.kind, cp.kind) {
                (Kind::Atom(vo), Kind::Atom(vp)) => {
                    let delta = gap + t * (vp - vo);
                    let r = delta.rem_euclid(d);
                    if r <= tie_tol || d - r <= tie_tol {
                        d / 2.0
                    } else {
                        r
                    }
                }
                (own_k, opp_k) => {
                    let mean_delta = gap + t * (opp_k.mean() - own_k.mean());
                    // delta < 0  <=>  v_own - v_opp > gap/T
                    let p_below = prob_diff_exceeds(own_k, opp_k, gap / t);
                    // delta >= D <=>  v_opp - v_own > (D - gap)/T
                    let p_above = prob_diff_exceeds(opp_k, own_k, (d - gap) / t);
                    mean_delta + d * (p_below - p_above)
                }
            };
            total += w * value;
        }
    }
    total
}

fn directed_gap(x0: TorusPosition, y0: TorusPosition, cfg: &GameConfig, player: Player) -> f64 {
    match player {
        Player::X => torus::dx(x0, y0, cfg.route_length),
        Player::Y => torus::dy(x0, y0, cfg.route_length),
    }
}

/// Expected utility of `player` under mixed strategies `(sx, sy)`, in money.
pub fn expected_utility(
    x0: TorusPosition,
    y0: TorusPosition,
    sx: &MixedStrategy,
    sy: &MixedStrategy,
    cfg: &GameConfig,
    player: Player,
) -> Result<f64> {
    sx.validate(cfg)?;
    sy.validate(cfg)?;
    let gap = directed_gap(x0, y0, cfg, player);
    let (own, opp) = match player {
        Player::X => (sx, sy),
        Player::Y => (sy, sx),
    };
    Ok(cfg.rescale_utility(expected_distance(gap, own, opp, cfg)))
}

/// Expected utility of `player` holding a pure strategy against the
/// opponent's mixture, in money.
pub fn conditional_expected_utility(
    x0: TorusPosition,
    y0: TorusPosition,
    own_speed: SpeedChoice,
    opponent: &MixedStrategy,
    cfg: &GameConfig,
    player: Player,
) -> f64 {
    cfg.rescale_utility(conditional_expected_distance(
        directed_gap(x0, y0, cfg, player),
        own_speed.value(),
        opponent,
        cfg,
    ))
}

/// Normalized-unit version used by the solvers and the oracle.
pub(crate) fn conditional_expected_distance(
    gap: f64,
    own_speed: f64,
    opponent: &MixedStrategy,
    cfg: &GameConfig,
) -> f64 {
    let own = MixedStrategy {
        atoms: vec![(own_speed, 1.0)],
        segments: vec![],
    };
    expected_distance(gap, &own, opponent, cfg)
}
