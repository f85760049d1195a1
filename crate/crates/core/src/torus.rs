//! Geometry of the one-way circular route.
//!
//! Positions live on a one-dimensional torus of circumference `D` and
//! traffic moves in the direction of increasing position. Distances are
//! therefore directed: `dx(x, y)` is the road ahead of `x` up to `y`,
//! which is the catchment a bus at `x` can still serve before running
//! into the bus at `y`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A relative position on the circuit, in `[0, D)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TorusPosition {
    value: f64,
}

impl TorusPosition {
    /// Wraps a value already known to be in `[0, D)`.
    pub fn new(value: f64, circumference: f64) -> Result<Self> {
        if !(circumference > 0.0) {
            return Err(Error::Config(format!(
                "route length must be positive, got {circumference}"
            )));
        }
        if !(0.0..circumference).contains(&value) {
            return Err(Error::Config(format!(
                "position {value} outside [0, {circumference})"
            )));
        }
        Ok(Self { value })
    }

    pub fn value(self) -> f64 {
        self.value
    }
}

/// Reduces an absolute traveled distance to a relative position on the
/// torus: `r - D*floor(r/D)`, in `[0, D)`.
pub fn reduce(r: f64, circumference: f64) -> Result<TorusPosition> {
    if !(circumference > 0.0) {
        return Err(Error::Config(format!(
            "route length must be positive, got {circumference}"
        )));
    }
    let mut v = r - circumference * (r / circumference).floor();
    // Rounding can land exactly on D (or a hair below); both alias 0.
    if v >= circumference || circumference - v <= circumference * f64::EPSILON {
        v = 0.0;
    }
    if v < 0.0 {
        v = 0.0;
    }
    Ok(TorusPosition { value: v })
}

/// Directed distance from `x` forward (in the direction of traffic) to `y`.
pub fn dx(x: TorusPosition, y: TorusPosition, circumference: f64) -> f64 {
    let (x, y) = (x.value, y.value);
    if x <= y {
        y - x
    } else {
        circumference + y - x
    }
}

/// Directed distance from `y` forward to `x`; `dy(x, y) = dx(y, x)`.
pub fn dy(x: TorusPosition, y: TorusPosition, circumference: f64) -> f64 {
    dx(y, x, circumference)
}

/// The smaller of the two directed distances; always `<= D/2`.
pub fn minimal_distance(x: TorusPosition, y: TorusPosition, circumference: f64) -> f64 {
    dx(x, y, circumference).min(dy(x, y, circumference))
}

/// A pair of positions on the same circuit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PositionPair {
    pub x: TorusPosition,
    pub y: TorusPosition,
    pub circumference: f64,
}

impl PositionPair {
    pub fn new(x: TorusPosition, y: TorusPosition, circumference: f64) -> Self {
        Self { x, y, circumference }
    }

    pub fn dx(&self) -> f64 {
        dx(self.x, self.y, self.circumference)
    }

    pub fn dy(&self) -> f64 {
        dy(self.x, self.y, self.circumference)
    }

    pub fn minimal_distance(&self) -> f64 {
        minimal_distance(self.x, self.y, self.circumference)
    }
}
