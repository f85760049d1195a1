//! Location games between two competing bus operators on a circular,
//! one-way route.
//!
//! The crate provides the route geometry ([`torus`]), pure-strategy
//! payoffs ([`game_core`]), mixed strategies with exact expected
//! utilities ([`strategy`]), closed-form equilibrium solvers
//! ([`equilibria`]), a brute-force verification oracle ([`oracle`]),
//! repeated-game simulation ([`dynamics`]) and batch experiment drivers
//! ([`experiment`]) behind the `buscomp` binary.

pub mod error;
pub mod torus;
pub mod game_core;
pub mod strategy;
pub mod equilibria;
pub mod oracle;
pub mod dynamics;
pub mod experiment;

pub use equilibria::{CaseTag, EquilibriumKind, EquilibriumProfile, QPolicy};
pub use error::{Error, Result};
pub use game_core::{GameConfig, SpeedChoice, UtilityPair};
pub use strategy::{MixedStrategy, Player};
pub use torus::{PositionPair, TorusPosition};
