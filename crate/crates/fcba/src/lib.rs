//! Simulation and verification laboratory for four-parameter coalescing
//! ballistic annihilation (FCBA).
//!
//! Particles live on the real line with velocities in {-1, 0, +1}. Arrows
//! (speed ±1) collide with each other and with blockades (speed 0); each
//! collision outcome is drawn from one of three reaction tables governed by
//! the parameters `(a, b, alpha, beta)`. Arrow–arrow collisions may leave one
//! survivor, coalesce into a new blockade, or annihilate both; blockade–arrow
//! collisions may destroy the blockade (strong), destroy the arrow (weak), or
//! both (mutual).
//!
//! The crate has three layers:
//!
//! - an exact discrete-event engine ([`engine`]) that resolves every
//!   collision of a finite configuration in time order,
//! - closed-form theory ([`theory`]): the critical blockade density, the
//!   implicit recursion `g(p, q) = 0` for the origin-visit probability
//!   `q(p)`, and the auxiliary identities it is built from,
//! - Monte Carlo estimators ([`estimators`]) that measure every one of those
//!   quantities from simulation and report agreement statistics.
//!
//! Everything is deterministic given a seed: configurations, collision
//! outcomes, and estimator reductions all derive from counter-based hashing
//! ([`rng`]), so any run can be replayed bit-for-bit and any single trial can
//! be reproduced in isolation.

pub mod engine;
pub mod estimators;
pub mod export;
pub mod kernel;
pub mod model;
pub mod rng;
pub mod stats;
pub mod theory;

pub use engine::{run, OriginOutcome, Trace};
pub use estimators::{EstimateResult, IdentityReport, Verdict};
pub use model::{InitialConfig, ModelError, Particle, ReactionParams, Side, SpacingDist, Species};
pub use theory::{pc_closed_form, solve_q, QSolution};
