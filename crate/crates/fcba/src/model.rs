//! Domain types: reaction parameters, species, initial configurations.

use crate::rng::{mix2, mix3, u01};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("parameter constraint violated: {0}")]
    Constraint(String),
    #[error("invalid configuration: {0}")]
    Config(String),
}

/// The four reaction probabilities and their derived complements.
///
/// Arrow–arrow collisions: one survivor with probability `a` (split evenly
/// between the two directions), coalescence into a blockade with probability
/// `b`, mutual annihilation with probability `c = 1 - (a + b)`.
/// Blockade–arrow collisions: the arrow survives (strong) with probability
/// `alpha`, the blockade survives (weak) with probability `beta`, mutual
/// annihilation with probability `xi = 1 - (alpha + beta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReactionParams {
    pub a: f64,
    pub b: f64,
    pub alpha: f64,
    pub beta: f64,
    /// 1 - (a + b), kept in sync by construction.
    pub c: f64,
    /// 1 - (alpha + beta), kept in sync by construction.
    pub xi: f64,
}

/// Validates `0 <= a, b, alpha, beta < 1`, `a + b <= 1`, `alpha + beta <= 1`
/// and derives the complements.
pub fn validate_params(a: f64, b: f64, alpha: f64, beta: f64) -> Result<ReactionParams, ModelError> {
    for (name, x) in [("a", a), ("b", b), ("alpha", alpha), ("beta", beta)] {
        if !x.is_finite() {
            return Err(ModelError::Constraint(format!("{name} must be finite, got {x}")));
        }
        if !(0.0..1.0).contains(&x) {
            return Err(ModelError::Constraint(format!("0 <= {name} < 1 violated: {name} = {x}")));
        }
    }
    if a + b > 1.0 {
        return Err(ModelError::Constraint(format!("a + b <= 1 violated: a + b = {}", a + b)));
    }
    if alpha + beta > 1.0 {
        return Err(ModelError::Constraint(format!(
            "alpha + beta <= 1 violated: alpha + beta = {}",
            alpha + beta
        )));
    }
    Ok(ReactionParams { a, b, alpha, beta, c: 1.0 - (a + b), xi: 1.0 - (alpha + beta) })
}

impl ReactionParams {
    pub fn new(a: f64, b: f64, alpha: f64, beta: f64) -> Result<Self, ModelError> {
        validate_params(a, b, alpha, beta)
    }
}

/// Whether a blockade was present at time zero or created by a coalescence.
/// Dynamics are identical; the statistics distinguish them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BlockadeOrigin {
    Original,
    Generated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Species {
    LeftArrow,
    RightArrow,
    Blockade(BlockadeOrigin),
}

impl Species {
    /// Signed velocity: -1, +1 or 0.
    #[inline]
    pub fn velocity(self) -> f64 {
        match self {
            Species::LeftArrow => -1.0,
            Species::RightArrow => 1.0,
            Species::Blockade(_) => 0.0,
        }
    }

    #[inline]
    pub fn is_blockade(self) -> bool {
        matches!(self, Species::Blockade(_))
    }
}

/// Spacing distribution between consecutive initial positions. Must be
/// continuous with positive support.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpacingDist {
    Exponential { mean: f64 },
    Uniform { lo: f64, hi: f64 },
}

impl Default for SpacingDist {
    fn default() -> Self {
        SpacingDist::Exponential { mean: 1.0 }
    }
}

impl SpacingDist {
    fn validate(&self) -> Result<(), ModelError> {
        match *self {
            SpacingDist::Exponential { mean } => {
                if !(mean.is_finite() && mean > 0.0) {
                    return Err(ModelError::Config(format!("exponential mean must be > 0, got {mean}")));
                }
            }
            SpacingDist::Uniform { lo, hi } => {
                if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo < hi) {
                    return Err(ModelError::Config(format!(
                        "uniform spacing requires 0 <= lo < hi, got [{lo}, {hi})"
                    )));
                }
            }
        }
        Ok(())
    }

    /// `u` is uniform in (0, 1); the result is strictly positive.
    #[inline]
    fn sample(&self, u: f64) -> f64 {
        match *self {
            SpacingDist::Exponential { mean } => -mean * u.ln(),
            SpacingDist::Uniform { lo, hi } => lo + u * (hi - lo),
        }
    }
}

/// Which side(s) of the origin carry particles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// All particles strictly right of the origin (the one-sided process).
    RightHalfLine,
    /// Particle index 0 sits at the origin; the rest split between sides.
    TwoSided,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialConfig {
    pub n: usize,
    pub side: Side,
    /// Blockade density; arrows take the remaining mass evenly per direction.
    pub p: f64,
    #[serde(default)]
    pub spacing: SpacingDist,
    pub seed: u64,
}

impl InitialConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.n == 0 {
            return Err(ModelError::Config("n must be >= 1".into()));
        }
        if !(self.p.is_finite() && (0.0..=1.0).contains(&self.p)) {
            return Err(ModelError::Config(format!("p must lie in [0, 1], got {}", self.p)));
        }
        self.spacing.validate()
    }
}

/// One particle of the line.
///
/// A particle's trajectory is fully determined by `(birth_position,
/// birth_time, species)`: arrows never change velocity and blockades never
/// move, so surviving a collision (continuation) keeps the same record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Particle {
    pub id: u32,
    pub species: Species,
    pub birth_position: f64,
    pub birth_time: f64,
    pub alive: bool,
    /// Weak collisions absorbed from the right (blockades only).
    pub weak_hits_right: u32,
    /// Weak collisions absorbed from the left (blockades only).
    pub weak_hits_left: u32,
    /// Genealogical tag used to address collision draws; initial particles
    /// use their index, coalescence products hash their parents' tags.
    pub tag: u64,
}

impl Particle {
    pub(crate) fn initial(id: u32, species: Species, position: f64) -> Self {
        Particle {
            id,
            species,
            birth_position: position,
            birth_time: 0.0,
            alive: true,
            weak_hits_right: 0,
            weak_hits_left: 0,
            tag: id as u64,
        }
    }

    #[inline]
    pub fn position_at(&self, t: f64) -> f64 {
        self.birth_position + self.species.velocity() * (t - self.birth_time)
    }
}

// Species draw order is fixed: blockade, then left arrow, then right arrow.
// Replays and window extensions depend on this order never changing.
fn species_from_u01(u: f64, p: f64) -> Species {
    if u < p {
        Species::Blockade(BlockadeOrigin::Original)
    } else if u < p + (1.0 - p) / 2.0 {
        Species::LeftArrow
    } else {
        Species::RightArrow
    }
}

/// Samples the initial configuration: strictly increasing positions with
/// i.i.d. spacings and i.i.d. species.
///
/// Particle randomness is addressed per index — spacing of particle `k` uses
/// key `(seed, k, 0)`, species `(seed, k, 1)` — so resampling with a larger
/// `n` reproduces the first particles exactly. For `TwoSided`, index 0 sits
/// at the origin and odd/even indices alternate right/left.
pub fn sample_initial_config(cfg: &InitialConfig) -> Result<Vec<Particle>, ModelError> {
    cfg.validate()?;
    let mut out = Vec::with_capacity(cfg.n);
    match cfg.side {
        Side::RightHalfLine => {
            let mut x = 0.0;
            for k in 0..cfg.n {
                let us = u01(mix3(cfg.seed, k as u64, 0));
                let uv = u01(mix3(cfg.seed, k as u64, 1));
                x += cfg.spacing.sample(us);
                out.push(Particle::initial(k as u32, species_from_u01(uv, cfg.p), x));
            }
        }
        Side::TwoSided => {
            // Index 0 at the origin; odd indices extend right, even (>0) left.
            let mut right = Vec::with_capacity(cfg.n / 2 + 1);
            let mut left = Vec::with_capacity(cfg.n / 2 + 1);
            let u0 = u01(mix3(cfg.seed, 0, 1));
            right.push(Particle::initial(0, species_from_u01(u0, cfg.p), 0.0));
            let (mut xr, mut xl) = (0.0, 0.0);
            for k in 1..cfg.n {
                let us = u01(mix3(cfg.seed, k as u64, 0));
                let uv = u01(mix3(cfg.seed, k as u64, 1));
                let sp = species_from_u01(uv, cfg.p);
                if k % 2 == 1 {
                    xr += cfg.spacing.sample(us);
                    right.push(Particle::initial(k as u32, sp, xr));
                } else {
                    xl -= cfg.spacing.sample(us);
                    left.push(Particle::initial(k as u32, sp, xl));
                }
            }
            left.reverse();
            out.extend(left);
            out.extend(right);
        }
    }
    debug_assert!(out.windows(2).all(|w| w[0].birth_position < w[1].birth_position));
    Ok(out)
}

/// Seed for the collision-outcome draws of a trial, derived from the
/// configuration seed so one u64 drives the whole trial.
pub fn outcome_seed(config_seed: u64) -> u64 {
    mix2(config_seed, 0x0c01_1151_0e5e_ed00)
}
