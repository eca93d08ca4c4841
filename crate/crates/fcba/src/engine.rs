//! Exact discrete-event simulation of the particle system.
//!
//! Alive particles form a doubly-linked spatial list; every adjacent
//! approaching pair contributes a candidate collision to a min-time heap.
//! Popped candidates are validated lazily (both alive, still adjacent),
//! resolved through the reaction kernel, and the neighbours' new candidate
//! pairs are pushed. Every event kills at least one particle, so the loop
//! terminates after at most as many events as particles ever existed.
//!
//! Collision randomness is addressed by the genealogical tags of the pair,
//! not by draw order. Two runs that share a pair of particles — a replay, a
//! restriction to one side of a point, or a window extended with more
//! particles — resolve that pair's collision identically.
//!
//! # Truncation and certification
//!
//! Only a finite window of an infinite configuration is simulated. Particles
//! beyond the right edge `x_n` start right of it and move at speed at most 1,
//! so they can only influence space-time points `(y, t)` with
//! `y + t >= x_n`. A left arrow visits a location `u` at time `birth - u`,
//! and every point of its trajectory satisfies `y + t = birth < x_n`:
//! truncation can neither create nor destroy visits by window arrows, so the
//! observed visit list is exact. What the window cannot decide is whether
//! arrows from beyond the edge arrive *later*; a no-visit conclusion is
//! certified only when enough blockades survive to the right of the location
//! ([`SHIELD_MIN`]) that a late breakthrough is negligible. Trials without
//! that shield report [`OriginOutcome::Uncertain`] and the estimators carry
//! them as interval bounds.

use crate::kernel::{arrow_arrow_from_u01, blockade_arrow_from_u01, ArrowArrowOutcome, BlockadeArrowOutcome};
use crate::model::{
    outcome_seed, sample_initial_config, BlockadeOrigin, InitialConfig, ModelError, Particle,
    ReactionParams, Side, Species,
};
use crate::rng::{mix2, mix3, u01};
use serde::Serialize;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Surviving blockades required to the right of a location before a
/// "never visited" conclusion is certified. A late arrow from beyond the
/// window must win roughly one renewal per blockade to break through, so the
/// leak probability decays geometrically in the shield size; 64 keeps the
/// leak under ~1e-5 per trial even where the renewal probability is 0.85.
pub const SHIELD_MIN: usize = 64;

/// Relative tolerance for the coincidence of participant positions at an
/// event, in units of the window span.
const POSITION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EventKind {
    /// Both participants die.
    Mutual,
    /// The left-moving arrow survives; the other participant dies.
    StrongLeftSurvives,
    /// The right-moving arrow survives; the other participant dies.
    StrongRightSurvives,
    /// A blockade absorbs an arrow arriving from the right and survives.
    WeakFromRight,
    /// A blockade absorbs an arrow arriving from the left and survives.
    WeakFromLeft,
    /// Two arrows die and leave a new blockade at the collision point.
    CoalesceToBlockade,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Event {
    pub time: f64,
    pub position: f64,
    pub kind: EventKind,
    /// (spatially left participant, right participant) ids.
    pub participants: (u32, u32),
    pub created_id: Option<u32>,
}

/// How a survivor leaves the simulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ExitStatus {
    /// A left arrow with nothing left to stop it; `time` is when its
    /// trajectory passes the origin.
    CrossedLeftOfOrigin { time: f64 },
    StillAlive { final_position: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Survivor {
    pub id: u32,
    pub status: ExitStatus,
}

/// Complete collision history of one finite run.
#[derive(Debug, Clone)]
pub struct Trace {
    pub params: ReactionParams,
    pub outcome_seed: u64,
    pub side: Side,
    pub config: Option<InitialConfig>,
    /// Count of initial particles; the registry may grow past it through
    /// coalescence.
    pub n_initial: usize,
    /// Smallest and largest initial positions (light-cone anchors).
    pub window: (f64, f64),
    /// All particles that ever existed, indexed by id; `alive` reflects the
    /// final state.
    pub particles: Vec<Particle>,
    pub events: Vec<Event>,
    pub survivors: Vec<Survivor>,
    pub end_time: f64,
}

impl Trace {
    pub fn initial_particles(&self) -> &[Particle] {
        &self.particles[..self.n_initial]
    }

    /// Times at which left arrows cross the origin, ascending.
    pub fn origin_crossing_times(&self) -> Vec<f64> {
        let mut ts: Vec<f64> = self
            .survivors
            .iter()
            .filter_map(|s| match s.status {
                ExitStatus::CrossedLeftOfOrigin { time } => Some(time),
                ExitStatus::StillAlive { .. } => None,
            })
            .collect();
        ts.sort_by(f64::total_cmp);
        ts
    }

    /// Surviving blockades strictly right of `position`.
    pub fn tail_shield(&self, position: f64) -> usize {
        self.particles
            .iter()
            .filter(|p| p.alive && p.species.is_blockade() && p.birth_position > position)
            .count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum OriginOutcome {
    VisitedCertified { first_visit_time: f64 },
    NotVisitedCertified,
    Uncertain,
}

impl OriginOutcome {
    /// Tri-state view: `Some(true)` visited, `Some(false)` certified never
    /// visited, `None` unknown.
    pub fn visited(&self) -> Option<bool> {
        match self {
            OriginOutcome::VisitedCertified { .. } => Some(true),
            OriginOutcome::NotVisitedCertified => Some(false),
            OriginOutcome::Uncertain => None,
        }
    }
}

struct Candidate {
    time: f64,
    position: f64,
    left: u32,
    right: u32,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Candidate {}
impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Candidate {
    // Reversed so the max-heap pops the earliest event; ties break leftmost
    // position first, then lower ids. Ties have probability zero under
    // continuous spacings; the order only pins down float coincidences.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.position.total_cmp(&self.position))
            .then_with(|| other.left.cmp(&self.left))
            .then_with(|| other.right.cmp(&self.right))
    }
}

const NIL: u32 = u32::MAX;

struct Engine {
    params: ReactionParams,
    particles: Vec<Particle>,
    left: Vec<u32>,
    right: Vec<u32>,
    heap: BinaryHeap<Candidate>,
    events: Vec<Event>,
    outcome_seed: u64,
    span: f64,
    now: f64,
}

impl Engine {
    /// Schedule the meeting of an adjacent pair if it approaches.
    fn schedule(&mut self, l: u32, r: u32) {
        if l == NIL || r == NIL {
            return;
        }
        let pi = self.particles[l as usize];
        let pj = self.particles[r as usize];
        let (vi, vj) = (pi.species.velocity(), pj.species.velocity());
        if vi <= vj {
            return;
        }
        let t = (pj.birth_position - vj * pj.birth_time - pi.birth_position + vi * pi.birth_time)
            / (vi - vj);
        // Float fuzz can push a meeting marginally into the past when a
        // freshly created blockade sits almost on a neighbour; clamping keeps
        // event times non-decreasing without affecting exact inputs.
        let t = t.max(self.now);
        let position = pi.position_at(t);
        self.heap.push(Candidate { time: t, position, left: l, right: r });
    }

    /// Remove both members of a dead pair from the list; returns the outer
    /// neighbours.
    fn unlink_both(&mut self, l: u32, r: u32) -> (u32, u32) {
        let ll = self.left[l as usize];
        let rr = self.right[r as usize];
        if ll != NIL {
            self.right[ll as usize] = rr;
        }
        if rr != NIL {
            self.left[rr as usize] = ll;
        }
        (ll, rr)
    }

    /// Remove `dead` whose surviving neighbour is on its right.
    fn unlink_left_member(&mut self, dead: u32, survivor: u32) -> u32 {
        let ll = self.left[dead as usize];
        self.left[survivor as usize] = ll;
        if ll != NIL {
            self.right[ll as usize] = survivor;
        }
        ll
    }

    /// Remove `dead` whose surviving neighbour is on its left.
    fn unlink_right_member(&mut self, dead: u32, survivor: u32) -> u32 {
        let rr = self.right[dead as usize];
        self.right[survivor as usize] = rr;
        if rr != NIL {
            self.left[rr as usize] = survivor;
        }
        rr
    }

    fn record(&mut self, time: f64, position: f64, kind: EventKind, l: u32, r: u32, created: Option<u32>) {
        debug_assert!(time >= self.now);
        debug_assert!({
            let d = (self.particles[l as usize].position_at(time)
                - self.particles[r as usize].position_at(time))
            .abs();
            d <= POSITION_TOL * self.span.max(1.0)
        });
        self.now = time;
        self.events.push(Event { time, position, kind, participants: (l, r), created_id: created });
    }

    fn step(&mut self) -> bool {
        let Some(c) = self.heap.pop() else { return false };
        let (l, r) = (c.left, c.right);
        if !self.particles[l as usize].alive
            || !self.particles[r as usize].alive
            || self.right[l as usize] != r
        {
            return true; // stale candidate
        }
        let (t, pos) = (c.time, c.position);
        let params = self.params;
        let sl = self.particles[l as usize].species;
        let sr = self.particles[r as usize].species;
        let u = u01(mix3(self.outcome_seed, self.particles[l as usize].tag, self.particles[r as usize].tag));

        match (sl, sr) {
            (Species::RightArrow, Species::LeftArrow) => match arrow_arrow_from_u01(&params, u) {
                ArrowArrowOutcome::LeftSurvives => {
                    self.record(t, pos, EventKind::StrongLeftSurvives, l, r, None);
                    self.particles[l as usize].alive = false;
                    let ll = self.unlink_left_member(l, r);
                    self.schedule(ll, r);
                }
                ArrowArrowOutcome::RightSurvives => {
                    self.record(t, pos, EventKind::StrongRightSurvives, l, r, None);
                    self.particles[r as usize].alive = false;
                    let rr = self.unlink_right_member(r, l);
                    self.schedule(l, rr);
                }
                ArrowArrowOutcome::Coalesce => {
                    let tag = mix2(self.particles[l as usize].tag, self.particles[r as usize].tag);
                    let id = self.particles.len() as u32;
                    self.record(t, pos, EventKind::CoalesceToBlockade, l, r, Some(id));
                    self.particles[l as usize].alive = false;
                    self.particles[r as usize].alive = false;
                    self.particles.push(Particle {
                        id,
                        species: Species::Blockade(BlockadeOrigin::Generated),
                        birth_position: pos,
                        birth_time: t,
                        alive: true,
                        weak_hits_right: 0,
                        weak_hits_left: 0,
                        tag,
                    });
                    let (ll, rr) = self.unlink_both(l, r);
                    self.left.push(ll);
                    self.right.push(rr);
                    if ll != NIL {
                        self.right[ll as usize] = id;
                    }
                    if rr != NIL {
                        self.left[rr as usize] = id;
                    }
                    self.schedule(ll, id);
                    self.schedule(id, rr);
                }
                ArrowArrowOutcome::MutualAnnihilate => {
                    self.record(t, pos, EventKind::Mutual, l, r, None);
                    self.particles[l as usize].alive = false;
                    self.particles[r as usize].alive = false;
                    let (ll, rr) = self.unlink_both(l, r);
                    self.schedule(ll, rr);
                }
            },
            // Arrow hits the blockade from the left.
            (Species::RightArrow, Species::Blockade(_)) => match blockade_arrow_from_u01(&params, u) {
                BlockadeArrowOutcome::ArrowSurvives => {
                    self.record(t, pos, EventKind::StrongRightSurvives, l, r, None);
                    self.particles[r as usize].alive = false;
                    let rr = self.unlink_right_member(r, l);
                    self.schedule(l, rr);
                }
                BlockadeArrowOutcome::BlockadeSurvives => {
                    self.record(t, pos, EventKind::WeakFromLeft, l, r, None);
                    self.particles[l as usize].alive = false;
                    self.particles[r as usize].weak_hits_left += 1;
                    let ll = self.unlink_left_member(l, r);
                    self.schedule(ll, r);
                }
                BlockadeArrowOutcome::MutualAnnihilate => {
                    self.record(t, pos, EventKind::Mutual, l, r, None);
                    self.particles[l as usize].alive = false;
                    self.particles[r as usize].alive = false;
                    let (ll, rr) = self.unlink_both(l, r);
                    self.schedule(ll, rr);
                }
            },
            // Arrow hits the blockade from the right.
            (Species::Blockade(_), Species::LeftArrow) => match blockade_arrow_from_u01(&params, u) {
                BlockadeArrowOutcome::ArrowSurvives => {
                    self.record(t, pos, EventKind::StrongLeftSurvives, l, r, None);
                    self.particles[l as usize].alive = false;
                    let ll = self.unlink_left_member(l, r);
                    self.schedule(ll, r);
                }
                BlockadeArrowOutcome::BlockadeSurvives => {
                    self.record(t, pos, EventKind::WeakFromRight, l, r, None);
                    self.particles[r as usize].alive = false;
                    self.particles[l as usize].weak_hits_right += 1;
                    let rr = self.unlink_right_member(r, l);
                    self.schedule(l, rr);
                }
                BlockadeArrowOutcome::MutualAnnihilate => {
                    self.record(t, pos, EventKind::Mutual, l, r, None);
                    self.particles[l as usize].alive = false;
                    self.particles[r as usize].alive = false;
                    let (ll, rr) = self.unlink_both(l, r);
                    self.schedule(ll, rr);
                }
            },
            // Same-velocity pairs are never scheduled.
            (sl, sr) => unreachable!("non-approaching pair scheduled: {sl:?} {sr:?}"),
        }
        true
    }
}

/// Runs the dynamics of an explicit particle list until no approaching
/// adjacent pairs remain. Particles must be sorted by strictly increasing
/// position and all alive.
///
/// Ids are reassigned to registry order (position order, coalescence
/// products appended); genealogical tags are preserved, so a restricted
/// re-run of a subset keeps its collision draws.
pub fn run(initial: &[Particle], params: &ReactionParams, seed_for_outcomes: u64) -> Trace {
    assert!(!initial.is_empty(), "empty configuration");
    assert!(
        initial.windows(2).all(|w| w[0].birth_position < w[1].birth_position),
        "initial positions must be strictly increasing"
    );
    let n = initial.len();
    let window = (initial[0].birth_position, initial[n - 1].birth_position);
    let mut particles = initial.to_vec();
    for (i, p) in particles.iter_mut().enumerate() {
        p.id = i as u32;
    }
    let mut eng = Engine {
        params: *params,
        particles,
        left: (0..n).map(|i| if i == 0 { NIL } else { (i - 1) as u32 }).collect(),
        right: (0..n).map(|i| if i + 1 == n { NIL } else { (i + 1) as u32 }).collect(),
        heap: BinaryHeap::with_capacity(n),
        events: Vec::new(),
        outcome_seed: seed_for_outcomes,
        span: window.1 - window.0,
        now: 0.0,
    };
    for i in 0..n.saturating_sub(1) {
        eng.schedule(i as u32, (i + 1) as u32);
    }
    while eng.step() {}

    let end_time = eng.events.last().map_or(0.0, |e| e.time);
    let survivors = eng
        .particles
        .iter()
        .filter(|p| p.alive)
        .map(|p| Survivor {
            id: p.id,
            status: if p.species == Species::LeftArrow && p.birth_position > 0.0 {
                ExitStatus::CrossedLeftOfOrigin { time: p.birth_time + p.birth_position }
            } else {
                ExitStatus::StillAlive { final_position: p.position_at(end_time) }
            },
        })
        .collect();

    Trace {
        params: *params,
        outcome_seed: seed_for_outcomes,
        side: Side::RightHalfLine,
        config: None,
        n_initial: n,
        window,
        particles: eng.particles,
        events: eng.events,
        survivors,
        end_time,
    }
}

/// Samples a configuration and runs it; the collision seed derives from the
/// configuration seed.
pub fn run_config(cfg: &InitialConfig, params: &ReactionParams) -> Result<Trace, ModelError> {
    let initial = sample_initial_config(cfg)?;
    let mut trace = run(&initial, params, outcome_seed(cfg.seed));
    trace.side = cfg.side;
    trace.config = Some(*cfg);
    Ok(trace)
}

/// Classifies the origin's fate for a one-sided trial.
///
/// A crossing by a window arrow is exact (see module docs), so any crossing
/// certifies a visit. Absence of a visit is certified only behind a
/// sufficient blockade shield.
pub fn origin_outcome(trace: &Trace) -> Result<OriginOutcome, ModelError> {
    if trace.side != Side::RightHalfLine {
        return Err(ModelError::Config("origin outcome is defined for right-half-line traces".into()));
    }
    let crossings = trace.origin_crossing_times();
    Ok(match crossings.first() {
        Some(&t) => OriginOutcome::VisitedCertified { first_visit_time: t },
        None if trace.tail_shield(0.0) >= SHIELD_MIN => OriginOutcome::NotVisitedCertified,
        None => OriginOutcome::Uncertain,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VisitSide {
    FromRight,
    FromLeft,
}

/// Ordered visit times to a location in the system restricted to one side.
#[derive(Debug, Clone, Default)]
pub struct VisitSequence {
    pub location: f64,
    pub from_right_times: Vec<f64>,
    pub from_left_times: Vec<f64>,
    /// True when no further visits from that side can ever occur
    /// (blockade shield certified).
    pub from_right_complete: bool,
    pub from_left_complete: bool,
    /// Earliest possible arrival of an unobserved visitor (window edge
    /// distance); meaningful when the side is not complete.
    pub from_right_horizon: f64,
    pub from_left_horizon: f64,
}

/// Re-simulates the trace's initial configuration restricted to one side of
/// `location` and collects the times that location is visited.
///
/// The restriction drops every initial particle on the other side; shared
/// collision pairs resolve identically to the full run through the
/// genealogical draw addressing.
pub fn visit_sequence(trace: &Trace, location: f64, side: VisitSide) -> VisitSequence {
    let mut seq = VisitSequence { location, ..Default::default() };
    let restricted: Vec<Particle> = trace
        .initial_particles()
        .iter()
        .filter(|p| match side {
            VisitSide::FromRight => p.birth_position > location,
            VisitSide::FromLeft => p.birth_position < location,
        })
        .map(|p| Particle::initial(p.id, p.species, p.birth_position))
        .collect();
    if restricted.is_empty() {
        return seq;
    }
    let sub = run(&restricted, &trace.params, trace.outcome_seed);
    match side {
        VisitSide::FromRight => {
            let mut ts: Vec<f64> = sub
                .particles
                .iter()
                .filter(|p| p.alive && p.species == Species::LeftArrow)
                .map(|p| p.birth_position - location)
                .collect();
            ts.sort_by(f64::total_cmp);
            seq.from_right_times = ts;
            seq.from_right_complete = sub.tail_shield(location) >= SHIELD_MIN;
            seq.from_right_horizon = sub.window.1 - location;
        }
        VisitSide::FromLeft => {
            let mut ts: Vec<f64> = sub
                .particles
                .iter()
                .filter(|p| p.alive && p.species == Species::RightArrow)
                .map(|p| location - p.birth_position)
                .collect();
            ts.sort_by(f64::total_cmp);
            seq.from_left_times = ts;
            // Mirror of the shield rule: blockades left of the location.
            seq.from_left_complete = sub
                .particles
                .iter()
                .filter(|p| p.alive && p.species.is_blockade() && p.birth_position < location)
                .count()
                >= SHIELD_MIN;
            seq.from_left_horizon = location - sub.window.0;
        }
    }
    seq
}

/// Terminal fate of the first particle when it is a right arrow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FirstArrowFate {
    /// First particle is not a right arrow.
    NotApplicable,
    /// Fate undetermined within the window (escaped, or terminal event
    /// outside the light cone).
    Unknown,
    KilledByOriginalBlockadeWeak,
    KilledByOriginalBlockadeMutual,
    KilledByGeneratedBlockadeWeak,
    KilledByGeneratedBlockadeMutual,
    /// Destroyed by a left arrow that survived (arrow-arrow strong).
    KilledByLeftArrow,
    /// Mutual annihilation with a left arrow, no blockade left behind.
    MutualWithLeftArrow,
    /// Coalesced with a left arrow into a generated blockade.
    Coalesced,
}

impl FirstArrowFate {
    /// Was the first right arrow annihilated by a blockade (weakly or
    /// mutually)? `None` when undetermined.
    pub fn killed_by_blockade(self) -> Option<bool> {
        match self {
            FirstArrowFate::Unknown => None,
            FirstArrowFate::KilledByOriginalBlockadeWeak
            | FirstArrowFate::KilledByOriginalBlockadeMutual
            | FirstArrowFate::KilledByGeneratedBlockadeWeak
            | FirstArrowFate::KilledByGeneratedBlockadeMutual => Some(true),
            _ => Some(false),
        }
    }

    pub fn coalesced(self) -> Option<bool> {
        match self {
            FirstArrowFate::Unknown => None,
            FirstArrowFate::Coalesced => Some(true),
            _ => Some(false),
        }
    }

    pub fn mutual_with_left_arrow(self) -> Option<bool> {
        match self {
            FirstArrowFate::Unknown => None,
            FirstArrowFate::MutualWithLeftArrow => Some(true),
            _ => Some(false),
        }
    }

    pub fn killed_by_left_arrow(self) -> Option<bool> {
        match self {
            FirstArrowFate::Unknown => None,
            FirstArrowFate::KilledByLeftArrow => Some(true),
            _ => Some(false),
        }
    }
}

/// Outcome of the first collision suffered by the first particle when it is
/// an original blockade.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BlockadeFirstVisit {
    NotApplicable,
    Unknown,
    Strong,
    Weak,
    Mutual,
    /// Certified that the blockade is never visited.
    NeverVisited,
}

/// Per-trial flags consumed by the estimators.
#[derive(Debug, Clone, Copy)]
pub struct TrialFlags {
    pub first_species: Species,
    pub origin: OriginOutcome,
    /// Tri-state origin visit.
    pub visited: Option<bool>,
    /// Number of origin crossings observed (exact for window arrows).
    pub crossing_count: u32,
    /// No further crossings can ever occur (shield certified).
    pub no_more_visits_certified: bool,
    pub arrow_fate: FirstArrowFate,
    pub blockade_first_visit: BlockadeFirstVisit,
    /// Origin visited AND first particle killed by a blockade.
    pub s_event: Option<bool>,
    /// Origin not visited AND first particle killed by a blockade.
    pub r_event: Option<bool>,
    /// First particle coalesced with a left arrow into a blockade.
    pub phat_event: Option<bool>,
    /// First particle is an original blockade AND the origin is visited.
    pub rec2_event: Option<bool>,
}

fn kleene_and(a: Option<bool>, b: Option<bool>) -> Option<bool> {
    match (a, b) {
        (Some(false), _) | (_, Some(false)) => Some(false),
        (Some(true), Some(true)) => Some(true),
        _ => None,
    }
}

fn kleene_not(a: Option<bool>) -> Option<bool> {
    a.map(|x| !x)
}

/// Extracts the event flags of a one-sided trial.
pub fn classify_trial(trace: &Trace) -> Result<TrialFlags, ModelError> {
    if trace.side != Side::RightHalfLine {
        return Err(ModelError::Config("trial classification is defined for right-half-line traces".into()));
    }
    let origin = origin_outcome(trace)?;
    let visited = origin.visited();
    let crossings = trace.origin_crossing_times();
    let first = trace.initial_particles()[0];
    let cone_edge = trace.window.1;

    // Terminal event of the first particle, if it is a right arrow.
    let fid = first.id;
    let mut arrow_fate = FirstArrowFate::NotApplicable;
    if first.species == Species::RightArrow {
        arrow_fate = FirstArrowFate::Unknown; // escaped, unless a terminal event says otherwise
        for e in &trace.events {
            let (l, r) = e.participants;
            if l != fid && r != fid {
                continue;
            }
            let died = match e.kind {
                EventKind::Mutual | EventKind::CoalesceToBlockade => true,
                EventKind::StrongLeftSurvives => l == fid, // left participant dies
                EventKind::StrongRightSurvives => r == fid,
                EventKind::WeakFromLeft => l == fid, // the arriving arrow dies
                EventKind::WeakFromRight => r == fid,
            };
            if !died {
                continue;
            }
            // The fate is only trusted inside the light cone.
            if e.position + e.time >= cone_edge {
                break;
            }
            let partner = if l == fid { r } else { l };
            let partner_species = trace.particles[partner as usize].species;
            arrow_fate = match (e.kind, partner_species) {
                (EventKind::WeakFromLeft, Species::Blockade(BlockadeOrigin::Original)) => {
                    FirstArrowFate::KilledByOriginalBlockadeWeak
                }
                (EventKind::WeakFromLeft, Species::Blockade(BlockadeOrigin::Generated)) => {
                    FirstArrowFate::KilledByGeneratedBlockadeWeak
                }
                (EventKind::Mutual, Species::Blockade(BlockadeOrigin::Original)) => {
                    FirstArrowFate::KilledByOriginalBlockadeMutual
                }
                (EventKind::Mutual, Species::Blockade(BlockadeOrigin::Generated)) => {
                    FirstArrowFate::KilledByGeneratedBlockadeMutual
                }
                (EventKind::Mutual, Species::LeftArrow) => FirstArrowFate::MutualWithLeftArrow,
                (EventKind::StrongLeftSurvives, Species::LeftArrow) => FirstArrowFate::KilledByLeftArrow,
                (EventKind::CoalesceToBlockade, Species::LeftArrow) => FirstArrowFate::Coalesced,
                (k, s) => unreachable!("impossible terminal event {k:?} against {s:?}"),
            };
            break;
        }
    }

    // First collision suffered by a leading original blockade.
    let mut blockade_first_visit = BlockadeFirstVisit::NotApplicable;
    if first.species.is_blockade() {
        blockade_first_visit = match trace
            .events
            .iter()
            .find(|e| e.participants.0 == fid || e.participants.1 == fid)
        {
            Some(e) if e.position + e.time < cone_edge => match e.kind {
                EventKind::StrongLeftSurvives => BlockadeFirstVisit::Strong,
                EventKind::WeakFromRight => BlockadeFirstVisit::Weak,
                EventKind::Mutual => BlockadeFirstVisit::Mutual,
                k => unreachable!("impossible first event {k:?} on a leftmost blockade"),
            },
            Some(_) => BlockadeFirstVisit::Unknown,
            None if trace.tail_shield(first.birth_position) >= SHIELD_MIN => {
                BlockadeFirstVisit::NeverVisited
            }
            None => BlockadeFirstVisit::Unknown,
        };
    }

    let killed_by_blockade = match first.species {
        Species::RightArrow => arrow_fate.killed_by_blockade(),
        _ => Some(false),
    };

    Ok(TrialFlags {
        first_species: first.species,
        origin,
        visited,
        crossing_count: crossings.len() as u32,
        no_more_visits_certified: trace.tail_shield(0.0) >= SHIELD_MIN,
        arrow_fate,
        blockade_first_visit,
        s_event: kleene_and(killed_by_blockade, visited),
        r_event: kleene_and(killed_by_blockade, kleene_not(visited)),
        phat_event: match first.species {
            Species::RightArrow => arrow_fate.coalesced(),
            _ => Some(false),
        },
        rec2_event: kleene_and(
            Some(first.species == Species::Blockade(BlockadeOrigin::Original)),
            visited,
        ),
    })
}

/// Surviving vs. total original blockades within the central fraction of a
/// two-sided window. Returns `(surviving, total)`.
pub fn blockade_survival(trace: &Trace, central_fraction: f64) -> Result<(u64, u64), ModelError> {
    if trace.side != Side::TwoSided {
        return Err(ModelError::Config("blockade survival is defined for two-sided traces".into()));
    }
    if !(central_fraction > 0.0 && central_fraction <= 1.0) {
        return Err(ModelError::Config(format!(
            "central_fraction must lie in (0, 1], got {central_fraction}"
        )));
    }
    let (wl, wr) = trace.window;
    let mid = 0.5 * (wl + wr);
    let half = 0.5 * central_fraction * (wr - wl);
    let (mut surviving, mut total) = (0u64, 0u64);
    for p in trace.initial_particles() {
        if p.species == Species::Blockade(BlockadeOrigin::Original)
            && (p.birth_position - mid).abs() <= half
        {
            total += 1;
            if p.alive {
                surviving += 1;
            }
        }
    }
    Ok((surviving, total))
}
