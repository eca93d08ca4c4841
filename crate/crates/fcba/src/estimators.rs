//! Monte Carlo estimation of every probabilistic quantity in the model and
//! statistical comparison against the closed forms.
//!
//! All estimators share the same bookkeeping: each trial yields a
//! three-valued answer (true / false / undetermined-by-the-window) per
//! event, reduced into [`TriCount`]s. Undetermined trials never become point
//! guesses; they widen the `[uncertain_low, uncertain_high]` band of the
//! [`EstimateResult`]. Identity verdicts follow one rule: `Pass` when the
//! closed form sits within three standard errors (plus any stated truncation
//! band) of the point estimate, `Inconclusive` when it escapes the
//! confidence interval but stays inside the uncertainty band, `Fail`
//! otherwise.
//!
//! Trials are independent work items; reductions are order-independent sums,
//! so results do not depend on the worker pool's scheduling.

use crate::engine::{
    blockade_survival, classify_trial, run_config, BlockadeFirstVisit, TrialFlags,
};
use crate::model::{InitialConfig, ModelError, ReactionParams, Side, Species};
use crate::rng::{mix2, mix3, trial_seed};
use crate::stats::{wilson_interval, TriCount, Z_95};
use crate::theory::{
    cap_s_closed, hatp_from_mutual, r_closed, rec2_closed, s_closed, triple_sum_closed,
    truncation_index, truncation_tail_bound, TheoryError,
};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EstimatorError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Theory(#[from] TheoryError),
    #[error("all {trials} trials were uncertain; the window cannot decide the event — increase n")]
    AllUncertain { trials: u64 },
}

/// Point estimate with a Wilson confidence interval over certified trials
/// and interval bounds folding undetermined trials both ways.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EstimateResult {
    pub point: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub trials: u64,
    pub certified_fraction: f64,
    pub uncertain_low: f64,
    pub uncertain_high: f64,
}

impl EstimateResult {
    pub fn from_tri(t: &TriCount) -> Result<Self, EstimatorError> {
        let total = t.total();
        let det = t.yes + t.no;
        if det == 0 {
            return Err(EstimatorError::AllUncertain { trials: total });
        }
        let (ci_low, ci_high) = wilson_interval(t.yes, det, Z_95);
        Ok(EstimateResult {
            point: t.point(),
            ci_low,
            ci_high,
            trials: total,
            certified_fraction: det as f64 / total as f64,
            uncertain_low: t.yes as f64 / total as f64,
            uncertain_high: (t.yes + t.unknown) as f64 / total as f64,
        })
    }

    /// Binomial standard error of the point estimate.
    pub fn se(&self) -> f64 {
        let det = (self.trials as f64 * self.certified_fraction).max(1.0);
        (self.point * (1.0 - self.point) / det).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityReport {
    pub name: String,
    pub mc_value: EstimateResult,
    pub closed_value: f64,
    pub z_score: f64,
    /// Systematic allowance added to the 3-sigma comparison (truncation tail,
    /// certification band half-width).
    pub extra_tolerance: f64,
    pub verdict: Verdict,
    pub details: String,
}

/// One verdict rule for every identity: CI hit passes, uncertainty-band hit
/// is inconclusive, anything else fails.
fn verdict_for(mc: &EstimateResult, closed: f64, se_total: f64, extra: f64) -> (f64, Verdict) {
    let z = if se_total > 0.0 { (mc.point - closed) / se_total } else { 0.0 };
    let dev = (mc.point - closed).abs();
    if dev <= 3.0 * se_total + extra {
        return (z, Verdict::Pass);
    }
    let band_lo = mc.uncertain_low - 3.0 * se_total - extra;
    let band_hi = mc.uncertain_high + 3.0 * se_total + extra;
    if closed >= band_lo && closed <= band_hi {
        (z, Verdict::Inconclusive)
    } else {
        (z, Verdict::Fail)
    }
}

fn half_line_cfg(p: f64, n: usize, seed: u64) -> InitialConfig {
    InitialConfig { n, side: Side::RightHalfLine, p, spacing: Default::default(), seed }
}

/// Runs `trials` one-sided trials and returns their flags in trial order.
fn run_flagged_trials(
    params: &ReactionParams,
    p: f64,
    n: usize,
    trials: u64,
    master_seed: u64,
) -> Result<Vec<TrialFlags>, EstimatorError> {
    half_line_cfg(p, n, 0).validate()?;
    Ok((0..trials)
        .into_par_iter()
        .map(|t| {
            let cfg = half_line_cfg(p, n, trial_seed(master_seed, t));
            let trace = run_config(&cfg, params).expect("validated config");
            classify_trial(&trace).expect("half-line trace")
        })
        .collect())
}

/// Estimates the origin-visit probability `q`.
pub fn estimate_q(
    params: &ReactionParams,
    p: f64,
    n: usize,
    trials: u64,
    master_seed: u64,
) -> Result<EstimateResult, EstimatorError> {
    let flags = run_flagged_trials(params, p, n, trials, master_seed)?;
    let mut tri = TriCount::default();
    for f in &flags {
        tri.add(f.visited);
    }
    EstimateResult::from_tri(&tri)
}

/// Central finite difference of a scalar function.
fn derivative(f: impl Fn(f64) -> f64, x: f64) -> f64 {
    let h = 1e-6;
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Checks the first-blockade identity: P(origin visited and first particle
/// is an original blockade) against its closed form evaluated at the same
/// run's estimate of q.
pub fn estimate_rec2(
    params: &ReactionParams,
    p: f64,
    n: usize,
    trials: u64,
    master_seed: u64,
) -> Result<IdentityReport, EstimatorError> {
    let flags = run_flagged_trials(params, p, n, trials, master_seed)?;
    rec2_report(params, p, &flags)
}

fn rec2_report(
    params: &ReactionParams,
    p: f64,
    flags: &[TrialFlags],
) -> Result<IdentityReport, EstimatorError> {
    let mut tri = TriCount::default();
    let mut vis = TriCount::default();
    for f in flags {
        tri.add(f.rec2_event);
        vis.add(f.visited);
    }
    let mc = EstimateResult::from_tri(&tri)?;
    let qr = EstimateResult::from_tri(&vis)?;
    let closed = rec2_closed(params, p, qr.point);
    let se_closed = derivative(|q| rec2_closed(params, p, q), qr.point).abs() * qr.se();
    let se_total = (mc.se().powi(2) + se_closed.powi(2)).sqrt();
    let (z, verdict) = verdict_for(&mc, closed, se_total, 0.0);
    Ok(IdentityReport {
        name: "rec-2".into(),
        mc_value: mc,
        closed_value: closed,
        z_score: z,
        extra_tolerance: 0.0,
        verdict,
        details: format!("q_hat = {:.6}, closed at q_hat = {closed:.6}", qr.point),
    })
}

/// Estimates `s`, `r` and the first-arrow coalescence probability, checking
/// each against its closed form with the simultaneously estimated q and
/// coalescence probability.
pub fn estimate_s_r_phat(
    params: &ReactionParams,
    p: f64,
    n: usize,
    trials: u64,
    master_seed: u64,
) -> Result<Vec<IdentityReport>, EstimatorError> {
    let flags = run_flagged_trials(params, p, n, trials, master_seed)?;
    s_r_phat_reports(params, p, &flags)
}

fn s_r_phat_reports(
    params: &ReactionParams,
    p: f64,
    flags: &[TrialFlags],
) -> Result<Vec<IdentityReport>, EstimatorError> {
    let mut s_tri = TriCount::default();
    let mut r_tri = TriCount::default();
    let mut phat_tri = TriCount::default();
    let mut mutual_tri = TriCount::default();
    let mut vis = TriCount::default();
    for f in flags {
        s_tri.add(f.s_event);
        r_tri.add(f.r_event);
        phat_tri.add(f.phat_event);
        mutual_tri.add(match f.first_species {
            Species::RightArrow => f.arrow_fate.mutual_with_left_arrow(),
            _ => Some(false),
        });
        vis.add(f.visited);
    }
    let qr = EstimateResult::from_tri(&vis)?;
    let phat = EstimateResult::from_tri(&phat_tri)?;
    let (q_hat, p_hat) = (qr.point, phat.point);

    let mut out = Vec::with_capacity(3);
    for (name, tri, f) in [
        ("s", &s_tri, &s_closed as &dyn Fn(&ReactionParams, f64, f64, f64) -> f64),
        ("r", &r_tri, &r_closed),
    ] {
        let mc = EstimateResult::from_tri(tri)?;
        let closed = f(params, p, p_hat, q_hat);
        let dq = derivative(|q| f(params, p, p_hat, q), q_hat).abs() * qr.se();
        let dp = derivative(|ph| f(params, p, ph, q_hat), p_hat).abs() * phat.se();
        let se_total = (mc.se().powi(2) + dq * dq + dp * dp).sqrt();
        let (z, verdict) = verdict_for(&mc, closed, se_total, 0.0);
        out.push(IdentityReport {
            name: name.into(),
            mc_value: mc,
            closed_value: closed,
            z_score: z,
            extra_tolerance: 0.0,
            verdict,
            details: format!("q_hat = {q_hat:.6}, phat_hat = {p_hat:.6}"),
        });
    }

    // phat against its change-of-measure expression (b/c) P(mutual).
    let pm = EstimateResult::from_tri(&mutual_tri)?;
    match hatp_from_mutual(params, pm.point) {
        Ok(closed) => {
            let ratio = params.b / params.c;
            // Mutual and coalescence are exclusive outcomes of the same
            // trials; the multinomial covariance tightens the difference SE.
            let t = (phat.trials as f64 * phat.certified_fraction.min(pm.certified_fraction)).max(1.0);
            let var = (p_hat * (1.0 - p_hat)
                + ratio * ratio * pm.point * (1.0 - pm.point)
                + 2.0 * ratio * p_hat * pm.point)
                / t;
            let se_total = var.max(0.0).sqrt();
            let (z, verdict) = verdict_for(&phat, closed, se_total, 0.0);
            out.push(IdentityReport {
                name: "phat".into(),
                mc_value: phat,
                closed_value: closed,
                z_score: z,
                extra_tolerance: 0.0,
                verdict,
                details: format!("P(mutual) = {:.6}, b/c = {ratio:.6}", pm.point),
            });
        }
        Err(TheoryError::UnsupportedRatio) => {
            out.push(IdentityReport {
                name: "phat".into(),
                mc_value: phat,
                closed_value: p_hat,
                z_score: 0.0,
                extra_tolerance: 0.0,
                verdict: Verdict::Inconclusive,
                details: "c = 0: no mutual-annihilation ratio available; direct estimate only".into(),
            });
        }
        Err(e) => return Err(e.into()),
    }
    Ok(out)
}

/// Checks that the terminal-outcome frequencies of the first right arrow and
/// the first-visit outcome frequencies of a leading blockade stand in the
/// ratios prescribed by the reaction tables.
pub fn estimate_change_of_measure(
    params: &ReactionParams,
    p: f64,
    n: usize,
    trials: u64,
    master_seed: u64,
) -> Result<IdentityReport, EstimatorError> {
    let flags = run_flagged_trials(params, p, n, trials, master_seed)?;
    change_of_measure_report(params, &flags)
}

fn pairwise_ratio_z(fx: f64, x: f64, fy: f64, y: f64, t: f64) -> f64 {
    let d = fx / x - fy / y;
    let var = (fx * (1.0 - fx) / (x * x) + fy * (1.0 - fy) / (y * y) + 2.0 * fx * fy / (x * y)) / t;
    if var > 0.0 {
        d / var.sqrt()
    } else {
        0.0
    }
}

fn change_of_measure_report(
    params: &ReactionParams,
    flags: &[TrialFlags],
) -> Result<IdentityReport, EstimatorError> {
    // Arrow side: terminal outcomes of the first right arrow.
    let mut left_kill = TriCount::default();
    let mut coalesce = TriCount::default();
    let mut mutual = TriCount::default();
    // Blockade side: first-visit outcomes of a leading original blockade.
    let mut strong = TriCount::default();
    let mut weak = TriCount::default();
    let mut bmutual = TriCount::default();
    for f in flags {
        let (kl, co, mu) = match f.first_species {
            Species::RightArrow => (
                f.arrow_fate.killed_by_left_arrow(),
                f.arrow_fate.coalesced(),
                f.arrow_fate.mutual_with_left_arrow(),
            ),
            _ => (Some(false), Some(false), Some(false)),
        };
        left_kill.add(kl);
        coalesce.add(co);
        mutual.add(mu);
        let (st, wk, bm) = match (f.first_species, f.blockade_first_visit) {
            (Species::Blockade(_), BlockadeFirstVisit::Unknown) => (None, None, None),
            (Species::Blockade(_), v) => (
                Some(v == BlockadeFirstVisit::Strong),
                Some(v == BlockadeFirstVisit::Weak),
                Some(v == BlockadeFirstVisit::Mutual),
            ),
            _ => (Some(false), Some(false), Some(false)),
        };
        strong.add(st);
        weak.add(wk);
        bmutual.add(bm);
    }

    let mut details = Vec::new();
    let mut worst_z = 0.0f64;
    let mut any = false;
    let mut check_pairs =
        |buckets: &[(&str, &TriCount, f64)], label: &str| -> Result<(), EstimatorError> {
            let present: Vec<_> = buckets.iter().filter(|(_, _, w)| *w > 0.0).collect();
            for i in 0..present.len() {
                for j in i + 1..present.len() {
                    let (nx, tx, x) = present[i];
                    let (ny, ty, y) = present[j];
                    let ex = EstimateResult::from_tri(tx)?;
                    let ey = EstimateResult::from_tri(ty)?;
                    let t = (ex.trials as f64 * ex.certified_fraction.min(ey.certified_fraction)).max(1.0);
                    let z = pairwise_ratio_z(ex.point, *x, ey.point, *y, t);
                    worst_z = if z.abs() > worst_z.abs() { z } else { worst_z };
                    any = true;
                    details.push(format!(
                        "{label}: {nx}/{x:.4} = {:.5} vs {ny}/{y:.4} = {:.5} (z = {z:+.2})",
                        ex.point / x,
                        ey.point / y
                    ));
                }
            }
            Ok(())
        };
    check_pairs(
        &[
            ("left-survives", &left_kill, params.a / 2.0),
            ("coalesce", &coalesce, params.b),
            ("mutual", &mutual, params.c),
        ],
        "arrow",
    )?;
    check_pairs(
        &[
            ("strong", &strong, params.alpha),
            ("weak", &weak, params.beta),
            ("mutual", &bmutual, params.xi),
        ],
        "blockade",
    )?;

    let mc = EstimateResult::from_tri(&mutual)?;
    let verdict = if !any || worst_z.abs() <= 3.0 { Verdict::Pass } else { Verdict::Fail };
    Ok(IdentityReport {
        name: "change-of-measure".into(),
        mc_value: mc,
        closed_value: 0.0,
        z_score: worst_z,
        extra_tolerance: 0.0,
        verdict,
        details: details.join("; "),
    })
}

/// Checks that the frequency of at least `i` origin visits equals `q^i`.
pub fn estimate_visit_powers(
    params: &ReactionParams,
    p: f64,
    n: usize,
    trials: u64,
    master_seed: u64,
    i_max: usize,
) -> Result<Vec<IdentityReport>, EstimatorError> {
    let flags = run_flagged_trials(params, p, n, trials, master_seed)?;
    visit_power_reports(&flags, i_max)
}

fn visit_power_reports(flags: &[TrialFlags], i_max: usize) -> Result<Vec<IdentityReport>, EstimatorError> {
    let mut tris = vec![TriCount::default(); i_max];
    for f in flags {
        for (i, tri) in tris.iter_mut().enumerate() {
            let want = i as u32 + 1;
            tri.add(if f.crossing_count >= want {
                Some(true)
            } else if f.no_more_visits_certified {
                Some(false)
            } else {
                None
            });
        }
    }
    let q = EstimateResult::from_tri(&tris[0])?;
    let q_hat = q.point;
    let mut out = Vec::with_capacity(i_max);
    for (idx, tri) in tris.iter().enumerate() {
        let i = idx + 1;
        let mc = EstimateResult::from_tri(tri)?;
        let closed = q_hat.powi(i as i32);
        // Exact multinomial/delta variance of freq_i - q_hat^i; vanishes at
        // i = 1 by construction.
        let t = (mc.trials as f64 * mc.certified_fraction).max(1.0);
        let ii = i as f64;
        let var = (closed * (1.0 - closed)
            + ii * (ii - 2.0) * q_hat.powi(2 * i as i32 - 1) * (1.0 - q_hat))
            / t;
        let se_total = var.max(0.0).sqrt();
        let (z, verdict) = verdict_for(&mc, closed, se_total, 0.0);
        out.push(IdentityReport {
            name: format!("visit-power-{i}"),
            mc_value: mc,
            closed_value: closed,
            z_score: z,
            extra_tolerance: 0.0,
            verdict,
            details: format!("q_hat = {q_hat:.6}"),
        });
    }
    Ok(out)
}

/// One endpoint of a visit time that may be censored by the window.
#[derive(Clone, Copy)]
struct ValueInterval {
    lo: f64,
    hi: f64,
}

impl ValueInterval {
    fn exact(v: f64) -> Self {
        ValueInterval { lo: v, hi: v }
    }
    fn beyond(horizon: f64) -> Self {
        ValueInterval { lo: horizon, hi: f64::INFINITY }
    }
    fn never() -> Self {
        ValueInterval { lo: f64::INFINITY, hi: f64::INFINITY }
    }
    fn lt_certain(self, other: Self) -> bool {
        self.hi < other.lo
    }
    fn lt_possible(self, other: Self) -> bool {
        self.lo < other.hi
    }
    fn finite_certain(self) -> bool {
        self.hi < f64::INFINITY
    }
    fn finite_possible(self) -> bool {
        self.lo < f64::INFINITY
    }
}

/// i-th (1-based) visit time as an interval.
fn nth_visit(times: &[f64], complete: bool, horizon: f64, i: usize) -> ValueInterval {
    if i == 0 {
        ValueInterval::exact(0.0)
    } else if i <= times.len() {
        ValueInterval::exact(times[i - 1])
    } else if complete {
        ValueInterval::never()
    } else {
        ValueInterval::beyond(horizon)
    }
}

struct VisitPair {
    right_times: Vec<f64>,
    right_complete: bool,
    right_horizon: f64,
    left_times: Vec<f64>,
    left_complete: bool,
    left_horizon: f64,
    /// Visit indicators for the pooled q estimate.
    visited: [Option<bool>; 2],
}

/// Two independent one-sided systems facing a common location: the trial
/// trace provides the visits from the right, an independent mirrored run the
/// visits from the left.
fn sample_visit_pair(params: &ReactionParams, p: f64, n: usize, seed: u64) -> VisitPair {
    let mk = |s: u64| {
        let cfg = half_line_cfg(p, n, s);
        let trace = run_config(&cfg, params).expect("validated config");
        let times = trace.origin_crossing_times();
        let complete = trace.tail_shield(0.0) >= crate::engine::SHIELD_MIN;
        let horizon = trace.window.1;
        let visited = if !times.is_empty() {
            Some(true)
        } else if complete {
            Some(false)
        } else {
            None
        };
        (times, complete, horizon, visited)
    };
    let (rt, rc, rh, rv) = mk(mix2(seed, 1));
    let (lt, lc, lh, lv) = mk(mix2(seed, 2));
    VisitPair {
        right_times: rt,
        right_complete: rc,
        right_horizon: rh,
        left_times: lt,
        left_complete: lc,
        left_horizon: lh,
        visited: [rv, lv],
    }
}

struct WeightedSumAcc {
    sum_lo: f64,
    sum_hi: f64,
    sum_mid: f64,
    sum_mid_sq: f64,
    determined: u64,
}

/// One pass over paired independent systems, estimating both weighted sums.
fn weighted_sum_reports(
    params: &ReactionParams,
    p: f64,
    n: usize,
    trials: u64,
    k: Option<usize>,
    master_seed: u64,
) -> Result<[IdentityReport; 2], EstimatorError> {
    half_line_cfg(p, n, 0).validate()?;
    let beta = params.beta;
    let k = k.unwrap_or_else(|| truncation_index(beta, 1e-6));
    let tail = truncation_tail_bound(beta, k);

    // (cap-s lo, cap-s hi, triple lo, triple hi, visit flags)
    let per_trial: Vec<(f64, f64, f64, f64, [Option<bool>; 2])> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let pair = sample_visit_pair(params, p, n, trial_seed(master_seed, t));
            let mut sums = [0.0f64; 4];
            for i in 1..k {
                let from_left = nth_visit(&pair.left_times, pair.left_complete, pair.left_horizon, i);
                for j in 1..=(k - i) {
                    let w = beta.powi((i + j) as i32);
                    if w == 0.0 {
                        continue;
                    }
                    let cur = nth_visit(&pair.right_times, pair.right_complete, pair.right_horizon, j);
                    // cap-s: from_left < cur < infinity
                    if from_left.lt_certain(cur) && cur.finite_certain() {
                        sums[0] += w;
                        sums[1] += w;
                    } else if from_left.lt_possible(cur) && cur.finite_possible() {
                        sums[1] += w;
                    }
                    // triple: prev < from_left < cur < infinity
                    let prev =
                        nth_visit(&pair.right_times, pair.right_complete, pair.right_horizon, j - 1);
                    if prev.lt_certain(from_left)
                        && from_left.lt_certain(cur)
                        && cur.finite_certain()
                    {
                        sums[2] += w;
                        sums[3] += w;
                    } else if prev.lt_possible(from_left)
                        && from_left.lt_possible(cur)
                        && cur.finite_possible()
                    {
                        sums[3] += w;
                    }
                }
            }
            (sums[0], sums[1], sums[2], sums[3], pair.visited)
        })
        .collect();

    let mut visits = TriCount::default();
    for (.., vs) in &per_trial {
        for v in vs {
            visits.add(*v);
        }
    }
    let q = EstimateResult::from_tri(&visits)?;
    let q_hat = q.point;

    let build = |name: &str, lo_hi: &dyn Fn(&(f64, f64, f64, f64, [Option<bool>; 2])) -> (f64, f64),
                 closed_fn: &dyn Fn(f64) -> f64|
     -> IdentityReport {
        let mut acc = WeightedSumAcc {
            sum_lo: 0.0,
            sum_hi: 0.0,
            sum_mid: 0.0,
            sum_mid_sq: 0.0,
            determined: 0,
        };
        for rec in &per_trial {
            let (lo, hi) = lo_hi(rec);
            let mid = 0.5 * (lo + hi);
            acc.sum_lo += lo;
            acc.sum_hi += hi;
            acc.sum_mid += mid;
            acc.sum_mid_sq += mid * mid;
            if lo == hi {
                acc.determined += 1;
            }
        }
        let t = trials.max(1) as f64;
        let mean = acc.sum_mid / t;
        let var = (acc.sum_mid_sq / t - mean * mean).max(0.0) / t.max(2.0);
        let se_mc = var.sqrt();
        let band = 0.5 * (acc.sum_hi - acc.sum_lo) / t;
        let closed = closed_fn(q_hat);
        let se_closed = derivative(closed_fn, q_hat).abs() * q.se();
        let se_total = (se_mc * se_mc + se_closed * se_closed).sqrt();
        let mc = EstimateResult {
            point: mean,
            ci_low: mean - Z_95 * se_total,
            ci_high: mean + Z_95 * se_total,
            trials,
            certified_fraction: acc.determined as f64 / t,
            uncertain_low: acc.sum_lo / t,
            uncertain_high: acc.sum_hi / t,
        };
        let extra = tail + band;
        let (z, verdict) = verdict_for(&mc, closed, se_total, extra);
        IdentityReport {
            name: name.into(),
            mc_value: mc,
            closed_value: closed,
            z_score: z,
            extra_tolerance: extra,
            verdict,
            details: format!("K = {k}, tail bound = {tail:.3e}, q_hat = {q_hat:.6}"),
        }
    };

    Ok([
        build("cap-s", &|r| (r.0, r.1), &|qq| cap_s_closed(beta, qq)),
        build("triple-sum", &|r| (r.2, r.3), &|qq| triple_sum_closed(beta, qq)),
    ])
}

/// Estimates the double sum `sum beta^(i+j) P(tau_left_i < tau_right_j < inf)`
/// from two independent one-sided systems and compares with its closed form.
pub fn estimate_cap_s(
    params: &ReactionParams,
    p: f64,
    n: usize,
    trials: u64,
    k: Option<usize>,
    master_seed: u64,
) -> Result<IdentityReport, EstimatorError> {
    let [cap_s, _] = weighted_sum_reports(params, p, n, trials, k, master_seed)?;
    Ok(cap_s)
}

/// Estimates the interleaving sum
/// `sum beta^(i+j) P(tau_right_(j-1) < tau_left_i < tau_right_j < inf)`.
pub fn estimate_triple_sum(
    params: &ReactionParams,
    p: f64,
    n: usize,
    trials: u64,
    k: Option<usize>,
    master_seed: u64,
) -> Result<IdentityReport, EstimatorError> {
    let [_, triple] = weighted_sum_reports(params, p, n, trials, k, master_seed)?;
    Ok(triple)
}

/// Runs the full identity suite on a shared set of trials.
pub fn verify_identities(
    params: &ReactionParams,
    p: f64,
    n: usize,
    trials: u64,
    k: Option<usize>,
    master_seed: u64,
    visit_power_max: usize,
) -> Result<Vec<IdentityReport>, EstimatorError> {
    let flags = run_flagged_trials(params, p, n, trials, master_seed)?;
    let mut out = Vec::new();
    out.push(rec2_report(params, p, &flags)?);
    out.extend(s_r_phat_reports(params, p, &flags)?);
    out.push(change_of_measure_report(params, &flags)?);
    out.extend(weighted_sum_reports(params, p, n, trials, k, mix2(master_seed, 0xca5))?);
    out.extend(visit_power_reports(&flags, visit_power_max)?);
    Ok(out)
}

/// Per-(density, size) survival statistics of a phase sweep.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PhasePointStat {
    pub p: f64,
    pub n: usize,
    pub trials: u64,
    /// Mean over trials of the central-window survival fraction.
    pub mean_fraction: f64,
    pub se: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PhaseClass {
    Subcritical,
    Supercritical,
    Ambiguous,
}

#[derive(Debug, Clone, Serialize)]
pub struct PcBracket {
    pub p_lower: f64,
    pub p_upper: f64,
    pub classes: Vec<(f64, PhaseClass)>,
    pub stats: Vec<PhasePointStat>,
    pub warnings: Vec<String>,
}

/// Survival fraction floor separating a supercritical plateau from the
/// finite-window leakage of subcritical points. Near the critical density
/// the surviving fraction vanishes continuously, so the achievable bracket
/// resolution is set by this floor together with the grid spacing.
pub const PHASE_EPS_FLOOR: f64 = 1e-3;

/// Total decay across the doubling schedule beyond which a point is treated
/// as draining to zero.
const PHASE_DECAY_GUARD: f64 = 0.4;

/// Brackets the critical density empirically: a grid point is supercritical
/// when its central-window survival fraction stays above the floor (lower
/// confidence bound) at every window size without draining, subcritical when
/// the fraction has fallen below the floor at the largest window.
pub fn empirical_pc(
    params: &ReactionParams,
    p_grid: &[f64],
    n_schedule: &[usize],
    trials: u64,
    central_fraction: f64,
    master_seed: u64,
) -> Result<PcBracket, EstimatorError> {
    assert!(!p_grid.is_empty() && !n_schedule.is_empty());
    assert!(p_grid.windows(2).all(|w| w[0] < w[1]), "p_grid must be increasing");

    let mut stats = Vec::new();
    let mut classes = Vec::new();
    let mut warnings = Vec::new();
    for (gi, &p) in p_grid.iter().enumerate() {
        let mut fractions = Vec::with_capacity(n_schedule.len());
        for (ni, &n) in n_schedule.iter().enumerate() {
            let cfg_probe = InitialConfig {
                n,
                side: Side::TwoSided,
                p,
                spacing: Default::default(),
                seed: 0,
            };
            cfg_probe.validate()?;
            let point_seed = mix3(master_seed, gi as u64, ni as u64);
            let per_trial: Vec<f64> = (0..trials)
                .into_par_iter()
                .map(|t| {
                    let cfg = InitialConfig { seed: trial_seed(point_seed, t), ..cfg_probe };
                    let trace = run_config(&cfg, params).expect("validated config");
                    let (surv, total) = blockade_survival(&trace, central_fraction).expect("two-sided");
                    if total == 0 {
                        0.0
                    } else {
                        surv as f64 / total as f64
                    }
                })
                .collect();
            let t = per_trial.len() as f64;
            let mean = per_trial.iter().sum::<f64>() / t;
            let var = per_trial.iter().map(|f| (f - mean) * (f - mean)).sum::<f64>() / t.max(2.0);
            let se = (var / t).sqrt();
            stats.push(PhasePointStat { p, n, trials, mean_fraction: mean, se });
            fractions.push((mean, se));
        }
        let (first, _) = fractions[0];
        let (last, se_last) = *fractions.last().unwrap();
        let super_crit = fractions.iter().all(|(m, se)| m - 3.0 * se > PHASE_EPS_FLOOR)
            && last >= PHASE_DECAY_GUARD * first;
        let sub_crit = last + 3.0 * se_last < PHASE_EPS_FLOOR;
        let class = if super_crit {
            PhaseClass::Supercritical
        } else if sub_crit {
            PhaseClass::Subcritical
        } else {
            PhaseClass::Ambiguous
        };
        classes.push((p, class));
    }

    let min_super = classes
        .iter()
        .filter(|(_, c)| *c == PhaseClass::Supercritical)
        .map(|(p, _)| *p)
        .fold(f64::INFINITY, f64::min);
    let max_sub_below = classes
        .iter()
        .filter(|(p, c)| *c == PhaseClass::Subcritical && *p < min_super)
        .map(|(p, _)| *p)
        .fold(f64::NEG_INFINITY, f64::max);
    let any_sub_above = classes
        .iter()
        .any(|(p, c)| *c == PhaseClass::Subcritical && *p > min_super);
    if any_sub_above {
        warnings.push("non-monotone classification across the grid; bracket widened".into());
    }
    let p_lower = if max_sub_below.is_finite() {
        max_sub_below
    } else {
        warnings.push("no subcritical grid point; lower edge defaults to the grid minimum".into());
        p_grid[0]
    };
    let p_upper = if min_super.is_finite() {
        min_super
    } else {
        warnings.push("no supercritical grid point; upper edge defaults to the grid maximum".into());
        *p_grid.last().unwrap()
    };
    Ok(PcBracket { p_lower, p_upper, classes, stats, warnings })
}

/// Is a candidate critical density consistent with the bracket, allowing
/// half a grid cell of slack at each edge?
pub fn bracket_consistent(bracket: &PcBracket, p_grid: &[f64], candidate: f64) -> bool {
    let slack_at = |edge: f64| -> f64 {
        let idx = p_grid.iter().position(|&p| p == edge).unwrap_or(0);
        let below = if idx > 0 { (p_grid[idx] - p_grid[idx - 1]) / 2.0 } else { f64::INFINITY };
        let above = if idx + 1 < p_grid.len() {
            (p_grid[idx + 1] - p_grid[idx]) / 2.0
        } else {
            f64::INFINITY
        };
        below.min(above)
    };
    let lo = bracket.p_lower - slack_at(bracket.p_lower);
    let hi = bracket.p_upper + slack_at(bracket.p_upper);
    candidate >= lo && candidate <= hi
}
