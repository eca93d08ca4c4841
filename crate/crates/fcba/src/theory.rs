//! Closed forms: the critical density, the implicit recursion for the
//! origin-visit probability, and the auxiliary identities used to verify the
//! simulation (and vice versa).
//!
//! The central object is `g(u, v)`, the residual of the one-sided visit
//! recursion with blockade density `u` and visit probability `v`:
//! `q(p)` solves `g(p, q) = 0` on the supercritical side, and the critical
//! density is the unique root of the affine map `u -> g(u, 1)`, which the
//! closed form [`pc_closed_form`] evaluates directly.
//!
//! `g` here is the recursion residual assembled from the component
//! identities ([`rec2_closed`], [`s_closed`], [`r_closed`], with the
//! first-arrow coalescence probability eliminated by its change-of-measure
//! relation) after dividing out the trivial root `v = 1`. Expanded:
//!
//! ```text
//! g(u, v) = -v + (f1 + f2) / f3
//! f1(u, v) = u * v * (L*v + 2*xi),  L = (1-alpha)(1-beta) + beta^2 - (a+b)(1-alpha)
//! f2(u, v) = u - (1 - beta*v)^2 * (1 + (2-a)*v) + b*(1-alpha)*v^2*((1+beta)*v - 1)
//! f3(v)    = (a-2) * (1 - beta*v)^2 + b*(1-alpha)*v*((1+beta)*v - 2)
//! ```
//!
//! `f3` is strictly negative for valid parameters and `v` in [0, 1], and the
//! numerator is affine in `u`, which makes the `v = 1` root available in
//! closed form and the solver brackets well behaved.

use crate::model::ReactionParams;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum TheoryError {
    #[error("degenerate denominator: {0}")]
    DegenerateDenominator(String),
    #[error("no root of g({p}, v) found in (0, 1); bracket scan exhausted ({details})")]
    NoRootFound { p: f64, details: String },
    #[error("{0} must be a probability in [0, 1], got {1}")]
    NotAProbability(&'static str, f64),
    #[error("unsupported ratio: c = 0; estimate the coalescence probability directly")]
    UnsupportedRatio,
}

const DENOM_TINY: f64 = 1e-12;

/// Critical blockade density.
///
/// `((1-beta)^2 - b(1-alpha)) / (4 - (a+b)(1-alpha) - beta(3-alpha-beta) - 3 alpha)`
///
/// The value can leave (0, 1) in coalescence-dominated corners of the
/// parameter space (large `b` with resilient blockades): a non-positive
/// result means generated blockades jam the line at every initial density,
/// so the subcritical phase is empty. Callers that expect a genuine phase
/// transition should check the range.
pub fn pc_closed_form(params: &ReactionParams) -> Result<f64, TheoryError> {
    let (a, b, al, be) = (params.a, params.b, params.alpha, params.beta);
    let num = (1.0 - be) * (1.0 - be) - b * (1.0 - al);
    let den = 4.0 - (a + b) * (1.0 - al) - be * (3.0 - al - be) - 3.0 * al;
    if den.abs() < DENOM_TINY {
        return Err(TheoryError::DegenerateDenominator(format!(
            "critical-density denominator = {den:e}"
        )));
    }
    Ok(num / den)
}

/// The pieces of one evaluation of `g`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GParts {
    pub f1: f64,
    pub f2: f64,
    pub f3: f64,
    pub g: f64,
}

/// Evaluates the recursion residual `g(u, v) = -v + (f1 + f2)/f3`.
///
/// `v` is a probability; `u` may be any finite real so the affine map
/// `u -> g(u, 1)` can be probed at critical densities outside [0, 1].
pub fn g_eval(params: &ReactionParams, u: f64, v: f64) -> Result<GParts, TheoryError> {
    if !u.is_finite() {
        return Err(TheoryError::NotAProbability("u", u));
    }
    if !(v.is_finite() && (0.0..=1.0).contains(&v)) {
        return Err(TheoryError::NotAProbability("v", v));
    }
    let (a, b, al, be, xi) = (params.a, params.b, params.alpha, params.beta, params.xi);
    let lam = (1.0 - al) * (1.0 - be) + be * be - (a + b) * (1.0 - al);
    let bv = 1.0 - be * v;
    let f1 = u * v * (lam * v + 2.0 * xi);
    let f2 = u - bv * bv * (1.0 + (2.0 - a) * v) + b * (1.0 - al) * v * v * ((1.0 + be) * v - 1.0);
    let f3 = (a - 2.0) * bv * bv + b * (1.0 - al) * v * ((1.0 + be) * v - 2.0);
    if f3.abs() < DENOM_TINY {
        return Err(TheoryError::DegenerateDenominator(format!(
            "f3({v}) = {f3:e} for params a={a} b={b} alpha={al} beta={be}"
        )));
    }
    Ok(GParts { f1, f2, f3, g: -v + (f1 + f2) / f3 })
}

/// Which branch of `q(p)` applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum QBranch {
    /// `p <= p_c`: the visit probability is identically 1.
    SubcriticalOne,
    /// `p > p_c`: the strictly decreasing root of `g(p, .)`.
    SupercriticalRoot,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QSolution {
    pub p: f64,
    pub q: f64,
    pub branch: QBranch,
    /// `|g(p, q)|` on the root branch; 0 on the subcritical branch.
    pub residual: f64,
}

const BRACKET_SUBDIVISIONS: usize = 2048;
const CONTINUATION_STEPS: usize = 64;

fn g_only(params: &ReactionParams, u: f64, v: f64) -> Result<f64, TheoryError> {
    Ok(g_eval(params, u, v)?.g)
}

/// All sign-change brackets of `v -> g(p, v)` over (0, 1).
fn root_brackets(params: &ReactionParams, p: f64) -> Result<Vec<(f64, f64)>, TheoryError> {
    let mut brackets = Vec::new();
    let mut v_prev = 0.0;
    let mut g_prev = g_only(params, p, v_prev)?;
    for k in 1..=BRACKET_SUBDIVISIONS {
        let v = k as f64 / BRACKET_SUBDIVISIONS as f64;
        let g = g_only(params, p, v)?;
        if g_prev == 0.0 {
            brackets.push((v_prev, v_prev));
        } else if g_prev.signum() != g.signum() {
            brackets.push((v_prev, v));
        }
        (v_prev, g_prev) = (v, g);
    }
    Ok(brackets)
}

fn bisect(params: &ReactionParams, p: f64, mut lo: f64, mut hi: f64) -> Result<f64, TheoryError> {
    if lo == hi {
        return Ok(lo);
    }
    let mut g_lo = g_only(params, p, lo)?;
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let g_mid = g_only(params, p, mid)?;
        if g_mid == 0.0 {
            return Ok(mid);
        }
        if g_lo.signum() != g_mid.signum() {
            hi = mid;
        } else {
            lo = mid;
            g_lo = g_mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Root of `g(p, .)` nearest `anchor` among the bracket-scan roots.
fn nearest_root(params: &ReactionParams, p: f64, anchor: f64) -> Result<f64, TheoryError> {
    let brackets = root_brackets(params, p)?;
    if brackets.is_empty() {
        return Err(TheoryError::NoRootFound {
            p,
            details: format!("{BRACKET_SUBDIVISIONS} subdivisions, anchor {anchor}"),
        });
    }
    let mut best = f64::NAN;
    let mut best_d = f64::INFINITY;
    for (lo, hi) in brackets {
        let root = bisect(params, p, lo, hi)?;
        let d = (root - anchor).abs();
        if d < best_d {
            best = root;
            best_d = d;
        }
    }
    Ok(best)
}

/// Solves for `q(p)`.
///
/// Subcritical densities return the constant-1 branch. Supercritical
/// densities return the root of `g(p, .)` selected by continuation from
/// `p = 1` (where `q = 0`) downward, which picks the physically relevant
/// branch if the scan ever sees multiple sign changes.
pub fn solve_q(params: &ReactionParams, p: f64, tol: f64) -> Result<QSolution, TheoryError> {
    if !(p.is_finite() && (0.0..=1.0).contains(&p)) {
        return Err(TheoryError::NotAProbability("p", p));
    }
    assert!(tol > 0.0, "tol must be positive");
    let pc = pc_closed_form(params)?;
    if p <= pc {
        return Ok(QSolution { p, q: 1.0, branch: QBranch::SubcriticalOne, residual: 0.0 });
    }
    if p == 1.0 {
        let residual = g_only(params, 1.0, 0.0)?.abs();
        return Ok(QSolution { p, q: 0.0, branch: QBranch::SupercriticalRoot, residual });
    }
    // Continuation: walk p downward from 1, tracking the root nearest the
    // previous step's answer.
    let mut anchor = 0.0;
    for step in 1..=CONTINUATION_STEPS {
        let frac = step as f64 / CONTINUATION_STEPS as f64;
        let pk = 1.0 + (p - 1.0) * frac;
        anchor = nearest_root(params, pk, anchor)?;
    }
    let residual = g_only(params, p, anchor)?.abs();
    if residual > tol {
        return Err(TheoryError::NoRootFound {
            p,
            details: format!("best root {anchor} has residual {residual:e} > tol {tol:e}"),
        });
    }
    Ok(QSolution { p, q: anchor, branch: QBranch::SupercriticalRoot, residual })
}

/// `s`: probability that the origin is visited and the first particle is a
/// right arrow annihilated by a blockade.
///
/// `(p + phat)(1-alpha)(1-beta) q^2 / (2 (1 - beta q)^2)`
pub fn s_closed(params: &ReactionParams, p: f64, p_hat: f64, q: f64) -> f64 {
    let d = 1.0 - params.beta * q;
    (p + p_hat) * (1.0 - params.alpha) * (1.0 - params.beta) * q * q / (2.0 * d * d)
}

/// `r`: probability that the origin is not visited and the first particle is
/// a right arrow annihilated by a blockade.
///
/// `(p + phat)(1-alpha) q (1-q) / (1 - beta q)^2`
pub fn r_closed(params: &ReactionParams, p: f64, p_hat: f64, q: f64) -> f64 {
    let d = 1.0 - params.beta * q;
    (p + p_hat) * (1.0 - params.alpha) * q * (1.0 - q) / (d * d)
}

/// Probability that the origin is visited and the first particle is an
/// original blockade: `(alpha p q + xi p q^2) / (1 - beta q)`.
pub fn rec2_closed(params: &ReactionParams, p: f64, q: f64) -> f64 {
    (params.alpha * p * q + params.xi * p * q * q) / (1.0 - params.beta * q)
}

/// The weighted double sum over visit-order comparisons:
/// `S = (1/2) (beta q / (1 - beta q))^2`.
pub fn cap_s_closed(beta: f64, q: f64) -> f64 {
    let t = beta * q / (1.0 - beta * q);
    0.5 * t * t
}

/// The weighted interleaving sum: `(beta q)^2 / (2 (1 - beta q))`.
pub fn triple_sum_closed(beta: f64, q: f64) -> f64 {
    let t = beta * q;
    t * t / (2.0 * (1.0 - t))
}

/// Coalescence probability of the first right arrow from the mutual
/// annihilation probability: `phat = (b/c) P(mutual)`.
pub fn hatp_from_mutual(params: &ReactionParams, p_mutual: f64) -> Result<f64, TheoryError> {
    if params.c <= 0.0 {
        return Err(TheoryError::UnsupportedRatio);
    }
    Ok(params.b / params.c * p_mutual)
}

/// Smallest K with `beta^K (K+1) / (1-beta)^2 < tol`, bounding the dropped
/// tail of the beta-weighted double sums.
pub fn truncation_index(beta: f64, tol: f64) -> usize {
    assert!((0.0..1.0).contains(&beta) && tol > 0.0);
    let scale = (1.0 - beta) * (1.0 - beta);
    let mut k = 1usize;
    while beta.powi(k as i32) * (k as f64 + 1.0) / scale >= tol {
        k += 1;
        if k > 10_000 {
            break;
        }
    }
    k
}

/// Geometric tail bound `beta^K (K+1) / (1-beta)^2` actually dropped at K.
pub fn truncation_tail_bound(beta: f64, k: usize) -> f64 {
    beta.powi(k as i32) * (k as f64 + 1.0) / ((1.0 - beta) * (1.0 - beta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_params;
    use crate::rng::{mix3, u01};

    fn params(a: f64, b: f64, al: f64, be: f64) -> ReactionParams {
        validate_params(a, b, al, be).unwrap()
    }

    fn random_params(seed: u64) -> ReactionParams {
        let r = |k| u01(mix3(seed, k, 0xfeed));
        let a = 0.98 * r(0);
        let b = (1.0 - a) * 0.98 * r(1);
        let al = 0.98 * r(2);
        let be = (1.0 - al) * 0.98 * r(3);
        params(a, b, al, be)
    }

    #[test]
    fn pc_classical_is_quarter_exactly() {
        assert_eq!(pc_closed_form(&params(0.0, 0.0, 0.0, 0.0)).unwrap(), 0.25);
    }

    #[test]
    fn pc_known_points() {
        let third = 1.0 / 3.0;
        assert!((pc_closed_form(&params(third, third, third, third)).unwrap() - 0.125).abs() < 1e-15);
        assert!((pc_closed_form(&params(0.0, 0.0, 0.0, 0.5)).unwrap() - 1.0 / 11.0).abs() < 1e-15);
        assert!(
            (pc_closed_form(&params(0.2, 0.2, 0.2, 0.3)).unwrap() - 33.0 / 233.0).abs() < 1e-15
        );
    }

    #[test]
    fn g_classical_at_v1_is_affine_with_root_quarter() {
        let cl = params(0.0, 0.0, 0.0, 0.0);
        for u in [0.0, 0.1, 0.25, 0.7] {
            let gp = g_eval(&cl, u, 1.0).unwrap();
            assert!((gp.g - (0.5 - 2.0 * u)).abs() < 1e-14, "u={u}: {}", gp.g);
        }
    }

    #[test]
    fn g_vanishes_at_u1_v0() {
        for seed in 0..50 {
            let pr = random_params(seed);
            let gp = g_eval(&pr, 1.0, 0.0).unwrap();
            assert_eq!(gp.f1, 0.0);
            assert!((gp.f2 - 0.0).abs() < 1e-15); // f2(u, 0) = u - 1
            assert!(gp.g.abs() < 1e-15, "{gp:?}");
        }
    }

    #[test]
    fn g_at_pc_is_zero_for_figure_parameters() {
        let pr = params(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0);
        let pc = pc_closed_form(&pr).unwrap();
        let g = g_eval(&pr, pc, 1.0).unwrap().g;
        assert!(g.abs() < 1e-12, "g(pc, 1) = {g}");
    }

    #[test]
    fn g_at_pc_is_zero_over_random_parameters() {
        for seed in 0..2000 {
            let pr = random_params(seed);
            let pc = pc_closed_form(&pr).unwrap();
            let g = g_eval(&pr, pc, 1.0).unwrap().g;
            assert!(g.abs() < 1e-9, "seed {seed}: g(pc,1) = {g:e} at {pr:?}");
        }
    }

    #[test]
    fn g_affine_in_u_at_v1() {
        for seed in 0..200 {
            let pr = random_params(seed);
            let g0 = g_eval(&pr, 0.1, 1.0).unwrap().g;
            let g1 = g_eval(&pr, 0.45, 1.0).unwrap().g;
            let g2 = g_eval(&pr, 0.8, 1.0).unwrap().g;
            assert!((g2 - 2.0 * g1 + g0).abs() < 1e-12, "seed {seed}");
        }
    }

    #[test]
    fn gparts_invariant_holds() {
        for seed in 0..100 {
            let pr = random_params(seed);
            let u = u01(mix3(seed, 10, 1));
            let v = u01(mix3(seed, 11, 1));
            let gp = g_eval(&pr, u, v).unwrap();
            assert!((gp.g - (-v + (gp.f1 + gp.f2) / gp.f3)).abs() < 1e-15);
        }
    }

    #[test]
    fn solve_q_is_one_below_pc() {
        for seed in 0..50 {
            let pr = random_params(seed);
            let pc = pc_closed_form(&pr).unwrap();
            if pc <= 0.0 {
                continue; // jamming corner: no subcritical phase to test
            }
            let sol = solve_q(&pr, 0.5 * pc.min(1.0), 1e-12).unwrap();
            assert_eq!(sol.q, 1.0);
            assert_eq!(sol.branch, QBranch::SubcriticalOne);
        }
    }

    #[test]
    fn solve_q_is_zero_at_full_density() {
        for seed in 0..50 {
            let pr = random_params(seed);
            let sol = solve_q(&pr, 1.0, 1e-12).unwrap();
            assert_eq!(sol.q, 0.0);
            assert_eq!(sol.branch, QBranch::SupercriticalRoot);
            assert!(sol.residual < 1e-12);
        }
    }

    #[test]
    fn solve_q_matches_classical_closed_form() {
        // Classical reduction: g = (1 - u(1+v)^2)/2, so q = 1/sqrt(p) - 1.
        let cl = params(0.0, 0.0, 0.0, 0.0);
        for p in [0.3, 0.35, 0.5, 0.8] {
            let sol = solve_q(&cl, p, 1e-12).unwrap();
            let expect = 1.0 / p.sqrt() - 1.0;
            assert!((sol.q - expect).abs() < 1e-10, "p={p}: {} vs {expect}", sol.q);
            assert!(sol.residual < 1e-12);
        }
    }

    #[test]
    fn solve_q_frozen_reference_points() {
        // Independently computed high-precision roots of g.
        let cases = [
            (params(0.2, 0.2, 0.2, 0.3), 0.3, 0.6887105937293008),
            (params(0.0, 0.0, 0.0, 0.5), 0.15, 0.8194105438351038),
            (params(0.0, 0.0, 0.0, 0.5), 0.25, 0.6191684803531409),
        ];
        for (pr, p, expect) in cases {
            let sol = solve_q(&pr, p, 1e-12).unwrap();
            assert!((sol.q - expect).abs() < 1e-10, "{} vs {expect}", sol.q);
        }
    }

    #[test]
    fn solve_q_monotone_and_continuous() {
        for seed in 0..10 {
            let pr = random_params(seed);
            let pc = pc_closed_form(&pr).unwrap().clamp(0.0, 1.0);
            let mut prev = 1.0 + 1e-12;
            let grid = 200;
            for k in 0..=grid {
                let p = k as f64 / grid as f64;
                let q = solve_q(&pr, p, 1e-12).unwrap().q;
                assert!(q <= prev + 1e-9, "seed {seed}: q not non-increasing at p={p}");
                if p > pc + 1e-3 && p < 1.0 - 1e-3 {
                    // strict decrease beyond pc at grid spacing 5e-3
                    assert!(q < prev - 1e-9, "seed {seed}: q not strictly decreasing at p={p}");
                }
                prev = q;
            }
            // continuity near a few supercritical points
            for k in 1..=20 {
                let p = pc + k as f64 * (1.0 - pc) / 21.0;
                if !(0.0..1.0 - 1e-6).contains(&p) {
                    continue;
                }
                let q1 = solve_q(&pr, p, 1e-12).unwrap().q;
                let q2 = solve_q(&pr, p + 1e-6, 1e-12).unwrap().q;
                assert!((q1 - q2).abs() < 1e-3, "seed {seed}: jump at p={p}");
            }
        }
    }

    #[test]
    fn s_and_r_reference_values() {
        let cl = params(0.0, 0.0, 0.0, 0.0);
        // q = 0 kills both.
        assert_eq!(s_closed(&cl, 0.4, 0.1, 0.0), 0.0);
        assert_eq!(r_closed(&cl, 0.4, 0.1, 0.0), 0.0);
        // Classical with phat = 0 and q = 1: s = p/2 and r = 0.
        assert!((s_closed(&cl, 0.3, 0.0, 1.0) - 0.15).abs() < 1e-15);
        assert_eq!(r_closed(&cl, 0.3, 0.0, 1.0), 0.0);
        // Classical r reduces to p q (1 - q).
        assert!((r_closed(&cl, 0.3, 0.0, 0.8) - 0.3 * 0.8 * 0.2).abs() < 1e-15);
    }

    #[test]
    fn rec2_reference_values() {
        assert_eq!(rec2_closed(&params(0.1, 0.2, 0.3, 0.4), 0.0, 0.7), 0.0);
        // alpha = beta = 0 reduces to p q^2.
        assert!((rec2_closed(&params(0.0, 0.0, 0.0, 0.0), 0.4, 0.5) - 0.4 * 0.25).abs() < 1e-15);
        // Direct arithmetic: (0.3*0.4*0.6 + 0.2*0.4*0.36) / 0.7 = 0.144.
        let pr = params(0.0, 0.0, 0.3, 0.5);
        assert!((rec2_closed(&pr, 0.4, 0.6) - 0.144).abs() < 1e-15);
    }

    #[test]
    fn cap_s_and_triple_sum_reference_values() {
        assert_eq!(cap_s_closed(0.0, 0.9), 0.0);
        assert_eq!(triple_sum_closed(0.0, 0.9), 0.0);
        // beta q = 1/2: S = 1/2, triple = 1/4.
        assert!((cap_s_closed(0.5, 1.0) - 0.5).abs() < 1e-15);
        assert!((triple_sum_closed(0.5, 1.0) - 0.25).abs() < 1e-15);
        // beta = q = 1/2: S = 1/18.
        assert!((cap_s_closed(0.5, 0.5) - 1.0 / 18.0).abs() < 1e-15);
    }

    #[test]
    fn hatp_reference_values() {
        assert_eq!(hatp_from_mutual(&params(0.0, 0.0, 0.0, 0.0), 0.2).unwrap(), 0.0);
        // b = c: ratio 1.
        assert_eq!(hatp_from_mutual(&params(0.0, 0.5, 0.0, 0.0), 0.2).unwrap(), 0.2);
        let pr = params(1.0 / 3.0, 1.0 / 3.0, 0.0, 0.0);
        assert!((hatp_from_mutual(&pr, 0.2).unwrap() - 0.2).abs() < 1e-15);
        // c = 0 is unsupported.
        let pr = params(0.5, 0.5, 0.0, 0.0);
        assert_eq!(hatp_from_mutual(&pr, 0.2).unwrap_err(), TheoryError::UnsupportedRatio);
    }

    #[test]
    fn truncation_rule() {
        // beta = 0.5: K = 27 is the first index with 0.5^K (K+1) / 0.25 < 1e-6.
        let k = truncation_index(0.5, 1e-6);
        assert!(truncation_tail_bound(0.5, k) < 1e-6);
        assert!(truncation_tail_bound(0.5, k - 1) >= 1e-6);
        // K = 40 is comfortably below any Monte Carlo resolution.
        assert!(truncation_tail_bound(0.5, 40) < 2e-10);
        assert_eq!(truncation_index(0.0, 1e-6), 1);
    }
}
