//! Cross-checks between the Monte Carlo estimators and the closed forms at
//! development scale. The acceptance suite repeats the heavy versions at the
//! full sizes.

use fcba::estimators::{
    empirical_pc, estimate_cap_s, estimate_q, estimate_triple_sum, estimate_visit_powers,
    verify_identities, Verdict,
};
use fcba::model::validate_params;
use fcba::theory::solve_q;

#[test]
fn solver_and_simulation_agree_classically() {
    // Classical parameters at p = 0.3: q = 1/sqrt(0.3) - 1.
    let params = validate_params(0.0, 0.0, 0.0, 0.0).unwrap();
    let sol = solve_q(&params, 0.3, 1e-12).unwrap();
    let est = estimate_q(&params, 0.3, 4_000, 8_000, 101).unwrap();
    assert!(
        sol.q >= est.ci_low && sol.q <= est.ci_high
            || (sol.q >= est.uncertain_low && sol.q <= est.uncertain_high),
        "solver {} outside CI [{}, {}] and band [{}, {}]",
        sol.q,
        est.ci_low,
        est.ci_high,
        est.uncertain_low,
        est.uncertain_high
    );
}

#[test]
fn solver_and_simulation_agree_with_coalescence() {
    // b > 0 exercises the generated-blockade terms of the recursion.
    let params = validate_params(0.2, 0.2, 0.2, 0.3).unwrap();
    let sol = solve_q(&params, 0.3, 1e-12).unwrap();
    let est = estimate_q(&params, 0.3, 4_000, 12_000, 55).unwrap();
    let dev = (est.point - sol.q).abs();
    assert!(dev < 4.0 * est.se() + 1e-3, "q_mc {} vs solver {}", est.point, sol.q);
}

#[test]
fn identity_suite_passes_at_coalescing_parameters() {
    let params = validate_params(0.2, 0.2, 0.2, 0.3).unwrap();
    let reports = verify_identities(&params, 0.3, 2_000, 6_000, None, 31, 4).unwrap();
    assert_eq!(reports.len(), 11); // rec-2, s, r, phat, com, cap-s, triple, 4 powers
    for r in &reports {
        assert_eq!(r.verdict, Verdict::Pass, "{}: z = {:.2}, {:?}", r.name, r.z_score, r);
    }
}

#[test]
fn identity_suite_passes_classically() {
    // beta = 0 collapses the weighted sums to zero and phat to zero.
    let params = validate_params(0.0, 0.0, 0.0, 0.0).unwrap();
    let reports = verify_identities(&params, 0.2, 2_000, 6_000, None, 32, 4).unwrap();
    for r in &reports {
        assert_eq!(r.verdict, Verdict::Pass, "{}: z = {:.2}", r.name, r.z_score);
        if r.name == "cap-s" || r.name == "triple-sum" {
            assert_eq!(r.mc_value.point, 0.0);
            assert_eq!(r.closed_value, 0.0);
        }
    }
}

#[test]
fn visit_powers_follow_geometric_law() {
    let params = validate_params(0.0, 0.0, 0.0, 0.5).unwrap();
    let reports = estimate_visit_powers(&params, 0.25, 2_000, 10_000, 7, 4).unwrap();
    for r in &reports {
        assert_eq!(r.verdict, Verdict::Pass, "{}: z = {:.2}", r.name, r.z_score);
    }
    // Frequencies must decay roughly geometrically.
    assert!(reports[3].mc_value.point < reports[0].mc_value.point);
}

#[test]
fn weighted_sums_match_closed_forms_with_weak_blockades() {
    let params = validate_params(0.0, 0.0, 0.0, 0.5).unwrap();
    let s = estimate_cap_s(&params, 0.15, 2_000, 4_000, None, 3).unwrap();
    assert_eq!(s.verdict, Verdict::Pass, "cap-s z = {}: {s:?}", s.z_score);
    let t = estimate_triple_sum(&params, 0.15, 2_000, 4_000, None, 3).unwrap();
    assert_eq!(t.verdict, Verdict::Pass, "triple z = {}: {t:?}", t.z_score);
    assert!(s.closed_value > 0.0 && t.closed_value > 0.0);
}

#[test]
fn uncertain_band_shrinks_with_window_size() {
    let params = validate_params(0.0, 0.0, 0.0, 0.0).unwrap();
    let widths: Vec<f64> = [1_000usize, 10_000, 100_000]
        .iter()
        .map(|&n| {
            let e = estimate_q(&params, 0.3, n, 400, 2024).unwrap();
            e.uncertain_high - e.uncertain_low
        })
        .collect();
    assert!(
        widths[0] >= widths[1] && widths[1] >= widths[2],
        "uncertain band widths not monotone: {widths:?}"
    );
}

#[test]
fn empirical_pc_is_reproducible() {
    let params = validate_params(0.0, 0.0, 0.0, 0.0).unwrap();
    let grid = [0.18, 0.32];
    let b1 = empirical_pc(&params, &grid, &[1_000, 2_000], 40, 1.0 / 3.0, 5).unwrap();
    let b2 = empirical_pc(&params, &grid, &[1_000, 2_000], 40, 1.0 / 3.0, 5).unwrap();
    assert_eq!(serde_json::to_string(&b1).unwrap(), serde_json::to_string(&b2).unwrap());
}
