//! Acceptance suite: the project's exit criteria, one test per criterion.
//!
//! Each test prints a `[ACCEPTANCE] Cn <name>: PASS` line (visible with
//! `cargo test --test acceptance -- --nocapture`); a failed assertion prints
//! FAIL detail instead. Seeds are fixed, so every run is deterministic.
//!
//! Run with `cargo test -p fcba-cli --test acceptance -- --nocapture`.

use fcba::engine::{origin_outcome, run_config, EventKind, OriginOutcome};
use fcba::estimators::{
    bracket_consistent, empirical_pc, estimate_q, verify_identities, Verdict,
};
use fcba::model::{validate_params, InitialConfig, ReactionParams, Side};
use fcba::rng::{mix, mix3, u01};
use fcba::theory::{g_eval, pc_closed_form, solve_q};
use std::process::Command;

fn params(a: f64, b: f64, al: f64, be: f64) -> ReactionParams {
    validate_params(a, b, al, be).unwrap()
}

fn classical() -> ReactionParams {
    params(0.0, 0.0, 0.0, 0.0)
}

fn third() -> ReactionParams {
    let t = 1.0 / 3.0;
    params(t, t, t, t)
}

struct Criterion {
    label: &'static str,
}

impl Criterion {
    fn new(label: &'static str) -> Self {
        Criterion { label }
    }
    fn pass(&self, detail: String) {
        println!("[ACCEPTANCE] {}: PASS — {detail}", self.label);
    }
    fn check(&self, ok: bool, detail: String) {
        if ok {
            self.pass(detail);
        } else {
            println!("[ACCEPTANCE] {}: FAIL — {detail}", self.label);
            panic!("{} failed: {detail}", self.label);
        }
    }
}

#[test]
fn c1_closed_form_anchor() {
    let c = Criterion::new("C1 closed-form anchor");
    let pc = pc_closed_form(&classical()).unwrap();
    c.check(pc == 0.25, format!("pc(0,0,0,0) = {pc} (want exactly 0.25)"));
}

#[test]
fn c2_theorem_consistency() {
    let c = Criterion::new("C2 theorem consistency");
    let mut worst_root = 0.0f64;
    let mut worst_affine = 0.0f64;
    for seed in 0..10_000u64 {
        let r = |k| u01(mix3(seed, k, 0x2c2));
        let a = 0.98 * r(0);
        let b = (1.0 - a) * 0.98 * r(1);
        let al = 0.98 * r(2);
        let be = (1.0 - al) * 0.98 * r(3);
        let pr = params(a, b, al, be);
        let pc = pc_closed_form(&pr).unwrap();
        let g = g_eval(&pr, pc, 1.0).unwrap().g.abs();
        worst_root = worst_root.max(g);
        // Affinity in u at v = 1: vanishing second difference.
        let g0 = g_eval(&pr, 0.1, 1.0).unwrap().g;
        let g1 = g_eval(&pr, 0.45, 1.0).unwrap().g;
        let g2 = g_eval(&pr, 0.8, 1.0).unwrap().g;
        worst_affine = worst_affine.max((g2 - 2.0 * g1 + g0).abs());
    }
    c.check(
        worst_root < 1e-9 && worst_affine < 1e-12,
        format!("max |g(pc,1)| = {worst_root:.2e} (< 1e-9), max second difference = {worst_affine:.2e} (< 1e-12) over 10^4 tuples"),
    );
}

#[test]
fn c3_solver_simulation_agreement() {
    let c = Criterion::new("C3 solver-simulation agreement");
    let cases = [
        (classical(), 0.30, 0x31u64),
        (classical(), 0.35, 0x32),
        (params(0.0, 0.0, 0.0, 0.5), 0.15, 0x33),
        (params(0.0, 0.0, 0.0, 0.5), 0.25, 0x34),
    ];
    let mut detail = String::new();
    for (pr, p, seed) in cases {
        let sol = solve_q(&pr, p, 1e-12).unwrap();
        let est = estimate_q(&pr, p, 10_000, 10_000, seed).unwrap();
        let in_ci = sol.q >= est.ci_low && sol.q <= est.ci_high;
        let in_band = sol.q >= est.uncertain_low && sol.q <= est.uncertain_high;
        detail.push_str(&format!(
            "p={p}: solver {:.5} vs mc {:.5} CI [{:.5},{:.5}] band [{:.5},{:.5}]; ",
            sol.q, est.point, est.ci_low, est.ci_high, est.uncertain_low, est.uncertain_high
        ));
        c.check(in_ci || in_band, detail.clone());
    }
    c.pass(detail);
}

#[test]
fn c4_subcritical_saturation() {
    let c = Criterion::new("C4 subcritical saturation");
    let est = estimate_q(&classical(), 0.15, 10_000, 2_000, 0x41).unwrap();
    c.check(
        est.uncertain_high >= 0.99 && est.uncertain_low > 0.95,
        format!(
            "uncertain_high = {:.4} (>= 0.99), certified visit fraction = {:.4} (> 0.95)",
            est.uncertain_high, est.uncertain_low
        ),
    );
}

#[test]
fn c5_identity_suite() {
    let c = Criterion::new("C5 identity suite");
    let pr = params(0.2, 0.2, 0.2, 0.3);
    let reports = verify_identities(&pr, 0.3, 10_000, 100_000, None, 0x51, 4).unwrap();
    let mut detail = String::new();
    let mut all_pass = true;
    for r in &reports {
        detail.push_str(&format!("{} z={:+.2} {:?}; ", r.name, r.z_score, r.verdict));
        all_pass &= r.verdict == Verdict::Pass;
    }
    c.check(all_pass, detail);
}

#[test]
fn c6_classical_reduction() {
    let c = Criterion::new("C6 classical reduction");
    // Every event of a thousand classical traces is a mutual annihilation.
    for seed in 0..1_000u64 {
        let cfg = InitialConfig {
            n: 1_000,
            side: Side::RightHalfLine,
            p: 0.25,
            spacing: Default::default(),
            seed: mix(seed),
        };
        let trace = run_config(&cfg, &classical()).unwrap();
        assert!(
            trace.events.iter().all(|e| e.kind == EventKind::Mutual),
            "non-mutual event in classical run (seed {seed})"
        );
    }
    // The empirical bracket pins the critical density to 0.25 +- 0.02.
    let grid = [0.23, 0.27];
    let bracket =
        empirical_pc(&classical(), &grid, &[10_000, 20_000, 40_000], 1_000, 1.0 / 3.0, 0x61)
            .unwrap();
    let ok = bracket.p_lower <= 0.25
        && 0.25 <= bracket.p_upper
        && 0.25 - bracket.p_lower <= 0.02 + 1e-12
        && bracket.p_upper - 0.25 <= 0.02 + 1e-12
        && bracket.warnings.is_empty();
    c.check(
        ok,
        format!(
            "10^3 traces all-mutual; bracket [{:.3}, {:.3}] contains 0.25 within +-0.02 ({:?})",
            bracket.p_lower, bracket.p_upper, bracket.classes
        ),
    );
}

#[test]
fn c7_figure_adjudication() {
    let c = Criterion::new("C7 critical-density adjudication at equal thirds");
    let grid = [0.11, 0.125, 0.14, 0.154, 0.17];
    let bracket =
        empirical_pc(&third(), &grid, &[25_000, 50_000, 100_000], 1_000, 1.0 / 3.0, 0x71).unwrap();
    let candidates = [(0.125f64, "1/8"), (2.0 / 13.0, "2/13")];
    let consistent: Vec<&str> = candidates
        .iter()
        .filter(|(pc, _)| bracket_consistent(&bracket, &grid, *pc))
        .map(|(_, name)| *name)
        .collect();
    c.check(
        consistent.len() == 1,
        format!(
            "bracket [{:.4}, {:.4}], classes {:?} -> consistent candidates: {:?} (dynamics support p_c = {})",
            bracket.p_lower,
            bracket.p_upper,
            bracket.classes,
            consistent,
            consistent.first().unwrap_or(&"none")
        ),
    );
}

#[test]
fn c8_byte_identical_reruns() {
    let c = Criterion::new("C8 determinism");
    let dir = std::env::temp_dir().join(format!("fcba-acceptance-c8-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    let run = |args: &[&str]| {
        let out = Command::new(env!("CARGO_BIN_EXE_fcba"))
            .args(args)
            .current_dir(&dir)
            .output()
            .expect("binary runs");
        assert!(out.status.code() == Some(0), "{:?}: {}", args, String::from_utf8_lossy(&out.stderr));
        out.stdout
    };
    let mut detail = String::new();
    for args in [
        vec!["pc", "--a", "0.2", "--b", "0.2", "--alpha", "0.2", "--beta", "0.3", "--json"],
        vec!["solve-q", "--a", "0.2", "--b", "0.2", "--alpha", "0.2", "--beta", "0.3", "--p-grid", "0.1,0.2,0.3,0.5,1.0"],
        vec!["estimate-q", "--a", "0", "--b", "0", "--alpha", "0", "--beta", "0.5", "--p", "0.2", "--n", "2000", "--trials", "300", "--seed", "5"],
        vec!["verify", "--a", "0", "--b", "0", "--alpha", "0", "--beta", "0", "--p", "0.2", "--n", "1000", "--trials", "500", "--seed", "6"],
        vec!["phase-sweep", "--a", "0", "--b", "0", "--alpha", "0", "--beta", "0", "--p-grid", "0.18,0.32", "--n-schedule", "500,1000", "--trials", "50", "--seed", "7"],
    ] {
        let first = run(&args);
        let second = run(&args);
        assert_eq!(first, second, "stdout differs for {args:?}");
        detail.push_str(args[0]);
        detail.push(' ');
    }
    // simulate writes files; compare bytes on disk.
    let sim = [
        "simulate", "--a", "0.33", "--b", "0.33", "--alpha", "0.33", "--beta", "0.33", "--p",
        "0.15", "--n", "500", "--seed", "9", "--out-dir", ".",
    ];
    run(&sim);
    let csv1 = std::fs::read(dir.join("events.csv")).unwrap();
    let svg1 = std::fs::read(dir.join("diagram.svg")).unwrap();
    run(&sim);
    assert_eq!(csv1, std::fs::read(dir.join("events.csv")).unwrap());
    assert_eq!(svg1, std::fs::read(dir.join("diagram.svg")).unwrap());
    c.pass(format!("byte-identical reruns: {detail}simulate"));
}

#[test]
fn c9_certification_soundness() {
    let c = Criterion::new("C9 certification soundness");
    let cases = [
        (classical(), 0.15),
        (classical(), 0.30),
        (classical(), 0.35),
        (params(0.0, 0.0, 0.0, 0.5), 0.15),
        (params(0.0, 0.0, 0.0, 0.5), 0.25),
        (params(0.2, 0.2, 0.2, 0.3), 0.30),
        (third(), 0.20),
    ];
    let n = 4_000;
    let mut certified = 0u64;
    let mut flips = 0u64;
    let mut trial = 0u64;
    while certified < 10_000 {
        let (pr, p) = cases[(trial % cases.len() as u64) as usize];
        let small = InitialConfig {
            n,
            side: Side::RightHalfLine,
            p,
            spacing: Default::default(),
            seed: mix3(0x91, trial, 1),
        };
        trial += 1;
        let o1 = origin_outcome(&run_config(&small, &pr).unwrap()).unwrap();
        if matches!(o1, OriginOutcome::Uncertain) {
            continue;
        }
        certified += 1;
        let big = InitialConfig { n: 2 * n, ..small };
        let o2 = origin_outcome(&run_config(&big, &pr).unwrap()).unwrap();
        let stable = match (o1, o2) {
            (
                OriginOutcome::VisitedCertified { first_visit_time: t1 },
                OriginOutcome::VisitedCertified { first_visit_time: t2 },
            ) => t1 == t2,
            (OriginOutcome::NotVisitedCertified, OriginOutcome::NotVisitedCertified) => true,
            _ => false,
        };
        if !stable {
            flips += 1;
        }
    }
    c.check(
        flips == 0,
        format!("{certified} certified outcomes re-checked at doubled window ({trial} trials), {flips} flips"),
    );
}
