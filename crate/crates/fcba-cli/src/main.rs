//! Command-line laboratory for four-parameter coalescing ballistic
//! annihilation.
//!
//! Exit codes: 0 success (all checks pass), 1 usage or runtime error,
//! 2 identity failure, 3 inconclusive checks only.

mod config;

use anyhow::{Context, Result};
use clap::{ArgAction, Args, Parser, Subcommand};
use config::{parse_spacing, RunConfig};
use fcba::engine::run_config;
use fcba::estimators::{
    bracket_consistent, empirical_pc, estimate_q, verify_identities, IdentityReport, Verdict,
};
use fcba::export::{events_csv, space_time_svg};
use fcba::model::{InitialConfig, Side};
use fcba::theory::{g_eval, pc_closed_form, solve_q, QBranch};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "fcba", version, about = "Coalescing ballistic annihilation: closed forms, exact simulation, Monte Carlo verification", disable_help_subcommand = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct CommonFlags {
    /// JSON config file; explicit flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    a: Option<f64>,
    #[arg(long, global = true)]
    b: Option<f64>,
    #[arg(long, global = true)]
    alpha: Option<f64>,
    #[arg(long, global = true)]
    beta: Option<f64>,
    /// Blockade density.
    #[arg(long, global = true)]
    p: Option<f64>,
    /// Comma-separated density grid.
    #[arg(long, global = true, value_delimiter = ',')]
    p_grid: Option<Vec<f64>>,
    /// Particles per trial.
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Comma-separated window sizes for phase sweeps.
    #[arg(long, global = true, value_delimiter = ',')]
    n_schedule: Option<Vec<usize>>,
    #[arg(long, global = true)]
    trials: Option<u64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Spacing distribution: exponential:MEAN or uniform:LO:HI.
    #[arg(long, global = true, value_parser = parse_spacing)]
    spacing: Option<fcba::model::SpacingDist>,
    /// Root-finder residual tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Truncation index for the weighted visit sums.
    #[arg(long, global = true)]
    k: Option<usize>,
    #[arg(long, global = true)]
    central_fraction: Option<f64>,
    /// Highest visit power in the identity suite.
    #[arg(long, global = true)]
    i_max: Option<usize>,
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory (default: $FCBA_OUT_DIR or ./out).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
}

impl CommonFlags {
    fn resolve(&self) -> Result<RunConfig> {
        let flags = RunConfig {
            a: self.a,
            b: self.b,
            alpha: self.alpha,
            beta: self.beta,
            p: self.p,
            p_grid: self.p_grid.clone(),
            n: self.n,
            n_schedule: self.n_schedule.clone(),
            trials: self.trials,
            seed: self.seed,
            spacing: self.spacing,
            tol: self.tol,
            k: self.k,
            central_fraction: self.central_fraction,
            i_max: self.i_max,
            threads: self.threads,
            out_dir: self.out_dir.clone(),
        };
        let base = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        let cfg = base.overridden_by(flags);
        if let Some(t) = cfg.threads {
            // Ignore the error if a pool already exists (e.g. repeated calls
            // in tests); the first configuration wins.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
        }
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Print the closed-form critical blockade density.
    Pc {
        #[command(flatten)]
        common: CommonFlags,
        /// Emit JSON instead of a bare number.
        #[arg(long, action = ArgAction::SetTrue)]
        json: bool,
    },
    /// Tabulate q(p) over a density grid as CSV.
    SolveQ {
        #[command(flatten)]
        common: CommonFlags,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate one configuration; write an event CSV and an SVG space-time
    /// diagram.
    Simulate {
        #[command(flatten)]
        common: CommonFlags,
        /// Two-sided window instead of the right half-line.
        #[arg(long, action = ArgAction::SetTrue)]
        two_sided: bool,
        #[arg(long)]
        out_csv: Option<PathBuf>,
        #[arg(long)]
        out_svg: Option<PathBuf>,
    },
    /// Monte Carlo estimate of the origin-visit probability q.
    EstimateQ {
        #[command(flatten)]
        common: CommonFlags,
        /// Write the JSON report here as well as stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the full identity suite and compare against every closed form.
    Verify {
        #[command(flatten)]
        common: CommonFlags,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Bracket the critical density empirically over a density grid.
    PhaseSweep {
        #[command(flatten)]
        common: CommonFlags,
        /// Candidate critical densities to adjudicate against the bracket.
        #[arg(long, value_delimiter = ',')]
        candidates: Option<Vec<f64>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn write_output(path: &Path, content: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    std::fs::write(path, content).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Formats with a fixed count of significant digits in plain notation.
fn significant(x: f64, digits: i32) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (digits - 1 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

fn cmd_pc(cfg: &RunConfig, json: bool) -> Result<ExitCode> {
    let params = cfg.params()?;
    let pc = pc_closed_form(&params)?;
    if json {
        println!(
            "{}",
            serde_json::json!({
                "pc": pc,
                "params": params,
                "in_unit_interval": (0.0..1.0).contains(&pc),
                "version": env!("CARGO_PKG_VERSION"),
            })
        );
    } else {
        println!("{}", significant(pc, 12));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_solve_q(cfg: &RunConfig, out: Option<&Path>) -> Result<ExitCode> {
    let params = cfg.params()?;
    let grid = cfg.p_grid()?;
    let mut csv = String::new();
    for line in cfg.provenance().lines() {
        let _ = writeln!(csv, "# {line}");
    }
    csv.push_str("p,q,branch,residual\n");
    for &p in &grid {
        let sol = solve_q(&params, p, cfg.tol())?;
        let branch = match sol.branch {
            QBranch::SubcriticalOne => "subcritical_one",
            QBranch::SupercriticalRoot => "supercritical_root",
        };
        let _ = writeln!(csv, "{p:.17e},{:.17e},{branch},{:.3e}", sol.q, sol.residual);
    }
    match out {
        Some(path) => write_output(path, &csv)?,
        None => print!("{csv}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_simulate(
    cfg: &RunConfig,
    two_sided: bool,
    out_csv: Option<&Path>,
    out_svg: Option<&Path>,
) -> Result<ExitCode> {
    let params = cfg.params()?;
    let init = InitialConfig {
        n: cfg.n(),
        side: if two_sided { Side::TwoSided } else { Side::RightHalfLine },
        p: cfg.p()?,
        spacing: cfg.spacing.unwrap_or_default(),
        seed: cfg.seed(),
    };
    let trace = run_config(&init, &params)?;
    let prov = cfg.provenance();
    let dir = cfg.out_dir();
    let csv_path = out_csv.map(Path::to_path_buf).unwrap_or_else(|| dir.join("events.csv"));
    let svg_path = out_svg.map(Path::to_path_buf).unwrap_or_else(|| dir.join("diagram.svg"));
    write_output(&csv_path, &events_csv(&trace, &prov))?;
    write_output(&svg_path, &space_time_svg(&trace, &prov))?;
    eprintln!(
        "simulated {} particles: {} events, {} survivors -> {}, {}",
        trace.n_initial,
        trace.events.len(),
        trace.survivors.len(),
        csv_path.display(),
        svg_path.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_estimate_q(cfg: &RunConfig, out: Option<&Path>) -> Result<ExitCode> {
    let params = cfg.params()?;
    let est = estimate_q(&params, cfg.p()?, cfg.n(), cfg.trials(), cfg.seed())?;
    let solver = solve_q(&params, cfg.p()?, cfg.tol()).ok();
    let report = serde_json::json!({
        "estimate": est,
        "solver_q": solver.map(|s| s.q),
        "config": cfg,
        "version": env!("CARGO_PKG_VERSION"),
    });
    let text = serde_json::to_string_pretty(&report)?;
    println!("{text}");
    if let Some(path) = out {
        write_output(path, &text)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn exit_for(reports: &[IdentityReport]) -> ExitCode {
    if reports.iter().any(|r| r.verdict == Verdict::Fail) {
        ExitCode::from(2)
    } else if reports.iter().any(|r| r.verdict == Verdict::Inconclusive) {
        ExitCode::from(3)
    } else {
        ExitCode::SUCCESS
    }
}

fn cmd_verify(cfg: &RunConfig, out: Option<&Path>) -> Result<ExitCode> {
    let params = cfg.params()?;
    let p = cfg.p()?;
    let mut reports =
        verify_identities(&params, p, cfg.n(), cfg.trials(), cfg.k, cfg.seed(), cfg.i_max())?;

    // Closed-form consistency: the critical density must be the root of the
    // affine map u -> g(u, 1).
    let pc = pc_closed_form(&params)?;
    let g_at_pc = g_eval(&params, pc, 1.0)?.g;
    reports.push(IdentityReport {
        name: "g-at-pc".into(),
        mc_value: fcba::estimators::EstimateResult {
            point: g_at_pc,
            ci_low: g_at_pc,
            ci_high: g_at_pc,
            trials: 0,
            certified_fraction: 1.0,
            uncertain_low: g_at_pc,
            uncertain_high: g_at_pc,
        },
        closed_value: 0.0,
        z_score: 0.0,
        extra_tolerance: 1e-9,
        verdict: if g_at_pc.abs() < 1e-9 { Verdict::Pass } else { Verdict::Fail },
        details: format!("pc = {pc:.12}, |g(pc, 1)| = {:.3e}", g_at_pc.abs()),
    });

    let mut lines = Vec::new();
    for r in &reports {
        let verdict = match r.verdict {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Inconclusive => "INCONCLUSIVE",
        };
        eprintln!(
            "{verdict:12} {:<14} mc = {:.6}  closed = {:.6}  z = {:+.2}",
            r.name, r.mc_value.point, r.closed_value, r.z_score
        );
        lines.push(serde_json::to_string(r)?);
    }
    let payload = format!(
        "{{\"version\":\"{}\",\"config\":{},\"reports\":[{}]}}",
        env!("CARGO_PKG_VERSION"),
        serde_json::to_string(cfg)?,
        lines.join(",")
    );
    match out {
        Some(path) => write_output(path, &payload)?,
        None => println!("{payload}"),
    }
    Ok(exit_for(&reports))
}

fn cmd_phase_sweep(cfg: &RunConfig, candidates: &[f64], out: Option<&Path>) -> Result<ExitCode> {
    let params = cfg.params()?;
    let grid = cfg.p_grid()?;
    if grid.len() < 2 {
        anyhow::bail!("phase sweep needs a p_grid with at least two points");
    }
    let bracket = empirical_pc(
        &params,
        &grid,
        &cfg.n_schedule()?,
        cfg.trials(),
        cfg.central_fraction(),
        cfg.seed(),
    )?;
    let verdicts: Vec<(f64, bool)> =
        candidates.iter().map(|&c| (c, bracket_consistent(&bracket, &grid, c))).collect();
    for w in &bracket.warnings {
        eprintln!("warning: {w}");
    }
    eprintln!("bracket: [{:.6}, {:.6}]", bracket.p_lower, bracket.p_upper);
    for (c, ok) in &verdicts {
        eprintln!("candidate {c:.6}: {}", if *ok { "consistent" } else { "excluded" });
    }
    let payload = serde_json::to_string_pretty(&serde_json::json!({
        "bracket": bracket,
        "candidates": verdicts.iter().map(|(c, ok)| serde_json::json!({"pc": c, "consistent": ok})).collect::<Vec<_>>(),
        "config": cfg,
        "version": env!("CARGO_PKG_VERSION"),
    }))?;
    match out {
        Some(path) => write_output(path, &payload)?,
        None => println!("{payload}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match &cli.command {
        Command::Pc { common, json } => cmd_pc(&common.resolve()?, *json),
        Command::SolveQ { common, out } => cmd_solve_q(&common.resolve()?, out.as_deref()),
        Command::Simulate { common, two_sided, out_csv, out_svg } => {
            cmd_simulate(&common.resolve()?, *two_sided, out_csv.as_deref(), out_svg.as_deref())
        }
        Command::EstimateQ { common, out } => cmd_estimate_q(&common.resolve()?, out.as_deref()),
        Command::Verify { common, out } => cmd_verify(&common.resolve()?, out.as_deref()),
        Command::PhaseSweep { common, candidates, out } => cmd_phase_sweep(
            &common.resolve()?,
            candidates.as_deref().unwrap_or(&[]),
            out.as_deref(),
        ),
    }
}

fn main() -> ExitCode {
    // Clap's default usage-error code is 2; the contract reserves 2 for
    // identity failures, so map usage problems to 1 explicitly.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = e.print();
            return if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
