//! Run configuration: JSON file plus command-line overrides (flags win).

use anyhow::{bail, Context, Result};
use fcba::model::{validate_params, ReactionParams, SpacingDist};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Everything a subcommand may need. Serialized into every output file for
/// reproducibility; unknown keys in a config file are rejected.
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub p: Option<f64>,
    pub p_grid: Option<Vec<f64>>,
    pub n: Option<usize>,
    pub n_schedule: Option<Vec<usize>>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub spacing: Option<SpacingDist>,
    /// Root-finder residual tolerance.
    pub tol: Option<f64>,
    /// Truncation index for the beta-weighted sums (defaults to the
    /// geometric-tail rule).
    pub k: Option<usize>,
    pub central_fraction: Option<f64>,
    /// Highest visit power checked by the identity suite.
    pub i_max: Option<usize>,
    /// Worker-pool size. Execution detail: never serialized into outputs,
    /// which must not depend on it.
    #[serde(skip_serializing)]
    pub threads: Option<usize>,
    /// Output destination. Execution detail, like `threads`.
    #[serde(skip_serializing)]
    pub out_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let cfg: RunConfig = serde_json::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        Ok(cfg)
    }

    /// Field-wise override: any value set in `flags` replaces the file's.
    pub fn overridden_by(mut self, flags: RunConfig) -> Self {
        macro_rules! take {
            ($($f:ident),*) => { $( if flags.$f.is_some() { self.$f = flags.$f; } )* };
        }
        take!(a, b, alpha, beta, p, p_grid, n, n_schedule, trials, seed, spacing, tol, k,
              central_fraction, i_max, threads, out_dir);
        self
    }

    pub fn params(&self) -> Result<ReactionParams> {
        let get = |v: Option<f64>, name: &str| {
            v.with_context(|| format!("missing reaction parameter `{name}` (flag --{name} or config key)"))
        };
        let params = validate_params(
            get(self.a, "a")?,
            get(self.b, "b")?,
            get(self.alpha, "alpha")?,
            get(self.beta, "beta")?,
        )?;
        Ok(params)
    }

    pub fn p(&self) -> Result<f64> {
        self.p.context("missing blockade density `p`")
    }

    /// Either the explicit grid or the single density.
    pub fn p_grid(&self) -> Result<Vec<f64>> {
        if let Some(g) = &self.p_grid {
            if g.is_empty() {
                bail!("p_grid must not be empty");
            }
            Ok(g.clone())
        } else if let Some(p) = self.p {
            Ok(vec![p])
        } else {
            bail!("missing `p` or `p_grid`")
        }
    }

    pub fn n_schedule(&self) -> Result<Vec<usize>> {
        if let Some(s) = &self.n_schedule {
            if s.is_empty() {
                bail!("n_schedule must not be empty");
            }
            Ok(s.clone())
        } else {
            Ok(vec![self.n()])
        }
    }

    pub fn n(&self) -> usize {
        self.n.unwrap_or(10_000)
    }
    pub fn trials(&self) -> u64 {
        self.trials.unwrap_or(1_000)
    }
    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }
    pub fn tol(&self) -> f64 {
        self.tol.unwrap_or(1e-12)
    }
    pub fn central_fraction(&self) -> f64 {
        self.central_fraction.unwrap_or(1.0 / 3.0)
    }
    pub fn i_max(&self) -> usize {
        self.i_max.unwrap_or(4)
    }

    /// Output directory: flag/config, then the environment override, then
    /// `./out`.
    pub fn out_dir(&self) -> PathBuf {
        self.out_dir
            .clone()
            .or_else(|| std::env::var_os("FCBA_OUT_DIR").map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("out"))
    }

    /// Provenance block embedded in every output file.
    pub fn provenance(&self) -> String {
        format!(
            "fcba {}\nconfig: {}",
            env!("CARGO_PKG_VERSION"),
            serde_json::to_string(self).expect("config serializes")
        )
    }
}

/// Parses `exponential:MEAN` or `uniform:LO:HI`.
pub fn parse_spacing(text: &str) -> Result<SpacingDist> {
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        ["exponential", mean] => Ok(SpacingDist::Exponential { mean: mean.parse()? }),
        ["uniform", lo, hi] => Ok(SpacingDist::Uniform { lo: lo.parse()?, hi: hi.parse()? }),
        _ => bail!("spacing must be `exponential:MEAN` or `uniform:LO:HI`, got `{text}`"),
    }
}
