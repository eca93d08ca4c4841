//! Small statistics toolkit: Wilson intervals, chi-square and KS test
//! statistics, and the three-valued trial bookkeeping shared by the
//! estimators.

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

/// Chi-square 0.999 quantiles (significance 1e-3) by degrees of freedom.
pub const CHI2_CRIT_1E3_DF1: f64 = 10.827_566_170_662_733;
pub const CHI2_CRIT_1E3_DF2: f64 = 13.815_510_557_964_274;
pub const CHI2_CRIT_1E3_DF3: f64 = 16.266_236_196_238_13;

/// Two-sample KS coefficient at significance 1e-3: sqrt(-ln(alpha/2) / 2).
pub const KS_COEFF_1E3: f64 = 1.949_474_749_385_990;

/// Pearson statistic sum((obs - exp)^2 / exp); caller compares against the
/// right quantile for its degrees of freedom.
pub fn chi_square_stat(observed: &[f64], expected: &[f64]) -> f64 {
    assert_eq!(observed.len(), expected.len());
    observed
        .iter()
        .zip(expected)
        .map(|(&o, &e)| {
            debug_assert!(e > 0.0);
            (o - e) * (o - e) / e
        })
        .sum()
}

/// Wilson score interval for a binomial proportion at confidence given by
/// `z` (use [`Z_95`]).
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let phat = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = phat + z2 / (2.0 * n);
    let half = z * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt();
    (((center - half) / denom).max(0.0), ((center + half) / denom).min(1.0))
}

/// Two-sample Kolmogorov-Smirnov statistic D. Inputs need not be sorted.
pub fn ks_two_sample(xs: &[f64], ys: &[f64]) -> f64 {
    let mut xs = xs.to_vec();
    let mut ys = ys.to_vec();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    let (n, m) = (xs.len(), ys.len());
    assert!(n > 0 && m > 0);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0f64);
    while i < n && j < m {
        // Advance through ties on both sides together.
        let v = xs[i].min(ys[j]);
        while i < n && xs[i] == v {
            i += 1;
        }
        while j < m && ys[j] == v {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    d
}

/// KS rejection threshold at significance 1e-3 for samples of size n and m.
pub fn ks_critical_1e3(n: usize, m: usize) -> f64 {
    KS_COEFF_1E3 * ((n + m) as f64 / (n as f64 * m as f64)).sqrt()
}

/// Counts of a trial-level event that may be undetermined (the window was
/// too small to certify it either way).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize)]
pub struct TriCount {
    pub yes: u64,
    pub no: u64,
    pub unknown: u64,
}

impl TriCount {
    pub fn total(&self) -> u64 {
        self.yes + self.no + self.unknown
    }

    pub fn add(&mut self, value: Option<bool>) {
        match value {
            Some(true) => self.yes += 1,
            Some(false) => self.no += 1,
            None => self.unknown += 1,
        }
    }

    pub fn merge(&mut self, other: &TriCount) {
        self.yes += other.yes;
        self.no += other.no;
        self.unknown += other.unknown;
    }

    /// Point estimate among determined trials.
    pub fn point(&self) -> f64 {
        let det = self.yes + self.no;
        if det == 0 {
            f64::NAN
        } else {
            self.yes as f64 / det as f64
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_matches_reference_values() {
        // Reference: scipy.stats binomtest(5, 10).proportion_ci(0.95, 'wilson')
        let (lo, hi) = wilson_interval(5, 10, Z_95);
        assert!((lo - 0.2365930905125640).abs() < 1e-12, "{lo}");
        assert!((hi - 0.7634069094874361).abs() < 1e-12, "{hi}");
        // Zero and full successes stay inside [0, 1].
        let (lo, hi) = wilson_interval(0, 20, Z_95);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.3);
        let (lo, hi) = wilson_interval(20, 20, Z_95);
        assert!(lo > 0.7 && lo < 1.0);
        assert_eq!(hi, 1.0);
    }

    #[test]
    fn ks_identical_samples_have_zero_distance() {
        let xs: Vec<f64> = (0..100).map(|i| i as f64).collect();
        assert_eq!(ks_two_sample(&xs, &xs), 0.0);
    }

    #[test]
    fn ks_detects_shift() {
        let xs: Vec<f64> = (0..1000).map(|i| i as f64 / 1000.0).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x + 0.5).collect();
        let d = ks_two_sample(&xs, &ys);
        assert!(d > 0.45);
        assert!(d > ks_critical_1e3(xs.len(), ys.len()));
    }

    #[test]
    fn tri_count_point() {
        let mut t = TriCount::default();
        t.add(Some(true));
        t.add(Some(true));
        t.add(Some(false));
        t.add(None);
        assert_eq!(t.point(), 2.0 / 3.0);
        assert_eq!(t.total(), 4);
    }
}
