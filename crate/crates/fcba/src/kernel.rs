//! Reaction kernel: samples collision outcomes from the three reaction
//! tables.
//!
//! Every sampler partitions a single uniform draw by cumulative
//! probabilities in a fixed order, so a replayed stream reproduces the exact
//! outcome sequence and cross-language ports agree bit for bit.

use crate::model::ReactionParams;
use crate::rng::DrawStream;

/// Outcome of a right-arrow / left-arrow collision.
///
/// Probabilities: `a/2`, `a/2`, `b`, `c = 1 - (a + b)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArrowArrowOutcome {
    /// The left-moving arrow survives and continues.
    LeftSurvives,
    /// The right-moving arrow survives and continues.
    RightSurvives,
    /// Both die; a new blockade appears at the collision point.
    Coalesce,
    MutualAnnihilate,
}

/// Outcome of a blockade / arrow collision (same table regardless of the
/// arrow's side and of the blockade's origin).
///
/// Probabilities: `alpha`, `beta`, `xi = 1 - (alpha + beta)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockadeArrowOutcome {
    /// Strong collision: the arrow destroys the blockade and continues.
    ArrowSurvives,
    /// Weak collision: the blockade absorbs the arrow and survives.
    BlockadeSurvives,
    MutualAnnihilate,
}

/// Pure form: maps one uniform draw in (0, 1) to an outcome.
///
/// Cut order is fixed: left-survivor, right-survivor, coalesce, mutual.
#[inline]
pub fn arrow_arrow_from_u01(params: &ReactionParams, u: f64) -> ArrowArrowOutcome {
    let half_a = params.a / 2.0;
    if u < half_a {
        ArrowArrowOutcome::LeftSurvives
    } else if u < params.a {
        ArrowArrowOutcome::RightSurvives
    } else if u < params.a + params.b {
        ArrowArrowOutcome::Coalesce
    } else {
        ArrowArrowOutcome::MutualAnnihilate
    }
}

/// Pure form: cut order strong, weak, mutual.
#[inline]
pub fn blockade_arrow_from_u01(params: &ReactionParams, u: f64) -> BlockadeArrowOutcome {
    if u < params.alpha {
        BlockadeArrowOutcome::ArrowSurvives
    } else if u < params.alpha + params.beta {
        BlockadeArrowOutcome::BlockadeSurvives
    } else {
        BlockadeArrowOutcome::MutualAnnihilate
    }
}

/// Samples an arrow–arrow outcome, consuming exactly one draw.
#[inline]
pub fn resolve_arrow_arrow(params: &ReactionParams, stream: &mut DrawStream) -> ArrowArrowOutcome {
    arrow_arrow_from_u01(params, stream.next_u01())
}

/// Samples a blockade–arrow outcome, consuming exactly one draw.
#[inline]
pub fn resolve_blockade_arrow(params: &ReactionParams, stream: &mut DrawStream) -> BlockadeArrowOutcome {
    blockade_arrow_from_u01(params, stream.next_u01())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_params;
    use crate::stats::{chi_square_stat, CHI2_CRIT_1E3_DF2, CHI2_CRIT_1E3_DF3};

    const DRAWS: usize = 1_000_000;

    fn aa_counts(params: &ReactionParams, seed: u64) -> [f64; 4] {
        let mut s = DrawStream::new(seed);
        let mut counts = [0f64; 4];
        for _ in 0..DRAWS {
            match resolve_arrow_arrow(params, &mut s) {
                ArrowArrowOutcome::LeftSurvives => counts[0] += 1.0,
                ArrowArrowOutcome::RightSurvives => counts[1] += 1.0,
                ArrowArrowOutcome::Coalesce => counts[2] += 1.0,
                ArrowArrowOutcome::MutualAnnihilate => counts[3] += 1.0,
            }
        }
        counts
    }

    #[test]
    fn all_mass_on_mutual() {
        let params = validate_params(0.0, 0.0, 0.0, 0.0).unwrap();
        let mut s = DrawStream::new(3);
        for _ in 0..1000 {
            assert_eq!(resolve_arrow_arrow(&params, &mut s), ArrowArrowOutcome::MutualAnnihilate);
            assert_eq!(resolve_blockade_arrow(&params, &mut s), BlockadeArrowOutcome::MutualAnnihilate);
        }
    }

    #[test]
    fn one_survivor_split_evenly_at_a_near_one() {
        // a = 1 itself is outside the valid range; probe the limit.
        let params = validate_params(1.0 - 1e-9, 0.0, 0.0, 0.0).unwrap();
        let counts = aa_counts(&params, 17);
        assert_eq!(counts[2] + counts[3], 0.0);
        let sigma = (0.25 * DRAWS as f64).sqrt();
        assert!((counts[0] - DRAWS as f64 / 2.0).abs() < 4.0 * sigma);
    }

    #[test]
    fn arrow_survives_at_alpha_near_one() {
        let params = validate_params(0.0, 0.0, 1.0 - 1e-9, 0.0).unwrap();
        let mut s = DrawStream::new(23);
        for _ in 0..10_000 {
            assert_eq!(resolve_blockade_arrow(&params, &mut s), BlockadeArrowOutcome::ArrowSurvives);
        }
    }

    #[test]
    fn figure_parameters_match_table_frequencies() {
        let params = validate_params(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0).unwrap();
        let counts = aa_counts(&params, 29);
        let expected = [1.0 / 6.0, 1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0].map(|p| p * DRAWS as f64);
        let stat = chi_square_stat(&counts, &expected);
        assert!(stat < CHI2_CRIT_1E3_DF3, "chi2 = {stat}");
    }

    #[test]
    fn blockade_table_frequencies() {
        let params = validate_params(0.0, 0.0, 0.3, 0.5).unwrap();
        let mut s = DrawStream::new(31);
        let mut counts = [0f64; 3];
        for _ in 0..DRAWS {
            match resolve_blockade_arrow(&params, &mut s) {
                BlockadeArrowOutcome::ArrowSurvives => counts[0] += 1.0,
                BlockadeArrowOutcome::BlockadeSurvives => counts[1] += 1.0,
                BlockadeArrowOutcome::MutualAnnihilate => counts[2] += 1.0,
            }
        }
        for (i, p) in [0.3, 0.5, 0.2].iter().enumerate() {
            let sigma = (p * (1.0 - p) * DRAWS as f64).sqrt();
            assert!((counts[i] - p * DRAWS as f64).abs() < 4.0 * sigma, "outcome {i}");
        }
        let expected = [0.3, 0.5, 0.2].map(|p| p * DRAWS as f64);
        assert!(chi_square_stat(&counts, &expected) < CHI2_CRIT_1E3_DF2);
    }

    #[test]
    fn random_tables_pass_chi_square() {
        // A handful of arbitrary valid parameter points, each against its table.
        for seed in 0..5u64 {
            let r = |k| crate::rng::u01(crate::rng::mix3(seed, k, 99));
            let (a, b) = (0.9 * r(0), 0.0f64.max(0.9 * r(1) * (1.0 - 0.9 * r(0))));
            let (alpha, beta) = (0.9 * r(2), 0.0f64.max(0.9 * r(3) * (1.0 - 0.9 * r(2))));
            let params = validate_params(a, b, alpha, beta).unwrap();
            let counts = aa_counts(&params, seed + 100);
            let expected =
                [params.a / 2.0, params.a / 2.0, params.b, params.c].map(|p| p * DRAWS as f64);
            // Drop empty cells (zero-probability outcomes) before the test.
            let (mut obs, mut exp) = (vec![], vec![]);
            for i in 0..4 {
                if expected[i] > 0.0 {
                    obs.push(counts[i]);
                    exp.push(expected[i]);
                }
            }
            let stat = chi_square_stat(&obs, &exp);
            let crit = match obs.len() {
                4 => CHI2_CRIT_1E3_DF3,
                3 => CHI2_CRIT_1E3_DF2,
                _ => crate::stats::CHI2_CRIT_1E3_DF1,
            };
            assert!(stat < crit, "seed {seed}: chi2 = {stat}");
        }
    }

    #[test]
    fn replay_reproduces_outcome_sequence() {
        let params = validate_params(0.2, 0.3, 0.1, 0.4).unwrap();
        let mut s1 = DrawStream::new(5);
        let mut s2 = DrawStream::new(5);
        for _ in 0..1000 {
            assert_eq!(resolve_arrow_arrow(&params, &mut s1), resolve_arrow_arrow(&params, &mut s2));
        }
        assert_eq!(s1.position(), 1000);
    }
}
