//! Monte Carlo outcome sampling from trace-rule probabilities.
//!
//! Draws use inverse-CDF lookup on a ChaCha20 uniform stream (see
//! [`crate::random`]). Sharded runs give shard `s` the stream `s` of the same
//! seed; merging shard reports is associative, so a sharded run is
//! deterministic given `(seed, shards)`.

use rand::Rng;
use rayon::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::measurement::{conditional_state, outcome_probabilities, P_FLOOR};
use crate::quantum::{DensityOperator, Observable};
use crate::random::{lane_rng, seeded};

#[derive(Debug, Clone, PartialEq)]
pub struct SampleReport {
    pub counts: Vec<u64>,
    /// `counts[n] / n_trials`.
    pub frequencies: Vec<f64>,
    /// Trace-rule probabilities the draws were taken from.
    pub probabilities: Vec<f64>,
    /// `max_n |frequencies[n] - probabilities[n]|`.
    pub max_abs_deviation: f64,
    pub n_trials: u64,
    pub seed: u64,
}

impl SampleReport {
    fn from_counts(counts: Vec<u64>, probabilities: Vec<f64>, seed: u64) -> Self {
        let n_trials: u64 = counts.iter().sum();
        let frequencies: Vec<f64> = counts.iter().map(|&k| k as f64 / n_trials as f64).collect();
        let max_abs_deviation = frequencies
            .iter()
            .zip(&probabilities)
            .map(|(f, p)| (f - p).abs())
            .fold(0.0, f64::max);
        Self {
            counts,
            frequencies,
            probabilities,
            max_abs_deviation,
            n_trials,
            seed,
        }
    }

    /// Combines shard reports drawn from the same distribution.
    pub fn merge(&self, other: &Self) -> Result<Self> {
        if self.counts.len() != other.counts.len() {
            return Err(Error::LengthMismatch {
                expected: self.counts.len(),
                got: other.counts.len(),
            });
        }
        let counts = self.counts.iter().zip(&other.counts).map(|(a, b)| a + b).collect();
        Ok(Self::from_counts(counts, self.probabilities.clone(), self.seed))
    }

    /// Binomial standard error of outcome `n`'s frequency.
    pub fn standard_error(&self, n: usize) -> f64 {
        let p = self.probabilities[n];
        (p * (1.0 - p) / self.n_trials as f64).sqrt()
    }

    /// Pearson statistic against the trace-rule probabilities. Outcomes below
    /// [`P_FLOOR`] contribute nothing unless they were observed, in which case
    /// the statistic is infinite.
    pub fn pearson_chi_square(&self) -> f64 {
        let n = self.n_trials as f64;
        self.counts
            .iter()
            .zip(&self.probabilities)
            .map(|(&k, &p)| {
                let expected = n * p;
                if p >= P_FLOOR {
                    (k as f64 - expected).powi(2) / expected
                } else if k > 0 {
                    f64::INFINITY
                } else {
                    0.0
                }
            })
            .sum()
    }

    /// Outcomes with probability at least [`P_FLOOR`].
    pub fn support(&self) -> usize {
        self.probabilities.iter().filter(|&&p| p >= P_FLOOR).count()
    }

    /// Pearson test at `level` (e.g. 0.999) with `support - 1` degrees of freedom.
    pub fn chi_square_passes(&self, level: f64) -> bool {
        let df = self.support().saturating_sub(1);
        if df == 0 {
            // A single outcome carries all the mass; only a draw outside it fails.
            return self.pearson_chi_square().is_finite();
        }
        self.pearson_chi_square() < chi_square_quantile(df, level)
    }
}

/// Quantile of the chi-square distribution with `df` degrees of freedom.
pub fn chi_square_quantile(df: usize, level: f64) -> f64 {
    ChiSquared::new(df as f64)
        .expect("positive degrees of freedom")
        .inverse_cdf(level)
}

/// Inverse-CDF lookup. `u` is uniform in `[0, 1)`.
fn draw(cdf: &[f64], u: f64) -> usize {
    // Round-off can leave the last cumulative value just below 1; such draws
    // fall to the last outcome with positive mass.
    cdf.iter()
        .position(|&c| u < c)
        .unwrap_or_else(|| cdf.windows(2).rposition(|w| w[1] > w[0]).map(|i| i + 1).unwrap_or(0))
}

fn cumulative(probabilities: &[f64]) -> Vec<f64> {
    probabilities
        .iter()
        .scan(0.0, |acc, p| {
            *acc += p;
            Some(*acc)
        })
        .collect()
}

fn check_trials(n_trials: u64) -> Result<()> {
    if n_trials == 0 {
        return Err(Error::InvalidArgument("n_trials must be at least 1".into()));
    }
    Ok(())
}

fn count_draws<R: Rng + ?Sized>(rng: &mut R, cdf: &[f64], n_trials: u64) -> Vec<u64> {
    let mut counts = vec![0u64; cdf.len()];
    for _ in 0..n_trials {
        counts[draw(cdf, rng.random::<f64>())] += 1;
    }
    counts
}

/// `n_trials` i.i.d. outcomes from `tr(P_n rho)`.
pub fn sample_outcomes(obs: &Observable, rho: &DensityOperator, n_trials: u64, seed: u64) -> Result<SampleReport> {
    check_trials(n_trials)?;
    let probabilities = outcome_probabilities(obs, rho)?;
    let cdf = cumulative(&probabilities);
    let counts = count_draws(&mut seeded(seed), &cdf, n_trials);
    Ok(SampleReport::from_counts(counts, probabilities, seed))
}

/// Same distribution as [`sample_outcomes`], split over `shards` parallel
/// streams. Shard `s` draws `n_trials / shards` trials (the first
/// `n_trials % shards` shards draw one more).
pub fn sample_outcomes_sharded(
    obs: &Observable,
    rho: &DensityOperator,
    n_trials: u64,
    seed: u64,
    shards: u64,
) -> Result<SampleReport> {
    check_trials(n_trials)?;
    if shards == 0 {
        return Err(Error::InvalidArgument("shards must be at least 1".into()));
    }
    let probabilities = outcome_probabilities(obs, rho)?;
    let cdf = cumulative(&probabilities);
    let parts: Vec<Vec<u64>> = (0..shards)
        .into_par_iter()
        .map(|s| {
            let share = n_trials / shards + u64::from(s < n_trials % shards);
            count_draws(&mut lane_rng(seed, s), &cdf, share)
        })
        .collect();
    let mut counts = vec![0u64; probabilities.len()];
    for part in &parts {
        for (total, k) in counts.iter_mut().zip(part) {
            *total += k;
        }
    }
    Ok(SampleReport::from_counts(counts, probabilities, seed))
}

/// First and second outcomes of a measure-twice simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct RepeatabilityReport {
    pub first: SampleReport,
    pub second: SampleReport,
    /// Trials whose second outcome equals the first.
    pub agreements: u64,
    pub n_trials: u64,
}

impl RepeatabilityReport {
    pub fn agreement_rate(&self) -> f64 {
        self.agreements as f64 / self.n_trials as f64
    }

    pub fn fully_repeatable(&self) -> bool {
        self.agreements == self.n_trials
    }
}

/// Samples an outcome, replaces the state by its conditional state and
/// samples again, `n_trials` times. Outcomes below [`P_FLOOR`] have no
/// conditional state and are excluded from the first draw.
pub fn repeatability_run(
    obs: &Observable,
    rho: &DensityOperator,
    n_trials: u64,
    seed: u64,
) -> Result<RepeatabilityReport> {
    check_trials(n_trials)?;
    let probabilities = outcome_probabilities(obs, rho)?;
    let admissible: Vec<f64> = probabilities
        .iter()
        .map(|&p| if p < P_FLOOR { 0.0 } else { p })
        .collect();
    let first_cdf = cumulative(&admissible);

    let second_cdfs = admissible
        .iter()
        .enumerate()
        .map(|(n, &p)| {
            if p == 0.0 {
                Ok(Vec::new())
            } else {
                let state = conditional_state(obs, rho, n)?;
                Ok(cumulative(&outcome_probabilities(obs, &state)?))
            }
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rng = seeded(seed);
    let mut first = vec![0u64; probabilities.len()];
    let mut second = vec![0u64; probabilities.len()];
    let mut agreements = 0;
    for _ in 0..n_trials {
        let a = draw(&first_cdf, rng.random::<f64>());
        let b = draw(&second_cdfs[a], rng.random::<f64>());
        first[a] += 1;
        second[b] += 1;
        agreements += u64::from(a == b);
    }
    Ok(RepeatabilityReport {
        first: SampleReport::from_counts(first, probabilities.clone(), seed),
        // After the non-selective update the outcome distribution is unchanged.
        second: SampleReport::from_counts(second, probabilities, seed),
        agreements,
        n_trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, UnitVector};
    use crate::random::random_observable_with_ranks;

    #[test]
    fn single_outcome_with_rounded_mass_passes() {
        let report = SampleReport::from_counts(vec![10_000], vec![0.9999999999999998], 0);
        assert!(report.chi_square_passes(0.999));
        let report = SampleReport::from_counts(vec![9_999, 1], vec![1.0, 1e-17], 0);
        assert_eq!(report.support(), 1);
        assert!(!report.chi_square_passes(0.999));
    }

    fn sigma_z() -> Observable {
        Observable::diagonal(&[1.0, -1.0]).unwrap()
    }

    fn plus() -> DensityOperator {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        DensityOperator::pure(&UnitVector::new(vec![c(s, 0.0), c(s, 0.0)]).unwrap())
    }

    #[test]
    fn draw_inverse_cdf() {
        let cdf = cumulative(&[0.2, 0.0, 0.8]);
        assert_eq!(draw(&cdf, 0.0), 0);
        assert_eq!(draw(&cdf, 0.19), 0);
        assert_eq!(draw(&cdf, 0.2), 2);
        assert_eq!(draw(&cdf, 0.999), 2);
        // Cumulative mass short of one.
        let short = [0.5, 0.9, 0.9];
        assert_eq!(draw(&short, 0.95), 1);
    }

    #[test]
    fn eigenstate_counts_all_on_one_outcome() {
        let r = sample_outcomes(&sigma_z(), &DensityOperator::pure(&UnitVector::basis(2, 1)), 1000, 3).unwrap();
        assert_eq!(r.counts, vec![1000, 0]);
        assert_eq!(r.max_abs_deviation, 0.0);
        assert!(r.chi_square_passes(0.999));
    }

    #[test]
    fn plus_state_frequencies_within_four_sigma() {
        let r = sample_outcomes(&sigma_z(), &plus(), 100_000, 2024).unwrap();
        for n in 0..2 {
            assert!((r.frequencies[n] - 0.5).abs() < 4.0 * r.standard_error(n));
        }
        assert_eq!(r.counts.iter().sum::<u64>(), 100_000);
    }

    #[test]
    fn same_seed_same_counts() {
        let a = sample_outcomes(&sigma_z(), &plus(), 5000, 8).unwrap();
        let b = sample_outcomes(&sigma_z(), &plus(), 5000, 8).unwrap();
        assert_eq!(a, b);
        let c = sample_outcomes(&sigma_z(), &plus(), 5000, 9).unwrap();
        assert_ne!(a.counts, c.counts);
    }

    #[test]
    fn zero_trials_rejected() {
        assert!(sample_outcomes(&sigma_z(), &plus(), 0, 0).is_err());
        assert!(repeatability_run(&sigma_z(), &plus(), 0, 0).is_err());
    }

    #[test]
    fn sharded_is_deterministic_and_complete() {
        let a = sample_outcomes_sharded(&sigma_z(), &plus(), 10_001, 4, 7).unwrap();
        let b = sample_outcomes_sharded(&sigma_z(), &plus(), 10_001, 4, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.n_trials, 10_001);
        assert!(a.max_abs_deviation < 4.0 * a.standard_error(0));
    }

    #[test]
    fn merge_is_associative() {
        let x = sample_outcomes(&sigma_z(), &plus(), 10, 1).unwrap();
        let y = sample_outcomes(&sigma_z(), &plus(), 20, 2).unwrap();
        let z = sample_outcomes(&sigma_z(), &plus(), 30, 3).unwrap();
        let left = x.merge(&y).unwrap().merge(&z).unwrap();
        let right = x.merge(&y.merge(&z).unwrap()).unwrap();
        assert_eq!(left, right);
        assert_eq!(left.n_trials, 60);
    }

    #[test]
    fn repeatability_is_total() {
        let obs = random_observable_with_ranks(&[1, 2, 1], 5).unwrap();
        let rho = crate::quantum::random_density(4, 3, 6).unwrap();
        let r = repeatability_run(&obs, &rho, 10_000, 7).unwrap();
        assert!(r.fully_repeatable());
        assert_eq!(r.first.counts, r.second.counts);
    }

    #[test]
    fn repeatability_trivial_observable() {
        let rho = crate::quantum::random_density(3, 3, 6).unwrap();
        let r = repeatability_run(&Observable::trivial(3), &rho, 100, 1).unwrap();
        assert_eq!(r.first.counts, vec![100]);
        assert_eq!(r.second.counts, vec![100]);
    }

    #[test]
    fn maximally_mixed_first_outcomes_follow_ranks() {
        let obs = random_observable_with_ranks(&[2, 1, 1], 9).unwrap();
        let r = repeatability_run(&obs, &DensityOperator::maximally_mixed(4), 10_000, 10).unwrap();
        for (n, k) in obs.ranks().into_iter().enumerate() {
            let p = k as f64 / 4.0;
            assert!((r.first.probabilities[n] - p).abs() < 1e-12);
            assert!((r.first.frequencies[n] - p).abs() < 4.0 * r.first.standard_error(n));
        }
    }

    #[test]
    fn chi_square_quantile_two_dof() {
        // For two degrees of freedom the quantile is -2 ln(1 - level).
        assert!((chi_square_quantile(2, 0.999) - (-2.0 * 0.001f64.ln())).abs() < 1e-6);
    }
}
