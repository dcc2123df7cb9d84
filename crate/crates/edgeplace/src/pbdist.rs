//! Sums of independent, non-identical Bernoulli trials: exact pmf/tail via
//! convolution, plus Normal and Poisson approximations for large profiles.

use statrs::distribution::{ContinuousCDF, DiscreteCDF, Normal, Poisson};

use crate::error::{PipelineError, Result};

/// A sequence of success probabilities, one per Bernoulli trial.
#[derive(Debug, Clone, PartialEq)]
pub struct BernoulliProfile {
    probs: Vec<f64>,
}

impl BernoulliProfile {
    /// Build a profile, rejecting entries outside [0, 1].
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if let Some(bad) = probs
            .iter()
            .find(|p| !(p.is_finite() && (0.0..=1.0).contains(*p)))
        {
            return Err(PipelineError::config(
                "probs",
                format!("success probability {bad} lies outside [0, 1]"),
            ));
        }
        Ok(BernoulliProfile { probs })
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Full pmf over counts 0..=n by the pairwise convolution recurrence:
    /// fold each trial into the distribution of the partial sum.
    fn pmf_table(&self) -> Vec<f64> {
        let mut dp = vec![0.0; self.probs.len() + 1];
        dp[0] = 1.0;
        for (t, &p) in self.probs.iter().enumerate() {
            // Counts above t+1 are still zero; sweep high-to-low so each
            // entry reads the previous trial's values.
            for m in (0..=t + 1).rev() {
                let from_success = if m > 0 { dp[m - 1] * p } else { 0.0 };
                dp[m] = dp[m] * (1.0 - p) + from_success;
            }
        }
        dp
    }

    fn check_count(&self, z: usize) -> Result<()> {
        if z > self.probs.len() {
            return Err(PipelineError::CountOutOfRange {
                value: z,
                max: self.probs.len(),
            });
        }
        Ok(())
    }
}

/// P(Z = z) where Z is the number of successes across the profile.
pub fn pb_pmf(profile: &BernoulliProfile, z: usize) -> Result<f64> {
    profile.check_count(z)?;
    Ok(profile.pmf_table()[z])
}

/// P(Z >= z): the upper tail of the success count.
pub fn pb_tail(profile: &BernoulliProfile, z: usize) -> Result<f64> {
    profile.check_count(z)?;
    let table = profile.pmf_table();
    let sum: f64 = table[z..].iter().sum();
    Ok(sum.clamp(0.0, 1.0))
}

/// Closed-form approximation family for the upper tail.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailApprox {
    /// Gaussian with matched mean and variance, continuity-corrected.
    Normal,
    /// Poisson with matched mean.
    Poisson,
}

/// Approximate P(Z >= z) without the quadratic convolution.
pub fn pb_tail_approx(profile: &BernoulliProfile, z: usize, method: TailApprox) -> Result<f64> {
    profile.check_count(z)?;
    if z == 0 {
        return Ok(1.0);
    }
    let mean: f64 = profile.probs.iter().sum();
    match method {
        TailApprox::Normal => {
            let var: f64 = profile.probs.iter().map(|p| p * (1.0 - p)).sum();
            if var == 0.0 {
                // Every trial is deterministic; Z equals `mean` exactly.
                return Ok(if (z as f64) <= mean { 1.0 } else { 0.0 });
            }
            let std_normal = Normal::new(0.0, 1.0).expect("unit normal");
            let arg = (z as f64 - 0.5 - mean) / var.sqrt();
            Ok((1.0 - std_normal.cdf(arg)).clamp(0.0, 1.0))
        }
        TailApprox::Poisson => {
            if mean == 0.0 {
                return Ok(0.0);
            }
            let pois = Poisson::new(mean).expect("positive rate");
            Ok((1.0 - pois.cdf(z as u64 - 1)).clamp(0.0, 1.0))
        }
    }
}

/// Smallest count that constitutes a strict majority of `n` voters.
pub fn majority_floor(n: usize) -> Result<usize> {
    if n == 0 {
        return Err(PipelineError::TooFew {
            context: "majority floor",
            min: 1,
            got: 0,
        });
    }
    Ok(if n.is_multiple_of(2) {
        n / 2 + 1
    } else {
        n.div_ceil(2)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn profile(probs: &[f64]) -> BernoulliProfile {
        BernoulliProfile::new(probs.to_vec()).unwrap()
    }

    /// Closed-form binomial pmf for the identical-probability cross-check.
    fn binomial_pmf(n: usize, k: usize, p: f64) -> f64 {
        let mut coeff = 1.0;
        for i in 0..k {
            coeff *= (n - i) as f64 / (i + 1) as f64;
        }
        coeff * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32)
    }

    #[test]
    fn two_symmetric_coins() {
        assert_relative_eq!(
            pb_pmf(&profile(&[0.5, 0.5]), 1).unwrap(),
            0.5,
            max_relative = 1e-15
        );
    }

    #[test]
    fn identical_probs_reduce_to_binomial() {
        let p = profile(&[0.3, 0.3, 0.3]);
        assert_relative_eq!(pb_pmf(&p, 2).unwrap(), 0.189, max_relative = 1e-12);
    }

    #[test]
    fn mixed_profile_matches_hand_enumeration() {
        // All C(4,2)=6 success pairs of {0.1, 0.4, 0.7, 0.9} summed by hand.
        let p = profile(&[0.1, 0.4, 0.7, 0.9]);
        assert_relative_eq!(pb_pmf(&p, 2).unwrap(), 0.4842, max_relative = 1e-12);
        // Tail at 3 = P(exactly 3) + P(all 4).
        assert_relative_eq!(pb_tail(&p, 3).unwrap(), 0.3034, max_relative = 1e-12);
    }

    #[test]
    fn tail_basics() {
        let p = profile(&[0.2, 0.8]);
        assert_relative_eq!(pb_tail(&p, 0).unwrap(), 1.0, max_relative = 1e-15);
        // 1 - P(no success) = 1 - 0.8*0.2.
        assert_relative_eq!(pb_tail(&p, 1).unwrap(), 0.84, max_relative = 1e-12);
        let certain = profile(&[1.0, 1.0]);
        assert_relative_eq!(pb_tail(&certain, 2).unwrap(), 1.0, max_relative = 1e-15);
    }

    #[test]
    fn count_out_of_range_is_rejected() {
        let p = profile(&[0.5, 0.5]);
        assert!(pb_pmf(&p, 3).is_err());
        assert!(pb_tail(&p, 3).is_err());
        assert!(pb_tail_approx(&p, 3, TailApprox::Normal).is_err());
    }

    #[test]
    fn invalid_probabilities_are_rejected() {
        assert!(BernoulliProfile::new(vec![0.5, 1.2]).is_err());
        assert!(BernoulliProfile::new(vec![-0.1]).is_err());
        assert!(BernoulliProfile::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn normal_approx_near_exact_for_symmetric_profile() {
        let p = profile(&vec![0.5; 100]);
        let exact = pb_tail(&p, 50).unwrap();
        let approx = pb_tail_approx(&p, 50, TailApprox::Normal).unwrap();
        assert!(
            (exact - approx).abs() < 0.02,
            "exact {exact} vs approx {approx}"
        );
    }

    #[test]
    fn poisson_approx_near_exact_for_rare_events() {
        let p = profile(&[0.05; 20]);
        let exact = pb_tail(&p, 1).unwrap();
        let approx = pb_tail_approx(&p, 1, TailApprox::Poisson).unwrap();
        // Rate 1: approximation is 1 - e^{-1}.
        assert_relative_eq!(approx, 1.0 - (-1.0f64).exp(), max_relative = 1e-12);
        assert!(
            (exact - approx).abs() < 0.03,
            "exact {exact} vs approx {approx}"
        );
    }

    #[test]
    fn degenerate_profiles_under_both_approximations() {
        let certain = profile(&[1.0; 5]);
        assert_relative_eq!(
            pb_tail_approx(&certain, 5, TailApprox::Normal).unwrap(),
            1.0,
            max_relative = 1e-12
        );
        let never = profile(&[0.0; 5]);
        assert_eq!(pb_tail_approx(&never, 1, TailApprox::Poisson).unwrap(), 0.0);
        assert_eq!(pb_tail_approx(&never, 0, TailApprox::Normal).unwrap(), 1.0);
    }

    #[test]
    fn majority_floor_branches() {
        assert_eq!(majority_floor(10).unwrap(), 6);
        assert_eq!(majority_floor(7).unwrap(), 4);
        assert_eq!(majority_floor(1).unwrap(), 1);
        assert_eq!(majority_floor(2).unwrap(), 2);
        assert!(majority_floor(0).is_err());
    }

    // ---------------------------------------------------------------
    // Property tests
    // ---------------------------------------------------------------

    fn arb_profile(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(0.0..=1.0f64, 1..=max_len)
    }

    proptest! {
        #[test]
        fn pmf_sums_to_one(probs in arb_profile(64)) {
            let p = BernoulliProfile::new(probs).unwrap();
            let total: f64 = (0..=p.len()).map(|z| pb_pmf(&p, z).unwrap()).sum();
            prop_assert!((total - 1.0).abs() < 1e-12, "total {total}");
        }

        #[test]
        fn tail_is_monotone_and_starts_at_one(probs in arb_profile(32)) {
            let p = BernoulliProfile::new(probs).unwrap();
            prop_assert!((pb_tail(&p, 0).unwrap() - 1.0).abs() < 1e-15);
            let mut prev = f64::INFINITY;
            for z in 0..=p.len() {
                let t = pb_tail(&p, z).unwrap();
                prop_assert!(t <= prev + 1e-15, "tail increased at z={z}");
                prev = t;
            }
        }

        #[test]
        fn permutation_leaves_distribution_unchanged(
            probs in arb_profile(24),
            seed in 0u64..1000,
        ) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut shuffled = probs.clone();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            shuffled.shuffle(&mut rng);
            let a = BernoulliProfile::new(probs).unwrap();
            let b = BernoulliProfile::new(shuffled).unwrap();
            for z in 0..=a.len() {
                prop_assert!((pb_pmf(&a, z).unwrap() - pb_pmf(&b, z).unwrap()).abs() < 1e-12);
                prop_assert!((pb_tail(&a, z).unwrap() - pb_tail(&b, z).unwrap()).abs() < 1e-12);
            }
        }

        #[test]
        fn identical_probabilities_match_binomial(
            p in 0.0..=1.0f64,
            n in 1usize..=20,
            z_frac in 0.0..=1.0f64,
        ) {
            let z = ((n as f64) * z_frac) as usize;
            let prof = BernoulliProfile::new(vec![p; n]).unwrap();
            let expected = binomial_pmf(n, z, p);
            prop_assert!((pb_pmf(&prof, z).unwrap() - expected).abs() < 1e-12);
        }

        #[test]
        fn majority_floor_is_strict_majority(n in 1usize..=1000) {
            let f = majority_floor(n).unwrap();
            // The floor itself is more than half; one less is not.
            prop_assert!(2 * f > n);
            prop_assert!(2 * (f - 1) <= n);
        }
    }
}
