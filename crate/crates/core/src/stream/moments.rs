use rand_distr::{Binomial, Distribution as _};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, MimError, Result};
use crate::scalar::{log_sum_exp, CompensatedSum, Real};

use super::rng::substream;

/// `L̂(p̂) = ln(p̂ e^{1/p̂ - 1} + (1 - p̂) e)`, the measure of `(p̂, 1 - p̂)`
/// focused on `p̂`. `None` outside `(0, 1]`; at `p̂ = 0` the coefficient
/// `1/p̂` diverges.
pub fn empirical_mim<T: Real>(p_hat: T) -> Option<T> {
    if !(p_hat > T::zero() && p_hat <= T::one()) {
        return None;
    }
    let one = T::one();
    let rest = one - p_hat;
    let rare = p_hat.ln() + p_hat.recip() - one;
    let common = if rest == T::zero() { T::neg_infinity() } else { rest.ln() + one };
    Some(log_sum_exp([rare, common]))
}

/// Delta-method mean and variance of `L̂(p̂)` for `p̂ ~ Binomial(N, p)/N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentEstimates<T> {
    pub mu: T,
    /// `p(1 - p)/N`.
    pub sigma_sq: T,
    pub mean_l: T,
    pub var_l: T,
    pub trials: u64,
}

/// Second-order mean and first-order variance:
///
/// ```text
/// E(L̂) ≈ L(p) + σ²/2 · [(2/p - 1)e^{2/p-4} + (1/p³ - 1/p² - 2/p + 2)e^{1/p-2} - 1]
///                      / (p e^{1/p-1} + (1-p)e)²
/// D(L̂) ≈ σ² · [((1 - 1/p)e^{1/p-2} - 1) / (p e^{1/p-2} + 1 - p)]²
/// ```
///
/// Both ratios are evaluated after dividing through by their largest
/// exponential, so small `p` does not overflow.
pub fn delta_moments<T: Real>(p: T, trials: u64) -> Result<MomentEstimates<T>> {
    if !(p > T::zero() && p < T::lit(0.5)) {
        return Err(invalid("p", format!("must lie in (0, 1/2), got {p}")));
    }
    if trials == 0 {
        return Err(invalid("N", "must be at least 1"));
    }
    let one = T::one();
    let two = T::lit(2.0);
    let inv = p.recip();
    let sigma_sq = p * (one - p) / T::from_count(trials);

    // Everything below is scaled by e^{-(2/p - 2)} (curvature) or
    // e^{-(1/p - 2)} (slope).
    let small = (two - inv).exp(); // e^{2 - 1/p}
    let curv_num = (two * inv - one) * (-two).exp()
        + (inv * inv * inv - inv * inv - two * inv + two) * (-inv).exp()
        - (two - two * inv).exp();
    let curv_den = {
        let base = p + (one - p) * small;
        base * base
    };
    let curvature = curv_num / curv_den;

    let slope = ((one - inv) - small) / (p + (one - p) * small);

    let level = empirical_mim(p).expect("p is in (0, 1/2)");
    Ok(MomentEstimates {
        mu: p,
        sigma_sq,
        mean_l: level + sigma_sq / two * curvature,
        var_l: slope * slope * sigma_sq,
        trials,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChebyshevReport<T> {
    /// `min(1, D(L̂)/ε²)`.
    pub bound: T,
    /// `D(L̂)/ε`, reported for comparison only.
    pub printed_form: T,
}

pub fn chebyshev_bound<T: Real>(moments: &MomentEstimates<T>, eps: T) -> Result<ChebyshevReport<T>> {
    if !(eps > T::zero()) {
        return Err(invalid("eps", "must be positive"));
    }
    Ok(ChebyshevReport {
        bound: (moments.var_l / (eps * eps)).min(T::one()),
        printed_form: moments.var_l / eps,
    })
}

/// `replicas` draws of `p̂ = Binomial(N, p)/N`, replica `r` on substream `r`.
pub fn sample_empirical_probabilities(p: f64, trials: u64, replicas: usize, seed: u64) -> Result<Vec<f64>> {
    if !(p > 0.0 && p < 1.0) {
        return Err(invalid("p", format!("must lie in (0, 1), got {p}")));
    }
    if trials == 0 {
        return Err(invalid("N", "must be at least 1"));
    }
    let sampler = Binomial::new(trials, p).map_err(|e| invalid("p", e.to_string()))?;
    Ok((0..replicas)
        .into_par_iter()
        .map(|r| {
            let mut rng = substream(seed, r as u64);
            sampler.sample(&mut rng) as f64 / trials as f64
        })
        .collect())
}

/// Monte Carlo values of `L̂`, in replica order.
#[derive(Debug, Clone, PartialEq)]
pub struct McSamples {
    pub values: Vec<f64>,
    /// Replicas with `p̂ = 0`, where `L̂` is undefined.
    pub skipped: usize,
}

impl McSamples {
    pub fn moments(&self) -> Result<McMoments> {
        let n = self.values.len();
        if n < 2 {
            return Err(MimError::AllDrawsUndefined);
        }
        let mean = self.values.iter().copied().collect::<CompensatedSum>().total() / n as f64;
        let ss = self
            .values
            .iter()
            .map(|v| (v - mean) * (v - mean))
            .collect::<CompensatedSum>()
            .total();
        Ok(McMoments {
            mean,
            variance: ss / (n - 1) as f64,
            used: n,
            skipped: self.skipped,
        })
    }

    /// Fraction of values with `|L̂ - center| ≥ eps`.
    pub fn exceedance(&self, center: f64, eps: f64) -> f64 {
        let hits = self.values.iter().filter(|v| (*v - center).abs() >= eps).count();
        hits as f64 / self.values.len().max(1) as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McMoments {
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    pub used: usize,
    pub skipped: usize,
}

pub fn sample_empirical_mim(p: f64, trials: u64, replicas: usize, seed: u64) -> Result<McSamples> {
    if replicas < 2 {
        return Err(invalid("replicas", "must be at least 2"));
    }
    let probs = sample_empirical_probabilities(p, trials, replicas, seed)?;
    let values: Vec<f64> = probs.iter().filter_map(|&ph| empirical_mim(ph)).collect();
    let skipped = replicas - values.len();
    if values.is_empty() {
        return Err(MimError::AllDrawsUndefined);
    }
    Ok(McSamples { values, skipped })
}

/// Sample mean and unbiased variance of `L̂` over `replicas` seeded draws.
/// Bit-identical for a given seed regardless of thread count.
pub fn monte_carlo_moments(p: f64, trials: u64, replicas: usize, seed: u64) -> Result<McMoments> {
    sample_empirical_mim(p, trials, replicas, seed)?.moments()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Unscaled expressions, fine for moderate p.
    fn naive_moments(p: f64, n: u64) -> (f64, f64) {
        let e = std::f64::consts::E;
        let s2 = p * (1.0 - p) / n as f64;
        let lvl = (p * (1.0 / p - 1.0).exp() + (1.0 - p) * e).ln();
        let num = (2.0 / p - 1.0) * (2.0 / p - 4.0).exp()
            + (1.0 / p.powi(3) - 1.0 / p.powi(2) - 2.0 / p + 2.0) * (1.0 / p - 2.0).exp()
            - 1.0;
        let den = 2.0 * (p * (1.0 / p - 1.0).exp() + (1.0 - p) * e).powi(2);
        let d1 = ((1.0 - 1.0 / p) * (1.0 / p - 2.0).exp() - 1.0) / (p * (1.0 / p - 2.0).exp() + 1.0 - p);
        (lvl + num / den * s2, d1 * d1 * s2)
    }

    #[test]
    fn empirical_mim_examples() {
        assert_relative_eq!(empirical_mim(0.5).unwrap(), 1.0, max_relative = 1e-15);
        let direct = (0.1 * 9f64.exp() + 0.9 * std::f64::consts::E).ln();
        assert_relative_eq!(empirical_mim(0.1).unwrap(), direct, max_relative = 1e-15);
        assert_relative_eq!(empirical_mim(0.1).unwrap(), 6.700_429_522_135_355, max_relative = 1e-14);
        assert_eq!(empirical_mim(1.0).unwrap(), 0.0);
        assert!(empirical_mim(0.0f64).is_none());
        assert!(empirical_mim(1.5f64).is_none());
        assert!(empirical_mim(1e-6f64).unwrap().is_finite());
    }

    #[test]
    fn empirical_mim_is_the_focused_binary_measure() {
        for p in [0.01, 0.1, 0.37, 0.5, 0.8] {
            let d = crate::FiniteDistribution::binary(p).unwrap();
            let f = crate::focused_mim(&d, 0).unwrap().nats();
            assert_relative_eq!(empirical_mim(p).unwrap(), f, max_relative = 1e-14);
        }
    }

    #[test]
    fn delta_moments_example() {
        let m = delta_moments(0.1f64, 10_000).unwrap();
        assert_relative_eq!(m.sigma_sq, 9e-6, max_relative = 1e-14);
        let (mean, var) = naive_moments(0.1, 10_000);
        assert_relative_eq!(m.mean_l, mean, max_relative = 1e-13);
        assert_relative_eq!(m.var_l, var, max_relative = 1e-12);
        assert_relative_eq!(m.mean_l - 6.700_429_522_135_355, 0.001_168_072, max_relative = 1e-5);
        assert_relative_eq!(m.var_l, 0.072_467_193_399_66, max_relative = 1e-10);
    }

    #[test]
    fn variance_scales_inversely_with_trials() {
        let a = delta_moments(0.2, 1000).unwrap();
        let b = delta_moments(0.2, 2000).unwrap();
        assert_relative_eq!(a.var_l / b.var_l, 2.0, max_relative = 1e-14);
        assert_relative_eq!(a.sigma_sq / b.sigma_sq, 2.0, max_relative = 1e-14);
    }

    #[test]
    fn delta_moments_small_p_is_finite() {
        let m = delta_moments(1e-3f64, 1_000_000).unwrap();
        assert!(m.mean_l.is_finite() && m.var_l.is_finite());
        assert!(delta_moments(0.5, 10).is_err());
        assert!(delta_moments(0.1, 0).is_err());
    }

    #[test]
    fn quad_moments_agree() {
        let a = delta_moments(0.1, 10_000).unwrap();
        let b = delta_moments(crate::Quad::lit(0.1), 10_000).unwrap();
        assert_relative_eq!(a.var_l, b.var_l.to_f64_lossy(), max_relative = 1e-13);
        assert_relative_eq!(a.mean_l, b.mean_l.to_f64_lossy(), max_relative = 1e-14);
    }

    #[test]
    fn chebyshev_examples() {
        let m = delta_moments(0.1f64, 10_000).unwrap();
        let at_sd = chebyshev_bound(&m, m.var_l.sqrt()).unwrap();
        assert_relative_eq!(at_sd.bound, 1.0, max_relative = 1e-12);
        let zero = MomentEstimates { var_l: 0.0, ..m };
        assert_eq!(chebyshev_bound(&zero, 0.5).unwrap().bound, 0.0);
        let one = chebyshev_bound(&m, 1.0).unwrap();
        assert_relative_eq!(one.bound, 0.072_467_193_399_66, max_relative = 1e-10);
        assert_eq!(one.printed_form, one.bound);
        assert!(chebyshev_bound(&m, 0.0).is_err());
    }

    #[test]
    fn monte_carlo_is_deterministic() {
        let a = monte_carlo_moments(0.2, 500, 2000, 9).unwrap();
        let b = monte_carlo_moments(0.2, 500, 2000, 9).unwrap();
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        assert_eq!(a.variance.to_bits(), b.variance.to_bits());
        let c = monte_carlo_moments(0.2, 500, 2000, 10).unwrap();
        assert_ne!(a.mean.to_bits(), c.mean.to_bits());
    }

    #[test]
    fn concentrates_at_the_symmetric_point() {
        let m = monte_carlo_moments(0.5, 100_000_000, 200, 1).unwrap();
        assert!((m.mean - 1.0).abs() < 1e-3);
    }

    #[test]
    fn skipped_draws_are_counted() {
        let s = sample_empirical_mim(0.01, 10, 1000, 4).unwrap();
        assert!(s.skipped > 0);
        assert_eq!(s.skipped + s.values.len(), 1000);
        assert!(matches!(
            sample_empirical_mim(1e-9, 1, 100, 4),
            Err(MimError::AllDrawsUndefined)
        ));
        assert!(sample_empirical_mim(0.3, 10, 1, 4).is_err());
    }

    #[test]
    fn empirical_probability_moments() {
        let (p, n, reps) = (0.1, 10_000u64, 20_000usize);
        let xs = sample_empirical_probabilities(p, n, reps, 3).unwrap();
        let mean = xs.iter().sum::<f64>() / reps as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
        let true_var = p * (1.0 - p) / n as f64;
        assert!((mean - p).abs() <= 3.0 * (true_var / reps as f64).sqrt());
        // sampling sd of a variance estimate is about var * sqrt(2 / reps)
        assert!((var - true_var).abs() <= 3.0 * true_var * (2.0 / reps as f64).sqrt());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn empirical_mim_strictly_decreasing(a in 1e-4f64..1.0, b in 1e-4f64..1.0) {
                prop_assume!((a - b).abs() > 1e-9);
                let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                prop_assert!(empirical_mim(lo).unwrap() > empirical_mim(hi).unwrap());
            }
        }
    }
}
