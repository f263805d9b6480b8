use rand_distr::{Binomial, Distribution as _};
use serde::Serialize;

use crate::distributions::FiniteDistribution;
use crate::error::{invalid, Result};
use crate::scalar::CompensatedSum;

use super::rng::substream;
use super::tracker::EmpiricalTracker;

/// Absolute slack on the inclusive `|m/M - p| ≥ ε` test. Without it,
/// `|40/100 - 0.3|` and `|20/100 - 0.3|` land on either side of `0.1`
/// depending on rounding.
pub const BOUNDARY_SLACK: f64 = 1e-12;

/// Category probabilities, sequence length `M` and deviation threshold `ε`.
#[derive(Debug, Clone, PartialEq)]
pub struct MinorityModel {
    category_probs: FiniteDistribution<f64>,
    sequence_len: u64,
    epsilon: f64,
}

impl MinorityModel {
    /// `ε` may exceed 1, which makes the minority event impossible.
    pub fn new(category_probs: FiniteDistribution<f64>, sequence_len: u64, epsilon: f64) -> Result<Self> {
        if sequence_len == 0 {
            return Err(invalid("M", "must be at least 1"));
        }
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(invalid("epsilon", format!("must be positive, got {epsilon}")));
        }
        Ok(Self {
            category_probs,
            sequence_len,
            epsilon,
        })
    }

    /// Binary model `(p_1, 1 - p_1)`.
    pub fn binary(p1: f64, sequence_len: u64, epsilon: f64) -> Result<Self> {
        Self::new(FiniteDistribution::binary(p1)?, sequence_len, epsilon)
    }

    /// Reads `{"probs": [...], "M": int, "epsilon": real}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)
            .map_err(|e| invalid("model", format!("not valid JSON: {e}")))?;
        let probs = crate::distributions::distribution_from_value(&value)?;
        let m = value
            .get("M")
            .and_then(serde_json::Value::as_u64)
            .ok_or_else(|| invalid("M", "missing or not a positive integer"))?;
        let eps = value
            .get("epsilon")
            .and_then(serde_json::Value::as_f64)
            .ok_or_else(|| invalid("epsilon", "missing or not a number"))?;
        Self::new(probs, m, eps)
    }

    pub fn category_probs(&self) -> &FiniteDistribution<f64> {
        &self.category_probs
    }

    pub fn sequence_len(&self) -> u64 {
        self.sequence_len
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Probability of the tracked category `a_1`.
    pub fn p1(&self) -> f64 {
        self.category_probs.probs()[0]
    }

    /// Whether `m` occurrences of a category with probability `p` deviate.
    pub fn deviates(&self, m: u64, p: f64) -> bool {
        let freq = m as f64 / self.sequence_len as f64;
        (freq - p).abs() >= self.epsilon - BOUNDARY_SLACK
    }

    /// The minority event for the tracked category.
    pub fn is_minority(&self, m: u64) -> bool {
        self.deviates(m, self.p1())
    }
}

/// `C(n, k) p^k (1-p)^(n-k)` for `k = 0..=n`, built in log space.
pub fn binomial_pmf(n: u64, p: f64) -> Vec<f64> {
    if p <= 0.0 {
        let mut v = vec![0.0; n as usize + 1];
        v[0] = 1.0;
        return v;
    }
    if p >= 1.0 {
        let mut v = vec![0.0; n as usize + 1];
        v[n as usize] = 1.0;
        return v;
    }
    let (ln_p, ln_q) = (p.ln(), (-p).ln_1p());
    let mut ln_choose = 0.0;
    (0..=n)
        .map(|k| {
            if k > 0 {
                ln_choose += ((n - k + 1) as f64 / k as f64).ln();
            }
            (ln_choose + k as f64 * ln_p + (n - k) as f64 * ln_q).exp()
        })
        .collect()
}

/// `P(|m/M - p| ≥ ε)` for `m ~ Binomial(M, p)`.
pub fn deviation_tail(model: &MinorityModel, p: f64) -> f64 {
    binomial_pmf(model.sequence_len, p)
        .into_iter()
        .enumerate()
        .filter(|&(m, _)| model.deviates(m as u64, p))
        .map(|(_, w)| w)
        .collect::<CompensatedSum>()
        .total()
}

/// Exact probability of the minority event on category `a_1`.
pub fn minority_event_probability(model: &MinorityModel) -> f64 {
    deviation_tail(model, model.p1())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnionBoundReport {
    pub category_tails: Vec<f64>,
    /// `K · max_k tail_k`.
    pub bound: f64,
    /// Monte Carlo estimate of `P(some category deviates)`.
    pub union_estimate: f64,
    pub union_std_error: f64,
    /// `1 - union_estimate`.
    pub majority_probability: f64,
    pub samples: u64,
    pub holds: bool,
}

/// Compares the union probability (multinomial Monte Carlo) with the
/// `K · max` bound built from exact per-category tails.
pub fn union_bound_check(model: &MinorityModel, samples: u64, seed: u64) -> Result<UnionBoundReport> {
    let probs = model.category_probs().probs();
    if probs.len() < 2 {
        return Err(invalid("probs", "union bound needs at least two categories"));
    }
    if samples == 0 {
        return Err(invalid("samples", "must be positive"));
    }
    let category_tails: Vec<f64> = probs.iter().map(|&p| deviation_tail(model, p)).collect();
    let max_tail = category_tails.iter().copied().fold(0.0, f64::max);
    let bound = probs.len() as f64 * max_tail;

    let mut rng = substream(seed, 0);
    let mut hits = 0u64;
    for _ in 0..samples {
        let mut remaining = model.sequence_len();
        let mut mass_left = 1.0;
        let mut any = false;
        for (k, &p) in probs.iter().enumerate() {
            let m = if k + 1 == probs.len() || remaining == 0 {
                remaining
            } else {
                let cond = (p / mass_left).clamp(0.0, 1.0);
                Binomial::new(remaining, cond)
                    .expect("conditional probability is in [0, 1]")
                    .sample(&mut rng)
            };
            remaining -= m;
            mass_left -= p;
            any |= model.deviates(m, p);
        }
        hits += any as u64;
    }
    let est = hits as f64 / samples as f64;
    let se = (est * (1.0 - est) / samples as f64).sqrt();
    Ok(UnionBoundReport {
        category_tails,
        bound,
        union_estimate: est,
        union_std_error: se,
        majority_probability: 1.0 - est,
        samples,
        holds: est <= bound + 3.0 * se + 1e-12,
    })
}

/// Runs the batches: batch `i` draws `ΔN_i` sequence counts
/// `m ~ Binomial(M, p_1)` from its own substream and counts minority events.
pub fn simulate_batches(model: &MinorityModel, batch_sizes: &[u64], seed: u64) -> Result<EmpiricalTracker> {
    if batch_sizes.is_empty() {
        return Err(invalid("batches", "must be non-empty"));
    }
    let sampler = Binomial::new(model.sequence_len(), model.p1())
        .map_err(|e| invalid("probs", e.to_string()))?;
    let mut tracker = EmpiricalTracker::new();
    for (i, &size) in batch_sizes.iter().enumerate() {
        let mut rng = substream(seed, i as u64);
        let hits = (0..size)
            .filter(|_| model.is_minority(sampler.sample(&mut rng)))
            .count() as u64;
        tracker.push(hits, size)?;
    }
    Ok(tracker)
}
