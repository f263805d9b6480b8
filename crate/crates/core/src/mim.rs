//! The message importance measure `L(p, ϖ) = ln Σ p_i e^{ϖ(1 - p_i)}` and
//! the reciprocal focusing rule `ϖ_j = 1 / p_j`.
//!
//! All evaluation goes through log-sum-exp: with `ϖ = 1/p_min` the raw
//! summands overflow long before the logarithm does.

use crate::distributions::FiniteDistribution;
use crate::error::{MimError, Result};
use crate::scalar::{log_sum_exp, Real};

/// Nonnegative, finite importance coefficient `ϖ`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct ImportanceCoefficient<T>(T);

impl<T: Real> ImportanceCoefficient<T> {
    pub fn new(omega: T) -> Result<Self> {
        if omega.is_finite() && omega >= T::zero() {
            Ok(Self(omega))
        } else {
            Err(MimError::InvalidCoefficient(omega.to_f64_lossy()))
        }
    }

    pub fn value(self) -> T {
        self.0
    }
}

/// An importance-measure value in nats.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct MimValue<T>(pub T);

impl<T: Real> MimValue<T> {
    pub fn nats(self) -> T {
        self.0
    }
}

/// `ln p_i + ϖ(1 - p_i)` per entry; `-inf` for zero entries.
pub fn log_terms<T: Real>(dist: &FiniteDistribution<T>, omega: ImportanceCoefficient<T>) -> Vec<T> {
    let w = omega.value();
    dist.probs()
        .iter()
        .map(|&p| {
            if p == T::zero() {
                T::neg_infinity()
            } else {
                p.ln() + w * (T::one() - p)
            }
        })
        .collect()
}

pub fn evaluate<T: Real>(dist: &FiniteDistribution<T>, omega: ImportanceCoefficient<T>) -> MimValue<T> {
    if omega.value() == T::zero() {
        return MimValue(T::zero());
    }
    MimValue(log_sum_exp(log_terms(dist, omega)))
}

/// The focusing rule: `ϖ_j = 1 / p_j`.
pub fn coefficient_for_element<T: Real>(
    dist: &FiniteDistribution<T>,
    j: usize,
) -> Result<ImportanceCoefficient<T>> {
    let p = dist.get(j)?;
    if p == T::zero() {
        return Err(MimError::ZeroProbability { index: j });
    }
    ImportanceCoefficient::new(p.recip())
}

/// `L_j = L(p, 1/p_j)`.
pub fn focused_mim<T: Real>(dist: &FiniteDistribution<T>, j: usize) -> Result<MimValue<T>> {
    Ok(evaluate(dist, coefficient_for_element(dist, j)?))
}

/// Index of the largest summand `p_i e^{ϖ(1-p_i)}`, lowest index on ties.
pub fn dominant_index<T: Real>(dist: &FiniteDistribution<T>, omega: ImportanceCoefficient<T>) -> usize {
    let terms = log_terms(dist, omega);
    let mut best = 0;
    for (i, &t) in terms.iter().enumerate().skip(1) {
        if t > terms[best] {
            best = i;
        }
    }
    best
}

/// `(p_j, L_j)` for every element, ordered by `p_j` descending (stable on
/// ties). Strictly decreasing `p_j` give strictly increasing `L_j`.
pub fn chain_rule_values<T: Real>(dist: &FiniteDistribution<T>) -> Result<Vec<(T, MimValue<T>)>> {
    dist.require_positive()?;
    let mut out = (0..dist.len())
        .map(|j| Ok((dist.probs()[j], focused_mim(dist, j)?)))
        .collect::<Result<Vec<_>>>()?;
    out.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("probabilities are finite"));
    Ok(out)
}

/// The two reference values below every focused measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowerBounds<T> {
    /// `L(p, 1/p_max)`.
    pub at_inv_pmax: MimValue<T>,
    /// `L(p, 1) = ln Σ p_i e^{-p_i} + 1`.
    pub at_one: MimValue<T>,
}

pub fn lower_bound_report<T: Real>(dist: &FiniteDistribution<T>) -> Result<LowerBounds<T>> {
    dist.require_positive()?;
    let inv_pmax = ImportanceCoefficient::new(dist.max_prob().recip())?;
    let at_one = log_sum_exp(dist.probs().iter().map(|&p| p.ln() - p)) + T::one();
    Ok(LowerBounds {
        at_inv_pmax: evaluate(dist, inv_pmax),
        at_one: MimValue(at_one),
    })
}

/// `L_0(p) - L_0(u)`: the measure of `p` focused on its minimum,
/// `L(p, 1/p_min)`, less the uniform distribution's own minimum-focused
/// measure `L(u, n) = n - 1`. Nonnegative for every distribution without
/// zeros, and zero exactly at the uniform distribution.
pub fn uniform_gap<T: Real>(dist: &FiniteDistribution<T>) -> Result<T> {
    let omega = ImportanceCoefficient::new(dist.min_prob(true)?.recip())?;
    let n = T::from_count(dist.len() as u64);
    Ok(evaluate(dist, omega).nats() - (n - T::one()))
}

/// `L(p, ϖ_0) - L(u, ϖ_0)` with the same `ϖ_0 = 1/p_min` on both sides,
/// using `L(u, ϖ) = ϖ(1 - 1/n)`. Unlike [`uniform_gap`] this can be
/// negative for distributions close to uniform.
pub fn same_coefficient_uniform_gap<T: Real>(dist: &FiniteDistribution<T>) -> Result<T> {
    let omega = ImportanceCoefficient::new(dist.min_prob(true)?.recip())?;
    let n = T::from_count(dist.len() as u64);
    let uniform = omega.value() * (T::one() - n.recip());
    Ok(evaluate(dist, omega).nats() - uniform)
}
