//! Finite probability distributions: validation, built-in generators and
//! the JSON distribution file format.

use serde::Serialize;
use serde_json::Value;

use crate::error::{invalid, MimError, Result};
use crate::scalar::{log_sum_exp, Real};

/// Absolute tolerance on `Σ p_i = 1` for inputs that are not renormalized.
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// A validated probability vector `p = (p_1, ..., p_n)` with `n ≥ 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteDistribution<T> {
    probs: Vec<T>,
}

impl<T: Real> FiniteDistribution<T> {
    /// Validates `probs`. With `renormalize` the entries are divided by their
    /// sum; otherwise the sum must already be within [`NORMALIZATION_TOL`] of 1.
    pub fn new(probs: Vec<T>, renormalize: bool) -> Result<Self> {
        if probs.is_empty() {
            return Err(MimError::EmptyDistribution);
        }
        for (index, &p) in probs.iter().enumerate() {
            if !p.is_finite() || p < T::zero() {
                return Err(MimError::InvalidEntry {
                    index,
                    value: p.to_f64_lossy(),
                });
            }
        }
        let sum = probs.iter().fold(T::zero(), |acc, &p| acc + p);
        if sum == T::zero() {
            return Err(MimError::AllZero);
        }
        if renormalize {
            let probs = probs.into_iter().map(|p| p / sum).collect();
            return Ok(Self { probs });
        }
        if (sum - T::one()).abs() > T::lit(NORMALIZATION_TOL) {
            return Err(MimError::NotNormalized {
                sum: sum.to_f64_lossy(),
            });
        }
        Ok(Self { probs })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(MimError::EmptyDistribution);
        }
        let p = T::one() / T::from_count(n as u64);
        Ok(Self { probs: vec![p; n] })
    }

    /// The binary distribution `(p, 1 - p)`.
    pub fn binary(p: T) -> Result<Self> {
        if !(p >= T::zero() && p <= T::one()) {
            return Err(invalid("p", format!("must lie in [0, 1], got {p}")));
        }
        Ok(Self {
            probs: vec![p, T::one() - p],
        })
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn get(&self, index: usize) -> Result<T> {
        self.probs
            .get(index)
            .copied()
            .ok_or(MimError::IndexOutOfRange {
                index,
                len: self.len(),
            })
    }

    /// Smallest entry. With `require_positive`, a zero entry is an error.
    pub fn min_prob(&self, require_positive: bool) -> Result<T> {
        if require_positive {
            self.require_positive()?;
        }
        Ok(self
            .probs
            .iter()
            .copied()
            .fold(T::infinity(), |acc, p| acc.min(p)))
    }

    pub fn max_prob(&self) -> T {
        self.probs
            .iter()
            .copied()
            .fold(T::neg_infinity(), |acc, p| acc.max(p))
    }

    /// Fails with the first zero index, if any.
    pub fn require_positive(&self) -> Result<()> {
        match self.probs.iter().position(|&p| p == T::zero()) {
            Some(index) => Err(MimError::ZeroProbability { index }),
            None => Ok(()),
        }
    }

    /// True when a single entry carries all the mass.
    pub fn is_degenerate(&self) -> bool {
        self.probs.iter().filter(|&&p| p > T::zero()).count() == 1
    }

    pub fn to_f64(&self) -> FiniteDistribution<f64> {
        FiniteDistribution {
            probs: self.probs.iter().map(|p| p.to_f64_lossy()).collect(),
        }
    }
}

/// Parameterized families used to build test and figure distributions.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GeneratorSpec {
    Uniform { n: usize },
    /// `C(trials, k) θ^k (1-θ)^(trials-k)` for `k = 0..=trials`.
    Binomial { trials: usize, theta: f64 },
    /// `λ^k e^-λ / k!` for `k = 0..support`, renormalized.
    TruncatedPoisson { rate: f64, support: usize },
    /// `(1-q)^(k-1) q` for `k = 1..=support`, renormalized.
    TruncatedGeometric { q: f64, support: usize },
    Explicit { probs: Vec<f64> },
}

impl GeneratorSpec {
    pub fn validate(&self) -> Result<()> {
        let open_unit = |field, x: f64| {
            if x > 0.0 && x < 1.0 {
                Ok(())
            } else {
                Err(invalid(field, format!("must lie in (0, 1), got {x}")))
            }
        };
        let support = |field, k: usize| {
            if k >= 1 {
                Ok(())
            } else {
                Err(invalid(field, "must be at least 1"))
            }
        };
        match *self {
            GeneratorSpec::Uniform { n } => support("n", n),
            GeneratorSpec::Binomial { theta, .. } => open_unit("theta", theta),
            GeneratorSpec::TruncatedPoisson { rate, support: k } => {
                if !(rate > 0.0 && rate.is_finite()) {
                    return Err(invalid("rate", format!("must be positive, got {rate}")));
                }
                support("support", k)
            }
            GeneratorSpec::TruncatedGeometric { q, support: k } => {
                open_unit("q", q)?;
                support("support", k)
            }
            GeneratorSpec::Explicit { ref probs } => {
                if probs.is_empty() {
                    Err(invalid("probs", "must be non-empty"))
                } else {
                    Ok(())
                }
            }
        }
    }

    /// Short stable label used in figure tables.
    pub fn label(&self) -> String {
        match *self {
            GeneratorSpec::Uniform { n } => format!("uniform(n={n})"),
            GeneratorSpec::Binomial { trials, theta } => {
                format!("binomial(n={trials},theta={theta})")
            }
            GeneratorSpec::TruncatedPoisson { rate, support } => {
                format!("poisson(lambda={rate},K={support})")
            }
            GeneratorSpec::TruncatedGeometric { q, support } => {
                format!("geometric(q={q},K={support})")
            }
            GeneratorSpec::Explicit { .. } => "explicit".to_string(),
        }
    }
}

/// Builds the distribution described by `spec`.
pub fn generate<T: Real>(spec: &GeneratorSpec) -> Result<FiniteDistribution<T>> {
    spec.validate()?;
    match *spec {
        GeneratorSpec::Uniform { n } => FiniteDistribution::uniform(n),
        GeneratorSpec::Binomial { trials, theta } => {
            let theta = T::lit(theta);
            let (ln_theta, ln_rest) = (theta.ln(), (T::one() - theta).ln());
            let n = T::from_count(trials as u64);
            let mut ln_choose = T::zero();
            let mut log_w = Vec::with_capacity(trials + 1);
            for k in 0..=trials {
                if k > 0 {
                    let k_t = T::from_count(k as u64);
                    ln_choose = ln_choose + ((n - k_t + T::one()) / k_t).ln();
                }
                let k_t = T::from_count(k as u64);
                log_w.push(ln_choose + k_t * ln_theta + (n - k_t) * ln_rest);
            }
            from_log_weights(log_w)
        }
        GeneratorSpec::TruncatedPoisson { rate, support } => {
            let rate = T::lit(rate);
            let ln_rate = rate.ln();
            let mut ln_fact = T::zero();
            let mut log_w = Vec::with_capacity(support);
            for k in 0..support {
                let k_t = T::from_count(k as u64);
                if k > 0 {
                    ln_fact = ln_fact + k_t.ln();
                }
                log_w.push(k_t * ln_rate - rate - ln_fact);
            }
            from_log_weights(log_w)
        }
        GeneratorSpec::TruncatedGeometric { q, support } => {
            let q = T::lit(q);
            let ln_fail = (T::one() - q).ln();
            let log_w = (1..=support)
                .map(|k| T::from_count(k as u64 - 1) * ln_fail + q.ln())
                .collect();
            from_log_weights(log_w)
        }
        GeneratorSpec::Explicit { ref probs } => {
            FiniteDistribution::new(probs.iter().map(|&p| T::lit(p)).collect(), false)
        }
    }
}

fn from_log_weights<T: Real>(log_w: Vec<T>) -> Result<FiniteDistribution<T>> {
    let ln_total = log_sum_exp(log_w.iter().copied());
    let probs = log_w.into_iter().map(|w| (w - ln_total).exp()).collect();
    FiniteDistribution::new(probs, true)
}

/// Parses the JSON distribution format:
/// `{"probs": [...], "renormalize": bool}` or `{"kind": "...", ...}`.
pub fn parse_distribution_json(text: &str) -> Result<FiniteDistribution<f64>> {
    let value: Value = serde_json::from_str(text)
        .map_err(|e| invalid("distribution", format!("not valid JSON: {e}")))?;
    distribution_from_value(&value)
}

pub fn distribution_from_value(value: &Value) -> Result<FiniteDistribution<f64>> {
    let obj = value
        .as_object()
        .ok_or_else(|| invalid("distribution", "expected a JSON object"))?;
    if obj.contains_key("kind") {
        let spec = generator_spec_from_value(value)?;
        return generate(&spec);
    }
    let probs = read_probs(obj.get("probs"))?;
    let renormalize = match obj.get("renormalize") {
        None => false,
        Some(v) => v
            .as_bool()
            .ok_or_else(|| invalid("renormalize", "expected a boolean"))?,
    };
    FiniteDistribution::new(probs, renormalize)
}

pub fn generator_spec_from_value(value: &Value) -> Result<GeneratorSpec> {
    let obj = value
        .as_object()
        .ok_or_else(|| invalid("distribution", "expected a JSON object"))?;
    let kind = obj
        .get("kind")
        .and_then(Value::as_str)
        .ok_or_else(|| invalid("kind", "expected a string"))?;
    let real = |field: &'static str| -> Result<f64> {
        obj.get(field)
            .and_then(Value::as_f64)
            .ok_or_else(|| invalid(field, "missing or not a number"))
    };
    let count = |field: &'static str| -> Result<usize> {
        obj.get(field)
            .and_then(Value::as_u64)
            .map(|v| v as usize)
            .ok_or_else(|| invalid(field, "missing or not a nonnegative integer"))
    };
    let spec = match kind {
        "uniform" => GeneratorSpec::Uniform { n: count("n")? },
        "binomial" => GeneratorSpec::Binomial {
            trials: count("trials")?,
            theta: real("theta")?,
        },
        "truncated-poisson" => GeneratorSpec::TruncatedPoisson {
            rate: real("rate")?,
            support: count("support")?,
        },
        "truncated-geometric" => GeneratorSpec::TruncatedGeometric {
            q: real("q")?,
            support: count("support")?,
        },
        "explicit" => GeneratorSpec::Explicit {
            probs: read_probs(obj.get("probs"))?,
        },
        other => return Err(invalid("kind", format!("unknown generator `{other}`"))),
    };
    spec.validate()?;
    Ok(spec)
}

fn read_probs(value: Option<&Value>) -> Result<Vec<f64>> {
    let arr = value
        .and_then(Value::as_array)
        .ok_or_else(|| invalid("probs", "missing or not an array"))?;
    arr.iter()
        .enumerate()
        .map(|(i, v)| {
            v.as_f64()
                .ok_or_else(|| invalid("probs", format!("entry {i} is not a number")))
        })
        .collect()
}
