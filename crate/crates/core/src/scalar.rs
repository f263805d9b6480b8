//! Scalar abstraction shared by every numeric routine in the crate.
//!
//! Everything that evaluates the importance measure or the stationarity
//! function is written against [`Real`], so the same code runs in `f64` and
//! in quad precision ([`Quad`](crate::Quad)). Quad precision matters for the
//! coefficient solver: near `p = 0.02` the two exponentials inside the
//! stationarity function reach `e^49`, and no `f64` abscissa brings the
//! residual anywhere near zero.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar usable by the measure, the solver and the moment
/// formulas.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
    /// Converts an `f64` literal. Panics only for types that cannot hold an
    /// `f64`, which no implementor does.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("scalar type must represent every f64")
    }

    fn from_count(n: u64) -> Self {
        Self::from_u64(n).expect("scalar type must represent every u64")
    }

    /// Lossy conversion back to `f64` for reporting.
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn e() -> Self {
        Self::one().exp()
    }
}

impl<T> Real for T where
    T: Float + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
}

/// `ln(Σ exp(x_i))` with the maximum factored out. Entries equal to
/// `-inf` contribute nothing. Returns `-inf` for an empty or all `-inf`
/// input.
pub fn log_sum_exp<T: Real>(xs: impl IntoIterator<Item = T> + Clone) -> T {
    let max = xs
        .clone()
        .into_iter()
        .fold(T::neg_infinity(), |acc, x| if x > acc { x } else { acc });
    if max == T::neg_infinity() {
        return max;
    }
    let sum = xs
        .into_iter()
        .filter(|x| *x != T::neg_infinity())
        .fold(T::zero(), |acc, x| acc + (x - max).exp());
    max + sum.ln()
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Self::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}
