//! Coefficient selection for a binary distribution `(p, 1 - p)`.
//!
//! The selected coefficient `ϖ*(p)` is the root in `ϖ` of the stationarity
//! function
//!
//! ```text
//! g(p, ϖ) = (1 - pϖ) e^{ϖ(1-p)} - (1 - (1-p)ϖ) e^{ϖp}
//! ```
//!
//! which is the `q`-derivative of `T(q, ϖ) = q e^{ϖ(1-q)} + (1-q) e^{ϖq}`
//! evaluated at `q = p`. For `0 < p < 1/2` the root lies in `(1/p, 2/p)`:
//! `g(p, 1/p) = (1/p - 2) e > 0` and `g(p, 2/p) < 0`.
//!
//! For small `p` the two exponentials are enormous (`e^49` at `p = 0.02`)
//! and the root sits within `1e-17` of `1/p`, so residuals near zero need
//! [`Quad`](crate::Quad) arithmetic. `f64` solves fine for `p ≳ 0.06`.

use crate::error::{invalid, MimError, Result};
use crate::scalar::Real;

pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-8;
pub const DEFAULT_WIDTH_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 200;

/// Stationarity residual. Antisymmetric: `g(p, ϖ) = -g(1 - p, ϖ)`.
pub fn g<T: Real>(p: T, omega: T) -> T {
    let one = T::one();
    let q = one - p;
    (one - p * omega) * (omega * q).exp() - (one - q * omega) * (omega * p).exp()
}

/// Quadratic surrogate `(2p + 2) + (p² - p + 1/2)ϖ + (-p/2 + p²/2 - p³)ϖ²`.
///
/// Its constant term does not match `g(p, 0) = 0`; it is kept as the
/// reference surrogate, and [`solve_coefficient_exact`] is the trusted path.
pub fn g_taylor<T: Real>(p: T, omega: T) -> T {
    let half = T::lit(0.5);
    let two = T::lit(2.0);
    let p2 = p * p;
    let p3 = p2 * p;
    (two * p + two) + (p2 - p + half) * omega + (-half * p + half * p2 - p3) * omega * omega
}

/// Positive root of the quadratic surrogate:
/// `[p² - p + 1/2 + sqrt(9p⁴ + 2p³ + 2p² + 3p + 1/4)] / (2p³ - p² + p)`.
pub fn taylor_coefficient<T: Real>(p: T) -> Result<T> {
    if !(p > T::zero() && p < T::lit(0.5)) {
        return Err(invalid("p", format!("must lie in (0, 1/2), got {p}")));
    }
    let p2 = p * p;
    let p3 = p2 * p;
    let p4 = p3 * p;
    let denom = T::lit(2.0) * p3 - p2 + p;
    if denom <= T::zero() {
        return Err(invalid("p", "closed-form denominator is not positive"));
    }
    let disc = T::lit(9.0) * p4 + T::lit(2.0) * p3 + T::lit(2.0) * p2 + T::lit(3.0) * p + T::lit(0.25);
    Ok((p2 - p + T::lit(0.5) + disc.sqrt()) / denom)
}

/// `T(q, ϖ) = q e^{ϖ(1-q)} + (1-q) e^{ϖq}`, the binary-case sum inside the
/// measure. Its `q`-derivative is [`g`].
pub fn binary_objective<T: Real>(q: T, omega: T) -> T {
    let one = T::one();
    q * (omega * (one - q)).exp() + (one - q) * (omega * q).exp()
}

/// `z(p) = p e^{ϖ(1-p)} - (1-p) e^{ϖp}`: how far the focused element leads
/// the other summand.
pub fn dominance_margin<T: Real>(p: T, omega: T) -> T {
    let one = T::one();
    p * (omega * (one - p)).exp() - (one - p) * (omega * p).exp()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig<T> {
    /// Accept once `|g| ≤ residual_tol` and the bracket is narrower than
    /// `width_tol`.
    pub residual_tol: T,
    pub width_tol: T,
    pub max_iter: usize,
}

impl<T: Real> Default for SolverConfig<T> {
    fn default() -> Self {
        Self {
            residual_tol: T::lit(DEFAULT_RESIDUAL_TOL),
            width_tol: T::lit(DEFAULT_WIDTH_TOL),
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

/// A solved coefficient with its final bracket.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootSolveResult<T> {
    pub omega_star: T,
    /// `|g(p, ϖ*)|`.
    pub residual: T,
    pub bracket_lo: T,
    pub bracket_hi: T,
    pub iterations: usize,
}

/// Solves `g(p, ϖ) = 0` on `[1/p, 2/p]` with default width tolerance and
/// iteration cap.
pub fn solve_coefficient_exact<T: Real>(p: T, tol: T) -> Result<RootSolveResult<T>> {
    solve_with(
        p,
        &SolverConfig {
            residual_tol: tol,
            ..SolverConfig::default()
        },
    )
}

pub fn solve_with<T: Real>(p: T, cfg: &SolverConfig<T>) -> Result<RootSolveResult<T>> {
    if !(p > T::zero() && p < T::one()) {
        return Err(invalid("p", format!("must lie in (0, 1), got {p}")));
    }
    if !(cfg.residual_tol > T::zero()) {
        return Err(invalid("tol", "must be positive"));
    }
    let (mut lo, mut hi) = (p.recip(), T::lit(2.0) / p);
    let (g_lo, g_hi) = (g(p, lo), g(p, hi));
    if !(g_lo > T::zero() && g_hi < T::zero()) {
        return Err(MimError::NoSignChange {
            p: p.to_f64_lossy(),
            lo: lo.to_f64_lossy(),
            hi: hi.to_f64_lossy(),
        });
    }
    let half = T::lit(0.5);
    for iterations in 1..=cfg.max_iter {
        let mid = lo + (hi - lo) * half;
        if !(mid > lo && mid < hi) {
            // Adjacent representable values: take the better endpoint.
            let (r_lo, r_hi) = (g(p, lo).abs(), g(p, hi).abs());
            let (omega, residual) = if r_lo <= r_hi { (lo, r_lo) } else { (hi, r_hi) };
            if residual <= cfg.residual_tol {
                return Ok(RootSolveResult {
                    omega_star: omega,
                    residual,
                    bracket_lo: lo,
                    bracket_hi: hi,
                    iterations,
                });
            }
            return Err(MimError::ResidualNotMet {
                omega: omega.to_f64_lossy(),
                residual: residual.to_f64_lossy(),
                tol: cfg.residual_tol.to_f64_lossy(),
            });
        }
        let g_mid = g(p, mid);
        let residual = g_mid.abs();
        if g_mid == T::zero() || (residual <= cfg.residual_tol && hi - lo <= cfg.width_tol) {
            return Ok(RootSolveResult {
                omega_star: mid,
                residual,
                bracket_lo: lo,
                bracket_hi: hi,
                iterations,
            });
        }
        if g_mid > T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(MimError::IterationLimit {
        max_iter: cfg.max_iter,
        width: (hi - lo).to_f64_lossy(),
    })
}

/// Prior bounds `p_lo < p < p_hi` on the focused probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriorInterval<T> {
    lo: T,
    hi: T,
}

impl<T: Real> PriorInterval<T> {
    /// Requires `0 < lo < hi < 1/2`.
    pub fn new(lo: T, hi: T) -> Result<Self> {
        if !(lo > T::zero()) {
            return Err(invalid("p_lo", format!("must be positive, got {lo}")));
        }
        if !(hi < T::lit(0.5)) {
            return Err(invalid("p_hi", format!("must be below 1/2, got {hi}")));
        }
        if !(lo < hi) {
            return Err(invalid("p_lo", format!("must be below p_hi ({lo} >= {hi})")));
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> T {
        self.lo
    }

    pub fn hi(&self) -> T {
        self.hi
    }
}

/// Solves at the lower endpoint: `ϖ*` decreases in `p`, so `p_lo` gives the
/// largest coefficient compatible with the prior.
pub fn coefficient_with_prior<T: Real>(interval: &PriorInterval<T>, tol: T) -> Result<RootSolveResult<T>> {
    solve_coefficient_exact(interval.lo, tol)
}

/// Loose range `(2/p_hi, 2/p_lo)`. As `p_hi → 1/2` the lower end tends to 4.
pub fn coefficient_bounds<T: Real>(interval: &PriorInterval<T>) -> (T, T) {
    let two = T::lit(2.0);
    (two / interval.hi, two / interval.lo)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityPoint<T> {
    pub p: T,
    pub exact: RootSolveResult<T>,
    pub taylor: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityReport<T> {
    pub points: Vec<MonotonicityPoint<T>>,
    pub exact_decreasing: bool,
    pub taylor_decreasing: bool,
}

/// Solves `ϖ*` at every grid point and reports whether the exact and the
/// closed-form sequences are strictly decreasing.
pub fn monotonicity_check<T: Real>(grid: &[T], tol: T) -> Result<MonotonicityReport<T>> {
    if grid.is_empty() {
        return Err(invalid("grid", "must be non-empty"));
    }
    for w in grid.windows(2) {
        if !(w[0] < w[1]) {
            return Err(invalid("grid", "must be strictly increasing"));
        }
    }
    let points = grid
        .iter()
        .map(|&p| {
            Ok(MonotonicityPoint {
                p,
                exact: solve_coefficient_exact(p, tol)?,
                taylor: taylor_coefficient(p)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let exact_decreasing = points
        .windows(2)
        .all(|w| w[1].exact.omega_star < w[0].exact.omega_star);
    let taylor_decreasing = points.windows(2).all(|w| w[1].taylor < w[0].taylor);
    Ok(MonotonicityReport {
        points,
        exact_decreasing,
        taylor_decreasing,
    })
}
