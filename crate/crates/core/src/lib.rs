//! Message importance measure (MIM) toolkit.
//!
//! * [`distributions`]: validated finite distributions and generators.
//! * [`mim`]: the measure itself and the reciprocal focusing rule.
//! * [`select`]: coefficient selection for binary distributions with a
//!   prior on the focused probability.
//! * [`stream`]: the minority-event model, batch-wise empirical tracking,
//!   delta-method moments and Monte Carlo oracles.
//! * [`verify`] and [`figures`]: invariant suites and data tables used by
//!   the command-line front end.
//!
//! Numeric code is generic over [`Real`]; the aliases below fix the scalar
//! for the common cases.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod distributions;
pub mod error;
pub mod figures;
pub mod mim;
pub mod scalar;
pub mod select;
pub mod stream;
pub mod verify;

pub use distributions::{generate, parse_distribution_json, FiniteDistribution, GeneratorSpec};
pub use error::{MimError, Result};
pub use mim::{
    chain_rule_values, coefficient_for_element, dominant_index, evaluate, focused_mim,
    lower_bound_report, uniform_gap, ImportanceCoefficient, MimValue,
};
pub use scalar::Real;
pub use select::{
    coefficient_bounds, coefficient_with_prior, dominance_margin, g, g_taylor,
    solve_coefficient_exact, taylor_coefficient, PriorInterval, RootSolveResult, SolverConfig,
};
pub use stream::{
    chebyshev_bound, delta_moments, empirical_mim, minority_event_probability,
    monte_carlo_moments, simulate_batches, EmpiricalTracker, MinorityModel, MomentEstimates,
};

/// IEEE binary128 scalar backed by libquadmath.
pub type Quad = f128::f128;

pub type Distribution = FiniteDistribution<f64>;
pub type QuadDistribution = FiniteDistribution<Quad>;
pub type Coefficient = ImportanceCoefficient<f64>;
pub type Mim = MimValue<f64>;
pub type RootSolve = RootSolveResult<f64>;
pub type QuadRootSolve = RootSolveResult<Quad>;
pub type Moments = MomentEstimates<f64>;

/// Seed used whenever the caller does not supply one.
pub const DEFAULT_SEED: u64 = 20170001;
