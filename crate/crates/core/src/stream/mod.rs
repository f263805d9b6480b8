//! Minority-event detection with the focused importance measure.
//!
//! Sequences of length `M` over `K` categories are drawn repeatedly; a
//! sequence is a minority event when the frequency of the first category
//! deviates from its probability by at least `ε`. Batches of such trials
//! feed an [`EmpiricalTracker`], whose running frequency `p̂` is mapped
//! through [`empirical_mim`]. [`delta_moments`] approximates the mean and
//! variance of that map, and [`monte_carlo_moments`] checks them.

mod model;
mod moments;
mod rng;
mod tracker;

pub use model::{
    binomial_pmf, deviation_tail, minority_event_probability, simulate_batches,
    union_bound_check, MinorityModel, UnionBoundReport, BOUNDARY_SLACK,
};
pub use moments::{
    chebyshev_bound, delta_moments, empirical_mim, monte_carlo_moments,
    sample_empirical_probabilities, sample_empirical_mim, ChebyshevReport, McMoments, McSamples,
    MomentEstimates,
};
pub use rng::substream;
pub use tracker::{
    tracker_sandwich_check, BatchRecord, EmpiricalTracker, SandwichKind, SandwichReport,
    SandwichViolation, TRACKER_CSV_HEADER,
};
