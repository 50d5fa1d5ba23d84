//! Divergence from the optimum, replicated runs, and numerical checks of
//! the estimator and rate bounds.

mod bounds;
mod montecarlo;
mod optimum;

pub use bounds::{
    bias_bound, bias_bound_at, empirical_bias, finite_difference_gradient, fit_omega, lemma4_recursion_check,
    lemma5_floor, lemma7_check, second_moment_at, theorem4_envelopes, theorem5_envelope, Branch, EnvelopePoint,
    ExchangeVariant, MEstimate, Provenance, RateConstants, RecursionRow, Theorem4Envelopes, VectorEstimate,
    DEFAULT_M_SAFETY,
};
pub use montecarlo::{
    divergence, monte_carlo, monte_carlo_divergence, squared_distance, DivergenceSeries, McSeries, MonteCarlo,
    SeriesStat,
};
pub use optimum::{plateau_optimum, PlateauSearch};
