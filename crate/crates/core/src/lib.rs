//! Distributed optimization by stochastic perturbation.
//!
//! A set of nodes jointly maximizes the expected sum of their local utilities
//! using only measured utility values: each node perturbs its action with a
//! random sign, measures, and moves along its perturbation scaled by the
//! global utility (or its own estimate of it when only some utilities are
//! exchanged). The crate provides the iteration rules, the objective models
//! used to exercise them, Monte Carlo estimators of the squared distance to
//! the optimum, and the closed-form convergence envelopes to compare against.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analysis;
pub mod algorithm;
pub mod error;
pub mod exchange;
pub mod experiment;
pub mod objectives;
pub mod perturbation;
pub mod schedules;
pub mod streams;

pub use algorithm::{AlgoConfig, IterationRecord, RecordSchedule, RunState, SineParams, Variant};
pub use error::{Error, Result};
pub use exchange::ExchangeModel;
pub use objectives::{ActionVector, Bounds, Objective, PowerControl, PowerUtility, QuadraticToy};
pub use perturbation::PerturbationModel;
pub use schedules::PowerLawSchedule;
pub use streams::Streams;
