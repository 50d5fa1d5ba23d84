//! Declarative experiments: configuration text, built-in reproductions, and
//! a runner that writes CSV series and a JSON summary of assertion outcomes.

mod checks;
mod config;
mod runner;
mod spec;

pub use checks::{gradient_relative_error, BIAS_GAMMAS, BIAS_POINTS, LEMMA3_PS};
pub use config::ConfigMap;
pub use runner::{
    first_within, plateau, run_experiment, Assertion, EnvelopeSummary, RunOptions, RunSummary, Status, Summary,
};
pub use spec::{
    builtin, builtin_config, list_experiments, resolve, Check, ExperimentKind, ExperimentSpec, ObjectiveSpec,
    RunSpec, RunValidation, ValidationReport, BUILTIN_NAMES,
};
