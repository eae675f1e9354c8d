//! Experiment harness: declarative ensemble configs, seeded parallel SGD runs
//! with endpoint classification, one-step drift/diffusion estimators, AR(1)
//! fits of diffusive windows, trajectory-versus-ODE comparison reports, and
//! byte-deterministic export.

pub mod ar1;
pub mod compare;
pub mod config;
pub mod ensemble;
pub mod error;
pub mod io;
pub mod onestep;
pub mod systems;

pub use ar1::{fit_ar1, Ar1Fit};
pub use compare::{compare_to_limit, CompareReport, MatchMode};
pub use config::{
    CompareConfig, ExperimentConfig, FamilyTag, InitConfig, ModelConfig, SweepConfig,
};
pub use ensemble::{run_ensemble, EnsembleResult, FractionEntry, RunOutcome, DIVERGED};
pub use error::HarnessError;
pub use io::{
    compare_csv_string, export_compare, export_ensemble, export_trajectories,
    fractions_json_string, runs_csv_string,
};
pub use onestep::{estimate_one_step, DriftEstimate};
pub use systems::{build_ode, build_sde, ODE_SYSTEMS, SDE_SYSTEMS};
