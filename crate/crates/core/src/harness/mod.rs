//! Experiment configs, runners and their CSV/JSON records.

pub mod config;
pub mod data;
pub mod experiments;
pub mod record;

pub use config::{
    Domain, ExperimentConfig, ExperimentKind, FamilyConfig, FamilyKind, GridConfig, InterpConfig, PotentialConfig, SpacePair,
    Tolerances, Variant,
};
pub use data::Datum;
pub use experiments::{run_bound_check, run_convergence, run_experiment, run_holder_experiment, run_regularity_table};
pub use record::{read_csv, ExperimentOutput, ExperimentRecord, OutputFormat};
