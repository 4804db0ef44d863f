//! Exact optimisation of pairwise kidney exchange.
//!
//! Three binary programs over donor–patient pairs are supported: a
//! count-maximising single-pool model, an HLA-thresholded single-pool model,
//! and a multi-agent pooled model with per-agent fairness floors. Instances
//! come from files or from a seeded generator; the harness reproduces the
//! base scenario and the threshold and pool-size sweeps.

pub mod cli;
pub mod compat;
pub mod domain;
pub mod error;
pub mod format;
pub mod generator;
pub mod harness;
pub mod models;
pub mod solver;

#[cfg(test)]
mod testutil;

pub use compat::{blood_compatible, build_compat, directional_feasible, CompatMatrix};
pub use domain::{
    validate_instance, Agent, BloodType, Instance, Match, ModelConfig, ModelKind, ObjectiveMode, PairRecord,
    Solution, Violation,
};
pub use error::{Error, Result};
pub use generator::{generate, GenConfig};
pub use harness::{
    run_base_scenario, run_base_scenario_on, sweep_lhla, sweep_lhla_on, sweep_pool_size, BaseScenario,
    PoolSizing, SweepResult, SweepRow,
};
pub use models::{
    build_model, build_model1, build_model2, build_model3, compute_fairness_floors, hla_gate_eligible,
    ModelSpec,
};
pub use solver::{brute_force_oracle, extract_counts, solve, SolveReport, SolveStatus};
