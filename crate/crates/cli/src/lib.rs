//! Scenario runner binding the flow, spectral, and Riesz machinery into
//! reproducible experiments with CSV/JSON artifacts and manifests.

pub mod config;
pub mod manifest;
pub mod report;
pub mod scenario;
pub mod svg;

pub use config::{resolution_for, solver_config_for, DomainSpec, ExperimentConfig};
pub use manifest::{OutputDir, RunManifest};
pub use report::{noise_floor, CheckResult};
pub use scenario::{find, registry, solve_pair, RunContext, Scenario, ScenarioReport, SpectrumPair};
