//! Scenario registry: each experiment is a strategy behind a common
//! trait, registered by name and selected at runtime from the CLI.

mod cesaro;
mod hadamard;
mod monotonicity;
mod oracle;
mod weyl;

use crate::config::{solver_config_for, ExperimentConfig, SolverSection};
use crate::manifest::RunManifest;
use crate::report::{noise_floor, CheckResult};
use anyhow::Result;
use rflab_core::geometry::ConvexDomain2D;
use rflab_core::spectral::{mesh_domain, solve_dirichlet, Spectrum};
use std::path::PathBuf;

pub struct RunContext {
    pub config: ExperimentConfig,
    /// None only for print-only runs (the oracle without --out).
    pub out_dir: Option<PathBuf>,
    pub threads: usize,
}

/// What a scenario run produced: the manifest plus the individual
/// checks for console reporting.
pub struct ScenarioReport {
    pub manifest: RunManifest,
    pub checks: Vec<CheckResult>,
}

pub trait Scenario: Sync {
    fn name(&self) -> &'static str;
    fn about(&self) -> &'static str;
    fn run(&self, ctx: &RunContext) -> Result<ScenarioReport>;
}

static REGISTRY: &[&dyn Scenario] = &[
    &monotonicity::Monotonicity,
    &hadamard::Hadamard,
    &weyl::Weyl,
    &cesaro::Cesaro,
    &oracle::Oracle,
];

pub fn registry() -> &'static [&'static dyn Scenario] {
    REGISTRY
}

pub fn find(name: &str) -> Option<&'static dyn Scenario> {
    REGISTRY.iter().copied().find(|s| s.name() == name)
}

/// A spectrum solved at the production grid together with its
/// half-resolution partner; the pair carries every two-grid noise floor.
pub struct SpectrumPair {
    pub fine: Spectrum,
    pub coarse: Spectrum,
    /// mesh-size ratio coarse/fine, the r of the O(h²) error model.
    pub h_ratio: f64,
}

impl SpectrumPair {
    /// Noise floor for any functional evaluated on both grids.
    pub fn floor(&self, f: impl Fn(&Spectrum) -> f64) -> f64 {
        noise_floor(f(&self.fine), f(&self.coarse), self.h_ratio)
    }
}

/// Solves a domain on the curvature-scaled production grid (refine = 2)
/// and its partner (refine = 1).
pub fn solve_pair(
    domain: &ConvexDomain2D,
    lambda_max: f64,
    section: &SolverSection,
) -> Result<SpectrumPair> {
    let fine_cfg = solver_config_for(domain, lambda_max, 2.0, section);
    let coarse_cfg = solver_config_for(domain, lambda_max, 1.0, section);
    let fine_mesh = mesh_domain(domain, &fine_cfg)?;
    let coarse_mesh = mesh_domain(domain, &coarse_cfg)?;
    let h_ratio = coarse_mesh.mesh_size / fine_mesh.mesh_size;
    Ok(SpectrumPair {
        fine: solve_dirichlet(&fine_mesh, &fine_cfg)?,
        coarse: solve_dirichlet(&coarse_mesh, &coarse_cfg)?,
        h_ratio,
    })
}
