//! Hadamard variation check: centered eigenvalue differences under a
//! boundary normal velocity against −∫|∂_n u|²V ds, per eigenspace
//! group, with a Richardson half-step consistency test.

use super::{RunContext, Scenario, ScenarioReport};
use crate::config::{solver_config_for, VelocitySpec};
use crate::manifest::OutputDir;
use crate::report::{fmt17, CheckResult};
use anyhow::{Context, Result};
use rflab_core::riesz::{hadamard_check, HadamardComparison};
use rflab_core::spectral::{mesh_domain, solve_dirichlet};

pub struct Hadamard;

impl Scenario for Hadamard {
    fn name(&self) -> &'static str {
        "hadamard"
    }

    fn about(&self) -> &'static str {
        "eigenvalue perturbation formula vs finite differences of the spectrum"
    }

    fn run(&self, ctx: &RunContext) -> Result<ScenarioReport> {
        let cfg = &ctx.config;
        let spec = cfg.domain.as_ref().context("hadamard needs a \"domain\" entry")?;
        let domain = spec.build(cfg.rescale_area)?;
        let lambda_top = cfg.lambdas.last().copied().unwrap_or(55.0);

        let solver = solver_config_for(&domain, lambda_top * 1.08, 2.0, &cfg.solver);
        let mesh = mesh_domain(&domain, &solver)?;
        let spectrum = solve_dirichlet(&mesh, &solver)?;

        let mut out = OutputDir::create(
            ctx.out_dir.as_ref().context("hadamard needs an output directory")?,
        )?;
        let mut csv = String::from("velocity,dt,group_lo,group_hi,lambda,fd,boundary_integral,rel_error\n");
        let mut checks = Vec::new();

        let had = &cfg.hadamard;
        for (vi, vspec) in had.velocities.iter().enumerate() {
            let velocity = vspec.to_velocity();
            let tol = had.tolerances.get(vi).copied().unwrap_or(0.05);
            let full = hadamard_check(&domain, &spectrum, &velocity, had.dt, &solver)?;
            let half = hadamard_check(&domain, &spectrum, &velocity, had.dt / 2.0, &solver)?;
            for (dt, comps) in [(had.dt, &full), (had.dt / 2.0, &half)] {
                for c in comps.iter() {
                    csv.push_str(&format!(
                        "{},{},{},{},{},{},{},{}\n",
                        vspec.label(),
                        fmt17(dt),
                        c.group.start,
                        c.group.end,
                        fmt17(c.lambda),
                        fmt17(c.fd_derivative),
                        fmt17(c.boundary_integral),
                        fmt17(c.rel_error),
                    ));
                }
            }

            let n_groups = had.groups.min(full.len()).min(half.len());
            if is_translation(vspec) {
                // rigid translation leaves the spectrum unchanged
                let worst = half
                    .iter()
                    .take(n_groups)
                    .map(|c| c.fd_derivative.abs() / (2.0 * c.lambda * amplitude(vspec)))
                    .fold(0.0f64, f64::max);
                checks.push(CheckResult::within_tol(
                    format!("translation_null[{}]", vspec.label()),
                    worst,
                    0.02,
                    0.0,
                ));
            } else {
                let worst = half
                    .iter()
                    .take(n_groups)
                    .map(|c| c.rel_error)
                    .fold(0.0f64, f64::max);
                checks.push(CheckResult::within_tol(
                    format!("hadamard[{}]", vspec.label()),
                    worst,
                    tol,
                    0.0,
                ));
                // FD truncation must be subdominant: halving dt should
                // move the estimate by well under the tolerance
                let drift = richardson_drift(&full, &half, n_groups);
                checks.push(CheckResult::within_tol(
                    format!("richardson[{}]", vspec.label()),
                    drift,
                    0.01,
                    0.0,
                ));
            }
        }

        out.write("hadamard.csv", &csv)?;
        let manifest = out.finalize(self.name(), cfg.fingerprint(), &checks)?;
        Ok(ScenarioReport { manifest, checks })
    }
}

fn is_translation(v: &VelocitySpec) -> bool {
    matches!(v, VelocitySpec::Cos { m: 1, .. } | VelocitySpec::Sin { m: 1, .. })
}

fn amplitude(v: &VelocitySpec) -> f64 {
    match *v {
        VelocitySpec::Uniform { value } => value.abs(),
        VelocitySpec::Cos { amplitude, .. } | VelocitySpec::Sin { amplitude, .. } => {
            amplitude.abs()
        }
    }
}

/// max over groups of |fd(dt) − fd(dt/2)| relative to the boundary
/// integral, an upper proxy for the dt² truncation share.
fn richardson_drift(
    full: &[HadamardComparison],
    half: &[HadamardComparison],
    n_groups: usize,
) -> f64 {
    full.iter()
        .zip(half)
        .take(n_groups)
        .map(|(a, b)| {
            (a.fd_derivative - b.fd_derivative).abs()
                / b.boundary_integral.abs().max(1e-300)
        })
        .fold(0.0f64, f64::max)
}
