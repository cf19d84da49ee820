//! Analytic reference spectra on demand: disk (Bessel zeros) and
//! rectangle (separation of variables). Prints to stdout; writes the
//! spectrum JSON only when an output directory was given.

use super::{RunContext, Scenario, ScenarioReport};
use crate::config::OracleSpec;
use crate::manifest::{OutputDir, RunManifest, Timings};
use anyhow::{Context, Result};
use rflab_core::spectral::{disk_oracle, rectangle_oracle};

pub struct Oracle;

impl Scenario for Oracle {
    fn name(&self) -> &'static str {
        "oracle"
    }

    fn about(&self) -> &'static str {
        "closed-form disk/rectangle spectra (Bessel zeros, lattice sums)"
    }

    fn run(&self, ctx: &RunContext) -> Result<ScenarioReport> {
        let cfg = &ctx.config;
        let spec = cfg
            .oracle
            .as_ref()
            .context("oracle needs an \"oracle\" entry (disk or rectangle)")?;
        let spectrum = match *spec {
            OracleSpec::Disk { radius, lambda_max, boundary } => {
                disk_oracle(radius, lambda_max, boundary)
            }
            OracleSpec::Rectangle { a, b, lambda_max } => rectangle_oracle(a, b, lambda_max),
        };
        let json = spectrum.to_json_string();
        println!("{json}");

        let manifest = match &ctx.out_dir {
            Some(dir) => {
                let mut out = OutputDir::create(dir)?;
                out.write("spectrum.json", &json)?;
                out.finalize(self.name(), cfg.fingerprint(), &[])?
            }
            None => RunManifest {
                scenario: self.name().into(),
                config_fingerprint: format!("{:016x}", cfg.fingerprint()),
                code_version: env!("CARGO_PKG_VERSION").into(),
                passed: true,
                checks_passed: 0,
                checks_total: 0,
                files: Vec::new(),
                timings: Timings { total_seconds: 0.0 },
            },
        };
        Ok(ScenarioReport { manifest, checks: Vec::new() })
    }
}
