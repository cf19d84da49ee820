//! Two-term Weyl fit of the boundary spectral density over the corpus:
//! Q_Λ(x) ≈ A₂Λ² + B₂κ(x)Λ^{3/2}, with the sign of B₂ and the g–f
//! correlation trend as the observables.

use super::{solve_pair, RunContext, Scenario, ScenarioReport};
use crate::config::DomainSpec;
use crate::manifest::OutputDir;
use crate::report::{fmt17, noise_floor, CheckResult};
use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use rflab_core::riesz::{bly_constant_2d, weyl_fit, WeylFit};

pub struct Weyl;

impl Scenario for Weyl {
    fn name(&self) -> &'static str {
        "weyl"
    }

    fn about(&self) -> &'static str {
        "boundary Weyl expansion fit of Q_lambda across the corpus"
    }

    fn run(&self, ctx: &RunContext) -> Result<ScenarioReport> {
        let cfg = &ctx.config;
        let lambdas: Vec<f64> = if cfg.lambdas.len() >= 3 {
            cfg.lambdas.clone()
        } else {
            vec![30.0, 45.0, 60.0, 80.0]
        };
        let lambda_top = *lambdas.last().unwrap();
        if lambdas.len() < 3 {
            bail!("weyl fit needs at least 3 cutoffs");
        }

        let mut members = vec![DomainSpec::Disk { radius: 1.0, n: 256 }];
        members.extend(cfg.corpus_specs());

        struct MemberFit {
            label: String,
            fine: WeylFit,
            coarse: WeylFit,
            h_ratio: f64,
        }

        let fits: Vec<MemberFit> = members
            .par_iter()
            .map(|spec| -> Result<MemberFit> {
                let domain = spec.build(cfg.rescale_area)?;
                let pair = solve_pair(&domain, lambda_top * 1.06, &cfg.solver)?;
                Ok(MemberFit {
                    label: spec.label(),
                    fine: weyl_fit(&domain, &pair.fine, &lambdas)?,
                    coarse: weyl_fit(&domain, &pair.coarse, &lambdas)?,
                    h_ratio: pair.h_ratio,
                })
            })
            .collect::<Result<_>>()?;

        let mut out = OutputDir::create(
            ctx.out_dir.as_ref().context("weyl needs an output directory")?,
        )?;
        let mut csv = String::from(
            "member,a2,b2,degenerate,residual_rms,gf_correlations\n",
        );
        let mut checks = Vec::new();

        for m in &fits {
            let corr_list = m
                .fine
                .gf_correlations
                .iter()
                .map(|c| format!("{c:.6}"))
                .collect::<Vec<_>>()
                .join(";");
            csv.push_str(&format!(
                "{},{},{},{},{},{}\n",
                m.label,
                fmt17(m.fine.a2),
                m.fine.b2.map_or("".into(), fmt17),
                m.fine.degenerate,
                fmt17(m.fine.residual_rms),
                corr_list,
            ));

            if m.fine.degenerate {
                // disk: B is unidentifiable and must be flagged, and the
                // leading coefficient must land on L2_cl = 1/(8π)
                checks.push(CheckResult::within_tol(
                    format!("degenerate_flagged[{}]", m.label),
                    if m.fine.b2.is_none() { 0.0 } else { 1.0 },
                    0.0,
                    0.0,
                ));
                let target = bly_constant_2d();
                checks.push(CheckResult::within_tol(
                    format!("a2_matches_weyl[{}]", m.label),
                    (m.fine.a2 / target - 1.0).abs(),
                    0.15,
                    noise_floor(m.fine.a2, m.coarse.a2, m.h_ratio) / target,
                ));
            } else {
                let b2 = m.fine.b2.unwrap();
                let floor = noise_floor(b2, m.coarse.b2.unwrap_or(b2), m.h_ratio);
                checks.push(CheckResult::negative_beyond_noise(
                    format!("b2_negative[{}]", m.label),
                    b2,
                    floor,
                ));
            }
        }

        // anti-correlation strengthens with energy on the aspect-2 ellipse
        if let Some(m) = fits.iter().find(|m| m.label.starts_with("ellipse_2x")) {
            let first = m.fine.gf_correlations[0];
            let top = m.fine.gf_correlation_top;
            let floor = noise_floor(
                m.fine.gf_correlation_top,
                m.coarse.gf_correlation_top,
                m.h_ratio,
            );
            checks.push(CheckResult::negative_beyond_noise(
                "gf_correlation_trend[ellipse_2x1]",
                top - first,
                floor,
            ));
        }

        out.write("weyl_fits.csv", &csv)?;
        let manifest = out.finalize(self.name(), cfg.fingerprint(), &checks)?;
        Ok(ScenarioReport { manifest, checks })
    }
}
