//! Dirichlet spectra of convex planar domains with boundary traces.
//!
//! P1 conforming elements on the mapped-disk mesh, a dense generalized
//! solve for small interior systems, shift-invert Lanczos above that,
//! conservative variational flux recovery for ∂_n u, and closed-form
//! disk/rectangle oracles for validation.

pub mod assemble;
pub mod band;
pub mod bessel;
pub mod dense;
pub mod lanczos;
pub mod mesh;

pub use mesh::{mesh_domain, Mesh};

use crate::geometry::{BoundarySample, GeometryError};
use crate::hash::Fnv1a;
use assemble::{assemble_forms, BandMatrix, BoundaryMass, Forms};
use band::BandCholesky;
use std::f64::consts::{PI, TAU};
use thiserror::Error;

/// Relative gap under which adjacent eigenvalues are treated as one
/// eigenspace; trace-quadratic quantities are summed over the group,
/// which is invariant under orthogonal changes of basis.
pub const EIGENSPACE_REL_GAP: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("origin is not in the kernel of the radial map")]
    NotStarShaped,
    #[error("cutoff {lambda_max} beyond mesh resolution (h = {mesh_size:.3e}, λh² > 0.5)")]
    CutoffTooHigh { lambda_max: f64, mesh_size: f64 },
    #[error("eigensolver failure: {0}")]
    SolverFailure(String),
    #[error("invalid solver config: {0}")]
    InvalidConfig(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub n_radial: usize,
    pub n_angular: usize,
    /// Eigenvalues are computed strictly below this cutoff.
    pub lambda_max: f64,
    /// Bound on the backward error ‖Kx−λMx‖ / ((‖K‖∞+λ‖M‖∞)‖x‖).
    pub eig_tolerance: f64,
    /// Interior systems up to this size use the dense route; larger ones
    /// go through band Cholesky + shift-invert Lanczos.
    pub dense_limit: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            n_radial: 24,
            n_angular: 96,
            lambda_max: 85.0,
            eig_tolerance: 1e-8,
            dense_limit: 1200,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SpectralError> {
        if self.n_radial < 8 {
            return Err(SpectralError::InvalidConfig(format!(
                "n_radial must be >= 8, got {}",
                self.n_radial
            )));
        }
        if self.n_angular < 32 {
            return Err(SpectralError::InvalidConfig(format!(
                "n_angular must be >= 32, got {}",
                self.n_angular
            )));
        }
        if !(self.lambda_max > 0.0) {
            return Err(SpectralError::InvalidConfig(format!(
                "lambda_max must be positive, got {}",
                self.lambda_max
            )));
        }
        if !(self.eig_tolerance > 0.0 && self.eig_tolerance < 1e-2) {
            return Err(SpectralError::InvalidConfig(format!(
                "eig_tolerance must lie in (0, 1e-2), got {}",
                self.eig_tolerance
            )));
        }
        Ok(())
    }

    /// Same domain, half the resolution; the partner grid of every
    /// two-resolution noise estimate.
    pub fn halved(&self) -> Self {
        Self {
            n_radial: (self.n_radial / 2).max(8),
            n_angular: (self.n_angular / 2).max(32),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SpectrumSource {
    Fem { n_radial: usize, n_angular: usize },
    DiskOracle { radius: f64 },
    RectangleOracle { a: f64, b: f64 },
}

/// Dirichlet eigenvalues below a cutoff with boundary-trace data.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub lambda_max: f64,
    /// Ascending, strictly below `lambda_max`.
    pub eigenvalues: Vec<f64>,
    /// Per eigenpair: ∂_n u at the boundary samples (eigenfunctions
    /// mass-normalized to ∫u² = 1). Empty for the rectangle oracle.
    pub traces: Vec<Vec<f64>>,
    pub boundary: Vec<BoundarySample>,
    pub domain_fingerprint: u64,
    /// Largest relative pencil residual among the returned pairs.
    pub max_residual: f64,
    pub source: SpectrumSource,
}

impl Spectrum {
    pub fn count_below(&self, lambda: f64) -> usize {
        self.eigenvalues.iter().take_while(|&&v| v < lambda).count()
    }

    /// Index ranges of eigenspace groups at the standard relative gap.
    pub fn eigenspace_groups(&self) -> Vec<std::ops::Range<usize>> {
        let mut groups = Vec::new();
        let n = self.eigenvalues.len();
        let mut start = 0;
        for i in 1..=n {
            let split = i == n
                || (self.eigenvalues[i] - self.eigenvalues[i - 1])
                    > EIGENSPACE_REL_GAP * self.eigenvalues[i].abs();
            if split {
                groups.push(start..i);
                start = i;
            }
        }
        groups
    }

    /// Boundary quadrature ∫ f ds with the sample weights.
    pub fn boundary_integral(&self, values: &[f64]) -> f64 {
        values
            .iter()
            .zip(&self.boundary)
            .map(|(v, s)| v * s.arclength_weight)
            .sum()
    }

    /// JSON export with 17 significant digits.
    pub fn to_json_string(&self) -> String {
        let fmt_array = |vals: &[f64]| {
            let mut s = String::from("[");
            for (i, v) in vals.iter().enumerate() {
                if i > 0 {
                    s.push(',');
                }
                s.push_str(&format!("{v:.16e}"));
            }
            s.push(']');
            s
        };
        let mut out = String::new();
        out.push_str(&format!("{{\"lambda_max\":{:.16e},", self.lambda_max));
        out.push_str(&format!("\"eigenvalues\":{},", fmt_array(&self.eigenvalues)));
        let angles: Vec<f64> = self.boundary.iter().map(|s| s.angle).collect();
        out.push_str(&format!("\"boundary_angles\":{},", fmt_array(&angles)));
        out.push_str("\"traces\":[");
        for (i, t) in self.traces.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&fmt_array(t));
        }
        out.push_str("]}");
        out
    }
}

/// Solves the Dirichlet eigenproblem on a mesh, returning all
/// eigenvalues below the cutoff with recovered boundary fluxes.
pub fn solve_dirichlet(mesh: &Mesh, cfg: &SolverConfig) -> Result<Spectrum, SpectralError> {
    cfg.validate()?;
    if cfg.lambda_max * mesh.mesh_size * mesh.mesh_size > 0.5 {
        return Err(SpectralError::CutoffTooHigh {
            lambda_max: cfg.lambda_max,
            mesh_size: mesh.mesh_size,
        });
    }

    let forms = assemble_forms(mesh);
    let dim = mesh.n_interior;

    let (values, vectors) = if dim <= cfg.dense_limit {
        let (vals, vecs) = dense::dense_gevp(&forms.stiffness, &forms.mass, dim)?;
        let below: Vec<usize> = (0..vals.len())
            .filter(|&i| vals[i] > 0.0 && vals[i] < cfg.lambda_max)
            .collect();
        (
            below.iter().map(|&i| vals[i]).collect::<Vec<_>>(),
            below.iter().map(|&i| vecs[i].clone()).collect::<Vec<_>>(),
        )
    } else {
        let k_band = BandMatrix::from_csr_leading(&forms.stiffness, dim);
        let chol = BandCholesky::factor(&k_band)?;
        let mesh_area: f64 = mesh.triangles.iter().map(|&t| mesh.triangle_area(t)).sum();
        let expected = (mesh_area * cfg.lambda_max / (4.0 * PI)).ceil() as usize + 8;
        let opts = lanczos::LanczosOptions {
            lambda_max: cfg.lambda_max,
            tolerance: cfg.eig_tolerance * 0.1,
            max_dim: (8 * expected + 80).min(dim),
            seed: mesh.fingerprint,
        };
        let (vals, vecs, guard) = lanczos::shift_invert_lanczos(&chol, &forms.mass, dim, &opts)?;
        if guard.is_none() && vals.len() < dim {
            return Err(SpectralError::SolverFailure(
                "no converged eigenvalue above the cutoff; spectrum may be incomplete".into(),
            ));
        }
        (vals, vecs)
    };

    // residual contract (normwise backward error), same for both routes
    let inf_norm = |csr: &assemble::Csr| -> f64 {
        (0..dim)
            .map(|r| csr.row(r).filter(|&(c, _)| c < dim).map(|(_, v)| v.abs()).sum::<f64>())
            .fold(0.0f64, f64::max)
    };
    let k_inf = inf_norm(&forms.stiffness);
    let m_inf = inf_norm(&forms.mass);
    let mut max_residual: f64 = 0.0;
    for (lam, x) in values.iter().zip(&vectors) {
        let mut kx = vec![0.0; dim];
        let mut mx = vec![0.0; dim];
        forms.stiffness.mul_vec_leading(x, dim, &mut kx);
        forms.mass.mul_vec_leading(x, dim, &mut mx);
        let mut rnorm = 0.0;
        let mut xnorm = 0.0;
        for i in 0..dim {
            let r = kx[i] - lam * mx[i];
            rnorm += r * r;
            xnorm += x[i] * x[i];
        }
        let backward = rnorm.sqrt() / ((k_inf + lam * m_inf) * xnorm.sqrt());
        max_residual = max_residual.max(backward);
        if backward > cfg.eig_tolerance {
            return Err(SpectralError::SolverFailure(format!(
                "eigenpair at λ = {lam:.6} violates residual bound ({backward:.3e} > {:.3e})",
                cfg.eig_tolerance
            )));
        }
    }
    for pair in values.windows(2) {
        if pair[1] < pair[0] {
            return Err(SpectralError::SolverFailure("eigenvalues out of order".into()));
        }
    }

    // conservative flux recovery, one boundary factorization for all modes
    let bmass = BoundaryMass::new(mesh)
        .ok_or_else(|| SpectralError::SolverFailure("boundary mass not SPD".into()))?;
    let traces: Vec<Vec<f64>> = values
        .iter()
        .zip(&vectors)
        .map(|(lam, x)| flux_from_forms(mesh, &forms, &bmass, *lam, x))
        .collect();

    Ok(Spectrum {
        lambda_max: cfg.lambda_max,
        eigenvalues: values,
        traces,
        boundary: mesh.boundary_samples.clone(),
        domain_fingerprint: mesh.domain_fingerprint,
        max_residual,
        source: SpectrumSource::Fem {
            n_radial: mesh.n_radial,
            n_angular: mesh.n_angular,
        },
    })
}

/// Recovers ∂_n u at the boundary nodes by the conservative variational
/// flux: the weights g solve ∫ g·v ds = ∫ ∇u·∇v − λuv for every
/// boundary hat v.
pub fn boundary_flux(
    mesh: &Mesh,
    lambda: f64,
    interior_values: &[f64],
) -> Result<Vec<f64>, SpectralError> {
    if interior_values.len() != mesh.n_interior {
        return Err(SpectralError::DimensionMismatch(format!(
            "expected {} interior values, got {}",
            mesh.n_interior,
            interior_values.len()
        )));
    }
    let forms = assemble_forms(mesh);
    let bmass = BoundaryMass::new(mesh)
        .ok_or_else(|| SpectralError::SolverFailure("boundary mass not SPD".into()))?;
    Ok(flux_from_forms(mesh, &forms, &bmass, lambda, interior_values))
}

fn flux_from_forms(
    mesh: &Mesh,
    forms: &Forms,
    bmass: &BoundaryMass,
    lambda: f64,
    u_interior: &[f64],
) -> Vec<f64> {
    let dim = mesh.n_interior;
    let rhs: Vec<f64> = mesh
        .boundary_node_ids()
        .map(|b| {
            let mut acc = 0.0;
            for (c, v) in forms.stiffness.row(b) {
                if c < dim {
                    acc += v * u_interior[c];
                }
            }
            for (c, v) in forms.mass.row(b) {
                if c < dim {
                    acc -= lambda * v * u_interior[c];
                }
            }
            acc
        })
        .collect();
    bmass.solve(&rhs)
}

/// Analytic Dirichlet spectrum of the disk of the given radius: squared
/// Bessel zeros over R², multiplicity two for angular order m ≥ 1, with
/// exact normal-derivative traces at `n_boundary` uniform samples.
pub fn disk_oracle(radius: f64, lambda_max: f64, n_boundary: usize) -> Spectrum {
    assert!(radius > 0.0 && lambda_max > 0.0 && n_boundary >= 4);
    let x_max = lambda_max.sqrt() * radius;
    let mut modes: Vec<(f64, u32)> = Vec::new();
    let mut m = 0u32;
    while (m as f64) < x_max {
        let zeros = bessel::jn_zeros_below(m, x_max);
        if zeros.is_empty() {
            break;
        }
        for z in zeros {
            modes.push(((z / radius).powi(2), m));
        }
        m += 1;
    }
    modes.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

    let dphi = TAU / n_boundary as f64;
    let angles: Vec<f64> = (0..n_boundary).map(|j| dphi * j as f64).collect();
    let boundary: Vec<BoundarySample> = angles
        .iter()
        .map(|&phi| BoundarySample {
            angle: phi,
            point: [radius * phi.cos(), radius * phi.sin()],
            outward_normal: [phi.cos(), phi.sin()],
            curvature: 1.0 / radius,
            arclength_weight: radius * dphi,
        })
        .collect();

    let mut eigenvalues = Vec::new();
    let mut traces = Vec::new();
    for &(lambda, order) in &modes {
        if order == 0 {
            let v = -(lambda / PI).sqrt() / radius;
            eigenvalues.push(lambda);
            traces.push(vec![v; n_boundary]);
        } else {
            let amp = (2.0 * lambda / PI).sqrt() / radius;
            eigenvalues.push(lambda);
            traces.push(angles.iter().map(|&p| -amp * (order as f64 * p).cos()).collect());
            eigenvalues.push(lambda);
            traces.push(angles.iter().map(|&p| -amp * (order as f64 * p).sin()).collect());
        }
    }

    let mut fp = Fnv1a::new();
    fp.write(b"disk-oracle");
    fp.write_u64(radius.to_bits());
    fp.write_u64(n_boundary as u64);

    Spectrum {
        lambda_max,
        eigenvalues,
        traces,
        boundary,
        domain_fingerprint: fp.finish(),
        max_residual: 0.0,
        source: SpectrumSource::DiskOracle { radius },
    }
}

/// Separation-of-variables spectrum of the a×b rectangle:
/// λ = π²(m²/a² + n²/b²), sorted with multiplicity. Eigenvalues only;
/// used to validate counting-type functionals.
pub fn rectangle_oracle(a: f64, b: f64, lambda_max: f64) -> Spectrum {
    assert!(a > 0.0 && b > 0.0 && lambda_max > 0.0);
    let mut vals = Vec::new();
    let mut m = 1usize;
    while (PI * m as f64 / a).powi(2) < lambda_max {
        let mut n = 1usize;
        loop {
            let lam = (PI * m as f64 / a).powi(2) + (PI * n as f64 / b).powi(2);
            if lam >= lambda_max {
                break;
            }
            vals.push(lam);
            n += 1;
        }
        m += 1;
    }
    vals.sort_by(|x, y| x.partial_cmp(y).unwrap());

    let mut fp = Fnv1a::new();
    fp.write(b"rectangle-oracle");
    fp.write_u64(a.to_bits());
    fp.write_u64(b.to_bits());

    Spectrum {
        lambda_max,
        eigenvalues: vals,
        traces: Vec::new(),
        boundary: Vec::new(),
        domain_fingerprint: fp.finish(),
        max_residual: 0.0,
        source: SpectrumSource::RectangleOracle { a, b },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn disk_oracle_counts_and_values() {
        let s = disk_oracle(1.0, 30.0, 64);
        // j01², j11²×2, j21²×2 below 30
        assert_eq!(s.eigenvalues.len(), 5);
        assert!((s.eigenvalues[0] - 5.783185962946785).abs() < 1e-9);
        assert!((s.eigenvalues[1] - 14.681970642123893).abs() < 1e-9);
        assert!((s.eigenvalues[2] - 14.681970642123893).abs() < 1e-9);
        assert!((s.eigenvalues[3] - 26.374616427163247).abs() < 1e-9);
        assert!((s.eigenvalues[4] - 26.374616427163247).abs() < 1e-9);
    }

    #[test]
    fn disk_oracle_scaling_law() {
        let s1 = disk_oracle(1.0, 40.0, 64);
        let s2 = disk_oracle(2.0, 10.0, 64);
        for (a, b) in s1.eigenvalues.iter().zip(&s2.eigenvalues) {
            assert!((a / 4.0 - b).abs() < 1e-10);
        }
    }

    #[test]
    fn disk_oracle_traces_satisfy_rellich() {
        // ∫|∂_n u|² dσ = 2λ/R exactly for each normalized eigenfunction
        for radius in [1.0, 1.7] {
            let s = disk_oracle(radius, 30.0 / radius / radius, 128);
            for (lam, t) in s.eigenvalues.iter().zip(&s.traces) {
                let q: Vec<f64> = t.iter().map(|v| v * v).collect();
                let integral = s.boundary_integral(&q);
                assert!(
                    (integral - 2.0 * lam / radius).abs() / (2.0 * lam / radius) < 1e-12,
                    "R={radius}, λ={lam}"
                );
            }
        }
    }

    #[test]
    fn disk_oracle_empty_below_ground_state() {
        let s = disk_oracle(1.0, 4.0, 64);
        assert!(s.eigenvalues.is_empty());
    }

    #[test]
    fn rectangle_oracle_square_pi() {
        let s = rectangle_oracle(PI, PI, 11.0);
        let expect = [2.0, 5.0, 5.0, 8.0, 10.0, 10.0];
        assert_eq!(s.eigenvalues.len(), expect.len());
        for (a, e) in s.eigenvalues.iter().zip(expect) {
            assert!((a - e).abs() < 1e-12);
        }
    }

    #[test]
    fn rectangle_oracle_unit_square_ground_state() {
        let s = rectangle_oracle(1.0, 1.0, 25.0);
        assert!((s.eigenvalues[0] - 2.0 * PI * PI).abs() < 1e-12);
        let empty = rectangle_oracle(1.0, 1.0, 2.0 * PI * PI - 1e-9);
        assert!(empty.eigenvalues.is_empty());
    }

    #[test]
    fn eigenspace_grouping() {
        let mut s = disk_oracle(1.0, 30.0, 32);
        let groups = s.eigenspace_groups();
        assert_eq!(groups.len(), 3);
        assert_eq!(groups[0], 0..1);
        assert_eq!(groups[1], 1..3);
        assert_eq!(groups[2], 3..5);
        // separate eigenvalues beyond the gap split
        s.eigenvalues = vec![1.0, 1.0 + 1e-3];
        assert_eq!(s.eigenspace_groups().len(), 2);
    }

    #[test]
    fn spectrum_json_schema() {
        let s = disk_oracle(1.0, 10.0, 8);
        let text = s.to_json_string();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert!(v.get("lambda_max").is_some());
        assert_eq!(v["eigenvalues"].as_array().unwrap().len(), 1);
        assert_eq!(v["boundary_angles"].as_array().unwrap().len(), 8);
        assert_eq!(v["traces"].as_array().unwrap().len(), 1);
    }
}
