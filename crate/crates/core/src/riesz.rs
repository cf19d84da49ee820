//! Spectral functionals built from a spectrum and a domain: Riesz means
//! and the counting function, the boundary spectral density Q_Λ, the
//! correlation integral ∫Q_Λ(κ−κ̄)ds and its companion trace functional
//! ∫Q_Λ ds, the Berezin–Li–Yau bound, the two-term Weyl fit of Q_Λ,
//! Cesàro eigenvalue averages with their variational representation,
//! and the Hadamard perturbation check.

use crate::geometry::{ConvexDomain2D, GeometryError};
use crate::spectral::{
    disk_oracle, mesh_domain, solve_dirichlet, SolverConfig, SpectralError, Spectrum,
    SpectrumSource,
};
use std::f64::consts::{PI, TAU};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RieszError {
    #[error("cutoff {lambda} exceeds the spectrum cutoff {cutoff}; the sum would be incomplete")]
    CutoffExceeded { lambda: f64, cutoff: f64 },
    #[error("spectrum fingerprint does not match the domain")]
    GeometryMismatch,
    #[error("spectrum has {have} eigenvalues but {needed} are required")]
    InsufficientSpectrum { needed: usize, have: usize },
    #[error("spectrum carries no boundary traces")]
    MissingTraces,
    #[error("perturbed domain lost convexity")]
    ConvexityLost,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// ω₂, the area of the unit disk.
pub fn unit_ball_volume_2d() -> f64 {
    PI
}

/// Semiclassical constant L₂^cl = (ω_d/(2π)^d)·2/(d+2) at d = 2,
/// evaluated from the formula rather than as a decimal.
pub fn bly_constant_2d() -> f64 {
    let omega = unit_ball_volume_2d();
    omega / (TAU * TAU) * (2.0 / 4.0)
}

/// Pólya constant C_d = (2π)²·ω_d^{−2/d} at d = 2.
pub fn polya_constant_2d() -> f64 {
    let omega = unit_ball_volume_2d();
    TAU * TAU * omega.powf(-1.0)
}

fn check_cutoff(spectrum: &Spectrum, lambda: f64) -> Result<(), RieszError> {
    if lambda > spectrum.lambda_max * (1.0 + 1e-12) {
        return Err(RieszError::CutoffExceeded { lambda, cutoff: spectrum.lambda_max });
    }
    Ok(())
}

fn check_domain(domain: &ConvexDomain2D, spectrum: &Spectrum) -> Result<(), RieszError> {
    if matches!(spectrum.source, SpectrumSource::Fem { .. })
        && spectrum.domain_fingerprint != domain.fingerprint()
    {
        return Err(RieszError::GeometryMismatch);
    }
    Ok(())
}

/// Order-1 Riesz mean R_Λ = Σ(Λ − λ_k)₊.
pub fn riesz_mean(spectrum: &Spectrum, lambda: f64) -> Result<f64, RieszError> {
    check_cutoff(spectrum, lambda)?;
    Ok(spectrum
        .eigenvalues
        .iter()
        .map(|&l| (lambda - l).max(0.0))
        .sum())
}

/// Riesz mean and counting function tabulated on a grid, together with
/// the closed-form check of the identity R_Λ = ∫₀^Λ N(τ)dτ.
#[derive(Debug, Clone)]
pub struct RieszCurve {
    pub grid: Vec<f64>,
    pub riesz: Vec<f64>,
    pub counting: Vec<usize>,
    /// max |R_Λ − ∫N| over the grid; machine-size by construction.
    pub integral_identity_gap: f64,
}

pub fn riesz_curve(spectrum: &Spectrum, grid: &[f64]) -> Result<RieszCurve, RieszError> {
    if grid.is_empty() {
        return Err(RieszError::InvalidInput("empty Λ grid".into()));
    }
    for pair in grid.windows(2) {
        if pair[1] <= pair[0] {
            return Err(RieszError::InvalidInput("Λ grid must be ascending".into()));
        }
    }
    check_cutoff(spectrum, *grid.last().unwrap())?;

    let mut riesz = Vec::with_capacity(grid.len());
    let mut counting = Vec::with_capacity(grid.len());
    let mut gap: f64 = 0.0;
    for &lam in grid {
        let r: f64 = spectrum.eigenvalues.iter().map(|&l| (lam - l).max(0.0)).sum();
        let n = spectrum.count_below(lam);
        // piecewise-linear integral of the counting function:
        // ∫₀^Λ N = Σ_k over sorted eigenvalues of k·(interval length)
        let mut integral = 0.0;
        let mut prev = 0.0;
        for (k, &l) in spectrum.eigenvalues.iter().enumerate() {
            if l >= lam {
                break;
            }
            integral += k as f64 * (l - prev);
            prev = l;
        }
        integral += n as f64 * (lam - prev);
        gap = gap.max((r - integral).abs());
        riesz.push(r);
        counting.push(n);
    }
    Ok(RieszCurve { grid: grid.to_vec(), riesz, counting, integral_identity_gap: gap })
}

/// Boundary spectral density Q_Λ(x) = Σ_{λ_k<Λ}|∂_n u_k(x)|², summed by
/// eigenspace group so the result is basis-invariant.
pub fn q_lambda(spectrum: &Spectrum, lambda: f64) -> Result<Vec<f64>, RieszError> {
    check_cutoff(spectrum, lambda)?;
    if spectrum.traces.len() != spectrum.eigenvalues.len() {
        return Err(RieszError::MissingTraces);
    }
    let nb = spectrum.boundary.len();
    let mut q = vec![0.0; nb];
    for group in spectrum.eigenspace_groups() {
        let mean = spectrum.eigenvalues[group.clone()].iter().sum::<f64>()
            / group.len() as f64;
        if mean >= lambda {
            continue;
        }
        for k in group {
            for (j, t) in spectrum.traces[k].iter().enumerate() {
                q[j] += t * t;
            }
        }
    }
    Ok(q)
}

/// The correlation data at one (domain, Λ) pair.
#[derive(Debug, Clone)]
pub struct CorrelationReport {
    pub lambda: f64,
    /// I = ∫ Q_Λ (κ − κ̄) ds.
    pub correlation: f64,
    /// F = ∫ Q_Λ ds ≥ 0.
    pub trace_functional: f64,
    /// Quadrature boundary average of Q_Λ.
    pub q_bar: f64,
    /// κ − κ̄ at the boundary samples.
    pub f_samples: Vec<f64>,
    /// Q_Λ − Q̄ at the boundary samples.
    pub g_samples: Vec<f64>,
    /// dR_Λ/dt along the flow equals −I.
    pub dr_dt_boundary: f64,
}

pub fn correlation_integral(
    domain: &ConvexDomain2D,
    spectrum: &Spectrum,
    lambda: f64,
) -> Result<CorrelationReport, RieszError> {
    check_domain(domain, spectrum)?;
    let q = q_lambda(spectrum, lambda)?;
    let weights: Vec<f64> = spectrum.boundary.iter().map(|s| s.arclength_weight).collect();
    let kappa: Vec<f64> = spectrum.boundary.iter().map(|s| s.curvature).collect();
    let total_w: f64 = weights.iter().sum();
    let kappa_bar: f64 = kappa.iter().zip(&weights).map(|(k, w)| k * w).sum::<f64>() / total_w;
    let q_bar: f64 = q.iter().zip(&weights).map(|(q, w)| q * w).sum::<f64>() / total_w;

    let f_samples: Vec<f64> = kappa.iter().map(|k| k - kappa_bar).collect();
    let g_samples: Vec<f64> = q.iter().map(|v| v - q_bar).collect();
    let correlation: f64 = g_samples
        .iter()
        .zip(&f_samples)
        .zip(&weights)
        .map(|((g, f), w)| g * f * w)
        .sum();
    let trace_functional: f64 = q.iter().zip(&weights).map(|(q, w)| q * w).sum();

    Ok(CorrelationReport {
        lambda,
        correlation,
        trace_functional,
        q_bar,
        f_samples,
        g_samples,
        dr_dt_boundary: -correlation,
    })
}

/// Boundary trace functional F_Λ = ∫ Q_Λ ds.
pub fn trace_functional(
    domain: &ConvexDomain2D,
    spectrum: &Spectrum,
    lambda: f64,
) -> Result<f64, RieszError> {
    check_domain(domain, spectrum)?;
    let q = q_lambda(spectrum, lambda)?;
    Ok(spectrum.boundary_integral(&q))
}

/// Berezin–Li–Yau bound in d = 2: R_Λ ≤ |Ω|·Λ²/(8π).
#[derive(Debug, Clone, Copy)]
pub struct BlyReport {
    pub riesz: f64,
    pub bound: f64,
    /// bound − R_Λ; the theorem asserts this is nonnegative.
    pub gap: f64,
}

/// The right-hand side L₂^cl·|Ω|·Λ² of the bound.
pub fn bly_bound(area: f64, lambda: f64) -> f64 {
    bly_constant_2d() * area * lambda * lambda
}

pub fn bly_check(
    domain: &ConvexDomain2D,
    spectrum: &Spectrum,
    lambda: f64,
) -> Result<BlyReport, RieszError> {
    check_domain(domain, spectrum)?;
    let riesz = riesz_mean(spectrum, lambda)?;
    let bound = bly_bound(domain.area(), lambda);
    Ok(BlyReport { riesz, bound, gap: bound - riesz })
}

/// Classical Pólya threshold λ_k^cl = C₂·k/|Ω| = 4πk/|Ω|.
pub fn polya_classical(k: usize, area: f64) -> f64 {
    polya_constant_2d() * k as f64 / area
}

/// Cesàro average of the first k eigenvalues with its variational
/// representation sup_Λ(Λ − R_Λ/k).
#[derive(Debug, Clone)]
pub struct CesaroReport {
    pub k: usize,
    /// A(k) = (1/k)Σ_{j≤k} λ_j.
    pub a_mean: f64,
    /// sup over the probe grid of Λ − R_Λ/k.
    pub a_sup: f64,
    /// Λ − R_Λ/k evaluated exactly at Λ = λ_k; equals a_mean.
    pub a_at_lambda_k: f64,
    /// Equal-area ball average, when requested.
    pub a_ball: Option<f64>,
    /// λ_k^cl for the same area, when requested.
    pub polya_classical: Option<f64>,
}

pub fn cesaro(spectrum: &Spectrum, k: usize) -> Result<CesaroReport, RieszError> {
    if k == 0 {
        return Err(RieszError::InvalidInput("k must be at least 1".into()));
    }
    // λ_{k+1} must be visible so the maximizing plateau is in range
    if spectrum.eigenvalues.len() < k + 1 {
        return Err(RieszError::InsufficientSpectrum {
            needed: k + 1,
            have: spectrum.eigenvalues.len(),
        });
    }
    let lam = &spectrum.eigenvalues;
    let a_mean = lam[..k].iter().sum::<f64>() / k as f64;

    let phi = |cut: f64| -> f64 {
        let r: f64 = lam.iter().map(|&l| (cut - l).max(0.0)).sum();
        cut - r / k as f64
    };

    let mut a_sup = f64::NEG_INFINITY;
    let probes = lam[..=k].iter().cloned().chain(
        lam[..=k]
            .windows(2)
            .map(|p| 0.5 * (p[0] + p[1]))
            .collect::<Vec<_>>(),
    );
    for cut in probes {
        if cut > 0.0 {
            a_sup = a_sup.max(phi(cut));
        }
    }
    let a_at_lambda_k = phi(lam[k - 1]);
    a_sup = a_sup.max(a_at_lambda_k);

    Ok(CesaroReport {
        k,
        a_mean,
        a_sup,
        a_at_lambda_k,
        a_ball: None,
        polya_classical: None,
    })
}

/// Cesàro report with the equal-area ball comparison filled in from the
/// analytic disk spectrum.
pub fn cesaro_with_ball(
    spectrum: &Spectrum,
    k: usize,
    area: f64,
) -> Result<CesaroReport, RieszError> {
    if !(area > 0.0) {
        return Err(RieszError::InvalidInput(format!("area must be positive, got {area}")));
    }
    let mut report = cesaro(spectrum, k)?;
    let radius = (area / PI).sqrt();
    // grow the cutoff until the ball has k+1 eigenvalues
    let mut cutoff = polya_classical(k + 2, area).max(12.0 / (radius * radius));
    let ball = loop {
        let b = disk_oracle(radius, cutoff, 8);
        if b.eigenvalues.len() > k {
            break b;
        }
        cutoff *= 1.6;
    };
    report.a_ball = Some(ball.eigenvalues[..k].iter().sum::<f64>() / k as f64);
    report.polya_classical = Some(polya_classical(k, area));
    Ok(report)
}

/// Two-term Weyl fit of the boundary density:
/// Q_Λ(x) ≈ A₂·Λ² + B₂·κ(x)·Λ^{3/2}, the d = 2 exponents.
#[derive(Debug, Clone)]
pub struct WeylFit {
    pub a2: f64,
    /// None when κ is numerically constant (disk): the curvature
    /// coefficient is unidentifiable and only flagged.
    pub b2: Option<f64>,
    pub degenerate: bool,
    pub lambda_grid: Vec<f64>,
    /// Weighted sample correlation between g = Q−Q̄ and f = κ−κ̄, one
    /// entry per grid cutoff.
    pub gf_correlations: Vec<f64>,
    /// Correlation at the top cutoff.
    pub gf_correlation_top: f64,
    pub residual_rms: f64,
}

pub fn weyl_fit(
    domain: &ConvexDomain2D,
    spectrum: &Spectrum,
    lambdas: &[f64],
) -> Result<WeylFit, RieszError> {
    if lambdas.len() < 3 {
        return Err(RieszError::InvalidInput(
            "weyl_fit needs at least 3 cutoffs".into(),
        ));
    }
    for pair in lambdas.windows(2) {
        if pair[1] <= pair[0] {
            return Err(RieszError::InvalidInput("Λ grid must be ascending".into()));
        }
    }
    check_domain(domain, spectrum)?;
    check_cutoff(spectrum, *lambdas.last().unwrap())?;

    let weights: Vec<f64> = spectrum.boundary.iter().map(|s| s.arclength_weight).collect();
    let kappa: Vec<f64> = spectrum.boundary.iter().map(|s| s.curvature).collect();
    let total_w: f64 = weights.iter().sum();
    let kappa_bar = kappa.iter().zip(&weights).map(|(k, w)| k * w).sum::<f64>() / total_w;
    let kappa_spread = kappa.iter().cloned().fold(f64::MIN, f64::max)
        - kappa.iter().cloned().fold(f64::MAX, f64::min);
    let degenerate = kappa_spread <= 1e-6 * kappa_bar.abs();

    let mut qs: Vec<(f64, Vec<f64>)> = Vec::with_capacity(lambdas.len());
    for &lam in lambdas {
        let q = q_lambda(spectrum, lam)?;
        qs.push((lam, q));
    }
    // On the disk the curvature term is unidentifiable and the Riesz
    // cluster fluctuations of the low grid points would poison a joint
    // fit, so A₂ comes from the leading-order estimator Q̄/Λ² at the top
    // cutoff, where the remainder is smallest. Off the disk the spatial
    // κ-variation identifies both coefficients; fit by weighted least
    // squares over all (x, Λ) samples.
    let (a2, c2) = if degenerate {
        let (lam, q) = qs.last().unwrap();
        let q_bar = q.iter().zip(&weights).map(|(q, w)| q * w).sum::<f64>() / total_w;
        (q_bar / (lam * lam), 0.0)
    } else {
        let mut s11 = 0.0;
        let mut s12 = 0.0;
        let mut s22 = 0.0;
        let mut r1 = 0.0;
        let mut r2 = 0.0;
        for (lam, q) in &qs {
            let u1 = lam * lam;
            for (j, &qv) in q.iter().enumerate() {
                let u2 = kappa[j] * lam.powf(1.5);
                let w = weights[j];
                s11 += w * u1 * u1;
                s12 += w * u1 * u2;
                s22 += w * u2 * u2;
                r1 += w * u1 * qv;
                r2 += w * u2 * qv;
            }
        }
        let det = s11 * s22 - s12 * s12;
        if det.abs() <= 1e-14 * s11 * s22 {
            return Err(RieszError::InvalidInput(
                "degenerate normal equations in the Weyl fit".into(),
            ));
        }
        ((r1 * s22 - r2 * s12) / det, (s11 * r2 - s12 * r1) / det)
    };

    let mut residual_sq = 0.0;
    let mut gf_correlations = Vec::with_capacity(lambdas.len());
    for (lam, q) in &qs {
        let q_bar = q.iter().zip(&weights).map(|(q, w)| q * w).sum::<f64>() / total_w;
        let mut sgf = 0.0;
        let mut sgg = 0.0;
        let mut sff = 0.0;
        for (j, &qv) in q.iter().enumerate() {
            let u2 = if degenerate { 0.0 } else { kappa[j] * lam.powf(1.5) };
            let fit = a2 * lam * lam + c2 * u2;
            residual_sq += weights[j] * (qv - fit).powi(2);
            let g = qv - q_bar;
            let f = kappa[j] - kappa_bar;
            sgf += weights[j] * g * f;
            sgg += weights[j] * g * g;
            sff += weights[j] * f * f;
        }
        let denom = (sgg * sff).sqrt();
        gf_correlations.push(if denom > 1e-300 { sgf / denom } else { 0.0 });
    }
    let residual_rms = (residual_sq / (total_w * lambdas.len() as f64)).sqrt();

    Ok(WeylFit {
        a2,
        b2: (!degenerate).then_some(c2),
        degenerate,
        lambda_grid: lambdas.to_vec(),
        gf_correlation_top: *gf_correlations.last().unwrap(),
        gf_correlations,
        residual_rms,
    })
}

/// Boundary normal velocity fields for perturbation checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormalVelocity {
    Uniform(f64),
    HarmonicCos { m: u32, amplitude: f64 },
    HarmonicSin { m: u32, amplitude: f64 },
}

impl NormalVelocity {
    pub fn eval(&self, theta: f64) -> f64 {
        match *self {
            NormalVelocity::Uniform(v) => v,
            NormalVelocity::HarmonicCos { m, amplitude } => amplitude * (m as f64 * theta).cos(),
            NormalVelocity::HarmonicSin { m, amplitude } => amplitude * (m as f64 * theta).sin(),
        }
    }
}

/// Per-eigenspace comparison of the finite-difference eigenvalue
/// derivative against the boundary integral −∫|∂_n u|²V ds.
#[derive(Debug, Clone)]
pub struct HadamardComparison {
    pub group: std::ops::Range<usize>,
    /// Mean eigenvalue of the group.
    pub lambda: f64,
    /// Centered difference of the group eigenvalue sum.
    pub fd_derivative: f64,
    /// −Σ_{k∈group} ∫|∂_n u_k|² V ds.
    pub boundary_integral: f64,
    pub rel_error: f64,
}

/// Compares (λ(Ω_{+δt}) − λ(Ω_{−δt}))/(2δt) with the Hadamard boundary
/// integral, per eigenspace group of the base spectrum. The perturbed
/// domains have support h ± δt·V, valid because the normal speed at
/// fixed normal angle is ∂_t h.
pub fn hadamard_check(
    domain: &ConvexDomain2D,
    spectrum: &Spectrum,
    velocity: &NormalVelocity,
    dt: f64,
    cfg: &SolverConfig,
) -> Result<Vec<HadamardComparison>, RieszError> {
    if !(dt > 0.0) {
        return Err(RieszError::InvalidInput(format!("dt must be positive, got {dt}")));
    }
    check_domain(domain, spectrum)?;
    if spectrum.traces.len() != spectrum.eigenvalues.len() {
        return Err(RieszError::MissingTraces);
    }

    let perturb = |sign: f64| -> Result<Spectrum, RieszError> {
        let n = domain.grid_size();
        let h: Vec<f64> = domain
            .support_values()
            .iter()
            .enumerate()
            .map(|(j, &v)| v + sign * dt * velocity.eval(TAU * j as f64 / n as f64))
            .collect();
        let d = ConvexDomain2D::from_support_samples(h).map_err(|e| match e {
            GeometryError::NonConvex { .. } | GeometryError::NonPositive { .. } => {
                RieszError::ConvexityLost
            }
            other => RieszError::Spectral(SpectralError::Geometry(other)),
        })?;
        let mesh = mesh_domain(&d, cfg)?;
        Ok(solve_dirichlet(&mesh, cfg)?)
    };
    let plus = perturb(1.0)?;
    let minus = perturb(-1.0)?;

    let usable = plus.eigenvalues.len().min(minus.eigenvalues.len());
    let mut out = Vec::new();
    for group in spectrum.eigenspace_groups() {
        if group.end > usable {
            break;
        }
        let sum_plus: f64 = plus.eigenvalues[group.clone()].iter().sum();
        let sum_minus: f64 = minus.eigenvalues[group.clone()].iter().sum();
        let fd = (sum_plus - sum_minus) / (2.0 * dt);

        let mut bi = 0.0;
        for k in group.clone() {
            for (t, s) in spectrum.traces[k].iter().zip(&spectrum.boundary) {
                bi -= t * t * velocity.eval(s.angle) * s.arclength_weight;
            }
        }
        let lambda = spectrum.eigenvalues[group.clone()].iter().sum::<f64>()
            / group.len() as f64;
        let denom = bi.abs().max(fd.abs()).max(1e-300);
        out.push(HadamardComparison {
            group,
            lambda,
            fd_derivative: fd,
            boundary_integral: bi,
            rel_error: (fd - bi).abs() / denom,
        });
    }
    Ok(out)
}

/// Spec-pinned per-Λ report: one CSV row per cutoff.
pub fn report_csv(
    domain: &ConvexDomain2D,
    spectrum: &Spectrum,
    lambdas: &[f64],
) -> Result<String, RieszError> {
    let mut out = String::from("lambda,riesz,counting,bound_bly,gap,I,F,Q_bar\n");
    for &lam in lambdas {
        let corr = correlation_integral(domain, spectrum, lam)?;
        let bly = bly_check(domain, spectrum, lam)?;
        let n = spectrum.count_below(lam);
        out.push_str(&format!(
            "{:.16e},{:.16e},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
            lam, bly.riesz, n, bly.bound, bly.gap, corr.correlation, corr.trace_functional,
            corr.q_bar
        ));
    }
    Ok(out)
}
