//! Eigensolver validation against closed-form oracles and between the
//! two solver routes.

use rflab_core::geometry::ConvexDomain2D;
use rflab_core::spectral::{
    boundary_flux, disk_oracle, mesh_domain, solve_dirichlet, SolverConfig, SpectralError,
};
use std::f64::consts::PI;

fn cfg(nr: usize, na: usize, lambda_max: f64) -> SolverConfig {
    SolverConfig { n_radial: nr, n_angular: na, lambda_max, ..SolverConfig::default() }
}

#[test]
fn disk_eigenvalues_against_bessel_zeros() {
    let d = ConvexDomain2D::disk(1.0, 256).unwrap();
    let oracle = disk_oracle(1.0, 55.0, 96);
    let mesh = mesh_domain(&d, &cfg(16, 64, 31.0)).unwrap();
    let spec = solve_dirichlet(&mesh, &cfg(16, 64, 31.0)).unwrap();
    // 5.78, 14.68 (x2), 26.37 (x2), 30.47 sit below 31
    assert_eq!(spec.eigenvalues.len(), 6);
    for (fem, exact) in spec.eigenvalues.iter().zip(&oracle.eigenvalues) {
        let rel = (fem - exact) / exact;
        assert!(rel > 0.0, "conforming elements bound eigenvalues from above");
        assert!(rel < 0.02, "λ error {rel:.4}");
    }
}

#[test]
fn dense_and_lanczos_routes_agree() {
    let d = ConvexDomain2D::ellipse_support(1.3, 1.0, 256).unwrap();
    let mesh = mesh_domain(&d, &cfg(16, 96, 30.0)).unwrap();
    // force each route via the dense_limit
    let dense_cfg = SolverConfig { dense_limit: 5000, ..cfg(16, 96, 30.0) };
    let lanczos_cfg = SolverConfig { dense_limit: 10, ..cfg(16, 96, 30.0) };
    let a = solve_dirichlet(&mesh, &dense_cfg).unwrap();
    let b = solve_dirichlet(&mesh, &lanczos_cfg).unwrap();
    assert_eq!(a.eigenvalues.len(), b.eigenvalues.len());
    for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
        assert!((x - y).abs() < 1e-7 * x, "dense {x} vs lanczos {y}");
    }
    // traces agree up to sign per eigenspace-stable modes; compare the
    // basis-invariant boundary density instead
    let qa = rflab_core::riesz::q_lambda(&a, 30.0).unwrap();
    let qb = rflab_core::riesz::q_lambda(&b, 30.0).unwrap();
    for (x, y) in qa.iter().zip(&qb) {
        assert!((x - y).abs() < 1e-5 * qa.iter().cloned().fold(0.0, f64::max));
    }
}

#[test]
fn rellich_identity_on_disk_and_ellipse() {
    for (domain, nr, na) in [
        (ConvexDomain2D::disk(1.0, 256).unwrap(), 24, 96),
        (
            ConvexDomain2D::ellipse_support(1.5, 1.0, 256)
                .unwrap()
                .rescale_to_area(PI)
                .unwrap(),
            40,
            160,
        ),
    ] {
        let c = cfg(nr, na, 55.0);
        let mesh = mesh_domain(&domain, &c).unwrap();
        let spec = solve_dirichlet(&mesh, &c).unwrap();
        assert!(spec.eigenvalues.len() >= 10);
        for (k, lam) in spec.eigenvalues.iter().enumerate().take(10) {
            let integral: f64 = spec.traces[k]
                .iter()
                .zip(&spec.boundary)
                .map(|(t, s)| {
                    let xdotn = s.point[0] * s.outward_normal[0] + s.point[1] * s.outward_normal[1];
                    xdotn * t * t * s.arclength_weight
                })
                .sum();
            let rel = (integral / (2.0 * lam) - 1.0).abs();
            assert!(rel < 0.02, "mode {k}: rellich off by {rel:.4}");
        }
    }
}

#[test]
fn disk_ground_state_flux_nearly_constant() {
    let d = ConvexDomain2D::disk(1.0, 256).unwrap();
    let c = cfg(24, 96, 10.0);
    let mesh = mesh_domain(&d, &c).unwrap();
    let spec = solve_dirichlet(&mesh, &c).unwrap();
    let lam = spec.eigenvalues[0];
    // |∂_n u|² ≈ λ/π, constant on the boundary
    let target = lam / PI;
    for t in &spec.traces[0] {
        assert!((t * t - target).abs() / target < 0.02);
    }
}

#[test]
fn flux_recovery_exactly_zero_rhs() {
    // the Hadamard integrand with V ≡ 0 is exactly zero whatever g is
    let d = ConvexDomain2D::disk(1.0, 256).unwrap();
    let c = cfg(12, 48, 10.0);
    let mesh = mesh_domain(&d, &c).unwrap();
    let spec = solve_dirichlet(&mesh, &c).unwrap();
    let integral: f64 = spec.traces[0]
        .iter()
        .zip(&spec.boundary)
        .map(|(g, s)| g * g * 0.0 * s.arclength_weight)
        .sum();
    assert_eq!(integral, 0.0);
}

#[test]
fn mesh_refinement_contracts_eigenvalue_error() {
    let d = ConvexDomain2D::disk(1.0, 256).unwrap();
    let oracle = disk_oracle(1.0, 35.0, 32);
    let mut errs = Vec::new();
    for (nr, na) in [(14, 56), (28, 112)] {
        let c = cfg(nr, na, 28.0);
        let mesh = mesh_domain(&d, &c).unwrap();
        let spec = solve_dirichlet(&mesh, &c).unwrap();
        let rel: f64 = spec
            .eigenvalues
            .iter()
            .zip(&oracle.eigenvalues)
            .map(|(f, e)| (f - e).abs() / e)
            .sum::<f64>()
            / spec.eigenvalues.len() as f64;
        errs.push(rel);
    }
    let ratio = errs[0] / errs[1];
    assert!(ratio > 2.5 && ratio < 6.5, "O(h²) contraction ratio {ratio:.2}");
}

#[test]
fn faber_krahn_direction() {
    // λ₁ grows from the ball among equal-area domains
    let ell = ConvexDomain2D::ellipse_support(1.5, 1.0, 256)
        .unwrap()
        .rescale_to_area(PI)
        .unwrap();
    let c = cfg(20, 96, 12.0);
    let mesh = mesh_domain(&ell, &c).unwrap();
    let spec = solve_dirichlet(&mesh, &c).unwrap();
    let ball = disk_oracle(1.0, 12.0, 16);
    assert!(spec.eigenvalues[0] > ball.eigenvalues[0]);
}

#[test]
fn cutoff_guard_fires() {
    let d = ConvexDomain2D::disk(1.0, 256).unwrap();
    let c = cfg(8, 32, 80.0);
    let mesh = mesh_domain(&d, &c).unwrap();
    assert!(matches!(
        solve_dirichlet(&mesh, &c),
        Err(SpectralError::CutoffTooHigh { .. })
    ));
}

#[test]
fn boundary_flux_dimension_check() {
    let d = ConvexDomain2D::disk(1.0, 256).unwrap();
    let c = cfg(8, 32, 10.0);
    let mesh = mesh_domain(&d, &c).unwrap();
    assert!(matches!(
        boundary_flux(&mesh, 5.78, &[0.0; 3]),
        Err(SpectralError::DimensionMismatch(_))
    ));
}

#[test]
fn empty_spectrum_below_ground_state() {
    let d = ConvexDomain2D::disk(1.0, 256).unwrap();
    let c = cfg(12, 48, 4.0);
    let mesh = mesh_domain(&d, &c).unwrap();
    let spec = solve_dirichlet(&mesh, &c).unwrap();
    assert!(spec.eigenvalues.is_empty());
}
