//! Geometry checked against independent quadrature oracles and
//! property-based invariants.

use proptest::prelude::*;
use rflab_core::geometry::ConvexDomain2D;
use std::f64::consts::{PI, TAU};

/// Adaptive Simpson quadrature, the test-side oracle for arclength and
/// area integrals (independent of the module's spectral quadrature).
fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b))
    }
    fn recurse(
        f: &impl Fn(f64) -> f64,
        a: f64,
        b: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let left = simpson(f, a, m);
        let right = simpson(f, m, b);
        // the first levels always split: periodic integrands can fool
        // the error estimate through symmetric cancellation
        let converged = depth < 34 && (left + right - whole).abs() < 15.0 * tol;
        if depth == 0 || converged {
            left + right + (left + right - whole) / 15.0
        } else {
            recurse(f, a, m, left, tol / 2.0, depth - 1)
                + recurse(f, m, b, right, tol / 2.0, depth - 1)
        }
    }
    recurse(f, a, b, simpson(f, a, b), tol, 40)
}

fn ellipse_arclength(a: f64, b: f64) -> f64 {
    // parametrize x = a cos t, y = b sin t
    adaptive_simpson(
        &|t: f64| ((a * t.sin()).powi(2) + (b * t.cos()).powi(2)).sqrt(),
        0.0,
        TAU,
        1e-13,
    )
}

#[test]
fn ellipse_perimeter_matches_arclength_quadrature() {
    let d = ConvexDomain2D::ellipse_support(2.0, 1.0, 256).unwrap();
    let oracle = ellipse_arclength(2.0, 1.0);
    assert!((oracle - 9.688448220547676).abs() < 1e-9, "oracle sanity");
    assert!(
        (d.perimeter() - oracle).abs() < 1e-9,
        "support-function perimeter {} vs quadrature {}",
        d.perimeter(),
        oracle
    );
}

#[test]
fn aspect_144_deficit_value() {
    let d = ConvexDomain2D::ellipse_support(1.2, 5.0 / 6.0, 256).unwrap();
    let length = ellipse_arclength(1.2, 5.0 / 6.0);
    let area = PI * 1.2 * (5.0 / 6.0);
    let deficit_oracle = length * length / (4.0 * PI * area) - 1.0;
    let rep = d.geometry_report();
    assert!((deficit_oracle - 0.050519694173225).abs() < 1e-9);
    assert!((rep.deficit - deficit_oracle).abs() < 1e-9);
    assert!((rep.area - area).abs() < 1e-10);
}

#[test]
fn support_area_matches_quadrature_for_perturbed_disk() {
    // A = ½∫(h² − h'²)dθ evaluated by adaptive Simpson on the analytic
    // form, against the module's grid quadrature
    let amp = 0.1;
    let h = |t: f64| 1.0 + amp * (3.0 * t).cos();
    let dh = |t: f64| -3.0 * amp * (3.0 * t).sin();
    let oracle = adaptive_simpson(
        &|t: f64| 0.5 * (h(t) * h(t) - dh(t) * dh(t)),
        0.0,
        TAU,
        1e-13,
    );
    let d = ConvexDomain2D::from_fourier(&[1.0, 0.0, 0.0, amp], &[], 256).unwrap();
    assert!((d.area() - oracle).abs() < 1e-11);
}

#[test]
fn deficit_zero_iff_circle() {
    let circle = ConvexDomain2D::disk(1.3, 128).unwrap();
    assert!(circle.geometry_report().deficit < 1e-10);
    // translated circle still has zero deficit (m=1 does not bend)
    let translated = circle.translated(0.2, -0.1);
    assert!(translated.geometry_report().deficit < 1e-10);
    // any higher harmonic makes it positive
    let bumped = ConvexDomain2D::from_fourier(&[1.0, 0.0, 0.02], &[], 128).unwrap();
    assert!(bumped.geometry_report().deficit > 1e-6);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Valid perturbed disks: deficit nonnegative, total turning 2π,
    /// rescale exact, and rotation leaves the scalars unchanged.
    #[test]
    fn scalar_invariants(
        a2 in -0.12f64..0.12,
        a3 in -0.08f64..0.08,
        b2 in -0.12f64..0.12,
        b3 in -0.08f64..0.08,
        shift in 0usize..256,
    ) {
        let d = match ConvexDomain2D::from_fourier(
            &[1.0, 0.0, a2, a3],
            &[0.0, 0.0, b2, b3],
            256,
        ) {
            Ok(d) => d,
            Err(_) => return Ok(()), // rejected as nonconvex: fine
        };
        let rep = d.geometry_report();
        prop_assert!(rep.deficit >= -1e-13);

        let turning: f64 = d
            .boundary_samples(256)
            .unwrap()
            .iter()
            .map(|s| s.curvature * s.arclength_weight)
            .sum();
        prop_assert!((turning - TAU).abs() < 1e-9);

        let rescaled = d.rescale_to_area(PI).unwrap();
        prop_assert!((rescaled.area() - PI).abs() / PI < 1e-12);

        let rotated = d.rotate_grid(shift);
        let rrep = rotated.geometry_report();
        prop_assert!((rrep.area - rep.area).abs() < 1e-10 * rep.area);
        prop_assert!((rrep.perimeter - rep.perimeter).abs() < 1e-10 * rep.perimeter);
        prop_assert!((rrep.kappa_bar - rep.kappa_bar).abs() < 1e-10);
    }

    /// Translation harmonics change neither area nor perimeter nor the
    /// recentred ball distance.
    #[test]
    fn translation_invariance(dx in -0.3f64..0.3, dy in -0.3f64..0.3) {
        let d = ConvexDomain2D::from_fourier(&[1.0, 0.0, 0.05], &[], 128).unwrap();
        let t = d.translated(dx, dy);
        prop_assert!((t.area() - d.area()).abs() < 1e-12);
        prop_assert!((t.perimeter() - d.perimeter()).abs() < 1e-12);
        prop_assert!((t.ball_distance() - d.ball_distance()).abs() < 1e-10);
    }

    /// JSON round trip is bit-exact for arbitrary valid domains.
    #[test]
    fn json_round_trip(a2 in -0.1f64..0.1, b3 in -0.06f64..0.06) {
        let d = match ConvexDomain2D::from_fourier(
            &[1.0, 0.0, a2], &[0.0, 0.0, 0.0, b3], 128,
        ) {
            Ok(d) => d,
            Err(_) => return Ok(()),
        };
        let back = ConvexDomain2D::from_json_str(&d.to_json_string()).unwrap();
        prop_assert_eq!(d.support_values(), back.support_values());
    }
}
