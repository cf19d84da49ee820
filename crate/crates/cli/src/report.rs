//! Check results with explicit margins and noise floors.
//!
//! Every pass/fail carries its numerical margin and the two-grid noise
//! floor it was judged against — no bare booleans in any report.

use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    /// The measured quantity the check is about.
    pub value: f64,
    /// The comparison point (tolerance, bound, or reference value).
    pub threshold: f64,
    /// Signed distance by which the check clears (negative = failed).
    pub margin: f64,
    /// Two-grid numerical noise floor for the value, 0 when exact.
    pub noise_floor: f64,
}

impl CheckResult {
    /// `err` must not exceed `tol`.
    pub fn within_tol(name: impl Into<String>, err: f64, tol: f64, noise_floor: f64) -> Self {
        Self {
            name: name.into(),
            passed: err <= tol,
            value: err,
            threshold: tol,
            margin: tol - err,
            noise_floor,
        }
    }

    /// `value` must be negative with magnitude above the noise floor.
    pub fn negative_beyond_noise(name: impl Into<String>, value: f64, noise_floor: f64) -> Self {
        Self {
            name: name.into(),
            passed: value < 0.0 && -value > noise_floor,
            value,
            threshold: 0.0,
            margin: -value - noise_floor,
            noise_floor,
        }
    }

    /// `value` must exceed `reference` by more than the noise floor.
    pub fn above_beyond_noise(
        name: impl Into<String>,
        value: f64,
        reference: f64,
        noise_floor: f64,
    ) -> Self {
        Self {
            name: name.into(),
            passed: value - reference > noise_floor,
            value,
            threshold: reference,
            margin: value - reference - noise_floor,
            noise_floor,
        }
    }

    /// |value| must stay inside the noise floor (null checks).
    pub fn null_within_noise(name: impl Into<String>, value: f64, noise_floor: f64) -> Self {
        Self {
            name: name.into(),
            passed: value.abs() <= noise_floor,
            value,
            threshold: 0.0,
            margin: noise_floor - value.abs(),
            noise_floor,
        }
    }

    /// `value` must not exceed `bound` (one-sided bound checks); the
    /// floor widens the report, not the verdict.
    pub fn below_bound(name: impl Into<String>, value: f64, bound: f64, noise_floor: f64) -> Self {
        Self {
            name: name.into(),
            passed: value <= bound,
            value,
            threshold: bound,
            margin: bound - value,
            noise_floor,
        }
    }
}

/// Two-grid error estimate under the O(h²) convergence model:
/// err(primary) ≈ |v_primary − v_partner| / (r² − 1), r = h ratio.
/// The floor is three times that estimate.
pub fn noise_floor(v_primary: f64, v_partner: f64, h_ratio: f64) -> f64 {
    let denom = (h_ratio * h_ratio - 1.0).max(0.25);
    3.0 * (v_primary - v_partner).abs() / denom
}

/// 17-significant-digit decimal, the pinned CSV number format.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn check_constructors() {
        let c = CheckResult::within_tol("a", 0.01, 0.02, 0.001);
        assert!(c.passed && (c.margin - 0.01).abs() < 1e-15);
        let c = CheckResult::negative_beyond_noise("b", -1.0, 0.1);
        assert!(c.passed && (c.margin - 0.9).abs() < 1e-15);
        let c = CheckResult::negative_beyond_noise("c", -0.05, 0.1);
        assert!(!c.passed);
        let c = CheckResult::null_within_noise("d", 0.02, 0.1);
        assert!(c.passed);
        let c = CheckResult::above_beyond_noise("e", 1.0, 0.5, 0.1);
        assert!(c.passed && (c.margin - 0.4).abs() < 1e-15);
    }

    #[test]
    fn floor_model() {
        // with ratio 2 the floor is exactly the two-grid difference
        assert!((noise_floor(1.0, 1.3, 2.0) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn fmt17_round_trips() {
        for &v in &[std::f64::consts::PI, 1.0 / 3.0, 6.02e23, -1.25e-7] {
            assert_eq!(fmt17(v).parse::<f64>().unwrap(), v);
        }
    }
}
