//! Smooth convex planar domains represented by support functions.
//!
//! A domain is the set with support function h(θ) sampled on a uniform
//! angular grid. The boundary point with outward normal (cos θ, sin θ) is
//! x(θ) = h·n + h'·t, the radius of curvature is w = h + h'', and the
//! domain is convex exactly when w > 0 everywhere. Derivatives are
//! spectral (trigonometric interpolation), so they are exact for
//! band-limited h and reproducible bit-for-bit from the samples.

use crate::fourier::{is_power_of_two, FourierSeries};
use crate::hash::Fnv1a;
use std::f64::consts::{PI, TAU};
use thiserror::Error;

/// Smallest admissible grid size; powers of two keep the transform exact.
pub const MIN_GRID: usize = 64;

/// Relative floor on the radius of curvature: domains with
/// min w ≤ RADIUS_OF_CURVATURE_TOL · max w are rejected, guarding the
/// κ = 1/w singularity.
pub const RADIUS_OF_CURVATURE_TOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("support function is not positive (min h = {min_h:.3e})")]
    NonPositive { min_h: f64 },
    #[error("domain is not convex (min w = {min_w:.3e}, max w = {max_w:.3e})")]
    NonConvex { min_w: f64, max_w: f64 },
    #[error("grid size {n} is not a power of two >= {MIN_GRID}")]
    GridSize { n: usize },
    #[error("sample count {m} does not divide grid size {n}")]
    IncompatibleSampling { m: usize, n: usize },
    #[error("non-finite support value at index {index}")]
    NonFinite { index: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("malformed domain JSON: {0}")]
    Json(String),
}

/// One boundary point with the data every boundary quadrature needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundarySample {
    /// Normal angle θ (the support parameter, not the polar angle).
    pub angle: f64,
    pub point: [f64; 2],
    pub outward_normal: [f64; 2],
    /// κ(θ) = 1/w(θ).
    pub curvature: f64,
    /// ds ≈ w(θ)·Δθ; the weights of one sampling sum to the perimeter.
    pub arclength_weight: f64,
}

/// Scalar diagnostics of a domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometryReport {
    pub area: f64,
    pub perimeter: f64,
    /// Boundary average of the curvature, 2π/L.
    pub kappa_bar: f64,
    /// Isoperimetric deficit L²/(4πA) − 1, zero exactly for disks.
    pub deficit: f64,
}

/// Convex planar domain sampled as h(θ_j), θ_j = 2πj/N.
///
/// Immutable after construction; all operations are pure functions, so
/// values can be shared freely across threads.
#[derive(Debug, Clone)]
pub struct ConvexDomain2D {
    h: Vec<f64>,
    dh: Vec<f64>,
    ddh: Vec<f64>,
    series: FourierSeries,
}

impl ConvexDomain2D {
    /// Builds a domain from support samples, checking positivity and
    /// convexity. This is the single validation path used by every
    /// constructor.
    pub fn from_support_samples(h: Vec<f64>) -> Result<Self, GeometryError> {
        let n = h.len();
        if !is_power_of_two(n) || n < MIN_GRID {
            return Err(GeometryError::GridSize { n });
        }
        if let Some(index) = h.iter().position(|v| !v.is_finite()) {
            return Err(GeometryError::NonFinite { index });
        }
        let min_h = h.iter().cloned().fold(f64::INFINITY, f64::min);
        if min_h <= 0.0 {
            return Err(GeometryError::NonPositive { min_h });
        }
        let series = FourierSeries::from_samples(&h);
        let dh = series.derivative();
        let ddh = series.second_derivative();
        let mut min_w = f64::INFINITY;
        let mut max_w = f64::NEG_INFINITY;
        for j in 0..n {
            let w = h[j] + ddh[j];
            min_w = min_w.min(w);
            max_w = max_w.max(w);
        }
        if min_w <= RADIUS_OF_CURVATURE_TOL * max_w {
            return Err(GeometryError::NonConvex { min_w, max_w });
        }
        Ok(Self { h, dh, ddh, series })
    }

    /// Domain with h(θ) = Σ cos_coeffs[m]·cos mθ + sin_coeffs[m]·sin mθ.
    pub fn from_fourier(
        cos_coeffs: &[f64],
        sin_coeffs: &[f64],
        n: usize,
    ) -> Result<Self, GeometryError> {
        if !is_power_of_two(n) || n < MIN_GRID {
            return Err(GeometryError::GridSize { n });
        }
        if cos_coeffs.len() > n / 2 || sin_coeffs.len() > n / 2 {
            return Err(GeometryError::InvalidParameter(format!(
                "coefficient count exceeds resolvable modes (n/2 = {})",
                n / 2
            )));
        }
        let h = (0..n)
            .map(|j| {
                let t = TAU * j as f64 / n as f64;
                let mut v = 0.0;
                for (m, &a) in cos_coeffs.iter().enumerate() {
                    v += a * (m as f64 * t).cos();
                }
                for (m, &b) in sin_coeffs.iter().enumerate() {
                    v += b * (m as f64 * t).sin();
                }
                v
            })
            .collect();
        Self::from_support_samples(h)
    }

    /// Disk of the given radius centered at the origin.
    pub fn disk(radius: f64, n: usize) -> Result<Self, GeometryError> {
        if radius <= 0.0 || !radius.is_finite() {
            return Err(GeometryError::InvalidParameter(format!(
                "disk radius must be positive, got {radius}"
            )));
        }
        Self::from_support_samples(vec![radius; n.max(1)])
    }

    /// Axis-aligned ellipse with semi-axes a, b:
    /// h(θ) = sqrt(a²cos²θ + b²sin²θ).
    pub fn ellipse_support(a: f64, b: f64, n: usize) -> Result<Self, GeometryError> {
        if a <= 0.0 || b <= 0.0 || !a.is_finite() || !b.is_finite() {
            return Err(GeometryError::InvalidParameter(format!(
                "ellipse semi-axes must be positive, got a={a}, b={b}"
            )));
        }
        let h = (0..n.max(1))
            .map(|j| {
                let t = TAU * j as f64 / n as f64;
                (a * a * t.cos().powi(2) + b * b * t.sin().powi(2)).sqrt()
            })
            .collect();
        Self::from_support_samples(h)
    }

    pub fn grid_size(&self) -> usize {
        self.h.len()
    }

    pub fn support_values(&self) -> &[f64] {
        &self.h
    }

    pub fn support_derivative(&self) -> &[f64] {
        &self.dh
    }

    /// Radius of curvature w = h + h'' at the grid angles.
    pub fn radius_of_curvature(&self) -> Vec<f64> {
        (0..self.h.len()).map(|j| self.h[j] + self.ddh[j]).collect()
    }

    /// min_j w(θ_j), the stability-critical quantity for the flow.
    pub fn min_radius_of_curvature(&self) -> f64 {
        (0..self.h.len())
            .map(|j| self.h[j] + self.ddh[j])
            .fold(f64::INFINITY, f64::min)
    }

    pub fn fourier(&self) -> &FourierSeries {
        &self.series
    }

    /// Area A = ½∫(h² − h'²)dθ by the grid trapezoid rule (spectrally
    /// accurate for periodic integrands).
    pub fn area(&self) -> f64 {
        let n = self.h.len();
        let mut s = 0.0;
        for j in 0..n {
            s += self.h[j] * self.h[j] - self.dh[j] * self.dh[j];
        }
        PI * s / n as f64
    }

    /// Perimeter L = ∫h dθ.
    pub fn perimeter(&self) -> f64 {
        let n = self.h.len();
        let s: f64 = self.h.iter().sum();
        TAU * s / n as f64
    }

    pub fn geometry_report(&self) -> GeometryReport {
        let area = self.area();
        let perimeter = self.perimeter();
        GeometryReport {
            area,
            perimeter,
            kappa_bar: TAU / perimeter,
            deficit: perimeter * perimeter / (4.0 * PI * area) - 1.0,
        }
    }

    /// Uniform boundary sampling at m angles; m must divide the grid.
    pub fn boundary_samples(&self, m: usize) -> Result<Vec<BoundarySample>, GeometryError> {
        let n = self.h.len();
        if m == 0 || n % m != 0 {
            return Err(GeometryError::IncompatibleSampling { m, n });
        }
        let stride = n / m;
        let dtheta = TAU / m as f64;
        Ok((0..m)
            .map(|k| {
                let j = k * stride;
                self.sample_from_grid(j, dtheta)
            })
            .collect())
    }

    /// Boundary sample at an arbitrary angle by trigonometric
    /// interpolation; at grid angles this matches `boundary_samples`.
    pub fn boundary_sample_at(&self, theta: f64, dtheta: f64) -> BoundarySample {
        let (h, dh, ddh) = self.series.eval(theta);
        Self::make_sample(theta, h, dh, h + ddh, dtheta)
    }

    fn sample_from_grid(&self, j: usize, dtheta: f64) -> BoundarySample {
        let n = self.h.len();
        let theta = TAU * j as f64 / n as f64;
        let w = self.h[j] + self.ddh[j];
        Self::make_sample(theta, self.h[j], self.dh[j], w, dtheta)
    }

    fn make_sample(theta: f64, h: f64, dh: f64, w: f64, dtheta: f64) -> BoundarySample {
        let (c, s) = (theta.cos(), theta.sin());
        BoundarySample {
            angle: theta,
            point: [h * c - dh * s, h * s + dh * c],
            outward_normal: [c, s],
            curvature: 1.0 / w,
            arclength_weight: w * dtheta,
        }
    }

    /// Scales support values so the area becomes `target_area`.
    pub fn rescale_to_area(&self, target_area: f64) -> Result<Self, GeometryError> {
        if target_area <= 0.0 || !target_area.is_finite() {
            return Err(GeometryError::InvalidParameter(format!(
                "target area must be positive, got {target_area}"
            )));
        }
        let s = (target_area / self.area()).sqrt();
        Self::from_support_samples(self.h.iter().map(|&v| v * s).collect())
    }

    /// sup-norm distance to the equal-area disk after projecting out the
    /// first harmonics (they encode translation, not shape).
    pub fn ball_distance(&self) -> f64 {
        let n = self.h.len();
        let r = (self.area() / PI).sqrt();
        let a1 = self.series.cos[1];
        let b1 = self.series.sin[1];
        let mut d: f64 = 0.0;
        for j in 0..n {
            let t = TAU * j as f64 / n as f64;
            let centered = self.h[j] - a1 * t.cos() - b1 * t.sin();
            d = d.max((centered - r).abs());
        }
        d
    }

    /// Rotates the domain by `steps` grid increments (exact resampling).
    pub fn rotate_grid(&self, steps: usize) -> Self {
        let n = self.h.len();
        let shift = steps % n;
        let h: Vec<f64> = (0..n).map(|j| self.h[(j + n - shift) % n]).collect();
        Self::from_support_samples(h).expect("rotation preserves validity")
    }

    /// Translates the domain by (dx, dy); adds first harmonics to h and
    /// leaves w (hence convexity, area, perimeter) unchanged.
    pub fn translated(&self, dx: f64, dy: f64) -> Self {
        let n = self.h.len();
        let h: Vec<f64> = (0..n)
            .map(|j| {
                let t = TAU * j as f64 / n as f64;
                self.h[j] + dx * t.cos() + dy * t.sin()
            })
            .collect();
        Self::from_support_samples(h).expect("translation preserves validity")
    }

    /// Stable 64-bit fingerprint of the exact sample values.
    pub fn fingerprint(&self) -> u64 {
        let mut hasher = Fnv1a::new();
        hasher.write_u64(self.h.len() as u64);
        for &v in &self.h {
            hasher.write_u64(v.to_bits());
        }
        hasher.finish()
    }

    /// JSON encoding {"n": N, "h": [...]} with 17 significant digits,
    /// which round-trips f64 bit-exactly.
    pub fn to_json_string(&self) -> String {
        let mut out = String::with_capacity(32 + 26 * self.h.len());
        out.push_str(&format!("{{\"n\":{},\"h\":[", self.h.len()));
        for (j, &v) in self.h.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&format!("{v:.16e}"));
        }
        out.push_str("]}");
        out
    }

    pub fn from_json_str(text: &str) -> Result<Self, GeometryError> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| GeometryError::Json(e.to_string()))?;
        let n = value
            .get("n")
            .and_then(|v| v.as_u64())
            .ok_or_else(|| GeometryError::Json("missing integer field \"n\"".into()))?
            as usize;
        let h: Vec<f64> = value
            .get("h")
            .and_then(|v| v.as_array())
            .ok_or_else(|| GeometryError::Json("missing array field \"h\"".into()))?
            .iter()
            .map(|v| {
                v.as_f64()
                    .ok_or_else(|| GeometryError::Json("non-numeric entry in \"h\"".into()))
            })
            .collect::<Result<_, _>>()?;
        if h.len() != n {
            return Err(GeometryError::Json(format!(
                "length mismatch: n = {n}, h has {} entries",
                h.len()
            )));
        }
        Self::from_support_samples(h)
    }
}
