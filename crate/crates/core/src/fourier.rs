//! Radix-2 FFT and spectral differentiation on uniform periodic grids.
//!
//! Support functions live on grids of power-of-two size, so a plain
//! iterative Cooley–Tukey transform is all we need. Everything here is
//! deterministic: fixed butterfly order, fixed summation order, no
//! threading, so derived arrays are reproducible bit-for-bit from the
//! input samples.

use std::f64::consts::TAU;

/// Returns true when `n` is a power of two (and nonzero).
pub fn is_power_of_two(n: usize) -> bool {
    n != 0 && n & (n - 1) == 0
}

/// In-place complex FFT, decimation in time.
///
/// `inverse` applies the conjugate transform and the 1/n scaling; for
/// power-of-two n the scaling is exact in f64.
fn fft(re: &mut [f64], im: &mut [f64], inverse: bool) {
    let n = re.len();
    debug_assert!(is_power_of_two(n));
    debug_assert_eq!(n, im.len());

    // bit-reversal permutation
    let mut j = 0usize;
    for i in 0..n {
        if i < j {
            re.swap(i, j);
            im.swap(i, j);
        }
        let mut m = n >> 1;
        while m >= 1 && j & m != 0 {
            j ^= m;
            m >>= 1;
        }
        j |= m;
    }

    let sign = if inverse { 1.0 } else { -1.0 };
    let mut len = 2;
    while len <= n {
        let ang = sign * TAU / len as f64;
        let (wre, wim) = (ang.cos(), ang.sin());
        let mut start = 0;
        while start < n {
            let mut cre = 1.0;
            let mut cim = 0.0;
            for k in 0..len / 2 {
                let a = start + k;
                let b = a + len / 2;
                let tre = cre * re[b] - cim * im[b];
                let tim = cre * im[b] + cim * re[b];
                re[b] = re[a] - tre;
                im[b] = im[a] - tim;
                re[a] += tre;
                im[a] += tim;
                let ncre = cre * wre - cim * wim;
                cim = cre * wim + cim * wre;
                cre = ncre;
            }
            start += len;
        }
        len <<= 1;
    }

    if inverse {
        let scale = 1.0 / n as f64;
        for v in re.iter_mut() {
            *v *= scale;
        }
        for v in im.iter_mut() {
            *v *= scale;
        }
    }
}

/// Real trigonometric polynomial coefficients on a grid of size `n`:
/// h(θ) = cos[0] + Σ_{m=1}^{n/2-1} (cos[m]·cos mθ + sin[m]·sin mθ)
///        + cos[n/2]·cos(n/2·θ).
///
/// `sin` has the same length as `cos`; entries 0 and n/2 are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierSeries {
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
}

impl FourierSeries {
    /// Coefficients of the trigonometric interpolant of `samples`
    /// (values at θ_j = 2πj/n, n a power of two).
    pub fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len();
        debug_assert!(is_power_of_two(n) && n >= 4);
        let mut re = samples.to_vec();
        let mut im = vec![0.0; n];
        fft(&mut re, &mut im, false);
        let half = n / 2;
        let mut cos = vec![0.0; half + 1];
        let mut sin = vec![0.0; half + 1];
        let inv_n = 1.0 / n as f64;
        cos[0] = re[0] * inv_n;
        for m in 1..half {
            cos[m] = 2.0 * re[m] * inv_n;
            sin[m] = -2.0 * im[m] * inv_n;
        }
        cos[half] = re[half] * inv_n;
        Self { cos, sin }
    }

    /// Grid size this series interpolates.
    pub fn grid_size(&self) -> usize {
        (self.cos.len() - 1) * 2
    }

    /// Samples of the series on its own grid.
    pub fn synthesize(&self) -> Vec<f64> {
        self.synthesize_weighted(|_m| 1.0, false)
    }

    /// First derivative on the grid. The Nyquist mode is dropped, the
    /// standard convention for odd spectral derivatives.
    pub fn derivative(&self) -> Vec<f64> {
        self.synthesize_weighted(|m| m as f64, true)
    }

    /// Second derivative on the grid (Nyquist mode kept with weight -m²).
    pub fn second_derivative(&self) -> Vec<f64> {
        self.synthesize_weighted(|m| -((m * m) as f64), false)
    }

    /// Inverse transform of the series with per-mode weight applied;
    /// `rotate` swaps (cos,sin) -> (-sin,cos) as needed for odd derivatives.
    fn synthesize_weighted(&self, weight: impl Fn(usize) -> f64, rotate: bool) -> Vec<f64> {
        let half = self.cos.len() - 1;
        let n = 2 * half;
        let mut re = vec![0.0; n];
        let mut im = vec![0.0; n];
        for m in 0..=half {
            let wgt = weight(m);
            let (a, b) = if rotate {
                // d/dθ (a cos mθ + b sin mθ) = m(b cos mθ - a sin mθ)
                (self.sin[m], -self.cos[m])
            } else {
                (self.cos[m], self.sin[m])
            };
            let (a, b) = (wgt * a, wgt * b);
            if m == 0 {
                re[0] += a * n as f64;
            } else if m == half {
                if rotate {
                    // Nyquist dropped for odd derivatives
                } else {
                    re[half] += a * n as f64;
                }
            } else {
                let scale = 0.5 * n as f64;
                re[m] += a * scale;
                im[m] += -b * scale;
                re[n - m] += a * scale;
                im[n - m] += b * scale;
            }
        }
        fft(&mut re, &mut im, true);
        re
    }

    /// Evaluate (value, first, second derivative) at an arbitrary angle.
    ///
    /// At grid points this agrees with the array routes up to rounding.
    pub fn eval(&self, theta: f64) -> (f64, f64, f64) {
        let half = self.cos.len() - 1;
        let mut v = self.cos[0];
        let mut d1 = 0.0;
        let mut d2 = 0.0;
        for m in 1..=half {
            let mf = m as f64;
            let (c, s) = ((mf * theta).cos(), (mf * theta).sin());
            let a = self.cos[m];
            let b = self.sin[m];
            v += a * c + b * s;
            if m < half {
                d1 += mf * (b * c - a * s);
            }
            d2 += mf * mf * (-a * c - b * s);
        }
        (v, d1, d2)
    }

    /// Largest coefficient magnitude among modes m ≥ `from`.
    pub fn tail_magnitude(&self, from: usize) -> f64 {
        let mut mag: f64 = 0.0;
        for m in from..self.cos.len() {
            mag = mag.max(self.cos[m].abs()).max(self.sin[m].abs());
        }
        mag
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn naive_dft(samples: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = samples.len();
        let mut re = vec![0.0; n];
        let mut im = vec![0.0; n];
        for k in 0..n {
            for (j, &s) in samples.iter().enumerate() {
                let ang = -TAU * (j * k % n) as f64 / n as f64;
                re[k] += s * ang.cos();
                im[k] += s * ang.sin();
            }
        }
        (re, im)
    }

    #[test]
    fn fft_matches_naive_dft() {
        let n = 64;
        let samples: Vec<f64> = (0..n)
            .map(|j| {
                let t = TAU * j as f64 / n as f64;
                1.3 + 0.4 * (2.0 * t).cos() - 0.2 * (5.0 * t).sin() + 0.05 * (11.0 * t).cos()
            })
            .collect();
        let (nre, nim) = naive_dft(&samples);
        let mut re = samples.clone();
        let mut im = vec![0.0; n];
        fft(&mut re, &mut im, false);
        for k in 0..n {
            assert!((re[k] - nre[k]).abs() < 1e-10, "re[{k}]");
            assert!((im[k] - nim[k]).abs() < 1e-10, "im[{k}]");
        }
    }

    #[test]
    fn constant_input_gives_exact_zero_derivatives() {
        let samples = vec![2.375; 128];
        let series = FourierSeries::from_samples(&samples);
        assert_eq!(series.cos[0], 2.375);
        let d1 = series.derivative();
        let d2 = series.second_derivative();
        assert!(d1.iter().all(|&v| v == 0.0));
        assert!(d2.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn derivatives_exact_for_single_mode() {
        let n = 128;
        let m = 3.0;
        let samples: Vec<f64> = (0..n)
            .map(|j| (m * TAU * j as f64 / n as f64).cos())
            .collect();
        let series = FourierSeries::from_samples(&samples);
        let d1 = series.derivative();
        let d2 = series.second_derivative();
        for j in 0..n {
            let t = TAU * j as f64 / n as f64;
            assert!((d1[j] + m * (m * t).sin()).abs() < 1e-12);
            assert!((d2[j] + m * m * (m * t).cos()).abs() < 1e-11);
        }
    }

    #[test]
    fn eval_matches_grid_arrays() {
        let n = 64;
        let samples: Vec<f64> = (0..n)
            .map(|j| {
                let t = TAU * j as f64 / n as f64;
                1.0 + 0.1 * (2.0 * t).cos() + 0.03 * (3.0 * t).sin()
            })
            .collect();
        let series = FourierSeries::from_samples(&samples);
        let d1 = series.derivative();
        let d2 = series.second_derivative();
        for j in [0usize, 5, 17, 40] {
            let t = TAU * j as f64 / n as f64;
            let (v, e1, e2) = series.eval(t);
            assert!((v - samples[j]).abs() < 1e-12);
            assert!((e1 - d1[j]).abs() < 1e-11);
            assert!((e2 - d2[j]).abs() < 1e-10);
        }
        // off-grid: compare against the analytic expression
        let t = 0.7321;
        let (v, e1, e2) = series.eval(t);
        assert!((v - (1.0 + 0.1 * (2.0 * t).cos() + 0.03 * (3.0 * t).sin())).abs() < 1e-12);
        assert!((e1 - (-0.2 * (2.0 * t).sin() + 0.09 * (3.0 * t).cos())).abs() < 1e-12);
        assert!((e2 - (-0.4 * (2.0 * t).cos() - 0.27 * (3.0 * t).sin())).abs() < 1e-11);
    }

    #[test]
    fn round_trip_synthesis() {
        let n = 64;
        let samples: Vec<f64> = (0..n)
            .map(|j| 1.0 + 0.3 * (PI * j as f64 / 7.0).sin().powi(2))
            .collect();
        let series = FourierSeries::from_samples(&samples);
        let back = series.synthesize();
        for j in 0..n {
            assert!((back[j] - samples[j]).abs() < 1e-12);
        }
    }
}
