//! Cholesky factorization and triangular solves in band storage.
//!
//! The structured ring mesh gives interior matrices with bandwidth
//! about n_angular + 1, so factor cost is n·bw² and each solve is n·bw —
//! the workhorse behind the shift-invert eigensolver.

use crate::spectral::assemble::BandMatrix;
use crate::spectral::SpectralError;

/// Lower Cholesky factor in the same band layout as the input.
#[derive(Debug, Clone)]
pub struct BandCholesky {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

impl BandCholesky {
    pub fn factor(a: &BandMatrix) -> Result<Self, SpectralError> {
        let (n, bw) = (a.n, a.bw);
        let stride = bw + 1;
        let mut data = a.data.clone();
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            for j in lo..=i {
                let mut sum = data[i * stride + (j + bw - i)];
                let klo = lo.max(j.saturating_sub(bw));
                for k in klo..j {
                    sum -= data[i * stride + (k + bw - i)] * data[j * stride + (k + bw - j)];
                }
                if j == i {
                    if sum <= 0.0 {
                        return Err(SpectralError::SolverFailure(format!(
                            "band Cholesky breakdown at pivot {i} (value {sum:.3e})"
                        )));
                    }
                    data[i * stride + bw] = sum.sqrt();
                } else {
                    data[i * stride + (j + bw - i)] = sum / data[j * stride + bw];
                }
            }
        }
        Ok(Self { n, bw, data })
    }

    /// Solves A x = b in place (forward then backward substitution).
    pub fn solve_in_place(&self, x: &mut [f64]) {
        let (n, bw) = (self.n, self.bw);
        let stride = bw + 1;
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            let mut sum = x[i];
            for k in lo..i {
                sum -= self.data[i * stride + (k + bw - i)] * x[k];
            }
            x[i] = sum / self.data[i * stride + bw];
        }
        for i in (0..n).rev() {
            let hi = (i + bw).min(n - 1);
            let mut sum = x[i];
            for k in (i + 1)..=hi {
                // L[k][i] stored in row k
                sum -= self.data[k * stride + (i + bw - k)] * x[k];
            }
            x[i] = sum / self.data[i * stride + bw];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn banded_spd(n: usize, bw: usize) -> BandMatrix {
        // diagonally dominant banded test matrix
        let stride = bw + 1;
        let mut data = vec![0.0; n * stride];
        for i in 0..n {
            data[i * stride + bw] = 8.0 + (i % 3) as f64;
            for d in 1..=bw.min(i) {
                let j = i - d;
                data[i * stride + (j + bw - i)] = -1.0 / d as f64;
            }
        }
        BandMatrix { n, bw, data }
    }

    fn band_mul(a: &BandMatrix, x: &[f64]) -> Vec<f64> {
        let stride = a.bw + 1;
        let mut y = vec![0.0; a.n];
        for i in 0..a.n {
            let lo = i.saturating_sub(a.bw);
            for j in lo..=i {
                let v = a.data[i * stride + (j + a.bw - i)];
                y[i] += v * x[j];
                if j != i {
                    y[j] += v * x[i];
                }
            }
        }
        y
    }

    #[test]
    fn factor_solve_round_trip() {
        let a = banded_spd(200, 7);
        let chol = BandCholesky::factor(&a).unwrap();
        let x_true: Vec<f64> = (0..200).map(|i| ((i * 37) % 11) as f64 - 5.0).collect();
        let mut b = band_mul(&a, &x_true);
        chol.solve_in_place(&mut b);
        for (xs, xt) in b.iter().zip(&x_true) {
            assert!((xs - xt).abs() < 1e-10);
        }
    }

    #[test]
    fn non_spd_detected() {
        let mut a = banded_spd(10, 2);
        a.data[5 * 3 + 2] = -100.0; // poison a diagonal
        assert!(matches!(
            BandCholesky::factor(&a),
            Err(SpectralError::SolverFailure(_))
        ));
    }
}
