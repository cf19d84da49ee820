//! Dense generalized symmetric eigensolver for small interior systems.
//!
//! Reduces K x = λ M x to standard form through the Cholesky factor of
//! M and hands the symmetric problem to nalgebra. Used below the
//! configured size limit and as the reference route the iterative
//! solver is cross-checked against.

use crate::spectral::assemble::Csr;
use crate::spectral::SpectralError;
use nalgebra::{Cholesky, DMatrix, SymmetricEigen};

/// All eigenpairs of K x = λ M x, ascending, with xᵀMx = 1.
pub fn dense_gevp(
    stiffness: &Csr,
    mass: &Csr,
    dim: usize,
) -> Result<(Vec<f64>, Vec<Vec<f64>>), SpectralError> {
    let to_dense = |csr: &Csr| {
        let mut a = DMatrix::<f64>::zeros(dim, dim);
        for r in 0..dim {
            for (c, v) in csr.row(r) {
                if c < dim {
                    a[(r, c)] = v;
                }
            }
        }
        a
    };
    let k = to_dense(stiffness);
    let m = to_dense(mass);

    let chol = Cholesky::new(m)
        .ok_or_else(|| SpectralError::SolverFailure("mass matrix not SPD".into()))?;
    let l = chol.l();

    // C = L⁻¹ K L⁻ᵀ
    let y = l
        .solve_lower_triangular(&k)
        .ok_or_else(|| SpectralError::SolverFailure("singular Cholesky factor".into()))?;
    let mut c = l
        .solve_lower_triangular(&y.transpose())
        .ok_or_else(|| SpectralError::SolverFailure("singular Cholesky factor".into()))?;
    // symmetrize against rounding
    for i in 0..dim {
        for j in (i + 1)..dim {
            let s = 0.5 * (c[(i, j)] + c[(j, i)]);
            c[(i, j)] = s;
            c[(j, i)] = s;
        }
    }

    let se = SymmetricEigen::new(c);
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].partial_cmp(&se.eigenvalues[b]).unwrap());

    let lt = l.transpose();
    let mut values = Vec::with_capacity(dim);
    let mut vectors = Vec::with_capacity(dim);
    for &idx in &order {
        values.push(se.eigenvalues[idx]);
        let y_col = se.eigenvectors.column(idx).into_owned();
        let x = lt
            .solve_upper_triangular(&y_col)
            .ok_or_else(|| SpectralError::SolverFailure("singular Cholesky factor".into()))?;
        vectors.push(x.as_slice().to_vec());
    }
    Ok((values, vectors))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn csr_from_dense(a: &DMatrix<f64>) -> Csr {
        let n = a.nrows();
        let mut row_ptr = vec![0usize; n + 1];
        let mut col = Vec::new();
        let mut val = Vec::new();
        for r in 0..n {
            for c in 0..n {
                if a[(r, c)] != 0.0 {
                    col.push(c);
                    val.push(a[(r, c)]);
                }
            }
            row_ptr[r + 1] = col.len();
        }
        Csr { n, row_ptr, col, val }
    }

    #[test]
    fn tridiagonal_dirichlet_eigenvalues() {
        // 1D Laplacian with lumped-style mass: known eigenvalues
        // K = tridiag(-1, 2, -1)/h, M = tridiag(1, 4, 1)·h/6, h = 1/(n+1)
        let n = 30;
        let h = 1.0 / (n as f64 + 1.0);
        let mut k = DMatrix::<f64>::zeros(n, n);
        let mut m = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            k[(i, i)] = 2.0 / h;
            m[(i, i)] = 4.0 * h / 6.0;
            if i + 1 < n {
                k[(i, i + 1)] = -1.0 / h;
                k[(i + 1, i)] = -1.0 / h;
                m[(i, i + 1)] = h / 6.0;
                m[(i + 1, i)] = h / 6.0;
            }
        }
        let (vals, vecs) = dense_gevp(&csr_from_dense(&k), &csr_from_dense(&m), n).unwrap();
        // discrete eigenvalues of the P1 pencil on (0,1):
        // λ_j = 6/h² · (1−cos jπh)/(2+cos jπh)
        for j in 1..=4usize {
            let c = (j as f64 * std::f64::consts::PI * h).cos();
            let exact = 6.0 / (h * h) * (1.0 - c) / (2.0 + c);
            assert!(
                (vals[j - 1] - exact).abs() / exact < 1e-10,
                "mode {j}: {} vs {exact}",
                vals[j - 1]
            );
        }
        // M-normalization
        for v in vecs.iter().take(3) {
            let mut mx = vec![0.0; n];
            csr_from_dense(&m).mul_vec_leading(v, n, &mut mx);
            let norm: f64 = v.iter().zip(&mx).map(|(a, b)| a * b).sum();
            assert!((norm - 1.0).abs() < 1e-10);
        }
    }
}
