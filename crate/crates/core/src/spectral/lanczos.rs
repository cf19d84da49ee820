//! Shift-invert Lanczos for the generalized pencil K x = λ M x.
//!
//! With shift zero the operator A = K⁻¹M is self-adjoint in the
//! M-inner product and its largest eigenvalues are the reciprocals of
//! the smallest λ — exactly the modes below a cutoff. K is factored once
//! in band form; each iteration is one mass matvec and one band solve.
//! Full reorthogonalization keeps the basis clean, and the run is
//! deterministic: the start vector comes from a fixed-seed SplitMix64.

use crate::spectral::assemble::Csr;
use crate::spectral::band::BandCholesky;
use crate::spectral::SpectralError;
use nalgebra::{DMatrix, SymmetricEigen};

/// Deterministic start-vector generator.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

pub struct LanczosOptions {
    pub lambda_max: f64,
    pub tolerance: f64,
    /// Hard cap on the Krylov dimension.
    pub max_dim: usize,
    /// Seed folded into the start vector (mesh fingerprint).
    pub seed: u64,
}

/// Eigenpairs with λ < lambda_max, ascending, xᵀMx = 1. Also returns the
/// smallest converged eigenvalue at or above the cutoff, which guards
/// against missing modes near it.
pub fn shift_invert_lanczos(
    k_chol: &BandCholesky,
    mass: &Csr,
    dim: usize,
    opts: &LanczosOptions,
) -> Result<(Vec<f64>, Vec<Vec<f64>>, Option<f64>), SpectralError> {
    let max_dim = opts.max_dim.min(dim);
    let m_dot = |a: &[f64], b: &[f64]| -> f64 {
        let mut mb = vec![0.0; dim];
        mass.mul_vec_leading(b, dim, &mut mb);
        a.iter().zip(&mb).map(|(x, y)| x * y).sum()
    };

    // start vector
    let mut state = opts.seed ^ 0x5851f42d4c957f2d;
    let mut v: Vec<f64> = (0..dim)
        .map(|_| {
            let r = splitmix64(&mut state);
            (r >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        })
        .collect();
    let norm = m_dot(&v, &v).sqrt();
    v.iter_mut().for_each(|x| *x /= norm);

    let mut basis: Vec<Vec<f64>> = vec![v];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut mv_cache: Vec<Vec<f64>> = Vec::new(); // M·v_j for reorthogonalization

    loop {
        let j = alphas.len();
        let vj = basis[j].clone();
        let mut mvj = vec![0.0; dim];
        mass.mul_vec_leading(&vj, dim, &mut mvj);
        mv_cache.push(mvj.clone());

        // w = K⁻¹ M v_j
        let mut w = mvj;
        k_chol.solve_in_place(&mut w);

        let alpha: f64 = {
            let mut mw = vec![0.0; dim];
            mass.mul_vec_leading(&w, dim, &mut mw);
            vj.iter().zip(&mw).map(|(a, b)| a * b).sum()
        };
        alphas.push(alpha);

        for i in 0..w.len() {
            w[i] -= alpha * basis[j][i];
        }
        if j > 0 {
            let beta_prev = betas[j - 1];
            for i in 0..w.len() {
                w[i] -= beta_prev * basis[j - 1][i];
            }
        }
        // full reorthogonalization in the M-inner product, two sweeps
        for _ in 0..2 {
            for (vi, mvi) in basis.iter().zip(&mv_cache) {
                let c: f64 = w.iter().zip(mvi).map(|(a, b)| a * b).sum();
                for i in 0..w.len() {
                    w[i] -= c * vi[i];
                }
            }
        }

        let beta = m_dot(&w, &w).sqrt();

        let krylov_dim = alphas.len();
        let exhausted = beta < 1e-14 || krylov_dim >= max_dim;
        if (exhausted || krylov_dim % 8 == 0) && converged(&alphas, &betas, beta, opts) {
            break;
        }
        if exhausted {
            break;
        }

        betas.push(beta);
        let next: Vec<f64> = w.iter().map(|x| x / beta).collect();
        basis.push(next);
    }

    // Rayleigh–Ritz on the tridiagonal
    let j = alphas.len();
    let (theta, s) = tridiag_eigen(&alphas, &betas);
    let mut wanted: Vec<(f64, usize)> = Vec::new();
    let mut guard: Option<f64> = None;
    for (i, &th) in theta.iter().enumerate() {
        if th <= 0.0 {
            continue;
        }
        let lambda = 1.0 / th;
        if lambda < opts.lambda_max {
            wanted.push((lambda, i));
        } else {
            guard = Some(guard.map_or(lambda, |g: f64| g.min(lambda)));
        }
    }
    wanted.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

    let mut values = Vec::with_capacity(wanted.len());
    let mut vectors = Vec::with_capacity(wanted.len());
    for &(lambda, i) in &wanted {
        let mut x = vec![0.0; dim];
        for (jj, vb) in basis.iter().enumerate().take(j) {
            let c = s[(jj, i)];
            for d in 0..dim {
                x[d] += c * vb[d];
            }
        }
        let nrm = m_dot(&x, &x).sqrt();
        if nrm == 0.0 {
            return Err(SpectralError::SolverFailure("zero Ritz vector".into()));
        }
        x.iter_mut().for_each(|v| *v /= nrm);
        values.push(lambda);
        vectors.push(x);
    }
    Ok((values, vectors, guard))
}

/// True once every Ritz value that could land below the cutoff has a
/// small residual bound, and at least one converged value sits above it.
fn converged(alphas: &[f64], betas: &[f64], beta_next: f64, opts: &LanczosOptions) -> bool {
    let (theta, s) = tridiag_eigen(alphas, betas);
    let j = alphas.len();
    let mut have_guard = false;
    for (i, &th) in theta.iter().enumerate() {
        if th <= 0.0 {
            continue;
        }
        let lambda = 1.0 / th;
        let resid = beta_next * s[(j - 1, i)].abs(); // Lanczos bound for A v = θ v
        let ok = resid <= opts.tolerance * th;
        if lambda < opts.lambda_max * 1.1 && !ok {
            return false;
        }
        if lambda >= opts.lambda_max && ok {
            have_guard = true;
        }
    }
    have_guard
}

fn tridiag_eigen(alphas: &[f64], betas: &[f64]) -> (Vec<f64>, DMatrix<f64>) {
    let j = alphas.len();
    let mut t = DMatrix::<f64>::zeros(j, j);
    for (i, &a) in alphas.iter().enumerate() {
        t[(i, i)] = a;
    }
    for (i, &b) in betas.iter().enumerate() {
        t[(i, i + 1)] = b;
        t[(i + 1, i)] = b;
    }
    let se = SymmetricEigen::new(t);
    let mut order: Vec<usize> = (0..j).collect();
    order.sort_by(|&a, &b| se.eigenvalues[b].partial_cmp(&se.eigenvalues[a]).unwrap());
    let theta: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut vecs = DMatrix::<f64>::zeros(j, j);
    for (new_i, &old_i) in order.iter().enumerate() {
        vecs.set_column(new_i, &se.eigenvectors.column(old_i));
    }
    (theta, vecs)
}
