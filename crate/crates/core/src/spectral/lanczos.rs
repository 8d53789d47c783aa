//! Restarted Lanczos with full reorthogonalization for the lowest eigenpair.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, norm, normalize, C64, ZERO};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LanczosOptions {
    /// Absolute residual target `||H psi - E psi||`.
    pub tol: f64,
    /// Budget of matrix-vector products.
    pub maxit: usize,
    /// Krylov basis size before a restart.
    pub basis: usize,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self { tol: 1e-10, maxit: 20_000, basis: 60 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralResult {
    pub energy: f64,
    #[serde(skip)]
    pub vector: Vec<C64>,
    pub residual: f64,
    /// Matrix-vector products used.
    pub iterations: usize,
    /// Ritz value at the end of every restart cycle.
    pub ritz_history: Vec<f64>,
}

/// Lowest eigenpair of the Hermitian operator `apply`, started from `seed`.
///
/// Every cycle restarts from the previous Ritz vector, so the Ritz values never
/// exceed the Rayleigh quotient of the seed.
pub fn lanczos_ground<F>(apply: F, seed: &[C64], opts: &LanczosOptions) -> Result<SpectralResult>
where
    F: Fn(&[C64], &mut [C64]),
{
    let n = seed.len();
    let mut v = seed.to_vec();
    if normalize(&mut v) == 0.0 {
        return Err(Error::InvalidParameter("Lanczos seed is the zero vector".into()));
    }
    let m = opts.basis.clamp(2, n.max(2));
    let mut matvecs = 0usize;
    let mut history = Vec::new();
    let mut w = vec![ZERO; n];
    let mut last_residual = f64::INFINITY;
    loop {
        let mut basis: Vec<Vec<C64>> = vec![v.clone()];
        let mut alphas: Vec<f64> = Vec::with_capacity(m);
        let mut betas: Vec<f64> = Vec::with_capacity(m);
        for j in 0..m {
            apply(&basis[j], &mut w);
            matvecs += 1;
            let alpha = dot(&basis[j], &w).re;
            alphas.push(alpha);
            for _ in 0..2 {
                for q in &basis {
                    let c = dot(q, &w);
                    axpy(-c, q, &mut w);
                }
            }
            let beta = norm(&w);
            let scale = alphas.iter().fold(1.0f64, |s, a| s.max(a.abs()));
            if j + 1 == m || j + 1 == n || beta <= 1e-13 * scale {
                break;
            }
            betas.push(beta);
            let mut next = w.clone();
            crate::linalg::scale(C64::new(1.0 / beta, 0.0), &mut next);
            basis.push(next);
        }
        let k = alphas.len();
        let mut t = DMatrix::<f64>::zeros(k, k);
        for i in 0..k {
            t[(i, i)] = alphas[i];
            if i + 1 < k {
                t[(i, i + 1)] = betas[i];
                t[(i + 1, i)] = betas[i];
            }
        }
        let eig = SymmetricEigen::new(t);
        let mut imin = 0;
        for i in 1..k {
            if eig.eigenvalues[i] < eig.eigenvalues[imin] {
                imin = i;
            }
        }
        let s = eig.eigenvectors.column(imin);
        let mut y = vec![ZERO; n];
        for (i, q) in basis.iter().enumerate().take(k) {
            axpy(C64::new(s[i], 0.0), q, &mut y);
        }
        normalize(&mut y);
        apply(&y, &mut w);
        matvecs += 1;
        let theta = dot(&y, &w).re;
        axpy(C64::new(-theta, 0.0), &y, &mut w);
        let residual = norm(&w);
        history.push(theta);
        if residual <= opts.tol {
            return Ok(SpectralResult { energy: theta, vector: y, residual, iterations: matvecs, ritz_history: history });
        }
        if matvecs >= opts.maxit || (k < 2 && residual >= last_residual) {
            return Err(Error::NoConvergence { what: "Lanczos ground state".into(), residual });
        }
        last_residual = residual;
        v = y;
    }
}
