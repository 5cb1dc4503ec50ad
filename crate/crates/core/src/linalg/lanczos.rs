//! Lanczos iteration for the lowest eigenpair of a large sparse symmetric
//! operator.
//!
//! Every new Krylov vector is orthogonalized twice against the whole basis,
//! which keeps the projected problem free of spurious copies of converged
//! eigenvalues at the cost of storing the basis.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::dense::lowest_tridiagonal_pair;
use super::LinearOperator;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct LanczosOptions {
    /// Hard cap on the Krylov dimension; clipped to the operator dimension.
    pub max_iter: usize,
    /// Convergence is tested every this many steps.
    pub check_every: usize,
    /// Seed for the random start and for restart vectors.
    pub seed: u64,
    /// Optional start vector (need not be normalized).
    pub start: Option<Vec<f64>>,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            max_iter: 2000,
            check_every: 8,
            seed: 0x5EED,
            start: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LanczosResult {
    pub energy: f64,
    /// Unit-norm Ritz vector.
    pub vector: Vec<f64>,
    pub iterations: usize,
    /// Explicit residual norm `|A v - E v|`.
    pub residual: f64,
    /// Estimate of `|A|` from the extreme Ritz values.
    pub norm_estimate: f64,
    /// Number of Krylov breakdowns that required a fresh random direction.
    pub restarts: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += alpha * xi);
}

fn orthogonalize(w: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for q in basis {
            let c = dot(q, w);
            axpy(-c, q, w);
        }
    }
}

fn random_unit(rng: &mut ChaCha8Rng, n: usize, basis: &[Vec<f64>]) -> Result<Vec<f64>> {
    for _ in 0..8 {
        let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        orthogonalize(&mut v, basis);
        let norm = dot(&v, &v).sqrt();
        if norm > 1e-8 {
            v.iter_mut().for_each(|x| *x /= norm);
            return Ok(v);
        }
    }
    Err(Error::Numeric(
        "could not generate a new Krylov direction".into(),
    ))
}

/// Lowest eigenpair of `op` such that `|A v - E v| <= tol * |A|`.
pub fn lanczos_ground<O: LinearOperator + ?Sized>(
    op: &O,
    tol: f64,
    options: &LanczosOptions,
) -> Result<LanczosResult> {
    let n = op.dim();
    if n == 0 {
        return Err(Error::Input("operator dimension must be positive".into()));
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::Input(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let max_iter = options.max_iter.min(n).max(1);
    let check_every = options.check_every.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);

    let mut basis: Vec<Vec<f64>> = Vec::new();
    let first = match &options.start {
        Some(s) if s.len() == n && dot(s, s) > 0.0 && s.iter().all(|x| x.is_finite()) => {
            let norm = dot(s, s).sqrt();
            s.iter().map(|x| x / norm).collect()
        }
        Some(s) if s.len() != n => {
            return Err(Error::Input(format!(
                "start vector has dimension {} but the operator has {n}",
                s.len()
            )))
        }
        _ => random_unit(&mut rng, n, &basis)?,
    };
    basis.push(first);

    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut w = vec![0.0; n];
    let mut norm_estimate: f64 = 0.0;
    let mut restarts = 0;
    let mut since_restart = usize::MAX;

    loop {
        let j = basis.len() - 1;
        op.apply(&basis[j], &mut w);
        let alpha = dot(&basis[j], &w);
        axpy(-alpha, &basis[j], &mut w);
        if j > 0 {
            axpy(-betas[j - 1], &basis[j - 1], &mut w);
        }
        orthogonalize(&mut w, &basis);
        let beta = dot(&w, &w).sqrt();
        alphas.push(alpha);
        let k = alphas.len();
        norm_estimate = norm_estimate.max(alpha.abs() + beta);
        let breakdown = beta <= 1e-13 * norm_estimate.max(f64::MIN_POSITIVE);

        let due = k == n || k == max_iter || k.is_multiple_of(check_every) || breakdown;
        if due {
            let (theta, s, largest) = lowest_tridiagonal_pair(&alphas, &betas)?;
            norm_estimate = norm_estimate.max(largest);
            let estimate = beta * s[k - 1].abs();
            let settled = since_restart == usize::MAX || since_restart >= check_every;
            if k == n || (estimate <= tol * norm_estimate && settled && !breakdown) {
                return finish(op, &basis, &s, theta, k, norm_estimate, restarts);
            }
            if k == max_iter {
                return Err(Error::Numeric(format!(
                    "Lanczos reached its iteration cap of {max_iter} with residual estimate {estimate:.3e}"
                )));
            }
        }

        if breakdown {
            let fresh = random_unit(&mut rng, n, &basis)?;
            betas.push(0.0);
            basis.push(fresh);
            restarts += 1;
            since_restart = 0;
        } else {
            w.iter_mut().for_each(|x| *x /= beta);
            betas.push(beta);
            basis.push(w.clone());
            if since_restart != usize::MAX {
                since_restart += 1;
            }
        }
    }
}

fn finish<O: LinearOperator + ?Sized>(
    op: &O,
    basis: &[Vec<f64>],
    s: &[f64],
    theta: f64,
    iterations: usize,
    norm_estimate: f64,
    restarts: usize,
) -> Result<LanczosResult> {
    let n = op.dim();
    let mut v = vec![0.0; n];
    for (q, &c) in basis.iter().zip(s) {
        axpy(c, q, &mut v);
    }
    let norm = dot(&v, &v).sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    let mut av = vec![0.0; n];
    op.apply(&v, &mut av);
    let energy = dot(&v, &av);
    let residual = av
        .iter()
        .zip(&v)
        .map(|(a, b)| (a - energy * b).powi(2))
        .sum::<f64>()
        .sqrt();
    let _ = theta;
    Ok(LanczosResult {
        energy,
        vector: v,
        iterations,
        residual,
        norm_estimate,
        restarts,
    })
}
