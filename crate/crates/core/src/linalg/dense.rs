//! Dense symmetric eigensolver.
//!
//! The matrix is reduced to tridiagonal form with Householder reflections
//! and the tridiagonal problem is solved with the implicit-shift QL
//! iteration. Three drivers share the reduction:
//!
//! * [`eigh_dense`] returns the full spectrum and an orthonormal eigenbasis.
//! * [`spectral_weights`] returns the spectrum together with the squared
//!   projections of one state on every eigenvector, without ever forming
//!   the eigenbasis (O(n^2) beyond the reduction).
//! * [`lowest_eigenpair_dense`] returns the lowest pair, recovering the
//!   eigenvector by inverse iteration on the tridiagonal matrix.

use rayon::prelude::*;

use super::SpectralWeights;
use crate::error::{Error, Result};
use crate::linalg::SymmetricMatrix;

/// Default largest dimension the dense path accepts.
pub const DEFAULT_DENSE_THRESHOLD: usize = 4096;

/// Rows shorter than this are processed serially.
const PAR_MIN_LEN: usize = 256;

const MAX_QL_SWEEPS: usize = 60;

/// Real eigenvalues in ascending order with matching orthonormal eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    dim: usize,
    values: Vec<f64>,
    /// Row-major; row `k` is the eigenvector of `values[k]`.
    vectors: Vec<f64>,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn vector(&self, k: usize) -> &[f64] {
        &self.vectors[k * self.dim..(k + 1) * self.dim]
    }

    pub fn vectors(&self) -> impl Iterator<Item = &[f64]> {
        self.vectors.chunks_exact(self.dim)
    }

    /// Squared overlaps of `psi` with every eigenvector.
    pub fn weights(&self, psi: &[f64]) -> Result<SpectralWeights> {
        if psi.len() != self.dim {
            return Err(Error::Input(format!(
                "state has dimension {} but the decomposition has {}",
                psi.len(),
                self.dim
            )));
        }
        let weights = self
            .vectors()
            .map(|v| {
                let c: f64 = v.iter().zip(psi).map(|(a, b)| a * b).sum();
                c * c
            })
            .collect();
        Ok(SpectralWeights::new(self.values.clone(), weights))
    }
}

/// Householder reduction `A = Q T Q^T` of a dense symmetric matrix.
struct Tridiagonal {
    n: usize,
    diag: Vec<f64>,
    /// `off[k]` couples `k` and `k + 1`; the last entry is zero.
    off: Vec<f64>,
    /// Reflector `k` acts on indices `k + 1..n`.
    reflectors: Vec<(f64, Vec<f64>)>,
}

impl Tridiagonal {
    fn reduce(matrix: &SymmetricMatrix) -> Self {
        let n = matrix.dim();
        let mut a = matrix.to_dense();
        let mut off = vec![0.0; n];
        let mut reflectors = Vec::with_capacity(n.saturating_sub(2));

        for k in 0..n.saturating_sub(2) {
            let m = n - k - 1;
            let x: Vec<f64> = a[k * n + k + 1..(k + 1) * n].to_vec();
            let tail = x[1..].iter().map(|v| v * v).sum::<f64>();
            if tail == 0.0 {
                off[k] = x[0];
                reflectors.push((0.0, Vec::new()));
                continue;
            }
            let norm = (x[0] * x[0] + tail).sqrt();
            let alpha = if x[0] >= 0.0 { -norm } else { norm };
            let mut v = x;
            v[0] -= alpha;
            let beta = 2.0 / v.iter().map(|t| t * t).sum::<f64>();
            off[k] = alpha;

            // p = beta * B v on the trailing block B = a[k+1.., k+1..].
            let base = k + 1;
            let block_row = |i: usize| (base + i) * n + base;
            let p: Vec<f64> = if m >= PAR_MIN_LEN {
                (0..m)
                    .into_par_iter()
                    .map(|i| {
                        let row = &a[block_row(i)..block_row(i) + m];
                        beta * row.iter().zip(&v).map(|(b, c)| b * c).sum::<f64>()
                    })
                    .collect()
            } else {
                (0..m)
                    .map(|i| {
                        let row = &a[block_row(i)..block_row(i) + m];
                        beta * row.iter().zip(&v).map(|(b, c)| b * c).sum::<f64>()
                    })
                    .collect()
            };
            let kappa = 0.5 * beta * p.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>();
            let w: Vec<f64> = p.iter().zip(&v).map(|(pi, vi)| pi - kappa * vi).collect();

            let update = |i: usize, row: &mut [f64]| {
                let (vi, wi) = (v[i], w[i]);
                for ((b, vj), wj) in row.iter_mut().zip(&v).zip(&w) {
                    *b -= vi * wj + wi * vj;
                }
            };
            let trailing = &mut a[base * n..];
            if m >= PAR_MIN_LEN {
                trailing
                    .par_chunks_mut(n)
                    .enumerate()
                    .for_each(|(i, row)| update(i, &mut row[base..]));
            } else {
                trailing
                    .chunks_mut(n)
                    .enumerate()
                    .for_each(|(i, row)| update(i, &mut row[base..]));
            }
            reflectors.push((beta, v));
        }

        let diag: Vec<f64> = (0..n).map(|k| a[k * n + k]).collect();
        if n >= 2 {
            off[n - 2] = a[(n - 2) * n + n - 1];
        }
        Self {
            n,
            diag,
            off,
            reflectors,
        }
    }

    /// `x <- Q^T x`.
    fn apply_qt(&self, x: &mut [f64]) {
        for (k, (beta, v)) in self.reflectors.iter().enumerate() {
            reflect(*beta, v, &mut x[k + 1..]);
        }
    }

    /// `x <- Q x`.
    fn apply_q(&self, x: &mut [f64]) {
        for (k, (beta, v)) in self.reflectors.iter().enumerate().rev() {
            reflect(*beta, v, &mut x[k + 1..]);
        }
    }

    /// Row-major `Q^T`, assembled by backward accumulation.
    fn form_qt(&self) -> Vec<f64> {
        let n = self.n;
        let mut q = vec![0.0; n * n];
        for i in 0..n {
            q[i * n + i] = 1.0;
        }
        for (k, (beta, v)) in self.reflectors.iter().enumerate().rev() {
            if *beta == 0.0 {
                continue;
            }
            let base = k + 1;
            let m = n - base;
            // u = v^T Q[base.., base..]
            let mut u = vec![0.0; m];
            for (i, vi) in v.iter().enumerate() {
                let row = &q[(base + i) * n + base..(base + i + 1) * n];
                for (uj, r) in u.iter_mut().zip(row) {
                    *uj += vi * r;
                }
            }
            for (i, vi) in v.iter().enumerate() {
                let s = beta * vi;
                let row = &mut q[(base + i) * n + base..(base + i + 1) * n];
                for (r, uj) in row.iter_mut().zip(&u) {
                    *r -= s * uj;
                }
            }
        }
        // q now holds Q; transpose in place.
        for i in 0..n {
            for j in i + 1..n {
                q.swap(i * n + j, j * n + i);
            }
        }
        q
    }
}

fn reflect(beta: f64, v: &[f64], x: &mut [f64]) {
    if beta == 0.0 {
        return;
    }
    let s = beta * v.iter().zip(x.iter()).map(|(a, b)| a * b).sum::<f64>();
    for (xi, vi) in x.iter_mut().zip(v) {
        *xi -= s * vi;
    }
}

/// Implicit-shift QL on a symmetric tridiagonal matrix.
///
/// On return `diag` holds the (unsorted) eigenvalues. Every plane rotation
/// is also applied to rows `i, i + 1` of the row-major buffer `rows`
/// (`width` columns), so starting from `Q^T` yields the eigenvectors as
/// rows and starting from `Q^T x` yields the projections of `x`.
pub(crate) fn tridiagonal_ql(
    diag: &mut [f64],
    off: &mut [f64],
    rows: &mut [f64],
    width: usize,
) -> Result<()> {
    let n = diag.len();
    debug_assert_eq!(off.len(), n);
    debug_assert_eq!(rows.len(), n * width);
    if n == 0 {
        return Ok(());
    }
    off[n - 1] = 0.0;
    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;

    for l in 0..n {
        tst1 = tst1.max(diag[l].abs() + off[l].abs());
        let mut m = l;
        while m < n - 1 && off[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut sweeps = 0;
            loop {
                sweeps += 1;
                if sweeps > MAX_QL_SWEEPS {
                    return Err(Error::Numeric(format!(
                        "QL iteration did not converge for eigenvalue index {l}"
                    )));
                }
                let g = diag[l];
                let mut p = (diag[l + 1] - g) / (2.0 * off[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                diag[l] = off[l] / (p + r);
                diag[l + 1] = off[l] * (p + r);
                let dl1 = diag[l + 1];
                let mut h = g - diag[l];
                for d in diag.iter_mut().skip(l + 2) {
                    *d -= h;
                }
                f += h;

                p = diag[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = off[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * off[i];
                    h = c * p;
                    r = p.hypot(off[i]);
                    off[i + 1] = s * r;
                    s = off[i] / r;
                    c = p / r;
                    p = c * diag[i] - s * g;
                    diag[i + 1] = h + s * (c * g + s * diag[i]);
                    if width > 0 {
                        let (top, bottom) = rows.split_at_mut((i + 1) * width);
                        let ri = &mut top[i * width..];
                        let ri1 = &mut bottom[..width];
                        for (a, b) in ri.iter_mut().zip(ri1.iter_mut()) {
                            let hb = *b;
                            *b = s * *a + c * hb;
                            *a = c * *a - s * hb;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * off[l] / dl1;
                off[l] = s * p;
                diag[l] = c * p;
                if off[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        diag[l] += f;
        off[l] = 0.0;
    }
    Ok(())
}

fn ascending_order(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    order
}

fn check_dense_input(matrix: &SymmetricMatrix, threshold: usize) -> Result<()> {
    if matrix.dim() > threshold {
        return Err(Error::Resource(format!(
            "dimension {} exceeds the dense threshold {threshold}",
            matrix.dim()
        )));
    }
    Ok(())
}

/// Index of the first component whose magnitude is not negligible.
fn first_significant(v: &[f64]) -> usize {
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    v.iter().position(|x| x.abs() > 1e-8 * scale).unwrap_or(0)
}

/// Full eigendecomposition with the default dense threshold.
pub fn eigh_dense(matrix: &SymmetricMatrix) -> Result<EigenDecomposition> {
    eigh_dense_with_threshold(matrix, DEFAULT_DENSE_THRESHOLD)
}

pub fn eigh_dense_with_threshold(
    matrix: &SymmetricMatrix,
    threshold: usize,
) -> Result<EigenDecomposition> {
    check_dense_input(matrix, threshold)?;
    let n = matrix.dim();
    let tri = Tridiagonal::reduce(matrix);
    let mut rows = tri.form_qt();
    let (mut diag, mut off) = (tri.diag, tri.off);
    tridiagonal_ql(&mut diag, &mut off, &mut rows, n)?;

    let order = ascending_order(&diag);
    let values: Vec<f64> = order.iter().map(|&k| diag[k]).collect();
    let mut vectors = Vec::with_capacity(n * n);
    for &k in &order {
        vectors.extend_from_slice(&rows[k * n..(k + 1) * n]);
    }

    // Clusters of (numerically) degenerate eigenvalues: re-orthonormalize and
    // order deterministically.
    let cluster_gap = 1e-10 * matrix.frobenius_norm().max(f64::MIN_POSITIVE);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && values[end] - values[end - 1] < cluster_gap {
            end += 1;
        }
        if end - start > 1 {
            settle_cluster(&mut vectors[start * n..end * n], n);
        }
        start = end;
    }
    for v in vectors.chunks_exact_mut(n) {
        let lead = first_significant(v);
        if v[lead] < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
    Ok(EigenDecomposition {
        dim: n,
        values,
        vectors,
    })
}

fn settle_cluster(block: &mut [f64], n: usize) {
    let count = block.len() / n;
    for i in 0..count {
        for j in 0..i {
            let (head, tail) = block.split_at_mut(i * n);
            let vj = &head[j * n..(j + 1) * n];
            let vi = &mut tail[..n];
            let dot: f64 = vi.iter().zip(vj).map(|(a, b)| a * b).sum();
            vi.iter_mut().zip(vj).for_each(|(a, b)| *a -= dot * b);
        }
        let vi = &mut block[i * n..(i + 1) * n];
        let norm = vi.iter().map(|x| x * x).sum::<f64>().sqrt();
        vi.iter_mut().for_each(|x| *x /= norm);
    }
    let mut rows: Vec<Vec<f64>> = block.chunks_exact(n).map(<[f64]>::to_vec).collect();
    rows.sort_by_key(|v| first_significant(v));
    for (dst, src) in block.chunks_exact_mut(n).zip(rows) {
        dst.copy_from_slice(&src);
    }
}

/// Eigenvalues only, ascending.
pub fn eigvalsh_dense(matrix: &SymmetricMatrix, threshold: usize) -> Result<Vec<f64>> {
    check_dense_input(matrix, threshold)?;
    let tri = Tridiagonal::reduce(matrix);
    let (mut diag, mut off) = (tri.diag, tri.off);
    tridiagonal_ql(&mut diag, &mut off, &mut [], 0)?;
    diag.sort_by(f64::total_cmp);
    Ok(diag)
}

/// Spectrum of `matrix` together with `|<phi_k|psi>|^2` for every eigenvector.
pub fn spectral_weights(
    matrix: &SymmetricMatrix,
    psi: &[f64],
    threshold: usize,
) -> Result<SpectralWeights> {
    check_dense_input(matrix, threshold)?;
    if psi.len() != matrix.dim() {
        return Err(Error::Input(format!(
            "state has dimension {} but the matrix has {}",
            psi.len(),
            matrix.dim()
        )));
    }
    let tri = Tridiagonal::reduce(matrix);
    let mut proj = psi.to_vec();
    tri.apply_qt(&mut proj);
    let (mut diag, mut off) = (tri.diag, tri.off);
    tridiagonal_ql(&mut diag, &mut off, &mut proj, 1)?;
    let order = ascending_order(&diag);
    Ok(SpectralWeights::new(
        order.iter().map(|&k| diag[k]).collect(),
        order.iter().map(|&k| proj[k] * proj[k]).collect(),
    ))
}

/// Lowest eigenvalue and a unit eigenvector.
pub fn lowest_eigenpair_dense(
    matrix: &SymmetricMatrix,
    threshold: usize,
) -> Result<(f64, Vec<f64>)> {
    check_dense_input(matrix, threshold)?;
    let n = matrix.dim();
    let tri = Tridiagonal::reduce(matrix);
    let (mut diag, mut off) = (tri.diag.clone(), tri.off.clone());
    tridiagonal_ql(&mut diag, &mut off, &mut [], 0)?;
    let lowest = diag.iter().copied().fold(f64::INFINITY, f64::min);

    let scale = tri
        .diag
        .iter()
        .zip(&tri.off)
        .fold(0.0f64, |m, (d, e)| m.max(d.abs() + 2.0 * e.abs()))
        .max(f64::MIN_POSITIVE);
    let mut x = vec![1.0; n];
    for _ in 0..3 {
        solve_shifted_tridiagonal(&tri.diag, &tri.off, lowest, scale, &mut x);
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::Numeric(
                "inverse iteration for the lowest eigenvector broke down".into(),
            ));
        }
        x.iter_mut().for_each(|v| *v /= norm);
    }
    tri.apply_q(&mut x);
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    x.iter_mut().for_each(|v| *v /= norm);
    Ok((lowest, x))
}

/// Lowest eigenpair of a symmetric tridiagonal matrix, plus the largest
/// eigenvalue magnitude. `off[k]` couples `k` and `k + 1`.
pub(crate) fn lowest_tridiagonal_pair(diag: &[f64], off: &[f64]) -> Result<(f64, Vec<f64>, f64)> {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut e = off.to_vec();
    e.resize(n, 0.0);
    tridiagonal_ql(&mut d, &mut e, &mut [], 0)?;
    let lowest = d.iter().copied().fold(f64::INFINITY, f64::min);
    let largest = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let scale = largest.max(f64::MIN_POSITIVE);
    let mut off_full = off.to_vec();
    off_full.resize(n, 0.0);
    let mut x = vec![1.0; n];
    for _ in 0..3 {
        solve_shifted_tridiagonal(diag, &off_full, lowest, scale, &mut x);
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::Numeric(
                "inverse iteration on the projected tridiagonal matrix broke down".into(),
            ));
        }
        x.iter_mut().for_each(|v| *v /= norm);
    }
    Ok((lowest, x, largest))
}

/// Solves `(T - shift) y = x` in place by Gaussian elimination with partial
/// pivoting; exactly singular pivots are nudged to `eps * scale`.
fn solve_shifted_tridiagonal(diag: &[f64], off: &[f64], shift: f64, scale: f64, x: &mut [f64]) {
    let n = diag.len();
    let tiny = f64::EPSILON * scale;
    let mut d: Vec<f64> = diag.iter().map(|v| v - shift).collect();
    if n == 1 {
        x[0] /= if d[0] == 0.0 { tiny } else { d[0] };
        return;
    }
    let mut dl: Vec<f64> = off[..n - 1].to_vec();
    let mut du: Vec<f64> = off[..n - 1].to_vec();
    let mut du2 = vec![0.0; n.saturating_sub(2)];
    let mut swapped = vec![false; n - 1];

    for i in 0..n - 1 {
        if d[i].abs() >= dl[i].abs() {
            if d[i] == 0.0 {
                d[i] = tiny;
            }
            let fact = dl[i] / d[i];
            dl[i] = fact;
            d[i + 1] -= fact * du[i];
        } else {
            swapped[i] = true;
            let fact = d[i] / dl[i];
            d[i] = dl[i];
            dl[i] = fact;
            let temp = du[i];
            du[i] = d[i + 1];
            d[i + 1] = temp - fact * d[i + 1];
            if i + 2 < n {
                du2[i] = du[i + 1];
                du[i + 1] *= -fact;
            }
        }
    }
    if d[n - 1] == 0.0 {
        d[n - 1] = tiny;
    }

    for i in 0..n - 1 {
        if swapped[i] {
            let temp = x[i];
            x[i] = x[i + 1];
            x[i + 1] = temp - dl[i] * x[i];
        } else {
            x[i + 1] -= dl[i] * x[i];
        }
    }
    x[n - 1] /= d[n - 1];
    x[n - 2] = (x[n - 2] - du[n - 2] * x[n - 1]) / d[n - 2];
    for i in (0..n - 2).rev() {
        x[i] = (x[i] - du[i] * x[i + 1] - du2[i] * x[i + 2]) / d[i];
    }
}
