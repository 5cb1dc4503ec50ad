//! Single-mode Bogoliubov relation between two ground-state bases.
//!
//! If `c(λ1) = P c(λ2) + Q c†(λ2)` with `P = cosh r`, `Q = sinh r`, the vacuum
//! of one basis is a squeezed vacuum of the other with expansion parameter
//! `q = tanh r`. Only metric quantities (absolute overlaps) are computed, so
//! the free phases of the transformation are fixed to zero.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};

/// Largest `|r|` accepted by [`ground_expansion`].
pub const DEFAULT_R_CAP: f64 = 20.0;

/// Relative squeeze between two single-mode ground states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqueezeMap {
    r: f64,
}

impl SqueezeMap {
    pub fn identity() -> Self {
        Self { r: 0.0 }
    }

    pub fn from_r(r: f64) -> Result<Self> {
        ensure_finite("r", r)?;
        Ok(Self { r })
    }

    /// Builds the map whose expansion parameter `tanh r` equals `q`.
    pub fn from_tanh(q: f64) -> Result<Self> {
        ensure_finite("tanh r", q)?;
        if q.abs() >= 1.0 {
            return Err(Error::Domain(format!("|tanh r| must be below 1, got {q}")));
        }
        Ok(Self { r: q.atanh() })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn p11(&self) -> f64 {
        self.r.cosh()
    }

    pub fn q11(&self) -> f64 {
        self.r.sinh()
    }

    /// Expansion parameter `q = tanh r`.
    pub fn tanh(&self) -> f64 {
        self.r.tanh()
    }

    /// `1 - q^2`, evaluated as `sech^2 r` so it keeps full relative precision
    /// when `|q|` is close to 1.
    pub fn one_minus_q2(&self) -> f64 {
        let s = 1.0 / self.r.cosh();
        s * s
    }

    pub fn theta_c(&self) -> f64 {
        0.0
    }

    pub fn theta_r(&self) -> f64 {
        0.0
    }

    /// The map in the opposite direction.
    pub fn inverse(&self) -> Self {
        Self { r: -self.r }
    }
}

/// Map between ground states with Bogoliubov angles `theta1`, `theta2`;
/// `r = (theta2 - theta1) / 2`.
pub fn relative_map(theta1: f64, theta2: f64) -> Result<SqueezeMap> {
    ensure_finite("theta1", theta1)?;
    ensure_finite("theta2", theta2)?;
    SqueezeMap::from_r((theta2 - theta1) / 2.0)
}

/// Fidelity `|<0_1|0_2>| = (1 - tanh^2 r)^{1/4}`.
pub fn fidelity(map: &SqueezeMap) -> f64 {
    map.p11().sqrt().recip()
}

/// Amplitudes `a_{2n} = <2n_1|0_2>` for `n = 0..=n_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundExpansion {
    amplitudes: Vec<f64>,
    tail_bound: f64,
}

impl GroundExpansion {
    /// `a_{2n}` indexed by `n`; odd occupation numbers have zero amplitude.
    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn n_max(&self) -> usize {
        self.amplitudes.len() - 1
    }

    /// Upper bound on the probability weight beyond `n_max`.
    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a * a).sum()
    }

    /// Probability of finding `2n` quanta.
    pub fn probabilities(&self) -> impl Iterator<Item = f64> + '_ {
        self.amplitudes.iter().map(|a| a * a)
    }
}

fn check_r_cap(map: &SqueezeMap) -> Result<()> {
    if map.r().abs() >= DEFAULT_R_CAP {
        return Err(Error::Domain(format!(
            "|r| = {} reaches the cap {DEFAULT_R_CAP}; refine the parameter step",
            map.r().abs()
        )));
    }
    Ok(())
}

/// `ln q^2`, accurate for `|q|` near 1.
fn ln_q2(map: &SqueezeMap) -> f64 {
    let r = map.r().abs();
    if r == 0.0 {
        return f64::NEG_INFINITY;
    }
    // tanh r = (1 - e^{-2r}) / (1 + e^{-2r})
    let e = (-2.0 * r).exp();
    2.0 * ((-e).ln_1p() - e.ln_1p())
}

/// Bound on the weight beyond `n_max`: `c_{n+1} q^{2(n+1)} / sqrt(1 - q^2)`
/// where `c_k = (2k-1)!!/(2k)!!` is the largest remaining coefficient.
fn tail_after(map: &SqueezeMap, n_max: usize, c_next: f64) -> f64 {
    let k = (n_max + 1) as f64;
    c_next * (k * ln_q2(map)).exp() / map.one_minus_q2().sqrt()
}

pub fn ground_expansion(map: &SqueezeMap, n_max: usize) -> Result<GroundExpansion> {
    check_r_cap(map)?;
    let q = map.tanh();
    let mut amplitudes = Vec::with_capacity(n_max + 1);
    let mut a = fidelity(map);
    // c tracks (2n-1)!!/(2n)!! multiplicatively.
    let mut c = 1.0;
    amplitudes.push(a);
    for n in 1..=n_max {
        let ratio = (2 * n - 1) as f64 / (2 * n) as f64;
        c *= ratio;
        a *= q * ratio.sqrt();
        amplitudes.push(a);
    }
    let c_next = c * (2 * n_max + 1) as f64 / (2 * n_max + 2) as f64;
    let tail_bound = if q == 0.0 {
        0.0
    } else {
        tail_after(map, n_max, c_next)
    };
    Ok(GroundExpansion {
        amplitudes,
        tail_bound,
    })
}

/// Smallest truncation whose tail bound is at most `tol`.
pub fn expansion_order_for(map: &SqueezeMap, tol: f64) -> Result<usize> {
    check_r_cap(map)?;
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::Input(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    if map.r() == 0.0 {
        return Ok(0);
    }
    const LIMIT: usize = 50_000_000;
    let mut c = 1.0;
    for n in 0..LIMIT {
        let c_next = c * (2 * n + 1) as f64 / (2 * n + 2) as f64;
        if tail_after(map, n, c_next) <= tol {
            return Ok(n);
        }
        c = c_next;
    }
    Err(Error::Numeric(format!(
        "expansion needs more than {LIMIT} terms for tolerance {tol}"
    )))
}

/// `|<n_1|m_2>|` for `n, m = 0..=n_max`, stored column by column.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapMatrix {
    size: usize,
    signed: Vec<f64>,
}

impl OverlapMatrix {
    pub fn n_max(&self) -> usize {
        self.size - 1
    }

    /// `C_nm`.
    pub fn get(&self, n: usize, m: usize) -> f64 {
        self.signed(n, m).abs()
    }

    /// The real overlap `<n_1|m_2>` with the phase convention of this crate.
    pub fn signed(&self, n: usize, m: usize) -> f64 {
        assert!(
            n < self.size && m < self.size,
            "index ({n}, {m}) out of range"
        );
        self.signed[m * self.size + n]
    }

    /// `C_nm` for fixed `m` and `n = 0..=n_max`.
    pub fn column(&self, m: usize) -> Vec<f64> {
        let start = m * self.size;
        self.signed[start..start + self.size]
            .iter()
            .map(|x| x.abs())
            .collect()
    }

    pub fn column_norm_sqr(&self, m: usize) -> f64 {
        let start = m * self.size;
        self.signed[start..start + self.size]
            .iter()
            .map(|x| x * x)
            .sum()
    }

    /// Column `m`, provided it holds at least `1 - tol` of its weight.
    pub fn converged_column(&self, m: usize, tol: f64) -> Result<Vec<f64>> {
        let norm = self.column_norm_sqr(m);
        if norm < 1.0 - tol {
            return Err(Error::Numeric(format!(
                "column {m} holds only {norm:.3e} of its weight at n_max = {}; increase n_max",
                self.n_max()
            )));
        }
        Ok(self.column(m))
    }
}

/// Overlaps `<n_1|m_2>` for rows `0..=n_max`, columns `0..=m_max`.
///
/// Inserting the Bogoliubov relation into `<n_1|c(λ1)|m_2> = <n_1|(P c_2 + Q c_2†)|m_2>`
/// gives `sqrt(n+1) B_{n+1,m} = (sqrt(m) B_{n,m-1} + Q sqrt(n) B_{n-1,m}) / P`,
/// seeded from the first row `B_{0,m}`.
fn overlap_columns(map: &SqueezeMap, n_max: usize, m_max: usize) -> Vec<f64> {
    let rows = n_max + 1;
    let (p, qq) = (map.p11(), map.q11());
    let t = map.tanh();
    let mut b = vec![0.0; rows * (m_max + 1)];
    let mut seed = fidelity(map);
    for m in 0..=m_max {
        if m > 0 && m % 2 == 0 {
            seed *= -t * ((m - 1) as f64 / m as f64).sqrt();
        }
        let col = m * rows;
        b[col] = if m % 2 == 0 { seed } else { 0.0 };
        for n in 0..n_max {
            let mut acc = 0.0;
            if m > 0 {
                acc += (m as f64).sqrt() * b[col - rows + n];
            }
            if n > 0 {
                acc += qq * (n as f64).sqrt() * b[col + n - 1];
            }
            b[col + n + 1] = acc / (p * ((n + 1) as f64).sqrt());
        }
    }
    b
}

pub fn overlap_matrix(map: &SqueezeMap, n_max: usize) -> Result<OverlapMatrix> {
    check_r_cap(map)?;
    Ok(OverlapMatrix {
        size: n_max + 1,
        signed: overlap_columns(map, n_max, n_max),
    })
}

/// Column weight that must be captured before χ is reported.
pub const PARTICIPATION_TOL: f64 = 1e-10;

/// `χ = 1 / Σ_n C_nm^4` for eigenstate `m` of the second basis.
pub fn participation_ratio(map: &SqueezeMap, m: usize, n_max: usize) -> Result<f64> {
    check_r_cap(map)?;
    if m > n_max {
        return Err(Error::Input(format!("column {m} exceeds n_max = {n_max}")));
    }
    let rows = n_max + 1;
    let b = overlap_columns(map, n_max, m);
    let col = &b[m * rows..(m + 1) * rows];
    let norm: f64 = col.iter().map(|x| x * x).sum();
    if norm < 1.0 - PARTICIPATION_TOL {
        return Err(Error::Numeric(format!(
            "column {m} holds only {norm:.3e} of its weight at n_max = {n_max}; increase n_max"
        )));
    }
    let s4: f64 = col.iter().map(|x| x.powi(4)).sum();
    Ok(1.0 / s4)
}
