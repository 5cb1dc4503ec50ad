//! The full Dicke Hamiltonian `ω0 Jz + ω a†a + (λ/√N)(a† + a)(J+ + J-)`
//! in a truncated boson space, solved by exact diagonalization.
//!
//! Basis index is `n (N + 1) + k` with boson number `n < n_b` and
//! `k = m + N/2 ∈ 0..=N`. The parity `(-1)^(n + k)` commutes with `H`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::effective::{fidelity_scaling, mode_energies, scaling_eta, DickeParams};
use crate::echo::{EchoMeta, EchoSeries};
use crate::error::{Error, Result};
use crate::linalg::{
    lanczos_ground, lowest_eigenpair_dense, spectral_weights, Entry, LanczosOptions,
    SymmetricMatrix, DEFAULT_DENSE_THRESHOLD,
};

/// Largest Hilbert-space dimension a Hamiltonian is built for by default.
pub const DEFAULT_MAX_DIM: usize = 4_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncatedDicke {
    /// Number of atoms `N`; the collective spin is `j = N/2`.
    pub n_atoms: usize,
    /// Boson levels `0..n_bosons`.
    pub n_bosons: usize,
    pub omega: f64,
    pub omega0: f64,
    pub lambda: f64,
}

impl TruncatedDicke {
    pub fn new(n_atoms: usize, n_bosons: usize, params: DickeParams) -> Result<Self> {
        if n_atoms < 1 {
            return Err(Error::Input("the atom number must be at least 1".into()));
        }
        if n_bosons < 2 {
            return Err(Error::Input("the boson cutoff must be at least 2".into()));
        }
        Ok(Self {
            n_atoms,
            n_bosons,
            omega: params.omega,
            omega0: params.omega0,
            lambda: params.lambda,
        })
    }

    pub fn params(&self) -> DickeParams {
        DickeParams {
            omega: self.omega,
            omega0: self.omega0,
            lambda: self.lambda,
        }
    }

    pub fn dim(&self) -> usize {
        self.n_bosons * (self.n_atoms + 1)
    }

    pub fn index(&self, boson: usize, k: usize) -> usize {
        boson * (self.n_atoms + 1) + k
    }

    /// `(n, m)` for a basis index, with `m = k - N/2`.
    pub fn state(&self, index: usize) -> (usize, f64) {
        let width = self.n_atoms + 1;
        let k = index % width;
        (index / width, k as f64 - 0.5 * self.n_atoms as f64)
    }
}

/// Parity sector of `(-1)^(n + k)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    fn of(boson: usize, k: usize) -> Self {
        if (boson + k).is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

/// Full-space indices of one parity sector, ascending.
pub fn parity_indices(spec: &TruncatedDicke, parity: Parity) -> Vec<usize> {
    (0..spec.n_bosons)
        .flat_map(|n| (0..=spec.n_atoms).map(move |k| (n, k)))
        .filter(|&(n, k)| Parity::of(n, k) == parity)
        .map(|(n, k)| spec.index(n, k))
        .collect()
}

pub fn build_hamiltonian(spec: &TruncatedDicke) -> Result<SymmetricMatrix> {
    build_hamiltonian_capped(spec, DEFAULT_MAX_DIM)
}

pub fn build_hamiltonian_capped(spec: &TruncatedDicke, max_dim: usize) -> Result<SymmetricMatrix> {
    let dim = spec.dim();
    if dim > max_dim {
        return Err(Error::Resource(format!(
            "Hilbert space dimension {dim} exceeds the cap {max_dim}"
        )));
    }
    let big_n = spec.n_atoms;
    let g = spec.lambda / (big_n as f64).sqrt();
    let half = 0.5 * big_n as f64;
    let mut entries = Vec::with_capacity(3 * dim);
    for n in 0..spec.n_bosons {
        let boson = ((n + 1) as f64).sqrt();
        for k in 0..=big_n {
            let i = spec.index(n, k);
            entries.push(Entry {
                value: spec.omega * n as f64 + spec.omega0 * (k as f64 - half),
                row: i,
                col: i,
            });
            if n + 1 == spec.n_bosons || g == 0.0 {
                continue;
            }
            // J+ : sqrt(j(j+1) - m(m+1)) = sqrt((N - k)(k + 1))
            if k < big_n {
                entries.push(Entry {
                    value: g * boson * (((big_n - k) * (k + 1)) as f64).sqrt(),
                    row: i,
                    col: spec.index(n + 1, k + 1),
                });
            }
            // J- : sqrt(j(j+1) - m(m-1)) = sqrt(k (N - k + 1))
            if k > 0 {
                entries.push(Entry {
                    value: g * boson * ((k * (big_n - k + 1)) as f64).sqrt(),
                    row: i,
                    col: spec.index(n + 1, k - 1),
                });
            }
        }
    }
    SymmetricMatrix::from_entries(dim, entries)
}

/// Solver controls for exact diagonalization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Largest block solved with the dense eigensolver.
    pub dense_threshold: usize,
    pub max_dim: usize,
    pub lanczos_tol: f64,
    pub lanczos_max_iter: usize,
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            dense_threshold: DEFAULT_DENSE_THRESHOLD,
            max_dim: DEFAULT_MAX_DIM,
            lanczos_tol: 1e-11,
            lanczos_max_iter: 4000,
            seed: 0x5EED,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundState {
    pub energy: f64,
    /// Unit vector in the full basis; its largest-magnitude component is positive.
    pub vector: Vec<f64>,
    pub parity: Parity,
    /// Set when the lowest levels of the two sectors lie within `1e-10`.
    pub quasi_degenerate: bool,
}

/// Energy gap below which the two parity sectors count as degenerate.
pub const QUASI_DEGENERACY_GAP: f64 = 1e-10;

fn block_ground(h: &SymmetricMatrix, opts: &SolverOptions) -> Result<(f64, Vec<f64>)> {
    if h.dim() <= opts.dense_threshold {
        return lowest_eigenpair_dense(h, opts.dense_threshold);
    }
    let lanczos = LanczosOptions {
        max_iter: opts.lanczos_max_iter,
        seed: opts.seed,
        ..Default::default()
    };
    let r = lanczos_ground(h, opts.lanczos_tol, &lanczos)?;
    Ok((r.energy, r.vector))
}

fn sector_ground(
    spec: &TruncatedDicke,
    h: &SymmetricMatrix,
    parity: Parity,
    opts: &SolverOptions,
) -> Result<(f64, Vec<f64>)> {
    let indices = parity_indices(spec, parity);
    let block = h.submatrix(&indices)?;
    let (e, v) = block_ground(&block, opts)?;
    let mut full = vec![0.0; spec.dim()];
    for (&i, &x) in indices.iter().zip(&v) {
        full[i] = x;
    }
    Ok((e, full))
}

fn fix_sign(v: &mut [f64]) {
    let pivot = v.iter().copied().fold(
        0.0f64,
        |best, x| if x.abs() > best.abs() { x } else { best },
    );
    if pivot < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Ground state of the truncated Hamiltonian.
///
/// Below `λc` only the even sector is solved. Above it both sectors are
/// solved; on a tie within [`QUASI_DEGENERACY_GAP`] the even state is kept
/// and the result is flagged.
pub fn ground_state_exact(spec: &TruncatedDicke, opts: &SolverOptions) -> Result<GroundState> {
    let h = build_hamiltonian_capped(spec, opts.max_dim)?;
    let (mut energy, mut vector) = sector_ground(spec, &h, Parity::Even, opts)?;
    let mut parity = Parity::Even;
    let mut quasi_degenerate = false;
    if spec.lambda > spec.params().lambda_c() && spec.dim() > 1 {
        let (e_odd, v_odd) = sector_ground(spec, &h, Parity::Odd, opts)?;
        quasi_degenerate = (e_odd - energy).abs() < QUASI_DEGENERACY_GAP;
        if !quasi_degenerate && e_odd < energy {
            energy = e_odd;
            vector = v_odd;
            parity = Parity::Odd;
        }
    }
    fix_sign(&mut vector);
    Ok(GroundState {
        energy,
        vector,
        parity,
        quasi_degenerate,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `|<g(λ1)|g(λ2)>|` for two couplings with the same truncation.
pub fn fidelity_exact(
    base: &DickeParams,
    n_atoms: usize,
    n_bosons: usize,
    lambda1: f64,
    lambda2: f64,
    opts: &SolverOptions,
) -> Result<f64> {
    if lambda1 == lambda2 {
        base.with_lambda(lambda1)?;
        return Ok(1.0);
    }
    let s1 = TruncatedDicke::new(n_atoms, n_bosons, base.with_lambda(lambda1)?)?;
    let s2 = TruncatedDicke::new(n_atoms, n_bosons, base.with_lambda(lambda2)?)?;
    let (g1, g2) = rayon::join(
        || ground_state_exact(&s1, opts),
        || ground_state_exact(&s2, opts),
    );
    Ok(dot(&g1?.vector, &g2?.vector).abs().min(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceEntry {
    pub n_atoms: usize,
    pub n_bosons: usize,
    pub lp_exact: f64,
    /// `|lp_exact - L_p(η)|`.
    pub d: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceSeries {
    pub lambda1: f64,
    pub lambda2: f64,
    /// Thermodynamic-limit fidelity from the scaling law.
    pub lp_limit: f64,
    pub entries: Vec<ConvergenceEntry>,
}

impl ConvergenceSeries {
    /// Successive log-log slopes `Δ ln D / Δ ln N`.
    pub fn slopes(&self) -> Vec<f64> {
        self.entries
            .windows(2)
            .map(|w| {
                (w[1].d.ln() - w[0].d.ln())
                    / ((w[1].n_atoms as f64).ln() - (w[0].n_atoms as f64).ln())
            })
            .collect()
    }
}

/// How the boson cutoff follows the atom number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CutoffRule {
    /// `n_b = factor * N`.
    Proportional(usize),
    Fixed(usize),
}

impl CutoffRule {
    pub fn cutoff(&self, n_atoms: usize) -> usize {
        match *self {
            CutoffRule::Proportional(f) => f * n_atoms,
            CutoffRule::Fixed(n) => n,
        }
    }
}

impl Default for CutoffRule {
    fn default() -> Self {
        CutoffRule::Proportional(1)
    }
}

/// `D(N) = |L_p^N - L_p|` over an ascending list of atom numbers.
pub fn convergence_d(
    base: &DickeParams,
    lambda1: f64,
    lambda2: f64,
    n_list: &[usize],
    cutoff: CutoffRule,
    opts: &SolverOptions,
) -> Result<ConvergenceSeries> {
    if n_list.is_empty() {
        return Err(Error::Input("the atom-number list is empty".into()));
    }
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Input(
            "atom numbers must be strictly increasing".into(),
        ));
    }
    let lp_limit = if lambda1 == lambda2 {
        1.0
    } else {
        fidelity_scaling(scaling_eta(lambda1, lambda2, base.lambda_c())?.eta)?
    };
    let entries = n_list
        .par_iter()
        .map(|&n| {
            let nb = cutoff.cutoff(n);
            let lp = fidelity_exact(base, n, nb, lambda1, lambda2, opts)?;
            Ok(ConvergenceEntry {
                n_atoms: n,
                n_bosons: nb,
                lp_exact: lp,
                d: (lp - lp_limit).abs(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceSeries {
        lambda1,
        lambda2,
        lp_limit,
        entries,
    })
}

/// Echo `|<g(λ2)| exp(-i H(λ1) t) |g(λ2)>|^2` from the full even-sector spectrum.
///
/// The rescaled grid uses the soft-mode energy `e1(λ1)` of the effective model.
pub fn echo_exact(
    base: &DickeParams,
    n_atoms: usize,
    n_bosons: usize,
    lambda1: f64,
    lambda2: f64,
    t_grid: &[f64],
    opts: &SolverOptions,
) -> Result<EchoSeries> {
    let p1 = base.with_lambda(lambda1)?;
    let p2 = base.with_lambda(lambda2)?;
    let s1 = TruncatedDicke::new(n_atoms, n_bosons, p1)?;
    let s2 = TruncatedDicke::new(n_atoms, n_bosons, p2)?;
    let indices = parity_indices(&s1, Parity::Even);
    if indices.len() > opts.dense_threshold {
        return Err(Error::Resource(format!(
            "echo needs the full spectrum of a {}-dimensional sector, above the dense threshold {}; \
             reduce N or the boson cutoff",
            indices.len(),
            opts.dense_threshold
        )));
    }
    let omega1 = mode_energies(&p1).e1;
    if omega1 == 0.0 {
        return Err(Error::Domain(
            "the rescaled time is undefined when λ1 equals λc".into(),
        ));
    }
    let h1 = build_hamiltonian_capped(&s1, opts.max_dim)?.submatrix(&indices)?;
    let h2 = build_hamiltonian_capped(&s2, opts.max_dim)?.submatrix(&indices)?;
    let (_, psi0) = lowest_eigenpair_dense(&h2, opts.dense_threshold)?;
    let weights = spectral_weights(&h1, &psi0, opts.dense_threshold)?;
    let norm = weights.total();
    let m: Vec<f64> = t_grid
        .iter()
        .map(|&t| weights.survival(t) / (norm * norm))
        .collect();
    let meta = EchoMeta {
        source: "dicke-exact".into(),
        eta: scaling_eta(lambda1, lambda2, p1.lambda_c())
            .ok()
            .map(|s| s.eta),
        coupling1: Some(lambda1),
        coupling2: Some(lambda2),
        n_atoms: Some(n_atoms),
        n_bosons: Some(n_bosons),
        period: Some(std::f64::consts::PI / omega1),
        warnings: Vec::new(),
    };
    EchoSeries::new(t_grid.to_vec(), m, omega1, meta)
}
