//! Real symmetric linear algebra: storage, dense and Krylov eigensolvers,
//! and spectral time propagation.

mod dense;
mod lanczos;
mod matrix;

use num_complex::Complex64;

pub use dense::{
    eigh_dense, eigh_dense_with_threshold, eigvalsh_dense, lowest_eigenpair_dense,
    spectral_weights, EigenDecomposition, DEFAULT_DENSE_THRESHOLD,
};
pub use lanczos::{lanczos_ground, LanczosOptions, LanczosResult};
pub use matrix::{Entry, FnOperator, LinearOperator, SymmetricMatrix};

use crate::error::{Error, Result};

/// Energies `E_k` and populations `|<phi_k|psi>|^2` of a state in an eigenbasis.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralWeights {
    energies: Vec<f64>,
    weights: Vec<f64>,
}

impl SpectralWeights {
    pub(crate) fn new(energies: Vec<f64>, weights: Vec<f64>) -> Self {
        debug_assert_eq!(energies.len(), weights.len());
        Self { energies, weights }
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Total population; 1 for a normalized state.
    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Survival amplitude `<psi|exp(-iHt)|psi> = sum_k w_k exp(-i E_k t)`.
    pub fn amplitude(&self, t: f64) -> Complex64 {
        self.energies
            .iter()
            .zip(&self.weights)
            .map(|(&e, &w)| Complex64::from_polar(w, -e * t))
            .sum()
    }

    /// Survival probability `|amplitude(t)|^2`.
    pub fn survival(&self, t: f64) -> f64 {
        self.amplitude(t).norm_sqr()
    }
}

/// `<psi0|exp(-iHt)|psi0>` for the Hamiltonian whose decomposition is `decomp`.
pub fn spectral_propagate(decomp: &EigenDecomposition, psi0: &[f64], t: f64) -> Result<Complex64> {
    if !t.is_finite() {
        return Err(Error::Input(format!("time must be finite, got {t}")));
    }
    Ok(decomp.weights(psi0)?.amplitude(t))
}
