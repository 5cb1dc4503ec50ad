//! Thermodynamic-limit Dicke model: two coupled oscillators in each phase.
//!
//! In position representation each phase reduces to
//! `H = (p^T p + x^T K x) / 2` for a 2x2 positive matrix `K`, whose
//! eigenvalues are the squared mode energies. The ground state is the
//! Gaussian `exp(-x^T A x / 2)` with `A = K^{1/2} = U^T diag(e1, e2) U`.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, ensure_positive, Error, Result};
use crate::squeeze::SqueezeMap;

/// Critical exponent of the soft-mode gap, `e1 ~ |λ - λc|^φ`.
pub const PHI: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DickeParams {
    pub omega: f64,
    pub omega0: f64,
    pub lambda: f64,
}

impl DickeParams {
    pub fn new(omega: f64, omega0: f64, lambda: f64) -> Result<Self> {
        ensure_positive("omega", omega)?;
        ensure_positive("omega0", omega0)?;
        ensure_finite("lambda", lambda)?;
        if lambda < 0.0 {
            return Err(Error::Input(format!(
                "lambda must be non-negative, got {lambda}"
            )));
        }
        Ok(Self {
            omega,
            omega0,
            lambda,
        })
    }

    pub fn lambda_c(&self) -> f64 {
        0.5 * (self.omega * self.omega0).sqrt()
    }

    pub fn phase(&self) -> Phase {
        if self.lambda <= self.lambda_c() {
            Phase::Normal
        } else {
            Phase::SuperRadiant
        }
    }

    /// Same frequencies, different coupling.
    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        Self::new(self.omega, self.omega0, lambda)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    /// `λ <= λc`; the critical point itself is tagged normal.
    Normal,
    SuperRadiant,
}

impl Phase {
    pub fn as_str(&self) -> &'static str {
        match self {
            Phase::Normal => "normal",
            Phase::SuperRadiant => "super-radiant",
        }
    }
}

impl std::fmt::Display for Phase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

pub fn critical_coupling(omega: f64, omega0: f64) -> Result<f64> {
    ensure_positive("omega", omega)?;
    ensure_positive("omega0", omega0)?;
    Ok(0.5 * (omega * omega0).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeSpectrum {
    /// Soft mode energy; vanishes at the critical point.
    pub e1: f64,
    pub e2: f64,
    pub phase: Phase,
    /// `ωω0 / (4λ^2)`, only in the super-radiant phase.
    pub mu: Option<f64>,
    /// Rotation angle with `tan 2γ = 2 K12 / (K22 - K11)`; the soft mode is
    /// `(cos γ, -sin γ)` in the (boson, atom) coordinates.
    pub gamma_angle: f64,
}

impl ModeSpectrum {
    /// Rows of the orthogonal matrix `U` (soft mode first).
    pub fn rotation(&self) -> [[f64; 2]; 2] {
        let (s, c) = self.gamma_angle.sin_cos();
        [[c, -s], [s, c]]
    }

    /// `A = U^T diag(e1, e2) U`, row-major.
    pub fn gaussian_matrix(&self) -> [[f64; 2]; 2] {
        let u = self.rotation();
        let mut a = [[0.0; 2]; 2];
        for (i, row) in a.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = self.e1 * u[0][i] * u[0][j] + self.e2 * u[1][i] * u[1][j];
            }
        }
        a
    }
}

/// `K` entries `(K11, K12, K22)` and `det K` computed without cancellation.
fn k_matrix(p: &DickeParams) -> (f64, f64, f64, f64, Option<f64>) {
    let (w, w0, l) = (p.omega, p.omega0, p.lambda);
    let lc = p.lambda_c();
    if l <= lc {
        let det = 4.0 * w * w0 * (lc - l) * (lc + l);
        (w * w, 2.0 * l * (w * w0).sqrt(), w0 * w0, det, None)
    } else {
        let mu = w * w0 / (4.0 * l * l);
        // 1/μ^2 - 1 = (1 - μ)(1 + μ)/μ^2 with 1 - μ = (λ - λc)(λ + λc)/λ^2.
        let one_minus_mu = (l - lc) * (l + lc) / (l * l);
        let det = w * w * w0 * w0 * one_minus_mu * (1.0 + mu) / (mu * mu);
        (w * w, w * w0, w0 * w0 / (mu * mu), det, Some(mu))
    }
}

pub fn mode_energies(params: &DickeParams) -> ModeSpectrum {
    let (a, b, c, det, mu) = k_matrix(params);
    let half_tr = 0.5 * (a + c);
    let disc = (0.25 * (a - c) * (a - c) + b * b).sqrt();
    let e2_sq = half_tr + disc;
    let e1_sq = (det / e2_sq).max(0.0);
    ModeSpectrum {
        e1: e1_sq.sqrt(),
        e2: e2_sq.sqrt(),
        phase: params.phase(),
        mu,
        gamma_angle: 0.5 * (2.0 * b).atan2(c - a),
    }
}

/// Leading-order soft-mode gap below the critical point.
pub fn near_critical_gap(params: &DickeParams) -> Result<f64> {
    let lc = params.lambda_c();
    if params.lambda > lc {
        return Err(Error::Domain(format!(
            "near-critical gap formula holds for λ <= λc = {lc}, got λ = {}",
            params.lambda
        )));
    }
    let (w, w0) = (params.omega, params.omega0);
    Ok((8.0 * lc * (lc - params.lambda) * w * w0 / (w * w + w0 * w0)).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingPair {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda_c: f64,
    pub eta: f64,
    pub phi: f64,
}

/// `η = (λ1 - λc) / (λ2 - λc)` for two couplings in the same phase.
pub fn scaling_eta(lambda1: f64, lambda2: f64, lambda_c: f64) -> Result<ScalingPair> {
    ensure_finite("lambda1", lambda1)?;
    ensure_finite("lambda2", lambda2)?;
    ensure_finite("lambda_c", lambda_c)?;
    let (d1, d2) = (lambda1 - lambda_c, lambda2 - lambda_c);
    if d1 == 0.0 || d2 == 0.0 {
        return Err(Error::Domain(format!(
            "η is undefined when a coupling equals λc = {lambda_c}"
        )));
    }
    if d1.signum() != d2.signum() {
        return Err(Error::CrossPhase {
            first: lambda1,
            second: lambda2,
            critical: lambda_c,
        });
    }
    Ok(ScalingPair {
        lambda1,
        lambda2,
        lambda_c,
        eta: d1 / d2,
        phi: PHI,
    })
}

/// Couplings `(λ1, λ2)` on one side of `λc` with ratio `η` and
/// `|λ2 - λc| = scale`.
pub fn pair_for_eta(lambda_c: f64, eta: f64, scale: f64, phase: Phase) -> Result<(f64, f64)> {
    ensure_positive("eta", eta)?;
    ensure_positive("scale", scale)?;
    let sign = match phase {
        Phase::Normal => -1.0,
        Phase::SuperRadiant => 1.0,
    };
    let l2 = lambda_c + sign * scale;
    let l1 = lambda_c + sign * eta * scale;
    if l1 < 0.0 || l2 < 0.0 {
        return Err(Error::Domain(format!(
            "η = {eta} at scale {scale} needs a negative coupling"
        )));
    }
    Ok((l1, l2))
}

/// How the orthogonal matrices in the Gaussian overlap are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RotationMode {
    /// Each coupling uses its own mixing angle.
    #[default]
    PerCoupling,
    /// A common `U`; the overlap then factorizes over modes.
    Shared,
}

/// Overlap of the two Gaussian ground states:
/// `2 [det A2 / det A1]^{1/4} / [det(1 + A1^{-1} A2)]^{1/2}`.
pub fn fidelity_gaussian(p1: &DickeParams, p2: &DickeParams, mode: RotationMode) -> Result<f64> {
    let same = |x: f64, y: f64| (x - y).abs() <= 1e-12 * x.abs().max(y.abs());
    if !same(p1.omega, p2.omega) || !same(p1.omega0, p2.omega0) {
        return Err(Error::Input(
            "both parameter sets must share omega and omega0".into(),
        ));
    }
    if p1.lambda == p2.lambda {
        return Ok(1.0);
    }
    let lc = p1.lambda_c();
    if p1.lambda == lc || p2.lambda == lc {
        return Ok(0.0);
    }
    if p1.phase() != p2.phase() {
        return Err(Error::CrossPhase {
            first: p1.lambda,
            second: p2.lambda,
            critical: lc,
        });
    }
    let (s1, s2) = (mode_energies(p1), mode_energies(p2));
    let delta = match mode {
        RotationMode::PerCoupling => s2.gamma_angle - s1.gamma_angle,
        RotationMode::Shared => 0.0,
    };
    let (sn, cs) = delta.sin_cos();
    let (c2, sn2) = (cs * cs, sn * sn);
    // det(A1 + A2) = det A1 + det A2 + tr(adj(A1) A2), every term non-negative.
    let det_sum = s1.e1 * s1.e2
        + s2.e1 * s2.e2
        + c2 * (s1.e2 * s2.e1 + s1.e1 * s2.e2)
        + sn2 * (s1.e2 * s2.e2 + s1.e1 * s2.e1);
    let num = 2.0 * (s1.e1 * s1.e2 * s2.e1 * s2.e2).powf(0.25);
    Ok(num / det_sum.sqrt())
}

/// Thermodynamic-limit fidelity law `sqrt(2) η^{1/8} / sqrt(sqrt(η) + 1)`.
pub fn fidelity_scaling(eta: f64) -> Result<f64> {
    ensure_positive("eta", eta)?;
    Ok(std::f64::consts::SQRT_2 * eta.powf(0.125) / (eta.sqrt() + 1.0).sqrt())
}

/// Soft-mode squeeze between the ground states at `p1` and `p2`, using the
/// Bogoliubov angle `Θ(λ) = -ln e1(λ)`.
///
/// For `ω = ω0` the soft mode decouples exactly and the resulting map
/// reproduces the two-mode overlap; near `λc` its parameter approaches
/// `(sqrt(η) - 1)/(sqrt(η) + 1)` for any frequencies.
pub fn soft_mode_map(p1: &DickeParams, p2: &DickeParams) -> Result<SqueezeMap> {
    let lc = p1.lambda_c();
    if p1.phase() != p2.phase() {
        return Err(Error::CrossPhase {
            first: p1.lambda,
            second: p2.lambda,
            critical: lc,
        });
    }
    let (e1, e2) = (mode_energies(p1).e1, mode_energies(p2).e1);
    if e1 == 0.0 || e2 == 0.0 {
        return Err(Error::Domain(format!("soft mode is gapless at λc = {lc}")));
    }
    crate::squeeze::relative_map(-e1.ln(), -e2.ln())
}
