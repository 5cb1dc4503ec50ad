//! Lipkin-Meshkov-Glick model in the Holstein-Primakoff (large-N) limit.
//!
//! In both phases the model reduces to one mode `Δ (b†b)` whose ground
//! state is squeezed by the Bogoliubov angle `Θ`. The closed forms below are
//! `Θ = atanh(...)` rewritten as logarithms of the factored arguments so they
//! stay accurate next to `h = 1`.

use serde::{Deserialize, Serialize};

use crate::echo::{survival_closed, EchoSeries};
use crate::error::{ensure_finite, Error, Result};
use crate::squeeze::{fidelity, relative_map, SqueezeMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LmgPhase {
    /// `h > 1`.
    Symmetric,
    /// `h < 1`.
    Broken,
    Critical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LmgParams {
    pub gamma: f64,
    pub h: f64,
}

impl LmgParams {
    pub fn new(gamma: f64, h: f64) -> Result<Self> {
        ensure_finite("gamma", gamma)?;
        ensure_finite("h", h)?;
        if !(0.0..1.0).contains(&gamma) {
            return Err(Error::Input(format!(
                "gamma must lie in [0, 1), got {gamma}"
            )));
        }
        if h <= 0.0 {
            return Err(Error::Input(format!("h must be positive, got {h}")));
        }
        if h < 1.0 && h * h <= gamma {
            return Err(Error::Input(format!(
                "the broken phase needs h^2 > gamma, got h = {h}, gamma = {gamma}"
            )));
        }
        Ok(Self { gamma, h })
    }

    pub fn phase(&self) -> LmgPhase {
        if self.h > 1.0 {
            LmgPhase::Symmetric
        } else if self.h < 1.0 {
            LmgPhase::Broken
        } else {
            LmgPhase::Critical
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LmgMode {
    /// Excitation gap.
    pub delta: f64,
    /// Bogoliubov angle; infinite at `h = 1`.
    pub theta: f64,
}

pub fn gap_angle(params: &LmgParams) -> LmgMode {
    let (g, h) = (params.gamma, params.h);
    match params.phase() {
        // tanh Θ = (1 - γ)/(2h - 1 - γ)
        LmgPhase::Symmetric => LmgMode {
            delta: 2.0 * ((h - 1.0) * (h - g)).sqrt(),
            theta: 0.5 * ((h - g) / (h - 1.0)).ln(),
        },
        // tanh Θ = (h^2 - γ)/(2 - h^2 - γ)
        LmgPhase::Broken => {
            let one_minus_h2 = (1.0 - h) * (1.0 + h);
            LmgMode {
                delta: 2.0 * (one_minus_h2 * (1.0 - g)).sqrt(),
                theta: 0.5 * ((1.0 - g) / one_minus_h2).ln(),
            }
        }
        LmgPhase::Critical => LmgMode {
            delta: 0.0,
            theta: f64::INFINITY,
        },
    }
}

fn same_phase(a: &LmgParams, b: &LmgParams) -> Result<()> {
    if a.phase() != b.phase() {
        return Err(Error::CrossPhase {
            first: a.h,
            second: b.h,
            critical: 1.0,
        });
    }
    Ok(())
}

/// Squeeze between the ground states at fields `h1` and `h2`.
pub fn lmg_map(gamma: f64, h1: f64, h2: f64) -> Result<SqueezeMap> {
    let (p1, p2) = (LmgParams::new(gamma, h1)?, LmgParams::new(gamma, h2)?);
    if p1.phase() == LmgPhase::Critical || p2.phase() == LmgPhase::Critical {
        return Err(Error::Domain(
            "the Bogoliubov angle diverges at h = 1".into(),
        ));
    }
    same_phase(&p1, &p2)?;
    relative_map(gap_angle(&p1).theta, gap_angle(&p2).theta)
}

/// Ground-state fidelity between fields `h1` and `h2`. Returns 0 when exactly
/// one of them sits at the critical field.
pub fn fidelity_lmg(gamma: f64, h1: f64, h2: f64) -> Result<f64> {
    let (p1, p2) = (LmgParams::new(gamma, h1)?, LmgParams::new(gamma, h2)?);
    if h1 == h2 {
        return Ok(1.0);
    }
    if p1.phase() == LmgPhase::Critical || p2.phase() == LmgPhase::Critical {
        return Ok(0.0);
    }
    Ok(fidelity(&lmg_map(gamma, h1, h2)?))
}

/// `η = (h1 - 1) / (h2 - 1)`.
pub fn eta_lmg(h1: f64, h2: f64) -> Result<f64> {
    ensure_finite("h1", h1)?;
    ensure_finite("h2", h2)?;
    let (d1, d2) = (h1 - 1.0, h2 - 1.0);
    if d1 == 0.0 || d2 == 0.0 {
        return Err(Error::Domain("η is undefined at h = 1".into()));
    }
    if d1.signum() != d2.signum() {
        return Err(Error::CrossPhase {
            first: h1,
            second: h2,
            critical: 1.0,
        });
    }
    Ok(d1 / d2)
}

/// Echo of the ground state at `h2` evolved with the quadratic Hamiltonian at `h1`.
pub fn echo_lmg(gamma: f64, h1: f64, h2: f64, t_grid: &[f64]) -> Result<EchoSeries> {
    let map = lmg_map(gamma, h1, h2)?;
    let delta1 = gap_angle(&LmgParams::new(gamma, h1)?).delta;
    let mut series = survival_closed(&map, delta1, t_grid)?;
    series.meta.source = "lmg".into();
    series.meta.eta = eta_lmg(h1, h2).ok();
    series.meta.coupling1 = Some(h1);
    series.meta.coupling2 = Some(h2);
    Ok(series)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gap_angle_values() {
        let m = gap_angle(&LmgParams::new(0.0, 1.5).unwrap());
        assert!((m.delta - 3f64.sqrt()).abs() < 1e-14);
        assert!((m.theta - 0.5f64.atanh()).abs() < 1e-14);
        let m = gap_angle(&LmgParams::new(0.0, 0.5).unwrap());
        assert!((m.delta - 3f64.sqrt()).abs() < 1e-14);
        assert!((m.theta - (1.0f64 / 7.0).atanh()).abs() < 1e-14);
        let m = gap_angle(&LmgParams::new(0.3, 1.0).unwrap());
        assert_eq!(m.delta, 0.0);
    }

    #[test]
    fn matches_tanh_forms() {
        for (g, h) in [(0.2, 1.7), (0.5, 3.0), (0.1, 0.8), (0.5, 0.9)] {
            let p = LmgParams::new(g, h).unwrap();
            let t = gap_angle(&p).theta.tanh();
            let want = if h > 1.0 {
                (1.0 - g) / (2.0 * h - 1.0 - g)
            } else {
                (h * h - g) / (2.0 - h * h - g)
            };
            assert!((t - want).abs() < 1e-14);
        }
    }

    #[test]
    fn validation() {
        assert!(LmgParams::new(1.0, 2.0).is_err());
        assert!(LmgParams::new(0.5, 0.6).is_err());
        assert!(LmgParams::new(0.0, -1.0).is_err());
    }

    #[test]
    fn fidelity_values() {
        assert_eq!(fidelity_lmg(0.0, 1.3, 1.3).unwrap(), 1.0);
        assert!((fidelity_lmg(0.0, 1.1, 1.2).unwrap() - 0.99429752).abs() < 1e-8);
        let l = fidelity_lmg(0.0, 1.0 + 1e-4, 1.0 + 1e-3).unwrap();
        assert!((l - 0.92437773).abs() < 1e-3);
        assert!(matches!(
            fidelity_lmg(0.0, 1.1, 0.9),
            Err(Error::CrossPhase { .. })
        ));
    }

    #[test]
    fn eta_values() {
        assert!((eta_lmg(1.05, 1.5).unwrap() - 0.1).abs() < 1e-12);
        assert_eq!(eta_lmg(1.2, 1.2).unwrap(), 1.0);
        assert!(matches!(eta_lmg(1.1, 0.9), Err(Error::CrossPhase { .. })));
    }
}
