//! Loschmidt echo series and their post-processing.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, ensure_positive, Error, Result};
use crate::squeeze::{ground_expansion, SqueezeMap};

/// Where a series came from.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EchoMeta {
    pub source: String,
    pub eta: Option<f64>,
    /// Coupling (or field) of the evolving Hamiltonian.
    pub coupling1: Option<f64>,
    /// Coupling (or field) whose ground state is the initial state.
    pub coupling2: Option<f64>,
    pub n_atoms: Option<usize>,
    pub n_bosons: Option<usize>,
    /// Oscillation period, when known.
    pub period: Option<f64>,
    pub warnings: Vec<String>,
}

/// Echo samples `M(t)` with the rescaled grid `τ = ω1 t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EchoSeries {
    t: Vec<f64>,
    tau: Vec<f64>,
    m: Vec<f64>,
    omega1: f64,
    pub meta: EchoMeta,
}

/// Checks that `t` is ascending and starts at 0.
pub fn validate_time_grid(t: &[f64]) -> Result<()> {
    match t.first() {
        None => return Err(Error::Input("time grid is empty".into())),
        Some(&t0) if t0 != 0.0 => {
            return Err(Error::Input(format!("time grid must start at 0, got {t0}")))
        }
        _ => {}
    }
    if t.iter().any(|x| !x.is_finite()) {
        return Err(Error::Input("time grid contains non-finite values".into()));
    }
    if t.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Input("time grid must be strictly increasing".into()));
    }
    Ok(())
}

/// `n + 1` equally spaced times on `[0, t_max]`.
pub fn uniform_grid(t_max: f64, n: usize) -> Result<Vec<f64>> {
    ensure_positive("t_max", t_max)?;
    if n == 0 {
        return Err(Error::Input("grid needs at least one interval".into()));
    }
    Ok((0..=n).map(|k| t_max * k as f64 / n as f64).collect())
}

impl EchoSeries {
    pub fn new(t: Vec<f64>, m: Vec<f64>, omega1: f64, meta: EchoMeta) -> Result<Self> {
        validate_time_grid(&t)?;
        ensure_finite("omega1", omega1)?;
        if omega1 < 0.0 {
            return Err(Error::Input(format!(
                "omega1 must be non-negative, got {omega1}"
            )));
        }
        if m.len() != t.len() {
            return Err(Error::Input(format!(
                "{} echo values for {} times",
                m.len(),
                t.len()
            )));
        }
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::Numeric("echo contains non-finite values".into()));
        }
        if (m[0] - 1.0).abs() > 1e-10 {
            return Err(Error::Numeric(format!("echo at t = 0 is {}, not 1", m[0])));
        }
        let tau = t.iter().map(|x| omega1 * x).collect();
        Ok(Self {
            t,
            tau,
            m,
            omega1,
            meta,
        })
    }

    pub fn t(&self) -> &[f64] {
        &self.t
    }

    pub fn tau(&self) -> &[f64] {
        &self.tau
    }

    pub fn m(&self) -> &[f64] {
        &self.m
    }

    pub fn omega1(&self) -> f64 {
        self.omega1
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// Whether the grid reaches one full period (as recorded in `meta`).
    pub fn covers_period(&self) -> bool {
        match self.meta.period {
            Some(p) => *self.t.last().unwrap() >= p * (1.0 - 1e-12),
            None => false,
        }
    }
}

fn closed_form(one_minus_q2: f64, q2: f64, delta1: f64, t: f64) -> f64 {
    let s = (delta1 * t).sin();
    one_minus_q2 / (one_minus_q2 * one_minus_q2 + 4.0 * q2 * s * s).sqrt()
}

/// Single-mode echo: the vacuum of one basis evolved with level spacing
/// `2 delta1` between its even components,
/// `M = (1 - q^2) / sqrt((1 - q^2)^2 + 4 q^2 sin^2(delta1 t))`.
pub fn survival_closed(map: &SqueezeMap, delta1: f64, t_grid: &[f64]) -> Result<EchoSeries> {
    validate_time_grid(t_grid)?;
    ensure_finite("delta1", delta1)?;
    if delta1 < 0.0 {
        return Err(Error::Input(format!(
            "gap must be non-negative, got {delta1}"
        )));
    }
    let q = map.tanh();
    let (omq2, q2) = (map.one_minus_q2(), q * q);
    let mut meta = EchoMeta {
        source: "single-mode".into(),
        ..Default::default()
    };
    if delta1 == 0.0 {
        if q != 0.0 {
            meta.warnings
                .push("zero gap with nonzero squeeze: echo frozen at 1".into());
        }
    } else {
        meta.period = Some(std::f64::consts::PI / delta1);
    }
    let m = t_grid
        .iter()
        .map(|&t| closed_form(omq2, q2, delta1, t))
        .collect();
    EchoSeries::new(t_grid.to_vec(), m, delta1, meta)
}

/// Direct summation `|Σ_n a_{2n}^2 exp(-2 i n delta1 t)|^2` truncated at `n_max`.
pub fn survival_series(map: &SqueezeMap, delta1: f64, t: f64, n_max: usize) -> Result<f64> {
    let g = ground_expansion(map, n_max)?;
    let (mut re, mut im) = (0.0, 0.0);
    for (n, p) in g.probabilities().enumerate() {
        let (s, c) = (2.0 * n as f64 * delta1 * t).sin_cos();
        re += p * c;
        im -= p * s;
    }
    Ok(re * re + im * im)
}

/// Parameters of `b0 (1 + ξ^2 t^2)^{-1/2} exp(-Γ t^2 / (1 + ξ^2 t^2))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SemiclassicalParams {
    pub gamma: f64,
    pub xi: f64,
    pub b0: f64,
}

/// Upper bound on `b0` in fits.
pub const B0_MAX: f64 = 1.2;

impl SemiclassicalParams {
    pub fn new(gamma: f64, xi: f64, b0: f64) -> Result<Self> {
        ensure_finite("gamma", gamma)?;
        ensure_finite("xi", xi)?;
        if gamma < 0.0 || xi < 0.0 {
            return Err(Error::Input("gamma and xi must be non-negative".into()));
        }
        if !(b0 > 0.0 && b0 <= B0_MAX) {
            return Err(Error::Input(format!(
                "b0 must lie in (0, {B0_MAX}], got {b0}"
            )));
        }
        Ok(Self { gamma, xi, b0 })
    }

    /// Dimensionless `(G, F) = (Γ / ω1^2, ξ / ω1)`.
    pub fn rescaled(&self, omega1: f64) -> Result<(f64, f64)> {
        ensure_positive("omega1", omega1)?;
        Ok((self.gamma / (omega1 * omega1), self.xi / omega1))
    }
}

pub fn semiclassical_envelope(params: &SemiclassicalParams, t: f64) -> f64 {
    let s = 1.0 + params.xi * params.xi * t * t;
    params.b0 / s.sqrt() * (-params.gamma * t * t / s).exp()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeFit {
    pub params: SemiclassicalParams,
    /// `max |ln M_fit - ln M|` over the window.
    pub max_residual: f64,
    pub rms_residual: f64,
    pub iterations: usize,
    pub samples: usize,
}

const FIT_MAX_ITER: usize = 500;

/// `ln` of the envelope with `β = ln b0`.
fn log_model(p: &[f64; 3], t: f64) -> f64 {
    let [beta, gamma, xi] = *p;
    let s = 1.0 + xi * xi * t * t;
    beta - 0.5 * s.ln() - gamma * t * t / s
}

fn log_jacobian(p: &[f64; 3], t: f64) -> [f64; 3] {
    let [_, gamma, xi] = *p;
    let t2 = t * t;
    let s = 1.0 + xi * xi * t2;
    [
        1.0,
        -t2 / s,
        -xi * t2 / s + 2.0 * gamma * xi * t2 * t2 / (s * s),
    ]
}

fn project(p: &mut [f64; 3]) {
    p[0] = p[0].min(B0_MAX.ln());
    p[1] = p[1].max(0.0);
    p[2] = p[2].max(0.0);
}

fn sse(p: &[f64; 3], t: &[f64], y: &[f64]) -> f64 {
    t.iter()
        .zip(y)
        .map(|(&ti, &yi)| (log_model(p, ti) - yi).powi(2))
        .sum()
}

fn solve3(a: [[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let det = |m: [[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(a);
    if !d.is_normal() {
        return None;
    }
    let mut x = [0.0; 3];
    for (k, xk) in x.iter_mut().enumerate() {
        let mut m = a;
        for i in 0..3 {
            m[i][k] = b[i];
        }
        *xk = det(m) / d;
    }
    Some(x)
}

/// Projected Levenberg-Marquardt from one start. Returns the final point,
/// its SSE, iteration count and whether the stopping test was met.
fn levenberg_marquardt(
    start: [f64; 3],
    t: &[f64],
    y: &[f64],
    trace: &mut Vec<f64>,
) -> ([f64; 3], f64, usize, bool) {
    let mut p = start;
    project(&mut p);
    let mut cost = sse(&p, t, y);
    let mut damping = 1e-3;
    for iter in 1..=FIT_MAX_ITER {
        let mut jtj = [[0.0; 3]; 3];
        let mut jtr = [0.0; 3];
        for (&ti, &yi) in t.iter().zip(y) {
            let j = log_jacobian(&p, ti);
            let r = yi - log_model(&p, ti);
            for a in 0..3 {
                jtr[a] += j[a] * r;
                for b in 0..3 {
                    jtj[a][b] += j[a] * j[b];
                }
            }
        }
        let mut improved = false;
        while damping < 1e12 {
            let mut lhs = jtj;
            for (a, row) in lhs.iter_mut().enumerate() {
                row[a] += damping * jtj[a][a].max(1e-12);
            }
            let Some(step) = solve3(lhs, jtr) else {
                damping *= 10.0;
                continue;
            };
            let mut trial = [p[0] + step[0], p[1] + step[1], p[2] + step[2]];
            project(&mut trial);
            let trial_cost = sse(&trial, t, y);
            if trial_cost < cost {
                let moved = (0..3)
                    .map(|k| (trial[k] - p[k]).abs() / (1.0 + p[k].abs()))
                    .fold(0.0, f64::max);
                let gain = cost - trial_cost;
                p = trial;
                cost = trial_cost;
                damping = (damping / 3.0).max(1e-12);
                improved = true;
                trace.push(cost);
                if moved < 1e-12 || gain <= 1e-15 * cost.max(f64::MIN_POSITIVE) {
                    return (p, cost, iter, true);
                }
                break;
            }
            damping *= 4.0;
        }
        if !improved {
            // No descent direction left: a (possibly constrained) minimum.
            return (p, cost, iter, true);
        }
    }
    (p, cost, FIT_MAX_ITER, false)
}

/// Least-squares fit of the envelope to `ln M` over `window = (t_lo, t_hi)`.
pub fn fit_envelope(series: &EchoSeries, window: (f64, f64)) -> Result<EnvelopeFit> {
    let (lo, hi) = window;
    ensure_finite("window start", lo)?;
    ensure_finite("window end", hi)?;
    if !(hi > lo && lo >= 0.0) {
        return Err(Error::Input(format!("invalid fit window [{lo}, {hi}]")));
    }
    if let Some(p) = series.meta.period {
        if hi > p * (1.0 + 1e-12) {
            return Err(Error::Domain(format!(
                "fit window ends at {hi}, beyond the first period {p}"
            )));
        }
    }
    let (t, y): (Vec<f64>, Vec<f64>) = series
        .t()
        .iter()
        .zip(series.m())
        .filter(|(&ti, &mi)| ti >= lo && ti <= hi && mi > 0.0)
        .map(|(&ti, &mi)| (ti, mi.ln()))
        .unzip();
    if t.len() < 10 {
        return Err(Error::Input(format!(
            "fit window holds {} usable samples, need at least 10",
            t.len()
        )));
    }
    // Starting points: the Gaussian curvature from the last sample and a
    // spread of crossover rates on the window's scale.
    let t_end = *t.last().unwrap();
    let g0 = (-y.last().unwrap() / (t_end * t_end)).max(1e-6);
    let mut best: Option<([f64; 3], f64, usize)> = None;
    let mut converged_any = false;
    let mut trace = Vec::new();
    for xi_scale in [0.0, 0.1, 1.0, 10.0] {
        for g_scale in [1.0, 0.1] {
            let start = [0.0, g0 * g_scale, xi_scale / t_end];
            let (p, cost, iters, ok) = levenberg_marquardt(start, &t, &y, &mut trace);
            converged_any |= ok;
            if ok && best.as_ref().is_none_or(|b| cost < b.1) {
                best = Some((p, cost, iters));
            }
        }
    }
    let Some((p, cost, iterations)) = best else {
        debug_assert!(!converged_any);
        return Err(Error::Fit {
            message: format!("no start converged within {FIT_MAX_ITER} iterations"),
            residuals: trace,
        });
    };
    let max_residual = t
        .iter()
        .zip(&y)
        .map(|(&ti, &yi)| (log_model(&p, ti) - yi).abs())
        .fold(0.0, f64::max);
    Ok(EnvelopeFit {
        params: SemiclassicalParams {
            b0: p[0].exp(),
            gamma: p[1],
            xi: p[2],
        },
        max_residual,
        rms_residual: (cost / t.len() as f64).sqrt(),
        iterations,
        samples: t.len(),
    })
}

/// Same samples with `τ = omega1 t`.
pub fn rescale_time(series: &EchoSeries, omega1: f64) -> Result<EchoSeries> {
    ensure_positive("omega1", omega1)?;
    let mut out = series.clone();
    out.omega1 = omega1;
    out.tau = out.t.iter().map(|x| omega1 * x).collect();
    Ok(out)
}

/// Minimum of the echo over the grid, refined by the parabola through the
/// lowest sample and its neighbours.
pub fn min_echo(series: &EchoSeries) -> Result<f64> {
    if !series.covers_period() {
        return Err(Error::Domain(match series.meta.period {
            Some(p) => format!(
                "series ends at t = {} before one period {p}",
                series.t().last().unwrap()
            ),
            None => "series carries no period, so coverage cannot be checked".into(),
        }));
    }
    let (t, m) = (series.t(), series.m());
    let (i, &mi) = m
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .unwrap();
    if i == 0 || i + 1 == m.len() {
        return Ok(mi);
    }
    let (x0, x1, x2) = (t[i - 1], t[i], t[i + 1]);
    let (y0, y1, y2) = (m[i - 1], mi, m[i + 1]);
    // Newton form of the interpolating parabola.
    let d1 = (y1 - y0) / (x1 - x0);
    let d2 = ((y2 - y1) / (x2 - x1) - d1) / (x2 - x0);
    if d2 <= 0.0 {
        return Ok(mi);
    }
    let xv = 0.5 * (x0 + x1) - d1 / (2.0 * d2);
    let yv = y0 + d1 * (xv - x0) + d2 * (xv - x0) * (xv - x1);
    Ok(yv.clamp(0.0, mi))
}

/// Predicted echo minimum `2 sqrt(η) / (1 + η)`.
pub fn mp_scaling(eta: f64) -> Result<f64> {
    ensure_positive("eta", eta)?;
    Ok(2.0 * eta.sqrt() / (1.0 + eta))
}

/// Series sharing one `η`, tagged with their `|λ2 - λc|` scales.
#[derive(Debug, Clone)]
pub struct CollapseGroup {
    pub eta: f64,
    pub members: Vec<(f64, EchoSeries)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupReport {
    pub eta: f64,
    /// Member scales, largest first.
    pub scales: Vec<f64>,
    pub tau: Vec<f64>,
    /// Largest pointwise `max - min` over the members.
    pub max_spread: f64,
    /// Largest deviation of each member from the smallest-scale member,
    /// in the order of `scales` (the last entry is 0).
    pub deviations: Vec<f64>,
    /// `Some(true)` when the deviations shrink monotonically with the scale;
    /// `None` with fewer than three members.
    pub decreasing: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollapseReport {
    pub groups: Vec<GroupReport>,
}

impl CollapseReport {
    pub fn max_spread(&self) -> f64 {
        self.groups.iter().map(|g| g.max_spread).fold(0.0, f64::max)
    }
}

/// Linear interpolation of `(x, y)` at `at`; `x` ascending and `at` in range.
pub fn interpolate(x: &[f64], y: &[f64], at: f64) -> f64 {
    let k = x.partition_point(|&v| v <= at);
    if k == 0 {
        return y[0];
    }
    if k >= x.len() {
        return y[x.len() - 1];
    }
    let (x0, x1) = (x[k - 1], x[k]);
    let w = (at - x0) / (x1 - x0);
    y[k - 1] + w * (y[k] - y[k - 1])
}

fn check_group(group: &CollapseGroup) -> Result<GroupReport> {
    if group.members.is_empty() {
        return Err(Error::Input(format!(
            "collapse group η = {} is empty",
            group.eta
        )));
    }
    let mut members: Vec<&(f64, EchoSeries)> = group.members.iter().collect();
    members.sort_by(|a, b| b.0.total_cmp(&a.0));
    let lo = members
        .iter()
        .map(|(_, s)| s.tau()[0])
        .fold(f64::NEG_INFINITY, f64::max);
    let hi = members
        .iter()
        .map(|(_, s)| *s.tau().last().unwrap())
        .fold(f64::INFINITY, f64::min);
    if hi.is_nan() || lo.is_nan() || hi <= lo {
        return Err(Error::Input(format!(
            "series in group η = {} share no τ range",
            group.eta
        )));
    }
    let points = members.iter().map(|(_, s)| s.len()).max().unwrap();
    let tau: Vec<f64> = (0..points)
        .map(|k| lo + (hi - lo) * k as f64 / (points - 1) as f64)
        .collect();
    let curves: Vec<Vec<f64>> = members
        .iter()
        .map(|(_, s)| {
            tau.iter()
                .map(|&x| interpolate(s.tau(), s.m(), x))
                .collect()
        })
        .collect();
    let mut max_spread: f64 = 0.0;
    for k in 0..tau.len() {
        let (mn, mx) = curves
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), c| {
                (a.min(c[k]), b.max(c[k]))
            });
        max_spread = max_spread.max(mx - mn);
    }
    let reference = curves.last().unwrap();
    let deviations: Vec<f64> = curves
        .iter()
        .map(|c| {
            c.iter()
                .zip(reference)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        })
        .collect();
    let decreasing = (members.len() >= 3).then(|| {
        deviations[..deviations.len() - 1]
            .windows(2)
            .all(|w| w[1] <= w[0])
    });
    Ok(GroupReport {
        eta: group.eta,
        scales: members.iter().map(|(s, _)| *s).collect(),
        tau,
        max_spread,
        deviations,
        decreasing,
    })
}

/// Interpolates each group onto a common τ grid and measures how far its
/// members spread.
pub fn collapse_check(groups: &[CollapseGroup]) -> Result<CollapseReport> {
    use rayon::prelude::*;
    let groups = groups
        .par_iter()
        .map(check_group)
        .collect::<Result<Vec<_>>>()?;
    Ok(CollapseReport { groups })
}
