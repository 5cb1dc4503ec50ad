//! Tasks behind the subcommands. Each one turns a validated configuration
//! into a single result table; rows follow the configuration order whatever
//! the thread count.

use std::f64::consts::PI;

use qpt_core::dicke::{
    convergence_d, echo_exact, fidelity_exact, fidelity_gaussian, fidelity_scaling, mode_energies,
    pair_for_eta, scaling_eta, soft_mode_map, DickeParams, Phase,
};
use qpt_core::echo::{
    collapse_check, min_echo, mp_scaling, survival_closed, uniform_grid, CollapseGroup, EchoSeries,
};
use qpt_core::lmg::{echo_lmg, eta_lmg, fidelity_lmg, gap_angle, LmgParams};
use rayon::prelude::*;

use crate::config::{ExactConfig, Model, RunConfig, Side, Task};
use crate::error::{CliError, Result};
use crate::table::{ResultTable, Values};

/// One coupling pair with its scaling coordinates.
#[derive(Debug, Clone, Copy)]
struct Point {
    model: Model,
    eta: f64,
    /// `|coupling2 - critical| / critical`.
    scale: f64,
    c1: f64,
    c2: f64,
    side: Side,
}

impl Point {
    fn phase(&self) -> String {
        self.side.label(self.model).to_string()
    }
}

fn dicke_base(cfg: &RunConfig) -> Result<DickeParams> {
    Ok(DickeParams::new(cfg.omega, cfg.omega0, 0.0)?)
}

fn grid_point(cfg: &RunConfig, model: Model, eta: f64, scale: f64, side: Side) -> Result<Point> {
    let (c1, c2) = match model {
        Model::Dicke => {
            let lc = dicke_base(cfg)?.lambda_c();
            let phase = match side {
                Side::Disordered => Phase::Normal,
                Side::Ordered => Phase::SuperRadiant,
            };
            pair_for_eta(lc, eta, scale * lc, phase)?
        }
        Model::Lmg => {
            let sign = match side {
                Side::Disordered => 1.0,
                Side::Ordered => -1.0,
            };
            let (h1, h2) = (1.0 + sign * eta * scale, 1.0 + sign * scale);
            LmgParams::new(cfg.gamma, h1)?;
            LmgParams::new(cfg.gamma, h2)?;
            (h1, h2)
        }
    };
    Ok(Point {
        model,
        eta,
        scale,
        c1,
        c2,
        side,
    })
}

fn pair_point(cfg: &RunConfig, model: Model, [c1, c2]: [f64; 2]) -> Result<Point> {
    let (critical, eta) = match model {
        Model::Dicke => {
            let lc = dicke_base(cfg)?.lambda_c();
            (lc, scaling_eta(c1, c2, lc)?.eta)
        }
        Model::Lmg => {
            LmgParams::new(cfg.gamma, c1)?;
            LmgParams::new(cfg.gamma, c2)?;
            (1.0, eta_lmg(c1, c2)?)
        }
    };
    let above = c2 > critical;
    let side = match (model, above) {
        (Model::Dicke, false) | (Model::Lmg, true) => Side::Disordered,
        _ => Side::Ordered,
    };
    Ok(Point {
        model,
        eta,
        scale: (c2 - critical).abs() / critical,
        c1,
        c2,
        side,
    })
}

/// Pairs in configuration order: explicit pairs, or η, then phase, then scale.
fn points(cfg: &RunConfig, model: Model) -> Result<Vec<Point>> {
    if !cfg.pairs.is_empty() {
        return cfg
            .pairs
            .iter()
            .map(|&p| pair_point(cfg, model, p))
            .collect();
    }
    let mut out = Vec::new();
    for &eta in &cfg.etas {
        for side in cfg.sides() {
            for &scale in &cfg.scales {
                out.push(grid_point(cfg, model, eta, scale, side)?);
            }
        }
    }
    Ok(out)
}

fn analytic_fidelity(cfg: &RunConfig, p: &Point) -> Result<f64> {
    Ok(match p.model {
        Model::Dicke => {
            let base = dicke_base(cfg)?;
            fidelity_gaussian(
                &base.with_lambda(p.c1)?,
                &base.with_lambda(p.c2)?,
                cfg.rotation.into(),
            )?
        }
        Model::Lmg => fidelity_lmg(cfg.gamma, p.c1, p.c2)?,
    })
}

fn coupling_names(model: Model) -> (&'static str, &'static str, &'static str) {
    match model {
        Model::Dicke => ("lambda1", "lambda2", "energy"),
        Model::Lmg => ("h1", "h2", "1"),
    }
}

fn atom_numbers(cfg: &RunConfig) -> Vec<usize> {
    cfg.exact
        .as_ref()
        .map(|x| x.n_atoms.clone())
        .unwrap_or_default()
}

pub fn execute(cfg: &RunConfig) -> Result<ResultTable> {
    cfg.validate()?;
    let task = cfg.task.expect("validated");
    let models = cfg.models();
    let mut table = ResultTable::new();
    table.note("format", "qpt-table 1")?;
    table.note("task", task.as_str())?;
    let names: Vec<&str> = models.iter().map(Model::as_str).collect();
    table.note("model", names.join(" "))?;
    table.note("config_sha256", cfg.digest())?;
    table.note("qpt-core", qpt_core::VERSION)?;
    table.note("scaling-cli", env!("CARGO_PKG_VERSION"))?;
    let mut params = Vec::new();
    if models.contains(&Model::Dicke) {
        params.push(format!(
            "omega = {}, omega0 = {}, rotation = {}",
            cfg.omega,
            cfg.omega0,
            cfg.rotation.as_str()
        ));
    }
    if models.contains(&Model::Lmg) {
        params.push(format!("gamma = {}", cfg.gamma));
    }
    table.note("parameters", params.join("; "))?;
    let truncation = match &cfg.exact {
        Some(x) if !x.n_atoms.is_empty() => x.describe(),
        _ => "none (effective quadratic theory)".into(),
    };
    table.note("truncation", truncation)?;

    let model = models[0];
    match task {
        Task::Fidelity => fidelity_table(cfg, model, &mut table)?,
        Task::Echo => echo_table(cfg, model, &mut table)?,
        Task::Converge => converge_table(cfg, &mut table)?,
        Task::Collapse => collapse_table(cfg, model, &mut table)?,
        Task::Sweep => sweep_table(cfg, &models, &mut table)?,
    }
    Ok(table)
}

fn exact_solver(cfg: &RunConfig) -> ExactConfig {
    cfg.exact.clone().unwrap_or_default()
}

struct FidelityRow {
    point: Point,
    analytic: f64,
    scaling: f64,
    exact: Option<(usize, usize, f64)>,
}

/// Rows for every point, times every atom number when exact values are asked for.
fn fidelity_rows(cfg: &RunConfig, pts: &[Point]) -> Result<Vec<FidelityRow>> {
    let atoms = atom_numbers(cfg);
    let x = exact_solver(cfg);
    let jobs: Vec<(Point, Option<usize>)> = pts
        .iter()
        .flat_map(|&p| {
            if atoms.is_empty() {
                vec![(p, None)]
            } else {
                atoms.iter().map(|&n| (p, Some(n))).collect()
            }
        })
        .collect();
    jobs.par_iter()
        .map(|&(point, n)| {
            let exact = match n {
                Some(n) => {
                    let nb = x.cutoff().cutoff(n);
                    let lp =
                        fidelity_exact(&dicke_base(cfg)?, n, nb, point.c1, point.c2, &x.solver())?;
                    Some((n, nb, lp))
                }
                None => None,
            };
            Ok(FidelityRow {
                point,
                analytic: analytic_fidelity(cfg, &point)?,
                scaling: fidelity_scaling(point.eta)?,
                exact,
            })
        })
        .collect()
}

fn push_exact_columns(table: &mut ResultTable, rows: &[FidelityRow]) -> Result<()> {
    if rows.iter().all(|r| r.exact.is_none()) {
        return Ok(());
    }
    let ex: Vec<(usize, usize, f64)> = rows
        .iter()
        .map(|r| r.exact.expect("uniform rows"))
        .collect();
    table.push(
        "N",
        "atoms",
        Values::Int(ex.iter().map(|e| e.0 as u64).collect()),
    )?;
    table.push(
        "n_b",
        "bosons",
        Values::Int(ex.iter().map(|e| e.1 as u64).collect()),
    )?;
    table.push(
        "Lp_exact",
        "1",
        Values::Float(ex.iter().map(|e| e.2).collect()),
    )
}

fn fidelity_table(cfg: &RunConfig, model: Model, table: &mut ResultTable) -> Result<()> {
    let rows = fidelity_rows(cfg, &points(cfg, model)?)?;
    let (n1, n2, unit) = coupling_names(model);
    let col = |f: fn(&FidelityRow) -> f64| Values::Float(rows.iter().map(f).collect());
    table.push("eta", "1", col(|r| r.point.eta))?;
    table.push(n1, unit, col(|r| r.point.c1))?;
    table.push(n2, unit, col(|r| r.point.c2))?;
    table.push(
        "phase",
        "label",
        Values::Text(rows.iter().map(|r| r.point.phase()).collect()),
    )?;
    table.push("Lp_analytic", "1", col(|r| r.analytic))?;
    table.push("Lp_scaling", "1", col(|r| r.scaling))?;
    push_exact_columns(table, &rows)
}

fn sweep_table(cfg: &RunConfig, models: &[Model], table: &mut ResultTable) -> Result<()> {
    let mut pts = Vec::new();
    for &eta in &cfg.etas {
        for &scale in &cfg.scales {
            for side in cfg.sides() {
                for &m in models {
                    pts.push(grid_point(cfg, m, eta, scale, side)?);
                }
            }
        }
    }
    let rows = fidelity_rows(cfg, &pts)?;
    let col = |f: fn(&FidelityRow) -> f64| Values::Float(rows.iter().map(f).collect());
    let models = rows
        .iter()
        .map(|r| r.point.model.as_str().to_string())
        .collect();
    table.push("model", "label", Values::Text(models))?;
    table.push("eta", "1", col(|r| r.point.eta))?;
    table.push("scale", "critical coupling", col(|r| r.point.scale))?;
    table.push("coupling1", "model units", col(|r| r.point.c1))?;
    table.push("coupling2", "model units", col(|r| r.point.c2))?;
    table.push(
        "phase",
        "label",
        Values::Text(rows.iter().map(|r| r.point.phase()).collect()),
    )?;
    table.push("Lp_analytic", "1", col(|r| r.analytic))?;
    table.push("Lp_scaling", "1", col(|r| r.scaling))?;
    push_exact_columns(table, &rows)
}

/// Soft-mode frequency of the evolving Hamiltonian.
fn omega1(cfg: &RunConfig, p: &Point) -> Result<f64> {
    Ok(match p.model {
        Model::Dicke => mode_energies(&dicke_base(cfg)?.with_lambda(p.c1)?).e1,
        Model::Lmg => gap_angle(&LmgParams::new(cfg.gamma, p.c1)?).delta,
    })
}

fn time_grid(cfg: &RunConfig, p: &Point) -> Result<Vec<f64>> {
    let period = PI / omega1(cfg, p)?;
    Ok(uniform_grid(
        cfg.time.periods * period,
        cfg.time.intervals(),
    )?)
}

fn echo_series(cfg: &RunConfig, p: &Point, n: Option<usize>) -> Result<EchoSeries> {
    let grid = time_grid(cfg, p)?;
    Ok(match (p.model, n) {
        (Model::Dicke, Some(n)) => {
            let x = exact_solver(cfg);
            echo_exact(
                &dicke_base(cfg)?,
                n,
                x.cutoff().cutoff(n),
                p.c1,
                p.c2,
                &grid,
                &x.solver(),
            )?
        }
        (Model::Dicke, None) => {
            let base = dicke_base(cfg)?;
            let (p1, p2) = (base.with_lambda(p.c1)?, base.with_lambda(p.c2)?);
            let mut s = survival_closed(&soft_mode_map(&p1, &p2)?, mode_energies(&p1).e1, &grid)?;
            s.meta.source = "dicke-effective".into();
            s.meta.eta = Some(p.eta);
            s.meta.coupling1 = Some(p.c1);
            s.meta.coupling2 = Some(p.c2);
            s
        }
        (Model::Lmg, _) => echo_lmg(cfg.gamma, p.c1, p.c2, &grid)?,
    })
}

/// Every (point, atom number) combination, computed in parallel.
fn all_series(cfg: &RunConfig, model: Model) -> Result<Vec<(Point, Option<usize>, EchoSeries)>> {
    let atoms = atom_numbers(cfg);
    let mut jobs = Vec::new();
    for p in points(cfg, model)? {
        if atoms.is_empty() {
            jobs.push((p, None));
        } else {
            jobs.extend(atoms.iter().map(|&n| (p, Some(n))));
        }
    }
    jobs.into_par_iter()
        .map(|(p, n)| Ok((p, n, echo_series(cfg, &p, n)?)))
        .collect()
}

fn warn(table: &mut ResultTable, series: &[(Point, Option<usize>, EchoSeries)]) -> Result<()> {
    for (p, _, s) in series {
        for w in &s.meta.warnings {
            table.note(
                "warning",
                format!("{} {} -> {}: {w}", p.model.as_str(), p.c1, p.c2),
            )?;
        }
    }
    Ok(())
}

fn echo_table(cfg: &RunConfig, model: Model, table: &mut ResultTable) -> Result<()> {
    let series = all_series(cfg, model)?;
    warn(table, &series)?;
    let (n1, n2, unit) = coupling_names(model);
    let exact = series.iter().any(|s| s.1.is_some());
    let (mut eta, mut c1, mut c2, mut phase, mut nn, mut t, mut tau, mut m) = (
        vec![],
        vec![],
        vec![],
        vec![],
        vec![],
        vec![],
        vec![],
        vec![],
    );
    for (p, n, s) in &series {
        for _ in 0..s.len() {
            eta.push(p.eta);
            c1.push(p.c1);
            c2.push(p.c2);
            phase.push(p.phase());
            nn.push(n.unwrap_or(0) as u64);
        }
        t.extend_from_slice(s.t());
        tau.extend_from_slice(s.tau());
        m.extend_from_slice(s.m());
    }
    table.push("eta", "1", Values::Float(eta))?;
    table.push(n1, unit, Values::Float(c1))?;
    table.push(n2, unit, Values::Float(c2))?;
    table.push("phase", "label", Values::Text(phase))?;
    if exact {
        table.push("N", "atoms", Values::Int(nn))?;
    }
    table.push("t", "1/energy", Values::Float(t))?;
    table.push("tau", "omega1 t", Values::Float(tau))?;
    table.push("M", "1", Values::Float(m))
}

/// η bits, phase and atom number.
type GroupKey = (u64, Side, Option<usize>);

fn collapse_table(cfg: &RunConfig, model: Model, table: &mut ResultTable) -> Result<()> {
    let series = all_series(cfg, model)?;
    warn(table, &series)?;
    // Group by (η, phase, N) in order of first appearance.
    let mut groups: Vec<(GroupKey, Vec<usize>)> = Vec::new();
    for (i, (p, n, _)) in series.iter().enumerate() {
        let key = (p.eta.to_bits(), p.side, *n);
        match groups.iter_mut().find(|g| g.0 == key) {
            Some(g) => g.1.push(i),
            None => groups.push((key, vec![i])),
        }
    }
    let exact = series.iter().any(|s| s.1.is_some());
    let (mut eta, mut phase, mut scale, mut nn, mut tau, mut m, mut dev) =
        (vec![], vec![], vec![], vec![], vec![], vec![], vec![]);
    for ((_, _, n), members) in &groups {
        let (p0, _, _) = &series[members[0]];
        let reference = members
            .iter()
            .copied()
            .min_by(|&a, &b| series[a].0.scale.total_cmp(&series[b].0.scale))
            .expect("non-empty group");
        let group = CollapseGroup {
            eta: p0.eta,
            members: members
                .iter()
                .map(|&i| (series[i].0.scale, series[i].2.clone()))
                .collect(),
        };
        let report = collapse_check(std::slice::from_ref(&group))?;
        let label = match n {
            Some(n) => format!("eta={} {} N={n}", p0.eta, p0.phase()),
            None => format!("eta={} {}", p0.eta, p0.phase()),
        };
        table.note(
            &format!("max_spread {label}"),
            format!("{:.16e}", report.max_spread()),
        )?;
        let reference_series = &series[reference].2;
        if reference_series.covers_period() {
            table.note(
                &format!("min_echo {label}"),
                format!(
                    "{:.16e} (analytic {:.16e})",
                    min_echo(reference_series)?,
                    mp_scaling(p0.eta)?
                ),
            )?;
        }
        for &i in members {
            let (p, _, s) = &series[i];
            for (k, (&x, &y)) in s.tau().iter().zip(s.m()).enumerate() {
                eta.push(p.eta);
                phase.push(p.phase());
                scale.push(p.scale);
                nn.push(n.unwrap_or(0) as u64);
                tau.push(x);
                m.push(y);
                dev.push((y - reference_series.m()[k]).abs());
            }
        }
    }
    table.push("eta", "1", Values::Float(eta))?;
    table.push("phase", "label", Values::Text(phase))?;
    table.push("scale", "critical coupling", Values::Float(scale))?;
    if exact {
        table.push("N", "atoms", Values::Int(nn))?;
    }
    table.push("tau", "omega1 t", Values::Float(tau))?;
    table.push("M", "1", Values::Float(m))?;
    table.push("deviation", "1", Values::Float(dev))
}

fn converge_table(cfg: &RunConfig, table: &mut ResultTable) -> Result<()> {
    let p = points(cfg, Model::Dicke)?
        .into_iter()
        .next()
        .ok_or_else(|| CliError::Config("the convergence study needs one coupling pair".into()))?;
    let x = exact_solver(cfg);
    let s = convergence_d(
        &dicke_base(cfg)?,
        p.c1,
        p.c2,
        &x.n_atoms,
        x.cutoff(),
        &x.solver(),
    )?;
    table.note("lambda1", format!("{:.16e}", s.lambda1))?;
    table.note("lambda2", format!("{:.16e}", s.lambda2))?;
    table.note("Lp_limit", format!("{:.16e}", s.lp_limit))?;
    let slopes: Vec<String> = s.slopes().iter().map(|v| format!("{v:.6}")).collect();
    table.note("log_log_slopes", slopes.join(" "))?;
    let e = &s.entries;
    table.push(
        "N",
        "atoms",
        Values::Int(e.iter().map(|e| e.n_atoms as u64).collect()),
    )?;
    table.push(
        "n_b",
        "bosons",
        Values::Int(e.iter().map(|e| e.n_bosons as u64).collect()),
    )?;
    table.push(
        "LpN",
        "1",
        Values::Float(e.iter().map(|e| e.lp_exact).collect()),
    )?;
    table.push("D", "1", Values::Float(e.iter().map(|e| e.d).collect()))
}
