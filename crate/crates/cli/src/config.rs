//! Run configuration: JSON document, validation and command-line overrides.

use std::path::PathBuf;

use clap::ValueEnum;
use qpt_core::dicke::{CutoffRule, RotationMode, SolverOptions};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    Dicke,
    Lmg,
}

impl Model {
    pub fn as_str(&self) -> &'static str {
        match self {
            Model::Dicke => "dicke",
            Model::Lmg => "lmg",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Fidelity,
    Echo,
    Converge,
    Collapse,
    Sweep,
}

impl Task {
    pub fn as_str(&self) -> &'static str {
        match self {
            Task::Fidelity => "fidelity",
            Task::Echo => "echo",
            Task::Converge => "converge",
            Task::Collapse => "collapse",
            Task::Sweep => "sweep",
        }
    }
}

/// Side of the transition. The Dicke normal phase and the LMG symmetric
/// phase are the disordered side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    #[serde(alias = "normal", alias = "symmetric")]
    #[value(alias = "normal", alias = "symmetric")]
    Disordered,
    #[serde(alias = "super-radiant", alias = "broken")]
    #[value(alias = "super-radiant", alias = "broken")]
    Ordered,
}

impl Side {
    pub fn label(&self, model: Model) -> &'static str {
        match (model, self) {
            (Model::Dicke, Side::Disordered) => "normal",
            (Model::Dicke, Side::Ordered) => "super-radiant",
            (Model::Lmg, Side::Disordered) => "symmetric",
            (Model::Lmg, Side::Ordered) => "broken",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Rotation {
    PerCoupling,
    Shared,
}

impl Rotation {
    pub fn as_str(&self) -> &'static str {
        match self {
            Rotation::PerCoupling => "per-coupling",
            Rotation::Shared => "shared",
        }
    }
}

impl From<Rotation> for RotationMode {
    fn from(r: Rotation) -> Self {
        match r {
            Rotation::PerCoupling => RotationMode::PerCoupling,
            Rotation::Shared => RotationMode::Shared,
        }
    }
}

/// Exact-diagonalization controls (Dicke only).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExactConfig {
    /// Atom numbers, strictly increasing.
    pub n_atoms: Vec<usize>,
    /// Boson cutoff as a multiple of N; ignored when `n_bosons` is set.
    pub cutoff_ratio: usize,
    /// Fixed boson cutoff.
    pub n_bosons: Option<usize>,
    pub dense_threshold: usize,
    /// Cap on the full Hilbert-space dimension.
    pub max_dim: usize,
}

impl Default for ExactConfig {
    fn default() -> Self {
        let opts = SolverOptions::default();
        Self {
            n_atoms: Vec::new(),
            cutoff_ratio: 1,
            n_bosons: None,
            dense_threshold: opts.dense_threshold,
            max_dim: opts.max_dim,
        }
    }
}

impl ExactConfig {
    pub fn cutoff(&self) -> CutoffRule {
        match self.n_bosons {
            Some(n) => CutoffRule::Fixed(n),
            None => CutoffRule::Proportional(self.cutoff_ratio),
        }
    }

    pub fn solver(&self) -> SolverOptions {
        SolverOptions {
            dense_threshold: self.dense_threshold,
            max_dim: self.max_dim,
            ..SolverOptions::default()
        }
    }

    pub fn describe(&self) -> String {
        let rule = match self.n_bosons {
            Some(n) => format!("n_b = {n}"),
            None => format!("n_b = {} N", self.cutoff_ratio),
        };
        let n: Vec<String> = self.n_atoms.iter().map(|n| n.to_string()).collect();
        format!(
            "N = [{}]; {rule}; dense threshold {}; dimension cap {}",
            n.join(" "),
            self.dense_threshold,
            self.max_dim
        )
    }
}

/// Echo time grid. Times are measured in oscillation periods `π/ω1` of the
/// evolving Hamiltonian.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeConfig {
    pub periods: f64,
    pub samples_per_period: usize,
}

impl Default for TimeConfig {
    fn default() -> Self {
        Self {
            periods: 1.0,
            samples_per_period: 400,
        }
    }
}

impl TimeConfig {
    /// Number of intervals on the grid.
    pub fn intervals(&self) -> usize {
        ((self.periods * self.samples_per_period as f64).round() as usize).max(1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub model: Option<Model>,
    pub task: Option<Task>,
    /// Models evaluated by a sweep; defaults to `[model]`.
    pub models: Vec<Model>,
    pub omega: f64,
    pub omega0: f64,
    /// LMG anisotropy.
    pub gamma: f64,
    /// Explicit `(coupling1, coupling2)` pairs; an alternative to `etas` x `scales`.
    pub pairs: Vec<[f64; 2]>,
    pub etas: Vec<f64>,
    /// `|coupling2 - critical|` in units of the critical coupling.
    pub scales: Vec<f64>,
    pub phases: Vec<Side>,
    pub rotation: Rotation,
    pub exact: Option<ExactConfig>,
    pub time: TimeConfig,
    /// Not part of the configuration hash.
    #[serde(skip_serializing)]
    pub output: Option<PathBuf>,
    /// Not part of the configuration hash.
    #[serde(skip_serializing)]
    pub threads: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: None,
            task: None,
            models: Vec::new(),
            omega: 1.0,
            omega0: 1.0,
            gamma: 0.0,
            pairs: Vec::new(),
            etas: Vec::new(),
            scales: Vec::new(),
            phases: Vec::new(),
            rotation: Rotation::PerCoupling,
            exact: None,
            time: TimeConfig::default(),
            output: None,
            threads: None,
        }
    }
}

/// Configuration text and the name it was read from, for error messages.
pub struct Source<'a> {
    pub origin: &'a str,
    pub text: &'a str,
}

impl Source<'_> {
    /// Line of the first occurrence of `"key"`.
    fn line_of(&self, key: &str) -> Option<usize> {
        let quoted = format!("\"{key}\"");
        self.text
            .lines()
            .position(|l| l.contains(&quoted))
            .map(|i| i + 1)
    }
}

fn strip_location(msg: &str) -> &str {
    match msg.rfind(" at line ") {
        Some(i) => &msg[..i],
        None => msg,
    }
}

pub fn parse(source: &Source) -> Result<RunConfig> {
    let cfg: RunConfig = serde_json::from_str(source.text).map_err(|e| {
        CliError::Config(format!(
            "{}:{}:{}: {}",
            source.origin,
            e.line(),
            e.column(),
            strip_location(&e.to_string())
        ))
    })?;
    cfg.check_values()
        .map_err(|(key, msg)| match source.line_of(key) {
            Some(line) => CliError::Config(format!("{}:{line}: {key}: {msg}", source.origin)),
            None => CliError::Config(format!("{}: {key}: {msg}", source.origin)),
        })?;
    Ok(cfg)
}

type Check = std::result::Result<(), (&'static str, String)>;

fn positive(key: &'static str, v: f64) -> Check {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err((key, format!("must be a positive finite number, got {v}")))
    }
}

impl RunConfig {
    /// Domain checks on every value that is present.
    fn check_values(&self) -> Check {
        positive("omega", self.omega)?;
        positive("omega0", self.omega0)?;
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(("gamma", format!("must lie in [0, 1), got {}", self.gamma)));
        }
        for &e in &self.etas {
            positive("etas", e)?;
        }
        for &s in &self.scales {
            positive("scales", s)?;
        }
        for p in &self.pairs {
            if !p.iter().all(|c| c.is_finite() && *c >= 0.0) {
                return Err((
                    "pairs",
                    format!("couplings must be finite and non-negative, got {p:?}"),
                ));
            }
        }
        positive("periods", self.time.periods)?;
        if self.time.samples_per_period == 0 {
            return Err(("samples_per_period", "must be at least 1".into()));
        }
        if let Some(x) = &self.exact {
            if x.n_atoms.contains(&0) {
                return Err(("n_atoms", "atom numbers must be positive".into()));
            }
            if x.n_atoms.windows(2).any(|w| w[0] >= w[1]) {
                return Err(("n_atoms", "atom numbers must be strictly increasing".into()));
            }
            if x.n_bosons.is_none() && x.cutoff_ratio == 0 {
                return Err(("cutoff_ratio", "must be at least 1".into()));
            }
            if x.dense_threshold == 0 || x.max_dim == 0 {
                return Err((
                    "exact",
                    "dense_threshold and max_dim must be positive".into(),
                ));
            }
        }
        if self.threads == Some(0) {
            return Err(("threads", "must be at least 1".into()));
        }
        Ok(())
    }

    /// Full validation once model and task are fixed.
    pub fn validate(&self) -> Result<()> {
        let fail = |key: &str, msg: String| Err(CliError::Config(format!("{key}: {msg}")));
        if let Err((key, msg)) = self.check_values() {
            return fail(key, msg);
        }
        let Some(task) = self.task else {
            return fail("task", "no task given".into());
        };
        let models = self.models();
        if models.is_empty() {
            return fail("model", "no model given".into());
        }
        if task != Task::Sweep && models.len() > 1 {
            return fail(
                "models",
                "a model list is only meaningful for a sweep".into(),
            );
        }
        let has_grid = !self.etas.is_empty() || !self.scales.is_empty();
        if !self.pairs.is_empty() && has_grid {
            return fail(
                "pairs",
                "give either explicit pairs or etas and scales, not both".into(),
            );
        }
        if self.pairs.is_empty() && (self.etas.is_empty() || self.scales.is_empty()) {
            let key = if self.etas.is_empty() {
                "etas"
            } else {
                "scales"
            };
            return fail(key, "the list is empty".into());
        }
        if task == Task::Sweep && !self.pairs.is_empty() {
            return fail("pairs", "a sweep takes etas and scales".into());
        }
        let exact_atoms = self.exact.as_ref().map_or(0, |x| x.n_atoms.len());
        if exact_atoms > 0 && models.contains(&Model::Lmg) {
            return fail(
                "exact",
                "exact diagonalization is available for the Dicke model only".into(),
            );
        }
        if task == Task::Converge {
            if models != [Model::Dicke] {
                return fail(
                    "model",
                    "the convergence study runs on the Dicke model".into(),
                );
            }
            if exact_atoms == 0 {
                return fail("n_atoms", "the convergence study needs atom numbers".into());
            }
            if self.points_len() != 1 {
                return fail(
                    "pairs",
                    "the convergence study takes exactly one coupling pair".into(),
                );
            }
        }
        Ok(())
    }

    fn points_len(&self) -> usize {
        if self.pairs.is_empty() {
            self.etas.len() * self.scales.len() * self.sides().len()
        } else {
            self.pairs.len()
        }
    }

    pub fn models(&self) -> Vec<Model> {
        if self.models.is_empty() {
            self.model.into_iter().collect()
        } else {
            self.models.clone()
        }
    }

    pub fn sides(&self) -> Vec<Side> {
        if self.phases.is_empty() {
            vec![Side::Disordered]
        } else {
            self.phases.clone()
        }
    }

    /// SHA-256 of the canonical JSON form, output path and threads excluded.
    pub fn digest(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("configuration serializes");
        Sha256::digest(&bytes)
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

/// Values given on the command line; each one replaces the configuration's.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct Overrides {
    /// Field frequency ω.
    #[arg(long)]
    pub omega: Option<f64>,
    /// Atomic splitting ω0.
    #[arg(long)]
    pub omega0: Option<f64>,
    /// LMG anisotropy γ.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Ratios η, comma separated.
    #[arg(long = "eta", value_delimiter = ',')]
    pub etas: Vec<f64>,
    /// Distances |coupling2 - critical| in units of the critical coupling.
    #[arg(long = "scale", value_delimiter = ',')]
    pub scales: Vec<f64>,
    /// Explicit coupling pair `c1:c2`; repeatable.
    #[arg(long = "pair", value_parser = parse_pair)]
    pub pairs: Vec<[f64; 2]>,
    #[arg(long = "phase", value_enum, value_delimiter = ',')]
    pub phases: Vec<Side>,
    #[arg(long, value_enum)]
    pub rotation: Option<Rotation>,
    /// Atom numbers for exact diagonalization, comma separated.
    #[arg(long = "n-atoms", value_delimiter = ',')]
    pub n_atoms: Vec<usize>,
    /// Fixed boson cutoff.
    #[arg(long)]
    pub n_bosons: Option<usize>,
    /// Boson cutoff as a multiple of N.
    #[arg(long)]
    pub cutoff_ratio: Option<usize>,
    #[arg(long)]
    pub dense_threshold: Option<usize>,
    #[arg(long)]
    pub max_dim: Option<usize>,
    /// Echo duration in periods π/ω1.
    #[arg(long)]
    pub periods: Option<f64>,
    #[arg(long)]
    pub samples_per_period: Option<usize>,
}

fn parse_pair(s: &str) -> std::result::Result<[f64; 2], String> {
    let (a, b) = s.split_once(':').ok_or("expected c1:c2")?;
    let parse = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}"));
    Ok([parse(a)?, parse(b)?])
}

impl Overrides {
    pub fn apply(&self, cfg: &mut RunConfig) {
        if let Some(v) = self.omega {
            cfg.omega = v;
        }
        if let Some(v) = self.omega0 {
            cfg.omega0 = v;
        }
        if let Some(v) = self.gamma {
            cfg.gamma = v;
        }
        // A pair list and an η grid exclude each other, so either one given on
        // the command line clears the other.
        if !self.etas.is_empty() || !self.scales.is_empty() {
            cfg.pairs.clear();
        }
        if !self.etas.is_empty() {
            cfg.etas = self.etas.clone();
        }
        if !self.scales.is_empty() {
            cfg.scales = self.scales.clone();
        }
        if !self.pairs.is_empty() {
            cfg.pairs = self.pairs.clone();
            cfg.etas.clear();
            cfg.scales.clear();
        }
        if !self.phases.is_empty() {
            cfg.phases = self.phases.clone();
        }
        if let Some(r) = self.rotation {
            cfg.rotation = r;
        }
        let touches_exact = !self.n_atoms.is_empty()
            || self.n_bosons.is_some()
            || self.cutoff_ratio.is_some()
            || self.dense_threshold.is_some()
            || self.max_dim.is_some();
        if touches_exact {
            let x = cfg.exact.get_or_insert_with(ExactConfig::default);
            if !self.n_atoms.is_empty() {
                x.n_atoms = self.n_atoms.clone();
            }
            if self.n_bosons.is_some() {
                x.n_bosons = self.n_bosons;
            }
            if let Some(v) = self.cutoff_ratio {
                x.cutoff_ratio = v;
                x.n_bosons = None;
            }
            if let Some(v) = self.dense_threshold {
                x.dense_threshold = v;
            }
            if let Some(v) = self.max_dim {
                x.max_dim = v;
            }
        }
        if let Some(v) = self.periods {
            cfg.time.periods = v;
        }
        if let Some(v) = self.samples_per_period {
            cfg.time.samples_per_period = v;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn src(text: &str) -> Source<'_> {
        Source {
            origin: "test.json",
            text,
        }
    }

    #[test]
    fn defaults_and_aliases() {
        let cfg = parse(&src(
            r#"{"model": "dicke", "phases": ["normal", "super-radiant"]}"#,
        ))
        .unwrap();
        assert_eq!(cfg.omega, 1.0);
        assert_eq!(cfg.phases, [Side::Disordered, Side::Ordered]);
        assert_eq!(cfg.time.samples_per_period, 400);
    }

    #[test]
    fn unknown_field_has_line() {
        let err = parse(&src("{\n  \"model\": \"dicke\",\n  \"omgea\": 1.0\n}")).unwrap_err();
        let msg = err.to_string();
        assert!(msg.starts_with("test.json:3:"), "{msg}");
        assert!(msg.contains("omgea"), "{msg}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn domain_error_has_line() {
        let err = parse(&src(
            "{\n  \"task\": \"sweep\",\n\n  \"etas\": [0.1, -1]\n}",
        ))
        .unwrap_err();
        assert!(err.to_string().starts_with("test.json:4: etas:"), "{err}");
    }

    #[test]
    fn digest_ignores_output_and_threads() {
        let mut a = RunConfig::default();
        let b = RunConfig {
            output: Some("x.csv".into()),
            threads: Some(3),
            ..RunConfig::default()
        };
        assert_eq!(a.digest(), b.digest());
        a.omega = 2.0;
        assert_ne!(a.digest(), b.digest());
    }

    #[test]
    fn overrides_replace_grid() {
        let mut cfg = RunConfig {
            pairs: vec![[0.4, 0.3]],
            ..RunConfig::default()
        };
        Overrides {
            etas: vec![0.1],
            scales: vec![1e-3],
            n_atoms: vec![8],
            ..Overrides::default()
        }
        .apply(&mut cfg);
        assert!(cfg.pairs.is_empty());
        assert_eq!(cfg.etas, [0.1]);
        assert_eq!(cfg.exact.unwrap().n_atoms, [8]);
    }

    #[test]
    fn completeness() {
        let mut cfg = RunConfig {
            model: Some(Model::Dicke),
            task: Some(Task::Sweep),
            scales: vec![1e-3],
            ..RunConfig::default()
        };
        assert!(cfg.validate().is_err());
        cfg.etas = vec![0.1];
        cfg.validate().unwrap();
        cfg.task = Some(Task::Converge);
        assert!(cfg.validate().is_err());
    }
}
