//! Configuration-driven driver for the fidelity, echo and convergence studies.

pub mod config;
pub mod error;
pub mod table;
pub mod tasks;

use std::path::PathBuf;

pub use config::{Model, Overrides, RunConfig, Side, Task};
pub use error::{CliError, Result};
pub use table::{Column, ResultTable, Values};

/// Environment variable that overrides the configured thread count.
pub const THREADS_ENV: &str = "QPT_THREADS";

/// Thread count: command-line flag, then `QPT_THREADS`, then the configuration.
/// `None` leaves the choice to the thread pool.
pub fn resolve_threads(
    flag: Option<usize>,
    env: Option<&str>,
    cfg: &RunConfig,
) -> Result<Option<usize>> {
    if let Some(n) = flag {
        return positive_threads(n);
    }
    if let Some(raw) = env {
        let n = raw.trim().parse::<usize>().map_err(|_| {
            CliError::Config(format!(
                "{THREADS_ENV}: expected a positive integer, got {raw:?}"
            ))
        })?;
        return positive_threads(n);
    }
    Ok(cfg.threads)
}

fn positive_threads(n: usize) -> Result<Option<usize>> {
    if n == 0 {
        return Err(CliError::Config(
            "the thread count must be at least 1".into(),
        ));
    }
    Ok(Some(n))
}

pub fn default_output(cfg: &RunConfig) -> PathBuf {
    let task = cfg.task.map_or("run", |t| t.as_str());
    match (cfg.task, cfg.models().first()) {
        (Some(Task::Sweep), _) | (_, None) => PathBuf::from(format!("{task}.csv")),
        (_, Some(m)) => PathBuf::from(format!("{}-{task}.csv", m.as_str())),
    }
}

/// Computes the table on a pool of `threads` workers.
pub fn compute(cfg: &RunConfig, threads: Option<usize>) -> Result<ResultTable> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {threads:?} worker threads: {e}")))?;
    pool.install(|| tasks::execute(cfg))
}

/// Computes the table and writes it atomically; returns the output path.
pub fn run(cfg: &RunConfig, threads: Option<usize>) -> Result<(PathBuf, ResultTable)> {
    let table = compute(cfg, threads)?;
    let path = cfg.output.clone().unwrap_or_else(|| default_output(cfg));
    table.write_atomic(&path)?;
    Ok((path, table))
}
