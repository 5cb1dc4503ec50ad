use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qpt_cli::config::{self, Source};
use qpt_cli::{CliError, Model, Overrides, RunConfig, Task, THREADS_ENV};

#[derive(Parser)]
#[command(
    name = "scaling-cli",
    version,
    about = "Fidelity, echo and convergence data near single-zero-mode transitions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Dicke ground-state fidelity: Gaussian overlap against the η scaling law
    DickeFidelity(Args),
    /// Dicke Loschmidt echo, effective or exact
    DickeEcho(Args),
    /// Exact Dicke fidelity convergence D(N)
    DickeConverge(Args),
    /// LMG ground-state fidelity against the η scaling law
    LmgFidelity(Args),
    /// LMG Loschmidt echo
    LmgEcho(Args),
    /// Echo collapse on the rescaled time grid at fixed η
    Collapse(Args),
    /// Fidelity over the product of η, scale, phase and model
    Sweep(Args),
    /// Run whatever the configuration file describes
    Run(Args),
}

#[derive(clap::Args)]
struct Args {
    /// JSON run configuration
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Output CSV path
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Worker threads; overrides QPT_THREADS and the configuration
    #[arg(long)]
    threads: Option<usize>,
    /// Model (for collapse and run) or model list (for sweep)
    #[arg(long = "model", value_enum, value_delimiter = ',')]
    models: Vec<Model>,
    #[command(flatten)]
    overrides: Overrides,
}

fn load(args: &Args) -> Result<RunConfig, CliError> {
    let Some(path) = &args.config else {
        return Ok(RunConfig::default());
    };
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    config::parse(&Source {
        origin: &path.display().to_string(),
        text: &text,
    })
}

fn main_inner() -> Result<(), CliError> {
    let cli = Cli::parse();
    let (args, fixed) = match &cli.command {
        Command::DickeFidelity(a) => (a, Some((Model::Dicke, Task::Fidelity))),
        Command::DickeEcho(a) => (a, Some((Model::Dicke, Task::Echo))),
        Command::DickeConverge(a) => (a, Some((Model::Dicke, Task::Converge))),
        Command::LmgFidelity(a) => (a, Some((Model::Lmg, Task::Fidelity))),
        Command::LmgEcho(a) => (a, Some((Model::Lmg, Task::Echo))),
        Command::Collapse(a) | Command::Sweep(a) | Command::Run(a) => (a, None),
    };
    let mut cfg = load(args)?;
    match (&cli.command, fixed) {
        (_, Some((model, task))) => {
            if !args.models.is_empty() {
                return Err(CliError::Config(
                    "--model is fixed by this subcommand".into(),
                ));
            }
            cfg.model = Some(model);
            cfg.models.clear();
            cfg.task = Some(task);
        }
        (Command::Sweep(_), _) => {
            cfg.task = Some(Task::Sweep);
            if !args.models.is_empty() {
                cfg.models = args.models.clone();
            }
            if cfg.models().is_empty() {
                cfg.model = Some(Model::Dicke);
            }
        }
        (Command::Collapse(_), _) => {
            cfg.task = Some(Task::Collapse);
            set_single_model(&mut cfg, &args.models)?;
            if cfg.models().is_empty() {
                cfg.model = Some(Model::Dicke);
            }
        }
        _ => set_single_model(&mut cfg, &args.models)?,
    }
    args.overrides.apply(&mut cfg);
    if let Some(o) = &args.output {
        cfg.output = Some(o.clone());
    }
    let env = std::env::var(THREADS_ENV).ok();
    let threads = qpt_cli::resolve_threads(args.threads, env.as_deref(), &cfg)?;
    let (path, table) = qpt_cli::run(&cfg, threads)?;
    eprintln!("wrote {} rows to {}", table.n_rows(), path.display());
    Ok(())
}

fn set_single_model(cfg: &mut RunConfig, models: &[Model]) -> Result<(), CliError> {
    match models {
        [] => Ok(()),
        [m] => {
            cfg.model = Some(*m);
            cfg.models.clear();
            Ok(())
        }
        _ => Err(CliError::Config("give a single --model".into())),
    }
}

fn main() -> ExitCode {
    match main_inner() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
