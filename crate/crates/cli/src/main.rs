use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fracp_cli::{commands, init_workers, CliResult, Command, RunConfig};

#[derive(Parser)]
#[command(name = "fracp", version, about = "Fractional p-Laplacian eigenvalues and optimal transport")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// Run configuration (TOML).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory; overrides `out` in the config.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Solver seed; overrides `seed` in the config.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Inradius and diameter of the discretized domain.
    Geometry,
    /// Eigenvalue sweep over `p_list`.
    Eig,
    /// Optimal plan and dual potential between two measure files.
    Transport,
    /// Eigenvalue sweep against the large-p limits, with plot data.
    Limits,
}

fn execute(cli: &Cli) -> CliResult<Vec<PathBuf>> {
    init_workers()?;
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| fracp_cli::CliError::Config("missing required flag --config".into()))?;
    let mut cfg = RunConfig::load(path)?;
    if let Some(seed) = cli.seed {
        cfg.set_seed(seed);
    }
    let out = cli.out.clone().unwrap_or_else(|| commands::default_out(&cfg));
    let cmd = match cli.command {
        Cmd::Geometry => Command::Geometry,
        Cmd::Eig => Command::Eig,
        Cmd::Transport => Command::Transport,
        Cmd::Limits => Command::Limits,
    };
    fracp_cli::run(cmd, &cfg, &out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("fracp: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
