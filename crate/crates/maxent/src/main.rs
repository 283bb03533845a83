use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use maxent::cli::{self, Command, Overrides};

#[derive(Parser)]
#[command(name = "maxent", version, about = "Maximum-entropy versus ground-state decoding on Chimera graphs")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Args, Clone)]
struct Common {
    /// Configuration file (`key = value` lines under `[section]` headers).
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Master seed; overrides `seed` in the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; results do not depend on it.
    #[arg(long, short)]
    jobs: Option<usize>,
    /// Output directory; overrides `out` in the configuration.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Sub {
    /// MAP and MPM bit error rates against the crossover probability.
    Ber(Common),
    /// MPM/MAP error ratio over (noise, decoding temperature).
    Surface(Common),
    /// Sign transitions of magnetizations or couplings.
    Transitions(Common),
    /// Effective sampling temperature from P_low observations.
    PlowFit(Common),
    /// Annealing against exact orientations, or control-error broadening.
    SaCompare(Common),
    /// Canonical unit-cell class of a Hamiltonian, or the class table.
    Canonicalize {
        #[command(flatten)]
        common: Common,
        /// Unit-cell Hamiltonian file.
        hamiltonian: Option<PathBuf>,
    },
    /// Checks a configuration and/or Hamiltonian files without running.
    Validate {
        #[arg(long, short)]
        config: Option<PathBuf>,
        hamiltonians: Vec<PathBuf>,
    },
}

fn main() -> ExitCode {
    let args = Cli::parse();
    let (command, common, hamiltonian) = match args.command {
        Sub::Ber(c) => (Command::Ber, c, None),
        Sub::Surface(c) => (Command::Surface, c, None),
        Sub::Transitions(c) => (Command::Transitions, c, None),
        Sub::PlowFit(c) => (Command::PlowFit, c, None),
        Sub::SaCompare(c) => (Command::SaCompare, c, None),
        Sub::Canonicalize { common, hamiltonian } => (Command::Canonicalize, common, hamiltonian),
        Sub::Validate { config, hamiltonians } => {
            return match cli::validate(config.as_deref(), &hamiltonians) {
                Ok(v) => {
                    if let Some(c) = v.command {
                        println!("ok: `{}` configuration", c.name());
                    }
                    if v.hamiltonians > 0 {
                        println!("ok: {} Hamiltonian file(s)", v.hamiltonians);
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            };
        }
    };
    let overrides = Overrides { seed: common.seed, jobs: common.jobs, out: common.out, hamiltonian };
    match cli::run(command, common.config.as_deref(), &overrides) {
        Ok(m) => {
            eprintln!("{}: wrote {} in {:.1} s", m.command, m.outputs.join(", "), m.elapsed_seconds);
            ExitCode::SUCCESS
        }
        Err(e) => fail(e),
    }
}

fn fail(e: maxent::CliError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code() as u8)
}
