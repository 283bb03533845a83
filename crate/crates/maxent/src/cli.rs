//! Command dispatch shared by the binary and the end-to-end tests.

use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::commands::{ber, canonicalize, plow_fit, sa_compare, surface, transitions, Run};
use crate::config::Config;
use crate::error::{CliError, Result};
use crate::format::read_hamiltonian;
use crate::output::{Manifest, RunOutput};
use crate::runner::pool;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Ber,
    Surface,
    Transitions,
    PlowFit,
    SaCompare,
    Canonicalize,
}

impl Command {
    pub const ALL: [Command; 6] =
        [Command::Ber, Command::Surface, Command::Transitions, Command::PlowFit, Command::SaCompare, Command::Canonicalize];

    pub fn name(self) -> &'static str {
        match self {
            Command::Ber => "ber",
            Command::Surface => "surface",
            Command::Transitions => "transitions",
            Command::PlowFit => "plow-fit",
            Command::SaCompare => "sa-compare",
            Command::Canonicalize => "canonicalize",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == name)
    }
}

/// Resolved parameters of one command.
#[derive(Debug, Clone)]
pub enum Prepared {
    Ber(ber::BerParams),
    Surface(surface::SurfaceParams),
    Transitions(transitions::TransitionsParams),
    PlowFit(plow_fit::PlowFitParams),
    SaCompare(sa_compare::SaCompareParams),
    Canonicalize(canonicalize::CanonicalizeParams),
}

/// Reads every parameter of `command` and rejects keys nobody asked for.
pub fn prepare(command: Command, c: &Config) -> Result<Prepared> {
    if let Some(name) = c.optional::<String>("command")? {
        if name != command.name() {
            return Err(CliError::Config {
                path: c.path().to_string(),
                line: 0,
                message: format!("config is for `{name}`, not `{}`", command.name()),
            });
        }
    }
    // read by the caller, consumed here so `finish` accepts them
    c.optional::<u64>("seed")?;
    c.optional::<usize>("jobs")?;
    c.optional::<String>("out")?;
    let prepared = match command {
        Command::Ber => Prepared::Ber(ber::BerParams::from_config(c)?),
        Command::Surface => Prepared::Surface(surface::SurfaceParams::from_config(c)?),
        Command::Transitions => Prepared::Transitions(transitions::TransitionsParams::from_config(c)?),
        Command::PlowFit => Prepared::PlowFit(plow_fit::PlowFitParams::from_config(c)?),
        Command::SaCompare => Prepared::SaCompare(sa_compare::SaCompareParams::from_config(c)?),
        Command::Canonicalize => Prepared::Canonicalize(canonicalize::CanonicalizeParams::from_config(c)?),
    };
    c.finish()?;
    Ok(prepared)
}

fn execute(p: &Prepared, run: &mut Run) -> Result<()> {
    match p {
        Prepared::Ber(p) => ber::run(p, run),
        Prepared::Surface(p) => surface::run(p, run),
        Prepared::Transitions(p) => transitions::run(p, run),
        Prepared::PlowFit(p) => plow_fit::run(p, run),
        Prepared::SaCompare(p) => sa_compare::run(p, run),
        Prepared::Canonicalize(p) => canonicalize::run(p, run),
    }
}

/// Command-line settings that can override the configuration file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub out: Option<PathBuf>,
    /// A Hamiltonian file given on the command line (`graph.hamiltonian`).
    pub hamiltonian: Option<PathBuf>,
}

pub fn load_config(path: Option<&Path>) -> Result<Config> {
    match path {
        Some(p) => Config::load(p),
        None => Ok(Config::empty()),
    }
}

fn absolute(path: &Path) -> Result<PathBuf> {
    std::path::absolute(path).map_err(|e| CliError::io(path, e))
}

/// Runs `command` and writes its tables and manifest.
pub fn run(command: Command, config: Option<&Path>, o: &Overrides) -> Result<Manifest> {
    let started = Instant::now();
    let mut c = load_config(config)?;
    if let Some(h) = &o.hamiltonian {
        c.set("graph.hamiltonian", absolute(h)?.display().to_string());
    }
    let seed = match (o.seed, c.optional::<u64>("seed")?) {
        (Some(s), _) | (None, Some(s)) => s,
        (None, None) if command == Command::Canonicalize => 0,
        (None, None) => return Err(CliError::Invalid("a seed is required: set `seed` in the config or pass --seed".into())),
    };
    let jobs = match (o.jobs, c.optional::<usize>("jobs")?) {
        (Some(j), _) | (None, Some(j)) => j,
        (None, None) => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    if jobs == 0 {
        return Err(CliError::Invalid("jobs must be positive".into()));
    }
    let out = match (&o.out, c.path_value("out")?) {
        (Some(d), _) => d.clone(),
        (None, Some(d)) => d,
        (None, None) => PathBuf::from("results").join(command.name()),
    };
    let prepared = prepare(command, &c)?;
    let mut resolved = c.resolved();
    resolved.insert("seed".into(), seed.to_string());
    resolved.insert("jobs".into(), jobs.to_string());
    resolved.remove("out");
    let mut output = RunOutput::create(&out)?;
    pool(jobs)?.install(|| execute(&prepared, &mut Run { seed, out: &mut output }))?;
    output.finish(command.name(), seed, jobs, resolved, started.elapsed().as_secs_f64())
}

/// What `validate` checked.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Validation {
    pub command: Option<Command>,
    pub hamiltonians: usize,
}

/// Dry-runs a configuration (its `command` key selects the subcommand) and
/// parses Hamiltonian files, without computing anything.
pub fn validate(config: Option<&Path>, hamiltonians: &[PathBuf]) -> Result<Validation> {
    if config.is_none() && hamiltonians.is_empty() {
        return Err(CliError::Invalid("nothing to validate: pass --config and/or Hamiltonian files".into()));
    }
    let mut command = None;
    if config.is_some() {
        let c = load_config(config)?;
        let name: String = c.required("command")?;
        let cmd = Command::from_name(&name).ok_or_else(|| CliError::Config {
            path: c.path().to_string(),
            line: 0,
            message: format!("unknown command `{name}`"),
        })?;
        prepare(cmd, &c)?;
        command = Some(cmd);
    }
    for h in hamiltonians {
        read_hamiltonian(h)?;
    }
    Ok(Validation { command, hamiltonians: hamiltonians.len() })
}
