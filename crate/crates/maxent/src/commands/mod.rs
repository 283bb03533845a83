//! Subcommands. Each resolves its parameters from the configuration first
//! (so `validate` can dry-run it), then executes.

use std::path::PathBuf;
use std::sync::Arc;

use maxent_core::transitions::uniform_grid;
use maxent_core::{ChimeraGraph, Engine, Hamiltonian};

use crate::config::Config;
use crate::error::{CliError, Result};
use crate::format::read_hamiltonian;
use crate::output::RunOutput;
use crate::studies::corrupted_ensemble;

pub mod ber;
pub mod canonicalize;
pub mod plow_fit;
pub mod sa_compare;
pub mod surface;
pub mod transitions;

/// Everything a command writes to besides its parameters.
pub struct Run<'a> {
    pub seed: u64,
    pub out: &'a mut RunOutput,
}

/// `[graph]`: either a Hamiltonian file or a Chimera graph with exclusions.
#[derive(Debug, Clone)]
pub struct GraphParams {
    pub grid_size: usize,
    pub exclude: Vec<usize>,
    pub alpha: f64,
    pub hamiltonian: Option<PathBuf>,
}

impl GraphParams {
    pub fn from_config(c: &Config) -> Result<Self> {
        let hamiltonian = c.path_value("graph.hamiltonian")?;
        let p = Self {
            grid_size: c.get("graph.L", 1usize)?,
            exclude: c.list("graph.exclude", vec![])?,
            alpha: c.get("graph.alpha", 1.0f64)?,
            hamiltonian,
        };
        if p.hamiltonian.is_none() {
            // builds the graph once so bad labels fail during validation
            p.graph()?;
        }
        if !(p.alpha > 0.0 && p.alpha.is_finite()) {
            return Err(CliError::Invalid(format!("graph.alpha must be positive, got {}", p.alpha)));
        }
        Ok(p)
    }

    pub fn graph(&self) -> Result<Arc<ChimeraGraph>> {
        Ok(Arc::new(ChimeraGraph::new(self.grid_size, &self.exclude)?))
    }

    /// The configured Hamiltonian file, or the clean ferromagnet on the graph.
    pub fn hamiltonian(&self, out: &mut RunOutput) -> Result<Hamiltonian> {
        match &self.hamiltonian {
            Some(path) => {
                out.input(path)?;
                read_hamiltonian(path)
            }
            None => Ok(Hamiltonian::ferromagnet(self.graph()?, self.alpha)?),
        }
    }
}

/// `[grid]`: uniform temperature grid on `(0, t_max]`.
pub fn grid_from_config(c: &Config) -> Result<Vec<f64>> {
    let t_max = c.get("grid.t_max", maxent_core::transitions::GRID_MAX)?;
    let points = c.get("grid.points", maxent_core::transitions::GRID_POINTS)?;
    if points == 0 {
        return Err(CliError::Invalid("grid.points must be positive: the temperature grid is empty".into()));
    }
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(CliError::Invalid(format!("grid.t_max must be positive, got {t_max}")));
    }
    Ok(uniform_grid(t_max, points))
}

/// `exact`, `bte`, or `auto` (exact up to 20 spins).
pub fn engine_from_config(c: &Config, key: &str) -> Result<Option<Engine>> {
    Ok(match c.choice(key, "auto", &["auto", "exact", "bte"])?.as_str() {
        "exact" => Some(Engine::Exact),
        "bte" => Some(Engine::Bte),
        _ => None,
    })
}

pub fn resolve_engine(engine: Option<Engine>, h: &Hamiltonian) -> Engine {
    engine.unwrap_or(if h.spin_count() <= 20 { Engine::Exact } else { Engine::Bte })
}

/// `[ensemble]`: randomly corrupted codewords.
#[derive(Debug, Clone)]
pub struct EnsembleParams {
    pub grid_size: usize,
    pub count: usize,
    pub flips: usize,
    pub alpha: f64,
}

impl EnsembleParams {
    pub fn from_config(c: &Config, default_count: usize) -> Result<Self> {
        let p = Self {
            grid_size: c.get("ensemble.L", 4usize)?,
            count: c.get("ensemble.count", default_count)?,
            flips: c.get("ensemble.flips", 200usize)?,
            alpha: c.get("ensemble.alpha", 0.15f64)?,
        };
        let elements = 8 * p.grid_size * p.grid_size + 16 * p.grid_size * p.grid_size + 8 * p.grid_size * p.grid_size.saturating_sub(1);
        if p.flips > elements {
            return Err(CliError::Invalid(format!("ensemble.flips = {} exceeds the {elements} elements", p.flips)));
        }
        if p.count == 0 {
            return Err(CliError::Invalid("ensemble.count must be positive".into()));
        }
        Ok(p)
    }

    pub fn build(&self, seed: u64) -> Result<Vec<Hamiltonian>> {
        corrupted_ensemble(self.grid_size, self.count, self.flips, self.alpha, seed)
    }
}

/// Spin label string used in CSV output.
pub fn label(h: &Hamiltonian, spin: usize) -> String {
    h.graph().label(spin).to_string()
}
