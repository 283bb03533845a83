//! `plow-fit`: effective sampling temperature from `P_low` observations.
//!
//! `synthetic` draws shots from the exact Boltzmann distribution of every
//! single-cell class at a known temperature and fits it back; `file` fits
//! observations read from a CSV table.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use maxent_core::exact::enumerate_spectrum;
use maxent_core::rng::stream;
use maxent_core::symmetry::{canonical_classes, cell_from_word};
use maxent_core::transitions::{find_transitions, fit_effective_temperature, p_agree, plow_model, PlowPoint, PlowVariant};
use maxent_core::{BucketTree, ChimeraGraph, Engine, Hamiltonian, Spectrum};
use rand::Rng;
use serde::Deserialize;

use super::{engine_from_config, grid_from_config, resolve_engine, Run};
use crate::config::Config;
use crate::error::{CliError, Result};
use crate::format::read_hamiltonian;
use crate::output::num;
use crate::runner::par_map;
use crate::studies::{reduced_curve, tree_for};

pub const PLOW_STREAM: u32 = 0x910;

#[derive(Debug, Clone)]
pub enum Source {
    Synthetic { alpha: f64, t_true: f64, sets: usize, n_run: usize },
    File(PathBuf),
}

#[derive(Debug, Clone)]
pub struct PlowFitParams {
    pub source: Source,
    pub grid: Vec<f64>,
    pub window: usize,
    pub exclusion_eps: f64,
    pub bracket: (f64, f64),
    pub engine: Option<Engine>,
}

impl PlowFitParams {
    pub fn from_config(c: &Config) -> Result<Self> {
        let source = match c.choice("plow.source", "synthetic", &["synthetic", "file"])?.as_str() {
            "file" => Source::File(c.path_value("plow.observations")?.ok_or_else(|| CliError::Invalid("plow.source = file needs plow.observations".into()))?),
            _ => {
                let s = Source::Synthetic {
                    alpha: c.get("graph.alpha", 0.05f64)?,
                    t_true: c.get("plow.t_true", 0.17f64)?,
                    sets: c.get("plow.sets", 100usize)?,
                    n_run: c.get("plow.n_run", 1000usize)?,
                };
                if let Source::Synthetic { alpha, t_true, sets, n_run } = s {
                    if !(alpha > 0.0 && t_true > 0.0) || sets == 0 || n_run == 0 {
                        return Err(CliError::Invalid("graph.alpha, plow.t_true, plow.sets and plow.n_run must be positive".into()));
                    }
                }
                s
            }
        };
        let bracket: Vec<f64> = c.list("plow.bracket", vec![0.05, 0.35])?;
        if bracket.len() != 2 || !(bracket[0] > 0.0 && bracket[1] > bracket[0]) {
            return Err(CliError::Invalid("plow.bracket must be two increasing positive temperatures".into()));
        }
        let p = Self {
            source,
            grid: grid_from_config(c)?,
            window: c.get("transitions.window", maxent_core::transitions::DEFAULT_WINDOW)?,
            exclusion_eps: c.get("transitions.exclusion_eps", maxent_core::transitions::DEFAULT_EXCLUSION_EPS)?,
            bracket: (bracket[0], bracket[1]),
            engine: engine_from_config(c, "transitions.engine")?,
        };
        if p.window == 0 || p.window > p.grid.len() {
            return Err(CliError::Invalid(format!("transitions.window must be in 1..={}", p.grid.len())));
        }
        Ok(p)
    }
}

/// A fitted point: the spin it came from and how to evaluate its model.
struct Entry {
    id: String,
    label: usize,
    instance: usize,
    spin: usize,
    sigma_low: i8,
    point: PlowPoint,
}

/// Absolute-temperature magnetizations of a set of Hamiltonians, memoised by
/// temperature.
enum Model {
    Exact(Spectrum),
    Bte(BucketTree),
}

struct Models {
    hamiltonians: Vec<Hamiltonian>,
    engines: Vec<Model>,
    cache: Mutex<HashMap<(usize, u64), Arc<Vec<f64>>>>,
}

impl Models {
    fn new(hamiltonians: Vec<Hamiltonian>, engine: Option<Engine>) -> Result<Self> {
        let engines = hamiltonians
            .iter()
            .map(|h| match resolve_engine(engine, h) {
                Engine::Exact => Ok(Model::Exact(enumerate_spectrum(h)?)),
                Engine::Bte => Ok(Model::Bte(tree_for(h.graph())?)),
            })
            .collect::<Result<_>>()?;
        Ok(Self { hamiltonians, engines, cache: Mutex::new(HashMap::new()) })
    }

    fn magnetization(&self, k: usize, t: f64) -> Result<Arc<Vec<f64>>> {
        let key = (k, t.to_bits());
        if let Some(m) = self.cache.lock().expect("cache").get(&key) {
            return Ok(m.clone());
        }
        let m = Arc::new(match &self.engines[k] {
            Model::Exact(s) => s.magnetization(t)?,
            Model::Bte(tree) => tree.magnetizations(&self.hamiltonians[k], t)?,
        });
        self.cache.lock().expect("cache").insert(key, m.clone());
        Ok(m)
    }
}

fn fit(entries: &[Entry], models: &Models, bracket: (f64, f64)) -> Result<f64> {
    let points: Vec<PlowPoint> = entries.iter().map(|e| e.point).collect();
    let mut failure = None;
    let t = fit_effective_temperature(
        &points,
        |k, t| match models.magnetization(entries[k].instance, t) {
            Ok(m) => p_agree(entries[k].sigma_low, m[entries[k].spin]),
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        bracket,
    )?;
    match failure {
        Some(e) => Err(e),
        None => Ok(t),
    }
}

/// Majority agreement counts from `sets` groups of `n_run` exact samples.
fn synthetic_agreement<R: Rng>(spectrum: &Spectrum, t: f64, sigma_low: &[(usize, i8)], sets: usize, n_run: usize, rng: &mut R) -> Result<Vec<usize>> {
    let probs = spectrum.probabilities(t)?;
    let cumulative: Vec<f64> = probs
        .iter()
        .scan(0.0, |acc, p| {
            *acc += p;
            Some(*acc)
        })
        .collect();
    let total = *cumulative.last().expect("nonempty spectrum");
    let n = spectrum.spin_count();
    let mut agree = vec![0usize; sigma_low.len()];
    for _ in 0..sets {
        let mut votes = vec![0i64; n];
        for _ in 0..n_run {
            let u = rng.random::<f64>() * total;
            let code = cumulative.partition_point(|&c| c < u).min(cumulative.len() - 1);
            for (i, v) in votes.iter_mut().enumerate() {
                *v += if code >> i & 1 == 1 { 1 } else { -1 };
            }
        }
        for (a, &(i, s)) in agree.iter_mut().zip(sigma_low) {
            if votes[i].signum() == s as i64 {
                *a += 1;
            }
        }
    }
    Ok(agree)
}

#[derive(Debug, Deserialize)]
struct Observation {
    hamiltonian: String,
    spin: usize,
    observed: f64,
    n_run: usize,
}

pub fn run(p: &PlowFitParams, run: &mut Run) -> Result<()> {
    let (entries, models) = match &p.source {
        Source::Synthetic { alpha, t_true, sets, n_run } => {
            let graph = Arc::new(ChimeraGraph::unit_cell());
            let classes = canonical_classes();
            let hamiltonians: Vec<Hamiltonian> =
                classes.iter().map(|c| cell_from_word(graph.clone(), c.word, *alpha)).collect::<maxent_core::Result<_>>()?;
            let per_class = par_map(&hamiltonians, |k, h| {
                let curve = reduced_curve(h, &p.grid, Engine::Exact)?;
                let records: Vec<_> =
                    find_transitions(&curve, p.window, p.exclusion_eps)?.into_iter().filter(|r| !r.excluded && r.n_trans() == 1).collect();
                let chosen: Vec<(usize, i8)> = records.iter().map(|r| (r.index, r.sigma_low)).collect();
                let spectrum = enumerate_spectrum(h)?;
                let agree = synthetic_agreement(&spectrum, *t_true, &chosen, *sets, *n_run, &mut stream(run.seed, PLOW_STREAM, k as u32))?;
                Ok(records
                    .iter()
                    .zip(agree)
                    .map(|(r, a)| Entry {
                        id: format!("{:04x}", classes[k].word),
                        label: h.graph().label(r.index),
                        instance: k,
                        spin: r.index,
                        sigma_low: r.sigma_low,
                        point: PlowPoint { t_trans: alpha * r.transition_temps[0], observed: a as f64 / *sets as f64, n_run: *n_run },
                    })
                    .collect::<Vec<_>>())
            })?;
            run.out.note("t_true", t_true)?;
            (per_class.into_iter().flatten().collect::<Vec<_>>(), Models::new(hamiltonians, Some(Engine::Exact))?)
        }
        Source::File(path) => {
            run.out.input(path)?;
            let dir = path.parent().map(|d| d.to_path_buf()).unwrap_or_default();
            let mut reader = csv::Reader::from_path(path).map_err(|e| CliError::Format { path: path.display().to_string(), line: 0, message: e.to_string() })?;
            let mut observations = Vec::new();
            for (k, row) in reader.deserialize::<Observation>().enumerate() {
                let o = row.map_err(|e| CliError::Format { path: path.display().to_string(), line: k + 2, message: e.to_string() })?;
                if !(0.0..=1.0).contains(&o.observed) || o.n_run == 0 {
                    return Err(CliError::Format {
                        path: path.display().to_string(),
                        line: k + 2,
                        message: "observed must be in [0, 1] and n_run positive".into(),
                    });
                }
                observations.push(o);
            }
            let mut names: Vec<String> = observations.iter().map(|o| o.hamiltonian.clone()).collect();
            names.sort();
            names.dedup();
            let mut hamiltonians = Vec::new();
            for name in &names {
                let file = dir.join(name);
                run.out.input(&file)?;
                hamiltonians.push(read_hamiltonian(&file)?);
            }
            // transitions are located on each Hamiltonian's own curve
            let records = par_map(&hamiltonians, |_, h| {
                let curve = reduced_curve(h, &p.grid, resolve_engine(p.engine, h))?;
                Ok(find_transitions(&curve, p.window, p.exclusion_eps)?)
            })?;
            let mut entries = Vec::new();
            for (line, o) in observations.iter().enumerate() {
                let k = names.binary_search(&o.hamiltonian).expect("name listed");
                let h = &hamiltonians[k];
                let spin = h.graph().spin_of_label(o.spin).ok_or_else(|| CliError::Format {
                    path: path.display().to_string(),
                    line: line + 2,
                    message: format!("label {} is not a spin of {}", o.spin, o.hamiltonian),
                })?;
                let r = &records[k][spin];
                if r.excluded || r.n_trans() != 1 {
                    continue;
                }
                entries.push(Entry {
                    id: o.hamiltonian.clone(),
                    label: o.spin,
                    instance: k,
                    spin,
                    sigma_low: r.sigma_low,
                    point: PlowPoint { t_trans: h.alpha() * r.transition_temps[0], observed: o.observed, n_run: o.n_run },
                });
            }
            (entries, Models::new(hamiltonians, p.engine)?)
        }
    };

    let t_fit = fit(&entries, &models, p.bracket)?;
    let mut rows = Vec::with_capacity(entries.len());
    for e in &entries {
        let m = models.magnetization(e.instance, t_fit)?;
        rows.push(vec![
            e.id.clone(),
            e.label.to_string(),
            num(e.point.t_trans),
            num(e.point.observed),
            e.point.n_run.to_string(),
            num(plow_model(p_agree(e.sigma_low, m[e.spin]), e.point.n_run, PlowVariant::Erfc)?),
        ]);
    }
    run.out.csv("points.csv", &["hamiltonian_id", "spin", "t_trans", "observed", "n_run", "model_at_fit"], rows)?;
    run.out.csv("fit.csv", &["points", "t_fit", "bracket_lo", "bracket_hi"], [[entries.len().to_string(), num(t_fit), num(p.bracket.0), num(p.bracket.1)]])?;
    run.out.note("points", entries.len())?;
    run.out.note("t_fit", t_fit)?;
    Ok(())
}
