//! `transitions`: spin- or correlation-sign transitions of the single-cell
//! classes, a corrupted ensemble, or Hamiltonian files, plus `P_low` scatter
//! data at a model temperature.

use std::path::PathBuf;
use std::sync::Arc;

use maxent_core::exact::enumerate_spectrum;
use maxent_core::symmetry::cell_from_word;
use maxent_core::transitions::{correlation_curve, find_transitions, p_agree, plow_model, PlowVariant};
use maxent_core::{ChimeraGraph, Engine, Hamiltonian, TransitionRecord};

use super::{engine_from_config, grid_from_config, label, resolve_engine, EnsembleParams, Run};
use crate::config::Config;
use crate::error::{CliError, Result};
use crate::format::read_hamiltonian;
use crate::output::num;
use crate::runner::par_map;
use crate::studies::{class_survey, reduced_curve, reduced_magnetization, tree_for};

#[derive(Debug, Clone)]
pub enum Source {
    Classes,
    Ensemble(EnsembleParams),
    Files(Vec<PathBuf>),
}

#[derive(Debug, Clone)]
pub struct TransitionsParams {
    pub source: Source,
    pub grid: Vec<f64>,
    pub window: usize,
    pub exclusion_eps: f64,
    pub correlation: bool,
    pub engine: Option<Engine>,
    pub t_model: f64,
    pub n_run: usize,
}

impl TransitionsParams {
    pub fn from_config(c: &Config) -> Result<Self> {
        let source = match c.choice("transitions.source", "classes", &["classes", "ensemble", "files"])?.as_str() {
            "ensemble" => Source::Ensemble(EnsembleParams::from_config(c, 145)?),
            "files" => {
                let paths = c.path_list("transitions.hamiltonians")?;
                if paths.is_empty() {
                    return Err(CliError::Invalid("transitions.source = files needs transitions.hamiltonians".into()));
                }
                Source::Files(paths)
            }
            _ => Source::Classes,
        };
        let p = Self {
            source,
            grid: grid_from_config(c)?,
            window: c.get("transitions.window", maxent_core::transitions::DEFAULT_WINDOW)?,
            exclusion_eps: c.get("transitions.exclusion_eps", maxent_core::transitions::DEFAULT_EXCLUSION_EPS)?,
            correlation: c.choice("transitions.observable", "spin", &["spin", "correlation"])? == "correlation",
            engine: engine_from_config(c, "transitions.engine")?,
            t_model: c.get("plow.t_model", 1.405f64)?,
            n_run: c.get("plow.n_run", 1000usize)?,
        };
        if p.window == 0 || p.window > p.grid.len() {
            return Err(CliError::Invalid(format!("transitions.window must be in 1..={}", p.grid.len())));
        }
        if !(p.t_model > 0.0) || p.n_run == 0 {
            return Err(CliError::Invalid("plow.t_model and plow.n_run must be positive".into()));
        }
        Ok(p)
    }
}

const SPIN_HEADER: [&str; 6] = ["hamiltonian_id", "spin", "sigma_low", "n_trans", "t_trans_list", "excluded"];
const PAIR_HEADER: [&str; 7] = ["hamiltonian_id", "spin_i", "spin_j", "sigma_low", "n_trans", "t_trans_list", "excluded"];

fn temps(r: &TransitionRecord) -> String {
    r.transition_temps.iter().map(|&t| num(t)).collect::<Vec<_>>().join(";")
}

struct Item {
    id: String,
    h: Hamiltonian,
}

pub fn run(p: &TransitionsParams, run: &mut Run) -> Result<()> {
    let items: Vec<Item> = match &p.source {
        Source::Classes => {
            let graph = Arc::new(ChimeraGraph::unit_cell());
            let survey = class_survey(&p.grid, p.window, p.exclusion_eps)?;
            run.out.csv(
                "classes.csv",
                &["class_word", "orbit_size", "spins_with_transition", "excluded", "max_n_trans", "min_t_trans"],
                survey.iter().map(|s| {
                    vec![
                        format!("{:04x}", s.word),
                        s.orbit_size.to_string(),
                        s.records.iter().filter(|r| !r.excluded && r.n_trans() > 0).count().to_string(),
                        s.records.iter().filter(|r| r.excluded).count().to_string(),
                        s.max_transitions().to_string(),
                        s.min_transition().map_or(String::new(), num),
                    ]
                }),
            )?;
            let min = survey.iter().filter_map(|s| s.min_transition()).min_by(f64::total_cmp);
            run.out.note("classes", survey.len())?;
            run.out.note("min_t_trans", min)?;
            run.out.note("max_n_trans", survey.iter().map(|s| s.max_transitions()).max())?;
            survey
                .iter()
                .map(|s| Ok(Item { id: format!("{:04x}", s.word), h: cell_from_word(graph.clone(), s.word, 1.0)? }))
                .collect::<Result<_>>()?
        }
        Source::Ensemble(e) => e.build(run.seed)?.into_iter().enumerate().map(|(k, h)| Item { id: k.to_string(), h }).collect(),
        Source::Files(paths) => {
            let mut items = Vec::new();
            for path in paths {
                run.out.input(path)?;
                items.push(Item { id: path.file_stem().map_or(String::new(), |s| s.to_string_lossy().into_owned()), h: read_hamiltonian(path)? });
            }
            items
        }
    };

    if p.correlation {
        let rows = par_map(&items, |_, item| {
            let engine = resolve_engine(p.engine, &item.h);
            let pairs = item.h.graph().edges().to_vec();
            let curve = correlation_curve(&item.h.with_alpha(1.0)?, &p.grid, engine, &pairs)?;
            let records = find_transitions(&curve, p.window, p.exclusion_eps)?;
            Ok(records
                .iter()
                .map(|r| {
                    let (i, j) = pairs[r.index];
                    vec![
                        item.id.clone(),
                        label(&item.h, i),
                        label(&item.h, j),
                        r.sigma_low.to_string(),
                        r.n_trans().to_string(),
                        temps(r),
                        r.excluded.to_string(),
                    ]
                })
                .collect::<Vec<_>>())
        })?;
        return run.out.csv("transitions.csv", &PAIR_HEADER, rows.into_iter().flatten());
    }

    let results = par_map(&items, |_, item| {
        let engine = resolve_engine(p.engine, &item.h);
        let curve = reduced_curve(&item.h, &p.grid, engine)?;
        let records = find_transitions(&curve, p.window, p.exclusion_eps)?;
        let m = match engine {
            Engine::Exact => enumerate_spectrum(&item.h.with_alpha(1.0)?)?.magnetization(p.t_model)?,
            Engine::Bte => reduced_magnetization(&tree_for(item.h.graph())?, &item.h, p.t_model)?,
        };
        Ok((records, m))
    })?;
    let mut spin_rows = Vec::new();
    let mut plow_rows = Vec::new();
    let mut below_one = 0;
    for (item, (records, m)) in items.iter().zip(&results) {
        for r in records {
            spin_rows.push(vec![
                item.id.clone(),
                label(&item.h, r.index),
                r.sigma_low.to_string(),
                r.n_trans().to_string(),
                temps(r),
                r.excluded.to_string(),
            ]);
            if !r.excluded {
                below_one += r.transition_temps.iter().filter(|&&t| t < 1.0).count();
            }
            if !r.excluded && r.n_trans() == 1 {
                let q = p_agree(r.sigma_low, m[r.index]);
                plow_rows.push(vec![
                    item.id.clone(),
                    label(&item.h, r.index),
                    num(r.transition_temps[0]),
                    num(m[r.index]),
                    num(q),
                    num(plow_model(q, p.n_run, PlowVariant::Erfc)?),
                    num(plow_model(q, p.n_run, PlowVariant::Clt)?),
                ]);
            }
        }
    }
    run.out.csv("transitions.csv", &SPIN_HEADER, spin_rows)?;
    run.out.csv("plow.csv", &["hamiltonian_id", "spin", "t_trans", "m_model", "p_agree", "plow_erfc", "plow_clt"], plow_rows)?;
    run.out.note("transitions_below_t1", below_one)?;
    Ok(())
}
