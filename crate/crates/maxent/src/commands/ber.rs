//! `ber`: MAP and MPM bit error rates against the crossover probability.

use maxent_core::channel::nishimori_temperature;
use maxent_core::exact::{map_decode, mpm_decode};
use maxent_core::experiments::{bootstrap_std, sector_rates, usefulness_threshold, SectorRates};
use maxent_core::{bte, Decoded, Engine, GaugeEnsemble, Hamiltonian};

use super::{GraphParams, Run};
use crate::config::Config;
use crate::error::{CliError, Result};
use crate::output::num;
use crate::runner::par_map;

#[derive(Debug, Clone)]
pub struct BerParams {
    pub graph: GraphParams,
    /// `exact` sums all Hamiltonians through the gauge ensemble; `sampled`
    /// draws Hamiltonians per sector.
    pub mode: String,
    pub p_values: Vec<f64>,
    /// `None`: decode each `p` at its Nishimori temperature.
    pub t_decode: Option<f64>,
    pub samples: usize,
    pub bootstrap: usize,
    pub engine: Engine,
}

impl BerParams {
    pub fn from_config(c: &Config) -> Result<Self> {
        let graph = GraphParams::from_config(c)?;
        let mode = c.choice("ber.mode", "exact", &["exact", "sampled"])?;
        let points = c.get("ber.p_points", 50usize)?;
        let p_max = c.get("ber.p_max", 0.49f64)?;
        if points == 0 || !(p_max > 0.0 && p_max < 0.5) {
            return Err(CliError::Invalid("ber.p_points must be positive and 0 < ber.p_max < 0.5".into()));
        }
        let t_decode = match c.choice("ber.decode", "nishimori", &["nishimori", "fixed"])?.as_str() {
            "fixed" => Some(c.required::<f64>("ber.t_decode")?),
            _ => None,
        };
        if let Some(t) = t_decode {
            if !(t > 0.0) {
                return Err(CliError::Invalid(format!("ber.t_decode must be positive, got {t}")));
            }
        }
        let engine = match c.choice("ber.engine", "exact", &["exact", "bte"])?.as_str() {
            "bte" => Engine::Bte,
            _ => Engine::Exact,
        };
        let p = Self {
            graph,
            mode,
            p_values: (1..=points).map(|k| p_max * k as f64 / points as f64).collect(),
            t_decode,
            samples: c.get("ber.samples_per_sector", maxent_core::experiments::DEFAULT_SAMPLES_PER_SECTOR)?,
            bootstrap: c.get("ber.bootstrap", 200usize)?,
            engine,
        };
        if p.mode == "sampled" && (p.samples == 0 || p.bootstrap < 100) {
            return Err(CliError::Invalid("sampled mode needs ber.samples_per_sector >= 1 and ber.bootstrap >= 100".into()));
        }
        Ok(p)
    }
}

fn mpm(engine: Engine, h: &Hamiltonian, t: f64) -> maxent_core::Result<Decoded> {
    match engine {
        Engine::Exact => mpm_decode(h, t),
        Engine::Bte => Ok(Decoded(bte::bte_magnetizations(h, t)?.iter().map(|&m| maxent_core::math::sign(m)).collect())),
    }
}

pub fn run(p: &BerParams, run: &mut Run) -> Result<()> {
    let clean = p.graph.hamiltonian(run.out)?;
    if !clean.is_nominal() {
        return Err(CliError::Invalid("ber needs a nominal (+-1) codeword".into()));
    }
    let t_nish: Vec<f64> = p.p_values.iter().map(|&q| nishimori_temperature(q)).collect::<maxent_core::Result<_>>()?;
    // decoding temperatures are in units of alpha J, like the Nishimori temperature
    let distinct: Vec<f64> = match p.t_decode {
        Some(t) => vec![t],
        None => t_nish.clone(),
    };
    let pick = |k: usize| if p.t_decode.is_some() { 0 } else { k };

    let (map, mpm_rates): (SectorRates, Vec<SectorRates>) = if p.mode == "exact" {
        let ensemble = if clean.graph().is_unit_cell() {
            GaugeEnsemble::unit_cell(clean.alpha())?
        } else {
            GaugeEnsemble::exhaustive(clean.shared_graph().clone(), clean.alpha())?
        };
        let scaled: Vec<f64> = distinct.iter().map(|t| t * clean.alpha()).collect();
        (ensemble.map_rates()?, ensemble.mpm_rates(&scaled)?)
    } else {
        let alpha = clean.alpha();
        let map = sector_rates(&clean, |h: &Hamiltonian| map_decode(h), p.samples, run.seed)?;
        let rates = par_map(&distinct, |_, &t| Ok(sector_rates(&clean, |h: &Hamiltonian| mpm(p.engine, h, t * alpha), p.samples, run.seed)?))?;
        (map, rates)
    };

    let mut rows = Vec::new();
    for (k, &q) in p.p_values.iter().enumerate() {
        let rates = &mpm_rates[pick(k)];
        let (r_map, r_mpm) = (map.ber(q)?, rates.ber(q)?);
        let std = if p.mode == "exact" { 0.0 } else { bootstrap_std(rates, &[q], p.bootstrap, run.seed)?[0] };
        rows.push(vec![num(q), num(t_nish[k]), num(r_map), num(r_mpm), num(r_mpm / r_map), num(std)]);
    }
    run.out.csv("ber.csv", &["p", "t_nish", "r_map", "r_mpm", "ratio", "std"], rows)?;
    run.out.csv(
        "sectors.csv",
        &["sector", "count", "exhaustive", "r_map"],
        map.sectors.iter().map(|s| vec![s.sector.to_string(), s.count.to_string(), s.exhaustive.to_string(), num(s.mean)]),
    )?;
    run.out.note("map_usefulness_threshold", usefulness_threshold(&map)?)?;
    Ok(())
}
