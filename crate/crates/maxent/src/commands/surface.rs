//! `surface`: finite-temperature BER over decoding and Nishimori temperature,
//! the Nishimori-optimality check and the minimum-ratio location per column.

use maxent_core::channel::crossover_probability;
use maxent_core::experiments::{min_ratio_temperature, nishimori_check, surface_from_rates, MinRatio};
use maxent_core::GaugeEnsemble;

use super::{grid_from_config, GraphParams, Run};
use crate::config::Config;
use crate::error::{CliError, Result};
use crate::output::num;

/// Stand-in for the `T -> 0+` decoding column.
pub const COLD_DECODE: f64 = 1e-3;

#[derive(Debug, Clone)]
pub struct SurfaceParams {
    pub graph: GraphParams,
    pub t_decode: Vec<f64>,
    pub t_nish: Vec<f64>,
}

impl SurfaceParams {
    pub fn from_config(c: &Config) -> Result<Self> {
        let graph = GraphParams::from_config(c)?;
        if graph.hamiltonian.is_some() {
            return Err(CliError::Invalid("surface works on the graph ensemble; graph.hamiltonian is not used".into()));
        }
        let grid = grid_from_config(c)?;
        let stride = c.get("surface.t_nish_stride", 10usize)?;
        let count = c.get("surface.t_nish_count", 20usize)?;
        if stride == 0 || count == 0 || stride * count > grid.len() {
            return Err(CliError::Invalid(format!(
                "surface needs 1 <= t_nish_stride * t_nish_count <= grid.points ({} * {} vs {})",
                stride,
                count,
                grid.len()
            )));
        }
        let t_nish = (1..=count).map(|k| grid[stride * k - 1]).collect();
        let mut t_decode = grid;
        if c.get("surface.include_cold", true)? {
            t_decode.insert(0, COLD_DECODE);
        }
        Ok(Self { graph, t_decode, t_nish })
    }
}

pub fn run(p: &SurfaceParams, run: &mut Run) -> Result<()> {
    let graph = p.graph.graph()?;
    // temperatures are in units of alpha J, so the ensemble is built at alpha = 1
    let ensemble = if graph.is_unit_cell() { GaugeEnsemble::unit_cell(1.0)? } else { GaugeEnsemble::exhaustive(graph, 1.0)? };
    let mpm_rates = ensemble.mpm_rates(&p.t_decode)?;
    let map_rates = ensemble.map_rates()?;
    let surface = surface_from_rates(&p.t_decode, &p.t_nish, &mpm_rates, &map_rates)?;

    let mut rows = Vec::new();
    for (n, &tn) in surface.t_nish.iter().enumerate() {
        let q = crossover_probability(tn)?;
        for (d, &td) in surface.t_decode.iter().enumerate() {
            rows.push(vec![num(tn), num(q), num(td), num(surface.mpm[n][d]), num(surface.map[n]), num(surface.ratio[n][d])]);
        }
    }
    run.out.csv("surface.csv", &["t_nish", "p", "t_decode", "r_mpm", "r_map", "ratio"], rows)?;

    let report = nishimori_check(&surface)?;
    let mut rows = Vec::new();
    for (n, row) in surface.mpm.iter().enumerate() {
        let d = surface.diagonal(n)?;
        let (best, &min) = row.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).expect("nonempty row");
        let violated = report.violations.iter().any(|v| v.t_nish == surface.t_nish[n]);
        rows.push(vec![
            num(surface.t_nish[n]),
            num(row[d]),
            num(min),
            num(surface.t_decode[best]),
            num(surface.ratio[n][d]),
            violated.to_string(),
        ]);
    }
    run.out.csv("nishimori.csv", &["t_nish", "r_diagonal", "r_min", "t_decode_argmin", "ratio_diagonal", "violation"], rows)?;

    let mut rows = Vec::new();
    for (d, rates) in mpm_rates.iter().enumerate() {
        let (kind, lo, hi, ratio) = match min_ratio_temperature(rates, &map_rates, &p.t_nish)? {
            MinRatio::Point { t_nish, ratio } => ("point", t_nish, t_nish, ratio),
            MinRatio::Interval { lo, hi, ratio } => ("interval", lo, hi, ratio),
        };
        rows.push(vec![num(p.t_decode[d]), kind.to_string(), num(lo), num(hi), num(ratio)]);
    }
    run.out.csv("min_ratio.csv", &["t_decode", "kind", "t_nish_lo", "t_nish_hi", "ratio"], rows)?;

    let diagonal = surface.diagonal_ratios()?;
    run.out.note("nishimori_violations", report.violations.len())?;
    run.out.note("min_diagonal_ratio", diagonal.iter().copied().fold(f64::INFINITY, f64::min))?;
    run.out.note("max_ber_jump", surface.max_ber_jump())?;
    Ok(())
}
