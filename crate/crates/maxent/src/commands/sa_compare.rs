//! `sa-compare`: simulated-annealing orientations against exact ones
//! (`mode = sa`), or the `P_low` broadening caused by control error
//! (`mode = control`).

use maxent_core::sa::VisitOrder;
use maxent_core::transitions::find_transitions;
use maxent_core::{AnnealSchedule, ControlErrorSpec, Engine, Hamiltonian};

use super::{engine_from_config, grid_from_config, label, resolve_engine, EnsembleParams, GraphParams, Run};
use crate::config::Config;
use crate::error::{CliError, Result};
use crate::output::num;
use crate::runner::par_map;
use crate::studies::{broadening, density, reduced_curve, sa_compare, BroadeningParams, FOUR_SIGMA};

#[derive(Debug, Clone)]
pub enum Instance {
    Graph(GraphParams),
    Ensemble { params: EnsembleParams, index: usize },
}

#[derive(Debug, Clone)]
pub struct SaParams {
    pub instance: Instance,
    pub budgets: Vec<u64>,
    pub t_start: f64,
    pub t_end: f64,
    pub runs: usize,
    pub checkpoints: Vec<f64>,
    pub order: VisitOrder,
    pub all_spins: bool,
    pub level: f64,
}

#[derive(Debug, Clone)]
pub struct ControlParams {
    pub ensemble: EnsembleParams,
    pub t_sample: f64,
    pub n_run: usize,
    pub control: ControlErrorSpec,
    pub realizations: usize,
    pub resamples: usize,
    pub t_bin: f64,
    pub p_bin: f64,
}

#[derive(Debug, Clone)]
pub enum Mode {
    Sa(SaParams),
    Control(ControlParams),
}

#[derive(Debug, Clone)]
pub struct SaCompareParams {
    pub mode: Mode,
    pub grid: Vec<f64>,
    pub window: usize,
    pub exclusion_eps: f64,
    pub engine: Option<Engine>,
}

/// `t_start` itself is left out: the hot start there is an infinite-temperature
/// sample, not a Boltzmann sample at `t_start`.
pub const DEFAULT_CHECKPOINTS: [f64; 11] = [8.0, 6.0, 5.0, 4.5, 4.0, 3.5, 3.0, 2.5, 2.0, 1.75, 1.405];

impl SaCompareParams {
    pub fn from_config(c: &Config) -> Result<Self> {
        let mode = match c.choice("sa.mode", "sa", &["sa", "control"])?.as_str() {
            "control" => {
                let p = ControlParams {
                    ensemble: EnsembleParams::from_config(c, 20)?,
                    t_sample: c.get("plow.t_model", 1.405f64)?,
                    n_run: c.get("plow.n_run", 1000usize)?,
                    control: ControlErrorSpec::new(c.get("control.sigma_h", 0.05f64)?, c.get("control.sigma_j", 0.03f64)?)?,
                    realizations: c.get("control.realizations", 25usize)?,
                    resamples: c.get("control.resamples", 1000usize)?,
                    t_bin: c.get("control.t_bin", 0.1f64)?,
                    p_bin: c.get("control.p_bin", 0.05f64)?,
                };
                if p.realizations == 0 || p.resamples == 0 || p.n_run == 0 || !(p.t_sample > 0.0 && p.t_bin > 0.0 && p.p_bin > 0.0) {
                    return Err(CliError::Invalid("control study parameters must be positive".into()));
                }
                Mode::Control(p)
            }
            _ => {
                let instance = if c.path_value("graph.hamiltonian")?.is_some() {
                    Instance::Graph(GraphParams::from_config(c)?)
                } else {
                    let params = EnsembleParams::from_config(c, 1)?;
                    let index = c.get("ensemble.index", 0usize)?;
                    if index >= params.count {
                        return Err(CliError::Invalid(format!("ensemble.index {index} is outside the {} instances", params.count)));
                    }
                    Instance::Ensemble { params, index }
                };
                let p = SaParams {
                    instance,
                    budgets: c.list("sa.updates", vec![1_000_000u64])?,
                    t_start: c.get("sa.t_start", 10.0f64)?,
                    t_end: c.get("sa.t_end", 1.405f64)?,
                    runs: c.get("sa.runs", 1000usize)?,
                    checkpoints: c.list("sa.checkpoints", DEFAULT_CHECKPOINTS.to_vec())?,
                    order: match c.choice("sa.order", "sequential", &["sequential", "random"])?.as_str() {
                        "random" => VisitOrder::Random,
                        _ => VisitOrder::Sequential,
                    },
                    all_spins: c.choice("sa.spins", "transitions", &["transitions", "all"])? == "all",
                    level: c.get("sa.level", FOUR_SIGMA)?,
                };
                if p.budgets.is_empty() || p.checkpoints.is_empty() || p.runs == 0 {
                    return Err(CliError::Invalid("sa.updates, sa.checkpoints and sa.runs must be nonempty".into()));
                }
                for &b in &p.budgets {
                    AnnealSchedule::new(p.t_start, p.t_end, b)?;
                }
                if let Some(&t) = p.checkpoints.iter().find(|&&t| t > p.t_start || t < p.t_end) {
                    return Err(CliError::Invalid(format!("checkpoint {t} lies outside [{}, {}]", p.t_end, p.t_start)));
                }
                Mode::Sa(p)
            }
        };
        let p = Self {
            mode,
            grid: grid_from_config(c)?,
            window: c.get("transitions.window", maxent_core::transitions::DEFAULT_WINDOW)?,
            exclusion_eps: c.get("transitions.exclusion_eps", maxent_core::transitions::DEFAULT_EXCLUSION_EPS)?,
            engine: engine_from_config(c, "transitions.engine")?,
        };
        if p.window == 0 || p.window > p.grid.len() {
            return Err(CliError::Invalid(format!("transitions.window must be in 1..={}", p.grid.len())));
        }
        Ok(p)
    }
}

pub fn run(p: &SaCompareParams, run: &mut Run) -> Result<()> {
    match &p.mode {
        Mode::Sa(sa) => run_sa(p, sa, run),
        Mode::Control(control) => run_control(p, control, run),
    }
}

fn run_sa(p: &SaCompareParams, sa: &SaParams, run: &mut Run) -> Result<()> {
    let h: Hamiltonian = match &sa.instance {
        Instance::Graph(g) => g.hamiltonian(run.out)?,
        Instance::Ensemble { params, index } => params.build(run.seed)?.swap_remove(*index),
    };
    let spins: Vec<usize> = if sa.all_spins {
        (0..h.spin_count()).collect()
    } else {
        let curve = reduced_curve(&h, &p.grid, resolve_engine(p.engine, &h))?;
        find_transitions(&curve, p.window, p.exclusion_eps)?.into_iter().filter(|r| !r.excluded && r.n_trans() > 0).map(|r| r.index).collect()
    };
    let mut deviation_rows = Vec::new();
    let mut summary_rows = Vec::new();
    for &budget in &sa.budgets {
        let schedule = AnnealSchedule::new(sa.t_start, sa.t_end, budget)?.with_order(sa.order);
        let cmp = sa_compare(&h, &schedule, &sa.checkpoints, sa.runs, run.seed)?;
        for (c, &t) in cmp.checkpoints.iter().enumerate() {
            for &i in &spins {
                let pv = cmp.p_value(c, i);
                deviation_rows.push(vec![
                    budget.to_string(),
                    num(t),
                    label(&h, i),
                    num(cmp.sa[c][i]),
                    num(cmp.reference[c][i]),
                    num(pv),
                    (pv < sa.level).to_string(),
                ]);
            }
            let deviating = cmp.deviating(c, &spins, sa.level).len();
            summary_rows.push(vec![
                budget.to_string(),
                num(t),
                spins.len().to_string(),
                deviating.to_string(),
                num(cmp.max_abs_deviation(c, &spins)),
                (deviating == 0).to_string(),
            ]);
        }
        run.out.note(&format!("onset_{budget}"), cmp.onset(&spins, sa.level))?;
    }
    run.out.csv("deviation.csv", &["updates", "checkpoint", "spin", "m_sa", "m_exact", "p_value", "deviates"], deviation_rows)?;
    run.out.csv("summary.csv", &["updates", "checkpoint", "spins", "deviating", "max_abs_deviation", "within_error"], summary_rows)?;
    run.out.note("spins_compared", spins.len())?;
    run.out.note("level", sa.level)?;
    Ok(())
}

fn run_control(p: &SaCompareParams, cp: &ControlParams, run: &mut Run) -> Result<()> {
    let instances = cp.ensemble.build(run.seed)?;
    let curves = par_map(&instances, |_, h| reduced_curve(h, &p.grid, resolve_engine(p.engine, h)))?;
    let result = broadening(
        &instances,
        &curves,
        p.window,
        p.exclusion_eps,
        &BroadeningParams {
            t_sample: cp.t_sample,
            n_run: cp.n_run,
            realizations: cp.realizations,
            control: cp.control,
            resamples: cp.resamples,
            seed: run.seed,
        },
    )?;
    run.out.csv(
        "points.csv",
        &["instance", "spin", "t_trans", "plow_clean", "plow_noisy"],
        result.samples.iter().map(|s| vec![s.instance.to_string(), label(&instances[s.instance], s.spin), num(s.t_trans), num(s.clean), num(s.noisy)]),
    )?;
    run.out.csv(
        "fit.csv",
        &["set", "center", "width"],
        [("clean", result.clean_fit), ("noisy", result.noisy_fit)].iter().map(|(n, f)| vec![n.to_string(), num(f.center), num(f.width)]),
    )?;
    let mut rows = Vec::new();
    for (name, pick) in [("clean", 0), ("noisy", 1)] {
        let points: Vec<(f64, f64)> = result.samples.iter().map(|s| (s.t_trans, if pick == 0 { s.clean } else { s.noisy })).collect();
        for (t, pl, n) in density(&points, cp.t_bin, cp.p_bin) {
            rows.push(vec![name.to_string(), num(t), num(pl), n.to_string()]);
        }
    }
    run.out.csv("density.csv", &["set", "t_bin", "plow_bin", "count"], rows)?;
    let lo = result.quantile(0.025);
    let hi = result.quantile(0.975);
    run.out.note("spins", result.samples.len())?;
    run.out.note("width_difference", result.noisy_fit.width - result.clean_fit.width)?;
    run.out.note("width_difference_ci", [lo, hi])?;
    run.out.note("broadened", lo > 0.0)?;
    Ok(())
}
