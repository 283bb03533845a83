//! Experiment building blocks shared by the CLI and the acceptance suite:
//! instance ensembles, the single-cell class survey, SA-versus-exact
//! comparisons and the control-error broadening study.

use std::sync::Arc;

use maxent_core::bte::elimination_order;
use maxent_core::chimera::build_chimera;
use maxent_core::channel::sample_sector;
use maxent_core::math;
use maxent_core::rng::stream;
use maxent_core::sa::{inject_control_error, sa_run, SnapshotTally};
use maxent_core::symmetry::{canonical_classes, cell_from_word};
use maxent_core::transitions::{
    find_transitions, fit_logistic, orientation_curve, p_agree, plow_model, quantile, Logistic, PlowVariant,
};
use maxent_core::{AnnealSchedule, BucketTree, ChimeraGraph, ControlErrorSpec, Engine, Hamiltonian, OrientationCurve, TransitionRecord};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{CliError, Result};
use crate::runner::{par_map, par_range};

pub const ENSEMBLE_STREAM: u32 = 0xe5;
pub const CONTROL_STREAM: u32 = 0xce;

/// Two-sided tail mass beyond four standard deviations, `2 Phi(-4)`.
pub const FOUR_SIGMA: f64 = 6.334e-5;

/// `count` corrupted copies of the `L x L` all-`+1` codeword, each with
/// exactly `flips` flipped elements; instance `k` draws from its own stream.
pub fn corrupted_ensemble(grid_size: usize, count: usize, flips: usize, alpha: f64, seed: u64) -> Result<Vec<Hamiltonian>> {
    let graph = Arc::new(build_chimera(grid_size, &[])?);
    let clean = Hamiltonian::ferromagnet(graph, alpha)?;
    (0..count)
        .map(|k| {
            let mut rng = stream(seed, ENSEMBLE_STREAM, k as u32);
            Ok(sample_sector(&clean, flips, &mut rng)?.0)
        })
        .collect()
}

/// Orientation curve in reduced temperature `t = T / alpha`.
pub fn reduced_curve(h: &Hamiltonian, grid: &[f64], engine: Engine) -> Result<OrientationCurve> {
    Ok(orientation_curve(&h.with_alpha(1.0)?, grid, engine)?)
}

/// Magnetizations at reduced temperature `t` by bucket elimination.
pub fn reduced_magnetization(tree: &BucketTree, h: &Hamiltonian, t: f64) -> Result<Vec<f64>> {
    Ok(tree.magnetizations(&h.with_alpha(1.0)?, t)?)
}

pub fn tree_for(graph: &ChimeraGraph) -> Result<BucketTree> {
    Ok(BucketTree::new(graph, elimination_order(graph))?)
}

#[derive(Debug, Clone)]
pub struct ClassSurvey {
    pub word: u16,
    pub orbit_size: usize,
    pub records: Vec<TransitionRecord>,
}

impl ClassSurvey {
    pub fn max_transitions(&self) -> usize {
        self.records.iter().map(TransitionRecord::n_trans).max().unwrap_or(0)
    }

    pub fn min_transition(&self) -> Option<f64> {
        self.records
            .iter()
            .filter(|r| !r.excluded)
            .flat_map(|r| r.transition_temps.iter().copied())
            .min_by(f64::total_cmp)
    }
}

/// Transition records of every canonical single-cell class on the exact engine.
pub fn class_survey(grid: &[f64], window: usize, exclusion_eps: f64) -> Result<Vec<ClassSurvey>> {
    let graph = Arc::new(ChimeraGraph::unit_cell());
    par_map(&canonical_classes(), |_, class| {
        let h = cell_from_word(graph.clone(), class.word, 1.0)?;
        let curve = orientation_curve(&h, grid, Engine::Exact)?;
        Ok(ClassSurvey { word: class.word, orbit_size: class.orbit_size, records: find_transitions(&curve, window, exclusion_eps)? })
    })
}

/// SA checkpoint orientations next to exact ones.
#[derive(Debug, Clone)]
pub struct SaComparison {
    pub checkpoints: Vec<f64>,
    /// `sa[c][i]`: mean of spin `i` over runs at checkpoint `c`.
    pub sa: Vec<Vec<f64>>,
    pub reference: Vec<Vec<f64>>,
    pub runs: usize,
}

impl SaComparison {
    /// Exact two-sided binomial p-value of the SA mean of spin `i` at
    /// checkpoint `c` under the reference distribution.
    pub fn p_value(&self, c: usize, i: usize) -> f64 {
        let up = ((1.0 + self.sa[c][i]) * self.runs as f64 / 2.0).round() as usize;
        let p = ((1.0 + self.reference[c][i]) / 2.0).clamp(0.0, 1.0);
        math::binomial_test(up.min(self.runs), self.runs, p)
    }

    /// Spins among `spins` whose deviation is significant at `level`.
    pub fn deviating(&self, c: usize, spins: &[usize], level: f64) -> Vec<usize> {
        spins.iter().copied().filter(|&i| self.p_value(c, i) < level).collect()
    }

    pub fn max_abs_deviation(&self, c: usize, spins: &[usize]) -> f64 {
        spins.iter().map(|&i| (self.sa[c][i] - self.reference[c][i]).abs()).fold(0.0, f64::max)
    }

    /// Highest checkpoint temperature at which any of `spins` deviates.
    pub fn onset(&self, spins: &[usize], level: f64) -> Option<f64> {
        (0..self.checkpoints.len())
            .filter(|&c| !self.deviating(c, spins, level).is_empty())
            .map(|c| self.checkpoints[c])
            .max_by(f64::total_cmp)
    }
}

/// Runs are split into contiguous chunks tallied in parallel; integer sums make
/// the result independent of the chunking.
pub fn sa_compare(h: &Hamiltonian, schedule: &AnnealSchedule, checkpoints: &[f64], runs: usize, seed: u64) -> Result<SaComparison> {
    if runs == 0 {
        return Err(CliError::Invalid("sa.runs must be positive".into()));
    }
    const CHUNK: usize = 50;
    let chunks = runs.div_ceil(CHUNK);
    let tallies = par_range(chunks, |c| {
        let mut tally = SnapshotTally::new(checkpoints.len(), h.spin_count());
        for run in c * CHUNK..((c + 1) * CHUNK).min(runs) {
            tally.add(&sa_run(h, schedule, checkpoints, seed, run as u32)?);
        }
        Ok(tally)
    })?;
    let mut total = SnapshotTally::new(checkpoints.len(), h.spin_count());
    for t in &tallies {
        total.merge(t);
    }
    let sweep = total.finish(checkpoints);
    let tree = tree_for(h.graph())?;
    let reference = par_map(checkpoints, |_, &t| reduced_magnetization(&tree, h, t))?;
    Ok(SaComparison { checkpoints: checkpoints.to_vec(), sa: sweep.magnetization, reference, runs })
}

/// One spin of the broadening study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlowSample {
    pub instance: usize,
    pub spin: usize,
    pub t_trans: f64,
    pub clean: f64,
    pub noisy: f64,
}

#[derive(Debug, Clone)]
pub struct Broadening {
    pub samples: Vec<PlowSample>,
    pub clean_fit: Logistic,
    pub noisy_fit: Logistic,
    /// Bootstrap replicates of `noisy width - clean width`.
    pub width_differences: Vec<f64>,
}

impl Broadening {
    pub fn quantile(&self, q: f64) -> f64 {
        quantile(&self.width_differences, q)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BroadeningParams {
    /// Reduced temperature of the modelled sampler.
    pub t_sample: f64,
    pub n_run: usize,
    pub realizations: usize,
    pub control: ControlErrorSpec,
    pub resamples: usize,
    pub seed: u64,
}

/// `P_low` against transition temperature with and without control error.
///
/// Only non-excluded spins with exactly one transition on `curves` take
/// part. The clean value is the majority model at the exact orientation; the
/// noisy value averages the model over `realizations` perturbed copies.
pub fn broadening(instances: &[Hamiltonian], curves: &[OrientationCurve], window: usize, exclusion_eps: f64, params: &BroadeningParams) -> Result<Broadening> {
    let per_instance = par_map(instances, |k, h| {
        let records = find_transitions(&curves[k], window, exclusion_eps)?;
        let chosen: Vec<&TransitionRecord> = records.iter().filter(|r| !r.excluded && r.n_trans() == 1).collect();
        let tree = tree_for(h.graph())?;
        let plow = |m: &[f64], r: &TransitionRecord| plow_model(p_agree(r.sigma_low, m[r.index]), params.n_run, PlowVariant::Erfc);
        let clean_m = reduced_magnetization(&tree, h, params.t_sample)?;
        let mut noisy = vec![0.0; chosen.len()];
        for r in 0..params.realizations {
            let mut rng = stream(params.seed, CONTROL_STREAM, (k * params.realizations + r) as u32);
            let perturbed = inject_control_error(h, &params.control, &mut rng)?;
            let m = reduced_magnetization(&tree, &perturbed, params.t_sample)?;
            for (acc, rec) in noisy.iter_mut().zip(&chosen) {
                *acc += plow(&m, rec)?;
            }
        }
        chosen
            .iter()
            .zip(noisy)
            .map(|(rec, sum)| {
                Ok(PlowSample {
                    instance: k,
                    spin: rec.index,
                    t_trans: rec.transition_temps[0],
                    clean: plow(&clean_m, rec)?,
                    noisy: sum / params.realizations as f64,
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let samples: Vec<PlowSample> = per_instance.into_iter().flatten().collect();
    let x: Vec<f64> = samples.iter().map(|s| s.t_trans).collect();
    let clean: Vec<f64> = samples.iter().map(|s| s.clean).collect();
    let noisy: Vec<f64> = samples.iter().map(|s| s.noisy).collect();
    let clean_fit = fit_logistic(&x, &clean)?;
    let noisy_fit = fit_logistic(&x, &noisy)?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let width_differences = maxent_core::transitions::bootstrap_width_difference(&x, &clean, &noisy, params.resamples, &mut rng)?;
    Ok(Broadening { samples, clean_fit, noisy_fit, width_differences })
}

/// Counts of `(t_trans, P_low)` pairs on a regular grid; only nonempty bins.
pub fn density(points: &[(f64, f64)], t_bin: f64, p_bin: f64) -> Vec<(f64, f64, usize)> {
    let mut bins = std::collections::BTreeMap::new();
    for &(t, p) in points {
        let key = ((t / t_bin).floor() as i64, ((p / p_bin).floor() as i64).min((1.0 / p_bin).round() as i64 - 1));
        *bins.entry(key).or_insert(0usize) += 1;
    }
    bins.into_iter().map(|((a, b), n)| (a as f64 * t_bin, b as f64 * p_bin, n)).collect()
}
