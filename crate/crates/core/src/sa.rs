//! Single-spin Metropolis dynamics and linear-sweep simulated annealing.
//!
//! Schedules are given in reduced temperature `t = T / alpha` (units of
//! `alpha J`). Since `dE = 2 alpha s_i (h_i + sum_j J_ij s_j)`, the acceptance
//! probability `exp(-dE / T)` only depends on `t`.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::hamiltonian::{Hamiltonian, SpinConfig};
use crate::math;
use crate::rng;

/// RNG stream domain used by [`sa_orientation_sweep`].
pub const SA_STREAM: u32 = 0x5a;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VisitOrder {
    /// Spins `0, 1, ..., n-1, 0, ...`.
    #[default]
    Sequential,
    /// A uniformly random spin per update.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnealSchedule {
    pub t_start: f64,
    pub t_end: f64,
    /// Single-spin update attempts.
    pub total_updates: u64,
    pub order: VisitOrder,
}

impl AnnealSchedule {
    pub fn new(t_start: f64, t_end: f64, total_updates: u64) -> Result<Self> {
        if !(t_end > 0.0 && t_start > t_end && t_start.is_finite()) {
            return Err(Error::InvalidSchedule(alloc::format!("need t_start > t_end > 0, got {t_start} -> {t_end}")));
        }
        if total_updates < 2 {
            return Err(Error::InvalidSchedule(alloc::format!("{total_updates} updates")));
        }
        Ok(Self { t_start, t_end, total_updates, order: VisitOrder::Sequential })
    }

    /// A budget counted in full sweeps of `spins` attempts each.
    pub fn from_sweeps(t_start: f64, t_end: f64, sweeps: u64, spins: usize) -> Result<Self> {
        Self::new(t_start, t_end, sweeps * spins as u64)
    }

    pub fn with_order(mut self, order: VisitOrder) -> Self {
        self.order = order;
        self
    }

    /// Reduced temperature of update `u`, linear from `t_start` at `u = 0` to
    /// `t_end` at the last update.
    #[inline]
    pub fn temperature_at(&self, u: u64) -> f64 {
        let frac = u as f64 / (self.total_updates - 1) as f64;
        self.t_start + (self.t_end - self.t_start) * frac
    }

    /// Index of the first update whose temperature is at or below `t`.
    pub fn first_update_at_or_below(&self, t: f64) -> Option<u64> {
        if t < self.t_end {
            return None;
        }
        if t >= self.t_start {
            return Some(0);
        }
        let last = (self.total_updates - 1) as f64;
        let mut u = libm::ceil((self.t_start - t) / (self.t_start - self.t_end) * last) as u64;
        // correct for rounding in the division
        while u > 0 && self.temperature_at(u - 1) <= t {
            u -= 1;
        }
        while self.temperature_at(u) > t {
            u += 1;
        }
        Some(u)
    }

    fn check_for(&self, h: &Hamiltonian) -> Result<()> {
        if self.total_updates < h.spin_count() as u64 {
            return Err(Error::InvalidSchedule(alloc::format!(
                "{} updates for {} spins",
                self.total_updates,
                h.spin_count()
            )));
        }
        Ok(())
    }
}

/// Gaussian control error, standard deviations in units of `J`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlErrorSpec {
    pub sigma_h: f64,
    pub sigma_j: f64,
}

impl Default for ControlErrorSpec {
    fn default() -> Self {
        Self { sigma_h: 0.05, sigma_j: 0.03 }
    }
}

impl ControlErrorSpec {
    pub fn new(sigma_h: f64, sigma_j: f64) -> Result<Self> {
        for (what, v) in [("sigma_h", sigma_h), ("sigma_j", sigma_j)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Domain { what, value: v });
            }
        }
        Ok(Self { sigma_h, sigma_j })
    }

    pub fn is_zero(&self) -> bool {
        self.sigma_h == 0.0 && self.sigma_j == 0.0
    }
}

/// Adds independent Gaussian errors to the programmed values `alpha h_i` and
/// `alpha J_ij`; in the normalised Hamiltonian this is `h_i += eps_i / alpha`.
pub fn inject_control_error<R: Rng + ?Sized>(h: &Hamiltonian, spec: &ControlErrorSpec, rng: &mut R) -> Result<Hamiltonian> {
    if spec.is_zero() {
        return Ok(h.clone());
    }
    let alpha = h.alpha();
    let noise = |sigma: f64, values: &[f64], rng: &mut R| -> Result<Vec<f64>> {
        if sigma == 0.0 {
            return Ok(values.to_vec());
        }
        let normal = Normal::new(0.0, sigma).map_err(|_| Error::Domain { what: "control error", value: sigma })?;
        Ok(values.iter().map(|&v| v + normal.sample(rng) / alpha).collect())
    };
    let fields = noise(spec.sigma_h, h.fields(), rng)?;
    let couplers = noise(spec.sigma_j, h.couplers(), rng)?;
    h.with_values(fields, couplers)
}

/// `min(1, exp(-delta / t))`.
#[inline]
pub fn acceptance_probability(delta: f64, t: f64) -> f64 {
    if delta <= 0.0 {
        1.0
    } else {
        math::exp(-delta / t)
    }
}

/// Single-spin Metropolis state on one Hamiltonian.
#[derive(Debug, Clone)]
pub struct Metropolis {
    spins: Vec<i8>,
    fields: Vec<f64>,
    offsets: Vec<usize>,
    neighbors: Vec<(usize, f64)>,
    next: usize,
}

impl Metropolis {
    pub fn new(h: &Hamiltonian, start: SpinConfig) -> Result<Self> {
        if start.len() != h.spin_count() {
            return Err(Error::LengthMismatch { expected: h.spin_count(), actual: start.len() });
        }
        if h.spin_count() == 0 {
            return Err(Error::Empty("spin set"));
        }
        let graph = h.graph();
        let mut offsets = Vec::with_capacity(h.spin_count() + 1);
        let mut neighbors = Vec::new();
        offsets.push(0);
        for i in 0..h.spin_count() {
            neighbors.extend(graph.neighbors(i).iter().map(|&(j, e)| (j, h.couplers()[e])));
            offsets.push(neighbors.len());
        }
        Ok(Self { spins: start.spins().to_vec(), fields: h.fields().to_vec(), offsets, neighbors, next: 0 })
    }

    /// Uniformly random initial configuration.
    pub fn hot_start<R: Rng + ?Sized>(h: &Hamiltonian, rng: &mut R) -> Result<Self> {
        let spins = (0..h.spin_count()).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect();
        Self::new(h, SpinConfig::new(spins)?)
    }

    pub fn spins(&self) -> &[i8] {
        &self.spins
    }

    pub fn config(&self) -> SpinConfig {
        SpinConfig::new(self.spins.clone()).expect("spins stay +-1")
    }

    /// `h_i + sum_j J_ij s_j`.
    #[inline]
    pub fn local_field(&self, i: usize) -> f64 {
        let mut f = self.fields[i];
        for &(j, coupling) in &self.neighbors[self.offsets[i]..self.offsets[i + 1]] {
            f += coupling * self.spins[j] as f64;
        }
        f
    }

    /// Energy change of flipping spin `i`, in units of `alpha`.
    #[inline]
    pub fn flip_cost(&self, i: usize) -> f64 {
        2.0 * self.spins[i] as f64 * self.local_field(i)
    }

    /// One Metropolis attempt on spin `i` at reduced temperature `t`.
    #[inline]
    pub fn attempt<R: Rng + ?Sized>(&mut self, i: usize, t: f64, rng: &mut R) -> bool {
        let delta = self.flip_cost(i);
        let accept = delta <= 0.0 || rng.random::<f64>() < math::exp(-delta / t);
        if accept {
            self.spins[i] = -self.spins[i];
        }
        accept
    }

    /// One attempt on the next spin of the visit order.
    #[inline]
    pub fn step<R: Rng + ?Sized>(&mut self, t: f64, order: VisitOrder, rng: &mut R) -> bool {
        let i = match order {
            VisitOrder::Sequential => {
                let i = self.next;
                self.next = if i + 1 == self.spins.len() { 0 } else { i + 1 };
                i
            }
            VisitOrder::Random => rng.random_range(0..self.spins.len()),
        };
        self.attempt(i, t, rng)
    }
}

/// Anneals from a hot start and returns the final configuration.
pub fn anneal<R: Rng + ?Sized>(h: &Hamiltonian, schedule: &AnnealSchedule, rng: &mut R) -> Result<SpinConfig> {
    Ok(anneal_with_snapshots(h, schedule, &[], rng)?.0)
}

/// Anneals from a hot start, also copying the configuration right after the
/// first update whose temperature is at or below each checkpoint.
pub fn anneal_with_snapshots<R: Rng + ?Sized>(
    h: &Hamiltonian,
    schedule: &AnnealSchedule,
    checkpoints: &[f64],
    rng: &mut R,
) -> Result<(SpinConfig, Vec<Vec<i8>>)> {
    schedule.check_for(h)?;
    let snap_at = snapshot_updates(schedule, checkpoints)?;
    let mut chain = Metropolis::hot_start(h, rng)?;
    let mut snapshots = vec![Vec::new(); checkpoints.len()];
    // checkpoints sorted by the update index they fire on
    let mut pending: Vec<(u64, usize)> = snap_at.iter().copied().zip(0..).collect();
    pending.sort_unstable();
    let mut cursor = 0;
    for u in 0..schedule.total_updates {
        chain.step(schedule.temperature_at(u), schedule.order, rng);
        while cursor < pending.len() && pending[cursor].0 == u {
            snapshots[pending[cursor].1] = chain.spins.clone();
            cursor += 1;
        }
    }
    Ok((chain.config(), snapshots))
}

fn snapshot_updates(schedule: &AnnealSchedule, checkpoints: &[f64]) -> Result<Vec<u64>> {
    checkpoints
        .iter()
        .map(|&c| {
            if c > schedule.t_start {
                return Err(Error::Domain { what: "checkpoint above t_start", value: c });
            }
            schedule.first_update_at_or_below(c).ok_or(Error::Domain { what: "checkpoint below t_end", value: c })
        })
        .collect()
}

/// SA orientation estimates at each checkpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct SaSweep {
    pub checkpoints: Vec<f64>,
    /// `magnetization[c][i]`: mean of spin `i` over runs at checkpoint `c`.
    pub magnetization: Vec<Vec<f64>>,
    pub runs: usize,
}

/// Running per-spin sums of snapshot spins; merging is exact integer arithmetic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SnapshotTally {
    sums: Vec<Vec<i64>>,
    runs: usize,
}

impl SnapshotTally {
    pub fn new(checkpoints: usize, spins: usize) -> Self {
        Self { sums: vec![vec![0; spins]; checkpoints], runs: 0 }
    }

    pub fn add(&mut self, snapshots: &[Vec<i8>]) {
        for (sum, snap) in self.sums.iter_mut().zip(snapshots) {
            for (s, &v) in sum.iter_mut().zip(snap) {
                *s += v as i64;
            }
        }
        self.runs += 1;
    }

    pub fn merge(&mut self, other: &SnapshotTally) {
        for (a, b) in self.sums.iter_mut().zip(&other.sums) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        self.runs += other.runs;
    }

    pub fn finish(&self, checkpoints: &[f64]) -> SaSweep {
        let n = self.runs.max(1) as f64;
        SaSweep {
            checkpoints: checkpoints.to_vec(),
            magnetization: self.sums.iter().map(|row| row.iter().map(|&s| s as f64 / n).collect()).collect(),
            runs: self.runs,
        }
    }
}

/// One anneal on the stream of run `run`; the building block of
/// [`sa_orientation_sweep`] for callers that distribute runs.
pub fn sa_run(h: &Hamiltonian, schedule: &AnnealSchedule, checkpoints: &[f64], seed: u64, run: u32) -> Result<Vec<Vec<i8>>> {
    let mut rng = rng::stream(seed, SA_STREAM, run);
    Ok(anneal_with_snapshots(h, schedule, checkpoints, &mut rng)?.1)
}

/// Per-spin means over `n_runs` independent anneals at each checkpoint.
pub fn sa_orientation_sweep(
    h: &Hamiltonian,
    schedule: &AnnealSchedule,
    checkpoints: &[f64],
    n_runs: usize,
    seed: u64,
) -> Result<SaSweep> {
    if n_runs == 0 {
        return Err(Error::Empty("annealing runs"));
    }
    let mut tally = SnapshotTally::new(checkpoints.len(), h.spin_count());
    for run in 0..n_runs {
        tally.add(&sa_run(h, schedule, checkpoints, seed, run as u32)?);
    }
    Ok(tally.finish(checkpoints))
}

/// Half-width of the `z`-sigma band for a mean of `runs` `+-1` draws with
/// expectation `m`.
pub fn binomial_band(m: f64, runs: usize, z: f64) -> f64 {
    z * math::sqrt((1.0 - m * m).max(0.0) / runs as f64)
}
