//! Spin-sign and correlation-sign transitions of thermal orientation curves,
//! the majority-vote `P_low` model, `P_err` metrics and temperature fits.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::bte::{elimination_order, BucketTree};
use crate::error::{Error, Result};
use crate::exact::enumerate_spectrum;
use crate::hamiltonian::Hamiltonian;
use crate::math;

/// Default number of grid points and maximum temperature.
pub const GRID_POINTS: usize = 200;
pub const GRID_MAX: f64 = 7.0;
pub const DEFAULT_WINDOW: usize = 5;
pub const DEFAULT_EXCLUSION_EPS: f64 = 0.01;

/// `T_k = t_max * k / points` for `k = 1..=points`.
pub fn uniform_grid(t_max: f64, points: usize) -> Vec<f64> {
    (1..=points).map(|k| t_max * k as f64 / points as f64).collect()
}

/// The 200-point grid on `(0, 7]`.
pub fn default_grid() -> Vec<f64> {
    uniform_grid(GRID_MAX, GRID_POINTS)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    /// Exhaustive enumeration.
    Exact,
    /// Bucket-tree elimination.
    Bte,
}

impl Engine {
    pub fn name(&self) -> &'static str {
        match self {
            Engine::Exact => "exact",
            Engine::Bte => "bte",
        }
    }
}

/// Thermal averages of spins (or spin pairs) over an ascending temperature grid.
#[derive(Debug, Clone, PartialEq)]
pub struct OrientationCurve {
    pub temperatures: Vec<f64>,
    /// `values[i][k]` is item `i` at `temperatures[k]`.
    pub values: Vec<Vec<f64>>,
    pub engine: &'static str,
}

impl OrientationCurve {
    pub fn new(temperatures: Vec<f64>, values: Vec<Vec<f64>>, engine: &'static str) -> Result<Self> {
        check_grid(&temperatures)?;
        for row in &values {
            if row.len() != temperatures.len() {
                return Err(Error::LengthMismatch { expected: temperatures.len(), actual: row.len() });
            }
            if let Some(&bad) = row.iter().find(|v| !(v.abs() <= 1.0 + 1e-12)) {
                return Err(Error::Domain { what: "orientation value", value: bad });
            }
        }
        Ok(Self { temperatures, values, engine })
    }

    /// Builds a curve from per-temperature rows `rows[k][i]`.
    pub fn from_rows(temperatures: Vec<f64>, rows: &[Vec<f64>], engine: &'static str) -> Result<Self> {
        let items = rows.first().map_or(0, Vec::len);
        let values = (0..items).map(|i| rows.iter().map(|r| r[i]).collect()).collect();
        Self::new(temperatures, values, engine)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Empty("temperature grid"));
    }
    if grid[0] <= 0.0 {
        return Err(Error::NonPositiveTemperature(grid[0]));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain { what: "grid must be strictly ascending", value: grid[0] });
    }
    Ok(())
}

/// `<s_i>(T)` for every spin on `grid`.
pub fn orientation_curve(h: &Hamiltonian, grid: &[f64], engine: Engine) -> Result<OrientationCurve> {
    check_grid(grid)?;
    let rows: Vec<Vec<f64>> = match engine {
        Engine::Exact => {
            let spectrum = enumerate_spectrum(h)?;
            grid.iter().map(|&t| spectrum.magnetization(t)).collect::<Result<_>>()?
        }
        Engine::Bte => {
            let tree = BucketTree::new(h.graph(), elimination_order(h.graph()))?;
            grid.iter().map(|&t| tree.magnetizations(h, t)).collect::<Result<_>>()?
        }
    };
    OrientationCurve::from_rows(grid.to_vec(), &rows, engine.name())
}

/// `<s_i s_j>(T)` for the given pairs. The bte engine supports graph edges only.
pub fn correlation_curve(h: &Hamiltonian, grid: &[f64], engine: Engine, pairs: &[(usize, usize)]) -> Result<OrientationCurve> {
    check_grid(grid)?;
    let rows: Vec<Vec<f64>> = match engine {
        Engine::Exact => {
            let spectrum = enumerate_spectrum(h)?;
            grid.iter().map(|&t| spectrum.correlations(t, pairs)).collect::<Result<_>>()?
        }
        Engine::Bte => {
            let edges: Vec<usize> = pairs
                .iter()
                .map(|&(i, j)| h.graph().edge_index(i, j).ok_or(Error::NotAnEdge(i, j)))
                .collect::<Result<_>>()?;
            let tree = BucketTree::new(h.graph(), elimination_order(h.graph()))?;
            grid.iter()
                .map(|&t| tree.marginals(h, t).map(|m| edges.iter().map(|&e| m.edge_correlation[e]).collect()))
                .collect::<Result<_>>()?
        }
    };
    OrientationCurve::from_rows(grid.to_vec(), &rows, engine.name())
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransitionRecord {
    /// Spin (or pair) index within the curve.
    pub index: usize,
    /// Sign at the lowest grid temperature; `0` when excluded.
    pub sigma_low: i8,
    pub transition_temps: Vec<f64>,
    pub excluded: bool,
}

impl TransitionRecord {
    pub fn n_trans(&self) -> usize {
        self.transition_temps.len()
    }
}

/// Centered running average whose window shrinks symmetrically at the ends.
/// An even `window` is rounded up to the next odd width.
pub fn smooth(values: &[f64], window: usize) -> Vec<f64> {
    let half = window / 2;
    let n = values.len();
    (0..n)
        .map(|k| {
            let reach = half.min(k).min(n - 1 - k);
            let slice = &values[k - reach..=k + reach];
            slice.iter().sum::<f64>() / slice.len() as f64
        })
        .collect()
}

/// Zero crossings of one smoothed curve, by linear interpolation. Exact zeros
/// are skipped: a crossing is placed between the last nonzero point and the
/// next point of opposite sign.
pub fn zero_crossings(temperatures: &[f64], values: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    let mut last: Option<(f64, f64)> = None;
    for (&t, &v) in temperatures.iter().zip(values) {
        if v == 0.0 {
            continue;
        }
        if let Some((t0, v0)) = last {
            if (v0 > 0.0) != (v > 0.0) {
                out.push(t0 + (t - t0) * v0 / (v0 - v));
            }
        }
        last = Some((t, v));
    }
    out
}

/// Smooths each curve, finds its sign transitions and marks spins whose raw
/// value at the lowest temperature is below `exclusion_eps` in magnitude.
pub fn find_transitions(curve: &OrientationCurve, window: usize, exclusion_eps: f64) -> Result<Vec<TransitionRecord>> {
    check_grid(&curve.temperatures)?;
    if window == 0 {
        return Err(Error::Domain { what: "smoothing window", value: 0.0 });
    }
    if curve.temperatures.len() < window {
        return Err(Error::LengthMismatch { expected: window, actual: curve.temperatures.len() });
    }
    Ok(curve
        .values
        .iter()
        .enumerate()
        .map(|(index, raw)| {
            let low = raw[0];
            if math::abs(low) < exclusion_eps {
                return TransitionRecord { index, sigma_low: 0, transition_temps: Vec::new(), excluded: true };
            }
            TransitionRecord {
                index,
                sigma_low: math::sign(low),
                transition_temps: zero_crossings(&curve.temperatures, &smooth(raw, window)),
                excluded: false,
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlowVariant {
    /// `erfc(2 (1/2 - p) sqrt(n)) / 2`.
    Erfc,
    /// `Phi((p - 1/2) sqrt(n) / sqrt(p (1 - p)))`.
    Clt,
}

/// Probability that an `n_run`-shot majority agrees with the low-temperature
/// orientation, given the per-shot agreement probability.
pub fn plow_model(p_agree: f64, n_run: usize, variant: PlowVariant) -> Result<f64> {
    if !(0.0..=1.0).contains(&p_agree) {
        return Err(Error::Domain { what: "agreement probability", value: p_agree });
    }
    if n_run == 0 {
        return Err(Error::Empty("run count"));
    }
    let root = math::sqrt(n_run as f64);
    Ok(match variant {
        PlowVariant::Erfc => 0.5 * math::erfc(2.0 * (0.5 - p_agree) * root),
        PlowVariant::Clt => {
            let var = p_agree * (1.0 - p_agree);
            if var == 0.0 {
                if p_agree > 0.5 {
                    1.0
                } else {
                    0.0
                }
            } else {
                math::normal_cdf((p_agree - 0.5) * root / math::sqrt(var))
            }
        }
    })
}

/// Per-shot probability of agreeing with `sigma_low` given `<s_i> = m`.
pub fn p_agree(sigma_low: i8, m: f64) -> f64 {
    (0.5 * (1.0 + sigma_low as f64 * m)).clamp(0.0, 1.0)
}

/// Exact probability that more than half of `n` Bernoulli(`p`) shots succeed,
/// ties counting one half.
pub fn majority_probability(p: f64, n: usize) -> f64 {
    let pmf = math::binomial_pmf(n, p);
    pmf.iter()
        .enumerate()
        .map(|(k, &q)| {
            if 2 * k > n {
                q
            } else if 2 * k == n {
                0.5 * q
            } else {
                0.0
            }
        })
        .sum()
}

/// Mean of `|decoded_i - experiment_i| / 2` over included spins.
pub fn p_err_hamiltonian(decoded: &[i8], experiment: &[i8], included: &[bool]) -> Result<f64> {
    if decoded.len() != experiment.len() || decoded.len() != included.len() {
        return Err(Error::LengthMismatch { expected: decoded.len(), actual: experiment.len().min(included.len()) });
    }
    let mut total = 0.0;
    let mut count = 0usize;
    for ((&d, &x), _) in decoded.iter().zip(experiment).zip(included).filter(|(_, &inc)| inc) {
        total += math::abs((d - x) as f64) / 2.0;
        count += 1;
    }
    if count == 0 {
        return Err(Error::Empty("included spins"));
    }
    Ok(total / count as f64)
}

/// `P_err^H(T)` for a set of Hamiltonians over a shared temperature grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PErrTable {
    pub temperatures: Vec<f64>,
    /// `per_hamiltonian[h][k]`.
    pub per_hamiltonian: Vec<Vec<f64>>,
}

impl PErrTable {
    /// Mean over Hamiltonians at each temperature.
    pub fn overall(&self) -> Vec<f64> {
        (0..self.temperatures.len())
            .map(|k| math::mean(&self.per_hamiltonian.iter().map(|row| row[k]).collect::<Vec<_>>()))
            .collect()
    }

    /// `(T, min_T P_err^H)` per Hamiltonian; ties go to the lower temperature.
    pub fn minima(&self) -> Vec<(f64, f64)> {
        self.per_hamiltonian.iter().map(|row| min_over_grid(&self.temperatures, row)).collect()
    }
}

/// Smallest value and its temperature; ties go to the lower temperature.
pub fn min_over_grid(temperatures: &[f64], values: &[f64]) -> (f64, f64) {
    let mut best = (f64::NAN, f64::INFINITY);
    for (&t, &v) in temperatures.iter().zip(values) {
        if v < best.1 {
            best = (t, v);
        }
    }
    best
}

/// One `P_low` observation: a transition temperature, the observed fraction,
/// and the shots per set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlowPoint {
    pub t_trans: f64,
    pub observed: f64,
    pub n_run: usize,
}

/// Least-squares effective temperature. `p_agree_at(i, T)` gives the per-shot
/// agreement probability of point `i` at model temperature `T`. The bracket is
/// scanned on a dense grid and the best cell refined by golden section.
pub fn fit_effective_temperature<F>(points: &[PlowPoint], mut p_agree_at: F, bracket: (f64, f64)) -> Result<f64>
where
    F: FnMut(usize, f64) -> f64,
{
    if points.len() < 2 {
        return Err(Error::Empty("fit points"));
    }
    if points.iter().all(|p| p.observed == points[0].observed) {
        return Err(Error::Degenerate("all observed P_low identical"));
    }
    let (lo, hi) = bracket;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::Domain { what: "fit bracket", value: lo });
    }
    let mut loss = |t: f64| -> f64 {
        points
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let model = plow_model(p_agree_at(i, t).clamp(0.0, 1.0), p.n_run, PlowVariant::Erfc).unwrap_or(f64::NAN);
                (p.observed - model) * (p.observed - model)
            })
            .sum()
    };
    const SCAN: usize = 400;
    let step = (hi - lo) / SCAN as f64;
    let mut best = (lo, f64::INFINITY);
    for k in 0..=SCAN {
        let t = lo + step * k as f64;
        let v = loss(t);
        if v < best.1 {
            best = (t, v);
        }
    }
    let a = (best.0 - step).max(lo);
    let b = (best.0 + step).min(hi);
    let refined = math::golden_section(&mut loss, a, b, 1e-6 * (hi - lo));
    Ok(if loss(refined) <= best.1 { refined } else { best.0 })
}

/// Increasing logistic `1 / (1 + exp(-(x - center) / width))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Logistic {
    pub center: f64,
    pub width: f64,
}

impl Logistic {
    pub fn eval(&self, x: f64) -> f64 {
        1.0 / (1.0 + math::exp(-(x - self.center) / self.width))
    }
}

/// Least-squares logistic fit by Levenberg-Marquardt on `(center, ln width)`.
pub fn fit_logistic(x: &[f64], y: &[f64]) -> Result<Logistic> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch { expected: x.len(), actual: y.len() });
    }
    if x.len() < 3 {
        return Err(Error::Empty("logistic fit points"));
    }
    let spread = x.iter().copied().fold(f64::NEG_INFINITY, f64::max) - x.iter().copied().fold(f64::INFINITY, f64::min);
    if !(spread > 0.0) {
        return Err(Error::Degenerate("all abscissae identical"));
    }
    let sse = |c: f64, lw: f64| -> f64 {
        let w = math::exp(lw);
        x.iter().zip(y).map(|(&xi, &yi)| {
            let r = yi - 1.0 / (1.0 + math::exp(-(xi - c) / w));
            r * r
        }).sum()
    };
    // start from the point where the data cross one half, width a tenth of the range
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let start = order.iter().find(|&&i| y[i] >= 0.5).map_or(x[order[x.len() / 2]], |&i| x[i]);
    let (mut c, mut lw) = (start, math::ln(spread / 10.0));
    let mut current = sse(c, lw);
    let mut lambda = 1e-3;
    for _ in 0..500 {
        let w = math::exp(lw);
        let (mut a11, mut a12, mut a22, mut g1, mut g2) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (&xi, &yi) in x.iter().zip(y) {
            let z = (xi - c) / w;
            let f = 1.0 / (1.0 + math::exp(-z));
            let d = f * (1.0 - f);
            // derivatives with respect to c and ln w
            let jc = -d / w;
            let jw = -d * z;
            let r = yi - f;
            a11 += jc * jc;
            a12 += jc * jw;
            a22 += jw * jw;
            g1 += jc * r;
            g2 += jw * r;
        }
        let (b11, b22) = (a11 * (1.0 + lambda), a22 * (1.0 + lambda));
        let det = b11 * b22 - a12 * a12;
        if !(det.abs() > 1e-300) {
            break;
        }
        let dc = (b22 * g1 - a12 * g2) / det;
        let dw = (b11 * g2 - a12 * g1) / det;
        let next = sse(c + dc, lw + dw);
        if next < current {
            let gain = current - next;
            c += dc;
            lw += dw;
            current = next;
            lambda = (lambda / 3.0).max(1e-12);
            if gain < 1e-15 * (1.0 + current) && dc.abs() < 1e-12 && dw.abs() < 1e-12 {
                break;
            }
        } else {
            lambda *= 4.0;
            if lambda > 1e12 {
                break;
            }
        }
    }
    Ok(Logistic { center: c, width: math::exp(lw) })
}

/// Paired bootstrap of `width(y_b) - width(y_a)` over resampled points.
pub fn bootstrap_width_difference<R: Rng + ?Sized>(x: &[f64], y_a: &[f64], y_b: &[f64], resamples: usize, rng: &mut R) -> Result<Vec<f64>> {
    if x.len() != y_a.len() || x.len() != y_b.len() {
        return Err(Error::LengthMismatch { expected: x.len(), actual: y_a.len().min(y_b.len()) });
    }
    let n = x.len();
    let mut out = Vec::with_capacity(resamples);
    let (mut xs, mut ya, mut yb) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    for _ in 0..resamples {
        for k in 0..n {
            let i = rng.random_range(0..n);
            xs[k] = x[i];
            ya[k] = y_a[i];
            yb[k] = y_b[i];
        }
        // resamples with a single distinct abscissa cannot be fitted
        if let (Ok(a), Ok(b)) = (fit_logistic(&xs, &ya), fit_logistic(&xs, &yb)) {
            out.push(b.width - a.width);
        }
    }
    Ok(out)
}

/// Empirical quantile with linear interpolation.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = libm::floor(pos) as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}
