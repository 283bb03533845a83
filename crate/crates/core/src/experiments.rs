//! Bit-error-rate algebra: sector-grouped rates, BER polynomials in the
//! crossover probability, BER surfaces over decoding and Nishimori
//! temperature, Shannon reference curves, bootstrap errors and the 4x4
//! error-rate metrics.
//!
//! The truth word of a clean Hamiltonian is the sign pattern of its fields.
//! A received Hamiltonian corrupted in `s` of its `N + M` elements belongs to
//! sector `s`; the BER at crossover `p` is `sum_s C(N+M, s) p^s (1-p)^(N+M-s) r_s`.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::channel::{self, Combinations, CorruptionMask};
use crate::chimera::ChimeraGraph;
use crate::error::{Error, Result};
use crate::exact::enumerate_spectrum;
use crate::hamiltonian::{bit_error_rate, Decoded, Hamiltonian, SpinConfig};
use crate::math;
use crate::rng::stream;
use crate::symmetry::{canonical_classes, cell_from_word};

/// Stream domains for sector sampling and bootstrap resamples.
pub const SECTOR_STREAM: u32 = 0x5ec;
pub const BOOTSTRAP_STREAM: u32 = 0xb0;
pub const DEFAULT_SAMPLES_PER_SECTOR: usize = 500;
/// Tolerance of the Nishimori optimality check.
pub const NISHIMORI_TOLERANCE: f64 = 1e-12;

/// Rates of one corruption sector.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorStats {
    pub sector: usize,
    /// Every Hamiltonian of the sector was decoded (no sampling error).
    pub exhaustive: bool,
    /// Number of Hamiltonians averaged.
    pub count: u64,
    pub mean: f64,
    /// Per-Hamiltonian rates of a sampled sector, kept for bootstrapping.
    pub samples: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SectorRates {
    pub n_elements: usize,
    pub sectors: Vec<SectorStats>,
}

impl SectorRates {
    /// Validates that sectors `0..=n_elements` are all present, in order.
    pub fn new(n_elements: usize, sectors: Vec<SectorStats>) -> Result<Self> {
        for s in 0..=n_elements {
            match sectors.get(s) {
                Some(st) if st.sector == s => {
                    if !(0.0..=1.0).contains(&st.mean) {
                        return Err(Error::Domain { what: "sector mean", value: st.mean });
                    }
                }
                _ => return Err(Error::MissingSector(s)),
            }
        }
        if sectors.len() != n_elements + 1 {
            return Err(Error::SectorOutOfRange { sector: sectors.len() - 1, max: n_elements });
        }
        Ok(Self { n_elements, sectors })
    }

    pub fn means(&self) -> Vec<f64> {
        self.sectors.iter().map(|s| s.mean).collect()
    }

    /// `r_tot(p)`.
    pub fn ber(&self, p: f64) -> Result<f64> {
        polynomial_ber(&self.means(), p)
    }

    /// `r_tot` on every point of `p_grid`.
    pub fn ber_curve(&self, p_grid: &[f64]) -> Result<Vec<f64>> {
        ber_curve(self, p_grid)
    }
}

fn polynomial_ber(means: &[f64], p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain { what: "crossover probability", value: p });
    }
    let weights = math::binomial_pmf(means.len() - 1, p);
    Ok(weights.iter().zip(means).map(|(w, r)| w * r).sum())
}

/// `r_tot(p) = sum_s q(s, p) r_s` on every grid point.
pub fn ber_curve(rates: &SectorRates, p_grid: &[f64]) -> Result<Vec<f64>> {
    let means = rates.means();
    if means.len() != rates.n_elements + 1 {
        return Err(Error::MissingSector(means.len()));
    }
    p_grid.iter().map(|&p| polynomial_ber(&means, p)).collect()
}

/// Truth word encoded by a clean Hamiltonian: the signs of its fields. The
/// couplers must equal the products of the adjacent fields.
pub fn truth_of(clean: &Hamiltonian) -> Result<SpinConfig> {
    if !clean.is_nominal() {
        return Err(Error::NotNominal);
    }
    let f = clean.fields();
    for (e, &(i, j)) in clean.graph().edges().iter().enumerate() {
        if clean.couplers()[e] != f[i] * f[j] {
            return Err(Error::Domain { what: "clean coupler is not a field product", value: clean.couplers()[e] });
        }
    }
    SpinConfig::new(f.iter().map(|&v| v as i8).collect())
}

/// Rate of sector `s`: exhaustive when `C(N+M, s) <= samples`, otherwise the
/// mean over `samples` Hamiltonians drawn from stream `(seed, SECTOR_STREAM, s)`.
pub fn sector_rate<D>(clean: &Hamiltonian, decoder: &mut D, s: usize, samples: usize, seed: u64) -> Result<SectorStats>
where
    D: FnMut(&Hamiltonian) -> Result<Decoded>,
{
    if samples == 0 {
        return Err(Error::Empty("samples per sector"));
    }
    let truth = truth_of(clean)?;
    let n = clean.element_count();
    if s > n {
        return Err(Error::SectorOutOfRange { sector: s, max: n });
    }
    let mut rates = Vec::new();
    let exhaustive = math::binomial(n, s) <= samples as f64;
    if exhaustive {
        for subset in Combinations::new(n, s) {
            let h = CorruptionMask::from_elements(&subset, clean.spin_count()).apply(clean)?;
            rates.push(bit_error_rate(&decoder(&h)?, &truth)?);
        }
    } else {
        let mut rng = stream(seed, SECTOR_STREAM, s as u32);
        for _ in 0..samples {
            let (h, _) = channel::sample_sector(clean, s, &mut rng)?;
            rates.push(bit_error_rate(&decoder(&h)?, &truth)?);
        }
    }
    Ok(SectorStats { sector: s, exhaustive, count: rates.len() as u64, mean: math::mean(&rates), samples: rates })
}

/// Rates of every sector `0..=N+M`.
pub fn sector_rates<D>(clean: &Hamiltonian, mut decoder: D, samples: usize, seed: u64) -> Result<SectorRates>
where
    D: FnMut(&Hamiltonian) -> Result<Decoded>,
{
    let n = clean.element_count();
    let sectors = (0..=n).map(|s| sector_rate(clean, &mut decoder, s, samples, seed)).collect::<Result<_>>()?;
    SectorRates::new(n, sectors)
}

/// Exact sector rates of a small graph via the gauge bijection.
///
/// Every received Hamiltonian is the gauge transform of a field-fixed one
/// (all fields `+1`) by a spin word `X`, and for a gauge-covariant decoder its
/// BER against the all-up truth equals the BER of the field-fixed decode
/// against `X`. Summing over field-fixed coupler words and all `X` therefore
/// covers all `2^(N+M)` Hamiltonians with one decode per word. On the full
/// unit cell the words are further reduced to the 192 automorphism classes.
#[derive(Debug, Clone)]
pub struct GaugeEnsemble {
    spins: usize,
    n_elements: usize,
    reps: Vec<Hamiltonian>,
    multiplicity: Vec<u64>,
    /// `corruption[r][x]`: corrupted elements of the Hamiltonian built from
    /// representative `r` and gauge word `x`.
    corruption: Vec<Vec<u8>>,
}

/// Word limit for the exhaustive gauge ensemble.
pub const MAX_GAUGE_ELEMENTS: usize = 24;

impl GaugeEnsemble {
    /// The 192 classes of the full unit cell weighted by orbit size.
    pub fn unit_cell(alpha: f64) -> Result<Self> {
        let graph = Arc::new(ChimeraGraph::unit_cell());
        let classes = canonical_classes();
        let reps = classes.iter().map(|c| cell_from_word(graph.clone(), c.word, alpha)).collect::<Result<Vec<_>>>()?;
        Ok(Self::build(reps, classes.iter().map(|c| c.orbit_size as u64).collect()))
    }

    /// All `2^M` field-fixed coupler words of an arbitrary small graph.
    pub fn exhaustive(graph: Arc<ChimeraGraph>, alpha: f64) -> Result<Self> {
        let (n, m) = (graph.spin_count(), graph.edge_count());
        if n + m > MAX_GAUGE_ELEMENTS {
            return Err(Error::TooManySpins { spins: n + m, cap: MAX_GAUGE_ELEMENTS });
        }
        let reps = (0..1u32 << m)
            .map(|w| {
                let couplers = (0..m).map(|e| if w >> e & 1 == 1 { -1.0 } else { 1.0 }).collect();
                Hamiltonian::new(graph.clone(), vec![1.0; n], couplers, alpha)
            })
            .collect::<Result<Vec<_>>>()?;
        let mult = vec![1; reps.len()];
        Ok(Self::build(reps, mult))
    }

    fn build(reps: Vec<Hamiltonian>, multiplicity: Vec<u64>) -> Self {
        let spins = reps[0].spin_count();
        let n_elements = reps[0].element_count();
        let corruption = reps
            .iter()
            .map(|h| {
                let edges = h.graph().edges();
                (0..1usize << spins)
                    .map(|x| {
                        // bit i of x set means X_i = -1
                        let mut k = x.count_ones();
                        for (e, &(i, j)) in edges.iter().enumerate() {
                            let product = if (x >> i ^ x >> j) & 1 == 1 { -1.0 } else { 1.0 };
                            if h.couplers()[e] != product {
                                k += 1;
                            }
                        }
                        k as u8
                    })
                    .collect()
            })
            .collect();
        Self { spins, n_elements, reps, multiplicity, corruption }
    }

    pub fn representatives(&self) -> &[Hamiltonian] {
        &self.reps
    }

    pub fn multiplicity(&self) -> &[u64] {
        &self.multiplicity
    }

    pub fn n_elements(&self) -> usize {
        self.n_elements
    }

    /// Sector rates from one decode per representative.
    pub fn rates(&self, decoded: &[Decoded]) -> Result<SectorRates> {
        let soft: Vec<Vec<f64>> = decoded.iter().map(|d| d.values().iter().map(|&v| v as f64).collect()).collect();
        self.soft_rates(&soft)
    }

    /// Expected sector rates of a randomised decoder that outputs `+1` for
    /// spin `i` with probability `(1 + m_i) / 2`.
    pub fn soft_rates(&self, orientation: &[Vec<f64>]) -> Result<SectorRates> {
        if orientation.len() != self.reps.len() {
            return Err(Error::LengthMismatch { expected: self.reps.len(), actual: orientation.len() });
        }
        let n = self.spins;
        let mut sums = vec![0.0f64; self.n_elements + 1];
        for ((d, ks), &mult) in orientation.iter().zip(&self.corruption).zip(&self.multiplicity) {
            if d.len() != n {
                return Err(Error::LengthMismatch { expected: n, actual: d.len() });
            }
            if let Some(&bad) = d.iter().find(|v| !(v.abs() <= 1.0)) {
                return Err(Error::Domain { what: "decoded orientation", value: bad });
            }
            // per-spin cost of decoding against X_i = +1 and X_i = -1
            let cost: Vec<[f64; 2]> = d.iter().map(|&v| [0.5 * (1.0 - v), 0.5 * (1.0 + v)]).collect();
            for (x, &k) in ks.iter().enumerate() {
                let errors: f64 = cost.iter().enumerate().map(|(i, c)| c[x >> i & 1]).sum();
                sums[k as usize] += mult as f64 * errors / n as f64;
            }
        }
        let sectors = sums
            .into_iter()
            .enumerate()
            .map(|(s, total)| {
                let count = math::binomial(self.n_elements, s);
                SectorStats { sector: s, exhaustive: true, count: count as u64, mean: total / count, samples: Vec::new() }
            })
            .collect();
        SectorRates::new(self.n_elements, sectors)
    }

    /// Rates of the ground-state decoder.
    pub fn map_rates(&self) -> Result<SectorRates> {
        let decoded = self.reps.iter().map(|h| Ok(enumerate_spectrum(h)?.map_decode())).collect::<Result<Vec<_>>>()?;
        self.rates(&decoded)
    }

    /// Rates of the finite-temperature decoder at each temperature.
    pub fn mpm_rates(&self, temperatures: &[f64]) -> Result<Vec<SectorRates>> {
        let spectra = self.reps.iter().map(enumerate_spectrum).collect::<Result<Vec<_>>>()?;
        temperatures
            .iter()
            .map(|&t| {
                let decoded = spectra.iter().map(|s| s.mpm_decode(t)).collect::<Result<Vec<_>>>()?;
                self.rates(&decoded)
            })
            .collect()
    }
}

/// `r_tot(p)` by decoding every one of the `2^(N+M)` received Hamiltonians.
pub fn direct_ber_curve<D>(clean: &Hamiltonian, mut decoder: D, p_grid: &[f64]) -> Result<Vec<f64>>
where
    D: FnMut(&Hamiltonian) -> Result<Decoded>,
{
    let truth = truth_of(clean)?;
    let n = clean.element_count();
    if n > MAX_GAUGE_ELEMENTS {
        return Err(Error::TooManySpins { spins: n, cap: MAX_GAUGE_ELEMENTS });
    }
    if let Some(&p) = p_grid.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::Domain { what: "crossover probability", value: p });
    }
    let mut acc = vec![0.0; p_grid.len()];
    for code in 0..1u32 << n {
        let elements: Vec<usize> = (0..n).filter(|&e| code >> e & 1 == 1).collect();
        let h = CorruptionMask::from_elements(&elements, clean.spin_count()).apply(clean)?;
        let r = bit_error_rate(&decoder(&h)?, &truth)?;
        let k = elements.len() as i32;
        for (a, &p) in acc.iter_mut().zip(p_grid) {
            *a += libm::pow(p, k as f64) * libm::pow(1.0 - p, (n as i32 - k) as f64) * r;
        }
    }
    Ok(acc)
}

/// Smallest crossover in `(0, 1/2)` where the decoder stops being useful,
/// i.e. where `r_tot(p) - p` turns from negative to nonnegative.
pub fn usefulness_threshold(rates: &SectorRates) -> Result<f64> {
    let f = |p: f64| rates.ber(p).map(|r| r - p);
    const SCAN: usize = 1000;
    let mut prev = (1e-6, f(1e-6)?);
    for k in 1..SCAN {
        let p = 0.5 * k as f64 / SCAN as f64;
        let v = f(p)?;
        if prev.1 < 0.0 && v >= 0.0 {
            let (mut lo, mut hi) = (prev.0, p);
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if f(mid)? < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Ok(0.5 * (lo + hi));
        }
        prev = (p, v);
    }
    Err(Error::Degenerate("decoder BER never crosses p below one half"))
}

/// Finite-temperature BER normalised by the ground-state BER.
#[derive(Debug, Clone, PartialEq)]
pub struct BerSurface {
    pub t_decode: Vec<f64>,
    pub t_nish: Vec<f64>,
    /// `mpm[n][d]`: `r_tot` of decoding at `t_decode[d]` on the channel of `t_nish[n]`.
    pub mpm: Vec<Vec<f64>>,
    /// Ground-state `r_tot` on each channel.
    pub map: Vec<f64>,
    /// `mpm[n][d] / map[n]`.
    pub ratio: Vec<Vec<f64>>,
}

/// BER surface of a gauge ensemble; the crossover of each row is the inverse of
/// the Nishimori relation.
pub fn ber_surface(ensemble: &GaugeEnsemble, t_decode: &[f64], t_nish: &[f64]) -> Result<BerSurface> {
    let mpm_rates = ensemble.mpm_rates(t_decode)?;
    let map_rates = ensemble.map_rates()?;
    surface_from_rates(t_decode, t_nish, &mpm_rates, &map_rates)
}

/// Assembles a surface from precomputed sector rates (one set per decoding
/// temperature).
pub fn surface_from_rates(t_decode: &[f64], t_nish: &[f64], mpm_rates: &[SectorRates], map_rates: &SectorRates) -> Result<BerSurface> {
    if mpm_rates.len() != t_decode.len() {
        return Err(Error::LengthMismatch { expected: t_decode.len(), actual: mpm_rates.len() });
    }
    if t_nish.is_empty() || t_decode.is_empty() {
        return Err(Error::Empty("surface grid"));
    }
    let ps = t_nish.iter().map(|&t| channel::crossover_probability(t)).collect::<Result<Vec<_>>>()?;
    let map = ber_curve(map_rates, &ps)?;
    if let Some(&bad) = map.iter().find(|&&v| !(v > 0.0)) {
        return Err(Error::Domain { what: "ground-state BER", value: bad });
    }
    let columns = mpm_rates.iter().map(|r| ber_curve(r, &ps)).collect::<Result<Vec<_>>>()?;
    let mpm: Vec<Vec<f64>> = (0..ps.len()).map(|n| columns.iter().map(|c| c[n]).collect()).collect();
    let ratio = mpm.iter().zip(&map).map(|(row, &m)| row.iter().map(|v| v / m).collect()).collect();
    Ok(BerSurface { t_decode: t_decode.to_vec(), t_nish: t_nish.to_vec(), mpm, map, ratio })
}

impl BerSurface {
    /// Index of the decoding temperature equal to `t_nish[n]`.
    pub fn diagonal(&self, n: usize) -> Result<usize> {
        let t = self.t_nish[n];
        self.t_decode
            .iter()
            .position(|&d| math::abs(d - t) <= 1e-9 * t.max(1.0))
            .ok_or(Error::MissingDiagonal(t))
    }

    /// Largest jump of the ratio between adjacent decoding temperatures.
    pub fn max_jump(&self) -> f64 {
        self.ratio
            .iter()
            .flat_map(|row| row.windows(2).map(|w| math::abs(w[1] - w[0])))
            .fold(0.0, f64::max)
    }

    /// Largest jump of the finite-temperature BER between adjacent decoding
    /// temperatures. Unlike [`BerSurface::max_jump`] it is not inflated by
    /// rows where the ground-state BER is tiny.
    pub fn max_ber_jump(&self) -> f64 {
        self.mpm
            .iter()
            .flat_map(|row| row.windows(2).map(|w| math::abs(w[1] - w[0])))
            .fold(0.0, f64::max)
    }

    /// Ratio along the diagonal `T_decode = T_Nish`.
    pub fn diagonal_ratios(&self) -> Result<Vec<f64>> {
        (0..self.t_nish.len()).map(|n| Ok(self.ratio[n][self.diagonal(n)?])).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    pub t_nish: f64,
    pub t_decode: f64,
    pub diagonal: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NishimoriReport {
    pub rows: usize,
    pub violations: Vec<Violation>,
}

/// Checks that each row is minimised (within [`NISHIMORI_TOLERANCE`]) on
/// its diagonal.
pub fn nishimori_check(surface: &BerSurface) -> Result<NishimoriReport> {
    let mut violations = Vec::new();
    for (n, row) in surface.mpm.iter().enumerate() {
        let d = surface.diagonal(n)?;
        for (k, &v) in row.iter().enumerate() {
            if row[d] > v + NISHIMORI_TOLERANCE {
                violations.push(Violation { t_nish: surface.t_nish[n], t_decode: surface.t_decode[k], diagonal: row[d], value: v });
            }
        }
    }
    Ok(NishimoriReport { rows: surface.mpm.len(), violations })
}

/// Minimiser of the MPM/MAP ratio over the Nishimori temperature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MinRatio {
    Point { t_nish: f64, ratio: f64 },
    /// The ratio is flat at its minimum over this whole interval.
    Interval { lo: f64, hi: f64, ratio: f64 },
}

/// Relative tolerance under which neighbouring ratios count as equal.
pub const FLAT_TOLERANCE: f64 = 1e-12;

/// Minimises `r_mpm(p(T)) / r_map(p(T))` over `t_grid` with golden-section
/// refinement around the best grid point.
pub fn min_ratio_temperature(mpm: &SectorRates, map: &SectorRates, t_grid: &[f64]) -> Result<MinRatio> {
    if t_grid.len() < 2 {
        return Err(Error::Empty("Nishimori grid"));
    }
    let ratio = |t: f64| -> Result<f64> {
        let p = channel::crossover_probability(t)?;
        Ok(mpm.ber(p)? / map.ber(p)?)
    };
    let values = t_grid.iter().map(|&t| ratio(t)).collect::<Result<Vec<_>>>()?;
    let (best, &v) = values.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).expect("nonempty");
    let flat = |x: f64| math::abs(x - v) <= FLAT_TOLERANCE * v.max(1.0);
    let mut lo = best;
    while lo > 0 && flat(values[lo - 1]) {
        lo -= 1;
    }
    let mut hi = best;
    while hi + 1 < values.len() && flat(values[hi + 1]) {
        hi += 1;
    }
    if hi > lo {
        return Ok(MinRatio::Interval { lo: t_grid[lo], hi: t_grid[hi], ratio: v });
    }
    let a = t_grid[best.saturating_sub(1)];
    let b = t_grid[(best + 1).min(t_grid.len() - 1)];
    let t = math::golden_section(|t| ratio(t).unwrap_or(f64::INFINITY), a, b, 1e-10 * (b - a).max(1e-300));
    let r = ratio(t)?;
    Ok(if r <= v { MinRatio::Point { t_nish: t, ratio: r } } else { MinRatio::Point { t_nish: t_grid[best], ratio: v } })
}

/// Lowest BER achievable at code rate `rate` over a binary symmetric channel
/// with crossover `p`: the `d` in `[0, 1/2]` with
/// `H2(d) = max(0, 1 - (1 - H2(p)) / rate)`.
pub fn shannon_reference(rate: f64, p: f64) -> Result<f64> {
    if !(rate > 0.0 && rate <= 1.0) {
        return Err(Error::Domain { what: "code rate", value: rate });
    }
    if !(0.0..0.5).contains(&p) {
        return Err(Error::Domain { what: "crossover probability", value: p });
    }
    let target = 1.0 - (1.0 - math::binary_entropy(p)) / rate;
    if target <= 0.0 {
        return Ok(0.0);
    }
    if target >= 1.0 {
        return Ok(0.5);
    }
    // Newton on the increasing, concave H2 with a bisection fallback
    let (mut lo, mut hi) = (0.0f64, 0.5f64);
    let mut d = 0.25;
    for _ in 0..200 {
        let f = math::binary_entropy(d) - target;
        if f > 0.0 {
            hi = d;
        } else {
            lo = d;
        }
        let slope = libm::log2((1.0 - d) / d);
        let mut next = d - f / slope;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if math::abs(next - d) < 1e-16 {
            return Ok(next);
        }
        d = next;
    }
    Ok(d)
}

/// Standard deviation of `r_tot(p)` over `resamples` bootstrap replicates
/// that resample the Hamiltonians of each sampled sector with replacement.
/// Exhaustive sectors carry no sampling error and are held fixed.
pub fn bootstrap_std(rates: &SectorRates, p_grid: &[f64], resamples: usize, seed: u64) -> Result<Vec<f64>> {
    if resamples < 100 {
        return Err(Error::Domain { what: "bootstrap resamples (at least 100)", value: resamples as f64 });
    }
    if let Some(s) = rates.sectors.iter().find(|s| !s.exhaustive && s.samples.is_empty()) {
        return Err(Error::MissingSector(s.sector));
    }
    let n = rates.n_elements;
    let weights = p_grid.iter().map(|&p| {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Domain { what: "crossover probability", value: p });
        }
        Ok(math::binomial_pmf(n, p))
    }).collect::<Result<Vec<_>>>()?;
    let mut curves = vec![Vec::with_capacity(resamples); p_grid.len()];
    for b in 0..resamples {
        let mut rng = stream(seed, BOOTSTRAP_STREAM, b as u32);
        let means: Vec<f64> = rates
            .sectors
            .iter()
            .map(|s| {
                if s.exhaustive {
                    s.mean
                } else {
                    let k = s.samples.len();
                    (0..k).map(|_| s.samples[rng.random_range(0..k)]).sum::<f64>() / k as f64
                }
            })
            .collect();
        for (curve, w) in curves.iter_mut().zip(&weights) {
            curve.push(w.iter().zip(&means).map(|(a, b)| a * b).sum());
        }
    }
    Ok(curves.iter().map(|c| math::std_dev(c)).collect())
}

/// Decoding data of one 4x4 Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodeRecord {
    /// `decoded[k][i]`: sign of `<s_i>` at grid temperature `k`.
    pub decoded: Vec<Vec<i8>>,
    /// Orientation found by the experiment (majority over all shots).
    pub experiment: Vec<i8>,
    /// Spins with at least one transition.
    pub included: Vec<bool>,
    /// Spins whose set-level outcomes are significant at 95%.
    pub significant: Vec<bool>,
}

/// Error-rate metrics of a 4x4 ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct FourByFourMetrics {
    pub temperatures: Vec<f64>,
    /// `P_err(T)` over all included spins.
    pub p_err_all: Vec<f64>,
    /// `P_err(T)` over included, significant spins.
    pub p_err_significant: Vec<f64>,
    /// `(T, min P_err)` of the two curves.
    pub same_t_all: (f64, f64),
    pub same_t_significant: (f64, f64),
    /// `(T, min_T P_err^H)` per Hamiltonian on the significant spins.
    pub per_hamiltonian: Vec<(f64, f64)>,
    pub diff_t_mean: f64,
    pub diff_t_median: f64,
}

fn p_err_rows(records: &[DecodeRecord], temperatures: usize, significant_only: bool) -> Result<Vec<Vec<f64>>> {
    let mut rows = Vec::new();
    for r in records {
        if r.decoded.len() != temperatures {
            return Err(Error::LengthMismatch { expected: temperatures, actual: r.decoded.len() });
        }
        let mask: Vec<bool> = r.included.iter().zip(&r.significant).map(|(&i, &s)| i && (s || !significant_only)).collect();
        if !mask.iter().any(|&m| m) {
            continue;
        }
        rows.push(
            r.decoded
                .iter()
                .map(|d| crate::transitions::p_err_hamiltonian(d, &r.experiment, &mask))
                .collect::<Result<Vec<_>>>()?,
        );
    }
    Ok(rows)
}

fn median(values: &[f64]) -> f64 {
    crate::transitions::quantile(values, 0.5)
}

/// `P_err(T)` curves, their minima and the per-Hamiltonian minima.
pub fn fourbyfour_metrics(temperatures: &[f64], records: &[DecodeRecord]) -> Result<FourByFourMetrics> {
    use crate::transitions::{min_over_grid, PErrTable};
    let all = PErrTable { temperatures: temperatures.to_vec(), per_hamiltonian: p_err_rows(records, temperatures.len(), false)? };
    let sig = PErrTable { temperatures: temperatures.to_vec(), per_hamiltonian: p_err_rows(records, temperatures.len(), true)? };
    if all.per_hamiltonian.is_empty() || sig.per_hamiltonian.is_empty() {
        return Err(Error::Empty("spins with transitions"));
    }
    let p_err_all = all.overall();
    let p_err_significant = sig.overall();
    let per_hamiltonian = sig.minima();
    let minima: Vec<f64> = per_hamiltonian.iter().map(|m| m.1).collect();
    Ok(FourByFourMetrics {
        temperatures: temperatures.to_vec(),
        same_t_all: min_over_grid(temperatures, &p_err_all),
        same_t_significant: min_over_grid(temperatures, &p_err_significant),
        p_err_all,
        p_err_significant,
        diff_t_mean: math::mean(&minima),
        diff_t_median: median(&minima),
        per_hamiltonian,
    })
}

/// Whether `k` of `n` set-level outcomes differ from a fair coin at `level`.
pub fn is_significant(k: usize, n: usize, level: f64) -> bool {
    math::binomial_test_half(k, n) < level
}
