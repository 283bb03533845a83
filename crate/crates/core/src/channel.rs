//! Binary symmetric channel acting on the transmitted fields and couplers.

use alloc::vec::Vec;

use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};
use crate::hamiltonian::Hamiltonian;
use crate::math;

/// Crossover probability of a binary symmetric channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelSpec {
    pub p: f64,
}

impl ChannelSpec {
    /// A channel usable for decoding experiments, `0 <= p < 1/2`.
    pub fn new(p: f64) -> Result<Self> {
        if !(0.0..0.5).contains(&p) {
            return Err(Error::Domain { what: "crossover probability", value: p });
        }
        Ok(Self { p })
    }

    pub fn from_nishimori(t: f64) -> Result<Self> {
        Self::new(crossover_probability(t)?)
    }
}

/// Flipped fields (spin positions) and couplers (edge indices).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CorruptionMask {
    pub fields: Vec<usize>,
    pub couplers: Vec<usize>,
}

impl CorruptionMask {
    /// `N_corr`, the number of corrupted elements.
    pub fn count(&self) -> usize {
        self.fields.len() + self.couplers.len()
    }

    /// Builds a mask from element indices, fields first then couplers.
    pub fn from_elements(elements: &[usize], n_fields: usize) -> Self {
        let mut mask = Self::default();
        for &e in elements {
            if e < n_fields {
                mask.fields.push(e);
            } else {
                mask.couplers.push(e - n_fields);
            }
        }
        mask.fields.sort_unstable();
        mask.couplers.sort_unstable();
        mask
    }

    /// Negates the masked entries of `h`.
    pub fn apply(&self, h: &Hamiltonian) -> Result<Hamiltonian> {
        let mut fields = h.fields().to_vec();
        let mut couplers = h.couplers().to_vec();
        for &i in &self.fields {
            let n = fields.len();
            *fields.get_mut(i).ok_or(Error::SpinOutOfRange { spin: i, count: n })? *= -1.0;
        }
        for &e in &self.couplers {
            let m = couplers.len();
            *couplers.get_mut(e).ok_or(Error::LengthMismatch { expected: m, actual: e + 1 })? *= -1.0;
        }
        h.with_values(fields, couplers)
    }
}

/// `T_Nish = 2 / ln((1 - p) / p)` for `0 < p < 1/2`.
pub fn nishimori_temperature(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 0.5) {
        return Err(Error::Domain { what: "crossover probability", value: p });
    }
    Ok(2.0 / math::ln((1.0 - p) / p))
}

/// Inverse of [`nishimori_temperature`]: `p = 1 / (1 + e^{2/T})`.
pub fn crossover_probability(t: f64) -> Result<f64> {
    if !(t > 0.0) || t.is_nan() {
        return Err(Error::NonPositiveTemperature(t));
    }
    Ok(1.0 / (1.0 + math::exp(2.0 / t)))
}

fn check_nominal(h: &Hamiltonian) -> Result<()> {
    if h.is_nominal() {
        Ok(())
    } else {
        Err(Error::NotNominal)
    }
}

/// Flips every field and coupler independently with probability `p`.
pub fn corrupt<R: Rng + ?Sized>(clean: &Hamiltonian, p: f64, rng: &mut R) -> Result<(Hamiltonian, CorruptionMask)> {
    check_nominal(clean)?;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain { what: "flip probability", value: p });
    }
    let mut mask = CorruptionMask::default();
    for i in 0..clean.spin_count() {
        if rng.random::<f64>() < p {
            mask.fields.push(i);
        }
    }
    for e in 0..clean.couplers().len() {
        if rng.random::<f64>() < p {
            mask.couplers.push(e);
        }
    }
    Ok((mask.apply(clean)?, mask))
}

/// Flips exactly `s` elements chosen uniformly among all `C(N+M, s)` subsets.
pub fn sample_sector<R: Rng + ?Sized>(clean: &Hamiltonian, s: usize, rng: &mut R) -> Result<(Hamiltonian, CorruptionMask)> {
    check_nominal(clean)?;
    let n = clean.element_count();
    if s > n {
        return Err(Error::SectorOutOfRange { sector: s, max: n });
    }
    let chosen = index::sample(rng, n, s).into_vec();
    let mask = CorruptionMask::from_elements(&chosen, clean.spin_count());
    Ok((mask.apply(clean)?, mask))
}

/// Probability that a channel with crossover `p` corrupts exactly `s` of
/// `n_elements`: `C(n, s) p^s (1-p)^(n-s)`.
pub fn sector_weight(s: usize, p: f64, n_elements: usize) -> Result<f64> {
    if s > n_elements {
        return Err(Error::SectorOutOfRange { sector: s, max: n_elements });
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain { what: "crossover probability", value: p });
    }
    let rest = (n_elements - s) as f64;
    Ok(math::binomial(n_elements, s) * libm::pow(p, s as f64) * libm::pow(1.0 - p, rest))
}

/// Lexicographic enumeration of all `s`-subsets of `0..n`.
pub struct Combinations {
    n: usize,
    current: Option<Vec<usize>>,
}

impl Combinations {
    pub fn new(n: usize, s: usize) -> Self {
        let current = if s <= n { Some((0..s).collect()) } else { None };
        Self { n, current }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.clone()?;
        let c = self.current.as_mut().expect("checked");
        let s = c.len();
        let mut i = s;
        loop {
            if i == 0 {
                self.current = None;
                break;
            }
            i -= 1;
            if c[i] < self.n - s + i {
                c[i] += 1;
                for j in i + 1..s {
                    c[j] = c[j - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chimera::ChimeraGraph;
    use crate::rng::stream;
    use alloc::sync::Arc;

    fn clean() -> Hamiltonian {
        Hamiltonian::ferromagnet(Arc::new(ChimeraGraph::unit_cell()), 1.0).unwrap()
    }

    #[test]
    fn nishimori_values() {
        let e = core::f64::consts::E;
        assert!((nishimori_temperature(1.0 / (1.0 + e * e)).unwrap() - 1.0).abs() < 1e-12);
        assert!((nishimori_temperature(1.0 / (1.0 + e)).unwrap() - 2.0).abs() < 1e-12);
        assert!(nishimori_temperature(0.5).is_err());
        assert!(nishimori_temperature(0.0).is_err());
        assert!(crossover_probability(0.0).is_err());
    }

    #[test]
    fn nishimori_round_trip_and_monotone() {
        let mut last = 0.0;
        for k in 1..=49 {
            let p = k as f64 / 100.0;
            let t = nishimori_temperature(p).unwrap();
            assert!(t > last);
            last = t;
            assert!((crossover_probability(t).unwrap() - p).abs() < 1e-12);
        }
    }

    #[test]
    fn corrupt_extremes() {
        let h = clean();
        let (same, mask) = corrupt(&h, 0.0, &mut stream(1, 0, 0)).unwrap();
        assert_eq!(same, h);
        assert_eq!(mask.count(), 0);
        let (neg, mask) = corrupt(&h, 1.0, &mut stream(1, 0, 0)).unwrap();
        assert_eq!(mask.count(), 24);
        assert!(neg.fields().iter().chain(neg.couplers()).all(|&v| v == -1.0));
    }

    #[test]
    fn corrupt_is_xor_with_mask() {
        let h = clean();
        for seed in 0..20 {
            let (bad, mask) = corrupt(&h, 0.3, &mut stream(seed, 0, 0)).unwrap();
            for i in 0..8 {
                assert_eq!(bad.fields()[i] == -1.0, mask.fields.contains(&i));
            }
            for e in 0..16 {
                assert_eq!(bad.couplers()[e] == -1.0, mask.couplers.contains(&e));
            }
        }
    }

    #[test]
    fn corrupt_flip_fraction() {
        let h = Hamiltonian::ferromagnet(Arc::new(ChimeraGraph::new(8, &[]).unwrap()), 1.0).unwrap();
        let mut rng = stream(11, 0, 0);
        let mut flipped = 0usize;
        let mut total = 0usize;
        while total < 100_000 {
            let (_, mask) = corrupt(&h, 0.2, &mut rng).unwrap();
            flipped += mask.count();
            total += h.element_count();
        }
        let frac = flipped as f64 / total as f64;
        assert!((frac - 0.2).abs() < 0.004, "{frac}");
    }

    #[test]
    fn sector_extremes_and_errors() {
        let h = clean();
        let (same, _) = sample_sector(&h, 0, &mut stream(1, 0, 0)).unwrap();
        assert_eq!(same, h);
        let (neg, mask) = sample_sector(&h, 24, &mut stream(1, 0, 0)).unwrap();
        assert_eq!(mask.count(), 24);
        assert!(neg.fields().iter().chain(neg.couplers()).all(|&v| v == -1.0));
        assert!(sample_sector(&h, 25, &mut stream(1, 0, 0)).is_err());
        let off = h.with_values(alloc::vec![0.9; 8], alloc::vec![1.0; 16]).unwrap();
        assert_eq!(sample_sector(&off, 1, &mut stream(1, 0, 0)).unwrap_err(), Error::NotNominal);
    }

    #[test]
    fn sector_one_is_uniform() {
        let h = clean();
        let mut counts = [0usize; 24];
        let draws = 48_000;
        for r in 0..draws {
            let (_, mask) = sample_sector(&h, 1, &mut stream(5, 1, r)).unwrap();
            let e = mask.fields.first().copied().unwrap_or_else(|| 8 + mask.couplers[0]);
            counts[e] += 1;
        }
        let expected = draws as f64 / 24.0;
        let sd = (expected * (1.0 - 1.0 / 24.0)).sqrt();
        for c in counts {
            assert!((c as f64 - expected).abs() < 4.0 * sd, "{c} vs {expected}");
        }
    }

    #[test]
    fn sector_weights() {
        assert!((sector_weight(0, 0.1, 24).unwrap() - 0.9f64.powi(24)).abs() < 1e-15);
        let total: f64 = (0..=24).map(|s| sector_weight(s, 0.3, 24).unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-12);
        // C(24,12) / 2^24, exact rational 2704156 / 16777216
        assert!((sector_weight(12, 0.5, 24).unwrap() - 2_704_156.0 / 16_777_216.0).abs() < 1e-15);
        assert!(sector_weight(25, 0.3, 24).is_err());
        assert!(sector_weight(1, 1.5, 24).is_err());
    }

    #[test]
    fn combinations_count() {
        assert_eq!(Combinations::new(6, 3).count(), 20);
        assert_eq!(Combinations::new(4, 0).count(), 1);
        assert_eq!(Combinations::new(3, 4).count(), 0);
        let all: Vec<_> = Combinations::new(4, 2).collect();
        assert_eq!(all[0], alloc::vec![0, 1]);
        assert_eq!(all[5], alloc::vec![2, 3]);
    }
}
