//! Exhaustive thermodynamics for small instances.
//!
//! A configuration is encoded as an `n`-bit integer, bit `i` set when spin `i`
//! is `+1`. Energies are enumerated in Gray-code order so each state costs one
//! local-field evaluation. All thermal averages are taken in the log domain
//! with the ground energy subtracted before exponentiation.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::hamiltonian::{Decoded, Hamiltonian};
use crate::math;

/// Default cap on exhaustive enumeration.
pub const MAX_EXACT_SPINS: usize = 25;

/// Relative tolerance (in units of `alpha`) for degenerate ground states.
pub const GROUND_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    spins: usize,
    energies: Vec<f64>,
    ground_energy: f64,
    ground_set: Vec<u64>,
}

/// Energies of every configuration of `h`.
pub fn enumerate_spectrum(h: &Hamiltonian) -> Result<Spectrum> {
    enumerate_spectrum_with_cap(h, MAX_EXACT_SPINS)
}

pub fn enumerate_spectrum_with_cap(h: &Hamiltonian, cap: usize) -> Result<Spectrum> {
    let n = h.spin_count();
    if n > cap || n >= 63 {
        return Err(Error::TooManySpins { spins: n, cap });
    }
    let graph = h.graph();
    let alpha = h.alpha();
    let mut spins = vec![-1i8; n];
    let mut energy = h.energy_of(&spins);
    let mut energies = vec![0.0; 1usize << n];
    let mut code = 0usize;
    energies[0] = energy;
    for step in 1..(1usize << n) {
        let i = step.trailing_zeros() as usize;
        let mut local = h.fields()[i];
        for &(j, e) in graph.neighbors(i) {
            local += h.couplers()[e] * spins[j] as f64;
        }
        // flipping s_i changes E by 2 alpha s_i (h_i + sum_j J_ij s_j)
        energy += 2.0 * alpha * spins[i] as f64 * local;
        spins[i] = -spins[i];
        code ^= 1 << i;
        energies[code] = energy;
    }
    // re-evaluate exactly to remove accumulated rounding on non-nominal instances
    if !h.is_nominal() {
        for (c, e) in energies.iter_mut().enumerate() {
            for (i, s) in spins.iter_mut().enumerate() {
                *s = if c >> i & 1 == 1 { 1 } else { -1 };
            }
            *e = h.energy_of(&spins);
        }
    }

    let ground_energy = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let tol = GROUND_TOLERANCE * alpha;
    let ground_set = energies
        .iter()
        .enumerate()
        .filter(|(_, &e)| e - ground_energy <= tol)
        .map(|(c, _)| c as u64)
        .collect();
    Ok(Spectrum { spins: n, energies, ground_energy, ground_set })
}

fn check_temperature(t: f64) -> Result<()> {
    if t > 0.0 {
        Ok(())
    } else {
        Err(Error::NonPositiveTemperature(t))
    }
}

impl Spectrum {
    pub fn spin_count(&self) -> usize {
        self.spins
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn ground_energy(&self) -> f64 {
        self.ground_energy
    }

    pub fn ground_set(&self) -> &[u64] {
        &self.ground_set
    }

    /// Boltzmann weights relative to the ground state, `exp(-(E - E0) / T)`.
    fn relative_weights(&self, t: f64) -> impl Iterator<Item = f64> + '_ {
        let e0 = self.ground_energy;
        self.energies.iter().map(move |&e| math::exp(-(e - e0) / t))
    }

    pub fn log_partition(&self, t: f64) -> Result<f64> {
        check_temperature(t)?;
        let z: f64 = self.relative_weights(t).sum();
        Ok(math::ln(z) - self.ground_energy / t)
    }

    /// Normalised Boltzmann probabilities of every configuration.
    pub fn probabilities(&self, t: f64) -> Result<Vec<f64>> {
        check_temperature(t)?;
        let w: Vec<f64> = self.relative_weights(t).collect();
        let z: f64 = w.iter().sum();
        Ok(w.into_iter().map(|x| x / z).collect())
    }

    /// Thermal averages `<s_i>` at temperature `t`.
    pub fn magnetization(&self, t: f64) -> Result<Vec<f64>> {
        check_temperature(t)?;
        let n = self.spins;
        let mut up = vec![0.0; n];
        let mut z = 0.0;
        for (code, w) in self.relative_weights(t).enumerate() {
            z += w;
            let mut bits = code;
            while bits != 0 {
                let i = bits.trailing_zeros() as usize;
                up[i] += w;
                bits &= bits - 1;
            }
        }
        Ok(up.into_iter().map(|u| (2.0 * u - z) / z).collect())
    }

    /// Thermal magnetizations over a whole temperature grid.
    pub fn magnetization_curve(&self, temperatures: &[f64]) -> Result<Vec<Vec<f64>>> {
        temperatures.iter().map(|&t| self.magnetization(t)).collect()
    }

    /// Thermal correlations `<s_i s_j>` for arbitrary spin pairs.
    pub fn correlations(&self, t: f64, pairs: &[(usize, usize)]) -> Result<Vec<f64>> {
        check_temperature(t)?;
        for &(i, j) in pairs {
            if i >= self.spins || j >= self.spins {
                return Err(Error::SpinOutOfRange { spin: i.max(j), count: self.spins });
            }
        }
        let mut acc = vec![0.0; pairs.len()];
        let mut z = 0.0;
        for (code, w) in self.relative_weights(t).enumerate() {
            z += w;
            for (a, &(i, j)) in acc.iter_mut().zip(pairs) {
                // product is +1 when both bits agree
                if (code >> i ^ code >> j) & 1 == 0 {
                    *a += w;
                } else {
                    *a -= w;
                }
            }
        }
        Ok(acc.into_iter().map(|a| a / z).collect())
    }

    /// Sign of the thermal average of each spin; `0` when exactly balanced.
    pub fn mpm_decode(&self, t: f64) -> Result<Decoded> {
        Ok(Decoded(self.magnetization(t)?.into_iter().map(math::sign).collect()))
    }

    /// Sign of each spin summed over the degenerate ground states.
    pub fn map_decode(&self) -> Decoded {
        let mut sums = vec![0i64; self.spins];
        for &code in &self.ground_set {
            for (i, s) in sums.iter_mut().enumerate() {
                *s += if code >> i & 1 == 1 { 1 } else { -1 };
            }
        }
        Decoded(sums.into_iter().map(|s| s.signum() as i8).collect())
    }
}

/// Thermal averages `<s_i>` by exhaustive enumeration.
pub fn magnetization(h: &Hamiltonian, t: f64) -> Result<Vec<f64>> {
    check_temperature(t)?;
    enumerate_spectrum(h)?.magnetization(t)
}

/// Maximum-entropy (marginal posterior) decoding at temperature `t`.
pub fn mpm_decode(h: &Hamiltonian, t: f64) -> Result<Decoded> {
    check_temperature(t)?;
    enumerate_spectrum(h)?.mpm_decode(t)
}

/// Ground-state (maximum-likelihood) decoding.
pub fn map_decode(h: &Hamiltonian) -> Result<Decoded> {
    Ok(enumerate_spectrum(h)?.map_decode())
}
