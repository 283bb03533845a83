#![allow(dead_code)]

use std::sync::Arc;

use maxent_core::{ChimeraGraph, Hamiltonian, SpinConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn cell() -> Arc<ChimeraGraph> {
    Arc::new(ChimeraGraph::unit_cell())
}

pub fn random_nominal(graph: Arc<ChimeraGraph>, alpha: f64, seed: u64) -> Hamiltonian {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pm = || if rng.random::<bool>() { 1.0 } else { -1.0 };
    let fields = (0..graph.spin_count()).map(|_| pm()).collect();
    let couplers = (0..graph.edge_count()).map(|_| pm()).collect();
    Hamiltonian::new(graph, fields, couplers, alpha).unwrap()
}

/// Energies of every configuration, computed straight from the label edges.
fn all_energies(h: &Hamiltonian) -> Vec<f64> {
    let n = h.spin_count();
    (0..1u64 << n)
        .map(|code| {
            let s = SpinConfig::from_code(code, n);
            let s = s.spins();
            let mut e = 0.0;
            for (i, &hi) in h.fields().iter().enumerate() {
                e -= hi * s[i] as f64;
            }
            for (k, &(i, j)) in h.graph().edges().iter().enumerate() {
                e -= h.couplers()[k] * (s[i] * s[j]) as f64;
            }
            h.alpha() * e
        })
        .collect()
}

/// Kahan-compensated Boltzmann averages `<f(s)>` by full enumeration.
pub fn brute_average<F: Fn(&[i8]) -> f64>(h: &Hamiltonian, t: f64, f: F) -> f64 {
    let energies = all_energies(h);
    let e0 = energies.iter().cloned().fold(f64::INFINITY, f64::min);
    let n = h.spin_count();
    let (mut z, mut cz) = (0.0f64, 0.0f64);
    let (mut num, mut cn) = (0.0f64, 0.0f64);
    for (code, e) in energies.iter().enumerate() {
        let w = (-(e - e0) / t).exp();
        let s = SpinConfig::from_code(code as u64, n);
        let y = w - cz;
        let tz = z + y;
        cz = (tz - z) - y;
        z = tz;
        let y = w * f(s.spins()) - cn;
        let tn = num + y;
        cn = (tn - num) - y;
        num = tn;
    }
    num / z
}

/// All magnetizations in one Kahan-compensated pass.
pub fn brute_magnetization(h: &Hamiltonian, t: f64) -> Vec<f64> {
    let energies = all_energies(h);
    let e0 = energies.iter().cloned().fold(f64::INFINITY, f64::min);
    let n = h.spin_count();
    let mut z = (0.0f64, 0.0f64);
    let mut acc = vec![(0.0f64, 0.0f64); n];
    let add = |(sum, c): &mut (f64, f64), x: f64| {
        let y = x - *c;
        let t = *sum + y;
        *c = (t - *sum) - y;
        *sum = t;
    };
    for (code, e) in energies.iter().enumerate() {
        let w = (-(e - e0) / t).exp();
        add(&mut z, w);
        for (i, a) in acc.iter_mut().enumerate() {
            add(a, if code >> i & 1 == 1 { w } else { -w });
        }
    }
    acc.iter().map(|a| a.0 / z.0).collect()
}

pub fn brute_log_partition(h: &Hamiltonian, t: f64) -> f64 {
    let energies = all_energies(h);
    let e0 = energies.iter().cloned().fold(f64::INFINITY, f64::min);
    let z: f64 = energies.iter().map(|e| (-(e - e0) / t).exp()).sum();
    z.ln() - e0 / t
}
