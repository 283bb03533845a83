mod common;

use std::sync::Arc;

use maxent_core::bte::bte_magnetizations;
use maxent_core::chimera::build_chimera;
use maxent_core::exact::{enumerate_spectrum, magnetization};
use maxent_core::sa::{
    acceptance_probability, anneal, binomial_band, inject_control_error, sa_orientation_sweep, Metropolis, VisitOrder,
};
use maxent_core::{AnnealSchedule, ChimeraGraph, ControlErrorSpec, Hamiltonian, SpinConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn same_seed_same_anneal() {
    let h = common::random_nominal(common::cell(), 1.0, 1);
    let schedule = AnnealSchedule::new(10.0, 1.405, 5000).unwrap();
    let a = anneal(&h, &schedule, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
    let b = anneal(&h, &schedule, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn schedule_validation() {
    assert!(AnnealSchedule::new(1.0, 2.0, 100).is_err());
    assert!(AnnealSchedule::new(10.0, 0.0, 100).is_err());
    let h = Hamiltonian::ferromagnet(common::cell(), 1.0).unwrap();
    let short = AnnealSchedule::new(10.0, 1.0, 4).unwrap();
    assert!(anneal(&h, &short, &mut ChaCha8Rng::seed_from_u64(0)).is_err());
    let s = AnnealSchedule::new(10.0, 1.405, 10_001).unwrap();
    assert_eq!(s.temperature_at(0), 10.0);
    assert!((s.temperature_at(10_000) - 1.405).abs() < 1e-12);
}

#[test]
fn downhill_moves_are_always_accepted() {
    for t in [1e-3, 1.0, 1e3] {
        assert_eq!(acceptance_probability(-2.0, t), 1.0);
        assert_eq!(acceptance_probability(0.0, t), 1.0);
    }
    let h = Hamiltonian::ferromagnet(common::cell(), 1.0).unwrap();
    let mut start = vec![1i8; 8];
    start[0] = -1;
    let mut chain = Metropolis::new(&h, SpinConfig::new(start).unwrap()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    assert!(chain.flip_cost(0) < 0.0);
    assert!(chain.attempt(0, 1e-6, &mut rng));
    assert!(chain.spins().iter().all(|&s| s == 1));
}

#[test]
fn lone_spin_freezes_along_its_field() {
    let g = Arc::new(ChimeraGraph::new(1, &[1, 2, 3, 4, 5, 6, 7]).unwrap());
    let h = Hamiltonian::new(g, vec![1.0], vec![], 1.0).unwrap();
    let schedule = AnnealSchedule::new(10.0, 0.01, 10_000).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let runs = 2000;
    let up = (0..runs).filter(|_| anneal(&h, &schedule, &mut rng).unwrap().spins()[0] == 1).count();
    assert!(up as f64 / runs as f64 > 0.999, "{up}/{runs}");
}

#[test]
fn fixed_temperature_chain_satisfies_detailed_balance() {
    // K_{2,2}: labels 0, 1 on side 0 and 4, 5 on side 1
    let g = Arc::new(ChimeraGraph::new(1, &[2, 3, 6, 7]).unwrap());
    assert_eq!((g.spin_count(), g.edge_count()), (4, 4));
    let h = Hamiltonian::new(g, vec![0.5, -0.3, 0.2, 0.0], vec![1.0, -1.0, 0.7, -0.4], 1.0).unwrap();
    let t = 1.5;
    let probs = enumerate_spectrum(&h).unwrap().probabilities(t).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut chain = Metropolis::hot_start(&h, &mut rng).unwrap();
    for _ in 0..10_000 {
        chain.step(t, VisitOrder::Sequential, &mut rng);
    }
    let samples = 1_000_000;
    let mut counts = [0usize; 16];
    for _ in 0..samples {
        // two sweeps between samples
        for _ in 0..8 {
            chain.step(t, VisitOrder::Sequential, &mut rng);
        }
        counts[chain.config().code() as usize] += 1;
    }
    let chi2: f64 = counts
        .iter()
        .zip(&probs)
        .map(|(&c, &p)| {
            let e = p * samples as f64;
            (c as f64 - e).powi(2) / e
        })
        .sum();
    // 15 degrees of freedom, 99% quantile
    assert!(chi2 < 30.578, "chi2 {chi2}");
}

#[test]
fn control_error_statistics() {
    let g = Arc::new(build_chimera(8, &[]).unwrap());
    let h = Hamiltonian::ferromagnet(g, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let spec = ControlErrorSpec::new(0.05, 0.03).unwrap();
    let mut deltas = Vec::new();
    while deltas.len() < 100_000 {
        let noisy = inject_control_error(&h, &spec, &mut rng).unwrap();
        deltas.extend(noisy.fields().iter().map(|v| v - 1.0));
    }
    let std = maxent_core::math::std_dev(&deltas);
    assert!((std - 0.05).abs() < 0.001, "std {std}");
    let same = inject_control_error(&h, &ControlErrorSpec::new(0.0, 0.0).unwrap(), &mut rng).unwrap();
    assert_eq!(same, h);
    assert!(ControlErrorSpec::new(-0.1, 0.0).is_err());
}

#[test]
fn control_error_energy_bound() {
    let spec = ControlErrorSpec::default();
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for (seed, alpha) in [(0, 1.0), (1, 0.15), (2, 0.05)] {
        let h = common::random_nominal(Arc::new(build_chimera(2, &[]).unwrap()), alpha, seed);
        let (n, m) = (h.spin_count() as f64, h.couplers().len() as f64);
        // errors are absolute in J, so the bound does not shrink with alpha
        let bound = n * 3.0 * spec.sigma_h + m * 3.0 * spec.sigma_j;
        for k in 0..50 {
            let noisy = inject_control_error(&h, &spec, &mut rng).unwrap();
            let s = SpinConfig::from_code(k * 7919, h.spin_count());
            let d = (noisy.energy(&s).unwrap() - h.energy(&s).unwrap()).abs();
            assert!(d <= bound);
        }
    }
}

#[test]
fn single_cell_anneal_reaches_equilibrium() {
    let h = common::random_nominal(common::cell(), 1.0, 40);
    let schedule = AnnealSchedule::new(10.0, 1.405, 1_000_000).unwrap();
    let runs = 1000;
    let sweep = sa_orientation_sweep(&h, &schedule, &[1.405], runs, 5).unwrap();
    let exact = magnetization(&h, 1.405).unwrap();
    for i in 0..8 {
        let band = binomial_band(exact[i], runs, 4.0);
        assert!((sweep.magnetization[0][i] - exact[i]).abs() <= band, "spin {i}");
    }
}

#[test]
fn hot_checkpoint_is_unoriented() {
    let h = common::random_nominal(common::cell(), 1.0, 41);
    let schedule = AnnealSchedule::new(1e6, 1.0, 1000).unwrap();
    let runs = 4000;
    let sweep = sa_orientation_sweep(&h, &schedule, &[1e6], runs, 6).unwrap();
    for &m in &sweep.magnetization[0] {
        assert!(m.abs() <= binomial_band(0.0, runs, 4.0), "{m}");
    }
}

#[test]
fn deviation_shrinks_with_budget() {
    let t_end = 1.405;
    let runs = 100;
    let instances: Vec<Hamiltonian> =
        (0..2).map(|k| common::random_nominal(Arc::new(build_chimera(4, &[]).unwrap()), 1.0, 500 + k)).collect();
    let references: Vec<Vec<f64>> = instances.iter().map(|h| bte_magnetizations(h, t_end).unwrap()).collect();
    let mut previous = f64::INFINITY;
    for budget in [1_000u64, 10_000, 100_000, 1_000_000] {
        let schedule = AnnealSchedule::new(10.0, t_end, budget).unwrap();
        let mut total = 0.0;
        let mut count = 0;
        for (k, (h, reference)) in instances.iter().zip(&references).enumerate() {
            let sweep = sa_orientation_sweep(h, &schedule, &[t_end], runs, 70 + k as u64).unwrap();
            for (a, b) in sweep.magnetization[0].iter().zip(reference) {
                total += (a - b).abs();
                count += 1;
            }
        }
        let mean = total / count as f64;
        println!("budget {budget}: mean |SA - exact| {mean:.4}");
        assert!(mean <= previous, "budget {budget}: {mean} > {previous}");
        previous = mean;
    }
}
