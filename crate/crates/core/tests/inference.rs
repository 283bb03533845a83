mod common;

use std::sync::Arc;

use maxent_core::bte::{bte_magnetizations, elimination_order};
use maxent_core::chimera::build_chimera;
use maxent_core::exact::{enumerate_spectrum, magnetization};
use maxent_core::symmetry::{canonical_classes, cell_from_word};
use maxent_core::{BucketTree, EliminationOrder, Error, Hamiltonian, Spectrum};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn bte_for(h: &Hamiltonian) -> BucketTree {
    BucketTree::new(h.graph(), EliminationOrder::column_major(h.graph())).unwrap()
}

#[test]
fn exact_matches_compensated_enumeration() {
    let truncated = Arc::new(build_chimera(1, &[3, 7]).unwrap());
    for seed in 0..20 {
        for graph in [common::cell(), truncated.clone()] {
            let h = common::random_nominal(graph, 0.2 + 0.04 * seed as f64, seed);
            for t in [0.05, 0.3, 1.0, 4.0] {
                let m = magnetization(&h, t).unwrap();
                let reference = common::brute_magnetization(&h, t);
                for (a, b) in m.iter().zip(&reference) {
                    assert!((a - b).abs() < 1e-12, "seed {seed} T {t}: {a} vs {b}");
                    if b.abs() > 1e-9 {
                        assert_eq!(a.signum(), b.signum());
                    }
                }
            }
        }
    }
}

#[test]
fn exact_is_finite_over_the_temperature_range() {
    for seed in 0..10 {
        for alpha in [0.05, 0.15, 1.0] {
            let h = common::random_nominal(common::cell(), alpha, seed);
            let spectrum = enumerate_spectrum(&h).unwrap();
            for t in [1e-3, 1e-2, 0.1, 1.0, 10.0, 1e3, 1e7] {
                let m = spectrum.magnetization(t).unwrap();
                assert!(m.iter().all(|v| v.is_finite() && v.abs() <= 1.0));
                let p = spectrum.probabilities(t).unwrap();
                assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn exact_rejects_oversized_graphs() {
    let h = Hamiltonian::ferromagnet(Arc::new(build_chimera(2, &[]).unwrap()), 1.0).unwrap();
    let err = enumerate_spectrum(&h).unwrap_err();
    assert!(err.is_capacity());
    assert!(magnetization(&h, 1.0).is_err());
    let cell = Hamiltonian::ferromagnet(common::cell(), 1.0).unwrap();
    assert!(matches!(magnetization(&cell, 0.0), Err(Error::NonPositiveTemperature(_))));
}

#[test]
fn map_is_the_zero_temperature_limit_on_every_class() {
    for class in canonical_classes() {
        let h = cell_from_word(common::cell(), class.word, 1.0).unwrap();
        let s = enumerate_spectrum(&h).unwrap();
        let map = s.map_decode();
        assert_eq!(s.mpm_decode(1e-3).unwrap(), map, "class {:04x}", class.word);
        // inside the ground-state plateau the decided spins keep their MAP sign
        let mpm = s.mpm_decode(0.3).unwrap();
        for (a, b) in mpm.values().iter().zip(map.values()) {
            if *b != 0 {
                assert_eq!(a, b, "class {:04x}", class.word);
            }
        }
    }
}

#[test]
fn correlations_match_enumeration() {
    let h = common::random_nominal(common::cell(), 1.0, 3);
    let s = enumerate_spectrum(&h).unwrap();
    let pairs = [(0, 4), (0, 1), (2, 7)];
    let c = s.correlations(0.7, &pairs).unwrap();
    for (k, &(i, j)) in pairs.iter().enumerate() {
        let r = common::brute_average(&h, 0.7, |x| (x[i] * x[j]) as f64);
        assert!((c[k] - r).abs() < 1e-12);
    }
}

#[test]
fn bte_agrees_with_exact_on_cells() {
    for seed in 0..20 {
        let h = common::random_nominal(common::cell(), 1.0, 100 + seed);
        let tree = bte_for(&h);
        let spectrum: Spectrum = enumerate_spectrum(&h).unwrap();
        for t in [0.02, 0.5, 1.0, 7.0] {
            let m = tree.marginals(&h, t).unwrap();
            let e = spectrum.magnetization(t).unwrap();
            for (a, b) in m.magnetization.iter().zip(&e) {
                assert!((a - b).abs() < 1e-9);
            }
            let c = spectrum.correlations(t, h.graph().edges()).unwrap();
            for (a, b) in m.edge_correlation.iter().zip(&c) {
                assert!((a - b).abs() < 1e-9);
            }
            assert!((m.log_partition - spectrum.log_partition(t).unwrap()).abs() < 1e-9 * m.log_partition.abs().max(1.0));
        }
    }
}

#[test]
fn bte_width_bound_and_cap() {
    for l in 1..=4 {
        let g = build_chimera(l, &[]).unwrap();
        assert!(elimination_order(&g).induced_width() <= 4 * l + 4);
    }
    let g = build_chimera(4, &[]).unwrap();
    let err = BucketTree::with_cap(&g, EliminationOrder::column_major(&g), 10).unwrap_err();
    assert!(matches!(err, Error::TableTooLarge { .. }));
}

#[test]
fn four_by_four_ferromagnet_is_positive() {
    let g = Arc::new(build_chimera(4, &[]).unwrap());
    let h = Hamiltonian::ferromagnet(g, 1.0).unwrap();
    let tree = bte_for(&h);
    for t in [0.01, 0.5, 2.0, 7.0] {
        let m = tree.magnetizations(&h, t).unwrap();
        assert!(m.iter().all(|&v| v > 0.0 && v.is_finite()), "T {t}");
    }
}

#[test]
fn four_by_four_gauge_covariance() {
    let g = Arc::new(build_chimera(4, &[7, 60]).unwrap());
    let h = common::random_nominal(g, 0.15, 9);
    let flip: Vec<usize> = (0..h.spin_count()).filter(|i| i % 3 == 0).collect();
    let h2 = h.gauge_transform(&flip).unwrap();
    let tree = bte_for(&h);
    for t in [0.01, 0.3] {
        let a = tree.magnetizations(&h, t).unwrap();
        let b = tree.magnetizations(&h2, t).unwrap();
        for i in 0..a.len() {
            let sign = if flip.contains(&i) { -1.0 } else { 1.0 };
            assert!((a[i] - sign * b[i]).abs() < 1e-10);
        }
    }
}

#[test]
fn samples_follow_the_marginals() {
    let h = common::random_nominal(common::cell(), 1.0, 21);
    let tree = bte_for(&h);
    let n = 100_000;
    for t in [1.0, 1e6] {
        let m = tree.marginals(&h, t).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let draws = tree.sample(&h, t, n, &mut rng).unwrap();
        for i in 0..8 {
            let mean = draws.iter().map(|s| s.spins()[i] as f64).sum::<f64>() / n as f64;
            let sigma = ((1.0 - m.magnetization[i].powi(2)) / n as f64).sqrt().max(1e-12);
            assert!((mean - m.magnetization[i]).abs() < 4.0 * sigma, "T {t} spin {i}");
        }
        for (e, &(i, j)) in h.graph().edges().iter().enumerate() {
            let mean = draws.iter().map(|s| (s.spins()[i] * s.spins()[j]) as f64).sum::<f64>() / n as f64;
            let c = m.edge_correlation[e];
            let sigma = ((1.0 - c * c) / n as f64).sqrt().max(1e-12);
            assert!((mean - c).abs() < 4.0 * sigma, "T {t} edge {e}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn bte_agrees_with_enumeration_on_subgraphs(
        seed in any::<u64>(),
        dropped in proptest::collection::btree_set(0usize..32, 12..20),
        t in 0.05f64..5.0,
    ) {
        let excluded: Vec<usize> = dropped.into_iter().collect();
        let g = Arc::new(build_chimera(2, &excluded).unwrap());
        let h = common::random_nominal(g, 1.0, seed);
        let m = bte_magnetizations(&h, t).unwrap();
        let reference = common::brute_magnetization(&h, t);
        for (a, b) in m.iter().zip(&reference) {
            prop_assert!((a - b).abs() < 1e-9);
        }
        let lz = bte_for(&h).log_partition(&h, t).unwrap();
        let rz = common::brute_log_partition(&h, t);
        prop_assert!((lz - rz).abs() < 1e-9 * rz.abs().max(1.0));
    }

    #[test]
    fn magnetization_is_gauge_covariant(word in any::<u16>(), flips in proptest::collection::btree_set(0usize..8, 0..8), t in 0.01f64..10.0) {
        let h = cell_from_word(common::cell(), word, 0.5).unwrap();
        let flips: Vec<usize> = flips.into_iter().collect();
        let a = magnetization(&h, t).unwrap();
        let b = magnetization(&h.gauge_transform(&flips).unwrap(), t).unwrap();
        for i in 0..8 {
            let sign = if flips.contains(&i) { -1.0 } else { 1.0 };
            prop_assert!((a[i] - sign * b[i]).abs() < 1e-12);
        }
    }
}
