mod common;

use std::sync::Arc;

use maxent_core::chimera::build_chimera;
use maxent_core::symmetry::{
    canonical_classes, canonicalize_cell, cell_from_word, orbit_size_histogram, permute_cell, unit_cell_automorphisms,
};
use maxent_core::{ChimeraGraph, Error, Hamiltonian, SpinConfig};
use proptest::prelude::*;

#[test]
fn counts_follow_the_closed_form() {
    for l in 1..=8 {
        let g = build_chimera(l, &[]).unwrap();
        assert_eq!(g.spin_count(), 8 * l * l);
        assert_eq!(g.edge_count(), 16 * l * l + 8 * l * (l - 1));
    }
    let g = build_chimera(2, &[]).unwrap();
    assert_eq!((g.spin_count(), g.edge_count()), (32, 80));
}

#[test]
fn four_by_four_with_exclusions() {
    let g = build_chimera(4, &[5, 40, 127]).unwrap();
    assert_eq!(g.spin_count(), 125);
    for &(a, b) in g.label_edges() {
        assert!(![5, 40, 127].contains(&a) && ![5, 40, 127].contains(&b));
    }
    assert!(matches!(build_chimera(4, &[128]), Err(Error::LabelOutOfRange { .. })));
    assert!(matches!(build_chimera(0, &[]), Err(Error::EmptyChimera)));
}

#[test]
fn edges_are_canonical_and_unique() {
    let g = build_chimera(3, &[1, 17]).unwrap();
    let mut seen = std::collections::BTreeSet::new();
    for &(i, j) in g.edges() {
        assert!(i < j);
        assert!(seen.insert((i, j)));
        assert_eq!(g.edge_index(i, j), g.edge_index(j, i));
    }
}

#[test]
fn energy_examples() {
    let g = Arc::new(ChimeraGraph::unit_cell());
    let ferro = Hamiltonian::ferromagnet(g.clone(), 1.0).unwrap();
    assert_eq!(ferro.energy(&SpinConfig::all_up(8)).unwrap(), -24.0);
    let down = SpinConfig::new(vec![-1; 8]).unwrap();
    assert_eq!(ferro.energy(&down).unwrap(), -8.0);
    let scaled = ferro.with_alpha(0.15).unwrap();
    assert!((scaled.energy(&SpinConfig::all_up(8)).unwrap() + 3.6).abs() < 1e-12);
}

#[test]
fn automorphisms_preserve_edges() {
    let autos = unit_cell_automorphisms();
    assert_eq!(autos.len(), 1152);
    for p in &autos {
        assert!(p.edge_map().is_some());
        assert_eq!(p.compose(&p.inverse()), maxent_core::symmetry::Permutation::IDENTITY);
    }
}

#[test]
fn class_census() {
    let classes = canonical_classes();
    assert_eq!(classes.len(), 192);
    assert_eq!(classes.iter().map(|c| c.orbit_size).sum::<usize>(), 1 << 16);
    let hist = orbit_size_histogram(&classes);
    assert_eq!(hist.values().sum::<usize>(), 192);
    for &size in hist.keys() {
        assert_eq!(1152 % size, 0, "orbit size {size} does not divide the group order");
    }
}

fn cell_strategy() -> impl Strategy<Value = (u8, u16)> {
    (any::<u8>(), any::<u16>())
}

fn cell_from_bits(fields: u8, couplers: u16) -> Hamiltonian {
    let g = Arc::new(ChimeraGraph::unit_cell());
    let f = (0..8).map(|i| if fields >> i & 1 == 1 { -1.0 } else { 1.0 }).collect();
    let c = (0..16).map(|e| if couplers >> e & 1 == 1 { -1.0 } else { 1.0 }).collect();
    Hamiltonian::new(g, f, c, 1.0).unwrap()
}

proptest! {
    #[test]
    fn gauge_preserves_energy(seed in any::<u64>(), flips in proptest::collection::vec(0usize..32, 0..32), code in any::<u32>()) {
        let g = Arc::new(build_chimera(2, &[]).unwrap());
        let h = common::random_nominal(g, 0.3, seed);
        let s = SpinConfig::from_code(code as u64, 32);
        let mut uniq = flips.clone();
        uniq.sort_unstable();
        uniq.dedup();
        let h2 = h.gauge_transform(&uniq).unwrap();
        let s2 = s.flipped(&uniq);
        prop_assert!((h.energy(&s).unwrap() - h2.energy(&s2).unwrap()).abs() < 1e-12);
        prop_assert_eq!(h2.gauge_transform(&uniq).unwrap(), h);
    }

    #[test]
    fn canonicalization_is_idempotent_and_invariant((fields, couplers) in cell_strategy(), pick in 0usize..1152, flips in proptest::collection::btree_set(0usize..8, 0..8)) {
        let h = cell_from_bits(fields, couplers);
        let c = canonicalize_cell(&h).unwrap();
        let canonical = cell_from_word(h.shared_graph().clone(), c.word, 1.0).unwrap();
        prop_assert_eq!(canonicalize_cell(&canonical).unwrap().word, c.word);
        let p = unit_cell_automorphisms()[pick];
        let flips: Vec<usize> = flips.into_iter().collect();
        let moved = permute_cell(&h.gauge_transform(&flips).unwrap(), &p).unwrap();
        prop_assert_eq!(canonicalize_cell(&moved).unwrap().word, c.word);
    }

    #[test]
    fn canonical_form_reconstructs_the_instance((fields, couplers) in cell_strategy()) {
        let h = cell_from_bits(fields, couplers);
        let c = canonicalize_cell(&h).unwrap();
        let fixed = h.gauge_transform(&c.gauge_flip).unwrap();
        prop_assert!(fixed.fields().iter().all(|&v| v == 1.0));
        let permuted = permute_cell(&fixed, &c.permutation).unwrap();
        prop_assert_eq!(maxent_core::symmetry::word_of(permuted.couplers()), c.word);
    }
}
