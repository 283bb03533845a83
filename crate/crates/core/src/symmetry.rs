//! Unit-cell symmetries and canonical forms.
//!
//! A nominal single-cell instance is first gauge-fixed so that every field is
//! `+1`; what remains is the 16-bit coupler sign word. Bit `15 - e` of the word
//! is set when coupler `e` (canonical edge order, `e = 4k + k'` for the edge
//! between left spin `k` and right spin `4 + k'`) is antiferromagnetic, so the
//! numeric order of words is the lexicographic order of sign sequences with
//! `+` before `-`. The canonical word is the minimum over the automorphism
//! orbit.

use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::chimera::{ChimeraGraph, CELL_WIDTH, SPINS_PER_CELL};
use crate::error::{Error, Result};
use crate::hamiltonian::Hamiltonian;

const CELL_EDGES: usize = CELL_WIDTH * CELL_WIDTH;

/// A permutation of the eight unit-cell spins: `self.0[i]` is the image of `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation(pub [u8; SPINS_PER_CELL]);

impl Permutation {
    pub const IDENTITY: Permutation = Permutation([0, 1, 2, 3, 4, 5, 6, 7]);

    pub fn image(&self, i: usize) -> usize {
        self.0[i] as usize
    }

    /// `self` after `other`: `i -> self(other(i))`.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        let mut out = [0u8; SPINS_PER_CELL];
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.0[other.0[i] as usize];
        }
        Permutation(out)
    }

    pub fn inverse(&self) -> Permutation {
        let mut out = [0u8; SPINS_PER_CELL];
        for (i, &p) in self.0.iter().enumerate() {
            out[p as usize] = i as u8;
        }
        Permutation(out)
    }

    /// Where each canonical edge lands, or `None` if an edge leaves `K_{4,4}`.
    pub fn edge_map(&self) -> Option<[u8; CELL_EDGES]> {
        let mut map = [0u8; CELL_EDGES];
        for (e, slot) in map.iter_mut().enumerate() {
            let (a, b) = (self.image(e / CELL_WIDTH), self.image(CELL_WIDTH + e % CELL_WIDTH));
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            if lo >= CELL_WIDTH || hi < CELL_WIDTH {
                return None;
            }
            *slot = (lo * CELL_WIDTH + (hi - CELL_WIDTH)) as u8;
        }
        Some(map)
    }
}

fn permutations_of_four() -> Vec<[u8; 4]> {
    let mut out = Vec::with_capacity(24);
    for a in 0..4u8 {
        for b in 0..4u8 {
            for c in 0..4u8 {
                for d in 0..4u8 {
                    let p = [a, b, c, d];
                    if (0..4u8).all(|v| p.contains(&v)) {
                        out.push(p);
                    }
                }
            }
        }
    }
    out
}

/// The automorphism group of `K_{4,4}`: independent permutations of the two
/// sides, optionally followed by swapping the sides. Order `4! * 4! * 2`,
/// identity first.
pub fn unit_cell_automorphisms() -> Vec<Permutation> {
    let fours = permutations_of_four();
    let mut out = Vec::with_capacity(2 * fours.len() * fours.len());
    for swap in [false, true] {
        for left in &fours {
            for right in &fours {
                let mut p = [0u8; SPINS_PER_CELL];
                for k in 0..CELL_WIDTH {
                    let (l, r) = (left[k], right[k] + CELL_WIDTH as u8);
                    if swap {
                        p[k] = r;
                        p[CELL_WIDTH + k] = l;
                    } else {
                        p[k] = l;
                        p[CELL_WIDTH + k] = r;
                    }
                }
                out.push(Permutation(p));
            }
        }
    }
    out
}

/// Edge maps of every automorphism, in the order of [`unit_cell_automorphisms`].
pub fn automorphism_edge_maps() -> Vec<[u8; CELL_EDGES]> {
    unit_cell_automorphisms()
        .iter()
        .map(|p| p.edge_map().expect("automorphisms preserve K_{4,4}"))
        .collect()
}

#[inline]
fn edge_bit(e: usize) -> u16 {
    1 << (CELL_EDGES - 1 - e)
}

/// Image of a coupler word under an edge map.
#[inline]
pub fn permute_word(word: u16, map: &[u8; CELL_EDGES]) -> u16 {
    let mut out = 0u16;
    for (e, &target) in map.iter().enumerate() {
        if word & edge_bit(e) != 0 {
            out |= edge_bit(target as usize);
        }
    }
    out
}

/// Coupler word of a gauge-fixed unit-cell coupler vector.
pub fn word_of(couplers: &[f64]) -> u16 {
    couplers
        .iter()
        .enumerate()
        .filter(|(_, &j)| j < 0.0)
        .fold(0, |w, (e, _)| w | edge_bit(e))
}

/// A unit-cell Hamiltonian with all fields `+1` and couplers from `word`.
pub fn cell_from_word(graph: Arc<ChimeraGraph>, word: u16, alpha: f64) -> Result<Hamiltonian> {
    if !graph.is_unit_cell() {
        return Err(Error::NotUnitCell);
    }
    let couplers = (0..CELL_EDGES).map(|e| if word & edge_bit(e) != 0 { -1.0 } else { 1.0 }).collect();
    Hamiltonian::new(graph, vec![1.0; SPINS_PER_CELL], couplers, alpha)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalCell {
    /// Lexicographically minimal coupler word of the orbit.
    pub word: u16,
    /// Spins flipped to make every field `+1`.
    pub gauge_flip: Vec<usize>,
    /// Automorphism taking the gauge-fixed instance to the canonical word.
    pub permutation: Permutation,
}

fn check_cell(h: &Hamiltonian) -> Result<()> {
    if !h.graph().is_unit_cell() {
        return Err(Error::NotUnitCell);
    }
    if !h.is_nominal() {
        return Err(Error::NotNominal);
    }
    Ok(())
}

/// Gauge-fixes the fields to `+1` and minimises the coupler word over the
/// automorphism group. Ties keep the first automorphism in group order.
pub fn canonicalize_cell(h: &Hamiltonian) -> Result<CanonicalCell> {
    check_cell(h)?;
    let gauge_flip = h.field_gauge();
    let fixed = h.gauge_transform(&gauge_flip)?;
    let word = word_of(fixed.couplers());
    let mut best = (u16::MAX, Permutation::IDENTITY);
    let mut found = false;
    for p in unit_cell_automorphisms() {
        let image = permute_word(word, &p.edge_map().expect("automorphism"));
        if !found || image < best.0 {
            best = (image, p);
            found = true;
        }
    }
    Ok(CanonicalCell { word: best.0, gauge_flip, permutation: best.1 })
}

/// Applies a spin permutation to a unit-cell Hamiltonian:
/// `h'_{p(i)} = h_i`, `J'_{p(i) p(j)} = J_ij`.
pub fn permute_cell(h: &Hamiltonian, p: &Permutation) -> Result<Hamiltonian> {
    if !h.graph().is_unit_cell() {
        return Err(Error::NotUnitCell);
    }
    let map = p.edge_map().ok_or(Error::NotUnitCell)?;
    let mut fields = vec![0.0; SPINS_PER_CELL];
    for (i, &v) in h.fields().iter().enumerate() {
        fields[p.image(i)] = v;
    }
    let mut couplers = vec![0.0; CELL_EDGES];
    for (e, &v) in h.couplers().iter().enumerate() {
        couplers[map[e] as usize] = v;
    }
    h.with_values(fields, couplers)
}

/// One gauge + automorphism class of nominal single-cell instances.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellClass {
    pub word: u16,
    /// Number of gauge-fixed coupler words in the orbit.
    pub orbit_size: usize,
}

/// Orbits of all `2^16` gauge-fixed coupler words, ordered by canonical word.
pub fn canonical_classes() -> Vec<CellClass> {
    let maps = automorphism_edge_maps();
    let mut seen = vec![false; 1 << CELL_EDGES];
    let mut classes = Vec::new();
    for w in 0..=u16::MAX {
        if seen[w as usize] {
            continue;
        }
        let mut size = 0;
        for map in &maps {
            let image = permute_word(w, map) as usize;
            if !seen[image] {
                seen[image] = true;
                size += 1;
            }
        }
        classes.push(CellClass { word: w, orbit_size: size });
    }
    classes
}

/// Histogram `orbit size -> number of classes`.
pub fn orbit_size_histogram(classes: &[CellClass]) -> BTreeMap<usize, usize> {
    let mut hist = BTreeMap::new();
    for c in classes {
        *hist.entry(c.orbit_size).or_insert(0) += 1;
    }
    hist
}
