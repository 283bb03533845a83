//! Bucket-tree elimination: exact log-partition, marginals and Boltzmann
//! samples for instances too large to enumerate.
//!
//! Variables are eliminated along an [`EliminationOrder`]. Bucket `k` owns the
//! variable `v_k`, its unary field, every coupler whose earlier-eliminated
//! endpoint is `v_k`, and the messages of its child buckets. Its table is
//! indexed by assignments of `U_k = [v_k] ++ S_k`, with `v_k` at bit 0 and the
//! separator `S_k` (later variables, ascending elimination rank) above it. A
//! set bit means spin `+1`.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::chimera::{ChimeraGraph, CELL_WIDTH};
use crate::error::{Error, Result};
use crate::hamiltonian::{Hamiltonian, SpinConfig};
use crate::math;

/// Default cap on bucket table size, in index bits.
pub const DEFAULT_TABLE_BITS: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EliminationOrder {
    order: Vec<usize>,
    induced_width: usize,
}

/// Column-major order. Within a column the side-0 spins go first, one
/// vertical chain (fixed offset, rows ascending) at a time, then the side-1
/// spins row by row. Separators never exceed `4L` spins.
pub fn elimination_order(graph: &ChimeraGraph) -> EliminationOrder {
    EliminationOrder::column_major(graph)
}

impl EliminationOrder {
    pub fn column_major(graph: &ChimeraGraph) -> Self {
        let l = graph.grid_size();
        let mut order = Vec::with_capacity(graph.spin_count());
        for col in 0..l {
            for offset in 0..CELL_WIDTH {
                for row in 0..l {
                    order.extend(graph.spin_of_label(graph.label_of(row, col, 0, offset)));
                }
            }
            for row in 0..l {
                for offset in 0..CELL_WIDTH {
                    order.extend(graph.spin_of_label(graph.label_of(row, col, 1, offset)));
                }
            }
        }
        let induced_width = simulate(graph, &order).iter().map(Vec::len).max().unwrap_or(0);
        Self { order, induced_width }
    }

    /// A caller-supplied order; must be a permutation of the active spins.
    pub fn from_order(graph: &ChimeraGraph, order: Vec<usize>) -> Result<Self> {
        let n = graph.spin_count();
        if order.len() != n {
            return Err(Error::InvalidOrder(alloc::format!("{} entries for {} spins", order.len(), n)));
        }
        let mut seen = vec![false; n];
        for &v in &order {
            if v >= n || seen[v] {
                return Err(Error::InvalidOrder(alloc::format!("spin {v} out of range or repeated")));
            }
            seen[v] = true;
        }
        let induced_width = simulate(graph, &order).iter().map(Vec::len).max().unwrap_or(0);
        Ok(Self { order, induced_width })
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn induced_width(&self) -> usize {
        self.induced_width
    }
}

/// Separators produced by eliminating `order` on the interaction graph,
/// indexed by elimination step and sorted by elimination rank.
fn simulate(graph: &ChimeraGraph, order: &[usize]) -> Vec<Vec<usize>> {
    let n = graph.spin_count();
    let mut rank = vec![0; n];
    for (r, &v) in order.iter().enumerate() {
        rank[v] = r;
    }
    let mut adj: Vec<BTreeSet<usize>> = (0..n).map(|i| graph.neighbors(i).iter().map(|&(j, _)| j).collect()).collect();
    let mut separators = Vec::with_capacity(n);
    for &v in order {
        let mut sep: Vec<usize> = adj[v].iter().copied().collect();
        sep.sort_unstable_by_key(|&s| rank[s]);
        for &a in &sep {
            adj[a].remove(&v);
            for &b in &sep {
                if a != b {
                    adj[a].insert(b);
                }
            }
        }
        separators.push(sep);
    }
    separators
}

/// Gathers selected bits of a bucket index into a child-message index, eight
/// source bits per lookup.
#[derive(Debug, Clone)]
struct BitGather {
    chunks: Vec<[u32; 256]>,
}

impl BitGather {
    /// `dest[p]` is the target bit of source bit `p`, if any.
    fn new(dest: &[Option<usize>]) -> Self {
        let chunks = dest
            .chunks(8)
            .map(|group| {
                let mut table = [0u32; 256];
                for (b, slot) in table.iter_mut().enumerate() {
                    for (i, d) in group.iter().enumerate() {
                        if let (true, Some(t)) = (b >> i & 1 == 1, d) {
                            *slot |= 1 << t;
                        }
                    }
                }
                table
            })
            .collect();
        Self { chunks }
    }

    /// Calls `f(start, indices)` for consecutive blocks of `u < 2^bits`, where
    /// `indices[j]` is the gathered index of `start + j`.
    #[inline]
    fn for_blocks<F: FnMut(usize, &[u32])>(&self, bits: usize, mut f: F) {
        let size = 1usize << bits;
        let block = size.min(256);
        let mut buf = [0u32; 256];
        for start in (0..size).step_by(block) {
            let mut base = 0u32;
            for (q, table) in self.chunks.iter().enumerate().skip(1) {
                base |= table[(start >> (8 * q)) & 0xff];
            }
            for (b, &x) in buf[..block].iter_mut().zip(&self.chunks[0][..block]) {
                *b = base | x;
            }
            f(start, &buf[..block]);
        }
    }
}

#[derive(Debug, Clone)]
struct Bucket {
    var: usize,
    separator: Vec<usize>,
    /// `(bit position in U_k, edge index)` for couplers owned by this bucket.
    bonds: Vec<(usize, usize)>,
    children: Vec<usize>,
    gathers: Vec<BitGather>,
    /// Collects bit 0 and the bond bits into a local-field table index.
    bond_gather: BitGather,
}

impl Bucket {
    fn bits(&self) -> usize {
        1 + self.separator.len()
    }
}

/// Exact marginals at one temperature.
#[derive(Debug, Clone, PartialEq)]
pub struct Marginals {
    pub log_partition: f64,
    /// `<s_i>` per spin.
    pub magnetization: Vec<f64>,
    /// `<s_i s_j>` per graph edge.
    pub edge_correlation: Vec<f64>,
}

/// The bucket structure of one graph under one elimination order. Reusable
/// across Hamiltonians on the same graph and across temperatures.
#[derive(Debug, Clone)]
pub struct BucketTree {
    spins: usize,
    edges: usize,
    order: EliminationOrder,
    buckets: Vec<Bucket>,
    roots: Vec<usize>,
    largest_bits: usize,
}

impl BucketTree {
    pub fn new(graph: &ChimeraGraph, order: EliminationOrder) -> Result<Self> {
        Self::with_cap(graph, order, DEFAULT_TABLE_BITS)
    }

    /// Fails with [`Error::TableTooLarge`] if any bucket table would need more
    /// than `2^cap_bits` entries.
    pub fn with_cap(graph: &ChimeraGraph, order: EliminationOrder, cap_bits: usize) -> Result<Self> {
        let n = graph.spin_count();
        if order.order.len() != n {
            return Err(Error::InvalidOrder(alloc::format!("order has {} entries for {} spins", order.order.len(), n)));
        }
        let separators = simulate(graph, &order.order);
        let mut rank = vec![0; n];
        for (r, &v) in order.order.iter().enumerate() {
            rank[v] = r;
        }

        let mut buckets: Vec<Bucket> = Vec::with_capacity(n);
        let mut roots = Vec::new();
        let mut largest_bits = 0;
        for (k, (&var, sep)) in order.order.iter().zip(&separators).enumerate() {
            let bits = 1 + sep.len();
            if bits > cap_bits || bits > 31 {
                return Err(Error::TableTooLarge { bits, cap: cap_bits });
            }
            largest_bits = largest_bits.max(bits);
            let bonds = graph
                .neighbors(var)
                .iter()
                .filter(|&&(o, _)| rank[o] > k)
                .map(|&(o, e)| (1 + sep.iter().position(|&s| s == o).expect("neighbor in separator"), e))
                .collect();
            let bonds: Vec<(usize, usize)> = bonds;
            let mut dest = vec![None; bits];
            dest[0] = Some(0);
            for (j, &(p, _)) in bonds.iter().enumerate() {
                dest[p] = Some(j + 1);
            }
            let bond_gather = BitGather::new(&dest);
            buckets.push(Bucket { var, separator: sep.clone(), bonds, children: Vec::new(), gathers: Vec::new(), bond_gather });
        }
        for k in 0..n {
            match buckets[k].separator.first() {
                None => roots.push(k),
                Some(&first) => {
                    let parent = rank[first];
                    buckets[parent].children.push(k);
                }
            }
        }
        // child index maps are built once every separator is known
        for k in 0..n {
            let children = buckets[k].children.clone();
            let mut gathers = Vec::with_capacity(children.len());
            for c in children {
                let child_sep = &buckets[c].separator;
                let parent = &buckets[k];
                let mut dest = vec![None; parent.bits()];
                for (t, s) in child_sep.iter().enumerate() {
                    let p = if *s == parent.var {
                        0
                    } else {
                        1 + parent.separator.iter().position(|x| x == s).expect("running intersection")
                    };
                    dest[p] = Some(t);
                }
                gathers.push(BitGather::new(&dest));
            }
            buckets[k].gathers = gathers;
        }
        Ok(Self { spins: n, edges: graph.edge_count(), order, buckets, roots, largest_bits })
    }

    pub fn order(&self) -> &EliminationOrder {
        &self.order
    }

    pub fn induced_width(&self) -> usize {
        self.order.induced_width
    }

    /// Index bits of the largest bucket table.
    pub fn largest_table_bits(&self) -> usize {
        self.largest_bits
    }

    fn check(&self, h: &Hamiltonian, t: f64) -> Result<f64> {
        if h.spin_count() != self.spins {
            return Err(Error::LengthMismatch { expected: self.spins, actual: h.spin_count() });
        }
        if h.couplers().len() != self.edges {
            return Err(Error::LengthMismatch { expected: self.edges, actual: h.couplers().len() });
        }
        if !(t > 0.0) || t.is_nan() {
            return Err(Error::NonPositiveTemperature(t));
        }
        Ok(h.alpha() / t)
    }

    /// Log weight of the field and owned couplers of bucket `k`, indexed by
    /// `bond_gather` output.
    fn theta_table(&self, k: usize, h: &Hamiltonian, scale: f64) -> Vec<f64> {
        let b = &self.buckets[k];
        (0..2usize << b.bonds.len())
            .map(|idx| {
                let mut local = h.fields()[b.var];
                for (j, &(_, e)) in b.bonds.iter().enumerate() {
                    local += if idx >> (j + 1) & 1 == 1 { h.couplers()[e] } else { -h.couplers()[e] };
                }
                if idx & 1 == 1 {
                    scale * local
                } else {
                    -scale * local
                }
            })
            .collect()
    }

    fn bucket_table(&self, k: usize, h: &Hamiltonian, scale: f64, lambdas: &[Vec<f64>]) -> Vec<f64> {
        let b = &self.buckets[k];
        let theta = self.theta_table(k, h, scale);
        let mut table = Vec::with_capacity(1 << b.bits());
        b.bond_gather.for_blocks(b.bits(), |_, idx| table.extend(idx.iter().map(|&i| theta[i as usize])));
        for (&c, g) in b.children.iter().zip(&b.gathers) {
            let msg = &lambdas[c];
            g.for_blocks(b.bits(), |start, idx| {
                for (v, &i) in table[start..].iter_mut().zip(idx) {
                    *v += msg[i as usize];
                }
            });
        }
        table
    }

    /// Upward pass. Returns every bucket message `lambda_k` and, if asked,
    /// every conditional table `P(v_k = +1 | S_k)`.
    fn upward(&self, h: &Hamiltonian, scale: f64, keep: bool) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let n = self.buckets.len();
        let mut lambdas: Vec<Vec<f64>> = vec![Vec::new(); n];
        let mut conds = Vec::with_capacity(if keep { n } else { 0 });
        for k in 0..n {
            let table = self.bucket_table(k, h, scale, &lambdas);
            // every child message has exactly one consumer
            for &c in &self.buckets[k].children {
                lambdas[c] = Vec::new();
            }
            let half = table.len() / 2;
            let mut lambda = vec![0.0; half];
            let mut cond = vec![0.0; if keep { half } else { 0 }];
            for (j, pair) in table.chunks_exact(2).enumerate() {
                let (down, up) = (pair[0], pair[1]);
                let d = up - down;
                // beyond |d| = 40 the smaller term is below one ulp of the larger
                let (lse, c) = if d > 40.0 {
                    (up, 1.0)
                } else if d < -40.0 {
                    (down, 0.0)
                } else {
                    let e = math::exp(-math::abs(d));
                    let c = if d >= 0.0 { 1.0 / (1.0 + e) } else { e / (1.0 + e) };
                    // 1 + e is in (1, 2]: ln is accurate to an ulp in absolute terms
                    (down.max(up) + math::ln(1.0 + e), c)
                };
                lambda[j] = lse;
                if keep {
                    cond[j] = c;
                }
            }
            lambdas[k] = lambda;
            if keep {
                conds.push(cond);
            }
        }
        (lambdas, conds)
    }

    fn log_z_from(&self, lambdas: &[Vec<f64>]) -> f64 {
        self.roots.iter().map(|&r| lambdas[r][0]).sum()
    }

    /// `ln Z(T)`.
    pub fn log_partition(&self, h: &Hamiltonian, t: f64) -> Result<f64> {
        let scale = self.check(h, t)?;
        Ok(self.log_z_from(&self.upward(h, scale, false).0))
    }

    /// `<s_i>` for every spin.
    pub fn magnetizations(&self, h: &Hamiltonian, t: f64) -> Result<Vec<f64>> {
        Ok(self.downward(h, t, false)?.magnetization)
    }

    /// Upward and downward passes: `ln Z`, magnetizations and edge
    /// correlations. The downward pass carries separator marginals as plain
    /// probabilities; messages stay in the log domain.
    pub fn marginals(&self, h: &Hamiltonian, t: f64) -> Result<Marginals> {
        self.downward(h, t, true)
    }

    fn downward(&self, h: &Hamiltonian, t: f64, edges: bool) -> Result<Marginals> {
        let scale = self.check(h, t)?;
        let (lambdas, conds) = self.upward(h, scale, true);
        let log_partition = self.log_z_from(&lambdas);
        drop(lambdas);
        let mut magnetization = vec![0.0; self.spins];
        let mut edge_correlation = vec![0.0; self.edges];
        let mut separator_marginal: Vec<Option<Vec<f64>>> = vec![None; self.buckets.len()];
        let mut joint = Vec::new();

        for k in (0..self.buckets.len()).rev() {
            let b = &self.buckets[k];
            let sep = separator_marginal[k].take().unwrap_or_else(|| vec![1.0]);
            let cond = &conds[k];
            magnetization[b.var] = sep.iter().zip(cond).map(|(p, c)| p * (2.0 * c - 1.0)).sum();
            if (b.bonds.is_empty() || !edges) && b.children.is_empty() {
                continue;
            }
            joint.clear();
            for (p, c) in sep.iter().zip(cond) {
                joint.push(p * (1.0 - c));
                joint.push(p * c);
            }
            for &(p, e) in b.bonds.iter().filter(|_| edges) {
                let mut corr = 0.0;
                for (u, &w) in joint.iter().enumerate() {
                    if (u ^ u >> p) & 1 == 0 {
                        corr += w;
                    } else {
                        corr -= w;
                    }
                }
                edge_correlation[e] = corr;
            }
            for (&c, g) in b.children.iter().zip(&b.gathers) {
                let mut sums = vec![0.0; 1 << self.buckets[c].separator.len()];
                g.for_blocks(b.bits(), |start, idx| {
                    for (&w, &i) in joint[start..].iter().zip(idx) {
                        sums[i as usize] += w;
                    }
                });
                separator_marginal[c] = Some(sums);
            }
        }
        Ok(Marginals { log_partition, magnetization, edge_correlation })
    }

    /// `n` independent exact Boltzmann samples by backward sampling.
    pub fn sample<R: Rng + ?Sized>(&self, h: &Hamiltonian, t: f64, n: usize, rng: &mut R) -> Result<Vec<SpinConfig>> {
        if n == 0 {
            return Err(Error::Empty("sample count"));
        }
        let scale = self.check(h, t)?;
        let (_, conds) = self.upward(h, scale, true);
        let mut out = Vec::with_capacity(n);
        let mut bits = vec![false; self.spins];
        for _ in 0..n {
            for k in (0..self.buckets.len()).rev() {
                let b = &self.buckets[k];
                let s = b.separator.iter().enumerate().filter(|(_, &v)| bits[v]).fold(0usize, |acc, (j, _)| acc | 1 << j);
                bits[b.var] = rng.random::<f64>() < conds[k][s];
            }
            out.push(SpinConfig::new(bits.iter().map(|&b| if b { 1 } else { -1 }).collect())?);
        }
        Ok(out)
    }
}

/// `ln Z(T)` under a given order.
pub fn bte_log_partition(h: &Hamiltonian, t: f64, order: &EliminationOrder) -> Result<f64> {
    BucketTree::new(h.graph(), order.clone())?.log_partition(h, t)
}

/// `<s_i>` under the column-major order.
pub fn bte_magnetizations(h: &Hamiltonian, t: f64) -> Result<Vec<f64>> {
    BucketTree::new(h.graph(), elimination_order(h.graph()))?.magnetizations(h, t)
}

/// `n` exact Boltzmann samples under the column-major order.
pub fn bte_sample<R: Rng + ?Sized>(h: &Hamiltonian, t: f64, n: usize, rng: &mut R) -> Result<Vec<SpinConfig>> {
    BucketTree::new(h.graph(), elimination_order(h.graph()))?.sample(h, t, n, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::enumerate_spectrum;
    use crate::rng::stream;
    use alloc::sync::Arc;

    fn cell_instance(seed: u64) -> Hamiltonian {
        let mut rng = stream(seed, 9, 0);
        let g = Arc::new(ChimeraGraph::unit_cell());
        let f = (0..8).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect();
        let c = (0..16).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect();
        Hamiltonian::new(g, f, c, 1.0).unwrap()
    }

    #[test]
    fn widths() {
        assert!(elimination_order(&ChimeraGraph::unit_cell()).induced_width() <= 5);
        let four = ChimeraGraph::new(4, &[]).unwrap();
        let tree = BucketTree::new(&four, elimination_order(&four)).unwrap();
        assert_eq!(tree.induced_width(), 16);
        assert_eq!(tree.largest_table_bits(), 17);
        let single = ChimeraGraph::new(1, &[1, 2, 3, 4, 5, 6, 7]).unwrap();
        assert_eq!(elimination_order(&single).induced_width(), 0);
    }

    #[test]
    fn one_spin_partition() {
        let g = Arc::new(ChimeraGraph::new(1, &[1, 2, 3, 4, 5, 6, 7]).unwrap());
        let h = Hamiltonian::new(g.clone(), vec![1.0], vec![], 1.0).unwrap();
        let z = bte_log_partition(&h, 1.0, &elimination_order(&g)).unwrap();
        assert!((z - (1f64.exp() + (-1f64).exp()).ln()).abs() < 1e-14);
        let m = bte_magnetizations(&h, 1.0).unwrap();
        assert!((m[0] - 1f64.tanh()).abs() < 1e-14);
    }

    #[test]
    fn matches_exhaustive_on_cell() {
        for seed in 0..10 {
            let h = cell_instance(seed);
            let spec = enumerate_spectrum(&h).unwrap();
            let tree = BucketTree::new(h.graph(), elimination_order(h.graph())).unwrap();
            for t in [0.01, 0.1, 1.0, 7.0] {
                let m = tree.marginals(&h, t).unwrap();
                assert!((m.log_partition - spec.log_partition(t).unwrap()).abs() < 1e-9);
                let exact = spec.magnetization(t).unwrap();
                for (a, b) in m.magnetization.iter().zip(&exact) {
                    assert!((a - b).abs() < 1e-9, "{a} {b} at T={t}");
                }
                let corr = spec.correlations(t, h.graph().edges()).unwrap();
                for (a, b) in m.edge_correlation.iter().zip(&corr) {
                    assert!((a - b).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn disconnected_cells_factorize() {
        // a 2x2 grid with every inter-cell coupler switched off
        let g = Arc::new(ChimeraGraph::new(2, &[]).unwrap());
        let couplers = g.label_edges().iter().map(|&(a, b)| if a / 8 == b / 8 { 1.0 } else { 0.0 }).collect();
        let h = Hamiltonian::new(g.clone(), vec![1.0; 32], couplers, 1.0).unwrap();
        let cell = Hamiltonian::ferromagnet(Arc::new(ChimeraGraph::unit_cell()), 1.0).unwrap();
        let one = enumerate_spectrum(&cell).unwrap().log_partition(0.7).unwrap();
        let all = bte_log_partition(&h, 0.7, &elimination_order(&g)).unwrap();
        assert!((all - 4.0 * one).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_input() {
        let h = cell_instance(1);
        assert_eq!(bte_magnetizations(&h, 0.0), Err(Error::NonPositiveTemperature(0.0)));
        let g = ChimeraGraph::new(4, &[]).unwrap();
        assert!(matches!(BucketTree::with_cap(&g, elimination_order(&g), 10), Err(Error::TableTooLarge { .. })));
        assert!(EliminationOrder::from_order(&ChimeraGraph::unit_cell(), vec![0, 1, 2]).is_err());
        assert!(EliminationOrder::from_order(&ChimeraGraph::unit_cell(), vec![0, 0, 2, 3, 4, 5, 6, 7]).is_err());
        let other = Hamiltonian::ferromagnet(Arc::new(ChimeraGraph::new(2, &[]).unwrap()), 1.0).unwrap();
        let tree = BucketTree::new(h.graph(), elimination_order(h.graph())).unwrap();
        assert!(tree.marginals(&other, 1.0).is_err());
        assert!(tree.sample(&h, 1.0, 0, &mut stream(1, 0, 0)).is_err());
    }

    #[test]
    fn sampling_is_deterministic() {
        let h = cell_instance(3);
        let a = bte_sample(&h, 1.0, 50, &mut stream(4, 0, 0)).unwrap();
        let b = bte_sample(&h, 1.0, 50, &mut stream(4, 0, 0)).unwrap();
        assert_eq!(a, b);
    }
}
