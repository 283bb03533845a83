//! Chimera topology: an `L x L` grid of `K_{4,4}` unit cells.
//!
//! A site is labelled by `(row, col, side, offset)` flattened row-major as
//! `8 * (row * L + col) + 4 * side + offset`. Side-0 spins couple to the
//! like-offset side-0 spin of the cell in the next row; side-1 spins couple to
//! the like-offset side-1 spin of the cell in the next column.
//!
//! Excluded labels are removed from the graph together with every incident
//! coupler. The remaining ("active") spins are numbered `0..spin_count()` in
//! ascending label order; everything downstream indexes spins by that position.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

pub const CELL_WIDTH: usize = 4;
pub const SPINS_PER_CELL: usize = 2 * CELL_WIDTH;

const ABSENT: usize = usize::MAX;

#[derive(Debug, Clone, PartialEq)]
pub struct ChimeraGraph {
    grid_size: usize,
    excluded: Vec<usize>,
    labels: Vec<usize>,
    position: Vec<usize>,
    edges: Vec<(usize, usize)>,
    label_edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<(usize, usize)>>,
}

/// Builds an `L x L` Chimera graph with the given labels removed.
pub fn build_chimera(grid_size: usize, excluded: &[usize]) -> Result<ChimeraGraph> {
    ChimeraGraph::new(grid_size, excluded)
}

impl ChimeraGraph {
    pub fn new(grid_size: usize, excluded: &[usize]) -> Result<Self> {
        if grid_size == 0 {
            return Err(Error::EmptyChimera);
        }
        let sites = SPINS_PER_CELL * grid_size * grid_size;
        let mut excluded: Vec<usize> = excluded.to_vec();
        excluded.sort_unstable();
        excluded.dedup();
        if let Some(&bad) = excluded.iter().find(|&&l| l >= sites) {
            return Err(Error::LabelOutOfRange { label: bad, limit: sites });
        }

        let mut position = vec![ABSENT; sites];
        let mut labels = Vec::with_capacity(sites - excluded.len());
        let mut skip = excluded.iter().peekable();
        for label in 0..sites {
            if skip.peek() == Some(&&label) {
                skip.next();
                continue;
            }
            position[label] = labels.len();
            labels.push(label);
        }

        let mut label_edges = Vec::new();
        for row in 0..grid_size {
            for col in 0..grid_size {
                let cell = SPINS_PER_CELL * (row * grid_size + col);
                for k in 0..CELL_WIDTH {
                    for kk in 0..CELL_WIDTH {
                        label_edges.push((cell + k, cell + CELL_WIDTH + kk));
                    }
                }
                if row + 1 < grid_size {
                    let below = SPINS_PER_CELL * ((row + 1) * grid_size + col);
                    for k in 0..CELL_WIDTH {
                        label_edges.push((cell + k, below + k));
                    }
                }
                if col + 1 < grid_size {
                    let right = cell + SPINS_PER_CELL;
                    for k in 0..CELL_WIDTH {
                        label_edges.push((cell + CELL_WIDTH + k, right + CELL_WIDTH + k));
                    }
                }
            }
        }
        label_edges.retain(|&(a, b)| position[a] != ABSENT && position[b] != ABSENT);
        label_edges.sort_unstable();

        let edges: Vec<(usize, usize)> =
            label_edges.iter().map(|&(a, b)| (position[a], position[b])).collect();
        let mut adjacency = vec![Vec::new(); labels.len()];
        for (e, &(i, j)) in edges.iter().enumerate() {
            adjacency[i].push((j, e));
            adjacency[j].push((i, e));
        }

        Ok(Self { grid_size, excluded, labels, position, edges, label_edges, adjacency })
    }

    /// A single full unit cell (8 spins, 16 couplers).
    pub fn unit_cell() -> Self {
        Self::new(1, &[]).expect("unit cell is always valid")
    }

    pub fn grid_size(&self) -> usize {
        self.grid_size
    }

    pub fn cell_width(&self) -> usize {
        CELL_WIDTH
    }

    pub fn site_count(&self) -> usize {
        self.position.len()
    }

    pub fn spin_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn excluded(&self) -> &[usize] {
        &self.excluded
    }

    /// Chimera label of every active spin, ascending.
    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label(&self, spin: usize) -> usize {
        self.labels[spin]
    }

    /// Active spin position of a label, or `None` when excluded or out of range.
    pub fn spin_of_label(&self, label: usize) -> Option<usize> {
        self.position.get(label).copied().filter(|&p| p != ABSENT)
    }

    /// Edges as pairs of active spin positions, `i < j`, in canonical order.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Edges as pairs of Chimera labels.
    pub fn label_edges(&self) -> &[(usize, usize)] {
        &self.label_edges
    }

    /// `(neighbour, edge index)` pairs of an active spin.
    pub fn neighbors(&self, spin: usize) -> &[(usize, usize)] {
        &self.adjacency[spin]
    }

    pub fn edge_index(&self, i: usize, j: usize) -> Option<usize> {
        let key = if i < j { (i, j) } else { (j, i) };
        self.edges.binary_search(&key).ok()
    }

    pub fn is_unit_cell(&self) -> bool {
        self.grid_size == 1 && self.excluded.is_empty()
    }

    /// `(row, col, side, offset)` of a Chimera label.
    pub fn coordinates(&self, label: usize) -> (usize, usize, usize, usize) {
        let cell = label / SPINS_PER_CELL;
        let within = label % SPINS_PER_CELL;
        (cell / self.grid_size, cell % self.grid_size, within / CELL_WIDTH, within % CELL_WIDTH)
    }

    pub fn label_of(&self, row: usize, col: usize, side: usize, offset: usize) -> usize {
        SPINS_PER_CELL * (row * self.grid_size + col) + CELL_WIDTH * side + offset
    }
}
