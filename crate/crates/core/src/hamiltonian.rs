//! Ising Hamiltonians `E(s) = alpha * (-sum h_i s_i - sum J_ij s_i s_j)` on a
//! Chimera graph, spin configurations and gauge transformations.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::chimera::ChimeraGraph;
use crate::error::{Error, Result};

/// One `+-1` value per active spin.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpinConfig(Vec<i8>);

impl SpinConfig {
    pub fn new(spins: Vec<i8>) -> Result<Self> {
        if spins.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::NotNominal);
        }
        Ok(Self(spins))
    }

    pub fn all_up(n: usize) -> Self {
        Self(vec![1; n])
    }

    /// Decodes a configuration code: bit `i` set means spin `i` is `+1`.
    pub fn from_code(code: u64, n: usize) -> Self {
        Self((0..n).map(|i| if code >> i & 1 == 1 { 1 } else { -1 }).collect())
    }

    pub fn code(&self) -> u64 {
        self.0.iter().enumerate().filter(|(_, &s)| s > 0).fold(0, |acc, (i, _)| acc | 1 << i)
    }

    pub fn spins(&self) -> &[i8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn flipped(&self, flip: &[usize]) -> Self {
        let mut out = self.0.clone();
        for &i in flip {
            out[i] = -out[i];
        }
        Self(out)
    }
}

/// A decoded word: `+-1` per spin, or `0` for an undecided spin.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Decoded(pub Vec<i8>);

impl Decoded {
    pub fn values(&self) -> &[i8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl From<SpinConfig> for Decoded {
    fn from(s: SpinConfig) -> Self {
        Decoded(s.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    graph: Arc<ChimeraGraph>,
    fields: Vec<f64>,
    couplers: Vec<f64>,
    alpha: f64,
}

impl Hamiltonian {
    pub fn new(graph: Arc<ChimeraGraph>, fields: Vec<f64>, couplers: Vec<f64>, alpha: f64) -> Result<Self> {
        if fields.len() != graph.spin_count() {
            return Err(Error::LengthMismatch { expected: graph.spin_count(), actual: fields.len() });
        }
        if couplers.len() != graph.edge_count() {
            return Err(Error::LengthMismatch { expected: graph.edge_count(), actual: couplers.len() });
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidAlpha(alpha));
        }
        Ok(Self { graph, fields, couplers, alpha })
    }

    /// The clean codeword of the all-ones message: every field and coupler `+1`.
    pub fn ferromagnet(graph: Arc<ChimeraGraph>, alpha: f64) -> Result<Self> {
        let (n, m) = (graph.spin_count(), graph.edge_count());
        Self::new(graph, vec![1.0; n], vec![1.0; m], alpha)
    }

    pub fn graph(&self) -> &ChimeraGraph {
        &self.graph
    }

    pub fn shared_graph(&self) -> &Arc<ChimeraGraph> {
        &self.graph
    }

    pub fn fields(&self) -> &[f64] {
        &self.fields
    }

    pub fn couplers(&self) -> &[f64] {
        &self.couplers
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn spin_count(&self) -> usize {
        self.fields.len()
    }

    /// Number of transmitted elements, fields plus couplers.
    pub fn element_count(&self) -> usize {
        self.fields.len() + self.couplers.len()
    }

    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        Self::new(self.graph.clone(), self.fields.clone(), self.couplers.clone(), alpha)
    }

    pub fn with_values(&self, fields: Vec<f64>, couplers: Vec<f64>) -> Result<Self> {
        Self::new(self.graph.clone(), fields, couplers, self.alpha)
    }

    /// True when every field and coupler is exactly `+1` or `-1`.
    pub fn is_nominal(&self) -> bool {
        self.fields.iter().chain(&self.couplers).all(|&v| v == 1.0 || v == -1.0)
    }

    /// Energy of a configuration, including the `alpha` prefactor.
    pub fn energy(&self, config: &SpinConfig) -> Result<f64> {
        if config.len() != self.spin_count() {
            return Err(Error::LengthMismatch { expected: self.spin_count(), actual: config.len() });
        }
        Ok(self.energy_of(config.spins()))
    }

    pub(crate) fn energy_of(&self, s: &[i8]) -> f64 {
        let field: f64 = self.fields.iter().zip(s).map(|(h, &si)| h * si as f64).sum();
        let bond: f64 = self
            .graph
            .edges()
            .iter()
            .zip(&self.couplers)
            .map(|(&(i, j), jv)| jv * (s[i] * s[j]) as f64)
            .sum();
        self.alpha * (-field - bond)
    }

    /// Negates the fields on `flip` and every coupler with exactly one
    /// endpoint in `flip`. `E'(s') = E(s)` when `s'` is `s` flipped on `flip`.
    pub fn gauge_transform(&self, flip: &[usize]) -> Result<Self> {
        let n = self.spin_count();
        let mut mask = vec![false; n];
        for &i in flip {
            if i >= n {
                return Err(Error::SpinOutOfRange { spin: i, count: n });
            }
            mask[i] = true;
        }
        let fields = self.fields.iter().zip(&mask).map(|(&h, &f)| if f { -h } else { h }).collect();
        let couplers = self
            .graph
            .edges()
            .iter()
            .zip(&self.couplers)
            .map(|(&(i, j), &jv)| if mask[i] != mask[j] { -jv } else { jv })
            .collect();
        Ok(Self { graph: self.graph.clone(), fields, couplers, alpha: self.alpha })
    }

    /// The flip set that makes every field non-negative.
    pub fn field_gauge(&self) -> Vec<usize> {
        self.fields.iter().enumerate().filter(|(_, &h)| h < 0.0).map(|(i, _)| i).collect()
    }
}

/// `mean_i (1 - decoded_i * truth_i) / 2`; an undecided spin costs one half.
pub fn bit_error_rate(decoded: &Decoded, truth: &SpinConfig) -> Result<f64> {
    if decoded.len() != truth.len() {
        return Err(Error::LengthMismatch { expected: truth.len(), actual: decoded.len() });
    }
    if truth.is_empty() {
        return Err(Error::Empty("spin set"));
    }
    let errors: f64 = decoded
        .values()
        .iter()
        .zip(truth.spins())
        .map(|(&d, &t)| 0.5 * (1.0 - (d * t) as f64))
        .sum();
    Ok(errors / truth.len() as f64)
}
