//! Maximum-entropy versus ground-state decoding of Ising codes on Chimera graphs.
//!
//! The crate is `no_std` (it needs `alloc`) and contains only the algorithmic
//! parts: graph topology, Hamiltonians and gauges, the binary symmetric channel,
//! exhaustive and bucket-tree Boltzmann inference, Metropolis annealing,
//! spin-sign transition analysis and the bit-error-rate algebra. File formats,
//! configuration and the command line live in the `maxent` crate.

#![no_std]

extern crate alloc;
#[cfg(any(test, feature = "std"))]
extern crate std;

pub mod bte;
pub mod channel;
pub mod chimera;
pub mod error;
pub mod exact;
pub mod experiments;
pub mod hamiltonian;
pub mod math;
pub mod rng;
pub mod sa;
pub mod symmetry;
pub mod transitions;

pub use bte::{BucketTree, EliminationOrder};
pub use chimera::ChimeraGraph;
pub use error::{Error, Result};
pub use exact::Spectrum;
pub use experiments::{BerSurface, GaugeEnsemble, SectorRates};
pub use hamiltonian::{Decoded, Hamiltonian, SpinConfig};
pub use sa::{AnnealSchedule, ControlErrorSpec};
pub use transitions::{Engine, OrientationCurve, TransitionRecord};
