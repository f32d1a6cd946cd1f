//! A finite hypersurface-evolution model that is exactly interaction-local
//! and propagation-local: a 1+1-dimensional brickwork circuit of
//! number-conserving two-site gates over a periodic chain, with
//! gate-respecting lattice cuts playing the role of Cauchy surfaces.

mod checks;
mod circuit;
mod cut;
mod gate;
mod state;

pub use checks::{check_il, check_pl, extract_local_evolution, IlReport, PlReport};
pub use circuit::{CircuitSpec, GateCircuit, GateEntry};
pub use cut::{grow_sites, shrink_sites, CrossedGate, FlatPiece, LatticeCut};
pub use gate::{Gate, GateKind};
pub use state::{split_index, BipartiteView, Projector, StateSpec, StateVector};

use thiserror::Error;

/// Norm drift allowed after any public state operation.
pub const NORM_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum LatticeError {
    #[error("site count {0} out of range (1..=24)")]
    BadSiteCount(usize),
    #[error("site count {0} must be even for periodic brickwork")]
    OddSiteCount(usize),
    #[error("invalid circuit: {0}")]
    BadCircuit(String),
    #[error("invalid cut: {0}")]
    BadCut(String),
    #[error("cut length {got} does not match circuit sites {expected}")]
    CutLengthMismatch { got: usize, expected: usize },
    #[error(
        "a gate at layer {layer}, bond {bond} lies between the cuts and touches the shared region"
    )]
    GateTouchesRegion { layer: usize, bond: usize },
    #[error("state dimension mismatch: {0}")]
    StateMismatch(String),
    #[error("flat piece cannot be extended to a gate-respecting full-chain cut")]
    NonExtendablePiece,
    #[error(transparent)]
    Config(#[from] crate::config::ConfigError),
}
