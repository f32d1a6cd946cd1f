//! Measurement machinery: flat Born and collapse rules, the sequential and
//! parallel detection processes on piecewise-flat cuts, curved Born
//! distributions, squeeze bounds, and convergence experiments.

mod plan;
mod process;
mod sample;
mod squeeze;

pub use plan::{DetectionPlan, PlanContext};
pub use process::{
    curved_born, flat_measure, parallel_process, sequential_process, MeasureBranch,
    ParallelOutcome, SequentialBranch, SequentialOutcome,
};
pub use sample::{chi_square_fit, sample_sequential, ChiSquare};
pub use squeeze::{
    convergence_experiment, squeeze_bounds, ConvergenceReport, ConvergenceStep, SqueezeReport,
    SqueezeRow,
};

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::config::OutcomeVector;

/// Residual tolerance for operator identities checked at runtime.
pub const OPERATOR_TOL: f64 = 1e-10;
/// Branches below this probability are dead: the collapse rule does not
/// apply at probability zero, so they are dropped rather than normalized.
pub const DEAD_BRANCH_TOL: f64 = 1e-14;
/// Distributions must sum to one within this tolerance.
pub const NORMALIZATION_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum DetectionError {
    #[error(transparent)]
    Lattice(#[from] crate::lattice::LatticeError),
    #[error(transparent)]
    Config(#[from] crate::config::ConfigError),
    #[error("invalid plan: {0}")]
    InvalidPlan(String),
    #[error("pulled-back projectors fail to commute: residual {residual}")]
    Commutation { residual: f64 },
    #[error("squeeze inequality violated for L={l}: {detail}")]
    SqueezeViolation { l: String, detail: String },
    #[error("distribution sums to {0}, outside 1 ± 1e-9")]
    NotNormalized(f64),
}

/// Probability distribution over click vectors L (and a helper for
/// comparing distributions from different processs).
#[derive(Clone, Debug, Default, Serialize)]
pub struct OutcomeDistribution {
    pub r: usize,
    probs: BTreeMap<OutcomeVector, f64>,
}

impl OutcomeDistribution {
    pub fn new(r: usize) -> Self {
        Self {
            r,
            probs: BTreeMap::new(),
        }
    }

    pub fn add(&mut self, l: OutcomeVector, p: f64) {
        *self.probs.entry(l).or_insert(0.0) += p;
    }

    pub fn prob(&self, l: OutcomeVector) -> f64 {
        self.probs.get(&l).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.probs.values().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (OutcomeVector, f64)> + '_ {
        self.probs.iter().map(|(&l, &p)| (l, p))
    }

    /// Largest |Δp| over all outcome vectors of both distributions.
    pub fn max_abs_diff(&self, other: &OutcomeDistribution) -> f64 {
        OutcomeVector::all(self.r)
            .map(|l| (self.prob(l) - other.prob(l)).abs())
            .fold(0.0, f64::max)
    }

    pub fn check_normalized(&self) -> Result<(), DetectionError> {
        let t = self.total();
        if (t - 1.0).abs() > NORMALIZATION_TOL {
            return Err(DetectionError::NotNormalized(t));
        }
        Ok(())
    }
}
