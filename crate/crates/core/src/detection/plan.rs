//! Detection plans: circuit, initial data, target cut with its flat pieces
//! and hyperplane extensions, and the detector partition.

use super::DetectionError;
use crate::config::SiteSet;
use crate::lattice::{FlatPiece, GateCircuit, LatticeCut, StateVector};

/// Everything needed to run a detection experiment on a lattice cut.
#[derive(Clone, Debug)]
pub struct DetectionPlan {
    pub circuit: GateCircuit,
    pub initial_cut: LatticeCut,
    pub initial_state: StateVector,
    /// The piecewise-flat cut carrying the detectors.
    pub target_cut: LatticeCut,
    /// Detector regions B_1..B_r as site sets on the target cut.
    pub regions: Vec<SiteSet>,
}

/// Validated plan data: the flat pieces of the target cut, which of them
/// carry detectors, their hyperplane-extension cuts, and the per-piece
/// detector intersections B_{kℓ} = Δ_k ∩ B_ℓ.
#[derive(Clone, Debug)]
pub struct PlanContext {
    pub pieces: Vec<FlatPiece>,
    /// Indices (into `pieces`) of pieces intersecting some detector,
    /// in canonical ascending order.
    pub relevant: Vec<usize>,
    /// Extension cut per relevant piece (same order as `relevant`).
    pub extensions: Vec<LatticeCut>,
    /// b[i][ℓ] = Δ_{relevant[i]} ∩ B_ℓ.
    pub b: Vec<Vec<SiteSet>>,
    pub r: usize,
}

impl DetectionPlan {
    pub fn validate(&self) -> Result<PlanContext, DetectionError> {
        self.initial_cut.validate(&self.circuit)?;
        self.target_cut.validate(&self.circuit)?;
        let n = self.circuit.num_sites();
        if self.initial_state.num_sites() != n {
            return Err(DetectionError::InvalidPlan(format!(
                "initial state has {} sites, circuit {n}",
                self.initial_state.num_sites()
            )));
        }
        if !self.initial_state.is_normalized() {
            return Err(DetectionError::InvalidPlan(
                "initial state not normalized".into(),
            ));
        }
        if self.regions.is_empty() {
            return Err(DetectionError::InvalidPlan("no detector regions".into()));
        }
        let all = SiteSet::full(n);
        for (i, region) in self.regions.iter().enumerate() {
            if !region.is_subset_of(all) {
                return Err(DetectionError::InvalidPlan(format!(
                    "region {i} exceeds the site range"
                )));
            }
            for (j, other) in self.regions.iter().enumerate().skip(i + 1) {
                if !region.intersection(*other).is_empty() {
                    return Err(DetectionError::InvalidPlan(format!(
                        "regions {i} and {j} overlap"
                    )));
                }
            }
        }
        let pieces = self.target_cut.flat_pieces();
        let r = self.regions.len();
        let mut relevant = Vec::new();
        let mut extensions = Vec::new();
        let mut b = Vec::new();
        for (k, piece) in pieces.iter().enumerate() {
            let scope = piece.site_set();
            let row: Vec<SiteSet> = self
                .regions
                .iter()
                .map(|&reg| reg.intersection(scope))
                .collect();
            if row.iter().all(|s| s.is_empty()) {
                continue;
            }
            relevant.push(k);
            extensions.push(self.target_cut.hyperplane_extension(&self.circuit, piece)?);
            b.push(row);
        }
        if relevant.is_empty() {
            return Err(DetectionError::InvalidPlan(
                "no flat piece intersects any detector region".into(),
            ));
        }
        Ok(PlanContext {
            pieces,
            relevant,
            extensions,
            b,
            r,
        })
    }
}
