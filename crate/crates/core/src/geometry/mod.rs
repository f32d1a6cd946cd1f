//! Continuum Minkowski geometry in 1+d dimensions (d ∈ {1,2,3}).
//!
//! Surfaces are graphs of Lipschitz height functions over a bounded
//! (optionally periodic) box domain, with metric signature (+,−,…,−) and
//! c = 1. Everything here is exact piecewise-linear arithmetic on sample
//! grids; set operations carry a documented rounding direction.

mod boost;
mod heightfield;
mod region;
mod surface;
mod triangulation;

pub use boost::{boost_band_check, boost_band_report, boost_surface, BandReport, BoostedSurface};
pub use heightfield::HeightField;
pub use region::{
    grow, project_partition, shrink, AdmissiblePartition, GridSpec, Region, SpatialBox,
};
pub use surface::{catalog, is_in_future, lower_surface, uniform_distance, CauchySurfaceGraph};
pub use triangulation::{build_triangulation, is_cauchy, Simplex, TriangularSurface};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Maximum supported spatial dimension.
pub const MAX_DIM: usize = 3;

/// Stabilization tolerance for geometric sup-distance refinement. Far below
/// every approximation scale used (ε ≥ 3⁻⁶).
pub const SUP_TOL: f64 = 1e-9;

/// Slack for floating-point comparisons of exact piecewise-linear data.
pub const FP_SLACK: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("spatial domains do not match")]
    DomainMismatch,
    #[error("lipschitz bound must lie in [0,1), got {0}")]
    LipschitzBoundOutOfRange(f64),
    #[error("height samples violate the declared lipschitz bound {bound} (at axis {axis}: |Δf| = {delta}, spacing {spacing})")]
    LipschitzViolation {
        bound: f64,
        axis: usize,
        delta: f64,
        spacing: f64,
    },
    #[error("triangulation level {n} needs lattice spacing {required} below the surface sample spacing {available}; insufficient sampling")]
    InsufficientSampling {
        n: u32,
        required: f64,
        available: f64,
    },
    #[error("spatial dimension {0} unsupported (must be 1..=3)")]
    BadDimension(usize),
    #[error("region box invalid: {0}")]
    BadRegion(String),
    #[error("partition regions overlap (regions {0} and {1})")]
    OverlappingRegions(usize, usize),
    #[error("boost velocity must satisfy |beta| < 1, got {0}")]
    BadBoostVelocity(f64),
}

/// Axis-aligned box in ℝ^d, optionally with periodic identification of
/// opposite faces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub dim: usize,
    pub lower: [f64; MAX_DIM],
    pub upper: [f64; MAX_DIM],
    pub periodic: bool,
}

impl Domain {
    pub fn new(
        dim: usize,
        lower: [f64; MAX_DIM],
        upper: [f64; MAX_DIM],
        periodic: bool,
    ) -> Result<Self, GeometryError> {
        if dim == 0 || dim > MAX_DIM {
            return Err(GeometryError::BadDimension(dim));
        }
        for axis in 0..dim {
            if !(upper[axis] > lower[axis]) {
                return Err(GeometryError::BadRegion(format!(
                    "axis {axis}: upper {} must exceed lower {}",
                    upper[axis], lower[axis]
                )));
            }
        }
        Ok(Self {
            dim,
            lower,
            upper,
            periodic,
        })
    }

    /// 1-dimensional interval domain.
    pub fn line(lower: f64, upper: f64, periodic: bool) -> Self {
        Self::new(1, [lower, 0.0, 0.0], [upper, 0.0, 0.0], periodic).expect("valid interval")
    }

    pub fn span(&self, axis: usize) -> f64 {
        self.upper[axis] - self.lower[axis]
    }

    /// Squared spatial distance; shortest-image convention on periodic domains.
    pub fn dist2(&self, a: &[f64], b: &[f64]) -> f64 {
        let mut acc = 0.0;
        for axis in 0..self.dim {
            let mut d = a[axis] - b[axis];
            if self.periodic {
                let p = self.span(axis);
                d -= (d / p).round() * p;
            }
            acc += d * d;
        }
        acc
    }

    pub fn dist(&self, a: &[f64], b: &[f64]) -> f64 {
        self.dist2(a, b).sqrt()
    }

    pub fn approx_eq(&self, other: &Domain) -> bool {
        if self.dim != other.dim || self.periodic != other.periodic {
            return false;
        }
        (0..self.dim).all(|axis| {
            (self.lower[axis] - other.lower[axis]).abs() < FP_SLACK
                && (self.upper[axis] - other.upper[axis]).abs() < FP_SLACK
        })
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        (0..self.dim)
            .all(|axis| x[axis] >= self.lower[axis] - tol && x[axis] <= self.upper[axis] + tol)
    }
}

/// A point of Minkowski space-time: time coordinate plus d spatial
/// coordinates (unused slots are zero).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpacetimePoint {
    pub t: f64,
    pub x: [f64; MAX_DIM],
}

impl SpacetimePoint {
    pub fn new(t: f64, x: [f64; MAX_DIM]) -> Self {
        Self { t, x }
    }
}

/// Minkowski square s(a,b) = (Δt)² − |Δx|² with metric diag(1,−1,…,−1).
/// Negative for spacelike separation, positive for timelike.
pub fn minkowski_square(a: &SpacetimePoint, b: &SpacetimePoint, dim: usize) -> f64 {
    let dt = a.t - b.t;
    let mut dx2 = 0.0;
    for axis in 0..dim {
        let d = a.x[axis] - b.x[axis];
        dx2 += d * d;
    }
    dt * dt - dx2
}

/// Common view of a Cauchy surface as a height graph over its domain.
pub trait Surface {
    fn domain(&self) -> &Domain;
    /// Height of the surface above the spatial point `x`.
    fn height(&self, x: &[f64]) -> f64;
    fn lipschitz_bound(&self) -> f64;
    /// Natural per-axis sampling resolution for evaluation grids.
    fn sample_hint(&self) -> usize;
}
