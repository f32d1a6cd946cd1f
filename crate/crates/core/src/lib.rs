//! Simulation and verification library for detection statistics on curved
//! Cauchy surfaces.
//!
//! The crate has four layers:
//!
//! * [`geometry`] — continuum Minkowski geometry in 1+d dimensions
//!   (d ∈ {1,2,3}): Cauchy surfaces as Lipschitz height graphs, triangular
//!   approximations, grown/shrunk sets, and boosts.
//! * [`config`] — the exact set algebra of finite particle configurations
//!   over lattice sites (∃/∅/∀ atoms, outcome-compatibility sets,
//!   squeeze sets).
//! * [`lattice`] — a concrete finite model with exact interaction and
//!   propagation locality: a brickwork circuit of number-conserving
//!   two-site gates, with gate-respecting cuts as Cauchy surfaces.
//! * [`detection`] — flat Born/collapse rules, the sequential and parallel
//!   detection processes, curved Born distributions, squeeze bounds, and
//!   convergence experiments.

pub mod config;
pub mod detection;
pub mod geometry;
pub mod lattice;

pub use config::{ConfigSet, Configuration, OutcomeMatrix, OutcomeVector, SiteSet};
pub use geometry::{
    CauchySurfaceGraph, Domain, Region, Simplex, SpatialBox, Surface, TriangularSurface,
};
pub use lattice::{GateCircuit, LatticeCut, StateVector};
