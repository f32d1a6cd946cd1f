//! Lorentz boosts of graph surfaces along the first spatial axis, and the
//! band check used for frame independence of uniform approximation.

use serde::{Deserialize, Serialize};

use super::surface::CauchySurfaceGraph;
use super::{Domain, GeometryError, Surface, MAX_DIM};

/// A boosted graph surface. Heights are evaluated exactly by inverting the
/// monotone map ξ ↦ γ(ξ + β f(ξ)) on the original surface, so no resampling
/// error enters.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoostedSurface {
    base: CauchySurfaceGraph,
    beta: f64,
    gamma: f64,
    /// Spatial extent of one boosted period (periodic base domains only).
    domain: Domain,
}

impl BoostedSurface {
    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Solves γ(ξ + β f(ξ, x⊥)) = x₁′ for ξ. The map is strictly increasing
    /// because |β|·Lip(f) < 1, so bisection on the exact piecewise-linear
    /// surface converges to machine precision.
    fn solve_source_x1(&self, x1_target: f64, perp: &[f64]) -> f64 {
        let f_bound = self
            .base
            .field()
            .values()
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()));
        let centre = x1_target / self.gamma;
        let pad = self.beta.abs() * f_bound + 1.0;
        let mut lo = centre - pad;
        let mut hi = centre + pad;
        let psi = |xi: f64| {
            let mut x = [0.0f64; MAX_DIM];
            x[0] = xi;
            for (i, &p) in perp.iter().enumerate() {
                x[i + 1] = p;
            }
            self.gamma * (xi + self.beta * self.base.height(&x[..self.base.domain().dim]))
        };
        debug_assert!(psi(lo) <= x1_target && psi(hi) >= x1_target);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if psi(mid) < x1_target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

impl Surface for BoostedSurface {
    fn domain(&self) -> &Domain {
        &self.domain
    }

    fn height(&self, x: &[f64]) -> f64 {
        let xi = self.solve_source_x1(x[0], &x[1..]);
        let mut src = [0.0f64; MAX_DIM];
        src[0] = xi;
        for (i, &p) in x[1..].iter().enumerate() {
            src[i + 1] = p;
        }
        let f = self.base.height(&src[..self.base.domain().dim]);
        self.gamma * (f + self.beta * xi)
    }

    fn lipschitz_bound(&self) -> f64 {
        // Velocity-addition: boosting slope c by β gives (c+β)/(1+cβ) < 1.
        let c = self.base.lipschitz_bound();
        ((c + self.beta.abs()) / (1.0 + c * self.beta.abs())).min(0.999_999)
    }

    fn sample_hint(&self) -> usize {
        self.base.sample_hint()
    }
}

/// Boosts the surface with velocity β along the first spatial axis. The
/// result remains a graph because the Lipschitz bound is below 1.
pub fn boost_surface(
    sigma: &CauchySurfaceGraph,
    beta: f64,
) -> Result<BoostedSurface, GeometryError> {
    if !(-1.0..1.0).contains(&beta) || beta.abs() >= 1.0 {
        return Err(GeometryError::BadBoostVelocity(beta));
    }
    let gamma = 1.0 / (1.0 - beta * beta).sqrt();
    let base_domain = sigma.domain().clone();
    let mut lower = base_domain.lower;
    let mut upper = base_domain.upper;
    // The boosted footprint of one period stretches by γ along the boost
    // axis; the reported domain is descriptive (evaluation accepts any x).
    lower[0] *= gamma;
    upper[0] *= gamma;
    let domain = Domain::new(base_domain.dim, lower, upper, base_domain.periodic)?;
    Ok(BoostedSurface {
        base: sigma.clone(),
        beta,
        gamma,
        domain,
    })
}

/// Result of the boosted-band containment check.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BandReport {
    pub beta: f64,
    pub epsilon: f64,
    pub epsilon_tilde: f64,
    /// max over samples of (gap − ε̃) and (−gap); ≤ 0 within tolerance iff
    /// the boosted raised surface stays inside the open band.
    pub band_excess: f64,
    pub min_gap: f64,
    pub max_gap: f64,
    pub samples: usize,
    pub pass: bool,
}

/// Verifies that the boost of Σ + (ε,0) lies within vertical distance
/// (0, ε̃) above the boost of Σ, with ε̃ = (βγ+γ)ε and γ = (1−β²)^(−1/2).
pub fn boost_band_report(
    sigma: &CauchySurfaceGraph,
    eps: f64,
    beta: f64,
    per_axis: usize,
    tol: f64,
) -> Result<BandReport, GeometryError> {
    let boosted = boost_surface(sigma, beta)?;
    let gamma = boosted.gamma();
    let b = beta.abs();
    let epsilon_tilde = (b * gamma + gamma) * eps;
    let domain = sigma.domain().clone();
    let dim = domain.dim;
    let nodes = if domain.periodic {
        per_axis
    } else {
        per_axis + 1
    };
    let total = nodes.pow(dim as u32);
    let mut min_gap = f64::INFINITY;
    let mut max_gap = f64::NEG_INFINITY;
    for flat in 0..total {
        let mut rem = flat;
        let mut x = [0.0f64; MAX_DIM];
        for axis in 0..dim {
            let i = rem % nodes;
            rem /= nodes;
            x[axis] = domain.lower[axis] + i as f64 * (domain.span(axis) / per_axis as f64);
        }
        // Point on Σ + a_ε, boosted.
        let t = sigma.height(&x[..dim]) + eps;
        let qt = gamma * (t + beta * x[0]);
        let qx1 = gamma * (x[0] + beta * t);
        let mut q = x;
        q[0] = qx1;
        let below = {
            let mut probe = [0.0f64; MAX_DIM];
            probe[..dim].copy_from_slice(&q[..dim]);
            boosted.height(&probe[..dim])
        };
        let gap = qt - below;
        min_gap = min_gap.min(gap);
        max_gap = max_gap.max(gap);
    }
    let band_excess = (max_gap - epsilon_tilde).max(-min_gap);
    Ok(BandReport {
        beta,
        epsilon: eps,
        epsilon_tilde,
        band_excess,
        min_gap,
        max_gap,
        samples: total,
        pass: band_excess <= tol,
    })
}

/// Boolean form of [`boost_band_report`] at the default tolerance 1e−9.
pub fn boost_band_check(
    sigma: &CauchySurfaceGraph,
    eps: f64,
    beta: f64,
) -> Result<bool, GeometryError> {
    Ok(boost_band_report(sigma, eps, beta, 512, 1e-9)?.pass)
}
