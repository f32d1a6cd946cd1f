//! Cauchy surfaces as Lipschitz height graphs, surface comparison, and the
//! built-in surface catalog.

use serde::{Deserialize, Serialize};

use super::heightfield::HeightField;
use super::{Domain, GeometryError, Surface, FP_SLACK, MAX_DIM, SUP_TOL};

/// A continuum spacelike surface given as the graph of a piecewise-linear
/// height function with Lipschitz constant strictly below 1.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CauchySurfaceGraph {
    field: HeightField,
    lipschitz_bound: f64,
}

impl CauchySurfaceGraph {
    /// Builds a surface from height samples, validating the Lipschitz bound
    /// on all grid-adjacent sample pairs.
    pub fn from_samples(
        domain: Domain,
        cells: [usize; MAX_DIM],
        values: Vec<f64>,
        lipschitz_bound: f64,
    ) -> Result<Self, GeometryError> {
        let field = HeightField::from_samples(domain, cells, values)?;
        field.validate_lipschitz(lipschitz_bound)?;
        Ok(Self {
            field,
            lipschitz_bound,
        })
    }

    pub fn from_fn(
        domain: Domain,
        cells: [usize; MAX_DIM],
        lipschitz_bound: f64,
        f: impl Fn(&[f64]) -> f64,
    ) -> Result<Self, GeometryError> {
        let field = HeightField::from_fn(domain, cells, f)?;
        field.validate_lipschitz(lipschitz_bound)?;
        Ok(Self {
            field,
            lipschitz_bound,
        })
    }

    pub fn field(&self) -> &HeightField {
        &self.field
    }

    /// Re-checks the Lipschitz invariant; deserialized surfaces must pass
    /// through here before use.
    pub fn revalidate(&self) -> Result<(), GeometryError> {
        self.field.validate_lipschitz(self.lipschitz_bound)
    }

    /// The surface lowered by `t` in time: the height function becomes
    /// f − t pointwise; the Lipschitz bound is unchanged.
    pub fn lowered(&self, t: f64) -> Self {
        Self {
            field: self.field.map_values(|v| v - t),
            lipschitz_bound: self.lipschitz_bound,
        }
    }

    pub fn sample_spacing(&self) -> f64 {
        self.field.max_spacing()
    }
}

impl Surface for CauchySurfaceGraph {
    fn domain(&self) -> &Domain {
        self.field.domain()
    }

    fn height(&self, x: &[f64]) -> f64 {
        self.field.eval(x)
    }

    fn lipschitz_bound(&self) -> f64 {
        self.lipschitz_bound
    }

    fn sample_hint(&self) -> usize {
        (0..self.field.domain().dim)
            .map(|a| self.field.cells()[a])
            .max()
            .unwrap_or(1)
    }
}

/// Lowers every point of the surface by `t` in time.
pub fn lower_surface(sigma: &CauchySurfaceGraph, t: f64) -> CauchySurfaceGraph {
    sigma.lowered(t)
}

fn per_axis_cap(dim: usize) -> usize {
    match dim {
        1 => 1 << 17,
        2 => 1 << 11,
        _ => 1 << 7,
    }
}

fn grid_iter(domain: &Domain, per_axis: usize, mut visit: impl FnMut(&[f64])) {
    let dim = domain.dim;
    let nodes_per_axis = if domain.periodic {
        per_axis
    } else {
        per_axis + 1
    };
    let total = nodes_per_axis.pow(dim as u32);
    let mut x = [0.0f64; MAX_DIM];
    for flat in 0..total {
        let mut rem = flat;
        for axis in 0..dim {
            let i = rem % nodes_per_axis;
            rem /= nodes_per_axis;
            x[axis] = domain.lower[axis] + i as f64 * (domain.span(axis) / per_axis as f64);
        }
        visit(&x[..dim]);
    }
}

fn sup_diff_on_grid(a: &dyn Surface, b: &dyn Surface, per_axis: usize) -> f64 {
    let mut sup = 0.0f64;
    grid_iter(a.domain(), per_axis, |x| {
        sup = sup.max((a.height(x) - b.height(x)).abs());
    });
    sup
}

/// Supremum of |f_a − f_b| over a dense evaluation grid, refined by doubling
/// until the result is stable to 1e−9 (or a per-dimension refinement cap is
/// reached).
pub fn uniform_distance(a: &dyn Surface, b: &dyn Surface) -> Result<f64, GeometryError> {
    if !a.domain().approx_eq(b.domain()) {
        return Err(GeometryError::DomainMismatch);
    }
    let cap = per_axis_cap(a.domain().dim);
    let mut per_axis = a.sample_hint().max(b.sample_hint()).max(64).min(cap);
    let mut prev = sup_diff_on_grid(a, b, per_axis);
    while per_axis < cap {
        per_axis *= 2;
        let cur = sup_diff_on_grid(a, b, per_axis);
        if (cur - prev).abs() < SUP_TOL {
            return Ok(cur.max(prev));
        }
        prev = cur;
    }
    Ok(prev)
}

/// True iff `later` lies nowhere below `earlier` on the evaluation grid.
/// For graph surfaces over a common domain this is sufficient for `later`
/// being contained in the causal future of `earlier`.
pub fn is_in_future(later: &dyn Surface, earlier: &dyn Surface) -> Result<bool, GeometryError> {
    if !later.domain().approx_eq(earlier.domain()) {
        return Err(GeometryError::DomainMismatch);
    }
    let cap = per_axis_cap(later.domain().dim);
    let per_axis = (2 * later.sample_hint().max(earlier.sample_hint())).min(cap);
    let mut ok = true;
    grid_iter(later.domain(), per_axis, |x| {
        if later.height(x) < earlier.height(x) - FP_SLACK {
            ok = false;
        }
    });
    Ok(ok)
}

/// Built-in reproducible surfaces used by experiments and tests.
pub mod catalog {
    use super::*;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    /// Flat surface at constant height.
    pub fn flat(domain: Domain, cells: usize, height: f64) -> CauchySurfaceGraph {
        CauchySurfaceGraph::from_fn(domain, [cells; MAX_DIM], 0.0, |_| height)
            .expect("flat surface is 0-Lipschitz")
    }

    /// `amplitude · sin(2π x / span)` summed over the spatial axes. With the
    /// default amplitude 0.3 on a 2π-periodic axis the slope bound is 0.3.
    pub fn sine(
        domain: Domain,
        cells: usize,
        amplitude: f64,
    ) -> Result<CauchySurfaceGraph, GeometryError> {
        let dim = domain.dim;
        let mut bound = 0.0;
        let mut waves = [0.0f64; MAX_DIM];
        for axis in 0..dim {
            waves[axis] = std::f64::consts::TAU / domain.span(axis);
            bound += amplitude.abs() * waves[axis];
        }
        CauchySurfaceGraph::from_fn(domain, [cells; MAX_DIM], bound, move |x| {
            (0..dim).map(|a| amplitude * (waves[a] * x[a]).sin()).sum()
        })
    }

    /// A smooth compact bump centred in the domain.
    pub fn bump(
        domain: Domain,
        cells: usize,
        height: f64,
    ) -> Result<CauchySurfaceGraph, GeometryError> {
        let dim = domain.dim;
        let mut centre = [0.0f64; MAX_DIM];
        let mut radius = f64::INFINITY;
        for axis in 0..dim {
            centre[axis] = 0.5 * (domain.lower[axis] + domain.upper[axis]);
            radius = radius.min(0.45 * domain.span(axis));
        }
        // cos² profile: max slope = height·π/(2·radius).
        let bound = (height.abs() * std::f64::consts::PI / (2.0 * radius)).min(0.999);
        CauchySurfaceGraph::from_fn(domain, [cells; MAX_DIM], bound, move |x| {
            let mut r2 = 0.0;
            for axis in 0..dim {
                let d = x[axis] - centre[axis];
                r2 += d * d;
            }
            let r = r2.sqrt();
            if r >= radius {
                0.0
            } else {
                let c = (std::f64::consts::FRAC_PI_2 * r / radius).cos();
                height * c * c
            }
        })
    }

    /// Seeded random superposition of low Fourier modes on a periodic
    /// domain, normalized so the analytic gradient bound equals `bound`.
    pub fn random_lipschitz(
        domain: Domain,
        cells: usize,
        bound: f64,
        seed: u64,
    ) -> Result<CauchySurfaceGraph, GeometryError> {
        assert!(
            domain.periodic,
            "random surface catalog requires a periodic domain"
        );
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let dim = domain.dim;
        let modes = 6;
        let mut amps = Vec::with_capacity(modes);
        let mut grad_total = 0.0;
        for _ in 0..modes {
            let mut k = [0.0f64; MAX_DIM];
            let mut knorm2 = 0.0;
            for axis in 0..dim {
                let harmonics = rng.gen_range(-3i32..=3);
                k[axis] = harmonics as f64 * std::f64::consts::TAU / domain.span(axis);
                knorm2 += k[axis] * k[axis];
            }
            if knorm2 == 0.0 {
                k[0] = std::f64::consts::TAU / domain.span(0);
                knorm2 = k[0] * k[0];
            }
            let amp: f64 = rng.gen_range(0.2..1.0);
            let phase: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            grad_total += amp * knorm2.sqrt();
            amps.push((amp, phase, k));
        }
        let scale = bound / grad_total;
        CauchySurfaceGraph::from_fn(domain, [cells; MAX_DIM], bound, move |x| {
            amps.iter()
                .map(|(amp, phase, k)| {
                    let arg: f64 = (0..dim).map(|a| k[a] * x[a]).sum::<f64>() + phase;
                    scale * amp * arg.sin()
                })
                .sum()
        })
    }
}
