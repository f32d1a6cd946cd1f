//! Detector regions on surfaces (finite unions of axis-aligned boxes) and
//! the grown/shrunk set operations between surfaces.
//!
//! Set operations are evaluated on a shared spatial grid. Grown sets are
//! reported at grid resolution with the causal-reach predicate checked
//! exactly at grid points; shrunk sets require the full (generously rounded)
//! light cone of a point to fit inside the region, so the rounding direction
//! is inward. Inclusions needed by the squeeze bounds hold grid-pointwise by
//! construction.

use serde::{Deserialize, Serialize};

use super::{Domain, GeometryError, Surface, FP_SLACK, MAX_DIM};

/// Axis-aligned closed box footprint; may be degenerate (zero width).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpatialBox {
    pub lower: [f64; MAX_DIM],
    pub upper: [f64; MAX_DIM],
}

impl SpatialBox {
    pub fn line(lower: f64, upper: f64) -> Self {
        Self {
            lower: [lower, 0.0, 0.0],
            upper: [upper, 0.0, 0.0],
        }
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        (0..x.len()).all(|a| x[a] >= self.lower[a] - tol && x[a] <= self.upper[a] + tol)
    }

    fn interior_overlaps(&self, other: &SpatialBox, dim: usize) -> bool {
        (0..dim).all(|a| {
            self.lower[a].max(other.lower[a]) + FP_SLACK < self.upper[a].min(other.upper[a])
        })
    }
}

/// Bounded detector footprint: a finite union of boxes, interpreted on a
/// surface through the spatial projection. Boundaries have measure zero
/// automatically.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub boxes: Vec<SpatialBox>,
}

impl Region {
    pub fn new(boxes: Vec<SpatialBox>) -> Self {
        Self { boxes }
    }

    pub fn single(b: SpatialBox) -> Self {
        Self { boxes: vec![b] }
    }

    pub fn interval(lower: f64, upper: f64) -> Self {
        Self::single(SpatialBox::line(lower, upper))
    }

    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.boxes.iter().any(|b| b.contains(x, tol))
    }

    pub fn validate(&self, domain: &Domain) -> Result<(), GeometryError> {
        for b in &self.boxes {
            for axis in 0..domain.dim {
                if b.lower[axis] > b.upper[axis] + FP_SLACK {
                    return Err(GeometryError::BadRegion(format!(
                        "box lower {} above upper {} on axis {axis}",
                        b.lower[axis], b.upper[axis]
                    )));
                }
                if b.lower[axis] < domain.lower[axis] - FP_SLACK
                    || b.upper[axis] > domain.upper[axis] + FP_SLACK
                {
                    return Err(GeometryError::BadRegion(
                        "box exceeds the surface domain".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    fn interior_overlaps(&self, other: &Region, dim: usize) -> bool {
        self.boxes
            .iter()
            .any(|a| other.boxes.iter().any(|b| a.interior_overlaps(b, dim)))
    }
}

/// Finitely many pairwise disjoint detector regions P_1..P_r; the remainder
/// of the surface is the implicit undetected region.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AdmissiblePartition {
    pub regions: Vec<Region>,
}

impl AdmissiblePartition {
    pub fn new(regions: Vec<Region>, domain: &Domain) -> Result<Self, GeometryError> {
        for r in &regions {
            r.validate(domain)?;
        }
        for i in 0..regions.len() {
            for j in (i + 1)..regions.len() {
                if regions[i].interior_overlaps(&regions[j], domain.dim) {
                    return Err(GeometryError::OverlappingRegions(i, j));
                }
            }
        }
        Ok(Self { regions })
    }

    pub fn len(&self) -> usize {
        self.regions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.regions.is_empty()
    }
}

/// Evaluation grid for set operations between two surfaces.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct GridSpec {
    pub per_axis: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { per_axis: 256 }
    }
}

struct EvalGrid {
    domain: Domain,
    per_axis: usize,
    points: Vec<[f64; MAX_DIM]>,
}

impl EvalGrid {
    fn build(domain: &Domain, spec: GridSpec) -> Self {
        let dim = domain.dim;
        let nodes = if domain.periodic {
            spec.per_axis
        } else {
            spec.per_axis + 1
        };
        let total = nodes.pow(dim as u32);
        let mut points = Vec::with_capacity(total);
        for flat in 0..total {
            let mut rem = flat;
            let mut x = [0.0f64; MAX_DIM];
            for axis in 0..dim {
                let i = rem % nodes;
                rem /= nodes;
                x[axis] =
                    domain.lower[axis] + i as f64 * (domain.span(axis) / spec.per_axis as f64);
            }
            points.push(x);
        }
        Self {
            domain: domain.clone(),
            per_axis: spec.per_axis,
            points,
        }
    }

    fn nodes_per_axis(&self) -> usize {
        if self.domain.periodic {
            self.per_axis
        } else {
            self.per_axis + 1
        }
    }
}

/// Reconstructs a region from marked grid points: maximal runs along axis 0
/// become closed boxes (wrapping runs on periodic domains split in two).
fn region_from_marks(grid: &EvalGrid, marks: &[bool]) -> Region {
    let dim = grid.domain.dim;
    let nodes = grid.nodes_per_axis();
    let rows = marks.len() / nodes;
    let mut boxes = Vec::new();
    for row in 0..rows {
        let base = row * nodes;
        let mut runs: Vec<(usize, usize)> = Vec::new();
        let mut start: Option<usize> = None;
        for i in 0..nodes {
            match (marks[base + i], start) {
                (true, None) => start = Some(i),
                (false, Some(s)) => {
                    runs.push((s, i - 1));
                    start = None;
                }
                _ => {}
            }
        }
        if let Some(s) = start {
            runs.push((s, nodes - 1));
        }
        // A wrap-around set on a periodic domain comes out as two runs, one
        // at each end; that is the intended box representation.
        for (s, e) in runs {
            let mut lower = grid.points[base + s];
            let mut upper = grid.points[base + e];
            for axis in 1..dim {
                lower[axis] = grid.points[base][axis];
                upper[axis] = grid.points[base][axis];
            }
            boxes.push(SpatialBox { lower, upper });
        }
    }
    Region::new(boxes)
}

/// Causal-reach predicate: some point of the footprint (sampled on the grid)
/// is timelike-or-lightlike separated from the target point.
fn reaches(y: &[f64], fy: f64, src_points: &[([f64; MAX_DIM], f64)], domain: &Domain) -> bool {
    src_points.iter().any(|(x, fx)| {
        let dt = (fy - fx).abs();
        dt * dt >= domain.dist2(&x[..domain.dim], y) - FP_SLACK
    })
}

fn footprint_samples(
    region: &Region,
    surface: &dyn Surface,
    grid: &EvalGrid,
) -> Vec<([f64; MAX_DIM], f64)> {
    grid.points
        .iter()
        .filter(|x| region.contains(&x[..grid.domain.dim], FP_SLACK))
        .map(|x| (*x, surface.height(&x[..grid.domain.dim])))
        .collect()
}

/// Grown set Gr(A, Σ′): the part of Σ′ causally reachable from A, computed at
/// grid resolution.
pub fn grow(
    a: &Region,
    sigma: &dyn Surface,
    target: &dyn Surface,
    spec: GridSpec,
) -> Result<Region, GeometryError> {
    if !sigma.domain().approx_eq(target.domain()) {
        return Err(GeometryError::DomainMismatch);
    }
    a.validate(sigma.domain())?;
    let grid = EvalGrid::build(sigma.domain(), spec);
    let src = footprint_samples(a, sigma, &grid);
    let marks: Vec<bool> = grid
        .points
        .iter()
        .map(|y| {
            let yd = &y[..grid.domain.dim];
            reaches(yd, target.height(yd), &src, &grid.domain)
        })
        .collect();
    Ok(region_from_marks(&grid, &marks))
}

/// Shrunk set Sr(A, Σ′): the points of Σ′ whose full causal shadow on Σ lies
/// inside A, computed at grid resolution with inward rounding.
pub fn shrink(
    a: &Region,
    sigma: &dyn Surface,
    target: &dyn Surface,
    spec: GridSpec,
) -> Result<Region, GeometryError> {
    if !sigma.domain().approx_eq(target.domain()) {
        return Err(GeometryError::DomainMismatch);
    }
    a.validate(sigma.domain())?;
    let grid = EvalGrid::build(sigma.domain(), spec);
    let dim = grid.domain.dim;
    let sigma_heights: Vec<f64> = grid
        .points
        .iter()
        .map(|x| sigma.height(&x[..dim]))
        .collect();
    let marks: Vec<bool> = grid
        .points
        .iter()
        .map(|y| {
            let yd = &y[..dim];
            let fy = target.height(yd);
            grid.points.iter().zip(&sigma_heights).all(|(x, fx)| {
                let dt = (fy - fx).abs();
                let inside_cone = dt * dt >= grid.domain.dist2(&x[..dim], yd) - FP_SLACK;
                !inside_cone || a.contains(&x[..dim], FP_SLACK)
            })
        })
        .collect();
    Ok(region_from_marks(&grid, &marks))
}

/// Transfers an admissible partition from Σ to a triangular surface along
/// the spatial projection, which is the identity on footprints for graph
/// surfaces. Disjointness and boundedness are preserved and re-checked.
pub fn project_partition(
    p: &AdmissiblePartition,
    upsilon: &dyn Surface,
) -> Result<AdmissiblePartition, GeometryError> {
    AdmissiblePartition::new(p.regions.clone(), upsilon.domain())
}
