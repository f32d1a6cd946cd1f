//! Triangular surfaces: piecewise-flat spacelike surfaces built from Kuhn
//! subdivisions of a spatial lattice, and their construction from a graph
//! surface by the lower-and-lift rule.

use serde::{Deserialize, Serialize};

use super::heightfield::HeightField;
use super::surface::CauchySurfaceGraph;
use super::{minkowski_square, Domain, GeometryError, SpacetimePoint, Surface, FP_SLACK, MAX_DIM};

/// A non-degenerate spacelike d-simplex given by its d+1 space-time vertices.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Simplex {
    pub dim: usize,
    pub vertices: [SpacetimePoint; MAX_DIM + 1],
}

impl Simplex {
    pub fn new(dim: usize, vertices: [SpacetimePoint; MAX_DIM + 1]) -> Self {
        Self { dim, vertices }
    }

    pub fn vertex_count(&self) -> usize {
        self.dim + 1
    }

    /// Every vertex pair must be mutually spacelike: Minkowski square < 0.
    pub fn is_spacelike(&self) -> bool {
        for i in 0..self.vertex_count() {
            for j in (i + 1)..self.vertex_count() {
                if minkowski_square(&self.vertices[i], &self.vertices[j], self.dim) >= 0.0 {
                    return false;
                }
            }
        }
        true
    }

    /// Affine independence of the spatial projections of the vertices.
    pub fn is_nondegenerate(&self) -> bool {
        let d = self.dim;
        let mut m = [[0.0f64; MAX_DIM]; MAX_DIM];
        let mut scale = 0.0f64;
        for i in 0..d {
            for axis in 0..d {
                m[i][axis] = self.vertices[i + 1].x[axis] - self.vertices[0].x[axis];
                scale = scale.max(m[i][axis].abs());
            }
        }
        det(&m, d).abs() > 1e-12 * scale.powi(d as i32).max(1e-300)
    }

    /// Euclidean norm of the affine height gradient over the spatial
    /// projection of the simplex.
    pub fn gradient_norm(&self) -> f64 {
        let d = self.dim;
        let mut m = [[0.0f64; MAX_DIM]; MAX_DIM];
        let mut rhs = [0.0f64; MAX_DIM];
        for i in 0..d {
            for axis in 0..d {
                m[i][axis] = self.vertices[i + 1].x[axis] - self.vertices[0].x[axis];
            }
            rhs[i] = self.vertices[i + 1].t - self.vertices[0].t;
        }
        let g = solve(&mut m, &mut rhs, d);
        (0..d).map(|a| g[a] * g[a]).sum::<f64>().sqrt()
    }

    /// Largest spatial distance between two vertices.
    pub fn spatial_diameter(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.vertex_count() {
            for j in (i + 1)..self.vertex_count() {
                let mut d2 = 0.0;
                for axis in 0..self.dim {
                    let d = self.vertices[i].x[axis] - self.vertices[j].x[axis];
                    d2 += d * d;
                }
                worst = worst.max(d2.sqrt());
            }
        }
        worst
    }
}

fn det(m: &[[f64; MAX_DIM]; MAX_DIM], d: usize) -> f64 {
    match d {
        1 => m[0][0],
        2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
        3 => {
            m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
        }
        _ => unreachable!("dim is 1..=3"),
    }
}

/// Gaussian elimination with partial pivoting for the d×d gradient system.
fn solve(m: &mut [[f64; MAX_DIM]; MAX_DIM], rhs: &mut [f64; MAX_DIM], d: usize) -> [f64; MAX_DIM] {
    for col in 0..d {
        let mut pivot = col;
        for row in (col + 1)..d {
            if m[row][col].abs() > m[pivot][col].abs() {
                pivot = row;
            }
        }
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        let p = m[col][col];
        for row in (col + 1)..d {
            let f = m[row][col] / p;
            for c in col..d {
                m[row][c] -= f * m[col][c];
            }
            rhs[row] -= f * rhs[col];
        }
    }
    let mut g = [0.0f64; MAX_DIM];
    for col in (0..d).rev() {
        let mut acc = rhs[col];
        for c in (col + 1)..d {
            acc -= m[col][c] * g[c];
        }
        g[col] = acc / m[col][col];
    }
    g
}

fn permutations(d: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut items: Vec<usize> = (0..d).collect();
    heap_permute(&mut items, d, &mut out);
    out.sort();
    out
}

fn heap_permute(items: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k == 1 {
        out.push(items.clone());
        return;
    }
    for i in 0..k {
        heap_permute(items, k - 1, out);
        if k % 2 == 0 {
            items.swap(i, k - 1);
        } else {
            items.swap(0, k - 1);
        }
    }
}

/// A surface tiled by spacelike simplices with disjoint projected interiors,
/// one Kuhn subdivision (d! simplices) per lattice cell. Heights of the
/// induced graph agree exactly with the simplex affine functions.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TriangularSurface {
    field: HeightField,
    simplices: Vec<Simplex>,
    simplices_per_cell: usize,
    lipschitz_bound: f64,
}

impl TriangularSurface {
    /// Builds the surface from lattice node heights; simplices are generated
    /// by Kuhn subdivision. No spacelikeness validation happens here — use
    /// [`TriangularSurface::is_cauchy`].
    pub fn from_node_heights(
        domain: Domain,
        cells: [usize; MAX_DIM],
        node_heights: Vec<f64>,
        lipschitz_bound: f64,
    ) -> Result<Self, GeometryError> {
        let field = HeightField::from_samples(domain, cells, node_heights)?;
        let simplices = kuhn_simplices(&field);
        let simplices_per_cell = factorial(field.domain().dim);
        Ok(Self {
            field,
            simplices,
            simplices_per_cell,
            lipschitz_bound,
        })
    }

    pub fn simplices(&self) -> &[Simplex] {
        &self.simplices
    }

    /// The simplices whose spatial projections tile the given lattice cell
    /// (the adjacency map: simplices are stored cell-contiguously).
    pub fn simplices_in_cell(&self, cell_flat: usize) -> &[Simplex] {
        let start = cell_flat * self.simplices_per_cell;
        &self.simplices[start..start + self.simplices_per_cell]
    }

    pub fn cell_count(&self) -> usize {
        self.simplices.len() / self.simplices_per_cell
    }

    pub fn field(&self) -> &HeightField {
        &self.field
    }

    /// The Cauchy property reduces, for graphs of piecewise-affine functions,
    /// to a global Lipschitz constant ≤ 1 together with spacelikeness of
    /// every simplex: a causal curve then crosses the graph exactly once by
    /// the monotone height-difference argument.
    pub fn is_cauchy(&self) -> bool {
        self.simplices.iter().all(|s| {
            s.is_spacelike() && s.is_nondegenerate() && s.gradient_norm() <= 1.0 + FP_SLACK
        })
    }
}

impl Surface for TriangularSurface {
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

fn factorial(d: usize) -> usize {
    (1..=d).product()
}

fn kuhn_simplices(field: &HeightField) -> Vec<Simplex> {
    let domain = field.domain();
    let d = domain.dim;
    let perms = permutations(d);
    let cells = field.cells();
    let total: usize = (0..d).map(|a| cells[a]).product();
    let mut simplices = Vec::with_capacity(total * perms.len());
    let mut cell_idx = [0i64; MAX_DIM];
    for flat in 0..total {
        let mut rem = flat;
        for axis in 0..d {
            cell_idx[axis] = (rem % cells[axis]) as i64;
            rem /= cells[axis];
        }
        for perm in &perms {
            let mut vertices = [SpacetimePoint::new(0.0, [0.0; MAX_DIM]); MAX_DIM + 1];
            let mut corner = cell_idx;
            for step in 0..=d {
                if step > 0 {
                    corner[perm[step - 1]] += 1;
                }
                let mut x = [0.0f64; MAX_DIM];
                for axis in 0..d {
                    // Unwrapped coordinates keep seam simplices geometrically
                    // contiguous; heights wrap through the node index.
                    x[axis] = domain.lower[axis] + corner[axis] as f64 * field.spacing(axis);
                }
                vertices[step] = SpacetimePoint::new(field.node_value(&corner[..d]), x);
            }
            simplices.push(Simplex::new(d, vertices));
        }
    }
    simplices
}

/// Returns true iff the triangular surface satisfies the Cauchy criterion.
pub fn is_cauchy(upsilon: &TriangularSurface) -> bool {
    upsilon.is_cauchy()
}

/// Builds the level-n triangular approximation of `sigma`: lower the surface
/// by 2ε (ε = 3⁻ⁿ), lay a spatial lattice of spacing ≤ ε/√d, Kuhn-subdivide
/// each cell into d! simplices and lift the lattice nodes onto the lowered
/// surface. The result lies strictly in the past of `sigma` at uniform
/// distance below 3ε.
pub fn build_triangulation(
    sigma: &CauchySurfaceGraph,
    n: u32,
) -> Result<TriangularSurface, GeometryError> {
    let domain = sigma.domain().clone();
    let d = domain.dim;
    let eps = 3f64.powi(-(n as i32));
    let target = eps / (d as f64).sqrt();
    let available = sigma.sample_spacing();
    if target < available - FP_SLACK {
        return Err(GeometryError::InsufficientSampling {
            n,
            required: target,
            available,
        });
    }
    let lowered = sigma.lowered(2.0 * eps);
    let mut cells = [1usize; MAX_DIM];
    for axis in 0..d {
        cells[axis] = (domain.span(axis) / target).ceil().max(1.0) as usize;
    }
    let field = HeightField::from_fn(domain.clone(), cells, |x| lowered.height(x))?;
    let surface = TriangularSurface {
        simplices: kuhn_simplices(&field),
        simplices_per_cell: factorial(d),
        field,
        lipschitz_bound: sigma.lipschitz_bound(),
    };
    // The construction guarantees both properties for Lipschitz < 1 inputs;
    // verify rather than trust the float arithmetic.
    for s in surface.simplices() {
        debug_assert!(s.spatial_diameter() <= eps * (1.0 + 1e-9));
        if !s.is_spacelike() {
            return Err(GeometryError::BadRegion(
                "triangulation produced a non-spacelike simplex".into(),
            ));
        }
    }
    Ok(surface)
}
