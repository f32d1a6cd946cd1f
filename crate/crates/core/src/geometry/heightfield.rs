//! Shared piecewise-linear height interpolant on a regular grid.
//!
//! The interpolation rule is the simplicial (Kuhn) one: each grid cell is
//! split into d! simplices along coordinate-order diagonals and the value is
//! affine on each simplex. Restricted to d = 1 this is ordinary linear
//! interpolation. The same rule backs both continuum surface graphs and
//! triangular surfaces, so heights of a triangular surface agree exactly
//! with the affine functions of its simplices.

use serde::{Deserialize, Serialize};

use super::{Domain, GeometryError, FP_SLACK, MAX_DIM};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HeightField {
    domain: Domain,
    /// Cells per axis. Node count per axis is `cells` when periodic,
    /// `cells + 1` otherwise.
    cells: [usize; MAX_DIM],
    /// Row-major over nodes, axis 0 fastest.
    values: Vec<f64>,
}

impl HeightField {
    pub fn from_samples(
        domain: Domain,
        cells: [usize; MAX_DIM],
        values: Vec<f64>,
    ) -> Result<Self, GeometryError> {
        let field = Self {
            domain,
            cells,
            values,
        };
        let expect: usize = (0..field.domain.dim).map(|a| field.nodes(a)).product();
        if field.values.len() != expect {
            return Err(GeometryError::BadRegion(format!(
                "height sample count {} does not match grid ({} expected)",
                field.values.len(),
                expect
            )));
        }
        for axis in 0..field.domain.dim {
            if field.cells[axis] == 0 {
                return Err(GeometryError::BadRegion(format!(
                    "axis {axis} has zero cells"
                )));
            }
        }
        Ok(field)
    }

    pub fn from_fn(
        domain: Domain,
        cells: [usize; MAX_DIM],
        f: impl Fn(&[f64]) -> f64,
    ) -> Result<Self, GeometryError> {
        let dim = domain.dim;
        let nodes: Vec<usize> = (0..dim)
            .map(|a| {
                if domain.periodic {
                    cells[a]
                } else {
                    cells[a] + 1
                }
            })
            .collect();
        let total: usize = nodes.iter().product();
        let mut values = Vec::with_capacity(total);
        let mut idx = [0usize; MAX_DIM];
        for flat in 0..total {
            let mut rem = flat;
            for (axis, n) in nodes.iter().enumerate() {
                idx[axis] = rem % n;
                rem /= n;
            }
            let mut x = [0.0; MAX_DIM];
            for axis in 0..dim {
                x[axis] = domain.lower[axis]
                    + idx[axis] as f64 * (domain.span(axis) / cells[axis] as f64);
            }
            values.push(f(&x[..dim]));
        }
        Self::from_samples(domain, cells, values)
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn cells(&self) -> &[usize; MAX_DIM] {
        &self.cells
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.domain.span(axis) / self.cells[axis] as f64
    }

    pub fn max_spacing(&self) -> f64 {
        (0..self.domain.dim)
            .map(|a| self.spacing(a))
            .fold(0.0, f64::max)
    }

    fn nodes(&self, axis: usize) -> usize {
        if self.domain.periodic {
            self.cells[axis]
        } else {
            self.cells[axis] + 1
        }
    }

    /// Flat index of a (possibly out-of-range) node multi-index, wrapping on
    /// periodic domains and clamping otherwise.
    pub fn node_flat(&self, idx: &[i64]) -> usize {
        let mut flat = 0usize;
        let mut stride = 1usize;
        for axis in 0..self.domain.dim {
            let n = self.nodes(axis) as i64;
            let i = if self.domain.periodic {
                idx[axis].rem_euclid(n)
            } else {
                idx[axis].clamp(0, n - 1)
            };
            flat += i as usize * stride;
            stride *= n as usize;
        }
        flat
    }

    pub fn node_value(&self, idx: &[i64]) -> f64 {
        self.values[self.node_flat(idx)]
    }

    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            domain: self.domain.clone(),
            cells: self.cells,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Piecewise-linear (Kuhn) evaluation at an arbitrary spatial point.
    /// Out-of-domain points wrap on periodic domains and clamp otherwise.
    pub fn eval(&self, x: &[f64]) -> f64 {
        let dim = self.domain.dim;
        let mut cell = [0i64; MAX_DIM];
        let mut frac = [0.0f64; MAX_DIM];
        for axis in 0..dim {
            let h = self.spacing(axis);
            let mut u = (x[axis] - self.domain.lower[axis]) / h;
            let n = self.cells[axis] as f64;
            if self.domain.periodic {
                u = u.rem_euclid(n);
            } else {
                u = u.clamp(0.0, n);
            }
            let mut c = u.floor();
            if c >= n {
                c = n - 1.0;
            }
            cell[axis] = c as i64;
            frac[axis] = (u - c).clamp(0.0, 1.0);
        }
        // Sort axes by descending fractional coordinate; walk the Kuhn path.
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| frac[b].partial_cmp(&frac[a]).unwrap());
        let mut corner = cell;
        let mut prev = self.node_value(&corner[..dim]);
        let mut val = prev;
        for &axis in &order {
            corner[axis] += 1;
            let next = self.node_value(&corner[..dim]);
            val += frac[axis] * (next - prev);
            prev = next;
        }
        val
    }

    /// Largest |Δf|/spacing over axis-adjacent node pairs (the sampled
    /// Lipschitz quotient along grid edges).
    pub fn max_adjacent_quotient(&self) -> f64 {
        let dim = self.domain.dim;
        let nodes: Vec<usize> = (0..dim).map(|a| self.nodes(a)).collect();
        let total: usize = nodes.iter().product();
        let mut worst = 0.0f64;
        let mut idx = [0i64; MAX_DIM];
        for flat in 0..total {
            let mut rem = flat;
            for axis in 0..dim {
                idx[axis] = (rem % nodes[axis]) as i64;
                rem /= nodes[axis];
            }
            let here = self.values[flat];
            for axis in 0..dim {
                let last_node = idx[axis] as usize + 1 == nodes[axis];
                if !self.domain.periodic && last_node {
                    continue;
                }
                let mut nb = idx;
                nb[axis] += 1;
                let q = (self.node_value(&nb[..dim]) - here).abs() / self.spacing(axis);
                worst = worst.max(q);
            }
        }
        worst
    }

    pub fn validate_lipschitz(&self, bound: f64) -> Result<(), GeometryError> {
        if !(0.0..1.0).contains(&bound) {
            return Err(GeometryError::LipschitzBoundOutOfRange(bound));
        }
        let q = self.max_adjacent_quotient();
        if q > bound + FP_SLACK {
            // Identify an offending axis for the error report.
            let axis = 0;
            return Err(GeometryError::LipschitzViolation {
                bound,
                axis,
                delta: q * self.spacing(axis),
                spacing: self.spacing(axis),
            });
        }
        Ok(())
    }
}
