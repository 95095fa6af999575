//! Rectangular grids, nodal and face-centered fields, conservative difference
//! operators, trapezoid quadrature, and set-measure utilities.
//!
//! Gradients live on faces (first differences), divergences on nodes, so the
//! pair satisfies a summation-by-parts identity exactly for fields vanishing
//! on the boundary. Quadrature weights are tensor-product trapezoid weights
//! and sum to the domain volume.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;
use crate::{Error, Result};

/// Uniform tensor lattice on a box in 1D or 2D, homogeneous Dirichlet boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    dim: usize,
    n: [usize; 2],
    extent: [f64; 2],
    h: [f64; 2],
}

impl Grid {
    /// Isotropic lattice: `n` nodes and physical length `extent` along every axis.
    pub fn new(dim: usize, n: usize, extent: f64) -> Result<Self> {
        Self::with_shape(dim, [n, n], [extent, extent])
    }

    /// Lattice with per-axis node counts and extents (second entries ignored in 1D).
    pub fn with_shape(dim: usize, n: [usize; 2], extent: [f64; 2]) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidDimension(dim));
        }
        let mut nn = [n[0], 1];
        let mut ee = [extent[0], 0.0];
        let mut hh = [0.0, 0.0];
        if dim == 2 {
            nn[1] = n[1];
            ee[1] = extent[1];
        }
        for axis in 0..dim {
            if nn[axis] < 3 {
                return Err(Error::TooFewNodes(nn[axis]));
            }
            if !(ee[axis] > 0.0) || !ee[axis].is_finite() {
                return Err(Error::InvalidExtent(ee[axis]));
            }
            hh[axis] = ee[axis] / (nn[axis] - 1) as f64;
        }
        Ok(Self { dim, n: nn, extent: ee, h: hh })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Nodes along `axis`.
    pub fn n(&self, axis: usize) -> usize {
        self.n[axis]
    }

    pub fn extent(&self, axis: usize) -> f64 {
        self.extent[axis]
    }

    /// Spacing along `axis`.
    pub fn h(&self, axis: usize) -> f64 {
        self.h[axis]
    }

    /// Largest spacing over the axes.
    pub fn h_max(&self) -> f64 {
        if self.dim == 2 {
            self.h[0].max(self.h[1])
        } else {
            self.h[0]
        }
    }

    pub fn node_count(&self) -> usize {
        self.n[0] * self.n[1]
    }

    /// Volume of one full cell, h^dim for the isotropic case.
    pub fn cell_volume(&self) -> f64 {
        if self.dim == 2 {
            self.h[0] * self.h[1]
        } else {
            self.h[0]
        }
    }

    /// Faces normal to `axis`.
    pub fn face_count(&self, axis: usize) -> usize {
        match (self.dim, axis) {
            (1, 0) => self.n[0] - 1,
            (2, 0) => (self.n[0] - 1) * self.n[1],
            (2, 1) => self.n[0] * (self.n[1] - 1),
            _ => 0,
        }
    }

    #[inline]
    pub fn node_index(&self, i: usize, j: usize) -> usize {
        j * self.n[0] + i
    }

    #[inline]
    pub fn node_ij(&self, idx: usize) -> (usize, usize) {
        (idx % self.n[0], idx / self.n[0])
    }

    pub fn node_coords(&self, idx: usize) -> [f64; 2] {
        let (i, j) = self.node_ij(idx);
        let y = if self.dim == 2 { j as f64 * self.h[1] } else { 0.0 };
        [i as f64 * self.h[0], y]
    }

    #[inline]
    pub fn is_boundary(&self, idx: usize) -> bool {
        let (i, j) = self.node_ij(idx);
        i == 0 || i == self.n[0] - 1 || (self.dim == 2 && (j == 0 || j == self.n[1] - 1))
    }

    /// Trapezoid quadrature weight of a node: cell volume, halved once per
    /// boundary-touching axis.
    pub fn quad_weight(&self, idx: usize) -> f64 {
        let (i, j) = self.node_ij(idx);
        let mut w = self.h[0] * if i == 0 || i == self.n[0] - 1 { 0.5 } else { 1.0 };
        if self.dim == 2 {
            w *= self.h[1] * if j == 0 || j == self.n[1] - 1 { 0.5 } else { 1.0 };
        }
        w
    }

    /// Indices of the 2·dim lattice neighbors of an interior node.
    pub fn neighbors(&self, idx: usize) -> [usize; 4] {
        let nx = self.n[0];
        let mut nb = [idx - 1, idx + 1, idx, idx];
        if self.dim == 2 {
            nb[2] = idx - nx;
            nb[3] = idx + nx;
        }
        nb
    }

    pub fn boundary_mask(&self) -> RegionMask {
        RegionMask::from_fn(self, |idx| self.is_boundary(idx))
    }

    pub fn interior_mask(&self) -> RegionMask {
        RegionMask::from_fn(self, |idx| !self.is_boundary(idx))
    }

    /// Interior node indices in lexicographic order.
    pub fn interior_nodes(&self) -> Vec<usize> {
        (0..self.node_count()).filter(|&i| !self.is_boundary(i)).collect()
    }
}

pub(crate) fn check_same_grid(a: &Grid, b: &Grid) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}

/// One real value per node.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: &Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.node_count() {
            return Err(Error::LengthMismatch { expected: grid.node_count(), got: values.len() });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { grid: grid.clone(), values })
    }

    pub fn constant(grid: &Grid, c: f64) -> Self {
        assert!(c.is_finite());
        Self { grid: grid.clone(), values: vec![c; grid.node_count()] }
    }

    /// Sample a coordinate function at the nodes; rejects non-finite samples.
    pub fn from_fn(grid: &Grid, mut f: impl FnMut(f64, f64) -> f64) -> Result<Self> {
        let values = (0..grid.node_count())
            .map(|idx| {
                let [x, y] = grid.node_coords(idx);
                f(x, y)
            })
            .collect();
        Self::new(grid, values)
    }

    pub(crate) fn from_values_unchecked(grid: &Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.node_count());
        Self { grid: grid.clone(), values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Nodewise map; the result must stay finite.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(&self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        check_same_grid(&self.grid, &other.grid)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Self::new(&self.grid, values)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().fold(f64::INFINITY, |m, &v| m.min(v))
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v))
    }

    /// Trapezoid quadrature over the masked nodes.
    pub fn integrate(&self, region: &RegionMask) -> f64 {
        assert_eq!(self.grid, region.grid, "field and mask on different grids");
        let mut acc = 0.0;
        for (idx, &v) in self.values.iter().enumerate() {
            if region.mask[idx] {
                acc += v * self.grid.quad_weight(idx);
            }
        }
        acc
    }

    /// Integral of |self - other| over the whole domain.
    pub fn l1_distance(&self, other: &Self) -> Result<f64> {
        check_same_grid(&self.grid, &other.grid)?;
        let mut acc = 0.0;
        for idx in 0..self.values.len() {
            acc += (self.values[idx] - other.values[idx]).abs() * self.grid.quad_weight(idx);
        }
        Ok(acc)
    }

    pub fn linf_distance(&self, other: &Self) -> Result<f64> {
        check_same_grid(&self.grid, &other.grid)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    /// Face-centered first differences along each axis.
    pub fn gradient(&self) -> VectorField {
        let g = &self.grid;
        let nx = g.n[0];
        let ny = g.n[1];
        let mut fx = vec![0.0; g.face_count(0)];
        for j in 0..ny {
            for i in 0..nx - 1 {
                let a = self.values[g.node_index(i, j)];
                let b = self.values[g.node_index(i + 1, j)];
                fx[j * (nx - 1) + i] = (b - a) / g.h[0];
            }
        }
        let mut fy = Vec::new();
        if g.dim == 2 {
            fy = vec![0.0; g.face_count(1)];
            for j in 0..ny - 1 {
                for i in 0..nx {
                    let a = self.values[g.node_index(i, j)];
                    let b = self.values[g.node_index(i, j + 1)];
                    fy[j * nx + i] = (b - a) / g.h[1];
                }
            }
        }
        VectorField { grid: g.clone(), comp: [fx, fy] }
    }
}

/// Face-centered vector field: one component per face and axis.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    grid: Grid,
    comp: [Vec<f64>; 2],
}

impl VectorField {
    pub fn new(grid: &Grid, comp: [Vec<f64>; 2]) -> Result<Self> {
        for axis in 0..grid.dim() {
            if comp[axis].len() != grid.face_count(axis) {
                return Err(Error::LengthMismatch {
                    expected: grid.face_count(axis),
                    got: comp[axis].len(),
                });
            }
            if let Some(index) = comp[axis].iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite { index });
            }
        }
        Ok(Self { grid: grid.clone(), comp })
    }

    pub(crate) fn from_components_unchecked(grid: &Grid, comp: [Vec<f64>; 2]) -> Self {
        Self { grid: grid.clone(), comp }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn component(&self, axis: usize) -> &[f64] {
        &self.comp[axis]
    }

    /// Node-centered divergence; zero on boundary nodes (which are flagged by
    /// the grid's boundary mask rather than carried here).
    pub fn divergence(&self) -> ScalarField {
        let g = &self.grid;
        let nx = g.n[0];
        let mut out = vec![0.0; g.node_count()];
        for idx in 0..g.node_count() {
            if g.is_boundary(idx) {
                continue;
            }
            let (i, j) = g.node_ij(idx);
            let mut d = (self.comp[0][j * (nx - 1) + i] - self.comp[0][j * (nx - 1) + i - 1]) / g.h[0];
            if g.dim == 2 {
                d += (self.comp[1][j * nx + i] - self.comp[1][(j - 1) * nx + i]) / g.h[1];
            }
            out[idx] = d;
        }
        ScalarField::from_values_unchecked(g, out)
    }

    /// Euclidean magnitude of the vector field averaged back to nodes.
    pub fn magnitude_at_nodes(&self) -> ScalarField {
        let g = &self.grid;
        let nx = g.n[0];
        let ny = g.n[1];
        let mut out = vec![0.0; g.node_count()];
        for idx in 0..g.node_count() {
            let (i, j) = g.node_ij(idx);
            let mut gx = 0.0;
            let mut cx = 0.0;
            if i > 0 {
                gx += self.comp[0][j * (nx - 1) + i - 1];
                cx += 1.0;
            }
            if i < nx - 1 {
                gx += self.comp[0][j * (nx - 1) + i];
                cx += 1.0;
            }
            gx /= cx;
            let mut gy = 0.0;
            if g.dim == 2 {
                let mut cy = 0.0;
                if j > 0 {
                    gy += self.comp[1][(j - 1) * nx + i];
                    cy += 1.0;
                }
                if j < ny - 1 {
                    gy += self.comp[1][j * nx + i];
                    cy += 1.0;
                }
                gy /= cy;
            }
            out[idx] = math::sqrt(gx * gx + gy * gy);
        }
        ScalarField::from_values_unchecked(g, out)
    }
}

/// Per-node boolean set.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionMask {
    grid: Grid,
    mask: Vec<bool>,
}

impl RegionMask {
    pub fn from_fn(grid: &Grid, pred: impl FnMut(usize) -> bool) -> Self {
        Self { grid: grid.clone(), mask: (0..grid.node_count()).map(pred).collect() }
    }

    pub fn all(grid: &Grid) -> Self {
        Self::from_fn(grid, |_| true)
    }

    pub fn empty(grid: &Grid) -> Self {
        Self::from_fn(grid, |_| false)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.mask
    }

    pub fn contains(&self, idx: usize) -> bool {
        self.mask[idx]
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    /// Nodewise exclusive-or.
    pub fn symmetric_difference(&self, other: &Self) -> Result<Self> {
        check_same_grid(&self.grid, &other.grid)?;
        let mask = self.mask.iter().zip(&other.mask).map(|(a, b)| a ^ b).collect();
        Ok(Self { grid: self.grid.clone(), mask })
    }

    pub fn intersection(&self, other: &Self) -> Result<Self> {
        check_same_grid(&self.grid, &other.grid)?;
        let mask = self.mask.iter().zip(&other.mask).map(|(a, b)| *a && *b).collect();
        Ok(Self { grid: self.grid.clone(), mask })
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        check_same_grid(&self.grid, &other.grid)?;
        let mask = self.mask.iter().zip(&other.mask).map(|(a, b)| *a || *b).collect();
        Ok(Self { grid: self.grid.clone(), mask })
    }

    pub fn complement(&self) -> Self {
        Self { grid: self.grid.clone(), mask: self.mask.iter().map(|b| !b).collect() }
    }

    /// Grow the set by `steps` lattice neighbors.
    pub fn dilate(&self, steps: usize) -> Self {
        let g = &self.grid;
        let nx = g.n[0];
        let ny = g.n[1];
        let mut cur = self.mask.clone();
        for _ in 0..steps {
            let mut next = cur.clone();
            for idx in 0..cur.len() {
                if !cur[idx] {
                    continue;
                }
                let (i, j) = g.node_ij(idx);
                if i > 0 {
                    next[idx - 1] = true;
                }
                if i < nx - 1 {
                    next[idx + 1] = true;
                }
                if g.dim == 2 {
                    if j > 0 {
                        next[idx - nx] = true;
                    }
                    if j < ny - 1 {
                        next[idx + nx] = true;
                    }
                }
            }
            cur = next;
        }
        Self { grid: g.clone(), mask: cur }
    }

    /// Quadrature measure of the set.
    pub fn measure(&self) -> f64 {
        let mut acc = 0.0;
        for (idx, &b) in self.mask.iter().enumerate() {
            if b {
                acc += self.grid.quad_weight(idx);
            }
        }
        acc
    }
}
