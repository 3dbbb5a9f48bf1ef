//! Uniform tensor-product grids on boxes and nodal grid functions.
//!
//! Only interior nodes are stored. Every function is implicitly extended by
//! zero to all of `R^n`, which is how the homogeneous Dirichlet condition is
//! imposed. Storage is row-major with the last axis fastest.

mod io;
mod laplace;

pub use io::{read_field, write_field, parse_field, render_field};
pub use laplace::DirichletLaplacian;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Axis-aligned box `prod_i (lower_i, upper_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxDomain<T> {
    lower: Vec<T>,
    upper: Vec<T>,
}

impl<T: Real> BoxDomain<T> {
    pub fn new(lower: Vec<T>, upper: Vec<T>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::LengthMismatch {
                expected: lower.len(),
                got: upper.len(),
            });
        }
        if lower.is_empty() {
            return Err(Error::InvalidGrid("box must have at least one axis".into()));
        }
        for (i, (&a, &b)) in lower.iter().zip(&upper).enumerate() {
            if !(a.is_finite() && b.is_finite() && a < b) {
                return Err(Error::InvalidGrid(format!("axis {i}: need lower < upper, got [{a}, {b}]")));
            }
        }
        Ok(Self { lower, upper })
    }

    /// `(0, 1)^n`.
    pub fn unit(n: usize) -> Result<Self> {
        Self::new(vec![T::zero(); n], vec![T::one(); n])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[T] {
        &self.lower
    }

    pub fn upper(&self) -> &[T] {
        &self.upper
    }

    pub fn extent(&self, axis: usize) -> T {
        self.upper[axis] - self.lower[axis]
    }
}

/// Uniform grid of interior nodes; `counts[i]` nodes along axis `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorGrid<T> {
    domain: BoxDomain<T>,
    counts: Vec<usize>,
    spacings: Vec<T>,
}

/// Builds the grid with spacings `(upper_i - lower_i) / (counts_i + 1)`.
pub fn build_grid<T: Real>(domain: BoxDomain<T>, counts: &[usize]) -> Result<TensorGrid<T>> {
    TensorGrid::new(domain, counts.to_vec())
}

impl<T: Real> TensorGrid<T> {
    pub fn new(domain: BoxDomain<T>, counts: Vec<usize>) -> Result<Self> {
        if counts.len() != domain.dim() {
            return Err(Error::LengthMismatch {
                expected: domain.dim(),
                got: counts.len(),
            });
        }
        if let Some(axis) = counts.iter().position(|&c| c == 0) {
            return Err(Error::InvalidGrid(format!("axis {axis}: node count must be positive")));
        }
        let spacings = counts
            .iter()
            .enumerate()
            .map(|(i, &c)| domain.extent(i) / T::from_usize_lossy(c + 1))
            .collect();
        Ok(Self {
            domain,
            counts,
            spacings,
        })
    }

    /// Unit cube with the same count along every axis.
    pub fn unit(n: usize, count: usize) -> Result<Self> {
        Self::new(BoxDomain::unit(n)?, vec![count; n])
    }

    pub fn dim(&self) -> usize {
        self.counts.len()
    }

    pub fn domain(&self) -> &BoxDomain<T> {
        &self.domain
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn spacings(&self) -> &[T] {
        &self.spacings
    }

    pub fn spacing(&self, axis: usize) -> T {
        self.spacings[axis]
    }

    /// Number of interior nodes.
    pub fn len(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Product of all spacings, the quadrature weight of one node.
    pub fn cell_volume(&self) -> T {
        self.spacings.iter().fold(T::one(), |acc, &d| acc * d)
    }

    /// Distance in the flat array between neighbours along `axis`.
    pub fn stride(&self, axis: usize) -> usize {
        self.counts[axis + 1..].iter().product()
    }

    /// Coordinate of the `k`-th interior node (0-based) along `axis`.
    pub fn coordinate(&self, axis: usize, k: usize) -> T {
        self.domain.lower[axis] + T::from_usize_lossy(k + 1) * self.spacings[axis]
    }

    /// Flat offsets of the first node of every grid line parallel to `axis`.
    pub fn line_starts(&self, axis: usize) -> impl Iterator<Item = usize> {
        let stride = self.stride(axis);
        let block = self.counts[axis] * stride;
        let outer: usize = self.counts[..axis].iter().product();
        (0..outer).flat_map(move |o| (0..stride).map(move |inner| o * block + inner))
    }

    /// Number of grid lines parallel to `axis`.
    pub fn line_count(&self, axis: usize) -> usize {
        self.len() / self.counts[axis]
    }

    /// Multi-index of a flat offset.
    pub fn unflatten(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for axis in (0..self.dim()).rev() {
            idx[axis] = flat % self.counts[axis];
            flat /= self.counts[axis];
        }
        idx
    }

    pub fn flatten(&self, idx: &[usize]) -> usize {
        idx.iter()
            .zip(&self.counts)
            .fold(0, |acc, (&k, &c)| acc * c + k)
    }

    /// Coordinates of the node at a flat offset.
    pub fn point(&self, flat: usize) -> Vec<T> {
        self.unflatten(flat)
            .into_iter()
            .enumerate()
            .map(|(axis, k)| self.coordinate(axis, k))
            .collect()
    }
}

/// Nodal values on the interior nodes of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction<T> {
    grid: TensorGrid<T>,
    values: Vec<T>,
}

impl<T: Real> GridFunction<T> {
    pub fn new(grid: TensorGrid<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("grid value at offset {i}")));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: TensorGrid<T>) -> Self {
        let values = vec![T::zero(); grid.len()];
        Self { grid, values }
    }

    pub fn constant(grid: TensorGrid<T>, c: T) -> Self {
        let values = vec![c; grid.len()];
        Self { grid, values }
    }

    pub fn grid(&self) -> &TensorGrid<T> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == T::zero())
    }

    pub fn scaled(&self, t: T) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| v * t).collect(),
        }
    }

    /// `self + t * other`.
    pub fn axpy(&self, t: T, other: &Self) -> Result<Self> {
        self.check_same_grid(other)?;
        Ok(Self {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| a + t * b)
                .collect(),
        })
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// Mirror image along `axis` (node `k` swaps with node `count - 1 - k`).
    pub fn reflected(&self, axis: usize) -> Self {
        let mut values = self.values.clone();
        let n = self.grid.counts[axis];
        let stride = self.grid.stride(axis);
        for start in self.grid.line_starts(axis) {
            for k in 0..n {
                values[start + k * stride] = self.values[start + (n - 1 - k) * stride];
            }
        }
        Self {
            grid: self.grid.clone(),
            values,
        }
    }
}

/// Evaluates `f` at every interior node.
pub fn sample<T: Real>(f: impl Fn(&[T]) -> T, grid: &TensorGrid<T>) -> Result<GridFunction<T>> {
    let values: Vec<T> = (0..grid.len()).map(|flat| f(&grid.point(flat))).collect();
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("sample at {:?}", grid.point(i))));
    }
    GridFunction::new(grid.clone(), values)
}

/// Values on the staggered grid along one axis: `counts[axis] + 1` points
/// per line, one between each pair of neighbouring nodes including the two
/// boundary faces.
#[derive(Debug, Clone, PartialEq)]
pub struct StaggeredField<T> {
    axis: usize,
    counts: Vec<usize>,
    values: Vec<T>,
}

impl<T: Real> StaggeredField<T> {
    pub fn axis(&self) -> usize {
        self.axis
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Forward differences `(u(x + Δ_i e_i) - u(x)) / Δ_i` at the staggered
/// points of `axis`, with `u = 0` outside the interior nodes.
pub fn forward_diff<T: Real>(u: &GridFunction<T>, axis: usize) -> StaggeredField<T> {
    let grid = u.grid();
    let n = grid.counts[axis];
    let stride = grid.stride(axis);
    let inv_h = T::one() / grid.spacing(axis);
    let outer: usize = grid.counts[..axis].iter().product();

    let mut counts = grid.counts.clone();
    counts[axis] += 1;
    let mut values = vec![T::zero(); outer * (n + 1) * stride];
    let src = u.values();
    for o in 0..outer {
        let node_block = o * n * stride;
        let stag_block = o * (n + 1) * stride;
        for inner in 0..stride {
            let mut prev = T::zero();
            for k in 0..=n {
                let cur = if k < n { src[node_block + k * stride + inner] } else { T::zero() };
                values[stag_block + k * stride + inner] = (cur - prev) * inv_h;
                prev = cur;
            }
        }
    }
    StaggeredField { axis, counts, values }
}

/// Adjoint of [`forward_diff`] with respect to the node-weighted and
/// staggered-weighted sums: returns `r` with
/// `sum_nodes r v = sum_staggered flux * forward_diff(v)`.
///
/// This is the negative discrete divergence of `flux`.
pub fn forward_diff_adjoint<T: Real>(flux: &StaggeredField<T>, grid: &TensorGrid<T>) -> Vec<T> {
    let axis = flux.axis;
    let n = grid.counts[axis];
    let stride = grid.stride(axis);
    let inv_h = T::one() / grid.spacing(axis);
    let outer: usize = grid.counts[..axis].iter().product();
    let mut out = vec![T::zero(); grid.len()];
    for o in 0..outer {
        let node_block = o * n * stride;
        let stag_block = o * (n + 1) * stride;
        for inner in 0..stride {
            for k in 0..n {
                let left = flux.values[stag_block + k * stride + inner];
                let right = flux.values[stag_block + (k + 1) * stride + inner];
                out[node_block + k * stride + inner] = (left - right) * inv_h;
            }
        }
    }
    out
}

impl<T: Real> StaggeredField<T> {
    /// Applies `f` entrywise, keeping the layout.
    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            axis: self.axis,
            counts: self.counts.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }
}

/// `u(x + m Δ_i e_i) - u(x)` at every interior node, zero extension outside.
pub fn shift_diff<T: Real>(u: &GridFunction<T>, axis: usize, m: isize) -> Result<Vec<T>> {
    if m == 0 {
        return Err(Error::Domain("shift offset must be nonzero".into()));
    }
    let grid = u.grid();
    let n = grid.counts[axis] as isize;
    let stride = grid.stride(axis);
    let src = u.values();
    let mut out = vec![T::zero(); grid.len()];
    for start in grid.line_starts(axis) {
        for k in 0..n {
            let here = src[start + k as usize * stride];
            let j = k + m;
            let there = if (0..n).contains(&j) { src[start + j as usize * stride] } else { T::zero() };
            out[start + k as usize * stride] = there - here;
        }
    }
    Ok(out)
}
