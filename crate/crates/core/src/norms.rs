//! Mixed Lebesgue norms, the anisotropic gradient norm and the directional
//! fractional seminorms.
//!
//! All quadrature is the rectangle rule with node weight `prod Δ`, the same
//! weight used by [`crate::variations::pairing`]. That keeps the duality
//! identities exact on the grid.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exponents::{ExponentVector, FractionalVector};
use crate::grid::{forward_diff, GridFunction, StaggeredField, TensorGrid};
use crate::scalar::{pairwise_sum, Real};

pub(crate) fn check_dim<T: Real>(u: &GridFunction<T>, n: usize) -> Result<()> {
    if u.dim() == n {
        Ok(())
    } else {
        Err(Error::LengthMismatch {
            expected: u.dim(),
            got: n,
        })
    }
}

/// The partial norms `I_1, ..., I_n` of the mixed-norm recursion.
///
/// `levels[j]` holds `I_{j+1}` as a function of the axes `j+1..n`, stored
/// row-major over `counts[j+1..]`; the last level is the single scalar
/// `||u||_p`.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialNormStack<T> {
    levels: Vec<Vec<T>>,
}

impl<T: Real> PartialNormStack<T> {
    pub fn levels(&self) -> &[Vec<T>] {
        &self.levels
    }

    pub fn level(&self, j: usize) -> &[T] {
        &self.levels[j]
    }

    pub fn norm(&self) -> T {
        self.levels[self.levels.len() - 1][0]
    }
}

/// Runs the recursion `I_1 = (sum_{x_1} |u|^{p_1} Δ_1)^{1/p_1}`,
/// `I_{j+1} = (sum_{x_{j+1}} I_j^{p_{j+1}} Δ_{j+1})^{1/p_{j+1}}`.
///
/// Works for any exponents `q_i > 0`; the dual norm reuses it with `p'`.
pub fn partials_with<T: Real>(values: &[T], grid: &TensorGrid<T>, q: &[T]) -> Result<PartialNormStack<T>> {
    if q.len() != grid.dim() {
        return Err(Error::LengthMismatch {
            expected: grid.dim(),
            got: q.len(),
        });
    }
    if values.len() != grid.len() {
        return Err(Error::LengthMismatch {
            expected: grid.len(),
            got: values.len(),
        });
    }
    let counts = grid.counts();
    let mut levels = Vec::with_capacity(q.len());
    let mut current: Vec<T> = values.iter().map(|v| v.abs()).collect();
    for (j, &qj) in q.iter().enumerate() {
        let block: usize = counts[j + 1..].iter().product();
        let h = grid.spacing(j);
        let inv = T::one() / qj;
        let next: Vec<T> = (0..block)
            .map(|r| {
                let s = (0..counts[j]).fold(T::zero(), |acc, k| acc + current[k * block + r].abs_pow(qj));
                (s * h).powf(inv)
            })
            .collect();
        levels.push(next.clone());
        current = next;
    }
    Ok(PartialNormStack { levels })
}

pub fn partials<T: Real>(u: &GridFunction<T>, p: &ExponentVector<T>) -> Result<PartialNormStack<T>> {
    check_dim(u, p.len())?;
    partials_with(u.values(), u.grid(), p.as_slice())
}

/// `||u||_p`, the mixed Lebesgue norm with `x_1` innermost.
pub fn mixed_norm<T: Real>(u: &GridFunction<T>, p: &ExponentVector<T>) -> Result<T> {
    Ok(partials(u, p)?.norm())
}

/// Mixed norm with arbitrary positive exponents, e.g. the conjugates `p'`.
pub fn mixed_norm_with<T: Real>(values: &[T], grid: &TensorGrid<T>, q: &[T]) -> Result<T> {
    Ok(partials_with(values, grid, q)?.norm())
}

/// `(sum |g|^{p_i} prod Δ)^{1/p_i}` over the staggered points.
pub fn directional_norm<T: Real>(g: &StaggeredField<T>, p_i: T, grid: &TensorGrid<T>) -> T {
    let s = g.values().iter().fold(T::zero(), |acc, &v| acc + v.abs_pow(p_i));
    (s * grid.cell_volume()).powf(T::one() / p_i)
}

/// `||u_{x_i}||_{p_i}` for every axis.
pub fn directional_norms<T: Real>(u: &GridFunction<T>, p: &ExponentVector<T>) -> Result<Vec<T>> {
    check_dim(u, p.len())?;
    Ok((0..u.dim())
        .map(|i| directional_norm(&forward_diff(u, i), p.get(i), u.grid()))
        .collect())
}

/// `||∇u||_p = sum_i ||u_{x_i}||_{p_i}`.
pub fn gradient_norm<T: Real>(u: &GridFunction<T>, p: &ExponentVector<T>) -> Result<T> {
    Ok(directional_norms(u, p)?.into_iter().sum())
}

/// `sum_i c_i ||u_{x_i}||_{p_i}`.
pub fn weighted_gradient_norm<T: Real>(u: &GridFunction<T>, p: &ExponentVector<T>, weights: &[T]) -> Result<T> {
    if weights.len() != p.len() {
        return Err(Error::LengthMismatch {
            expected: p.len(),
            got: weights.len(),
        });
    }
    Ok(directional_norms(u, p)?
        .into_iter()
        .zip(weights)
        .map(|(n, &c)| c * n)
        .sum())
}

/// Limit weights `(2/p_i)^{1/p_i}` of the normalized fractional seminorm as
/// `s_i -> 1`.
pub fn local_limit_weights<T: Real>(p: &ExponentVector<T>) -> Vec<T> {
    let two = T::lit(2.0);
    p.as_slice().iter().map(|&pi| (two / pi).powf(T::one() / pi)).collect()
}

/// Shift window used by the fractional sums, per axis.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum Window {
    /// Smallest exact window, `M_i = 2 (counts_i + 1)`.
    #[default]
    Minimal,
    /// Same `M` on every axis.
    Uniform(usize),
    /// One `M` per axis.
    PerAxis(Vec<usize>),
}

impl Window {
    /// Smallest `M` with `M Δ_i >= 2 (upper_i - lower_i)`.
    pub fn required(count: usize) -> usize {
        2 * (count + 1)
    }

    pub fn resolve<T: Real>(&self, grid: &TensorGrid<T>) -> Result<Vec<usize>> {
        let ms = match self {
            Window::Minimal => grid.counts().iter().map(|&c| Self::required(c)).collect(),
            Window::Uniform(m) => vec![*m; grid.dim()],
            Window::PerAxis(ms) => {
                if ms.len() != grid.dim() {
                    return Err(Error::LengthMismatch {
                        expected: grid.dim(),
                        got: ms.len(),
                    });
                }
                ms.clone()
            }
        };
        for (axis, (&m, &c)) in ms.iter().zip(grid.counts()).enumerate() {
            if m < Self::required(c) {
                return Err(Error::WindowTooSmall {
                    axis,
                    window: m,
                    required: Self::required(c),
                });
            }
        }
        Ok(ms)
    }
}

/// Quadrature of the one-dimensional kernel `|h|^{-1-sp}` on the lattice
/// `h = m Δ`.
///
/// The half-line `h > 0` is split into the singular band `[0, Δ)`, one cell
/// per shift `m = 1..=M` (`[Δ, 1.5Δ)` for `m = 1`, `[(m-1/2)Δ, (m+1/2)Δ)`
/// otherwise) and the tail `[(M+1/2)Δ, inf)`. Cell weights are exact kernel
/// integrals, so they telescope: growing `M` moves mass from the tail into
/// the shift sum without changing the total.
#[derive(Debug, Clone)]
pub(crate) struct AxisKernel<T> {
    pub axis: usize,
    pub p: T,
    pub count: usize,
    /// `w[m-1]` for `m = 1..=min(M, count-1)`; both endpoints interior.
    pub pair_weights: Vec<T>,
    /// Weight of `|u(x)|^p` at node `k` collecting every in-window shift that
    /// lands outside the domain, counted from both the interior and the
    /// exterior endpoint.
    pub exterior_weights: Vec<T>,
    /// Weight of `|u(x)|^p` from the tail, same double counting.
    pub tail_weight: T,
    /// Weight of `|g|^p` for the band, `2 Δ^{p(1-s)} / (p(1-s))`.
    pub band_weight: T,
    /// `(1-s)` when normalized, else 1.
    pub scale: T,
    pub cell_volume: T,
}

impl<T: Real> AxisKernel<T> {
    pub fn new(grid: &TensorGrid<T>, axis: usize, s: T, p: T, window: usize, normalized: bool) -> Result<Self> {
        let count = grid.counts()[axis];
        if window < Window::required(count) {
            return Err(Error::WindowTooSmall {
                axis,
                window,
                required: Window::required(count),
            });
        }
        let sp = s * p;
        if !(sp > T::lit(1e-12)) {
            return Err(Error::Domain(format!("s p = {sp} is numerically zero on axis {axis}")));
        }
        let one_minus_s = T::one() - s;
        if !(one_minus_s > T::zero()) {
            return Err(Error::Domain(format!("s = {s} must be < 1 on axis {axis}")));
        }
        let h = grid.spacing(axis);
        let half = T::lit(0.5);
        let lower_edge = |m: usize| {
            if m == 1 {
                h
            } else {
                (T::from_usize_lossy(m) - half) * h
            }
        };
        let upper_edge = |m: usize| (T::from_usize_lossy(m) + half) * h;
        let antider = |x: T| x.powf(-sp) / sp;
        // integral of |h|^{-1-sp} over the cells a..=b on one side
        let cells = |a: usize, b: usize| antider(lower_edge(a)) - antider(upper_edge(b));

        let max_pair = window.min(count.saturating_sub(1));
        let pair_weights = (1..=max_pair).map(|m| cells(m, m)).collect();
        let two = T::lit(2.0);
        let exterior_weights = (0..count)
            .map(|k| {
                // right: k + m >= count; left: k - m < 0
                let right = cells(count - k, window);
                let left = cells(k + 1, window);
                two * (right + left)
            })
            .collect();
        let tail_weight = two * two * antider(upper_edge(window));
        let band_weight = two * h.powf(p * one_minus_s) / (p * one_minus_s);
        let scale = if normalized { one_minus_s } else { T::one() };
        Ok(Self {
            axis,
            p,
            count,
            pair_weights,
            exterior_weights,
            tail_weight,
            band_weight,
            scale,
            cell_volume: grid.cell_volume(),
        })
    }
}

/// Components of one directional fractional term `[u]_{s_i,p_i,i}^{p_i}`.
///
/// When `normalized` every component already carries the `(1 - s_i)` factor.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionalTerms<T> {
    pub axis: usize,
    pub p: T,
    pub inner_sum: T,
    pub inner_band_correction: T,
    pub tail_correction: T,
    pub raw_power: T,
    pub normalized: bool,
}

impl<T: Real> FractionalTerms<T> {
    /// `raw_power^{1/p_i}`.
    pub fn seminorm(&self) -> T {
        self.raw_power.powf(T::one() / self.p)
    }
}

/// Per-shift sums `sum_x |u(x + mΔ) - u(x)|^p` over pairs of interior nodes,
/// for `m = 1..=max_pair`. Parallel over `m`; each entry is summed in a fixed
/// order so the result does not depend on the thread count.
fn pair_power_sums<T: Real>(u: &GridFunction<T>, kernel: &AxisKernel<T>) -> Vec<T> {
    let grid = u.grid();
    let axis = kernel.axis;
    let n = kernel.count;
    let stride = grid.stride(axis);
    let starts: Vec<usize> = grid.line_starts(axis).collect();
    let vals = u.values();
    let p = kernel.p;
    (1..kernel.pair_weights.len() + 1)
        .into_par_iter()
        .with_min_len(8)
        .map(|m| {
            let mut acc = T::zero();
            for &start in &starts {
                for k in 0..n - m {
                    let a = vals[start + k * stride];
                    let b = vals[start + (k + m) * stride];
                    acc = acc + (b - a).abs_pow(p);
                }
            }
            acc
        })
        .collect()
}

pub(crate) fn fractional_terms_with<T: Real>(u: &GridFunction<T>, kernel: &AxisKernel<T>) -> FractionalTerms<T> {
    let grid = u.grid();
    let axis = kernel.axis;
    let p = kernel.p;
    let two = T::lit(2.0);

    let per_shift = pair_power_sums(u, kernel);
    let weighted: Vec<T> = per_shift
        .iter()
        .zip(&kernel.pair_weights)
        .map(|(&s, &w)| two * w * s)
        .collect();
    let pairs = pairwise_sum(&weighted);

    let stride = grid.stride(axis);
    let mut exterior = T::zero();
    let mut mass = T::zero();
    for start in grid.line_starts(axis) {
        for k in 0..kernel.count {
            let a = u.values()[start + k * stride].abs_pow(p);
            exterior = exterior + a * kernel.exterior_weights[k];
            mass = mass + a;
        }
    }

    let g = forward_diff(u, axis);
    let slope = g.values().iter().fold(T::zero(), |acc, &v| acc + v.abs_pow(p));

    let c = kernel.scale * kernel.cell_volume;
    let inner_sum = c * (pairs + exterior);
    let inner_band_correction = c * kernel.band_weight * slope;
    let tail_correction = c * kernel.tail_weight * mass;
    FractionalTerms {
        axis,
        p,
        inner_sum,
        inner_band_correction,
        tail_correction,
        raw_power: inner_sum + inner_band_correction + tail_correction,
        normalized: kernel.scale != T::one(),
    }
}

/// One directional term `[u]_{s_i,p_i,i}^{p_i}` split into its components.
///
/// `window` is the shift count `M`; it must satisfy `M Δ_i >= 2 × extent_i`.
pub fn fractional_directional<T: Real>(
    u: &GridFunction<T>,
    s_i: T,
    p_i: T,
    axis: usize,
    window: usize,
    normalized: bool,
) -> Result<FractionalTerms<T>> {
    if axis >= u.dim() {
        return Err(Error::Domain(format!("axis {axis} out of range for dimension {}", u.dim())));
    }
    let kernel = AxisKernel::new(u.grid(), axis, s_i, p_i, window, normalized)?;
    let mut terms = fractional_terms_with(u, &kernel);
    terms.normalized = normalized;
    Ok(terms)
}

/// Everything needed to evaluate `[u]_{s,p}`.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionalSetup<T> {
    pub s: FractionalVector<T>,
    pub p: ExponentVector<T>,
    pub window: Window,
    pub normalized: bool,
}

impl<T: Real> FractionalSetup<T> {
    /// Normalized seminorm with the minimal exact window.
    pub fn new(s: FractionalVector<T>, p: ExponentVector<T>) -> Self {
        Self {
            s,
            p,
            window: Window::Minimal,
            normalized: true,
        }
    }

    pub fn with_window(mut self, window: Window) -> Self {
        self.window = window;
        self
    }

    pub fn normalized(mut self, normalized: bool) -> Self {
        self.normalized = normalized;
        self
    }

    pub(crate) fn kernels(&self, grid: &TensorGrid<T>) -> Result<Vec<AxisKernel<T>>> {
        if self.s.len() != self.p.len() {
            return Err(Error::LengthMismatch {
                expected: self.p.len(),
                got: self.s.len(),
            });
        }
        if grid.dim() != self.p.len() {
            return Err(Error::LengthMismatch {
                expected: grid.dim(),
                got: self.p.len(),
            });
        }
        let windows = self.window.resolve(grid)?;
        (0..grid.dim())
            .map(|i| AxisKernel::new(grid, i, self.s.get(i), self.p.get(i), windows[i], self.normalized))
            .collect()
    }
}

/// Directional terms for every axis.
pub fn fractional_components<T: Real>(u: &GridFunction<T>, setup: &FractionalSetup<T>) -> Result<Vec<FractionalTerms<T>>> {
    let kernels = setup.kernels(u.grid())?;
    Ok(kernels
        .iter()
        .map(|k| {
            let mut t = fractional_terms_with(u, k);
            t.normalized = setup.normalized;
            t
        })
        .collect())
}

/// `[u]_{s,p} = sum_i [u]_{s_i,p_i,i}`.
pub fn fractional_seminorm<T: Real>(u: &GridFunction<T>, setup: &FractionalSetup<T>) -> Result<T> {
    Ok(fractional_components(u, setup)?.iter().map(|t| t.seminorm()).sum())
}
