//! First variations of the three 1-homogeneous functionals
//!
//! * `I(u) = ||u||_p`, with derivative the duality map `F_p(u)`,
//! * `H(u) = ||∇u||_p`, with derivative the normalized anisotropic
//!   p-Laplacian `L_p`,
//! * `H_s(u) = [u]_{s,p}`, with derivative its fractional analogue,
//!
//! each available as a bilinear application `<J'(u), v>` and as a grid
//! function `r` with `pairing(r, v) = <J'(u), v>` for every `v`.
//!
//! All derivatives are exact derivatives of the discrete functionals in
//! [`crate::norms`], so Euler identities and adjoint identities hold to
//! rounding.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exponents::ExponentVector;
use crate::grid::{forward_diff, forward_diff_adjoint, GridFunction, StaggeredField};
use crate::norms::{
    check_dim, directional_norm, fractional_terms_with, gradient_norm, mixed_norm, mixed_norm_with, partials,
    AxisKernel, FractionalSetup,
};
use crate::scalar::{pairwise_sum, Real};

/// Representative of a dual element: acts on `v` through [`pairing`].
pub type VariationField<T> = GridFunction<T>;

/// `sum f v prod Δ` over the interior nodes.
pub fn pairing<T: Real>(f: &VariationField<T>, v: &GridFunction<T>) -> Result<T> {
    f.check_same_grid(v)?;
    let prods: Vec<T> = f.values().iter().zip(v.values()).map(|(&a, &b)| a * b).collect();
    Ok(pairwise_sum(&prods) * f.grid().cell_volume())
}

/// `F_p(u) = prod_i I_i(u)^{p_{i+1} - p_i} |u|^{p_1 - 2} u` with `p_{n+1} = 1`.
///
/// Slabs where some `I_i` vanishes carry `u = 0` and get `F_p = 0`.
pub fn f_p<T: Real>(u: &GridFunction<T>, p: &ExponentVector<T>) -> Result<VariationField<T>> {
    let stack = partials(u, p)?;
    if stack.norm() == T::zero() {
        return Err(Error::ZeroField("F_p"));
    }
    let grid = u.grid();
    let n = p.len();
    let counts = grid.counts();
    let blocks: Vec<usize> = (0..n).map(|j| counts[j + 1..].iter().product()).collect();
    let exps: Vec<T> = (0..n)
        .map(|j| {
            let next = if j + 1 < n { p.get(j + 1) } else { T::one() };
            next - p.get(j)
        })
        .collect();
    let p1 = p.get(0);
    let values = u
        .values()
        .iter()
        .enumerate()
        .map(|(flat, &x)| {
            let base = x.signed_pow(p1);
            if base == T::zero() {
                return T::zero();
            }
            (0..n).fold(base, |acc, j| acc * stack.level(j)[flat % blocks[j]].powf(exps[j]))
        })
        .collect();
    GridFunction::new(grid.clone(), values)
}

/// `||f||_{p'}`, the dual mixed norm.
pub fn dual_norm<T: Real>(f: &VariationField<T>, p: &ExponentVector<T>) -> Result<T> {
    check_dim(f, p.len())?;
    mixed_norm_with(f.values(), f.grid(), &p.conjugates())
}

/// Normalized fluxes `|g_i / N_i|^{p_i - 2} g_i / N_i` per axis, scaled by
/// `weights`.
fn local_fluxes<T: Real>(u: &GridFunction<T>, p: &ExponentVector<T>, weights: &[T]) -> Result<Vec<StaggeredField<T>>> {
    check_dim(u, p.len())?;
    (0..u.dim())
        .map(|i| {
            let g = forward_diff(u, i);
            let norm = directional_norm(&g, p.get(i), u.grid());
            if norm == T::zero() {
                return Err(Error::ZeroField("H'"));
            }
            let (pi, c) = (p.get(i), weights[i]);
            Ok(g.map(|x| c * (x / norm).signed_pow(pi)))
        })
        .collect()
}

fn unit_weights<T: Real>(n: usize) -> Vec<T> {
    vec![T::one(); n]
}

/// `<H'(u), v> = sum_i sum |g_i/N_i|^{p_i-2} (g_i/N_i) forward_diff(v, i) prod Δ`.
pub fn h_prime_apply<T: Real>(u: &GridFunction<T>, v: &GridFunction<T>, p: &ExponentVector<T>) -> Result<T> {
    weighted_h_prime_apply(u, v, p, &unit_weights(p.len()))
}

/// Derivative of `sum_i c_i ||u_{x_i}||_{p_i}`.
pub fn weighted_h_prime_apply<T: Real>(
    u: &GridFunction<T>,
    v: &GridFunction<T>,
    p: &ExponentVector<T>,
    weights: &[T],
) -> Result<T> {
    u.check_same_grid(v)?;
    let fluxes = local_fluxes(u, p, weights)?;
    let vol = u.grid().cell_volume();
    let parts: Vec<T> = fluxes
        .iter()
        .enumerate()
        .map(|(i, flux)| {
            let dv = forward_diff(v, i);
            let prods: Vec<T> = flux.values().iter().zip(dv.values()).map(|(&a, &b)| a * b).collect();
            pairwise_sum(&prods) * vol
        })
        .collect();
    Ok(parts.into_iter().sum())
}

/// Grid function `r` with `pairing(r, v) = <H'(u), v>`: the negative discrete
/// divergence of the normalized fluxes.
pub fn h_prime_residual<T: Real>(u: &GridFunction<T>, p: &ExponentVector<T>) -> Result<VariationField<T>> {
    weighted_h_prime_residual(u, p, &unit_weights(p.len()))
}

pub fn weighted_h_prime_residual<T: Real>(
    u: &GridFunction<T>,
    p: &ExponentVector<T>,
    weights: &[T],
) -> Result<VariationField<T>> {
    let fluxes = local_fluxes(u, p, weights)?;
    let grid = u.grid();
    let mut out = vec![T::zero(); grid.len()];
    for flux in &fluxes {
        for (o, d) in out.iter_mut().zip(forward_diff_adjoint(flux, grid)) {
            *o = *o + d;
        }
    }
    GridFunction::new(grid.clone(), out)
}

/// Per-axis data of `H_s'(u)`: the kernel and the prefactor
/// `[u]_i^{1-p_i} × scale`.
struct FractionalAxis<'a, T> {
    kernel: &'a AxisKernel<T>,
    factor: T,
}

fn fractional_axes<'a, T: Real>(u: &GridFunction<T>, kernels: &'a [AxisKernel<T>]) -> Result<Vec<FractionalAxis<'a, T>>> {
    kernels
        .iter()
        .map(|kernel| {
            let raw = fractional_terms_with(u, kernel).raw_power;
            if raw == T::zero() {
                return Err(Error::ZeroField("H_s'"));
            }
            let seminorm = raw.powf(T::one() / kernel.p);
            Ok(FractionalAxis {
                kernel,
                factor: seminorm.powf(T::one() - kernel.p) * kernel.scale,
            })
        })
        .collect()
}

fn fractional_apply_axis<T: Real>(u: &GridFunction<T>, v: &GridFunction<T>, ax: &FractionalAxis<'_, T>) -> T {
    let k = ax.kernel;
    let grid = u.grid();
    let stride = grid.stride(k.axis);
    let n = k.count;
    let p = k.p;
    let starts: Vec<usize> = grid.line_starts(k.axis).collect();
    let (uv, vv) = (u.values(), v.values());
    let two = T::lit(2.0);

    let per_shift: Vec<T> = (1..k.pair_weights.len() + 1)
        .into_par_iter()
        .with_min_len(8)
        .map(|m| {
            let mut acc = T::zero();
            for &start in &starts {
                for j in 0..n - m {
                    let (a, b) = (start + j * stride, start + (j + m) * stride);
                    acc = acc + (uv[b] - uv[a]).signed_pow(p) * (vv[b] - vv[a]);
                }
            }
            two * k.pair_weights[m - 1] * acc
        })
        .collect();
    let pairs = pairwise_sum(&per_shift);

    let mut local = T::zero();
    for &start in &starts {
        for j in 0..n {
            let idx = start + j * stride;
            local = local + (k.exterior_weights[j] + k.tail_weight) * uv[idx].signed_pow(p) * vv[idx];
        }
    }

    let gu = forward_diff(u, k.axis);
    let gv = forward_diff(v, k.axis);
    let band = gu
        .values()
        .iter()
        .zip(gv.values())
        .fold(T::zero(), |acc, (&a, &b)| acc + a.signed_pow(p) * b);

    ax.factor * k.cell_volume * (pairs + local + k.band_weight * band)
}

fn fractional_residual_axis<T: Real>(u: &GridFunction<T>, ax: &FractionalAxis<'_, T>) -> Vec<T> {
    let k = ax.kernel;
    let grid = u.grid();
    let stride = grid.stride(k.axis);
    let n = k.count;
    let p = k.p;
    let uv = u.values();
    let max_m = k.pair_weights.len();
    let two = T::lit(2.0);

    let mut out: Vec<T> = (0..grid.len())
        .into_par_iter()
        .with_min_len(64)
        .map(|flat| {
            let j = (flat / stride) % n;
            let start = flat - j * stride;
            let here = uv[flat];
            let mut acc = T::zero();
            for m in 1..=max_m {
                let w = k.pair_weights[m - 1];
                // pair (j - m, j): v_j enters with +, pair (j, j + m): with -
                if j >= m {
                    acc = acc + w * (here - uv[start + (j - m) * stride]).signed_pow(p);
                }
                if j + m < n {
                    acc = acc - w * (uv[start + (j + m) * stride] - here).signed_pow(p);
                }
            }
            two * acc + (k.exterior_weights[j] + k.tail_weight) * here.signed_pow(p)
        })
        .collect();

    let flux = forward_diff(u, k.axis).map(|g| k.band_weight * g.signed_pow(p));
    for (o, d) in out.iter_mut().zip(forward_diff_adjoint(&flux, grid)) {
        *o = (*o + d) * ax.factor;
    }
    out
}

/// `<H_s'(u), v>`, the exact derivative of the discrete `[u]_{s,p}`.
pub fn hs_prime_apply<T: Real>(u: &GridFunction<T>, v: &GridFunction<T>, setup: &FractionalSetup<T>) -> Result<T> {
    u.check_same_grid(v)?;
    let kernels = setup.kernels(u.grid())?;
    hs_prime_apply_with(u, v, &kernels)
}

pub(crate) fn hs_prime_apply_with<T: Real>(u: &GridFunction<T>, v: &GridFunction<T>, kernels: &[AxisKernel<T>]) -> Result<T> {
    let axes = fractional_axes(u, kernels)?;
    Ok(axes.iter().map(|ax| fractional_apply_axis(u, v, ax)).sum())
}

/// Grid function `r` with `pairing(r, v) = <H_s'(u), v>`, assembled by
/// scattering the contribution of every (node, shift) pair onto both nodes.
pub fn hs_prime_residual<T: Real>(u: &GridFunction<T>, setup: &FractionalSetup<T>) -> Result<VariationField<T>> {
    let kernels = setup.kernels(u.grid())?;
    hs_prime_residual_with(u, &kernels)
}

pub(crate) fn hs_prime_residual_with<T: Real>(u: &GridFunction<T>, kernels: &[AxisKernel<T>]) -> Result<VariationField<T>> {
    let axes = fractional_axes(u, kernels)?;
    let grid = u.grid();
    let mut out = vec![T::zero(); grid.len()];
    // fixed axis order keeps the merge deterministic
    for ax in &axes {
        for (o, d) in out.iter_mut().zip(fractional_residual_axis(u, ax)) {
            *o = *o + d;
        }
    }
    GridFunction::new(grid.clone(), out)
}

/// Which functional a [`gateaux_check`] differentiates.
#[derive(Debug, Clone)]
pub enum Functional<T> {
    /// `I(u) = ||u||_p`
    MixedNorm(ExponentVector<T>),
    /// `H(u) = ||∇u||_p`
    Gradient(ExponentVector<T>),
    /// `H_s(u) = [u]_{s,p}`
    Fractional(FractionalSetup<T>),
}

impl<T: Real> Functional<T> {
    pub fn name(&self) -> &'static str {
        match self {
            Functional::MixedNorm(_) => "I",
            Functional::Gradient(_) => "H",
            Functional::Fractional(_) => "H_s",
        }
    }

    pub fn value(&self, u: &GridFunction<T>) -> Result<T> {
        match self {
            Functional::MixedNorm(p) => mixed_norm(u, p),
            Functional::Gradient(p) => gradient_norm(u, p),
            Functional::Fractional(setup) => crate::norms::fractional_seminorm(u, setup),
        }
    }

    /// `<J'(u), v>` from the analytic formula.
    pub fn derivative(&self, u: &GridFunction<T>, v: &GridFunction<T>) -> Result<T> {
        match self {
            Functional::MixedNorm(p) => pairing(&f_p(u, p)?, v),
            Functional::Gradient(p) => h_prime_apply(u, v, p),
            Functional::Fractional(setup) => hs_prime_apply(u, v, setup),
        }
    }
}

/// Central-difference comparison of `<J'(u), v>` over a sweep of steps.
#[derive(Debug, Clone, PartialEq)]
pub struct GateauxReport<T> {
    pub analytic: T,
    /// `(t, central difference, relative error)` per step.
    pub steps: Vec<(T, T, T)>,
    pub min_relative_error: T,
}

/// Default step sweep `1e-3, ..., 1e-6`.
pub fn default_steps<T: Real>() -> Vec<T> {
    [1e-3, 1e-4, 1e-5, 1e-6].iter().map(|&t| T::lit(t)).collect()
}

pub fn gateaux_check<T: Real>(
    functional: &Functional<T>,
    u: &GridFunction<T>,
    v: &GridFunction<T>,
    steps: &[T],
) -> Result<GateauxReport<T>> {
    let analytic = functional.derivative(u, v)?;
    let scale = analytic.abs().max(T::min_positive_value());
    let mut out = Vec::with_capacity(steps.len());
    for &t in steps {
        let plus = functional.value(&u.axpy(t, v)?)?;
        let minus = functional.value(&u.axpy(-t, v)?)?;
        let fd = (plus - minus) / (t + t);
        out.push((t, fd, (fd - analytic).abs() / scale));
    }
    let min_relative_error = out.iter().map(|s| s.2).fold(T::infinity(), T::min);
    Ok(GateauxReport {
        analytic,
        steps: out,
        min_relative_error,
    })
}
