//! First eigenvalues of the homogeneous Rayleigh quotients
//! `Q_p(u) = ||∇u||_p / ||u||_p` and `Q_{s,p}(u) = [u]_{s,p} / ||u||_p`
//! on the discrete Dirichlet space.
//!
//! The minimizer is found by gradient descent on the sphere `I(u) = 1`.
//! At `I(u) = 1` the derivative of the quotient is represented by
//! `r = J'(u) - Q(u) F_p(u)`, which is also the weak eigen-residual; the
//! solver stops once `||r||_{p'}` is below the configured tolerance.
//!
//! The value returned is the minimum of the quotient, the natural candidate
//! for the first eigenvalue; higher min-max values are not computed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::{ExponentVector, FractionalVector};
use crate::grid::{DirichletLaplacian, GridFunction, TensorGrid};
use crate::norms::{
    fractional_seminorm, fractional_terms_with, gradient_norm, local_limit_weights, mixed_norm, weighted_gradient_norm,
    AxisKernel, FractionalSetup, Window,
};
use crate::scalar::Real;
use crate::variations::{dual_norm, f_p, hs_prime_residual_with, pairing, weighted_h_prime_residual};

/// Stopping and line-search parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveConfig {
    /// Stop once `||J'(u) - Q F_p(u)||_{p'}` drops below this.
    pub tol_residual: f64,
    pub max_iter: usize,
    /// First trial step; later trial steps are Barzilai-Borwein estimates.
    pub initial_step: f64,
    pub backtrack_factor: f64,
    pub restarts: usize,
    pub rng_seed: u64,
    /// Precondition the descent direction with the inverse Dirichlet
    /// Laplacian (a Sobolev gradient). Off gives the plain residual.
    pub precondition: bool,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            tol_residual: 1e-6,
            max_iter: 20_000,
            initial_step: 1.0,
            backtrack_factor: 0.5,
            restarts: 2,
            rng_seed: 0,
            precondition: true,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol_residual > 0.0 && self.tol_residual.is_finite()) {
            return Err(Error::Domain(format!("tol_residual must be > 0, got {}", self.tol_residual)));
        }
        if self.max_iter == 0 {
            return Err(Error::Domain("max_iter must be >= 1".into()));
        }
        if !(self.initial_step > 0.0 && self.initial_step.is_finite()) {
            return Err(Error::Domain(format!("initial_step must be > 0, got {}", self.initial_step)));
        }
        if !(self.backtrack_factor > 0.0 && self.backtrack_factor < 1.0) {
            return Err(Error::Domain(format!(
                "backtrack_factor must lie in (0, 1), got {}",
                self.backtrack_factor
            )));
        }
        if self.restarts == 0 {
            return Err(Error::Domain("restarts must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistoryEntry<T> {
    pub iteration: usize,
    pub q: T,
    pub residual: T,
}

/// Result of one minimization.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport<T> {
    /// Minimum value of the quotient found (the min-Q eigenvalue).
    pub lambda: T,
    /// Minimizer normalized to `||u||_p = 1`.
    pub u: GridFunction<T>,
    /// `||J'(u) - lambda F_p(u)||_{p'}` at `u`.
    pub residual: T,
    pub iterations: usize,
    pub history: Vec<HistoryEntry<T>>,
    pub converged: bool,
    /// Index of the random start that produced this report.
    pub restart: usize,
}

/// A 1-homogeneous energy minimized against the mixed norm.
pub trait Energy<T: Real>: Sync {
    fn value(&self, u: &GridFunction<T>) -> Result<T>;
    /// Representative `g` with `pairing(g, v) = <J'(u), v>`.
    fn gradient(&self, u: &GridFunction<T>) -> Result<GridFunction<T>>;
}

/// `sum_i c_i ||u_{x_i}||_{p_i}`; unit weights give `||∇u||_p`.
#[derive(Debug, Clone)]
pub struct LocalEnergy<T> {
    pub p: ExponentVector<T>,
    pub weights: Vec<T>,
}

impl<T: Real> LocalEnergy<T> {
    pub fn new(p: ExponentVector<T>) -> Self {
        let weights = vec![T::one(); p.len()];
        Self { p, weights }
    }

    /// The `s -> 1` limit of the normalized fractional seminorm.
    pub fn fractional_limit(p: ExponentVector<T>) -> Self {
        let weights = local_limit_weights(&p);
        Self { p, weights }
    }
}

impl<T: Real> Energy<T> for LocalEnergy<T> {
    fn value(&self, u: &GridFunction<T>) -> Result<T> {
        weighted_gradient_norm(u, &self.p, &self.weights)
    }

    fn gradient(&self, u: &GridFunction<T>) -> Result<GridFunction<T>> {
        weighted_h_prime_residual(u, &self.p, &self.weights)
    }
}

/// `[u]_{s,p}` with kernels precomputed for one grid.
#[derive(Debug, Clone)]
pub struct FractionalEnergy<T> {
    kernels: Vec<AxisKernel<T>>,
}

impl<T: Real> FractionalEnergy<T> {
    pub fn new(setup: &FractionalSetup<T>, grid: &TensorGrid<T>) -> Result<Self> {
        Ok(Self {
            kernels: setup.kernels(grid)?,
        })
    }
}

impl<T: Real> Energy<T> for FractionalEnergy<T> {
    fn value(&self, u: &GridFunction<T>) -> Result<T> {
        Ok(self
            .kernels
            .iter()
            .map(|k| fractional_terms_with(u, k).seminorm())
            .sum())
    }

    fn gradient(&self, u: &GridFunction<T>) -> Result<GridFunction<T>> {
        hs_prime_residual_with(u, &self.kernels)
    }
}

/// `||∇u||_p / ||u||_p`.
pub fn rayleigh_local<T: Real>(u: &GridFunction<T>, p: &ExponentVector<T>) -> Result<T> {
    let i = mixed_norm(u, p)?;
    if i == T::zero() {
        return Err(Error::ZeroField("Q_p"));
    }
    Ok(gradient_norm(u, p)? / i)
}

/// `[u]_{s,p} / ||u||_p`.
pub fn rayleigh_fractional<T: Real>(u: &GridFunction<T>, setup: &FractionalSetup<T>) -> Result<T> {
    let i = mixed_norm(u, &setup.p)?;
    if i == T::zero() {
        return Err(Error::ZeroField("Q_{s,p}"));
    }
    Ok(fractional_seminorm(u, setup)? / i)
}

/// Uniform `(0, 1]` values on the interior nodes, from the stream
/// `(seed, restart)`.
pub fn random_start<T: Real>(grid: &TensorGrid<T>, seed: u64, restart: usize) -> GridFunction<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    let values = (0..grid.len())
        .map(|_| T::lit(1.0 - rng.gen::<f64>()))
        .collect();
    GridFunction::new(grid.clone(), values).expect("finite values")
}

struct State<T> {
    u: GridFunction<T>,
    q: T,
    residual_field: GridFunction<T>,
    residual: T,
}

fn normalize<T: Real>(u: &GridFunction<T>, p: &ExponentVector<T>) -> Result<GridFunction<T>> {
    let i = mixed_norm(u, p)?;
    if !(i > T::zero()) || !i.is_finite() {
        return Err(Error::ZeroField("normalization"));
    }
    Ok(u.scaled(T::one() / i))
}

fn evaluate<T: Real, E: Energy<T>>(energy: &E, p: &ExponentVector<T>, u: GridFunction<T>) -> Result<State<T>> {
    let q = energy.value(&u)?;
    let g = energy.gradient(&u)?;
    let f = f_p(&u, p)?;
    let residual_field = g.axpy(-q, &f)?;
    let residual = dual_norm(&residual_field, p)?;
    Ok(State {
        u,
        q,
        residual_field,
        residual,
    })
}

const ARMIJO: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 60;

/// Gradient descent on `{I(u) = 1}` from one start.
pub fn descend<T: Real, E: Energy<T>>(
    energy: &E,
    p: &ExponentVector<T>,
    start: GridFunction<T>,
    config: &SolveConfig,
    restart: usize,
) -> Result<SolveReport<T>> {
    let factor = T::lit(config.backtrack_factor);
    let tol = T::lit(config.tol_residual);
    let mut state = evaluate(energy, p, normalize(&start, p)?)?;
    let mut history = vec![HistoryEntry {
        iteration: 0,
        q: state.q,
        residual: state.residual,
    }];
    let laplacian = config.precondition.then(|| DirichletLaplacian::new(state.u.grid()));
    let direction_of = |r: &GridFunction<T>| match &laplacian {
        Some(lap) => lap.solve(r),
        None => Ok(r.clone()),
    };
    let metric = |d: &GridFunction<T>| match &laplacian {
        Some(lap) => lap.energy(d),
        None => pairing(d, d),
    };
    let mut direction = direction_of(&state.residual_field)?;
    let mut step = T::lit(config.initial_step);
    let mut iterations = 0;
    let mut converged = state.residual <= tol;

    while !converged && iterations < config.max_iter {
        let slope = pairing(&state.residual_field, &direction)?;
        let noise = T::lit(64.0) * T::epsilon() * state.q.abs().max(T::one());
        let mut alpha = step;
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let trial = state.u.axpy(-alpha, &direction)?;
            if let Ok(trial) = normalize(&trial, p) {
                let predicted = T::lit(ARMIJO) * alpha * slope;
                if predicted > noise {
                    if energy.value(&trial)? <= state.q - predicted {
                        accepted = Some(evaluate(energy, p, trial)?);
                        break;
                    }
                } else {
                    // The decrease is below rounding in Q: judge the step by
                    // the residual and only ask Q not to rise past the noise.
                    let cand = evaluate(energy, p, trial)?;
                    if cand.q <= state.q + noise && cand.residual < state.residual {
                        accepted = Some(cand);
                        break;
                    }
                }
            }
            alpha = alpha * factor;
        }
        let Some(next) = accepted else {
            // no representable improvement left
            break;
        };
        iterations += 1;

        // Barzilai-Borwein trial step for the next iteration
        let ds = next.u.axpy(-T::one(), &state.u)?;
        let dy = next.residual_field.axpy(-T::one(), &state.residual_field)?;
        let sy = pairing(&ds, &dy)?;
        let ss = metric(&ds)?;
        step = if sy > T::zero() && (ss / sy).is_finite() {
            ss / sy
        } else {
            T::lit(config.initial_step)
        };

        state = next;
        direction = direction_of(&state.residual_field)?;
        history.push(HistoryEntry {
            iteration: iterations,
            q: state.q,
            residual: state.residual,
        });
        converged = state.residual <= tol;
    }

    Ok(SolveReport {
        lambda: state.q,
        u: state.u,
        residual: state.residual,
        iterations,
        history,
        converged,
        restart,
    })
}

/// Runs every restart and keeps the best converged report, ties broken by
/// restart index. If nothing converged the best report is returned with
/// `converged = false`.
pub fn minimize<T: Real, E: Energy<T>>(
    energy: &E,
    p: &ExponentVector<T>,
    grid: &TensorGrid<T>,
    config: &SolveConfig,
) -> Result<SolveReport<T>> {
    config.validate()?;
    if grid.dim() != p.len() {
        return Err(Error::LengthMismatch {
            expected: grid.dim(),
            got: p.len(),
        });
    }
    let reports: Vec<SolveReport<T>> = (0..config.restarts)
        .into_par_iter()
        .map(|r| descend(energy, p, random_start(grid, config.rng_seed, r), config, r))
        .collect::<Result<_>>()?;
    let best = reports
        .into_iter()
        .min_by(|a, b| {
            b.converged
                .cmp(&a.converged)
                .then(a.lambda.partial_cmp(&b.lambda).unwrap_or(std::cmp::Ordering::Equal))
                .then(a.restart.cmp(&b.restart))
        })
        .expect("at least one restart");
    Ok(best)
}

/// Minimizes `Q_p` over the grid.
pub fn minimize_local<T: Real>(p: &ExponentVector<T>, grid: &TensorGrid<T>, config: &SolveConfig) -> Result<SolveReport<T>> {
    minimize(&LocalEnergy::new(p.clone()), p, grid, config)
}

/// Minimizes `sum_i (2/p_i)^{1/p_i} ||u_{x_i}||_{p_i} / ||u||_p`, the `s -> 1`
/// limit of the normalized fractional quotient.
pub fn minimize_local_limit<T: Real>(
    p: &ExponentVector<T>,
    grid: &TensorGrid<T>,
    config: &SolveConfig,
) -> Result<SolveReport<T>> {
    minimize(&LocalEnergy::fractional_limit(p.clone()), p, grid, config)
}

/// Minimizes `Q_{s,p}` over the grid.
pub fn minimize_fractional<T: Real>(
    setup: &FractionalSetup<T>,
    grid: &TensorGrid<T>,
    config: &SolveConfig,
) -> Result<SolveReport<T>> {
    let energy = FractionalEnergy::new(setup, grid)?;
    minimize(&energy, &setup.p, grid, config)
}

/// One row of an `s -> 1` sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow<T> {
    pub s: Vec<T>,
    pub lambda_s: T,
    pub lambda_local: T,
    pub lambda_local_limit: T,
    /// `lambda_s / lambda_local_limit`.
    pub ratio: T,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable<T> {
    pub rows: Vec<SweepRow<T>>,
    /// Fractional reports, one per row.
    pub reports: Vec<SolveReport<T>>,
    pub local: SolveReport<T>,
    pub local_limit: SolveReport<T>,
}

impl<T: Real> SweepTable<T> {
    pub fn all_converged(&self) -> bool {
        self.local.converged && self.local_limit.converged && self.rows.iter().all(|r| r.converged)
    }
}

/// Normalized fractional eigenvalues along `s_list`, compared with the local
/// eigenvalue and with the minimum of the limit functional.
pub fn s_sweep<T: Real>(
    p: &ExponentVector<T>,
    grid: &TensorGrid<T>,
    s_list: &[FractionalVector<T>],
    window: &Window,
    config: &SolveConfig,
) -> Result<SweepTable<T>> {
    if s_list.is_empty() {
        return Err(Error::Domain("s sweep needs at least one s".into()));
    }
    let local = minimize_local(p, grid, config)?;
    let local_limit = minimize_local_limit(p, grid, config)?;
    let reports = s_list
        .iter()
        .map(|s| {
            let setup = FractionalSetup::new(s.clone(), p.clone()).with_window(window.clone());
            minimize_fractional(&setup, grid, config)
        })
        .collect::<Result<Vec<_>>>()?;
    let rows = s_list
        .iter()
        .zip(&reports)
        .map(|(s, rep)| SweepRow {
            s: s.as_slice().to_vec(),
            lambda_s: rep.lambda,
            lambda_local: local.lambda,
            lambda_local_limit: local_limit.lambda,
            ratio: rep.lambda / local_limit.lambda,
            converged: rep.converged,
        })
        .collect();
    Ok(SweepTable {
        rows,
        reports,
        local,
        local_limit,
    })
}

/// Whether all nonzero values share one sign.
pub fn is_single_signed<T: Real>(u: &GridFunction<T>) -> bool {
    let pos = u.values().iter().any(|&v| v > T::zero());
    let neg = u.values().iter().any(|&v| v < T::zero());
    !(pos && neg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{sample, BoxDomain};
    use std::f64::consts::PI;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn config_validation() {
        assert!(SolveConfig::default().validate().is_ok());
        let bad = SolveConfig {
            backtrack_factor: 1.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = SolveConfig {
            tol_residual: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = SolveConfig {
            max_iter: 0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn quotients_are_scale_invariant() {
        let g = TensorGrid::<f64>::unit(2, 9).unwrap();
        let u = sample(|x| x[0] * (1.0 - x[0]) * (x[1] + 0.3).sin(), &g).unwrap();
        let p = ExponentVector::<f64>::new(vec![1.5, 2.5]).unwrap();
        let setup = FractionalSetup::new(FractionalVector::<f64>::new(vec![0.4, 0.6]).unwrap(), p.clone());
        let q = rayleigh_local(&u, &p).unwrap();
        let qs = rayleigh_fractional(&u, &setup).unwrap();
        for t in [-1.0, 0.5, 7.0] {
            assert!(rel(rayleigh_local(&u.scaled(t), &p).unwrap(), q) < 1e-12);
            assert!(rel(rayleigh_fractional(&u.scaled(t), &setup).unwrap(), qs) < 1e-12);
        }
        for axis in 0..2 {
            assert!(rel(rayleigh_fractional(&u.reflected(axis), &setup).unwrap(), qs) < 1e-12);
        }
        let z = GridFunction::zeros(g);
        assert!(matches!(rayleigh_local(&z, &p), Err(Error::ZeroField(_))));
        assert!(matches!(rayleigh_fractional(&z, &setup), Err(Error::ZeroField(_))));
    }

    #[test]
    fn sine_quotients() {
        let g = TensorGrid::<f64>::unit(1, 255).unwrap();
        let u = sample(|x| (PI * x[0]).sin(), &g).unwrap();
        let p = ExponentVector::<f64>::uniform(2.0, 1).unwrap();
        assert!(rel(rayleigh_local(&u, &p).unwrap(), PI) < 0.01);

        let g = TensorGrid::<f64>::unit(2, 63).unwrap();
        let u = sample(|x| (PI * x[0]).sin() * (PI * x[1]).sin(), &g).unwrap();
        let p = ExponentVector::<f64>::uniform(2.0, 2).unwrap();
        assert!(rel(rayleigh_local(&u, &p).unwrap(), 2.0 * PI) < 0.02);
    }

    #[test]
    fn local_solve_small_1d() {
        let g = TensorGrid::<f64>::unit(1, 31).unwrap();
        let p = ExponentVector::<f64>::uniform(2.0, 1).unwrap();
        let rep = minimize_local(&p, &g, &SolveConfig::default()).unwrap();
        assert!(rep.converged, "residual {}", rep.residual);
        // discrete oracle: (2/Δ) sin(πΔ/2)
        let h = 1.0 / 32.0;
        let exact = 2.0 / h * (PI * h / 2.0).sin();
        assert!(rel(rep.lambda, exact) < 1e-9, "{} vs {exact}", rep.lambda);
        assert!(rep.history.windows(2).all(|w| w[1].q <= w[0].q));
        assert!(is_single_signed(&rep.u));
        assert!((mixed_norm(&rep.u, &p).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn plain_gradient_matches_preconditioned() {
        let g = TensorGrid::<f64>::new(BoxDomain::<f64>::new(vec![0.0, 0.0], vec![1.0, 2.0]).unwrap(), vec![9, 12]).unwrap();
        let p = ExponentVector::<f64>::new(vec![2.0, 2.5]).unwrap();
        let plain = SolveConfig {
            precondition: false,
            ..Default::default()
        };
        let a = minimize_local(&p, &g, &plain).unwrap();
        let b = minimize_local(&p, &g, &SolveConfig::default()).unwrap();
        assert!(a.converged && b.converged);
        assert!(b.iterations < a.iterations);
        assert!(rel(a.lambda, b.lambda) < 1e-9, "{} vs {}", a.lambda, b.lambda);
        for rep in [&a, &b] {
            let noise = 64.0 * f64::EPSILON * rep.lambda;
            assert!(rep.history.windows(2).all(|w| w[1].q <= w[0].q + noise));
        }
    }

    #[test]
    fn local_solve_anisotropic_exponents() {
        let g = TensorGrid::<f64>::new(BoxDomain::<f64>::unit(2).unwrap(), vec![11, 9]).unwrap();
        let p = ExponentVector::<f64>::new(vec![1.5, 3.0]).unwrap();
        let rep = minimize_local(&p, &g, &SolveConfig::default()).unwrap();
        assert!(rep.converged, "residual {}", rep.residual);
        assert!(rep.lambda > 0.0);
        let h = gradient_norm(&rep.u, &p).unwrap();
        assert!((rep.lambda - h).abs() < 1e-10);
        assert!(is_single_signed(&rep.u));
    }

    #[test]
    fn fractional_solve_reports_quotient() {
        let g = TensorGrid::<f64>::unit(1, 15).unwrap();
        let setup = FractionalSetup::new(
            FractionalVector::<f64>::uniform(0.5, 1).unwrap(),
            ExponentVector::<f64>::uniform(2.0, 1).unwrap(),
        );
        let rep = minimize_fractional(&setup, &g, &SolveConfig::default()).unwrap();
        assert!(rep.converged);
        assert!(rel(rep.lambda, rayleigh_fractional(&rep.u, &setup).unwrap()) < 1e-10);

        let doubled = setup.clone().with_window(Window::Uniform(2 * Window::required(15)));
        let rep2 = minimize_fractional(&doubled, &g, &SolveConfig::default()).unwrap();
        assert!(rel(rep2.lambda, rep.lambda) < 1e-6);
    }

    #[test]
    fn unconverged_is_reported_not_raised() {
        let g = TensorGrid::<f64>::unit(1, 31).unwrap();
        let p = ExponentVector::<f64>::uniform(2.0, 1).unwrap();
        let cfg = SolveConfig {
            max_iter: 2,
            tol_residual: 1e-14,
            restarts: 1,
            ..Default::default()
        };
        let rep = minimize_local(&p, &g, &cfg).unwrap();
        assert!(!rep.converged);
        assert!(rep.iterations <= 2);
    }

    #[test]
    fn restarts_are_reproducible() {
        let g = TensorGrid::<f64>::unit(1, 15).unwrap();
        let a = random_start(&g, 7, 1);
        let b = random_start(&g, 7, 1);
        let c = random_start(&g, 7, 2);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.values().iter().all(|&v| v > 0.0 && v <= 1.0));
    }
}
