//! Seeded invariant suite behind `aniso check`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::exponents::{ExponentVector, FractionalVector};
use crate::grid::{BoxDomain, GridFunction, TensorGrid};
use crate::norms::{fractional_seminorm, gradient_norm, mixed_norm, FractionalSetup, Window};
use crate::variations::{
    default_steps, dual_norm, f_p, gateaux_check, h_prime_apply, hs_prime_apply, pairing, Functional,
};

/// A random grid, exponents, fractional orders and two fields on it.
#[derive(Debug, Clone)]
pub struct Instance {
    pub p: ExponentVector<f64>,
    pub s: FractionalVector<f64>,
    pub u: GridFunction<f64>,
    pub v: GridFunction<f64>,
}

impl Instance {
    pub fn setup(&self) -> FractionalSetup<f64> {
        FractionalSetup::new(self.s.clone(), self.p.clone())
    }
}

/// Dimension `n`, sorted exponents in `[1.2, 4]`, orders in `[0.2, 0.9]`,
/// a box with sides in `[0.5, 2]` and 3 to `max_count` nodes per axis.
pub fn random_instance(rng: &mut ChaCha8Rng, n: usize, max_count: usize) -> Instance {
    let mut p: Vec<f64> = (0..n).map(|_| rng.gen_range(1.2..=4.0)).collect();
    p.sort_by(f64::total_cmp);
    let s: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..0.9)).collect();
    let lower: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let upper: Vec<f64> = lower.iter().map(|a| a + rng.gen_range(0.5..2.0)).collect();
    let counts: Vec<usize> = (0..n).map(|_| rng.gen_range(3..=max_count)).collect();
    let grid = TensorGrid::new(BoxDomain::new(lower, upper).unwrap(), counts).unwrap();
    let field = |rng: &mut ChaCha8Rng| {
        let vals = (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        GridFunction::new(grid.clone(), vals).unwrap()
    };
    let u = field(rng);
    let v = field(rng);
    Instance {
        p: ExponentVector::new(p).unwrap(),
        s: FractionalVector::new(s).unwrap(),
        u,
        v,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckRow {
    pub invariant: &'static str,
    /// Worst value seen; an error for most rows, the smallest inner product
    /// for `monotonicity`.
    pub value: f64,
    pub pass: bool,
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

#[derive(Default)]
struct Worst {
    max: f64,
}

impl Worst {
    fn see(&mut self, x: f64) {
        // NaN must fail the row, so it wins
        if x.is_nan() || x > self.max {
            self.max = x;
        }
    }
}

/// Runs every invariant on `instances` random problems per dimension 1..=3.
pub fn run_checks(seed: u64, instances: usize) -> Result<Vec<CheckRow>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut duality = Worst::default();
    let mut pairing_euler = Worst::default();
    let mut h_euler = Worst::default();
    let mut hs_euler = Worst::default();
    let mut homogeneity = Worst::default();
    let mut oddness = Worst::default();
    let mut gateaux = [Worst::default(), Worst::default(), Worst::default()];
    let mut monotone_min = f64::INFINITY;
    let mut bounded = Worst { max: f64::NEG_INFINITY };
    let mut window = Worst::default();

    for n in 1..=3 {
        let max_count = [12, 7, 4][n - 1];
        for _ in 0..instances {
            let inst = random_instance(&mut rng, n, max_count);
            let (p, u, v) = (&inst.p, &inst.u, &inst.v);
            let setup = inst.setup();

            let f = f_p(u, p)?;
            let i_u = mixed_norm(u, p)?;
            duality.see(rel(dual_norm(&f, p)?, 1.0));
            pairing_euler.see(rel(pairing(&f, u)?, i_u));
            let h_u = gradient_norm(u, p)?;
            h_euler.see(rel(h_prime_apply(u, u, p)?, h_u));
            let hs_u = fractional_seminorm(u, &setup)?;
            hs_euler.see(rel(hs_prime_apply(u, u, &setup)?, hs_u));

            for t in [-2.0, 0.5, 10.0] {
                let tu = u.scaled(t);
                homogeneity.see(rel(mixed_norm(&tu, p)?, t.abs() * i_u));
                homogeneity.see(rel(gradient_norm(&tu, p)?, t.abs() * h_u));
                homogeneity.see(rel(fractional_seminorm(&tu, &setup)?, t.abs() * hs_u));
            }
            let f_neg = f_p(&u.scaled(-1.0), p)?;
            for (a, b) in f_neg.values().iter().zip(f.values()) {
                oddness.see((a + b).abs());
            }

            let functionals = [
                Functional::MixedNorm(p.clone()),
                Functional::Gradient(p.clone()),
                Functional::Fractional(setup.clone()),
            ];
            for (worst, func) in gateaux.iter_mut().zip(&functionals) {
                worst.see(gateaux_check(func, u, v, &default_steps())?.min_relative_error);
            }

            let diff = u.axpy(-1.0, v)?;
            let mono = h_prime_apply(u, &diff, p)? - h_prime_apply(v, &diff, p)?;
            monotone_min = monotone_min.min(mono);
            bounded.see(h_prime_apply(u, v, p)?.abs() - gradient_norm(v, p)?);

            let counts = u.grid().counts();
            let minimal = counts.iter().map(|&c| Window::required(c)).max().unwrap();
            let base = fractional_seminorm(u, &setup.clone().with_window(Window::Uniform(minimal)))?;
            let doubled = fractional_seminorm(u, &setup.clone().with_window(Window::Uniform(2 * minimal)))?;
            window.see(rel(doubled, base));
        }
    }

    let row = |invariant, value: f64, tol: f64| CheckRow {
        invariant,
        value,
        pass: value <= tol,
    };
    Ok(vec![
        row("duality", duality.max, 1e-10),
        row("euler_mixed_norm", pairing_euler.max, 1e-10),
        row("euler_gradient", h_euler.max, 1e-10),
        row("euler_fractional", hs_euler.max, 1e-10),
        row("homogeneity", homogeneity.max, 1e-12),
        row("oddness", oddness.max, 0.0),
        row("gateaux_mixed_norm", gateaux[0].max, 1e-5),
        row("gateaux_gradient", gateaux[1].max, 1e-5),
        row("gateaux_fractional", gateaux[2].max, 1e-4),
        CheckRow {
            invariant: "monotonicity",
            value: monotone_min,
            pass: monotone_min >= -1e-12,
        },
        row("boundedness", bounded.max, 1e-10),
        row("window_doubling", window.max, 1e-10),
    ])
}
