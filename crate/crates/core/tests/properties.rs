use aniso_core::exponents::{harmonic_mean, ExponentVector, FractionalVector};
use aniso_core::grid::{BoxDomain, GridFunction, TensorGrid};
use aniso_core::norms::{fractional_seminorm, gradient_norm, mixed_norm, FractionalSetup};
use aniso_core::variations::{dual_norm, f_p, pairing};
use proptest::prelude::*;

#[derive(Debug, Clone)]
struct Case {
    p: Vec<f64>,
    s: Vec<f64>,
    counts: Vec<usize>,
    upper: Vec<f64>,
    u: Vec<f64>,
    v: Vec<f64>,
}

fn case() -> impl Strategy<Value = Case> {
    (1usize..=3)
        .prop_flat_map(|n| {
            (
                prop::collection::vec(1.1f64..5.0, n),
                prop::collection::vec(0.05f64..0.95, n),
                prop::collection::vec(1usize..=5, n),
                prop::collection::vec(0.2f64..3.0, n),
            )
        })
        .prop_flat_map(|(mut p, s, counts, upper)| {
            p.sort_by(f64::total_cmp);
            let len: usize = counts.iter().product();
            (
                Just(p),
                Just(s),
                Just(counts),
                Just(upper),
                prop::collection::vec(-10.0f64..10.0, len),
                prop::collection::vec(-10.0f64..10.0, len),
            )
        })
        .prop_map(|(p, s, counts, upper, u, v)| Case { p, s, counts, upper, u, v })
}

impl Case {
    fn grid(&self) -> TensorGrid<f64> {
        let lower = vec![0.0; self.p.len()];
        TensorGrid::new(BoxDomain::new(lower, self.upper.clone()).unwrap(), self.counts.clone()).unwrap()
    }

    fn fields(&self) -> (GridFunction<f64>, GridFunction<f64>) {
        let g = self.grid();
        (
            GridFunction::new(g.clone(), self.u.clone()).unwrap(),
            GridFunction::new(g, self.v.clone()).unwrap(),
        )
    }

    fn exps(&self) -> ExponentVector<f64> {
        ExponentVector::new(self.p.clone()).unwrap()
    }

    fn setup(&self) -> FractionalSetup<f64> {
        FractionalSetup::new(FractionalVector::new(self.s.clone()).unwrap(), self.exps())
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn absolute_homogeneity(c in case()) {
        let (u, _) = c.fields();
        let p = c.exps();
        let setup = c.setup();
        let (i, h, hs) = (
            mixed_norm(&u, &p).unwrap(),
            gradient_norm(&u, &p).unwrap(),
            fractional_seminorm(&u, &setup).unwrap(),
        );
        for t in [-2.0, 0.5, 10.0] {
            let tu = u.scaled(t);
            prop_assert!(close(mixed_norm(&tu, &p).unwrap(), t.abs() * i, 1e-12));
            prop_assert!(close(gradient_norm(&tu, &p).unwrap(), t.abs() * h, 1e-12));
            prop_assert!(close(fractional_seminorm(&tu, &setup).unwrap(), t.abs() * hs, 1e-12));
        }
    }

    #[test]
    fn triangle_inequality(c in case()) {
        let (u, v) = c.fields();
        let w = u.axpy(1.0, &v).unwrap();
        let p = c.exps();
        let setup = c.setup();
        let slack = |a: f64, b: f64| 1e-12 * (a + b);
        let (iu, iv) = (mixed_norm(&u, &p).unwrap(), mixed_norm(&v, &p).unwrap());
        prop_assert!(mixed_norm(&w, &p).unwrap() <= iu + iv + slack(iu, iv));
        let (hu, hv) = (gradient_norm(&u, &p).unwrap(), gradient_norm(&v, &p).unwrap());
        prop_assert!(gradient_norm(&w, &p).unwrap() <= hu + hv + slack(hu, hv));
        let (su, sv) = (fractional_seminorm(&u, &setup).unwrap(), fractional_seminorm(&v, &setup).unwrap());
        prop_assert!(fractional_seminorm(&w, &setup).unwrap() <= su + sv + slack(su, sv));
    }

    #[test]
    fn duality_map_has_unit_dual_norm(c in case()) {
        let (u, _) = c.fields();
        let p = c.exps();
        let i = mixed_norm(&u, &p).unwrap();
        prop_assume!(i > 0.0);
        let f = f_p(&u, &p).unwrap();
        prop_assert!(close(dual_norm(&f, &p).unwrap(), 1.0, 1e-10));
        prop_assert!(close(pairing(&f, &u).unwrap(), i, 1e-10));
        let neg = f_p(&u.scaled(-1.0), &p).unwrap();
        for (a, b) in neg.values().iter().zip(f.values()) {
            prop_assert_eq!(*a, -*b);
        }
    }

    #[test]
    fn harmonic_mean_is_monotone(
        q in prop::collection::vec(0.1f64..10.0, 1..6),
        k in 0usize..6,
        bump in 0.0f64..5.0,
    ) {
        let k = k % q.len();
        let mut r = q.clone();
        r[k] += bump;
        let (a, b) = (harmonic_mean(&q).unwrap(), harmonic_mean(&r).unwrap());
        prop_assert!(b >= a * (1.0 - 1e-15));
        let lo = q.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = q.iter().copied().fold(0.0, f64::max);
        prop_assert!(a >= lo * (1.0 - 1e-15) && a <= hi * (1.0 + 1e-15));
    }

    #[test]
    fn flatten_round_trip(counts in prop::collection::vec(1usize..7, 1..5)) {
        let n = counts.len();
        let grid = TensorGrid::<f64>::new(BoxDomain::unit(n).unwrap(), counts.clone()).unwrap();
        for flat in 0..grid.len() {
            let idx = grid.unflatten(flat);
            prop_assert_eq!(grid.flatten(&idx), flat);
            // last axis fastest
            if flat + 1 < grid.len() && idx[n - 1] + 1 < counts[n - 1] {
                let next = grid.unflatten(flat + 1);
                prop_assert_eq!(next[n - 1], idx[n - 1] + 1);
                prop_assert_eq!(&next[..n - 1], &idx[..n - 1]);
            }
        }
    }
}
