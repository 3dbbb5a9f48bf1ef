//! The discrete Dirichlet Laplacian `L = sum_i D_i^* D_i` and its exact
//! inverse by separable sine transforms.

use super::{forward_diff, GridFunction, TensorGrid};
use crate::error::{Error, Result};
use crate::scalar::{pairwise_sum, Real};

/// Precomputed sine bases and eigenvalues for one grid.
#[derive(Debug, Clone)]
pub struct DirichletLaplacian<T> {
    grid: TensorGrid<T>,
    /// Orthonormal DST-I matrix per axis, row-major `count x count`.
    sines: Vec<Vec<T>>,
    /// Eigenvalues of `D_i^* D_i` along each axis.
    eigenvalues: Vec<Vec<T>>,
}

impl<T: Real> DirichletLaplacian<T> {
    pub fn new(grid: &TensorGrid<T>) -> Self {
        let mut sines = Vec::with_capacity(grid.dim());
        let mut eigenvalues = Vec::with_capacity(grid.dim());
        for axis in 0..grid.dim() {
            let m = grid.counts()[axis];
            let np1 = T::from_usize_lossy(m + 1);
            let norm = (T::lit(2.0) / np1).sqrt();
            let mut s = vec![T::zero(); m * m];
            for j in 0..m {
                for k in 0..m {
                    // the argument is reduced mod 2(m+1) so the sine sees small angles
                    let r = ((j + 1) * (k + 1)) % (2 * (m + 1));
                    s[j * m + k] = norm * (T::PI() * T::from_usize_lossy(r) / np1).sin();
                }
            }
            let h = grid.spacing(axis);
            let ev = (0..m)
                .map(|k| {
                    let t = (T::PI() * T::from_usize_lossy(k + 1) / (T::lit(2.0) * np1)).sin();
                    T::lit(4.0) * t * t / (h * h)
                })
                .collect();
            sines.push(s);
            eigenvalues.push(ev);
        }
        Self {
            grid: grid.clone(),
            sines,
            eigenvalues,
        }
    }

    pub fn grid(&self) -> &TensorGrid<T> {
        &self.grid
    }

    fn transform(&self, values: &mut [T], axis: usize) {
        let m = self.grid.counts()[axis];
        let stride = self.grid.stride(axis);
        let s = &self.sines[axis];
        let mut line = vec![T::zero(); m];
        for start in self.grid.line_starts(axis) {
            for (k, x) in line.iter_mut().enumerate() {
                *x = values[start + k * stride];
            }
            for j in 0..m {
                let row = &s[j * m..(j + 1) * m];
                values[start + j * stride] = row.iter().zip(&line).fold(T::zero(), |acc, (&a, &b)| acc + a * b);
            }
        }
    }

    /// `L^{-1} r`.
    pub fn solve(&self, r: &GridFunction<T>) -> Result<GridFunction<T>> {
        if r.grid() != &self.grid {
            return Err(Error::GridMismatch);
        }
        let mut v = r.values().to_vec();
        for axis in 0..self.grid.dim() {
            self.transform(&mut v, axis);
        }
        let counts = self.grid.counts();
        let strides: Vec<usize> = (0..counts.len()).map(|a| self.grid.stride(a)).collect();
        for (flat, x) in v.iter_mut().enumerate() {
            let lambda = (0..counts.len()).fold(T::zero(), |acc, axis| {
                acc + self.eigenvalues[axis][(flat / strides[axis]) % counts[axis]]
            });
            *x = *x / lambda;
        }
        for axis in 0..self.grid.dim() {
            self.transform(&mut v, axis);
        }
        GridFunction::new(self.grid.clone(), v)
    }

    /// `<L u, u> = sum_i ||D_i u||_2^2` with the grid quadrature.
    pub fn energy(&self, u: &GridFunction<T>) -> Result<T> {
        if u.grid() != &self.grid {
            return Err(Error::GridMismatch);
        }
        let vol = self.grid.cell_volume();
        Ok((0..self.grid.dim())
            .map(|axis| {
                let g = forward_diff(u, axis);
                let sq: Vec<T> = g.values().iter().map(|&x| x * x).collect();
                pairwise_sum(&sq) * vol
            })
            .fold(T::zero(), |a, b| a + b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{forward_diff_adjoint, BoxDomain};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn apply(u: &GridFunction<f64>) -> Vec<f64> {
        let mut out = vec![0.0; u.grid().len()];
        for axis in 0..u.dim() {
            let r = forward_diff_adjoint(&forward_diff(u, axis), u.grid());
            for (o, x) in out.iter_mut().zip(r) {
                *o += x;
            }
        }
        out
    }

    #[test]
    fn solve_inverts_the_stencil() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let dom = BoxDomain::<f64>::new(vec![0.0, -1.0, 0.5], vec![1.0, 1.0, 1.25]).unwrap();
        let g = TensorGrid::<f64>::new(dom, vec![5, 4, 6]).unwrap();
        let vals = (0..g.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let r = GridFunction::new(g.clone(), vals).unwrap();
        let lap = DirichletLaplacian::new(&g);
        let d = lap.solve(&r).unwrap();
        for (a, b) in apply(&d).iter().zip(r.values()) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
        let e = lap.energy(&d).unwrap();
        let pair: f64 = apply(&d).iter().zip(d.values()).map(|(a, b)| a * b).sum::<f64>() * g.cell_volume();
        assert!((e - pair).abs() < 1e-12 * e);
    }

    #[test]
    fn one_dimensional_tridiagonal() {
        // L = tridiag(-1, 2, -1) / h^2 with h = 1/4
        let g = TensorGrid::<f64>::unit(1, 3).unwrap();
        let r = GridFunction::new(g.clone(), vec![16.0, 0.0, 0.0]).unwrap();
        let d = DirichletLaplacian::new(&g).solve(&r).unwrap();
        let want = [0.75, 0.5, 0.25];
        for (a, b) in d.values().iter().zip(want) {
            assert!((a - b).abs() < 1e-14);
        }
    }
}
