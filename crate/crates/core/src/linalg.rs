//! Thin wrappers over faer for the dense complex algebra used throughout.

use faer::linalg::solvers::PartialPivLu;
use faer::prelude::*;
use faer::Mat;

use crate::{Error, Result, C64};

pub type CMat = Mat<C64>;
pub type RMat = Mat<f64>;

pub fn identity(n: usize) -> CMat {
    CMat::from_fn(n, n, |i, j| if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) })
}

pub fn scaled_identity(n: usize, c: f64) -> CMat {
    CMat::from_fn(n, n, |i, j| if i == j { C64::new(c, 0.0) } else { C64::new(0.0, 0.0) })
}

pub fn frobenius(a: &CMat) -> f64 {
    let mut s = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            s += a[(i, j)].norm_sqr();
        }
    }
    s.sqrt()
}

pub fn to_complex(a: &RMat) -> CMat {
    CMat::from_fn(a.nrows(), a.ncols(), |i, j| C64::new(a[(i, j)], 0.0))
}

pub fn column(v: &[C64]) -> CMat {
    CMat::from_fn(v.len(), 1, |i, _| v[i])
}

pub fn to_vec(a: &CMat) -> Vec<C64> {
    (0..a.nrows()).map(|i| a[(i, 0)]).collect()
}

/// Singular values in nonincreasing order.
pub fn singular_values(a: &CMat) -> Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    a.singular_values().expect("singular value iteration failed")
}

pub fn real_singular_values(a: &RMat) -> Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    a.singular_values().expect("singular value iteration failed")
}

pub fn min_singular_value(a: &CMat) -> f64 {
    singular_values(a).last().copied().unwrap_or(0.0)
}

/// LU factorization with a cheap estimate of the smallest singular value.
pub struct Lu {
    lu: PartialPivLu<C64>,
    n: usize,
}

impl Lu {
    pub fn new(a: &CMat) -> Self {
        assert_eq!(a.nrows(), a.ncols(), "LU needs a square matrix");
        Lu { lu: a.partial_piv_lu(), n: a.nrows() }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, rhs: &CMat) -> CMat {
        let mut x = rhs.clone();
        self.lu.solve_in_place(x.as_mut());
        x
    }

    pub fn solve_vec(&self, rhs: &[C64]) -> Vec<C64> {
        to_vec(&self.solve(&column(rhs)))
    }

    pub fn solve_adjoint(&self, rhs: &CMat) -> CMat {
        let mut x = rhs.clone();
        self.lu.solve_adjoint_in_place(x.as_mut());
        x
    }

    pub fn inverse(&self) -> CMat {
        self.solve(&identity(self.n))
    }

    /// Estimate of the smallest singular value by power iteration on
    /// (A^H A)^{-1}.  Accurate to a few digits, which is all the
    /// conditioning checks need.
    pub fn min_singular_estimate(&self) -> f64 {
        if self.n == 0 {
            return f64::INFINITY;
        }
        let mut x = CMat::from_fn(self.n, 1, |i, _| {
            C64::new(1.0 + 0.37 * ((i * 7919) % 13) as f64, 0.21 * ((i * 104729) % 7) as f64)
        });
        let mut growth = 0.0;
        for _ in 0..12 {
            let nx = frobenius(&x);
            if !(nx.is_finite()) || nx == 0.0 {
                return 0.0;
            }
            x = CMat::from_fn(self.n, 1, |i, _| x[(i, 0)] / nx);
            let y = self.solve(&x);
            let z = self.solve_adjoint(&y);
            growth = frobenius(&z);
            x = z;
        }
        if growth.is_finite() && growth > 0.0 {
            1.0 / growth.sqrt()
        } else {
            0.0
        }
    }
}

pub fn solve(a: &CMat, b: &CMat) -> CMat {
    Lu::new(a).solve(b)
}

/// Inverse with a singularity guard based on the smallest singular value
/// relative to the largest.
pub fn checked_inverse(a: &CMat, rel_tol: f64, z: C64) -> Result<CMat> {
    let s = singular_values(a);
    let (hi, lo) = (s.first().copied().unwrap_or(0.0), s.last().copied().unwrap_or(0.0));
    if !(lo > rel_tol * hi) {
        return Err(Error::NearSingularGamma { z, sigma: lo });
    }
    Ok(Lu::new(a).inverse())
}

pub fn matmul(a: &CMat, b: &CMat) -> CMat {
    a * b
}

/// Builds an `rows x cols` matrix, evaluating columns in parallel.
pub fn par_matrix<F>(rows: usize, cols: usize, f: F) -> CMat
where
    F: Fn(usize, usize) -> C64 + Sync,
{
    use rayon::prelude::*;
    let data: Vec<Vec<C64>> = (0..cols)
        .into_par_iter()
        .map(|j| (0..rows).map(|i| f(i, j)).collect())
        .collect();
    CMat::from_fn(rows, cols, |i, j| data[j][i])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn min_singular_estimate_tracks_svd() {
        let a = CMat::from_fn(30, 30, |i, j| {
            let d = if i == j { 2.0 + i as f64 * 0.1 } else { 0.0 };
            C64::new(d + 0.05 * ((i * 3 + j) % 7) as f64, 0.02 * ((i + 5 * j) % 3) as f64)
        });
        let exact = min_singular_value(&a);
        let est = Lu::new(&a).min_singular_estimate();
        assert!((est - exact).abs() < 1e-3 * exact, "{est} vs {exact}");
    }

    #[test]
    fn lu_solves() {
        let a = CMat::from_fn(5, 5, |i, j| C64::new(if i == j { 4.0 } else { 1.0 / (1.0 + (i + j) as f64) }, 0.3));
        let b = CMat::from_fn(5, 2, |i, j| C64::new(i as f64, j as f64));
        let x = solve(&a, &b);
        let r = &a * &x - &b;
        assert!(frobenius(&r) < 1e-12);
    }
}
