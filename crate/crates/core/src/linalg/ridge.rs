//! Ridge-regularized multi-right-hand-side least squares.
//!
//! Solves `(AᵀA + εI) W = AᵀB` through one Cholesky factorization of the
//! shifted Gram matrix. No inverse is formed. Every column of `B` is an
//! independent system that shares the factor, so the columns can be handed
//! to separate workers without changing a single bit of the result.

use crate::error::{Error, Result};
use crate::linalg::kernels::{gram_with_workers, partition, transpose_matmul_with_workers};
use crate::linalg::{Cholesky, Matrix};
use crate::scalar::Scalar;

pub const DEFAULT_RIDGE_EPSILON: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RidgeConfig {
    /// Strength of the `ε‖W‖²` penalty. Must be finite and non-negative.
    pub epsilon: f64,
}

impl Default for RidgeConfig {
    fn default() -> Self {
        Self {
            epsilon: DEFAULT_RIDGE_EPSILON,
        }
    }
}

impl RidgeConfig {
    pub fn new(epsilon: f64) -> Result<Self> {
        let cfg = Self { epsilon };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon >= 0.0) || !self.epsilon.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "ridge epsilon must be finite and >= 0, got {}",
                self.epsilon
            )));
        }
        Ok(())
    }
}

/// `argmin_W ‖A·W − B‖² + ε‖W‖²`, shape `a.cols() × b.cols()`.
pub fn solve_ridge_ls<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>, cfg: RidgeConfig) -> Result<Matrix<T>> {
    batched_solve_partitioned(a, b, cfg, 1)
}

/// Same result as [`solve_ridge_ls`], bit for bit, with the Gram product,
/// `AᵀB` and the per-column triangular solves spread over `workers` threads.
pub fn batched_solve_partitioned<T: Scalar>(
    a: &Matrix<T>,
    b: &Matrix<T>,
    cfg: RidgeConfig,
    workers: usize,
) -> Result<Matrix<T>> {
    cfg.validate()?;
    if a.rows() != b.rows() {
        return Err(Error::dims("solve_ridge_ls", a.shape(), b.shape()));
    }
    if a.rows() == 0 || a.cols() == 0 {
        return Err(Error::Empty("least-squares design matrix"));
    }
    let n = a.cols();
    let k = b.cols();

    let mut s = gram_with_workers(a, workers);
    let eps = T::lit(cfg.epsilon);
    for i in 0..n {
        s[(i, i)] += eps;
    }
    let chol = Cholesky::factor(&s)?;
    let rhs = transpose_matmul_with_workers(a, b, workers)?;

    let solve_cols = |cols: std::ops::Range<usize>| -> Vec<Vec<T>> {
        cols.map(|j| {
            let mut x = rhs.col_to_vec(j);
            chol.solve_in_place(&mut x);
            x
        })
        .collect()
    };

    let ranges = partition(k, workers);
    let solved: Vec<Vec<T>> = if ranges.len() <= 1 {
        solve_cols(0..k)
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = ranges
                .into_iter()
                .map(|r| {
                    let solve_cols = &solve_cols;
                    scope.spawn(move || solve_cols(r))
                })
                .collect();
            handles
                .into_iter()
                .flat_map(|h| h.join().expect("ridge solve worker panicked"))
                .collect()
        })
    };

    let mut w = Matrix::zeros(n, k);
    for (j, col) in solved.iter().enumerate() {
        for (i, &v) in col.iter().enumerate() {
            w[(i, j)] = v;
        }
    }
    Ok(w)
}

/// `‖A·W − B‖²_F + ε‖W‖²_F`.
pub fn ridge_objective<T: Scalar>(a: &Matrix<T>, w: &Matrix<T>, b: &Matrix<T>, epsilon: f64) -> Result<T> {
    let fit = crate::linalg::matmul(a, w)?.sub(b)?;
    Ok(fit.squared_norm() + T::lit(epsilon) * w.squared_norm())
}

/// `(AᵀA + εI)·W − AᵀB`, the gradient of the ridge objective up to a factor 2.
pub fn normal_equation_residual<T: Scalar>(
    a: &Matrix<T>,
    w: &Matrix<T>,
    b: &Matrix<T>,
    epsilon: f64,
) -> Result<Matrix<T>> {
    let g = gram_with_workers(a, 1);
    let gw = crate::linalg::matmul(&g, w)?;
    let reg = w.scale(T::lit(epsilon));
    let atb = transpose_matmul_with_workers(a, b, 1)?;
    gw.add(&reg)?.sub(&atb)
}
