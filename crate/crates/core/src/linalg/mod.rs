//! Dense matrices and the ridge least-squares solver behind every layer solve.

mod cholesky;
mod kernels;
mod matrix;
mod ridge;

pub use cholesky::{cholesky_factor, Cholesky};
pub use kernels::{
    gram, gram_with_workers, matmul, matmul_with_workers, transpose_matmul, transpose_matmul_with_workers,
};
pub use matrix::Matrix;
pub use ridge::{
    batched_solve_partitioned, normal_equation_residual, ridge_objective, solve_ridge_ls, RidgeConfig,
    DEFAULT_RIDGE_EPSILON,
};
