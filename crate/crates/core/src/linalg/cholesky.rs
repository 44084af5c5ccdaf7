use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// Lower-triangular Cholesky factor `G` with `G·Gᵀ = S`.
#[derive(Debug, Clone)]
pub struct Cholesky<T> {
    factor: Matrix<T>,
}

impl<T: Scalar> Cholesky<T> {
    /// Factors a symmetric positive definite matrix. Only the lower triangle
    /// of `s` is read.
    pub fn factor(s: &Matrix<T>) -> Result<Self> {
        let (n, m) = s.shape();
        if n != m {
            return Err(Error::dims("cholesky", s.shape(), s.shape()));
        }
        let mut g = Matrix::zeros(n, n);
        for j in 0..n {
            let mut diag = s[(j, j)];
            for k in 0..j {
                diag -= g[(j, k)] * g[(j, k)];
            }
            if !(diag > T::zero()) {
                return Err(Error::NotPositiveDefinite {
                    pivot: j,
                    value: diag.as_f64(),
                });
            }
            let pivot = diag.sqrt();
            g[(j, j)] = pivot;
            for i in j + 1..n {
                let (gi, gj) = (g.row(i), g.row(j));
                let mut acc = s[(i, j)];
                for k in 0..j {
                    acc -= gi[k] * gj[k];
                }
                g[(i, j)] = acc / pivot;
            }
        }
        Ok(Self { factor: g })
    }

    pub fn lower(&self) -> &Matrix<T> {
        &self.factor
    }

    pub fn into_lower(self) -> Matrix<T> {
        self.factor
    }

    pub fn dim(&self) -> usize {
        self.factor.rows()
    }

    /// Solves `G·Gᵀ x = rhs` in place.
    pub fn solve_in_place(&self, rhs: &mut [T]) {
        let g = &self.factor;
        let n = g.rows();
        debug_assert_eq!(rhs.len(), n);
        for i in 0..n {
            let row = g.row(i);
            let mut acc = rhs[i];
            for k in 0..i {
                acc -= row[k] * rhs[k];
            }
            rhs[i] = acc / row[i];
        }
        for i in (0..n).rev() {
            let mut acc = rhs[i];
            for k in i + 1..n {
                acc -= g[(k, i)] * rhs[k];
            }
            rhs[i] = acc / g[(i, i)];
        }
    }
}

/// Lower-triangular `G` with `G·Gᵀ = s`.
pub fn cholesky_factor<T: Scalar>(s: &Matrix<T>) -> Result<Matrix<T>> {
    Cholesky::factor(s).map(Cholesky::into_lower)
}
