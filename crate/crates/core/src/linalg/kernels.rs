//! Products used by the forward pass and the normal equations.
//!
//! Every output entry is accumulated over the shared dimension in ascending
//! index order, whichever worker computes it. Work is split by output rows
//! only, so results are bitwise identical for any worker count.
//!
//! Zero multiplicands are skipped. The accumulators start at `+0.0` and can
//! never become `-0.0`, so skipping a `±0.0` product leaves every bit of the
//! result unchanged (for finite inputs).

use std::ops::Range;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// Splits `0..n` into at most `workers` contiguous, nearly equal ranges.
pub(crate) fn partition(n: usize, workers: usize) -> Vec<Range<usize>> {
    let parts = workers.max(1).min(n.max(1));
    let base = n / parts;
    let extra = n % parts;
    let mut out = Vec::with_capacity(parts);
    let mut start = 0;
    for p in 0..parts {
        let len = base + usize::from(p < extra);
        out.push(start..start + len);
        start += len;
    }
    out
}

/// Runs `f(row_range, rows_chunk)` over disjoint row blocks of a row-major
/// buffer with `width` columns, one scoped thread per block.
pub(crate) fn for_row_blocks<T, F>(buf: &mut [T], width: usize, workers: usize, f: F)
where
    T: Send,
    F: Fn(Range<usize>, &mut [T]) + Sync,
{
    let n = if width == 0 { 0 } else { buf.len() / width };
    let ranges = partition(n, workers);
    if ranges.len() <= 1 {
        f(0..n, buf);
        return;
    }
    std::thread::scope(|s| {
        let mut rest = buf;
        for r in ranges {
            let (chunk, tail) = rest.split_at_mut(r.len() * width);
            rest = tail;
            let f = &f;
            s.spawn(move || f(r, chunk));
        }
    });
}

/// `a · b`.
pub fn matmul<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> Result<Matrix<T>> {
    matmul_with_workers(a, b, 1)
}

pub fn matmul_with_workers<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>, workers: usize) -> Result<Matrix<T>> {
    if a.cols() != b.rows() {
        return Err(Error::dims("matmul", a.shape(), b.shape()));
    }
    let (n, m) = (a.cols(), b.cols());
    let mut out = vec![T::zero(); a.rows() * m];
    for_row_blocks(&mut out, m, workers, |rows, chunk| {
        for (local, i) in rows.enumerate() {
            let dst = &mut chunk[local * m..(local + 1) * m];
            let src = a.row(i);
            for k in 0..n {
                let aik = src[k];
                if aik == T::zero() {
                    continue;
                }
                for (d, &bkj) in dst.iter_mut().zip(b.row(k)) {
                    *d += aik * bkj;
                }
            }
        }
    });
    Matrix::new(a.rows(), m, out)
}

/// `aᵀ · a`, exactly symmetric: the upper triangle is accumulated and
/// mirrored into the lower one.
pub fn gram<T: Scalar>(a: &Matrix<T>) -> Matrix<T> {
    gram_with_workers(a, 1)
}

pub fn gram_with_workers<T: Scalar>(a: &Matrix<T>, workers: usize) -> Matrix<T> {
    let n = a.cols();
    let mut g = vec![T::zero(); n * n];
    for_row_blocks(&mut g, n, workers, |rows, chunk| {
        let mut nz_idx: Vec<usize> = Vec::with_capacity(n);
        let mut nz_val: Vec<T> = Vec::with_capacity(n);
        for r in a.row_iter() {
            nz_idx.clear();
            nz_val.clear();
            for (j, &v) in r.iter().enumerate() {
                if v != T::zero() {
                    nz_idx.push(j);
                    nz_val.push(v);
                }
            }
            if nz_idx.len() * 2 > n {
                // dense row: contiguous update, vectorizes
                for i in rows.clone() {
                    let ai = r[i];
                    if ai == T::zero() {
                        continue;
                    }
                    let local = i - rows.start;
                    let dst = &mut chunk[local * n + i..(local + 1) * n];
                    for (d, &aj) in dst.iter_mut().zip(&r[i..]) {
                        *d += ai * aj;
                    }
                }
            } else {
                let lo = nz_idx.partition_point(|&j| j < rows.start);
                let hi = nz_idx.partition_point(|&j| j < rows.end);
                for p in lo..hi {
                    let i = nz_idx[p];
                    let ai = nz_val[p];
                    let dst = &mut chunk[(i - rows.start) * n..(i - rows.start + 1) * n];
                    for q in p..nz_idx.len() {
                        dst[nz_idx[q]] += ai * nz_val[q];
                    }
                }
            }
        }
    });
    for i in 0..n {
        for j in 0..i {
            g[i * n + j] = g[j * n + i];
        }
    }
    Matrix::new(n, n, g).expect("gram buffer has n*n entries")
}

/// `aᵀ · b` without materializing the transpose.
pub fn transpose_matmul<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> Result<Matrix<T>> {
    transpose_matmul_with_workers(a, b, 1)
}

pub fn transpose_matmul_with_workers<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>, workers: usize) -> Result<Matrix<T>> {
    if a.rows() != b.rows() {
        return Err(Error::dims("transpose_matmul", a.shape(), b.shape()));
    }
    let (n, m) = (a.cols(), b.cols());
    let mut out = vec![T::zero(); n * m];
    for_row_blocks(&mut out, m, workers, |rows, chunk| {
        for (ar, br) in a.row_iter().zip(b.row_iter()) {
            for i in rows.clone() {
                let ai = ar[i];
                if ai == T::zero() {
                    continue;
                }
                let local = i - rows.start;
                for (d, &bj) in chunk[local * m..(local + 1) * m].iter_mut().zip(br) {
                    *d += ai * bj;
                }
            }
        }
    });
    Matrix::new(n, m, out)
}
