//! Row-parallel execution hook for matrix builders.

use crate::linalg::Matrix;

/// Runs a row callback over every row of a row-major buffer.
///
/// Implementations may process rows in any order and on any number of
/// threads, but every row must be handed to exactly one call of `f`.
pub trait Executor: Sync {
    fn for_each_row(&self, data: &mut [f64], cols: usize, f: &(dyn Fn(usize, &mut [f64]) + Sync));
}

/// Processes rows in order on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn for_each_row(&self, data: &mut [f64], cols: usize, f: &(dyn Fn(usize, &mut [f64]) + Sync)) {
        if cols == 0 {
            return;
        }
        for (i, row) in data.chunks_mut(cols).enumerate() {
            f(i, row);
        }
    }
}

/// Builds a `rows x cols` matrix whose cell `(i, j)` is `cell(i, j)`.
pub fn fill<E, F>(exec: &E, rows: usize, cols: usize, cell: F) -> Matrix
where
    E: Executor + ?Sized,
    F: Fn(usize, usize) -> f64 + Sync,
{
    let mut m = Matrix::zeros(rows, cols);
    exec.for_each_row(m.as_mut_slice(), cols, &|i, row| {
        for (j, v) in row.iter_mut().enumerate() {
            *v = cell(i, j);
        }
    });
    m
}

/// Builds an `n x n` symmetric matrix: only `j >= i` is evaluated and the
/// lower triangle is mirrored, so the result is exactly symmetric.
pub fn fill_symmetric<E, F>(exec: &E, n: usize, cell: F) -> Matrix
where
    E: Executor + ?Sized,
    F: Fn(usize, usize) -> f64 + Sync,
{
    let mut m = Matrix::zeros(n, n);
    exec.for_each_row(m.as_mut_slice(), n, &|i, row| {
        for (j, v) in row.iter_mut().enumerate().skip(i) {
            *v = cell(i, j);
        }
    });
    m.mirror_upper();
    m
}
