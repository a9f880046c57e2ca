//! Kernel Discriminant Analysis (multi-class kernel Fisher discriminant).
//!
//! Directions `alpha` maximize `alpha^T M alpha / alpha^T (N + lambda I) alpha`
//! with the kernelized between-class scatter
//! `M = sum_c n_c (m_c - m)(m_c - m)^T` and within-class scatter
//! `N = K K - sum_c n_c m_c m_c^T`, where `m_c = K 1_c / n_c` and
//! `m = K 1 / n`. With `N + lambda I = L L^T` the problem reduces to the
//! eigenvectors of `L^-1 M L^-T = U U^T`, `U = [sqrt(n_c) L^-1 (m_c - m)]`,
//! whose nonzero spectrum is that of the `C x C` matrix `U^T U`. The top
//! `C - 1` directions are kept; a sample is assigned to the nearest
//! projected class centroid.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::{check_training_inputs, class_order, encode_labels, LearnerKind, TrainedModel};
use crate::algebra::{square_values, KernelMatrix};
use crate::error::{invalid, Result};
use crate::exec::Executor;
use crate::linalg::{dot, Cholesky, Matrix, SymmetricEigen};

pub fn fit<E: Executor + ?Sized, S: AsRef<str>>(exec: &E, k_train: &KernelMatrix, labels: &[S], lambda: f64) -> Result<TrainedModel> {
    let classes = class_order(labels);
    fit_with_classes(exec, k_train, labels, &classes, lambda)
}

pub fn fit_with_classes<E: Executor + ?Sized, S: AsRef<str>>(
    exec: &E,
    k_train: &KernelMatrix,
    labels: &[S],
    classes: &[String],
    lambda: f64,
) -> Result<TrainedModel> {
    check_training_inputs(k_train, labels, classes, lambda)?;
    let encoded = encode_labels(labels, classes)?;
    let k = &k_train.values;
    let n = k.rows();
    let n_classes = classes.len();

    let mut counts = vec![0usize; n_classes];
    for &c in &encoded {
        counts[c] += 1;
    }
    if let Some(c) = counts.iter().position(|&c| c == 0) {
        return Err(invalid!("class {} has no training samples", classes[c]));
    }

    // Class means of kernel columns (m_c) and the overall mean (m).
    let mut class_means = Matrix::zeros(n_classes, n);
    let mut mean = vec![0.0; n];
    for i in 0..n {
        let row = k.row(i);
        for (j, &c) in encoded.iter().enumerate() {
            class_means[(c, i)] += row[j];
        }
        mean[i] = row.iter().sum::<f64>() / n as f64;
    }
    for c in 0..n_classes {
        let inv = 1.0 / counts[c] as f64;
        class_means.row_mut(c).iter_mut().for_each(|v| *v *= inv);
    }

    let mut within = square_values(exec, k);
    for c in 0..n_classes {
        let mc = class_means.row(c);
        let w = counts[c] as f64;
        for i in 0..n {
            let wi = w * mc[i];
            for (j, v) in within.row_mut(i).iter_mut().enumerate() {
                *v -= wi * mc[j];
            }
        }
    }
    for i in 0..n {
        within[(i, i)] += lambda;
    }
    let chol = Cholesky::new(&within)?;

    // U columns: sqrt(n_c) L^-1 (m_c - m).
    let mut u = Matrix::zeros(n, n_classes);
    for c in 0..n_classes {
        let mut col: Vec<f64> = class_means.row(c).iter().zip(&mean).map(|(a, b)| a - b).collect();
        chol.forward(&mut col);
        let w = libm::sqrt(counts[c] as f64);
        for i in 0..n {
            u[(i, c)] = w * col[i];
        }
    }
    let gram = u.transpose().matmul(&u)?;
    let eig = SymmetricEigen::new(&gram)?;

    let n_dirs = n_classes - 1;
    let top = eig.values.last().copied().unwrap_or(0.0).max(0.0);
    let mut alpha = Matrix::zeros(n, n_dirs);
    for d in 0..n_dirs {
        let idx = n_classes - 1 - d;
        let mu = eig.values[idx];
        if mu.is_nan() || mu <= 1e-12 * top {
            continue;
        }
        let q = eig.vectors.column(idx);
        let mut v: Vec<f64> = (0..n).map(|i| dot(u.row(i), &q) / libm::sqrt(mu)).collect();
        chol.backward(&mut v);
        for i in 0..n {
            alpha[(i, d)] = v[i];
        }
    }

    let projected = k.matmul(&alpha)?;
    let mut centroids = Matrix::zeros(n_classes, n_dirs);
    for (i, &c) in encoded.iter().enumerate() {
        for d in 0..n_dirs {
            centroids[(c, d)] += projected[(i, d)];
        }
    }
    for c in 0..n_classes {
        let inv = 1.0 / counts[c] as f64;
        centroids.row_mut(c).iter_mut().for_each(|v| *v *= inv);
    }

    Ok(TrainedModel {
        kind: LearnerKind::Kda,
        classes: classes.to_vec(),
        alpha,
        centroids,
        train_ids: k_train.row_ids.clone(),
        lambda,
        recipe_digest: [0; 32],
    })
}

/// Projects kernel rows onto the discriminant directions.
pub fn project(k_test_train: &Matrix, model: &TrainedModel) -> Result<Matrix> {
    if k_test_train.cols() != model.alpha.rows() {
        return Err(invalid!("test kernel has {} columns for {} training samples", k_test_train.cols(), model.alpha.rows()));
    }
    k_test_train.matmul(&model.alpha)
}

/// Negative squared distances from projected rows to each centroid.
pub fn scores_from_projection(z: &Matrix, centroids: &Matrix) -> Matrix {
    let mut scores = Matrix::zeros(z.rows(), centroids.rows());
    for i in 0..z.rows() {
        for c in 0..centroids.rows() {
            let d2 = z.row(i).iter().zip(centroids.row(c)).fold(0.0, |acc, (a, b)| acc + (a - b) * (a - b));
            scores[(i, c)] = -d2;
        }
    }
    scores
}

pub(crate) fn scores(k_test_train: &Matrix, model: &TrainedModel) -> Result<Matrix> {
    Ok(scores_from_projection(&project(k_test_train, model)?, &model.centroids))
}
