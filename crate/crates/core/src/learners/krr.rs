//! One-vs-all Kernel Ridge Regression.
//!
//! For every class `c` the dual weights solve `(K + lambda I) alpha_c = y_c`
//! with `y_c = +1` on class members and `-1` elsewhere. A test sample is
//! scored with `g_c(x) = sum_i alpha_ic k(x, x_i)` and assigned the class
//! with the largest score.

use alloc::vec::Vec;

use super::{check_training_inputs, class_order, encode_labels, LearnerKind, TrainedModel};
use crate::algebra::KernelMatrix;
use crate::error::{invalid, Result};
use crate::linalg::{Cholesky, Matrix};

/// `{+1, -1}` one-vs-all targets, one column per class.
pub fn targets(encoded: &[usize], n_classes: usize) -> Matrix {
    let mut y = Matrix::zeros(encoded.len(), n_classes);
    for (i, &c) in encoded.iter().enumerate() {
        for k in 0..n_classes {
            y[(i, k)] = if k == c { 1.0 } else { -1.0 };
        }
    }
    y
}

pub fn fit<S: AsRef<str>>(k_train: &KernelMatrix, labels: &[S], lambda: f64) -> Result<TrainedModel> {
    let classes = class_order(labels);
    fit_with_classes(k_train, labels, &classes, lambda)
}

pub fn fit_with_classes<S: AsRef<str>>(
    k_train: &KernelMatrix,
    labels: &[S],
    classes: &[alloc::string::String],
    lambda: f64,
) -> Result<TrainedModel> {
    check_training_inputs(k_train, labels, classes, lambda)?;
    let encoded = encode_labels(labels, classes)?;
    let n = encoded.len();
    let mut a = k_train.values.clone();
    for i in 0..n {
        a[(i, i)] += lambda;
    }
    let chol = Cholesky::new(&a)?;
    let y = targets(&encoded, classes.len());
    let mut alpha = Matrix::zeros(n, classes.len());
    for c in 0..classes.len() {
        let yc = y.column(c);
        let mut x = chol.solve(&yc);
        // One step of iterative refinement.
        let ax = a.mul_vec(&x);
        let r: Vec<f64> = yc.iter().zip(&ax).map(|(b, v)| b - v).collect();
        let dx = chol.solve(&r);
        for (xi, d) in x.iter_mut().zip(&dx) {
            *xi += d;
        }
        for i in 0..n {
            alpha[(i, c)] = x[i];
        }
    }
    Ok(TrainedModel {
        kind: LearnerKind::Krr,
        classes: classes.to_vec(),
        alpha,
        centroids: Matrix::zeros(0, 0),
        train_ids: k_train.row_ids.clone(),
        lambda,
        recipe_digest: [0; 32],
    })
}

pub(crate) fn scores(k_test_train: &Matrix, model: &TrainedModel) -> Result<Matrix> {
    if k_test_train.cols() != model.alpha.rows() {
        return Err(invalid!("test kernel has {} columns for {} training samples", k_test_train.cols(), model.alpha.rows()));
    }
    k_test_train.matmul(&model.alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Provenance;
    use crate::learners::predict;
    use crate::recipe::Component;
    use alloc::string::{String, ToString};
    use alloc::vec;

    fn kernel(rows: &[&[f64]], ids: &[&str]) -> KernelMatrix {
        let ids: Vec<String> = ids.iter().map(|s| s.to_string()).collect();
        KernelMatrix::new(Matrix::from_rows(rows).unwrap(), ids.clone(), ids, Provenance::single(Component::embedding("e", 1.0), true))
            .unwrap()
    }

    #[test]
    fn identity_kernel_toy() {
        let k = kernel(&[&[1.0, 0.0], &[0.0, 1.0]], &["a", "b"]);
        let model = fit(&k, &["x", "y"], 1.0).unwrap();
        assert_eq!(model.alpha.as_slice(), &[0.5, -0.5, -0.5, 0.5]);
        let pred = predict(&k, &model).unwrap();
        assert_eq!(pred.scores.as_slice(), &[0.5, -0.5, -0.5, 0.5]);
        assert_eq!(pred.labels, vec!["x", "y"]);
    }

    #[test]
    fn diagonal_toy_without_regularization() {
        let k = kernel(&[&[2.0, 0.0, 0.0], &[0.0, 2.0, 0.0], &[0.0, 0.0, 2.0]], &["a", "b", "c"]);
        let model = fit(&k, &["p", "q", "p"], 0.0).unwrap();
        let y = targets(&[0, 1, 0], 2);
        for (a, t) in model.alpha.as_slice().iter().zip(y.as_slice()) {
            assert!((*a - t / 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_row_ties_to_first_class() {
        let k = kernel(&[&[1.0, 0.0], &[0.0, 1.0]], &["a", "b"]);
        let model = fit(&k, &["x", "y"], 1.0).unwrap();
        let test = KernelMatrix::new(
            Matrix::zeros(1, 2),
            vec!["t".into()],
            model.train_ids.clone(),
            Provenance::single(Component::embedding("e", 1.0), false),
        )
        .unwrap();
        let pred = predict(&test, &model).unwrap();
        assert_eq!(pred.scores.as_slice(), &[0.0, 0.0]);
        assert_eq!(pred.labels, vec!["x"]);
    }

    #[test]
    fn rejects_bad_inputs() {
        let k = kernel(&[&[1.0, 0.0], &[0.0, 1.0]], &["a", "b"]);
        assert!(fit(&k, &["x", "x"], 1.0).is_err());
        assert!(fit(&k, &["x"], 1.0).is_err());
        assert!(fit(&k, &["x", "y"], -1.0).is_err());
        let indefinite = kernel(&[&[0.0, 1.0], &[1.0, 0.0]], &["a", "b"]);
        assert!(matches!(fit(&indefinite, &["x", "y"], 0.0), Err(crate::Error::Numeric { .. })));
    }

    #[test]
    fn misaligned_prediction_rejected() {
        let k = kernel(&[&[1.0, 0.0], &[0.0, 1.0]], &["a", "b"]);
        let model = fit(&k, &["x", "y"], 1.0).unwrap();
        let swapped = kernel(&[&[1.0, 0.0], &[0.0, 1.0]], &["b", "a"]);
        assert!(predict(&swapped, &model).is_err());
    }
}
