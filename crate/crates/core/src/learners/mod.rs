//! Dual-form classifiers over precomputed kernel matrices.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::algebra::KernelMatrix;
use crate::error::{invalid, Result};
use crate::exec::Executor;
use crate::linalg::Matrix;

pub mod kda;
pub mod krr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LearnerKind {
    /// One-vs-all Kernel Ridge Regression with ±1 targets.
    Krr,
    /// Regularized kernel Fisher discriminant with nearest-centroid decisions.
    Kda,
}

impl LearnerKind {
    pub fn name(self) -> &'static str {
        match self {
            LearnerKind::Krr => "krr",
            LearnerKind::Kda => "kda",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "krr" => Some(LearnerKind::Krr),
            "kda" => Some(LearnerKind::Kda),
            _ => None,
        }
    }
}

impl fmt::Display for LearnerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Everything needed to score new samples against the training set.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub kind: LearnerKind,
    pub classes: Vec<String>,
    /// KRR: `n x C` dual weights. KDA: `n x (C-1)` projection coefficients.
    pub alpha: Matrix,
    /// KDA: `C x (C-1)` projected class centroids. KRR: `0 x 0`.
    pub centroids: Matrix,
    pub train_ids: Vec<String>,
    pub lambda: f64,
    /// Digest of the recipe the kernel was built from; opaque to this crate.
    pub recipe_digest: [u8; 32],
}

impl TrainedModel {
    pub fn validate(&self) -> Result<()> {
        if self.alpha.rows() != self.train_ids.len() {
            return Err(invalid!("alpha has {} rows for {} training ids", self.alpha.rows(), self.train_ids.len()));
        }
        if self.classes.is_empty() {
            return Err(invalid!("model has no classes"));
        }
        let unique: BTreeSet<&String> = self.classes.iter().collect();
        if unique.len() != self.classes.len() {
            return Err(invalid!("model has duplicate class names"));
        }
        let want_cols = match self.kind {
            LearnerKind::Krr => self.classes.len(),
            LearnerKind::Kda => self.classes.len() - 1,
        };
        if self.alpha.cols() != want_cols {
            return Err(invalid!("alpha has {} columns, expected {}", self.alpha.cols(), want_cols));
        }
        if self.kind == LearnerKind::Kda && (self.centroids.rows() != self.classes.len() || self.centroids.cols() != want_cols) {
            return Err(invalid!("KDA centroids have the wrong shape"));
        }
        Ok(())
    }
}

/// Per-class scores and the argmax labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub ids: Vec<String>,
    pub scores: Matrix,
    pub labels: Vec<String>,
}

/// Sorted distinct labels.
pub fn class_order<S: AsRef<str>>(labels: &[S]) -> Vec<String> {
    labels.iter().map(|l| l.as_ref()).collect::<BTreeSet<_>>().into_iter().map(ToString::to_string).collect()
}

pub(crate) fn encode_labels<S: AsRef<str>>(labels: &[S], classes: &[String]) -> Result<Vec<usize>> {
    labels
        .iter()
        .map(|l| classes.iter().position(|c| c == l.as_ref()).ok_or_else(|| invalid!("label {} is not in the class list", l.as_ref())))
        .collect()
}

pub(crate) fn check_training_inputs<S: AsRef<str>>(k: &KernelMatrix, labels: &[S], classes: &[String], lambda: f64) -> Result<()> {
    let v = &k.values;
    if !v.is_square() {
        return Err(invalid!("training kernel must be square, got {}x{}", v.rows(), v.cols()));
    }
    if v.max_asymmetry() > 1e-9 * v.max_abs().max(1.0) {
        return Err(invalid!("training kernel is not symmetric"));
    }
    if labels.len() != v.rows() {
        return Err(invalid!("{} labels for {} training samples", labels.len(), v.rows()));
    }
    if k.row_ids != k.col_ids {
        return Err(invalid!("training kernel rows and columns index different samples"));
    }
    if classes.len() < 2 {
        return Err(invalid!("need at least two classes, got {}", classes.len()));
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(invalid!("lambda must be a non-negative finite number, got {lambda}"));
    }
    Ok(())
}

/// Index of the largest score; ties go to the lowest index.
pub fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, s) in scores.iter().enumerate().skip(1) {
        if *s > scores[best] {
            best = i;
        }
    }
    best
}

pub(crate) fn check_alignment(k: &KernelMatrix, model: &TrainedModel) -> Result<()> {
    if k.col_ids != model.train_ids {
        return Err(invalid!("kernel columns are not aligned with the model's training ids"));
    }
    Ok(())
}

fn labels_from_scores(scores: &Matrix, classes: &[String]) -> Vec<String> {
    (0..scores.rows()).map(|i| classes[argmax(scores.row(i))].clone()).collect()
}

/// Fits the learner of `kind` with classes in sorted order.
pub fn fit<E: Executor + ?Sized, S: AsRef<str>>(
    exec: &E,
    kind: LearnerKind,
    k_train: &KernelMatrix,
    labels: &[S],
    lambda: f64,
) -> Result<TrainedModel> {
    let classes = class_order(labels);
    fit_with_classes(exec, kind, k_train, labels, &classes, lambda)
}

pub fn fit_with_classes<E: Executor + ?Sized, S: AsRef<str>>(
    exec: &E,
    kind: LearnerKind,
    k_train: &KernelMatrix,
    labels: &[S],
    classes: &[String],
    lambda: f64,
) -> Result<TrainedModel> {
    match kind {
        LearnerKind::Krr => krr::fit_with_classes(k_train, labels, classes, lambda),
        LearnerKind::Kda => kda::fit_with_classes(exec, k_train, labels, classes, lambda),
    }
}

pub fn predict(k_test_train: &KernelMatrix, model: &TrainedModel) -> Result<Prediction> {
    model.validate()?;
    check_alignment(k_test_train, model)?;
    let scores = match model.kind {
        LearnerKind::Krr => krr::scores(&k_test_train.values, model)?,
        LearnerKind::Kda => kda::scores(&k_test_train.values, model)?,
    };
    let labels = labels_from_scores(&scores, &model.classes);
    Ok(Prediction { ids: k_test_train.row_ids.clone(), scores, labels })
}
