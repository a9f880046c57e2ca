//! Character p-gram string kernels, Local Rank Distance, RBF kernels over
//! embedding vectors, kernel-matrix algebra and dual-form kernel classifiers
//! (Kernel Ridge Regression, Kernel Discriminant Analysis).
//!
//! The crate is `no_std` and only needs `alloc`. Everything here is a pure
//! function of its inputs; IO, file formats and threading live in the
//! `strkern` companion crate. Matrix builders take an [`Executor`] so a
//! caller can fan rows out over threads without changing any result: each
//! matrix cell is always computed by a single worker with a fixed
//! accumulation order.
//!
//! Typical flow:
//!
//! 1. Build [`Sample`]s with whitespace-normalized text channels and
//!    optional embedding vectors.
//! 2. Describe the kernel sum with a [`KernelRecipe`].
//! 3. Build the joint train∪test matrix with [`recipe::build_combined`] and
//!    slice it with [`algebra::split_joint`].
//! 4. Fit with [`learners::fit`] and score with [`learners::predict`].
//! 5. Score predictions with [`metrics::evaluate`].

#![no_std]
#![allow(clippy::needless_range_loop)]

extern crate alloc;

pub mod algebra;
pub mod embedding;
pub mod error;
pub mod exec;
pub mod learners;
pub mod linalg;
pub mod lrd;
pub mod metrics;
pub mod recipe;
pub mod string_kernels;
pub mod text;

pub use algebra::{KernelMatrix, Provenance};
pub use error::{Error, Result};
pub use exec::{Executor, Sequential};
pub use learners::{LearnerKind, TrainedModel};
pub use linalg::Matrix;
pub use lrd::LrdParams;
pub use metrics::EvaluationReport;
pub use recipe::{Component, ComponentKind, KernelRecipe};
pub use string_kernels::{PgramRange, StringKernelKind};
pub use text::{PgramProfile, Sample};
