//! Batch pipeline around `strkern-core`: corpus and embedding ingestion,
//! recipe files, the GKMX1 matrix and GKMD1 model containers, a
//! thread-pool executor, an on-disk basis cache, and the `kernel`,
//! `train`, `predict`, `evaluate`, `tune` and `synth` commands.

pub mod cache;
pub mod cli;
pub mod error;
pub mod exec;
pub mod formats;
pub mod fsutil;
pub mod manifest;
pub mod pipeline;
pub mod recipe;
pub mod synth;

pub use error::{CliError, Result};
