//! On-disk formats: corpus TSV, embedding CSV, GKMX1 kernel matrices,
//! GKMD1 models, predictions and evaluation reports.

pub mod binary;
pub mod corpus;
pub mod embedding;
pub mod matrix;
pub mod model;
pub mod report;
