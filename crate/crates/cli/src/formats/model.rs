//! GKMD1 model container.
//!
//! Byte layout, all integers and floats little-endian, strings as a u64 byte
//! length followed by UTF-8 bytes:
//!
//! | field            | encoding                                              |
//! |------------------|-------------------------------------------------------|
//! | magic            | the 5 ASCII bytes `GKMD1`                             |
//! | version          | u8, currently 1                                       |
//! | kind             | u8: 0 = KRR, 1 = KDA                                  |
//! | lambda           | f64                                                   |
//! | classes          | u64 count, then that many strings                     |
//! | train ids        | u64 count, then that many strings                     |
//! | alpha            | GKMX1 block: rows = train ids, cols = output columns  |
//! | centroids        | GKMX1 block: rows = classes (KDA), `0 x 0` for KRR    |
//! | recipe digest    | 32 bytes, SHA-256 of the canonical recipe text        |
//! | context digest   | 32 bytes, SHA-256 of the kernel context (see below)   |
//! | recipe           | string: canonical recipe TOML                         |
//!
//! The context digest covers the samples whose content shaped the training
//! block of the kernel: the training set, plus the prediction set when the
//! recipe squares any component.

use std::path::Path;

use strkern_core::{LearnerKind, Matrix, TrainedModel};

use super::binary::{ReadResult, Reader, Writer};
use super::matrix;
use crate::error::{CliError, Result};
use crate::fsutil::{read_bytes, write_atomic};

pub const MAGIC: &[u8; 5] = b"GKMD1";
pub const VERSION: u8 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub model: TrainedModel,
    pub context_digest: [u8; 32],
    pub recipe: String,
}

fn output_ids(model: &TrainedModel) -> Vec<String> {
    match model.kind {
        LearnerKind::Krr => model.classes.clone(),
        LearnerKind::Kda => (0..model.alpha.cols()).map(|i| format!("dir{i}")).collect(),
    }
}

pub fn to_bytes(file: &ModelFile) -> Vec<u8> {
    let m = &file.model;
    let mut w = Writer::new();
    w.bytes(MAGIC);
    w.u8(VERSION);
    w.u8(match m.kind {
        LearnerKind::Krr => 0,
        LearnerKind::Kda => 1,
    });
    w.f64(m.lambda);
    for list in [&m.classes, &m.train_ids] {
        w.u64(list.len() as u64);
        list.iter().for_each(|s| w.str(s));
    }
    let outs = output_ids(m);
    matrix::encode(&mut w, &m.alpha, &m.train_ids, &outs);
    let centroid_rows: &[String] = if m.centroids.rows() == 0 { &[] } else { &m.classes };
    let centroid_cols: &[String] = if m.centroids.cols() == 0 { &[] } else { &outs };
    matrix::encode(&mut w, &m.centroids, centroid_rows, centroid_cols);
    w.bytes(&m.recipe_digest);
    w.bytes(&file.context_digest);
    w.str(&file.recipe);
    w.into_bytes()
}

fn strings(r: &mut Reader<'_>) -> ReadResult<Vec<String>> {
    let n = r.length()?;
    (0..n).map(|_| r.str()).collect()
}

fn digest(r: &mut Reader<'_>) -> ReadResult<[u8; 32]> {
    Ok(r.take(32)?.try_into().expect("32 bytes"))
}

pub fn from_bytes(bytes: &[u8]) -> ReadResult<ModelFile> {
    let mut r = Reader::new(bytes);
    r.expect(MAGIC)?;
    let version = r.u8()?;
    if version != VERSION {
        return Err(format!("unsupported version {version}, expected {VERSION}"));
    }
    let kind = match r.u8()? {
        0 => LearnerKind::Krr,
        1 => LearnerKind::Kda,
        k => return Err(format!("unknown learner kind byte {k}")),
    };
    let lambda = r.f64()?;
    let classes = strings(&mut r)?;
    let train_ids = strings(&mut r)?;
    let (alpha, alpha_rows, _) = matrix::decode(&mut r)?;
    if alpha_rows != train_ids {
        return Err("alpha row ids differ from the train id list".into());
    }
    let (centroids, _, _) = matrix::decode(&mut r)?;
    let recipe_digest = digest(&mut r)?;
    let context_digest = digest(&mut r)?;
    let recipe = r.str()?;
    r.finish()?;
    let model = TrainedModel { kind, classes, alpha, centroids, train_ids, lambda, recipe_digest };
    model.validate().map_err(|e| e.to_string())?;
    Ok(ModelFile { model, context_digest, recipe })
}

pub fn write_model(path: &Path, file: &ModelFile) -> Result<()> {
    write_atomic(path, &to_bytes(file))
}

pub fn read_model(path: &Path) -> Result<ModelFile> {
    from_bytes(&read_bytes(path)?).map_err(|m| CliError::format(path, m))
}

/// Empty `0 x 0` matrix used for the KRR centroid slot.
pub fn no_centroids() -> Matrix {
    Matrix::zeros(0, 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(kind: LearnerKind) -> ModelFile {
        let classes = vec!["a".to_string(), "b".to_string(), "c".to_string()];
        let cols = if kind == LearnerKind::Krr { 3 } else { 2 };
        let alpha = Matrix::from_vec(2, cols, (0..2 * cols).map(|i| i as f64 * -0.1 + 1e-300).collect()).unwrap();
        let centroids = if kind == LearnerKind::Krr {
            no_centroids()
        } else {
            Matrix::from_vec(3, 2, vec![1.0, 2.0, 3.0, 4.0, 5.0, f64::MIN_POSITIVE]).unwrap()
        };
        ModelFile {
            model: TrainedModel {
                kind,
                classes,
                alpha,
                centroids,
                train_ids: vec!["x".into(), "y".into()],
                lambda: 1e-3,
                recipe_digest: [7; 32],
            },
            context_digest: [9; 32],
            recipe: "learner = \"krr\"\n".into(),
        }
    }

    #[test]
    fn round_trip_both_kinds() {
        for kind in [LearnerKind::Krr, LearnerKind::Kda] {
            let f = sample(kind);
            assert_eq!(from_bytes(&to_bytes(&f)).unwrap(), f);
        }
    }

    #[test]
    fn header_layout() {
        let b = to_bytes(&sample(LearnerKind::Kda));
        assert_eq!(&b[..5], b"GKMD1");
        assert_eq!(b[5], 1);
        assert_eq!(b[6], 1);
        assert_eq!(&b[7..15], &1e-3f64.to_le_bytes());
    }

    #[test]
    fn rejects_corruption() {
        let b = to_bytes(&sample(LearnerKind::Krr));
        assert!(from_bytes(&[]).is_err());
        let mut bad = b.clone();
        bad[1] = b'X';
        assert!(from_bytes(&bad).unwrap_err().contains("magic"));
        let mut bad = b.clone();
        bad[5] = 2;
        assert!(from_bytes(&bad).unwrap_err().contains("version"));
        for cut in [6, 20, b.len() / 2, b.len() - 1] {
            assert!(from_bytes(&b[..cut]).is_err(), "cut at {cut}");
        }
        let mut long = b.clone();
        long.push(0);
        assert!(from_bytes(&long).is_err());
    }
}
