//! GKMX1 kernel-matrix container.
//!
//! Byte layout, all integers and floats little-endian:
//!
//! | field        | encoding                                         |
//! |--------------|--------------------------------------------------|
//! | magic        | the 5 ASCII bytes `GKMX1`                        |
//! | rows         | u64                                              |
//! | cols         | u64                                              |
//! | row ids      | `rows` times: u64 byte length, UTF-8 bytes       |
//! | col ids      | `cols` times: u64 byte length, UTF-8 bytes       |
//! | values       | `rows * cols` IEEE-754 binary64, row-major       |
//!
//! Provenance goes to a JSON sidecar at `<path>.meta.json`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use strkern_core::{KernelMatrix, Matrix, Provenance};

use super::binary::{ReadResult, Reader, Writer};
use crate::error::{CliError, Result};
use crate::fsutil::{read_bytes, read_to_string, write_atomic};
use crate::recipe::ComponentSpec;

pub const MAGIC: &[u8; 5] = b"GKMX1";

pub fn encode(w: &mut Writer, values: &Matrix, row_ids: &[String], col_ids: &[String]) {
    w.bytes(MAGIC);
    w.u64(values.rows() as u64);
    w.u64(values.cols() as u64);
    for id in row_ids.iter().chain(col_ids) {
        w.str(id);
    }
    for v in values.as_slice() {
        w.f64(*v);
    }
}

pub fn decode(r: &mut Reader<'_>) -> ReadResult<(Matrix, Vec<String>, Vec<String>)> {
    r.expect(MAGIC)?;
    let rows = r.u64()? as usize;
    let cols = r.u64()? as usize;
    let row_ids = (0..rows).map(|_| r.str()).collect::<ReadResult<Vec<_>>>()?;
    let col_ids = (0..cols).map(|_| r.str()).collect::<ReadResult<Vec<_>>>()?;
    let count = rows.checked_mul(cols).filter(|&c| c.checked_mul(8).is_some_and(|b| b <= r.remaining()));
    let count = count.ok_or_else(|| format!("truncated: {rows}x{cols} values do not fit"))?;
    let values = (0..count).map(|_| r.f64()).collect::<ReadResult<Vec<_>>>()?;
    let m = Matrix::from_vec(rows, cols, values).map_err(|e| e.to_string())?;
    Ok((m, row_ids, col_ids))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixMeta {
    pub format: String,
    pub rows: usize,
    pub cols: usize,
    pub self_similarity: bool,
    pub components: Vec<ComponentSpec>,
}

pub fn meta_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

pub fn to_bytes(k: &KernelMatrix) -> Vec<u8> {
    let mut w = Writer::new();
    encode(&mut w, &k.values, &k.row_ids, &k.col_ids);
    w.into_bytes()
}

pub fn meta_json(k: &KernelMatrix) -> String {
    let meta = MatrixMeta {
        format: "GKMX1".into(),
        rows: k.values.rows(),
        cols: k.values.cols(),
        self_similarity: k.provenance.self_similarity,
        components: k.provenance.components.iter().map(ComponentSpec::from_component).collect(),
    };
    let mut s = serde_json::to_string_pretty(&meta).expect("metadata serializes");
    s.push('\n');
    s
}

/// Writes the matrix and its metadata sidecar.
pub fn write_kernel(path: &Path, k: &KernelMatrix) -> Result<()> {
    write_atomic(path, &to_bytes(k))?;
    write_atomic(&meta_path(path), meta_json(k).as_bytes())
}

/// Reads only the GKMX1 payload.
pub fn read_matrix(path: &Path) -> Result<(Matrix, Vec<String>, Vec<String>)> {
    let bytes = read_bytes(path)?;
    let mut r = Reader::new(&bytes);
    let out = decode(&mut r).map_err(|m| CliError::format(path, m))?;
    r.finish().map_err(|m| CliError::format(path, m))?;
    Ok(out)
}

/// Reads the matrix and its sidecar back into a [`KernelMatrix`].
pub fn read_kernel(path: &Path) -> Result<KernelMatrix> {
    let (values, row_ids, col_ids) = read_matrix(path)?;
    let mpath = meta_path(path);
    let meta: MatrixMeta = serde_json::from_str(&read_to_string(&mpath)?).map_err(|e| CliError::format(&mpath, e.to_string()))?;
    let components = meta.components.iter().map(ComponentSpec::to_component).collect::<Result<Vec<_>>>()?;
    let provenance = Provenance { components, self_similarity: meta.self_similarity };
    KernelMatrix::new(values, row_ids, col_ids, provenance).map_err(|e| CliError::format(path, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use strkern_core::Component;

    proptest! {
        #[test]
        fn round_trip(rows in 0usize..5, cols in 0usize..5, seed in any::<u64>()) {
            let values: Vec<f64> = (0..rows * cols).map(|i| f64::from_bits(seed.rotate_left(i as u32) >> 2)).collect();
            let m = Matrix::from_vec(rows, cols, values).unwrap();
            let row_ids: Vec<String> = (0..rows).map(|i| format!("r{i}é")).collect();
            let col_ids: Vec<String> = (0..cols).map(|i| format!("c{i}")).collect();
            let mut w = Writer::new();
            encode(&mut w, &m, &row_ids, &col_ids);
            let bytes = w.into_bytes();
            let mut r = Reader::new(&bytes);
            let (m2, r2, c2) = decode(&mut r).unwrap();
            prop_assert_eq!(r.remaining(), 0);
            prop_assert_eq!(m2.as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>(), m.as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>());
            prop_assert_eq!(r2, row_ids);
            prop_assert_eq!(c2, col_ids);
        }
    }

    #[test]
    fn exact_layout() {
        let m = Matrix::from_rows(&[[1.5]]).unwrap();
        let mut w = Writer::new();
        encode(&mut w, &m, &["a".into()], &["bc".into()]);
        let mut want = b"GKMX1".to_vec();
        want.extend(1u64.to_le_bytes());
        want.extend(1u64.to_le_bytes());
        want.extend(1u64.to_le_bytes());
        want.extend(b"a");
        want.extend(2u64.to_le_bytes());
        want.extend(b"bc");
        want.extend(1.5f64.to_le_bytes());
        assert_eq!(w.into_bytes(), want);
    }

    #[test]
    fn rejects_corruption() {
        let m = Matrix::identity(2);
        let ids = vec!["a".to_string(), "b".to_string()];
        let mut w = Writer::new();
        encode(&mut w, &m, &ids, &ids);
        let bytes = w.into_bytes();
        assert!(decode(&mut Reader::new(&bytes[..bytes.len() - 1])).is_err());
        assert!(decode(&mut Reader::new(&[])).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(decode(&mut Reader::new(&bad)).is_err());
    }

    #[test]
    fn file_round_trip_with_metadata() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("k.gkmx");
        let ids = vec!["a".to_string(), "b".to_string()];
        let c = Component::embedding("audio", 0.5).squared(true);
        let k = KernelMatrix::new(Matrix::identity(2), ids.clone(), ids, Provenance::single(c, true)).unwrap();
        write_kernel(&path, &k).unwrap();
        assert_eq!(read_kernel(&path).unwrap(), k);
    }
}
