//! Embedding CSV: one sample per line, `id,v1,...,vd`, with the same `d`
//! on every line.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{CliError, Result};
use crate::fsutil::read_to_string;

pub fn parse_embeddings(path: &Path, content: &str) -> Result<Vec<(String, Vec<f64>)>> {
    let mut rows = Vec::new();
    let mut dim = None;
    for (no, line) in content.lines().enumerate() {
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.trim().is_empty() {
            continue;
        }
        let at = || format!("{}:{}", path.display(), no + 1);
        let mut fields = line.split(',');
        let id = fields.next().unwrap_or_default().trim();
        if id.is_empty() {
            return Err(CliError::Data(format!("{}: empty sample id", at())));
        }
        let v = fields
            .map(|f| f.trim().parse::<f64>().ok().filter(|x| x.is_finite()))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| CliError::Data(format!("{}: non-numeric or non-finite value for sample {id}", at())))?;
        if v.is_empty() {
            return Err(CliError::Data(format!("{}: sample {id} has no values", at())));
        }
        match dim {
            None => dim = Some(v.len()),
            Some(d) if d != v.len() => return Err(CliError::Data(format!("{}: sample {id} has {} values, expected {d}", at(), v.len()))),
            _ => {}
        }
        rows.push((id.to_string(), v));
    }
    Ok(rows)
}

pub fn read_embeddings(path: &Path) -> Result<Vec<(String, Vec<f64>)>> {
    parse_embeddings(path, &read_to_string(path)?)
}

/// Orders the vectors by `ids`, failing on missing, extra or repeated ids.
pub fn align_embeddings(path: &Path, rows: Vec<(String, Vec<f64>)>, ids: &[String]) -> Result<Vec<Vec<f64>>> {
    let mut by_id = BTreeMap::new();
    for (id, v) in rows {
        if by_id.insert(id.clone(), v).is_some() {
            return Err(CliError::Data(format!("{}: duplicate embedding row for sample {id}", path.display())));
        }
    }
    let mut out = Vec::with_capacity(ids.len());
    for id in ids {
        let v = by_id.remove(id).ok_or_else(|| CliError::Data(format!("{}: no embedding row for sample {id}", path.display())))?;
        out.push(v);
    }
    if let Some(extra) = by_id.keys().next() {
        return Err(CliError::Data(format!("{}: embedding row for unknown sample {extra}", path.display())));
    }
    Ok(out)
}

pub fn write_embeddings_string(rows: &[(String, Vec<f64>)]) -> String {
    let mut out = String::new();
    for (id, v) in rows {
        out.push_str(id);
        for x in v {
            out.push(',');
            out.push_str(&x.to_string());
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_align() {
        let p = Path::new("e.csv");
        let rows = parse_embeddings(p, "b,1,2\na, 0.5 ,-1e3\n").unwrap();
        let ids = vec!["a".to_string(), "b".to_string()];
        assert_eq!(align_embeddings(p, rows.clone(), &ids).unwrap(), vec![vec![0.5, -1000.0], vec![1.0, 2.0]]);
        let err = align_embeddings(p, rows, &["a".into(), "c".into()]).unwrap_err();
        assert!(err.to_string().contains("sample c"));
        assert_eq!(parse_embeddings(p, &write_embeddings_string(&parse_embeddings(p, "x,0.1,3\n").unwrap())).unwrap()[0].1, vec![0.1, 3.0]);
    }

    #[test]
    fn rejects_ragged_and_bad_values() {
        let p = Path::new("e.csv");
        assert!(parse_embeddings(p, "a,1,2\nb,1\n").is_err());
        assert!(parse_embeddings(p, "a,1,x\n").is_err());
        assert!(parse_embeddings(p, "a,1,NaN\n").is_err());
        assert!(parse_embeddings(p, "a\n").is_err());
    }
}
