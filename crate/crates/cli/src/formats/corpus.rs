//! Corpus TSV: one sample per line, `id<TAB>label<TAB>text`. The label `?`
//! marks an unlabeled sample. Blank lines are skipped; a trailing `\r` is
//! dropped so CRLF files read the same as LF files.

use std::path::Path;

use crate::error::{CliError, Result};
use crate::fsutil::read_to_string;

pub const UNLABELED: &str = "?";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusRow {
    pub id: String,
    pub label: Option<String>,
    pub text: String,
}

pub fn parse_corpus(path: &Path, content: &str) -> Result<Vec<CorpusRow>> {
    let mut rows = Vec::new();
    for (no, line) in content.lines().enumerate() {
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.is_empty() {
            continue;
        }
        let mut fields = line.splitn(3, '\t');
        let (id, label, text) = match (fields.next(), fields.next(), fields.next()) {
            (Some(id), Some(label), Some(text)) => (id, label, text),
            _ => return Err(CliError::Data(format!("{}:{}: expected id<TAB>label<TAB>text", path.display(), no + 1))),
        };
        if id.is_empty() {
            return Err(CliError::Data(format!("{}:{}: empty sample id", path.display(), no + 1)));
        }
        if label.is_empty() {
            return Err(CliError::Data(format!("{}:{}: empty label for sample {id}", path.display(), no + 1)));
        }
        let label = (label != UNLABELED).then(|| label.to_string());
        rows.push(CorpusRow { id: id.to_string(), label, text: text.to_string() });
    }
    Ok(rows)
}

pub fn read_corpus(path: &Path) -> Result<Vec<CorpusRow>> {
    parse_corpus(path, &read_to_string(path)?)
}

/// Serializes rows; texts must not contain newlines.
pub fn write_corpus_string(rows: &[CorpusRow]) -> String {
    let mut out = String::new();
    for r in rows {
        out.push_str(&r.id);
        out.push('\t');
        out.push_str(r.label.as_deref().unwrap_or(UNLABELED));
        out.push('\t');
        out.push_str(&r.text);
        out.push('\n');
    }
    out
}
