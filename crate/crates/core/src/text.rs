//! Transcript normalization, samples and character p-gram profiles.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{data_err, invalid, Result};

/// The characters treated as whitespace: space, tab, newline, carriage return.
pub const WHITESPACE: [char; 4] = [' ', '\t', '\n', '\r'];

fn is_space(c: char) -> bool {
    WHITESPACE.contains(&c)
}

/// Collapses every run of whitespace into a single space and trims both ends.
pub fn normalize_whitespace(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut pending_space = false;
    for c in text.chars() {
        if is_space(c) {
            pending_space = !out.is_empty();
        } else {
            if pending_space {
                out.push(' ');
                pending_space = false;
            }
            out.push(c);
        }
    }
    out
}

/// One labeled (or unlabeled) instance with text and embedding channels.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Sample {
    pub id: String,
    pub label: Option<String>,
    channels: BTreeMap<String, String>,
    embeddings: BTreeMap<String, Vec<f64>>,
}

impl Sample {
    pub fn new(id: impl Into<String>, label: Option<String>) -> Self {
        Self { id: id.into(), label, ..Self::default() }
    }

    /// Adds a text channel. The text is whitespace-normalized on the way in.
    pub fn with_text(mut self, channel: impl Into<String>, text: &str) -> Self {
        self.set_text(channel, text);
        self
    }

    pub fn with_embedding(mut self, channel: impl Into<String>, vector: Vec<f64>) -> Self {
        self.embeddings.insert(channel.into(), vector);
        self
    }

    pub fn set_text(&mut self, channel: impl Into<String>, text: &str) {
        self.channels.insert(channel.into(), normalize_whitespace(text));
    }

    pub fn set_embedding(&mut self, channel: impl Into<String>, vector: Vec<f64>) {
        self.embeddings.insert(channel.into(), vector);
    }

    pub fn text(&self, channel: &str) -> Option<&str> {
        self.channels.get(channel).map(String::as_str)
    }

    pub fn embedding(&self, channel: &str) -> Option<&[f64]> {
        self.embeddings.get(channel).map(Vec::as_slice)
    }

    pub fn text_channels(&self) -> impl Iterator<Item = &str> {
        self.channels.keys().map(String::as_str)
    }

    pub fn embedding_channels(&self) -> impl Iterator<Item = &str> {
        self.embeddings.keys().map(String::as_str)
    }
}

/// Checks the corpus-level invariants: non-empty unique ids and identical
/// channel sets across samples.
pub fn validate_corpus(samples: &[Sample]) -> Result<()> {
    let mut seen = BTreeSet::new();
    for s in samples {
        if s.id.is_empty() {
            return Err(data_err!("sample with empty id"));
        }
        if !seen.insert(s.id.as_str()) {
            return Err(data_err!("duplicate sample id {}", s.id));
        }
    }
    if let Some(first) = samples.first() {
        let texts: Vec<&str> = first.text_channels().collect();
        let embs: Vec<&str> = first.embedding_channels().collect();
        for s in &samples[1..] {
            if !s.text_channels().eq(texts.iter().copied()) || !s.embedding_channels().eq(embs.iter().copied()) {
                return Err(data_err!("sample {} exposes a different channel set than {}", s.id, first.id));
            }
        }
    }
    Ok(())
}

/// Text of `channel` for every sample, failing on the first sample without it.
pub fn channel_texts<'a>(samples: &'a [Sample], channel: &str) -> Result<Vec<&'a str>> {
    samples.iter().map(|s| s.text(channel).ok_or_else(|| data_err!("sample {} has no text channel {}", s.id, channel))).collect()
}

/// Occurrence counts of every contiguous length-`p` code-point window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PgramProfile {
    p: usize,
    counts: BTreeMap<String, u64>,
}

impl PgramProfile {
    pub fn p(&self) -> usize {
        self.p
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn count(&self, gram: &str) -> u64 {
        self.counts.get(gram).copied().unwrap_or(0)
    }

    /// Total number of windows, `max(0, |text| - p + 1)`.
    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    /// Entries in lexicographic key order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.counts.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

pub fn extract_pgrams(text: &str, p: usize) -> Result<PgramProfile> {
    if p == 0 {
        return Err(invalid!("p-gram length must be at least 1"));
    }
    let chars: Vec<char> = text.chars().collect();
    let mut counts = BTreeMap::new();
    for w in chars.windows(p) {
        *counts.entry(w.iter().collect::<String>()).or_insert(0) += 1;
    }
    Ok(PgramProfile { p, counts })
}

/// Builds a profile from explicit `(gram, count)` pairs.
pub fn profile_from_counts<'a>(p: usize, entries: impl IntoIterator<Item = (&'a str, u64)>) -> Result<PgramProfile> {
    if p == 0 {
        return Err(invalid!("p-gram length must be at least 1"));
    }
    let mut counts = BTreeMap::new();
    for (gram, count) in entries {
        if gram.chars().count() != p {
            return Err(invalid!("p-gram {gram:?} does not have length {p}"));
        }
        if count == 0 {
            return Err(invalid!("p-gram {gram:?} has a zero count"));
        }
        counts.insert(gram.to_string(), count);
    }
    Ok(PgramProfile { p, counts })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn whitespace_examples() {
        assert_eq!(normalize_whitespace("a  b\tc"), "a b c");
        assert_eq!(normalize_whitespace(""), "");
        assert_eq!(normalize_whitespace(" x "), "x");
        assert_eq!(normalize_whitespace("\r\n a \n\n\tb\r"), "a b");
        // Non-breaking space is not in the whitespace class.
        assert_eq!(normalize_whitespace("a\u{a0}\u{a0}b"), "a\u{a0}\u{a0}b");
    }

    #[test]
    fn pgram_examples() {
        let ab = extract_pgrams("abab", 2).unwrap();
        assert_eq!(ab.iter().collect::<Vec<_>>(), vec![("ab", 2), ("ba", 1)]);
        assert!(extract_pgrams("ab", 3).unwrap().is_empty());
        assert_eq!(extract_pgrams("aaa", 1).unwrap().iter().collect::<Vec<_>>(), vec![("a", 3)]);
    }

    #[test]
    fn pgrams_count_code_points() {
        let prof = extract_pgrams("سلام", 2).unwrap();
        assert_eq!(prof.total(), 3);
        assert_eq!(prof.count("سل"), 1);
    }

    #[test]
    fn zero_p_rejected() {
        assert!(extract_pgrams("abc", 0).is_err());
    }

    #[test]
    fn corpus_validation() {
        let a = Sample::new("a", None).with_text("speech", "x  y");
        assert_eq!(a.text("speech"), Some("x y"));
        let b = Sample::new("b", None).with_text("speech", "z");
        assert!(validate_corpus(&[a.clone(), b.clone()]).is_ok());
        assert!(validate_corpus(&[a.clone(), a.clone()]).is_err());
        let c = Sample::new("c", None).with_text("other", "z");
        assert!(validate_corpus(&[a, c]).is_err());
        let err = channel_texts(&[b], "missing").unwrap_err();
        assert!(alloc::format!("{err}").contains('b'));
    }
}
