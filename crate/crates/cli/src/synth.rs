//! Seeded synthetic corpora with controllable class separability.
//!
//! ```toml
//! classes = 5
//! train_per_class = 100
//! test_per_class = 50
//! dev_per_class = 0
//! vocab_per_class = 30        # class-specific 3-letter words
//! shared_vocab = 60           # words every class draws from
//! words_min = 8
//! words_max = 16
//! separation = 0.5            # chance a word comes from the class vocabulary
//! text_channels = ["speech"]
//! embedding_channels = ["audio"]
//! embedding_dim = 16
//! embedding_separation = 4.0  # distance of class centers from the origin
//! noise = 0.3                 # per-coordinate Gaussian noise
//! ```
//!
//! Vocabularies of different classes (and the shared one) are disjoint.
//! Each text channel draws its own vocabularies. Writes
//! `<split>.<channel>.tsv`, `<split>.<channel>.csv` and a `manifest.toml`.

use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Deserialize;

use crate::error::{CliError, Result};
use crate::formats::corpus::{write_corpus_string, CorpusRow};
use crate::formats::embedding::write_embeddings_string;
use crate::fsutil::{read_to_string, write_atomic};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSpec {
    pub classes: usize,
    pub train_per_class: usize,
    #[serde(default)]
    pub test_per_class: usize,
    #[serde(default)]
    pub dev_per_class: usize,
    #[serde(default = "default_vocab")]
    pub vocab_per_class: usize,
    #[serde(default = "default_shared")]
    pub shared_vocab: usize,
    #[serde(default = "default_words_min")]
    pub words_min: usize,
    #[serde(default = "default_words_max")]
    pub words_max: usize,
    #[serde(default = "default_separation")]
    pub separation: f64,
    #[serde(default = "default_text_channels")]
    pub text_channels: Vec<String>,
    #[serde(default)]
    pub embedding_channels: Vec<String>,
    #[serde(default = "default_dim")]
    pub embedding_dim: usize,
    #[serde(default)]
    pub embedding_separation: f64,
    #[serde(default = "default_noise")]
    pub noise: f64,
}

fn default_vocab() -> usize {
    30
}
fn default_shared() -> usize {
    60
}
fn default_words_min() -> usize {
    8
}
fn default_words_max() -> usize {
    16
}
fn default_separation() -> f64 {
    0.5
}
fn default_text_channels() -> Vec<String> {
    vec!["speech".into()]
}
fn default_dim() -> usize {
    16
}
fn default_noise() -> f64 {
    0.3
}

const ALPHABET: &[u8] = b"abcdefghijklmnopqrstuvwxyz";
const SPLITS: [&str; 3] = ["train", "test", "dev"];

fn config(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn valid_channel(name: &str) -> bool {
    !name.is_empty() && name.chars().all(|c| c.is_ascii_alphanumeric() || "._-".contains(c))
}

impl SynthSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let s: SynthSpec = toml::from_str(text).map_err(|e| config(format!("invalid synth spec: {e}")))?;
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.classes < 2 {
            return Err(config("synth needs at least 2 classes"));
        }
        if self.train_per_class == 0 {
            return Err(config("train_per_class must be at least 1"));
        }
        if self.vocab_per_class == 0 && self.separation > 0.0 {
            return Err(config("vocab_per_class must be positive when separation > 0"));
        }
        if self.shared_vocab == 0 && self.separation < 1.0 {
            return Err(config("shared_vocab must be positive when separation < 1"));
        }
        let needed = self.text_channels.len().max(1) * (self.classes * self.vocab_per_class + self.shared_vocab);
        if needed > ALPHABET.len().pow(3) {
            return Err(config(format!("vocabularies need {needed} distinct 3-letter words, only {} exist", ALPHABET.len().pow(3))));
        }
        if self.words_min == 0 || self.words_min > self.words_max {
            return Err(config("need 1 <= words_min <= words_max"));
        }
        if !(0.0..=1.0).contains(&self.separation) {
            return Err(config("separation must lie in [0, 1]"));
        }
        if self.text_channels.is_empty() {
            return Err(config("synth needs at least one text channel"));
        }
        let mut names: Vec<&String> = self.text_channels.iter().chain(&self.embedding_channels).collect();
        if let Some(bad) = names.iter().find(|n| !valid_channel(n)) {
            return Err(config(format!("channel name {bad:?} must be non-empty ASCII letters, digits, '.', '_' or '-'")));
        }
        names.sort();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(config("channel names must be distinct"));
        }
        if !self.embedding_channels.is_empty() && self.embedding_dim == 0 {
            return Err(config("embedding_dim must be positive"));
        }
        if !(self.embedding_separation >= 0.0 && self.embedding_separation.is_finite()) {
            return Err(config("embedding_separation must be finite and non-negative"));
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return Err(config("noise must be finite and non-negative"));
        }
        Ok(())
    }

    fn per_class(&self, split: &str) -> usize {
        match split {
            "train" => self.train_per_class,
            "test" => self.test_per_class,
            _ => self.dev_per_class,
        }
    }
}

pub fn class_name(spec: &SynthSpec, c: usize) -> String {
    let width = (spec.classes - 1).to_string().len();
    format!("c{c:0width$}")
}

fn all_words() -> Vec<String> {
    let mut out = Vec::with_capacity(ALPHABET.len().pow(3));
    for a in ALPHABET {
        for b in ALPHABET {
            for c in ALPHABET {
                out.push(String::from_utf8(vec![*a, *b, *c]).expect("ascii"));
            }
        }
    }
    out
}

struct Vocab {
    classes: Vec<Vec<String>>,
    shared: Vec<String>,
}

/// Generated files, keyed by their path relative to the output directory.
pub struct SynthOutput {
    pub files: Vec<(String, String)>,
}

pub fn generate(spec: &SynthSpec, seed: u64) -> Result<SynthOutput> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut words = all_words();
    words.shuffle(&mut rng);
    let mut pool = words.into_iter();
    let vocabs: Vec<Vocab> = spec
        .text_channels
        .iter()
        .map(|_| Vocab {
            classes: (0..spec.classes).map(|_| pool.by_ref().take(spec.vocab_per_class).collect()).collect(),
            shared: pool.by_ref().take(spec.shared_vocab).collect(),
        })
        .collect();
    let unit = Normal::new(0.0, 1.0).expect("valid normal");
    let centers: Vec<Vec<Vec<f64>>> = spec
        .embedding_channels
        .iter()
        .map(|_| {
            (0..spec.classes)
                .map(|_| {
                    let v: Vec<f64> = (0..spec.embedding_dim).map(|_| unit.sample(&mut rng)).collect();
                    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
                    v.iter().map(|x| x / norm * spec.embedding_separation).collect()
                })
                .collect()
        })
        .collect();

    let mut files = Vec::new();
    let mut manifest = String::new();
    for split in SPLITS {
        let per_class = spec.per_class(split);
        if per_class == 0 {
            continue;
        }
        let n = per_class * spec.classes;
        let width = n.to_string().len();
        let labels: Vec<usize> = (0..n).map(|i| i % spec.classes).collect();
        let ids: Vec<String> = (0..n).map(|i| format!("{split}-{i:0width$}")).collect();
        let mut text_entries = Vec::new();
        for (ch, vocab) in spec.text_channels.iter().zip(&vocabs) {
            let rows: Vec<CorpusRow> = ids
                .iter()
                .zip(&labels)
                .map(|(id, &c)| {
                    let len = rng.random_range(spec.words_min..=spec.words_max);
                    let text = (0..len)
                        .map(|_| {
                            let from_class = rng.random_bool(spec.separation);
                            let list = if from_class { &vocab.classes[c] } else { &vocab.shared };
                            list[rng.random_range(0..list.len())].as_str()
                        })
                        .collect::<Vec<_>>()
                        .join(" ");
                    CorpusRow { id: id.clone(), label: Some(class_name(spec, c)), text }
                })
                .collect();
            let name = format!("{split}.{ch}.tsv");
            files.push((name.clone(), write_corpus_string(&rows)));
            text_entries.push(format!("{ch:?} = {name:?}"));
        }
        let mut emb_entries = Vec::new();
        for (ch, centers) in spec.embedding_channels.iter().zip(&centers) {
            let rows: Vec<(String, Vec<f64>)> = ids
                .iter()
                .zip(&labels)
                .map(|(id, &c)| (id.clone(), centers[c].iter().map(|m| m + spec.noise * unit.sample(&mut rng)).collect()))
                .collect();
            let name = format!("{split}.{ch}.csv");
            files.push((name.clone(), write_embeddings_string(&rows)));
            emb_entries.push(format!("{ch:?} = {name:?}"));
        }
        let header = if split == "train" { "[[train]]".to_string() } else { format!("[{split}]") };
        manifest.push_str(&format!("{header}\ntext = {{ {} }}\n", text_entries.join(", ")));
        if !emb_entries.is_empty() {
            manifest.push_str(&format!("embeddings = {{ {} }}\n", emb_entries.join(", ")));
        }
        manifest.push('\n');
    }
    files.push(("manifest.toml".into(), manifest));
    Ok(SynthOutput { files })
}

/// `synth`: generates the corpus described by `spec_path` into `out`.
pub fn cmd_synth(spec_path: &Path, seed: u64, out: &Path) -> Result<Vec<PathBuf>> {
    let spec = SynthSpec::parse(&read_to_string(spec_path)?)?;
    let generated = generate(&spec, seed)?;
    let mut written = Vec::new();
    for (name, content) in generated.files {
        let path = out.join(name);
        write_atomic(&path, content.as_bytes())?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formats::corpus::parse_corpus;
    use std::collections::BTreeSet;

    fn spec() -> SynthSpec {
        SynthSpec::parse(
            "classes = 3\ntrain_per_class = 4\ntest_per_class = 2\nseparation = 1.0\nvocab_per_class = 5\nshared_vocab = 5\n\
             text_channels = ['a', 'b']\nembedding_channels = ['e']\nembedding_dim = 3\nembedding_separation = 2.0\n",
        )
        .unwrap()
    }

    #[test]
    fn deterministic_per_seed() {
        let a = generate(&spec(), 7).unwrap().files;
        let b = generate(&spec(), 7).unwrap().files;
        let c = generate(&spec(), 8).unwrap().files;
        assert_eq!(a, b);
        assert_ne!(a, c);
        let names: Vec<&str> = a.iter().map(|(n, _)| n.as_str()).collect();
        assert_eq!(names, ["train.a.tsv", "train.b.tsv", "train.e.csv", "test.a.tsv", "test.b.tsv", "test.e.csv", "manifest.toml"]);
    }

    #[test]
    fn full_separation_uses_disjoint_class_vocabularies() {
        let files = generate(&spec(), 1).unwrap().files;
        let rows = parse_corpus(Path::new("x"), &files[0].1).unwrap();
        assert_eq!(rows.len(), 12);
        let mut vocab: Vec<BTreeSet<&str>> = vec![BTreeSet::new(); 3];
        for r in &rows {
            let c: usize = r.label.as_ref().unwrap()[1..].parse().unwrap();
            vocab[c].extend(r.text.split(' '));
        }
        for i in 0..3 {
            for j in i + 1..3 {
                assert!(vocab[i].is_disjoint(&vocab[j]));
            }
        }
    }

    #[test]
    fn invalid_specs() {
        for bad in [
            "classes = 1\ntrain_per_class = 1\n",
            "classes = 2\ntrain_per_class = 0\n",
            "classes = 2\ntrain_per_class = 1\nseparation = 1.5\n",
            "classes = 2\ntrain_per_class = 1\nwords_min = 5\nwords_max = 2\n",
            "classes = 2\ntrain_per_class = 1\ntext_channels = []\n",
            "classes = 2\ntrain_per_class = 1\ntext_channels = ['a b']\n",
            "classes = 2\ntrain_per_class = 1\ntext_channels = ['a']\nembedding_channels = ['a']\n",
            "classes = 2000\ntrain_per_class = 1\nvocab_per_class = 10\n",
            "classes = 2\ntrain_per_class = 1\nnoise = -1.0\n",
            "classes = 2\n",
            "classes = 2\ntrain_per_class = 1\nbogus = 1\n",
        ] {
            assert!(matches!(SynthSpec::parse(bad), Err(CliError::Config(_))), "{bad}");
        }
    }
}
