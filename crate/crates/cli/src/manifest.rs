//! Run manifests: which corpus and embedding files make up the training,
//! test and development sets.
//!
//! ```toml
//! recipe = "recipe.toml"          # optional; --recipe overrides it
//!
//! [[train]]                       # one or more, concatenated in order
//! text = { speech = "train.speech.tsv", "phonetic.cz" = "train.cz.tsv" }
//! embeddings = { audio = "train.audio.csv" }
//!
//! [test]
//! text = { speech = "test.speech.tsv" }
//! embeddings = { audio = "test.audio.csv" }
//!
//! [dev]                           # used by `tune`
//! text = { speech = "dev.speech.tsv" }
//! ```
//!
//! Relative paths resolve against the manifest's directory.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::Deserialize;
use strkern_core::{ComponentKind, KernelRecipe, Sample};

use crate::error::{CliError, Result};
use crate::formats::corpus::read_corpus;
use crate::formats::embedding::{align_embeddings, read_embeddings};
use crate::fsutil::read_to_string;

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusSpec {
    #[serde(default)]
    pub text: BTreeMap<String, PathBuf>,
    #[serde(default)]
    pub embeddings: BTreeMap<String, PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub recipe: Option<PathBuf>,
    #[serde(default)]
    pub train: Vec<CorpusSpec>,
    pub test: Option<CorpusSpec>,
    pub dev: Option<CorpusSpec>,
}

impl CorpusSpec {
    fn resolve(&mut self, base: &Path) {
        for p in self.text.values_mut().chain(self.embeddings.values_mut()) {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }

    /// Fails with a config error when the recipe names a channel this
    /// corpus does not declare.
    pub fn check_channels(&self, recipe: &KernelRecipe, role: &str) -> Result<()> {
        for c in &recipe.components {
            let (declared, what) = match c.kind {
                ComponentKind::EmbeddingRbf => (self.embeddings.contains_key(&c.channel), "embedding"),
                _ => (self.text.contains_key(&c.channel), "text"),
            };
            if !declared {
                return Err(CliError::Config(format!(
                    "recipe component {} needs {what} channel {:?}, which the {role} corpus does not declare",
                    c.label(),
                    c.channel
                )));
            }
        }
        Ok(())
    }

    /// Loads every declared channel into samples. Ids and labels come from
    /// the text files, which must agree line by line.
    pub fn load(&self, role: &str) -> Result<Vec<Sample>> {
        let mut channels = self.text.iter();
        let (first_name, first_path) =
            channels.next().ok_or_else(|| CliError::Config(format!("the {role} corpus declares no text channel")))?;
        let rows = read_corpus(first_path)?;
        let mut samples: Vec<Sample> =
            rows.iter().map(|r| Sample::new(r.id.clone(), r.label.clone()).with_text(first_name.clone(), &r.text)).collect();
        let mut seen = BTreeSet::new();
        for s in &samples {
            if !seen.insert(s.id.as_str()) {
                return Err(CliError::Data(format!("{}: duplicate sample id {}", first_path.display(), s.id)));
            }
        }
        for (name, path) in channels {
            let rows = read_corpus(path)?;
            if rows.len() != samples.len() {
                return Err(CliError::Data(format!(
                    "{} has {} samples but {} has {}",
                    path.display(),
                    rows.len(),
                    first_path.display(),
                    samples.len()
                )));
            }
            for (s, r) in samples.iter_mut().zip(rows) {
                if s.id != r.id {
                    return Err(CliError::Data(format!(
                        "{}: sample {} where {} lists {}",
                        path.display(),
                        r.id,
                        first_path.display(),
                        s.id
                    )));
                }
                if s.label != r.label {
                    return Err(CliError::Data(format!(
                        "{}: sample {} has a different label than in {}",
                        path.display(),
                        r.id,
                        first_path.display()
                    )));
                }
                s.set_text(name.clone(), &r.text);
            }
        }
        let ids: Vec<String> = samples.iter().map(|s| s.id.clone()).collect();
        for (name, path) in &self.embeddings {
            let vectors = align_embeddings(path, read_embeddings(path)?, &ids)?;
            for (s, v) in samples.iter_mut().zip(vectors) {
                s.set_embedding(name.clone(), v);
            }
        }
        Ok(samples)
    }
}

impl Manifest {
    pub fn parse(path: &Path, text: &str) -> Result<Self> {
        let mut m: Manifest = toml::from_str(text).map_err(|e| CliError::Config(format!("invalid manifest {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        if let Some(r) = m.recipe.as_mut().filter(|r| r.is_relative()) {
            *r = base.join(&*r);
        }
        m.train.iter_mut().chain(m.test.as_mut()).chain(m.dev.as_mut()).for_each(|c| c.resolve(base));
        Ok(m)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(path, &read_to_string(path)?)
    }

    pub fn test(&self) -> Result<&CorpusSpec> {
        self.test.as_ref().ok_or_else(|| CliError::Config("manifest has no [test] corpus".into()))
    }

    pub fn dev(&self) -> Result<&CorpusSpec> {
        self.dev.as_ref().ok_or_else(|| CliError::Config("manifest has no [dev] corpus".into()))
    }

    pub fn check_train_channels(&self, recipe: &KernelRecipe) -> Result<()> {
        if self.train.is_empty() {
            return Err(CliError::Config("manifest has no [[train]] corpus".into()));
        }
        self.train.iter().try_for_each(|c| c.check_channels(recipe, "train"))
    }

    /// Concatenation of all training corpora; ids must be unique across them.
    pub fn load_train(&self) -> Result<Vec<Sample>> {
        let mut all: Vec<Sample> = Vec::new();
        let mut seen = BTreeSet::new();
        for (i, spec) in self.train.iter().enumerate() {
            for s in spec.load("train")? {
                if !seen.insert(s.id.clone()) {
                    return Err(CliError::Data(format!(
                        "sample id {} appears more than once across training corpora (corpus #{})",
                        s.id,
                        i + 1
                    )));
                }
                all.push(s);
            }
        }
        if all.is_empty() {
            return Err(CliError::Data("the training corpora contain no samples".into()));
        }
        Ok(all)
    }
}
