//! TOML recipe files.
//!
//! ```toml
//! learner = "krr"
//! lambda = 1e-3
//!
//! [[component]]
//! channel = "speech"
//! kind = "presence"
//! p_min = 3
//! p_max = 6
//! ```
//!
//! Component keys: `channel`, `kind` (`spectrum`, `presence`,
//! `intersection`, `lrd_rbf`, `embedding_rbf`), `p_min`/`p_max` (string
//! kernels and LRD), `sigma` (RBF kinds, default 1), `m` (LRD, default 300),
//! `normalized` (default true for string kernels, false otherwise),
//! `normalize_each_p`, `squared`, `squared_distance`.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use strkern_core::learners::LearnerKind;
use strkern_core::lrd::{DEFAULT_SIGMA, DEFAULT_WINDOW};
use strkern_core::recipe::DEFAULT_LAMBDA;
use strkern_core::{Component, ComponentKind, KernelRecipe, PgramRange};

use crate::error::{CliError, Result};

/// Serialized form of one component, shared by recipe files and matrix
/// metadata sidecars.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentSpec {
    pub channel: String,
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_min: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_max: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalized: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalize_each_p: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub squared: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub squared_distance: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RecipeFile {
    #[serde(default = "default_learner")]
    learner: String,
    #[serde(default = "default_lambda")]
    lambda: f64,
    #[serde(default, rename = "component")]
    components: Vec<ComponentSpec>,
}

fn default_learner() -> String {
    "krr".into()
}

fn default_lambda() -> f64 {
    DEFAULT_LAMBDA
}

fn config(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl ComponentSpec {
    pub fn to_component(&self) -> Result<Component> {
        let kind = ComponentKind::from_name(&self.kind).ok_or_else(|| config(format!("unknown component kind {:?}", self.kind)))?;
        let range = match (self.p_min, self.p_max) {
            (Some(a), Some(b)) => Some(PgramRange::new(a, b)?),
            (None, None) => None,
            _ => return Err(config(format!("component {} {} needs both p_min and p_max", self.kind, self.channel))),
        };
        let mut c = match kind {
            ComponentKind::EmbeddingRbf => Component::embedding(&self.channel, self.sigma.unwrap_or(DEFAULT_SIGMA)),
            ComponentKind::LrdRbf => Component::lrd(
                &self.channel,
                range.ok_or_else(|| config(format!("lrd_rbf component on {} needs p_min and p_max", self.channel)))?,
                self.m.unwrap_or(DEFAULT_WINDOW),
                self.sigma.unwrap_or(DEFAULT_SIGMA),
            ),
            k => {
                let range = range.ok_or_else(|| config(format!("{k} component on {} needs p_min and p_max", self.channel)))?;
                let mut c = Component::string(k.string_kind().expect("string kind"), &self.channel, range);
                c.sigma = self.sigma;
                c.m = self.m;
                c
            }
        };
        if kind == ComponentKind::EmbeddingRbf {
            c.range = range;
            c.m = self.m;
        }
        if let Some(v) = self.normalized {
            c.normalized = v;
        }
        if let Some(v) = self.normalize_each_p {
            c.normalize_each_p = v;
        }
        if let Some(v) = self.squared {
            c.squared = v;
        }
        if let Some(v) = self.squared_distance {
            c.squared_distance = v;
        }
        c.validate()?;
        Ok(c)
    }

    /// Fully explicit spec of a component.
    pub fn from_component(c: &Component) -> Self {
        let string = c.kind.string_kind().is_some();
        Self {
            channel: c.channel.clone(),
            kind: c.kind.name().to_string(),
            p_min: c.range.map(|r| r.p_min()),
            p_max: c.range.map(|r| r.p_max()),
            sigma: c.sigma,
            m: c.m,
            normalized: Some(c.normalized),
            normalize_each_p: string.then_some(c.normalize_each_p),
            squared: Some(c.squared),
            squared_distance: (c.kind == ComponentKind::EmbeddingRbf).then_some(c.squared_distance),
        }
    }
}

pub fn parse_recipe(text: &str) -> Result<KernelRecipe> {
    let file: RecipeFile = toml::from_str(text).map_err(|e| config(format!("invalid recipe: {e}")))?;
    let learner = LearnerKind::from_name(&file.learner).ok_or_else(|| config(format!("unknown learner {:?}", file.learner)))?;
    let components = file.components.iter().map(ComponentSpec::to_component).collect::<Result<Vec<_>>>()?;
    let recipe = KernelRecipe { components, learner, lambda: file.lambda };
    recipe.validate()?;
    Ok(recipe)
}

/// Canonical TOML text: every applicable parameter spelled out, components
/// in recipe order. Equal recipes give byte-identical text.
pub fn canonical_recipe(recipe: &KernelRecipe) -> String {
    let file = RecipeFile {
        learner: recipe.learner.name().to_string(),
        lambda: recipe.lambda,
        components: recipe.components.iter().map(ComponentSpec::from_component).collect(),
    };
    toml::to_string(&file).expect("recipe serializes")
}

pub fn recipe_digest(recipe: &KernelRecipe) -> [u8; 32] {
    Sha256::digest(canonical_recipe(recipe).as_bytes()).into()
}

/// The recipe behind the first submitted system: blended presence,
/// intersection and squared LRD kernels on the speech transcripts, presence
/// plus intersection kernels on each phonetic transcript with per-language
/// p-gram ranges, and a squared RBF kernel on the audio embeddings, fed to
/// KRR with lambda = 1e-3.
pub const RUN1_RECIPE: &str = r#"learner = "krr"
lambda = 1e-3

# speech transcripts
[[component]]
channel = "speech"
kind = "presence"
p_min = 3
p_max = 6

[[component]]
channel = "speech"
kind = "intersection"
p_min = 3
p_max = 6

[[component]]
channel = "speech"
kind = "lrd_rbf"
p_min = 3
p_max = 6
m = 300
sigma = 1.0
squared = true

# phonetic transcripts (Czech, English, Hungarian, Russian recognizers)
[[component]]
channel = "phonetic.cz"
kind = "presence"
p_min = 3
p_max = 6

[[component]]
channel = "phonetic.cz"
kind = "intersection"
p_min = 3
p_max = 4

[[component]]
channel = "phonetic.en"
kind = "presence"
p_min = 9
p_max = 10

[[component]]
channel = "phonetic.en"
kind = "intersection"
p_min = 9
p_max = 11

[[component]]
channel = "phonetic.hu"
kind = "presence"
p_min = 3
p_max = 5

[[component]]
channel = "phonetic.hu"
kind = "intersection"
p_min = 3
p_max = 5

[[component]]
channel = "phonetic.ru"
kind = "presence"
p_min = 3
p_max = 5

[[component]]
channel = "phonetic.ru"
kind = "intersection"
p_min = 3
p_max = 4

# audio embeddings
[[component]]
channel = "audio"
kind = "embedding_rbf"
sigma = 1.0
squared = true
"#;
