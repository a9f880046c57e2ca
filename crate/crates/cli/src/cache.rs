//! Kernel construction with an optional on-disk cache of per-p basis
//! matrices (raw string kernels, normalized LRD distances, embedding
//! distances). Entries are GKMX1 files named by a SHA-256 over the basis
//! parameters and the exact channel content of every sample, so a hit
//! returns the same bits a fresh computation would.

use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use strkern_core::recipe::ComponentBasis;
use strkern_core::{Component, ComponentKind, KernelMatrix, KernelRecipe, Matrix, PgramRange, Provenance, Sample};

use crate::error::{CliError, Result};
use crate::exec::PoolExecutor;
use crate::formats::binary::Writer;
use crate::formats::matrix;
use crate::fsutil::write_atomic;

/// Executor plus optional cache directory.
pub struct Builder {
    pub exec: PoolExecutor,
    pub cache: Option<PathBuf>,
}

fn hash_str(h: &mut Sha256, s: &str) {
    h.update((s.len() as u64).to_le_bytes());
    h.update(s.as_bytes());
}

/// Digest of one channel's content (ids plus text or vector bits) across
/// `samples`, in order.
pub fn channel_digest(samples: &[Sample], kind: ComponentKind, channel: &str) -> Result<[u8; 32]> {
    let mut h = Sha256::new();
    h.update(b"strkern-channel-v1");
    hash_str(&mut h, channel);
    for s in samples {
        hash_str(&mut h, &s.id);
        if kind == ComponentKind::EmbeddingRbf {
            let v = s.embedding(channel).ok_or_else(|| CliError::Data(format!("sample {} has no embedding channel {channel}", s.id)))?;
            h.update((v.len() as u64).to_le_bytes());
            v.iter().for_each(|x| h.update(x.to_bits().to_le_bytes()));
        } else {
            let t = s.text(channel).ok_or_else(|| CliError::Data(format!("sample {} has no text channel {channel}", s.id)))?;
            hash_str(&mut h, t);
        }
    }
    Ok(h.finalize().into())
}

/// Digest of every channel `recipe` reads, across `samples`.
pub fn context_digest(samples: &[Sample], recipe: &KernelRecipe) -> Result<[u8; 32]> {
    let mut h = Sha256::new();
    h.update(b"strkern-context-v1");
    h.update((samples.len() as u64).to_le_bytes());
    for c in &recipe.components {
        h.update(channel_digest(samples, c.kind, &c.channel)?);
    }
    Ok(h.finalize().into())
}

fn entry_key(descriptor: &str, content: &[u8; 32]) -> String {
    let mut h = Sha256::new();
    h.update(b"strkern-basis-v1\n");
    h.update(descriptor.as_bytes());
    h.update(content);
    hex::encode(h.finalize())
}

impl Builder {
    pub fn new(exec: PoolExecutor, cache: Option<PathBuf>) -> Self {
        Self { exec, cache }
    }

    fn load(&self, dir: &Path, key: &str, ids: &[String]) -> Option<Matrix> {
        let path = dir.join(format!("{key}.gkmx"));
        let (m, rows, cols) = matrix::read_matrix(&path).ok()?;
        (rows == ids && cols == ids).then_some(m)
    }

    fn store(&self, dir: &Path, key: &str, m: &Matrix, ids: &[String]) -> Result<()> {
        let mut w = Writer::new();
        matrix::encode(&mut w, m, ids, ids);
        write_atomic(&dir.join(format!("{key}.gkmx")), &w.into_bytes())
    }

    /// One basis matrix, from the cache when possible.
    fn piece(
        &self,
        samples: &[Sample],
        ids: &[String],
        content: &[u8; 32],
        descriptor: String,
        compute: impl FnOnce() -> Result<Matrix>,
    ) -> Result<Matrix> {
        let Some(dir) = &self.cache else { return compute() };
        let key = entry_key(&descriptor, content);
        if let Some(m) = self.load(dir, &key, ids) {
            return Ok(m);
        }
        let m = compute()?;
        debug_assert_eq!(m.rows(), samples.len());
        self.store(dir, &key, &m, ids)?;
        Ok(m)
    }

    /// Basis for `component` over `samples`, covering `span` (or the
    /// component's own range).
    pub fn basis(&self, samples: &[Sample], component: &Component, span: Option<PgramRange>) -> Result<ComponentBasis> {
        component.validate()?;
        let ids: Vec<String> = samples.iter().map(|s| s.id.clone()).collect();
        let content = channel_digest(samples, component.kind, &component.channel)?;
        let exec = &self.exec;
        if component.kind == ComponentKind::EmbeddingRbf {
            let descriptor = format!("embedding\nsquared_distance={}\n", component.squared_distance);
            let distances =
                self.piece(samples, &ids, &content, descriptor, || match ComponentBasis::compute(exec, samples, component, None)? {
                    ComponentBasis::Embedding { distances, .. } => Ok(distances),
                    _ => unreachable!("embedding basis"),
                })?;
            return Ok(ComponentBasis::Embedding { squared_distance: component.squared_distance, distances });
        }
        let span = span.or(component.range).expect("validated component has a range");
        let mut per_p = Vec::with_capacity(span.len());
        for p in span.iter() {
            let single = PgramRange::single(p)?;
            let descriptor = match component.kind {
                ComponentKind::LrdRbf => format!("lrd\np={p}\nm={}\n", component.m.expect("validated")),
                k => format!("string\nkind={}\np={p}\n", k.name()),
            };
            let m = self.piece(samples, &ids, &content, descriptor, || {
                match ComponentBasis::compute(exec, samples, component, Some(single))? {
                    ComponentBasis::String { mut per_p, .. } | ComponentBasis::Lrd { mut per_p, .. } => Ok(per_p.remove(0)),
                    ComponentBasis::Embedding { .. } => unreachable!("range-bearing basis"),
                }
            })?;
            per_p.push(m);
        }
        Ok(match component.kind {
            ComponentKind::LrdRbf => ComponentBasis::Lrd { span, m: component.m.expect("validated"), per_p },
            k => ComponentBasis::String { kind: k.string_kind().expect("string kind"), span, per_p },
        })
    }

    /// Self-similarity matrix of one component over `samples`.
    pub fn component(&self, samples: &[Sample], component: &Component) -> Result<KernelMatrix> {
        let values = self.basis(samples, component, None)?.realize(&self.exec, component)?;
        let ids: Vec<String> = samples.iter().map(|s| s.id.clone()).collect();
        Ok(KernelMatrix::new(values, ids.clone(), ids, Provenance::single(component.clone(), true))?)
    }

    /// Every component of `recipe` and their sum.
    pub fn combined(&self, samples: &[Sample], recipe: &KernelRecipe) -> Result<(Vec<KernelMatrix>, KernelMatrix)> {
        recipe.validate()?;
        let parts = recipe.components.iter().map(|c| self.component(samples, c)).collect::<Result<Vec<_>>>()?;
        let combined = strkern_core::algebra::sum_kernels(&parts)?;
        Ok((parts, combined))
    }
}
