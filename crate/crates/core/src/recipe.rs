//! Declarative kernel recipes and the code that turns them into matrices.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::algebra::{ids_of, normalize_values, square_values, sum_kernels, KernelMatrix, Provenance};
use crate::embedding::{channel_vectors, distance_matrix, rbf_from_distances};
use crate::error::{invalid, Result};
use crate::exec::Executor;
use crate::learners::LearnerKind;
use crate::linalg::Matrix;
use crate::lrd::{self, normalized_distance_matrices, rbf_blend};
use crate::string_kernels::{add_assign, per_p_self_matrices, PgramRange, StringKernelKind};
use crate::text::channel_texts;
use crate::Sample;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ComponentKind {
    Spectrum,
    Presence,
    Intersection,
    LrdRbf,
    EmbeddingRbf,
}

impl ComponentKind {
    pub const ALL: [ComponentKind; 5] =
        [ComponentKind::Spectrum, ComponentKind::Presence, ComponentKind::Intersection, ComponentKind::LrdRbf, ComponentKind::EmbeddingRbf];

    pub fn string_kind(self) -> Option<StringKernelKind> {
        match self {
            ComponentKind::Spectrum => Some(StringKernelKind::Spectrum),
            ComponentKind::Presence => Some(StringKernelKind::Presence),
            ComponentKind::Intersection => Some(StringKernelKind::Intersection),
            _ => None,
        }
    }

    pub fn uses_range(self) -> bool {
        self != ComponentKind::EmbeddingRbf
    }

    pub fn is_rbf(self) -> bool {
        matches!(self, ComponentKind::LrdRbf | ComponentKind::EmbeddingRbf)
    }

    pub fn name(self) -> &'static str {
        match self {
            ComponentKind::Spectrum => "spectrum",
            ComponentKind::Presence => "presence",
            ComponentKind::Intersection => "intersection",
            ComponentKind::LrdRbf => "lrd_rbf",
            ComponentKind::EmbeddingRbf => "embedding_rbf",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }
}

impl fmt::Display for ComponentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One summand of a kernel recipe.
#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub kind: ComponentKind,
    pub channel: String,
    /// p-gram range; string kernels and LRD only.
    pub range: Option<PgramRange>,
    /// RBF width; RBF kinds only.
    pub sigma: Option<f64>,
    /// LRD window; LRD only.
    pub m: Option<usize>,
    pub normalized: bool,
    /// Normalize each per-p kernel before blending (string kernels only).
    pub normalize_each_p: bool,
    pub squared: bool,
    /// Use `||x - y||^2` instead of `||x - y||` in the embedding RBF.
    pub squared_distance: bool,
}

impl Component {
    /// String kernel component, normalized by default.
    pub fn string(kind: StringKernelKind, channel: impl Into<String>, range: PgramRange) -> Self {
        Self {
            kind: kind.into(),
            channel: channel.into(),
            range: Some(range),
            sigma: None,
            m: None,
            normalized: true,
            normalize_each_p: false,
            squared: false,
            squared_distance: false,
        }
    }

    pub fn lrd(channel: impl Into<String>, range: PgramRange, m: usize, sigma: f64) -> Self {
        Self {
            kind: ComponentKind::LrdRbf,
            channel: channel.into(),
            range: Some(range),
            sigma: Some(sigma),
            m: Some(m),
            normalized: false,
            normalize_each_p: false,
            squared: false,
            squared_distance: false,
        }
    }

    pub fn embedding(channel: impl Into<String>, sigma: f64) -> Self {
        Self {
            kind: ComponentKind::EmbeddingRbf,
            channel: channel.into(),
            range: None,
            sigma: Some(sigma),
            m: None,
            normalized: false,
            normalize_each_p: false,
            squared: false,
            squared_distance: false,
        }
    }

    pub fn normalized(mut self, on: bool) -> Self {
        self.normalized = on;
        self
    }

    pub fn squared(mut self, on: bool) -> Self {
        self.squared = on;
        self
    }

    pub fn squared_distance(mut self, on: bool) -> Self {
        self.squared_distance = on;
        self
    }

    pub fn normalize_each_p(mut self, on: bool) -> Self {
        self.normalize_each_p = on;
        self
    }

    /// Checks that exactly the parameters applicable to the kind are set.
    pub fn validate(&self) -> Result<()> {
        let kind = self.kind;
        if self.channel.is_empty() {
            return Err(invalid!("{kind} component has an empty channel name"));
        }
        match (kind.uses_range(), self.range) {
            (true, None) => return Err(invalid!("{kind} component on {} needs a p-gram range", self.channel)),
            (false, Some(_)) => return Err(invalid!("{kind} component does not take a p-gram range")),
            _ => {}
        }
        match (kind.is_rbf(), self.sigma) {
            (true, None) => return Err(invalid!("{kind} component needs sigma")),
            (true, Some(s)) if !(s > 0.0 && s.is_finite()) => return Err(invalid!("{kind} component has non-positive sigma {s}")),
            (false, Some(_)) => return Err(invalid!("{kind} component does not take sigma")),
            _ => {}
        }
        match (kind == ComponentKind::LrdRbf, self.m) {
            (true, None) | (true, Some(0)) => return Err(invalid!("lrd_rbf component needs a window m >= 1")),
            (false, Some(_)) => return Err(invalid!("{kind} component does not take a window m")),
            _ => {}
        }
        if self.squared_distance && kind != ComponentKind::EmbeddingRbf {
            return Err(invalid!("squared_distance applies to embedding_rbf components only"));
        }
        if self.normalize_each_p && kind.string_kind().is_none() {
            return Err(invalid!("normalize_each_p applies to string kernel components only"));
        }
        Ok(())
    }

    /// Short stable name such as `presence_speech_3-6`.
    pub fn label(&self) -> String {
        let mut s = format!("{}_{}", self.kind, self.channel);
        if let Some(r) = self.range {
            s.push_str(&format!("_{r}"));
        }
        s
    }
}

/// Components summed into one kernel, plus the learner that consumes it.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelRecipe {
    pub components: Vec<Component>,
    pub learner: LearnerKind,
    pub lambda: f64,
}

/// Default regularization strength.
pub const DEFAULT_LAMBDA: f64 = 1e-3;

impl KernelRecipe {
    pub fn validate(&self) -> Result<()> {
        if self.components.is_empty() {
            return Err(invalid!("recipe has no kernel components"));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(invalid!("lambda must be positive, got {}", self.lambda));
        }
        self.components.iter().try_for_each(Component::validate)
    }
}

/// Precomputed, parameter-independent ingredients of a component over one
/// sample set. Realizing a sub-range, a sigma, and the normalize/square
/// flags from a basis gives bit-identical results to building the component
/// directly, which lets tuning grids share the expensive part.
#[derive(Debug, Clone)]
pub enum ComponentBasis {
    /// Raw per-p string kernel matrices for `span`, ascending p.
    String { kind: StringKernelKind, span: PgramRange, per_p: Vec<Matrix> },
    /// Normalized LRD distance matrices for `span`, ascending p.
    Lrd { span: PgramRange, m: usize, per_p: Vec<Matrix> },
    /// Pairwise distances (squared or not, per `squared_distance`).
    Embedding { squared_distance: bool, distances: Matrix },
}

impl ComponentBasis {
    /// Computes the basis for `component`, covering `span` instead of the
    /// component's own range when given.
    pub fn compute<E: Executor + ?Sized>(exec: &E, samples: &[Sample], component: &Component, span: Option<PgramRange>) -> Result<Self> {
        component.validate()?;
        let span = span.or(component.range);
        match component.kind {
            ComponentKind::EmbeddingRbf => {
                let vectors = channel_vectors(samples, &component.channel)?;
                Ok(ComponentBasis::Embedding {
                    squared_distance: component.squared_distance,
                    distances: distance_matrix(exec, &vectors, component.squared_distance),
                })
            }
            ComponentKind::LrdRbf => {
                let span = span.expect("validated");
                let m = component.m.expect("validated");
                let texts = channel_texts(samples, &component.channel)?;
                Ok(ComponentBasis::Lrd { span, m, per_p: normalized_distance_matrices(exec, &texts, span, m)? })
            }
            kind => {
                let kind = kind.string_kind().expect("string kind");
                let span = span.expect("validated");
                let texts = channel_texts(samples, &component.channel)?;
                Ok(ComponentBasis::String { kind, span, per_p: per_p_self_matrices(exec, &texts, kind, span) })
            }
        }
    }

    fn slice<'a>(span: &PgramRange, per_p: &'a [Matrix], range: Option<PgramRange>) -> Result<&'a [Matrix]> {
        let range = range.ok_or_else(|| invalid!("component needs a p-gram range"))?;
        if !span.contains(&range) {
            return Err(invalid!("range {range} is outside the precomputed span {span}"));
        }
        let lo = range.p_min() - span.p_min();
        Ok(&per_p[lo..lo + range.len()])
    }

    /// Produces the component matrix (blend, RBF, normalize, square).
    pub fn realize<E: Executor + ?Sized>(&self, exec: &E, component: &Component) -> Result<Matrix> {
        component.validate()?;
        let mut values = match self {
            ComponentBasis::String { kind, span, per_p } => {
                if component.kind.string_kind() != Some(*kind) {
                    return Err(invalid!("basis was computed for a different string kernel"));
                }
                let parts = Self::slice(span, per_p, component.range)?;
                let n = parts[0].rows();
                let mut acc = Matrix::zeros(n, n);
                for part in parts {
                    if component.normalize_each_p {
                        let d = part.diagonal();
                        add_assign(&mut acc, &normalize_values(part, &d, &d, true));
                    } else {
                        add_assign(&mut acc, part);
                    }
                }
                acc
            }
            ComponentBasis::Lrd { span, m, per_p } => {
                if component.kind != ComponentKind::LrdRbf || component.m != Some(*m) {
                    return Err(invalid!("basis was computed for a different LRD component"));
                }
                rbf_blend(Self::slice(span, per_p, component.range)?, component.sigma.unwrap_or(lrd::DEFAULT_SIGMA))?
            }
            ComponentBasis::Embedding { squared_distance, distances } => {
                if component.kind != ComponentKind::EmbeddingRbf || component.squared_distance != *squared_distance {
                    return Err(invalid!("basis was computed for a different embedding component"));
                }
                rbf_from_distances(distances, component.sigma.unwrap_or(lrd::DEFAULT_SIGMA))?
            }
        };
        if component.normalized {
            let d = values.diagonal();
            values = normalize_values(&values, &d, &d, true);
        }
        if component.squared {
            values = square_values(exec, &values);
        }
        Ok(values)
    }
}

/// Builds one component's self-similarity matrix over `samples`.
pub fn build_component<E: Executor + ?Sized>(exec: &E, samples: &[Sample], component: &Component) -> Result<KernelMatrix> {
    let basis = ComponentBasis::compute(exec, samples, component, None)?;
    let values = basis.realize(exec, component)?;
    let ids = ids_of(samples);
    KernelMatrix::new(values, ids.clone(), ids, Provenance::single(component.clone(), true))
}

/// Builds every component of `recipe` and their sum.
pub fn build_combined<E: Executor + ?Sized>(
    exec: &E,
    samples: &[Sample],
    recipe: &KernelRecipe,
) -> Result<(Vec<KernelMatrix>, KernelMatrix)> {
    recipe.validate()?;
    let parts = recipe.components.iter().map(|c| build_component(exec, samples, c)).collect::<Result<Vec<_>>>()?;
    let combined = sum_kernels(&parts)?;
    Ok((parts, combined))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::normalize;
    use crate::exec::Sequential;
    use crate::string_kernels::blended_self_matrix;
    use alloc::vec;

    fn corpus() -> Vec<Sample> {
        ["the quick fox", "a quick brown dog", "", "foxes and dogs"]
            .iter()
            .enumerate()
            .map(|(i, t)| Sample::new(format!("s{i}"), None).with_text("t", t).with_embedding("e", vec![i as f64, 1.0]))
            .collect()
    }

    #[test]
    fn validation_rules() {
        let r = PgramRange::new(3, 5).unwrap();
        assert!(Component::string(StringKernelKind::Presence, "t", r).validate().is_ok());
        let mut c = Component::string(StringKernelKind::Presence, "t", r);
        c.sigma = Some(1.0);
        assert!(c.validate().is_err());
        let mut e = Component::embedding("e", 1.0);
        e.range = Some(r);
        assert!(e.validate().is_err());
        assert!(Component::embedding("e", -1.0).validate().is_err());
        assert!(Component::lrd("t", r, 0, 1.0).validate().is_err());
        assert!(Component::lrd("t", r, 300, 1.0).squared_distance(true).validate().is_err());
        let empty = KernelRecipe { components: vec![], learner: LearnerKind::Krr, lambda: 1e-3 };
        assert!(empty.validate().is_err());
        let bad_lambda = KernelRecipe { components: vec![Component::embedding("e", 1.0)], learner: LearnerKind::Krr, lambda: 0.0 };
        assert!(bad_lambda.validate().is_err());
    }

    #[test]
    fn component_matches_normalized_blend() {
        let s = corpus();
        let r = PgramRange::new(1, 3).unwrap();
        let c = Component::string(StringKernelKind::Intersection, "t", r);
        let built = build_component(&Sequential, &s, &c).unwrap();
        let manual = normalize(&blended_self_matrix(&Sequential, &s, "t", StringKernelKind::Intersection, r).unwrap()).unwrap();
        assert_eq!(built.values, manual.values);
        // empty text falls under the zero-diagonal rule
        assert_eq!(built.values[(2, 2)], 1.0);
        assert_eq!(built.values[(2, 0)], 0.0);
    }

    #[test]
    fn basis_subrange_equals_direct_build() {
        let s = corpus();
        let span = PgramRange::new(1, 5).unwrap();
        let c = Component::string(StringKernelKind::Spectrum, "t", PgramRange::new(2, 4).unwrap()).squared(true);
        let basis = ComponentBasis::compute(&Sequential, &s, &c, Some(span)).unwrap();
        assert_eq!(basis.realize(&Sequential, &c).unwrap(), build_component(&Sequential, &s, &c).unwrap().values);

        let l = Component::lrd("t", PgramRange::new(2, 3).unwrap(), 50, 0.5);
        let lb = ComponentBasis::compute(&Sequential, &s, &l, Some(span)).unwrap();
        assert_eq!(lb.realize(&Sequential, &l).unwrap(), build_component(&Sequential, &s, &l).unwrap().values);
    }

    #[test]
    fn normalize_each_p_gives_range_length_diagonal_before_final_normalization() {
        let s = corpus();
        let r = PgramRange::new(1, 3).unwrap();
        let c = Component::string(StringKernelKind::Presence, "t", r).normalize_each_p(true).normalized(false);
        let k = build_component(&Sequential, &s, &c).unwrap();
        assert_eq!(k.values[(0, 0)], 3.0);
        assert_eq!(k.values[(2, 2)], 3.0);
    }
}
