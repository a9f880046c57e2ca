//! The batch commands behind the CLI subcommands.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use strkern_core::algebra::{joint_samples, split_joint, sum_kernels};
use strkern_core::learners::{self, Prediction};
use strkern_core::metrics::evaluate;
use strkern_core::{EvaluationReport, KernelMatrix, KernelRecipe, PgramRange, Sample, TrainedModel};

use crate::cache::{context_digest, Builder};
use crate::error::{CliError, Result};
use crate::formats::matrix::write_kernel;
use crate::formats::model::{read_model, write_model, ModelFile};
use crate::formats::report::{confusion_string, predictions_string, read_predictions, report_string};
use crate::fsutil::{read_to_string, write_atomic};
use crate::manifest::Manifest;
use crate::recipe::{canonical_recipe, parse_recipe, recipe_digest};

pub const MODEL_FILE: &str = "model.gkmd";
pub const PREDICTIONS_FILE: &str = "predictions.tsv";
pub const REPORT_FILE: &str = "report.tsv";
pub const CONFUSION_FILE: &str = "confusion.tsv";
pub const TUNE_FILE: &str = "tune.tsv";
pub const KERNEL_DIR: &str = "kernels";

/// Reads the recipe named by `--recipe`, falling back to the manifest's.
pub fn load_recipe(flag: Option<&Path>, manifest: &Manifest) -> Result<KernelRecipe> {
    let path = flag
        .or(manifest.recipe.as_deref())
        .ok_or_else(|| CliError::Config("no recipe: pass --recipe or set `recipe` in the manifest".into()))?;
    parse_recipe(&read_to_string(path)?)
}

fn any_squared(recipe: &KernelRecipe) -> bool {
    recipe.components.iter().any(|c| c.squared)
}

fn file_label(label: &str) -> String {
    label.chars().map(|c| if c.is_ascii_alphanumeric() || "._-".contains(c) { c } else { '_' }).collect()
}

fn labels_of(samples: &[Sample], role: &str) -> Result<Vec<String>> {
    samples.iter().map(|s| s.label.clone().ok_or_else(|| CliError::Data(format!("{role} sample {} is unlabeled", s.id)))).collect()
}

/// `kernel`: writes each component's joint train∪test matrix and their
/// sum under `<out>/kernels/`. Returns the written paths.
pub fn cmd_kernel(b: &Builder, manifest: &Manifest, recipe: &KernelRecipe, out: &Path) -> Result<Vec<PathBuf>> {
    manifest.check_train_channels(recipe)?;
    let mut samples = manifest.load_train()?;
    if let Some(test) = &manifest.test {
        test.check_channels(recipe, "test")?;
        samples = joint_samples(&samples, &test.load("test")?)?;
    }
    let dir = out.join(KERNEL_DIR);
    let (parts, combined) = b.combined(&samples, recipe)?;
    let mut written = Vec::new();
    for (i, k) in parts.iter().enumerate() {
        let path = dir.join(format!("{:02}_{}.gkmx", i, file_label(&recipe.components[i].label())));
        write_kernel(&path, k)?;
        written.push(path);
    }
    let path = dir.join("combined.gkmx");
    write_kernel(&path, &combined)?;
    written.push(path);
    Ok(written)
}

/// Train block of the combined kernel built over `train` followed by
/// `context`.
fn train_block(b: &Builder, train: &[Sample], context: &[Sample], recipe: &KernelRecipe) -> Result<(KernelMatrix, KernelMatrix)> {
    let joint = joint_samples(train, context)?;
    let (_, combined) = b.combined(&joint, recipe)?;
    Ok(split_joint(&combined, train.len())?)
}

/// `train`: fits the recipe's learner on the concatenated training corpora.
///
/// A squared component depends on every sample in the joint matrix, so for
/// recipes that square anything the manifest's test corpus (when present)
/// joins the kernel context and the same test corpus must be used at
/// prediction time.
pub fn cmd_train(b: &Builder, manifest: &Manifest, recipe: &KernelRecipe, out: &Path) -> Result<ModelFile> {
    manifest.check_train_channels(recipe)?;
    let train = manifest.load_train()?;
    let labels = labels_of(&train, "training")?;
    let context = match (&manifest.test, any_squared(recipe)) {
        (Some(test), true) => {
            test.check_channels(recipe, "test")?;
            test.load("test")?
        }
        _ => Vec::new(),
    };
    let (k_train, _) = train_block(b, &train, &context, recipe)?;
    let mut model = learners::fit(&b.exec, recipe.learner, &k_train, &labels, recipe.lambda)?;
    model.recipe_digest = recipe_digest(recipe);
    let joint = joint_samples(&train, &context)?;
    let file = ModelFile { model, context_digest: context_digest(&joint, recipe)?, recipe: canonical_recipe(recipe) };
    write_model(&out.join(MODEL_FILE), &file)?;
    Ok(file)
}

/// `predict`: scores the manifest's test corpus with a trained model.
pub fn cmd_predict(
    b: &Builder,
    manifest: &Manifest,
    recipe_flag: Option<&Path>,
    model_path: &Path,
    out: &Path,
    with_scores: bool,
) -> Result<Prediction> {
    let file = read_model(model_path)?;
    let recipe = parse_recipe(&file.recipe).map_err(|e| CliError::format(model_path, format!("embedded recipe: {e}")))?;
    if recipe_digest(&recipe) != file.model.recipe_digest {
        return Err(CliError::format(model_path, "embedded recipe does not match the recipe digest"));
    }
    if flag_or_manifest_recipe(recipe_flag, manifest).is_some() {
        let given = load_recipe(recipe_flag, manifest)?;
        if recipe_digest(&given) != file.model.recipe_digest {
            return Err(CliError::Config("the given recipe differs from the one the model was trained with".into()));
        }
    }
    manifest.check_train_channels(&recipe)?;
    let test_spec = manifest.test()?;
    test_spec.check_channels(&recipe, "test")?;
    let train = manifest.load_train()?;
    let ids: Vec<String> = train.iter().map(|s| s.id.clone()).collect();
    if ids != file.model.train_ids {
        return Err(CliError::Data("the manifest's training corpora differ from the model's training ids".into()));
    }
    let test = test_spec.load("test")?;
    let joint = joint_samples(&train, &test)?;
    let context: &[Sample] = if any_squared(&recipe) { &joint } else { &train };
    if context_digest(context, &recipe)? != file.context_digest {
        return Err(CliError::Data(if any_squared(&recipe) {
            "the recipe squares a component, so the model only scores the exact train and test corpora it was trained with".into()
        } else {
            "the training corpus content differs from the one the model was trained on".into()
        }));
    }
    let (_, combined) = b.combined(&joint, &recipe)?;
    let (_, cross) = split_joint(&combined, train.len())?;
    let prediction = learners::predict(&cross, &file.model)?;
    write_atomic(&out.join(PREDICTIONS_FILE), predictions_string(&prediction, &file.model.classes, with_scores).as_bytes())?;
    Ok(prediction)
}

fn flag_or_manifest_recipe<'a>(flag: Option<&'a Path>, manifest: &'a Manifest) -> Option<&'a Path> {
    flag.or(manifest.recipe.as_deref())
}

/// Aligns predictions to gold labels by id and evaluates them.
pub fn evaluate_pairs(predicted: &[(String, String)], gold: &[(String, String)]) -> Result<EvaluationReport> {
    let mut by_id = std::collections::BTreeMap::new();
    for (id, label) in predicted {
        if by_id.insert(id.as_str(), label.as_str()).is_some() {
            return Err(CliError::Data(format!("sample {id} is predicted more than once")));
        }
    }
    let mut seen = BTreeSet::new();
    let mut truth = Vec::with_capacity(gold.len());
    let mut pred = Vec::with_capacity(gold.len());
    for (id, label) in gold {
        if !seen.insert(id.as_str()) {
            return Err(CliError::Data(format!("sample {id} appears more than once in the gold file")));
        }
        if label == crate::formats::corpus::UNLABELED {
            return Err(CliError::Data(format!("gold sample {id} is unlabeled")));
        }
        let p = by_id.remove(id.as_str()).ok_or_else(|| CliError::Data(format!("no prediction for gold sample {id}")))?;
        truth.push(label.as_str());
        pred.push(p);
    }
    if let Some(id) = by_id.keys().next() {
        return Err(CliError::Data(format!("prediction for sample {id}, which is not in the gold file")));
    }
    if truth.is_empty() {
        return Err(CliError::Data("nothing to evaluate".into()));
    }
    let classes = learners::class_order(&truth.iter().chain(&pred).copied().collect::<Vec<_>>());
    Ok(evaluate(&truth, &pred, &classes)?)
}

/// `evaluate`: writes the report and confusion matrix for a predictions
/// file against a gold file (predictions TSV or corpus TSV).
pub fn cmd_evaluate(predictions: &Path, gold: &Path, out: &Path) -> Result<EvaluationReport> {
    let report = evaluate_pairs(&read_predictions(predictions)?, &read_predictions(gold)?)?;
    write_atomic(&out.join(REPORT_FILE), report_string(&report).as_bytes())?;
    write_atomic(&out.join(CONFUSION_FILE), confusion_string(&report).as_bytes())?;
    Ok(report)
}

/// Tuning grid file.
///
/// ```toml
/// p_span = [2, 12]            # every contiguous [a, b] inside the span
/// # p_ranges = [[3, 5], [3, 6]]  # or an explicit list
/// sigmas = [0.5, 1.0]
/// lambdas = [1e-3, 1e-4]
/// ```
///
/// A p-range replaces the range of every string-kernel and LRD component,
/// a sigma replaces the sigma of every RBF component; omitted keys keep the
/// recipe's values.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub p_span: Option<[usize; 2]>,
    pub p_ranges: Option<Vec<[usize; 2]>>,
    pub sigmas: Option<Vec<f64>>,
    pub lambdas: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    pub range: Option<PgramRange>,
    pub sigma: Option<f64>,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TuneRow {
    pub point: GridPoint,
    pub accuracy: f64,
    pub macro_f1: f64,
    pub weighted_f1: f64,
}

fn nonempty<T>(v: Option<Vec<T>>, name: &str) -> Result<Option<Vec<T>>> {
    match v {
        Some(v) if v.is_empty() => Err(CliError::Config(format!("grid list `{name}` is empty"))),
        v => Ok(v),
    }
}

impl Grid {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("invalid grid: {e}")))
    }

    /// Every grid point, in a fixed order independent of list order.
    pub fn points(&self, recipe: &KernelRecipe) -> Result<Vec<GridPoint>> {
        if *self == Grid::default() {
            return Err(CliError::Config("the grid declares no parameters".into()));
        }
        let ranges = match (&self.p_span, nonempty(self.p_ranges.clone(), "p_ranges")?) {
            (Some(_), Some(_)) => return Err(CliError::Config("give either p_span or p_ranges, not both".into())),
            (Some([a, b]), None) => {
                let span = PgramRange::new(*a, *b)?;
                Some(
                    span.iter()
                        .flat_map(|lo| (lo..=span.p_max()).map(move |hi| PgramRange::new(lo, hi)))
                        .collect::<strkern_core::Result<Vec<_>>>()?,
                )
            }
            (None, Some(list)) => Some(list.iter().map(|[a, b]| PgramRange::new(*a, *b)).collect::<strkern_core::Result<Vec<_>>>()?),
            (None, None) => None,
        };
        let sigmas = nonempty(self.sigmas.clone(), "sigmas")?;
        let lambdas = nonempty(self.lambdas.clone(), "lambdas")?;
        if let Some(s) = sigmas.iter().flatten().find(|s| !(**s > 0.0 && s.is_finite())) {
            return Err(CliError::Config(format!("grid sigma must be positive, got {s}")));
        }
        if let Some(l) = lambdas.iter().flatten().find(|l| !(**l > 0.0 && l.is_finite())) {
            return Err(CliError::Config(format!("grid lambda must be positive, got {l}")));
        }
        if ranges.is_some() && !recipe.components.iter().any(|c| c.kind.uses_range()) {
            return Err(CliError::Config("grid varies p-ranges but the recipe has no range-bearing component".into()));
        }
        if sigmas.is_some() && !recipe.components.iter().any(|c| c.kind.is_rbf()) {
            return Err(CliError::Config("grid varies sigma but the recipe has no RBF component".into()));
        }
        let mut ranges: Vec<Option<PgramRange>> = ranges.map_or(vec![None], |r| r.into_iter().map(Some).collect());
        let mut sigmas: Vec<Option<f64>> = sigmas.map_or(vec![None], |s| s.into_iter().map(Some).collect());
        let mut lambdas = lambdas.unwrap_or_else(|| vec![recipe.lambda]);
        ranges.sort_by_key(|r| r.map(|r| (r.p_min(), r.p_max())));
        ranges.dedup();
        sigmas.sort_by(|a, b| cmp_opt_f64(*a, *b));
        sigmas.dedup();
        lambdas.sort_by(f64::total_cmp);
        lambdas.dedup();
        let mut out = Vec::new();
        for range in &ranges {
            for sigma in &sigmas {
                for lambda in &lambdas {
                    out.push(GridPoint { range: *range, sigma: *sigma, lambda: *lambda });
                }
            }
        }
        Ok(out)
    }
}

fn cmp_opt_f64(a: Option<f64>, b: Option<f64>) -> Ordering {
    match (a, b) {
        (Some(a), Some(b)) => a.total_cmp(&b),
        (a, b) => a.is_some().cmp(&b.is_some()),
    }
}

impl GridPoint {
    pub fn apply(&self, recipe: &KernelRecipe) -> KernelRecipe {
        let mut r = recipe.clone();
        r.lambda = self.lambda;
        for c in &mut r.components {
            if let (Some(range), true) = (self.range, c.kind.uses_range()) {
                c.range = Some(range);
            }
            if let (Some(sigma), true) = (self.sigma, c.kind.is_rbf()) {
                c.sigma = Some(sigma);
            }
        }
        r
    }

    fn cmp_params(&self, other: &Self) -> Ordering {
        self.range
            .map(|r| (r.p_min(), r.p_max()))
            .cmp(&other.range.map(|r| (r.p_min(), r.p_max())))
            .then_with(|| cmp_opt_f64(self.sigma, other.sigma))
            .then_with(|| self.lambda.total_cmp(&other.lambda))
    }
}

/// Ranks by macro-F1, then accuracy (both descending), then parameters.
pub fn rank(rows: &mut [TuneRow]) {
    rows.sort_by(|a, b| {
        b.macro_f1.total_cmp(&a.macro_f1).then_with(|| b.accuracy.total_cmp(&a.accuracy)).then_with(|| a.point.cmp_params(&b.point))
    });
}

pub fn tune_table(rows: &[TuneRow]) -> String {
    let mut out = String::from("rank\tp_range\tsigma\tlambda\tmacro_f1\taccuracy\tweighted_f1\n");
    for (i, r) in rows.iter().enumerate() {
        let range = r.point.range.map_or_else(|| "-".to_string(), |r| r.to_string());
        let sigma = r.point.sigma.map_or_else(|| "-".to_string(), |s| s.to_string());
        out.push_str(&format!("{}\t{}\t{}\t{}\t{}\t{}\t{}\n", i + 1, range, sigma, r.point.lambda, r.macro_f1, r.accuracy, r.weighted_f1));
    }
    out
}

/// `tune`: trains on the training corpora and scores the development
/// corpus for every grid point, writing a ranked table.
pub fn cmd_tune(b: &Builder, manifest: &Manifest, recipe: &KernelRecipe, grid: &Grid, out: &Path) -> Result<Vec<TuneRow>> {
    let points = grid.points(recipe)?;
    manifest.check_train_channels(recipe)?;
    let dev_spec = manifest.dev()?;
    dev_spec.check_channels(recipe, "dev")?;
    let train = manifest.load_train()?;
    let dev = dev_spec.load("dev")?;
    let train_labels = labels_of(&train, "training")?;
    let dev_labels = labels_of(&dev, "dev")?;
    let joint = joint_samples(&train, &dev)?;

    // one basis per component, wide enough for every grid range
    let bases = recipe
        .components
        .iter()
        .map(|c| {
            let span = c.range.map(|own| {
                points.iter().filter_map(|p| p.range).fold(own, |acc, r| {
                    PgramRange::new(acc.p_min().min(r.p_min()), acc.p_max().max(r.p_max())).expect("hull of valid ranges")
                })
            });
            b.basis(&joint, c, span)
        })
        .collect::<Result<Vec<_>>>()?;
    let ids: Vec<String> = joint.iter().map(|s| s.id.clone()).collect();

    let mut rows = Vec::with_capacity(points.len());
    for point in points {
        let r = point.apply(recipe);
        r.validate()?;
        let parts = r
            .components
            .iter()
            .zip(&bases)
            .map(|(c, basis)| {
                let values = basis.realize(&b.exec, c)?;
                Ok(KernelMatrix::new(values, ids.clone(), ids.clone(), strkern_core::Provenance::single(c.clone(), true))?)
            })
            .collect::<Result<Vec<_>>>()?;
        let combined = sum_kernels(&parts)?;
        let (k_train, k_dev) = split_joint(&combined, train.len())?;
        let model: TrainedModel = learners::fit(&b.exec, r.learner, &k_train, &train_labels, r.lambda)?;
        let pred = learners::predict(&k_dev, &model)?;
        let classes = learners::class_order(&dev_labels.iter().chain(&pred.labels).collect::<Vec<_>>());
        let report = evaluate(&dev_labels, &pred.labels, &classes)?;
        rows.push(TuneRow { point, accuracy: report.accuracy, macro_f1: report.macro_f1, weighted_f1: report.weighted_f1 });
    }
    rank(&mut rows);
    write_atomic(&out.join(TUNE_FILE), tune_table(&rows).as_bytes())?;
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use strkern_core::{Component, LearnerKind, StringKernelKind};

    fn recipe() -> KernelRecipe {
        KernelRecipe {
            components: vec![
                Component::string(StringKernelKind::Presence, "t", PgramRange::new(3, 4).unwrap()),
                Component::embedding("e", 1.0),
            ],
            learner: LearnerKind::Krr,
            lambda: 1e-3,
        }
    }

    #[test]
    fn grid_expansion() {
        let g = Grid::parse("p_span = [2, 4]\nsigmas = [2.0, 0.5]\n").unwrap();
        let pts = g.points(&recipe()).unwrap();
        assert_eq!(pts.len(), 6 * 2);
        assert_eq!(pts[0].range, Some(PgramRange::new(2, 2).unwrap()));
        assert_eq!(pts[0].sigma, Some(0.5));
        assert_eq!(pts[0].lambda, 1e-3);
        let applied = pts[1].apply(&recipe());
        assert_eq!(applied.components[0].range, Some(PgramRange::new(2, 2).unwrap()));
        assert_eq!(applied.components[0].sigma, None);
        assert_eq!(applied.components[1].sigma, Some(2.0));
    }

    #[test]
    fn grid_order_is_independent_of_list_order() {
        let a = Grid::parse("p_ranges = [[3,5],[2,3]]\nlambdas = [1e-3, 1e-4]\n").unwrap();
        let b = Grid::parse("p_ranges = [[2,3],[3,5]]\nlambdas = [1e-4, 1e-3]\n").unwrap();
        assert_eq!(a.points(&recipe()).unwrap(), b.points(&recipe()).unwrap());
    }

    #[test]
    fn bad_grids_are_config_errors() {
        for g in [
            "",
            "lambdas = []\n",
            "p_ranges = []\n",
            "p_span=[2,3]\np_ranges=[[2,3]]\n",
            "sigmas=[-1.0]\n",
            "lambdas=[0.0]\n",
            "p_span=[0,3]\n",
            "x=1\n",
        ] {
            let r = Grid::parse(g).and_then(|g| g.points(&recipe()));
            assert!(matches!(r, Err(CliError::Config(_))), "{g:?}");
        }
    }

    #[test]
    fn ranking_ties_break_on_parameters() {
        let row = |lo, hi, acc, f1| TuneRow {
            point: GridPoint { range: Some(PgramRange::new(lo, hi).unwrap()), sigma: None, lambda: 1e-3 },
            accuracy: acc,
            macro_f1: f1,
            weighted_f1: f1,
        };
        let mut rows = vec![row(3, 6, 0.9, 0.8), row(2, 4, 0.9, 0.8), row(5, 5, 0.95, 0.8), row(4, 4, 0.1, 0.9)];
        rank(&mut rows);
        let order: Vec<String> = rows.iter().map(|r| r.point.range.unwrap().to_string()).collect();
        assert_eq!(order, ["4-4", "5-5", "2-4", "3-6"]);
        assert!(tune_table(&rows)
            .starts_with("rank\tp_range\tsigma\tlambda\tmacro_f1\taccuracy\tweighted_f1\n1\t4-4\t-\t0.001\t0.9\t0.1\t0.9\n"));
    }

    #[test]
    fn evaluate_pairs_checks_ids() {
        let p = |v: &[(&str, &str)]| v.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect::<Vec<_>>();
        let gold = p(&[("a", "x"), ("b", "y")]);
        let r = evaluate_pairs(&p(&[("b", "y"), ("a", "x")]), &gold).unwrap();
        assert_eq!(r.macro_f1, 1.0);
        assert!(matches!(evaluate_pairs(&p(&[("a", "x"), ("c", "y")]), &gold), Err(CliError::Data(_))));
        assert!(matches!(evaluate_pairs(&p(&[("a", "x")]), &gold), Err(CliError::Data(_))));
        assert!(matches!(evaluate_pairs(&p(&[("a", "x"), ("b", "y"), ("c", "y")]), &gold), Err(CliError::Data(_))));
        assert!(matches!(evaluate_pairs(&gold, &p(&[("a", "?"), ("b", "y")])), Err(CliError::Data(_))));
    }
}
