//! Recipe-level properties through the library API.

use std::fs;

use strkern::cache::Builder;
use strkern::exec::PoolExecutor;
use strkern::formats::matrix::to_bytes;
use strkern::manifest::Manifest;
use strkern::pipeline::{cmd_evaluate, cmd_predict, cmd_train};
use strkern::recipe::{parse_recipe, RUN1_RECIPE};
use strkern::synth::{generate, SynthSpec};
use strkern_core::algebra::sum_kernels;
use strkern_core::KernelRecipe;

fn corpus(dir: &std::path::Path) -> Manifest {
    let spec = SynthSpec::parse(
        "classes = 3\ntrain_per_class = 10\ntest_per_class = 5\nseparation = 0.7\n\
         text_channels = [\"speech\", \"phonetic.cz\", \"phonetic.en\", \"phonetic.hu\", \"phonetic.ru\"]\n\
         embedding_channels = [\"audio\"]\nembedding_dim = 8\nembedding_separation = 3.0\n",
    )
    .unwrap();
    for (name, content) in generate(&spec, 42).unwrap().files {
        fs::write(dir.join(name), content).unwrap();
    }
    Manifest::read(&dir.join("manifest.toml")).unwrap()
}

#[test]
fn run1_recipe_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = corpus(dir.path());
    let recipe = parse_recipe(RUN1_RECIPE).unwrap();
    let b = Builder::new(PoolExecutor::new(4).unwrap(), None);
    let out = dir.path().join("out");
    let model = cmd_train(&b, &manifest, &recipe, &out).unwrap();
    assert_eq!(model.model.classes.len(), 3);
    let pred = cmd_predict(&b, &manifest, None, &out.join("model.gkmd"), &out, false).unwrap();
    assert_eq!(pred.ids.len(), 15);
    let report = cmd_evaluate(&out.join("predictions.tsv"), &dir.path().join("test.speech.tsv"), &out).unwrap();
    assert!(report.macro_f1 >= 0.9, "{report:?}");
}

#[test]
fn recipe_components_compose_by_summation() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = corpus(dir.path());
    let samples = manifest.load_train().unwrap();
    let all = parse_recipe(RUN1_RECIPE).unwrap();
    let b = Builder::new(PoolExecutor::new(2).unwrap(), None);
    let (_, whole) = b.combined(&samples, &all).unwrap();
    let (left, right) = all.components.split_at(5);
    let sub = |components: &[strkern_core::Component]| KernelRecipe { components: components.to_vec(), ..all.clone() };
    let (_, a) = b.combined(&samples, &sub(left)).unwrap();
    let (_, c) = b.combined(&samples, &sub(right)).unwrap();
    let summed = sum_kernels(&[a, c]).unwrap();
    let max_diff = whole.values.as_slice().iter().zip(summed.values.as_slice()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    assert!(max_diff <= 1e-12, "{max_diff}");
    assert_eq!(summed.provenance.components, whole.provenance.components);

    // a single-component recipe reproduces its own component bit for bit
    let (parts, _) = b.combined(&samples, &all).unwrap();
    let (_, alone) = b.combined(&samples, &sub(&all.components[3..4])).unwrap();
    assert_eq!(to_bytes(&alone), to_bytes(&parts[3]));
}
