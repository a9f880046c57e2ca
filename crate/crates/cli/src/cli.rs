//! Command-line parsing and dispatch.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::cache::Builder;
use crate::error::{CliError, Result};
use crate::exec::PoolExecutor;
use crate::fsutil::read_to_string;
use crate::manifest::Manifest;
use crate::pipeline::{self, Grid};
use crate::synth;

#[derive(Debug, Parser)]
#[command(name = "strkern", version, about = "String-kernel text classification: kernels, training, tuning and evaluation")]
pub struct Cli {
    /// Recipe file (overrides the manifest's `recipe`).
    #[arg(long, global = true)]
    pub recipe: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Worker threads (defaults to the available parallelism).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Directory for cached basis matrices.
    #[arg(long, global = true)]
    pub cache: Option<PathBuf>,
    /// Random seed; only `synth` uses it.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write each component's joint train∪test kernel matrix and their sum.
    Kernel { manifest: PathBuf },
    /// Fit the recipe's learner and write the model.
    Train { manifest: PathBuf },
    /// Score the manifest's test corpus with a trained model.
    Predict {
        manifest: PathBuf,
        /// Model file (defaults to `<out>/model.gkmd`).
        #[arg(long)]
        model: Option<PathBuf>,
        /// Append per-class scores to each prediction line.
        #[arg(long)]
        scores: bool,
    },
    /// Compare predictions with gold labels.
    Evaluate {
        #[arg(long)]
        predictions: PathBuf,
        /// Gold labels: a predictions-style or corpus TSV.
        #[arg(long)]
        gold: PathBuf,
    },
    /// Evaluate a parameter grid on the development corpus.
    Tune {
        manifest: PathBuf,
        #[arg(long)]
        grid: PathBuf,
    },
    /// Generate a synthetic corpus.
    Synth {
        #[arg(long)]
        spec: PathBuf,
    },
}

fn builder(cli: &Cli) -> Result<Builder> {
    let threads = cli.threads.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    Ok(Builder::new(PoolExecutor::new(threads)?, cli.cache.clone()))
}

fn manifest_and_recipe(cli: &Cli, path: &Path) -> Result<(Manifest, strkern_core::KernelRecipe)> {
    let manifest = Manifest::read(path)?;
    let recipe = pipeline::load_recipe(cli.recipe.as_deref(), &manifest)?;
    Ok((manifest, recipe))
}

/// Runs the parsed command, returning a one-line summary.
pub fn run(cli: &Cli) -> Result<String> {
    if cli.seed.is_some() && !matches!(cli.command, Command::Synth { .. }) {
        return Err(CliError::Config("--seed only applies to `synth`".into()));
    }
    let out = &cli.out;
    match &cli.command {
        Command::Kernel { manifest } => {
            let (m, r) = manifest_and_recipe(cli, manifest)?;
            let written = pipeline::cmd_kernel(&builder(cli)?, &m, &r, out)?;
            Ok(format!("wrote {} kernel matrices to {}", written.len(), out.join(pipeline::KERNEL_DIR).display()))
        }
        Command::Train { manifest } => {
            let (m, r) = manifest_and_recipe(cli, manifest)?;
            let f = pipeline::cmd_train(&builder(cli)?, &m, &r, out)?;
            Ok(format!(
                "trained {} on {} samples, {} classes -> {}",
                f.model.kind,
                f.model.train_ids.len(),
                f.model.classes.len(),
                out.join(pipeline::MODEL_FILE).display()
            ))
        }
        Command::Predict { manifest, model, scores } => {
            let m = Manifest::read(manifest)?;
            let model = model.clone().unwrap_or_else(|| out.join(pipeline::MODEL_FILE));
            let p = pipeline::cmd_predict(&builder(cli)?, &m, cli.recipe.as_deref(), &model, out, *scores)?;
            Ok(format!("predicted {} samples -> {}", p.ids.len(), out.join(pipeline::PREDICTIONS_FILE).display()))
        }
        Command::Evaluate { predictions, gold } => {
            let r = pipeline::cmd_evaluate(predictions, gold, out)?;
            Ok(format!("accuracy {} macro_f1 {} -> {}", r.accuracy, r.macro_f1, out.join(pipeline::REPORT_FILE).display()))
        }
        Command::Tune { manifest, grid } => {
            let (m, r) = manifest_and_recipe(cli, manifest)?;
            let grid = Grid::parse(&read_to_string(grid)?)?;
            let rows = pipeline::cmd_tune(&builder(cli)?, &m, &r, &grid, out)?;
            Ok(format!("evaluated {} configurations -> {}", rows.len(), out.join(pipeline::TUNE_FILE).display()))
        }
        Command::Synth { spec } => {
            let written = synth::cmd_synth(spec, cli.seed.unwrap_or(0), out)?;
            Ok(format!("wrote {} files to {}", written.len(), out.display()))
        }
    }
}
