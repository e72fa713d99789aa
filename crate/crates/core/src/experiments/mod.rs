//! Experiment drivers behind the `skewflect` CLI.
//!
//! Each experiment has a `run_*` function that computes an in-memory report
//! and a `cmd_*` function that also writes the report files into the
//! configured output directory. Output is byte-identical across reruns of the
//! same config.

pub mod config;
mod linreg;
mod logreg;
pub mod plot;
mod theory;
mod toy;

use std::fs::{self, File};
use std::path::{Path, PathBuf};

pub use config::{
    DataParams, DataSource, ExperimentConfig, ExperimentKind, SamplerParams, TheoryParams,
};
pub use linreg::{cmd_bayes_linreg, run_bayes_linreg, LinregReport, LinregRun};
pub use logreg::{
    cmd_bayes_logreg, constrained_optimum, run_bayes_logreg, AccuracyCurve, LogregReport,
};
pub use theory::{
    cmd_theory_check, eigen_sweep, run_theory_check, SweepSummary, TheoryReport, TheoryRow,
};
pub use toy::{
    cmd_toy_gaussian, run_toy_gaussian, ToyReport, ToyRun, ToySeedRun, BURN_IN_FRACTION,
};

use crate::error::{Error, Result};
use crate::geometry::ConvexBody;
use crate::samplers::{Initial, Reflection, SamplerConfig};
use crate::skew::SkewField;
use crate::targets::Potential;

/// Header of the toy experiment's Wasserstein curve file.
pub const W1_HEADER: [&str; 5] = ["iteration", "algorithm", "dim", "w1", "seed"];
pub const MSE_HEADER: [&str; 4] = ["iteration", "algorithm", "mse", "seed"];
pub const ACCURACY_HEADER: [&str; 6] = ["iteration", "algorithm", "split", "mean", "std", "seeds"];
pub const THEORY_HEADER: [&str; 4] = ["J", "predicted_rate", "fitted_rate", "r2"];

/// Runs any experiment and writes its files; returns the written paths.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    match cfg.experiment {
        ExperimentKind::ToyGaussian => cmd_toy_gaussian(cfg).map(|r| r.files),
        ExperimentKind::BayesLinreg => cmd_bayes_linreg(cfg).map(|r| r.files),
        ExperimentKind::BayesLogreg => cmd_bayes_logreg(cfg).map(|r| r.files),
        ExperimentKind::TheoryCheck => cmd_theory_check(cfg).map(|r| r.files),
    }
}

/// The skew-reflected sampler and its reversible baseline, sharing `seed`
/// and therefore every noise stream.
fn sampler_pair(
    cfg: &ExperimentConfig,
    body: &ConvexBody,
    potential: &Potential,
    seed: u64,
) -> Result<[SamplerConfig; 2]> {
    let d = body.dim();
    let initial = match &cfg.sampler.initial {
        Some(x0) => Initial::Point(x0.clone()),
        None => Initial::UniformPrior,
    };
    let base = SamplerConfig {
        body: body.clone(),
        field: cfg.skew.build(d)?,
        potential: potential.clone(),
        stepsize: cfg.sampler.stepsize,
        iterations: cfg.sampler.iterations,
        chains: cfg.sampler.chains,
        initial,
        batch_size: cfg.sampler.batch_size,
        seed,
        record_every: cfg.sampler.record_every,
        reflection: Reflection::Skew,
    };
    let baseline = SamplerConfig {
        field: SkewField::zero(d),
        reflection: Reflection::Euclidean,
        ..base.clone()
    };
    Ok([base, baseline])
}

fn output_dir(cfg: &ExperimentConfig) -> Result<&Path> {
    let dir = cfg.output_dir.as_path();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    Ok(dir)
}

fn csv_writer(dir: &Path, name: &str, header: &[&str]) -> Result<(csv::Writer<File>, PathBuf)> {
    let path = dir.join(name);
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(header)?;
    Ok((w, path))
}

fn write_text(dir: &Path, name: &str, text: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

fn finish(mut w: csv::Writer<File>, path: PathBuf, files: &mut Vec<PathBuf>) -> Result<()> {
    w.flush().map_err(|e| Error::io(&path, e))?;
    files.push(path);
    Ok(())
}
