//! Constrained Bayesian logistic regression.

use std::path::PathBuf;
use std::sync::Arc;

use rayon::prelude::*;

use super::config::{DataSource, ExperimentConfig, ExperimentKind};
use super::plot::{line_chart, Series};
use super::{csv_writer, finish, output_dir, sampler_pair, write_text, ACCURACY_HEADER};
use crate::data::{
    generate_logreg, load_telescope, preprocess_titanic, standardize, train_test_split, Dataset,
};
use crate::error::{check_dim, Error, Result};
use crate::geometry::ConvexBody;
use crate::metrics::{accuracy, mean_std};
use crate::samplers::{run_chains, ChainTrace};
use crate::targets::Potential;

/// Accuracy trajectory of one algorithm on one split.
#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyCurve {
    pub algorithm: &'static str,
    pub split: &'static str,
    /// Chain-averaged accuracy per recorded iteration, one row per seed.
    pub per_seed: Vec<Vec<f64>>,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct LogregReport {
    pub train: Arc<Dataset>,
    pub test: Arc<Dataset>,
    /// Coefficients that generated synthetic data.
    pub beta_true: Option<Vec<f64>>,
    /// Minimiser of the training potential over the body.
    pub oracle_beta: Vec<f64>,
    pub oracle_train_accuracy: f64,
    pub oracle_test_accuracy: f64,
    pub recorded_iterations: Vec<usize>,
    pub curves: Vec<AccuracyCurve>,
    /// `(seed, algorithm, boundary events, fallbacks)`.
    pub diagnostics: Vec<(u64, &'static str, u64, u64)>,
    pub files: Vec<PathBuf>,
}

impl LogregReport {
    pub fn curve(&self, algorithm: &str, split: &str) -> Option<&AccuracyCurve> {
        self.curves
            .iter()
            .find(|c| c.algorithm == algorithm && c.split == split)
    }

    /// Per-seed first recorded iteration with accuracy ≥ `target`, averaged
    /// over seeds; `None` if some seed never gets there.
    pub fn mean_hitting_iteration(&self, algorithm: &str, split: &str, target: f64) -> Option<f64> {
        let curve = self.curve(algorithm, split)?;
        let hits: Option<Vec<usize>> = curve
            .per_seed
            .iter()
            .map(|acc| {
                acc.iter()
                    .position(|a| *a >= target)
                    .map(|i| self.recorded_iterations[i])
            })
            .collect();
        let hits = hits?;
        Some(hits.iter().sum::<usize>() as f64 / hits.len() as f64)
    }
}

/// Projected gradient descent on `potential` over `body` with step `1/L`,
/// started at the origin.
pub fn constrained_optimum(
    potential: &Potential,
    body: &ConvexBody,
    tol: f64,
    max_iter: usize,
) -> Result<Vec<f64>> {
    let d = body.dim();
    check_dim(d, potential.dim())?;
    let step = 1.0 / potential.lipschitz().max(f64::MIN_POSITIVE);
    let mut x = vec![0.0; d];
    let mut g = vec![0.0; d];
    let mut y = vec![0.0; d];
    for _ in 0..max_iter {
        potential.gradient_into(&x, &mut g);
        for i in 0..d {
            y[i] = x[i] - step * g[i];
        }
        let next = body.project(&y)?;
        let moved = next
            .iter()
            .zip(&x)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        x = next;
        if moved < tol {
            break;
        }
    }
    Ok(x)
}

fn load(cfg: &ExperimentConfig) -> Result<(Dataset, Option<Vec<f64>>)> {
    let d = &cfg.data;
    let path = || {
        d.path
            .as_deref()
            .ok_or_else(|| Error::Config("data.path is required".into()))
    };
    let (ds, beta) = match d.source {
        DataSource::Synthetic => {
            let (ds, beta) = generate_logreg(d.n, d.dim, d.beta_true.as_deref(), d.seed)?;
            (ds, Some(beta))
        }
        DataSource::Telescope => (load_telescope(path()?)?, None),
        DataSource::Titanic => (preprocess_titanic(path()?)?, None),
        DataSource::None => return Err(Error::Config("bayes_logreg needs a data source".into())),
    };
    let ds = if d.standardize {
        standardize(&ds)?.0
    } else {
        ds
    };
    Ok((ds, beta))
}

pub fn run_bayes_logreg(cfg: &ExperimentConfig) -> Result<LogregReport> {
    if cfg.experiment != ExperimentKind::BayesLogreg {
        return Err(Error::Config(format!(
            "expected a bayes_logreg config, got {}",
            cfg.experiment
        )));
    }
    let body = cfg.body.build()?;
    let (ds, beta_true) = load(cfg)?;
    check_dim(body.dim(), ds.dim())?;
    let (train, test) = train_test_split(&ds, cfg.data.test_fraction, cfg.data.seed)?;
    let (train, test) = (Arc::new(train), Arc::new(test));
    let potential = Potential::logistic_regression(train.clone())?;
    let oracle_beta = constrained_optimum(&potential, &body, 1e-12, 200_000)?;

    let jobs: Vec<_> = cfg
        .seeds
        .iter()
        .map(|&seed| sampler_pair(cfg, &body, &potential, seed))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let runs: Vec<(u64, &'static str, ChainTrace)> = jobs
        .par_iter()
        .map(|sc| Ok((sc.seed, sc.algorithm(), run_chains(sc)?)))
        .collect::<Result<_>>()?;

    let chain_mean_accuracy = |trace: &ChainTrace, ds: &Dataset| -> Result<Vec<f64>> {
        trace
            .states
            .iter()
            .map(|states| {
                let accs = states
                    .rows()
                    .map(|b| accuracy(b, ds))
                    .collect::<Result<Vec<_>>>()?;
                Ok(accs.iter().sum::<f64>() / accs.len() as f64)
            })
            .collect()
    };
    let algorithms: Vec<&'static str> = runs.iter().take(2).map(|r| r.1).collect();
    let mut curves = Vec::new();
    for &algorithm in &algorithms {
        for (split, ds) in [("train", &train), ("test", &test)] {
            let per_seed = runs
                .iter()
                .filter(|r| r.1 == algorithm)
                .map(|r| chain_mean_accuracy(&r.2, ds))
                .collect::<Result<Vec<_>>>()?;
            let len = per_seed[0].len();
            let (mean, std) = (0..len)
                .map(|i| mean_std(&per_seed.iter().map(|s| s[i]).collect::<Vec<_>>()))
                .unzip();
            curves.push(AccuracyCurve {
                algorithm,
                split,
                per_seed,
                mean,
                std,
            });
        }
    }
    Ok(LogregReport {
        oracle_train_accuracy: accuracy(&oracle_beta, &train)?,
        oracle_test_accuracy: accuracy(&oracle_beta, &test)?,
        train,
        test,
        beta_true,
        oracle_beta,
        recorded_iterations: runs[0].2.recorded_iterations.clone(),
        diagnostics: runs
            .iter()
            .map(|(s, a, t)| (*s, *a, t.boundary_events, t.fallback_count))
            .collect(),
        curves,
        files: Vec::new(),
    })
}

pub fn cmd_bayes_logreg(cfg: &ExperimentConfig) -> Result<LogregReport> {
    let mut report = run_bayes_logreg(cfg)?;
    let dir = output_dir(cfg)?;
    let mut files = Vec::new();
    let seeds = cfg.seeds.len().to_string();

    let (mut w, path) = csv_writer(dir, "accuracy_curve.csv", &ACCURACY_HEADER)?;
    for c in &report.curves {
        for (i, it) in report.recorded_iterations.iter().enumerate() {
            w.write_record([
                it.to_string(),
                c.algorithm.into(),
                c.split.into(),
                c.mean[i].to_string(),
                c.std[i].to_string(),
                seeds.clone(),
            ])?;
        }
    }
    finish(w, path, &mut files)?;

    let (mut w, path) = csv_writer(dir, "oracle.csv", &["split", "accuracy"])?;
    w.write_record([
        "train".to_string(),
        report.oracle_train_accuracy.to_string(),
    ])?;
    w.write_record(["test".to_string(), report.oracle_test_accuracy.to_string()])?;
    finish(w, path, &mut files)?;

    let (mut w, path) = csv_writer(
        dir,
        "diagnostics.csv",
        &["seed", "algorithm", "boundary_events", "fallbacks"],
    )?;
    for (seed, algorithm, contacts, fallbacks) in &report.diagnostics {
        w.write_record([
            seed.to_string(),
            algorithm.to_string(),
            contacts.to_string(),
            fallbacks.to_string(),
        ])?;
    }
    finish(w, path, &mut files)?;

    if cfg.plots {
        for split in ["train", "test"] {
            let series: Vec<Series<'_>> = report
                .curves
                .iter()
                .filter(|c| c.split == split)
                .map(|c| Series {
                    label: c.algorithm,
                    points: report
                        .recorded_iterations
                        .iter()
                        .zip(&c.mean)
                        .map(|(i, m)| (*i as f64, *m))
                        .collect(),
                })
                .collect();
            let svg = line_chart(
                &format!("Accuracy ({split}, seed mean)"),
                "iteration",
                "accuracy",
                &series,
            );
            files.push(write_text(dir, &format!("accuracy_{split}.svg"), &svg)?);
        }
    }
    report.files = files;
    Ok(report)
}
