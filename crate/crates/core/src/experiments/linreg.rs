//! Constrained Bayesian linear regression on synthetic data.

use std::path::PathBuf;
use std::sync::Arc;

use rayon::prelude::*;

use super::config::{ExperimentConfig, ExperimentKind};
use super::plot::{line_chart, Series};
use super::{csv_writer, finish, output_dir, sampler_pair, write_text, MSE_HEADER};
use crate::data::{generate_linreg, Dataset};
use crate::error::{check_dim, Error, Result};
use crate::metrics::mse_trace;
use crate::samplers::{run_chains, ChainTrace};
use crate::targets::Potential;

#[derive(Debug, Clone)]
pub struct LinregRun {
    pub seed: u64,
    pub algorithm: &'static str,
    pub trace: ChainTrace,
    /// Chain-averaged MSE at each recorded iteration.
    pub mse: Vec<f64>,
}

impl LinregRun {
    /// Mean MSE over the records from iteration `from` on.
    pub fn mean_mse_from(&self, from: usize) -> f64 {
        let tail: Vec<f64> = self
            .trace
            .recorded_iterations
            .iter()
            .zip(&self.mse)
            .filter(|(it, _)| **it >= from)
            .map(|(_, m)| *m)
            .collect();
        tail.iter().sum::<f64>() / tail.len() as f64
    }
}

#[derive(Debug, Clone)]
pub struct LinregReport {
    pub dataset: Arc<Dataset>,
    /// Seed-major, skew sampler before its baseline.
    pub runs: Vec<LinregRun>,
    pub files: Vec<PathBuf>,
}

impl LinregReport {
    pub fn runs_of<'a>(&'a self, algorithm: &'a str) -> impl Iterator<Item = &'a LinregRun> {
        self.runs.iter().filter(move |r| r.algorithm == algorithm)
    }

    pub fn recorded_iterations(&self) -> &[usize] {
        &self.runs[0].trace.recorded_iterations
    }

    /// Seed-averaged MSE curve of one algorithm.
    pub fn mean_curve(&self, algorithm: &str) -> Vec<f64> {
        let runs: Vec<_> = self.runs_of(algorithm).collect();
        (0..runs[0].mse.len())
            .map(|i| runs.iter().map(|r| r.mse[i]).sum::<f64>() / runs.len() as f64)
            .collect()
    }
}

pub fn run_bayes_linreg(cfg: &ExperimentConfig) -> Result<LinregReport> {
    if cfg.experiment != ExperimentKind::BayesLinreg {
        return Err(Error::Config(format!(
            "expected a bayes_linreg config, got {}",
            cfg.experiment
        )));
    }
    let body = cfg.body.build()?;
    let dataset = Arc::new(generate_linreg(
        cfg.data.n,
        cfg.data.noise_variance,
        cfg.data.seed,
    )?);
    check_dim(body.dim(), dataset.dim())?;
    let potential = Potential::linear_regression(dataset.clone())?;
    let jobs: Vec<_> = cfg
        .seeds
        .iter()
        .map(|&seed| sampler_pair(cfg, &body, &potential, seed))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let runs = jobs
        .par_iter()
        .map(|sc| {
            let trace = run_chains(sc)?;
            let mse = mse_trace(&trace, &dataset)?;
            Ok(LinregRun {
                seed: sc.seed,
                algorithm: sc.algorithm(),
                trace,
                mse,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LinregReport {
        dataset,
        runs,
        files: Vec::new(),
    })
}

pub fn cmd_bayes_linreg(cfg: &ExperimentConfig) -> Result<LinregReport> {
    let mut report = run_bayes_linreg(cfg)?;
    let dir = output_dir(cfg)?;
    let mut files = Vec::new();

    let (mut w, path) = csv_writer(dir, "mse_curve.csv", &MSE_HEADER)?;
    for run in &report.runs {
        for (it, m) in run.trace.recorded_iterations.iter().zip(&run.mse) {
            w.write_record([
                it.to_string(),
                run.algorithm.into(),
                m.to_string(),
                run.seed.to_string(),
            ])?;
        }
    }
    finish(w, path, &mut files)?;

    let d = report.dataset.dim();
    let mut header = vec!["seed".to_string(), "algorithm".into(), "chain".into()];
    header.extend((0..d).map(|j| format!("x{j}")));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let (mut w, path) = csv_writer(dir, "posterior.csv", &header)?;
    for run in &report.runs {
        for (c, row) in run.trace.final_states.rows().enumerate() {
            let mut rec = vec![run.seed.to_string(), run.algorithm.into(), c.to_string()];
            rec.extend(row.iter().map(f64::to_string));
            w.write_record(&rec)?;
        }
    }
    finish(w, path, &mut files)?;

    let (mut w, path) = csv_writer(
        dir,
        "diagnostics.csv",
        &["seed", "algorithm", "boundary_events", "fallbacks"],
    )?;
    for run in &report.runs {
        w.write_record([
            run.seed.to_string(),
            run.algorithm.into(),
            run.trace.boundary_events.to_string(),
            run.trace.fallback_count.to_string(),
        ])?;
    }
    finish(w, path, &mut files)?;

    if cfg.plots {
        let its = report.recorded_iterations().to_vec();
        let names: Vec<&'static str> = report.runs.iter().take(2).map(|r| r.algorithm).collect();
        let series: Vec<Series<'_>> = names
            .iter()
            .map(|name| Series {
                label: name,
                points: its
                    .iter()
                    .zip(report.mean_curve(name))
                    .map(|(i, m)| (*i as f64, m))
                    .collect(),
            })
            .collect();
        let svg = line_chart(
            "Mean squared error (seed mean)",
            "iteration",
            "MSE",
            &series,
        );
        files.push(write_text(dir, "mse.svg", &svg)?);
    }
    report.files = files;
    Ok(report)
}
