//! Truncated standard Gaussian on a ball or box.

use std::path::PathBuf;

use rayon::prelude::*;

use super::config::{ExperimentConfig, ExperimentKind};
use super::plot::{line_chart, Series};
use super::{csv_writer, finish, output_dir, sampler_pair, write_text, W1_HEADER};
use crate::error::{Error, Result};
use crate::metrics::{first_passage, w1_per_dim, W1Report};
use crate::samplers::{
    rejection_sample_truncated_gaussian, run_chains, ChainTrace, RejectionSample, SampleMatrix,
};
use crate::targets::Potential;

/// Fraction of iterations discarded before pooling states for moments.
pub const BURN_IN_FRACTION: f64 = 0.2;

#[derive(Debug, Clone)]
pub struct ToyRun {
    pub algorithm: &'static str,
    pub trace: ChainTrace,
    /// Distance to the reference at each recorded iteration.
    pub w1: Vec<W1Report>,
}

impl ToyRun {
    /// `(iteration, w1)` for one coordinate, starting after the first step.
    pub fn w1_curve(&self, dim: usize) -> Vec<(usize, f64)> {
        self.trace
            .recorded_iterations
            .iter()
            .zip(&self.w1)
            .filter(|(it, _)| **it > 0)
            .map(|(it, w)| (*it, w.per_dimension[dim]))
            .collect()
    }

    /// First recorded iteration at which the curve drops below `factor` times
    /// its final value.
    pub fn first_passage(&self, dim: usize, factor: f64) -> Option<usize> {
        let curve = self.w1_curve(dim);
        let values: Vec<f64> = curve.iter().map(|(_, w)| *w).collect();
        first_passage(&values, factor).map(|i| curve[i].0)
    }

    pub fn final_w1(&self) -> &W1Report {
        self.w1.last().expect("at least one record")
    }

    /// States pooled across chains after the burn-in.
    pub fn pooled(&self) -> SampleMatrix {
        let iterations = *self.trace.recorded_iterations.last().unwrap_or(&0);
        let burn = (BURN_IN_FRACTION * iterations as f64).ceil() as usize;
        self.trace.pooled_from(burn)
    }

    /// Correction per chain per unit time on the first and second halves.
    pub fn correction_rates(&self) -> (f64, f64) {
        let k = self.trace.correction_by_step.len();
        if k < 2 {
            return (0.0, 0.0);
        }
        (
            self.trace.correction_rate(0, k / 2),
            self.trace.correction_rate(k / 2, k),
        )
    }
}

#[derive(Debug, Clone)]
pub struct ToySeedRun {
    pub seed: u64,
    pub reference: RejectionSample,
    /// The skew sampler first, then its reversible baseline.
    pub runs: Vec<ToyRun>,
}

#[derive(Debug, Clone)]
pub struct ToyReport {
    pub seeds: Vec<ToySeedRun>,
    pub files: Vec<PathBuf>,
}

impl ToyReport {
    pub fn run(&self, seed_index: usize, algorithm: &str) -> Option<&ToyRun> {
        self.seeds
            .get(seed_index)?
            .runs
            .iter()
            .find(|r| r.algorithm == algorithm)
    }

    /// First-passage iteration averaged over seeds.
    pub fn mean_first_passage(&self, algorithm: &str, dim: usize, factor: f64) -> Option<f64> {
        let taus: Option<Vec<usize>> = self
            .seeds
            .iter()
            .map(|s| {
                s.runs
                    .iter()
                    .find(|r| r.algorithm == algorithm)?
                    .first_passage(dim, factor)
            })
            .collect();
        let taus = taus?;
        Some(taus.iter().sum::<usize>() as f64 / taus.len() as f64)
    }
}

pub fn run_toy_gaussian(cfg: &ExperimentConfig) -> Result<ToyReport> {
    if cfg.experiment != ExperimentKind::ToyGaussian {
        return Err(Error::Config(format!(
            "expected a toy_gaussian config, got {}",
            cfg.experiment
        )));
    }
    let body = cfg.body.build()?;
    let potential = Potential::GaussianStandard(body.dim());
    let seeds = cfg
        .seeds
        .par_iter()
        .map(|&seed| {
            let reference = rejection_sample_truncated_gaussian(&body, cfg.reference_size, seed)?;
            let runs = sampler_pair(cfg, &body, &potential, seed)?
                .par_iter()
                .map(|sc| {
                    let trace = run_chains(sc)?;
                    let w1 = trace
                        .states
                        .iter()
                        .map(|s| w1_per_dim(s, &reference.samples))
                        .collect::<Result<_>>()?;
                    Ok(ToyRun {
                        algorithm: sc.algorithm(),
                        trace,
                        w1,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(ToySeedRun {
                seed,
                reference,
                runs,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ToyReport {
        seeds,
        files: Vec::new(),
    })
}

pub fn cmd_toy_gaussian(cfg: &ExperimentConfig) -> Result<ToyReport> {
    let mut report = run_toy_gaussian(cfg)?;
    let dir = output_dir(cfg)?;
    let d = cfg.body.dim();
    let mut files = Vec::new();

    let (mut w, path) = csv_writer(dir, "w1_curve.csv", &W1_HEADER)?;
    for s in &report.seeds {
        for run in &s.runs {
            for dim in 0..d {
                for (it, w1) in run.w1_curve(dim) {
                    w.write_record([
                        it.to_string(),
                        run.algorithm.into(),
                        dim.to_string(),
                        w1.to_string(),
                        s.seed.to_string(),
                    ])?;
                }
            }
        }
    }
    finish(w, path, &mut files)?;

    let mut header = vec!["seed".to_string(), "algorithm".into(), "chain".into()];
    header.extend((0..d).map(|j| format!("x{j}")));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let (mut w, path) = csv_writer(dir, "final_states.csv", &header)?;
    for s in &report.seeds {
        for run in &s.runs {
            for (c, row) in run.trace.final_states.rows().enumerate() {
                let mut rec = vec![s.seed.to_string(), run.algorithm.into(), c.to_string()];
                rec.extend(row.iter().map(f64::to_string));
                w.write_record(&rec)?;
            }
        }
    }
    finish(w, path, &mut files)?;

    let (mut w, path) = csv_writer(
        dir,
        "moments.csv",
        &[
            "seed",
            "algorithm",
            "dim",
            "mean",
            "variance",
            "reference_mean",
            "reference_variance",
        ],
    )?;
    for s in &report.seeds {
        let ref_mean = s.reference.samples.column_means();
        let ref_var = s.reference.samples.column_variances();
        for run in &s.runs {
            let pooled = run.pooled();
            let (mean, var) = (pooled.column_means(), pooled.column_variances());
            for j in 0..d {
                w.write_record([
                    s.seed.to_string(),
                    run.algorithm.into(),
                    j.to_string(),
                    mean[j].to_string(),
                    var[j].to_string(),
                    ref_mean[j].to_string(),
                    ref_var[j].to_string(),
                ])?;
            }
        }
    }
    finish(w, path, &mut files)?;

    let (mut w, path) = csv_writer(
        dir,
        "diagnostics.csv",
        &[
            "seed",
            "algorithm",
            "boundary_events",
            "fallbacks",
            "correction_rate_first_half",
            "correction_rate_second_half",
        ],
    )?;
    for s in &report.seeds {
        for run in &s.runs {
            let (r1, r2) = run.correction_rates();
            w.write_record([
                s.seed.to_string(),
                run.algorithm.into(),
                run.trace.boundary_events.to_string(),
                run.trace.fallback_count.to_string(),
                r1.to_string(),
                r2.to_string(),
            ])?;
        }
    }
    finish(w, path, &mut files)?;

    if cfg.plots {
        if let Some(first) = report.seeds.first() {
            for dim in 0..d {
                let series: Vec<Series<'_>> = first
                    .runs
                    .iter()
                    .map(|r| Series {
                        label: r.algorithm,
                        points: r
                            .w1_curve(dim)
                            .into_iter()
                            .map(|(i, v)| (i as f64, v))
                            .collect(),
                    })
                    .collect();
                let svg = line_chart(
                    &format!("W1, dimension {dim}, seed {}", first.seed),
                    "iteration",
                    "W1",
                    &series,
                );
                files.push(write_text(dir, &format!("w1_dim{dim}.svg"), &svg)?);
            }
        }
    }
    report.files = files;
    Ok(report)
}
