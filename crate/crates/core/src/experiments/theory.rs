//! Checks of the resolvent spectrum and the quadratic contraction rate.

use std::path::PathBuf;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::config::{ExperimentConfig, ExperimentKind, TheoryParams};
use super::plot::{line_chart, Series};
use super::{csv_writer, finish, output_dir, write_text, THEORY_HEADER};
use crate::error::{Error, Result};
use crate::metrics::fit_exp_rate;
use crate::rng::{stream, Purpose};
use crate::samplers::{coupled_pair_run, CoupledConfig, CoupledRun};
use crate::skew::{resolvent_symmetric_part, SkewField};

/// Outcome of the random-matrix sweep over `S = (I - J²)⁻¹`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSummary {
    pub matrices: usize,
    /// Matrices with an eigenvalue outside `(0, 1 + 1e-10]` or a singular
    /// value of `J` whose image `1/(1+σ²)` is not in the spectrum to `1e-8`.
    pub violations: usize,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    /// Worst distance from `1/(1+σ²)` to the nearest eigenvalue.
    pub max_match_error: f64,
}

/// Draws `count` random antisymmetric matrices with dimensions cycling
/// through `min_dim..=max_dim` and checks the spectrum of their resolvent
/// symmetric part.
pub fn eigen_sweep(
    count: usize,
    min_dim: usize,
    max_dim: usize,
    seed: u64,
) -> Result<SweepSummary> {
    let mut rng = stream(seed, 0, Purpose::Sweep);
    let mut summary = SweepSummary {
        matrices: count,
        violations: 0,
        min_eigenvalue: f64::INFINITY,
        max_eigenvalue: f64::NEG_INFINITY,
        max_match_error: 0.0,
    };
    let span = max_dim - min_dim + 1;
    for m in 0..count {
        let d = min_dim + m % span;
        // Entry scales from 0.1 to 10 exercise both near-identity and
        // strongly contracted spectra.
        let scale = 10f64.powf(rng.random_range(-1.0..1.0));
        let mut j = DMatrix::zeros(d, d);
        for r in 0..d {
            for c in r + 1..d {
                let v = scale * rng.random_range(-1.0..1.0);
                j[(r, c)] = v;
                j[(c, r)] = -v;
            }
        }
        let res = resolvent_symmetric_part(&j)?;
        let mut bad = res
            .eigenvalues
            .iter()
            .any(|e| !(*e > 0.0 && *e <= 1.0 + 1e-10));
        summary.min_eigenvalue = summary.min_eigenvalue.min(res.smallest());
        summary.max_eigenvalue = summary.max_eigenvalue.max(res.largest());
        for sigma in j.singular_values().iter().filter(|s| **s > 1e-8) {
            let want = 1.0 / (1.0 + sigma * sigma);
            let err = res
                .eigenvalues
                .iter()
                .map(|e| (e - want).abs())
                .fold(f64::INFINITY, f64::min);
            summary.max_match_error = summary.max_match_error.max(err);
            bad |= err > 1e-8;
        }
        summary.violations += bad as usize;
    }
    Ok(summary)
}

/// One coupled-pair contraction measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct TheoryRow {
    pub label: String,
    pub a: f64,
    /// Largest eigenvalue of `(I - J²)⁻¹`.
    pub c: f64,
    /// `2 λ_min(H) / C`.
    pub predicted_rate: f64,
    pub fitted_rate: f64,
    pub r2: f64,
    pub run: CoupledRun,
}

#[derive(Debug, Clone)]
pub struct TheoryReport {
    pub sweep: SweepSummary,
    pub rows: Vec<TheoryRow>,
    pub files: Vec<PathBuf>,
}

fn params(cfg: &ExperimentConfig) -> Result<&TheoryParams> {
    if cfg.experiment != ExperimentKind::TheoryCheck {
        return Err(Error::Config(format!(
            "expected a theory_check config, got {}",
            cfg.experiment
        )));
    }
    cfg.theory
        .as_ref()
        .ok_or_else(|| Error::Config("theory_check needs a [theory] table".into()))
}

/// Runs the sweep and one coupled pair per entry of `a_values`, using the
/// first configured seed.
pub fn run_theory_check(cfg: &ExperimentConfig) -> Result<TheoryReport> {
    let t = params(cfg)?;
    let seed = cfg.seeds[0];
    let sweep = eigen_sweep(t.sweep_matrices, t.sweep_min_dim, t.sweep_max_dim, seed)?;
    let body = cfg.body.build()?;
    let d = body.dim();
    let hessian = DMatrix::from_diagonal(&DVector::from_vec(t.hessian_diag.clone()));
    let lambda_min = hessian.clone().symmetric_eigen().eigenvalues.min();
    let rows = t
        .a_values
        .iter()
        .map(|&a| {
            let (field, label) = if a == 0.0 {
                (SkewField::zero(d), "zero".to_string())
            } else {
                (SkewField::tridiagonal(d, a)?, format!("J_{a}"))
            };
            let c = resolvent_symmetric_part(field.matrix_at(&t.x0))?.largest();
            let run = coupled_pair_run(&CoupledConfig {
                hessian: hessian.clone(),
                field,
                body: body.clone(),
                stepsize: cfg.sampler.stepsize,
                iterations: cfg.sampler.iterations,
                seed,
                x0: t.x0.clone(),
                x0_tilde: t.x0_tilde.clone(),
                record_every: cfg.sampler.record_every,
            })?;
            let fit = fit_exp_rate(&run.weighted, &run.times)?;
            Ok(TheoryRow {
                label,
                a,
                c,
                predicted_rate: 2.0 * lambda_min / c,
                fitted_rate: fit.rate,
                r2: fit.r2,
                run,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TheoryReport {
        sweep,
        rows,
        files: Vec::new(),
    })
}

pub fn cmd_theory_check(cfg: &ExperimentConfig) -> Result<TheoryReport> {
    let mut report = run_theory_check(cfg)?;
    let dir = output_dir(cfg)?;
    let mut files = Vec::new();

    let (mut w, path) = csv_writer(dir, "theory_check.csv", &THEORY_HEADER)?;
    for r in &report.rows {
        w.write_record([
            r.label.clone(),
            r.predicted_rate.to_string(),
            r.fitted_rate.to_string(),
            r.r2.to_string(),
        ])?;
    }
    finish(w, path, &mut files)?;

    let (mut w, path) = csv_writer(
        dir,
        "eigen_sweep.csv",
        &[
            "matrices",
            "violations",
            "min_eigenvalue",
            "max_eigenvalue",
            "max_match_error",
        ],
    )?;
    let s = &report.sweep;
    w.write_record([
        s.matrices.to_string(),
        s.violations.to_string(),
        s.min_eigenvalue.to_string(),
        s.max_eigenvalue.to_string(),
        s.max_match_error.to_string(),
    ])?;
    finish(w, path, &mut files)?;

    let (mut w, path) = csv_writer(
        dir,
        "coupled_norms.csv",
        &["J", "iteration", "time", "weighted_sq_norm"],
    )?;
    for r in &report.rows {
        for ((it, t), v) in r
            .run
            .iterations
            .iter()
            .zip(&r.run.times)
            .zip(&r.run.weighted)
        {
            w.write_record([
                r.label.clone(),
                it.to_string(),
                t.to_string(),
                v.to_string(),
            ])?;
        }
    }
    finish(w, path, &mut files)?;

    if cfg.plots {
        let series: Vec<Series<'_>> = report
            .rows
            .iter()
            .map(|r| Series {
                label: &r.label,
                points: r
                    .run
                    .times
                    .iter()
                    .zip(&r.run.weighted)
                    .map(|(t, v)| (*t, v.max(1e-300).ln()))
                    .collect(),
            })
            .collect();
        let svg = line_chart(
            "Coupled pair: log weighted squared distance",
            "time",
            "log w",
            &series,
        );
        files.push(write_text(dir, "coupled_norms.svg", &svg)?);
    }
    report.files = files;
    Ok(report)
}
