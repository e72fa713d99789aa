//! Acceptance suite. Every criterion prints one `PASS` / `FAIL` line to
//! stderr (uncaptured, so the lines show up in normal `cargo test` output)
//! and then asserts at its stated tolerance.
//!
//! The real-data part of criterion 7 needs the Telescope and Titanic files,
//! passed through `SKEWFLECT_TELESCOPE_CSV` and `SKEWFLECT_TITANIC_CSV`.

use std::io::Write;
use std::path::PathBuf;
use std::sync::{Arc, OnceLock};
use std::time::{Duration, Instant};

use skewflect::data::{generate_linreg, generate_logreg};
use skewflect::experiments::*;
use skewflect::geometry::BOUNDARY_TOL;
use skewflect::samplers::{run_chains, ChainTrace, Initial, Reflection, SamplerConfig};
use skewflect::{ConvexBody, Potential, SkewField};

fn report(criterion: u32, name: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(
        std::io::stderr(),
        "[acceptance] criterion {criterion} ({name}): {verdict} | {detail}"
    );
}

fn note(criterion: u32, name: &str, status: &str, detail: &str) {
    let _ = writeln!(
        std::io::stderr(),
        "[acceptance] criterion {criterion} ({name}): {status} | {detail}"
    );
}

fn defaults(kind: ExperimentKind, variant: Option<&str>) -> ExperimentConfig {
    ExperimentConfig::defaults(kind, variant).unwrap()
}

struct ToyRun {
    report: ToyReport,
    elapsed: Duration,
}

fn toy(variant: &'static str) -> &'static ToyRun {
    static BALL: OnceLock<ToyRun> = OnceLock::new();
    static CUBE: OnceLock<ToyRun> = OnceLock::new();
    let cell = if variant == "ball" { &BALL } else { &CUBE };
    cell.get_or_init(|| {
        let cfg = defaults(ExperimentKind::ToyGaussian, Some(variant));
        let start = Instant::now();
        let report = run_toy_gaussian(&cfg).unwrap();
        ToyRun {
            report,
            elapsed: start.elapsed(),
        }
    })
}

fn fmt(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.4}")).collect();
    format!("[{}]", parts.join(", "))
}

fn abs_diff(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).collect()
}

#[test]
fn criterion_1_gibbs_invariance() {
    let run = toy("ball");
    let seed_run = &run.report.seeds[0];
    let reference = &seed_run.reference.samples;
    let (ref_mean, ref_var) = (reference.column_means(), reference.column_variances());
    let mut pass = run.elapsed < Duration::from_secs(120);
    let mut details = vec![format!("3 seeds in {:.1}s", run.elapsed.as_secs_f64())];
    for r in &seed_run.runs {
        let pooled = r.pooled();
        let dm = abs_diff(&pooled.column_means(), &ref_mean);
        let dv = abs_diff(&pooled.column_variances(), &ref_var);
        let w1 = &r.final_w1().per_dimension;
        let ok = dm.iter().all(|d| *d <= 0.02)
            && dv.iter().all(|d| *d <= 0.05)
            && w1.iter().all(|w| *w <= 0.05);
        pass &= ok;
        // Final-iterate moments, for context on burn-in effects.
        let fm = abs_diff(&r.trace.final_states.column_means(), &ref_mean);
        details.push(format!(
            "{}: pooled |Δmean| {} |Δvar| {} final W1 {} final-state |Δmean| {}",
            r.algorithm,
            fmt(&dm),
            fmt(&dv),
            fmt(w1),
            fmt(&fm)
        ));
    }
    report(1, "Gibbs invariance", pass, &details.join("; "));
    assert!(pass, "{}", details.join("\n"));
}

#[test]
fn criterion_2_non_reversible_speedup() {
    let mut pass = true;
    let mut details = Vec::new();
    for variant in ["ball", "box"] {
        let run = toy(variant);
        let mut wins = 0;
        let mut taus = Vec::new();
        for dim in 0..3 {
            let s = run.report.mean_first_passage("SRNLMC", dim, 1.1).unwrap();
            let p = run.report.mean_first_passage("PLMC", dim, 1.1).unwrap();
            wins += (s <= p) as usize;
            taus.push(format!("d{dim}: {s:.0} vs {p:.0}"));
        }
        pass &= wins >= 2;
        details.push(format!(
            "{variant}: SRNLMC ≤ PLMC in {wins}/3 dims ({})",
            taus.join(", ")
        ));
    }
    report(2, "non-reversible speedup", pass, &details.join("; "));
    assert!(pass, "{}", details.join("\n"));
}

fn degenerate_pair(cfg: SamplerConfig) -> (ChainTrace, ChainTrace) {
    let skew = SamplerConfig {
        field: SkewField::zero(cfg.body.dim()),
        reflection: Reflection::Skew,
        ..cfg.clone()
    };
    let euclid = SamplerConfig {
        field: SkewField::zero(cfg.body.dim()),
        reflection: Reflection::Euclidean,
        ..cfg
    };
    (run_chains(&skew).unwrap(), run_chains(&euclid).unwrap())
}

fn same_path(a: &ChainTrace, b: &ChainTrace) -> bool {
    a.states == b.states
        && a.final_states == b.final_states
        && a.correction_by_step == b.correction_by_step
        && a.boundary_events == b.boundary_events
        && a.fallback_count == b.fallback_count
}

#[test]
fn criterion_3_zero_field_degeneration() {
    let base = |body: ConvexBody, potential: Potential, batch: Option<usize>, stepsize: f64| {
        SamplerConfig {
            field: SkewField::zero(body.dim()),
            body,
            potential,
            stepsize,
            iterations: 10_000,
            chains: 8,
            initial: Initial::UniformPrior,
            batch_size: batch,
            seed: 2024,
            record_every: 1,
            reflection: Reflection::Skew,
        }
    };
    let linreg = Arc::new(generate_linreg(10_000, 0.25, 0).unwrap());
    let logreg = |d: usize| Arc::new(generate_logreg(2000, d, None, 0).unwrap().0);
    let cases = vec![
        (
            "ball d=3, full gradient",
            base(
                ConvexBody::centered_ball(3, 1.0).unwrap(),
                Potential::GaussianStandard(3),
                None,
                1e-4,
            ),
        ),
        (
            "ball d=3, full gradient, η=0.02",
            base(
                ConvexBody::centered_ball(3, 1.0).unwrap(),
                Potential::GaussianStandard(3),
                None,
                0.02,
            ),
        ),
        (
            "box d=3, full gradient",
            base(
                ConvexBody::cube(3, 1.0).unwrap(),
                Potential::GaussianStandard(3),
                None,
                1e-4,
            ),
        ),
        (
            "box d=3, full gradient, η=0.02",
            base(
                ConvexBody::cube(3, 1.0).unwrap(),
                Potential::GaussianStandard(3),
                None,
                0.02,
            ),
        ),
        (
            "disk, linear regression b=50",
            base(
                ConvexBody::centered_ball(2, 1.0).unwrap(),
                Potential::linear_regression(linreg).unwrap(),
                Some(50),
                1e-4,
            ),
        ),
        (
            "ball d=3, logistic b=50",
            base(
                ConvexBody::centered_ball(3, 1.0).unwrap(),
                Potential::logistic_regression(logreg(3)).unwrap(),
                Some(50),
                1e-4,
            ),
        ),
        (
            "ball d=8, logistic b=50",
            base(
                ConvexBody::centered_ball(8, 1.0).unwrap(),
                Potential::logistic_regression(logreg(8)).unwrap(),
                Some(50),
                1e-4,
            ),
        ),
        (
            "ball d=10, logistic b=100",
            base(
                ConvexBody::centered_ball(10, 1.0).unwrap(),
                Potential::logistic_regression(logreg(10)).unwrap(),
                Some(100),
                1e-4,
            ),
        ),
    ];
    let mut pass = true;
    let mut details = Vec::new();
    for (name, cfg) in cases {
        let (a, b) = degenerate_pair(cfg);
        let same = same_path(&a, &b);
        pass &= same;
        details.push(format!(
            "{name} [{} vs {}, {} contacts]: {}",
            a.algorithm,
            b.algorithm,
            a.boundary_events,
            if same { "identical" } else { "DIFFER" }
        ));
    }
    report(3, "zero-field degeneration", pass, &details.join("; "));
    assert!(pass, "{}", details.join("\n"));
}

#[test]
fn criterion_4_resolvent_spectrum() {
    let s = eigen_sweep(1000, 2, 10, 1).unwrap();
    let pass = s.violations == 0
        && s.min_eigenvalue > 0.0
        && s.max_eigenvalue <= 1.0 + 1e-10
        && s.max_match_error <= 1e-8;
    report(
        4,
        "resolvent spectrum",
        pass,
        &format!(
            "{} matrices, {} violations, eigenvalues in [{:.3e}, {:.15}], worst 1/(1+σ²) match {:.2e}",
            s.matrices, s.violations, s.min_eigenvalue, s.max_eigenvalue, s.max_match_error
        ),
    );
    assert!(pass, "{s:?}");
}

#[test]
fn criterion_5_quadratic_contraction() {
    let cfg = defaults(ExperimentKind::TheoryCheck, None);
    let start = Instant::now();
    let r = run_theory_check(&cfg).unwrap();
    let elapsed = start.elapsed();
    let mut pass = elapsed < Duration::from_secs(30);
    let mut details = vec![format!("{:.2}s", elapsed.as_secs_f64())];
    for row in &r.rows {
        let ok = row.fitted_rate >= 0.9 * row.predicted_rate
            && row.r2 >= 0.99
            && row.run.boundary_events == 0;
        pass &= ok;
        details.push(format!(
            "{}: C={:.4} predicted {:.4} fitted {:.4} r²={:.5} contacts {}",
            row.label, row.c, row.predicted_rate, row.fitted_rate, row.r2, row.run.boundary_events
        ));
    }
    report(5, "quadratic contraction", pass, &details.join("; "));
    assert!(pass, "{}", details.join("\n"));
}

#[test]
fn criterion_6_linear_regression() {
    let cfg = defaults(ExperimentKind::BayesLinreg, None);
    let r = run_bayes_linreg(&cfg).unwrap();
    let from = cfg.sampler.iterations - 100;
    let srn: Vec<f64> = r
        .runs_of("SRNSGLD")
        .map(|run| run.mean_mse_from(from))
        .collect();
    let psg: Vec<f64> = r
        .runs_of("PSGLD")
        .map(|run| run.mean_mse_from(from))
        .collect();
    let srn_tail = srn.iter().sum::<f64>() / srn.len() as f64;
    let psg_tail = psg.iter().sum::<f64>() / psg.len() as f64;
    let (s_curve, p_curve) = (r.mean_curve("SRNSGLD"), r.mean_curve("PSGLD"));
    let wins = s_curve.iter().zip(&p_curve).filter(|(s, p)| s <= p).count();
    let in_band = (0.40..=0.50).contains(&srn_tail);
    let majority = 2 * wins > s_curve.len();
    let pass = in_band && majority;
    let fallbacks: u64 = r
        .runs_of("SRNSGLD")
        .map(|run| run.trace.fallback_count)
        .sum();
    let contacts: u64 = r
        .runs_of("SRNSGLD")
        .map(|run| run.trace.boundary_events)
        .sum();
    let detail = format!(
        "final-100 mean MSE SRNSGLD {:.4} (per seed {}) PSGLD {:.4}; SRNSGLD ≤ PSGLD at {wins}/{} checkpoints; \
         SRNSGLD skew-ray fallbacks {fallbacks}/{contacts} boundary events",
        srn_tail,
        fmt(&srn),
        psg_tail,
        s_curve.len()
    );
    report(6, "linear regression MSE", pass, &detail);
    assert!(pass, "{detail}");
}

fn real_data(var: &str) -> Option<PathBuf> {
    std::env::var_os(var)
        .map(PathBuf::from)
        .filter(|p| p.is_file())
}

#[test]
fn criterion_7_logistic_regression() {
    let cfg = defaults(ExperimentKind::BayesLogreg, None);
    let r = run_bayes_logreg(&cfg).unwrap();
    let oracle = r.oracle_train_accuracy;
    let mut pass = true;
    let mut details = vec![format!(
        "synthetic oracle train {:.4} test {:.4}",
        oracle, r.oracle_test_accuracy
    )];
    for alg in ["SRNSGLD", "PSGLD"] {
        let last = *r.curve(alg, "train").unwrap().mean.last().unwrap();
        let ok = (last - oracle).abs() <= 0.03;
        pass &= ok;
        details.push(format!("{alg} final train {last:.4}"));
    }
    let target = oracle - 0.03;
    let s = r.mean_hitting_iteration("SRNSGLD", "train", target);
    let p = r.mean_hitting_iteration("PSGLD", "train", target);
    let faster = match (s, p) {
        (Some(s), Some(p)) => s <= p,
        (Some(_), None) => true,
        _ => false,
    };
    pass &= faster;
    details.push(format!(
        "iterations to reach {target:.4}: SRNSGLD {s:?} PSGLD {p:?}"
    ));

    for (var, source) in [
        ("SKEWFLECT_TELESCOPE_CSV", "telescope"),
        ("SKEWFLECT_TITANIC_CSV", "titanic"),
    ] {
        let Some(path) = real_data(var) else {
            note(
                7,
                &format!("logistic regression, {source}"),
                "NOT RUN",
                &format!("set {var} to the dataset file to verify"),
            );
            continue;
        };
        let dir = tempfile::tempdir().unwrap();
        let text = format!(
            "output_dir = {:?}\n[data]\nsource = {source:?}\npath = {:?}\n",
            dir.path(),
            path
        );
        let cfg =
            ExperimentConfig::from_toml_str(&text, Some(ExperimentKind::BayesLogreg)).unwrap();
        let start = Instant::now();
        let r = run_bayes_logreg(&cfg).unwrap();
        let elapsed = start.elapsed();
        let mut ok = elapsed < Duration::from_secs(300);
        let mut parts = vec![format!(
            "oracle test {:.4}, {:.1}s",
            r.oracle_test_accuracy,
            elapsed.as_secs_f64()
        )];
        for alg in ["SRNSGLD", "PSGLD"] {
            let last = *r.curve(alg, "test").unwrap().mean.last().unwrap();
            ok &= (last - r.oracle_test_accuracy).abs() <= 0.04;
            parts.push(format!("{alg} final test {last:.4}"));
        }
        report(
            7,
            &format!("logistic regression, {source}"),
            ok,
            &parts.join("; "),
        );
        pass &= ok;
        details.extend(parts);
    }
    report(
        7,
        "logistic regression, synthetic",
        pass,
        &details.join("; "),
    );
    assert!(pass, "{}", details.join("\n"));
}

#[test]
fn criterion_8_local_time_diagnostic() {
    let run = toy("ball");
    let srn = run.report.run(0, "SRNLMC").unwrap();
    let (first, second) = srn.correction_rates();
    let rel = (second - first).abs() / first;
    let fallback_rate = srn.trace.fallback_count as f64 / srn.trace.boundary_events.max(1) as f64;
    let body = ConvexBody::centered_ball(3, 1.0).unwrap();
    let inside = srn
        .trace
        .states
        .iter()
        .all(|s| s.rows().all(|x| body.distance(x).unwrap() <= BOUNDARY_TOL));
    let monotone = srn
        .trace
        .cumulative_correction
        .windows(2)
        .all(|w| w[1] >= w[0]);
    let pass = rel < 0.5 && fallback_rate < 0.01 && inside && monotone;
    let detail = format!(
        "correction per chain per unit time {first:.4} on [0,T/2] vs {second:.4} on [T/2,T] (relative change {rel:.3}); \
         fallbacks {}/{} boundary events ({:.4}%)",
        srn.trace.fallback_count,
        srn.trace.boundary_events,
        100.0 * fallback_rate
    );
    report(8, "local-time diagnostic", pass, &detail);
    assert!(pass, "{detail}");
}

#[test]
fn criterion_9_out_of_reach_claims() {
    note(
        9,
        "out-of-reach claims",
        "DOCUMENTED",
        "the exponential TV/W1 constants and the complexity exponents are not estimated; \
         they are covered indirectly by criteria 1, 2 and 5",
    );
}
