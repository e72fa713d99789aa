//! Evaluation metrics: empirical 1-Wasserstein distances, regression and
//! classification scores, and exponential-rate fits.

use crate::data::{Dataset, Task};
use crate::error::{check_dim, Error, Result};
use crate::samplers::{ChainTrace, SampleMatrix};

/// Per-dimension 1-Wasserstein distances between two samples.
#[derive(Debug, Clone, PartialEq)]
pub struct W1Report {
    pub per_dimension: Vec<f64>,
    pub sample_sizes: (usize, usize),
}

impl W1Report {
    pub fn max(&self) -> f64 {
        self.per_dimension.iter().copied().fold(0.0, f64::max)
    }
}

fn sorted(a: &[f64]) -> Vec<f64> {
    let mut v = a.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Empirical quantile `Q(u) = a_(⌈u·n⌉)` of a sorted sample.
fn quantile(sorted: &[f64], u: f64) -> f64 {
    let n = sorted.len();
    let idx = ((u * n as f64).ceil() as usize).clamp(1, n);
    sorted[idx - 1]
}

/// 1-Wasserstein distance between two empirical distributions on the line.
///
/// Equal sizes use the sorted pairing; otherwise both quantile functions are
/// evaluated on the midpoint grid `(i - ½)/m`, `m = max(|a|, |b|)`.
pub fn w1_1d(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidParameter("W1 needs nonempty samples".into()));
    }
    let (sa, sb) = (sorted(a), sorted(b));
    if sa.len() == sb.len() {
        let total: f64 = sa.iter().zip(&sb).map(|(x, y)| (x - y).abs()).sum();
        return Ok(total / sa.len() as f64);
    }
    let m = sa.len().max(sb.len());
    let total: f64 = (1..=m)
        .map(|i| {
            let u = (i as f64 - 0.5) / m as f64;
            (quantile(&sa, u) - quantile(&sb, u)).abs()
        })
        .sum();
    Ok(total / m as f64)
}

/// Column-wise [`w1_1d`].
pub fn w1_per_dim(a: &SampleMatrix, b: &SampleMatrix) -> Result<W1Report> {
    check_dim(a.dim(), b.dim())?;
    let per_dimension = (0..a.dim())
        .map(|j| w1_1d(&a.column(j), &b.column(j)))
        .collect::<Result<_>>()?;
    Ok(W1Report {
        per_dimension,
        sample_sizes: (a.len(), b.len()),
    })
}

/// Mean squared prediction error `(1/n) Σ (y_j - xᵀa_j)²`.
pub fn mse(x: &[f64], ds: &Dataset) -> Result<f64> {
    if ds.task() != Task::Regression {
        return Err(Error::InvalidParameter(
            "MSE needs a regression dataset".into(),
        ));
    }
    check_dim(ds.dim(), x.len())?;
    let total: f64 = ds
        .rows()
        .zip(ds.labels())
        .map(|(a, y)| {
            let r = y - dot(a, x);
            r * r
        })
        .sum();
    Ok(total / ds.len() as f64)
}

/// MSE at each recorded iterate, averaged over chains.
pub fn mse_trace(trace: &ChainTrace, ds: &Dataset) -> Result<Vec<f64>> {
    trace
        .states
        .iter()
        .map(|states| {
            let per_chain = states
                .rows()
                .map(|x| mse(x, ds))
                .collect::<Result<Vec<_>>>()?;
            Ok(per_chain.iter().sum::<f64>() / per_chain.len() as f64)
        })
        .collect()
}

/// Fraction of rows whose label matches `1{βᵀX ≥ 0}`.
pub fn accuracy(beta: &[f64], ds: &Dataset) -> Result<f64> {
    if ds.task() != Task::Classification {
        return Err(Error::InvalidParameter(
            "accuracy needs a classification dataset".into(),
        ));
    }
    check_dim(ds.dim(), beta.len())?;
    let correct = ds
        .rows()
        .zip(ds.labels())
        .filter(|(x, y)| {
            let pred = if dot(x, beta) >= 0.0 { 1.0 } else { 0.0 };
            pred == **y
        })
        .count();
    Ok(correct as f64 / ds.len() as f64)
}

/// Least-squares fit of `log v = c - rate · t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpFit {
    pub rate: f64,
    pub r2: f64,
}

pub fn fit_exp_rate(values: &[f64], times: &[f64]) -> Result<ExpFit> {
    check_dim(values.len(), times.len())?;
    if values.len() < 3 {
        return Err(Error::InvalidParameter(
            "exponential fit needs at least 3 points".into(),
        ));
    }
    if values.iter().any(|v| v.is_nan() || *v < 0.0) {
        return Err(Error::InvalidParameter(
            "exponential fit needs positive values".into(),
        ));
    }
    let y: Vec<f64> = values.iter().map(|v| v.max(1e-300).ln()).collect();
    let n = y.len() as f64;
    let tm = times.iter().sum::<f64>() / n;
    let ym = y.iter().sum::<f64>() / n;
    let (mut stt, mut sty, mut syy) = (0.0, 0.0, 0.0);
    for (t, v) in times.iter().zip(&y) {
        stt += (t - tm) * (t - tm);
        sty += (t - tm) * (v - ym);
        syy += (v - ym) * (v - ym);
    }
    if stt == 0.0 {
        return Err(Error::InvalidParameter(
            "exponential fit needs distinct times".into(),
        ));
    }
    let slope = sty / stt;
    // A constant series is fit exactly.
    let r2 = if syy == 0.0 {
        1.0
    } else {
        sty * sty / (stt * syy)
    };
    Ok(ExpFit { rate: -slope, r2 })
}

/// Mean and sample standard deviation (`n - 1` denominator; 0 for one value).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// First index whose value drops below `factor × last value`.
pub fn first_passage(curve: &[f64], factor: f64) -> Option<usize> {
    let target = curve.last()? * factor;
    curve.iter().position(|v| *v < target)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Purpose};
    use proptest::prelude::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn w1_examples() {
        assert_eq!(w1_1d(&[0.3, -1.0, 2.0], &[2.0, 0.3, -1.0]).unwrap(), 0.0);
        assert_eq!(w1_1d(&[0.0], &[1.0]).unwrap(), 1.0);
        assert_eq!(w1_1d(&[0.0, 1.0], &[0.0, 3.0]).unwrap(), 1.0);
        assert!(w1_1d(&[], &[1.0]).is_err());
    }

    #[test]
    fn w1_unequal_sizes() {
        // Point masses stay exact on the quantile grid.
        assert_eq!(w1_1d(&[0.0], &[1.0, 1.0, 1.0]).unwrap(), 1.0);
        // {0,1} vs {0,0,1,1}: identical laws.
        assert_eq!(w1_1d(&[0.0, 1.0], &[0.0, 0.0, 1.0, 1.0]).unwrap(), 0.0);
    }

    #[test]
    fn w1_per_dim_translation_and_uniforms() {
        let mut rng = stream(1, 0, Purpose::Reference);
        let a: Vec<f64> = (0..3 * 10_000).map(|_| rng.random::<f64>()).collect();
        let b: Vec<f64> = (0..3 * 10_000).map(|_| rng.random::<f64>()).collect();
        let a = SampleMatrix::new(3, a).unwrap();
        let b = SampleMatrix::new(3, b).unwrap();
        let same = w1_per_dim(&a, &a).unwrap();
        assert_eq!(same.per_dimension, vec![0.0; 3]);
        assert!(w1_per_dim(&a, &b)
            .unwrap()
            .per_dimension
            .iter()
            .all(|w| *w < 0.02));

        let shifted: Vec<f64> = a.rows().flat_map(|r| [r[0] + 0.7, r[1], r[2]]).collect();
        let shifted = SampleMatrix::new(3, shifted).unwrap();
        let rep = w1_per_dim(&a, &shifted).unwrap();
        assert!((rep.per_dimension[0] - 0.7).abs() < 1e-12);
        assert_eq!(&rep.per_dimension[1..], &[0.0, 0.0]);
        assert_eq!(rep.sample_sizes, (10_000, 10_000));

        let two = SampleMatrix::new(2, vec![0.0; 4]).unwrap();
        assert!(w1_per_dim(&a, &two).is_err());
    }

    fn regression(rows: &[[f64; 2]], y: &[f64]) -> Dataset {
        Dataset::new(
            rows.iter().flatten().copied().collect(),
            y.to_vec(),
            vec!["a".into(), "b".into()],
            Task::Regression,
        )
        .unwrap()
    }

    #[test]
    fn mse_examples() {
        let ds = regression(&[[1.0, 2.0], [0.5, -1.0], [3.0, 0.0]], &[3.0, -0.5, 3.0]);
        assert_eq!(mse(&[1.0, 1.0], &ds).unwrap(), 0.0);
        let null = (9.0 + 0.25 + 9.0) / 3.0;
        assert!((mse(&[0.0, 0.0], &ds).unwrap() - null).abs() < 1e-15);
        assert!(mse(&[0.0], &ds).is_err());
    }

    #[test]
    fn mse_at_projected_truth() {
        let ds = crate::data::generate_linreg(100_000, 0.25, 5).unwrap();
        let x = [std::f64::consts::FRAC_1_SQRT_2; 2];
        let want = 0.25 + (2f64.sqrt() - 1.0).powi(2);
        assert!((mse(&x, &ds).unwrap() - want).abs() < 0.01);
    }

    fn classification(rows: &[[f64; 2]], y: &[f64]) -> Dataset {
        Dataset::new(
            rows.iter().flatten().copied().collect(),
            y.to_vec(),
            vec!["a".into(), "b".into()],
            Task::Classification,
        )
        .unwrap()
    }

    #[test]
    fn accuracy_examples() {
        let rows = [[1.0, 0.0], [-1.0, 0.5], [2.0, 1.0], [-0.5, -2.0]];
        let ds = classification(&rows, &[1.0, 0.0, 1.0, 0.0]);
        assert_eq!(accuracy(&[0.0, 0.0], &ds).unwrap(), 0.5);
        assert_eq!(accuracy(&[1.0, 0.0], &ds).unwrap(), 1.0);
        let flipped = classification(&rows, &[0.0, 1.0, 0.0, 0.0]);
        let a = accuracy(&[0.3, -1.0], &ds).unwrap();
        let b = accuracy(&[0.3, -1.0], &classification(&rows, &[0.0, 1.0, 0.0, 1.0])).unwrap();
        assert!((a + b - 1.0).abs() < 1e-15);
        assert_eq!(accuracy(&[0.0, 0.0], &flipped).unwrap(), 0.25);
    }

    #[test]
    fn exp_fit_examples() {
        let t: Vec<f64> = (0..=10).map(|i| i as f64 * 0.1).collect();
        let v: Vec<f64> = t.iter().map(|t| (-2.0 * t).exp()).collect();
        let fit = fit_exp_rate(&v, &t).unwrap();
        assert!((fit.rate - 2.0).abs() < 1e-9);
        assert!((fit.r2 - 1.0).abs() < 1e-12);

        let fit = fit_exp_rate(&[4.0; 5], &[0.0, 1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(fit.rate, 0.0);

        let mut rng = stream(2, 0, Purpose::Reference);
        let t: Vec<f64> = (0..100).map(|i| i as f64 / 99.0).collect();
        let v: Vec<f64> = t
            .iter()
            .map(|t| {
                let z: f64 = rng.sample(StandardNormal);
                (-3.0 * t).exp() * (1.0 + 0.05 * z)
            })
            .collect();
        assert!((fit_exp_rate(&v, &t).unwrap().rate - 3.0).abs() < 0.1);

        assert!(fit_exp_rate(&[1.0, 0.5], &[0.0, 1.0]).is_err());
        // Zeros are clipped rather than rejected.
        assert!(
            fit_exp_rate(&[1.0, 0.0, 0.0], &[0.0, 1.0, 2.0])
                .unwrap()
                .rate
                > 0.0
        );
    }

    #[test]
    fn aggregation_helpers() {
        let (m, s) = mean_std(&[1.0, 2.0, 3.0]);
        assert_eq!((m, s), (2.0, 1.0));
        assert_eq!(mean_std(&[5.0]), (5.0, 0.0));
        assert_eq!(first_passage(&[5.0, 3.0, 1.05, 1.0], 1.1), Some(2));
        assert_eq!(first_passage(&[], 1.1), None);
    }

    fn sample(len: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-100.0..100.0f64, len)
    }

    proptest! {
        #[test]
        fn w1_metric_axioms(n in 1usize..40, seed in any::<u64>()) {
            let mut rng = stream(seed, 0, Purpose::Reference);
            let mut draw = || (0..n).map(|_| rng.random::<f64>() * 10.0 - 5.0).collect::<Vec<_>>();
            let (a, b, c) = (draw(), draw(), draw());
            let ab = w1_1d(&a, &b).unwrap();
            prop_assert!(ab >= 0.0);
            prop_assert_eq!(ab, w1_1d(&b, &a).unwrap());
            prop_assert!(ab <= w1_1d(&a, &c).unwrap() + w1_1d(&c, &b).unwrap() + 1e-10);
        }

        #[test]
        fn w1_translation(a in sample(25), c in -10.0..10.0f64) {
            let shifted: Vec<f64> = a.iter().map(|v| v + c).collect();
            let w = w1_1d(&a, &shifted).unwrap();
            prop_assert!((w - c.abs()).abs() < 1e-12);
        }

        #[test]
        fn mse_permutation_invariant(rot in 0usize..6) {
            let rows = [[1.0, 2.0], [0.5, -1.0], [3.0, 0.0], [-2.0, 1.5], [0.1, 0.2], [4.0, -3.0]];
            let y = [1.0, 2.0, -1.0, 0.5, 0.0, 3.0];
            let ds = regression(&rows, &y);
            let mut r2 = rows.to_vec();
            let mut y2 = y.to_vec();
            r2.rotate_left(rot);
            y2.rotate_left(rot);
            let perm = regression(&r2, &y2);
            let x = [0.3, -0.7];
            prop_assert!((mse(&x, &ds).unwrap() - mse(&x, &perm).unwrap()).abs() < 1e-12);
        }

        #[test]
        fn accuracy_scale_invariant(b0 in -3.0..3.0f64, b1 in -3.0..3.0f64, c in 0.01..100.0f64) {
            let rows = [[1.0, 0.0], [-1.0, 0.5], [2.0, 1.0], [-0.5, -2.0], [0.3, 0.3]];
            let ds = classification(&rows, &[1.0, 0.0, 1.0, 0.0, 1.0]);
            prop_assert_eq!(
                accuracy(&[b0, b1], &ds).unwrap(),
                accuracy(&[c * b0, c * b1], &ds).unwrap()
            );
        }
    }
}
