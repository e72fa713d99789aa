//! Potentials `f = -log π` with exact and minibatch gradients.

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::Rng;

use crate::data::{sigmoid, Dataset, Task};
use crate::error::{check_dim, Error, Result};

/// A negative log-density.
///
/// Regression potentials are sums over data points, `f = Σ_j f_j` (plus the
/// constant from a uniform prior on the unit ball for the logistic case).
#[derive(Debug, Clone)]
pub enum Potential {
    /// `f(x) = ½ xᵀ H x`, so `∇f = H x`.
    Quadratic(DMatrix<f64>),
    /// `f(x) = ½ ‖x‖²`.
    GaussianStandard(usize),
    /// `f(x) = ½ Σ_j (y_j - xᵀa_j)²`.
    LinearRegression(Arc<Dataset>),
    /// `f(β) = Σ_j [log(1 + e^{βᵀX_j}) - y_j βᵀX_j] + log V_d`.
    LogisticRegression(Arc<Dataset>),
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `log(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Log-volume of the unit ball in `d` dimensions.
pub fn log_unit_ball_volume(d: usize) -> f64 {
    let half = d as f64 / 2.0;
    half * std::f64::consts::PI.ln() - ln_gamma(half + 1.0)
}

// ln Γ for the half-integer arguments produced by `log_unit_ball_volume`.
fn ln_gamma(x: f64) -> f64 {
    let twice = (2.0 * x).round() as i64;
    if twice % 2 == 0 {
        (1..x as i64).map(|k| (k as f64).ln()).sum()
    } else {
        // Γ(k + ½) = √π · (2k)! / (4^k k!)
        let k = (x - 0.5).round() as i64;
        0.5 * std::f64::consts::PI.ln()
            + (1..=k)
                .map(|i| ((2 * i - 1) as f64 / 2.0).ln())
                .sum::<f64>()
    }
}

impl Potential {
    pub fn quadratic(h: DMatrix<f64>) -> Result<Self> {
        if !h.is_square() {
            return Err(Error::DimensionMismatch {
                expected: h.nrows(),
                got: h.ncols(),
            });
        }
        let mut worst = 0.0f64;
        for i in 0..h.nrows() {
            for j in 0..h.ncols() {
                worst = worst.max((h[(i, j)] - h[(j, i)]).abs());
            }
        }
        if worst > 1e-12 {
            return Err(Error::NotSymmetric(worst));
        }
        Ok(Potential::Quadratic(h))
    }

    pub fn linear_regression(data: Arc<Dataset>) -> Result<Self> {
        if data.task() != Task::Regression {
            return Err(Error::InvalidParameter(
                "linear regression needs real labels".into(),
            ));
        }
        Ok(Potential::LinearRegression(data))
    }

    pub fn logistic_regression(data: Arc<Dataset>) -> Result<Self> {
        if data.task() != Task::Classification {
            return Err(Error::InvalidParameter(
                "logistic regression needs 0/1 labels".into(),
            ));
        }
        Ok(Potential::LogisticRegression(data))
    }

    pub fn dim(&self) -> usize {
        match self {
            Potential::Quadratic(h) => h.nrows(),
            Potential::GaussianStandard(d) => *d,
            Potential::LinearRegression(ds) | Potential::LogisticRegression(ds) => ds.dim(),
        }
    }

    pub fn dataset(&self) -> Option<&Arc<Dataset>> {
        match self {
            Potential::LinearRegression(ds) | Potential::LogisticRegression(ds) => Some(ds),
            _ => None,
        }
    }

    /// Gradient Lipschitz constant `L`: `‖H‖` for quadratics, `λ_max(AᵀA)` for
    /// least squares and `¼ λ_max(XᵀX)` for the logistic loss.
    pub fn lipschitz(&self) -> f64 {
        let top_eigen = |m: DMatrix<f64>| {
            m.symmetric_eigen()
                .eigenvalues
                .iter()
                .map(|v| v.abs())
                .fold(0.0, f64::max)
        };
        let gram = |ds: &Dataset| {
            let d = ds.dim();
            let mut g = DMatrix::zeros(d, d);
            for row in ds.rows() {
                for i in 0..d {
                    for j in 0..d {
                        g[(i, j)] += row[i] * row[j];
                    }
                }
            }
            g
        };
        match self {
            Potential::Quadratic(h) => top_eigen(h.clone()),
            Potential::GaussianStandard(_) => 1.0,
            Potential::LinearRegression(ds) => top_eigen(gram(ds)),
            Potential::LogisticRegression(ds) => 0.25 * top_eigen(gram(ds)),
        }
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        Ok(match self {
            Potential::Quadratic(h) => {
                let n = x.len();
                let mut acc = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        acc += x[i] * h[(i, j)] * x[j];
                    }
                }
                0.5 * acc
            }
            Potential::GaussianStandard(_) => 0.5 * dot(x, x),
            Potential::LinearRegression(ds) => {
                0.5 * ds
                    .rows()
                    .zip(ds.labels())
                    .map(|(a, y)| (y - dot(a, x)).powi(2))
                    .sum::<f64>()
            }
            Potential::LogisticRegression(ds) => {
                ds.rows()
                    .zip(ds.labels())
                    .map(|(row, y)| {
                        let z = dot(row, x);
                        softplus(z) - y * z
                    })
                    .sum::<f64>()
                    + log_unit_ball_volume(ds.dim())
            }
        })
    }

    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), x.len())?;
        let mut out = vec![0.0; x.len()];
        self.gradient_into(x, &mut out);
        Ok(out)
    }

    /// Full gradient into `out`. Dimensions are not checked.
    pub fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        match self {
            Potential::Quadratic(h) => {
                let n = x.len();
                for i in 0..n {
                    let mut acc = 0.0;
                    for j in 0..n {
                        acc += h[(i, j)] * x[j];
                    }
                    out[i] = acc;
                }
            }
            Potential::GaussianStandard(_) => out.copy_from_slice(x),
            Potential::LinearRegression(ds) | Potential::LogisticRegression(ds) => {
                out.fill(0.0);
                for i in 0..ds.len() {
                    self.add_datum_gradient(ds, i, x, out);
                }
            }
        }
    }

    /// `out += ∇f_i(x)`.
    fn add_datum_gradient(&self, ds: &Dataset, i: usize, x: &[f64], out: &mut [f64]) {
        let row = ds.row(i);
        let y = ds.labels()[i];
        let coef = match self {
            Potential::LinearRegression(_) => -(y - dot(row, x)),
            Potential::LogisticRegression(_) => sigmoid(dot(row, x)) - y,
            _ => unreachable!("only data potentials have per-datum gradients"),
        };
        for (o, a) in out.iter_mut().zip(row) {
            *o += coef * a;
        }
    }

    /// Unbiased minibatch estimate `(n/b) Σ_{i∈batch} ∇f_i(x)` of the full
    /// gradient. Potentials without data ignore the batch and return the
    /// exact gradient.
    pub fn stochastic_gradient(&self, x: &[f64], batch: &[usize]) -> Result<Vec<f64>> {
        check_dim(self.dim(), x.len())?;
        if batch.is_empty() {
            return Err(Error::EmptyBatch);
        }
        if let Some(ds) = self.dataset() {
            if let Some(&bad) = batch.iter().find(|&&i| i >= ds.len()) {
                return Err(Error::IndexOutOfRange {
                    index: bad,
                    len: ds.len(),
                });
            }
        }
        let mut out = vec![0.0; x.len()];
        self.stochastic_gradient_into(x, batch, &mut out);
        Ok(out)
    }

    /// [`Potential::stochastic_gradient`] into `out` without validation.
    pub fn stochastic_gradient_into(&self, x: &[f64], batch: &[usize], out: &mut [f64]) {
        match self.dataset() {
            Some(ds) => {
                let scale = ds.len() as f64 / batch.len() as f64;
                out.fill(0.0);
                for &i in batch {
                    self.add_datum_gradient(ds, i, x, out);
                }
                out.iter_mut().for_each(|v| *v *= scale);
            }
            None => self.gradient_into(x, out),
        }
    }
}

/// `b` distinct indices from `0..n`, uniform over subsets of size `b`.
pub fn draw_minibatch<R: Rng + ?Sized>(n: usize, b: usize, rng: &mut R) -> Result<Vec<usize>> {
    if b == 0 {
        return Err(Error::EmptyBatch);
    }
    if b > n {
        return Err(Error::BatchTooLarge { batch: b, len: n });
    }
    let mut sampler = Minibatcher::new(n);
    Ok(sampler.draw(b, rng).to_vec())
}

/// Partial Fisher–Yates over a persistent permutation, so each draw costs
/// `O(b)` instead of `O(n)`.
#[derive(Debug, Clone)]
pub struct Minibatcher {
    perm: Vec<usize>,
}

impl Minibatcher {
    pub fn new(n: usize) -> Self {
        Self {
            perm: (0..n).collect(),
        }
    }

    /// The first `b` slots after a partial shuffle. `b ≤ n` is the caller's
    /// responsibility.
    pub fn draw<R: Rng + ?Sized>(&mut self, b: usize, rng: &mut R) -> &[usize] {
        let n = self.perm.len();
        for i in 0..b {
            let j = rng.random_range(i..n);
            self.perm.swap(i, j);
        }
        &self.perm[..b]
    }
}
