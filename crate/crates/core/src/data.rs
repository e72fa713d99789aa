//! Datasets for the regression experiments.

use std::collections::HashMap;
use std::fs::File;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::error::{Error, Result};
use crate::geometry::ConvexBody;
use crate::rng::{stream, Purpose};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    Regression,
    Classification,
}

/// Row-major feature matrix with one label per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<f64>,
    labels: Vec<f64>,
    feature_names: Vec<String>,
    dim: usize,
    task: Task,
}

impl Dataset {
    pub fn new(
        features: Vec<f64>,
        labels: Vec<f64>,
        feature_names: Vec<String>,
        task: Task,
    ) -> Result<Self> {
        let dim = feature_names.len();
        if dim == 0 {
            return Err(Error::InvalidParameter(
                "dataset needs at least one feature".into(),
            ));
        }
        if features.len() != labels.len() * dim {
            return Err(Error::DimensionMismatch {
                expected: labels.len() * dim,
                got: features.len(),
            });
        }
        if let Some(bad) = features.iter().chain(&labels).find(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "non-finite dataset entry {bad}"
            )));
        }
        if task == Task::Classification {
            if let Some(bad) = labels.iter().find(|y| **y != 0.0 && **y != 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "classification label {bad} is not 0 or 1"
                )));
            }
        }
        Ok(Self {
            features,
            labels,
            feature_names,
            dim,
            task,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn task(&self) -> Task {
        self.task
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.features.chunks_exact(self.dim)
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        self.rows().map(move |r| r[j])
    }

    /// The rows at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Self {
        let mut features = Vec::with_capacity(indices.len() * self.dim);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            features.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        Self {
            features,
            labels,
            feature_names: self.feature_names.clone(),
            dim: self.dim,
            task: self.task,
        }
    }

    /// Writes the canonical CSV: a header of feature names plus `label`,
    /// then one numeric row per sample.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = csv::Writer::from_writer(file);
        let mut header = self.feature_names.clone();
        header.push("label".into());
        w.write_record(&header)?;
        for (row, y) in self.rows().zip(&self.labels) {
            w.write_record(row.iter().chain(std::iter::once(y)).map(|v| v.to_string()))?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }

    /// Reads the canonical CSV written by [`Dataset::write_csv`].
    pub fn read_csv(path: &Path, task: Task) -> Result<Self> {
        let mut r = open_csv(path, true)?;
        let header = r.headers()?.clone();
        if header.len() < 2 || &header[header.len() - 1] != "label" {
            return Err(Error::MissingColumn("label".into()));
        }
        let names: Vec<String> = header
            .iter()
            .take(header.len() - 1)
            .map(String::from)
            .collect();
        let mut features = Vec::new();
        let mut labels = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let line = i + 2;
            let rec = rec?;
            if rec.len() != header.len() {
                return Err(malformed(
                    path,
                    line,
                    format!("expected {} fields, got {}", header.len(), rec.len()),
                ));
            }
            for (k, field) in rec.iter().enumerate() {
                let v = parse_f64(path, line, field)?;
                if k + 1 == rec.len() {
                    labels.push(v);
                } else {
                    features.push(v);
                }
            }
        }
        Self::new(features, labels, names, task)
    }
}

fn open_csv(path: &Path, has_headers: bool) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(has_headers)
        .flexible(true)
        .from_reader(file))
}

fn malformed(path: &Path, line: usize, message: String) -> Error {
    Error::Malformed {
        path: path.to_path_buf(),
        line,
        message,
    }
}

fn parse_f64(path: &Path, line: usize, field: &str) -> Result<f64> {
    let v: f64 = field
        .trim()
        .parse()
        .map_err(|_| malformed(path, line, format!("not a number: `{field}`")))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(malformed(path, line, format!("non-finite value `{field}`")))
    }
}

/// Ground-truth coefficients of the synthetic linear model.
pub const LINREG_TRUTH: [f64; 2] = [1.0, 1.0];

/// `a_j ~ N(0, I₂)`, `y_j = [1, 1]·a_j + δ_j` with `δ_j ~ N(0, noise_variance)`.
pub fn generate_linreg(n: usize, noise_variance: f64, seed: u64) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be ≥ 1".into()));
    }
    if !(noise_variance >= 0.0 && noise_variance.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "noise variance {noise_variance}"
        )));
    }
    let mut rng = stream(seed, 0, Purpose::Data);
    let noise = Normal::new(0.0, noise_variance.sqrt()).expect("valid normal");
    let mut features = Vec::with_capacity(2 * n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let a0: f64 = rng.sample(StandardNormal);
        let a1: f64 = rng.sample(StandardNormal);
        let delta = noise.sample(&mut rng);
        features.extend([a0, a1]);
        labels.push(LINREG_TRUTH[0] * a0 + LINREG_TRUTH[1] * a1 + delta);
    }
    Dataset::new(
        features,
        labels,
        vec!["a1".into(), "a2".into()],
        Task::Regression,
    )
}

/// `X_j ~ N(0, 2I)`, `p_j ~ U(0, 1)`, `y_j = 1{p_j ≤ σ(βᵀX_j)}`.
///
/// With `beta_true = None` the coefficients are drawn uniformly from the unit
/// ball of dimension `dim`. Returns the dataset and the coefficients used.
pub fn generate_logreg(
    n: usize,
    dim: usize,
    beta_true: Option<&[f64]>,
    seed: u64,
) -> Result<(Dataset, Vec<f64>)> {
    if n == 0 || dim == 0 {
        return Err(Error::InvalidParameter("n and dim must be ≥ 1".into()));
    }
    let mut rng = stream(seed, 0, Purpose::Data);
    let beta = match beta_true {
        Some(b) => {
            crate::error::check_dim(dim, b.len())?;
            b.to_vec()
        }
        None => ConvexBody::centered_ball(dim, 1.0)?.sample_uniform(&mut rng),
    };
    let scale = 2f64.sqrt();
    let mut features = Vec::with_capacity(n * dim);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let mut z = 0.0;
        for b in &beta {
            let x: f64 = scale * rng.sample::<f64, _>(StandardNormal);
            features.push(x);
            z += b * x;
        }
        let p: f64 = rng.random();
        labels.push(if p <= sigmoid(z) { 1.0 } else { 0.0 });
    }
    let names = (1..=dim).map(|i| format!("x{i}")).collect();
    Ok((
        Dataset::new(features, labels, names, Task::Classification)?,
        beta,
    ))
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

const TELESCOPE_COLUMNS: [&str; 10] = [
    "fLength", "fWidth", "fSize", "fConc", "fConc1", "fAsym", "fM3Long", "fM3Trans", "fAlpha",
    "fDist",
];

/// MAGIC gamma telescope rows `f1,…,f10,class` with class `g → 1`, `h → 0`.
pub fn load_telescope(path: &Path) -> Result<Dataset> {
    let mut r = open_csv(path, false)?;
    let mut features = Vec::new();
    let mut labels = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let line = i + 1;
        let rec = rec.map_err(|e| malformed(path, line, e.to_string()))?;
        if rec.len() == 1 && rec[0].trim().is_empty() {
            continue;
        }
        if rec.len() != 11 {
            return Err(malformed(
                path,
                line,
                format!("expected 11 fields, got {}", rec.len()),
            ));
        }
        for field in rec.iter().take(10) {
            features.push(parse_f64(path, line, field)?);
        }
        labels.push(match rec[10].trim() {
            "g" => 1.0,
            "h" => 0.0,
            other => return Err(malformed(path, line, format!("unknown class `{other}`"))),
        });
    }
    if labels.is_empty() {
        return Err(malformed(path, 1, "no rows".into()));
    }
    Dataset::new(
        features,
        labels,
        TELESCOPE_COLUMNS.iter().map(|s| s.to_string()).collect(),
        Task::Classification,
    )
}

pub const TITANIC_FEATURES: [&str; 8] = [
    "Pclass",
    "Sex",
    "Age",
    "SibSp",
    "Parch",
    "Fare",
    "Embarked_Q",
    "Embarked_S",
];

/// Kaggle Titanic `train.csv` → 8 numeric features and the `Survived` label.
///
/// Sex is `male → 1`; missing ages take the median observed age; Embarked is
/// one-hot with `C` (and missing) as the baseline. PassengerId, Name, Ticket
/// and Cabin are dropped.
pub fn preprocess_titanic(path: &Path) -> Result<Dataset> {
    let mut r = open_csv(path, true)?;
    let header = r.headers()?.clone();
    let col: HashMap<&str, usize> = header
        .iter()
        .enumerate()
        .map(|(i, h)| (h.trim(), i))
        .collect();
    let required = [
        "Survived", "Pclass", "Sex", "Age", "SibSp", "Parch", "Fare", "Embarked",
    ];
    let mut idx = HashMap::new();
    for name in required {
        let i = *col
            .get(name)
            .ok_or_else(|| Error::MissingColumn(name.into()))?;
        idx.insert(name, i);
    }

    struct Row {
        label: f64,
        values: [f64; 8],
        age: Option<f64>,
    }
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| malformed(path, line, e.to_string()))?;
        let get = |name: &str| rec.get(idx[name]).map(str::trim).unwrap_or("");
        let num = |name: &str| parse_f64(path, line, get(name));
        let label = num("Survived")?;
        let sex = match get("Sex") {
            "male" => 1.0,
            "female" => 0.0,
            other => return Err(malformed(path, line, format!("unknown sex `{other}`"))),
        };
        let age = match get("Age") {
            "" => None,
            s => Some(parse_f64(path, line, s)?),
        };
        let (q, s) = match get("Embarked") {
            "Q" => (1.0, 0.0),
            "S" => (0.0, 1.0),
            "C" | "" => (0.0, 0.0),
            other => return Err(malformed(path, line, format!("unknown port `{other}`"))),
        };
        let fare = match get("Fare") {
            "" => 0.0,
            f => parse_f64(path, line, f)?,
        };
        rows.push(Row {
            label,
            values: [
                num("Pclass")?,
                sex,
                0.0,
                num("SibSp")?,
                num("Parch")?,
                fare,
                q,
                s,
            ],
            age,
        });
    }
    let mut ages: Vec<f64> = rows.iter().filter_map(|r| r.age).collect();
    if ages.is_empty() {
        return Err(malformed(path, 1, "no observed ages".into()));
    }
    let median = median(&mut ages);
    let mut features = Vec::with_capacity(rows.len() * 8);
    let mut labels = Vec::with_capacity(rows.len());
    for mut row in rows {
        row.values[2] = row.age.unwrap_or(median);
        features.extend_from_slice(&row.values);
        labels.push(row.label);
    }
    Dataset::new(
        features,
        labels,
        TITANIC_FEATURES.iter().map(|s| s.to_string()).collect(),
        Task::Classification,
    )
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Column statistics from [`standardize`].
#[derive(Debug, Clone, PartialEq)]
pub struct Standardization {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl Standardization {
    /// Applies the stored transform to another dataset with the same columns.
    pub fn apply(&self, ds: &Dataset) -> Result<Dataset> {
        crate::error::check_dim(self.means.len(), ds.dim())?;
        let d = ds.dim();
        let features = ds
            .features
            .iter()
            .enumerate()
            .map(|(k, v)| {
                let j = k % d;
                let centered = v - self.means[j];
                if self.stds[j] < 1e-12 {
                    centered
                } else {
                    centered / self.stds[j]
                }
            })
            .collect();
        Dataset::new(
            features,
            ds.labels.clone(),
            ds.feature_names.clone(),
            ds.task,
        )
    }
}

/// Z-scores every column using its population mean and standard deviation.
/// Columns with std below `1e-12` are only centred.
pub fn standardize(ds: &Dataset) -> Result<(Dataset, Standardization)> {
    let n = ds.len() as f64;
    let d = ds.dim();
    let mut means = vec![0.0; d];
    for row in ds.rows() {
        for (m, v) in means.iter_mut().zip(row) {
            *m += v;
        }
    }
    means.iter_mut().for_each(|m| *m /= n);
    let mut stds = vec![0.0; d];
    for row in ds.rows() {
        for j in 0..d {
            stds[j] += (row[j] - means[j]).powi(2);
        }
    }
    stds.iter_mut().for_each(|s| *s = (*s / n).sqrt());
    let stats = Standardization { means, stds };
    Ok((stats.apply(ds)?, stats))
}

/// Seeded uniform split into `⌈n(1 - f)⌉` training rows and the rest.
pub fn train_test_split(ds: &Dataset, test_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "test fraction must lie in (0, 1), got {test_fraction}"
        )));
    }
    let n = ds.len();
    let n_train = ((n as f64) * (1.0 - test_fraction)).ceil() as usize;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut stream(seed, 0, Purpose::Split));
    Ok((ds.subset(&order[..n_train]), ds.subset(&order[n_train..])))
}
