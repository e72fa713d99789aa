//! Declarative experiment configuration.
//!
//! A config file is a TOML document. It is merged key-by-key onto the
//! defaults for its experiment (and, for the toy and logistic experiments,
//! for the chosen body or data source), so a file only needs the keys it
//! changes.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::error::{Error, Result};
use crate::geometry::BodySpec;
use crate::skew::SkewSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    ToyGaussian,
    BayesLinreg,
    BayesLogreg,
    TheoryCheck,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::ToyGaussian => "toy_gaussian",
            Self::BayesLinreg => "bayes_linreg",
            Self::BayesLogreg => "bayes_logreg",
            Self::TheoryCheck => "theory_check",
        }
    }

    fn parse(s: &str) -> Result<Self> {
        Value::String(s.to_owned())
            .try_into()
            .map_err(|_| Error::Config(format!("unknown experiment `{s}`")))
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerParams {
    pub stepsize: f64,
    pub iterations: usize,
    pub chains: usize,
    pub record_every: usize,
    #[serde(default)]
    pub batch_size: Option<usize>,
    /// Starting point shared by all chains; absent means uniform on the body.
    #[serde(default)]
    pub initial: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataSource {
    None,
    Synthetic,
    Telescope,
    Titanic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataParams {
    pub source: DataSource,
    #[serde(default)]
    pub n: usize,
    #[serde(default)]
    pub dim: usize,
    #[serde(default)]
    pub noise_variance: f64,
    #[serde(default)]
    pub beta_true: Option<Vec<f64>>,
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub test_fraction: f64,
    #[serde(default)]
    pub standardize: bool,
    /// Seed for data generation and the train/test split; the replicate
    /// seeds only drive the samplers.
    #[serde(default)]
    pub seed: u64,
}

/// Parameters of the theory checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TheoryParams {
    pub hessian_diag: Vec<f64>,
    pub a_values: Vec<f64>,
    pub x0: Vec<f64>,
    pub x0_tilde: Vec<f64>,
    pub sweep_matrices: usize,
    pub sweep_min_dim: usize,
    pub sweep_max_dim: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub body: BodySpec,
    pub skew: SkewSpec,
    pub sampler: SamplerParams,
    pub data: DataParams,
    pub seeds: Vec<u64>,
    pub output_dir: PathBuf,
    /// Rejection-sampling reference size for the toy experiment.
    #[serde(default)]
    pub reference_size: usize,
    #[serde(default)]
    pub plots: bool,
    #[serde(default)]
    pub theory: Option<TheoryParams>,
}

impl ExperimentConfig {
    /// Built-in defaults for `kind`. `variant` selects the body (`ball` /
    /// `box`) for the toy experiment and the data source for the logistic one.
    pub fn defaults(kind: ExperimentKind, variant: Option<&str>) -> Result<Self> {
        let table = default_table(kind, variant)?;
        Self::from_table(table)
    }

    /// Parses a TOML document and merges it onto the matching defaults.
    ///
    /// `expected` is the experiment implied by the caller (the CLI
    /// subcommand); the document may omit `experiment` or must agree with it.
    pub fn from_toml_str(text: &str, expected: Option<ExperimentKind>) -> Result<Self> {
        let user: Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        let declared = match user.get("experiment") {
            Some(Value::String(s)) => Some(ExperimentKind::parse(s)?),
            Some(_) => return Err(Error::Config("`experiment` must be a string".into())),
            None => None,
        };
        let kind = match (declared, expected) {
            (Some(a), Some(b)) if a != b => {
                return Err(Error::Config(format!(
                    "config declares experiment `{a}` but `{b}` was requested"
                )))
            }
            (Some(k), _) | (None, Some(k)) => k,
            (None, None) => return Err(Error::Config("missing `experiment`".into())),
        };
        let variant = match kind {
            ExperimentKind::ToyGaussian => nested_str(&user, "body", "kind"),
            ExperimentKind::BayesLogreg => nested_str(&user, "data", "source"),
            _ => None,
        };
        let mut merged = default_table(kind, variant)?;
        deep_merge(&mut merged, user);
        merged.insert("experiment".into(), Value::String(kind.as_str().into()));
        Self::from_table(merged)
    }

    pub fn from_path(path: &Path, expected: Option<ExperimentKind>) -> Result<Self> {
        if !path.is_file() {
            return Err(Error::Config(format!(
                "config file {} does not exist",
                path.display()
            )));
        }
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text, expected)
    }

    fn from_table(table: Table) -> Result<Self> {
        let cfg: Self = Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.seeds.is_empty() {
            return bad("`seeds` must not be empty".into());
        }
        let s = &self.sampler;
        if !(s.stepsize.is_finite() && s.stepsize > 0.0) {
            return bad(format!(
                "sampler.stepsize must be positive, got {}",
                s.stepsize
            ));
        }
        if s.chains == 0 || s.record_every == 0 {
            return bad("sampler.chains and sampler.record_every must be positive".into());
        }
        if s.batch_size == Some(0) {
            return bad("sampler.batch_size must be positive".into());
        }
        let d = &self.data;
        match d.source {
            DataSource::Telescope | DataSource::Titanic => match &d.path {
                Some(p) if p.is_file() => {}
                Some(p) => return bad(format!("data.path {} does not exist", p.display())),
                None => return bad(format!("data.path is required for {:?} data", d.source)),
            },
            DataSource::Synthetic if d.n == 0 => return bad("data.n must be positive".into()),
            _ => {}
        }
        if matches!(
            d.source,
            DataSource::Synthetic | DataSource::Telescope | DataSource::Titanic
        ) && self.experiment == ExperimentKind::BayesLogreg
            && !(d.test_fraction > 0.0 && d.test_fraction < 1.0)
        {
            return bad(format!(
                "data.test_fraction must lie in (0, 1), got {}",
                d.test_fraction
            ));
        }
        match self.experiment {
            ExperimentKind::ToyGaussian => {
                if self.reference_size == 0 {
                    return bad("reference_size must be positive".into());
                }
            }
            ExperimentKind::BayesLinreg => {
                if d.source != DataSource::Synthetic {
                    return bad("bayes_linreg uses synthetic data only".into());
                }
            }
            ExperimentKind::BayesLogreg => {
                if d.source == DataSource::None {
                    return bad("bayes_logreg needs a data source".into());
                }
            }
            ExperimentKind::TheoryCheck => {
                let Some(t) = &self.theory else {
                    return bad("theory_check needs a [theory] table".into());
                };
                if t.sweep_min_dim < 2 || t.sweep_max_dim < t.sweep_min_dim {
                    return bad("theory sweep dimensions must satisfy 2 ≤ min ≤ max".into());
                }
            }
        }
        let body = self.body.build()?;
        if let Some(x0) = &s.initial {
            if !body.contains(x0)? {
                return bad(format!("sampler.initial {x0:?} lies outside the body"));
            }
        }
        Ok(())
    }
}

fn nested_str<'a>(t: &'a Table, table: &str, key: &str) -> Option<&'a str> {
    t.get(table)?.as_table()?.get(key)?.as_str()
}

/// Recursively merges `over` into `base`: tables merge, everything else
/// replaces.
pub fn deep_merge(base: &mut Table, over: Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(Value::Table(b)), Value::Table(o)) => deep_merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

fn default_table(kind: ExperimentKind, variant: Option<&str>) -> Result<Table> {
    let text = match (kind, variant) {
        (ExperimentKind::ToyGaussian, None | Some("ball")) => TOY_BALL,
        (ExperimentKind::ToyGaussian, Some("box")) => TOY_BOX,
        (ExperimentKind::BayesLinreg, _) => LINREG,
        (ExperimentKind::BayesLogreg, None | Some("synthetic")) => LOGREG_SYNTHETIC,
        (ExperimentKind::BayesLogreg, Some("telescope")) => LOGREG_TELESCOPE,
        (ExperimentKind::BayesLogreg, Some("titanic")) => LOGREG_TITANIC,
        (ExperimentKind::TheoryCheck, _) => THEORY,
        (k, Some(v)) => {
            return Err(Error::Config(format!(
                "`{v}` is not a valid variant of {k}"
            )));
        }
    };
    Ok(text.parse().expect("built-in defaults parse"))
}

const TOY_BALL: &str = r#"
experiment = "toy_gaussian"
seeds = [1, 2, 3]
output_dir = "out/toy_gaussian"
reference_size = 3000
plots = false

[body]
kind = "ball"
center = [0.0, 0.0, 0.0]
radius = 1.0

[skew]
kind = "tridiagonal"
a = 1.0

[sampler]
stepsize = 1e-4
iterations = 5000
chains = 3000
record_every = 50
initial = [0.3, 0.6, -0.4]

[data]
source = "none"
"#;

const TOY_BOX: &str = r#"
experiment = "toy_gaussian"
seeds = [1, 2, 3]
output_dir = "out/toy_gaussian_box"
reference_size = 3000
plots = false

[body]
kind = "box"
lower = [-1.0, -1.0, -1.0]
upper = [1.0, 1.0, 1.0]

[skew]
kind = "tridiagonal"
a = 2.0

[sampler]
stepsize = 1e-4
iterations = 5000
chains = 3000
record_every = 50
initial = [0.5, -0.2, 0.8]

[data]
source = "none"
"#;

const LINREG: &str = r#"
experiment = "bayes_linreg"
seeds = [1, 2, 3]
output_dir = "out/bayes_linreg"
plots = false

[body]
kind = "ball"
center = [0.0, 0.0]
radius = 1.0

[skew]
kind = "tridiagonal"
a = 2.0

[sampler]
stepsize = 1e-4
iterations = 600
chains = 500
record_every = 1
batch_size = 50

[data]
source = "synthetic"
n = 10000
noise_variance = 0.25
seed = 0
"#;

const LOGREG_SYNTHETIC: &str = r#"
experiment = "bayes_logreg"
seeds = [1, 2, 3]
output_dir = "out/bayes_logreg"
plots = false

[body]
kind = "ball"
center = [0.0, 0.0, 0.0]
radius = 1.0

[skew]
kind = "tridiagonal"
a = 2.0

[sampler]
stepsize = 1e-4
iterations = 1000
chains = 20
record_every = 10
batch_size = 50

[data]
source = "synthetic"
n = 2000
dim = 3
test_fraction = 0.2
standardize = false
seed = 0
"#;

const LOGREG_TELESCOPE: &str = r#"
experiment = "bayes_logreg"
seeds = [1, 2, 3]
output_dir = "out/bayes_logreg_telescope"
plots = false

[body]
kind = "ball"
center = [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]
radius = 1.0

[skew]
kind = "tridiagonal"
a = 1.5

[sampler]
stepsize = 1e-4
iterations = 1000
chains = 20
record_every = 10
batch_size = 100

[data]
source = "telescope"
test_fraction = 0.2
standardize = true
seed = 0
"#;

const LOGREG_TITANIC: &str = r#"
experiment = "bayes_logreg"
seeds = [1, 2, 3]
output_dir = "out/bayes_logreg_titanic"
plots = false

[body]
kind = "ball"
center = [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]
radius = 1.0

[skew]
kind = "tridiagonal"
a = 2.0

[sampler]
stepsize = 1e-4
iterations = 1500
chains = 20
record_every = 10
batch_size = 50

[data]
source = "titanic"
test_fraction = 0.2
standardize = true
seed = 0
"#;

const THEORY: &str = r#"
experiment = "theory_check"
seeds = [1]
output_dir = "out/theory_check"
plots = false

[body]
kind = "ball"
center = [0.0, 0.0, 0.0]
radius = 5.0

[skew]
kind = "zero"

[sampler]
stepsize = 1e-4
iterations = 20000
chains = 1
record_every = 100

[data]
source = "none"

[theory]
hessian_diag = [1.0, 2.0, 3.0]
a_values = [0.0, 1.0, 2.0]
x0 = [0.5, 0.0, 0.0]
x0_tilde = [-0.5, 0.0, 0.0]
sweep_matrices = 1000
sweep_min_dim = 2
sweep_max_dim = 10
"#;
