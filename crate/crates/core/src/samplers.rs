//! Discrete-time constrained Langevin samplers.
//!
//! Every step proposes
//!
//! ```text
//! x̃ = x - η (I + J(x)) g(x) + √(2η) ξ
//! ```
//!
//! with `g` the full gradient (SRNLMC) or a minibatch estimate (SRNSGLD), and
//! maps `x̃` back into the body with the skew projection. The reversible
//! baselines PLMC/PSGLD drop `J` and use the Euclidean projection; they are
//! separate code paths so they can serve as oracles for the `J = 0` case.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{check_dim, Error, Result};
use crate::geometry::ConvexBody;
use crate::rng::{stream, Purpose, StreamRng};
use crate::skew::{resolvent_symmetric_part, skew_project_unchecked, SkewField};
use crate::targets::{Minibatcher, Potential};

/// Proposal-cap for [`rejection_sample_truncated_gaussian`].
pub const REJECTION_CAP: u64 = 100_000_000;

/// How exterior proposals are returned to the body.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reflection {
    /// Non-reversible drift with skew projection (SRNLMC / SRNSGLD).
    Skew,
    /// Plain gradient drift with Euclidean projection (PLMC / PSGLD).
    Euclidean,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Initial {
    Point(Vec<f64>),
    /// Independent uniform draws from the body, one per chain.
    UniformPrior,
    /// Chain `c` starts at row `c`; needs at least one row per chain.
    Samples(SampleMatrix),
}

/// `rows × dim` samples stored row-major.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SampleMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SampleMatrix {
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 || !data.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: data.len(),
            });
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows(dim: usize, rows: &[Vec<f64>]) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * dim);
        for r in rows {
            check_dim(dim, r.len())?;
            data.extend_from_slice(r);
        }
        Ok(Self { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len().checked_div(self.dim).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim.max(1))
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Stacks several matrices of equal dimension.
    pub fn concat<'a>(parts: impl IntoIterator<Item = &'a SampleMatrix>) -> Result<Self> {
        let mut dim = 0;
        let mut data = Vec::new();
        for p in parts {
            if dim == 0 {
                dim = p.dim;
            }
            check_dim(dim, p.dim)?;
            data.extend_from_slice(&p.data);
        }
        Ok(Self { dim, data })
    }

    pub fn column_means(&self) -> Vec<f64> {
        let n = self.len() as f64;
        (0..self.dim)
            .map(|j| self.rows().map(|r| r[j]).sum::<f64>() / n)
            .collect()
    }

    /// Population variance of each column.
    pub fn column_variances(&self) -> Vec<f64> {
        let n = self.len() as f64;
        self.column_means()
            .iter()
            .enumerate()
            .map(|(j, m)| self.rows().map(|r| (r[j] - m).powi(2)).sum::<f64>() / n)
            .collect()
    }
}

/// Everything needed to run a batch of chains.
#[derive(Debug, Clone)]
pub struct SamplerConfig {
    pub body: ConvexBody,
    pub field: SkewField,
    pub potential: Potential,
    pub stepsize: f64,
    pub iterations: usize,
    pub chains: usize,
    pub initial: Initial,
    /// Minibatch size; `Some` selects the stochastic-gradient variant.
    pub batch_size: Option<usize>,
    pub seed: u64,
    pub record_every: usize,
    pub reflection: Reflection,
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        let d = self.body.dim();
        check_dim(d, self.field.dim())?;
        check_dim(d, self.potential.dim())?;
        if !(self.stepsize.is_finite() && self.stepsize > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "stepsize {}",
                self.stepsize
            )));
        }
        if self.chains == 0 || self.record_every == 0 {
            return Err(Error::InvalidParameter(
                "chains and record_every must be positive".into(),
            ));
        }
        match &self.initial {
            Initial::Point(x0) => {
                if !self.body.contains(x0)? {
                    return Err(Error::InvalidParameter(format!(
                        "initial point {x0:?} lies outside the body"
                    )));
                }
            }
            Initial::Samples(m) => {
                check_dim(d, m.dim())?;
                if m.len() < self.chains {
                    return Err(Error::InvalidParameter(format!(
                        "{} initial samples for {} chains",
                        m.len(),
                        self.chains
                    )));
                }
                if !m
                    .rows()
                    .take(self.chains)
                    .all(|r| self.body.contains_unchecked(r))
                {
                    return Err(Error::InvalidParameter(
                        "initial sample outside the body".into(),
                    ));
                }
            }
            Initial::UniformPrior => {}
        }
        if let Some(b) = self.batch_size {
            if b == 0 {
                return Err(Error::EmptyBatch);
            }
            let n = self.potential.dataset().map(|ds| ds.len()).ok_or_else(|| {
                Error::InvalidParameter("minibatches need a data-backed potential".into())
            })?;
            if b > n {
                return Err(Error::BatchTooLarge { batch: b, len: n });
            }
        }
        Ok(())
    }

    pub fn algorithm(&self) -> &'static str {
        match (self.reflection, self.batch_size.is_some()) {
            (Reflection::Skew, false) => "SRNLMC",
            (Reflection::Euclidean, false) => "PLMC",
            (Reflection::Skew, true) => "SRNSGLD",
            (Reflection::Euclidean, true) => "PSGLD",
        }
    }

    pub fn sampler(&self) -> Sampler<'_> {
        Sampler::new(&self.body, &self.field, &self.potential, self.stepsize)
    }

    /// Iterations at which states are recorded: multiples of
    /// `record_every` plus the final iteration.
    pub fn recorded_iterations(&self) -> Vec<usize> {
        let mut its: Vec<usize> = (0..=self.iterations).step_by(self.record_every).collect();
        if its.last() != Some(&self.iterations) {
            its.push(self.iterations);
        }
        its
    }
}

/// What happened at the boundary during one step.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepOutcome {
    /// `‖x̃ - x_next‖`, the discrete local-time increment.
    pub correction: f64,
    /// The proposal left the body.
    pub contact: bool,
    /// The skew ray missed and the Euclidean projection was used.
    pub fallback: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub next: Vec<f64>,
    pub outcome: StepOutcome,
}

/// Step kernels bound to a body, field, potential and stepsize.
#[derive(Debug, Clone, Copy)]
pub struct Sampler<'a> {
    body: &'a ConvexBody,
    field: &'a SkewField,
    potential: &'a Potential,
    stepsize: f64,
    noise_scale: f64,
}

/// Scratch buffers reused across steps.
#[derive(Debug, Clone)]
pub struct Workspace {
    grad: Vec<f64>,
    drift: Vec<f64>,
    proposal: Vec<f64>,
    noise: Vec<f64>,
    batch: Vec<usize>,
}

impl Workspace {
    pub fn new(dim: usize) -> Self {
        Self {
            grad: vec![0.0; dim],
            drift: vec![0.0; dim],
            proposal: vec![0.0; dim],
            noise: vec![0.0; dim],
            batch: Vec::new(),
        }
    }
}

impl<'a> Sampler<'a> {
    pub fn new(
        body: &'a ConvexBody,
        field: &'a SkewField,
        potential: &'a Potential,
        stepsize: f64,
    ) -> Self {
        Self {
            body,
            field,
            potential,
            stepsize,
            noise_scale: (2.0 * stepsize).sqrt(),
        }
    }

    fn check(&self, x: &[f64], noise: &[f64]) -> Result<()> {
        let d = self.body.dim();
        check_dim(d, x.len())?;
        check_dim(d, noise.len())?;
        if !self.body.contains(x)? {
            return Err(Error::InvalidParameter(
                "current state lies outside the body".into(),
            ));
        }
        Ok(())
    }

    /// One SRNLMC step from `x` with standard-normal `noise`.
    pub fn srnlmc_step(&self, x: &[f64], noise: &[f64]) -> Result<Step> {
        self.check(x, noise)?;
        let mut ws = Workspace::new(x.len());
        let mut next = x.to_vec();
        self.potential.gradient_into(x, &mut ws.grad);
        let outcome = self.skew_update(&mut next, noise, &mut ws);
        Ok(Step { next, outcome })
    }

    /// One PLMC step: no skew drift, Euclidean projection.
    pub fn plmc_step(&self, x: &[f64], noise: &[f64]) -> Result<Step> {
        self.check(x, noise)?;
        let mut ws = Workspace::new(x.len());
        let mut next = x.to_vec();
        self.potential.gradient_into(x, &mut ws.grad);
        let outcome = self.euclidean_update(&mut next, noise, &mut ws);
        Ok(Step { next, outcome })
    }

    /// One SRNSGLD step using the minibatch gradient over `batch`. With a zero
    /// field this is the PSGLD update.
    pub fn srnsgld_step(&self, x: &[f64], noise: &[f64], batch: &[usize]) -> Result<Step> {
        self.check(x, noise)?;
        let mut ws = Workspace::new(x.len());
        ws.grad = self.potential.stochastic_gradient(x, batch)?;
        let mut next = x.to_vec();
        let outcome = self.skew_update(&mut next, noise, &mut ws);
        Ok(Step { next, outcome })
    }

    /// One PSGLD step: the projected stochastic-gradient baseline.
    pub fn psgld_step(&self, x: &[f64], noise: &[f64], batch: &[usize]) -> Result<Step> {
        self.check(x, noise)?;
        let mut ws = Workspace::new(x.len());
        ws.grad = self.potential.stochastic_gradient(x, batch)?;
        let mut next = x.to_vec();
        let outcome = self.euclidean_update(&mut next, noise, &mut ws);
        Ok(Step { next, outcome })
    }

    /// Skew update of `x` in place, given `ws.grad` already filled.
    fn skew_update(&self, x: &mut [f64], noise: &[f64], ws: &mut Workspace) -> StepOutcome {
        let eta = self.stepsize;
        let s = self.noise_scale;
        if self.field.is_zero() {
            for i in 0..x.len() {
                ws.proposal[i] = x[i] - eta * ws.grad[i] + s * noise[i];
            }
        } else {
            self.field.apply_identity_plus(x, &ws.grad, &mut ws.drift);
            for i in 0..x.len() {
                ws.proposal[i] = x[i] - eta * ws.drift[i] + s * noise[i];
            }
        }
        if self.body.contains_unchecked(&ws.proposal) {
            x.copy_from_slice(&ws.proposal);
            return StepOutcome::default();
        }
        let projected = skew_project_unchecked(self.body, self.field, &ws.proposal);
        x.copy_from_slice(&projected.point);
        StepOutcome {
            correction: distance(&ws.proposal, x),
            contact: true,
            fallback: projected.fallback,
        }
    }

    fn euclidean_update(&self, x: &mut [f64], noise: &[f64], ws: &mut Workspace) -> StepOutcome {
        let eta = self.stepsize;
        let s = self.noise_scale;
        for i in 0..x.len() {
            ws.proposal[i] = x[i] - eta * ws.grad[i] + s * noise[i];
        }
        if self.body.contains_unchecked(&ws.proposal) {
            x.copy_from_slice(&ws.proposal);
            return StepOutcome::default();
        }
        self.body.project_into(&ws.proposal, x);
        StepOutcome {
            correction: distance(&ws.proposal, x),
            contact: true,
            fallback: false,
        }
    }
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(u, v)| (u - v) * (u - v))
        .sum::<f64>()
        .sqrt()
}

fn fill_normals(rng: &mut StreamRng, out: &mut [f64]) {
    for v in out.iter_mut() {
        *v = rng.sample(StandardNormal);
    }
}

/// Record of a multi-chain run.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainTrace {
    pub algorithm: &'static str,
    pub rng_seed: u64,
    pub stepsize: f64,
    pub recorded_iterations: Vec<usize>,
    /// Cross-chain states (`chains × d`) at each recorded iteration.
    pub states: Vec<SampleMatrix>,
    pub final_states: SampleMatrix,
    /// Per-step correction `‖x̃ - x_next‖` summed over chains.
    pub correction_by_step: Vec<f64>,
    pub cumulative_correction: Vec<f64>,
    pub boundary_events: u64,
    pub fallback_count: u64,
}

impl ChainTrace {
    pub fn chains(&self) -> usize {
        self.final_states.len()
    }

    /// All recorded states from iteration `from` on, pooled across chains.
    pub fn pooled_from(&self, from: usize) -> SampleMatrix {
        let parts = self
            .recorded_iterations
            .iter()
            .zip(&self.states)
            .filter(|(it, _)| **it >= from)
            .map(|(_, s)| s);
        SampleMatrix::concat(parts).expect("recorded states share a dimension")
    }

    /// Mean correction per chain per unit physical time over steps
    /// `[start, end)`.
    pub fn correction_rate(&self, start: usize, end: usize) -> f64 {
        let total: f64 = self.correction_by_step[start..end].iter().sum();
        total / (self.chains() as f64 * (end - start) as f64 * self.stepsize)
    }
}

const BLOCK: usize = 32;

struct BlockResult {
    records: Vec<Vec<f64>>,
    finals: Vec<f64>,
    corrections: Vec<f64>,
    contacts: u64,
    fallbacks: u64,
}

/// Runs `cfg.chains` independent chains for `cfg.iterations` steps.
///
/// Chain `c` draws its Brownian increments from stream `(seed, c, Noise)`,
/// its minibatches from `(seed, c, Batch)` and its initial point from
/// `(seed, c, Init)`. Chains are grouped in fixed blocks and reduced in block
/// order, so the trace does not depend on the number of worker threads.
pub fn run_chains(cfg: &SamplerConfig) -> Result<ChainTrace> {
    cfg.validate()?;
    let d = cfg.body.dim();
    let recorded = cfg.recorded_iterations();
    let blocks: Vec<(usize, usize)> = (0..cfg.chains)
        .step_by(BLOCK)
        .map(|start| (start, (start + BLOCK).min(cfg.chains)))
        .collect();
    let results: Vec<BlockResult> = blocks
        .par_iter()
        .map(|&(start, end)| run_block(cfg, &recorded, start, end))
        .collect::<Result<_>>()?;

    let mut states: Vec<Vec<f64>> = vec![Vec::with_capacity(cfg.chains * d); recorded.len()];
    let mut final_states = Vec::with_capacity(cfg.chains * d);
    let mut correction_by_step = vec![0.0; cfg.iterations];
    let mut boundary_events = 0;
    let mut fallback_count = 0;
    for block in results {
        for (dst, src) in states.iter_mut().zip(&block.records) {
            dst.extend_from_slice(src);
        }
        final_states.extend_from_slice(&block.finals);
        for (dst, src) in correction_by_step.iter_mut().zip(&block.corrections) {
            *dst += src;
        }
        boundary_events += block.contacts;
        fallback_count += block.fallbacks;
    }
    let cumulative_correction = correction_by_step
        .iter()
        .scan(0.0, |acc, c| {
            *acc += c;
            Some(*acc)
        })
        .collect();
    Ok(ChainTrace {
        algorithm: cfg.algorithm(),
        rng_seed: cfg.seed,
        stepsize: cfg.stepsize,
        recorded_iterations: recorded,
        states: states
            .into_iter()
            .map(|s| SampleMatrix { dim: d, data: s })
            .collect(),
        final_states: SampleMatrix {
            dim: d,
            data: final_states,
        },
        correction_by_step,
        cumulative_correction,
        boundary_events,
        fallback_count,
    })
}

fn run_block(
    cfg: &SamplerConfig,
    recorded: &[usize],
    start: usize,
    end: usize,
) -> Result<BlockResult> {
    let d = cfg.body.dim();
    let sampler = cfg.sampler();
    let mut ws = Workspace::new(d);
    let mut out = BlockResult {
        records: vec![Vec::with_capacity((end - start) * d); recorded.len()],
        finals: Vec::with_capacity((end - start) * d),
        corrections: vec![0.0; cfg.iterations],
        contacts: 0,
        fallbacks: 0,
    };
    let data_len = cfg.potential.dataset().map_or(0, |ds| ds.len());
    for chain in start..end {
        let c = chain as u64;
        let mut noise_rng = stream(cfg.seed, c, Purpose::Noise);
        let mut batch_rng = stream(cfg.seed, c, Purpose::Batch);
        let mut batcher = Minibatcher::new(data_len);
        let mut x = match &cfg.initial {
            Initial::Point(p) => p.clone(),
            Initial::UniformPrior => {
                cfg.body
                    .sample_uniform(&mut stream(cfg.seed, c, Purpose::Init))
            }
            Initial::Samples(m) => m.row(chain).to_vec(),
        };
        let mut next_record = 0;
        if recorded.first() == Some(&0) {
            out.records[0].extend_from_slice(&x);
            next_record = 1;
        }
        for k in 0..cfg.iterations {
            match cfg.batch_size {
                Some(b) => {
                    ws.batch.clear();
                    ws.batch.extend_from_slice(batcher.draw(b, &mut batch_rng));
                    ws.batch.sort_unstable();
                    cfg.potential
                        .stochastic_gradient_into(&x, &ws.batch, &mut ws.grad);
                }
                None => cfg.potential.gradient_into(&x, &mut ws.grad),
            }
            fill_normals(&mut noise_rng, &mut ws.noise);
            let noise = std::mem::take(&mut ws.noise);
            let outcome = match cfg.reflection {
                Reflection::Skew => sampler.skew_update(&mut x, &noise, &mut ws),
                Reflection::Euclidean => sampler.euclidean_update(&mut x, &noise, &mut ws),
            };
            ws.noise = noise;
            if outcome.contact {
                out.contacts += 1;
                out.corrections[k] += outcome.correction;
            }
            if outcome.fallback {
                out.fallbacks += 1;
            }
            if x.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite { chain, step: k + 1 });
            }
            if next_record < recorded.len() && recorded[next_record] == k + 1 {
                out.records[next_record].extend_from_slice(&x);
                next_record += 1;
            }
        }
        out.finals.extend_from_slice(&x);
    }
    Ok(out)
}

/// I.i.d. standard-normal draws conditioned on the body.
#[derive(Debug, Clone, PartialEq)]
pub struct RejectionSample {
    pub samples: SampleMatrix,
    pub proposals: u64,
}

impl RejectionSample {
    pub fn acceptance_rate(&self) -> f64 {
        self.samples.len() as f64 / self.proposals as f64
    }
}

/// Draws `count` standard-normal vectors and keeps those inside `body`.
pub fn rejection_sample_truncated_gaussian(
    body: &ConvexBody,
    count: usize,
    seed: u64,
) -> Result<RejectionSample> {
    rejection_sample_with_cap(body, count, seed, REJECTION_CAP)
}

pub(crate) fn rejection_sample_with_cap(
    body: &ConvexBody,
    count: usize,
    seed: u64,
    cap: u64,
) -> Result<RejectionSample> {
    if count == 0 {
        return Err(Error::InvalidParameter("count must be ≥ 1".into()));
    }
    let d = body.dim();
    let mut rng = stream(seed, 0, Purpose::Reference);
    let mut data = Vec::with_capacity(count * d);
    let mut proposal = vec![0.0; d];
    let mut proposals = 0u64;
    let mut accepted = 0;
    while accepted < count {
        if proposals >= cap {
            return Err(Error::RejectionCapExceeded { cap, accepted });
        }
        proposals += 1;
        fill_normals(&mut rng, &mut proposal);
        if body.contains_unchecked(&proposal) {
            data.extend_from_slice(&proposal);
            accepted += 1;
        }
    }
    Ok(RejectionSample {
        samples: SampleMatrix { dim: d, data },
        proposals,
    })
}

/// Inputs for [`coupled_pair_run`].
#[derive(Debug, Clone)]
pub struct CoupledConfig {
    /// Symmetric positive semi-definite `H` of `f(x) = ½ xᵀHx`.
    pub hessian: nalgebra::DMatrix<f64>,
    pub field: SkewField,
    pub body: ConvexBody,
    pub stepsize: f64,
    pub iterations: usize,
    pub seed: u64,
    pub x0: Vec<f64>,
    pub x0_tilde: Vec<f64>,
    pub record_every: usize,
}

/// Weighted distance between two synchronously coupled SRNLMC chains.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledRun {
    pub iterations: Vec<usize>,
    pub times: Vec<f64>,
    /// `(x_k - x̃_k)ᵀ (I + J)⁻¹ (x_k - x̃_k)`.
    pub weighted: Vec<f64>,
    pub boundary_events: u64,
    pub fallbacks: u64,
}

/// Runs two SRNLMC chains on `f = ½ xᵀHx` that share every Brownian
/// increment. Each chain applies its own skew projection.
pub fn coupled_pair_run(cfg: &CoupledConfig) -> Result<CoupledRun> {
    let d = cfg.body.dim();
    check_dim(d, cfg.x0.len())?;
    check_dim(d, cfg.x0_tilde.len())?;
    check_dim(d, cfg.field.dim())?;
    if cfg.record_every == 0 {
        return Err(Error::InvalidParameter(
            "record_every must be positive".into(),
        ));
    }
    let potential = Potential::quadratic(cfg.hessian.clone())?;
    check_dim(d, potential.dim())?;
    let resolvent = resolvent_symmetric_part(cfg.field.matrix_at(&cfg.x0))?;
    let sampler = Sampler::new(&cfg.body, &cfg.field, &potential, cfg.stepsize);
    for x in [&cfg.x0, &cfg.x0_tilde] {
        if !cfg.body.contains(x)? {
            return Err(Error::InvalidParameter(format!(
                "{x:?} lies outside the body"
            )));
        }
    }

    let mut x = cfg.x0.clone();
    let mut y = cfg.x0_tilde.clone();
    let mut ws_x = Workspace::new(d);
    let mut ws_y = Workspace::new(d);
    let mut noise = vec![0.0; d];
    let mut rng = stream(cfg.seed, 0, Purpose::Noise);
    let mut diff = vec![0.0; d];
    let mut run = CoupledRun {
        iterations: Vec::new(),
        times: Vec::new(),
        weighted: Vec::new(),
        boundary_events: 0,
        fallbacks: 0,
    };
    let mut record = |k: usize, x: &[f64], y: &[f64], run: &mut CoupledRun| {
        for i in 0..d {
            diff[i] = x[i] - y[i];
        }
        run.iterations.push(k);
        run.times.push(k as f64 * cfg.stepsize);
        run.weighted.push(resolvent.weighted_sq_norm(&diff));
    };
    record(0, &x, &y, &mut run);
    for k in 1..=cfg.iterations {
        fill_normals(&mut rng, &mut noise);
        for (state, ws) in [(&mut x, &mut ws_x), (&mut y, &mut ws_y)] {
            potential.gradient_into(state, &mut ws.grad);
            let outcome = sampler.skew_update(state, &noise, ws);
            run.boundary_events += outcome.contact as u64;
            run.fallbacks += outcome.fallback as u64;
        }
        if k % cfg.record_every == 0 || k == cfg.iterations {
            record(k, &x, &y, &mut run);
        }
    }
    Ok(run)
}
