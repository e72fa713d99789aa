//! Constrained Langevin sampling on bounded convex bodies.
//!
//! The crate implements the skew-reflected non-reversible Langevin Monte
//! Carlo sampler (SRNLMC), its minibatch variant (SRNSGLD), and the
//! reversible projected baselines (PLMC, PSGLD). A non-reversible drift
//! `-(I + J) ∇f` is paired with an oblique boundary correction along the skew
//! normal `(I + J) ν`, so the Gibbs measure `exp(-f)` restricted to the body
//! stays invariant while the chain mixes faster.
//!
//! Layout:
//!
//! * [`geometry`]: convex bodies with projection, inner normals and ray casting.
//! * [`skew`]: antisymmetric fields, the skew normal, skew reflection/projection
//!   and the resolvent symmetric part `(I - J²)⁻¹`.
//! * [`targets`]: potentials with exact and minibatch gradients.
//! * [`data`]: synthetic generators, CSV loaders and preprocessing.
//! * [`samplers`]: step kernels, multi-chain runner, rejection reference and
//!   synchronously coupled pairs.
//! * [`metrics`]: 1-Wasserstein distances, MSE, accuracy, exponential fits.
//! * [`experiments`]: declarative configs and the experiment drivers behind
//!   the `skewflect` CLI.

pub mod data;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod metrics;
pub mod rng;
pub mod samplers;
pub mod skew;
pub mod targets;

pub use data::Dataset;
pub use error::{Error, Result};
pub use geometry::{ConvexBody, RayEntry};
pub use metrics::{ExpFit, W1Report};
pub use samplers::{
    ChainTrace, CoupledRun, Initial, Reflection, SampleMatrix, Sampler, SamplerConfig, StepOutcome,
};
pub use skew::{ResolventSummary, SkewField, SkewProjection};
pub use targets::Potential;
