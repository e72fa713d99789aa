//! Bounded convex constraint bodies.
//!
//! A [`ConvexBody`] provides the five primitives every boundary operator is
//! built from: membership, Euclidean projection, the inner unit normal at the
//! projection of an exterior point, ray entry, and uniform sampling.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

/// Slack for membership tests.
pub const MEMBERSHIP_TOL: f64 = 1e-12;

/// Slack for "lies on the boundary" assertions.
pub const BOUNDARY_TOL: f64 = 1e-9;

/// Shape of a body, as written in experiment configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BodySpec {
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    #[serde(rename = "box")]
    AxisBox {
        lower: Vec<f64>,
        upper: Vec<f64>,
    },
}

impl BodySpec {
    pub fn build(&self) -> Result<ConvexBody> {
        match self {
            BodySpec::Ball { center, radius } => ConvexBody::ball(center.clone(), *radius),
            BodySpec::AxisBox { lower, upper } => {
                ConvexBody::axis_box(lower.clone(), upper.clone())
            }
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            BodySpec::Ball { center, .. } => center.len(),
            BodySpec::AxisBox { lower, .. } => lower.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Shape {
    Ball { center: Vec<f64>, radius: f64 },
    AxisBox { lower: Vec<f64>, upper: Vec<f64> },
}

/// A bounded convex body containing the origin.
///
/// `inner_radius` and `outer_radius` are the radii `r ≤ R` of origin-centred
/// balls with `B(0, r) ⊆ body ⊆ B(0, R)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexBody {
    shape: Shape,
    inner_radius: f64,
    outer_radius: f64,
}

/// Result of casting a ray at a body from outside.
#[derive(Debug, Clone, PartialEq)]
pub enum RayEntry {
    Hit { t: f64, point: Vec<f64> },
    Miss,
}

impl RayEntry {
    pub fn is_miss(&self) -> bool {
        matches!(self, RayEntry::Miss)
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

impl ConvexBody {
    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        if center.is_empty() {
            return Err(Error::InvalidBody("ball must have dimension ≥ 1".into()));
        }
        if !(radius.is_finite() && radius > 0.0) || center.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidBody(format!(
                "ball needs finite center and positive radius, got radius {radius}"
            )));
        }
        let offset = norm(&center);
        let inner = radius - offset;
        if inner <= 0.0 {
            return Err(Error::InvalidBody(
                "ball does not contain the origin in its interior".into(),
            ));
        }
        Ok(Self {
            shape: Shape::Ball { center, radius },
            inner_radius: inner,
            outer_radius: radius + offset,
        })
    }

    /// The origin-centred ball of the given radius.
    pub fn centered_ball(dim: usize, radius: f64) -> Result<Self> {
        Self::ball(vec![0.0; dim], radius)
    }

    pub fn axis_box(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        check_dim(lower.len(), upper.len())?;
        if lower.is_empty() {
            return Err(Error::InvalidBody("box must have dimension ≥ 1".into()));
        }
        for (i, (l, u)) in lower.iter().zip(&upper).enumerate() {
            if !(l.is_finite() && u.is_finite() && l < u) {
                return Err(Error::InvalidBody(format!(
                    "box side {i} needs finite lower < upper, got [{l}, {u}]"
                )));
            }
        }
        let inner = lower
            .iter()
            .zip(&upper)
            .map(|(l, u)| (-l).min(*u))
            .fold(f64::INFINITY, f64::min);
        if inner <= 0.0 {
            return Err(Error::InvalidBody(
                "box does not contain the origin in its interior".into(),
            ));
        }
        let outer = lower
            .iter()
            .zip(&upper)
            .map(|(l, u)| (l * l).max(u * u))
            .sum::<f64>()
            .sqrt();
        Ok(Self {
            shape: Shape::AxisBox { lower, upper },
            inner_radius: inner,
            outer_radius: outer,
        })
    }

    /// The cube `[-half_width, half_width]^dim`.
    pub fn cube(dim: usize, half_width: f64) -> Result<Self> {
        Self::axis_box(vec![-half_width; dim], vec![half_width; dim])
    }

    pub fn dim(&self) -> usize {
        match &self.shape {
            Shape::Ball { center, .. } => center.len(),
            Shape::AxisBox { lower, .. } => lower.len(),
        }
    }

    pub fn inner_radius(&self) -> f64 {
        self.inner_radius
    }

    pub fn outer_radius(&self) -> f64 {
        self.outer_radius
    }

    pub fn spec(&self) -> BodySpec {
        match &self.shape {
            Shape::Ball { center, radius } => BodySpec::Ball {
                center: center.clone(),
                radius: *radius,
            },
            Shape::AxisBox { lower, upper } => BodySpec::AxisBox {
                lower: lower.clone(),
                upper: upper.clone(),
            },
        }
    }

    pub fn contains(&self, x: &[f64]) -> Result<bool> {
        check_dim(self.dim(), x.len())?;
        Ok(self.contains_unchecked(x))
    }

    pub(crate) fn contains_unchecked(&self, x: &[f64]) -> bool {
        match &self.shape {
            Shape::Ball { center, radius } => {
                let r2: f64 = x.iter().zip(center).map(|(a, c)| (a - c) * (a - c)).sum();
                r2.sqrt() <= radius + MEMBERSHIP_TOL
            }
            Shape::AxisBox { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper))
                .all(|(a, (l, u))| *a >= l - MEMBERSHIP_TOL && *a <= u + MEMBERSHIP_TOL),
        }
    }

    /// Euclidean nearest point in the closed body.
    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), x.len())?;
        let mut out = vec![0.0; x.len()];
        self.project_into(x, &mut out);
        Ok(out)
    }

    /// [`ConvexBody::project`] into a caller-owned buffer. Dimensions are not
    /// checked.
    pub fn project_into(&self, x: &[f64], out: &mut [f64]) {
        match &self.shape {
            Shape::Ball { center, radius } => {
                let dist = x
                    .iter()
                    .zip(center)
                    .map(|(a, c)| (a - c) * (a - c))
                    .sum::<f64>()
                    .sqrt();
                if dist <= *radius {
                    out.copy_from_slice(x);
                } else {
                    let scale = radius / dist;
                    for ((o, a), c) in out.iter_mut().zip(x).zip(center) {
                        *o = c + (a - c) * scale;
                    }
                }
            }
            Shape::AxisBox { lower, upper } => {
                for (i, o) in out.iter_mut().enumerate() {
                    *o = x[i].clamp(lower[i], upper[i]);
                }
            }
        }
    }

    /// Euclidean distance from `x` to the body.
    pub fn distance(&self, x: &[f64]) -> Result<f64> {
        let p = self.project(x)?;
        Ok(x.iter()
            .zip(&p)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt())
    }

    /// Distance from a point of the body to its complement.
    pub fn depth(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        Ok(match &self.shape {
            Shape::Ball { center, radius } => {
                radius
                    - x.iter()
                        .zip(center)
                        .map(|(a, c)| (a - c) * (a - c))
                        .sum::<f64>()
                        .sqrt()
            }
            Shape::AxisBox { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper))
                .map(|(a, (l, u))| (a - l).min(u - a))
                .fold(f64::INFINITY, f64::min),
        })
    }

    /// Inner unit normal `(P(x) - x) / ‖P(x) - x‖` at the projection of an
    /// exterior point. At box edges and corners this picks the normal-cone
    /// element pointing back at `x`.
    pub fn inner_normal(&self, x: &[f64]) -> Result<Vec<f64>> {
        let p = self.project(x)?;
        let mut nu: Vec<f64> = p.iter().zip(x).map(|(a, b)| a - b).collect();
        let len = norm(&nu);
        if len <= MEMBERSHIP_TOL {
            return Err(Error::InteriorPoint);
        }
        nu.iter_mut().for_each(|v| *v /= len);
        Ok(nu)
    }

    /// Smallest `t > 0` with `origin + t·direction` in the closed body.
    pub fn ray_entry(&self, origin: &[f64], direction: &[f64]) -> Result<RayEntry> {
        check_dim(self.dim(), origin.len())?;
        check_dim(self.dim(), direction.len())?;
        if norm(direction) == 0.0 {
            return Err(Error::ZeroDirection);
        }
        if self.contains_unchecked(origin) {
            return Err(Error::OriginInside);
        }
        let t = match &self.shape {
            Shape::Ball { center, radius } => ball_entry(center, *radius, origin, direction),
            Shape::AxisBox { lower, upper } => slab_entry(lower, upper, origin, direction),
        };
        Ok(match t {
            Some(t) => {
                let mut point: Vec<f64> = origin
                    .iter()
                    .zip(direction)
                    .map(|(o, d)| o + t * d)
                    .collect();
                if let Shape::AxisBox { lower, upper } = &self.shape {
                    for (i, p) in point.iter_mut().enumerate() {
                        *p = p.clamp(lower[i], upper[i]);
                    }
                }
                RayEntry::Hit { t, point }
            }
            None => RayEntry::Miss,
        })
    }

    /// A uniform draw from the body.
    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        match &self.shape {
            Shape::Ball { center, radius } => {
                let d = center.len();
                let mut dir: Vec<f64> = loop {
                    let g: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
                    if norm(&g) > 0.0 {
                        break g;
                    }
                };
                let len = norm(&dir);
                let u: f64 = rng.random();
                let scale = radius * u.powf(1.0 / d as f64) / len;
                for (v, c) in dir.iter_mut().zip(center) {
                    *v = c + *v * scale;
                }
                dir
            }
            Shape::AxisBox { lower, upper } => lower
                .iter()
                .zip(upper)
                .map(|(l, u)| rng.random_range(*l..=*u))
                .collect(),
        }
    }
}

/// Smaller positive root of `‖o + t·d - c‖² = r²` for `o` outside the ball.
fn ball_entry(center: &[f64], radius: f64, origin: &[f64], dir: &[f64]) -> Option<f64> {
    let mut a = 0.0;
    let mut b = 0.0;
    let mut c = 0.0;
    for ((o, d), m) in origin.iter().zip(dir).zip(center) {
        let rel = o - m;
        a += d * d;
        b += rel * d;
        c += rel * rel;
    }
    c -= radius * radius;
    // Both roots share the sign of -b when c > 0.
    if b >= 0.0 {
        return None;
    }
    let disc = b * b - a * c;
    if disc < 0.0 {
        return None;
    }
    // c / (-b + √disc) is the small root without cancellation.
    Some(c.max(0.0) / (-b + disc.sqrt()))
}

fn slab_entry(lower: &[f64], upper: &[f64], origin: &[f64], dir: &[f64]) -> Option<f64> {
    let mut enter = f64::NEG_INFINITY;
    let mut exit = f64::INFINITY;
    for i in 0..origin.len() {
        let (o, d) = (origin[i], dir[i]);
        if d == 0.0 {
            if o < lower[i] - MEMBERSHIP_TOL || o > upper[i] + MEMBERSHIP_TOL {
                return None;
            }
            continue;
        }
        let ta = (lower[i] - o) / d;
        let tb = (upper[i] - o) / d;
        enter = enter.max(ta.min(tb));
        exit = exit.min(ta.max(tb));
    }
    if enter <= exit && exit > 0.0 && enter > 0.0 {
        Some(enter)
    } else {
        None
    }
}
