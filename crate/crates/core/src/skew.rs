//! Antisymmetric drift fields and oblique boundary maps.
//!
//! A [`SkewField`] supplies `J(x)` with `J + Jᵀ = 0`. The skew normal
//! `ν^J = (I + J)ν / √(‖ν‖² + ‖Jν‖²)` tilts the inner normal `ν`, and the skew
//! projection moves an exterior point back to the boundary along `ν^J`
//! evaluated at the Euclidean foot point.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::geometry::{ConvexBody, RayEntry};

pub const ANTISYMMETRY_TOL: f64 = 1e-12;

/// Field description used in experiment configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SkewSpec {
    Zero,
    Tridiagonal { a: f64 },
    Constant { matrix: Vec<Vec<f64>> },
}

impl SkewSpec {
    pub fn build(&self, dim: usize) -> Result<SkewField> {
        match self {
            SkewSpec::Zero => Ok(SkewField::zero(dim)),
            SkewSpec::Tridiagonal { a } => SkewField::tridiagonal(dim, *a),
            SkewSpec::Constant { matrix } => {
                check_dim(dim, matrix.len())?;
                for row in matrix {
                    check_dim(dim, row.len())?;
                }
                SkewField::constant(DMatrix::from_fn(dim, dim, |i, j| matrix[i][j]))
            }
        }
    }

    /// Short label used in report files.
    pub fn label(&self) -> String {
        match self {
            SkewSpec::Zero => "zero".into(),
            SkewSpec::Tridiagonal { a } => format!("J_{a}"),
            SkewSpec::Constant { .. } => "constant".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SkewKind {
    Zero,
    Constant,
    Tridiagonal { a: f64 },
}

/// A state-independent antisymmetric matrix field.
///
/// All kinds are constant in `x`, so the Lipschitz constant `L_J` is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewField {
    kind: SkewKind,
    matrix: DMatrix<f64>,
    sup_norm: f64,
    zero: bool,
}

fn max_asymmetry(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            worst = worst.max((m[(i, j)] + m[(j, i)]).abs());
        }
    }
    worst
}

fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.iter().all(|v| *v == 0.0) {
        return 0.0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .cloned()
        .fold(0.0, f64::max)
}

impl SkewField {
    pub fn zero(dim: usize) -> Self {
        Self {
            kind: SkewKind::Zero,
            matrix: DMatrix::zeros(dim, dim),
            sup_norm: 0.0,
            zero: true,
        }
    }

    pub fn constant(matrix: DMatrix<f64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                got: matrix.ncols(),
            });
        }
        let asym = max_asymmetry(&matrix);
        if asym > ANTISYMMETRY_TOL || matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::NotAntisymmetric(asym));
        }
        Ok(Self::from_parts(SkewKind::Constant, matrix))
    }

    /// `a` on the superdiagonal, `-a` on the subdiagonal.
    pub fn tridiagonal(dim: usize, a: f64) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidParameter(format!(
                "tridiagonal skew field needs dimension ≥ 2, got {dim}"
            )));
        }
        if !a.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "non-finite skew parameter {a}"
            )));
        }
        let matrix = DMatrix::from_fn(dim, dim, |i, j| {
            if j == i + 1 {
                a
            } else if i == j + 1 {
                -a
            } else {
                0.0
            }
        });
        Ok(Self::from_parts(SkewKind::Tridiagonal { a }, matrix))
    }

    fn from_parts(kind: SkewKind, matrix: DMatrix<f64>) -> Self {
        let zero = matrix.iter().all(|v| *v == 0.0);
        let sup_norm = spectral_norm(&matrix);
        Self {
            kind,
            matrix,
            sup_norm,
            zero,
        }
    }

    pub fn kind(&self) -> SkewKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// True when `J ≡ 0`; boundary handling then reduces to Euclidean
    /// projection.
    pub fn is_zero(&self) -> bool {
        self.zero
    }

    /// `J(x)`.
    pub fn matrix_at(&self, _x: &[f64]) -> &DMatrix<f64> {
        &self.matrix
    }

    /// `sup_x ‖J(x)‖` in spectral norm.
    pub fn sup_norm(&self) -> f64 {
        self.sup_norm
    }

    /// Lipschitz constant of `x ↦ J(x)`.
    pub fn lipschitz(&self) -> f64 {
        0.0
    }

    /// Lower bound `δ₀` on `⟨ν^J, ν⟩` over all unit normals.
    pub fn delta0(&self) -> f64 {
        1.0 / (1.0 + self.sup_norm * self.sup_norm).sqrt()
    }

    /// `out = (I + J(x)) v`. Dimensions are not checked.
    pub fn apply_identity_plus(&self, x: &[f64], v: &[f64], out: &mut [f64]) {
        let j = self.matrix_at(x);
        let n = v.len();
        for i in 0..n {
            let mut acc = v[i];
            for k in 0..n {
                acc += j[(i, k)] * v[k];
            }
            out[i] = acc;
        }
    }
}

/// Skew unit normal `(I + J)ν / √(‖ν‖² + ‖Jν‖²)`.
pub fn skew_normal(j: &DMatrix<f64>, nu: &[f64]) -> Result<Vec<f64>> {
    check_dim(j.nrows(), nu.len())?;
    check_dim(j.nrows(), j.ncols())?;
    let len = nu.iter().map(|v| v * v).sum::<f64>().sqrt();
    if (len - 1.0).abs() > 1e-10 {
        return Err(Error::NonUnitNormal(len));
    }
    let asym = max_asymmetry(j);
    if asym > ANTISYMMETRY_TOL {
        return Err(Error::NotAntisymmetric(asym));
    }
    let n = nu.len();
    let mut out = vec![0.0; n];
    let mut jnu_sq = 0.0;
    for i in 0..n {
        let mut jv = 0.0;
        for k in 0..n {
            jv += j[(i, k)] * nu[k];
        }
        jnu_sq += jv * jv;
        out[i] = nu[i] + jv;
    }
    let scale = (len * len + jnu_sq).sqrt();
    out.iter_mut().for_each(|v| *v /= scale);
    Ok(out)
}

/// `R^J(x) = (I + J(x))(P(x) - x) + P(x)`.
pub fn skew_reflect(body: &ConvexBody, field: &SkewField, x: &[f64]) -> Result<Vec<f64>> {
    check_dim(field.dim(), x.len())?;
    let p = body.project(x)?;
    let diff: Vec<f64> = p.iter().zip(x).map(|(a, b)| a - b).collect();
    let mut out = vec![0.0; x.len()];
    field.apply_identity_plus(x, &diff, &mut out);
    for (o, pi) in out.iter_mut().zip(&p) {
        *o += pi;
    }
    Ok(out)
}

/// Output of [`skew_project`].
#[derive(Debug, Clone, PartialEq)]
pub struct SkewProjection {
    pub point: Vec<f64>,
    /// The skew ray missed the body and the Euclidean projection was used.
    pub fallback: bool,
}

/// Moves `x` onto the body along the skew normal at its Euclidean foot point.
///
/// Interior points are returned unchanged. For exterior points the ray
/// `x + t·ν^J(P(x))` is cast at the body and its first entry point returned;
/// if it misses, the Euclidean projection is returned with `fallback` set.
/// With a zero field this is exactly the Euclidean projection.
pub fn skew_project(body: &ConvexBody, field: &SkewField, x: &[f64]) -> Result<SkewProjection> {
    check_dim(body.dim(), x.len())?;
    check_dim(field.dim(), x.len())?;
    Ok(skew_project_unchecked(body, field, x))
}

pub(crate) fn skew_project_unchecked(
    body: &ConvexBody,
    field: &SkewField,
    x: &[f64],
) -> SkewProjection {
    if body.contains_unchecked(x) {
        return SkewProjection {
            point: x.to_vec(),
            fallback: false,
        };
    }
    let mut foot = vec![0.0; x.len()];
    body.project_into(x, &mut foot);
    if field.is_zero() {
        return SkewProjection {
            point: foot,
            fallback: false,
        };
    }
    let entry = body
        .inner_normal(x)
        .and_then(|nu| skew_normal(field.matrix_at(&foot), &nu))
        .and_then(|dir| body.ray_entry(x, &dir));
    match entry {
        Ok(RayEntry::Hit { point, .. }) => SkewProjection {
            point,
            fallback: false,
        },
        _ => SkewProjection {
            point: foot,
            fallback: true,
        },
    }
}

/// Symmetric part of `(I + J)⁻¹` and its spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolventSummary {
    /// `S = (I - J²)⁻¹`.
    pub s: DMatrix<f64>,
    /// Eigenvalues of `S`, ascending.
    pub eigenvalues: Vec<f64>,
}

impl ResolventSummary {
    /// Smallest eigenvalue `c`.
    pub fn smallest(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// Largest eigenvalue `C`.
    pub fn largest(&self) -> f64 {
        *self.eigenvalues.last().expect("non-empty spectrum")
    }

    /// `vᵀ S v`, which equals `vᵀ (I + J)⁻¹ v`.
    pub fn weighted_sq_norm(&self, v: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (i, vi) in v.iter().enumerate() {
            let row: f64 = v
                .iter()
                .enumerate()
                .map(|(k, vk)| self.s[(i, k)] * vk)
                .sum();
            acc += vi * row;
        }
        acc
    }
}

/// Computes `S = (I - J²)⁻¹` by a Cholesky solve and its eigenvalues.
///
/// For antisymmetric `J`, `I - J² = I + JᵀJ` is symmetric positive definite
/// and equals `(I + J)(I - J)`, so `S` is the symmetric part of `(I + J)⁻¹`.
pub fn resolvent_symmetric_part(j: &DMatrix<f64>) -> Result<ResolventSummary> {
    check_dim(j.nrows(), j.ncols())?;
    let asym = max_asymmetry(j);
    if asym > ANTISYMMETRY_TOL {
        return Err(Error::NotAntisymmetric(asym));
    }
    let n = j.nrows();
    let gram = DMatrix::<f64>::identity(n, n) + j.transpose() * j;
    let chol = gram
        .cholesky()
        .ok_or_else(|| Error::InvalidParameter("I - J² is not positive definite".into()))?;
    let s = chol.solve(&DMatrix::identity(n, n));
    let s = (&s + s.transpose()) * 0.5;
    let mut eigenvalues: Vec<f64> = s
        .clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .cloned()
        .collect();
    eigenvalues.sort_by(f64::total_cmp);
    Ok(ResolventSummary { s, eigenvalues })
}

/// Solves `(I + J) y = v` for a constant field; exposed for cross-checks of
/// the weighted norm.
pub fn solve_identity_plus(j: &DMatrix<f64>, v: &[f64]) -> Result<Vec<f64>> {
    check_dim(j.nrows(), v.len())?;
    let n = v.len();
    let a = DMatrix::<f64>::identity(n, n) + j;
    let y = a
        .lu()
        .solve(&DVector::from_column_slice(v))
        .ok_or_else(|| Error::InvalidParameter("I + J is singular".into()))?;
    Ok(y.iter().cloned().collect())
}
