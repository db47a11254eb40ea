//! Real inner-product-space primitives.
//!
//! Vectors are coordinates in an orthonormal ambient basis. Every subspace
//! computation goes through [`OrthoBasis`], an incrementally built orthonormal
//! basis using classical Gram-Schmidt with one re-orthogonalization pass.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default threshold separating genuine linear dependence from rounding noise.
pub const TOL_RANK: f64 = 1e-9;

/// Tolerance on `‖t‖ = 1` for inputs that must be unit vectors.
pub const UNIT_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::EmptyVector);
        }
        if let Some(index) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self(coords))
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be positive");
        Self(vec![0.0; dim])
    }

    /// The `i`-th ambient basis vector `|i⟩`.
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.0[i] = 1.0;
        v
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }

    pub fn norm_sq(&self) -> f64 {
        dot(&self.0, &self.0)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn inner(&self, other: &Vector) -> Result<f64> {
        inner(self, other)
    }

    pub fn normalize(&self) -> Result<Vector> {
        normalize(self)
    }

    pub fn is_unit(&self) -> bool {
        (self.norm() - 1.0).abs() <= UNIT_TOL
    }
}

impl TryFrom<Vec<f64>> for Vector {
    type Error = Error;

    fn try_from(coords: Vec<f64>) -> Result<Self> {
        Vector::new(coords)
    }
}

impl From<Vector> for Vec<f64> {
    fn from(v: Vector) -> Self {
        v.0
    }
}

pub(crate) fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

/// `u ← u − c·v`
pub(crate) fn axpy_neg(u: &mut [f64], c: f64, v: &[f64]) {
    for (a, b) in u.iter_mut().zip(v) {
        *a -= c * b;
    }
}

fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

pub fn inner(u: &Vector, v: &Vector) -> Result<f64> {
    check_dims(u.dim(), v.dim())?;
    Ok(dot(&u.0, &v.0))
}

pub fn normalize(v: &Vector) -> Result<Vector> {
    let norm = v.norm();
    if norm <= TOL_RANK {
        return Err(Error::NearZero { norm });
    }
    Ok(Vector(v.0.iter().map(|c| c / norm).collect()))
}

/// Orthonormal basis grown one source vector at a time.
#[derive(Clone, Debug)]
pub struct OrthoBasis {
    dim: usize,
    vectors: Vec<Vector>,
    source_indices: Vec<usize>,
    dependent: Vec<usize>,
    tol_rank: f64,
}

impl OrthoBasis {
    pub fn new(dim: usize) -> Self {
        Self::with_tol(dim, TOL_RANK)
    }

    pub fn with_tol(dim: usize, tol_rank: f64) -> Self {
        Self {
            dim,
            vectors: Vec::new(),
            source_indices: Vec::new(),
            dependent: Vec::new(),
            tol_rank,
        }
    }

    /// Builds a basis for the span of `elements`, silently skipping dependent ones.
    /// Source indices are positions within the iterator.
    pub fn from_elements<'a, I>(dim: usize, elements: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a Vector>,
    {
        let mut basis = Self::new(dim);
        for (i, v) in elements.into_iter().enumerate() {
            basis.push(v, i)?;
        }
        Ok(basis)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[Vector] {
        &self.vectors
    }

    pub fn source_indices(&self) -> &[usize] {
        &self.source_indices
    }

    /// Sources that were found to lie in the span of their predecessors.
    pub fn dependent_indices(&self) -> &[usize] {
        &self.dependent
    }

    pub fn tol_rank(&self) -> f64 {
        self.tol_rank
    }

    /// Component of `v` orthogonal to the span (not normalized).
    pub fn residual(&self, v: &Vector) -> Result<Vector> {
        check_dims(self.dim, v.dim())?;
        Ok(Vector(self.residual_raw(&v.0)))
    }

    pub(crate) fn residual_raw(&self, v: &[f64]) -> Vec<f64> {
        let mut w = v.to_vec();
        // classical Gram-Schmidt, twice
        for _ in 0..2 {
            let coeffs: Vec<f64> = self.vectors.iter().map(|q| dot(&q.0, &w)).collect();
            for (q, c) in self.vectors.iter().zip(coeffs) {
                axpy_neg(&mut w, c, &q.0);
            }
        }
        w
    }

    /// `‖𝒫_v(span)‖²`, the squared norm of the projection of `v`.
    pub fn project_norm_sq(&self, v: &Vector) -> Result<f64> {
        check_dims(self.dim, v.dim())?;
        Ok(self.project_norm_sq_raw(&v.0))
    }

    pub(crate) fn project_norm_sq_raw(&self, v: &[f64]) -> f64 {
        self.vectors
            .iter()
            .map(|q| {
                let c = dot(&q.0, v);
                c * c
            })
            .sum()
    }

    /// Appends the normalized residual of `v` when it exceeds `tol_rank`; otherwise
    /// records `source` as dependent. Returns the residual norm.
    pub fn push(&mut self, v: &Vector, source: usize) -> Result<f64> {
        check_dims(self.dim, v.dim())?;
        let w = self.residual_raw(&v.0);
        let residual_norm = dot(&w, &w).sqrt();
        if residual_norm > self.tol_rank {
            self.vectors
                .push(Vector(w.into_iter().map(|c| c / residual_norm).collect()));
            self.source_indices.push(source);
        } else {
            self.dependent.push(source);
        }
        Ok(residual_norm)
    }

    /// Non-mutating form of [`OrthoBasis::push`].
    pub fn extend(&self, v: &Vector, source: usize) -> Result<(OrthoBasis, f64)> {
        let mut next = self.clone();
        let residual_norm = next.push(v, source)?;
        Ok((next, residual_norm))
    }

    /// Largest `|⟨q_i, q_j⟩|` over `i ≠ j` and largest `|‖q_i‖² − 1|`.
    pub fn orthonormality_error(&self) -> (f64, f64) {
        let mut off = 0.0f64;
        let mut diag = 0.0f64;
        for (i, qi) in self.vectors.iter().enumerate() {
            diag = diag.max((qi.norm_sq() - 1.0).abs());
            for qj in &self.vectors[i + 1..] {
                off = off.max(dot(&qi.0, &qj.0).abs());
            }
        }
        (off, diag)
    }
}

/// Normalized parallel and orthogonal components of a unit vector relative to a span,
/// with `t = t⊥ sin φ + t̄ cos φ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub parallel: Option<Vector>,
    pub orthogonal: Option<Vector>,
    pub angle: f64,
}

impl Decomposition {
    /// `t⊥ sin φ + t̄ cos φ`
    pub fn reconstruct(&self, dim: usize) -> Vector {
        let mut out = vec![0.0; dim];
        let (s, c) = self.angle.sin_cos();
        if let Some(p) = &self.parallel {
            axpy_neg(&mut out, -c, &p.0);
        }
        if let Some(o) = &self.orthogonal {
            axpy_neg(&mut out, -s, &o.0);
        }
        Vector(out)
    }
}

fn check_all_dims<'a>(dim: usize, elements: impl IntoIterator<Item = &'a Vector>) -> Result<()> {
    elements
        .into_iter()
        .try_for_each(|e| check_dims(dim, e.dim()))
}

/// `f(E) = ‖𝒫_η(E)‖²`; zero for the empty set.
pub fn project_norm_sq<'a, I>(eta: &Vector, elements: I) -> Result<f64>
where
    I: IntoIterator<Item = &'a Vector>,
{
    let basis = OrthoBasis::from_elements(eta.dim(), elements)?;
    Ok(basis.project_norm_sq_raw(&eta.0))
}

pub fn decompose<'a, I>(t: &Vector, elements: I) -> Result<Decomposition>
where
    I: IntoIterator<Item = &'a Vector>,
{
    if !t.is_unit() {
        return Err(Error::NotUnit { norm: t.norm() });
    }
    let basis = OrthoBasis::from_elements(t.dim(), elements)?;
    let w = basis.residual_raw(&t.0);
    let mut p = t.0.clone();
    for (pi, wi) in p.iter_mut().zip(&w) {
        *pi -= wi;
    }
    let w_norm = dot(&w, &w).sqrt();
    let p_norm = dot(&p, &p).sqrt();
    let tol = basis.tol_rank;

    let orthogonal = (w_norm > tol).then(|| Vector(w.iter().map(|c| c / w_norm).collect()));
    let parallel = (p_norm > tol).then(|| Vector(p.iter().map(|c| c / p_norm).collect()));
    let angle = match (&parallel, &orthogonal) {
        (_, None) => 0.0,
        (None, Some(_)) => std::f64::consts::FRAC_PI_2,
        _ => w_norm.atan2(p_norm),
    };
    Ok(Decomposition {
        parallel,
        orthogonal,
        angle,
    })
}

/// `f(E ∪ {s}) − f(E)`, computed as `⟨η, s⊥⟩²`.
pub fn marginal_gain<'a, I>(eta: &Vector, elements: I, s: &Vector) -> Result<f64>
where
    I: IntoIterator<Item = &'a Vector>,
{
    check_dims(eta.dim(), s.dim())?;
    let elements: Vec<&Vector> = elements.into_iter().collect();
    check_all_dims(eta.dim(), elements.iter().copied())?;
    let basis = OrthoBasis::from_elements(eta.dim(), elements)?;
    Ok(gain_against(&basis, &eta.0, &s.0))
}

pub(crate) fn gain_against(basis: &OrthoBasis, eta: &[f64], s: &[f64]) -> f64 {
    let w = basis.residual_raw(s);
    gain_of_residual(&w, eta, basis.tol_rank)
}

pub(crate) fn gain_of_residual(w: &[f64], eta: &[f64], tol: f64) -> f64 {
    let rho_sq = dot(w, w);
    if rho_sq.sqrt() <= tol {
        return 0.0;
    }
    let c = dot(eta, w);
    c * c / rho_sq
}
