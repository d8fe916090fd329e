//! Fusion frames: weighted subspace families, their frame operator, optimal
//! frame bounds, measurements and reconstruction.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{
    check_dim, eig_extremes, orthonormalize, FieldTag, Subspace, SymmetricOperator, Vector, C64,
    DEFAULT_TOL, ZERO,
};

/// Relative cutoff for the pseudo-inverse of the frame operator.
pub const PINV_CUTOFF: f64 = 1e-12;

/// Default relative tolerance for tightness.
pub const TIGHT_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct WeightedSubspace {
    subspace: Subspace,
    weight: f64,
}

impl WeightedSubspace {
    pub fn new(subspace: Subspace, weight: f64) -> Result<Self> {
        if !(weight > 0.0 && weight.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "weight must be positive and finite, got {weight}"
            )));
        }
        Ok(WeightedSubspace { subspace, weight })
    }

    /// Orthonormalizes `span` and attaches `weight`.
    pub fn from_span(span: &[Vector], weight: f64) -> Result<Self> {
        Self::new(orthonormalize(span, DEFAULT_TOL)?, weight)
    }

    pub fn subspace(&self) -> &Subspace {
        &self.subspace
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    /// `w^2 P` as a dense matrix.
    pub fn weighted_projector(&self) -> DMatrix<C64> {
        let b = self.subspace.basis();
        (b * b.adjoint()) * C64::new(self.weight * self.weight, 0.0)
    }
}

/// An ordered, non-empty family of weighted subspaces of `H^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct FusionFrame {
    dim: usize,
    field: FieldTag,
    members: Vec<WeightedSubspace>,
}

impl FusionFrame {
    pub fn new(members: Vec<WeightedSubspace>) -> Result<Self> {
        let first = members
            .first()
            .ok_or_else(|| Error::InvalidArgument("a fusion frame needs at least one member".into()))?;
        let dim = first.subspace.ambient_dim();
        let field = first.subspace.field();
        for m in &members {
            check_dim(dim, m.subspace.ambient_dim())?;
            field.ensure_same(m.subspace.field())?;
        }
        Ok(FusionFrame { dim, field, members })
    }

    /// Builds a frame from `(weight, spanning vectors)` entries.
    pub fn from_spans(entries: &[(f64, Vec<Vector>)]) -> Result<Self> {
        let members = entries
            .iter()
            .map(|(w, span)| WeightedSubspace::from_span(span, *w))
            .collect::<Result<Vec<_>>>()?;
        Self::new(members)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn field(&self) -> FieldTag {
        self.field
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[WeightedSubspace] {
        &self.members
    }

    pub fn member(&self, i: usize) -> &WeightedSubspace {
        &self.members[i]
    }

    /// `sum_i w_i^2 ||P_i f||^2`.
    pub fn energy(&self, f: &Vector) -> Result<f64> {
        self.check_vector(f)?;
        Ok(self
            .members
            .iter()
            .map(|m| m.weight * m.weight * m.subspace.energy(f.coords()))
            .sum())
    }

    pub(crate) fn check_vector(&self, f: &Vector) -> Result<()> {
        check_dim(self.dim, f.dim())?;
        self.field.ensure_same(f.field())
    }
}

/// Frame bounds reported as the spectral extremes of the frame operator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameBounds {
    pub lower: f64,
    pub upper: f64,
}

/// Per-index measurements `w_i P_i f`.
#[derive(Clone, Debug, PartialEq)]
pub struct Measurement {
    entries: Vec<Vector>,
}

impl Measurement {
    pub fn new(entries: Vec<Vector>) -> Self {
        Measurement { entries }
    }

    pub fn entries(&self) -> &[Vector] {
        &self.entries
    }
}

/// `S = sum_i w_i^2 P_i`.
pub fn frame_operator(frame: &FusionFrame) -> SymmetricOperator {
    let n = frame.dim;
    let mut s = DMatrix::from_element(n, n, ZERO);
    for m in &frame.members {
        s += m.weighted_projector();
    }
    SymmetricOperator::symmetrised(s, frame.field)
}

/// Optimal bounds `(lambda_min(S), lambda_max(S))`, with the lower bound
/// clamped at zero against round-off.
pub fn frame_bounds(frame: &FusionFrame) -> FrameBounds {
    bounds_of(&frame_operator(frame))
}

pub(crate) fn bounds_of(s: &SymmetricOperator) -> FrameBounds {
    let (lo, hi) = eig_extremes(s);
    FrameBounds {
        lower: lo.max(0.0),
        upper: hi.max(0.0),
    }
}

pub fn is_fusion_frame(frame: &FusionFrame, tol: f64) -> bool {
    frame_bounds(frame).lower > tol
}

/// `B - A <= tol * B` with `A > tol`.
pub fn is_tight(frame: &FusionFrame, tol: f64) -> bool {
    let b = frame_bounds(frame);
    b.lower > tol && b.upper - b.lower <= tol * b.upper
}

pub fn measure(frame: &FusionFrame, f: &Vector) -> Result<Measurement> {
    frame.check_vector(f)?;
    let entries = frame
        .members
        .iter()
        .map(|m| {
            let v = m.subspace.project(f.coords()) * C64::new(m.weight, 0.0);
            Vector::from_coords_unchecked(v, frame.field)
        })
        .collect();
    Ok(Measurement { entries })
}

/// `f = S^{-1} sum_i w_i (w_i P_i f)`.
pub fn reconstruct(frame: &FusionFrame, measurement: &Measurement) -> Result<Vector> {
    check_dim(frame.len(), measurement.entries.len())?;
    for e in &measurement.entries {
        frame.check_vector(e)?;
    }
    let s = frame_operator(frame);
    let bounds = bounds_of(&s);
    if bounds.lower <= DEFAULT_TOL {
        return Err(Error::NotAFrame {
            lower_bound: bounds.lower,
        });
    }
    let mut acc = DVector::from_element(frame.dim, ZERO);
    for (m, e) in frame.members.iter().zip(&measurement.entries) {
        acc += e.coords() * C64::new(m.weight, 0.0);
    }
    let x = s.pseudo_inverse(PINV_CUTOFF) * acc;
    Ok(Vector::from_coords_unchecked(x, frame.field))
}
