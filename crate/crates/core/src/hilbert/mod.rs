//! Linear-algebra substrate shared by every other module.
//!
//! All scalars are stored as `Complex<f64>`; a [`FieldTag`] records whether an
//! object lives over the reals (imaginary parts identically zero) or the
//! complex numbers. Objects over different fields never mix.

mod operator;
mod subspace;

pub use operator::{
    eig_extremes, outer, signature_classify, sym_bracket, trace_norm, Signature, Spectrum,
    SymBasis, SymmetricOperator,
};
pub use subspace::{orthonormalize, projector, random_unitary, random_vector, Projector, Subspace};
pub(crate) use subspace::unitarity_defect;

use nalgebra::{ComplexField, DMatrix, DVector};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

/// Default tolerance for rank decisions and orthogonality checks.
pub const DEFAULT_TOL: f64 = 1e-10;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldTag {
    Real,
    Complex,
}

impl FieldTag {
    /// Real dimension of the space of Hermitian `n x n` operators.
    pub fn sym_dim(self, n: usize) -> usize {
        match self {
            FieldTag::Real => n * (n + 1) / 2,
            FieldTag::Complex => n * n,
        }
    }

    pub fn ensure_same(self, other: FieldTag) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::FieldMismatch {
                expected: self,
                found: other,
            })
        }
    }
}

/// A finite-dimensional vector tagged with its scalar field. Serialises as
/// `{"field": ..., "coords": [[re, im], ...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "VectorRepr", try_from = "VectorRepr")]
pub struct Vector {
    coords: DVector<C64>,
    field: FieldTag,
}

impl Vector {
    pub fn real(coords: &[f64]) -> Self {
        Vector {
            coords: DVector::from_iterator(coords.len(), coords.iter().map(|&x| C64::new(x, 0.0))),
            field: FieldTag::Real,
        }
    }

    pub fn complex(coords: &[C64]) -> Self {
        Vector {
            coords: DVector::from_column_slice(coords),
            field: FieldTag::Complex,
        }
    }

    /// Wraps raw coordinates. A real tag requires vanishing imaginary parts.
    pub fn from_coords(coords: DVector<C64>, field: FieldTag) -> Result<Self> {
        if field == FieldTag::Real && coords.iter().any(|z| z.im != 0.0) {
            return Err(Error::FieldMismatch {
                expected: FieldTag::Real,
                found: FieldTag::Complex,
            });
        }
        Ok(Vector { coords, field })
    }

    pub(crate) fn from_coords_unchecked(coords: DVector<C64>, field: FieldTag) -> Self {
        Vector { coords, field }
    }

    pub fn zeros(n: usize, field: FieldTag) -> Self {
        Vector {
            coords: DVector::from_element(n, ZERO),
            field,
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn field(&self) -> FieldTag {
        self.field
    }

    pub fn coords(&self) -> &DVector<C64> {
        &self.coords
    }

    pub fn into_coords(self) -> DVector<C64> {
        self.coords
    }

    /// Scaled Euclidean norm; vanishes only for the zero vector.
    pub fn norm(&self) -> f64 {
        let scale = self.coords.iter().fold(0.0_f64, |a, z| a.max(z.norm()));
        if scale == 0.0 || !scale.is_finite() {
            return scale;
        }
        scale * self.coords.iter().map(|z| (z / scale).norm_sqr()).sum::<f64>().sqrt()
    }

    /// `<self, other>`, linear in the first argument.
    pub fn inner(&self, other: &Vector) -> C64 {
        other.coords.dotc(&self.coords)
    }

    pub fn scaled(&self, c: f64) -> Vector {
        Vector {
            coords: &self.coords * C64::new(c, 0.0),
            field: self.field,
        }
    }

    /// Multiplies by a unimodular (or any) scalar. Over the reals only real
    /// scalars are admissible.
    pub fn times(&self, u: C64) -> Result<Vector> {
        if self.field == FieldTag::Real && u.im != 0.0 {
            return Err(Error::FieldMismatch {
                expected: FieldTag::Real,
                found: FieldTag::Complex,
            });
        }
        Ok(Vector {
            coords: &self.coords * u,
            field: self.field,
        })
    }

    pub fn sub(&self, other: &Vector) -> Result<Vector> {
        self.check_compatible(other)?;
        Ok(Vector {
            coords: &self.coords - &other.coords,
            field: self.field,
        })
    }

    pub fn add(&self, other: &Vector) -> Result<Vector> {
        self.check_compatible(other)?;
        Ok(Vector {
            coords: &self.coords + &other.coords,
            field: self.field,
        })
    }

    pub fn check_compatible(&self, other: &Vector) -> Result<()> {
        check_dim(self.dim(), other.dim())?;
        self.field.ensure_same(other.field)
    }

    /// Standard basis vector `e_index` (0-based).
    pub fn basis(n: usize, index: usize, field: FieldTag) -> Vector {
        let mut v = Vector::zeros(n, field);
        v.coords[index] = ONE;
        v
    }
}

#[derive(Serialize, Deserialize)]
struct VectorRepr {
    field: FieldTag,
    coords: Vec<[f64; 2]>,
}

impl From<Vector> for VectorRepr {
    fn from(v: Vector) -> Self {
        VectorRepr {
            field: v.field,
            coords: v.coords.iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl TryFrom<VectorRepr> for Vector {
    type Error = Error;

    fn try_from(r: VectorRepr) -> Result<Self> {
        let coords = DVector::from_iterator(r.coords.len(), r.coords.iter().map(|&[re, im]| C64::new(re, im)));
        Vector::from_coords(coords, r.field)
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// Number of singular values above `tol` times the largest one. The zero
/// matrix (and any empty matrix) has rank 0.
pub fn numerical_rank<T>(m: &DMatrix<T>, tol: f64) -> usize
where
    T: ComplexField<RealField = f64>,
{
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.clone().singular_values();
    let largest = sv.iter().cloned().fold(0.0_f64, f64::max);
    if largest == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol * largest).count()
}

/// Largest absolute entrywise difference between two matrices of equal shape.
pub(crate) fn max_abs_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}
