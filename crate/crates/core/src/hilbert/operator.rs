use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::{check_dim, max_abs_diff, FieldTag, Vector, C64, ONE, ZERO};
use crate::error::{Error, Result};

const HERMITIAN_TOL: f64 = 1e-12;

/// A Hermitian (real symmetric over the reals) operator on `H^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricOperator {
    matrix: DMatrix<C64>,
    field: FieldTag,
}

/// Eigenvalues in ascending order with matching unit eigenvectors as columns.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: DMatrix<C64>,
}

impl SymmetricOperator {
    /// Checks Hermiticity to `1e-12` (scaled by the largest entry when that
    /// exceeds one) and stores the exactly symmetrised matrix.
    pub fn new(matrix: DMatrix<C64>, field: FieldTag) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        if field == FieldTag::Real && matrix.iter().any(|z| z.im != 0.0) {
            return Err(Error::FieldMismatch {
                expected: FieldTag::Real,
                found: FieldTag::Complex,
            });
        }
        let scale = matrix.iter().map(|z| z.norm()).fold(1.0, f64::max);
        let deviation = max_abs_diff(&matrix, &matrix.adjoint());
        if deviation > HERMITIAN_TOL * scale {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self::symmetrised(matrix, field))
    }

    pub(crate) fn symmetrised(matrix: DMatrix<C64>, field: FieldTag) -> Self {
        let adj = matrix.adjoint();
        let mut matrix = (matrix + adj) * C64::new(0.5, 0.0);
        if field == FieldTag::Real {
            matrix.iter_mut().for_each(|z| z.im = 0.0);
        }
        SymmetricOperator { matrix, field }
    }

    pub fn zeros(n: usize, field: FieldTag) -> Self {
        SymmetricOperator {
            matrix: DMatrix::from_element(n, n, ZERO),
            field,
        }
    }

    pub fn identity(n: usize, field: FieldTag) -> Self {
        SymmetricOperator {
            matrix: DMatrix::identity(n, n),
            field,
        }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d = DVector::from_iterator(diag.len(), diag.iter().map(|&x| C64::new(x, 0.0)));
        SymmetricOperator {
            matrix: DMatrix::from_diagonal(&d),
            field: FieldTag::Real,
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn field(&self) -> FieldTag {
        self.field
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn spectrum(&self) -> Spectrum {
        let n = self.dim();
        if n == 0 {
            return Spectrum {
                values: Vec::new(),
                vectors: DMatrix::zeros(0, 0),
            };
        }
        let eig = SymmetricEigen::new(self.matrix.clone());
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
        Spectrum { values, vectors }
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.spectrum().values
    }

    pub fn spectral_norm(&self) -> f64 {
        self.eigenvalues().iter().fold(0.0, |acc, l| acc.max(l.abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.matrix.norm()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// Real trace inner product `tr(A^H B)`.
    pub fn trace_inner(&self, other: &SymmetricOperator) -> f64 {
        self.matrix.dotc(&other.matrix).re
    }

    pub fn apply(&self, v: &DVector<C64>) -> DVector<C64> {
        &self.matrix * v
    }

    pub fn scaled(&self, c: f64) -> SymmetricOperator {
        SymmetricOperator {
            matrix: &self.matrix * C64::new(c, 0.0),
            field: self.field,
        }
    }

    pub fn add(&self, other: &SymmetricOperator) -> Result<SymmetricOperator> {
        self.check_compatible(other)?;
        Ok(SymmetricOperator {
            matrix: &self.matrix + &other.matrix,
            field: self.field,
        })
    }

    pub fn sub(&self, other: &SymmetricOperator) -> Result<SymmetricOperator> {
        self.check_compatible(other)?;
        Ok(SymmetricOperator {
            matrix: &self.matrix - &other.matrix,
            field: self.field,
        })
    }

    fn check_compatible(&self, other: &SymmetricOperator) -> Result<()> {
        check_dim(self.dim(), other.dim())?;
        self.field.ensure_same(other.field)
    }

    /// Inverse through the eigendecomposition, discarding eigenvalues at or
    /// below `cutoff * lambda_max` in magnitude.
    pub fn pseudo_inverse(&self, cutoff: f64) -> DMatrix<C64> {
        let spec = self.spectrum();
        let top = spec.values.iter().fold(0.0_f64, |a, l| a.max(l.abs()));
        let n = self.dim();
        let mut inv = DMatrix::from_element(n, n, ZERO);
        for (k, &l) in spec.values.iter().enumerate() {
            if l.abs() > cutoff * top && l != 0.0 {
                let u = spec.vectors.column(k);
                inv += (u * u.adjoint()) * C64::new(1.0 / l, 0.0);
            }
        }
        inv
    }
}

/// Smallest and largest eigenvalue.
pub fn eig_extremes(t: &SymmetricOperator) -> (f64, f64) {
    let values = t.eigenvalues();
    match (values.first(), values.last()) {
        (Some(&lo), Some(&hi)) => (lo, hi),
        _ => (0.0, 0.0),
    }
}

/// `f (x) f = f f^H`.
pub fn outer(f: &Vector) -> SymmetricOperator {
    let c = f.coords();
    SymmetricOperator::symmetrised(c * c.adjoint(), f.field())
}

/// `[f, g] = (f g^H + g f^H) / 2`.
pub fn sym_bracket(f: &Vector, g: &Vector) -> Result<SymmetricOperator> {
    f.check_compatible(g)?;
    let (a, b) = (f.coords(), g.coords());
    let m = (a * b.adjoint() + b * a.adjoint()) * C64::new(0.5, 0.0);
    Ok(SymmetricOperator::symmetrised(m, f.field()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Signature {
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
}

impl Signature {
    /// At most one positive and at most one negative eigenvalue, i.e. the
    /// operator is `f (x) f - g (x) g` for some `f`, `g`.
    pub fn is_rank_one_difference(&self) -> bool {
        self.positive <= 1 && self.negative <= 1
    }
}

/// Counts eigenvalues above `tol * ||T||`, below `-tol * ||T||`, and in
/// between. The zero operator is all-zero.
pub fn signature_classify(t: &SymmetricOperator, tol: f64) -> Signature {
    let values = t.eigenvalues();
    let scale = values.iter().fold(0.0_f64, |a, l| a.max(l.abs()));
    let cut = tol * scale;
    let positive = values.iter().filter(|&&l| scale > 0.0 && l > cut).count();
    let negative = values.iter().filter(|&&l| scale > 0.0 && l < -cut).count();
    Signature {
        positive,
        negative,
        zero: values.len() - positive - negative,
    }
}

/// Schatten-1 norm: the sum of absolute eigenvalues.
pub fn trace_norm(t: &SymmetricOperator) -> f64 {
    t.eigenvalues().iter().map(|l| l.abs()).sum()
}

/// Trace-orthonormal basis of the real vector space of Hermitian `n x n`
/// operators. Order: diagonal units `E_ii`, then for each `i < j` the
/// symmetric `(E_ij + E_ji)/sqrt2` and, over the complex field, the
/// antisymmetric `i(E_ij - E_ji)/sqrt2`.
#[derive(Clone, Debug)]
pub struct SymBasis {
    n: usize,
    field: FieldTag,
    elements: Vec<DMatrix<C64>>,
}

impl SymBasis {
    pub fn new(n: usize, field: FieldTag) -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut elements = Vec::with_capacity(field.sym_dim(n));
        for i in 0..n {
            let mut e = DMatrix::from_element(n, n, ZERO);
            e[(i, i)] = ONE;
            elements.push(e);
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let mut e = DMatrix::from_element(n, n, ZERO);
                e[(i, j)] = C64::new(h, 0.0);
                e[(j, i)] = C64::new(h, 0.0);
                elements.push(e);
                if field == FieldTag::Complex {
                    let mut e = DMatrix::from_element(n, n, ZERO);
                    e[(i, j)] = C64::new(0.0, h);
                    e[(j, i)] = C64::new(0.0, -h);
                    elements.push(e);
                }
            }
        }
        SymBasis { n, field, elements }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn field(&self) -> FieldTag {
        self.field
    }

    pub fn dim(&self) -> usize {
        self.elements.len()
    }

    pub fn element(&self, k: usize) -> SymmetricOperator {
        SymmetricOperator {
            matrix: self.elements[k].clone(),
            field: self.field,
        }
    }

    pub fn elements(&self) -> &[DMatrix<C64>] {
        &self.elements
    }

    pub fn coords(&self, t: &SymmetricOperator) -> Result<DVector<f64>> {
        check_dim(self.n, t.dim())?;
        self.field.ensure_same(t.field())?;
        Ok(DVector::from_iterator(
            self.dim(),
            self.elements.iter().map(|b| b.dotc(t.matrix()).re),
        ))
    }

    pub fn compose(&self, coords: &[f64]) -> Result<SymmetricOperator> {
        check_dim(self.dim(), coords.len())?;
        let mut m = DMatrix::from_element(self.n, self.n, ZERO);
        for (b, &c) in self.elements.iter().zip(coords) {
            m += b * C64::new(c, 0.0);
        }
        Ok(SymmetricOperator {
            matrix: m,
            field: self.field,
        })
    }
}
