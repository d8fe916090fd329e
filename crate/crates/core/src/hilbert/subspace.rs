use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use super::{check_dim, max_abs_diff, FieldTag, Vector, C64, ONE};
use crate::error::{Error, Result};

const TOL_ORTH: f64 = 1e-10;

/// A subspace of `H^n` held as an `n x k` matrix with orthonormal columns.
#[derive(Clone, Debug, PartialEq)]
pub struct Subspace {
    basis: DMatrix<C64>,
    field: FieldTag,
}

impl Subspace {
    /// Accepts an already orthonormal basis; fails if `basis^H basis != I`.
    pub fn from_orthonormal(basis: DMatrix<C64>, field: FieldTag) -> Result<Self> {
        if basis.ncols() == 0 || basis.ncols() > basis.nrows() {
            return Err(Error::EmptySpan);
        }
        if field == FieldTag::Real && basis.iter().any(|z| z.im != 0.0) {
            return Err(Error::FieldMismatch {
                expected: FieldTag::Real,
                found: FieldTag::Complex,
            });
        }
        let gram = basis.adjoint() * &basis;
        let dev = max_abs_diff(&gram, &DMatrix::identity(basis.ncols(), basis.ncols()));
        if dev > TOL_ORTH {
            return Err(Error::InvalidArgument(format!(
                "basis columns are not orthonormal (deviation {dev:.3e})"
            )));
        }
        Ok(Subspace { basis, field })
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn field(&self) -> FieldTag {
        self.field
    }

    pub fn basis(&self) -> &DMatrix<C64> {
        &self.basis
    }

    pub fn basis_vectors(&self) -> Vec<Vector> {
        self.basis
            .column_iter()
            .map(|c| Vector::from_coords_unchecked(c.into_owned(), self.field))
            .collect()
    }

    /// `P v` computed as `B (B^H v)` without forming `P`.
    pub fn project(&self, v: &DVector<C64>) -> DVector<C64> {
        &self.basis * self.basis.ad_mul(v)
    }

    /// `||P v||^2`.
    pub fn energy(&self, v: &DVector<C64>) -> f64 {
        self.basis.ad_mul(v).norm_squared()
    }

    /// Image under `q`. The caller guarantees `q` is unitary.
    pub(crate) fn mapped(&self, q: &DMatrix<C64>, field: FieldTag) -> Subspace {
        Subspace {
            basis: q * &self.basis,
            field,
        }
    }
}

/// Column-pivoted modified Gram-Schmidt. At each step the remaining column with
/// the largest residual is taken; the sweep stops once every residual is at
/// most `tol` times the largest input norm. Numerically zero inputs are
/// dropped.
pub fn orthonormalize(spanning: &[Vector], tol: f64) -> Result<Subspace> {
    let first = spanning.first().ok_or(Error::EmptySpan)?;
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let n = first.dim();
    let field = first.field();
    for v in spanning {
        check_dim(n, v.dim())?;
        field.ensure_same(v.field())?;
    }

    let mut residual: Vec<DVector<C64>> = spanning.iter().map(|v| v.coords().clone()).collect();
    let scale = residual.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(Error::EmptySpan);
    }
    let cutoff = tol * scale;

    let mut q: Vec<DVector<C64>> = Vec::new();
    let mut remaining: Vec<usize> = (0..residual.len()).collect();
    while q.len() < n && !remaining.is_empty() {
        let (pos, &pivot) = remaining
            .iter()
            .enumerate()
            .max_by(|a, b| residual[*a.1].norm().total_cmp(&residual[*b.1].norm()))
            .expect("non-empty");
        let norm = residual[pivot].norm();
        if norm <= cutoff {
            break;
        }
        remaining.swap_remove(pos);

        let mut col = residual[pivot].clone() / C64::new(norm, 0.0);
        // second pass keeps orthogonality at the 1e-15 level
        for qi in &q {
            let c = qi.dotc(&col);
            col -= qi * c;
        }
        let renorm = col.norm();
        col /= C64::new(renorm, 0.0);

        for &j in &remaining {
            let c = col.dotc(&residual[j]);
            let update = &col * c;
            residual[j] -= update;
        }
        q.push(col);
    }
    if q.is_empty() {
        return Err(Error::EmptySpan);
    }
    let basis = DMatrix::from_columns(&q);
    Ok(Subspace { basis, field })
}

/// Orthogonal projection onto a subspace, `P = B B^H`.
#[derive(Clone, Debug, PartialEq)]
pub struct Projector {
    matrix: DMatrix<C64>,
    rank: usize,
}

impl Projector {
    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn apply(&self, v: &DVector<C64>) -> DVector<C64> {
        &self.matrix * v
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// Largest deviations from `P = P^H`, `P^2 = P` and `tr P = k`.
    pub fn invariant_residuals(&self) -> (f64, f64, f64) {
        let herm = max_abs_diff(&self.matrix, &self.matrix.adjoint());
        let idem = max_abs_diff(&(&self.matrix * &self.matrix), &self.matrix);
        let tr = (self.trace() - self.rank as f64).abs();
        (herm, idem, tr)
    }
}

pub fn projector(s: &Subspace) -> Projector {
    Projector {
        matrix: s.basis() * s.basis().adjoint(),
        rank: s.dim(),
    }
}

/// Draws a Haar-distributed unitary (orthogonal over the reals) matrix from
/// the QR factorisation of a Gaussian matrix, with the phases of `R`'s
/// diagonal folded back into `Q`.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, field: FieldTag, rng: &mut R) -> DMatrix<C64> {
    let mut sample = || -> f64 { rng.sample(StandardNormal) };
    let g = DMatrix::from_fn(n, n, |_, _| match field {
        FieldTag::Real => C64::new(sample(), 0.0),
        FieldTag::Complex => C64::new(sample(), sample()),
    });
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() == 0.0 { ONE } else { d / d.norm() };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    if field == FieldTag::Real {
        q.iter_mut().for_each(|z| z.im = 0.0);
    }
    q
}

/// Standard Gaussian vector (circularly symmetric over the complex field).
pub fn random_vector<R: Rng + ?Sized>(rng: &mut R, n: usize, field: FieldTag) -> Vector {
    let coords = DVector::from_fn(n, |_, _| match field {
        FieldTag::Real => C64::new(rng.sample(StandardNormal), 0.0),
        FieldTag::Complex => C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)),
    });
    Vector::from_coords_unchecked(coords, field)
}

/// `max |Q^H Q - I|` entrywise.
pub(crate) fn unitarity_defect(q: &DMatrix<C64>) -> f64 {
    if q.nrows() != q.ncols() {
        return f64::INFINITY;
    }
    let gram = q.adjoint() * q;
    max_abs_diff(&gram, &DMatrix::identity(q.nrows(), q.ncols()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{numerical_rank, DEFAULT_TOL};
    use crate::hilbert::ZERO;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn re(v: &[f64]) -> Vector {
        Vector::real(v)
    }

    #[test]
    fn collinear_inputs_give_a_line() {
        let s = orthonormalize(&[re(&[1.0, 0.0]), re(&[2.0, 0.0])], DEFAULT_TOL).unwrap();
        assert_eq!(s.dim(), 1);
        assert!((s.basis()[(0, 0)].norm() - 1.0).abs() < 1e-15);
        assert_eq!(s.basis()[(1, 0)], ZERO);
    }

    #[test]
    fn single_vector_is_normalised() {
        let s = orthonormalize(&[re(&[1.0, 2.0])], DEFAULT_TOL).unwrap();
        let r5 = 5f64.sqrt();
        let b = s.basis();
        let sign = b[(0, 0)].re.signum();
        assert!((b[(0, 0)].re - sign / r5).abs() < 1e-15);
        assert!((b[(1, 0)].re - sign * 2.0 / r5).abs() < 1e-15);
    }

    #[test]
    fn rank_two_plane_in_r3() {
        let span = [re(&[1.0, 1.0, 0.0]), re(&[1.0, -1.0, 0.0]), re(&[2.0, 0.0, 0.0])];
        // Gram determinant oracle: 3x3 Gram matrix is singular, leading 2x2 is not.
        let g = |a: &[f64; 3], b: &[f64; 3]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        let vs = [[1.0, 1.0, 0.0], [1.0, -1.0, 0.0], [2.0, 0.0, 0.0]];
        let gram2 = g(&vs[0], &vs[0]) * g(&vs[1], &vs[1]) - g(&vs[0], &vs[1]).powi(2);
        assert!(gram2 > 0.0);
        let gm: Vec<f64> = (0..9).map(|k| g(&vs[k / 3], &vs[k % 3])).collect();
        let det3 = gm[0] * (gm[4] * gm[8] - gm[5] * gm[7]) - gm[1] * (gm[3] * gm[8] - gm[5] * gm[6])
            + gm[2] * (gm[3] * gm[7] - gm[4] * gm[6]);
        assert!(det3.abs() < 1e-12);

        let s = orthonormalize(&span, DEFAULT_TOL).unwrap();
        assert_eq!(s.dim(), 2);
        for c in s.basis().column_iter() {
            assert!(c[2].norm() < 1e-15);
        }
    }

    #[test]
    fn zero_inputs_are_dropped_or_rejected() {
        let s = orthonormalize(&[re(&[0.0, 0.0]), re(&[0.0, 3.0])], DEFAULT_TOL).unwrap();
        assert_eq!(s.dim(), 1);
        assert_eq!(
            orthonormalize(&[re(&[0.0, 0.0])], DEFAULT_TOL),
            Err(Error::EmptySpan)
        );
        assert_eq!(orthonormalize(&[], DEFAULT_TOL), Err(Error::EmptySpan));
    }

    #[test]
    fn mismatched_dimensions_are_rejected() {
        let err = orthonormalize(&[re(&[1.0, 0.0]), re(&[1.0, 0.0, 0.0])], DEFAULT_TOL);
        assert_eq!(err, Err(Error::DimensionMismatch { expected: 2, found: 3 }));
    }

    #[test]
    fn projector_examples() {
        let full = orthonormalize(&[re(&[1.0, 1.0]), re(&[0.0, 1.0])], DEFAULT_TOL).unwrap();
        let p = projector(&full);
        assert!(max_abs_diff(p.matrix(), &DMatrix::identity(2, 2)) < 1e-15);

        let axis = orthonormalize(&[re(&[1.0, 0.0])], DEFAULT_TOL).unwrap();
        let p = projector(&axis);
        let expected = DMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, ZERO]);
        assert!(max_abs_diff(p.matrix(), &expected) < 1e-15);

        // P = (1/5)[[1,2],[2,4]]; hand check P^2 = P and P [1,2] = [1,2]
        let line = orthonormalize(&[re(&[1.0, 2.0])], DEFAULT_TOL).unwrap();
        let p = projector(&line);
        let expected = DMatrix::from_row_slice(2, 2, &[0.2, 0.4, 0.4, 0.8]).map(|x| C64::new(x, 0.0));
        assert!(max_abs_diff(p.matrix(), &expected) < 1e-15);
        let v = DVector::from_vec(vec![ONE, C64::new(2.0, 0.0)]);
        assert!((p.apply(&v) - &v).norm() < 1e-14);
    }

    #[test]
    fn random_unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 1..6 {
            for field in [FieldTag::Real, FieldTag::Complex] {
                let q = random_unitary(n, field, &mut rng);
                assert!(unitarity_defect(&q) < 1e-12);
            }
        }
    }

    fn spanning_set() -> impl Strategy<Value = (bool, Vec<Vec<(f64, f64)>>)> {
        (1usize..=8).prop_flat_map(|n| {
            (
                any::<bool>(),
                prop::collection::vec(
                    prop::collection::vec((-10.0..10.0f64, -10.0..10.0f64), n),
                    1..=n + 2,
                ),
            )
        })
    }

    fn to_vectors(complex: bool, raw: &[Vec<(f64, f64)>]) -> Vec<Vector> {
        raw.iter()
            .map(|v| {
                if complex {
                    Vector::complex(&v.iter().map(|&(a, b)| C64::new(a, b)).collect::<Vec<_>>())
                } else {
                    Vector::real(&v.iter().map(|&(a, _)| a).collect::<Vec<_>>())
                }
            })
            .collect()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn projector_invariants_hold((complex, raw) in spanning_set()) {
            let vs = to_vectors(complex, &raw);
            let s = orthonormalize(&vs, DEFAULT_TOL).unwrap();
            let mat = DMatrix::from_columns(&vs.iter().map(|v| v.coords().clone()).collect::<Vec<_>>());
            prop_assert_eq!(s.dim(), numerical_rank(&mat, DEFAULT_TOL));
            let p = projector(&s);
            let (herm, idem, tr) = p.invariant_residuals();
            prop_assert!(herm < 1e-10);
            prop_assert!(idem < 1e-9);
            prop_assert!(tr < 1e-8);
            for v in &vs {
                let pv = p.apply(v.coords());
                prop_assert!((pv - v.coords()).norm() <= 1e-10 * v.norm());
            }
        }

        #[test]
        fn orthonormalize_is_span_idempotent((complex, raw) in spanning_set()) {
            let s = orthonormalize(&to_vectors(complex, &raw), DEFAULT_TOL).unwrap();
            let again = orthonormalize(&s.basis_vectors(), DEFAULT_TOL).unwrap();
            prop_assert_eq!(s.dim(), again.dim());
            let p1 = projector(&s);
            let p2 = projector(&again);
            prop_assert!(max_abs_diff(p1.matrix(), p2.matrix()) < 1e-9);
        }
    }
}
