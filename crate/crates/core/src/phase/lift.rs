use nalgebra::{DMatrix, DVector};

use crate::error::Result;
use crate::hilbert::{check_dim, SymBasis, SymmetricOperator};
use crate::weaving::{SubsetSelector, WeavingPair};

/// `F_sigma` as an `m x d_sym` real matrix acting on [`SymBasis`]
/// coordinates.
#[derive(Clone, Debug)]
pub struct PhaseLiftMap {
    matrix: DMatrix<f64>,
    sigma: SubsetSelector,
    basis: SymBasis,
}

impl PhaseLiftMap {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn sigma(&self) -> &SubsetSelector {
        &self.sigma
    }

    pub fn basis(&self) -> &SymBasis {
        &self.basis
    }

    pub fn apply(&self, t: &SymmetricOperator) -> Result<DVector<f64>> {
        Ok(&self.matrix * self.basis.coords(t)?)
    }

    /// Largest singular value.
    pub fn norm(&self) -> f64 {
        if self.matrix.is_empty() {
            return 0.0;
        }
        self.matrix.clone().singular_values().max()
    }
}

pub fn phase_lift_matrix(pair: &WeavingPair, sigma: &SubsetSelector) -> Result<PhaseLiftMap> {
    check_dim(pair.len(), sigma.len())?;
    let basis = SymBasis::new(pair.dim(), pair.field());
    let projectors: Vec<_> = (0..pair.len())
        .map(|i| pair.chosen(sigma, i).weighted_projector())
        .collect();
    // tr(P B) = <P, B>_F for Hermitian P
    let matrix = DMatrix::from_fn(pair.len(), basis.dim(), |i, k| {
        projectors[i].dotc(&basis.elements()[k]).re
    });
    Ok(PhaseLiftMap {
        matrix,
        sigma: sigma.clone(),
        basis,
    })
}

#[derive(Clone, Debug)]
pub struct KernelReport {
    pub sigma: SubsetSelector,
    pub kernel_dim: usize,
    /// Trace-orthonormal.
    pub kernel_basis: Vec<SymmetricOperator>,
    pub lift_norm: f64,
}

/// Null space of `L` at relative singular-value cutoff `tol`. The matrix is
/// zero-padded to square so the full right-singular basis is available.
pub fn lift_kernel(l: &PhaseLiftMap, tol: f64) -> KernelReport {
    let d = l.basis.dim();
    let m = l.matrix.nrows();
    let rows = m.max(d);
    let mut padded = DMatrix::<f64>::zeros(rows, d);
    padded.rows_mut(0, m).copy_from(&l.matrix);

    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested");
    let largest = svd.singular_values.max();

    let null: Vec<usize> = (0..d)
        .filter(|&k| largest == 0.0 || svd.singular_values[k] <= tol * largest)
        .collect();
    let kernel_basis = null
        .iter()
        .map(|&k| {
            let coords: Vec<f64> = v_t.row(k).iter().copied().collect();
            l.basis.compose(&coords).expect("coordinate length matches basis")
        })
        .collect::<Vec<_>>();
    KernelReport {
        sigma: l.sigma.clone(),
        kernel_dim: kernel_basis.len(),
        kernel_basis,
        lift_norm: largest,
    }
}
