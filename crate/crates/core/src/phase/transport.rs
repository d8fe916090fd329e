use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::fusion::{FusionFrame, WeightedSubspace};
use crate::hilbert::{check_dim, unitarity_defect, FieldTag, C64};
use crate::weaving::WeavingPair;

const UNITARY_TOL: f64 = 1e-10;

/// Maps every member subspace through `q`, keeping the weights. A real pair
/// only accepts a real `q`.
pub fn transport(pair: &WeavingPair, q: &DMatrix<C64>) -> Result<WeavingPair> {
    check_dim(pair.dim(), q.nrows())?;
    let deviation = unitarity_defect(q);
    if deviation > UNITARY_TOL {
        return Err(Error::NotUnitary { deviation });
    }
    if pair.field() == FieldTag::Real && q.iter().any(|z| z.im != 0.0) {
        return Err(Error::FieldMismatch {
            expected: FieldTag::Real,
            found: FieldTag::Complex,
        });
    }
    let map = |frame: &FusionFrame| -> Result<FusionFrame> {
        let members = frame
            .members()
            .iter()
            .map(|m| WeightedSubspace::new(m.subspace().mapped(q, pair.field()), m.weight()))
            .collect::<Result<Vec<_>>>()?;
        FusionFrame::new(members)
    };
    WeavingPair::new(map(pair.first())?, map(pair.second())?)
}
