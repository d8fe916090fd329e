//! Phase retrievability of weaving pairs.
//!
//! For a subset `sigma`, the magnitude map `gamma_sigma` sends `f` to the
//! weighted projection norms of the woven family. Its square is the image of
//! `f (x) f` under the real-linear lift `F_sigma(T)_i = w_i^2 tr(P_i T)`, so
//! `gamma_sigma` fails to be injective modulo phase exactly when the kernel of
//! `F_sigma` contains a nonzero `f (x) f - g (x) g`. This module builds the
//! lift, its kernel, searches the kernel for such rank-one differences and
//! turns any hit into a checked witness pair `(f, g)`.

mod complement;
mod lift;
mod robustness;
mod s11;
mod transport;
mod verdict;

pub use complement::{
    complement_property, complement_property_of_pair, frame_complement_failure,
    ComplementFailure, ComplementReport,
};
pub use lift::{lift_kernel, phase_lift_matrix, KernelReport, PhaseLiftMap};
pub use robustness::{
    alpha_estimate, alpha_estimate_with, bracket_identity_check, bracket_ratio, AlphaEstimate,
};
pub use s11::{s11_intersection, S11Outcome, S11Witness, SearchBudget};
pub use transport::transport;
pub use verdict::{
    is_phase_retrievable, InconclusiveReason, PhaseWitness, Retrievability,
    RetrievabilityVerdict, SigmaAnalysis, SigmaOutcome,
};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::hilbert::{check_dim, FieldTag, Vector, C64};
use crate::weaving::{SubsetSelector, WeavingPair};

/// `(gamma_sigma(f))_i = w_i ||P_i f||` over the woven family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaVector(pub Vec<f64>);

impl GammaVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Euclidean distance to another measurement vector.
    pub fn distance(&self, other: &GammaVector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

pub fn gamma(pair: &WeavingPair, sigma: &SubsetSelector, f: &Vector) -> Result<GammaVector> {
    check_dim(pair.len(), sigma.len())?;
    pair.first().check_vector(f)?;
    Ok(GammaVector(
        (0..pair.len())
            .map(|i| {
                let m = pair.chosen(sigma, i);
                m.weight() * m.subspace().energy(f.coords()).sqrt()
            })
            .collect(),
    ))
}

/// `min_{|u| = 1} ||f - u g||`. Over the reals `u` ranges over `{1, -1}`;
/// over the complex field the optimum is `u = c / |c|` with `c = g^H f`
/// (`u = 1` when `c` vanishes).
pub fn phase_distance(f: &Vector, g: &Vector) -> Result<f64> {
    f.check_compatible(g)?;
    let d = match f.field() {
        FieldTag::Real => {
            let minus = f.sub(g)?.norm();
            let plus = f.add(g)?.norm();
            minus.min(plus)
        }
        FieldTag::Complex => {
            let c = g.coords().dotc(f.coords());
            let u = if c.norm() == 0.0 { C64::new(1.0, 0.0) } else { c / c.norm() };
            f.sub(&g.times(u)?)?.norm()
        }
    };
    Ok(d)
}

/// Per-`sigma` seed substream, independent of evaluation order.
pub(crate) fn sigma_stream(sigma: &SubsetSelector) -> u64 {
    if sigma.len() <= 64 {
        sigma.rank()
    } else {
        // FNV-1a over the mask
        sigma.mask().iter().fold(0xcbf2_9ce4_8422_2325u64, |h, &b| {
            (h ^ u64::from(b)).wrapping_mul(0x100_0000_01b3)
        })
    }
}
