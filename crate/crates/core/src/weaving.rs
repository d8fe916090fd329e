//! Weaving pairs of fusion frames.
//!
//! A pair `(V, W)` of equally long fusion frames is woven by a subset `sigma`
//! of indices: index `i` contributes `(V_i, v_i)` when `i` is in `sigma` and
//! `(W_i, w_i)` otherwise. The pair is weaving when every woven family is a
//! fusion frame; the universal bounds are the worst lower and upper bounds
//! over all `sigma`.
//!
//! Subsets are enumerated in lexicographic order of their membership tuples
//! `(i1 in sigma, ..., im in sigma)` with index 1 most significant, so ties
//! resolve to the first subset in that order.

use std::collections::HashSet;
use std::fmt;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fusion::{bounds_of, FrameBounds, FusionFrame};
use crate::hilbert::{check_dim, FieldTag, SymmetricOperator, C64, ZERO};

/// Largest `m` for which all `2^m` subsets are enumerated.
pub const EXACT_CAP: usize = 16;

#[derive(Clone, Debug, PartialEq)]
pub struct WeavingPair {
    first: FusionFrame,
    second: FusionFrame,
}

impl WeavingPair {
    pub fn new(first: FusionFrame, second: FusionFrame) -> Result<Self> {
        check_dim(first.dim(), second.dim())?;
        first.field().ensure_same(second.field())?;
        if first.len() != second.len() {
            return Err(Error::InvalidArgument(format!(
                "families have different lengths ({} vs {})",
                first.len(),
                second.len()
            )));
        }
        Ok(WeavingPair { first, second })
    }

    pub fn first(&self) -> &FusionFrame {
        &self.first
    }

    pub fn second(&self) -> &FusionFrame {
        &self.second
    }

    pub fn dim(&self) -> usize {
        self.first.dim()
    }

    pub fn field(&self) -> FieldTag {
        self.first.field()
    }

    pub fn len(&self) -> usize {
        self.first.len()
    }

    pub fn is_empty(&self) -> bool {
        self.first.is_empty()
    }

    pub fn swapped(&self) -> WeavingPair {
        WeavingPair {
            first: self.second.clone(),
            second: self.first.clone(),
        }
    }

    /// Member `i` of the woven family for `sigma`.
    pub fn chosen(&self, sigma: &SubsetSelector, i: usize) -> &crate::fusion::WeightedSubspace {
        if sigma.contains(i) {
            self.first.member(i)
        } else {
            self.second.member(i)
        }
    }
}

/// A subset `sigma` of `{1..m}`; a set bit takes the index from the first
/// family.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SubsetSelector {
    mask: Vec<bool>,
}

impl SubsetSelector {
    pub fn empty(m: usize) -> Self {
        SubsetSelector {
            mask: vec![false; m],
        }
    }

    pub fn full(m: usize) -> Self {
        SubsetSelector { mask: vec![true; m] }
    }

    pub fn from_mask(mask: Vec<bool>) -> Self {
        SubsetSelector { mask }
    }

    /// From 1-based indices.
    pub fn from_indices(m: usize, indices: &[usize]) -> Result<Self> {
        let mut mask = vec![false; m];
        for &i in indices {
            if i == 0 || i > m {
                return Err(Error::InvalidArgument(format!(
                    "subset index {i} outside 1..={m}"
                )));
            }
            mask[i - 1] = true;
        }
        Ok(SubsetSelector { mask })
    }

    /// The `rank`-th subset in lexicographic membership order.
    pub fn from_rank(m: usize, rank: u64) -> Self {
        let mask = (0..m).map(|i| (rank >> (m - 1 - i)) & 1 == 1).collect();
        SubsetSelector { mask }
    }

    pub fn len(&self) -> usize {
        self.mask.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mask.is_empty()
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    /// Membership of the 0-based index `i`.
    pub fn contains(&self, i: usize) -> bool {
        self.mask[i]
    }

    /// 1-based members.
    pub fn indices(&self) -> Vec<usize> {
        self.mask
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i + 1))
            .collect()
    }

    pub fn complement(&self) -> SubsetSelector {
        SubsetSelector {
            mask: self.mask.iter().map(|b| !b).collect(),
        }
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    /// Position in the lexicographic enumeration (only meaningful for
    /// `m <= 64`).
    pub fn rank(&self) -> u64 {
        self.mask
            .iter()
            .fold(0u64, |acc, &b| (acc << 1) | u64::from(b))
    }
}

impl fmt::Display for SubsetSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let idx: Vec<String> = self.indices().iter().map(|i| i.to_string()).collect();
        write!(f, "{{{}}}", idx.join(","))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SigmaMode {
    Exact,
    Sampled { count: usize, seed: u64 },
}

/// The subsets visited by `mode`: all `2^m` in lexicographic order, or
/// `empty`, `full`, every singleton and co-singleton, followed by `count`
/// uniform draws (duplicates removed, first occurrence kept).
pub fn subsets(m: usize, mode: SigmaMode, cap: usize) -> Result<Vec<SubsetSelector>> {
    match mode {
        SigmaMode::Exact => {
            if m > cap || m >= 64 {
                return Err(Error::SubsetBudgetExceeded { m, cap });
            }
            Ok((0..1u64 << m).map(|r| SubsetSelector::from_rank(m, r)).collect())
        }
        SigmaMode::Sampled { count, seed } => {
            let mut out = Vec::new();
            let mut seen = HashSet::new();
            let mut push = |s: SubsetSelector, out: &mut Vec<SubsetSelector>| {
                if seen.insert(s.clone()) {
                    out.push(s);
                }
            };
            push(SubsetSelector::empty(m), &mut out);
            push(SubsetSelector::full(m), &mut out);
            for i in 0..m {
                let mut single = vec![false; m];
                single[i] = true;
                let s = SubsetSelector::from_mask(single);
                push(s.complement(), &mut out);
                push(s, &mut out);
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..count {
                let mask = (0..m).map(|_| rng.random::<bool>()).collect();
                push(SubsetSelector::from_mask(mask), &mut out);
            }
            Ok(out)
        }
    }
}

pub fn weave(pair: &WeavingPair, sigma: &SubsetSelector) -> Result<FusionFrame> {
    check_dim(pair.len(), sigma.len())?;
    let members = (0..pair.len()).map(|i| pair.chosen(sigma, i).clone()).collect();
    FusionFrame::new(members)
}

/// Precomputed `w_i^2 P_i` for both families, so each woven frame operator
/// is a sum of cached matrices.
pub(crate) struct WovenOperators {
    field: FieldTag,
    first: Vec<DMatrix<C64>>,
    second: Vec<DMatrix<C64>>,
    n: usize,
}

impl WovenOperators {
    pub(crate) fn new(pair: &WeavingPair) -> Self {
        WovenOperators {
            field: pair.field(),
            first: pair.first.members().iter().map(|m| m.weighted_projector()).collect(),
            second: pair.second.members().iter().map(|m| m.weighted_projector()).collect(),
            n: pair.dim(),
        }
    }

    pub(crate) fn frame_operator(&self, sigma: &SubsetSelector) -> SymmetricOperator {
        let mut s = DMatrix::from_element(self.n, self.n, ZERO);
        for i in 0..self.first.len() {
            s += if sigma.contains(i) { &self.first[i] } else { &self.second[i] };
        }
        SymmetricOperator::symmetrised(s, self.field)
    }

    pub(crate) fn bounds(&self, sigma: &SubsetSelector) -> FrameBounds {
        bounds_of(&self.frame_operator(sigma))
    }
}

/// Frame bounds of the family woven by `sigma`.
pub fn sigma_bounds(pair: &WeavingPair, sigma: &SubsetSelector) -> Result<FrameBounds> {
    check_dim(pair.len(), sigma.len())?;
    Ok(WovenOperators::new(pair).bounds(sigma))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub universal_lower: f64,
    pub universal_upper: f64,
    pub argmin_sigma: SubsetSelector,
    pub argmax_sigma: SubsetSelector,
    pub mode: SigmaMode,
    pub subsets_evaluated: usize,
}

pub fn universal_bounds(pair: &WeavingPair, mode: SigmaMode) -> Result<BoundsReport> {
    universal_bounds_with_cap(pair, mode, EXACT_CAP)
}

pub fn universal_bounds_with_cap(
    pair: &WeavingPair,
    mode: SigmaMode,
    cap: usize,
) -> Result<BoundsReport> {
    let sigmas = subsets(pair.len(), mode, cap)?;
    let ops = WovenOperators::new(pair);
    let per_sigma: Vec<FrameBounds> = sigmas.par_iter().map(|s| ops.bounds(s)).collect();

    let mut lo = 0usize;
    let mut hi = 0usize;
    for (k, b) in per_sigma.iter().enumerate() {
        if b.lower < per_sigma[lo].lower {
            lo = k;
        }
        if b.upper > per_sigma[hi].upper {
            hi = k;
        }
    }
    Ok(BoundsReport {
        universal_lower: per_sigma[lo].lower,
        universal_upper: per_sigma[hi].upper,
        argmin_sigma: sigmas[lo].clone(),
        argmax_sigma: sigmas[hi].clone(),
        mode,
        subsets_evaluated: sigmas.len(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeavingStatus {
    /// Every subset was checked and all woven families are fusion frames.
    Weaving,
    /// Some woven family has lower bound at or below the tolerance.
    NotWeaving,
    /// Sampled mode found no bad subset; this is not a certificate.
    NoViolationFound,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeavingVerdict {
    pub status: WeavingStatus,
    pub report: BoundsReport,
}

impl WeavingVerdict {
    /// The failing subset, when one was found.
    pub fn witness(&self) -> Option<&SubsetSelector> {
        (self.status == WeavingStatus::NotWeaving).then_some(&self.report.argmin_sigma)
    }
}

pub fn is_weaving(pair: &WeavingPair, tol: f64, mode: SigmaMode) -> Result<WeavingVerdict> {
    let report = universal_bounds(pair, mode)?;
    let status = if report.universal_lower <= tol {
        WeavingStatus::NotWeaving
    } else if matches!(mode, SigmaMode::Exact) {
        WeavingStatus::Weaving
    } else {
        WeavingStatus::NoViolationFound
    };
    Ok(WeavingVerdict { status, report })
}
