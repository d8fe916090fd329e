use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{check_dim, numerical_rank, Vector, C64};
use crate::weaving::{SubsetSelector, WeavingPair};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplementFailure {
    /// Which vectors come from the first family.
    pub selection: SubsetSelector,
    /// 1-based indices of the subset that, with its complement, fails to span.
    pub subset: Vec<usize>,
    pub subset_rank: usize,
    pub complement_rank: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplementReport {
    pub holds: bool,
    pub failing: Option<ComplementFailure>,
    /// Per selection, in subset enumeration order: does it pass.
    pub per_selection: Vec<bool>,
}

fn rank_of(vectors: &[&Vector], idx: &[usize], tol: f64) -> usize {
    let n = vectors[0].dim();
    let m = DMatrix::<C64>::from_fn(n, idx.len(), |r, c| vectors[idx[c]].coords()[r]);
    numerical_rank(&m, tol)
}

/// Lexicographic `r`-combinations of `0..m`.
fn combinations(m: usize, r: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut current: Option<Vec<usize>> = (r <= m).then(|| (0..r).collect());
    std::iter::from_fn(move || {
        let out = current.clone()?;
        let mut next = out.clone();
        let mut i = r;
        loop {
            if i == 0 {
                current = None;
                break;
            }
            i -= 1;
            if next[i] < m - r + i {
                next[i] += 1;
                for j in (i + 1)..r {
                    next[j] = next[j - 1] + 1;
                }
                current = Some(next);
                break;
            }
        }
        Some(out)
    })
}

/// First proper nonempty subset `S` (by size, then lexicographically) such
/// that neither `S` nor its complement spans; 1-based, with both ranks.
fn failure_of(vectors: &[&Vector], tol: f64) -> Option<(Vec<usize>, usize, usize)> {
    let m = vectors.len();
    let n = vectors.first()?.dim();
    for r in 1..m {
        for subset in combinations(m, r) {
            let rest: Vec<usize> = (0..m).filter(|i| !subset.contains(i)).collect();
            let a = rank_of(vectors, &subset, tol);
            if a == n {
                continue;
            }
            let b = rank_of(vectors, &rest, tol);
            if b < n {
                return Some((subset.iter().map(|i| i + 1).collect(), a, b));
            }
        }
    }
    None
}

/// Checks a single vector family; `None` means the property holds.
pub fn frame_complement_failure(vectors: &[Vector], tol: f64) -> Result<Option<Vec<usize>>> {
    if let Some(first) = vectors.first() {
        for v in vectors {
            first.check_compatible(v)?;
        }
    }
    let refs: Vec<&Vector> = vectors.iter().collect();
    Ok(failure_of(&refs, tol).map(|(s, _, _)| s))
}

/// Applies the check to every woven selection of two vector families.
pub fn complement_property(first: &[Vector], second: &[Vector], tol: f64) -> Result<ComplementReport> {
    check_dim(first.len(), second.len())?;
    let m = first.len();
    if let Some(head) = first.first() {
        for v in first.iter().chain(second) {
            head.check_compatible(v)?;
        }
    }
    if m >= 64 {
        return Err(Error::SubsetBudgetExceeded { m, cap: 63 });
    }
    let mut per_selection = Vec::with_capacity(1 << m);
    let mut failing = None;
    for r in 0..1u64 << m {
        let selection = SubsetSelector::from_rank(m, r);
        let chosen: Vec<&Vector> = (0..m)
            .map(|i| if selection.contains(i) { &first[i] } else { &second[i] })
            .collect();
        match failure_of(&chosen, tol) {
            None => per_selection.push(true),
            Some((subset, subset_rank, complement_rank)) => {
                per_selection.push(false);
                if failing.is_none() {
                    failing = Some(ComplementFailure {
                        selection,
                        subset,
                        subset_rank,
                        complement_rank,
                    });
                }
            }
        }
    }
    Ok(ComplementReport {
        holds: failing.is_none(),
        failing,
        per_selection,
    })
}

/// The pair form; every member must be a line.
pub fn complement_property_of_pair(pair: &WeavingPair, tol: f64) -> Result<ComplementReport> {
    let lines = |frame: &crate::fusion::FusionFrame| -> Result<Vec<Vector>> {
        frame
            .members()
            .iter()
            .enumerate()
            .map(|(index, m)| {
                let dim = m.subspace().dim();
                if dim != 1 {
                    return Err(Error::NotOneDimensional { index, dim });
                }
                Ok(m.subspace().basis_vectors().remove(0))
            })
            .collect()
    };
    complement_property(&lines(pair.first())?, &lines(pair.second())?, tol)
}
