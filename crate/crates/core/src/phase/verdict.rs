use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::lift::{lift_kernel, phase_lift_matrix};
use super::s11::{s11_intersection, S11Outcome, SearchBudget};
use super::{gamma, phase_distance};
use crate::error::Result;
use crate::hilbert::{Vector, DEFAULT_TOL};
use crate::weaving::{is_weaving, subsets, SigmaMode, SubsetSelector, WeavingPair, WeavingStatus, EXACT_CAP};

/// Validation thresholds for witness pairs.
const GAMMA_GAP_TOL: f64 = 1e-8;
const SIMILARITY_TOL: f64 = 1e-6;

/// Two vectors with equal measurements at `sigma` that are not unimodular
/// multiples of each other. Scaled so the larger has unit norm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseWitness {
    pub sigma: SubsetSelector,
    pub f: Vector,
    pub g: Vector,
    /// `||gamma(f) - gamma(g)||`.
    pub gamma_gap: f64,
    /// `min_u ||f - u g||`.
    pub phase_distance: f64,
}

impl PhaseWitness {
    /// Recomputes both checks against `pair`.
    pub fn validate(&self, pair: &WeavingPair) -> Result<bool> {
        let gap = gamma(pair, &self.sigma, &self.f)?.distance(&gamma(pair, &self.sigma, &self.g)?);
        let dist = phase_distance(&self.f, &self.g)?;
        Ok(gap < GAMMA_GAP_TOL && dist > SIMILARITY_TOL * self.f.norm())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaOutcome {
    Trivial,
    Nontrivial,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SigmaAnalysis {
    pub sigma: SubsetSelector,
    pub kernel_dim: usize,
    pub outcome: SigmaOutcome,
    /// Best search objective; absent for an empty kernel.
    pub objective: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum InconclusiveReason {
    /// Some woven family is not a fusion frame.
    NotWeaving { sigma: SubsetSelector },
    /// The kernel search ended between the certify and refute thresholds,
    /// or a candidate witness failed validation.
    SearchInconclusive { sigmas: Vec<SubsetSelector> },
    /// Every sampled subset was trivial, but not every subset was visited.
    NotExhaustive { subsets_checked: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Retrievability {
    Retrievable,
    NotRetrievable { witness: PhaseWitness },
    Inconclusive { reason: InconclusiveReason },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RetrievabilityVerdict {
    pub outcome: Retrievability,
    pub weaving: WeavingStatus,
    pub per_sigma: Vec<SigmaAnalysis>,
    pub mode: SigmaMode,
    pub budget: SearchBudget,
}

impl RetrievabilityVerdict {
    pub fn witness(&self) -> Option<&PhaseWitness> {
        match &self.outcome {
            Retrievability::NotRetrievable { witness } => Some(witness),
            _ => None,
        }
    }
}

fn analyse(
    pair: &WeavingPair,
    sigma: &SubsetSelector,
    budget: &SearchBudget,
) -> Result<(SigmaAnalysis, Option<PhaseWitness>)> {
    let kernel = lift_kernel(&phase_lift_matrix(pair, sigma)?, DEFAULT_TOL);
    let (outcome, objective, witness) = match s11_intersection(&kernel, budget) {
        S11Outcome::Trivial { objective } => (SigmaOutcome::Trivial, objective, None),
        S11Outcome::Inconclusive { objective } => (SigmaOutcome::Inconclusive, objective, None),
        S11Outcome::Nontrivial(w) => {
            let scale = w.f.norm().max(w.g.norm());
            let (f, g) = (w.f.scaled(1.0 / scale), w.g.scaled(1.0 / scale));
            let gamma_gap = gamma(pair, sigma, &f)?.distance(&gamma(pair, sigma, &g)?);
            let witness = PhaseWitness {
                sigma: sigma.clone(),
                phase_distance: phase_distance(&f, &g)?,
                f,
                g,
                gamma_gap,
            };
            if witness.validate(pair)? {
                (SigmaOutcome::Nontrivial, w.objective, Some(witness))
            } else {
                (SigmaOutcome::Inconclusive, w.objective, None)
            }
        }
    };
    let analysis = SigmaAnalysis {
        sigma: sigma.clone(),
        kernel_dim: kernel.kernel_dim,
        outcome,
        objective: objective.is_finite().then_some(objective),
    };
    Ok((analysis, witness))
}

/// Checks the weaving property first, then searches every (or every sampled)
/// subset's lift kernel for a rank-one difference. The first witness in
/// enumeration order is reported.
pub fn is_phase_retrievable(
    pair: &WeavingPair,
    mode: SigmaMode,
    budget: &SearchBudget,
) -> Result<RetrievabilityVerdict> {
    let weaving = is_weaving(pair, DEFAULT_TOL, mode)?;
    if let Some(sigma) = weaving.witness() {
        return Ok(RetrievabilityVerdict {
            outcome: Retrievability::Inconclusive {
                reason: InconclusiveReason::NotWeaving { sigma: sigma.clone() },
            },
            weaving: weaving.status,
            per_sigma: Vec::new(),
            mode,
            budget: *budget,
        });
    }

    let sigmas = subsets(pair.len(), mode, EXACT_CAP)?;
    let results = sigmas
        .par_iter()
        .map(|s| analyse(pair, s, budget))
        .collect::<Result<Vec<_>>>()?;

    let mut per_sigma = Vec::with_capacity(results.len());
    let mut first_witness = None;
    for (analysis, witness) in results {
        if first_witness.is_none() {
            first_witness = witness;
        }
        per_sigma.push(analysis);
    }

    let inconclusive: Vec<SubsetSelector> = per_sigma
        .iter()
        .filter(|a| a.outcome == SigmaOutcome::Inconclusive)
        .map(|a| a.sigma.clone())
        .collect();
    let outcome = if let Some(witness) = first_witness {
        Retrievability::NotRetrievable { witness }
    } else if !inconclusive.is_empty() {
        Retrievability::Inconclusive {
            reason: InconclusiveReason::SearchInconclusive { sigmas: inconclusive },
        }
    } else if matches!(mode, SigmaMode::Exact) {
        Retrievability::Retrievable
    } else {
        Retrievability::Inconclusive {
            reason: InconclusiveReason::NotExhaustive {
                subsets_checked: per_sigma.len(),
            },
        }
    };
    Ok(RetrievabilityVerdict {
        outcome,
        weaving: weaving.status,
        per_sigma,
        mode,
        budget: *budget,
    })
}
