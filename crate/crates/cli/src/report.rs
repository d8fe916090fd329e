use serde::{Deserialize, Serialize};
use weavefuse::document::FrameSpecDocument;
use weavefuse::erasure::{ErasureReport, SweepTable};
use weavefuse::phase::{AlphaEstimate, ComplementReport, Retrievability, RetrievabilityVerdict};
use weavefuse::weaving::{BoundsReport, WeavingVerdict};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    CertifiedTrue,
    CertifiedFalse,
    Inconclusive,
    Completed,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::CertifiedTrue | Status::Completed => 0,
            Status::CertifiedFalse => 1,
            Status::Inconclusive => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransportSummary {
    /// Rows of `[re, im]` entries.
    pub unitary: Vec<Vec<[f64; 2]>>,
    pub bounds_before: BoundsReport,
    pub bounds_after: BoundsReport,
    pub verdict_before: Retrievability,
    pub verdict_after: Retrievability,
    pub transported: FrameSpecDocument,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReportBody {
    Bounds(BoundsReport),
    Weaving(WeavingVerdict),
    Phase(RetrievabilityVerdict),
    Complement(ComplementReport),
    Alpha(AlphaEstimate),
    Transport(Box<TransportSummary>),
    Erasure(ErasureReport),
    Sweep(SweepTable),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub command: String,
    /// SHA-256 of the input file, or of the argument list when there is none.
    pub inputs_digest: String,
    pub tool_version: String,
    pub seed: u64,
    pub wall_time_ms: f64,
    pub status: Status,
    pub exit_code: i32,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    pub body: ReportBody,
}

impl ReportDocument {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialise")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("command: {}\nstatus: {:?}\n", self.command, self.status);
        for note in &self.notes {
            out.push_str(&format!("note: {note}\n"));
        }
        match &self.body {
            ReportBody::Bounds(b) => {
                out.push_str(&format!(
                    "universal lower bound: {:.12} at sigma = {}\nuniversal upper bound: {:.12} at sigma = {}\nsubsets evaluated: {}\n",
                    b.universal_lower, b.argmin_sigma, b.universal_upper, b.argmax_sigma, b.subsets_evaluated
                ));
            }
            ReportBody::Weaving(v) => {
                out.push_str(&format!(
                    "weaving: {:?}\nlower bound {:.12} at sigma = {}\n",
                    v.status, v.report.universal_lower, v.report.argmin_sigma
                ));
            }
            ReportBody::Phase(v) => {
                for a in &v.per_sigma {
                    out.push_str(&format!("sigma = {}: kernel dim {}, {:?}\n", a.sigma, a.kernel_dim, a.outcome));
                }
                match &v.outcome {
                    Retrievability::Retrievable => out.push_str("phase retrievable\n"),
                    Retrievability::NotRetrievable { witness } => {
                        out.push_str(&format!(
                            "not phase retrievable at sigma = {}\nf = {}\ng = {}\ngamma gap {:.3e}, phase distance {:.6}\n",
                            witness.sigma,
                            fmt_vector(&witness.f),
                            fmt_vector(&witness.g),
                            witness.gamma_gap,
                            witness.phase_distance
                        ));
                    }
                    Retrievability::Inconclusive { reason } => out.push_str(&format!("inconclusive: {reason:?}\n")),
                }
            }
            ReportBody::Complement(c) => match &c.failing {
                None => out.push_str(&format!("complement property holds for all {} selections\n", c.per_selection.len())),
                Some(f) => out.push_str(&format!(
                    "fails for selection {}: subset {:?} has rank {}, complement rank {}\n",
                    f.selection, f.subset, f.subset_rank, f.complement_rank
                )),
            },
            ReportBody::Alpha(a) => {
                out.push_str(&format!(
                    "sigma = {}: alpha_hat = {:.6e} over {} samples ({} skipped)\n",
                    a.sigma, a.alpha_hat, a.samples, a.skipped
                ));
            }
            ReportBody::Transport(t) => {
                out.push_str(&format!(
                    "bounds before: [{:.12}, {:.12}]\nbounds after:  [{:.12}, {:.12}]\nverdict before: {}\nverdict after:  {}\n",
                    t.bounds_before.universal_lower,
                    t.bounds_before.universal_upper,
                    t.bounds_after.universal_lower,
                    t.bounds_after.universal_upper,
                    verdict_name(&t.verdict_before),
                    verdict_name(&t.verdict_after)
                ));
            }
            ReportBody::Erasure(e) => {
                out.push_str(&format!(
                    "trials {}: mean error {:.6e} (std {:.3e}), operator error {:.6e}, epsilon {:.6}, ratio {:.6}\n",
                    e.trials, e.mean_error, e.std_error, e.mean_operator_error, e.epsilon, e.ratio
                ));
            }
            ReportBody::Sweep(s) => {
                out.push_str(&s.to_csv());
                out.push_str(&format!("fitted_M: {:.6}\n", s.fitted_m));
            }
        }
        out
    }
}

pub fn verdict_name(v: &Retrievability) -> &'static str {
    match v {
        Retrievability::Retrievable => "retrievable",
        Retrievability::NotRetrievable { .. } => "not retrievable",
        Retrievability::Inconclusive { .. } => "inconclusive",
    }
}

fn fmt_vector(v: &weavefuse::hilbert::Vector) -> String {
    let parts: Vec<String> = v
        .coords()
        .iter()
        .map(|z| match v.field() {
            weavefuse::hilbert::FieldTag::Real => format!("{:.9}", z.re),
            weavefuse::hilbert::FieldTag::Complex => format!("{:.9}{:+.9}i", z.re, z.im),
        })
        .collect();
    format!("({})", parts.join(", "))
}
