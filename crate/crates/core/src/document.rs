//! JSON frame specifications.
//!
//! ```json
//! {
//!   "field": "complex",
//!   "dim": 2,
//!   "first":  [{"weight": 1.0, "span": [[[1, 0], [0, 0]]], "label": "V1"}],
//!   "second": [{"weight": 1.0, "span": [[[0, 0], [1, 0]]]}]
//! }
//! ```
//!
//! Real coordinates are plain numbers; complex ones are `[re, im]` pairs.
//! A real document may also use pairs as long as every imaginary part is 0.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fusion::{FusionFrame, WeightedSubspace};
use crate::hilbert::{orthonormalize, FieldTag, Vector, C64, DEFAULT_TOL};
use crate::weaving::WeavingPair;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Real(f64),
    Complex([f64; 2]),
}

impl Scalar {
    fn value(self) -> C64 {
        match self {
            Scalar::Real(x) => C64::new(x, 0.0),
            Scalar::Complex([re, im]) => C64::new(re, im),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MemberSpec {
    pub weight: f64,
    pub span: Vec<Vec<Scalar>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameSpecDocument {
    pub field: FieldTag,
    pub dim: usize,
    pub first: Vec<MemberSpec>,
    pub second: Vec<MemberSpec>,
}

impl FrameSpecDocument {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents always serialise")
    }

    /// Validates and orthonormalises every span.
    pub fn to_pair(&self) -> Result<WeavingPair> {
        if self.dim == 0 {
            return Err(Error::Validation {
                block: "document".into(),
                index: 0,
                reason: "dimension must be positive".into(),
            });
        }
        if self.first.len() != self.second.len() {
            return Err(Error::Validation {
                block: "second".into(),
                index: self.second.len().min(self.first.len()),
                reason: format!(
                    "blocks have different lengths ({} and {})",
                    self.first.len(),
                    self.second.len()
                ),
            });
        }
        let first = self.frame("first", &self.first)?;
        let second = self.frame("second", &self.second)?;
        WeavingPair::new(first, second)
    }

    fn frame(&self, block: &str, members: &[MemberSpec]) -> Result<FusionFrame> {
        let invalid = |index: usize, reason: String| Error::Validation {
            block: block.to_string(),
            index,
            reason,
        };
        if members.is_empty() {
            return Err(invalid(0, "block has no members".into()));
        }
        let built = members
            .iter()
            .enumerate()
            .map(|(index, spec)| {
                if !(spec.weight.is_finite() && spec.weight > 0.0) {
                    return Err(invalid(index, format!("weight {} is not positive", spec.weight)));
                }
                if spec.span.is_empty() {
                    return Err(invalid(index, "span is empty".into()));
                }
                let vectors = spec
                    .span
                    .iter()
                    .map(|coords| {
                        if coords.len() != self.dim {
                            return Err(invalid(index, format!("vector of length {} in dimension {}", coords.len(), self.dim)));
                        }
                        let values: Vec<C64> = coords.iter().map(|s| s.value()).collect();
                        if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                            return Err(invalid(index, "non-finite coordinate".into()));
                        }
                        match self.field {
                            FieldTag::Complex => Ok(Vector::complex(&values)),
                            FieldTag::Real => {
                                if values.iter().any(|z| z.im != 0.0) {
                                    return Err(invalid(index, "complex coordinate in a real document".into()));
                                }
                                Ok(Vector::real(&values.iter().map(|z| z.re).collect::<Vec<_>>()))
                            }
                        }
                    })
                    .collect::<Result<Vec<_>>>()?;
                let subspace = orthonormalize(&vectors, DEFAULT_TOL).map_err(|e| invalid(index, e.to_string()))?;
                WeightedSubspace::new(subspace, spec.weight).map_err(|e| invalid(index, e.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        FusionFrame::new(built)
    }

    /// Writes a pair back out using its orthonormal bases.
    pub fn from_pair(pair: &WeavingPair) -> Self {
        let field = pair.field();
        let block = |frame: &FusionFrame| -> Vec<MemberSpec> {
            frame
                .members()
                .iter()
                .map(|m| MemberSpec {
                    weight: m.weight(),
                    span: m
                        .subspace()
                        .basis_vectors()
                        .iter()
                        .map(|v| {
                            v.coords()
                                .iter()
                                .map(|z| match field {
                                    FieldTag::Real => Scalar::Real(z.re),
                                    FieldTag::Complex => Scalar::Complex([z.re, z.im]),
                                })
                                .collect()
                        })
                        .collect(),
                    label: None,
                })
                .collect()
        };
        FrameSpecDocument {
            field,
            dim: pair.dim(),
            first: block(pair.first()),
            second: block(pair.second()),
        }
    }
}

/// Reads and validates a specification file.
pub fn load_spec(path: impl AsRef<Path>) -> Result<WeavingPair> {
    let text = std::fs::read_to_string(path.as_ref())
        .map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
    FrameSpecDocument::parse(&text)?.to_pair()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn doc(weight: f64) -> String {
        format!(
            r#"{{"field":"real","dim":2,
               "first":[{{"weight":1,"span":[[1,0]]}},{{"weight":{weight},"span":[[0,1]]}}],
               "second":[{{"weight":1,"span":[[1,1]]}},{{"weight":1,"span":[[1,-1]]}}]}}"#
        )
    }

    #[test]
    fn parses_a_small_document() {
        let pair = FrameSpecDocument::parse(&doc(2.0)).unwrap().to_pair().unwrap();
        assert_eq!((pair.dim(), pair.len()), (2, 2));
        assert_eq!(pair.first().member(1).weight(), 2.0);
    }

    #[test]
    fn zero_weight_names_the_entry() {
        let err = FrameSpecDocument::parse(&doc(0.0)).unwrap().to_pair().unwrap_err();
        match err {
            Error::Validation { block, index, .. } => assert_eq!((block.as_str(), index), ("first", 1)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn malformed_json_is_a_parse_error() {
        assert!(matches!(FrameSpecDocument::parse("{"), Err(Error::Parse(_))));
    }

    #[test]
    fn wrong_length_vector_is_rejected() {
        let text = doc(1.0).replace("[[0,1]]", "[[0,1,2]]");
        let err = FrameSpecDocument::parse(&text).unwrap().to_pair().unwrap_err();
        assert!(matches!(err, Error::Validation { index: 1, .. }));
    }

    #[test]
    fn zero_span_is_rejected() {
        let text = doc(1.0).replace("[[1,1]]", "[[0,0]]");
        let err = FrameSpecDocument::parse(&text).unwrap().to_pair().unwrap_err();
        assert!(matches!(err, Error::Validation { index: 0, .. }));
    }

    #[test]
    fn complex_entries_in_real_documents_are_rejected() {
        let text = doc(1.0).replace("[[1,0]]", "[[[1,0.5],[0,0]]]");
        assert!(FrameSpecDocument::parse(&text).unwrap().to_pair().is_err());
    }

    #[test]
    fn round_trip_through_json_preserves_projectors() {
        for pair in [catalog::example_3_2(), catalog::example_3_3(), catalog::example_2_1(4)] {
            let text = FrameSpecDocument::from_pair(&pair).to_json();
            let back = FrameSpecDocument::parse(&text).unwrap().to_pair().unwrap();
            for i in 0..pair.len() {
                for (a, b) in [(pair.first(), back.first()), (pair.second(), back.second())] {
                    let d = a.member(i).weighted_projector() - b.member(i).weighted_projector();
                    assert!(d.norm() < 1e-14);
                }
            }
        }
    }
}
