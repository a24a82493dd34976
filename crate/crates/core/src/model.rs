//! Model files: algebra, operator pair, optional constraint projectors and
//! expectations, all with exact `"p/q"` rationals.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraSpec, GradedLieAlgebra, PresetSpec, RawSpec};
use crate::catalog::ModelSpec;
use crate::error::{Error, Result};
use crate::integrability::Verdict;
use crate::linalg::QMatrix;
use crate::rational::{serde_rational_matrix, Rational};
use crate::sigma::{ChiralOperatorPair, ConstraintProjector, OperatorSpec};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectorSpec {
    #[serde(with = "serde_rational_matrix")]
    pub pi: Vec<Vec<Rational>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grade: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expected {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<Verdict>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub notes: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub algebra: AlgebraSpec,
    pub sigma: OperatorSpec,
    /// Derived from the kernel of `Σ⁺ − Σ⁻` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub projectors: Option<Vec<ProjectorSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected: Option<Expected>,
}

/// A validated model ready for the analysis routines.
#[derive(Clone, Debug)]
pub struct Model {
    pub name: String,
    pub algebra: GradedLieAlgebra,
    pub pair: ChiralOperatorPair,
    pub projectors: Vec<ConstraintProjector>,
    pub expected: Option<Verdict>,
}

impl ModelFile {
    pub fn parse(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)
            .map_err(|e| Error::Parse(format!("line {}, column {}: {e}", e.line(), e.column())))?;
        serde_json::from_value(value.clone()).map_err(|e| Error::Parse(diagnose(&value).unwrap_or_else(|| e.to_string())))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text).map_err(|e| match e {
            Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serialization")
    }

    pub fn from_spec(m: &ModelSpec) -> Self {
        ModelFile {
            algebra: m.algebra.spec().clone(),
            sigma: OperatorSpec::from_pair(&m.pair),
            projectors: Some(
                m.projectors.iter().map(|p| ProjectorSpec { pi: p.pi.to_rows(), grade: p.grade }).collect(),
            ),
            expected: Some(Expected {
                name: Some(m.name.clone()),
                verdict: Some(m.expected_verdict),
                notes: m.notes.clone(),
            }),
        }
    }

    /// Builds and validates algebra, operators and projectors.
    pub fn build(&self) -> Result<Model> {
        let algebra = GradedLieAlgebra::build(&self.algebra)?;
        let pair = self.sigma.build(&algebra)?;
        let projectors = match &self.projectors {
            None => pair.find_constraint_projectors(&algebra),
            Some(list) => {
                let mut out = Vec::with_capacity(list.len());
                for (i, p) in list.iter().enumerate() {
                    let pi = QMatrix::from_rows(p.pi.clone());
                    if pi.rows() != algebra.dim() || pi.cols() != algebra.dim() {
                        return Err(Error::Validation(format!(
                            "projector {i} is {}x{}, expected {}x{}",
                            pi.rows(),
                            pi.cols(),
                            algebra.dim(),
                            algebra.dim()
                        )));
                    }
                    let proj = ConstraintProjector { pi, grade: p.grade };
                    if !proj.annihilates(&pair) {
                        return Err(Error::Validation(format!("projector {i} does not annihilate sigma+ - sigma-")));
                    }
                    out.push(proj);
                }
                out
            }
        };
        let expected = self.expected.as_ref();
        Ok(Model {
            name: expected.and_then(|e| e.name.clone()).unwrap_or_else(|| algebra.name().to_string()),
            algebra,
            pair,
            projectors,
            expected: expected.and_then(|e| e.verdict),
        })
    }
}

/// Names the offending field when an untagged section fails to match.
fn diagnose(value: &serde_json::Value) -> Option<String> {
    let algebra = value.get("algebra")?;
    let err = if algebra.get("preset").is_some() {
        serde_json::from_value::<PresetSpec>(algebra.clone()).err()
    } else {
        serde_json::from_value::<RawSpec>(algebra.clone()).err()
    };
    if let Some(e) = err {
        return Some(format!("field `algebra`: {e}"));
    }
    let sigma = value.get("sigma")?;
    let keys = ["eigenvalues_plus", "eigenvalues_minus", "matrix_plus", "matrix_minus"];
    if !keys.iter().any(|k| sigma.get(k).is_some()) {
        return Some("field `sigma`: expected eigenvalues_plus/eigenvalues_minus or matrix_plus/matrix_minus".into());
    }
    serde_json::from_value::<OperatorSpec>(sigma.clone())
        .err()
        .map(|_| "field `sigma`: entries must be \"p/q\" strings with both chiralities present".into())
}

impl From<ModelSpec> for Model {
    fn from(m: ModelSpec) -> Self {
        Model {
            name: m.name,
            algebra: m.algebra,
            pair: m.pair,
            projectors: m.projectors,
            expected: Some(m.expected_verdict),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{builtin, representative_models};

    #[test]
    fn builtins_round_trip() {
        for name in representative_models() {
            let spec = builtin(&name).unwrap();
            let file = ModelFile::from_spec(&spec);
            let back = ModelFile::parse(&file.to_json_pretty()).unwrap();
            assert_eq!(back, file, "{name}");
            let model = back.build().unwrap();
            assert_eq!(model.pair, spec.pair, "{name}");
            assert_eq!(model.projectors, spec.projectors, "{name}");
        }
    }

    #[test]
    fn parse_errors_carry_position() {
        let err = ModelFile::parse("{\n  \"algebra\": ,\n}").unwrap_err();
        assert!(matches!(err, Error::Parse(ref m) if m.starts_with("line 2")), "{err}");
        let err = ModelFile::parse(r#"{"algebra": {"dim": 3}, "sigma": {}}"#).unwrap_err();
        assert!(matches!(err, Error::Parse(ref m) if m.contains("`algebra`") && m.contains("`f`")), "{err}");
    }
}
