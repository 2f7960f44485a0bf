//! Feature sets and the valuation they induce on restricted structures.
//!
//! A feature set is a list of (formula, nonnegative value) pairs; the value
//! of a structure is the sum over features whose formula holds in the
//! initial state. Duplicate formulas are allowed and their values
//! accumulate.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::logic::{parse_formula, ClosurePlan, Formula, LogicError};
use crate::model::Ccgs;

#[derive(Debug, Error)]
pub enum ValuationError {
    #[error("feature document is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("feature {index}: {source}")]
    Formula {
        index: usize,
        #[source]
        source: LogicError,
    },
    #[error("feature {index}: value {value} is negative")]
    NegativeValue { index: usize, value: f64 },
    #[error("feature {index}: value is not finite")]
    NonFiniteValue { index: usize },
    #[error(transparent)]
    Logic(#[from] LogicError),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct FeatureDoc {
    formula: String,
    value: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct FeatureSetDoc {
    features: Vec<FeatureDoc>,
}

/// One valued formula. The formula is stored desugared; `text` keeps the
/// source form for reports.
#[derive(Debug, Clone, PartialEq)]
pub struct Feature {
    pub formula: Formula,
    pub value: f64,
    pub text: String,
}

/// An ordered list of features defining a valuation.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeatureSet {
    pub features: Vec<Feature>,
}

impl FeatureSet {
    pub fn new(pairs: Vec<(Formula, f64)>) -> Result<FeatureSet, ValuationError> {
        let mut features = Vec::with_capacity(pairs.len());
        for (index, (formula, value)) in pairs.into_iter().enumerate() {
            if !value.is_finite() {
                return Err(ValuationError::NonFiniteValue { index });
            }
            if value < 0.0 {
                return Err(ValuationError::NegativeValue { index, value });
            }
            let text = formula.canon();
            features.push(Feature {
                formula: formula.desugar(),
                value,
                text,
            });
        }
        Ok(FeatureSet { features })
    }

    pub fn from_json(doc: &str) -> Result<FeatureSet, ValuationError> {
        let doc: FeatureSetDoc = serde_json::from_str(doc)?;
        let mut features = Vec::with_capacity(doc.features.len());
        for (index, f) in doc.features.iter().enumerate() {
            let parsed = parse_formula(&f.formula)
                .map_err(|source| ValuationError::Formula { index, source })?;
            if !f.value.is_finite() {
                return Err(ValuationError::NonFiniteValue { index });
            }
            if f.value < 0.0 {
                return Err(ValuationError::NegativeValue {
                    index,
                    value: f.value,
                });
            }
            features.push(Feature {
                formula: parsed.desugar(),
                value: f.value,
                text: f.formula.clone(),
            });
        }
        Ok(FeatureSet { features })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&FeatureSetDoc {
            features: self
                .features
                .iter()
                .map(|f| FeatureDoc {
                    formula: f.text.clone(),
                    value: f.value,
                })
                .collect(),
        })
        .expect("feature serialization cannot fail")
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    /// Sum of all feature values: the ceiling of any valuation.
    pub fn total_value(&self) -> f64 {
        self.features.iter().map(|f| f.value).sum()
    }

    /// Deduplicated union of the per-formula closures, in canonical order
    /// (size ascending, then canonical form).
    pub fn union_closure(&self) -> Vec<Formula> {
        let mut acc = std::collections::BTreeMap::new();
        for f in &self.features {
            for g in f.formula.closure() {
                acc.insert((g.size(), g.canon()), g);
            }
        }
        acc.into_values().collect()
    }

    /// Evaluation plan for this feature set against `model`.
    pub fn plan(&self, model: &Ccgs) -> Result<ClosurePlan, ValuationError> {
        let formulas: Vec<Formula> = self.features.iter().map(|f| f.formula.clone()).collect();
        Ok(ClosurePlan::build(&formulas, model)?)
    }
}

/// Sum of feature values satisfied in the initial state of `model`.
pub fn valuate(model: &Ccgs, features: &FeatureSet) -> Result<f64, ValuationError> {
    let plan = features.plan(model)?;
    let sat = crate::logic::eval_plan(crate::logic::StructureView::full(model), &plan);
    let q0 = model.initial();
    let mut total = 0.0;
    for f in &features.features {
        let fid = plan.index_of(&f.formula).expect("feature is in the plan");
        if sat[fid][q0] {
            total += f.value;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SocialLaw;

    const EX1: &str = include_str!("../fixtures/ex1_identity.json");
    const FEATURES: &str = include_str!("../fixtures/ex1_features.json");

    fn setup() -> (Ccgs, FeatureSet) {
        (
            Ccgs::from_json(EX1).unwrap(),
            FeatureSet::from_json(FEATURES).unwrap(),
        )
    }

    #[test]
    fn loads_eleven_features_with_values() {
        let (_, fs) = setup();
        assert_eq!(fs.len(), 11);
        assert_eq!(fs.features[0].value, 30.0);
        assert_eq!(fs.features[0].text, "<<>> G !eps");
        assert_eq!(fs.total_value(), 114.0);
    }

    #[test]
    fn empty_and_negative_documents() {
        let fs = FeatureSet::from_json(r#"{"features":[]}"#).unwrap();
        assert!(fs.is_empty());
        let err = FeatureSet::from_json(r#"{"features":[{"formula":"p","value":-1}]}"#).unwrap_err();
        assert!(matches!(err, ValuationError::NegativeValue { index: 0, .. }));
    }

    #[test]
    fn parse_error_names_feature_index() {
        let err =
            FeatureSet::from_json(r#"{"features":[{"formula":"p","value":1},{"formula":"q |","value":2}]}"#)
                .unwrap_err();
        assert!(matches!(err, ValuationError::Formula { index: 1, .. }));
    }

    #[test]
    fn unrestricted_value_is_32() {
        let (m, fs) = setup();
        assert_eq!(valuate(&m, &fs).unwrap(), 32.0);
    }

    #[test]
    fn eta3_value_is_90() {
        let (m, fs) = setup();
        let eta3 = SocialLaw::from_entries([(2, "q2", "w"), (1, "q3", "w")]);
        let r = m.apply_law(&eta3).unwrap();
        assert_eq!(valuate(&r, &fs).unwrap(), 90.0);
    }

    #[test]
    fn empty_feature_set_values_zero() {
        let (m, _) = setup();
        assert_eq!(valuate(&m, &FeatureSet::default()).unwrap(), 0.0);
    }

    #[test]
    fn union_closure_deduplicates_shared_parts() {
        let p = Formula::prop("a1");
        let fs = FeatureSet::new(vec![(p.clone(), 1.0), (Formula::not(p), 2.0)]).unwrap();
        let cl = fs.union_closure();
        assert_eq!(cl.len(), 2);
        assert_eq!(cl[0].canon(), "a1");
        assert_eq!(cl[1].canon(), "(! a1)");
    }

    #[test]
    fn union_closure_of_single_box_feature() {
        let f = parse_formula("<<>> G !eps").unwrap();
        let fs = FeatureSet::new(vec![(f, 30.0)]).unwrap();
        assert_eq!(fs.union_closure().len(), 3);
    }

    #[test]
    fn duplicate_features_accumulate() {
        let (m, _) = setup();
        let f = parse_formula("a1").unwrap();
        let fs = FeatureSet::new(vec![(f.clone(), 2.0), (f, 3.0)]).unwrap();
        assert_eq!(valuate(&m, &fs).unwrap(), 5.0);
    }

    #[test]
    fn valuation_is_monotone_under_feature_addition() {
        let (m, fs) = setup();
        let mut grown = FeatureSet::default();
        let mut prev = 0.0;
        for f in &fs.features {
            grown.features.push(f.clone());
            let v = valuate(&m, &grown).unwrap();
            assert!(v >= prev);
            prev = v;
        }
    }
}
