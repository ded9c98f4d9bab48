//! Model ingestion: the JSON schema for hidden Markov process models.
//!
//! ```json
//! {"type": "binary_symmetric", "q": 0.2, "eps": 0.45}
//! {"type": "aggregated", "p1": .., "p2": .., "q1": .., "q2": .., "r1": .., "r2": ..}
//! {"type": "aggregated_case1", "p1": .., "p2": .., "q1": .., "q2": ..}
//! {"type": "aggregated_case2", "p1": .., "p2": .., "q": .., "r": ..}
//! {"type": "explicit", "P": [[..]], "pi": [[..]], "row_stochastic": false}
//! ```
//!
//! `P` is the L x L transition matrix, column-stochastic by default; with
//! `"row_stochastic": true` it is transposed on ingestion. `pi` is the
//! M x L observation channel `pi(x|s)` with columns summing to one.

use std::fs;
use std::path::Path;

use serde::Deserialize;

use hmpzeta::matrix::Matrix;
use hmpzeta::{Error, HmpModel, MarkovChain, Result};

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    BinarySymmetric {
        q: f64,
        eps: f64,
    },
    Aggregated {
        p1: f64,
        p2: f64,
        q1: f64,
        q2: f64,
        r1: f64,
        r2: f64,
    },
    AggregatedCase1 {
        p1: f64,
        p2: f64,
        q1: f64,
        q2: f64,
    },
    AggregatedCase2 {
        p1: f64,
        p2: f64,
        q: f64,
        r: f64,
    },
    Explicit {
        #[serde(rename = "P")]
        p: Vec<Vec<f64>>,
        pi: Vec<Vec<f64>>,
        #[serde(default)]
        row_stochastic: bool,
    },
}

impl ModelSpec {
    pub fn build(&self) -> Result<HmpModel> {
        match self {
            ModelSpec::BinarySymmetric { q, eps } => HmpModel::binary_symmetric(*q, *eps),
            ModelSpec::Aggregated { p1, p2, q1, q2, r1, r2 } => {
                HmpModel::aggregated(*p1, *p2, *q1, *q2, *r1, *r2)
            }
            ModelSpec::AggregatedCase1 { p1, p2, q1, q2 } => {
                HmpModel::aggregated_case1(*p1, *p2, *q1, *q2)
            }
            ModelSpec::AggregatedCase2 { p1, p2, q, r } => {
                HmpModel::aggregated_case2(*p1, *p2, *q, *r)
            }
            ModelSpec::Explicit { p, pi, row_stochastic } => {
                let p = Matrix::from_rows(p)?;
                let chain = if *row_stochastic {
                    MarkovChain::from_row_stochastic(p)?
                } else {
                    MarkovChain::new(p)?
                };
                let channel = Matrix::from_rows(pi)?;
                HmpModel::new(chain, channel)
            }
        }
    }

    /// Short description used in JSON output.
    pub fn describe(&self) -> serde_json::Value {
        match self {
            ModelSpec::BinarySymmetric { q, eps } => serde_json::json!({
                "type": "binary_symmetric", "q": q, "eps": eps
            }),
            ModelSpec::Aggregated { p1, p2, q1, q2, r1, r2 } => serde_json::json!({
                "type": "aggregated", "p1": p1, "p2": p2, "q1": q1, "q2": q2, "r1": r1, "r2": r2
            }),
            ModelSpec::AggregatedCase1 { p1, p2, q1, q2 } => serde_json::json!({
                "type": "aggregated_case1", "p1": p1, "p2": p2, "q1": q1, "q2": q2
            }),
            ModelSpec::AggregatedCase2 { p1, p2, q, r } => serde_json::json!({
                "type": "aggregated_case2", "p1": p1, "p2": p2, "q": q, "r": r
            }),
            ModelSpec::Explicit { row_stochastic, .. } => serde_json::json!({
                "type": "explicit", "row_stochastic": row_stochastic
            }),
        }
    }
}

pub fn load_model(path: &Path) -> Result<(ModelSpec, HmpModel)> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Validation(format!("cannot read {}: {e}", path.display())))?;
    let spec: ModelSpec = serde_json::from_str(&text)
        .map_err(|e| Error::Validation(format!("invalid model file {}: {e}", path.display())))?;
    let model = spec.build()?;
    Ok((spec, model))
}
