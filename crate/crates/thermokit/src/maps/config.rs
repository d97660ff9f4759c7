//! JSON map configuration, shared by the CLI and the report generator.
//!
//! ```json
//! {"family": "infinite_mp", "params": {"beta": 0.5}}
//! {"family": "linear_custom", "params": {"branches": [[0.0, 0.25, 4.0], [0.25, 1.0, 1.3333333]]}}
//! ```
//!
//! Optional `params.truncate` restricts any family to its first `N` branches.

use serde::Deserialize;

use super::MapModel;
use crate::error::Error;
use crate::Result;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    family: String,
    #[serde(default)]
    params: RawParams,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    beta: Option<f64>,
    n_start: Option<u64>,
    branches: Option<Vec<[f64; 3]>>,
    truncate: Option<u64>,
}

/// Build a model from a parsed JSON value.
pub fn model_from_config(value: &serde_json::Value) -> Result<MapModel> {
    let raw: RawConfig = serde_json::from_value(value.clone())
        .map_err(|e| Error::MapConfig(format!("bad map config: {e}")))?;
    let model = match raw.family.as_str() {
        "gauss" => MapModel::gauss(),
        "renyi" => MapModel::renyi(),
        "infinite_mp" => {
            let beta = raw
                .params
                .beta
                .ok_or_else(|| Error::MapConfig("infinite_mp needs params.beta".into()))?;
            MapModel::infinite_mp(beta)?
        }
        "pathological" => MapModel::pathological(raw.params.n_start.unwrap_or(1))?,
        "linear_custom" => {
            let branches = raw
                .params
                .branches
                .ok_or_else(|| Error::MapConfig("linear_custom needs params.branches".into()))?;
            let tuples: Vec<(f64, f64, f64)> =
                branches.iter().map(|b| (b[0], b[1], b[2])).collect();
            MapModel::linear_custom(&tuples)?
        }
        other => {
            return Err(Error::MapConfig(format!(
                "unknown family {other:?} (expected gauss, renyi, infinite_mp, pathological or linear_custom)"
            )))
        }
    };
    match raw.params.truncate {
        Some(n) => model.truncate(n),
        None => Ok(model),
    }
}

/// Build a model from JSON text.
pub fn model_from_json(text: &str) -> Result<MapModel> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::MapConfig(format!("bad JSON: {e}")))?;
    model_from_config(&value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::MapFamily;

    #[test]
    fn parses_known_families() {
        let g = model_from_json(r#"{"family": "gauss"}"#).unwrap();
        assert_eq!(g.family, MapFamily::Gauss);
        let m = model_from_json(r#"{"family": "infinite_mp", "params": {"beta": 0.5}}"#).unwrap();
        assert_eq!(m.family, MapFamily::InfiniteMp { beta: 0.5 });
        let t = model_from_json(r#"{"family": "gauss", "params": {"truncate": 10}}"#).unwrap();
        assert_eq!(t.branch_count(), Some(10));
    }

    #[test]
    fn rejects_unknown_family_and_bad_params() {
        assert!(model_from_json(r#"{"family": "doubling"}"#).is_err());
        assert!(model_from_json(r#"{"family": "infinite_mp"}"#).is_err());
        assert!(model_from_json(r#"{"family": "infinite_mp", "params": {"beta": -1}}"#).is_err());
        assert!(model_from_json("not json").is_err());
    }
}
