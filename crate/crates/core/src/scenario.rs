//! Scenario documents: a JSON object with the simulator settings and the
//! transactions to track.
//!
//! ```json
//! {"seed": 7, "horizon": 40, "clusters": 3,
//!  "fork_prob": ["7/10", "1/5", "1/10"], "confirm_depth": 2,
//!  "transactions": [{"id": 1, "parties": [{"cluster": 0}, {"cluster": 2, "fork": 0}]}]}
//! ```
//!
//! Probabilities may be `"p/q"` strings, decimal strings or JSON numbers.
//! When every entry is a `"p/q"` string the sum must be exactly 1; otherwise
//! it must be within 1e-9 of 1. A party's `fork` defaults to 0 (genesis).

use serde_json::{Map, Value};

use crate::model::{Party, Transaction};
use crate::rational::Rational;
use crate::sim::{SimConfig, SimError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScenarioError {
    #[error("malformed document at line {line}, column {column}: {message}")]
    Malformed { line: usize, column: usize, message: String },
    #[error("missing field `{0}`")]
    MissingField(String),
    #[error("field `{path}`: {message}")]
    BadField { path: String, message: String },
    #[error("bad probabilities: {0}")]
    BadProbabilities(String),
    #[error("`{path}` references cluster {cluster}, but there are only {clusters}")]
    BadReference { path: String, cluster: usize, clusters: usize },
    #[error("invalid scenario: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scenario {
    pub config: SimConfig,
    pub transactions: Vec<Transaction>,
}

fn field<'a>(obj: &'a Map<String, Value>, path: &str, key: &str) -> Result<&'a Value, ScenarioError> {
    obj.get(key).ok_or_else(|| ScenarioError::MissingField(join(path, key)))
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

fn bad(path: impl Into<String>, message: impl Into<String>) -> ScenarioError {
    ScenarioError::BadField { path: path.into(), message: message.into() }
}

fn as_u64(v: &Value, path: &str) -> Result<u64, ScenarioError> {
    v.as_u64().ok_or_else(|| bad(path, "expected a non-negative integer"))
}

fn as_usize(v: &Value, path: &str) -> Result<usize, ScenarioError> {
    usize::try_from(as_u64(v, path)?).map_err(|_| bad(path, "integer too large"))
}

fn as_object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>, ScenarioError> {
    v.as_object().ok_or_else(|| bad(path, "expected an object"))
}

fn as_array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>, ScenarioError> {
    v.as_array().ok_or_else(|| bad(path, "expected an array"))
}

fn parse_probability(v: &Value, path: &str) -> Result<Rational, ScenarioError> {
    let parsed = match v {
        Value::String(s) => s.parse::<Rational>().map_err(|e| e.0),
        Value::Number(_) => serde_json::from_value::<Rational>(v.clone()).map_err(|e| e.to_string()),
        _ => Err("expected a number or a \"p/q\" string".to_string()),
    };
    parsed.map_err(|m| bad(path, m))
}

fn parse_transaction(v: &Value, path: &str, clusters: usize) -> Result<Transaction, ScenarioError> {
    let obj = as_object(v, path)?;
    let id = as_u64(field(obj, path, "id")?, &join(path, "id"))?;
    let parties_path = join(path, "parties");
    let parties = as_array(field(obj, path, "parties")?, &parties_path)?
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let ppath = format!("{parties_path}[{i}]");
            let pobj = as_object(p, &ppath)?;
            let cpath = join(&ppath, "cluster");
            let cluster = as_usize(field(pobj, &ppath, "cluster")?, &cpath)?;
            if cluster >= clusters {
                return Err(ScenarioError::BadReference { path: cpath, cluster, clusters });
            }
            let proxy_fork = match pobj.get("fork") {
                Some(f) => as_usize(f, &join(&ppath, "fork"))?,
                None => 0,
            };
            Ok(Party { cluster, proxy_fork })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Transaction::new(id, parties).map_err(|e| bad(path, e.to_string()))
}

pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let doc: Value = serde_json::from_str(text).map_err(|e| ScenarioError::Malformed {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let obj = as_object(&doc, "<root>")?;
    let seed = as_u64(field(obj, "", "seed")?, "seed")?;
    let horizon = as_usize(field(obj, "", "horizon")?, "horizon")?;
    let clusters = as_usize(field(obj, "", "clusters")?, "clusters")?;
    let confirm_depth = as_u64(field(obj, "", "confirm_depth")?, "confirm_depth")?;
    let raw_probs = as_array(field(obj, "", "fork_prob")?, "fork_prob")?;
    let fork_prob = raw_probs
        .iter()
        .enumerate()
        .map(|(i, p)| parse_probability(p, &format!("fork_prob[{i}]")))
        .collect::<Result<Vec<_>, _>>()?;

    if fork_prob.is_empty() {
        return Err(ScenarioError::BadProbabilities("fork_prob is empty".into()));
    }
    if let Some(p) = fork_prob.iter().find(|p| p.is_negative() || **p > Rational::ONE) {
        return Err(ScenarioError::BadProbabilities(format!("probability {p} outside [0, 1]")));
    }
    let all_fractions = raw_probs.iter().all(|p| p.as_str().is_some_and(|s| s.contains('/')));
    if all_fractions {
        let sum = fork_prob
            .iter()
            .try_fold(Rational::ZERO, |acc, p| acc.checked_add(*p))
            .ok_or_else(|| ScenarioError::BadProbabilities("denominators too large".into()))?;
        if sum != Rational::ONE {
            return Err(ScenarioError::BadProbabilities(format!("fractions sum to {sum}, not exactly 1")));
        }
    }

    let transactions = match obj.get("transactions") {
        None | Some(Value::Null) => Vec::new(),
        Some(v) => as_array(v, "transactions")?
            .iter()
            .enumerate()
            .map(|(i, t)| parse_transaction(t, &format!("transactions[{i}]"), clusters))
            .collect::<Result<Vec<_>, _>>()?,
    };
    let mut ids: Vec<u64> = transactions.iter().map(|t| t.id).collect();
    ids.sort_unstable();
    if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
        return Err(bad("transactions", format!("duplicate transaction id {}", w[0])));
    }

    let config = SimConfig { seed, horizon, clusters, fork_prob, confirm_depth };
    config.validate().map_err(|SimError::InvalidConfig(m)| {
        if m.contains("fork_prob") {
            ScenarioError::BadProbabilities(m)
        } else {
            ScenarioError::Invalid(m)
        }
    })?;
    Ok(Scenario { config, transactions })
}

/// Parses a seed override given as a decimal 64-bit unsigned integer.
pub fn parse_seed(text: &str) -> Result<u64, ScenarioError> {
    text.trim().parse::<u64>().map_err(|e| bad("seed", format!("`{text}` is not a 64-bit unsigned integer: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"seed": 3, "horizon": 10, "clusters": 2, "fork_prob": [0.8, 0.2], "confirm_depth": 2}"#;

    #[test]
    fn minimal_document() {
        let s = parse_scenario(MINIMAL).unwrap();
        assert!(s.transactions.is_empty());
        assert_eq!(s.config.fork_prob, vec![Rational::new(4, 5), Rational::new(1, 5)]);
        assert_eq!(s.config.seed, 3);
    }

    #[test]
    fn probabilities_summing_to_nine_tenths() {
        let doc = r#"{"seed": 3, "horizon": 10, "clusters": 2, "fork_prob": [0.7, 0.2], "confirm_depth": 2}"#;
        assert!(matches!(parse_scenario(doc), Err(ScenarioError::BadProbabilities(_))));
    }

    #[test]
    fn fractions_must_sum_exactly() {
        let ok = r#"{"seed":1,"horizon":1,"clusters":1,"fork_prob":["1/3","1/3","1/3"],"confirm_depth":1}"#;
        assert!(parse_scenario(ok).is_ok());
        let off = r#"{"seed":1,"horizon":1,"clusters":1,"fork_prob":["1/3","1/3","333333333333/1000000000000"],"confirm_depth":1}"#;
        assert!(matches!(parse_scenario(off), Err(ScenarioError::BadProbabilities(_))));
        let decimals = r#"{"seed":1,"horizon":1,"clusters":1,"fork_prob":[0.3333333333333,0.3333333333333,0.3333333333334],"confirm_depth":1}"#;
        assert!(parse_scenario(decimals).is_ok());
    }

    #[test]
    fn bad_reference() {
        let doc = r#"{"seed":1,"horizon":1,"clusters":3,"fork_prob":[1],"confirm_depth":1,
            "transactions":[{"id":1,"parties":[{"cluster":0},{"cluster":7}]}]}"#;
        assert_eq!(
            parse_scenario(doc),
            Err(ScenarioError::BadReference {
                path: "transactions[0].parties[1].cluster".into(),
                cluster: 7,
                clusters: 3
            })
        );
    }

    #[test]
    fn parties_default_to_genesis() {
        let doc = r#"{"seed":1,"horizon":1,"clusters":3,"fork_prob":["1"],"confirm_depth":1,
            "transactions":[{"id":4,"parties":[{"cluster":0},{"cluster":2,"fork":5}]}]}"#;
        let s = parse_scenario(doc).unwrap();
        assert_eq!(s.transactions[0].parties[0], Party { cluster: 0, proxy_fork: 0 });
        assert_eq!(s.transactions[0].parties[1], Party { cluster: 2, proxy_fork: 5 });
    }

    #[test]
    fn structured_errors() {
        let doc = "{\n  \"seed\": 1,\n  \"horizon\": ,\n}";
        match parse_scenario(doc) {
            Err(ScenarioError::Malformed { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        let doc = r#"{"seed":1,"clusters":1,"fork_prob":[1],"confirm_depth":1}"#;
        assert_eq!(parse_scenario(doc), Err(ScenarioError::MissingField("horizon".into())));
        let doc = r#"{"seed":-1,"horizon":1,"clusters":1,"fork_prob":[1],"confirm_depth":1}"#;
        assert!(matches!(parse_scenario(doc), Err(ScenarioError::BadField { path, .. }) if path == "seed"));
        let doc = r#"{"seed":1,"horizon":1,"clusters":0,"fork_prob":[1],"confirm_depth":1}"#;
        assert!(matches!(parse_scenario(doc), Err(ScenarioError::Invalid(_))));
        let doc = r#"{"seed":1,"horizon":1,"clusters":2,"fork_prob":[1],"confirm_depth":1,
            "transactions":[{"id":1,"parties":[{"cluster":0},{"cluster":0}]}]}"#;
        assert!(matches!(parse_scenario(doc), Err(ScenarioError::BadField { .. })));
    }

    #[test]
    fn seed_override_parsing() {
        assert_eq!(parse_seed("18446744073709551615"), Ok(u64::MAX));
        assert!(parse_seed("-3").is_err());
        assert!(parse_seed("abc").is_err());
    }
}
