use serde::{Deserialize, Serialize};

use super::{invalid_at, LineMap};
use crate::error::{Error, Result};
use crate::instance::{KnapsackInstance, ProblemKind, Profits, Validation};

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum JsonProfits {
    Matrix(Vec<Vec<u64>>),
    Vector(Vec<u64>),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CanonicalInstance {
    name: String,
    kind: ProblemKind,
    n: usize,
    d: usize,
    capacities: Vec<u64>,
    weights: Vec<Vec<u64>>,
    profits: JsonProfits,
}

pub fn from_json(text: &str, label: &str) -> Result<KnapsackInstance> {
    let parse_err = |line: usize, message: String| Error::Parse { path: label.to_string(), line, message };
    let raw: CanonicalInstance = serde_json::from_str(text).map_err(|e| parse_err(e.line(), e.to_string()))?;
    let key_line = |key: &str| {
        let needle = format!("\"{key}\"");
        text.lines().position(|l| l.contains(&needle)).map_or(1, |i| i + 1)
    };

    let profits = match (raw.kind, raw.profits) {
        (ProblemKind::Qkp, JsonProfits::Matrix(m)) => Profits::Matrix(m),
        (ProblemKind::Mdkp, JsonProfits::Vector(v)) => Profits::Vector(v),
        (kind, _) => {
            return Err(parse_err(
                key_line("profits"),
                format!("{kind} instances need {} profits", if kind == ProblemKind::Qkp { "matrix" } else { "vector" }),
            ))
        }
    };
    if raw.d != raw.capacities.len() || raw.d != raw.weights.len() {
        return Err(parse_err(key_line("d"), format!("d = {} disagrees with the capacity/weight rows", raw.d)));
    }
    if raw.weights.iter().any(|row| row.len() != raw.n) {
        return Err(parse_err(key_line("n"), format!("n = {} disagrees with the weight rows", raw.n)));
    }

    let weights_line = key_line("weights");
    let capacities_line = key_line("capacities");
    let profits_line = key_line("profits");
    let lines = LineMap {
        weights: vec![vec![weights_line; raw.n]; raw.d],
        capacities: vec![capacities_line; raw.d],
        profits: vec![vec![profits_line; raw.n]; raw.n],
        fallback: 1,
    };
    KnapsackInstance::new(raw.name, raw.weights, raw.capacities, profits, Validation::Strict)
        .map_err(|e| invalid_at(label, &lines, e))
}

pub fn to_json(instance: &KnapsackInstance) -> String {
    let profits = match instance.profits() {
        Profits::Matrix(m) => JsonProfits::Matrix(m.clone()),
        Profits::Vector(v) => JsonProfits::Vector(v.clone()),
    };
    let raw = CanonicalInstance {
        name: instance.name().to_string(),
        kind: instance.kind(),
        n: instance.n(),
        d: instance.d(),
        capacities: instance.capacities().to_vec(),
        weights: instance.weights().to_vec(),
        profits,
    };
    serde_json::to_string_pretty(&raw).expect("instance serializes")
}
