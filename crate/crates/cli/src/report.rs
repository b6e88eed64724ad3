//! Serializable reports. Every report carries a `report` tag naming the
//! subcommand that produced it; `docs/report.schema.json` describes them all.

use std::collections::BTreeMap;

use equivalence::Verdict;
use loqc_models::InputStateSpec;
use semantics::{Distribution, Value};
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct InputJson {
    pub label: String,
    /// `[re, im]` for α, β, γ, δ.
    pub amplitudes: [[f64; 2]; 4],
}

impl InputJson {
    pub fn new(label: &str, spec: &InputStateSpec) -> Self {
        InputJson { label: label.to_string(), amplitudes: spec.amplitudes().map(|a| [a.re, a.im]) }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Outcome {
    /// Tuples seen on each channel, in order.
    pub outputs: BTreeMap<String, Vec<Vec<Value>>>,
    pub probability: f64,
}

pub fn outcomes(d: &Distribution) -> Vec<Outcome> {
    d.iter().map(|(obs, p)| Outcome { outputs: obs.clone(), probability: *p }).collect()
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct LtsStats {
    pub nodes: usize,
    pub edges: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub report: &'static str,
    pub model: String,
    pub input: InputJson,
    pub terminal_distribution: Vec<Outcome>,
    /// Number of distinct distributions reachable by resolving choices; 1
    /// when the system is confluent.
    pub distributions: usize,
    pub deadlocks: Vec<String>,
    pub lts_stats: LtsStats,
}

#[derive(Debug, Clone, Serialize)]
pub struct Amplitude {
    /// Occupations of `c1 c2 t1 t2 | x1 x2`.
    pub basis: String,
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct StateReport {
    pub report: &'static str,
    pub model: String,
    pub input: InputJson,
    pub probe: &'static str,
    pub node: String,
    pub roles: BTreeMap<&'static str, String>,
    pub amplitudes: Vec<Amplitude>,
}

#[derive(Debug, Clone, Serialize)]
pub struct InputVerdict {
    pub input: InputJson,
    pub nodes_a: usize,
    pub nodes_b: usize,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Serialize)]
pub struct EquivReport {
    pub report: &'static str,
    pub a: String,
    pub b: String,
    pub tolerance: f64,
    pub equivalent: bool,
    pub inputs: Vec<InputVerdict>,
}
