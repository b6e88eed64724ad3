use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;

use cqp_lang::{expand, Process, Program};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::config::{Component, Configuration, MixedConfig};
use crate::step::{step, EnvironmentSchedule};
use crate::value::Value;
use crate::{Result, SemanticsError};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Label {
    Tau,
    /// Resolution of a probabilistic configuration into one branch.
    ProbStep { p: f64, values: Vec<Value> },
    /// Receipt from the environment; `names` are the quantum names handed over.
    Input { chan: String, values: Vec<Value>, names: Vec<String> },
    /// Output to the environment; `values` lists every tuple that may be seen.
    Output { chan: String, values: Vec<Vec<Value>>, names: Vec<String> },
}

impl Label {
    pub fn is_tau(&self) -> bool {
        matches!(self, Label::Tau)
    }
}

fn tuple_text(vs: &[Value]) -> String {
    vs.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ")
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = |ns: &[String]| if ns.is_empty() { String::new() } else { format!(" / {}", ns.join(", ")) };
        match self {
            Label::Tau => write!(f, "τ"),
            Label::ProbStep { p, values } => write!(f, "prob {p:.6} ({})", tuple_text(values)),
            Label::Input { chan, values, names: ns } => write!(f, "{chan}?[{}{}]", tuple_text(values), names(ns)),
            Label::Output { chan, values, names: ns } => {
                let set: Vec<String> = values.iter().map(|t| format!("({})", tuple_text(t))).collect();
                write!(f, "{chan}![{{{}}}{}]", set.join(", "), names(ns))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub max_nodes: usize,
    pub max_photons: u32,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { max_nodes: 100_000, max_photons: 4 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: String,
    pub config: Configuration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub src: usize,
    pub label: Label,
    pub dst: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LtsGraph {
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
    pub initial: usize,
    out: Vec<Vec<usize>>,
}

impl LtsGraph {
    pub fn outgoing(&self, n: usize) -> impl Iterator<Item = &Edge> {
        self.out[n].iter().map(move |&i| &self.edges[i])
    }

    pub fn is_prob(&self, n: usize) -> bool {
        self.nodes[n].config.is_prob()
    }

    /// No τ step is possible from `n`.
    pub fn is_tau_stable(&self, n: usize) -> bool {
        !self.outgoing(n).any(|e| e.label.is_tau())
    }

    pub fn is_terminal(&self, n: usize) -> bool {
        self.out[n].is_empty()
    }

    /// Terminal nodes whose term has not finished.
    pub fn deadlocks(&self) -> Vec<usize> {
        (0..self.nodes.len())
            .filter(|&n| {
                self.is_terminal(n) && self.nodes[n].config.as_mixed().is_some_and(|m| m.term != Process::Nil)
            })
            .collect()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.id == id)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let nodes: Vec<_> = self
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| {
                let (kind, components, omega) = match &n.config {
                    Configuration::Mixed(m) => (
                        if m.is_pure() { "pure" } else { "mixed" },
                        m.components.len(),
                        m.omega.iter().cloned().collect::<Vec<_>>(),
                    ),
                    Configuration::Prob(bs) => ("prob", bs.len(), Vec::new()),
                };
                json!({
                    "id": n.id,
                    "kind": kind,
                    "term": n.config.term_text(),
                    "components": components,
                    "omega": omega,
                    "tau_stable": self.is_tau_stable(i),
                    "deadlock": self.is_terminal(i) && n.config.as_mixed().is_some_and(|m| m.term != Process::Nil),
                })
            })
            .collect();
        let edges: Vec<_> = self
            .edges
            .iter()
            .map(|e| json!({ "src": self.nodes[e.src].id, "dst": self.nodes[e.dst].id, "label": e.label }))
            .collect();
        json!({ "initial": self.nodes[self.initial].id, "nodes": nodes, "edges": edges })
    }
}

/// Expands `program` (keeping the environment's names reserved) and explores
/// its transition system.
pub fn explore(program: &Program, env: &EnvironmentSchedule, limits: Limits) -> Result<LtsGraph> {
    let reserved: Vec<&str> = env.env_names.iter().map(String::as_str).collect();
    let term = expand(program, &reserved)?;
    explore_process(&term, env, limits)
}

/// Breadth-first exploration from `term` with the environment's initial
/// state. Successors of a level are computed in parallel and merged in order,
/// so the node numbering is deterministic.
pub fn explore_process(term: &Process, env: &EnvironmentSchedule, limits: Limits) -> Result<LtsGraph> {
    let init = MixedConfig {
        term: term.clone(),
        omega: Default::default(),
        env_names: env.env_names.clone(),
        cursor: BTreeMap::new(),
        components: vec![Component { weight: 1.0, state: env.state.clone(), values: BTreeMap::new() }],
    }
    .normalize()?;
    let init = Configuration::Mixed(init);
    let mut g = LtsGraph { nodes: Vec::new(), edges: Vec::new(), initial: 0, out: Vec::new() };
    let mut index: HashMap<String, usize> = HashMap::new();
    let id = init.canonical_hash();
    index.insert(id.clone(), 0);
    g.nodes.push(Node { id, config: init });
    g.out.push(Vec::new());

    let mut frontier: VecDeque<usize> = VecDeque::from([0]);
    while !frontier.is_empty() {
        let level: Vec<usize> = frontier.drain(..).collect();
        let succ: Vec<Result<Vec<(Label, Configuration, String)>>> = level
            .par_iter()
            .map(|&n| {
                let next = step(&g.nodes[n].config, env)?;
                next.into_iter()
                    .map(|(l, c)| {
                        check_photons(&c, limits)?;
                        let h = c.canonical_hash();
                        Ok((l, c, h))
                    })
                    .collect()
            })
            .collect();
        for (&src, s) in level.iter().zip(succ) {
            for (label, config, id) in s? {
                let dst = match index.get(&id) {
                    Some(&d) => d,
                    None => {
                        if g.nodes.len() >= limits.max_nodes {
                            return Err(SemanticsError::LimitExceeded(format!(
                                "more than {} configurations",
                                limits.max_nodes
                            )));
                        }
                        let d = g.nodes.len();
                        index.insert(id.clone(), d);
                        g.nodes.push(Node { id, config });
                        g.out.push(Vec::new());
                        frontier.push_back(d);
                        d
                    }
                };
                g.out[src].push(g.edges.len());
                g.edges.push(Edge { src, label, dst });
            }
        }
    }
    Ok(g)
}

fn check_photons(c: &Configuration, limits: Limits) -> Result<()> {
    let mixed: Vec<&MixedConfig> = match c {
        Configuration::Mixed(m) => vec![m],
        Configuration::Prob(bs) => bs.iter().map(|b| &b.config).collect(),
    };
    for m in mixed {
        for comp in &m.components {
            let b = comp.state.layout().photon_budget();
            if b > limits.max_photons {
                return Err(SemanticsError::LimitExceeded(format!(
                    "{b} photons exceed the limit of {}",
                    limits.max_photons
                )));
            }
        }
    }
    Ok(())
}

/// Per channel, the tuples observed on it in order.
pub type Observation = BTreeMap<String, Vec<Vec<Value>>>;
pub type Distribution = BTreeMap<Observation, f64>;

const MAX_DISTRIBUTIONS: usize = 16;

fn same_distribution(a: &Distribution, b: &Distribution) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|((ka, pa), (kb, pb))| ka == kb && (pa - pb).abs() < 1e-9)
}

fn push_unique(set: &mut Vec<Distribution>, d: Distribution) {
    if set.len() < MAX_DISTRIBUTIONS && !set.iter().any(|e| same_distribution(e, &d)) {
        set.push(d);
    }
}

fn prepend(d: &Distribution, chan: &str, tuple: &[Value], p: f64, into: &mut Distribution) {
    for (obs, q) in d {
        let mut o = obs.clone();
        o.entry(chan.to_string()).or_default().insert(0, tuple.to_vec());
        *into.entry(o).or_insert(0.0) += p * q;
    }
}

/// Distributions of output observations over complete runs from the initial
/// node, one per way of resolving the nondeterministic choices (deduplicated).
/// A confluent system yields exactly one.
pub fn terminal_distributions(g: &LtsGraph) -> Vec<Distribution> {
    let mut memo: HashMap<usize, Vec<Distribution>> = HashMap::new();
    dists(g, g.initial, &mut memo)
}

fn dists(g: &LtsGraph, n: usize, memo: &mut HashMap<usize, Vec<Distribution>>) -> Vec<Distribution> {
    if let Some(d) = memo.get(&n) {
        return d.clone();
    }
    let mut set: Vec<Distribution> = Vec::new();
    if g.is_terminal(n) {
        set.push(BTreeMap::from([(Observation::new(), 1.0)]));
    }
    for e in g.outgoing(n) {
        match &e.label {
            Label::Output { chan, values, .. } if g.is_prob(e.dst) => {
                // combine the branches; each may itself offer several distributions
                let mut acc: Vec<Distribution> = vec![Distribution::new()];
                for b in g.outgoing(e.dst) {
                    let Label::ProbStep { p, values } = &b.label else { continue };
                    let children = dists(g, b.dst, memo);
                    let mut next = Vec::new();
                    for a in &acc {
                        for c in &children {
                            let mut d = a.clone();
                            prepend(c, chan, values, *p, &mut d);
                            push_unique(&mut next, d);
                        }
                    }
                    acc = next;
                }
                let _ = values;
                acc.into_iter().for_each(|d| push_unique(&mut set, d));
            }
            Label::Output { chan, values, .. } => {
                for c in dists(g, e.dst, memo) {
                    let mut d = Distribution::new();
                    prepend(&c, chan, &values[0], 1.0, &mut d);
                    push_unique(&mut set, d);
                }
            }
            _ => dists(g, e.dst, memo).into_iter().for_each(|d| push_unique(&mut set, d)),
        }
    }
    memo.insert(n, set.clone());
    set
}
