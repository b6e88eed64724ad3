use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use cqp_lang::{subst_process, Expr, Process};
use quantum_state::{mixture_density_matrix, DensityMatrix, JointState};
use sha2::{Digest, Sha256};

use crate::value::{is_lambda_var, lambda_var, Value};
use crate::{Result, SemanticsError};

/// Weights below this are treated as zero when pruning components.
pub const WEIGHT_EPS: f64 = 1e-14;

/// One member of a mixed configuration: a weight, the joint quantum state and
/// the values bound to the shared term's λ-variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub weight: f64,
    pub state: JointState,
    pub values: BTreeMap<String, Value>,
}

/// A weighted mixture of components sharing one process term, one ownership
/// set and one view of the environment. A pure configuration is the
/// single-component case.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedConfig {
    pub term: Process,
    /// Quantum names owned by the term.
    pub omega: BTreeSet<String>,
    /// Quantum names held by the environment, in the order they entered it.
    pub env_names: Vec<String>,
    /// Number of environment injections consumed per input channel.
    pub cursor: BTreeMap<String, usize>,
    pub components: Vec<Component>,
}

/// Distribution over mixed configurations, one branch per output value tuple.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbBranch {
    pub probability: f64,
    pub values: Vec<Value>,
    pub config: MixedConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Configuration {
    Mixed(MixedConfig),
    Prob(Vec<ProbBranch>),
}

fn lambda_vars_in_order(p: &Process) -> Vec<String> {
    fn walk(e: &Expr, seen: &mut Vec<String>) {
        match e {
            Expr::Var(x) => {
                if is_lambda_var(x) && !seen.contains(x) {
                    seen.push(x.clone());
                }
            }
            Expr::Lit(_) | Expr::Bool(_) | Expr::Unitary(_) => {}
            Expr::Measure(es) | Expr::PsMeasure(es) => es.iter().for_each(|a| walk(a, seen)),
            Expr::ApplyUnitary(ts, u) => {
                ts.iter().for_each(|a| walk(a, seen));
                walk(u, seen);
            }
            Expr::Plus(a, b) | Expr::Eq(a, b) | Expr::And(a, b) | Expr::Pair(a, b) => {
                walk(a, seen);
                walk(b, seen);
            }
            Expr::If(c, a, b) => {
                walk(c, seen);
                walk(a, seen);
                walk(b, seen);
            }
            Expr::PsApply { qubit, .. } => walk(qubit, seen),
        }
    }
    let mut seen = Vec::new();
    p.exprs(&mut |e| walk(e, &mut seen));
    seen
}

/// Structural clean-up: drops finished parallel components and restrictions
/// whose channel no longer occurs.
pub fn simplify(p: Process) -> Process {
    match p {
        Process::Par(a, b) => match (simplify(*a), simplify(*b)) {
            (Process::Nil, q) | (q, Process::Nil) => q,
            (a, b) => Process::par(a, b),
        },
        Process::New(c, t, body) => {
            let body = simplify(*body);
            if body.free_vars().contains(&c) {
                Process::New(c, t, Box::new(body))
            } else {
                body
            }
        }
        other => other,
    }
}

impl MixedConfig {
    pub fn total_weight(&self) -> f64 {
        self.components.iter().map(|c| c.weight).sum()
    }

    pub fn is_pure(&self) -> bool {
        self.components.len() == 1
    }

    /// Brings the configuration to canonical form: renormalizes weights,
    /// substitutes λ-variables that agree across all components, renumbers
    /// the rest by first occurrence and merges identical components.
    pub fn normalize(mut self) -> Result<MixedConfig> {
        self.components.retain(|c| c.weight > WEIGHT_EPS);
        let total = self.total_weight();
        if self.components.is_empty() || total <= WEIGHT_EPS {
            return Err(SemanticsError::PostSelectionEmpty);
        }
        for c in &mut self.components {
            c.weight /= total;
        }
        self.term = simplify(self.term);

        let used = lambda_vars_in_order(&self.term);
        let mut fixed = BTreeMap::new();
        for x in &used {
            let first = self.components[0].values.get(x).cloned().ok_or_else(|| {
                SemanticsError::Stuck(format!("outcome variable {x} has no value"))
            })?;
            if self.components.iter().all(|c| c.values.get(x) == Some(&first)) {
                fixed.insert(x.clone(), first.to_expr());
            }
        }
        if !fixed.is_empty() {
            self.term = subst_process(&self.term, &fixed);
        }
        let order: Vec<String> = used.into_iter().filter(|x| !fixed.contains_key(x)).collect();
        let rename: BTreeMap<String, Expr> =
            order.iter().enumerate().map(|(i, x)| (x.clone(), Expr::Var(lambda_var(i)))).collect();
        if rename.iter().any(|(x, e)| *e != Expr::Var(x.clone())) {
            self.term = subst_process(&self.term, &rename);
        }
        for c in &mut self.components {
            let old = std::mem::take(&mut c.values);
            c.values = order
                .iter()
                .enumerate()
                .filter_map(|(i, x)| old.get(x).map(|v| (lambda_var(i), v.clone())))
                .collect();
        }

        let mut merged: BTreeMap<(Vec<(String, Value)>, String), Component> = BTreeMap::new();
        for c in self.components {
            let key = (c.values.clone().into_iter().collect::<Vec<_>>(), c.state.canonical_key());
            match merged.get_mut(&key) {
                Some(m) => m.weight += c.weight,
                None => {
                    merged.insert(key, c);
                }
            }
        }
        self.components = merged.into_values().collect();
        Ok(self)
    }

    /// Next unused λ-variable index.
    pub fn fresh_lambda_index(&self) -> usize {
        self.components
            .iter()
            .flat_map(|c| c.values.keys())
            .filter_map(|x| x.trim_start_matches('%').parse::<usize>().ok())
            .map(|n| n + 1)
            .max()
            .unwrap_or(0)
    }

    /// Reduced density matrix of the environment's quantum names, averaged
    /// over components, in environment entry order.
    pub fn env_density(&self) -> Result<DensityMatrix> {
        let keep: Vec<&str> = self.env_names.iter().map(String::as_str).collect();
        let comps: Vec<(f64, &JointState)> = self.components.iter().map(|c| (c.weight, &c.state)).collect();
        Ok(mixture_density_matrix(&comps, &keep)?)
    }

    /// Reduced density matrix of an arbitrary name list, averaged over components.
    pub fn density_of(&self, names: &[&str]) -> Result<DensityMatrix> {
        let comps: Vec<(f64, &JointState)> = self.components.iter().map(|c| (c.weight, &c.state)).collect();
        Ok(mixture_density_matrix(&comps, names)?)
    }

    pub fn canonical_text(&self) -> String {
        let mut s = String::new();
        let _ = write!(s, "M|{}|w=", cqp_lang::process_to_string(&self.term));
        for x in &self.omega {
            let _ = write!(s, "{x},");
        }
        s.push_str("|e=");
        for x in &self.env_names {
            let _ = write!(s, "{x},");
        }
        s.push_str("|k=");
        for (c, n) in &self.cursor {
            let _ = write!(s, "{c}:{n},");
        }
        let mut comps: Vec<String> = self
            .components
            .iter()
            .map(|c| {
                let vals: Vec<String> = c.values.iter().map(|(k, v)| format!("{k}={v}")).collect();
                format!("{:.9};{};{}", c.weight, vals.join(","), c.state.canonical_key())
            })
            .collect();
        comps.sort();
        for c in comps {
            let _ = write!(s, "|c={c}");
        }
        s
    }
}

impl Configuration {
    pub fn canonical_text(&self) -> String {
        match self {
            Configuration::Mixed(m) => m.canonical_text(),
            Configuration::Prob(bs) => {
                let mut s = String::from("P");
                for b in bs {
                    let vals: Vec<String> = b.values.iter().map(|v| v.to_string()).collect();
                    let _ = write!(s, "[{:.9};{};{}]", b.probability, vals.join(","), b.config.canonical_text());
                }
                s
            }
        }
    }

    /// Stable node identifier: SHA-256 of the canonical text, hex encoded.
    pub fn canonical_hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_text().as_bytes()))
    }

    pub fn is_prob(&self) -> bool {
        matches!(self, Configuration::Prob(_))
    }

    pub fn as_mixed(&self) -> Option<&MixedConfig> {
        match self {
            Configuration::Mixed(m) => Some(m),
            Configuration::Prob(_) => None,
        }
    }

    /// Term text for reports; probabilistic nodes show their branch terms.
    pub fn term_text(&self) -> String {
        match self {
            Configuration::Mixed(m) => cqp_lang::process_to_string(&m.term),
            Configuration::Prob(bs) => bs
                .iter()
                .map(|b| format!("{} : {}", b.probability, cqp_lang::process_to_string(&b.config.term)))
                .collect::<Vec<_>>()
                .join(" [+] "),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use cqp_lang::parse_process;
    use quantum_state::Complex64;

    fn comp(w: f64, vals: &[(&str, Value)]) -> Component {
        Component {
            weight: w,
            state: JointState::empty(),
            values: vals.iter().map(|(k, v)| (k.to_string(), v.clone())).collect(),
        }
    }

    /// Parses a term in which `%n` outcome variables are allowed.
    fn term(src: &str) -> Process {
        let p = parse_process(&src.replace('%', "LV_")).unwrap();
        let sub = p
            .free_vars()
            .into_iter()
            .filter(|x| x.starts_with("LV_"))
            .map(|x| (x.clone(), Expr::Var(x.replace("LV_", "%"))))
            .collect();
        subst_process(&p, &sub)
    }

    fn config(src: &str, comps: Vec<Component>) -> MixedConfig {
        MixedConfig {
            term: term(src),
            omega: BTreeSet::new(),
            env_names: vec![],
            cursor: BTreeMap::new(),
            components: comps,
        }
    }

    #[test]
    fn agreeing_outcomes_are_substituted() {
        let c = config("c![%4, %7].0", vec![comp(0.25, &[("%4", Value::Int(1)), ("%7", Value::Int(0))]), comp(0.75, &[("%4", Value::Int(1)), ("%7", Value::Int(1))])]);
        let n = c.normalize().unwrap();
        assert_eq!(n.term, term("c![1, %0].0"));
        assert_eq!(n.components.len(), 2);
        assert_eq!(n.components[0].values.get("%0"), Some(&Value::Int(0)));
    }

    #[test]
    fn identical_components_merge_and_unused_outcomes_vanish() {
        let c = config("(0 | (new d:^[Int]) 0)", vec![comp(1.0, &[("%0", Value::Int(1))]), comp(3.0, &[("%0", Value::Int(2))])]);
        let n = c.normalize().unwrap();
        assert_eq!(n.term, Process::Nil);
        assert_eq!(n.components.len(), 1);
        assert!((n.components[0].weight - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hash_ignores_global_phase() {
        let st = JointState::empty().allocate_qubit("q").unwrap();
        let mk = |s: JointState| {
            Configuration::Mixed(MixedConfig {
                term: Process::Nil,
                omega: ["q".to_string()].into(),
                env_names: vec![],
                cursor: BTreeMap::new(),
                components: vec![Component { weight: 1.0, state: s, values: BTreeMap::new() }],
            })
        };
        let a = mk(st.clone());
        let b = mk(st.scaled(Complex64::new(0.0, 1.0)));
        assert_eq!(a.canonical_hash(), b.canonical_hash());
        assert_eq!(a.canonical_hash().len(), 64);
    }

    #[test]
    fn empty_mixture_is_an_error() {
        let c = config("0", vec![comp(0.0, &[])]);
        assert_eq!(c.normalize(), Err(SemanticsError::PostSelectionEmpty));
    }
}
