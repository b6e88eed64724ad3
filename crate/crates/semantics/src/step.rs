use std::collections::{BTreeMap, BTreeSet};

use cqp_lang::{subst_process, Expr, Process};
use quantum_state::JointState;

use crate::config::{Component, Configuration, MixedConfig, ProbBranch};
use crate::eval::{eval_all, run_action};
use crate::lts::Label;
use crate::value::{is_lambda_var, lambda_var, Value};
use crate::{Result, SemanticsError};

/// What the environment offers and observes: the prepared state of the
/// quantum names it starts with, the payloads it will send on each free input
/// channel (in order), and the free channels whose outputs it reads.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvironmentSchedule {
    pub state: JointState,
    pub env_names: Vec<String>,
    pub injections: BTreeMap<String, Vec<Vec<Value>>>,
    pub reads: BTreeSet<String>,
}

impl EnvironmentSchedule {
    /// No environment state, no injections, no observed channels.
    pub fn closed() -> Self {
        EnvironmentSchedule {
            state: JointState::empty(),
            env_names: Vec::new(),
            injections: BTreeMap::new(),
            reads: BTreeSet::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Dir {
    Left,
    Right,
    Body,
}

/// Position of a prefix-headed subterm: the directions taken from the root and,
/// for each, whether the node left was a choice.
#[derive(Debug, Clone)]
struct Head<'a> {
    path: Vec<(Dir, bool)>,
    proc: &'a Process,
}

fn heads(p: &Process) -> Vec<Head<'_>> {
    fn walk<'a>(p: &'a Process, path: &mut Vec<(Dir, bool)>, out: &mut Vec<Head<'a>>) {
        match p {
            Process::Nil | Process::Call(..) => {}
            Process::Par(a, b) | Process::Sum(a, b) => {
                let sum = matches!(p, Process::Sum(..));
                path.push((Dir::Left, sum));
                walk(a, path, out);
                path.pop();
                path.push((Dir::Right, sum));
                walk(b, path, out);
                path.pop();
            }
            Process::New(_, _, body) => {
                path.push((Dir::Body, false));
                walk(body, path, out);
                path.pop();
            }
            _ => out.push(Head { path: path.clone(), proc: p }),
        }
    }
    let mut out = Vec::new();
    walk(p, &mut Vec::new(), &mut out);
    out
}

/// Two heads can interact unless they sit in different branches of a choice.
fn compatible(a: &Head<'_>, b: &Head<'_>) -> bool {
    for (x, y) in a.path.iter().zip(&b.path) {
        if x.0 != y.0 {
            return !x.1;
        }
    }
    true
}

/// Replaces the subterms at the given paths. Passing through a choice keeps
/// only the branch taken.
fn rebuild(p: &Process, edits: Vec<Edit<'_>>) -> Process {
    if edits.is_empty() {
        return p.clone();
    }
    if edits.len() == 1 && edits[0].0.is_empty() {
        return edits.into_iter().next().map(|(_, q)| q).unwrap_or(Process::Nil);
    }
    match p {
        Process::Par(a, b) => {
            let right = split(edits.clone(), Dir::Right);
            let left = split(edits, Dir::Left);
            Process::par(rebuild(a, left), rebuild(b, right))
        }
        Process::Sum(a, b) => {
            let d = edits[0].0[0].0;
            let chosen = if d == Dir::Left { a } else { b };
            rebuild(chosen, split(edits, d))
        }
        Process::New(c, t, body) => Process::New(c.clone(), t.clone(), Box::new(rebuild(body, split(edits, Dir::Body)))),
        other => other.clone(),
    }
}

type Edit<'p> = (&'p [(Dir, bool)], Process);

fn split(edits: Vec<Edit<'_>>, d: Dir) -> Vec<Edit<'_>> {
    edits.into_iter().filter(|(path, _)| path[0].0 == d).map(|(path, q)| (&path[1..], q)).collect()
}

fn restricted_names(p: &Process, out: &mut BTreeSet<String>) {
    match p {
        Process::New(c, _, body) => {
            out.insert(c.clone());
            restricted_names(body, out);
        }
        Process::Par(a, b) | Process::Sum(a, b) => {
            restricted_names(a, out);
            restricted_names(b, out);
        }
        Process::Input { cont, .. }
        | Process::Output { cont, .. }
        | Process::Action(_, cont)
        | Process::QbitDecl(_, cont)
        | Process::NsDecl(_, cont) => restricted_names(cont, out),
        Process::Nil | Process::Call(..) => {}
    }
}

fn chan_name(e: &Expr) -> Option<&str> {
    match e {
        Expr::Var(x) if !is_lambda_var(x) => Some(x),
        _ => None,
    }
}

fn bind(binders: &[(String, cqp_lang::TypeExpr)], payload: &[Expr], cont: &Process) -> Process {
    let sub: BTreeMap<String, Expr> = binders.iter().map(|(x, _)| x.clone()).zip(payload.iter().cloned()).collect();
    subst_process(cont, &sub)
}

fn with_term(m: &MixedConfig, term: Process) -> MixedConfig {
    MixedConfig { term, ..m.clone() }
}

/// All transitions of a configuration. Probabilistic configurations resolve
/// to their branches; mixed ones offer τ steps (expression evaluation,
/// declarations, actions, internal communication) and visible environment
/// inputs and outputs.
pub fn step(config: &Configuration, env: &EnvironmentSchedule) -> Result<Vec<(Label, Configuration)>> {
    match config {
        Configuration::Prob(branches) => Ok(branches
            .iter()
            .map(|b| {
                (Label::ProbStep { p: b.probability, values: b.values.clone() }, Configuration::Mixed(b.config.clone()))
            })
            .collect()),
        Configuration::Mixed(m) => step_mixed(m, env),
    }
}

fn step_mixed(m: &MixedConfig, env: &EnvironmentSchedule) -> Result<Vec<(Label, Configuration)>> {
    let hs = heads(&m.term);
    let mut restricted = BTreeSet::new();
    restricted_names(&m.term, &mut restricted);
    let mut out = Vec::new();
    let tau = |c: MixedConfig| -> Result<(Label, Configuration)> { Ok((Label::Tau, Configuration::Mixed(c.normalize()?))) };

    for h in &hs {
        let at = |q: Process| rebuild(&m.term, vec![(&h.path[..], q)]);
        match h.proc {
            Process::Action(e, cont) => {
                let mut comps = Vec::new();
                let mut omega = m.omega.clone();
                for c in &m.components {
                    let (outcomes, change) = run_action(e, &c.state, &c.values, &m.omega)?;
                    for o in outcomes {
                        comps.push(Component { weight: c.weight * o.factor, state: o.state, values: c.values.clone() });
                    }
                    omega = m.omega.clone();
                    change.removed.iter().for_each(|x| {
                        omega.remove(x);
                    });
                    omega.extend(change.added);
                }
                out.push(tau(MixedConfig { term: at((**cont).clone()), omega, components: comps, ..m.clone() })?);
            }
            Process::QbitDecl(x, cont) | Process::NsDecl(x, cont) => {
                let qubit = matches!(h.proc, Process::QbitDecl(..));
                let comps = m
                    .components
                    .iter()
                    .map(|c| {
                        let state = if qubit { c.state.allocate_qubit(x) } else { c.state.allocate_mode(x) }?;
                        Ok(Component { state, ..c.clone() })
                    })
                    .collect::<Result<Vec<_>>>()?;
                let mut omega = m.omega.clone();
                omega.insert(x.clone());
                out.push(tau(MixedConfig { term: at((**cont).clone()), omega, components: comps, ..m.clone() })?);
            }
            Process::Output { chan, payload, cont } if !payload.iter().all(Expr::is_value) => {
                out.push(tau(evaluate_payload(m, &h.path, chan, payload, cont)?)?);
            }
            _ => {}
        }
    }

    // internal communication
    for o in &hs {
        let Process::Output { chan: oc, payload, cont: ocont } = o.proc else { continue };
        if !payload.iter().all(Expr::is_value) {
            continue;
        }
        let Some(c) = chan_name(oc) else { continue };
        for i in &hs {
            let Process::Input { chan: ic, binders, cont: icont } = i.proc else { continue };
            if chan_name(ic) != Some(c) || binders.len() != payload.len() || !compatible(o, i) {
                continue;
            }
            let term = rebuild(
                &m.term,
                vec![(&o.path[..], (**ocont).clone()), (&i.path[..], bind(binders, payload, icont))],
            );
            out.push(tau(with_term(m, term))?);
        }
    }

    // environment inputs
    for h in &hs {
        let Process::Input { chan, binders, cont } = h.proc else { continue };
        let Some(c) = chan_name(chan) else { continue };
        if restricted.contains(c) {
            continue;
        }
        let used = m.cursor.get(c).copied().unwrap_or(0);
        let Some(inj) = env.injections.get(c).and_then(|l| l.get(used)) else { continue };
        if inj.len() != binders.len() {
            continue;
        }
        let names: Vec<String> = inj
            .iter()
            .filter_map(|v| match v {
                Value::Name(x) if m.env_names.contains(x) => Some(x.clone()),
                _ => None,
            })
            .collect();
        let classical: Vec<Value> =
            inj.iter().filter(|v| !matches!(v, Value::Name(x) if names.contains(x))).cloned().collect();
        let payload: Vec<Expr> = inj.iter().map(Value::to_expr).collect();
        let mut next = with_term(m, rebuild(&m.term, vec![(&h.path[..], bind(binders, &payload, cont))]));
        next.env_names.retain(|x| !names.contains(x));
        next.omega.extend(names.iter().cloned());
        next.cursor.insert(c.to_string(), used + 1);
        out.push((
            Label::Input { chan: c.to_string(), values: classical, names },
            Configuration::Mixed(next.normalize()?),
        ));
    }

    // environment outputs
    for h in &hs {
        let Process::Output { chan, payload, cont } = h.proc else { continue };
        let Some(c) = chan_name(chan) else { continue };
        if restricted.contains(c) || !env.reads.contains(c) || !payload.iter().all(Expr::is_value) {
            continue;
        }
        out.push(environment_output(m, &h.path, c, payload, cont)?);
    }
    Ok(out)
}

fn evaluate_payload(
    m: &MixedConfig,
    path: &[(Dir, bool)],
    chan: &Expr,
    payload: &[Expr],
    cont: &Process,
) -> Result<MixedConfig> {
    let mut rows: Vec<(Component, Vec<Value>)> = Vec::new();
    for c in &m.components {
        for o in eval_all(payload, &c.state, &c.values, &m.omega)? {
            let mut flat = Vec::new();
            o.value.into_iter().for_each(|v| v.flatten_into(&mut flat));
            rows.push((Component { weight: c.weight * o.factor, state: o.state, values: c.values.clone() }, flat));
        }
    }
    let arity = rows.first().map(|r| r.1.len()).unwrap_or(0);
    if rows.iter().any(|r| r.1.len() != arity) {
        return Err(SemanticsError::Stuck("payload arity differs between outcomes".into()));
    }
    let mut next_var = m.fresh_lambda_index();
    let mut atoms = Vec::with_capacity(arity);
    for k in 0..arity {
        let first = &rows[0].1[k];
        if rows.iter().all(|r| &r.1[k] == first) {
            atoms.push(first.to_expr());
        } else {
            let x = lambda_var(next_var);
            next_var += 1;
            for r in &mut rows {
                let v = r.1[k].clone();
                r.0.values.insert(x.clone(), v);
            }
            atoms.push(Expr::Var(x));
        }
    }
    let term = rebuild(
        &m.term,
        vec![(path, Process::Output { chan: chan.clone(), payload: atoms, cont: Box::new(cont.clone()) })],
    );
    Ok(MixedConfig { term, components: rows.into_iter().map(|r| r.0).collect(), ..m.clone() })
}

fn environment_output(
    m: &MixedConfig,
    path: &[(Dir, bool)],
    chan: &str,
    payload: &[Expr],
    cont: &Process,
) -> Result<(Label, Configuration)> {
    let names: Vec<String> = payload
        .iter()
        .filter_map(|e| match e {
            Expr::Var(x) if m.omega.contains(x) => Some(x.clone()),
            _ => None,
        })
        .collect();
    let classical: Vec<&Expr> = payload.iter().filter(|e| !matches!(e, Expr::Var(x) if names.contains(x))).collect();

    let mut groups: BTreeMap<Vec<Value>, Vec<Component>> = BTreeMap::new();
    for c in &m.components {
        let tuple = classical
            .iter()
            .map(|e| match e {
                Expr::Var(x) if is_lambda_var(x) => c
                    .values
                    .get(x)
                    .cloned()
                    .ok_or_else(|| SemanticsError::Stuck(format!("outcome variable {x} unbound"))),
                other => Value::from_expr(other).ok_or_else(|| SemanticsError::Stuck("non-value payload".into())),
            })
            .collect::<Result<Vec<_>>>()?;
        groups.entry(tuple).or_default().push(c.clone());
    }

    let mut base = with_term(m, rebuild(&m.term, vec![(path, cont.clone())]));
    base.omega.retain(|x| !names.contains(x));
    base.env_names.extend(names.iter().cloned());
    let label = Label::Output { chan: chan.to_string(), values: groups.keys().cloned().collect(), names };

    if groups.len() == 1 {
        return Ok((label, Configuration::Mixed(base.normalize()?)));
    }
    let total = m.total_weight();
    let branches = groups
        .into_iter()
        .map(|(values, comps)| {
            let probability = comps.iter().map(|c| c.weight).sum::<f64>() / total;
            let config = MixedConfig { components: comps, ..base.clone() }.normalize()?;
            Ok(ProbBranch { probability, values, config })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((label, Configuration::Prob(branches)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use cqp_lang::parse_process;

    fn pure(term: &str) -> Configuration {
        let m = MixedConfig {
            term: parse_process(term).unwrap(),
            omega: BTreeSet::new(),
            env_names: vec![],
            cursor: BTreeMap::new(),
            components: vec![Component { weight: 1.0, state: JointState::empty(), values: BTreeMap::new() }],
        };
        Configuration::Mixed(m.normalize().unwrap())
    }

    fn reading(chans: &[&str]) -> EnvironmentSchedule {
        EnvironmentSchedule { reads: chans.iter().map(|c| c.to_string()).collect(), ..EnvironmentSchedule::closed() }
    }

    #[test]
    fn restriction_blocks_visible_actions() {
        let s = step(&pure("(new c:^[Int]) c![1].0"), &reading(&["c"])).unwrap();
        assert!(s.is_empty());
        let s = step(&pure("c![1].0"), &reading(&["c"])).unwrap();
        assert_eq!(s.len(), 1);
        assert!(matches!(&s[0].0, Label::Output { chan, .. } if chan == "c"));
    }

    #[test]
    fn internal_communication_substitutes() {
        let s = step(&pure("(new c:^[Int]) (c![1 + 1].0 | c?[x:Int].d![x].0)"), &reading(&["d"])).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].0, Label::Tau);
        let s = step(&s[0].1, &reading(&["d"])).unwrap();
        assert_eq!(s.len(), 1);
        let Configuration::Mixed(m) = &s[0].1 else { panic!() };
        assert_eq!(m.term, parse_process("d![2].0").unwrap());
    }

    #[test]
    fn choice_is_resolved_by_the_first_action() {
        let s = step(&pure("(c![1].0 + d![2].0)"), &reading(&["c", "d"])).unwrap();
        assert_eq!(s.len(), 2);
        for (_, c) in &s {
            assert_eq!(c.as_mixed().unwrap().term, Process::Nil);
        }
        // branches of one choice cannot talk to each other
        let s = step(&pure("(new c:^[Int]) (c![1].0 + c?[x:Int].0)"), &reading(&[])).unwrap();
        assert!(s.is_empty());
    }

    #[test]
    fn fresh_qubit_starts_in_zero() {
        let s = step(&pure("(qbit x) {x *= H}.0"), &reading(&[])).unwrap();
        assert_eq!(s.len(), 1);
        let m = s[0].1.as_mixed().unwrap();
        assert!(m.omega.contains("x"));
        assert_eq!(m.components[0].state.layout().len(), 1);
        assert!(m.components[0].state.is_normalized());
    }
}
