use std::collections::{BTreeMap, BTreeSet};

use cqp_lang::{Expr, Unitary};
use optics::{
    beam_splitter, biased_coin_unitary, dual_rail_cz, dual_rail_hadamard, measure_modes, measure_qubits,
    ps_convert, ps_measure_unnormalized, qubit_cz_matrix, qubit_hadamard_matrix, rotation_splitter,
};
use quantum_state::{JointState, SlotKind};

use crate::value::{is_lambda_var, Value};
use crate::{Result, SemanticsError};

/// One possible result of evaluating an expression in one component. `factor`
/// scales the component weight; for post-selective measurements it is the
/// unnormalized probability of the retained outcome.
#[derive(Debug, Clone)]
pub struct Outcome<T> {
    pub factor: f64,
    pub state: JointState,
    pub value: T,
}

fn stuck<T>(msg: impl Into<String>) -> Result<T> {
    Err(SemanticsError::Stuck(msg.into()))
}

fn quantum_name(v: &Value, state: &JointState, omega: &BTreeSet<String>) -> Result<String> {
    match v {
        Value::Name(x) if state.layout().contains(x) => {
            if !omega.contains(x) {
                return Err(SemanticsError::Ownership(x.clone()));
            }
            Ok(x.clone())
        }
        other => stuck(format!("{other} is not a qubit or mode")),
    }
}

/// Evaluates a list of expressions left to right, threading the state.
pub fn eval_all(
    es: &[Expr],
    state: &JointState,
    values: &BTreeMap<String, Value>,
    omega: &BTreeSet<String>,
) -> Result<Vec<Outcome<Vec<Value>>>> {
    let mut acc = vec![Outcome { factor: 1.0, state: state.clone(), value: Vec::new() }];
    for e in es {
        let mut next = Vec::new();
        for o in acc {
            for r in eval(e, &o.state, values, omega)? {
                let mut vs = o.value.clone();
                vs.push(r.value);
                next.push(Outcome { factor: o.factor * r.factor, state: r.state, value: vs });
            }
        }
        acc = next;
    }
    Ok(acc)
}

/// Reduces an expression to values in one component. Measurements branch.
pub fn eval(
    e: &Expr,
    state: &JointState,
    values: &BTreeMap<String, Value>,
    omega: &BTreeSet<String>,
) -> Result<Vec<Outcome<Value>>> {
    let single = |v: Value| Ok(vec![Outcome { factor: 1.0, state: state.clone(), value: v }]);
    match e {
        Expr::Var(x) if is_lambda_var(x) => match values.get(x) {
            Some(v) => single(v.clone()),
            None => stuck(format!("outcome variable {x} unbound")),
        },
        Expr::Var(x) => single(Value::Name(x.clone())),
        Expr::Lit(n) => single(Value::Int(*n)),
        Expr::Bool(b) => single(Value::Bool(*b)),
        Expr::Unitary(u) => single(Value::Unitary(*u)),
        Expr::Plus(a, b) | Expr::Eq(a, b) | Expr::And(a, b) | Expr::Pair(a, b) => {
            let parts = eval_all(&[(**a).clone(), (**b).clone()], state, values, omega)?;
            parts
                .into_iter()
                .map(|o| {
                    let (x, y) = (&o.value[0], &o.value[1]);
                    let v = match (e, x, y) {
                        (Expr::Plus(..), Value::Int(p), Value::Int(q)) => Value::Int(p + q),
                        (Expr::Eq(..), _, _) => Value::Bool(x == y),
                        (Expr::And(..), Value::Bool(p), Value::Bool(q)) => Value::Bool(*p && *q),
                        (Expr::Pair(..), _, _) => Value::Tuple(vec![x.clone(), y.clone()]),
                        _ => return stuck(format!("ill-typed operands {x}, {y}")),
                    };
                    Ok(Outcome { factor: o.factor, state: o.state, value: v })
                })
                .collect()
        }
        Expr::If(c, a, b) => {
            let mut out = Vec::new();
            for o in eval(c, state, values, omega)? {
                let branch = match o.value {
                    Value::Bool(true) => a,
                    Value::Bool(false) => b,
                    other => return stuck(format!("condition evaluated to {other}")),
                };
                for r in eval(branch, &o.state, values, omega)? {
                    out.push(Outcome { factor: o.factor * r.factor, ..r });
                }
            }
            Ok(out)
        }
        Expr::Measure(args) => {
            let mut out = Vec::new();
            for o in eval_all(args, state, values, omega)? {
                let names: Vec<String> =
                    o.value.iter().map(|v| quantum_name(v, &o.state, omega)).collect::<Result<_>>()?;
                let refs: Vec<&str> = names.iter().map(String::as_str).collect();
                let kinds: BTreeSet<Option<SlotKind>> = refs.iter().map(|n| o.state.layout().kind_of(n)).collect();
                let results = if kinds == BTreeSet::from([Some(SlotKind::Mode)]) {
                    measure_modes(&o.state, &refs)?
                } else if kinds == BTreeSet::from([Some(SlotKind::Qubit)]) {
                    measure_qubits(&o.state, &refs)?
                } else {
                    return stuck("measurement mixes qubits and modes");
                };
                for r in results {
                    let vals: Vec<Value> = r.values.iter().map(|&n| Value::Int(i64::from(n))).collect();
                    let value = if vals.len() == 1 { vals[0].clone() } else { Value::Tuple(vals) };
                    out.push(Outcome { factor: o.factor * r.weight, state: r.post_state, value });
                }
            }
            Ok(out)
        }
        Expr::PsMeasure(args) => {
            let mut out = Vec::new();
            for o in eval_all(args, state, values, omega)? {
                let names: Vec<String> =
                    o.value.iter().map(|v| quantum_name(v, &o.state, omega)).collect::<Result<_>>()?;
                if names.len() != 2 {
                    return stuck("psmeasure needs exactly two modes");
                }
                for r in ps_measure_unnormalized(&o.state, &names[0], &names[1])? {
                    out.push(Outcome {
                        factor: o.factor * r.weight,
                        state: r.post_state,
                        value: Value::Int(i64::from(r.values[0])),
                    });
                }
            }
            Ok(out)
        }
        Expr::ApplyUnitary(..) | Expr::PsApply { .. } => stuck("quantum action used as a value"),
    }
}

/// Effect of an action on ownership: names consumed and produced.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OwnershipChange {
    pub removed: Vec<String>,
    pub added: Vec<String>,
}

fn flat_names(vs: &[Value], state: &JointState, omega: &BTreeSet<String>) -> Result<Vec<String>> {
    let mut flat = Vec::new();
    vs.iter().cloned().for_each(|v| v.flatten_into(&mut flat));
    flat.iter().map(|v| quantum_name(v, state, omega)).collect()
}

fn kinds_are(state: &JointState, names: &[String], kind: SlotKind) -> bool {
    names.iter().all(|n| state.layout().kind_of(n) == Some(kind))
}

fn apply_gate(state: &JointState, targets: &[Value], u: &Value, omega: &BTreeSet<String>) -> Result<JointState> {
    let names = flat_names(targets, state, omega)?;
    let u = match u {
        Value::Unitary(u) => *u,
        other => return stuck(format!("{other} is not a unitary")),
    };
    let modes = kinds_are(state, &names, SlotKind::Mode);
    let qubits = kinds_are(state, &names, SlotKind::Qubit);
    let n = names.len();
    Ok(match u {
        Unitary::Beam(r) if n == 2 && modes => beam_splitter(state, &names[0], &names[1], r.value())?,
        Unitary::Rotation(r) if n == 2 && modes => rotation_splitter(state, &names[0], &names[1], r.value())?,
        Unitary::H if n == 2 && modes => dual_rail_hadamard(state, &names[0], &names[1])?,
        Unitary::H if n == 1 && qubits => state.apply_unitary(&[&names[0]], &qubit_hadamard_matrix())?,
        Unitary::CZ if n == 4 && modes => {
            dual_rail_cz(state, (&names[0], &names[1]), (&names[2], &names[3]))?
        }
        Unitary::CZ if n == 2 && qubits => state.apply_unitary(&[&names[0], &names[1]], &qubit_cz_matrix())?,
        Unitary::U19 if n == 1 && qubits => biased_coin_unitary(state, &names[0])?,
        _ => return stuck(format!("{} cannot act on {}", cqp_lang::unitary_to_string(&u), names.join(", "))),
    })
}

/// Executes the expression of an action prefix `{e}` in one component.
pub fn run_action(
    e: &Expr,
    state: &JointState,
    values: &BTreeMap<String, Value>,
    omega: &BTreeSet<String>,
) -> Result<(Vec<Outcome<()>>, OwnershipChange)> {
    match e {
        Expr::ApplyUnitary(targets, u) => {
            let mut es = targets.clone();
            es.push((**u).clone());
            let mut out = Vec::new();
            for o in eval_all(&es, state, values, omega)? {
                let (ts, u) = o.value.split_at(o.value.len() - 1);
                let st = apply_gate(&o.state, ts, &u[0], omega)?;
                out.push(Outcome { factor: o.factor, state: st, value: () });
            }
            Ok((out, OwnershipChange::default()))
        }
        Expr::PsApply { x, y, qubit } => {
            let mut out = Vec::new();
            let mut change = OwnershipChange::default();
            for o in eval(qubit, state, values, omega)? {
                let q = quantum_name(&o.value, &o.state, omega)?;
                let st = ps_convert(&o.state, &q, x, y)?;
                change = OwnershipChange { removed: vec![q], added: vec![x.clone(), y.clone()] };
                out.push(Outcome { factor: o.factor, state: st, value: () });
            }
            Ok((out, change))
        }
        other => {
            let out = eval(other, state, values, omega)?
                .into_iter()
                .map(|o| Outcome { factor: o.factor, state: o.state, value: () })
                .collect();
            Ok((out, OwnershipChange::default()))
        }
    }
}
