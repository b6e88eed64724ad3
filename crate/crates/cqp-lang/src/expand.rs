use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::ast::*;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExpandError {
    #[error("unknown definition: {0}")]
    UnknownDefinition(String),
    #[error("arity mismatch: {0} expects {expected} arguments, got {got}", expected = .1, got = .2)]
    Arity(String, usize, usize),
    #[error("recursive definition: {0}")]
    Recursive(String),
}

/// Returns `base` if unused, otherwise the first `base#n` (n ≥ 2) not in `used`.
/// The chosen name is added to `used`.
pub fn fresh_name(base: &str, used: &mut BTreeSet<String>) -> String {
    let root = base.split('#').next().unwrap_or(base);
    let mut cand = base.to_string();
    let mut n = 2;
    while used.contains(&cand) {
        cand = format!("{root}#{n}");
        n += 1;
    }
    used.insert(cand.clone());
    cand
}

pub fn subst_expr(e: &Expr, sub: &BTreeMap<String, Expr>) -> Expr {
    let go = |x: &Expr| subst_expr(x, sub);
    let bx = |x: &Expr| Box::new(subst_expr(x, sub));
    match e {
        Expr::Var(x) => sub.get(x).cloned().unwrap_or_else(|| e.clone()),
        Expr::Lit(_) | Expr::Bool(_) | Expr::Unitary(_) => e.clone(),
        Expr::Measure(es) => Expr::Measure(es.iter().map(go).collect()),
        Expr::PsMeasure(es) => Expr::PsMeasure(es.iter().map(go).collect()),
        Expr::ApplyUnitary(ts, u) => Expr::ApplyUnitary(ts.iter().map(go).collect(), bx(u)),
        Expr::Plus(a, b) => Expr::Plus(bx(a), bx(b)),
        Expr::Eq(a, b) => Expr::Eq(bx(a), bx(b)),
        Expr::And(a, b) => Expr::And(bx(a), bx(b)),
        Expr::Pair(a, b) => Expr::Pair(bx(a), bx(b)),
        Expr::If(c, a, b) => Expr::If(bx(c), bx(a), bx(b)),
        Expr::PsApply { x, y, qubit } => Expr::PsApply { x: x.clone(), y: y.clone(), qubit: bx(qubit) },
    }
}

fn sub_free_vars(sub: &BTreeMap<String, Expr>) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    sub.values().for_each(|e| e.free_vars(&mut out));
    out
}

/// Enters the scope of `binders`: removes them from the substitution and
/// renames any that would capture a free name of the substituted terms.
fn enter(
    binders: &[String],
    sub: &BTreeMap<String, Expr>,
    body_free: &BTreeSet<String>,
) -> (Vec<String>, BTreeMap<String, Expr>) {
    let mut inner = sub.clone();
    for b in binders {
        inner.remove(b);
    }
    let danger = sub_free_vars(&inner);
    let mut used: BTreeSet<String> = danger.iter().chain(body_free).chain(inner.keys()).cloned().collect();
    used.extend(binders.iter().cloned());
    let mut names = Vec::new();
    for b in binders {
        if danger.contains(b) {
            let fresh = fresh_name(&format!("{b}#2"), &mut used);
            inner.insert(b.clone(), Expr::Var(fresh.clone()));
            names.push(fresh);
        } else {
            names.push(b.clone());
        }
    }
    (names, inner)
}

/// Capture-avoiding substitution of expressions for free variables.
pub fn subst_process(p: &Process, sub: &BTreeMap<String, Expr>) -> Process {
    if sub.is_empty() {
        return p.clone();
    }
    match p {
        Process::Nil => Process::Nil,
        Process::Par(a, b) => Process::par(subst_process(a, sub), subst_process(b, sub)),
        Process::Sum(a, b) => Process::Sum(Box::new(subst_process(a, sub)), Box::new(subst_process(b, sub))),
        Process::Input { chan, binders, cont } => {
            let names: Vec<String> = binders.iter().map(|(x, _)| x.clone()).collect();
            let (names, inner) = enter(&names, sub, &cont.free_vars());
            Process::Input {
                chan: subst_expr(chan, sub),
                binders: names.into_iter().zip(binders.iter().map(|(_, t)| t.clone())).collect(),
                cont: Box::new(subst_process(cont, &inner)),
            }
        }
        Process::Output { chan, payload, cont } => Process::Output {
            chan: subst_expr(chan, sub),
            payload: payload.iter().map(|e| subst_expr(e, sub)).collect(),
            cont: Box::new(subst_process(cont, sub)),
        },
        Process::Action(e, cont) => {
            if let Expr::PsApply { x, y, qubit } = e {
                let (names, inner) = enter(&[x.clone(), y.clone()], sub, &cont.free_vars());
                Process::Action(
                    Expr::PsApply {
                        x: names[0].clone(),
                        y: names[1].clone(),
                        qubit: Box::new(subst_expr(qubit, sub)),
                    },
                    Box::new(subst_process(cont, &inner)),
                )
            } else {
                Process::Action(subst_expr(e, sub), Box::new(subst_process(cont, sub)))
            }
        }
        Process::QbitDecl(x, cont) | Process::NsDecl(x, cont) | Process::New(x, _, cont) => {
            let (names, inner) = enter(std::slice::from_ref(x), sub, &cont.free_vars());
            let cont = Box::new(subst_process(cont, &inner));
            let x = names[0].clone();
            match p {
                Process::QbitDecl(..) => Process::QbitDecl(x, cont),
                Process::NsDecl(..) => Process::NsDecl(x, cont),
                Process::New(_, t, _) => Process::New(x, t.clone(), cont),
                _ => unreachable!(),
            }
        }
        Process::Call(name, args) => Process::Call(name.clone(), args.iter().map(|e| subst_expr(e, sub)).collect()),
    }
}

fn inline(program: &Program, p: &Process, stack: &mut Vec<String>) -> Result<Process, ExpandError> {
    let mut go = |q: &Process| inline(program, q, stack);
    Ok(match p {
        Process::Call(name, args) => {
            let d = program.definition(name).ok_or_else(|| ExpandError::UnknownDefinition(name.clone()))?;
            if d.params.len() != args.len() {
                return Err(ExpandError::Arity(name.clone(), d.params.len(), args.len()));
            }
            if stack.contains(name) {
                return Err(ExpandError::Recursive(name.clone()));
            }
            let sub: BTreeMap<String, Expr> =
                d.params.iter().map(|(x, _)| x.clone()).zip(args.iter().cloned()).collect();
            let body = subst_process(&d.body, &sub);
            stack.push(name.clone());
            let out = inline(program, &body, stack);
            stack.pop();
            out?
        }
        Process::Nil => Process::Nil,
        Process::Par(a, b) => Process::par(go(a)?, go(b)?),
        Process::Sum(a, b) => Process::Sum(Box::new(go(a)?), Box::new(go(b)?)),
        Process::Input { chan, binders, cont } => {
            Process::Input { chan: chan.clone(), binders: binders.clone(), cont: Box::new(go(cont)?) }
        }
        Process::Output { chan, payload, cont } => {
            Process::Output { chan: chan.clone(), payload: payload.clone(), cont: Box::new(go(cont)?) }
        }
        Process::Action(e, cont) => Process::Action(e.clone(), Box::new(go(cont)?)),
        Process::QbitDecl(x, cont) => Process::QbitDecl(x.clone(), Box::new(go(cont)?)),
        Process::NsDecl(x, cont) => Process::NsDecl(x.clone(), Box::new(go(cont)?)),
        Process::New(x, t, cont) => Process::New(x.clone(), t.clone(), Box::new(go(cont)?)),
    })
}

fn rename_binder(x: &str, used: &mut BTreeSet<String>, scope: &BTreeMap<String, Expr>) -> (String, BTreeMap<String, Expr>) {
    let fresh = fresh_name(x, used);
    let mut inner = scope.clone();
    inner.insert(x.to_string(), Expr::Var(fresh.clone()));
    (fresh, inner)
}

fn uniquify_in(p: &Process, used: &mut BTreeSet<String>, scope: &BTreeMap<String, Expr>) -> Process {
    let e = |x: &Expr| subst_expr(x, scope);
    match p {
        Process::Nil => Process::Nil,
        Process::Par(a, b) => {
            let a = uniquify_in(a, used, scope);
            Process::par(a, uniquify_in(b, used, scope))
        }
        Process::Sum(a, b) => {
            let a = uniquify_in(a, used, scope);
            Process::Sum(Box::new(a), Box::new(uniquify_in(b, used, scope)))
        }
        Process::Input { chan, binders, cont } => {
            let mut inner = scope.clone();
            let mut bs = Vec::new();
            for (x, t) in binders {
                let (fresh, next) = rename_binder(x, used, &inner);
                inner = next;
                bs.push((fresh, t.clone()));
            }
            Process::Input { chan: e(chan), binders: bs, cont: Box::new(uniquify_in(cont, used, &inner)) }
        }
        Process::Output { chan, payload, cont } => Process::Output {
            chan: e(chan),
            payload: payload.iter().map(e).collect(),
            cont: Box::new(uniquify_in(cont, used, scope)),
        },
        Process::Action(Expr::PsApply { x, y, qubit }, cont) => {
            let (fx, inner) = rename_binder(x, used, scope);
            let (fy, inner) = rename_binder(y, used, &inner);
            Process::Action(
                Expr::PsApply { x: fx, y: fy, qubit: Box::new(e(qubit)) },
                Box::new(uniquify_in(cont, used, &inner)),
            )
        }
        Process::Action(a, cont) => Process::Action(e(a), Box::new(uniquify_in(cont, used, scope))),
        Process::QbitDecl(x, cont) | Process::NsDecl(x, cont) | Process::New(x, _, cont) => {
            let (fresh, inner) = rename_binder(x, used, scope);
            let cont = Box::new(uniquify_in(cont, used, &inner));
            match p {
                Process::QbitDecl(..) => Process::QbitDecl(fresh, cont),
                Process::NsDecl(..) => Process::NsDecl(fresh, cont),
                Process::New(_, t, _) => Process::New(fresh, t.clone(), cont),
                _ => unreachable!(),
            }
        }
        Process::Call(name, args) => Process::Call(name.clone(), args.iter().map(e).collect()),
    }
}

/// Renames bound names so that every binder in the term is distinct from every
/// other binder, from the free names, and from `reserved`. The first binder
/// with a given name keeps it; later ones become `name#2`, `name#3`, ….
pub fn uniquify(p: &Process, reserved: &[&str]) -> Process {
    let mut used: BTreeSet<String> = p.free_vars();
    used.extend(reserved.iter().map(|s| s.to_string()));
    uniquify_in(p, &mut used, &BTreeMap::new())
}

/// Inlines every definition call in the entry process and makes all binders
/// distinct. Fails on unknown definitions, arity errors and recursion.
pub fn expand(program: &Program, reserved: &[&str]) -> Result<Process, ExpandError> {
    let body = inline(program, &program.entry, &mut Vec::new())?;
    Ok(uniquify(&body, reserved))
}

/// Binder names of a term in traversal order.
pub fn binders(p: &Process) -> Vec<String> {
    fn walk(p: &Process, out: &mut Vec<String>) {
        match p {
            Process::Nil | Process::Call(..) => {}
            Process::Par(a, b) | Process::Sum(a, b) => {
                walk(a, out);
                walk(b, out);
            }
            Process::Input { binders, cont, .. } => {
                out.extend(binders.iter().map(|(x, _)| x.clone()));
                walk(cont, out);
            }
            Process::Output { cont, .. } => walk(cont, out),
            Process::Action(e, cont) => {
                if let Expr::PsApply { x, y, .. } = e {
                    out.push(x.clone());
                    out.push(y.clone());
                }
                walk(cont, out);
            }
            Process::QbitDecl(x, cont) | Process::NsDecl(x, cont) | Process::New(x, _, cont) => {
                out.push(x.clone());
                walk(cont, out);
            }
        }
    }
    let mut out = Vec::new();
    walk(p, &mut out);
    out
}
