use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::ast::*;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum DiagnosticKind {
    SharedOwnership,
    UseAfterSend,
    Unbound,
    UnknownDefinition,
    ArityMismatch,
    EmptyChannelType,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub name: String,
    /// Definition in which the problem was found (`Main` for the entry).
    pub within: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let what = match self.kind {
            DiagnosticKind::SharedOwnership => "shared ownership",
            DiagnosticKind::UseAfterSend => "use after send",
            DiagnosticKind::Unbound => "unbound quantum name",
            DiagnosticKind::UnknownDefinition => "unknown definition",
            DiagnosticKind::ArityMismatch => "arity mismatch",
            DiagnosticKind::EmptyChannelType => "empty channel type",
        };
        write!(f, "{what}: {}", self.name)
    }
}

/// How a name is known inside the term being checked.
#[derive(Debug, Clone, PartialEq)]
enum Binding {
    Typed(TypeExpr),
    /// Free name of unknown type; `quantum` if it is ever used as a qubit or
    /// mode, or sent as a payload.
    Free { quantum: bool },
}

struct Checker<'a> {
    program: &'a Program,
    within: String,
    out: Vec<Diagnostic>,
}

fn quantum_positions(e: &Expr, out: &mut BTreeSet<String>) {
    match e {
        Expr::Measure(es) | Expr::PsMeasure(es) => es.iter().for_each(|a| a.free_vars(out)),
        Expr::ApplyUnitary(ts, _) => ts.iter().for_each(|a| a.free_vars(out)),
        Expr::PsApply { qubit, .. } => qubit.free_vars(out),
        Expr::Plus(a, b) | Expr::Eq(a, b) | Expr::And(a, b) | Expr::Pair(a, b) => {
            quantum_positions(a, out);
            quantum_positions(b, out);
        }
        Expr::If(c, a, b) => {
            quantum_positions(c, out);
            quantum_positions(a, out);
            quantum_positions(b, out);
        }
        _ => {}
    }
}

fn sent_names(p: &Process, out: &mut BTreeSet<String>) {
    match p {
        Process::Output { payload, cont, .. } => {
            for e in payload {
                if let Expr::Var(x) = e {
                    out.insert(x.clone());
                }
            }
            sent_names(cont, out);
        }
        Process::Nil | Process::Call(..) => {}
        Process::Par(a, b) | Process::Sum(a, b) => {
            sent_names(a, out);
            sent_names(b, out);
        }
        Process::Input { cont, .. }
        | Process::Action(_, cont)
        | Process::QbitDecl(_, cont)
        | Process::NsDecl(_, cont)
        | Process::New(_, _, cont) => sent_names(cont, out),
    }
}

fn check_type(t: &TypeExpr, ck: &mut Checker<'_>, name: &str) {
    if let TypeExpr::Chan(ts) = t {
        if ts.is_empty() {
            ck.report(DiagnosticKind::EmptyChannelType, name);
        }
        for inner in ts {
            check_type(inner, ck, name);
        }
    }
}

impl Checker<'_> {
    fn report(&mut self, kind: DiagnosticKind, name: &str) {
        self.out.push(Diagnostic { kind, name: name.to_string(), within: self.within.clone() });
    }

    fn is_quantum(&self, scope: &BTreeMap<String, Binding>, x: &str) -> bool {
        match scope.get(x) {
            Some(Binding::Typed(t)) => t.is_quantum(),
            Some(Binding::Free { quantum }) => *quantum,
            None => false,
        }
    }

    fn expr(&mut self, e: &Expr, scope: &BTreeMap<String, Binding>) {
        let mut q = BTreeSet::new();
        quantum_positions(e, &mut q);
        for x in q {
            match scope.get(&x) {
                Some(Binding::Typed(t)) if t.is_quantum() => {}
                _ => self.report(DiagnosticKind::Unbound, &x),
            }
        }
    }

    fn process(&mut self, p: &Process, scope: &BTreeMap<String, Binding>) {
        match p {
            Process::Nil => {}
            Process::Par(a, b) => {
                let (fa, fb) = (a.free_vars(), b.free_vars());
                for x in fa.intersection(&fb) {
                    if self.is_quantum(scope, x) {
                        self.report(DiagnosticKind::SharedOwnership, x);
                    }
                }
                self.process(a, scope);
                self.process(b, scope);
            }
            Process::Sum(a, b) => {
                self.process(a, scope);
                self.process(b, scope);
            }
            Process::Input { chan, binders, cont } => {
                self.expr(chan, scope);
                if let (Expr::Var(c), true) = (chan, !binders.is_empty()) {
                    if let Some(Binding::Typed(TypeExpr::Chan(ts))) = scope.get(c) {
                        if ts.len() != binders.len() {
                            self.report(DiagnosticKind::ArityMismatch, c);
                        }
                    }
                }
                let mut inner = scope.clone();
                for (x, t) in binders {
                    check_type(t, self, x);
                    inner.insert(x.clone(), Binding::Typed(t.clone()));
                }
                self.process(cont, &inner);
            }
            Process::Output { chan, payload, cont } => {
                self.expr(chan, scope);
                payload.iter().for_each(|e| self.expr(e, scope));
                if let Expr::Var(c) = chan {
                    if let Some(Binding::Typed(TypeExpr::Chan(ts))) = scope.get(c) {
                        if ts.len() != payload.iter().map(Expr::arity).sum::<usize>() {
                            self.report(DiagnosticKind::ArityMismatch, c);
                        }
                    }
                }
                let rest = cont.free_vars();
                for e in payload {
                    if let Expr::Var(x) = e {
                        if self.is_quantum(scope, x) && rest.contains(x) {
                            self.report(DiagnosticKind::UseAfterSend, x);
                        }
                    }
                }
                self.process(cont, scope);
            }
            Process::Action(e, cont) => {
                self.expr(e, scope);
                let mut inner = scope.clone();
                if let Expr::PsApply { x, y, .. } = e {
                    inner.insert(x.clone(), Binding::Typed(TypeExpr::NS));
                    inner.insert(y.clone(), Binding::Typed(TypeExpr::NS));
                }
                self.process(cont, &inner);
            }
            Process::QbitDecl(x, cont) | Process::NsDecl(x, cont) => {
                let t = if matches!(p, Process::QbitDecl(..)) { TypeExpr::Qbit } else { TypeExpr::NS };
                let mut inner = scope.clone();
                inner.insert(x.clone(), Binding::Typed(t));
                self.process(cont, &inner);
            }
            Process::New(x, t, cont) => {
                check_type(t, self, x);
                let mut inner = scope.clone();
                inner.insert(x.clone(), Binding::Typed(t.clone()));
                self.process(cont, &inner);
            }
            Process::Call(name, args) => {
                args.iter().for_each(|e| self.expr(e, scope));
                match self.program.definition(name) {
                    None => self.report(DiagnosticKind::UnknownDefinition, name),
                    Some(d) if d.params.len() != args.len() => self.report(DiagnosticKind::ArityMismatch, name),
                    Some(d) => {
                        // a quantum parameter must receive a quantum name
                        for ((_, t), a) in d.params.iter().zip(args) {
                            if t.is_quantum() {
                                if let Expr::Var(x) = a {
                                    if !self.is_quantum(scope, x) {
                                        self.report(DiagnosticKind::Unbound, x);
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    fn run(&mut self, within: &str, body: &Process, params: &[(String, TypeExpr)]) {
        self.within = within.to_string();
        let mut scope: BTreeMap<String, Binding> = BTreeMap::new();
        let mut quantumish = BTreeSet::new();
        sent_names(body, &mut quantumish);
        body.exprs(&mut |e| quantum_positions(e, &mut quantumish));
        for x in body.free_vars() {
            scope.insert(x.clone(), Binding::Free { quantum: quantumish.contains(&x) });
        }
        for (x, t) in params {
            check_type(t, self, x);
            scope.insert(x.clone(), Binding::Typed(t.clone()));
        }
        self.process(body, &scope);
    }
}

/// Linear ownership check. Returns every problem found, sorted; an empty list
/// means each qubit and number state has exactly one owner at all times.
pub fn check_ownership(program: &Program) -> Vec<Diagnostic> {
    let mut ck = Checker { program, within: String::new(), out: Vec::new() };
    for d in &program.definitions {
        ck.run(&d.name, &d.body, &d.params);
    }
    ck.run("Main", &program.entry, &[]);
    ck.out.sort();
    ck.out.dedup();
    ck.out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse;

    fn diags(src: &str) -> Vec<String> {
        check_ownership(&parse(src).unwrap()).iter().map(|d| d.to_string()).collect()
    }

    #[test]
    fn resend_is_rejected() {
        assert!(diags("Main = c![q].d![q].0").contains(&"use after send: q".to_string()));
    }

    #[test]
    fn parallel_duplication_is_rejected() {
        assert_eq!(diags("Main = (qbit q) (c![q].0 | d![q].0)"), vec!["shared ownership: q"]);
    }

    #[test]
    fn well_owned_terms_pass() {
        let src = "F(a: ^[Qbit], u: Op(2)) = a?[q:Qbit].{q *= H}.0\n\
                   Main = (new a:^[Qbit]) ((qbit x) {x *= H}.a![x].0 | F(a, H))";
        assert!(diags(src).is_empty(), "{:?}", diags(src));
        // a channel shared between parallel components is fine
        assert!(diags("Main = (c![1].0 | c?[x:Int].0)").is_empty());
        // choice branches may use the same qubit
        assert!(diags("Main = (qbit q) (c![q].0 + d![q].0)").is_empty());
    }

    #[test]
    fn unbound_and_call_errors() {
        assert_eq!(diags("Main = {q *= H}.0"), vec!["unbound quantum name: q"]);
        assert_eq!(diags("Main = G(1)"), vec!["unknown definition: G"]);
        assert_eq!(diags("F(x: Int) = 0\nMain = F(1, 2)"), vec!["arity mismatch: F"]);
        assert_eq!(diags("Main = (new c:^[Int]) c![1, 2].0"), vec!["arity mismatch: c"]);
    }
}
