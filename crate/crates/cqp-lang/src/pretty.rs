use std::fmt::Write;

use crate::ast::*;

pub fn type_to_string(t: &TypeExpr) -> String {
    match t {
        TypeExpr::Int => "Int".into(),
        TypeExpr::Qbit => "Qbit".into(),
        TypeExpr::NS => "NS".into(),
        TypeExpr::Bit => "Bit".into(),
        TypeExpr::Op(n) => format!("Op({n})"),
        TypeExpr::Chan(ts) => format!("^[{}]", ts.iter().map(type_to_string).collect::<Vec<_>>().join(", ")),
    }
}

pub fn unitary_to_string(u: &Unitary) -> String {
    match u {
        Unitary::Beam(r) => format!("B[{r}]"),
        Unitary::Rotation(r) => format!("R[{r}]"),
        Unitary::H => "H".into(),
        Unitary::CZ => "CZ".into(),
        Unitary::U19 => "U19".into(),
    }
}

// 0: if/measure, 1: and, 2: =, 3: +, 4: atoms
fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::If(..) | Expr::Measure(_) | Expr::PsMeasure(_) | Expr::ApplyUnitary(..) | Expr::PsApply { .. } => 0,
        Expr::And(..) => 1,
        Expr::Eq(..) => 2,
        Expr::Plus(..) => 3,
        _ => 4,
    }
}

fn list(es: &[Expr]) -> String {
    es.iter().map(|e| expr_at(e, 1)).collect::<Vec<_>>().join(", ")
}

fn expr_at(e: &Expr, min: u8) -> String {
    let s = match e {
        Expr::Var(x) => x.clone(),
        Expr::Lit(n) => n.to_string(),
        Expr::Bool(b) => b.to_string(),
        Expr::Unitary(u) => unitary_to_string(u),
        Expr::Measure(es) => format!("measure {}", list(es)),
        Expr::PsMeasure(es) => format!("psmeasure {}", list(es)),
        Expr::ApplyUnitary(ts, u) => format!("{} *= {}", list(ts), expr_at(u, 1)),
        Expr::PsApply { x, y, qubit } => format!("{x}:NS, {y}:NS *= PS({})", expr_at(qubit, 0)),
        Expr::Plus(a, b) => format!("{} + {}", expr_at(a, 3), expr_at(b, 4)),
        Expr::Eq(a, b) => format!("{} = {}", expr_at(a, 3), expr_at(b, 3)),
        Expr::And(a, b) => format!("{} and {}", expr_at(a, 1), expr_at(b, 2)),
        Expr::Pair(a, b) => format!("({}, {})", expr_at(a, 1), expr_at(b, 1)),
        Expr::If(c, a, b) => format!("if {} then {} else {}", expr_at(c, 0), expr_at(a, 0), expr_at(b, 1)),
    };
    if precedence(e) < min {
        format!("({s})")
    } else {
        s
    }
}

pub fn expr_to_string(e: &Expr) -> String {
    expr_at(e, 0)
}

fn process_into(p: &Process, out: &mut String) {
    match p {
        Process::Nil => out.push('0'),
        Process::Par(a, b) | Process::Sum(a, b) => {
            out.push('(');
            process_into(a, out);
            out.push_str(if matches!(p, Process::Par(..)) { " | " } else { " + " });
            process_into(b, out);
            out.push(')');
        }
        Process::Input { chan, binders, cont } => {
            let bs: Vec<String> = binders.iter().map(|(x, t)| format!("{x}:{}", type_to_string(t))).collect();
            let _ = write!(out, "{}?[{}].", expr_at(chan, 4), bs.join(", "));
            process_into(cont, out);
        }
        Process::Output { chan, payload, cont } => {
            let _ = write!(out, "{}![{}].", expr_at(chan, 4), list(payload));
            process_into(cont, out);
        }
        Process::Action(e, cont) => {
            let _ = write!(out, "{{{}}}.", expr_to_string(e));
            process_into(cont, out);
        }
        Process::QbitDecl(x, cont) => {
            let _ = write!(out, "(qbit {x}) ");
            process_into(cont, out);
        }
        Process::NsDecl(x, cont) => {
            let _ = write!(out, "(ns {x}) ");
            process_into(cont, out);
        }
        Process::New(x, t, cont) => {
            let _ = write!(out, "(new {x}:{}) ", type_to_string(t));
            process_into(cont, out);
        }
        Process::Call(name, args) => {
            let _ = write!(out, "{name}({})", list(args));
        }
    }
}

pub fn process_to_string(p: &Process) -> String {
    let mut s = String::new();
    process_into(p, &mut s);
    s
}

/// Renders a program in the concrete syntax accepted by [`crate::parse`].
pub fn pretty_print(program: &Program) -> String {
    let mut out = String::new();
    for d in &program.definitions {
        let ps: Vec<String> = d.params.iter().map(|(x, t)| format!("{x}: {}", type_to_string(t))).collect();
        let _ = writeln!(out, "{}({}) =\n    {}\n", d.name, ps.join(", "), process_to_string(&d.body));
    }
    let _ = writeln!(out, "Main =\n    {}", process_to_string(&program.entry));
    out
}

impl std::fmt::Display for Process {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&process_to_string(self))
    }
}

impl std::fmt::Display for Expr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&expr_to_string(self))
    }
}

impl std::fmt::Display for TypeExpr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&type_to_string(self))
    }
}
