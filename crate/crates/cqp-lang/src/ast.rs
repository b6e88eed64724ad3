use std::collections::BTreeSet;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TypeExpr {
    Int,
    Qbit,
    NS,
    Bit,
    Chan(Vec<TypeExpr>),
    Op(usize),
}

impl TypeExpr {
    pub fn is_quantum(&self) -> bool {
        matches!(self, TypeExpr::Qbit | TypeExpr::NS)
    }
}

/// Reflectivity written as a fraction, kept exact for printing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Ratio {
    pub num: u32,
    pub den: u32,
}

impl Ratio {
    pub fn value(self) -> f64 {
        f64::from(self.num) / f64::from(self.den)
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Unitary {
    /// Beam splitter with the given reflectivity.
    Beam(Ratio),
    /// Rotation-convention splitter (sign on the other port).
    Rotation(Ratio),
    H,
    CZ,
    U19,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Var(String),
    Lit(i64),
    Bool(bool),
    Unitary(Unitary),
    Measure(Vec<Expr>),
    PsMeasure(Vec<Expr>),
    ApplyUnitary(Vec<Expr>, Box<Expr>),
    Plus(Box<Expr>, Box<Expr>),
    Eq(Box<Expr>, Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Pair(Box<Expr>, Box<Expr>),
    If(Box<Expr>, Box<Expr>, Box<Expr>),
    PsApply { x: String, y: String, qubit: Box<Expr> },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Process {
    Nil,
    Par(Box<Process>, Box<Process>),
    Sum(Box<Process>, Box<Process>),
    Input { chan: Expr, binders: Vec<(String, TypeExpr)>, cont: Box<Process> },
    Output { chan: Expr, payload: Vec<Expr>, cont: Box<Process> },
    Action(Expr, Box<Process>),
    QbitDecl(String, Box<Process>),
    NsDecl(String, Box<Process>),
    New(String, TypeExpr, Box<Process>),
    Call(String, Vec<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Definition {
    pub name: String,
    pub params: Vec<(String, TypeExpr)>,
    pub body: Process,
}

/// Named definitions plus the body of `Main`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    pub definitions: Vec<Definition>,
    pub entry: Process,
}

impl Program {
    pub fn definition(&self, name: &str) -> Option<&Definition> {
        self.definitions.iter().find(|d| d.name == name)
    }
}

impl Expr {
    pub fn var(name: &str) -> Expr {
        Expr::Var(name.to_string())
    }

    /// True for fully evaluated values: literals, names and unitaries.
    pub fn is_value(&self) -> bool {
        matches!(self, Expr::Var(_) | Expr::Lit(_) | Expr::Bool(_) | Expr::Unitary(_))
    }

    pub fn free_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Var(x) => {
                out.insert(x.clone());
            }
            Expr::Lit(_) | Expr::Bool(_) | Expr::Unitary(_) => {}
            Expr::Measure(es) | Expr::PsMeasure(es) => es.iter().for_each(|e| e.free_vars(out)),
            Expr::ApplyUnitary(ts, u) => {
                ts.iter().for_each(|e| e.free_vars(out));
                u.free_vars(out);
            }
            Expr::Plus(a, b) | Expr::Eq(a, b) | Expr::And(a, b) | Expr::Pair(a, b) => {
                a.free_vars(out);
                b.free_vars(out);
            }
            Expr::If(c, a, b) => {
                c.free_vars(out);
                a.free_vars(out);
                b.free_vars(out);
            }
            Expr::PsApply { qubit, .. } => qubit.free_vars(out),
        }
    }

    /// Number of values the expression yields once evaluated: measuring
    /// several names gives one value per name, pairs flatten.
    pub fn arity(&self) -> usize {
        match self {
            Expr::Measure(es) => es.len(),
            Expr::Pair(a, b) => a.arity() + b.arity(),
            _ => 1,
        }
    }

    /// Number of measurement sub-expressions.
    pub fn measurement_count(&self) -> usize {
        match self {
            Expr::Measure(es) | Expr::PsMeasure(es) => {
                1 + es.iter().map(Expr::measurement_count).sum::<usize>()
            }
            Expr::ApplyUnitary(ts, u) => {
                ts.iter().map(Expr::measurement_count).sum::<usize>() + u.measurement_count()
            }
            Expr::Plus(a, b) | Expr::Eq(a, b) | Expr::And(a, b) | Expr::Pair(a, b) => {
                a.measurement_count() + b.measurement_count()
            }
            Expr::If(c, a, b) => c.measurement_count() + a.measurement_count() + b.measurement_count(),
            Expr::PsApply { qubit, .. } => qubit.measurement_count(),
            _ => 0,
        }
    }
}

impl Process {
    pub fn par(a: Process, b: Process) -> Process {
        Process::Par(Box::new(a), Box::new(b))
    }

    /// Free variables, including free channel names.
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut out);
        out
    }

    fn collect_free(&self, out: &mut BTreeSet<String>) {
        match self {
            Process::Nil => {}
            Process::Par(a, b) | Process::Sum(a, b) => {
                a.collect_free(out);
                b.collect_free(out);
            }
            Process::Input { chan, binders, cont } => {
                chan.free_vars(out);
                let mut inner = cont.free_vars();
                for (x, _) in binders {
                    inner.remove(x);
                }
                out.extend(inner);
            }
            Process::Output { chan, payload, cont } => {
                chan.free_vars(out);
                payload.iter().for_each(|e| e.free_vars(out));
                cont.collect_free(out);
            }
            Process::Action(e, cont) => {
                e.free_vars(out);
                let mut inner = cont.free_vars();
                if let Expr::PsApply { x, y, .. } = e {
                    inner.remove(x);
                    inner.remove(y);
                }
                out.extend(inner);
            }
            Process::QbitDecl(x, cont) | Process::NsDecl(x, cont) | Process::New(x, _, cont) => {
                let mut inner = cont.free_vars();
                inner.remove(x);
                out.extend(inner);
            }
            Process::Call(_, args) => args.iter().for_each(|e| e.free_vars(out)),
        }
    }

    /// Total number of measurement expressions left in the term.
    pub fn measurement_count(&self) -> usize {
        match self {
            Process::Nil | Process::Call(..) => 0,
            Process::Par(a, b) | Process::Sum(a, b) => a.measurement_count() + b.measurement_count(),
            Process::Input { cont, .. }
            | Process::QbitDecl(_, cont)
            | Process::NsDecl(_, cont)
            | Process::New(_, _, cont) => cont.measurement_count(),
            Process::Output { payload, cont, .. } => {
                payload.iter().map(Expr::measurement_count).sum::<usize>() + cont.measurement_count()
            }
            Process::Action(e, cont) => e.measurement_count() + cont.measurement_count(),
        }
    }

    /// Visits every expression in the term.
    pub fn exprs<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        match self {
            Process::Nil => {}
            Process::Par(a, b) | Process::Sum(a, b) => {
                a.exprs(f);
                b.exprs(f);
            }
            Process::Input { chan, cont, .. } => {
                f(chan);
                cont.exprs(f);
            }
            Process::Output { chan, payload, cont } => {
                f(chan);
                payload.iter().for_each(&mut *f);
                cont.exprs(f);
            }
            Process::Action(e, cont) => {
                f(e);
                cont.exprs(f);
            }
            Process::QbitDecl(_, cont) | Process::NsDecl(_, cont) | Process::New(_, _, cont) => {
                cont.exprs(f)
            }
            Process::Call(_, args) => args.iter().for_each(f),
        }
    }
}
