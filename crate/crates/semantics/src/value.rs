use std::fmt;

use cqp_lang::{Expr, Unitary};
use serde::{Serialize, Serializer};

/// Runtime value of an evaluated expression.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Int(i64),
    Bool(bool),
    /// Channel, qubit or mode name.
    Name(String),
    Unitary(Unitary),
    Tuple(Vec<Value>),
}

impl Value {
    /// Converts an already-evaluated expression. λ-variables are not values.
    pub fn from_expr(e: &Expr) -> Option<Value> {
        match e {
            Expr::Lit(n) => Some(Value::Int(*n)),
            Expr::Bool(b) => Some(Value::Bool(*b)),
            Expr::Var(x) if !is_lambda_var(x) => Some(Value::Name(x.clone())),
            Expr::Unitary(u) => Some(Value::Unitary(*u)),
            Expr::Pair(a, b) => Some(Value::Tuple(vec![Value::from_expr(a)?, Value::from_expr(b)?])),
            _ => None,
        }
    }

    pub fn to_expr(&self) -> Expr {
        match self {
            Value::Int(n) => Expr::Lit(*n),
            Value::Bool(b) => Expr::Bool(*b),
            Value::Name(x) => Expr::Var(x.clone()),
            Value::Unitary(u) => Expr::Unitary(*u),
            Value::Tuple(vs) => {
                let mut it = vs.iter().rev();
                let last = it.next().map(Value::to_expr).unwrap_or(Expr::Lit(0));
                it.fold(last, |acc, v| Expr::Pair(Box::new(v.to_expr()), Box::new(acc)))
            }
        }
    }

    /// Appends the atomic parts of the value (tuples are flattened).
    pub fn flatten_into(self, out: &mut Vec<Value>) {
        match self {
            Value::Tuple(vs) => vs.into_iter().for_each(|v| v.flatten_into(out)),
            v => out.push(v),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(n) => write!(f, "{n}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Name(x) => f.write_str(x),
            Value::Unitary(u) => f.write_str(&cqp_lang::unitary_to_string(u)),
            Value::Tuple(vs) => {
                let parts: Vec<String> = vs.iter().map(|v| v.to_string()).collect();
                write!(f, "({})", parts.join(", "))
            }
        }
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Value::Int(n) => s.serialize_i64(*n),
            Value::Bool(b) => s.serialize_bool(*b),
            Value::Tuple(vs) => vs.serialize(s),
            other => s.serialize_str(&other.to_string()),
        }
    }
}

/// λ-bound outcome variables are spelled `%n`; user names cannot contain `%`.
pub fn is_lambda_var(x: &str) -> bool {
    x.starts_with('%')
}

pub fn lambda_var(n: usize) -> String {
    format!("%{n}")
}
