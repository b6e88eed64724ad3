//! Concrete syntax, AST and static checks for CQP process terms.

pub mod ast;
pub mod expand;
pub mod ownership;
pub mod parser;
pub mod pretty;

pub use ast::{Definition, Expr, Process, Program, Ratio, TypeExpr, Unitary};
pub use expand::{binders, expand, fresh_name, subst_expr, subst_process, uniquify, ExpandError};
pub use ownership::{check_ownership, Diagnostic, DiagnosticKind};
pub use parser::{parse, parse_expr, parse_process, SyntaxError};
pub use pretty::{expr_to_string, pretty_print, process_to_string, type_to_string, unitary_to_string};
