use thiserror::Error;

use crate::ast::*;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {message}")]
pub struct SyntaxError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(i64),
    Sym(&'static str),
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

const SYMBOLS: [&str; 17] = [
    "*=", "?", "!", "[", "]", "(", ")", "{", "}", ".", ",", ":", "|", "+", "=", "^", "/",
];

fn lex(src: &str) -> Result<Vec<Token>, SyntaxError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let ch = chars[i];
        if ch == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if ch.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if ch == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let start = (line, col);
        if ch.is_ascii_digit() {
            let mut j = i;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            let text: String = chars[i..j].iter().collect();
            let n = text.parse().map_err(|_| SyntaxError {
                line,
                col,
                message: format!("integer literal out of range: {text}"),
            })?;
            out.push(Token { tok: Tok::Int(n), line: start.0, col: start.1 });
            col += j - i;
            i = j;
            continue;
        }
        if ch.is_alphabetic() || ch == '_' {
            let mut j = i;
            while j < chars.len() && (chars[j].is_alphanumeric() || chars[j] == '_' || chars[j] == '\'') {
                j += 1;
            }
            out.push(Token { tok: Tok::Ident(chars[i..j].iter().collect()), line: start.0, col: start.1 });
            col += j - i;
            i = j;
            continue;
        }
        let rest: String = chars[i..(i + 2).min(chars.len())].iter().collect();
        match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            Some(s) => {
                out.push(Token { tok: Tok::Sym(s), line: start.0, col: start.1 });
                i += s.len();
                col += s.len();
            }
            None => {
                return Err(SyntaxError { line, col, message: format!("unexpected character '{ch}'") })
            }
        }
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}

const KEYWORDS: [&str; 13] = [
    "new", "qbit", "ns", "measure", "psmeasure", "if", "then", "else", "and", "true", "false", "PS",
    "Main",
];
const UNITARY_NAMES: [&str; 3] = ["H", "CZ", "U19"];

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

type PResult<T> = Result<T, SyntaxError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn err<T>(&self, message: impl Into<String>) -> PResult<T> {
        let t = &self.toks[self.pos];
        Err(SyntaxError { line: t.line, col: t.col, message: message.into() })
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn is_kw(&self, k: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == k)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> PResult<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.err(format!("expected '{s}', found {}", self.describe()))
        }
    }

    fn expect_kw(&mut self, k: &str) -> PResult<()> {
        if self.is_kw(k) {
            self.bump();
            Ok(())
        } else {
            self.err(format!("expected '{k}', found {}", self.describe()))
        }
    }

    fn describe(&self) -> String {
        match self.peek() {
            Tok::Ident(x) => format!("'{x}'"),
            Tok::Int(n) => format!("'{n}'"),
            Tok::Sym(s) => format!("'{s}'"),
            Tok::Eof => "end of input".to_string(),
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(x) if !KEYWORDS.contains(&x.as_str()) || x == "Main" => {
                self.bump();
                Ok(x)
            }
            _ => self.err(format!("expected identifier, found {}", self.describe())),
        }
    }

    fn int(&mut self) -> PResult<i64> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(n)
            }
            _ => self.err(format!("expected integer, found {}", self.describe())),
        }
    }

    fn program(&mut self) -> PResult<Program> {
        let mut definitions: Vec<Definition> = Vec::new();
        let mut entry = None;
        while *self.peek() != Tok::Eof {
            let (line, col) = (self.toks[self.pos].line, self.toks[self.pos].col);
            let name = self.ident()?;
            let mut params = Vec::new();
            if self.eat_sym("(") {
                if !self.is_sym(")") {
                    loop {
                        let p = self.ident()?;
                        self.expect_sym(":")?;
                        params.push((p, self.ty()?));
                        if !self.eat_sym(",") {
                            break;
                        }
                    }
                }
                self.expect_sym(")")?;
            }
            self.expect_sym("=")?;
            let body = self.process()?;
            let dup = |m: String| Err(SyntaxError { line, col, message: m });
            if name == "Main" {
                if entry.is_some() {
                    return dup("duplicate definition of Main".into());
                }
                if !params.is_empty() {
                    return dup("Main takes no parameters".into());
                }
                entry = Some(body);
            } else {
                if definitions.iter().any(|d| d.name == name) {
                    return dup(format!("duplicate definition of {name}"));
                }
                definitions.push(Definition { name, params, body });
            }
        }
        match entry {
            Some(entry) => Ok(Program { definitions, entry }),
            None => self.err("missing definition of Main"),
        }
    }

    fn ty(&mut self) -> PResult<TypeExpr> {
        if self.eat_sym("^") {
            self.expect_sym("[")?;
            let mut ts = vec![self.ty()?];
            while self.eat_sym(",") {
                ts.push(self.ty()?);
            }
            self.expect_sym("]")?;
            return Ok(TypeExpr::Chan(ts));
        }
        let name = match self.peek().clone() {
            Tok::Ident(x) => x,
            _ => return self.err(format!("expected type, found {}", self.describe())),
        };
        self.bump();
        Ok(match name.as_str() {
            "Int" => TypeExpr::Int,
            "Qbit" => TypeExpr::Qbit,
            "NS" => TypeExpr::NS,
            "Bit" => TypeExpr::Bit,
            "Op" => {
                self.expect_sym("(")?;
                let n = self.int()?;
                self.expect_sym(")")?;
                TypeExpr::Op(n as usize)
            }
            _ => {
                self.pos -= 1;
                return self.err(format!("unknown type '{name}'"));
            }
        })
    }

    fn process(&mut self) -> PResult<Process> {
        let left = self.sum()?;
        if self.eat_sym("|") {
            let right = self.process()?;
            return Ok(Process::Par(Box::new(left), Box::new(right)));
        }
        Ok(left)
    }

    fn sum(&mut self) -> PResult<Process> {
        let left = self.prefixed()?;
        if self.eat_sym("+") {
            let right = self.sum()?;
            return Ok(Process::Sum(Box::new(left), Box::new(right)));
        }
        Ok(left)
    }

    fn decl_names(&mut self) -> PResult<Vec<String>> {
        let mut names = vec![self.ident()?];
        while self.eat_sym(",") {
            names.push(self.ident()?);
        }
        self.expect_sym(")")?;
        Ok(names)
    }

    fn prefixed(&mut self) -> PResult<Process> {
        match self.peek().clone() {
            Tok::Int(0) => {
                self.bump();
                Ok(Process::Nil)
            }
            Tok::Sym("(") => {
                let kw = match self.peek_at(1) {
                    Tok::Ident(k) if k == "new" || k == "qbit" || k == "ns" => Some(k.clone()),
                    _ => None,
                };
                self.bump();
                match kw.as_deref() {
                    Some("new") => {
                        self.bump();
                        let mut decls = Vec::new();
                        loop {
                            let c = self.ident()?;
                            self.expect_sym(":")?;
                            let t = self.ty()?;
                            if !matches!(t, TypeExpr::Chan(_)) {
                                return self.err("restricted names must have channel type");
                            }
                            decls.push((c, t));
                            if !self.eat_sym(",") {
                                break;
                            }
                        }
                        self.expect_sym(")")?;
                        self.eat_sym(".");
                        let mut p = self.prefixed()?;
                        for (c, t) in decls.into_iter().rev() {
                            p = Process::New(c, t, Box::new(p));
                        }
                        Ok(p)
                    }
                    Some(k) => {
                        let quantum_kw = k.to_string();
                        self.bump();
                        let names = self.decl_names()?;
                        self.eat_sym(".");
                        let mut p = self.prefixed()?;
                        for x in names.into_iter().rev() {
                            p = if quantum_kw == "qbit" {
                                Process::QbitDecl(x, Box::new(p))
                            } else {
                                Process::NsDecl(x, Box::new(p))
                            };
                        }
                        Ok(p)
                    }
                    None => {
                        let p = self.process()?;
                        self.expect_sym(")")?;
                        Ok(p)
                    }
                }
            }
            Tok::Sym("{") => {
                self.bump();
                let e = self.action()?;
                self.expect_sym("}")?;
                self.expect_sym(".")?;
                let cont = self.prefixed()?;
                Ok(Process::Action(e, Box::new(cont)))
            }
            Tok::Ident(_) => {
                if matches!(self.peek_at(1), Tok::Sym("(")) {
                    let name = self.ident()?;
                    self.expect_sym("(")?;
                    let mut args = Vec::new();
                    if !self.is_sym(")") {
                        loop {
                            args.push(self.expr_level(1)?);
                            if !self.eat_sym(",") {
                                break;
                            }
                        }
                    }
                    self.expect_sym(")")?;
                    return Ok(Process::Call(name, args));
                }
                let chan = Expr::Var(self.ident()?);
                if self.eat_sym("?") {
                    self.expect_sym("[")?;
                    let mut binders: Vec<(String, TypeExpr)> = Vec::new();
                    if !self.is_sym("]") {
                        loop {
                            let x = self.ident()?;
                            if binders.iter().any(|(y, _)| *y == x) {
                                return self.err(format!("duplicate binder {x}"));
                            }
                            self.expect_sym(":")?;
                            binders.push((x, self.ty()?));
                            if !self.eat_sym(",") {
                                break;
                            }
                        }
                    }
                    self.expect_sym("]")?;
                    self.expect_sym(".")?;
                    let cont = self.prefixed()?;
                    Ok(Process::Input { chan, binders, cont: Box::new(cont) })
                } else if self.eat_sym("!") {
                    self.expect_sym("[")?;
                    let mut payload = Vec::new();
                    if !self.is_sym("]") {
                        loop {
                            payload.push(self.expr()?);
                            if !self.eat_sym(",") {
                                break;
                            }
                        }
                    }
                    self.expect_sym("]")?;
                    self.expect_sym(".")?;
                    let cont = self.prefixed()?;
                    Ok(Process::Output { chan, payload, cont: Box::new(cont) })
                } else {
                    self.err(format!("expected '?' or '!', found {}", self.describe()))
                }
            }
            _ => self.err(format!("expected process, found {}", self.describe())),
        }
    }

    fn action(&mut self) -> PResult<Expr> {
        if matches!(self.peek(), Tok::Ident(_)) && matches!(self.peek_at(1), Tok::Sym(":")) {
            let x = self.ident()?;
            self.expect_sym(":")?;
            self.expect_kw("NS")?;
            self.expect_sym(",")?;
            let y = self.ident()?;
            self.expect_sym(":")?;
            self.expect_kw("NS")?;
            self.expect_sym("*=")?;
            self.expect_kw("PS")?;
            self.expect_sym("(")?;
            let q = self.expr()?;
            self.expect_sym(")")?;
            return Ok(Expr::PsApply { x, y, qubit: Box::new(q) });
        }
        let first = self.expr()?;
        if !self.is_sym(",") && !self.is_sym("*=") {
            return Ok(first);
        }
        let mut targets = vec![first];
        while self.eat_sym(",") {
            targets.push(self.expr_level(1)?);
        }
        self.expect_sym("*=")?;
        let u = self.expr_level(1)?;
        Ok(Expr::ApplyUnitary(targets, Box::new(u)))
    }

    fn expr(&mut self) -> PResult<Expr> {
        self.expr_level(0)
    }

    /// Level 0 admits `if` and `measure`; level 1 starts at conjunction.
    fn expr_level(&mut self, level: u8) -> PResult<Expr> {
        if level == 0 {
            if self.is_kw("if") {
                self.bump();
                let c = self.expr()?;
                self.expect_kw("then")?;
                let a = self.expr()?;
                self.expect_kw("else")?;
                let b = self.expr()?;
                return Ok(Expr::If(Box::new(c), Box::new(a), Box::new(b)));
            }
            if self.is_kw("measure") || self.is_kw("psmeasure") {
                let ps = self.is_kw("psmeasure");
                self.bump();
                let mut args = vec![self.expr_level(1)?];
                while self.eat_sym(",") {
                    args.push(self.expr_level(1)?);
                }
                return Ok(if ps { Expr::PsMeasure(args) } else { Expr::Measure(args) });
            }
        }
        self.and_expr()
    }

    fn and_expr(&mut self) -> PResult<Expr> {
        let mut e = self.eq_expr()?;
        while self.is_kw("and") {
            self.bump();
            let r = self.eq_expr()?;
            e = Expr::And(Box::new(e), Box::new(r));
        }
        Ok(e)
    }

    fn eq_expr(&mut self) -> PResult<Expr> {
        let e = self.plus_expr()?;
        if self.eat_sym("=") {
            let r = self.plus_expr()?;
            return Ok(Expr::Eq(Box::new(e), Box::new(r)));
        }
        Ok(e)
    }

    fn plus_expr(&mut self) -> PResult<Expr> {
        let mut e = self.atom()?;
        while self.eat_sym("+") {
            let r = self.atom()?;
            e = Expr::Plus(Box::new(e), Box::new(r));
        }
        Ok(e)
    }

    fn ratio(&mut self) -> PResult<Ratio> {
        self.expect_sym("[")?;
        let num = self.int()?;
        let den = if self.eat_sym("/") { self.int()? } else { 1 };
        self.expect_sym("]")?;
        if den <= 0 || num < 0 || num > den || den > u32::MAX as i64 {
            return self.err("reflectivity must be a fraction in [0, 1]");
        }
        Ok(Ratio { num: num as u32, den: den as u32 })
    }

    fn atom(&mut self) -> PResult<Expr> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Expr::Lit(n))
            }
            Tok::Sym("(") => {
                self.bump();
                let a = self.expr()?;
                if self.eat_sym(",") {
                    let b = self.expr()?;
                    self.expect_sym(")")?;
                    return Ok(Expr::Pair(Box::new(a), Box::new(b)));
                }
                self.expect_sym(")")?;
                Ok(a)
            }
            Tok::Ident(x) => {
                if (x == "B" || x == "R") && matches!(self.peek_at(1), Tok::Sym("[")) {
                    self.bump();
                    let r = self.ratio()?;
                    return Ok(Expr::Unitary(if x == "B" { Unitary::Beam(r) } else { Unitary::Rotation(r) }));
                }
                if UNITARY_NAMES.contains(&x.as_str()) {
                    self.bump();
                    return Ok(Expr::Unitary(match x.as_str() {
                        "H" => Unitary::H,
                        "CZ" => Unitary::CZ,
                        _ => Unitary::U19,
                    }));
                }
                if x == "true" || x == "false" {
                    self.bump();
                    return Ok(Expr::Bool(x == "true"));
                }
                Ok(Expr::Var(self.ident()?))
            }
            _ => self.err(format!("expected expression, found {}", self.describe())),
        }
    }
}

/// Parses a whole `.cqp` source file.
pub fn parse(source: &str) -> Result<Program, SyntaxError> {
    let toks = lex(source)?;
    Parser { toks, pos: 0 }.program()
}

/// Parses a single process term.
pub fn parse_process(source: &str) -> Result<Process, SyntaxError> {
    let toks = lex(source)?;
    let mut p = Parser { toks, pos: 0 };
    let proc = p.process()?;
    if *p.peek() != Tok::Eof {
        return p.err(format!("unexpected {} after process", p.describe()));
    }
    Ok(proc)
}

/// Parses a single expression.
pub fn parse_expr(source: &str) -> Result<Expr, SyntaxError> {
    let toks = lex(source)?;
    let mut p = Parser { toks, pos: 0 };
    let e = p.expr()?;
    if *p.peek() != Tok::Eof {
        return p.err(format!("unexpected {} after expression", p.describe()));
    }
    Ok(e)
}
