//! Hand-rolled lexer and recursive-descent parser.
//!
//! The grammar covers C-style listings of the shape
//! `int (sum)(int x) { ... return y; }` including multi-name parameter
//! declarations (`double f(double x1, x2, x3, x4)`), declarations with
//! initializers, brace-less `if`/`while` bodies, and `//` comments.

use num_traits::Zero;
use thiserror::Error;

use crate::lang::ast::{BinOp, CmpOp, Cond, Expr, NumKind, Param, Program, Stmt};
use crate::num::{parse_rational, Rational};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum LangError {
    #[error("syntax error at {line}:{col}: {message}")]
    Syntax { message: String, line: u32, col: u32 },
    #[error("use of undeclared variable `{name}`")]
    UndeclaredVariable { name: String },
    #[error("variable `{name}` may be read before assignment")]
    UnassignedVariable { name: String },
    #[error("duplicate declaration of `{name}` at {line}:{col}")]
    DuplicateVariable { name: String, line: u32, col: u32 },
    #[error("non-integer literal `{literal}` in a program with only int variables")]
    NonIntegerLiteral { literal: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Number(String),
    KwInt,
    KwDouble,
    KwWhile,
    KwIf,
    KwElse,
    KwReturn,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Semi,
    Assign,
    Cmp(CmpOp),
    Plus,
    Minus,
    Star,
    Slash,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Number(s) => format!("number `{s}`"),
            Tok::KwInt => "`int`".into(),
            Tok::KwDouble => "`double`".into(),
            Tok::KwWhile => "`while`".into(),
            Tok::KwIf => "`if`".into(),
            Tok::KwElse => "`else`".into(),
            Tok::KwReturn => "`return`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Assign => "`=`".into(),
            Tok::Cmp(op) => format!("`{}`", op.symbol()),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: u32,
    col: u32,
}

fn lex(text: &str) -> Result<Vec<Token>, LangError> {
    let mut tokens = Vec::new();
    let mut chars = text.chars().peekable();
    let mut line = 1u32;
    let mut col = 1u32;
    macro_rules! push {
        ($tok:expr, $line:expr, $col:expr) => {
            tokens.push(Token { tok: $tok, line: $line, col: $col })
        };
    }
    while let Some(&c) = chars.peek() {
        let (tl, tc) = (line, col);
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars>| {
            let c = chars.next().unwrap();
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            c
        };
        if c.is_whitespace() {
            bump(&mut chars);
            continue;
        }
        if c == '/' {
            bump(&mut chars);
            if chars.peek() == Some(&'/') {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    bump(&mut chars);
                }
            } else {
                push!(Tok::Slash, tl, tc);
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut ident = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_ascii_alphanumeric() || c == '_' {
                    ident.push(bump(&mut chars));
                } else {
                    break;
                }
            }
            let tok = match ident.as_str() {
                "int" => Tok::KwInt,
                "double" => Tok::KwDouble,
                "while" => Tok::KwWhile,
                "if" => Tok::KwIf,
                "else" => Tok::KwElse,
                "return" => Tok::KwReturn,
                _ => Tok::Ident(ident),
            };
            push!(tok, tl, tc);
            continue;
        }
        if c.is_ascii_digit() {
            let mut num = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_ascii_digit() {
                    num.push(bump(&mut chars));
                } else {
                    break;
                }
            }
            if chars.peek() == Some(&'.') {
                num.push(bump(&mut chars));
                let mut any = false;
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_digit() {
                        num.push(bump(&mut chars));
                        any = true;
                    } else {
                        break;
                    }
                }
                if !any {
                    return Err(LangError::Syntax {
                        message: format!("malformed number `{num}`"),
                        line: tl,
                        col: tc,
                    });
                }
            }
            push!(Tok::Number(num), tl, tc);
            continue;
        }
        let c = bump(&mut chars);
        let tok = match c {
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            ',' => Tok::Comma,
            ';' => Tok::Semi,
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '=' => {
                if chars.peek() == Some(&'=') {
                    bump(&mut chars);
                    Tok::Cmp(CmpOp::Eq)
                } else {
                    Tok::Assign
                }
            }
            '!' => {
                if chars.peek() == Some(&'=') {
                    bump(&mut chars);
                    Tok::Cmp(CmpOp::Ne)
                } else {
                    return Err(LangError::Syntax {
                        message: "expected `=` after `!`".into(),
                        line: tl,
                        col: tc,
                    });
                }
            }
            '<' => {
                if chars.peek() == Some(&'=') {
                    bump(&mut chars);
                    Tok::Cmp(CmpOp::Le)
                } else {
                    Tok::Cmp(CmpOp::Lt)
                }
            }
            '>' => {
                if chars.peek() == Some(&'=') {
                    bump(&mut chars);
                    Tok::Cmp(CmpOp::Ge)
                } else {
                    Tok::Cmp(CmpOp::Gt)
                }
            }
            other => {
                return Err(LangError::Syntax {
                    message: format!("unexpected character `{other}`"),
                    line: tl,
                    col: tc,
                })
            }
        };
        push!(tok, tl, tc);
    }
    tokens.push(Token { tok: Tok::Eof, line, col });
    Ok(tokens)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, message: impl Into<String>) -> LangError {
        let t = self.peek();
        LangError::Syntax { message: message.into(), line: t.line, col: t.col }
    }

    fn expect(&mut self, tok: Tok) -> Result<Token, LangError> {
        if self.peek().tok == tok {
            Ok(self.next())
        } else {
            Err(self.error(format!(
                "expected {}, found {}",
                tok.describe(),
                self.peek().tok.describe()
            )))
        }
    }

    fn accept(&mut self, tok: &Tok) -> bool {
        if &self.peek().tok == tok {
            self.next();
            true
        } else {
            false
        }
    }

    fn kind(&mut self) -> Result<NumKind, LangError> {
        match self.peek().tok {
            Tok::KwInt => {
                self.next();
                Ok(NumKind::Int)
            }
            Tok::KwDouble => {
                self.next();
                Ok(NumKind::Real)
            }
            _ => Err(self.error(format!(
                "expected `int` or `double`, found {}",
                self.peek().tok.describe()
            ))),
        }
    }

    fn ident(&mut self) -> Result<(String, u32, u32), LangError> {
        let t = self.peek().clone();
        match t.tok {
            Tok::Ident(name) => {
                self.next();
                Ok((name, t.line, t.col))
            }
            _ => Err(self.error(format!("expected identifier, found {}", t.tok.describe()))),
        }
    }

    fn number(&mut self, raw: &str) -> Result<Rational, LangError> {
        parse_rational(raw).map_err(|_| self.error(format!("malformed number `{raw}`")))
    }

    fn factor(&mut self) -> Result<Expr, LangError> {
        let t = self.peek().clone();
        match t.tok {
            Tok::Ident(name) => {
                self.next();
                Ok(Expr::Var(name))
            }
            Tok::Number(raw) => {
                self.next();
                // `p/q` fraction literals: the language has no division
                // operator, so a slash after a number is unambiguous.
                if self.peek().tok == Tok::Slash {
                    self.next();
                    let den = self.peek().clone();
                    if let Tok::Number(den_raw) = den.tok {
                        self.next();
                        if den_raw.contains('.') || raw.contains('.') {
                            return Err(self.error("fraction literals must be integers"));
                        }
                        let value = self.number(&format!("{raw}/{den_raw}"))?;
                        return Ok(Expr::Lit(value));
                    }
                    return Err(self.error("expected denominator after `/`"));
                }
                Ok(Expr::Lit(self.number(&raw)?))
            }
            Tok::Minus => {
                self.next();
                Ok(Expr::Neg(Box::new(self.factor()?)))
            }
            Tok::LParen => {
                self.next();
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            _ => Err(self.error(format!("expected expression, found {}", t.tok.describe()))),
        }
    }

    fn term(&mut self) -> Result<Expr, LangError> {
        let mut e = self.factor()?;
        while self.peek().tok == Tok::Star {
            self.next();
            let rhs = self.factor()?;
            e = Expr::Bin { op: BinOp::Mul, lhs: Box::new(e), rhs: Box::new(rhs) };
        }
        Ok(e)
    }

    fn expr(&mut self) -> Result<Expr, LangError> {
        let mut e = self.term()?;
        loop {
            let op = match self.peek().tok {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => break,
            };
            self.next();
            let rhs = self.term()?;
            e = Expr::Bin { op, lhs: Box::new(e), rhs: Box::new(rhs) };
        }
        Ok(e)
    }

    fn cond(&mut self) -> Result<Cond, LangError> {
        let lhs = self.expr()?;
        let op = match self.peek().tok {
            Tok::Cmp(op) => op,
            _ => {
                return Err(self.error(format!(
                    "expected comparison operator, found {}",
                    self.peek().tok.describe()
                )))
            }
        };
        self.next();
        let rhs = self.expr()?;
        Ok(Cond { lhs, op, rhs })
    }

    /// A `{ ... }` block or a single statement.
    fn body(&mut self) -> Result<Vec<Stmt>, LangError> {
        if self.accept(&Tok::LBrace) {
            let mut stmts = Vec::new();
            while self.peek().tok != Tok::RBrace {
                stmts.push(self.stmt()?);
            }
            self.expect(Tok::RBrace)?;
            Ok(stmts)
        } else {
            Ok(vec![self.stmt()?])
        }
    }

    fn stmt(&mut self) -> Result<Stmt, LangError> {
        match self.peek().tok.clone() {
            Tok::KwWhile => {
                self.next();
                self.expect(Tok::LParen)?;
                let cond = self.cond()?;
                self.expect(Tok::RParen)?;
                let body = self.body()?;
                Ok(Stmt::While { cond, body })
            }
            Tok::KwIf => {
                self.next();
                self.expect(Tok::LParen)?;
                let cond = self.cond()?;
                self.expect(Tok::RParen)?;
                let then_body = self.body()?;
                let else_body = if self.accept(&Tok::KwElse) { self.body()? } else { Vec::new() };
                Ok(Stmt::If { cond, then_body, else_body })
            }
            Tok::Ident(_) => {
                let (var, _, _) = self.ident()?;
                self.expect(Tok::Assign)?;
                let expr = self.expr()?;
                self.expect(Tok::Semi)?;
                Ok(Stmt::Assign { var, expr })
            }
            other => Err(self.error(format!("expected statement, found {}", other.describe()))),
        }
    }

    fn program(&mut self) -> Result<Program, LangError> {
        let return_kind = self.kind()?;
        // The function name may be parenthesized: `int (sum)(int x)`.
        let name = if self.accept(&Tok::LParen) {
            let (name, _, _) = self.ident()?;
            self.expect(Tok::RParen)?;
            name
        } else {
            self.ident()?.0
        };
        self.expect(Tok::LParen)?;
        let mut params: Vec<Param> = Vec::new();
        if self.peek().tok != Tok::RParen {
            let mut kind = self.kind()?;
            loop {
                let (pname, line, col) = self.ident()?;
                if params.iter().any(|p| p.name == pname) {
                    return Err(LangError::DuplicateVariable { name: pname, line, col });
                }
                params.push(Param { name: pname, kind });
                if !self.accept(&Tok::Comma) {
                    break;
                }
                // A kind keyword is optional after the first parameter,
                // covering `double f(double x1, x2, x3, x4)`.
                if matches!(self.peek().tok, Tok::KwInt | Tok::KwDouble) {
                    kind = self.kind()?;
                }
            }
        }
        self.expect(Tok::RParen)?;
        self.expect(Tok::LBrace)?;

        let mut locals: Vec<Param> = Vec::new();
        let mut body: Vec<Stmt> = Vec::new();
        while matches!(self.peek().tok, Tok::KwInt | Tok::KwDouble) {
            let kind = self.kind()?;
            loop {
                let (lname, line, col) = self.ident()?;
                if params.iter().any(|p| p.name == lname)
                    || locals.iter().any(|p| p.name == lname)
                {
                    return Err(LangError::DuplicateVariable { name: lname, line, col });
                }
                locals.push(Param { name: lname.clone(), kind });
                if self.accept(&Tok::Assign) {
                    let expr = self.expr()?;
                    body.push(Stmt::Assign { var: lname, expr });
                }
                if !self.accept(&Tok::Comma) {
                    break;
                }
            }
            self.expect(Tok::Semi)?;
        }

        while self.peek().tok != Tok::KwReturn {
            body.push(self.stmt()?);
        }
        self.expect(Tok::KwReturn)?;
        let ret = self.expr()?;
        self.expect(Tok::Semi)?;
        self.expect(Tok::RBrace)?;
        if self.peek().tok != Tok::Eof {
            return Err(self.error(format!(
                "unexpected {} after end of program",
                self.peek().tok.describe()
            )));
        }

        let program = Program { name, return_kind, params, locals, body, ret };
        check_variables(&program)?;
        check_literals(&program)?;
        Ok(program)
    }
}

/// Every read must refer to a parameter or a definitely-assigned local;
/// `if` branches count only what both sides assign, and a `while` body
/// counts nothing afterwards (it may run zero times).
fn check_variables(p: &Program) -> Result<(), LangError> {
    use std::collections::BTreeSet;

    fn check_expr(e: &Expr, p: &Program, assigned: &BTreeSet<&str>) -> Result<(), LangError> {
        match e {
            Expr::Var(name) => {
                if p.kind_of(name).is_none() {
                    return Err(LangError::UndeclaredVariable { name: name.clone() });
                }
                if !assigned.contains(name.as_str()) {
                    return Err(LangError::UnassignedVariable { name: name.clone() });
                }
                Ok(())
            }
            Expr::Lit(_) => Ok(()),
            Expr::Neg(inner) => check_expr(inner, p, assigned),
            Expr::Bin { lhs, rhs, .. } => {
                check_expr(lhs, p, assigned)?;
                check_expr(rhs, p, assigned)
            }
        }
    }

    fn check_block<'a>(
        stmts: &'a [Stmt],
        p: &'a Program,
        assigned: &mut BTreeSet<&'a str>,
    ) -> Result<(), LangError> {
        for s in stmts {
            match s {
                Stmt::Assign { var, expr } => {
                    check_expr(expr, p, assigned)?;
                    if p.kind_of(var).is_none() {
                        return Err(LangError::UndeclaredVariable { name: var.clone() });
                    }
                    assigned.insert(var.as_str());
                }
                Stmt::If { cond, then_body, else_body } => {
                    check_expr(&cond.lhs, p, assigned)?;
                    check_expr(&cond.rhs, p, assigned)?;
                    let mut then_set = assigned.clone();
                    check_block(then_body, p, &mut then_set)?;
                    let mut else_set = assigned.clone();
                    check_block(else_body, p, &mut else_set)?;
                    *assigned = then_set.intersection(&else_set).copied().collect();
                }
                Stmt::While { cond, body } => {
                    check_expr(&cond.lhs, p, assigned)?;
                    check_expr(&cond.rhs, p, assigned)?;
                    let mut body_set = assigned.clone();
                    check_block(body, p, &mut body_set)?;
                }
            }
        }
        Ok(())
    }

    let mut assigned: BTreeSet<&str> = p.params.iter().map(|p| p.name.as_str()).collect();
    check_block(&p.body, p, &mut assigned)?;
    check_expr(&p.ret, p, &assigned)
}

/// Programs whose variables are all `int` must not contain fractional
/// literals; otherwise the integer-interval invariants of the analyses
/// would be violated.
fn check_literals(p: &Program) -> Result<(), LangError> {
    if p.numeric_kind() != NumKind::Int {
        return Ok(());
    }
    fn check_expr(e: &Expr) -> Result<(), LangError> {
        match e {
            Expr::Lit(r) => {
                if r.fract().is_zero() {
                    Ok(())
                } else {
                    Err(LangError::NonIntegerLiteral { literal: r.to_string() })
                }
            }
            Expr::Var(_) => Ok(()),
            Expr::Neg(inner) => check_expr(inner),
            Expr::Bin { lhs, rhs, .. } => {
                check_expr(lhs)?;
                check_expr(rhs)
            }
        }
    }
    fn check_block(stmts: &[Stmt]) -> Result<(), LangError> {
        for s in stmts {
            match s {
                Stmt::Assign { expr, .. } => check_expr(expr)?,
                Stmt::If { cond, then_body, else_body } => {
                    check_expr(&cond.lhs)?;
                    check_expr(&cond.rhs)?;
                    check_block(then_body)?;
                    check_block(else_body)?;
                }
                Stmt::While { cond, body } => {
                    check_expr(&cond.lhs)?;
                    check_expr(&cond.rhs)?;
                    check_block(body)?;
                }
            }
        }
        Ok(())
    }
    check_block(&p.body)?;
    check_expr(&p.ret)
}

/// Parse a complete program from source text.
pub fn parse_program(text: &str) -> Result<Program, LangError> {
    let tokens = lex(text)?;
    Parser { tokens, pos: 0 }.program()
}
