//! Abstract syntax of the mini imperative language.
//!
//! Programs are single functions over `int` or `double` parameters with
//! assignments, `if`/`else`, `while`, and a final `return`. There is no
//! division, so the concrete semantics over exact rationals is total
//! except for divergence.

use std::fmt;

use crate::num::{format_literal, Rational};

/// Numeric kind of a variable. `double` programs are interpreted over
/// exact rationals, not IEEE floats.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NumKind {
    Int,
    Real,
}

impl NumKind {
    pub fn keyword(self) -> &'static str {
        match self {
            NumKind::Int => "int",
            NumKind::Real => "double",
        }
    }

    /// Kind of the result of an arithmetic operation.
    pub fn join(self, other: NumKind) -> NumKind {
        if self == NumKind::Int && other == NumKind::Int {
            NumKind::Int
        } else {
            NumKind::Real
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Param {
    pub name: String,
    pub kind: NumKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Var(String),
    Lit(Rational),
    Neg(Box<Expr>),
    Bin {
        op: BinOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }

    pub fn negate(self) -> CmpOp {
        match self {
            CmpOp::Eq => CmpOp::Ne,
            CmpOp::Ne => CmpOp::Eq,
            CmpOp::Lt => CmpOp::Ge,
            CmpOp::Le => CmpOp::Gt,
            CmpOp::Gt => CmpOp::Le,
            CmpOp::Ge => CmpOp::Lt,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cond {
    pub lhs: Expr,
    pub op: CmpOp,
    pub rhs: Expr,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Stmt {
    Assign { var: String, expr: Expr },
    If { cond: Cond, then_body: Vec<Stmt>, else_body: Vec<Stmt> },
    While { cond: Cond, body: Vec<Stmt> },
}

/// A parsed program: ordered parameters, declared locals, a statement
/// body, and the single trailing return expression.
#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    pub name: String,
    pub return_kind: NumKind,
    pub params: Vec<Param>,
    pub locals: Vec<Param>,
    pub body: Vec<Stmt>,
    pub ret: Expr,
}

impl Program {
    pub fn has_loop(&self) -> bool {
        fn block_has_loop(stmts: &[Stmt]) -> bool {
            stmts.iter().any(|s| match s {
                Stmt::Assign { .. } => false,
                Stmt::While { .. } => true,
                Stmt::If { then_body, else_body, .. } => {
                    block_has_loop(then_body) || block_has_loop(else_body)
                }
            })
        }
        block_has_loop(&self.body)
    }

    /// Declared kind of a parameter or local, if any.
    pub fn kind_of(&self, var: &str) -> Option<NumKind> {
        self.params
            .iter()
            .chain(self.locals.iter())
            .find(|p| p.name == var)
            .map(|p| p.kind)
    }

    /// `Int` when every parameter and local is an `int`; `Real` otherwise.
    pub fn numeric_kind(&self) -> NumKind {
        if self
            .params
            .iter()
            .chain(self.locals.iter())
            .all(|p| p.kind == NumKind::Int)
        {
            NumKind::Int
        } else {
            NumKind::Real
        }
    }
}

struct Indent(usize);

impl fmt::Display for Indent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for _ in 0..self.0 {
            write!(f, "    ")?;
        }
        Ok(())
    }
}

fn fmt_expr(e: &Expr, f: &mut fmt::Formatter<'_>, parent_prec: u8) -> fmt::Result {
    // precedence: 0 additive, 1 multiplicative, 2 unary/atom
    match e {
        Expr::Var(v) => write!(f, "{v}"),
        Expr::Lit(r) => write!(f, "{}", format_literal(r)),
        Expr::Neg(inner) => {
            if parent_prec > 2 {
                write!(f, "(-")?;
                fmt_expr(inner, f, 2)?;
                write!(f, ")")
            } else {
                write!(f, "-")?;
                fmt_expr(inner, f, 3)
            }
        }
        Expr::Bin { op, lhs, rhs } => {
            let prec = match op {
                BinOp::Add | BinOp::Sub => 0,
                BinOp::Mul => 1,
            };
            let need_parens = prec < parent_prec;
            if need_parens {
                write!(f, "(")?;
            }
            fmt_expr(lhs, f, prec)?;
            write!(f, " {} ", op.symbol())?;
            // Right operand of - needs its own parens at equal precedence.
            fmt_expr(rhs, f, prec + 1)?;
            if need_parens {
                write!(f, ")")?;
            }
            Ok(())
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_expr(self, f, 0)
    }
}

impl fmt::Display for Cond {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.lhs, self.op.symbol(), self.rhs)
    }
}

fn fmt_block(stmts: &[Stmt], f: &mut fmt::Formatter<'_>, depth: usize) -> fmt::Result {
    for s in stmts {
        match s {
            Stmt::Assign { var, expr } => writeln!(f, "{}{var} = {expr};", Indent(depth))?,
            Stmt::If { cond, then_body, else_body } => {
                writeln!(f, "{}if ({cond}) {{", Indent(depth))?;
                fmt_block(then_body, f, depth + 1)?;
                if else_body.is_empty() {
                    writeln!(f, "{}}}", Indent(depth))?;
                } else {
                    writeln!(f, "{}}} else {{", Indent(depth))?;
                    fmt_block(else_body, f, depth + 1)?;
                    writeln!(f, "{}}}", Indent(depth))?;
                }
            }
            Stmt::While { cond, body } => {
                writeln!(f, "{}while ({cond}) {{", Indent(depth))?;
                fmt_block(body, f, depth + 1)?;
                writeln!(f, "{}}}", Indent(depth))?;
            }
        }
    }
    Ok(())
}

impl fmt::Display for Program {
    /// Canonical source form; parsing it back yields an equal AST.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}(", self.return_kind.keyword(), self.name)?;
        for (i, p) in self.params.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{} {}", p.kind.keyword(), p.name)?;
        }
        writeln!(f, ") {{")?;
        for l in &self.locals {
            writeln!(f, "{}{} {};", Indent(1), l.kind.keyword(), l.name)?;
        }
        fmt_block(&self.body, f, 1)?;
        writeln!(f, "{}return {};", Indent(1), self.ret)?;
        write!(f, "}}")
    }
}

/// Convenience constructor for literals in hand-built ASTs and tests.
pub fn lit(r: Rational) -> Expr {
    Expr::Lit(r)
}

/// Convenience constructor for variable references.
pub fn var(name: &str) -> Expr {
    Expr::Var(name.to_string())
}

pub fn bin(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
    Expr::Bin { op, lhs: Box::new(lhs), rhs: Box::new(rhs) }
}
