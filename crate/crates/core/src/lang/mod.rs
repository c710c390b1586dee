//! The mini imperative language: AST, parser, pretty-printer, and the
//! concrete (exact-rational) semantics.

pub mod ast;
pub mod eval;
pub mod parser;

pub use ast::{BinOp, CmpOp, Cond, Expr, NumKind, Param, Program, Stmt};
pub use eval::{eval, ConcreteResult, EvalError};
pub use parser::{parse_program, LangError};
