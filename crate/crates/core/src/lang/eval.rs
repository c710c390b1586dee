//! Concrete small-step evaluation over exact rationals.
//!
//! This is the ground-truth semantics every analysis over-approximates.
//! Divergence is undecidable, so callers supply a step budget;
//! exhausting it reports `BudgetExceeded`, which never claims
//! divergence — only "no result within the budget".

use std::collections::BTreeMap;

use num_traits::Zero;
use thiserror::Error;

use crate::lang::ast::{BinOp, CmpOp, Cond, Expr, NumKind, Program, Stmt};
use crate::num::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConcreteResult {
    Value(Rational),
    BudgetExceeded { steps: u64 },
}

impl ConcreteResult {
    pub fn value(&self) -> Option<&Rational> {
        match self {
            ConcreteResult::Value(v) => Some(v),
            ConcreteResult::BudgetExceeded { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("arity mismatch: program takes {expected} arguments, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("parameter `{param}` is int but received non-integer value {value}")]
    NonIntegerArgument { param: String, value: String },
    #[error("variable `{name}` read before assignment")]
    Unassigned { name: String },
}

struct Machine<'a> {
    env: BTreeMap<&'a str, Rational>,
    steps: u64,
    budget: u64,
}

enum Flow {
    Continue,
    OutOfBudget,
}

impl<'a> Machine<'a> {
    fn tick(&mut self) -> Flow {
        self.steps += 1;
        if self.steps > self.budget {
            Flow::OutOfBudget
        } else {
            Flow::Continue
        }
    }

    fn eval_expr(&self, e: &Expr) -> Result<Rational, EvalError> {
        match e {
            Expr::Var(name) => self
                .env
                .get(name.as_str())
                .cloned()
                .ok_or_else(|| EvalError::Unassigned { name: name.clone() }),
            Expr::Lit(r) => Ok(r.clone()),
            Expr::Neg(inner) => Ok(-self.eval_expr(inner)?),
            Expr::Bin { op, lhs, rhs } => {
                let l = self.eval_expr(lhs)?;
                let r = self.eval_expr(rhs)?;
                Ok(match op {
                    BinOp::Add => l + r,
                    BinOp::Sub => l - r,
                    BinOp::Mul => l * r,
                })
            }
        }
    }

    fn eval_cond(&self, c: &Cond) -> Result<bool, EvalError> {
        let l = self.eval_expr(&c.lhs)?;
        let r = self.eval_expr(&c.rhs)?;
        Ok(match c.op {
            CmpOp::Eq => l == r,
            CmpOp::Ne => l != r,
            CmpOp::Lt => l < r,
            CmpOp::Le => l <= r,
            CmpOp::Gt => l > r,
            CmpOp::Ge => l >= r,
        })
    }

    fn exec_block(&mut self, stmts: &'a [Stmt]) -> Result<Flow, EvalError> {
        for s in stmts {
            match s {
                Stmt::Assign { var, expr } => {
                    if let Flow::OutOfBudget = self.tick() {
                        return Ok(Flow::OutOfBudget);
                    }
                    let v = self.eval_expr(expr)?;
                    self.env.insert(var.as_str(), v);
                }
                Stmt::If { cond, then_body, else_body } => {
                    if let Flow::OutOfBudget = self.tick() {
                        return Ok(Flow::OutOfBudget);
                    }
                    let branch = if self.eval_cond(cond)? { then_body } else { else_body };
                    if let Flow::OutOfBudget = self.exec_block(branch)? {
                        return Ok(Flow::OutOfBudget);
                    }
                }
                Stmt::While { cond, body } => loop {
                    if let Flow::OutOfBudget = self.tick() {
                        return Ok(Flow::OutOfBudget);
                    }
                    if !self.eval_cond(cond)? {
                        break;
                    }
                    if let Flow::OutOfBudget = self.exec_block(body)? {
                        return Ok(Flow::OutOfBudget);
                    }
                },
            }
        }
        Ok(Flow::Continue)
    }
}

/// Run `p` on exact rational arguments with a statement budget.
///
/// Deterministic, and monotone in the budget: a `Value` produced at
/// budget `b` is produced unchanged at every larger budget.
pub fn eval(p: &Program, args: &[Rational], budget: u64) -> Result<ConcreteResult, EvalError> {
    assert!(budget >= 1, "budget must be at least 1");
    if args.len() != p.params.len() {
        return Err(EvalError::ArityMismatch { expected: p.params.len(), got: args.len() });
    }
    let mut env = BTreeMap::new();
    for (param, value) in p.params.iter().zip(args) {
        if param.kind == NumKind::Int && !value.fract().is_zero() {
            return Err(EvalError::NonIntegerArgument {
                param: param.name.clone(),
                value: value.to_string(),
            });
        }
        env.insert(param.name.as_str(), value.clone());
    }
    let mut m = Machine { env, steps: 0, budget };
    if let Flow::OutOfBudget = m.exec_block(&p.body)? {
        return Ok(ConcreteResult::BudgetExceeded { steps: m.steps });
    }
    if let Flow::OutOfBudget = m.tick() {
        return Ok(ConcreteResult::BudgetExceeded { steps: m.steps });
    }
    Ok(ConcreteResult::Value(m.eval_expr(&p.ret)?))
}
