//! Weighted-pair interval propagation, reproducing the experimental
//! probabilistic lifting of an interval analysis due to Monniaux that
//! the forward technique is compared against.
//!
//! Each cell starts as one (environment, weight) pair. Statements
//! update environments by interval transfer; at every `if`, a pair
//! whose environment satisfies both the guard and its negation is
//! duplicated, each copy filtered accordingly and keeping the full
//! weight. The upper bound of an event sums the weights of exit pairs
//! whose result interval overlaps it — a sound upper bound, not a
//! measure, so sums may exceed 1. The procedure covers loop-free
//! programs only and derives no lower bounds.

use thiserror::Error;

use crate::domain::analyze::AbstractEnv;
use crate::domain::Interval;
use crate::forward::OutputEvent;
use crate::lang::ast::{BinOp, CmpOp, Cond, Expr, NumKind, Program, Stmt};
use crate::num::Rational;
use crate::partition::InputPartition;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum PropagateError {
    #[error("loops are unsupported in comparison mode")]
    LoopUnsupported,
    #[error("comparison mode requires the program to return a variable")]
    NonVariableReturn,
}

/// An interval environment with its input probability.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedEnv {
    pub env: AbstractEnv,
    pub weight: Rational,
}

fn eval_expr(e: &Expr, env: &AbstractEnv, kind: NumKind) -> Interval {
    match e {
        Expr::Var(name) => env[name].clone(),
        Expr::Lit(r) => Interval::point(r.clone(), kind),
        Expr::Neg(inner) => eval_expr(inner, env, kind).neg(),
        Expr::Bin { op, lhs, rhs } => {
            let l = eval_expr(lhs, env, kind);
            let r = eval_expr(rhs, env, kind);
            match op {
                BinOp::Add => l.add(&r),
                BinOp::Sub => l.sub(&r),
                BinOp::Mul => l.mul(&r),
            }
        }
    }
}

/// Guard filtering for pair environments: meet on variable operands,
/// plus a decidability test; `None` when the filtered environment is
/// infeasible.
fn filter(env: &AbstractEnv, cond: &Cond, polarity: bool, kind: NumKind) -> Option<AbstractEnv> {
    let op = if polarity { cond.op } else { cond.op.negate() };
    let lhs = eval_expr(&cond.lhs, env, kind);
    let rhs = eval_expr(&cond.rhs, env, kind);
    let definitely_false = match op {
        CmpOp::Lt => lhs.lo() >= rhs.hi(),
        CmpOp::Le => lhs.lo() > rhs.hi(),
        CmpOp::Gt => lhs.hi() <= rhs.lo(),
        CmpOp::Ge => lhs.hi() < rhs.lo(),
        CmpOp::Eq => lhs.meet(&rhs).is_none(),
        CmpOp::Ne => lhs.is_point() && lhs == rhs,
    };
    if definitely_false {
        return None;
    }
    let mut out = env.clone();
    if let Expr::Var(name) = &cond.lhs {
        let refined = refine(&out[name], op, &rhs)?;
        out.insert(name.clone(), refined);
    }
    if let Expr::Var(name) = &cond.rhs {
        let refined = refine(&out[name], flip(op), &lhs)?;
        out.insert(name.clone(), refined);
    }
    Some(out)
}

fn flip(op: CmpOp) -> CmpOp {
    match op {
        CmpOp::Lt => CmpOp::Gt,
        CmpOp::Le => CmpOp::Ge,
        CmpOp::Gt => CmpOp::Lt,
        CmpOp::Ge => CmpOp::Le,
        CmpOp::Eq => CmpOp::Eq,
        CmpOp::Ne => CmpOp::Ne,
    }
}

fn refine(x: &Interval, op: CmpOp, rhs: &Interval) -> Option<Interval> {
    match op {
        CmpOp::Lt | CmpOp::Le => {
            Interval::new(x.lo().clone(), x.hi().clone().min(rhs.hi().clone()), x.kind()).ok()
        }
        CmpOp::Gt | CmpOp::Ge => {
            Interval::new(x.lo().clone().max(rhs.lo().clone()), x.hi().clone(), x.kind()).ok()
        }
        CmpOp::Eq => x.meet(rhs),
        CmpOp::Ne => {
            if x.is_point() && rhs.is_point() && x.lo() == rhs.lo() {
                None
            } else {
                Some(x.clone())
            }
        }
    }
}

fn exec_block(
    stmts: &[Stmt],
    pairs: Vec<WeightedEnv>,
    kind: NumKind,
) -> Result<Vec<WeightedEnv>, PropagateError> {
    let mut pairs = pairs;
    for s in stmts {
        pairs = exec_stmt(s, pairs, kind)?;
    }
    Ok(pairs)
}

fn exec_stmt(
    s: &Stmt,
    pairs: Vec<WeightedEnv>,
    kind: NumKind,
) -> Result<Vec<WeightedEnv>, PropagateError> {
    match s {
        Stmt::Assign { var, expr } => Ok(pairs
            .into_iter()
            .map(|mut p| {
                let value = eval_expr(expr, &p.env, kind);
                p.env.insert(var.clone(), value);
                p
            })
            .collect()),
        Stmt::If { cond, then_body, else_body } => {
            let mut taken = Vec::new();
            let mut skipped = Vec::new();
            for p in pairs {
                // Duplicate on undecidable guards; each copy keeps the
                // full weight.
                if let Some(env) = filter(&p.env, cond, true, kind) {
                    taken.push(WeightedEnv { env, weight: p.weight.clone() });
                }
                if let Some(env) = filter(&p.env, cond, false, kind) {
                    skipped.push(WeightedEnv { env, weight: p.weight });
                }
            }
            let mut out = exec_block(then_body, taken, kind)?;
            out.extend(exec_block(else_body, skipped, kind)?);
            Ok(out)
        }
        Stmt::While { .. } => Err(PropagateError::LoopUnsupported),
    }
}

/// Propagate one weighted pair per cell through a loop-free program and
/// return the exit pairs.
pub fn propagate(
    p: &Program,
    partition: &InputPartition,
) -> Result<Vec<WeightedEnv>, PropagateError> {
    if p.has_loop() {
        return Err(PropagateError::LoopUnsupported);
    }
    let initial: Vec<WeightedEnv> = partition
        .cells()
        .iter()
        .map(|cell| {
            let mut env: AbstractEnv = cell.region.clone();
            for l in &p.locals {
                env.entry(l.name.clone()).or_insert_with(|| Interval::unbounded(l.kind));
            }
            WeightedEnv { env, weight: cell.weight.clone() }
        })
        .collect();
    exec_block(&p.body, initial, p.numeric_kind())
}

/// The variable a comparison run reads its result from.
pub fn result_variable(p: &Program) -> Result<&str, PropagateError> {
    match &p.ret {
        Expr::Var(name) => Ok(name),
        _ => Err(PropagateError::NonVariableReturn),
    }
}

/// Sum of the weights of the pairs whose result interval overlaps the
/// event. An upper probability bound; can exceed 1.
pub fn pair_upper_bound(pairs: &[WeightedEnv], result_var: &str, event: &OutputEvent) -> Rational {
    pairs
        .iter()
        .filter(|p| {
            let result = &p.env[result_var];
            event.shape.numeric().iter().any(|e| result.overlaps(e))
        })
        .map(|p| p.weight.clone())
        .sum()
}
