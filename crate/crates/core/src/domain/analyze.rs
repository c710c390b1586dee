//! Built-in forward analyses: an interval analyzer and a sign analyzer
//! realized as the interval analyzer restricted to the sign sub-lattice.
//!
//! Both return concretized over-approximations of a program's image on
//! an input box. They are partial-correctness analyses: any program
//! containing a loop keeps the may-diverge flag, loop-free programs
//! never carry it.

use std::collections::BTreeMap;

use crate::lang::ast::{BinOp, CmpOp, Cond, Expr, NumKind, Program, Stmt};
use crate::num::{ExtRational, Finite, Rational};

use super::interval::{int_above, int_below, Interval};
use super::output::AbstractOutput;

/// Per-program-point variable state.
pub type AbstractEnv = BTreeMap<String, Interval>;

/// Loop heads are unrolled this many times before widening kicks in.
const UNROLL_DEPTH: u32 = 3;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Lattice {
    Interval,
    Sign,
}

struct Analyzer {
    lattice: Lattice,
    kind: NumKind,
}

/// `None` is the unreachable environment.
type Env = Option<AbstractEnv>;

impl Analyzer {
    fn snap(&self, itv: Interval) -> Interval {
        match self.lattice {
            Lattice::Interval => itv,
            Lattice::Sign => itv.snap_to_signs(),
        }
    }

    fn eval_expr(&self, e: &Expr, env: &AbstractEnv) -> Interval {
        match e {
            Expr::Var(name) => env
                .get(name)
                .cloned()
                .unwrap_or_else(|| panic!("unbound variable `{name}` in abstract env")),
            Expr::Lit(r) => Interval::point(r.clone(), self.kind),
            Expr::Neg(inner) => self.eval_expr(inner, env).neg(),
            Expr::Bin { op, lhs, rhs } => {
                let l = self.eval_expr(lhs, env);
                let r = self.eval_expr(rhs, env);
                match op {
                    BinOp::Add => l.add(&r),
                    BinOp::Sub => l.sub(&r),
                    BinOp::Mul => l.mul(&r),
                }
            }
        }
    }

    /// Refine `env` by the condition (or its negation). Exact meets for
    /// the order comparisons and equality; `!=` trims integer endpoints
    /// (the best representable transformer) and filters real intervals
    /// only when they are a single point.
    fn filter(&self, env: &Env, cond: &Cond, polarity: bool) -> Env {
        let env = env.as_ref()?;
        let op = if polarity { cond.op } else { cond.op.negate() };
        let lhs = self.eval_expr(&cond.lhs, env);
        let rhs = self.eval_expr(&cond.rhs, env);

        // Decidability on the whole condition first.
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
            let refined = refine_var(&out[name], op, &rhs)?;
            out.insert(name.clone(), self.snap(refined));
        }
        if let Expr::Var(name) = &cond.rhs {
            let refined = refine_var(&out[name], flip(op), &lhs)?;
            out.insert(name.clone(), self.snap(refined));
        }
        Some(out)
    }

    fn exec_block(&self, stmts: &[Stmt], mut env: Env) -> Env {
        for s in stmts {
            env = self.exec_stmt(s, env);
        }
        env
    }

    fn exec_stmt(&self, s: &Stmt, env: Env) -> Env {
        let env = env?;
        match s {
            Stmt::Assign { var, expr } => {
                let value = self.snap(self.eval_expr(expr, &env));
                let mut out = env;
                out.insert(var.clone(), value);
                Some(out)
            }
            Stmt::If { cond, then_body, else_body } => {
                let then_env = self.exec_block(then_body, self.filter(&Some(env.clone()), cond, true));
                let else_env = self.exec_block(else_body, self.filter(&Some(env), cond, false));
                join_env(then_env, else_env)
            }
            Stmt::While { cond, body } => {
                let entry = Some(env);
                let mut head = entry.clone();
                let mut iterations = 0u32;
                loop {
                    let taken = self.filter(&head, cond, true);
                    let after_body = self.exec_block(body, taken);
                    let next = join_env(entry.clone(), after_body);
                    if env_leq(&next, &head) {
                        break;
                    }
                    iterations += 1;
                    head = if iterations > UNROLL_DEPTH {
                        widen_env(head, next)
                    } else {
                        next
                    };
                }
                self.filter(&head, cond, false)
            }
        }
    }

    fn run(&self, p: &Program, input: AbstractEnv) -> AbstractOutput {
        let kind = p.numeric_kind();
        let mut env = input;
        // Locals start unconstrained; reads before assignment are ruled
        // out statically.
        for l in &p.locals {
            env.entry(l.name.clone()).or_insert_with(|| Interval::unbounded(l.kind));
        }
        let env = env
            .into_iter()
            .map(|(k, v)| (k, self.snap(v)))
            .collect::<AbstractEnv>();
        let may_diverge = p.has_loop();
        match self.exec_block(&p.body, Some(env)) {
            Some(env) => {
                let result = self.snap(self.eval_expr(&p.ret, &env));
                AbstractOutput::new(kind, vec![result], may_diverge)
            }
            // Return unreachable: only divergence remains. This cannot
            // happen for loop-free programs.
            None => {
                debug_assert!(may_diverge);
                AbstractOutput::new(kind, Vec::new(), true)
            }
        }
    }
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

/// Meet `x` with the set of values satisfying `x op rhs` for some value
/// of `rhs`. Strict comparisons round to the adjacent integer for int
/// kind and fall back to the closed endpoint for real kind.
fn refine_var(x: &Interval, op: CmpOp, rhs: &Interval) -> Option<Interval> {
    let kind = x.kind();
    let bound_hi = |e: &ExtRational, strict: bool| -> ExtRational {
        match (e, strict, kind) {
            (Finite(r), true, NumKind::Int) => Finite(int_below(r)),
            _ => e.clone(),
        }
    };
    let bound_lo = |e: &ExtRational, strict: bool| -> ExtRational {
        match (e, strict, kind) {
            (Finite(r), true, NumKind::Int) => Finite(int_above(r)),
            _ => e.clone(),
        }
    };
    match op {
        CmpOp::Lt | CmpOp::Le => {
            let hi = bound_hi(rhs.hi(), op == CmpOp::Lt);
            Interval::new(x.lo().clone(), x.hi().clone().min(hi), kind).ok()
        }
        CmpOp::Gt | CmpOp::Ge => {
            let lo = bound_lo(rhs.lo(), op == CmpOp::Gt);
            Interval::new(x.lo().clone().max(lo), x.hi().clone(), kind).ok()
        }
        CmpOp::Eq => x.meet(rhs),
        CmpOp::Ne => {
            if !rhs.is_point() {
                return Some(x.clone());
            }
            let c = rhs.lo();
            if x.is_point() {
                return if x.lo() == c { None } else { Some(x.clone()) };
            }
            if kind == NumKind::Int {
                let mut lo = x.lo().clone();
                let mut hi = x.hi().clone();
                if &lo == c {
                    if let Finite(r) = &lo {
                        lo = Finite(r + Rational::from_integer(1.into()));
                    }
                }
                if &hi == c {
                    if let Finite(r) = &hi {
                        hi = Finite(r - Rational::from_integer(1.into()));
                    }
                }
                return Interval::new(lo, hi, kind).ok();
            }
            Some(x.clone())
        }
    }
}

fn join_env(a: Env, b: Env) -> Env {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(a), Some(b)) => {
            debug_assert_eq!(a.len(), b.len());
            Some(
                a.into_iter()
                    .map(|(k, va)| {
                        let vb = &b[&k];
                        let hull = va.hull(vb);
                        (k, hull)
                    })
                    .collect(),
            )
        }
    }
}

fn widen_env(old: Env, new: Env) -> Env {
    match (old, new) {
        (None, x) | (x, None) => x,
        (Some(old), Some(new)) => Some(
            old.into_iter()
                .map(|(k, vo)| {
                    let w = vo.widen(&new[&k]);
                    (k, w)
                })
                .collect(),
        ),
    }
}

fn env_leq(a: &Env, b: &Env) -> bool {
    match (a, b) {
        (None, _) => true,
        (_, None) => false,
        (Some(a), Some(b)) => a.iter().all(|(k, va)| b[k].contains_interval(va)),
    }
}

/// Forward interval analysis of `p` on an input box binding every
/// parameter. Sound: every terminating concrete run from the box lands
/// in the result; the may-diverge flag is kept unless `p` is loop-free.
pub fn interval_analyze(p: &Program, input_box: &AbstractEnv) -> AbstractOutput {
    for param in &p.params {
        assert!(input_box.contains_key(&param.name), "input box must bind `{}`", param.name);
    }
    Analyzer { lattice: Lattice::Interval, kind: p.numeric_kind() }.run(p, input_box.clone())
}

/// Sign analysis: the interval analyzer restricted to the five-endpoint
/// sign sub-lattice. Inputs are unions of sign intervals; the analysis
/// runs once per combination of components and unions the results.
pub fn sign_analyze(p: &Program, input_signs: &BTreeMap<String, AbstractOutput>) -> AbstractOutput {
    assert_eq!(p.numeric_kind(), NumKind::Int, "sign analysis requires an int program");
    for param in &p.params {
        assert!(input_signs.contains_key(&param.name), "input signs must bind `{}`", param.name);
    }
    let analyzer = Analyzer { lattice: Lattice::Sign, kind: NumKind::Int };
    let vars: Vec<&String> = input_signs.keys().collect();
    let mut results: Vec<AbstractOutput> = Vec::new();
    let mut choice: Vec<usize> = vec![0; vars.len()];
    loop {
        let mut env = AbstractEnv::new();
        let mut feasible = true;
        for (vi, var) in vars.iter().enumerate() {
            let parts = input_signs[*var].numeric();
            if parts.is_empty() {
                feasible = false;
                break;
            }
            env.insert((*var).clone(), parts[choice[vi]].clone());
        }
        if feasible {
            results.push(analyzer.run(p, env));
        } else {
            results.push(AbstractOutput::empty(NumKind::Int));
        }
        // advance the mixed-radix choice vector
        let mut i = 0;
        loop {
            if i == vars.len() {
                let combined = results
                    .into_iter()
                    .reduce(|a, b| a.union(&b))
                    .unwrap_or_else(|| AbstractOutput::empty(NumKind::Int));
                return combined;
            }
            let radix = input_signs[vars[i]].numeric().len().max(1);
            choice[i] += 1;
            if choice[i] < radix {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}
