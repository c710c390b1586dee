//! Strategies shared by the acceptance property suites: random weighted
//! partitions, image tables, events, and loop-free programs.
//!
//! Real-kind generators produce non-degenerate intervals (degenerate
//! real events are measure-zero targets under the admissible continuous
//! measures); int-kind generators are unrestricted. Event endpoints for
//! the program-based suites use denominator 7 so they never coincide
//! with analyzer output endpoints (denominators 2^a * 3^b), keeping the
//! checked identities exact.

use std::collections::BTreeMap;
use std::sync::Arc;

use proptest::prelude::*;

use probounds::domain::{AbstractOutput, Interval};
use probounds::forward::{ImageTable, OutputEvent, Provenance};
use probounds::lang::ast::{BinOp, CmpOp, Cond, Expr, NumKind, Param, Program, Stmt};
use probounds::num::{rat, Rational};
use probounds::partition::{Cell, InputPartition, PartitionMode};

#[derive(Debug, Clone)]
pub struct TableCase {
    pub table: ImageTable,
    pub kind: NumKind,
}

/// A kind-independent description of an interval union; built into an
/// `AbstractOutput` once the table's kind is known.
#[derive(Debug, Clone)]
pub struct OutputGen {
    /// (start, length) segments on a small integer lattice.
    segments: Vec<(i32, u8)>,
    neg_ray: bool,
    pos_ray: bool,
    bottom: bool,
}

impl OutputGen {
    fn pieces(&self, kind: NumKind, mask: u16) -> Vec<Interval> {
        let mut out = Vec::new();
        for (i, (start, len)) in self.segments.iter().enumerate() {
            if mask & (1 << i) == 0 {
                continue;
            }
            let itv = match kind {
                // atoms allowed: [start, start+len] with len possibly 0
                NumKind::Int => Interval::of(*start as i64, *start as i64 + *len as i64, kind),
                // non-degenerate halves: [start/2, (start+len+1)/2]
                NumKind::Real => Interval::new(
                    rat(*start as i64, 2),
                    rat(*start as i64 + *len as i64 + 1, 2),
                    kind,
                )
                .unwrap(),
            };
            out.push(itv);
        }
        if self.neg_ray && mask & (1 << 14) != 0 {
            out.push(Interval::at_most(rat(-25, 1), kind).unwrap());
        }
        if self.pos_ray && mask & (1 << 15) != 0 {
            out.push(Interval::at_least(rat(25, 1), kind).unwrap());
        }
        out
    }

    pub fn build_output(&self, kind: NumKind) -> AbstractOutput {
        let pieces = self.pieces(kind, u16::MAX);
        // table entries are images of total programs: never fully empty
        let bottom = self.bottom || pieces.is_empty();
        AbstractOutput::new(kind, pieces, bottom)
    }

    pub fn build(&self, kind: NumKind) -> OutputEvent {
        OutputEvent::new("event", self.build_output(kind))
    }

    /// An event contained in `build(kind)`: a sub-collection of its
    /// pieces, with the bottom atom kept only when bit 13 is set.
    pub fn build_subset(&self, kind: NumKind, mask: u16) -> OutputEvent {
        let bottom = self.bottom && mask & (1 << 13) != 0;
        OutputEvent::new("sub", AbstractOutput::new(kind, self.pieces(kind, mask), bottom))
    }
}

pub fn arb_output_gen() -> impl Strategy<Value = OutputGen> {
    (
        prop::collection::vec((-20i32..20, 0u8..6), 0..3),
        any::<bool>(),
        any::<bool>(),
        any::<bool>(),
    )
        .prop_map(|(segments, neg_ray, pos_ray, bottom)| OutputGen {
            segments,
            neg_ray,
            pos_ray,
            bottom,
        })
}

pub fn arb_event() -> impl Strategy<Value = OutputGen> {
    arb_output_gen()
}

fn arb_mode() -> impl Strategy<Value = PartitionMode> {
    prop_oneof![Just(PartitionMode::DiscreteInt), Just(PartitionMode::ContinuousReal)]
}

/// A one-dimensional weighted partition: cut points over the int line
/// (with unbounded end cells) or over [0, 10] in real mode. Weights are
/// random non-negative rationals summing to 1; zero weights allowed.
fn arb_partition(mode: PartitionMode) -> impl Strategy<Value = Arc<InputPartition>> {
    let cuts = prop::collection::btree_set(-5i64..5, 0..3);
    (cuts, prop::collection::vec(0u32..100, 4))
        .prop_map(move |(cuts, raw_weights)| {
            let cuts: Vec<i64> = cuts.into_iter().collect();
            let kind = mode.kind();
            let mut intervals: Vec<Interval> = Vec::new();
            match mode {
                PartitionMode::DiscreteInt => {
                    let domain = Interval::unbounded(kind);
                    if cuts.is_empty() {
                        intervals.push(domain.clone());
                    } else {
                        intervals.push(Interval::at_most(rat(cuts[0], 1), kind).unwrap());
                        for w in cuts.windows(2) {
                            intervals.push(Interval::of(w[0] + 1, w[1], kind));
                        }
                        intervals
                            .push(Interval::at_least(rat(cuts[cuts.len() - 1] + 1, 1), kind).unwrap());
                    }
                    build_1d(mode, domain, intervals, raw_weights)
                }
                PartitionMode::ContinuousReal => {
                    let domain = Interval::of(0, 10, kind);
                    // map cuts into (0, 10) as halves: c in -5..5 -> c/2 + 5
                    let mut bounds: Vec<Rational> = vec![rat(0, 1)];
                    for c in &cuts {
                        bounds.push(rat(*c, 2) + rat(5, 1));
                    }
                    bounds.push(rat(10, 1));
                    bounds.dedup();
                    for w in bounds.windows(2) {
                        intervals
                            .push(Interval::new(w[0].clone(), w[1].clone(), kind).unwrap());
                    }
                    build_1d(mode, domain, intervals, raw_weights)
                }
            }
        })
        .prop_map(Arc::new)
}

fn build_1d(
    mode: PartitionMode,
    domain: Interval,
    intervals: Vec<Interval>,
    raw_weights: Vec<u32>,
) -> InputPartition {
    let n = intervals.len();
    let mut weights: Vec<Rational> = raw_weights
        .into_iter()
        .take(n)
        .map(|w| rat(w as i64, 1))
        .collect();
    weights.resize(n, rat(1, 1));
    let total: Rational = weights.iter().cloned().sum();
    let weights: Vec<Rational> = if total == rat(0, 1) {
        // all-zero draw: fall back to uniform
        vec![rat(1, n as i64); n]
    } else {
        weights.into_iter().map(|w| w / total.clone()).collect()
    };
    let cells: Vec<Cell> = intervals
        .into_iter()
        .zip(weights)
        .map(|(itv, weight)| Cell { region: [("x".to_string(), itv)].into(), weight })
        .collect();
    InputPartition::explicit(vec![("x".to_string(), domain)], cells, mode).unwrap()
}

/// A random table: random partition plus one random entry per cell.
pub fn arb_table() -> impl Strategy<Value = TableCase> {
    arb_mode().prop_flat_map(|mode| {
        arb_partition(mode).prop_flat_map(move |partition| {
            let len = partition.len();
            prop::collection::vec(arb_output_gen(), len).prop_map(move |entries| {
                let kind = mode.kind();
                let table = ImageTable::from_entries(
                    Arc::clone(&partition),
                    entries.into_iter().map(|e| e.build_output(kind)).collect(),
                    Provenance::External,
                )
                .unwrap();
                TableCase { table, kind }
            })
        })
    })
}

/// A random table plus raw entries for a second table over the same
/// partition.
pub fn arb_table_pair() -> impl Strategy<Value = (TableCase, Vec<OutputGen>)> {
    arb_table().prop_flat_map(|case| {
        let len = case.table.partition().len();
        prop::collection::vec(arb_output_gen(), len)
            .prop_map(move |extra| (case.clone(), extra))
    })
}

/// Expression shape; variable indices resolve modulo the variables in
/// scope when the program is built.
#[derive(Debug, Clone)]
pub enum ExprGen {
    Var(u8),
    Lit(i8),
    Neg(Box<ExprGen>),
    Bin(BinOp, Box<ExprGen>, Box<ExprGen>),
}

fn arb_expr_gen() -> impl Strategy<Value = ExprGen> {
    let leaf = prop_oneof![
        (0u8..8).prop_map(ExprGen::Var),
        (-4i8..=4).prop_map(ExprGen::Lit),
    ];
    leaf.prop_recursive(3, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|e| ExprGen::Neg(Box::new(e))),
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| ExprGen::Bin(BinOp::Add, Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| ExprGen::Bin(BinOp::Sub, Box::new(a), Box::new(b))),
            (inner.clone(), inner)
                .prop_map(|(a, b)| ExprGen::Bin(BinOp::Mul, Box::new(a), Box::new(b))),
        ]
    })
}

impl ExprGen {
    fn build(&self, scope: &[String]) -> Expr {
        match self {
            ExprGen::Var(i) => Expr::Var(scope[*i as usize % scope.len()].clone()),
            // literals are half-integers
            ExprGen::Lit(v) => Expr::Lit(rat(*v as i64, 2)),
            ExprGen::Neg(inner) => Expr::Neg(Box::new(inner.build(scope))),
            ExprGen::Bin(op, a, b) => Expr::Bin {
                op: *op,
                lhs: Box::new(a.build(scope)),
                rhs: Box::new(b.build(scope)),
            },
        }
    }
}

#[derive(Debug, Clone)]
pub enum StmtGen {
    Assign(ExprGen),
    Branch { var: u8, op_pick: u8, threshold: i8, then_rhs: ExprGen, else_rhs: ExprGen },
}

fn arb_stmt_gen(with_branches: bool) -> impl Strategy<Value = StmtGen> {
    if with_branches {
        prop_oneof![
            3 => arb_expr_gen().prop_map(StmtGen::Assign),
            1 => (any::<u8>(), any::<u8>(), -2i8..=2, arb_expr_gen(), arb_expr_gen()).prop_map(
                |(var, op_pick, threshold, then_rhs, else_rhs)| StmtGen::Branch {
                    var,
                    op_pick,
                    threshold,
                    then_rhs,
                    else_rhs,
                }
            ),
        ]
        .boxed()
    } else {
        arb_expr_gen().prop_map(StmtGen::Assign).boxed()
    }
}

fn build_program(n_params: usize, stmt_gens: &[StmtGen]) -> Program {
    let params: Vec<Param> = (0..n_params)
        .map(|i| Param { name: format!("a{i}"), kind: NumKind::Real })
        .collect();
    let mut scope: Vec<String> = params.iter().map(|p| p.name.clone()).collect();
    let mut locals: Vec<Param> = Vec::new();
    let mut body: Vec<Stmt> = Vec::new();
    let ops = [CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge, CmpOp::Eq, CmpOp::Ne];
    for (i, s) in stmt_gens.iter().enumerate() {
        let fresh = format!("t{i}");
        locals.push(Param { name: fresh.clone(), kind: NumKind::Real });
        match s {
            StmtGen::Assign(e) => {
                body.push(Stmt::Assign { var: fresh.clone(), expr: e.build(&scope) });
            }
            StmtGen::Branch { var, op_pick, threshold, then_rhs, else_rhs } => {
                let cond = Cond {
                    lhs: Expr::Var(scope[*var as usize % scope.len()].clone()),
                    op: ops[*op_pick as usize % ops.len()],
                    rhs: Expr::Lit(rat(*threshold as i64, 2)),
                };
                body.push(Stmt::If {
                    cond,
                    then_body: vec![Stmt::Assign {
                        var: fresh.clone(),
                        expr: then_rhs.build(&scope),
                    }],
                    else_body: vec![Stmt::Assign {
                        var: fresh.clone(),
                        expr: else_rhs.build(&scope),
                    }],
                });
            }
        }
        scope.push(fresh);
    }
    let ret = Expr::Var(scope.last().unwrap().clone());
    Program { name: "p".into(), return_kind: NumKind::Real, params, locals, body, ret }
}

fn program_with(
    with_branches: bool,
) -> impl Strategy<Value = (Program, InputPartition)> {
    (
        1usize..=2,
        prop::collection::vec(arb_stmt_gen(with_branches), 1..4),
        prop::collection::vec(1u32..=3, 2),
    )
        .prop_map(move |(n_params, stmt_gens, subdivisions)| {
            let program = build_program(n_params, &stmt_gens);
            let dims: Vec<(String, Interval)> = program
                .params
                .iter()
                .map(|p| (p.name.clone(), Interval::of(0, 1, NumKind::Real)))
                .collect();
            let subs: BTreeMap<String, u32> = dims
                .iter()
                .zip(&subdivisions)
                .map(|((name, _), n)| (name.clone(), *n))
                .collect();
            let partition = InputPartition::grid(dims, &subs).unwrap();
            (program, partition)
        })
}

/// Random loop-free program (assignments and two-sided `if`s) with a
/// random grid partition over its parameters.
pub fn arb_loop_free_program() -> impl Strategy<Value = (Program, InputPartition)> {
    program_with(true)
}

/// Random straight-line program (assignments only) ending in a variable
/// return, as required by the pair-propagation comparison.
pub fn arb_straight_line_program() -> impl Strategy<Value = (Program, InputPartition)> {
    program_with(false)
}

/// Real events whose endpoints have denominator 7, so they are never
/// shared with analyzer outputs (whose endpoints have denominators of
/// the form 2^a * 3^b).
pub fn arb_general_position_events() -> impl Strategy<Value = Vec<OutputEvent>> {
    let piece = (-70i32..63, 1u8..20).prop_filter_map("skip multiples of 7", |(j, len)| {
        let hi = j + len as i32;
        if j % 7 == 0 || hi % 7 == 0 {
            None
        } else {
            Some(Interval::new(rat(j as i64, 7), rat(hi as i64, 7), NumKind::Real).unwrap())
        }
    });
    prop::collection::vec(
        (prop::collection::vec(piece, 1..3), any::<bool>()).prop_map(|(pieces, bottom)| {
            OutputEvent::new("event", AbstractOutput::new(NumKind::Real, pieces, bottom))
        }),
        1..3,
    )
}
