//! Sound upper and lower probability bounds on the output events of
//! deterministic programs, obtained by reusing non-probabilistic
//! forward and backward analyses over a finitely partitioned input
//! space with a known input probability measure.
//!
//! The pieces:
//!
//! - [`lang`]: the mini imperative language with its exact-rational
//!   concrete semantics — the ground truth every analysis
//!   over-approximates.
//! - [`domain`]: interval and sign analyzers producing concretized
//!   per-cell images (interval unions plus a may-diverge atom).
//! - [`partition`]: weighted box partitions of the input space; exact
//!   rational weights summing to 1.
//! - [`forward`]: the bound computations — the upper bound of an event
//!   sums the weights of cells whose image overlaps it, the lower bound
//!   those whose image is contained in it; tables combine by per-cell
//!   intersection.
//! - [`backward`]: the same bounds from a preimage over-approximation
//!   on a finite measurable space, via the least-measurable-superset
//!   lift and the complement dual.
//! - [`termination`]: per-cell termination facts as a combinable table.
//! - [`monniaux`]: the weighted-pair propagation baseline used for
//!   precision comparisons.
//! - [`oracle`]: exhaustive and Monte-Carlo ground-truth estimators.
//! - [`report`]: human table and CSV emission.

pub mod backward;
pub mod domain;
pub mod error;
pub mod forward;
pub mod lang;
pub mod monniaux;
pub mod num;
pub mod oracle;
pub mod partition;
pub mod report;
pub mod termination;

pub use backward::{
    dual_preimage, lower_bound as backward_lower_bound, upper_bound as backward_upper_bound,
    BackwardInstance, BackwardProblem, FiniteMeasurableSpace, PreimageTable,
};
pub use domain::{interval_analyze, sign_analyze, AbstractEnv, AbstractOutput, Interval};
pub use forward::{
    combine_all, AnalysisDomain, BoundsReport, ImageTable, OutputEvent, Provenance, ReportRow,
    TableError,
};
pub use lang::{eval, parse_program, ConcreteResult, EvalError, LangError, NumKind, Program};
pub use monniaux::{pair_upper_bound, propagate, result_variable, WeightedEnv};
pub use num::{ExtRational, Rational};
pub use oracle::{clopper_pearson, exhaustive, mc_estimate, OracleEstimate};
pub use partition::{Cell, InputPartition, PartitionError, PartitionMode};
pub use termination::{facts_to_table, syntactic_check, TermVerdict, TerminationFacts};
