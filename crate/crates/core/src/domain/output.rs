//! Concretized analysis results: a finite union of disjoint intervals
//! plus a may-diverge flag.
//!
//! The flag is a first-class output atom: it participates in overlap,
//! subset, intersection, and complement exactly like a numeric value.
//! Output events are represented by the same type.

use std::fmt;

use crate::lang::NumKind;
use crate::num::{ExtRational, Finite, NegInf, PosInf, Rational};

use super::interval::Interval;

/// Normalized union of intervals (`numeric`) plus the divergence atom.
///
/// Invariant: intervals are sorted, pairwise disjoint and non-adjacent
/// (int kind merges `[a,b],[b+1,c]`), and all of `self.kind()`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbstractOutput {
    kind: NumKind,
    numeric: Vec<Interval>,
    may_diverge: bool,
}

impl AbstractOutput {
    /// Build and normalize. All intervals must have kind `kind`.
    pub fn new(kind: NumKind, intervals: Vec<Interval>, may_diverge: bool) -> AbstractOutput {
        for i in &intervals {
            assert_eq!(i.kind(), kind, "mixed interval kinds in one output");
        }
        let numeric = normalize(intervals);
        AbstractOutput { kind, numeric, may_diverge }
    }

    /// The empty output (no numeric values, no divergence).
    pub fn empty(kind: NumKind) -> AbstractOutput {
        AbstractOutput { kind, numeric: Vec::new(), may_diverge: false }
    }

    /// `{bottom}`: divergence only.
    pub fn bottom(kind: NumKind) -> AbstractOutput {
        AbstractOutput { kind, numeric: Vec::new(), may_diverge: true }
    }

    /// The full output space including the divergence atom.
    pub fn top(kind: NumKind) -> AbstractOutput {
        AbstractOutput { kind, numeric: vec![Interval::unbounded(kind)], may_diverge: true }
    }

    /// The full numeric line without the divergence atom.
    pub fn full_numeric(kind: NumKind) -> AbstractOutput {
        AbstractOutput { kind, numeric: vec![Interval::unbounded(kind)], may_diverge: false }
    }

    pub fn kind(&self) -> NumKind {
        self.kind
    }

    pub fn numeric(&self) -> &[Interval] {
        &self.numeric
    }

    pub fn may_diverge(&self) -> bool {
        self.may_diverge
    }

    pub fn with_divergence(&self, may_diverge: bool) -> AbstractOutput {
        AbstractOutput { kind: self.kind, numeric: self.numeric.clone(), may_diverge }
    }

    pub fn is_empty(&self) -> bool {
        self.numeric.is_empty() && !self.may_diverge
    }

    /// Exact closed membership of a concrete value.
    pub fn contains_value(&self, value: &Rational) -> bool {
        self.numeric.iter().any(|i| i.contains(value))
    }

    /// Do the two outputs share anything: a positive-measure numeric
    /// intersection (real kind), any common point (int kind or atoms),
    /// or the divergence atom on both sides?
    pub fn overlaps(&self, other: &AbstractOutput) -> bool {
        if self.may_diverge && other.may_diverge {
            return true;
        }
        self.numeric
            .iter()
            .any(|a| other.numeric.iter().any(|b| a.overlaps(b)))
    }

    /// Is `self` contained in `other`? Numeric parts are compared
    /// per covering interval (complete after normalization); the
    /// divergence atom must be covered too. Degenerate real entries
    /// need the interior of a covering interval, keeping this the
    /// exact dual of `overlaps` against the complement.
    pub fn subset_of(&self, other: &AbstractOutput) -> bool {
        if self.may_diverge && !other.may_diverge {
            return false;
        }
        self.numeric.iter().all(|a| {
            other.numeric.iter().any(|b| {
                if self.kind == NumKind::Real && a.is_point() && !b.is_point() {
                    b.lo() < a.lo() && a.hi() < b.hi()
                } else {
                    b.contains_interval(a)
                }
            })
        })
    }

    /// Pairwise intersection of the numeric parts; divergence only when
    /// both sides may diverge. In real kind, a degenerate result of two
    /// non-degenerate intervals (a shared endpoint) is a null set and
    /// is dropped; atoms on either side survive.
    pub fn intersect(&self, other: &AbstractOutput) -> AbstractOutput {
        let kind = self.kind.join(other.kind);
        let mut pieces = Vec::new();
        for a in &self.numeric {
            for b in &other.numeric {
                if let Some(m) = a.meet(b) {
                    if kind == NumKind::Real && m.is_point() && !a.is_point() && !b.is_point() {
                        continue;
                    }
                    pieces.push(m);
                }
            }
        }
        AbstractOutput::new(kind, pieces, self.may_diverge && other.may_diverge)
    }

    pub fn union(&self, other: &AbstractOutput) -> AbstractOutput {
        let mut pieces = self.numeric.clone();
        pieces.extend(other.numeric.iter().cloned());
        AbstractOutput::new(
            self.kind.join(other.kind),
            pieces,
            self.may_diverge || other.may_diverge,
        )
    }

    /// Complement within the full output space (numeric line plus the
    /// divergence atom). For int kind this is exact; for real kind the
    /// closed representation differs from the true complement by a null
    /// set, which the overlap/subset conventions absorb.
    pub fn complement(&self) -> AbstractOutput {
        let mut pieces = Vec::new();
        let mut cursor = NegInf;
        let one = Rational::from_integer(1.into());
        for itv in &self.numeric {
            let gap_hi = match self.kind {
                NumKind::Int => match itv.lo() {
                    Finite(r) => Finite(r - &one),
                    e => e.clone(),
                },
                NumKind::Real => itv.lo().clone(),
            };
            // Normalization guarantees positive gaps between real
            // pieces; int gaps may be single points like [0,0].
            if let Ok(gap) = Interval::new(cursor.clone(), gap_hi, self.kind) {
                pieces.push(gap);
            }
            cursor = match self.kind {
                NumKind::Int => match itv.hi() {
                    Finite(r) => Finite(r + &one),
                    e => e.clone(),
                },
                NumKind::Real => itv.hi().clone(),
            };
            if cursor == PosInf {
                break;
            }
        }
        if cursor != PosInf {
            if let Ok(gap) = Interval::new(cursor, PosInf, self.kind) {
                pieces.push(gap);
            }
        }
        AbstractOutput::new(self.kind, pieces, !self.may_diverge)
    }

    /// Parse the table syntax `[lo,hi]|[lo,hi]|...` (empty string for no
    /// numeric part).
    pub fn parse_numeric(s: &str, kind: NumKind, may_diverge: bool) -> Result<Self, String> {
        let s = s.trim();
        let mut intervals = Vec::new();
        if !s.is_empty() {
            for part in s.split('|') {
                intervals.push(Interval::parse(part, kind)?);
            }
        }
        Ok(AbstractOutput::new(kind, intervals, may_diverge))
    }

    /// The table syntax for the numeric part.
    pub fn format_numeric(&self) -> String {
        self.numeric
            .iter()
            .map(|i| i.to_string())
            .collect::<Vec<_>>()
            .join("|")
    }
}

impl fmt::Display for AbstractOutput {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "empty");
        }
        let mut first = true;
        if self.may_diverge {
            write!(f, "bot")?;
            first = false;
        }
        for i in &self.numeric {
            if !first {
                write!(f, "|")?;
            }
            write!(f, "{i}")?;
            first = false;
        }
        Ok(())
    }
}

/// Sort and merge overlapping or adjacent intervals.
fn normalize(mut intervals: Vec<Interval>) -> Vec<Interval> {
    intervals.sort_by(|a, b| a.lo().cmp(b.lo()).then_with(|| a.hi().cmp(b.hi())));
    let mut out: Vec<Interval> = Vec::with_capacity(intervals.len());
    for itv in intervals {
        match out.last_mut() {
            Some(last) if last.touches(&itv) => {
                *last = last.hull(&itv);
            }
            _ => out.push(itv),
        }
    }
    out
}

/// Convenience constructors for the common sign sets.
pub mod signs {
    use super::*;

    pub fn negatives() -> Interval {
        Interval::new(NegInf, ExtRational::from(-1), NumKind::Int).unwrap()
    }

    pub fn zero() -> Interval {
        Interval::of(0, 0, NumKind::Int)
    }

    pub fn positives() -> Interval {
        Interval::new(ExtRational::from(1), PosInf, NumKind::Int).unwrap()
    }
}
