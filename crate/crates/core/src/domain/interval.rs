//! Closed intervals with extended-rational endpoints, in an `int` and a
//! `real` flavour.
//!
//! The `int` flavour has integer (or infinite) endpoints and exact
//! closed-set semantics. The `real` flavour is interpreted modulo
//! null sets: a non-degenerate interval stands for its interior, while
//! a degenerate `[c,c]` is an atom that may carry point mass (constant
//! program results). This convention is what makes bound computations
//! over grids with shared cell faces come out exact — touching at a
//! single endpoint contributes no probability under the admissible
//! continuous measures.

use std::fmt;

use num_traits::One;
use thiserror::Error;

use crate::lang::NumKind;
use crate::num::{ExtRational, Finite, NegInf, PosInf, Rational};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum IntervalError {
    #[error("empty interval: lo {lo} exceeds hi {hi}")]
    Empty { lo: String, hi: String },
    #[error("interval [{0}, {0}] contains no real number")]
    InfinitePoint(String),
    #[error("int interval endpoint {0} is not an integer")]
    NonIntegerEndpoint(String),
}

/// A nonempty closed interval `[lo, hi]` of the given numeric kind.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Interval {
    lo: ExtRational,
    hi: ExtRational,
    kind: NumKind,
}

impl Interval {
    pub fn new(
        lo: impl Into<ExtRational>,
        hi: impl Into<ExtRational>,
        kind: NumKind,
    ) -> Result<Interval, IntervalError> {
        let (lo, hi) = (lo.into(), hi.into());
        if lo > hi {
            return Err(IntervalError::Empty { lo: lo.to_string(), hi: hi.to_string() });
        }
        if (lo == PosInf && hi == PosInf) || (lo == NegInf && hi == NegInf) {
            return Err(IntervalError::InfinitePoint(lo.to_string()));
        }
        if kind == NumKind::Int {
            for end in [&lo, &hi] {
                if !end.is_integer() {
                    return Err(IntervalError::NonIntegerEndpoint(end.to_string()));
                }
            }
        }
        Ok(Interval { lo, hi, kind })
    }

    /// `[lo, hi]` from machine integers; panics on invalid input.
    pub fn of(lo: i64, hi: i64, kind: NumKind) -> Interval {
        Interval::new(ExtRational::from(lo), ExtRational::from(hi), kind).unwrap()
    }

    pub fn point(value: Rational, kind: NumKind) -> Interval {
        Interval::new(value.clone(), value, kind).expect("point interval")
    }

    pub fn unbounded(kind: NumKind) -> Interval {
        Interval { lo: NegInf, hi: PosInf, kind }
    }

    /// `[-inf, hi]`.
    pub fn at_most(hi: impl Into<ExtRational>, kind: NumKind) -> Result<Interval, IntervalError> {
        Interval::new(NegInf, hi, kind)
    }

    /// `[lo, +inf]`.
    pub fn at_least(lo: impl Into<ExtRational>, kind: NumKind) -> Result<Interval, IntervalError> {
        Interval::new(lo, PosInf, kind)
    }

    pub fn lo(&self) -> &ExtRational {
        &self.lo
    }

    pub fn hi(&self) -> &ExtRational {
        &self.hi
    }

    pub fn kind(&self) -> NumKind {
        self.kind
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn is_finite(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn contains(&self, value: &Rational) -> bool {
        let v = Finite(value.clone());
        self.lo <= v && v <= self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    /// Exact closed intersection; `None` when empty.
    pub fn meet(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.clone().max(other.lo.clone());
        let hi = self.hi.clone().min(other.hi.clone());
        Interval::new(lo, hi, self.kind.join(other.kind)).ok()
    }

    /// Smallest interval containing both (the interval join).
    pub fn hull(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.clone().min(other.lo.clone()),
            hi: self.hi.clone().max(other.hi.clone()),
            kind: self.kind.join(other.kind),
        }
    }

    /// Standard widening: endpoints that moved outward go to infinity.
    pub fn widen(&self, newer: &Interval) -> Interval {
        Interval {
            lo: if newer.lo < self.lo { NegInf } else { self.lo.clone() },
            hi: if newer.hi > self.hi { PosInf } else { self.hi.clone() },
            kind: self.kind.join(newer.kind),
        }
    }

    /// Whether `self` and `other` intersect in a set of positive measure
    /// (real kind) or share any point at all (int kind, or when either
    /// side is a degenerate atom).
    pub fn overlaps(&self, other: &Interval) -> bool {
        let lo = self.lo.clone().max(other.lo.clone());
        let hi = self.hi.clone().min(other.hi.clone());
        if lo > hi {
            return false;
        }
        if lo < hi {
            return true;
        }
        // Exactly one shared point.
        match self.kind.join(other.kind) {
            NumKind::Int => true,
            NumKind::Real => self.is_point() || other.is_point(),
        }
    }

    /// Whether the two intervals are adjacent or overlapping, i.e. their
    /// union is again an interval (used by normalization).
    pub fn touches(&self, other: &Interval) -> bool {
        let kind = self.kind.join(other.kind);
        let lo = self.lo.clone().max(other.lo.clone());
        let hi = self.hi.clone().min(other.hi.clone());
        if lo <= hi {
            return true;
        }
        if kind == NumKind::Int {
            // [a,b] and [b+1,c] cover a contiguous integer range.
            if let (Finite(a), Finite(b)) = (&hi, &lo) {
                return a + Rational::one() == *b;
            }
        }
        false
    }

    pub fn add(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.clone() + other.lo.clone(),
            hi: self.hi.clone() + other.hi.clone(),
            kind: self.kind.join(other.kind),
        }
    }

    pub fn sub(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.clone() - other.hi.clone(),
            hi: self.hi.clone() - other.lo.clone(),
            kind: self.kind.join(other.kind),
        }
    }

    pub fn neg(&self) -> Interval {
        Interval { lo: -self.hi.clone(), hi: -self.lo.clone(), kind: self.kind }
    }

    pub fn mul(&self, other: &Interval) -> Interval {
        let candidates = [
            self.lo.clone() * other.lo.clone(),
            self.lo.clone() * other.hi.clone(),
            self.hi.clone() * other.lo.clone(),
            self.hi.clone() * other.hi.clone(),
        ];
        let lo = candidates.iter().cloned().reduce(ExtRational::min).unwrap();
        let hi = candidates.into_iter().reduce(ExtRational::max).unwrap();
        Interval { lo, hi, kind: self.kind.join(other.kind) }
    }

    /// Outward rounding onto the sign sub-lattice with endpoints in
    /// `{-inf, -1, 0, 1, +inf}`.
    pub fn snap_to_signs(&self) -> Interval {
        let one = Rational::one();
        let lo = match &self.lo {
            Finite(r) if *r >= one => Finite(one.clone()),
            Finite(r) if *r >= Rational::from_integer(0.into()) => {
                Finite(Rational::from_integer(0.into()))
            }
            Finite(r) if *r >= -one.clone() => Finite(-one.clone()),
            _ => NegInf,
        };
        let hi = match &self.hi {
            Finite(r) if *r <= -one.clone() => Finite(-one.clone()),
            Finite(r) if *r <= Rational::from_integer(0.into()) => {
                Finite(Rational::from_integer(0.into()))
            }
            Finite(r) if *r <= one => Finite(one),
            _ => PosInf,
        };
        Interval { lo, hi, kind: self.kind }
    }

    /// Split a finite interval into `n` equal-width pieces (grid cells).
    pub fn split_even(&self, n: u32) -> Vec<Interval> {
        assert!(n >= 1);
        assert!(self.is_finite(), "cannot split an unbounded interval evenly");
        let lo = self.lo.finite().unwrap().clone();
        let hi = self.hi.finite().unwrap().clone();
        let width = (&hi - &lo) / Rational::from_integer(n.into());
        (0..n)
            .map(|i| {
                let a = &lo + &width * Rational::from_integer(i.into());
                let b = &lo + &width * Rational::from_integer((i + 1).into());
                Interval { lo: Finite(a), hi: Finite(b), kind: self.kind }
            })
            .collect()
    }

    /// Number of integers in an int-kind interval, if finite.
    pub fn int_count(&self) -> Option<Rational> {
        debug_assert_eq!(self.kind, NumKind::Int);
        match (&self.lo, &self.hi) {
            (Finite(a), Finite(b)) => Some(b - a + Rational::one()),
            _ => None,
        }
    }

    /// Parse `[lo,hi]` with endpoints `-inf`, `7/10`, `3`, or decimals.
    pub fn parse(s: &str, kind: NumKind) -> Result<Interval, String> {
        let s = s.trim();
        let inner = s
            .strip_prefix('[')
            .and_then(|s| s.strip_suffix(']'))
            .ok_or_else(|| format!("expected `[lo,hi]`, got `{s}`"))?;
        let (lo, hi) = inner
            .split_once(',')
            .ok_or_else(|| format!("expected two endpoints in `{s}`"))?;
        let lo = ExtRational::parse(lo).map_err(|e| e.to_string())?;
        let hi = ExtRational::parse(hi).map_err(|e| e.to_string())?;
        Interval::new(lo, hi, kind).map_err(|e| e.to_string())
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", self.lo, self.hi)
    }
}

/// Integer floor of a rational, as a rational.
pub fn floor_rat(r: &Rational) -> Rational {
    Rational::from_integer(r.floor().to_integer())
}

/// Integer ceiling of a rational, as a rational.
pub fn ceil_rat(r: &Rational) -> Rational {
    Rational::from_integer(r.ceil().to_integer())
}

/// Largest integer strictly below `r`.
pub fn int_below(r: &Rational) -> Rational {
    if r.is_integer() {
        r - Rational::one()
    } else {
        floor_rat(r)
    }
}

/// Smallest integer strictly above `r`.
pub fn int_above(r: &Rational) -> Rational {
    if r.is_integer() {
        r + Rational::one()
    } else {
        ceil_rat(r)
    }
}
