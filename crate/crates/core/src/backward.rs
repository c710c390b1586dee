//! Probability bounds from a backward (preimage over-approximating)
//! analysis on a finite measurable space.
//!
//! Measurable sets are exactly unions of the generating partition
//! blocks, so the least measurable superset of any point set exists:
//! `lift` unions the blocks it meets. The upper bound of an event is
//! `measure(lift(pre(A)))`; the lower bound is the measure of the dual
//! preimage `complement(lift(pre(complement(A))))`, which for total
//! programs under-approximates the true preimage.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::One;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::num::{format_rational, parse_rational, Rational};

/// At most this many points or output atoms per instance; sets are u64
/// bitmasks.
pub const MAX_POINTS: usize = 64;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum BackwardError {
    #[error("instance has {0} points; at most {MAX_POINTS} are supported")]
    TooManyPoints(usize),
    #[error("unknown point `{0}`")]
    UnknownPoint(String),
    #[error("unknown output atom `{0}`")]
    UnknownAtom(String),
    #[error("blocks do not partition the points: {0}")]
    BadBlocks(String),
    #[error("block weights sum to {0}, expected 1")]
    WeightSum(String),
    #[error("expected {blocks} block weights, got {weights}")]
    WeightCount { blocks: usize, weights: usize },
    #[error("preimage table does not cover atom `{0}`")]
    MissingAtom(String),
    #[error("preimage tables are over different output atoms")]
    AtomMismatch,
    #[error(
        "preimage table is not an over-approximation: concrete preimage of `{atom}` \
         contains point `{point}` but the table does not"
    )]
    NotOverApproximating { atom: String, point: String },
    #[error("invalid rational `{0}`")]
    BadNumber(String),
}

/// Subset of the sample-space points, as a bitmask.
pub type PointSet = u64;

/// Subset of the output atoms, as a bitmask.
pub type AtomSet = u64;

/// A finite probability space whose measurable sets are the unions of
/// the given blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMeasurableSpace {
    points: Vec<String>,
    blocks: Vec<PointSet>,
    weights: Vec<Rational>,
}

impl FiniteMeasurableSpace {
    pub fn new(
        points: Vec<String>,
        blocks: Vec<PointSet>,
        weights: Vec<Rational>,
    ) -> Result<FiniteMeasurableSpace, BackwardError> {
        if points.len() > MAX_POINTS {
            return Err(BackwardError::TooManyPoints(points.len()));
        }
        if weights.len() != blocks.len() {
            return Err(BackwardError::WeightCount {
                blocks: blocks.len(),
                weights: weights.len(),
            });
        }
        let full: PointSet = full_mask(points.len());
        let mut seen: PointSet = 0;
        for b in &blocks {
            if *b == 0 {
                return Err(BackwardError::BadBlocks("empty block".into()));
            }
            if b & seen != 0 {
                return Err(BackwardError::BadBlocks("blocks overlap".into()));
            }
            seen |= b;
        }
        if seen != full {
            return Err(BackwardError::BadBlocks("blocks do not cover all points".into()));
        }
        let sum: Rational = weights.iter().cloned().sum();
        if !sum.is_one() {
            return Err(BackwardError::WeightSum(format_rational(&sum)));
        }
        Ok(FiniteMeasurableSpace { points, blocks, weights })
    }

    pub fn points(&self) -> &[String] {
        &self.points
    }

    pub fn blocks(&self) -> &[PointSet] {
        &self.blocks
    }

    pub fn full(&self) -> PointSet {
        full_mask(self.points.len())
    }

    pub fn point_index(&self, name: &str) -> Result<usize, BackwardError> {
        self.points
            .iter()
            .position(|p| p == name)
            .ok_or_else(|| BackwardError::UnknownPoint(name.to_string()))
    }

    /// Least measurable superset: the union of all blocks meeting `s`.
    /// Monotone and idempotent, and `s` is always contained in it.
    pub fn lift(&self, s: PointSet) -> PointSet {
        self.blocks
            .iter()
            .filter(|b| *b & s != 0)
            .fold(0, |acc, b| acc | b)
    }

    /// Measure of a block union (sums the weights of contained blocks).
    pub fn measure(&self, s: PointSet) -> Rational {
        debug_assert_eq!(self.lift(s), s, "measure of a non-measurable set");
        self.blocks
            .iter()
            .zip(&self.weights)
            .filter(|(b, _)| *b & s != 0)
            .map(|(_, w)| w.clone())
            .sum()
    }
}

/// A preimage over-approximation, given on singleton output atoms and
/// extended to arbitrary events by union.
#[derive(Debug, Clone, PartialEq)]
pub struct PreimageTable {
    atoms: Vec<String>,
    singleton_pre: Vec<PointSet>,
}

impl PreimageTable {
    pub fn new(atoms: Vec<String>, singleton_pre: Vec<PointSet>) -> Result<Self, BackwardError> {
        if atoms.len() > MAX_POINTS {
            return Err(BackwardError::TooManyPoints(atoms.len()));
        }
        if singleton_pre.len() != atoms.len() {
            return Err(BackwardError::MissingAtom(
                atoms.get(singleton_pre.len()).cloned().unwrap_or_default(),
            ));
        }
        Ok(PreimageTable { atoms, singleton_pre })
    }

    pub fn atoms(&self) -> &[String] {
        &self.atoms
    }

    pub fn atom_index(&self, name: &str) -> Result<usize, BackwardError> {
        self.atoms
            .iter()
            .position(|a| a == name)
            .ok_or_else(|| BackwardError::UnknownAtom(name.to_string()))
    }

    pub fn event_from_names(&self, names: &[String]) -> Result<AtomSet, BackwardError> {
        let mut mask: AtomSet = 0;
        for n in names {
            mask |= 1 << self.atom_index(n)?;
        }
        Ok(mask)
    }

    pub fn event_name(&self, event: AtomSet) -> String {
        let names: Vec<&str> = self
            .atoms
            .iter()
            .enumerate()
            .filter(|(i, _)| event & (1 << i) != 0)
            .map(|(_, a)| a.as_str())
            .collect();
        format!("{{{}}}", names.join(","))
    }

    pub fn full_event(&self) -> AtomSet {
        full_mask(self.atoms.len())
    }

    /// Union extension of the singleton table.
    pub fn pre(&self, event: AtomSet) -> PointSet {
        self.singleton_pre
            .iter()
            .enumerate()
            .filter(|(i, _)| event & (1 << i) != 0)
            .fold(0, |acc, (_, s)| acc | s)
    }

    /// Pointwise intersection on the singleton representation; both
    /// inputs over-approximate the same program, so the result does too
    /// and is at least as tight as either.
    pub fn combine(&self, other: &PreimageTable) -> Result<PreimageTable, BackwardError> {
        if self.atoms != other.atoms {
            return Err(BackwardError::AtomMismatch);
        }
        Ok(PreimageTable {
            atoms: self.atoms.clone(),
            singleton_pre: self
                .singleton_pre
                .iter()
                .zip(&other.singleton_pre)
                .map(|(a, b)| a & b)
                .collect(),
        })
    }

    /// Check the over-approximation requirement against a concrete total
    /// function (atom index per point). Failure is a hard error: every
    /// soundness statement is conditional on it.
    pub fn validate_against(
        &self,
        space: &FiniteMeasurableSpace,
        concrete: &[usize],
    ) -> Result<(), BackwardError> {
        assert_eq!(concrete.len(), space.points().len());
        for (point, &atom) in concrete.iter().enumerate() {
            if self.singleton_pre[atom] & (1 << point) == 0 {
                return Err(BackwardError::NotOverApproximating {
                    atom: self.atoms[atom].clone(),
                    point: space.points()[point].clone(),
                });
            }
        }
        Ok(())
    }
}

fn full_mask(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Upper probability bound: measure of the lifted preimage.
pub fn upper_bound(
    space: &FiniteMeasurableSpace,
    pre: &PreimageTable,
    event: AtomSet,
) -> Rational {
    space.measure(space.lift(pre.pre(event)))
}

/// The dual preimage: complement of the lifted preimage of the
/// complement event. Measurable by construction, and contained in the
/// true preimage for total programs.
pub fn dual_preimage(
    space: &FiniteMeasurableSpace,
    pre: &PreimageTable,
    event: AtomSet,
) -> PointSet {
    let co_event = pre.full_event() & !event;
    space.full() & !space.lift(pre.pre(co_event))
}

/// Lower probability bound: measure of the dual preimage. Satisfies
/// `lower(A) = 1 - upper(complement A)` exactly.
pub fn lower_bound(
    space: &FiniteMeasurableSpace,
    pre: &PreimageTable,
    event: AtomSet,
) -> Rational {
    space.measure(dual_preimage(space, pre, event))
}

/// JSON instance file for the backward pipeline.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BackwardInstance {
    pub points: Vec<String>,
    pub blocks: Vec<Vec<String>>,
    /// One exact rational weight per block, e.g. `"1/2"`.
    pub weights: Vec<String>,
    pub output_atoms: Vec<String>,
    /// Atom name -> points in its over-approximated preimage.
    pub pre_sharp: BTreeMap<String, Vec<String>>,
    /// Optional concrete function (point -> atom) for validation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub concrete: Option<BTreeMap<String, String>>,
    /// Events to report; all subsets of the atoms when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub events: Option<Vec<Vec<String>>>,
}

/// A loaded and validated backward instance.
#[derive(Debug)]
pub struct BackwardProblem {
    pub space: FiniteMeasurableSpace,
    pub pre: PreimageTable,
    pub events: Vec<(String, AtomSet)>,
}

impl BackwardInstance {
    pub fn into_problem(self) -> Result<BackwardProblem, BackwardError> {
        let points = self.points;
        if points.len() > MAX_POINTS {
            return Err(BackwardError::TooManyPoints(points.len()));
        }
        let index_of = |name: &str| -> Result<usize, BackwardError> {
            points
                .iter()
                .position(|p| p == name)
                .ok_or_else(|| BackwardError::UnknownPoint(name.to_string()))
        };
        let mut blocks = Vec::new();
        for block in &self.blocks {
            let mut mask: PointSet = 0;
            for p in block {
                mask |= 1 << index_of(p)?;
            }
            blocks.push(mask);
        }
        let weights = self
            .weights
            .iter()
            .map(|w| parse_rational(w).map_err(|_| BackwardError::BadNumber(w.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        let space = FiniteMeasurableSpace::new(points, blocks, weights)?;

        let atoms = self.output_atoms;
        let mut singleton_pre = Vec::with_capacity(atoms.len());
        for atom in &atoms {
            let point_names = self
                .pre_sharp
                .get(atom)
                .ok_or_else(|| BackwardError::MissingAtom(atom.clone()))?;
            let mut mask: PointSet = 0;
            for p in point_names {
                mask |= 1 << space.point_index(p)?;
            }
            singleton_pre.push(mask);
        }
        let pre = PreimageTable::new(atoms, singleton_pre)?;

        if let Some(concrete) = &self.concrete {
            let mut function = vec![usize::MAX; space.points().len()];
            for (point, atom) in concrete {
                function[space.point_index(point)?] = pre.atom_index(atom)?;
            }
            if let Some(missing) = function.iter().position(|&a| a == usize::MAX) {
                return Err(BackwardError::UnknownPoint(format!(
                    "concrete function is not total: `{}` has no image",
                    space.points()[missing]
                )));
            }
            pre.validate_against(&space, &function)?;
        }

        let events = match self.events {
            Some(lists) => lists
                .into_iter()
                .map(|names| {
                    let mask = pre.event_from_names(&names)?;
                    Ok((pre.event_name(mask), mask))
                })
                .collect::<Result<Vec<_>, BackwardError>>()?,
            None => {
                let n = pre.atoms().len();
                assert!(n <= 16, "refusing to enumerate 2^{n} events");
                (0..(1u64 << n)).map(|mask| (pre.event_name(mask), mask)).collect()
            }
        };

        Ok(BackwardProblem { space, pre, events })
    }
}

impl fmt::Display for FiniteMeasurableSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} points, {} blocks", self.points.len(), self.blocks.len())
    }
}
