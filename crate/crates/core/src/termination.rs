//! Per-cell termination facts as a second black-box analysis.
//!
//! A cell marked `terminates` contributes the full value domain without
//! the divergence atom; an `unknown` cell keeps it. Combining the
//! resulting table with any forward table strips the divergence atom
//! exactly on the proven cells and changes nothing else.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::domain::AbstractOutput;
use crate::forward::{ImageTable, Provenance, TableError};
use crate::lang::Program;
use crate::partition::InputPartition;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TermVerdict {
    Terminates,
    Unknown,
}

/// Cell-indexed termination verdicts with a default for unlisted cells.
#[derive(Debug, Clone, PartialEq)]
pub struct TerminationFacts {
    default: TermVerdict,
    cells: BTreeMap<usize, TermVerdict>,
}

impl TerminationFacts {
    pub fn new(default: TermVerdict, cells: BTreeMap<usize, TermVerdict>) -> TerminationFacts {
        TerminationFacts { default, cells }
    }

    pub fn all_unknown() -> TerminationFacts {
        TerminationFacts { default: TermVerdict::Unknown, cells: BTreeMap::new() }
    }

    pub fn all_terminate() -> TerminationFacts {
        TerminationFacts { default: TermVerdict::Terminates, cells: BTreeMap::new() }
    }

    /// Facts from the built-in syntactic check: one verdict for every
    /// cell of any partition.
    pub fn from_syntactic(p: &Program) -> TerminationFacts {
        match syntactic_check(p) {
            TermVerdict::Terminates => TerminationFacts::all_terminate(),
            TermVerdict::Unknown => TerminationFacts::all_unknown(),
        }
    }

    pub fn verdict(&self, cell: usize) -> TermVerdict {
        self.cells.get(&cell).copied().unwrap_or(self.default)
    }
}

/// A termination check that proves termination exactly for loop-free
/// programs and reports `Unknown` otherwise.
pub fn syntactic_check(p: &Program) -> TermVerdict {
    if p.has_loop() {
        TermVerdict::Unknown
    } else {
        TermVerdict::Terminates
    }
}

/// Turn facts into an image table: `value_domain` for proven cells,
/// `value_domain` plus the divergence atom for unknown cells.
pub fn facts_to_table(
    facts: &TerminationFacts,
    partition: Arc<InputPartition>,
    value_domain: &AbstractOutput,
) -> Result<ImageTable, TableError> {
    let entries = (0..partition.len())
        .map(|i| match facts.verdict(i) {
            TermVerdict::Terminates => value_domain.with_divergence(false),
            TermVerdict::Unknown => value_domain.with_divergence(true),
        })
        .collect();
    ImageTable::from_entries(partition, entries, Provenance::External)
}
