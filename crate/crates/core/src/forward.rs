//! Upper and lower probability bounds for output events from a per-cell
//! image table over a weighted partition.
//!
//! For a table `img` over partition `T` and an output event `A`:
//! the upper bound sums the weights of cells whose image overlaps `A`,
//! the lower bound sums the weights of cells whose image is contained
//! in `A`. Tables from independent analyses combine by per-cell
//! intersection, which tightens both bounds.

use std::collections::BTreeSet;
use std::fmt;
use std::io::{BufRead, Write};
use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::domain::{interval_analyze, sign_analyze, AbstractOutput};
use crate::lang::{NumKind, Program};
use crate::num::Rational;
use crate::partition::{InputPartition, PartitionMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnalysisDomain {
    Interval,
    Sign,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    BuiltinInterval,
    BuiltinSign,
    External,
    Combined,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Provenance::BuiltinInterval => "built-in-interval",
            Provenance::BuiltinSign => "built-in-sign",
            Provenance::External => "external",
            Provenance::Combined => "combined",
        };
        write!(f, "{s}")
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum TableError {
    #[error("sign analysis needs a discrete-int partition and an int program")]
    DomainMismatch,
    #[error("tables are over different partitions")]
    PartitionMismatch,
    #[error("table row {0}: {1}")]
    Row(usize, String),
    #[error("duplicate entry for cell {0}")]
    DuplicateCell(usize),
    #[error("missing entry for cell {0}")]
    MissingCell(usize),
    #[error("cell {0} has an empty image; images of total programs are never empty")]
    EmptyCell(usize),
    #[error("cell index {index} out of range for a {cells}-cell partition")]
    CellOutOfRange { index: usize, cells: usize },
    #[error("duplicate event name `{0}`")]
    DuplicateEvent(String),
}

/// A named output event: a union of intervals plus the divergence atom.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputEvent {
    pub name: String,
    pub shape: AbstractOutput,
}

impl OutputEvent {
    pub fn new(name: impl Into<String>, shape: AbstractOutput) -> OutputEvent {
        OutputEvent { name: name.into(), shape }
    }
}

/// The image over-approximation of one analysis, restricted to a
/// partition: one normalized `AbstractOutput` per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageTable {
    partition: Arc<InputPartition>,
    entries: Vec<AbstractOutput>,
    provenance: Provenance,
}

impl ImageTable {
    /// Run the chosen built-in analysis on every cell box.
    pub fn build(
        program: &Program,
        partition: Arc<InputPartition>,
        domain: AnalysisDomain,
    ) -> Result<ImageTable, TableError> {
        let provenance = match domain {
            AnalysisDomain::Interval => Provenance::BuiltinInterval,
            AnalysisDomain::Sign => {
                if partition.mode() != PartitionMode::DiscreteInt
                    || program.numeric_kind() != NumKind::Int
                {
                    return Err(TableError::DomainMismatch);
                }
                Provenance::BuiltinSign
            }
        };
        let entries: Vec<AbstractOutput> = partition
            .cells()
            .par_iter()
            .map(|cell| match domain {
                AnalysisDomain::Interval => interval_analyze(program, &cell.region),
                AnalysisDomain::Sign => {
                    let input = cell
                        .region
                        .iter()
                        .map(|(name, itv)| {
                            (
                                name.clone(),
                                AbstractOutput::new(NumKind::Int, vec![itv.clone()], false),
                            )
                        })
                        .collect();
                    sign_analyze(program, &input)
                }
            })
            .collect();
        Ok(ImageTable { partition, entries, provenance })
    }

    /// Construct from explicit per-cell entries (used by the termination
    /// facts conversion and by tests).
    pub fn from_entries(
        partition: Arc<InputPartition>,
        entries: Vec<AbstractOutput>,
        provenance: Provenance,
    ) -> Result<ImageTable, TableError> {
        if entries.len() != partition.len() {
            return Err(TableError::MissingCell(entries.len()));
        }
        if let Some(i) = entries.iter().position(|e| e.is_empty()) {
            return Err(TableError::EmptyCell(i));
        }
        Ok(ImageTable { partition, entries, provenance })
    }

    /// Load an external table: one `cell_index ; intervals ; bottom`
    /// row per cell, intervals written `[lo,hi]|[lo,hi]|...`.
    pub fn load(
        partition: Arc<InputPartition>,
        reader: impl BufRead,
    ) -> Result<ImageTable, TableError> {
        let kind = partition.mode().kind();
        let mut entries: Vec<Option<AbstractOutput>> = vec![None; partition.len()];
        for (lineno, line) in reader.lines().enumerate() {
            let rowno = lineno + 1;
            let line = line.map_err(|e| TableError::Row(rowno, e.to_string()))?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split(';').map(str::trim).collect();
            if fields.len() != 3 {
                return Err(TableError::Row(
                    rowno,
                    format!("expected `cell ; intervals ; bottom`, got `{line}`"),
                ));
            }
            let index: usize = fields[0]
                .parse()
                .map_err(|_| TableError::Row(rowno, format!("bad cell index `{}`", fields[0])))?;
            if index >= partition.len() {
                return Err(TableError::CellOutOfRange { index, cells: partition.len() });
            }
            let bottom = match fields[2] {
                "true" | "1" => true,
                "false" | "0" => false,
                other => {
                    return Err(TableError::Row(rowno, format!("bad bottom flag `{other}`")))
                }
            };
            let output = AbstractOutput::parse_numeric(fields[1], kind, bottom)
                .map_err(|e| TableError::Row(rowno, e))?;
            if entries[index].is_some() {
                return Err(TableError::DuplicateCell(index));
            }
            entries[index] = Some(output);
        }
        let entries = entries
            .into_iter()
            .enumerate()
            .map(|(i, e)| match e {
                Some(e) if e.is_empty() => Err(TableError::EmptyCell(i)),
                Some(e) => Ok(e),
                None => Err(TableError::MissingCell(i)),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ImageTable { partition, entries, provenance: Provenance::External })
    }

    /// Write the external-table format.
    pub fn write_to(&self, mut w: impl Write) -> std::io::Result<()> {
        for (i, entry) in self.entries.iter().enumerate() {
            writeln!(w, "{i} ; {} ; {}", entry.format_numeric(), entry.may_diverge())?;
        }
        Ok(())
    }

    pub fn partition(&self) -> &Arc<InputPartition> {
        &self.partition
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn entry(&self, cell: usize) -> &AbstractOutput {
        &self.entries[cell]
    }

    pub fn entries(&self) -> &[AbstractOutput] {
        &self.entries
    }

    /// Per-cell intersection of two tables over the same partition.
    pub fn combine(&self, other: &ImageTable) -> Result<ImageTable, TableError> {
        if !Arc::ptr_eq(&self.partition, &other.partition)
            && self.partition != other.partition
        {
            return Err(TableError::PartitionMismatch);
        }
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.intersect(b))
            .collect();
        Ok(ImageTable {
            partition: Arc::clone(&self.partition),
            entries,
            provenance: Provenance::Combined,
        })
    }

    /// The same table with the divergence atom added to every cell, as a
    /// partial-correctness analysis that proves nothing about
    /// termination would report it.
    pub fn assuming_divergence(&self) -> ImageTable {
        ImageTable {
            partition: Arc::clone(&self.partition),
            entries: self.entries.iter().map(|e| e.with_divergence(true)).collect(),
            provenance: self.provenance,
        }
    }

    /// Indices of the cells whose image overlaps the event — the
    /// partition-indexed preimage over-approximation of the event.
    pub fn preimage_cells(&self, event: &OutputEvent) -> Vec<usize> {
        self.entries
            .iter()
            .enumerate()
            .filter(|(_, entry)| entry.overlaps(&event.shape))
            .map(|(i, _)| i)
            .collect()
    }

    /// Sum of weights of cells whose image overlaps the event.
    pub fn upper_bound(&self, event: &OutputEvent) -> Rational {
        self.entries
            .iter()
            .zip(self.partition.cells())
            .filter(|(entry, _)| entry.overlaps(&event.shape))
            .map(|(_, cell)| cell.weight.clone())
            .sum()
    }

    /// Sum of weights of cells whose image is contained in the event.
    pub fn lower_bound(&self, event: &OutputEvent) -> Rational {
        self.entries
            .iter()
            .zip(self.partition.cells())
            .filter(|(entry, _)| entry.subset_of(&event.shape))
            .map(|(_, cell)| cell.weight.clone())
            .sum()
    }

    /// Per-event (lower, upper) pairs in the order given.
    pub fn bounds_report(&self, events: &[OutputEvent]) -> Result<BoundsReport, TableError> {
        let mut seen = BTreeSet::new();
        for e in events {
            if !seen.insert(e.name.as_str()) {
                return Err(TableError::DuplicateEvent(e.name.clone()));
            }
        }
        let rows = events
            .par_iter()
            .map(|event| ReportRow {
                event: event.name.clone(),
                lower: self.lower_bound(event),
                upper: self.upper_bound(event),
            })
            .collect();
        Ok(BoundsReport {
            rows,
            cells: self.partition.len(),
            provenance: self.provenance,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub event: String,
    pub lower: Rational,
    pub upper: Rational,
}

/// Exact per-event bounds plus provenance metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundsReport {
    pub rows: Vec<ReportRow>,
    pub cells: usize,
    pub provenance: Provenance,
}

impl BoundsReport {
    pub fn row(&self, event: &str) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.event == event)
    }
}

/// Fold `combine` over several tables.
pub fn combine_all(tables: &[ImageTable]) -> Result<ImageTable, TableError> {
    let (first, rest) = tables.split_first().ok_or(TableError::MissingCell(0))?;
    let mut acc = first.clone();
    for t in rest {
        acc = acc.combine(t)?;
    }
    Ok(acc)
}
