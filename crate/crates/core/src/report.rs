//! Report emission: a human-readable table and the CSV contract.
//!
//! Base CSV schema:
//! `event,lower_num,lower_den,upper_num,upper_den,lower_dec,upper_dec`.
//! Comparison mode appends `monniaux_upper_num,monniaux_upper_den,
//! monniaux_upper_dec`; oracle mode appends `oracle_estimate,
//! oracle_ci_low,oracle_ci_high,oracle_samples,oracle_diverged_fraction`.

use std::fmt::Write as _;

use num_traits::ToPrimitive;

use crate::forward::BoundsReport;
use crate::num::{format_rational, Rational};
use crate::oracle::OracleEstimate;

fn dec(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Optional extra columns keyed by event name; rows must align with the
/// report's events.
pub struct ReportExtras<'a> {
    pub comparison_upper: Option<&'a [(String, Rational)]>,
    pub oracle: Option<&'a [OracleEstimate]>,
}

impl ReportExtras<'_> {
    pub fn none() -> ReportExtras<'static> {
        ReportExtras { comparison_upper: None, oracle: None }
    }
}

/// Render the CSV report. Byte-identical for identical inputs.
pub fn csv_report(report: &BoundsReport, extras: &ReportExtras) -> String {
    let mut out = String::new();
    out.push_str("event,lower_num,lower_den,upper_num,upper_den,lower_dec,upper_dec");
    if extras.comparison_upper.is_some() {
        out.push_str(",monniaux_upper_num,monniaux_upper_den,monniaux_upper_dec");
    }
    if extras.oracle.is_some() {
        out.push_str(
            ",oracle_estimate,oracle_ci_low,oracle_ci_high,oracle_samples,oracle_diverged_fraction",
        );
    }
    out.push('\n');
    for (i, row) in report.rows.iter().enumerate() {
        write!(
            out,
            "{},{},{},{},{},{},{}",
            csv_escape(&row.event),
            row.lower.numer(),
            row.lower.denom(),
            row.upper.numer(),
            row.upper.denom(),
            dec(&row.lower),
            dec(&row.upper),
        )
        .unwrap();
        if let Some(cmp) = extras.comparison_upper {
            let (name, upper) = &cmp[i];
            debug_assert_eq!(name, &row.event);
            write!(out, ",{},{},{}", upper.numer(), upper.denom(), dec(upper)).unwrap();
        }
        if let Some(oracle) = extras.oracle {
            let est = &oracle[i];
            debug_assert_eq!(est.event, row.event);
            write!(
                out,
                ",{},{},{},{},{}",
                dec(&est.estimate),
                est.ci_low,
                est.ci_high,
                est.samples,
                est.diverged_fraction
            )
            .unwrap();
        }
        out.push('\n');
    }
    out
}

fn csv_escape(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Render the human-readable table.
pub fn human_table(report: &BoundsReport, extras: &ReportExtras) -> String {
    let mut out = String::new();
    let name_width = report
        .rows
        .iter()
        .map(|r| r.event.len())
        .chain(std::iter::once("event".len()))
        .max()
        .unwrap_or(5);
    let bound = |r: &Rational| format!("{} ({:.6})", format_rational(r), dec(r));
    writeln!(
        out,
        "{:<name_width$}  {:<22}  {:<22}{}",
        "event",
        "lower",
        "upper",
        if extras.comparison_upper.is_some() { "  monniaux_upper" } else { "" }
    )
    .unwrap();
    for (i, row) in report.rows.iter().enumerate() {
        write!(
            out,
            "{:<name_width$}  {:<22}  {:<22}",
            row.event,
            bound(&row.lower),
            bound(&row.upper)
        )
        .unwrap();
        if let Some(cmp) = extras.comparison_upper {
            write!(out, "  {}", bound(&cmp[i].1)).unwrap();
        }
        if let Some(oracle) = extras.oracle {
            let est = &oracle[i];
            write!(
                out,
                "  [oracle {:.6} in ({:.6}, {:.6}) @ {} samples]",
                dec(&est.estimate),
                est.ci_low,
                est.ci_high,
                est.samples
            )
            .unwrap();
        }
        out.push('\n');
    }
    writeln!(out, "cells: {}, provenance: {}", report.cells, report.provenance).unwrap();
    out
}
