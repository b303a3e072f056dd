//! Results and summary tables.

use gfk_core::chain::{CellSummary, KernelKind, TrialRecord};

use crate::error::{CliError, CliResult};
use crate::format::sig6;

pub const RESULTS_HEADER: [&str; 7] = [
    "trial",
    "seed",
    "kernel",
    "n_intermediates",
    "direct_acc",
    "chain_acc",
    "collapsed",
];

pub const SUMMARY_HEADER: [&str; 8] = [
    "kernel",
    "n_intermediates",
    "n_trials",
    "n_failed",
    "mean_direct_acc",
    "mean_chain_acc",
    "chain_beats_direct",
    "chain_at_least_direct",
];

const FAILED_MESSAGE: &str = "failed (see run log)";

fn to_string(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("write to memory");
    for row in rows {
        w.write_record(&row).expect("write to memory");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("utf-8 output")
}

/// One row per trial record. Failed trials keep their row with empty
/// accuracy fields.
pub fn results_csv(trials: &[TrialRecord]) -> String {
    to_string(
        &RESULTS_HEADER,
        trials.iter().map(|t| {
            let (direct, chain) = if t.failure.is_some() {
                (String::new(), String::new())
            } else {
                (sig6(t.direct_accuracy), sig6(t.chain_accuracy))
            };
            vec![
                t.trial.to_string(),
                t.seed.to_string(),
                t.kernel.to_string(),
                t.n_intermediates.to_string(),
                direct,
                chain,
                t.collapsed.to_string(),
            ]
        }),
    )
}

pub fn summary_csv(cells: &[CellSummary]) -> String {
    to_string(
        &SUMMARY_HEADER,
        cells.iter().map(|c| {
            vec![
                c.kernel.to_string(),
                c.n_intermediates.to_string(),
                c.n_trials.to_string(),
                c.n_failed.to_string(),
                sig6(c.mean_direct_accuracy),
                sig6(c.mean_chain_accuracy),
                sig6(c.chain_beats_direct),
                sig6(c.chain_at_least_direct),
            ]
        }),
    )
}

/// A parsed results or summary file.
#[derive(Debug, Clone, PartialEq)]
pub enum Table {
    Results(Vec<TrialRecord>),
    Summary(Vec<CellSummary>),
}

impl Table {
    /// Per-cell means; results are aggregated, summaries pass through.
    pub fn cells(&self) -> Vec<CellSummary> {
        match self {
            Table::Results(rows) => gfk_core::chain::aggregate(rows),
            Table::Summary(cells) => cells.clone(),
        }
    }

    pub fn is_empty(&self) -> bool {
        match self {
            Table::Results(rows) => rows.is_empty(),
            Table::Summary(cells) => cells.is_empty(),
        }
    }
}

fn field_err(line: u64, column: &str, value: &str, what: &str) -> CliError {
    CliError::usage(format!(
        "line {line}: column {column}: {what}, got {value:?}"
    ))
}

struct Row<'a> {
    record: &'a csv::StringRecord,
    header: &'a [&'a str],
    line: u64,
}

impl Row<'_> {
    fn raw(&self, i: usize) -> &str {
        self.record.get(i).unwrap_or("")
    }

    fn parse<T: std::str::FromStr>(&self, i: usize, what: &str) -> CliResult<T> {
        self.raw(i)
            .trim()
            .parse()
            .map_err(|_| field_err(self.line, self.header[i], self.raw(i), what))
    }

    fn kernel(&self, i: usize) -> CliResult<KernelKind> {
        self.raw(i)
            .trim()
            .parse()
            .map_err(|e: gfk_core::Error| CliError::usage(format!("line {}: {e}", self.line)))
    }

    fn fraction(&self, i: usize) -> CliResult<f64> {
        let v: f64 = self.parse(i, "expected a decimal")?;
        if !(0.0..=1.0).contains(&v) {
            return Err(field_err(
                self.line,
                self.header[i],
                self.raw(i),
                "expected a value in [0, 1]",
            ));
        }
        Ok(v)
    }

    fn optional_fraction(&self, i: usize) -> CliResult<Option<f64>> {
        if self.raw(i).trim().is_empty() {
            Ok(None)
        } else {
            self.fraction(i).map(Some)
        }
    }
}

/// Parses either table, chosen by its header. Errors carry 1-based line
/// numbers.
pub fn parse_table(text: &str) -> CliResult<Table> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| CliError::usage(format!("line 1: {e}")))?
        .clone();
    let names: Vec<&str> = header.iter().map(str::trim).collect();
    if names.is_empty() || names == [""] {
        return Err(CliError::usage("no rows"));
    }
    let is_results = names == RESULTS_HEADER;
    let is_summary = names == SUMMARY_HEADER;
    if !is_results && !is_summary {
        return Err(CliError::usage(format!(
            "line 1: unrecognized header, expected `{}` or `{}`",
            RESULTS_HEADER.join(","),
            SUMMARY_HEADER.join(",")
        )));
    }
    let schema: &[&str] = if is_results {
        &RESULTS_HEADER
    } else {
        &SUMMARY_HEADER
    };

    let mut trials = Vec::new();
    let mut cells = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            CliError::usage(format!("line {line}: {e}"))
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let row = Row {
            record: &record,
            header: schema,
            line,
        };
        if is_results {
            let direct = row.optional_fraction(4)?;
            let chain = row.optional_fraction(5)?;
            let failure = match (direct, chain) {
                (Some(_), Some(_)) => None,
                (None, None) => Some(FAILED_MESSAGE.to_string()),
                _ => {
                    return Err(CliError::usage(format!(
                        "line {line}: direct_acc and chain_acc must both be set or both be empty"
                    )))
                }
            };
            trials.push(TrialRecord {
                trial: row.parse(0, "expected a non-negative integer")?,
                seed: row.parse(1, "expected a non-negative integer")?,
                kernel: row.kernel(2)?,
                n_intermediates: row.parse(3, "expected a non-negative integer")?,
                direct_accuracy: direct.unwrap_or(0.0),
                chain_accuracy: chain.unwrap_or(0.0),
                collapsed: row.parse(6, "expected true or false")?,
                failure,
            });
        } else {
            cells.push(CellSummary {
                kernel: row.kernel(0)?,
                n_intermediates: row.parse(1, "expected a non-negative integer")?,
                n_trials: row.parse(2, "expected a non-negative integer")?,
                n_failed: row.parse(3, "expected a non-negative integer")?,
                mean_direct_accuracy: row.fraction(4)?,
                mean_chain_accuracy: row.fraction(5)?,
                chain_beats_direct: row.fraction(6)?,
                chain_at_least_direct: row.fraction(7)?,
            });
        }
    }
    let table = if is_results {
        Table::Results(trials)
    } else {
        Table::Summary(cells)
    };
    if table.is_empty() {
        return Err(CliError::usage("no rows"));
    }
    Ok(table)
}
