//! Margin reports shared by every verifier, and their JSON/CSV encodings.

use std::collections::BTreeMap;
use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::scan::Worst;

/// How a report's margin is judged.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    /// The inequality is a theorem; a margin below `-tolerance` is a failure.
    Asserted,
    /// Evaluated for information; not a proved statement.
    Unproven,
    /// Statistics only (for example counterexample frequencies).
    Recorded,
    /// Preconditions not met for this instance.
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarginReport {
    pub inequality_id: String,
    /// Human-readable form of the checked statement.
    pub statement: String,
    pub trials: u64,
    pub worst_margin: f64,
    /// Flattened input attaining `worst_margin`; the layout is verifier-specific.
    pub worst_input: Vec<f64>,
    /// Wall-clock seconds. Excluded from deterministic report files.
    pub elapsed: f64,
    pub tolerance: f64,
    /// Where the tolerance comes from.
    pub tolerance_source: String,
    pub status: Status,
    /// Strict inequality: an asserted report passes only with a positive margin.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub strict: bool,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub stats: BTreeMap<String, f64>,
}

impl MarginReport {
    pub fn new(id: impl Into<String>, statement: impl Into<String>) -> Self {
        MarginReport {
            inequality_id: id.into(),
            statement: statement.into(),
            trials: 0,
            worst_margin: f64::INFINITY,
            worst_input: Vec::new(),
            elapsed: 0.0,
            tolerance: 0.0,
            tolerance_source: String::new(),
            status: Status::Asserted,
            strict: false,
            stats: BTreeMap::new(),
        }
    }

    pub fn with_worst(mut self, worst: Worst) -> Self {
        self.trials = worst.trials;
        self.worst_margin = worst.margin;
        self.worst_input = worst.input;
        self
    }

    pub fn tolerance(mut self, tol: f64, source: impl Into<String>) -> Self {
        self.tolerance = tol;
        self.tolerance_source = source.into();
        self
    }

    pub fn status(mut self, status: Status) -> Self {
        self.status = status;
        self
    }

    pub fn strict(mut self) -> Self {
        self.strict = true;
        self
    }

    pub fn stat(mut self, key: &str, value: f64) -> Self {
        self.stats.insert(key.to_string(), value);
        self
    }

    pub fn timed(mut self, start: Instant) -> Self {
        self.elapsed = start.elapsed().as_secs_f64();
        self
    }

    /// True unless the report is asserted and its margin falls below
    /// `-tolerance`, or is not positive for a strict report (a NaN margin
    /// counts as a violation).
    pub fn passed(&self) -> bool {
        match self.status {
            Status::Asserted if self.strict => self.worst_margin > 0.0,
            Status::Asserted => self.worst_margin >= -self.tolerance,
            _ => true,
        }
    }

    /// The report with the wall-clock field zeroed, for byte-stable output.
    pub fn deterministic(&self) -> Self {
        let mut r = self.clone();
        r.elapsed = 0.0;
        r
    }
}

/// Fixed CSV columns of a margin table.
pub const CSV_COLUMNS: [&str; 8] = [
    "inequality_id",
    "trials",
    "worst_margin",
    "worst_input",
    "elapsed",
    "status",
    "tolerance",
    "statement",
];

pub fn write_csv<W: Write>(reports: &[MarginReport], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for r in reports {
        let input = r
            .worst_input
            .iter()
            .map(|v| format!("{v:e}"))
            .collect::<Vec<_>>()
            .join(" ");
        let status = match r.status {
            Status::Asserted => "asserted",
            Status::Unproven => "unproven",
            Status::Recorded => "recorded",
            Status::Skipped => "skipped",
        };
        w.write_record([
            r.inequality_id.clone(),
            r.trials.to_string(),
            format!("{:e}", r.worst_margin),
            input,
            format!("{:.6}", r.elapsed),
            status.to_string(),
            format!("{:e} ({})", r.tolerance, r.tolerance_source),
            r.statement.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
