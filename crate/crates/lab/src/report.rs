use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use hardy_core::inequality::{agrees, holds};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::search::SearchOutcome;
use crate::LabError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckKind {
    Identity,
    Inequality,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sample: Option<u64>,
    pub kind: CheckKind,
    pub lhs: f64,
    pub rhs: f64,
    /// Relative residual for identities, `rhs - lhs` for inequalities.
    pub residual: f64,
    pub pass: bool,
}

impl CheckRecord {
    /// An identity check with a precomputed relative residual.
    pub fn identity(
        id: impl Into<String>,
        sample: Option<u64>,
        lhs: f64,
        rhs: f64,
        residual: f64,
        tol: f64,
    ) -> Self {
        Self {
            id: id.into(),
            sample,
            kind: CheckKind::Identity,
            lhs,
            rhs,
            residual,
            pass: residual <= tol,
        }
    }

    /// An identity check with residual `|lhs - rhs| / scale`.
    pub fn identity_scaled(
        id: impl Into<String>,
        sample: Option<u64>,
        lhs: f64,
        rhs: f64,
        scale: f64,
        tol: f64,
    ) -> Self {
        let scale = scale.max(f64::MIN_POSITIVE);
        let mut record = Self::identity(id, sample, lhs, rhs, (lhs - rhs).abs() / scale, tol);
        record.pass = agrees(lhs, rhs, tol, scale);
        record
    }

    /// `lhs ≤ rhs` with slack `tol` on the scale `max(1, |lhs|, |rhs|)`.
    pub fn inequality(
        id: impl Into<String>,
        sample: Option<u64>,
        lhs: f64,
        rhs: f64,
        tol: f64,
    ) -> Self {
        Self {
            id: id.into(),
            sample,
            kind: CheckKind::Inequality,
            lhs,
            rhs,
            residual: rhs - lhs,
            pass: holds(lhs, rhs, tol),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub checks: usize,
    pub violations: usize,
    /// Largest relative residual over identity checks.
    pub max_residual: Option<f64>,
    /// Smallest `rhs - lhs` over inequality checks.
    pub min_slack: Option<f64>,
    pub empirical_max_ratio: Option<f64>,
    pub runtime_seconds: f64,
    /// Command-specific summary values.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub extra: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub resolution: usize,
    pub quantity: String,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub config: RunConfig,
    pub checks: Vec<CheckRecord>,
    pub aggregates: Aggregates,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub table: Vec<TableRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search: Option<SearchOutcome>,
}

impl RunReport {
    pub fn new(command: &str, config: RunConfig, checks: Vec<CheckRecord>) -> Self {
        let mut report = Self {
            command: command.to_owned(),
            config,
            checks,
            aggregates: Aggregates::default(),
            table: Vec::new(),
            search: None,
        };
        report.summarize();
        report
    }

    /// Recomputes the check-derived aggregates.
    pub fn summarize(&mut self) {
        let a = &mut self.aggregates;
        a.checks = self.checks.len();
        a.violations = self.checks.iter().filter(|c| !c.pass).count();
        let fold = |kind: CheckKind, f: fn(f64, f64) -> f64| {
            self.checks
                .iter()
                .filter(|c| c.kind == kind)
                .map(|c| c.residual)
                .reduce(f)
        };
        a.max_residual = fold(CheckKind::Identity, f64::max);
        a.min_slack = fold(CheckKind::Inequality, f64::min);
    }

    pub fn passed(&self) -> bool {
        self.aggregates.violations == 0
    }

    pub fn exit_code(&self) -> u8 {
        if self.passed() {
            0
        } else {
            1
        }
    }

    pub fn summary_line(&self) -> String {
        let mut line = format!(
            "{}: {} checks, {} violations",
            self.command, self.aggregates.checks, self.aggregates.violations
        );
        if let Some(r) = self.aggregates.max_residual {
            line += &format!(", max residual {r:.3e}");
        }
        if let Some(s) = self.aggregates.min_slack {
            line += &format!(", min slack {s:.3e}");
        }
        if let Some(r) = self.aggregates.empirical_max_ratio {
            line += &format!(", max ratio {r:.6}");
        }
        line += &format!(" [{:.2}s]", self.aggregates.runtime_seconds);
        line
    }

    pub fn write_json(&self, path: &Path) -> Result<(), LabError> {
        let mut out = BufWriter::new(File::create(path)?);
        serde_json::to_writer_pretty(&mut out, self).map_err(std::io::Error::from)?;
        writeln!(out)?;
        out.flush()?;
        Ok(())
    }

    /// Writes `resolution,quantity,value` rows: the sweep table when there is
    /// one, otherwise the numeric aggregates keyed by the run's grid size.
    pub fn write_csv(&self, path: &Path) -> Result<(), LabError> {
        let mut writer = csv::Writer::from_path(path).map_err(csv_err)?;
        writer
            .write_record(["resolution", "quantity", "value"])
            .map_err(csv_err)?;
        let rows: Vec<TableRow> = if self.table.is_empty() {
            self.aggregate_rows()
        } else {
            self.table.clone()
        };
        for row in rows {
            writer
                .write_record([
                    row.resolution.to_string(),
                    row.quantity,
                    row.value.to_string(),
                ])
                .map_err(csv_err)?;
        }
        writer.flush()?;
        Ok(())
    }

    fn aggregate_rows(&self) -> Vec<TableRow> {
        let a = &self.aggregates;
        let n = self.config.n_points;
        let row = |q: &str, v: f64| TableRow {
            resolution: n,
            quantity: q.to_owned(),
            value: v,
        };
        let mut rows = vec![
            row("checks", a.checks as f64),
            row("violations", a.violations as f64),
        ];
        rows.extend(a.max_residual.map(|v| row("max_residual", v)));
        rows.extend(a.min_slack.map(|v| row("min_slack", v)));
        rows.extend(a.empirical_max_ratio.map(|v| row("empirical_max_ratio", v)));
        rows.extend(a.extra.iter().map(|(k, v)| row(k, *v)));
        rows
    }
}

fn csv_err(e: csv::Error) -> LabError {
    LabError::Io(e.into())
}
