//! Rows, failures and their CSV/JSON rendering.

use std::io;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use super::{
    ExperimentConfig, Kind, CERTIFICATE_TOL, CONVERGENCE_THRESHOLD, DISTANCE_SLACK,
    MONOTONE_SLACK, RYABYKH_TOL, SMALL_EPSILON,
};
use crate::quadrature::DiskGrid;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// One violated assertion.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Failure {
    pub check: String,
    /// The case the check refers to, e.g. `{"degree": 4}`.
    pub case: Value,
    pub detail: String,
}

/// Grid used for one case.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridSize {
    pub degree: usize,
    pub radial: usize,
    pub angular: usize,
}

impl GridSize {
    pub(crate) fn of(degree: usize, grid: &DiskGrid) -> Self {
        Self {
            degree,
            radial: grid.radial_count(),
            angular: grid.angular_count(),
        }
    }
}

/// Rows of one experiment in configured case order.
#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub kind: Kind,
    /// Scalar columns, in output order; the CSV header.
    pub columns: Vec<&'static str>,
    /// Each row maps column names (and, in JSON only, array-valued extras) to values.
    pub rows: Vec<Map<String, Value>>,
    pub failures: Vec<Failure>,
    pub grids: Vec<GridSize>,
}

impl RunRecord {
    pub(crate) fn new(kind: Kind, columns: &[&'static str]) -> Self {
        Self {
            kind,
            columns: columns.to_vec(),
            rows: Vec::new(),
            failures: Vec::new(),
            grids: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub(crate) fn fail(&mut self, check: &str, case: Value, detail: String) {
        self.failures.push(Failure {
            check: check.to_string(),
            case,
            detail,
        });
    }

    pub(crate) fn push_grid(&mut self, size: GridSize) {
        if !self.grids.contains(&size) {
            self.grids.push(size);
        }
    }

    /// Numeric column as `f64`, `None` where the row errored.
    pub fn column(&self, name: &str) -> Vec<Option<f64>> {
        self.rows
            .iter()
            .map(|r| r.get(name).and_then(Value::as_f64))
            .collect()
    }

    pub fn metadata(&self) -> Value {
        json!({
            "version": env!("CARGO_PKG_VERSION"),
            "tolerances": {
                "grad_tol": crate::SolverOptions::default().grad_tol,
                "monotone_slack": MONOTONE_SLACK,
                "distance_slack": DISTANCE_SLACK,
                "convergence_threshold": CONVERGENCE_THRESHOLD,
                "small_epsilon": SMALL_EPSILON,
                "certificate_tol": CERTIFICATE_TOL,
                "ryabykh_tol": RYABYKH_TOL,
            },
            "grid_sizes": self.grids,
        })
    }

    pub fn to_json(&self, config: &ExperimentConfig) -> Value {
        json!({
            "config": config,
            "rows": self.rows,
            "metadata": self.metadata(),
            "failures": self.failures,
        })
    }

    pub fn write_json<W: io::Write>(&self, config: &ExperimentConfig, mut out: W) -> io::Result<()> {
        serde_json::to_writer_pretty(&mut out, &self.to_json(config))?;
        writeln!(out)
    }

    pub fn write_csv<W: io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(self.columns.iter().map(|c| cell(row.get(*c))))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write<W: io::Write>(
        &self,
        config: &ExperimentConfig,
        format: Format,
        out: W,
    ) -> io::Result<()> {
        match format {
            Format::Json => self.write_json(config, out),
            Format::Csv => self.write_csv(out).map_err(io::Error::other),
        }
    }

    /// Failure record for the diagnostic stream.
    pub fn failure_report(&self) -> Value {
        json!({ "kind": self.kind.name(), "failures": self.failures })
    }
}

fn cell(v: Option<&Value>) -> String {
    match v {
        None | Some(Value::Null) => String::new(),
        Some(Value::String(s)) => s.clone(),
        Some(other) => other.to_string(),
    }
}
