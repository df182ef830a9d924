use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// One metric of one run. Field order is the CSV column order.
#[allow(non_snake_case)]
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub run_id: String,
    pub algorithm: String,
    pub domain: String,
    pub d: usize,
    pub H: usize,
    pub L: usize,
    pub T: usize,
    pub S: usize,
    pub adversary: String,
    pub regularizer: String,
    /// Empty for metrics that do not depend on a norm.
    pub norm: String,
    pub metric: String,
    pub value: f64,
    pub b_realized: Option<f64>,
    pub bound: Option<f64>,
    pub bound_ok: Option<bool>,
    pub seed: u64,
    pub wall_ms: f64,
}

/// Metrics whose bound is reported for information only and never fails a run.
pub const FLAG_SUFFIX: &str = "_flag";

impl ReportRow {
    /// True when the row carries a binding bound check that failed.
    pub fn is_failure(&self) -> bool {
        self.bound_ok == Some(false) && !self.metric.ends_with(FLAG_SUFFIX)
    }
}

pub const CSV_COLUMNS: [&str; 18] = [
    "run_id",
    "algorithm",
    "domain",
    "d",
    "H",
    "L",
    "T",
    "S",
    "adversary",
    "regularizer",
    "norm",
    "metric",
    "value",
    "b_realized",
    "bound",
    "bound_ok",
    "seed",
    "wall_ms",
];

pub fn write_csv<W: Write>(w: W, rows: &[ReportRow]) -> Result<()> {
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    out.write_record(CSV_COLUMNS)?;
    for row in rows {
        out.serialize(row)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_csv<R: std::io::Read>(r: R) -> Result<Vec<ReportRow>> {
    let mut rdr = csv::Reader::from_reader(r);
    let rows = rdr.deserialize().collect::<std::result::Result<Vec<ReportRow>, _>>()?;
    Ok(rows)
}

/// One JSON object per row.
pub fn write_json<W: Write>(mut w: W, rows: &[ReportRow]) -> Result<()> {
    for row in rows {
        serde_json::to_writer(&mut w, row)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}
