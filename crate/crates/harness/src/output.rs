//! CSV and JSON emission of regret curves.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::config::OutputFormat;
use crate::error::Result;

pub const CSV_HEADER: &str =
    "algo,set,dim,T,seed,regret,regret_norm_T23,lmo_calls,projections,bound_regret,bound_lmo,wall_ms";

/// One `(T, seed)` cell of a regret curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub algo: String,
    pub set: String,
    pub dim: usize,
    #[serde(rename = "T")]
    pub horizon: u64,
    pub seed: u64,
    pub regret: f64,
    /// `regret / T^{2/3}`.
    #[serde(rename = "regret_norm_T23")]
    pub regret_norm: f64,
    pub lmo_calls: u64,
    pub projections: u64,
    pub bound_regret: f64,
    pub bound_lmo: f64,
    pub wall_ms: u64,
}

pub fn write_csv<W: Write>(rows: &[Row], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_HEADER.split(','))?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<Row>> {
    let mut r = csv::Reader::from_reader(input);
    let rows = r.deserialize().collect::<std::result::Result<Vec<Row>, _>>()?;
    Ok(rows)
}

pub fn write_json<W: Write>(rows: &[Row], mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, rows)?;
    out.write_all(b"\n")?;
    Ok(())
}

pub fn read_json<R: Read>(input: R) -> Result<Vec<Row>> {
    Ok(serde_json::from_reader(input)?)
}

pub fn write_rows<W: Write>(rows: &[Row], format: OutputFormat, out: W) -> Result<()> {
    match format {
        OutputFormat::Csv => write_csv(rows, out),
        OutputFormat::Json => write_json(rows, out),
    }
}

pub fn to_csv_string(rows: &[Row]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    Ok(String::from_utf8(buf).expect("CSV output is UTF-8"))
}
