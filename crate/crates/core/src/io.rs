//! CSV input and output. Lines starting with `#` are comments.

use std::io::{Read, Write};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::protocol::SweepRow;
use crate::stats::{PopulationRecord, ThermometryPoint};

/// Scientific notation with 9 significant digits.
pub fn format_number(v: f64) -> String {
    format!("{v:.8e}")
}

fn reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(input)
}

/// 1-based line number of a record, counting the header.
fn row_error(e: &csv::Error) -> Error {
    match e.position() {
        Some(pos) => Error::Input(format!("row {}: {e}", pos.line())),
        None => Error::Input(e.to_string()),
    }
}

/// Reads `label, mean, variance, n_shots[, timestamp]` rows.
pub fn read_population_records<R: Read>(input: R) -> Result<Vec<PopulationRecord>> {
    let out: Vec<PopulationRecord> = rows(input, |r: &PopulationRecord| r.validate())?
        .into_iter()
        .map(|r| PopulationRecord {
            timestamp: r.timestamp.filter(|t| !t.is_empty()),
            ..r
        })
        .collect();
    if out.is_empty() {
        return Err(Error::Input("no records found".into()));
    }
    Ok(out)
}

/// Reads `temperature, population, sigma` rows.
pub fn read_thermometry<R: Read>(input: R) -> Result<Vec<ThermometryPoint>> {
    let out = rows(input, |p: &ThermometryPoint| {
        if !(p.temperature > 0.0) || !(p.sigma > 0.0) {
            return Err(Error::Input("temperature and sigma must be > 0".into()));
        }
        Ok(())
    })?;
    if out.is_empty() {
        return Err(Error::Input("no thermometry points found".into()));
    }
    Ok(out)
}

/// Reads the `mean` column of a block series.
pub fn read_block_series<R: Read>(input: R) -> Result<Vec<f64>> {
    #[derive(Deserialize)]
    struct Row {
        mean: f64,
    }
    let out: Vec<f64> = rows(input, |_: &Row| Ok(()))?.into_iter().map(|r| r.mean).collect();
    if out.is_empty() {
        return Err(Error::Input("no blocks found".into()));
    }
    Ok(out)
}

/// Deserializes every row, tagging errors with the 1-based line number.
fn rows<T, R>(input: R, check: impl Fn(&T) -> Result<()>) -> Result<Vec<T>>
where
    T: serde::de::DeserializeOwned,
    R: Read,
{
    let mut rdr = reader(input);
    let headers = rdr.headers().map_err(|e| row_error(&e))?.clone();
    let mut record = csv::StringRecord::new();
    let mut out = Vec::new();
    while rdr.read_record(&mut record).map_err(|e| row_error(&e))? {
        let line = record.position().map_or(0, |p| p.line());
        let value: T = record
            .deserialize(Some(&headers))
            .map_err(|e| Error::Input(format!("row {line}: {e}")))?;
        check(&value).map_err(|e| Error::Input(format!("row {line}: {e}")))?;
        out.push(value);
    }
    Ok(out)
}

fn io_err(e: impl std::fmt::Display) -> Error {
    Error::Input(format!("write failed: {e}"))
}

/// Writes `parameter, a_sig, a_ref, population` rows in the given order.
pub fn write_sweep<W: Write>(out: W, rows: &[SweepRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["parameter", "a_sig", "a_ref", "population"]).map_err(io_err)?;
    for r in rows {
        w.write_record([r.value, r.a_sig, r.a_ref, r.population].map(format_number))
            .map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

/// Writes `frequency_hz, h0` rows.
pub fn write_strain_points<W: Write>(out: W, points: &[(f64, f64)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["frequency_hz", "h0"]).map_err(io_err)?;
    for &(f, h) in points {
        w.write_record([format_number(f), format_number(h)]).map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

/// Writes `k, sem, reference` rows.
pub fn write_sem_curve<W: Write>(
    out: W,
    sem: &[(usize, f64)],
    reference: &[(usize, f64)],
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["k", "sem", "reference"]).map_err(io_err)?;
    for (&(k, s), &(_, r)) in sem.iter().zip(reference) {
        w.write_record([k.to_string(), format_number(s), format_number(r)])
            .map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}
