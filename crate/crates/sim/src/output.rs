//! CSV result rows. Floats are written with 17 significant digits in exponent
//! form, which round-trips exactly and never depends on the locale.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::SimError;

pub const HEADER: [&str; 12] = [
    "scenario",
    "model",
    "sweep_name",
    "sweep_value",
    "seed",
    "rate_bpshz",
    "se_bps",
    "ee_bpj",
    "tf_s",
    "payload_bits",
    "nmse",
    "elapsed_s",
];

/// One (trial, model, sweep point) outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub scenario: String,
    pub model: String,
    pub sweep_name: String,
    pub sweep_value: f64,
    pub seed: u64,
    pub rate_bpshz: f64,
    pub se_bps: f64,
    pub ee_bpj: f64,
    pub tf_s: f64,
    pub payload_bits: u64,
    pub nmse: f64,
    pub elapsed_s: f64,
}

fn float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_csv<W: Write>(rows: &[ResultRow], out: W) -> Result<(), SimError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for r in rows {
        w.write_record([
            r.scenario.clone(),
            r.model.clone(),
            r.sweep_name.clone(),
            float(r.sweep_value),
            r.seed.to_string(),
            float(r.rate_bpshz),
            float(r.se_bps),
            float(r.ee_bpj),
            float(r.tf_s),
            r.payload_bits.to_string(),
            float(r.nmse),
            float(r.elapsed_s),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes header and rows to `path`.
pub fn emit_csv(rows: &[ResultRow], path: &Path) -> Result<(), SimError> {
    write_csv(rows, File::create(path)?)
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<ResultRow>, SimError> {
    let mut r = csv::Reader::from_reader(input);
    if r.headers()?.iter().ne(HEADER) {
        return Err(SimError::Input("unexpected CSV header".into()));
    }
    let bad = |f: &str| SimError::Input(format!("bad CSV field `{f}`"));
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let f = |i: usize| -> Result<f64, SimError> { rec[i].parse().map_err(|_| bad(&rec[i])) };
        let u = |i: usize| -> Result<u64, SimError> { rec[i].parse().map_err(|_| bad(&rec[i])) };
        rows.push(ResultRow {
            scenario: rec[0].to_string(),
            model: rec[1].to_string(),
            sweep_name: rec[2].to_string(),
            sweep_value: f(3)?,
            seed: u(4)?,
            rate_bpshz: f(5)?,
            se_bps: f(6)?,
            ee_bpj: f(7)?,
            tf_s: f(8)?,
            payload_bits: u(9)?,
            nmse: f(10)?,
            elapsed_s: f(11)?,
        });
    }
    Ok(rows)
}
