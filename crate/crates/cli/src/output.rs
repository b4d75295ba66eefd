//! JSON and CSV emitters.
//!
//! Every float goes through [`F`], which prints 17 significant digits and
//! refuses NaN and infinities, so a report either round-trips exactly or
//! fails loudly.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use clap::ValueEnum;
use serde::{Serialize, Serializer};

use crate::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct F(pub f64);

impl Serialize for F {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            s.serialize_f64(self.0)
        } else {
            Err(serde::ser::Error::custom(format!("refusing to emit non-finite number {}", self.0)))
        }
    }
}

impl std::fmt::Display for F {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:.16e}", self.0)
    }
}

pub fn cell(v: Option<F>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

struct Digits17;

impl serde_json::ser::Formatter for Digits17 {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }
}

/// A report row that can be written either as JSON or as a flat CSV record.
pub trait Record: Serialize {
    fn header() -> Vec<&'static str>;
    fn fields(&self) -> Vec<String>;
    /// Non-finite values must fail before anything is written.
    fn finite(&self) -> bool {
        self.fields().iter().all(|f| !matches!(f.as_str(), "NaN" | "inf" | "-inf"))
    }
}

fn open(out: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(File::create(path).map_err(|e| {
            Failure::Numeric(format!("cannot create {}: {e}", path.display()))
        })?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Writes `rows`; with `single`, JSON gets a bare object instead of an array.
pub fn emit<R: Record>(rows: &[R], single: bool, format: Format, out: Option<&Path>) -> Result<(), Failure> {
    if let Some(bad) = rows.iter().position(|r| !r.finite()) {
        return Err(Failure::Numeric(format!("row {bad} contains a non-finite number")));
    }
    let mut buf = Vec::new();
    match format {
        Format::Json => {
            let mut ser = serde_json::Serializer::with_formatter(&mut buf, Digits17);
            let res = if single && rows.len() == 1 {
                rows[0].serialize(&mut ser)
            } else {
                rows.serialize(&mut ser)
            };
            res.map_err(|e| Failure::Numeric(e.to_string()))?;
            buf.push(b'\n');
        }
        Format::Csv => {
            let mut w = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(&mut buf);
            let io_err = |e: csv::Error| Failure::Numeric(e.to_string());
            w.write_record(R::header()).map_err(io_err)?;
            for r in rows {
                w.write_record(r.fields()).map_err(io_err)?;
            }
            w.flush().map_err(|e| Failure::Numeric(e.to_string()))?;
        }
    }
    let mut sink = open(out)?;
    sink.write_all(&buf)
        .and_then(|_| sink.flush())
        .map_err(|e| Failure::Numeric(format!("write failed: {e}")))
}
