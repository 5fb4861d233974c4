use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use crate::error::Result;

/// Rows that can be emitted as CSV with a fixed header.
pub trait Record {
    const HEADER: &'static [&'static str];
    fn fields(&self) -> Vec<String>;
}

pub fn write_csv<R: Record, W: Write>(out: W, rows: &[R]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(R::HEADER)?;
    for r in rows {
        w.write_record(r.fields())?;
    }
    w.flush()?;
    Ok(())
}

pub fn to_csv_string<R: Record>(rows: &[R]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(&mut buf, rows)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

/// Writes to `path`, or to stdout when `path` is `None`.
pub fn emit<R: Record>(path: Option<&Path>, rows: &[R]) -> Result<()> {
    match path {
        Some(p) => write_csv(File::create(p)?, rows),
        None => write_csv(io::stdout().lock(), rows),
    }
}

pub(crate) fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}
