// SPDX-License-Identifier: Apache-2.0

//! CSV formatting shared by the library and the command-line front end.

use std::io::Write;

use crate::error::{Error, Result};

/// 17 significant digits; parses back to the same `f64`.
pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

/// Empty field for `None`.
pub fn format_optional(x: Option<f64>) -> String {
    x.map(format_float).unwrap_or_default()
}

/// Writes a header and rows, flushing at the end.
pub fn write_table<W, I>(out: W, header: &[&str], rows: I) -> Result<()>
where
    W: Write,
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::Csv(e.to_string()))
}
