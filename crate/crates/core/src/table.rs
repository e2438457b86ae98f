//! Plain CSV output with locale-independent, fixed-precision numbers.

use std::io::Write;

use crate::error::Result;

/// Twelve significant digits in scientific notation.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        // avoid "-0e0" and keep a single spelling of zero
        return "0.00000000000e0".to_string();
    }
    format!("{x:.11e}")
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_num).unwrap_or_default()
}

pub fn fmt_bool(b: bool) -> &'static str {
    if b {
        "true"
    } else {
        "false"
    }
}

/// Minimal CSV writer; fields must not contain commas or newlines.
pub struct CsvWriter<W: Write> {
    out: W,
    columns: usize,
}

impl<W: Write> CsvWriter<W> {
    pub fn new(mut out: W, header: &[&str]) -> Result<Self> {
        writeln!(out, "{}", header.join(","))?;
        Ok(CsvWriter {
            out,
            columns: header.len(),
        })
    }

    pub fn row(&mut self, fields: &[String]) -> Result<()> {
        debug_assert_eq!(fields.len(), self.columns);
        debug_assert!(fields.iter().all(|f| !f.contains(',') && !f.contains('\n')));
        writeln!(self.out, "{}", fields.join(","))?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<W> {
        self.out.flush()?;
        Ok(self.out)
    }
}
