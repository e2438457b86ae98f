//! Experiment provenance written next to CSV outputs.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::table::CsvWriter;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub experiment: String,
    pub config: BTreeMap<String, String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub wall_clock_seconds: f64,
    pub library_version: String,
}

impl ExperimentRecord {
    pub fn new(experiment: &str, config: BTreeMap<String, String>, columns: &[&str]) -> Self {
        ExperimentRecord {
            experiment: experiment.to_string(),
            config,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            wall_clock_seconds: 0.0,
            library_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<W> {
        let header: Vec<&str> = self.columns.iter().map(String::as_str).collect();
        let mut w = CsvWriter::new(out, &header)?;
        for r in &self.rows {
            w.row(r)?;
        }
        w.finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_and_json() {
        let mut r = ExperimentRecord::new("demo", BTreeMap::from([("n".into(), "4".into())]), &["a", "b"]);
        r.rows.push(vec!["1".into(), "2".into()]);
        let csv = String::from_utf8(r.write_csv(Vec::new()).unwrap()).unwrap();
        assert_eq!(csv, "a,b\n1,2\n");
        let back: ExperimentRecord = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
        assert_eq!(back, r);
    }
}
