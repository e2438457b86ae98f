//! Merges `--config` file values with command-line flags.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::str::FromStr;

use lrqca::harness::{load_config, Preset};
use lrqca::qca::QcaOptions;
use lrqca::{Error, Limits, Result, SpinChainHamiltonian};

use crate::Common;

const KNOWN_KEYS: [&str; 24] = [
    "model",
    "n",
    "seed",
    "t",
    "block",
    "tol",
    "out",
    "g",
    "delta",
    "max_dense_sites",
    "cut",
    "windows",
    "window",
    "bound",
    "blocks",
    "record",
    "in",
    "mpo_tol",
    "steps",
    "size_column",
    "error_column",
    "epsilon",
    "constants",
    "config",
];

pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    pub fn new(common: &Common) -> Result<Self> {
        let mut values = match &common.config {
            Some(path) => load_config(path)?,
            None => BTreeMap::new(),
        };
        if let Some(k) = values.keys().find(|k| !KNOWN_KEYS.contains(&k.as_str())) {
            return Err(Error::Input(format!("unknown config key '{k}'")));
        }
        values.remove("config");
        let mut s = Settings { values };
        s.put_opt("model", common.model.clone());
        s.put_opt("n", common.n);
        s.put_opt("seed", common.seed);
        s.put_list("t", common.t.as_deref());
        s.put_opt("block", common.block);
        s.put_opt("tol", common.tol);
        s.put_opt("out", common.out.as_ref().map(|p| p.display().to_string()));
        s.put_opt("g", common.g);
        s.put_opt("delta", common.delta);
        s.put_opt("max_dense_sites", common.max_dense_sites);
        Ok(s)
    }

    pub fn put_opt<T: Display>(&mut self, key: &str, value: Option<T>) {
        if let Some(v) = value {
            self.values.insert(key.to_string(), v.to_string());
        }
    }

    pub fn put_list<T: Display>(&mut self, key: &str, value: Option<&[T]>) {
        if let Some(v) = value {
            let joined: Vec<String> = v.iter().map(ToString::to_string).collect();
            self.values.insert(key.to_string(), joined.join(","));
        }
    }

    pub fn raw(&self, key: &str) -> Option<String> {
        self.values.get(key).cloned()
    }

    pub fn get<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        match self.values.get(key) {
            None => Ok(default),
            Some(v) => v
                .trim()
                .parse()
                .map_err(|_| Error::Input(format!("invalid value for {key}: '{v}'"))),
        }
    }

    pub fn list<T: FromStr + Clone>(&self, key: &str, default: &[T]) -> Result<Vec<T>> {
        match self.values.get(key) {
            None => Ok(default.to_vec()),
            Some(v) => v
                .split(',')
                .filter(|x| !x.trim().is_empty())
                .map(|x| {
                    x.trim()
                        .parse()
                        .map_err(|_| Error::Input(format!("invalid entry for {key}: '{x}'")))
                })
                .collect(),
        }
    }

    /// The chain and its descriptor.
    pub fn model(&self) -> Result<(SpinChainHamiltonian, String)> {
        let name = self.get("model", "tfim".to_string())?;
        let params: BTreeMap<String, String> = ["g", "delta", "seed"]
            .iter()
            .filter_map(|k| self.values.get(*k).map(|v| (k.to_string(), v.clone())))
            .collect();
        let preset = Preset::parse(&name, &params)?;
        let h = preset.build(self.get("n", 8)?)?;
        Ok((h, preset.to_string()))
    }

    pub fn limits(&self) -> Result<Limits> {
        Limits::new(self.get("max_dense_sites", lrqca::model::DEFAULT_MAX_DENSE_SITES)?)
    }

    pub fn qca_options(&self) -> Result<QcaOptions> {
        Ok(QcaOptions {
            tol: self.get("tol", lrqca::patch::DEFAULT_TOL)?,
            limits: self.limits()?,
            ..QcaOptions::default()
        })
    }

    pub fn output(&self) -> Result<Box<dyn Write>> {
        match self.values.get("out") {
            Some(path) => {
                let f = File::create(path).map_err(|e| Error::Input(format!("{path}: {e}")))?;
                Ok(Box::new(BufWriter::new(f)))
            }
            None => Ok(Box::new(BufWriter::new(io::stdout()))),
        }
    }

    /// Resolved settings for experiment records.
    pub fn snapshot(&self) -> BTreeMap<String, String> {
        self.values.clone()
    }
}
