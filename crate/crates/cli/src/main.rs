//! `lrqca` command-line harness.

mod settings;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lrqca::harness::fit::DecayPoint;
use lrqca::harness::scan::{write_scan_csv, SCAN_CSV_HEADER};
use lrqca::harness::trotter::TROTTER_CSV_HEADER;
use lrqca::harness::{error_scan, fit_decay_constants, trotter_compare, ExperimentRecord};
use lrqca::lr::{centered_window, write_lr_csv};
use lrqca::table::{fmt_num, CsvWriter};
use lrqca::{
    build_dense_hamiltonian, build_qca, lr_scan, mpo_from_dense, mpo_to_dense, patch_windowed,
    propagator, qca_to_mpo, window_size_for, BoundMethod, CutSpec, DecayConstants, Error, LayeredCircuit,
    MpoOperator, PatchOptions, Result,
};

use settings::Settings;

#[derive(Parser)]
#[command(name = "lrqca", version, about = "Windowed-patch circuit decompositions of spin-chain propagators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every subcommand. Values from `--config` apply when the
/// flag is absent; config keys use the flag names without dashes.
#[derive(Args, Clone, Debug, Default)]
struct Common {
    /// Model preset: tfim, heisenberg-xxz, ising-zz or random-seeded.
    #[arg(long)]
    model: Option<String>,
    /// Number of sites.
    #[arg(long)]
    n: Option<usize>,
    /// Seed for the random-seeded preset.
    #[arg(long)]
    seed: Option<u64>,
    /// Time, or a comma-separated list of times for scans.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    t: Option<Vec<f64>>,
    /// Block size.
    #[arg(long)]
    block: Option<usize>,
    /// Integration tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Flat key = value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Transverse field for tfim.
    #[arg(long)]
    g: Option<f64>,
    /// Anisotropy for heisenberg-xxz.
    #[arg(long)]
    delta: Option<f64>,
    /// Largest chain segment held densely (2 to 12).
    #[arg(long)]
    max_dense_sites: Option<usize>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum BoundArg {
    Auto,
    Quadrature,
    Analytic,
}

#[derive(Subcommand)]
enum Command {
    /// Measured Lieb-Robinson discrepancy versus the series bound.
    ///
    /// CSV columns: model,n,cut,t,window_size,measured,bound
    LrScan {
        #[command(flatten)]
        common: Common,
        /// Cut position (default n/2).
        #[arg(long)]
        cut: Option<usize>,
        /// Comma-separated window sizes.
        #[arg(long, value_delimiter = ',')]
        windows: Option<Vec<usize>>,
    },
    /// Windowed patch and its error, as JSON.
    PatchError {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        cut: Option<usize>,
        /// Window size, centered on the cut.
        #[arg(long)]
        window: Option<usize>,
        #[arg(long, value_enum)]
        bound: Option<BoundArg>,
    },
    /// Two-layer circuit as JSON.
    BuildQca {
        #[command(flatten)]
        common: Common,
    },
    /// Circuit errors over times and block sizes.
    ///
    /// CSV columns: t,block,cuts,per_cut_error,global_error,triangle_sum,lr_bound,triangle_ok,lr_ok
    QcaErrorScan {
        #[command(flatten)]
        common: Common,
        /// Comma-separated block sizes.
        #[arg(long, value_delimiter = ',')]
        blocks: Option<Vec<usize>>,
        /// Also write the experiment record as JSON.
        #[arg(long)]
        record: Option<PathBuf>,
    },
    /// Circuit converted to a compressed MPO, as JSON.
    QcaToMpo {
        #[command(flatten)]
        common: Common,
        /// Read the circuit from this JSON file instead of building it.
        #[arg(long = "in")]
        input: Option<PathBuf>,
        /// SVD truncation tolerance.
        #[arg(long)]
        mpo_tol: Option<f64>,
    },
    /// Dense propagator through an MPO and back.
    ///
    /// CSV columns: n,t,mpo_tol,max_bond,max_entry_error,operator_error
    MpoRoundtrip {
        #[command(flatten)]
        common: Common,
        /// Check this MPO JSON file instead of the model propagator.
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[arg(long)]
        mpo_tol: Option<f64>,
    },
    /// First-order Trotter error against circuits of matching accuracy.
    ///
    /// CSV columns: m,trotter_error,block,qca_error,mpo_max_bond,pre_compression_bond,bond_cap
    TrotterCompare {
        #[command(flatten)]
        common: Common,
        /// Comma-separated Trotter step counts.
        #[arg(long, value_delimiter = ',')]
        steps: Option<Vec<u64>>,
        #[arg(long, value_delimiter = ',')]
        blocks: Option<Vec<usize>>,
        #[arg(long)]
        mpo_tol: Option<f64>,
    },
    /// Fit decay constants to a scan CSV; writes JSON.
    FitConstants {
        #[command(flatten)]
        common: Common,
        #[arg(long = "in")]
        input: Option<PathBuf>,
        /// Column holding the window or block size.
        #[arg(long)]
        size_column: Option<String>,
        /// Column holding the error.
        #[arg(long)]
        error_column: Option<String>,
    },
    /// Block size needed for a target global error.
    WindowSize {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        epsilon: Option<f64>,
        /// Decay constants JSON from fit-constants (defaults c0 = 4, c1 = 2).
        #[arg(long)]
        constants: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::LrScan { common, cut, windows } => {
            let mut s = Settings::new(&common)?;
            s.put_opt("cut", cut);
            s.put_list("windows", windows.as_deref());
            let (h, model) = s.model()?;
            let cut = s.get("cut", h.n() / 2)?;
            let times = s.list("t", &[0.5])?;
            let windows = s.list("windows", &[2, 4])?;
            let records = lr_scan(&h, &model, cut, &times, &windows, &s.limits()?)?;
            write_lr_csv(&records, s.output()?)?;
        }
        Command::PatchError {
            common,
            cut,
            window,
            bound,
        } => {
            let mut s = Settings::new(&common)?;
            s.put_opt("cut", cut);
            s.put_opt("window", window);
            s.put_opt("bound", bound.map(|b| format!("{b:?}").to_lowercase()));
            let (h, _) = s.model()?;
            let cut = s.get("cut", h.n() / 2)?;
            let size = s.get("window", 4usize)?;
            let t = s.get("t", 0.5)?;
            let bound = match s.get("bound", "auto".to_string())?.as_str() {
                "auto" => BoundMethod::Auto,
                "quadrature" => BoundMethod::Quadrature,
                "analytic" => BoundMethod::Analytic,
                other => return Err(Error::Input(format!("unknown bound method '{other}'"))),
            };
            let opts = PatchOptions {
                tol: s.get("tol", lrqca::patch::DEFAULT_TOL)?,
                region: None,
                bound,
                exact_error: true,
                limits: s.limits()?,
            };
            let window = centered_window(h.n(), cut, size)?;
            let r = patch_windowed(&h, &CutSpec::new(&h, cut)?, window, t, &opts)?;
            write_json(&r, s.output()?)?;
        }
        Command::BuildQca { common } => {
            let s = Settings::new(&common)?;
            let (h, _) = s.model()?;
            let c = build_qca(&h, s.get("t", 0.5)?, s.get("block", 4usize)?, &s.qca_options()?)?;
            write_json(&c, s.output()?)?;
        }
        Command::QcaErrorScan { common, blocks, record } => {
            let mut s = Settings::new(&common)?;
            s.put_list("blocks", blocks.as_deref());
            s.put_opt("record", record.map(|p| p.display().to_string()));
            let started = Instant::now();
            let (h, _) = s.model()?;
            let times = s.list("t", &[0.25, 0.5, 1.0])?;
            let blocks = s.list("blocks", &[4, 6, 8])?;
            let rows = error_scan(&h, &times, &blocks, &s.qca_options()?)?;
            write_scan_csv(&rows, s.output()?)?;
            if let Some(path) = s.raw("record") {
                let mut rec = ExperimentRecord::new("qca-error-scan", s.snapshot(), &SCAN_CSV_HEADER);
                rec.rows = rows.iter().map(|r| r.csv_fields()).collect();
                rec.wall_clock_seconds = started.elapsed().as_secs_f64();
                write_json(&rec, create(Path::new(&path))?)?;
            }
        }
        Command::QcaToMpo {
            common,
            input,
            mpo_tol,
        } => {
            let mut s = Settings::new(&common)?;
            s.put_opt("in", input.map(|p| p.display().to_string()));
            s.put_opt("mpo_tol", mpo_tol);
            let circuit: LayeredCircuit = match s.raw("in") {
                Some(path) => read_json(Path::new(&path))?,
                None => {
                    let (h, _) = s.model()?;
                    build_qca(&h, s.get("t", 0.5)?, s.get("block", 4usize)?, &s.qca_options()?)?
                }
            };
            let q = qca_to_mpo(&circuit, s.get("mpo_tol", 1e-8)?)?;
            eprintln!(
                "max_bond={} pre_compression_bond={} truncation_error={}",
                q.mpo.max_bond(),
                q.pre_compression_max_bond,
                fmt_num(q.truncation_error)
            );
            write_json(&q.mpo, s.output()?)?;
        }
        Command::MpoRoundtrip {
            common,
            input,
            mpo_tol,
        } => {
            let mut s = Settings::new(&common)?;
            s.put_opt("in", input.map(|p| p.display().to_string()));
            s.put_opt("mpo_tol", mpo_tol);
            let limits = s.limits()?;
            let tol = s.get("mpo_tol", 0.0)?;
            let (dense, t) = match s.raw("in") {
                Some(path) => {
                    let m: MpoOperator = read_json(Path::new(&path))?;
                    (mpo_to_dense(&m, &limits)?, f64::NAN)
                }
                None => {
                    let (h, _) = s.model()?;
                    let t = s.get("t", 0.5)?;
                    let full = build_dense_hamiltonian(&h, h.full_interval(), &limits)?;
                    (propagator(&full, t)?, t)
                }
            };
            let m = mpo_from_dense(&dense, tol, &limits)?;
            let back = mpo_to_dense(&m, &limits)?;
            let mut w = CsvWriter::new(
                s.output()?,
                &["n", "t", "mpo_tol", "max_bond", "max_entry_error", "operator_error"],
            )?;
            w.row(&[
                m.n().to_string(),
                if t.is_nan() { String::new() } else { fmt_num(t) },
                fmt_num(tol),
                m.max_bond().to_string(),
                fmt_num(dense.max_entry_distance(&back)?),
                fmt_num(dense.distance(&back)?),
            ])?;
            w.finish()?;
        }
        Command::TrotterCompare {
            common,
            steps,
            blocks,
            mpo_tol,
        } => {
            let mut s = Settings::new(&common)?;
            s.put_list("steps", steps.as_deref());
            s.put_list("blocks", blocks.as_deref());
            s.put_opt("mpo_tol", mpo_tol);
            let (h, _) = s.model()?;
            let rows = trotter_compare(
                &h,
                s.get("t", 1.0)?,
                &s.list("steps", &[8, 16, 32, 64])?,
                &s.list("blocks", &[2, 3, 4, 5, 6])?,
                &s.qca_options()?,
                s.get("mpo_tol", 1e-8)?,
            )?;
            let mut w = CsvWriter::new(s.output()?, &TROTTER_CSV_HEADER)?;
            for r in &rows {
                w.row(&r.csv_fields())?;
            }
            w.finish()?;
        }
        Command::FitConstants {
            common,
            input,
            size_column,
            error_column,
        } => {
            let mut s = Settings::new(&common)?;
            s.put_opt("in", input.map(|p| p.display().to_string()));
            s.put_opt("size_column", size_column);
            s.put_opt("error_column", error_column);
            let path = s.raw("in").ok_or_else(|| Error::Input("fit-constants needs --in".into()))?;
            let points = read_decay_points(
                Path::new(&path),
                &s.get("size_column", "block".to_string())?,
                &s.get("error_column", "per_cut_error".to_string())?,
            )?;
            let fit = fit_decay_constants(&points, &path)?;
            write_json(&fit, s.output()?)?;
        }
        Command::WindowSize {
            common,
            epsilon,
            constants,
        } => {
            let mut s = Settings::new(&common)?;
            s.put_opt("epsilon", epsilon);
            s.put_opt("constants", constants.map(|p| p.display().to_string()));
            let constants: DecayConstants = match s.raw("constants") {
                Some(path) => read_json(Path::new(&path))?,
                None => DecayConstants::default(),
            };
            let n: usize = s.get("n", 10)?;
            let size = window_size_for(n, s.get("t", 0.5)?, s.get("epsilon", 1e-3)?, &constants)?;
            writeln!(s.output()?, "{size}")?;
        }
    }
    Ok(())
}

fn create(path: &Path) -> Result<Box<dyn Write>> {
    let f = File::create(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
    Ok(Box::new(BufWriter::new(f)))
}

fn write_json<T: serde::Serialize>(value: &T, mut out: Box<dyn Write>) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

fn read_decay_points(path: &Path, size_col: &str, err_col: &str) -> Result<Vec<DecayPoint>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<&str> = lines
        .next()
        .ok_or_else(|| Error::Input(format!("{}: empty file", path.display())))?
        .split(',')
        .map(str::trim)
        .collect();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| *h == name)
            .ok_or_else(|| Error::Input(format!("{}: no column '{name}'", path.display())))
    };
    let (ct, cs, ce) = (col("t")?, col(size_col)?, col(err_col)?);
    let mut points = Vec::new();
    for (i, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let bad = || Error::Input(format!("{}: malformed row {}", path.display(), i + 2));
        let field = |c: usize| fields.get(c).copied().ok_or_else(bad);
        points.push(DecayPoint {
            t: field(ct)?.parse().map_err(|_| bad())?,
            window: field(cs)?.parse().map_err(|_| bad())?,
            error: field(ce)?.parse().map_err(|_| bad())?,
        });
    }
    Ok(points)
}
