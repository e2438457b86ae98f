//! Experiment drivers: model presets, error scans, decay fits, the Trotter
//! baseline and configuration.

pub mod config;
pub mod fit;
pub mod presets;
pub mod record;
pub mod scan;
pub mod trotter;

pub use config::{load_config, parse_config};
pub use fit::{fit_decay_constants, DecayFit, DecayPoint};
pub use presets::{preset_model, Preset};
pub use record::ExperimentRecord;
pub use scan::{error_scan, ScanRow};
pub use trotter::{trotter_compare, trotter_propagator, TrotterRow};
