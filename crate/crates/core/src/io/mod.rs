//! Configuration, snapshot files and text reports.

pub mod config;
pub mod observation;
pub mod report;
pub mod snapshot;

pub use config::ExperimentConfig;
pub use observation::ObservationFile;
pub use report::{emit_csv, emit_json, to_csv, to_json};
pub use snapshot::{load_snapshot, save_snapshot, SnapshotFile, SnapshotKind};
