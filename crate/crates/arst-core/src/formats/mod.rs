//! On-disk formats: run configuration JSON, binary feature files, text
//! label files, dataset directories, model checkpoints, and prediction
//! CSVs. All writers are deterministic — writing the same value twice
//! produces identical bytes — and all readers validate structure before
//! returning data.

pub mod checkpoint;
pub mod dataset;
pub mod feature_file;
pub mod predictions;
pub mod run_config;

pub use checkpoint::{load_checkpoint, save_checkpoint, CHECKPOINT_MAGIC};
pub use dataset::{read_dataset, write_dataset, DatasetManifest, ManifestVideo};
pub use feature_file::{
    read_feature_file, read_labels_file, write_feature_file, write_labels_file, FEATURE_MAGIC,
};
pub use predictions::{
    read_predictions, render_predictions, write_predictions, PredictionFile,
};
pub use run_config::{DatasetConfig, PathsConfig, RunConfig};
