//! On-disk dataset layout.
//!
//! A dataset directory holds a `manifest.json` plus `train/`, `val/`, and
//! `test/` subdirectories. Each video contributes a binary feature file
//! (`<id>.feat`) and a text label file (`<id>.labels`). The manifest
//! records the generation seed, the workflow description, and one entry
//! per video in generation order so reads reconstruct the exact dataset.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{ArstError, Result};
use crate::formats::feature_file::{
    read_feature_file, read_labels_file, write_feature_file, write_labels_file,
};
use crate::numerics::SeededRng;
use crate::synthdata::{PhaseCentroids, Split, SyntheticDataset, SyntheticVideo, WorkflowSpec};

/// One manifest row describing a stored video.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ManifestVideo {
    pub id: String,
    pub split: Split,
    /// Frame count, duplicated here so corrupt files are caught early.
    pub frames: usize,
    /// 0-based indices of corrupted frames.
    pub hard_frames: Vec<usize>,
}

/// Top-level manifest content.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub seed: u64,
    pub spec: WorkflowSpec,
    pub videos: Vec<ManifestVideo>,
}

fn format_err(path: &Path, reason: impl Into<String>) -> ArstError {
    ArstError::Format {
        path: path.display().to_string(),
        reason: reason.into(),
    }
}

fn video_paths(dir: &Path, video_split: Split, id: &str) -> (PathBuf, PathBuf) {
    let sub = dir.join(video_split.to_string());
    (sub.join(format!("{id}.feat")), sub.join(format!("{id}.labels")))
}

/// Writes `manifest.json` and all per-video files under `dir`, creating
/// the directory tree as needed. Writing the same dataset twice produces
/// byte-identical files.
pub fn write_dataset(dir: &Path, dataset: &SyntheticDataset) -> Result<()> {
    for split in [Split::Train, Split::Val, Split::Test] {
        std::fs::create_dir_all(dir.join(split.to_string()))?;
    }
    let mut manifest = DatasetManifest {
        seed: dataset.seed,
        spec: dataset.spec.clone(),
        videos: Vec::with_capacity(dataset.videos.len()),
    };
    for video in &dataset.videos {
        let (feat_path, labels_path) = video_paths(dir, video.split, &video.id);
        write_feature_file(&feat_path, &video.features)?;
        write_labels_file(&labels_path, &video.labels)?;
        manifest.videos.push(ManifestVideo {
            id: video.id.clone(),
            split: video.split,
            frames: video.labels.len(),
            hard_frames: video.hard_frames.clone(),
        });
    }
    let manifest_path = dir.join("manifest.json");
    let mut text = serde_json::to_string_pretty(&manifest)
        .map_err(|e| format_err(&manifest_path, format!("cannot serialize manifest: {e}")))?;
    text.push('\n');
    std::fs::write(&manifest_path, text)
        .map_err(|e| format_err(&manifest_path, format!("cannot write: {e}")))?;
    Ok(())
}

/// Reads a dataset directory back in manifest order, cross-checking each
/// video's frame counts against the manifest.
pub fn read_dataset(dir: &Path) -> Result<SyntheticDataset> {
    let manifest_path = dir.join("manifest.json");
    let text = std::fs::read_to_string(&manifest_path)
        .map_err(|e| format_err(&manifest_path, format!("cannot read: {e}")))?;
    let manifest: DatasetManifest = serde_json::from_str(&text)
        .map_err(|e| format_err(&manifest_path, format!("bad manifest: {e}")))?;
    manifest.spec.validate()?;

    let mut videos = Vec::with_capacity(manifest.videos.len());
    for entry in &manifest.videos {
        let (feat_path, labels_path) = video_paths(dir, entry.split, &entry.id);
        let features = read_feature_file(&feat_path)?;
        let labels = read_labels_file(&labels_path)?;
        if features.rows() != labels.len() {
            return Err(format_err(
                &feat_path,
                format!(
                    "video {} has {} feature frames but {} labels",
                    entry.id,
                    features.rows(),
                    labels.len()
                ),
            ));
        }
        if labels.len() != entry.frames {
            return Err(format_err(
                &labels_path,
                format!(
                    "video {} has {} frames on disk, manifest says {}",
                    entry.id,
                    labels.len(),
                    entry.frames
                ),
            ));
        }
        for &label in &labels {
            if label as usize > manifest.spec.classes {
                return Err(ArstError::PhaseId {
                    id: label,
                    classes: manifest.spec.classes as u32,
                });
            }
        }
        videos.push(SyntheticVideo {
            id: entry.id.clone(),
            split: entry.split,
            features,
            labels,
            hard_frames: entry.hard_frames.clone(),
        });
    }

    // Centroids are a pure function of the workflow spec and seed, so
    // regenerating them restores the full in-memory dataset.
    let centroids =
        PhaseCentroids::generate(&manifest.spec, &mut SeededRng::new(manifest.seed).derive(0));
    Ok(SyntheticDataset {
        spec: manifest.spec,
        seed: manifest.seed,
        centroids,
        videos,
    })
}
