//! Seeded synthetic workflow generator.
//!
//! Videos are produced by a semi-Markov phase process: the phase path
//! starts in phase 1, dwells in each phase for `min_dwell` plus a
//! geometric excess, then moves to a successor drawn from the transition
//! matrix (self-transitions live in the dwell, not the matrix). Every
//! frame emits its phase centroid plus Gaussian noise; a configurable
//! fraction of frames is corrupted into "hard frames" whose features
//! mislead a classifier while the labels keep the true phase.
//!
//! Each video consumes three independent derived random streams — path,
//! emission, corruption — so changing the corruption rate reshapes
//! corrupted features only: phase paths, labels, and untouched frames stay
//! bit-identical for the same seed.

use serde::{Deserialize, Serialize};

use crate::error::{ArstError, Result};
use crate::numerics::{Matrix, SeededRng};

/// How a corrupted frame's feature vector is produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HardFrameMode {
    /// Replace the frame with pure noise at centroid scale.
    PureNoise,
    /// Replace the frame with a different phase's centroid plus noise,
    /// which produces a confidently wrong prediction.
    WrongPhaseCentroid,
}

/// Parameters of the synthetic workflow process.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct WorkflowSpec {
    /// Number of phases.
    pub classes: usize,
    /// Row-stochastic phase transition matrix. Diagonal entries must be 0
    /// (dwell handles self-transitions) except for absorbing phases,
    /// whose rows are all-zero off the diagonal.
    pub transition: Vec<Vec<f64>>,
    /// Minimum frames spent in a phase per visit.
    pub min_dwell: usize,
    /// Mean frames per visit (min plus geometric excess).
    pub mean_dwell: f64,
    /// Feature dimensionality.
    pub d_feat: usize,
    /// Standard deviation of the centroid coordinate distribution.
    pub centroid_scale: f64,
    /// Per-coordinate emission noise standard deviation.
    pub noise_sigma: f64,
    /// Probability that a frame is corrupted.
    pub hard_frame_rate: f64,
    pub hard_frame_mode: HardFrameMode,
}

/// Default 7-phase near-linear workflow: each phase mostly advances to the
/// next, with small skip-ahead and backtrack mass; the last phase absorbs.
fn default_transition() -> Vec<Vec<f64>> {
    vec![
        vec![0.00, 0.95, 0.05, 0.00, 0.00, 0.00, 0.00],
        vec![0.05, 0.00, 0.90, 0.05, 0.00, 0.00, 0.00],
        vec![0.00, 0.05, 0.00, 0.90, 0.05, 0.00, 0.00],
        vec![0.00, 0.00, 0.05, 0.00, 0.85, 0.10, 0.00],
        vec![0.00, 0.00, 0.00, 0.05, 0.00, 0.90, 0.05],
        vec![0.00, 0.00, 0.00, 0.00, 0.10, 0.00, 0.90],
        vec![0.00, 0.00, 0.00, 0.00, 0.00, 0.00, 1.00],
    ]
}

impl Default for WorkflowSpec {
    fn default() -> Self {
        WorkflowSpec {
            classes: 7,
            transition: default_transition(),
            min_dwell: 12,
            mean_dwell: 26.0,
            d_feat: 32,
            centroid_scale: 1.0,
            noise_sigma: 0.1,
            hard_frame_rate: 0.0,
            hard_frame_mode: HardFrameMode::WrongPhaseCentroid,
        }
    }
}

impl WorkflowSpec {
    pub fn validate(&self) -> Result<()> {
        if self.classes < 2 {
            return Err(ArstError::Config(format!(
                "workflow needs at least 2 phases, got {}",
                self.classes
            )));
        }
        if self.transition.len() != self.classes {
            return Err(ArstError::Config(format!(
                "transition matrix has {} rows for {} phases",
                self.transition.len(),
                self.classes
            )));
        }
        for (i, row) in self.transition.iter().enumerate() {
            if row.len() != self.classes {
                return Err(ArstError::Config(format!(
                    "transition row {} has {} entries for {} phases",
                    i + 1,
                    row.len(),
                    self.classes
                )));
            }
            if row.iter().any(|&w| w < 0.0 || !w.is_finite()) {
                return Err(ArstError::Config(format!(
                    "transition row {} contains a negative or non-finite weight",
                    i + 1
                )));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(ArstError::Config(format!(
                    "transition row {} sums to {sum}, expected 1",
                    i + 1
                )));
            }
            let diag = row[i];
            if diag != 0.0 && diag != 1.0 {
                return Err(ArstError::Config(format!(
                    "transition row {} has self-weight {diag}; dwell handles \
                     self-transitions, so the diagonal must be 0 (or 1 for an \
                     absorbing phase)",
                    i + 1
                )));
            }
        }
        if self.min_dwell == 0 {
            return Err(ArstError::Config("min_dwell must be at least 1".into()));
        }
        if self.mean_dwell < self.min_dwell as f64 {
            return Err(ArstError::Config(format!(
                "mean_dwell {} is below min_dwell {}",
                self.mean_dwell, self.min_dwell
            )));
        }
        if self.d_feat == 0 {
            return Err(ArstError::Config("d_feat must be at least 1".into()));
        }
        if !(self.centroid_scale > 0.0) {
            return Err(ArstError::Config(format!(
                "centroid_scale must be positive, got {}",
                self.centroid_scale
            )));
        }
        if !(self.noise_sigma >= 0.0) {
            return Err(ArstError::Config(format!(
                "noise_sigma must be non-negative, got {}",
                self.noise_sigma
            )));
        }
        if !(0.0..1.0).contains(&self.hard_frame_rate) {
            return Err(ArstError::Config(format!(
                "hard_frame_rate must lie in [0, 1), got {}",
                self.hard_frame_rate
            )));
        }
        Ok(())
    }
}

/// Per-phase feature centroids (`classes x d_feat`, 64-bit).
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseCentroids {
    matrix: Matrix<f64>,
}

impl PhaseCentroids {
    /// Draws centroid coordinates i.i.d. from `scale * N(0, 1)`.
    pub fn generate(spec: &WorkflowSpec, rng: &mut SeededRng) -> Self {
        let mut matrix = Matrix::zeros(spec.classes, spec.d_feat);
        for i in 0..spec.classes {
            for j in 0..spec.d_feat {
                matrix[(i, j)] = spec.centroid_scale * rng.normal();
            }
        }
        PhaseCentroids { matrix }
    }

    /// Centroid of a phase by 0-based index.
    pub fn row(&self, phase0: usize) -> &[f64] {
        self.matrix.row(phase0)
    }

    pub fn matrix(&self) -> &Matrix<f64> {
        &self.matrix
    }
}

/// One dwell length: `min_dwell` plus a geometric excess with mean
/// `mean_dwell - min_dwell`, sampled by inversion.
fn sample_dwell(spec: &WorkflowSpec, rng: &mut SeededRng) -> usize {
    let mean_excess = spec.mean_dwell - spec.min_dwell as f64;
    if mean_excess <= 0.0 {
        return spec.min_dwell;
    }
    let p = 1.0 / (1.0 + mean_excess);
    let u = rng.next_f64_open();
    spec.min_dwell + (u.ln() / (1.0 - p).ln()).floor() as usize
}

/// Samples a phase label path: dwells are always completed, so generation
/// stops at the first dwell boundary at or past `t_target` and the result
/// may overshoot it. Labels are 1-based.
pub fn sample_phase_path(spec: &WorkflowSpec, rng: &mut SeededRng, t_target: usize) -> Vec<u32> {
    let mut labels = Vec::with_capacity(t_target + spec.min_dwell);
    let mut phase = 1usize;
    loop {
        let dwell = sample_dwell(spec, rng);
        labels.extend(std::iter::repeat(phase as u32).take(dwell));
        if labels.len() >= t_target {
            return labels;
        }
        // Next phase from the diagonal-masked transition row; an absorbing
        // phase has no off-diagonal mass and simply dwells again.
        let row = &spec.transition[phase - 1];
        let mut weights = row.clone();
        weights[phase - 1] = 0.0;
        if weights.iter().sum::<f64>() > 0.0 {
            phase = rng.choose_weighted(&weights) + 1;
        }
    }
}

/// Features, labels, and corrupted-frame indices of one generated video.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedVideo {
    /// `T x d_feat` frame features, quantized once to 32-bit.
    pub features: Matrix<f32>,
    /// 1-based phase label per frame (always the true phase).
    pub labels: Vec<u32>,
    /// 0-based indices of corrupted frames.
    pub hard_frames: Vec<usize>,
}

/// Generates one video from three derived substreams of `rng`: stream 0
/// drives the phase path, stream 1 the emission noise, stream 2 the
/// corruption decisions. Emission draws are consumed for every frame, so
/// corruption never shifts the noise of untouched frames.
pub fn gen_video(
    spec: &WorkflowSpec,
    centroids: &PhaseCentroids,
    rng: &SeededRng,
    t_target: usize,
) -> Result<GeneratedVideo> {
    spec.validate()?;
    if t_target < spec.min_dwell {
        return Err(ArstError::Config(format!(
            "t_target {t_target} is below min_dwell {}",
            spec.min_dwell
        )));
    }
    if centroids.matrix.shape() != (spec.classes, spec.d_feat) {
        return Err(ArstError::shape(
            "gen_video centroids",
            centroids.matrix.shape(),
            (spec.classes, spec.d_feat),
        ));
    }
    let mut path_rng = rng.derive(0);
    let mut emission_rng = rng.derive(1);
    let mut corruption_rng = rng.derive(2);

    let labels = sample_phase_path(spec, &mut path_rng, t_target);
    let frames = labels.len();
    let mut features = Matrix::zeros(frames, spec.d_feat);
    let mut hard_frames = Vec::new();
    let mut row_buf = vec![0.0f64; spec.d_feat];

    for t in 0..frames {
        let true0 = labels[t] as usize - 1;
        let centroid = centroids.row(true0);
        for (v, &c) in row_buf.iter_mut().zip(centroid.iter()) {
            *v = c + spec.noise_sigma * emission_rng.normal();
        }
        if corruption_rng.next_f64() < spec.hard_frame_rate {
            hard_frames.push(t);
            match spec.hard_frame_mode {
                HardFrameMode::PureNoise => {
                    for v in row_buf.iter_mut() {
                        *v = spec.centroid_scale * corruption_rng.normal();
                    }
                }
                HardFrameMode::WrongPhaseCentroid => {
                    let offset = corruption_rng.next_below(spec.classes as u64 - 1) as usize;
                    let wrong0 = if offset >= true0 { offset + 1 } else { offset };
                    let wrong = centroids.row(wrong0);
                    for (v, &c) in row_buf.iter_mut().zip(wrong.iter()) {
                        *v = c + spec.noise_sigma * corruption_rng.normal();
                    }
                }
            }
        }
        for (out, &v) in features.row_mut(t).iter_mut().zip(row_buf.iter()) {
            *out = v as f32;
        }
    }

    Ok(GeneratedVideo {
        features,
        labels,
        hard_frames,
    })
}

/// Dataset split tags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl std::fmt::Display for Split {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        })
    }
}

/// One tagged video of a dataset.
#[derive(Debug, Clone)]
pub struct SyntheticVideo {
    pub id: String,
    pub split: Split,
    pub features: Matrix<f32>,
    pub labels: Vec<u32>,
    pub hard_frames: Vec<usize>,
}

/// An in-memory dataset plus the generation inputs that reproduce it.
#[derive(Debug, Clone)]
pub struct SyntheticDataset {
    pub spec: WorkflowSpec,
    pub seed: u64,
    pub centroids: PhaseCentroids,
    pub videos: Vec<SyntheticVideo>,
}

impl SyntheticDataset {
    pub fn split(&self, split: Split) -> impl Iterator<Item = &SyntheticVideo> {
        self.videos.iter().filter(move |v| v.split == split)
    }
}

/// Generates a full dataset. Centroids come from derived stream 0 of the
/// master seed; video `i` (numbered across all splits) uses derived stream
/// `i + 1`, so every video is independent and individually reproducible.
/// Target lengths are drawn uniformly from `t_range` (inclusive).
pub fn gen_dataset(
    spec: &WorkflowSpec,
    seed: u64,
    n_train: usize,
    n_val: usize,
    n_test: usize,
    t_range: (usize, usize),
) -> Result<SyntheticDataset> {
    spec.validate()?;
    let (t_min, t_max) = t_range;
    if t_min > t_max || t_min < spec.min_dwell {
        return Err(ArstError::Config(format!(
            "invalid target length range {t_min}..={t_max} (min_dwell {})",
            spec.min_dwell
        )));
    }
    let master = SeededRng::new(seed);
    let centroids = PhaseCentroids::generate(spec, &mut master.derive(0));

    let mut videos = Vec::with_capacity(n_train + n_val + n_test);
    let plan = [
        (Split::Train, n_train),
        (Split::Val, n_val),
        (Split::Test, n_test),
    ];
    let mut global = 0u64;
    for (split, count) in plan {
        for idx in 0..count {
            let video_rng = master.derive(global + 1);
            let t_target = {
                // Length draw from a separate derived stream so the video's
                // own path/emission/corruption streams stay untouched.
                let mut len_rng = video_rng.derive(3);
                t_min + len_rng.next_below((t_max - t_min + 1) as u64) as usize
            };
            let video = gen_video(spec, &centroids, &video_rng, t_target)?;
            videos.push(SyntheticVideo {
                id: format!("{split}-{idx:03}"),
                split,
                features: video.features,
                labels: video.labels,
                hard_frames: video.hard_frames,
            });
            global += 1;
        }
    }
    Ok(SyntheticDataset {
        spec: spec.clone(),
        seed,
        centroids,
        videos,
    })
}
