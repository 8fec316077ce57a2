//! Audio incivility: MFCC features, a trainable shouting classifier,
//! majority-vote smoothing, and shouting / overlap fractions.

mod blocks;
mod cnn;
mod dataset;
mod mfcc;
mod smooth;
mod wav;

use ndarray::Array2;
use thiserror::Error;

pub use blocks::{make_blocks, standard_scale, FeatureBlock, BLOCK_FRAMES, SCALE_EPS};
pub use cnn::{accuracy, train_shout_model, ShoutArchitecture, ShoutModel, ShoutTrainParams, TrainingMetadata};
pub use dataset::{ShoutClip, ShoutDataset};
pub use mfcc::{extract_mfcc, hz_to_mel, mel_centers_hz, mel_filterbank, mel_points_hz, mel_to_hz, MfccConfig, MfccExtractor};
pub use smooth::{overlap_fraction, runs, shouting_fraction, smooth_segments, Smoothing};
pub use wav::{load_wav, resample_linear, write_wav_mono16};

use crate::tensorfile::TensorFileError;

#[derive(Debug, Error)]
pub enum AudioError {
    #[error("input has {samples} samples, need at least {needed}")]
    TooShortInput { samples: usize, needed: usize },
    #[error("input contains non-finite samples")]
    NonFiniteInput,
    #[error("standard scaling needs at least 2 frames, got {0}")]
    TooFewFrames(usize),
    #[error("invalid MFCC configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid model architecture: {0}")]
    InvalidArchitecture(String),
    #[error("block shape {found:?} does not match expected {expected:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("{blocks} blocks but {labels} labels")]
    LabelCountMismatch { blocks: usize, labels: usize },
    #[error("training labels contain a single class")]
    SingleClassLabels,
    #[error("training loss became non-finite")]
    NonFiniteLoss,
    #[error("smoothing window must be odd with 1 <= min_votes <= window (got {window}, {min_votes})")]
    InvalidSmoothing { window: usize, min_votes: usize },
    #[error("duration must be positive")]
    ZeroDuration,
    #[error("audio decode failed: {0}")]
    Decode(String),
    #[error("io error: {0}")]
    Io(String),
    #[error(transparent)]
    ModelFile(#[from] TensorFileError),
}

/// Scaled one-second feature blocks for a whole recording.
pub fn feature_blocks(samples: &[f64], extractor: &MfccExtractor, video_id: &str) -> Result<Vec<FeatureBlock>, AudioError> {
    let mfcc: Array2<f64> = extractor.extract(samples)?;
    let scaled = standard_scale(&mfcc)?;
    Ok(make_blocks(&scaled, video_id))
}

/// Result of running the shouting detector over one recording.
#[derive(Debug, Clone, PartialEq)]
pub struct ShoutDetection {
    pub probabilities: Vec<f64>,
    pub segments: Vec<(f64, f64)>,
}

/// Per-second shouting probabilities and smoothed shouting segments.
pub fn detect_shouting(
    samples: &[f64],
    extractor: &MfccExtractor,
    model: &ShoutModel,
    smoothing: &Smoothing,
) -> Result<ShoutDetection, AudioError> {
    let blocks = feature_blocks(samples, extractor, "")?;
    let probabilities = model.predict_blocks(&blocks)?;
    let labels: Vec<bool> = probabilities.iter().map(|&p| p >= 0.5).collect();
    Ok(ShoutDetection {
        segments: smoothing.segments(&labels),
        probabilities,
    })
}
