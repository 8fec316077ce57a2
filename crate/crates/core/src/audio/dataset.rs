use std::path::{Path, PathBuf};

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use super::{feature_blocks, load_wav, AudioError, MfccExtractor};

/// One labelled recording of a shouting training set.
#[derive(Debug, Clone, PartialEq)]
pub struct ShoutClip {
    pub name: String,
    pub blocks: Vec<Array2<f64>>,
    pub labels: Vec<bool>,
}

/// Labelled clips read from a directory holding WAV files and a
/// `labels.csv` with the header `file,labels`, where `labels` is a string
/// of `0`/`1` characters, one per second of audio (`1` = shouting).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ShoutDataset {
    pub clips: Vec<ShoutClip>,
}

#[derive(Deserialize)]
struct LabelRow {
    file: String,
    labels: String,
}

fn parse_labels(s: &str, row: usize) -> Result<Vec<bool>, AudioError> {
    s.trim()
        .chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(AudioError::Decode(format!("labels.csv row {row}: label must be 0 or 1, got `{c}`"))),
        })
        .collect()
}

impl ShoutDataset {
    pub fn load(dir: &Path, extractor: &MfccExtractor) -> Result<Self, AudioError> {
        let labels_path = dir.join("labels.csv");
        let text = std::fs::read_to_string(&labels_path).map_err(|e| AudioError::Io(format!("{}: {e}", labels_path.display())))?;
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        let mut clips = Vec::new();
        for (i, row) in reader.deserialize::<LabelRow>().enumerate() {
            let row = row.map_err(|e| AudioError::Decode(format!("labels.csv row {}: {e}", i + 1)))?;
            let labels = parse_labels(&row.labels, i + 1)?;
            let path: PathBuf = dir.join(&row.file);
            let samples = load_wav(&path, extractor.config().sample_rate_hz)?;
            let blocks = feature_blocks(&samples, extractor, &row.file)?;
            if blocks.len() != labels.len() {
                return Err(AudioError::LabelCountMismatch {
                    blocks: blocks.len(),
                    labels: labels.len(),
                });
            }
            clips.push(ShoutClip {
                name: row.file,
                blocks: blocks.into_iter().map(|b| b.data).collect(),
                labels,
            });
        }
        Ok(Self { clips })
    }

    /// Splits whole clips (never seconds of one clip) into train and test
    /// sets after a seeded shuffle. At least one clip lands in each set
    /// when there are two or more.
    pub fn split(&self, test_fraction: f64, seed: u64) -> (ShoutDataset, ShoutDataset) {
        let mut order: Vec<usize> = (0..self.clips.len()).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let n = self.clips.len();
        let mut n_test = (n as f64 * test_fraction).round() as usize;
        if n >= 2 {
            n_test = n_test.clamp(1, n - 1);
        }
        let pick = |ids: &[usize]| {
            let mut ids = ids.to_vec();
            ids.sort_unstable();
            ShoutDataset {
                clips: ids.into_iter().map(|i| self.clips[i].clone()).collect(),
            }
        };
        (pick(&order[n_test..]), pick(&order[..n_test]))
    }

    /// All blocks and labels, clip by clip.
    pub fn flatten(&self) -> (Vec<Array2<f64>>, Vec<bool>) {
        let blocks = self.clips.iter().flat_map(|c| c.blocks.iter().cloned()).collect();
        let labels = self.clips.iter().flat_map(|c| c.labels.iter().copied()).collect();
        (blocks, labels)
    }
}
