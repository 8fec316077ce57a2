use ndarray::{s, Array2};

use super::AudioError;

/// Scaling guard added to every standard deviation.
pub const SCALE_EPS: f64 = 1e-8;

/// Frames per one-second block at a 10 ms hop.
pub const BLOCK_FRAMES: usize = 100;

/// Per-column standardization: subtract the mean, divide by
/// `population std + 1e-8`. Constant columns become zeros.
pub fn standard_scale(features: &Array2<f64>) -> Result<Array2<f64>, AudioError> {
    let (rows, cols) = features.dim();
    if rows < 2 {
        return Err(AudioError::TooFewFrames(rows));
    }
    let mut out = Array2::zeros((rows, cols));
    for c in 0..cols {
        let col = features.column(c);
        let first = col[0];
        if col.iter().all(|&v| v == first) {
            continue;
        }
        let mean = col.sum() / rows as f64;
        let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / rows as f64;
        let denom = var.sqrt() + SCALE_EPS;
        for (o, v) in out.column_mut(c).iter_mut().zip(col.iter()) {
            *o = (v - mean) / denom;
        }
    }
    Ok(out)
}

/// One second of scaled features.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureBlock {
    pub video_id: String,
    pub block_start_s: f64,
    pub data: Array2<f64>,
}

/// Cuts features into consecutive non-overlapping 100-frame blocks; a
/// trailing partial block is dropped.
pub fn make_blocks(features: &Array2<f64>, video_id: &str) -> Vec<FeatureBlock> {
    let n = features.nrows() / BLOCK_FRAMES;
    (0..n)
        .map(|i| FeatureBlock {
            video_id: video_id.to_string(),
            block_start_s: i as f64,
            data: features.slice(s![i * BLOCK_FRAMES..(i + 1) * BLOCK_FRAMES, ..]).to_owned(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn constant_column_is_zero() {
        let m = array![[0.1, 1.0], [0.1, 2.0], [0.1, 3.0]];
        let s = standard_scale(&m).unwrap();
        assert!(s.column(0).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn hand_computed_values() {
        // column [1, 2, 3]: mean 2, population std sqrt(2/3)
        let m = array![[1.0, 10.0], [2.0, 10.0], [3.0, 16.0]];
        let s = standard_scale(&m).unwrap();
        let sd = (2.0f64 / 3.0).sqrt() + SCALE_EPS;
        assert!((s[[0, 0]] + 1.0 / sd).abs() < 1e-15);
        assert_eq!(s[[1, 0]], 0.0);
        assert!((s[[2, 0]] - 1.0 / sd).abs() < 1e-15);
        // column [10, 10, 16]: mean 12, population std sqrt(8)
        let sd = 8f64.sqrt() + SCALE_EPS;
        assert!((s[[0, 1]] + 2.0 / sd).abs() < 1e-15);
        assert!((s[[2, 1]] - 4.0 / sd).abs() < 1e-15);
    }

    #[test]
    fn too_few_frames() {
        assert!(matches!(standard_scale(&array![[1.0, 2.0]]), Err(AudioError::TooFewFrames(1))));
    }

    #[test]
    fn blocking() {
        assert_eq!(make_blocks(&Array2::zeros((250, 26)), "v").len(), 2);
        assert!(make_blocks(&Array2::zeros((99, 26)), "v").is_empty());
        let m = Array2::from_shape_fn((300, 2), |(r, _)| r as f64);
        let b = make_blocks(&m, "v");
        assert_eq!(b.iter().map(|b| b.block_start_s).collect::<Vec<_>>(), vec![0.0, 1.0, 2.0]);
        assert_eq!(b[1].data[[0, 0]], 100.0);
        assert_eq!(b[2].data.dim(), (100, 2));
    }
}
