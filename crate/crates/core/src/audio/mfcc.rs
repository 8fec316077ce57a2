use std::f64::consts::PI;
use std::sync::Arc;

use ndarray::Array2;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::AudioError;

/// MFCC front-end parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MfccConfig {
    pub sample_rate_hz: u32,
    pub frame_len_s: f64,
    pub hop_s: f64,
    pub n_mfcc: usize,
    pub n_mels: usize,
    pub fft_size: usize,
    pub preemphasis: f64,
}

impl Default for MfccConfig {
    fn default() -> Self {
        Self {
            sample_rate_hz: 16_000,
            frame_len_s: 0.025,
            hop_s: 0.010,
            n_mfcc: 26,
            n_mels: 40,
            fft_size: 512,
            preemphasis: 0.97,
        }
    }
}

impl MfccConfig {
    pub fn frame_len(&self) -> usize {
        (self.frame_len_s * self.sample_rate_hz as f64).round() as usize
    }

    pub fn hop(&self) -> usize {
        (self.hop_s * self.sample_rate_hz as f64).round() as usize
    }

    pub fn validate(&self) -> Result<(), AudioError> {
        let w = self.frame_len();
        if w == 0 || self.hop() == 0 {
            return Err(AudioError::InvalidConfig("frame length and hop must be positive".into()));
        }
        if w > self.fft_size {
            return Err(AudioError::InvalidConfig("frame longer than the FFT size".into()));
        }
        if self.n_mfcc == 0 || self.n_mfcc > self.n_mels {
            return Err(AudioError::InvalidConfig("need 0 < n_mfcc <= n_mels".into()));
        }
        Ok(())
    }

    /// Number of frames produced for `n_samples` input samples.
    pub fn n_frames(&self, n_samples: usize) -> usize {
        let w = self.frame_len();
        if n_samples < w {
            0
        } else {
            (n_samples - w) / self.hop() + 1
        }
    }
}

pub fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

pub fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

/// Edge and center frequencies of the triangular filters: `n_mels + 2`
/// points equally spaced on the mel scale from 0 Hz to Nyquist.
pub fn mel_points_hz(cfg: &MfccConfig) -> Vec<f64> {
    let top = hz_to_mel(cfg.sample_rate_hz as f64 / 2.0);
    (0..cfg.n_mels + 2)
        .map(|i| mel_to_hz(top * i as f64 / (cfg.n_mels + 1) as f64))
        .collect()
}

/// Center frequency of each mel filter.
pub fn mel_centers_hz(cfg: &MfccConfig) -> Vec<f64> {
    let pts = mel_points_hz(cfg);
    pts[1..=cfg.n_mels].to_vec()
}

/// Triangular filter weights, `n_mels × (fft_size / 2 + 1)`, evaluated at
/// each FFT bin's center frequency. Each triangle peaks at 1.
pub fn mel_filterbank(cfg: &MfccConfig) -> Array2<f64> {
    let n_bins = cfg.fft_size / 2 + 1;
    let pts = mel_points_hz(cfg);
    let bin_hz = cfg.sample_rate_hz as f64 / cfg.fft_size as f64;
    Array2::from_shape_fn((cfg.n_mels, n_bins), |(m, k)| {
        let (lo, mid, hi) = (pts[m], pts[m + 1], pts[m + 2]);
        let f = k as f64 * bin_hz;
        if f <= lo || f >= hi {
            0.0
        } else if f <= mid {
            (f - lo) / (mid - lo)
        } else {
            (hi - f) / (hi - mid)
        }
    })
}

/// Reusable MFCC extractor holding the FFT plan, window and filterbank.
pub struct MfccExtractor {
    cfg: MfccConfig,
    fft: Arc<dyn Fft<f64>>,
    window: Vec<f64>,
    filterbank: Array2<f64>,
    dct: Array2<f64>,
}

impl MfccExtractor {
    pub fn new(cfg: MfccConfig) -> Result<Self, AudioError> {
        cfg.validate()?;
        let w = cfg.frame_len();
        let window = (0..w)
            .map(|n| 0.54 - 0.46 * (2.0 * PI * n as f64 / (w - 1) as f64).cos())
            .collect();
        let fft = FftPlanner::new().plan_fft_forward(cfg.fft_size);
        let filterbank = mel_filterbank(&cfg);
        let m = cfg.n_mels as f64;
        let dct = Array2::from_shape_fn((cfg.n_mfcc, cfg.n_mels), |(k, j)| {
            let scale = if k == 0 { (1.0 / m).sqrt() } else { (2.0 / m).sqrt() };
            scale * (PI * k as f64 * (2 * j + 1) as f64 / (2.0 * m)).cos()
        });
        Ok(Self {
            cfg,
            fft,
            window,
            filterbank,
            dct,
        })
    }

    pub fn config(&self) -> &MfccConfig {
        &self.cfg
    }

    fn check_input(&self, samples: &[f64]) -> Result<usize, AudioError> {
        if samples.iter().any(|s| !s.is_finite()) {
            return Err(AudioError::NonFiniteInput);
        }
        let n = self.cfg.n_frames(samples.len());
        if n == 0 {
            return Err(AudioError::TooShortInput {
                samples: samples.len(),
                needed: self.cfg.frame_len(),
            });
        }
        Ok(n)
    }

    /// Mel filterbank energies (before the log) for every frame,
    /// `n_frames × n_mels`.
    pub fn mel_energies(&self, samples: &[f64]) -> Result<Array2<f64>, AudioError> {
        let n_frames = self.check_input(samples)?;
        let mut out = Array2::zeros((n_frames, self.cfg.n_mels));
        let mut buf = vec![Complex::new(0.0, 0.0); self.cfg.fft_size];
        let mut scratch = vec![Complex::new(0.0, 0.0); self.fft.get_inplace_scratch_len()];
        let mut magnitude = vec![0.0; self.cfg.fft_size / 2 + 1];
        let (w, hop) = (self.cfg.frame_len(), self.cfg.hop());
        for f in 0..n_frames {
            let frame = &samples[f * hop..f * hop + w];
            for (n, slot) in buf.iter_mut().enumerate() {
                let v = if n >= w {
                    0.0
                } else {
                    let emphasized = if n == 0 {
                        frame[0]
                    } else {
                        frame[n] - self.cfg.preemphasis * frame[n - 1]
                    };
                    emphasized * self.window[n]
                };
                *slot = Complex::new(v, 0.0);
            }
            self.fft.process_with_scratch(&mut buf, &mut scratch);
            for (k, m) in magnitude.iter_mut().enumerate() {
                *m = buf[k].norm();
            }
            for (mel, row) in self.filterbank.outer_iter().enumerate() {
                out[[f, mel]] = row.iter().zip(&magnitude).map(|(a, b)| a * b).sum();
            }
        }
        Ok(out)
    }

    /// MFCC matrix, `n_frames × n_mfcc`.
    pub fn extract(&self, samples: &[f64]) -> Result<Array2<f64>, AudioError> {
        let energies = self.mel_energies(samples)?;
        let logs = energies.mapv(|e| e.max(1e-10).ln());
        Ok(logs.dot(&self.dct.t()))
    }
}

/// One-shot MFCC extraction.
pub fn extract_mfcc(samples: &[f64], cfg: &MfccConfig) -> Result<Array2<f64>, AudioError> {
    MfccExtractor::new(cfg.clone())?.extract(samples)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_count() {
        let cfg = MfccConfig::default();
        let m = extract_mfcc(&vec![0.0; 16000], &cfg).unwrap();
        assert_eq!(m.dim(), (98, 26));
        assert!(matches!(
            extract_mfcc(&[0.0; 399], &cfg),
            Err(AudioError::TooShortInput { samples: 399, needed: 400 })
        ));
    }

    #[test]
    fn silent_input_is_dct_of_floor() {
        let cfg = MfccConfig::default();
        let m = extract_mfcc(&vec![0.0; 4000], &cfg).unwrap();
        let floor = 1e-10f64.ln();
        let c0 = floor * (cfg.n_mels as f64).sqrt();
        for row in m.outer_iter() {
            assert!((row[0] - c0).abs() < 1e-9);
            assert!(row.iter().skip(1).all(|v| v.abs() < 1e-9));
        }
    }

    #[test]
    fn filterbank_peaks_at_one() {
        let cfg = MfccConfig::default();
        let fb = mel_filterbank(&cfg);
        for row in fb.outer_iter() {
            let max = row.iter().cloned().fold(0.0, f64::max);
            assert!(max > 0.5 && max <= 1.0);
        }
    }

    #[test]
    fn config_validation() {
        let bad = MfccConfig {
            n_mfcc: 41,
            ..MfccConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = MfccConfig {
            fft_size: 256,
            ..MfccConfig::default()
        };
        assert!(bad.validate().is_err());
    }
}
