//! Deterministic synthetic audio for fixtures, tests and benchmarks.
//!
//! "Shout" seconds are loud harmonic signals with a raised fundamental and
//! syllable-rate amplitude modulation; "normal" seconds are quiet noise with
//! a speech-like low-pass spectral tilt.

use std::f64::consts::PI;

use rand::Rng;

/// A pure sine tone.
pub fn tone(freq_hz: f64, duration_s: f64, sample_rate: u32, amplitude: f64) -> Vec<f64> {
    let n = (duration_s * sample_rate as f64).round() as usize;
    (0..n)
        .map(|i| amplitude * (2.0 * PI * freq_hz * i as f64 / sample_rate as f64).sin())
        .collect()
}

/// Loud harmonic signal with a fundamental in 260–380 Hz, eight harmonics with
/// decaying weights and 3–6 Hz amplitude modulation.
pub fn shout<R: Rng>(n_samples: usize, sample_rate: u32, rng: &mut R) -> Vec<f64> {
    let f0 = rng.gen_range(260.0..380.0);
    let mod_hz = rng.gen_range(3.0..6.0);
    let phase: f64 = rng.gen_range(0.0..2.0 * PI);
    let level = rng.gen_range(0.45..0.7);
    let sr = sample_rate as f64;
    (0..n_samples)
        .map(|i| {
            let t = i as f64 / sr;
            let harmonics: f64 = (1..=8)
                .map(|h| (2.0 * PI * f0 * h as f64 * t + phase * h as f64).sin() / h as f64)
                .sum();
            let envelope = 0.75 + 0.25 * (2.0 * PI * mod_hz * t).sin();
            level * envelope * harmonics / 2.0 + rng.gen_range(-0.01..0.01)
        })
        .collect()
}

/// Quiet speech-shaped noise: white noise through a one-pole low-pass filter
/// with slow amplitude modulation.
pub fn normal_speech<R: Rng>(n_samples: usize, sample_rate: u32, rng: &mut R) -> Vec<f64> {
    let level = rng.gen_range(0.03..0.06);
    let mod_hz = rng.gen_range(2.0..4.0);
    let sr = sample_rate as f64;
    let mut state = 0.0;
    (0..n_samples)
        .map(|i| {
            let white: f64 = rng.gen_range(-1.0..1.0);
            state = 0.9 * state + 0.1 * white;
            let envelope = 0.6 + 0.4 * (2.0 * PI * mod_hz * i as f64 / sr).sin().abs();
            level * envelope * state * 4.0
        })
        .collect()
}

/// One clip assembled from labelled seconds (`true` = shout). The final
/// second is extended by `tail_samples` so that frame-aligned feature
/// extraction covers the whole labelled span.
pub fn labelled_clip<R: Rng>(pattern: &[bool], sample_rate: u32, tail_samples: usize, rng: &mut R) -> Vec<f64> {
    let sr = sample_rate as usize;
    let mut out = Vec::with_capacity(pattern.len() * sr + tail_samples);
    for (i, &loud) in pattern.iter().enumerate() {
        let n = if i + 1 == pattern.len() { sr + tail_samples } else { sr };
        if loud {
            out.extend(shout(n, sample_rate, rng));
        } else {
            out.extend(normal_speech(n, sample_rate, rng));
        }
    }
    out
}
