use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use super::AudioError;

/// Reads a 16/24/32-bit integer or 32-bit float WAV file, downmixes to mono by
/// averaging channels and resamples linearly to `target_rate`.
pub fn load_wav(path: &Path, target_rate: u32) -> Result<Vec<f64>, AudioError> {
    let reader = WavReader::open(path).map_err(|e| AudioError::Decode(format!("{}: {e}", path.display())))?;
    let spec = reader.spec();
    let decode = |e: hound::Error| AudioError::Decode(format!("{}: {e}", path.display()));
    let interleaved: Vec<f64> = match spec.sample_format {
        SampleFormat::Float => reader
            .into_samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<Result<_, _>>()
            .map_err(decode)?,
        SampleFormat::Int => {
            let scale = 1.0 / (1u64 << (spec.bits_per_sample - 1)) as f64;
            reader
                .into_samples::<i32>()
                .map(|s| s.map(|v| v as f64 * scale))
                .collect::<Result<_, _>>()
                .map_err(decode)?
        }
    };
    let channels = usize::from(spec.channels.max(1));
    let mono: Vec<f64> = interleaved
        .chunks_exact(channels)
        .map(|frame| frame.iter().sum::<f64>() / channels as f64)
        .collect();
    Ok(resample_linear(&mono, spec.sample_rate, target_rate))
}

/// Linear-interpolation resampling. Output sample `j` sits at input position
/// `j * from / to`.
pub fn resample_linear(samples: &[f64], from_rate: u32, to_rate: u32) -> Vec<f64> {
    if from_rate == to_rate || samples.is_empty() {
        return samples.to_vec();
    }
    let ratio = from_rate as f64 / to_rate as f64;
    let n_out = ((samples.len() - 1) as f64 / ratio).floor() as usize + 1;
    (0..n_out)
        .map(|j| {
            let pos = j as f64 * ratio;
            let i = pos.floor() as usize;
            let frac = pos - i as f64;
            match samples.get(i + 1) {
                Some(&next) => samples[i] + frac * (next - samples[i]),
                None => samples[i],
            }
        })
        .collect()
}

/// Writes mono 16-bit PCM, clipping to [-1, 1].
pub fn write_wav_mono16(path: &Path, samples: &[f64], sample_rate: u32) -> Result<(), AudioError> {
    let spec = WavSpec {
        channels: 1,
        sample_rate,
        bits_per_sample: 16,
        sample_format: SampleFormat::Int,
    };
    let io = |e: hound::Error| AudioError::Io(format!("{}: {e}", path.display()));
    let mut w = WavWriter::create(path, spec).map_err(io)?;
    for &s in samples {
        w.write_sample((s.clamp(-1.0, 1.0) * 32767.0).round() as i16).map_err(io)?;
    }
    w.finalize().map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resampling() {
        assert_eq!(resample_linear(&[0.0, 1.0, 2.0, 3.0], 2, 4), vec![0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0]);
        assert_eq!(resample_linear(&[0.0, 1.0, 2.0, 3.0, 4.0], 4, 2), vec![0.0, 2.0, 4.0]);
        assert_eq!(resample_linear(&[1.0, 2.0], 8, 8), vec![1.0, 2.0]);
    }

    #[test]
    fn stereo_downmix_and_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.wav");
        let spec = WavSpec {
            channels: 2,
            sample_rate: 16000,
            bits_per_sample: 16,
            sample_format: SampleFormat::Int,
        };
        let mut w = WavWriter::create(&path, spec).unwrap();
        for _ in 0..10 {
            w.write_sample(16384i16).unwrap();
            w.write_sample(0i16).unwrap();
        }
        w.finalize().unwrap();
        let mono = load_wav(&path, 16000).unwrap();
        assert_eq!(mono, vec![0.25; 10]);

        let p2 = dir.path().join("m.wav");
        write_wav_mono16(&p2, &[0.5, -0.5, 2.0], 8000).unwrap();
        let back = load_wav(&p2, 8000).unwrap();
        assert!((back[0] - 0.5).abs() < 1e-4 && (back[2] - 32767.0 / 32768.0).abs() < 1e-12);
        assert!(matches!(load_wav(&dir.path().join("none.wav"), 16000), Err(AudioError::Decode(_))));
    }
}
