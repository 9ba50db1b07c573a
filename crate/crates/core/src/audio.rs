//! WAV loading and rate canonicalization.
//!
//! All analysis runs at 44.1 kHz; [`resample_to_44100`] brings arbitrary
//! input rates to that canonical rate with a windowed-sinc kernel. Sample
//! amplitudes are carried verbatim — no normalization, no DC removal —
//! because relative level structure is the signal under study.

use std::path::Path;

use thiserror::Error;

/// The canonical analysis rate, in Hz.
pub const CANONICAL_RATE: u32 = 44100;

/// Half-width of the windowed-sinc resampling kernel, in input samples
/// (64 taps total).
const KERNEL_HALF: usize = 32;

#[derive(Debug, Error)]
pub enum AudioError {
    #[error("unreadable file {path}: {source}")]
    Unreadable {
        path: String,
        #[source]
        source: hound::Error,
    },
    #[error("non-PCM encoding in {path} (got {format})")]
    NonPcmEncoding { path: String, format: String },
    #[error("multichannel input in {path} ({channels} channels, need mono)")]
    MultichannelInput { path: String, channels: u16 },
    #[error("unsupported bit depth in {path} ({bits} bits, need 16)")]
    UnsupportedBitDepth { path: String, bits: u16 },
    #[error("zero-length audio in {path}")]
    ZeroLengthAudio { path: String },
}

/// Mono audio held in memory: samples in [-1, 1] (full scale 1.0) plus the
/// rate they were sampled at and a label derived from the file stem.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioBuffer {
    pub samples: Vec<f64>,
    pub sample_rate: u32,
    pub source_id: String,
}

impl AudioBuffer {
    pub fn from_samples(samples: Vec<f64>, sample_rate: u32, source_id: impl Into<String>) -> Self {
        assert!(sample_rate > 0, "sample rate must be positive");
        Self { samples, sample_rate, source_id: source_id.into() }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }
}

/// Read a 16-bit PCM mono RIFF/WAVE file.
///
/// Samples are scaled by 1/32768 so +32767 maps just below full scale; the
/// header rate is preserved. Call [`resample_to_44100`] before analysis.
pub fn load_wav(path: impl AsRef<Path>) -> Result<AudioBuffer, AudioError> {
    let path = path.as_ref();
    let path_str = path.display().to_string();
    let reader = hound::WavReader::open(path).map_err(|source| match source {
        hound::Error::Unsupported => AudioError::NonPcmEncoding {
            path: path_str.clone(),
            format: "unsupported encoding".to_string(),
        },
        other => AudioError::Unreadable { path: path_str.clone(), source: other },
    })?;
    let spec = reader.spec();
    if spec.channels != 1 {
        return Err(AudioError::MultichannelInput { path: path_str, channels: spec.channels });
    }
    if spec.sample_format != hound::SampleFormat::Int {
        return Err(AudioError::NonPcmEncoding {
            path: path_str,
            format: "IEEE float".to_string(),
        });
    }
    if spec.bits_per_sample != 16 {
        return Err(AudioError::UnsupportedBitDepth { path: path_str, bits: spec.bits_per_sample });
    }
    let samples: Vec<f64> = reader
        .into_samples::<i16>()
        .collect::<Result<Vec<i16>, _>>()
        .map_err(|source| AudioError::Unreadable { path: path_str.clone(), source })?
        .into_iter()
        .map(|s| f64::from(s) / 32768.0)
        .collect();
    if samples.is_empty() {
        return Err(AudioError::ZeroLengthAudio { path: path_str });
    }
    let source_id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path_str.clone());
    Ok(AudioBuffer { samples, sample_rate: spec.sample_rate, source_id })
}

/// Resample to the canonical 44.1 kHz rate with a 64-tap Blackman-windowed
/// sinc. A buffer already at 44.1 kHz is returned with bit-identical samples.
pub fn resample_to_44100(buf: &AudioBuffer) -> AudioBuffer {
    if buf.sample_rate == CANONICAL_RATE {
        return buf.clone();
    }
    let g = gcd(buf.sample_rate, CANONICAL_RATE);
    // output sample n sits at input position n * step_num / step_den
    let step_num = (buf.sample_rate / g) as u64;
    let step_den = (CANONICAL_RATE / g) as u64;
    let in_len = buf.samples.len() as u64;
    let out_len = ((in_len * step_den + step_num / 2) / step_num) as usize;

    // per-phase tap tables: phase p covers fractional position p / step_den
    let cutoff = (step_den as f64 / step_num as f64).min(1.0);
    let taps = 2 * KERNEL_HALF;
    let mut phases = Vec::with_capacity(step_den as usize);
    for p in 0..step_den {
        let frac = p as f64 / step_den as f64;
        let mut row = Vec::with_capacity(taps);
        for j in 0..taps {
            // tap j multiplies input[i0 - KERNEL_HALF + 1 + j]
            let tau = frac - (j as f64 - (KERNEL_HALF as f64 - 1.0));
            row.push(cutoff * sinc(cutoff * tau) * blackman(tau / KERNEL_HALF as f64));
        }
        phases.push(row);
    }

    let x = &buf.samples;
    let n = x.len() as i64;
    let mut out = Vec::with_capacity(out_len);
    for m in 0..out_len as u64 {
        let pos_num = m * step_num;
        let i0 = (pos_num / step_den) as i64;
        let phase = &phases[(pos_num % step_den) as usize];
        let mut acc = 0.0;
        let base = i0 - (KERNEL_HALF as i64 - 1);
        for (j, &h) in phase.iter().enumerate() {
            let idx = base + j as i64;
            if idx >= 0 && idx < n {
                acc += x[idx as usize] * h;
            }
        }
        out.push(acc);
    }
    AudioBuffer { samples: out, sample_rate: CANONICAL_RATE, source_id: buf.source_id.clone() }
}

fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        1.0
    } else {
        let px = std::f64::consts::PI * x;
        px.sin() / px
    }
}

/// Blackman window over t in [-1, 1].
fn blackman(t: f64) -> f64 {
    if t.abs() > 1.0 {
        return 0.0;
    }
    let pt = std::f64::consts::PI * t;
    0.42 + 0.5 * pt.cos() + 0.08 * (2.0 * pt).cos()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_wav(path: &Path, samples: &[i16], rate: u32, channels: u16) {
        let spec = hound::WavSpec {
            channels,
            sample_rate: rate,
            bits_per_sample: 16,
            sample_format: hound::SampleFormat::Int,
        };
        let mut w = hound::WavWriter::create(path, spec).unwrap();
        for &s in samples {
            w.write_sample(s).unwrap();
        }
        w.finalize().unwrap();
    }

    fn rms(x: &[f64]) -> f64 {
        (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
    }

    #[test]
    fn load_silence_preserves_rate_and_length() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("silence.wav");
        write_wav(&p, &vec![0i16; 22050], 22050, 1);
        let buf = load_wav(&p).unwrap();
        assert_eq!(buf.sample_rate, 22050);
        assert_eq!(buf.len(), 22050);
        assert!(buf.samples.iter().all(|&s| s == 0.0));
        assert_eq!(buf.source_id, "silence");
    }

    #[test]
    fn load_full_scale_stays_below_one() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("full.wav");
        write_wav(&p, &vec![32767i16; 100], 44100, 1);
        let buf = load_wav(&p).unwrap();
        for &s in &buf.samples {
            assert!((s - 0.999969482421875).abs() < 1e-12);
            assert!(s <= 1.0);
        }
    }

    #[test]
    fn load_rejects_stereo() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("stereo.wav");
        write_wav(&p, &vec![0i16; 200], 44100, 2);
        match load_wav(&p) {
            Err(AudioError::MultichannelInput { channels, .. }) => assert_eq!(channels, 2),
            other => panic!("expected multichannel error, got {other:?}"),
        }
    }

    #[test]
    fn load_rejects_float_wav() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("float.wav");
        let spec = hound::WavSpec {
            channels: 1,
            sample_rate: 44100,
            bits_per_sample: 32,
            sample_format: hound::SampleFormat::Float,
        };
        let mut w = hound::WavWriter::create(&p, spec).unwrap();
        for _ in 0..100 {
            w.write_sample(0.1f32).unwrap();
        }
        w.finalize().unwrap();
        assert!(matches!(load_wav(&p), Err(AudioError::NonPcmEncoding { .. })));
    }

    #[test]
    fn load_rejects_zero_length() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("empty.wav");
        write_wav(&p, &[], 44100, 1);
        assert!(matches!(load_wav(&p), Err(AudioError::ZeroLengthAudio { .. })));
    }

    #[test]
    fn load_rejects_missing_file() {
        assert!(matches!(
            load_wav("/nonexistent/nope.wav"),
            Err(AudioError::Unreadable { .. })
        ));
    }

    #[test]
    fn pcm_round_trips_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("ramp.wav");
        let vals: Vec<i16> = (-100..100).map(|v| (v * 300) as i16).collect();
        write_wav(&p, &vals, 44100, 1);
        let buf = load_wav(&p).unwrap();
        for (orig, loaded) in vals.iter().zip(&buf.samples) {
            assert_eq!(f64::from(*orig) / 32768.0, *loaded);
        }
    }

    #[test]
    fn resample_identity_at_canonical_rate() {
        let buf = AudioBuffer::from_samples(vec![0.1, -0.2, 0.3], 44100, "x");
        let out = resample_to_44100(&buf);
        assert_eq!(out.samples, buf.samples);
    }

    #[test]
    fn resample_preserves_duration() {
        let buf = AudioBuffer::from_samples(vec![0.0; 22050], 22050, "x");
        let out = resample_to_44100(&buf);
        assert!((out.len() as i64 - 44100).abs() <= 1, "got {}", out.len());
        assert_eq!(out.sample_rate, 44100);
    }

    #[test]
    fn resample_preserves_midband_amplitude() {
        for freq in [200.0, 1000.0, 8000.0] {
            let sr = 22050u32;
            let x: Vec<f64> = (0..sr)
                .map(|i| 0.5 * (2.0 * std::f64::consts::PI * freq * i as f64 / sr as f64).sin())
                .collect();
            let buf = AudioBuffer::from_samples(x, sr, "tone");
            let out = resample_to_44100(&buf);
            let edge_in = (0.010 * sr as f64) as usize;
            let edge_out = 441;
            let rin = rms(&buf.samples[edge_in..buf.len() - edge_in]);
            let rout = rms(&out.samples[edge_out..out.len() - edge_out]);
            let db = 20.0 * (rout / rin).log10();
            assert!(db.abs() < 0.1, "{freq} Hz level change {db} dB");
        }
    }

    #[test]
    fn resample_from_48k() {
        let sr = 48000u32;
        let x: Vec<f64> = (0..sr)
            .map(|i| 0.5 * (2.0 * std::f64::consts::PI * 1000.0 * i as f64 / sr as f64).sin())
            .collect();
        let buf = AudioBuffer::from_samples(x, sr, "tone48");
        let out = resample_to_44100(&buf);
        assert!((out.len() as i64 - 44100).abs() <= 1);
        let rin = rms(&buf.samples[480..buf.len() - 480]);
        let rout = rms(&out.samples[441..out.len() - 441]);
        let db = 20.0 * (rout / rin).log10();
        assert!(db.abs() < 0.1, "48k->44.1k level change {db} dB");
    }
}
