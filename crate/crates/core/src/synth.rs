//! Deterministic signal generators for tests, benchmarks, and calibration.

use std::f64::consts::PI;

use crate::audio::AudioBuffer;

pub fn sine(freq_hz: f64, amplitude: f64, secs: f64, sample_rate: u32) -> AudioBuffer {
    let n = (secs * sample_rate as f64).round() as usize;
    let w = 2.0 * PI * freq_hz / sample_rate as f64;
    let samples = (0..n).map(|i| amplitude * (w * i as f64).sin()).collect();
    AudioBuffer::from_samples(samples, sample_rate, format!("sine{freq_hz}"))
}

pub fn square(freq_hz: f64, amplitude: f64, secs: f64, sample_rate: u32) -> AudioBuffer {
    let n = (secs * sample_rate as f64).round() as usize;
    let w = 2.0 * PI * freq_hz / sample_rate as f64;
    let samples = (0..n)
        .map(|i| if (w * i as f64).sin() >= 0.0 { amplitude } else { -amplitude })
        .collect();
    AudioBuffer::from_samples(samples, sample_rate, format!("square{freq_hz}"))
}

pub fn silence(secs: f64, sample_rate: u32) -> AudioBuffer {
    let n = (secs * sample_rate as f64).round() as usize;
    AudioBuffer::from_samples(vec![0.0; n], sample_rate, "silence")
}

/// Harmonic complex with 1/k amplitude rolloff up to 8 kHz, peak-normalized
/// to `amplitude`. Strongly periodic, so it exercises the voiced paths.
pub fn pulse_train(f0_hz: f64, amplitude: f64, secs: f64, sample_rate: u32) -> AudioBuffer {
    let n = (secs * sample_rate as f64).round() as usize;
    let n_harm = (8000.0 / f0_hz).floor() as usize;
    let mut samples = vec![0.0f64; n];
    for k in 1..=n_harm {
        let w = 2.0 * PI * f0_hz * k as f64 / sample_rate as f64;
        let a = 1.0 / k as f64;
        for (i, s) in samples.iter_mut().enumerate() {
            *s += a * (w * i as f64).sin();
        }
    }
    let peak = samples.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    if peak > 0.0 {
        let scale = amplitude / peak;
        for s in &mut samples {
            *s *= scale;
        }
    }
    AudioBuffer::from_samples(samples, sample_rate, format!("pulse{f0_hz}"))
}

/// Uniform white noise in [-amplitude, amplitude] from a fixed seed.
pub fn white_noise(amplitude: f64, secs: f64, sample_rate: u32, seed: u64) -> AudioBuffer {
    let n = (secs * sample_rate as f64).round() as usize;
    let mut rng = SplitMix64::new(seed);
    let samples = (0..n).map(|_| amplitude * (2.0 * rng.next_f64() - 1.0)).collect();
    AudioBuffer::from_samples(samples, sample_rate, format!("noise{seed}"))
}

/// Tiny deterministic RNG (SplitMix64), so fixtures never depend on an
/// external crate's stream ordering.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1).
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Uniform in [lo, hi).
    pub fn range_f64(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }
}
