//! Phonatory cycle detection and cycle-synchronous metrics.
//!
//! Cycle boundaries come from positive-going zero crossings of the
//! leaky-integrated, high-passed waveform after removing a short sliding
//! mean. The integrator x_n = y_n + alpha x_{n-1} (alpha = 0.999 at
//! 44.1 kHz) emphasizes the fundamental so one crossing fires per glottal
//! period; the 50 Hz second-order Butterworth high-pass ahead of it keeps
//! the integrator from drifting. Crest factor and SPL are computed on the
//! original, unfiltered samples of each cycle's span.

use thiserror::Error;

use crate::audio::{AudioBuffer, CANONICAL_RATE};
use crate::dsp::{leaky_integrate_samples, remove_sliding_mean, Biquad};

#[derive(Debug, Error, PartialEq)]
pub enum CycleError {
    #[error("silent cycle (all-zero samples)")]
    SilentCycle,
    #[error("cycle too short ({0} samples, need at least 2)")]
    TooShort(usize),
}

/// Tuning for the cycle detector and its voicing gate.
#[derive(Debug, Clone, PartialEq)]
pub struct VoicingConfig {
    /// Accepted fundamental range in Hz.
    pub f0_band_hz: (f64, f64),
    /// Maximum relative period change between adjacent cycles in a run.
    pub max_jump: f64,
    /// Minimum number of consecutive compatible cycles for a voiced run.
    pub min_run: usize,
    /// Integrator leak constant.
    pub alpha: f64,
    /// High-pass cutoff ahead of the integrator, Hz.
    pub highpass_hz: f64,
    /// Sliding-mean window for zero-crossing stabilization, seconds.
    pub mean_window_s: f64,
    /// Added to 20 log10(rms re full scale) to place levels on the map axis.
    pub spl_offset_db: f64,
}

impl Default for VoicingConfig {
    fn default() -> Self {
        Self {
            f0_band_hz: (55.0, 880.0),
            max_jump: 0.25,
            min_run: 3,
            alpha: 0.999,
            highpass_hz: 50.0,
            mean_window_s: 0.046,
            spl_offset_db: 100.0,
        }
    }
}

/// One detected phonatory cycle. `cpps_db` and `sb_db` stay `None` until a
/// metric frame is attached (see `frames::attach_frames_to_cycles`).
#[derive(Debug, Clone, PartialEq)]
pub struct CycleRecord {
    pub start_sample: usize,
    pub length_samples: usize,
    pub f0_hz: f64,
    pub spl_db: f64,
    pub crest: f64,
    pub cpps_db: Option<f64>,
    pub sb_db: Option<f64>,
}

impl CycleRecord {
    pub fn midpoint_s(&self, sample_rate: u32) -> f64 {
        (self.start_sample as f64 + self.length_samples as f64 / 2.0) / sample_rate as f64
    }
}

/// Second-order Butterworth high-pass at 50 Hz, applied once, causally.
pub fn highpass_50hz(buf: &AudioBuffer) -> AudioBuffer {
    highpass(buf, 50.0)
}

fn highpass(buf: &AudioBuffer, cutoff_hz: f64) -> AudioBuffer {
    let mut filter = Biquad::butterworth_highpass(cutoff_hz, buf.sample_rate as f64);
    AudioBuffer {
        samples: filter.process_buffer(&buf.samples),
        sample_rate: buf.sample_rate,
        source_id: buf.source_id.clone(),
    }
}

/// The recurrence x_n = y_n + alpha x_{n-1} with x_{-1} = 0.
pub fn leaky_integrate(buf: &AudioBuffer, alpha: f64) -> AudioBuffer {
    AudioBuffer {
        samples: leaky_integrate_samples(&buf.samples, alpha),
        sample_rate: buf.sample_rate,
        source_id: buf.source_id.clone(),
    }
}

/// SPL (dB re full scale, plus the configured offset) and crest factor of
/// one cycle's samples.
pub fn compute_cycle_metrics(
    samples: &[f64],
    spl_offset_db: f64,
) -> Result<(f64, f64), CycleError> {
    if samples.len() < 2 {
        return Err(CycleError::TooShort(samples.len()));
    }
    let mut peak = 0.0f64;
    let mut sumsq = 0.0f64;
    for &x in samples {
        peak = peak.max(x.abs());
        sumsq += x * x;
    }
    if sumsq == 0.0 {
        return Err(CycleError::SilentCycle);
    }
    let rms = (sumsq / samples.len() as f64).sqrt();
    Ok((20.0 * rms.log10() + spl_offset_db, peak / rms))
}

/// Detect phonatory cycles in a canonical-rate buffer.
///
/// Candidate boundaries are positive-going zero crossings of the
/// mean-removed integrated signal; the sliding mean is only defined where
/// its full window fits, so the first and last half-window of the buffer
/// produce no boundaries. Candidates whose implied f0 falls outside the
/// configured band are dropped, and surviving candidates are gated into
/// runs: a run breaks where cycles stop being time-contiguous or where the
/// period jumps by more than `max_jump`. Runs shorter than `min_run` are
/// discarded. Silence yields an empty sequence.
pub fn detect_cycles(buf: &AudioBuffer, cfg: &VoicingConfig) -> Vec<CycleRecord> {
    assert_eq!(
        buf.sample_rate, CANONICAL_RATE,
        "cycle detection expects the canonical rate; resample first"
    );
    let sr = buf.sample_rate as f64;

    let conditioned = leaky_integrate(&highpass(buf, cfg.highpass_hz), cfg.alpha);
    let window = {
        let w = (cfg.mean_window_s * sr).round() as usize;
        w | 1 // odd, so the window centers on a sample
    };
    let (offset, detrended) = remove_sliding_mean(&conditioned.samples, window);
    if detrended.len() < 2 {
        return Vec::new();
    }

    let mut boundaries = Vec::new();
    for i in 1..detrended.len() {
        if detrended[i - 1] < 0.0 && detrended[i] >= 0.0 {
            boundaries.push(offset + i);
        }
    }

    let mut cycles = Vec::new();
    let mut run: Vec<(usize, usize)> = Vec::new();
    let flush = |run: &mut Vec<(usize, usize)>, cycles: &mut Vec<CycleRecord>| {
        if run.len() >= cfg.min_run {
            for &(start, len) in run.iter() {
                let span = &buf.samples[start..start + len];
                // an all-zero span cannot carry SPL/crest; skip it
                if let Ok((spl_db, crest)) = compute_cycle_metrics(span, cfg.spl_offset_db) {
                    cycles.push(CycleRecord {
                        start_sample: start,
                        length_samples: len,
                        f0_hz: sr / len as f64,
                        spl_db,
                        crest,
                        cpps_db: None,
                        sb_db: None,
                    });
                }
            }
        }
        run.clear();
    };

    for pair in boundaries.windows(2) {
        let (start, len) = (pair[0], pair[1] - pair[0]);
        let f0 = sr / len as f64;
        if f0 < cfg.f0_band_hz.0 || f0 > cfg.f0_band_hz.1 {
            flush(&mut run, &mut cycles);
            continue;
        }
        if let Some(&(prev_start, prev_len)) = run.last() {
            let contiguous = prev_start + prev_len == start;
            let ratio = len as f64 / prev_len as f64;
            let jump = ratio > 1.0 + cfg.max_jump || ratio < 1.0 / (1.0 + cfg.max_jump);
            if !contiguous || jump {
                flush(&mut run, &mut cycles);
            }
        }
        run.push((start, len));
    }
    flush(&mut run, &mut cycles);
    cycles
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;

    #[test]
    fn silence_yields_no_cycles() {
        let buf = synth::silence(2.0, CANONICAL_RATE);
        assert!(detect_cycles(&buf, &VoicingConfig::default()).is_empty());
    }

    #[test]
    fn sine_110hz_cycles_are_dense_and_in_tune() {
        let buf = synth::sine(110.0, 0.3, 2.0, CANONICAL_RATE);
        let cycles = detect_cycles(&buf, &VoicingConfig::default());
        assert!(cycles.len() >= 190, "only {} cycles", cycles.len());
        for c in &cycles {
            assert!(
                (c.f0_hz - 110.0).abs() <= 2.0,
                "cycle at {} has f0 {}",
                c.start_sample,
                c.f0_hz
            );
        }
    }

    #[test]
    fn subsonic_sine_yields_no_cycles() {
        let buf = synth::sine(40.0, 0.5, 2.0, CANONICAL_RATE);
        assert!(detect_cycles(&buf, &VoicingConfig::default()).is_empty());
    }

    #[test]
    fn cycles_are_ordered_and_non_overlapping() {
        let buf = synth::pulse_train(150.0, 0.3, 2.0, CANONICAL_RATE);
        let cycles = detect_cycles(&buf, &VoicingConfig::default());
        assert!(!cycles.is_empty());
        for pair in cycles.windows(2) {
            assert!(pair[0].start_sample + pair[0].length_samples <= pair[1].start_sample);
        }
    }

    #[test]
    fn detection_is_deterministic() {
        let buf = synth::pulse_train(220.0, 0.3, 1.0, CANONICAL_RATE);
        let a = detect_cycles(&buf, &VoicingConfig::default());
        let b = detect_cycles(&buf, &VoicingConfig::default());
        assert_eq!(a, b);
    }

    #[test]
    fn crest_of_sine_cycle_is_sqrt2() {
        let buf = synth::sine(110.0, 0.4, 2.0, CANONICAL_RATE);
        let cycles = detect_cycles(&buf, &VoicingConfig::default());
        for c in &cycles {
            assert!((c.crest - std::f64::consts::SQRT_2).abs() < 0.01, "crest {}", c.crest);
        }
    }

    #[test]
    fn crest_of_square_period_is_exactly_one() {
        // one 200-sample period of +/-0.5
        let mut period = vec![0.5; 100];
        period.extend(vec![-0.5; 100]);
        let (_, crest) = compute_cycle_metrics(&period, 100.0).unwrap();
        assert_eq!(crest, 1.0);
    }

    #[test]
    fn spl_of_full_scale_sine() {
        let buf = synth::sine(110.0, 1.0, 1.0, CANONICAL_RATE);
        let (spl, _) = compute_cycle_metrics(&buf.samples, 100.0).unwrap();
        assert!((spl - 96.99).abs() < 0.05, "spl {spl}");
    }

    #[test]
    fn silent_cycle_is_an_error() {
        assert_eq!(compute_cycle_metrics(&[0.0; 64], 100.0), Err(CycleError::SilentCycle));
        assert_eq!(compute_cycle_metrics(&[0.5], 100.0), Err(CycleError::TooShort(1)));
    }

    #[test]
    fn gain_scaling_shifts_spl_only() {
        let buf = synth::sine(110.0, 0.05, 1.0, CANONICAL_RATE);
        let cfg = VoicingConfig::default();
        let base = detect_cycles(&buf, &cfg);
        assert!(!base.is_empty());
        for g in [0.1f64, 10.0] {
            let scaled = AudioBuffer::from_samples(
                buf.samples.iter().map(|&s| s * g).collect(),
                CANONICAL_RATE,
                "scaled",
            );
            let got = detect_cycles(&scaled, &cfg);
            assert_eq!(base.len(), got.len());
            let shift = 20.0 * g.log10();
            for (a, b) in base.iter().zip(&got) {
                assert_eq!(a.start_sample, b.start_sample);
                assert_eq!(a.length_samples, b.length_samples);
                assert!((b.crest - a.crest).abs() < 1e-9);
                assert!((b.spl_db - a.spl_db - shift).abs() < 1e-9);
            }
        }
    }
}
