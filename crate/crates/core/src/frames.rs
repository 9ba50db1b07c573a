//! Frame-based metrics: spectrum balance and smoothed cepstral peak
//! prominence, plus attachment of frame values to detected cycles.
//!
//! Frames are 23 ms Hann windows hopped every 10 ms and zero-padded to the
//! FFT size. Spectrum balance is the high/low band power ratio
//! 10 log10(W>2kHz / W<1.5kHz), smoothed over time by a 4th-order
//! Butterworth low-pass running at the frame rate. CPPs follows the
//! smoothed cepstral-peak-prominence recipe: dB power spectrum, real
//! cepstrum, per-bin one-pole smoothing at 16 Hz across frames, 7-bin
//! quefrency averaging, then peak height above a least-squares regression
//! line over the search range. No peak interpolation anywhere.

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;
use thiserror::Error;

use crate::audio::AudioBuffer;
use crate::cycles::CycleRecord;
use crate::dsp::LowpassCascade4;

/// Lower edge of the CPPs peak search, Hz (longest admissible period).
const CPPS_SEARCH_F_LO: f64 = 55.0;
/// Upper edge of the CPPs peak search, Hz (shortest admissible period).
const CPPS_SEARCH_F_HI: f64 = 880.0;
/// Power floor for log-spectrum and log-cepstrum arguments.
const POWER_FLOOR: f64 = 1e-30;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("invalid frame config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameConfig {
    pub frame_len_s: f64,
    pub hop_s: f64,
    pub fft_size: usize,
    pub cepstrum_bins: usize,
    /// Cutoff of the per-bin one-pole cepstrum smoother, Hz at frame rate.
    pub cpps_smooth_cutoff_hz: f64,
    /// Width of the centered quefrency moving average (odd).
    pub cpps_quefrency_avg_bins: usize,
    /// Low band for spectrum balance: (0, this] Hz, DC excluded.
    pub sb_low_band_hz: f64,
    /// High band for spectrum balance: (this, nyquist] Hz.
    pub sb_high_band_hz: f64,
    /// Cutoff of the 4th-order low-pass on the SB stream, Hz at frame rate.
    pub sb_smooth_cutoff_hz: f64,
}

impl Default for FrameConfig {
    fn default() -> Self {
        Self {
            frame_len_s: 0.023,
            hop_s: 0.010,
            fft_size: 2048,
            cepstrum_bins: 512,
            cpps_smooth_cutoff_hz: 16.0,
            cpps_quefrency_avg_bins: 7,
            sb_low_band_hz: 1500.0,
            sb_high_band_hz: 2000.0,
            sb_smooth_cutoff_hz: 50.0,
        }
    }
}

impl FrameConfig {
    pub fn frame_len(&self, sample_rate: u32) -> usize {
        (self.frame_len_s * sample_rate as f64).round() as usize
    }

    pub fn hop(&self, sample_rate: u32) -> usize {
        (self.hop_s * sample_rate as f64).round() as usize
    }

    pub fn frame_rate(&self, sample_rate: u32) -> f64 {
        sample_rate as f64 / self.hop(sample_rate) as f64
    }

    pub fn validate(&self, sample_rate: u32) -> Result<(), MetricsError> {
        let frame_len = self.frame_len(sample_rate);
        if frame_len < 2 {
            return Err(MetricsError::InvalidConfig("frame shorter than 2 samples".into()));
        }
        if frame_len > self.fft_size {
            return Err(MetricsError::InvalidConfig(format!(
                "frame length {frame_len} exceeds fft size {}",
                self.fft_size
            )));
        }
        if self.cepstrum_bins > self.fft_size / 4 {
            return Err(MetricsError::InvalidConfig(format!(
                "cepstrum bins {} exceed fft_size/4 = {}",
                self.cepstrum_bins,
                self.fft_size / 4
            )));
        }
        if self.cpps_quefrency_avg_bins % 2 == 0 {
            return Err(MetricsError::InvalidConfig("quefrency average width must be odd".into()));
        }
        if self.hop(sample_rate) == 0 {
            return Err(MetricsError::InvalidConfig("hop must be at least one sample".into()));
        }
        Ok(())
    }
}

/// One analysis frame's metric values, stamped at the frame center.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricFrame {
    pub center_s: f64,
    pub sb_db: f64,
    pub cpps_db: f64,
}

/// Start offsets of all frames that lie fully inside the buffer.
pub fn frame_offsets(n_samples: usize, cfg: &FrameConfig, sample_rate: u32) -> Vec<usize> {
    let frame_len = cfg.frame_len(sample_rate);
    let hop = cfg.hop(sample_rate);
    if n_samples < frame_len {
        return Vec::new();
    }
    (0..=(n_samples - frame_len) / hop).map(|k| k * hop).collect()
}

/// Per-bin one-pole smoothing plus quefrency averaging of dB cepstra.
#[derive(Debug, Clone)]
pub struct CppsSmoother {
    beta: f64,
    half_width: usize,
    state: Option<Vec<f64>>,
}

impl CppsSmoother {
    pub fn new(cutoff_hz: f64, frame_rate: f64, quefrency_avg_bins: usize) -> Self {
        Self {
            beta: (-2.0 * std::f64::consts::PI * cutoff_hz / frame_rate).exp(),
            half_width: quefrency_avg_bins / 2,
            state: None,
        }
    }

    /// Feed one raw dB cepstrum; returns the temporally smoothed,
    /// quefrency-averaged cepstrum. The first frame warm-starts the state.
    pub fn step(&mut self, raw_db: &[f64]) -> Vec<f64> {
        match self.state.as_mut() {
            Some(state) => {
                for (s, &r) in state.iter_mut().zip(raw_db) {
                    *s = (1.0 - self.beta) * r + self.beta * *s;
                }
            }
            None => self.state = Some(raw_db.to_vec()),
        }
        moving_average(self.state.as_ref().unwrap(), self.half_width)
    }
}

/// Centered moving average; edge bins average over the neighbors available.
fn moving_average(values: &[f64], half_width: usize) -> Vec<f64> {
    let n = values.len();
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(half_width);
            let hi = (i + half_width + 1).min(n);
            values[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect()
}

/// Height of the maximum over `lo..=hi` above a least-squares line fitted
/// across the same range. All-equal input gives exactly zero. Ties go to
/// the lowest bin; no interpolation.
pub fn peak_prominence(values: &[f64], lo: usize, hi: usize) -> f64 {
    debug_assert!(lo <= hi && hi < values.len());
    let seg = &values[lo..=hi];
    let n = seg.len() as f64;
    let (mut peak_idx, mut peak) = (0usize, f64::NEG_INFINITY);
    let (mut sum_y, mut sum_xy) = (0.0, 0.0);
    let mean_x = (n - 1.0) / 2.0;
    for (i, &v) in seg.iter().enumerate() {
        if v > peak {
            peak = v;
            peak_idx = i;
        }
        sum_y += v;
        sum_xy += (i as f64 - mean_x) * v;
    }
    let mean_y = sum_y / n;
    let sxx = n * (n * n - 1.0) / 12.0; // sum of (x - mean_x)^2 for x = 0..n
    let slope = if sxx > 0.0 { sum_xy / sxx } else { 0.0 };
    let baseline = mean_y + slope * (peak_idx as f64 - mean_x);
    peak - baseline
}

/// Warm-started 4th-order Butterworth low-pass over the SB value stream.
#[derive(Debug, Clone)]
pub struct SbSmoother {
    cascade: LowpassCascade4,
    primed: bool,
}

impl SbSmoother {
    pub fn new(cutoff_hz: f64, frame_rate: f64) -> Self {
        Self { cascade: LowpassCascade4::new(cutoff_hz, frame_rate), primed: false }
    }

    pub fn step(&mut self, value: f64) -> f64 {
        if !self.primed {
            self.cascade.prime(value);
            self.primed = true;
        }
        self.cascade.process(value)
    }
}

/// Shared FFT plans and scratch space for per-frame analysis.
pub struct FrameMetricsEngine {
    cfg: FrameConfig,
    sample_rate: u32,
    frame_len: usize,
    window: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    search_lo: usize,
    search_hi: usize,
    scratch: Vec<Complex<f64>>,
}

impl FrameMetricsEngine {
    pub fn new(cfg: FrameConfig, sample_rate: u32) -> Result<Self, MetricsError> {
        cfg.validate(sample_rate)?;
        let frame_len = cfg.frame_len(sample_rate);
        // periodic Hann
        let window = (0..frame_len)
            .map(|i| {
                0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / frame_len as f64).cos()
            })
            .collect();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(cfg.fft_size);
        let inverse = planner.plan_fft_inverse(cfg.fft_size);
        let search_lo = (sample_rate as f64 / CPPS_SEARCH_F_HI).floor() as usize;
        let search_hi =
            ((sample_rate as f64 / CPPS_SEARCH_F_LO).floor() as usize).min(cfg.cepstrum_bins - 1);
        if search_lo >= search_hi {
            return Err(MetricsError::InvalidConfig(
                "cepstrum too short for the peak search range".into(),
            ));
        }
        let scratch = vec![Complex::default(); cfg.fft_size];
        Ok(Self {
            cfg,
            sample_rate,
            frame_len,
            window,
            forward,
            inverse,
            search_lo,
            search_hi,
            scratch,
        })
    }

    pub fn config(&self) -> &FrameConfig {
        &self.cfg
    }

    pub fn search_range(&self) -> (usize, usize) {
        (self.search_lo, self.search_hi)
    }

    /// Hann-window the frame starting at `offset` and zero-pad to fft size.
    pub fn window_frame(&self, samples: &[f64], offset: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.cfg.fft_size];
        for (i, w) in self.window.iter().enumerate() {
            out[i] = samples[offset + i] * w;
        }
        out
    }

    fn power_spectrum(&mut self, windowed: &[f64]) -> Vec<f64> {
        debug_assert_eq!(windowed.len(), self.cfg.fft_size);
        for (slot, &x) in self.scratch.iter_mut().zip(windowed) {
            *slot = Complex::new(x, 0.0);
        }
        self.forward.process(&mut self.scratch);
        self.scratch.iter().map(|c| c.norm_sqr()).collect()
    }

    /// Raw (per-frame) spectrum balance in dB. Both band powers get a floor
    /// proportional to the frame energy, so silence gives 0 dB and the
    /// value is invariant under uniform gain.
    pub fn spectrum_balance(&mut self, windowed: &[f64]) -> f64 {
        let power = self.power_spectrum(windowed);
        let n = self.cfg.fft_size;
        let hz_per_bin = self.sample_rate as f64 / n as f64;
        let mut low = 0.0;
        let mut high = 0.0;
        for (k, &p) in power.iter().enumerate().take(n / 2 + 1).skip(1) {
            let f = k as f64 * hz_per_bin;
            if f < self.cfg.sb_low_band_hz {
                low += p;
            } else if f > self.cfg.sb_high_band_hz {
                high += p;
            }
        }
        let energy: f64 = windowed.iter().map(|x| x * x).sum();
        let floor = 1e-12 * (energy + POWER_FLOOR);
        10.0 * ((high + floor) / (low + floor)).log10()
    }

    /// Raw dB cepstrum of one windowed frame: magnitude of the real
    /// cepstrum of the dB power spectrum, expressed as 10 log10.
    pub fn raw_cepstrum_db(&mut self, windowed: &[f64]) -> Vec<f64> {
        let power = self.power_spectrum(windowed);
        let n = self.cfg.fft_size;
        for (slot, &p) in self.scratch.iter_mut().zip(&power) {
            *slot = Complex::new(10.0 * p.max(POWER_FLOOR).log10(), 0.0);
        }
        self.inverse.process(&mut self.scratch);
        let inv_n = 1.0 / n as f64;
        self.scratch
            .iter()
            .take(self.cfg.cepstrum_bins)
            .map(|c| 10.0 * (c.re * inv_n).abs().max(POWER_FLOOR).log10())
            .collect()
    }

    /// Per-frame cepstral peak prominence without any smoothing; the value
    /// the smoothed pipeline converges to on stationary input.
    pub fn raw_cpp(&mut self, windowed: &[f64]) -> f64 {
        let cep = self.raw_cepstrum_db(windowed);
        peak_prominence(&cep, self.search_lo, self.search_hi)
    }

    /// Run the full frame pipeline over a canonical-rate buffer: raw SB and
    /// cepstra per frame, then the serial smoothing passes.
    pub fn analyze(&mut self, buf: &AudioBuffer) -> Vec<MetricFrame> {
        assert_eq!(buf.sample_rate, self.sample_rate, "engine built for a different rate");
        let offsets = frame_offsets(buf.len(), &self.cfg, self.sample_rate);
        let frame_rate = self.cfg.frame_rate(self.sample_rate);
        let mut cpps_smoother = CppsSmoother::new(
            self.cfg.cpps_smooth_cutoff_hz,
            frame_rate,
            self.cfg.cpps_quefrency_avg_bins,
        );
        let mut sb_smoother = SbSmoother::new(self.cfg.sb_smooth_cutoff_hz, frame_rate);
        let half_frame = self.frame_len as f64 / 2.0;
        let mut out = Vec::with_capacity(offsets.len());
        for offset in offsets {
            let windowed = self.window_frame(&buf.samples, offset);
            let sb_raw = self.spectrum_balance(&windowed);
            let cep_raw = self.raw_cepstrum_db(&windowed);
            let smoothed = cpps_smoother.step(&cep_raw);
            let cpps_db = peak_prominence(&smoothed, self.search_lo, self.search_hi);
            out.push(MetricFrame {
                center_s: (offset as f64 + half_frame) / self.sample_rate as f64,
                sb_db: sb_smoother.step(sb_raw),
                cpps_db,
            });
        }
        out
    }
}

/// Attach each cycle's nearest frame (by center time vs cycle midpoint),
/// provided it lies within `max_distance_s`; ties go to the earlier frame.
/// Cycles with no frame in reach keep `None` metrics.
pub fn attach_frames_to_cycles(
    cycles: &mut [CycleRecord],
    frames: &[MetricFrame],
    max_distance_s: f64,
    sample_rate: u32,
) {
    if frames.is_empty() {
        return;
    }
    for cycle in cycles.iter_mut() {
        let mid = cycle.midpoint_s(sample_rate);
        let idx = frames.partition_point(|f| f.center_s < mid);
        let mut best: Option<(usize, f64)> = None;
        for cand in [idx.checked_sub(1), Some(idx)].into_iter().flatten() {
            if let Some(f) = frames.get(cand) {
                let d = (f.center_s - mid).abs();
                // strict < keeps the earlier frame on exact ties
                let better = match best {
                    None => true,
                    Some((_, bd)) => d < bd,
                };
                if better {
                    best = Some((cand, d));
                }
            }
        }
        if let Some((i, d)) = best {
            if d <= max_distance_s {
                cycle.sb_db = Some(frames[i].sb_db);
                cycle.cpps_db = Some(frames[i].cpps_db);
            }
        }
    }
}
