//! Filter primitives used by the cycle detector and the frame-metric smoothers.

use std::f64::consts::PI;

/// A single direct-form-II-transposed biquad section.
#[derive(Debug, Clone, Copy)]
pub struct Biquad {
    b0: f64,
    b1: f64,
    b2: f64,
    a1: f64,
    a2: f64,
    z1: f64,
    z2: f64,
}

impl Biquad {
    pub fn new(b0: f64, b1: f64, b2: f64, a1: f64, a2: f64) -> Self {
        Self { b0, b1, b2, a1, a2, z1: 0.0, z2: 0.0 }
    }

    /// Second-order Butterworth high-pass via the bilinear transform
    /// (prewarped, Q = 1/sqrt(2)). -3.01 dB at `cutoff_hz`.
    pub fn butterworth_highpass(cutoff_hz: f64, sample_rate: f64) -> Self {
        assert!(
            cutoff_hz > 0.0 && cutoff_hz < sample_rate / 2.0,
            "cutoff must lie in (0, nyquist)"
        );
        let q = std::f64::consts::FRAC_1_SQRT_2;
        let w0 = 2.0 * PI * cutoff_hz / sample_rate;
        let (sin, cos) = w0.sin_cos();
        let alpha = sin / (2.0 * q);
        let a0 = 1.0 + alpha;
        Self::new(
            (1.0 + cos) / 2.0 / a0,
            -(1.0 + cos) / a0,
            (1.0 + cos) / 2.0 / a0,
            -2.0 * cos / a0,
            (1.0 - alpha) / a0,
        )
    }

    /// One Butterworth low-pass section with the given pole quality.
    /// Cascading two sections with the 4th-order Butterworth Q pair
    /// (see [`lowpass_cascade4`]) yields a true 4th-order response.
    pub fn butterworth_lowpass(cutoff_hz: f64, sample_rate: f64, q: f64) -> Self {
        assert!(
            cutoff_hz > 0.0 && cutoff_hz < sample_rate / 2.0,
            "cutoff must lie in (0, nyquist)"
        );
        let w0 = 2.0 * PI * cutoff_hz / sample_rate;
        let (sin, cos) = w0.sin_cos();
        let alpha = sin / (2.0 * q);
        let a0 = 1.0 + alpha;
        Self::new(
            (1.0 - cos) / 2.0 / a0,
            (1.0 - cos) / a0,
            (1.0 - cos) / 2.0 / a0,
            -2.0 * cos / a0,
            (1.0 - alpha) / a0,
        )
    }

    pub fn reset(&mut self) {
        self.z1 = 0.0;
        self.z2 = 0.0;
    }

    /// Set the internal state as if the input had been `x` forever,
    /// so a constant stream passes through without a startup transient.
    pub fn prime(&mut self, x: f64) {
        let h1 = (self.b0 + self.b1 + self.b2) / (1.0 + self.a1 + self.a2);
        let y = x * h1;
        self.z2 = self.b2 * x - self.a2 * y;
        self.z1 = self.b1 * x - self.a1 * y + self.z2;
    }

    #[inline]
    pub fn process(&mut self, x: f64) -> f64 {
        let y = self.b0 * x + self.z1;
        self.z1 = self.b1 * x - self.a1 * y + self.z2;
        self.z2 = self.b2 * x - self.a2 * y;
        y
    }

    pub fn process_buffer(&mut self, input: &[f64]) -> Vec<f64> {
        input.iter().map(|&x| self.process(x)).collect()
    }
}

/// 4th-order Butterworth low-pass as two cascaded biquads.
///
/// The pole quality factors 1/(2 cos(pi/8)) and 1/(2 cos(3 pi/8)) place the
/// four poles on the Butterworth circle. A cutoff at or above Nyquist is
/// clamped just below it so the bilinear design stays finite; the response
/// is then close to identity over the representable band.
#[derive(Debug, Clone)]
pub struct LowpassCascade4 {
    sections: [Biquad; 2],
}

impl LowpassCascade4 {
    pub fn new(cutoff_hz: f64, sample_rate: f64) -> Self {
        let fc = cutoff_hz.min(0.499 * sample_rate);
        let q1 = 1.0 / (2.0 * (PI / 8.0).cos());
        let q2 = 1.0 / (2.0 * (3.0 * PI / 8.0).cos());
        Self {
            sections: [
                Biquad::butterworth_lowpass(fc, sample_rate, q1),
                Biquad::butterworth_lowpass(fc, sample_rate, q2),
            ],
        }
    }

    /// Prime both sections so the first sample passes without a transient.
    pub fn prime(&mut self, x: f64) {
        self.sections[0].prime(x);
        self.sections[1].prime(x);
    }

    #[inline]
    pub fn process(&mut self, x: f64) -> f64 {
        let mid = self.sections[0].process(x);
        self.sections[1].process(mid)
    }
}

/// One-pole low-pass y_n = (1 - beta) x_n + beta y_{n-1} with
/// beta = exp(-2 pi fc / fs).
#[derive(Debug, Clone, Copy)]
pub struct OnePole {
    beta: f64,
    state: Option<f64>,
}

impl OnePole {
    pub fn new(cutoff_hz: f64, sample_rate: f64) -> Self {
        Self { beta: (-2.0 * PI * cutoff_hz / sample_rate).exp(), state: None }
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// First call passes the input through unchanged (warm start).
    #[inline]
    pub fn process(&mut self, x: f64) -> f64 {
        let y = match self.state {
            Some(prev) => (1.0 - self.beta) * x + self.beta * prev,
            None => x,
        };
        self.state = Some(y);
        y
    }
}

/// The exact recurrence x_n = y_n + alpha x_{n-1} with x_{-1} = 0.
pub fn leaky_integrate_samples(input: &[f64], alpha: f64) -> Vec<f64> {
    assert!(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)");
    let mut prev = 0.0;
    input
        .iter()
        .map(|&y| {
            let x = y + alpha * prev;
            prev = x;
            x
        })
        .collect()
}

/// Subtract a centered sliding mean of `window` samples (odd length).
///
/// Only positions where the window fits entirely inside the input are
/// produced; the returned offset is the input index of the first output
/// sample, i.e. `(window - 1) / 2`. Inputs shorter than the window yield
/// an empty output.
pub fn remove_sliding_mean(input: &[f64], window: usize) -> (usize, Vec<f64>) {
    assert!(window % 2 == 1, "window length must be odd");
    let pad = window / 2;
    if input.len() < window {
        return (pad, Vec::new());
    }
    let mut prefix = Vec::with_capacity(input.len() + 1);
    let mut acc = 0.0;
    prefix.push(0.0);
    for &x in input {
        acc += x;
        prefix.push(acc);
    }
    let inv = 1.0 / window as f64;
    let out = (pad..input.len() - pad)
        .map(|i| input[i] - (prefix[i + pad + 1] - prefix[i - pad]) * inv)
        .collect();
    (pad, out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sine(freq: f64, amp: f64, secs: f64, sr: f64) -> Vec<f64> {
        let n = (secs * sr) as usize;
        (0..n).map(|i| amp * (2.0 * PI * freq * i as f64 / sr).sin()).collect()
    }

    fn rms(x: &[f64]) -> f64 {
        (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
    }

    #[test]
    fn highpass_gain_at_cutoff() {
        let mut f = Biquad::butterworth_highpass(50.0, 44100.0);
        let x = sine(50.0, 0.5, 2.0, 44100.0);
        let y = f.process_buffer(&x);
        // skip 0.5 s of transient, compare over the remaining interior
        let g = 20.0 * (rms(&y[22050..]) / rms(&x[22050..])).log10();
        assert!((g + 3.0103).abs() < 0.1, "gain at cutoff {g} dB");
    }

    #[test]
    fn highpass_passband_flat_at_1khz() {
        let mut f = Biquad::butterworth_highpass(50.0, 44100.0);
        let x = sine(1000.0, 0.5, 1.0, 44100.0);
        let y = f.process_buffer(&x);
        let g = 20.0 * (rms(&y[8820..]) / rms(&x[8820..])).log10();
        assert!(g.abs() < 0.05, "passband gain {g} dB");
    }

    #[test]
    fn highpass_rejects_dc() {
        let mut f = Biquad::butterworth_highpass(50.0, 44100.0);
        let x = vec![0.5; 44100];
        let y = f.process_buffer(&x);
        let tail = &y[44100 - 4410..];
        assert!(rms(tail) < 0.0005, "DC tail rms {}", rms(tail));
    }

    #[test]
    fn leaky_integrator_impulse_response() {
        let mut input = vec![0.0; 64];
        input[0] = 1.0;
        let out = leaky_integrate_samples(&input, 0.999);
        for (n, &v) in out.iter().enumerate() {
            assert!((v - 0.999f64.powi(n as i32)).abs() < 1e-12);
        }
    }

    #[test]
    fn leaky_integrator_step_response() {
        let input = vec![1.0; 20000];
        let out = leaky_integrate_samples(&input, 0.999);
        for (n, &v) in out.iter().enumerate().step_by(997) {
            let expect = (1.0 - 0.999f64.powi(n as i32 + 1)) / (1.0 - 0.999);
            assert!((v - expect).abs() < 1e-6 * expect.max(1.0));
        }
        assert!(out[19999] > 999.0 && out[19999] < 1000.0);
    }

    #[test]
    fn leaky_integrator_zero_in_zero_out() {
        assert!(leaky_integrate_samples(&[0.0; 100], 0.999).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn lowpass_cascade_passes_dc() {
        let mut f = LowpassCascade4::new(50.0, 100.0);
        f.prime(3.0);
        for _ in 0..50 {
            let y = f.process(3.0);
            assert!((y - 3.0).abs() < 1e-9);
        }
    }

    #[test]
    fn one_pole_beta_matches_16hz_at_frame_rate() {
        let p = OnePole::new(16.0, 100.0);
        assert!((p.beta() - 0.36589).abs() < 1e-4);
    }

    #[test]
    fn one_pole_step_is_monotone() {
        let mut p = OnePole::new(16.0, 100.0);
        p.process(0.0);
        let mut prev = 0.0;
        for _ in 0..40 {
            let y = p.process(1.0);
            assert!(y >= prev && y <= 1.0);
            prev = y;
        }
        assert!(prev > 0.999);
    }

    #[test]
    fn sliding_mean_zeroes_a_constant() {
        let (off, d) = remove_sliding_mean(&[2.5; 5000], 2029);
        assert_eq!(off, 1014);
        assert_eq!(d.len(), 5000 - 2028);
        assert!(d.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn sliding_mean_removes_offset_under_a_tone() {
        let n = 10000;
        let x: Vec<f64> = (0..n)
            .map(|i| 2.5 + 0.2 * (2.0 * PI * 200.0 * i as f64 / 44100.0).sin())
            .collect();
        let (_, d) = remove_sliding_mean(&x, 2029);
        let mean = d.iter().sum::<f64>() / d.len() as f64;
        assert!(mean.abs() < 0.01, "residual mean {mean}");
    }

    #[test]
    fn sliding_mean_short_input_is_empty() {
        let (_, d) = remove_sliding_mean(&[1.0; 100], 2029);
        assert!(d.is_empty());
    }
}
