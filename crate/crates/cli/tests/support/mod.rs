//! Shared fixtures and brute-force reference code for the CLI test suites.
//! The reference implementations use direct DFT summation and pedestrian
//! loops only — no shared code with the library's FFT path.

#![allow(dead_code)]

use std::path::Path;
use std::process::{Command, Output};

pub fn voicemap_bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_voicemap"))
}

pub fn run(args: &[&str]) -> Output {
    voicemap_bin().args(args).output().expect("failed to spawn voicemap")
}

pub fn write_wav16(path: &Path, samples: &[f64], rate: u32) {
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: rate,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut w = hound::WavWriter::create(path, spec).unwrap();
    for &s in samples {
        let v = (s.clamp(-1.0, 1.0) * 32767.0).round() as i16;
        w.write_sample(v).unwrap();
    }
    w.finalize().unwrap();
}

pub fn sine_samples(freq: f64, amp: f64, secs: f64, rate: u32) -> Vec<f64> {
    let n = (secs * rate as f64).round() as usize;
    (0..n)
        .map(|i| amp * (2.0 * std::f64::consts::PI * freq * i as f64 / rate as f64).sin())
        .collect()
}

// --- direct-summation reference implementations ---

pub fn dft(input: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = input.len();
    let mut cos_t = Vec::with_capacity(n);
    let mut sin_t = Vec::with_capacity(n);
    for k in 0..n {
        let a = -2.0 * std::f64::consts::PI * k as f64 / n as f64;
        cos_t.push(a.cos());
        sin_t.push(a.sin());
    }
    let mut re = vec![0.0; n];
    let mut im = vec![0.0; n];
    for k in 0..n {
        let mut acc_r = 0.0;
        let mut acc_i = 0.0;
        for (j, &x) in input.iter().enumerate() {
            let idx = (j * k) % n;
            acc_r += x * cos_t[idx];
            acc_i += x * sin_t[idx];
        }
        re[k] = acc_r;
        im[k] = acc_i;
    }
    (re, im)
}

pub fn idft_real(spectrum: &[f64], bins: usize) -> Vec<f64> {
    let n = spectrum.len();
    let mut cos_t = Vec::with_capacity(n);
    for k in 0..n {
        cos_t.push((2.0 * std::f64::consts::PI * k as f64 / n as f64).cos());
    }
    (0..bins)
        .map(|q| {
            let mut acc = 0.0;
            for (k, &s) in spectrum.iter().enumerate() {
                acc += s * cos_t[(k * q) % n];
            }
            acc / n as f64
        })
        .collect()
}

pub fn windowed_frame(samples: &[f64], offset: usize, frame_len: usize, fft_size: usize) -> Vec<f64> {
    let mut out = vec![0.0; fft_size];
    for i in 0..frame_len {
        let w = 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / frame_len as f64).cos();
        out[i] = samples[offset + i] * w;
    }
    out
}

pub fn reference_spectrum_balance(windowed: &[f64], sample_rate: f64) -> f64 {
    let n = windowed.len();
    let (re, im) = dft(windowed);
    let mut low = 0.0;
    let mut high = 0.0;
    for k in 1..=n / 2 {
        let f = k as f64 * sample_rate / n as f64;
        let p = re[k] * re[k] + im[k] * im[k];
        if f < 1500.0 {
            low += p;
        } else if f > 2000.0 {
            high += p;
        }
    }
    let energy: f64 = windowed.iter().map(|x| x * x).sum();
    let floor = 1e-12 * (energy + 1e-30);
    10.0 * ((high + floor) / (low + floor)).log10()
}

pub fn reference_cepstrum_db(windowed: &[f64], bins: usize) -> Vec<f64> {
    let (re, im) = dft(windowed);
    let log_power: Vec<f64> = re
        .iter()
        .zip(&im)
        .map(|(r, i)| 10.0 * (r * r + i * i).max(1e-30).log10())
        .collect();
    idft_real(&log_power, bins)
        .into_iter()
        .map(|c| 10.0 * c.abs().max(1e-30).log10())
        .collect()
}

pub fn peak_minus_regression(values: &[f64], lo: usize, hi: usize) -> f64 {
    let xs: Vec<f64> = (lo..=hi).map(|i| i as f64).collect();
    let ys = &values[lo..=hi];
    let n = xs.len() as f64;
    let sum_x: f64 = xs.iter().sum();
    let sum_y: f64 = ys.iter().sum();
    let sum_xx: f64 = xs.iter().map(|x| x * x).sum();
    let sum_xy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    let slope = (n * sum_xy - sum_x * sum_y) / (n * sum_xx - sum_x * sum_x);
    let intercept = (sum_y - slope * sum_x) / n;
    let mut peak_x = lo as f64;
    let mut peak = f64::NEG_INFINITY;
    for (x, &y) in xs.iter().zip(ys) {
        if y > peak {
            peak = y;
            peak_x = *x;
        }
    }
    peak - (slope * peak_x + intercept)
}

/// Reference CPPs over a whole buffer: direct-DFT cepstra, one-pole per-bin
/// smoothing (warm start), 7-bin quefrency averaging, peak over regression.
pub fn reference_cpps_stream(samples: &[f64], sample_rate: f64) -> Vec<f64> {
    let frame_len = (0.023 * sample_rate).round() as usize;
    let hop = (0.010 * sample_rate).round() as usize;
    let frame_rate = sample_rate / hop as f64;
    let beta = (-2.0 * std::f64::consts::PI * 16.0 / frame_rate).exp();
    let (lo, hi) = ((sample_rate / 880.0).floor() as usize, 511usize);
    let mut state: Option<Vec<f64>> = None;
    let mut out = Vec::new();
    let mut offset = 0;
    while offset + frame_len <= samples.len() {
        let frame = windowed_frame(samples, offset, frame_len, 2048);
        let raw = reference_cepstrum_db(&frame, 512);
        let st = match state.as_mut() {
            Some(st) => {
                for (s, &r) in st.iter_mut().zip(&raw) {
                    *s = (1.0 - beta) * r + beta * *s;
                }
                st.clone()
            }
            None => {
                state = Some(raw.clone());
                raw
            }
        };
        let averaged: Vec<f64> = (0..st.len())
            .map(|i| {
                let a = i.saturating_sub(3);
                let b = (i + 4).min(st.len());
                st[a..b].iter().sum::<f64>() / (b - a) as f64
            })
            .collect();
        out.push(peak_minus_regression(&averaged, lo, hi));
        offset += hop;
    }
    out
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}
