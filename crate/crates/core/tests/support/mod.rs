//! Brute-force reference implementations, fully independent of the library's
//! FFT path: direct DFT summation with a twiddle table, straight-line band
//! powers, cepstrum, and an autocorrelation pitch estimate.

/// Direct DFT of a real signal; returns (re, im) per bin.
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
    for (k, (r, i)) in re.iter_mut().zip(im.iter_mut()).enumerate() {
        let mut acc_r = 0.0;
        let mut acc_i = 0.0;
        for (j, &x) in input.iter().enumerate() {
            let idx = (j * k) % n;
            acc_r += x * cos_t[idx];
            acc_i += x * sin_t[idx];
        }
        *r = acc_r;
        *i = acc_i;
    }
    (re, im)
}

/// Inverse direct DFT (1/N normalized) of a real spectrum, first `bins`
/// outputs' real parts only.
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

/// Periodic Hann window applied to `frame_len` samples starting at
/// `offset`, zero-padded to `fft_size`.
pub fn windowed_frame(samples: &[f64], offset: usize, frame_len: usize, fft_size: usize) -> Vec<f64> {
    let mut out = vec![0.0; fft_size];
    for i in 0..frame_len {
        let w = 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / frame_len as f64).cos();
        out[i] = samples[offset + i] * w;
    }
    out
}

/// Spectrum balance by direct summation: 10 log10 of high/low band power
/// with the energy-proportional floor.
pub fn spectrum_balance(windowed: &[f64], sample_rate: f64) -> f64 {
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

/// Raw dB cepstrum by direct transforms: dB power spectrum, inverse DFT,
/// 10 log10 of the magnitude.
pub fn raw_cepstrum_db(windowed: &[f64], bins: usize) -> Vec<f64> {
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

/// Peak height over a least-squares line, written the pedestrian way.
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

/// Full reference CPPs pipeline over consecutive frames: per-bin one-pole
/// smoothing (warm start) then a centered 7-bin quefrency average, then
/// peak minus regression line over the search range.
pub struct ReferenceCpps {
    beta: f64,
    state: Option<Vec<f64>>,
}

impl ReferenceCpps {
    pub fn new(frame_rate: f64) -> Self {
        Self { beta: (-2.0 * std::f64::consts::PI * 16.0 / frame_rate).exp(), state: None }
    }

    pub fn step(&mut self, raw_db: &[f64], lo: usize, hi: usize) -> f64 {
        let state = match self.state.as_mut() {
            Some(state) => {
                for (s, &r) in state.iter_mut().zip(raw_db) {
                    *s = (1.0 - self.beta) * r + self.beta * *s;
                }
                state.clone()
            }
            None => {
                self.state = Some(raw_db.to_vec());
                raw_db.to_vec()
            }
        };
        let n = state.len();
        let averaged: Vec<f64> = (0..n)
            .map(|i| {
                let a = i.saturating_sub(3);
                let b = (i + 4).min(n);
                state[a..b].iter().sum::<f64>() / (b - a) as f64
            })
            .collect();
        peak_minus_regression(&averaged, lo, hi)
    }
}

/// Best autocorrelation lag in [min_lag, max_lag], as a fundamental in Hz.
pub fn autocorrelation_f0(samples: &[f64], sample_rate: f64, min_lag: usize, max_lag: usize) -> f64 {
    let mut best_lag = min_lag;
    let mut best = f64::NEG_INFINITY;
    for lag in min_lag..=max_lag {
        let mut acc = 0.0;
        for i in 0..samples.len() - lag {
            acc += samples[i] * samples[i + lag];
        }
        if acc > best {
            best = acc;
            best_lag = lag;
        }
    }
    sample_rate / best_lag as f64
}
