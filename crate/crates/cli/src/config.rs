//! Run configuration: built-in defaults, a plain `key=value` config file,
//! and command-line overrides. Every knob is echoed into output metadata
//! comments so a map file records how it was made.

use std::fmt::Write as _;
use std::path::Path;

use voicemap_core::{AnalysisConfig, FrameConfig, Metric, VoicingConfig, Weighting};

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub spl_offset_db: f64,
    pub f0_min_hz: f64,
    pub f0_max_hz: f64,
    pub max_jump: f64,
    pub min_run: usize,
    pub frame_len_s: f64,
    pub hop_s: f64,
    pub fft_size: usize,
    pub cepstrum_bins: usize,
    pub cpps_smooth_cutoff_hz: f64,
    pub cpps_quefrency_avg_bins: usize,
    pub sb_smooth_cutoff_hz: f64,
    pub min_cycles_per_cell: u64,
    pub weighting: Weighting,
    pub render_st_range: (i32, i32),
    pub render_spl_range: (i32, i32),
    pub color_f0: (f64, f64),
    pub color_spl: (f64, f64),
    pub color_crest: (f64, f64),
    pub color_sb: (f64, f64),
    pub color_cpps: (f64, f64),
    pub diff_cap: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let voicing = VoicingConfig::default();
        let frame = FrameConfig::default();
        Self {
            spl_offset_db: voicing.spl_offset_db,
            f0_min_hz: voicing.f0_band_hz.0,
            f0_max_hz: voicing.f0_band_hz.1,
            max_jump: voicing.max_jump,
            min_run: voicing.min_run,
            frame_len_s: frame.frame_len_s,
            hop_s: frame.hop_s,
            fft_size: frame.fft_size,
            cepstrum_bins: frame.cepstrum_bins,
            cpps_smooth_cutoff_hz: frame.cpps_smooth_cutoff_hz,
            cpps_quefrency_avg_bins: frame.cpps_quefrency_avg_bins,
            sb_smooth_cutoff_hz: frame.sb_smooth_cutoff_hz,
            min_cycles_per_cell: 1,
            weighting: Weighting::Cell,
            render_st_range: (0, 36),
            render_spl_range: (40, 100),
            color_f0: (55.0, 880.0),
            color_spl: (40.0, 100.0),
            color_crest: (1.0, 4.0),
            color_sb: (-40.0, 0.0),
            color_cpps: (0.0, 15.0),
            diff_cap: 5.0,
        }
    }
}

impl RunConfig {
    /// Parse a `key=value` file (blank lines and `#` comments ignored) on
    /// top of the defaults.
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        let mut cfg = Self::default();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("{}:{}: expected key=value", path.display(), idx + 1))?;
            cfg.set(key.trim(), value.trim())
                .map_err(|e| format!("{}:{}: {e}", path.display(), idx + 1))?;
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, String> {
            value.parse().map_err(|_| format!("bad value '{value}' for {key}"))
        }
        match key {
            "spl_offset_db" => self.spl_offset_db = num(key, value)?,
            "f0_min_hz" => self.f0_min_hz = num(key, value)?,
            "f0_max_hz" => self.f0_max_hz = num(key, value)?,
            "max_jump" => self.max_jump = num(key, value)?,
            "min_run" => self.min_run = num(key, value)?,
            "frame_len_s" => self.frame_len_s = num(key, value)?,
            "hop_s" => self.hop_s = num(key, value)?,
            "fft_size" => self.fft_size = num(key, value)?,
            "cepstrum_bins" => self.cepstrum_bins = num(key, value)?,
            "cpps_smooth_cutoff_hz" => self.cpps_smooth_cutoff_hz = num(key, value)?,
            "cpps_quefrency_avg_bins" => self.cpps_quefrency_avg_bins = num(key, value)?,
            "sb_smooth_cutoff_hz" => self.sb_smooth_cutoff_hz = num(key, value)?,
            "min_cycles_per_cell" => self.min_cycles_per_cell = num(key, value)?,
            "weighting" => self.weighting = value.parse()?,
            "render_st_min" => self.render_st_range.0 = num(key, value)?,
            "render_st_max" => self.render_st_range.1 = num(key, value)?,
            "render_spl_min" => self.render_spl_range.0 = num(key, value)?,
            "render_spl_max" => self.render_spl_range.1 = num(key, value)?,
            "color_f0_min" => self.color_f0.0 = num(key, value)?,
            "color_f0_max" => self.color_f0.1 = num(key, value)?,
            "color_spl_min" => self.color_spl.0 = num(key, value)?,
            "color_spl_max" => self.color_spl.1 = num(key, value)?,
            "color_crest_min" => self.color_crest.0 = num(key, value)?,
            "color_crest_max" => self.color_crest.1 = num(key, value)?,
            "color_sb_min" => self.color_sb.0 = num(key, value)?,
            "color_sb_max" => self.color_sb.1 = num(key, value)?,
            "color_cpps_min" => self.color_cpps.0 = num(key, value)?,
            "color_cpps_max" => self.color_cpps.1 = num(key, value)?,
            "diff_cap" => self.diff_cap = num(key, value)?,
            other => return Err(format!("unknown config key '{other}'")),
        }
        Ok(())
    }

    pub fn analysis(&self) -> AnalysisConfig {
        AnalysisConfig {
            voicing: VoicingConfig {
                f0_band_hz: (self.f0_min_hz, self.f0_max_hz),
                max_jump: self.max_jump,
                min_run: self.min_run,
                spl_offset_db: self.spl_offset_db,
                ..VoicingConfig::default()
            },
            frame: FrameConfig {
                frame_len_s: self.frame_len_s,
                hop_s: self.hop_s,
                fft_size: self.fft_size,
                cepstrum_bins: self.cepstrum_bins,
                cpps_smooth_cutoff_hz: self.cpps_smooth_cutoff_hz,
                cpps_quefrency_avg_bins: self.cpps_quefrency_avg_bins,
                sb_smooth_cutoff_hz: self.sb_smooth_cutoff_hz,
                ..FrameConfig::default()
            },
        }
    }

    pub fn color_bounds(&self, metric: Metric) -> (f64, f64) {
        match metric {
            Metric::F0 => self.color_f0,
            Metric::Spl => self.color_spl,
            Metric::Crest => self.color_crest,
            Metric::Sb => self.color_sb,
            Metric::Cpps => self.color_cpps,
        }
    }

    /// Every effective setting, in a fixed order, for output metadata.
    pub fn comment_pairs(&self) -> Vec<(String, String)> {
        fn f(x: f64) -> String {
            let mut s = String::new();
            write!(s, "{x}").unwrap();
            s
        }
        vec![
            ("spl_offset_db".into(), f(self.spl_offset_db)),
            ("f0_min_hz".into(), f(self.f0_min_hz)),
            ("f0_max_hz".into(), f(self.f0_max_hz)),
            ("max_jump".into(), f(self.max_jump)),
            ("min_run".into(), self.min_run.to_string()),
            ("frame_len_s".into(), f(self.frame_len_s)),
            ("hop_s".into(), f(self.hop_s)),
            ("fft_size".into(), self.fft_size.to_string()),
            ("cepstrum_bins".into(), self.cepstrum_bins.to_string()),
            ("cpps_smooth_cutoff_hz".into(), f(self.cpps_smooth_cutoff_hz)),
            ("cpps_quefrency_avg_bins".into(), self.cpps_quefrency_avg_bins.to_string()),
            ("sb_smooth_cutoff_hz".into(), f(self.sb_smooth_cutoff_hz)),
            ("min_cycles_per_cell".into(), self.min_cycles_per_cell.to_string()),
            (
                "weighting".into(),
                match self.weighting {
                    Weighting::Cell => "cell".into(),
                    Weighting::Cycle => "cycle".into(),
                },
            ),
        ]
    }
}
