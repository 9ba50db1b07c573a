//! End-to-end analysis of one buffer: canonicalize, detect cycles, compute
//! frame metrics, attach them, and bin into a voice map.

use crate::audio::{resample_to_44100, AudioBuffer};
use crate::cycles::{detect_cycles, CycleRecord, VoicingConfig};
use crate::frames::{attach_frames_to_cycles, FrameConfig, FrameMetricsEngine, MetricFrame, MetricsError};
use crate::map::VoiceMap;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AnalysisConfig {
    pub voicing: VoicingConfig,
    pub frame: FrameConfig,
}

/// Everything extracted from one input: the kept cycles (with frame
/// metrics attached where a frame was in reach) and the frame stream.
#[derive(Debug, Clone, PartialEq)]
pub struct BufferAnalysis {
    pub cycles: Vec<CycleRecord>,
    pub frames: Vec<MetricFrame>,
}

impl BufferAnalysis {
    pub fn to_map(&self, source: impl Into<String>) -> VoiceMap {
        VoiceMap::from_cycles(source, &self.cycles)
    }
}

/// Run the full per-file pipeline. Input at any rate; it is resampled to
/// the canonical rate first.
pub fn analyze_buffer(
    buf: &AudioBuffer,
    cfg: &AnalysisConfig,
) -> Result<BufferAnalysis, MetricsError> {
    let canonical = resample_to_44100(buf);
    let mut cycles = detect_cycles(&canonical, &cfg.voicing);
    let mut engine = FrameMetricsEngine::new(cfg.frame.clone(), canonical.sample_rate)?;
    let frames = engine.analyze(&canonical);
    attach_frames_to_cycles(&mut cycles, &frames, cfg.frame.frame_len_s, canonical.sample_rate);
    Ok(BufferAnalysis { cycles, frames })
}
