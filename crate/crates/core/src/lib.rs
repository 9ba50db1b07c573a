//! Cycle-synchronous voice analysis over the (f0, SPL) plane.
//!
//! The pipeline turns mono speech audio into per-cycle records — f0, SPL,
//! crest factor, plus frame-based spectrum balance and smoothed cepstral
//! peak prominence — and bins them into sparse voice maps keyed by
//! (semitones re 55 Hz, dB). Maps can be merged, differenced over their
//! overlap, summarized, and measured for coverage, which is what makes
//! reference-vs-synthesis comparisons possible without listening tests.
//!
//! ```
//! use voicemap_core::{analyze_buffer, AnalysisConfig, synth};
//!
//! let buf = synth::pulse_train(150.0, 0.3, 1.0, 44100);
//! let analysis = analyze_buffer(&buf, &AnalysisConfig::default()).unwrap();
//! let map = analysis.to_map("demo");
//! assert!(map.total_cycles() > 100);
//! ```

pub mod audio;
pub mod csvio;
pub mod cycles;
pub mod dsp;
pub mod frames;
pub mod map;
pub mod pipeline;
pub mod synth;

pub use audio::{load_wav, resample_to_44100, AudioBuffer, AudioError, CANONICAL_RATE};
pub use cycles::{
    compute_cycle_metrics, detect_cycles, highpass_50hz, leaky_integrate, CycleError, CycleRecord,
    VoicingConfig,
};
pub use frames::{
    attach_frames_to_cycles, FrameConfig, FrameMetricsEngine, MetricFrame, MetricsError,
};
pub use map::{
    coverage_curve, diff, overlap_area, semitone_of, stats, CellAccumulator, CellKey,
    DifferenceMap, MapError, MapStats, Metric, VoiceMap, Weighting,
};
pub use pipeline::{analyze_buffer, AnalysisConfig, BufferAnalysis};
