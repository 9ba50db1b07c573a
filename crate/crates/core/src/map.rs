//! Voice maps: sparse (semitone, dB) grids of per-cell metric averages,
//! with merge, difference, coverage, and summary statistics.
//!
//! The pitch axis is semitones re 55 Hz (semitone 0 = 55 Hz, 12 = 110 Hz);
//! the level axis is whole dB. A cycle lands in cell
//! (floor(semitones), floor(spl)); bins are half-open [s, s+1). Cells store
//! running sums so maps merge exactly on counts and within rounding on
//! means. No clipping anywhere: cells outside any display window are kept
//! and only the renderer windows them.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::cycles::CycleRecord;

/// Pitch reference: semitone 0 on the map axis.
pub const SEMITONE_REF_HZ: f64 = 55.0;

#[derive(Debug, Error, PartialEq)]
pub enum MapError {
    #[error("nonpositive f0 ({0} Hz) has no semitone value")]
    NonPositiveF0(f64),
    #[error("too few occupied cells for statistics (got {got}, need at least 2)")]
    TooFewCells { got: usize },
    #[error("unknown metric '{0}' (expected f0_hz, spl_db, crest, sb_db, or cpps_db)")]
    UnknownMetric(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Semitones re 55 Hz: 12 log2(f0 / 55).
pub fn semitone_of(f0_hz: f64) -> Result<f64, MapError> {
    if f0_hz <= 0.0 || !f0_hz.is_finite() {
        return Err(MapError::NonPositiveF0(f0_hz));
    }
    Ok(12.0 * (f0_hz / SEMITONE_REF_HZ).log2())
}

/// A map cell: integer semitone bin and integer dB bin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CellKey {
    pub st_bin: i32,
    pub spl_bin: i32,
}

impl CellKey {
    pub fn of(f0_hz: f64, spl_db: f64) -> Result<Self, MapError> {
        let st = semitone_of(f0_hz)?;
        Ok(Self { st_bin: st.floor() as i32, spl_bin: spl_db.floor() as i32 })
    }
}

/// The five per-cycle metrics a map can carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    F0,
    Spl,
    Crest,
    Sb,
    Cpps,
}

impl Metric {
    pub const ALL: [Metric; 5] = [Metric::F0, Metric::Spl, Metric::Crest, Metric::Sb, Metric::Cpps];

    pub fn column(&self) -> &'static str {
        match self {
            Metric::F0 => "f0_hz",
            Metric::Spl => "spl_db",
            Metric::Crest => "crest",
            Metric::Sb => "sb_db",
            Metric::Cpps => "cpps_db",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.column())
    }
}

impl FromStr for Metric {
    type Err = MapError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "f0_hz" | "f0" => Ok(Metric::F0),
            "spl_db" | "spl" => Ok(Metric::Spl),
            "crest" => Ok(Metric::Crest),
            "sb_db" | "sb" => Ok(Metric::Sb),
            "cpps_db" | "cpps" => Ok(Metric::Cpps),
            other => Err(MapError::UnknownMetric(other.to_string())),
        }
    }
}

/// Running sums for one cell. Counts for sb/cpps can trail `n_cycles`
/// because those metrics are absent on cycles with no frame in reach.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CellAccumulator {
    pub n_cycles: u64,
    sum_f0: f64,
    sum_spl: f64,
    sum_crest: f64,
    sum_sb: f64,
    n_sb: u64,
    sum_cpps: f64,
    n_cpps: u64,
}

impl CellAccumulator {
    fn add_cycle(&mut self, c: &CycleRecord) {
        self.n_cycles += 1;
        self.sum_f0 += c.f0_hz;
        self.sum_spl += c.spl_db;
        self.sum_crest += c.crest;
        if let Some(sb) = c.sb_db {
            self.sum_sb += sb;
            self.n_sb += 1;
        }
        if let Some(cpps) = c.cpps_db {
            self.sum_cpps += cpps;
            self.n_cpps += 1;
        }
    }

    fn merge_from(&mut self, other: &CellAccumulator) {
        self.n_cycles += other.n_cycles;
        self.sum_f0 += other.sum_f0;
        self.sum_spl += other.sum_spl;
        self.sum_crest += other.sum_crest;
        self.sum_sb += other.sum_sb;
        self.n_sb += other.n_sb;
        self.sum_cpps += other.sum_cpps;
        self.n_cpps += other.n_cpps;
    }

    /// Rebuild an accumulator from per-metric means, as stored in map CSVs.
    pub fn from_means(
        n_cycles: u64,
        f0: f64,
        spl: f64,
        crest: f64,
        sb: Option<f64>,
        n_sb: u64,
        cpps: Option<f64>,
        n_cpps: u64,
    ) -> Self {
        Self {
            n_cycles,
            sum_f0: f0 * n_cycles as f64,
            sum_spl: spl * n_cycles as f64,
            sum_crest: crest * n_cycles as f64,
            sum_sb: sb.map_or(0.0, |m| m * n_sb as f64),
            n_sb,
            sum_cpps: cpps.map_or(0.0, |m| m * n_cpps as f64),
            n_cpps,
        }
    }

    pub fn count(&self, metric: Metric) -> u64 {
        match metric {
            Metric::F0 | Metric::Spl | Metric::Crest => self.n_cycles,
            Metric::Sb => self.n_sb,
            Metric::Cpps => self.n_cpps,
        }
    }

    pub fn mean(&self, metric: Metric) -> Option<f64> {
        let count = self.count(metric);
        if count == 0 {
            return None;
        }
        let sum = match metric {
            Metric::F0 => self.sum_f0,
            Metric::Spl => self.sum_spl,
            Metric::Crest => self.sum_crest,
            Metric::Sb => self.sum_sb,
            Metric::Cpps => self.sum_cpps,
        };
        Some(sum / count as f64)
    }
}

/// A sparse voice map: occupied cells only, keyed by (st_bin, spl_bin).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct VoiceMap {
    pub source: String,
    cells: BTreeMap<CellKey, CellAccumulator>,
}

impl VoiceMap {
    pub fn new(source: impl Into<String>) -> Self {
        Self { source: source.into(), cells: BTreeMap::new() }
    }

    /// Add one cycle to its cell. The cycle's f0 must be positive
    /// (guaranteed for detector output); panics otherwise.
    pub fn accumulate(&mut self, cycle: &CycleRecord) {
        let key = CellKey::of(cycle.f0_hz, cycle.spl_db)
            .expect("cycle with nonpositive f0 cannot be mapped");
        self.cells.entry(key).or_default().add_cycle(cycle);
    }

    pub fn from_cycles<'a>(
        source: impl Into<String>,
        cycles: impl IntoIterator<Item = &'a CycleRecord>,
    ) -> Self {
        let mut map = Self::new(source);
        for c in cycles {
            map.accumulate(c);
        }
        map
    }

    /// Cell-wise sum of two maps; keeps the left source label.
    pub fn merge(&self, other: &VoiceMap) -> VoiceMap {
        let mut out = self.clone();
        for (key, acc) in &other.cells {
            out.cells.entry(*key).or_default().merge_from(acc);
        }
        out
    }

    pub(crate) fn insert_cell(&mut self, key: CellKey, acc: CellAccumulator) {
        self.cells.insert(key, acc);
    }

    pub fn get(&self, key: &CellKey) -> Option<&CellAccumulator> {
        self.cells.get(key)
    }

    /// Occupied cells in (st_bin, spl_bin) order.
    pub fn cells(&self) -> impl Iterator<Item = (&CellKey, &CellAccumulator)> {
        self.cells.iter()
    }

    pub fn occupied_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn total_cycles(&self) -> u64 {
        self.cells.values().map(|a| a.n_cycles).sum()
    }
}

/// Per-cell metric deltas (left mean minus right mean) over the overlap.
#[derive(Debug, Clone, PartialEq)]
pub struct DifferenceMap {
    pub metric: Metric,
    pub cells: BTreeMap<CellKey, f64>,
}

/// Cell-wise difference of per-cell means, defined on keys occupied in both
/// maps with the metric present on both sides.
pub fn diff(a: &VoiceMap, b: &VoiceMap, metric: Metric) -> DifferenceMap {
    let mut cells = BTreeMap::new();
    for (key, acc_a) in a.cells() {
        if let Some(acc_b) = b.get(key) {
            if let (Some(ma), Some(mb)) = (acc_a.mean(metric), acc_b.mean(metric)) {
                cells.insert(*key, ma - mb);
            }
        }
    }
    DifferenceMap { metric, cells }
}

/// Number of cells occupied in both maps (any metric).
pub fn overlap_area(a: &VoiceMap, b: &VoiceMap) -> usize {
    a.cells().filter(|(key, _)| b.get(key).is_some()).count()
}

/// How statistics weight the occupied cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Weighting {
    /// Each occupied cell is one observation (the default).
    #[default]
    Cell,
    /// Cells weighted by their cycle count for the metric.
    Cycle,
}

impl FromStr for Weighting {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cell" => Ok(Weighting::Cell),
            "cycle" => Ok(Weighting::Cycle),
            other => Err(format!("unknown weighting '{other}' (expected cell or cycle)")),
        }
    }
}

/// Summary statistics for one metric over a map.
#[derive(Debug, Clone, PartialEq)]
pub struct MapStats {
    pub metric: Metric,
    pub mean: f64,
    pub std: f64,
    pub ci95_low: f64,
    pub ci95_high: f64,
    /// Occupied cells carrying the metric.
    pub n_cells: usize,
    /// Cycles behind those cells (the weight total under cycle weighting).
    pub n_obs: u64,
    /// Mean of (cell mean - reference cell mean) over the overlap, when a
    /// reference map was given and the overlap is nonempty.
    pub diff_from_ref: Option<f64>,
}

/// Unweighted (per-cell) or cycle-weighted statistics over cell means.
/// CI95 = mean +/- 1.96 std / sqrt(n), with n the observation count of the
/// chosen weighting.
pub fn stats(
    map: &VoiceMap,
    metric: Metric,
    reference: Option<&VoiceMap>,
    weighting: Weighting,
) -> Result<MapStats, MapError> {
    let observations: Vec<(f64, u64)> = map
        .cells()
        .filter_map(|(_, acc)| acc.mean(metric).map(|m| (m, acc.count(metric))))
        .collect();
    let n_cells = observations.len();
    if n_cells < 2 {
        return Err(MapError::TooFewCells { got: n_cells });
    }
    let n_obs: u64 = observations.iter().map(|(_, c)| c).sum();

    let (mean, std, n_eff) = match weighting {
        Weighting::Cell => {
            let n = n_cells as f64;
            let mean = observations.iter().map(|(m, _)| m).sum::<f64>() / n;
            let var =
                observations.iter().map(|(m, _)| (m - mean) * (m - mean)).sum::<f64>() / (n - 1.0);
            (mean, var.sqrt(), n)
        }
        Weighting::Cycle => {
            let w_total = n_obs as f64;
            let mean =
                observations.iter().map(|(m, c)| m * *c as f64).sum::<f64>() / w_total;
            let var = observations
                .iter()
                .map(|(m, c)| *c as f64 * (m - mean) * (m - mean))
                .sum::<f64>()
                / (w_total - 1.0);
            (mean, var.sqrt(), w_total)
        }
    };
    let half = 1.96 * std / n_eff.sqrt();

    let diff_from_ref = reference.and_then(|reference| {
        let deltas = diff(map, reference, metric);
        if deltas.cells.is_empty() {
            None
        } else {
            Some(deltas.cells.values().sum::<f64>() / deltas.cells.len() as f64)
        }
    });

    Ok(MapStats {
        metric,
        mean,
        std,
        ci95_low: mean - half,
        ci95_high: mean + half,
        n_cells,
        n_obs,
        diff_from_ref,
    })
}

/// Cumulative occupied-cell counts over a corpus-ordered map sequence.
/// Entry k (1-based) counts cells whose accumulated cycle total over maps
/// 1..=k reaches `min_cycles_per_cell`.
pub fn coverage_curve(maps: &[VoiceMap], min_cycles_per_cell: u64) -> Vec<(usize, usize)> {
    let mut totals: BTreeMap<CellKey, u64> = BTreeMap::new();
    let mut curve = Vec::with_capacity(maps.len());
    for (k, map) in maps.iter().enumerate() {
        for (key, acc) in map.cells() {
            *totals.entry(*key).or_insert(0) += acc.n_cycles;
        }
        let cells = totals.values().filter(|&&n| n >= min_cycles_per_cell).count();
        curve.push((k + 1, cells));
    }
    curve
}
