//! CSV interchange formats: voice maps, difference maps, cycle and frame
//! dumps, coverage curves.
//!
//! Numeric fields carry 6 significant digits; absent metric means are empty
//! fields. Comment lines start with `#` and precede the header; writers
//! emit them in a fixed order so identical inputs give identical bytes.

use std::io::{self, BufRead, Write};

use crate::cycles::CycleRecord;
use crate::frames::MetricFrame;
use crate::map::{CellAccumulator, CellKey, DifferenceMap, MapError, Metric, VoiceMap};

pub const MAP_HEADER: &str = "st_bin,spl_bin,n_cycles,f0_hz,spl_db,crest,sb_db,cpps_db,n_sb,n_cpps";
pub const DIFF_HEADER: &str = "st_bin,spl_bin,delta";
pub const CYCLES_HEADER: &str = "start_sample,length_samples,f0_hz,spl_db,crest,cpps_db,sb_db";
pub const FRAMES_HEADER: &str = "center_s,sb_db,cpps_db";
pub const CURVE_HEADER: &str = "k,cells";

/// Format with 6 significant digits (plain decimal notation).
pub fn fmt_sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let exponent = x.abs().log10().floor() as i32;
    let decimals = (5 - exponent).clamp(0, 18) as usize;
    format!("{x:.decimals$}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_sig6).unwrap_or_default()
}

/// Write a voice map: `#` metadata lines, the header, then one row per
/// occupied cell in (st_bin, spl_bin) order.
pub fn write_map_csv<W: Write>(
    w: &mut W,
    map: &VoiceMap,
    comments: &[(String, String)],
) -> io::Result<()> {
    writeln!(w, "# source={}", map.source)?;
    writeln!(w, "# total_cycles={}", map.total_cycles())?;
    for (k, v) in comments {
        writeln!(w, "# {k}={v}")?;
    }
    writeln!(w, "{MAP_HEADER}")?;
    for (key, acc) in map.cells() {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{}",
            key.st_bin,
            key.spl_bin,
            acc.n_cycles,
            fmt_opt(acc.mean(Metric::F0)),
            fmt_opt(acc.mean(Metric::Spl)),
            fmt_opt(acc.mean(Metric::Crest)),
            fmt_opt(acc.mean(Metric::Sb)),
            fmt_opt(acc.mean(Metric::Cpps)),
            acc.count(Metric::Sb),
            acc.count(Metric::Cpps),
        )?;
    }
    Ok(())
}

fn parse_field<T: std::str::FromStr>(s: &str, line: usize, what: &str) -> Result<T, MapError> {
    s.trim()
        .parse()
        .map_err(|_| MapError::Parse { line, msg: format!("bad {what} value '{s}'") })
}

fn parse_opt_field(s: &str, line: usize, what: &str) -> Result<Option<f64>, MapError> {
    if s.trim().is_empty() {
        Ok(None)
    } else {
        parse_field(s, line, what).map(Some)
    }
}

/// Read a voice map written by [`write_map_csv`]. A `# source=` comment, if
/// present, overrides `default_source`. Line numbers in errors are 1-based
/// over the whole file, comments included.
pub fn read_map_csv<R: BufRead>(r: R, default_source: &str) -> Result<VoiceMap, MapError> {
    let mut map = VoiceMap::new(default_source);
    let mut saw_header = false;
    for (idx, line) in r.lines().enumerate() {
        let line_no = idx + 1;
        let line = line
            .map_err(|e| MapError::Parse { line: line_no, msg: format!("read error: {e}") })?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix('#') {
            if let Some(source) = comment.trim().strip_prefix("source=") {
                map.source = source.to_string();
            }
            continue;
        }
        if !saw_header {
            if trimmed != MAP_HEADER {
                return Err(MapError::Parse {
                    line: line_no,
                    msg: format!("expected header '{MAP_HEADER}'"),
                });
            }
            saw_header = true;
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').collect();
        if fields.len() != 10 {
            return Err(MapError::Parse {
                line: line_no,
                msg: format!("expected 10 fields, got {}", fields.len()),
            });
        }
        let key = CellKey {
            st_bin: parse_field(fields[0], line_no, "st_bin")?,
            spl_bin: parse_field(fields[1], line_no, "spl_bin")?,
        };
        let n_cycles: u64 = parse_field(fields[2], line_no, "n_cycles")?;
        if n_cycles == 0 {
            return Err(MapError::Parse {
                line: line_no,
                msg: "occupied cell with zero cycles".to_string(),
            });
        }
        let acc = CellAccumulator::from_means(
            n_cycles,
            parse_field(fields[3], line_no, "f0_hz")?,
            parse_field(fields[4], line_no, "spl_db")?,
            parse_field(fields[5], line_no, "crest")?,
            parse_opt_field(fields[6], line_no, "sb_db")?,
            parse_field(fields[8], line_no, "n_sb")?,
            parse_opt_field(fields[7], line_no, "cpps_db")?,
            parse_field(fields[9], line_no, "n_cpps")?,
        );
        map.insert_cell(key, acc);
    }
    if !saw_header {
        return Err(MapError::Parse { line: 1, msg: format!("missing header '{MAP_HEADER}'") });
    }
    Ok(map)
}

pub fn write_diff_csv<W: Write>(
    w: &mut W,
    diff: &DifferenceMap,
    comments: &[(String, String)],
) -> io::Result<()> {
    writeln!(w, "# metric={}", diff.metric)?;
    for (k, v) in comments {
        writeln!(w, "# {k}={v}")?;
    }
    writeln!(w, "{DIFF_HEADER}")?;
    for (key, delta) in &diff.cells {
        writeln!(w, "{},{},{}", key.st_bin, key.spl_bin, fmt_sig6(*delta))?;
    }
    Ok(())
}

/// Read a difference map; the metric comes from the `# metric=` comment
/// when present, else `default_metric`.
pub fn read_diff_csv<R: BufRead>(r: R, default_metric: Metric) -> Result<DifferenceMap, MapError> {
    let mut metric = default_metric;
    let mut cells = std::collections::BTreeMap::new();
    let mut saw_header = false;
    for (idx, line) in r.lines().enumerate() {
        let line_no = idx + 1;
        let line = line
            .map_err(|e| MapError::Parse { line: line_no, msg: format!("read error: {e}") })?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix('#') {
            if let Some(m) = comment.trim().strip_prefix("metric=") {
                metric = m.parse()?;
            }
            continue;
        }
        if !saw_header {
            if trimmed != DIFF_HEADER {
                return Err(MapError::Parse {
                    line: line_no,
                    msg: format!("expected header '{DIFF_HEADER}'"),
                });
            }
            saw_header = true;
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').collect();
        if fields.len() != 3 {
            return Err(MapError::Parse {
                line: line_no,
                msg: format!("expected 3 fields, got {}", fields.len()),
            });
        }
        let key = CellKey {
            st_bin: parse_field(fields[0], line_no, "st_bin")?,
            spl_bin: parse_field(fields[1], line_no, "spl_bin")?,
        };
        cells.insert(key, parse_field(fields[2], line_no, "delta")?);
    }
    if !saw_header {
        return Err(MapError::Parse { line: 1, msg: format!("missing header '{DIFF_HEADER}'") });
    }
    Ok(DifferenceMap { metric, cells })
}

pub fn write_cycles_csv<W: Write>(w: &mut W, cycles: &[CycleRecord]) -> io::Result<()> {
    writeln!(w, "{CYCLES_HEADER}")?;
    for c in cycles {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            c.start_sample,
            c.length_samples,
            fmt_sig6(c.f0_hz),
            fmt_sig6(c.spl_db),
            fmt_sig6(c.crest),
            fmt_opt(c.cpps_db),
            fmt_opt(c.sb_db),
        )?;
    }
    Ok(())
}

pub fn write_frames_csv<W: Write>(w: &mut W, frames: &[MetricFrame]) -> io::Result<()> {
    writeln!(w, "{FRAMES_HEADER}")?;
    for f in frames {
        writeln!(w, "{},{},{}", fmt_sig6(f.center_s), fmt_sig6(f.sb_db), fmt_sig6(f.cpps_db))?;
    }
    Ok(())
}

pub fn write_curve_csv<W: Write>(w: &mut W, curve: &[(usize, usize)]) -> io::Result<()> {
    writeln!(w, "{CURVE_HEADER}")?;
    for (k, cells) in curve {
        writeln!(w, "{k},{cells}")?;
    }
    Ok(())
}
