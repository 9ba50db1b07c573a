//! Command-line front end: analyze WAV corpora into voice-map CSVs, then
//! compare, summarize, measure coverage, and render them.
//!
//! Exit codes: 0 success, 2 input or parse error, 3 empty result
//! (no voiced content, too few cells).

mod config;
mod render;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use voicemap_core::{
    analyze_buffer, coverage_curve, csvio, diff, load_wav, stats, BufferAnalysis, MapError,
    MapStats, Metric, VoiceMap, Weighting,
};

use config::RunConfig;
use render::{render_diff, render_map, RenderOptions};

#[derive(Parser)]
#[command(name = "voicemap", version, about = "Cycle-synchronous voice maps for speech audio")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze WAV files into one merged voice-map CSV.
    Analyze {
        /// Input WAV files (16-bit PCM mono).
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Output map CSV path.
        #[arg(long)]
        out: PathBuf,
        /// key=value config file.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Also write per-input cycle CSVs next to --out.
        #[arg(long)]
        dump_cycles: bool,
        /// Also write per-input frame CSVs next to --out.
        #[arg(long)]
        dump_frames: bool,
    },
    /// Difference map and statistics between two map CSVs (A minus B).
    Compare {
        map_a: PathBuf,
        map_b: PathBuf,
        /// Metric to difference: f0_hz, spl_db, crest, sb_db, cpps_db.
        #[arg(long)]
        metric: String,
        /// Output prefix; writes <prefix>.diff.csv and <prefix>.stats.csv.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Statistic weighting: cell or cycle.
        #[arg(long)]
        weighting: Option<String>,
    },
    /// Cumulative occupied-cell curve over map CSVs, in the given order.
    Coverage {
        #[arg(required = true)]
        maps: Vec<PathBuf>,
        /// Occupancy threshold per cell.
        #[arg(long)]
        min_cycles: Option<u64>,
        /// Output curve CSV path.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Render a map or difference CSV as SVG.
    Render {
        input: PathBuf,
        /// Metric column (map CSVs) or fallback metric label (diff CSVs).
        #[arg(long)]
        metric: String,
        /// Output SVG path.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Summary statistics of a map CSV, optionally against a reference.
    Stats {
        map: PathBuf,
        /// Reference map CSV for the difference column.
        #[arg(long = "ref")]
        reference: Option<PathBuf>,
        /// Also write a machine-readable stats CSV here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Statistic weighting: cell or cycle.
        #[arg(long)]
        weighting: Option<String>,
    },
}

#[derive(Debug)]
enum AppError {
    /// Unreadable or malformed input, unknown metric, bad config: exit 2.
    Input(String),
    /// Structurally fine but nothing to report: exit 3.
    Empty(String),
}

impl AppError {
    fn code(&self) -> u8 {
        match self {
            AppError::Input(_) => 2,
            AppError::Empty(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            AppError::Input(m) | AppError::Empty(m) => m,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message());
            ExitCode::from(err.code())
        }
    }
}

fn run(command: Command) -> Result<(), AppError> {
    match command {
        Command::Analyze { inputs, out, config, dump_cycles, dump_frames } => {
            let cfg = load_config(config.as_deref())?;
            cmd_analyze(&inputs, &out, &cfg, dump_cycles, dump_frames)
        }
        Command::Compare { map_a, map_b, metric, out, config, weighting } => {
            let mut cfg = load_config(config.as_deref())?;
            apply_weighting(&mut cfg, weighting.as_deref())?;
            let metric = parse_metric(&metric)?;
            cmd_compare(&map_a, &map_b, metric, &out, &cfg)
        }
        Command::Coverage { maps, min_cycles, out, config } => {
            let mut cfg = load_config(config.as_deref())?;
            if let Some(m) = min_cycles {
                cfg.min_cycles_per_cell = m;
            }
            cmd_coverage(&maps, &out, &cfg)
        }
        Command::Render { input, metric, out, config } => {
            let cfg = load_config(config.as_deref())?;
            let metric = parse_metric(&metric)?;
            cmd_render(&input, metric, &out, &cfg)
        }
        Command::Stats { map, reference, out, config, weighting } => {
            let mut cfg = load_config(config.as_deref())?;
            apply_weighting(&mut cfg, weighting.as_deref())?;
            cmd_stats(&map, reference.as_deref(), out.as_deref(), &cfg)
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<RunConfig, AppError> {
    match path {
        Some(p) => RunConfig::load(p).map_err(AppError::Input),
        None => Ok(RunConfig::default()),
    }
}

fn apply_weighting(cfg: &mut RunConfig, flag: Option<&str>) -> Result<(), AppError> {
    if let Some(w) = flag {
        cfg.weighting = w.parse::<Weighting>().map_err(AppError::Input)?;
    }
    Ok(())
}

fn parse_metric(name: &str) -> Result<Metric, AppError> {
    name.parse().map_err(|e: MapError| AppError::Input(e.to_string()))
}

fn read_map(path: &Path) -> Result<VoiceMap, AppError> {
    let file = fs::File::open(path)
        .map_err(|e| AppError::Input(format!("cannot open {}: {e}", path.display())))?;
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    csvio::read_map_csv(std::io::BufReader::new(file), &stem)
        .map_err(|e| AppError::Input(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), AppError> {
    fs::write(path, contents)
        .map_err(|e| AppError::Input(format!("cannot write {}: {e}", path.display())))
}

fn cmd_analyze(
    inputs: &[PathBuf],
    out: &Path,
    cfg: &RunConfig,
    dump_cycles: bool,
    dump_frames: bool,
) -> Result<(), AppError> {
    let mut sorted: Vec<&PathBuf> = inputs.iter().collect();
    sorted.sort_by_key(|p| p.to_string_lossy().into_owned());
    let analysis_cfg = cfg.analysis();

    let results: Vec<Result<(String, BufferAnalysis), AppError>> = sorted
        .par_iter()
        .map(|path| {
            let buf = load_wav(path).map_err(|e| AppError::Input(e.to_string()))?;
            let analysis = analyze_buffer(&buf, &analysis_cfg)
                .map_err(|e| AppError::Input(format!("{}: {e}", path.display())))?;
            Ok((buf.source_id, analysis))
        })
        .collect();

    let out_dir = out.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut merged = VoiceMap::new(map_label(&sorted, out));
    let mut comments = cfg.comment_pairs();
    let mut total_cycles = 0u64;
    for result in results {
        let (source, analysis) = result?;
        total_cycles += analysis.cycles.len() as u64;
        let map = analysis.to_map(&source);
        merged = merged.merge(&map);
        comments.push(("input".into(), source.clone()));
        if dump_cycles {
            let mut bytes = Vec::new();
            csvio::write_cycles_csv(&mut bytes, &analysis.cycles)
                .map_err(|e| AppError::Input(e.to_string()))?;
            write_file(&out_dir.join(format!("{source}.cycles.csv")), &bytes)?;
        }
        if dump_frames {
            let mut bytes = Vec::new();
            csvio::write_frames_csv(&mut bytes, &analysis.frames)
                .map_err(|e| AppError::Input(e.to_string()))?;
            write_file(&out_dir.join(format!("{source}.frames.csv")), &bytes)?;
        }
    }

    if total_cycles == 0 {
        return Err(AppError::Empty("no voiced content".into()));
    }
    let mut bytes = Vec::new();
    csvio::write_map_csv(&mut bytes, &merged, &comments)
        .map_err(|e| AppError::Input(e.to_string()))?;
    write_file(out, &bytes)?;
    println!(
        "{} file(s): {} cycles, {} occupied cells -> {}",
        sorted.len(),
        total_cycles,
        merged.occupied_cells(),
        out.display()
    );
    Ok(())
}

fn map_label(inputs: &[&PathBuf], out: &Path) -> String {
    if inputs.len() == 1 {
        inputs[0].file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
    } else {
        out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "corpus".into())
    }
}

fn cmd_compare(
    map_a_path: &Path,
    map_b_path: &Path,
    metric: Metric,
    out_prefix: &Path,
    cfg: &RunConfig,
) -> Result<(), AppError> {
    let map_a = read_map(map_a_path)?;
    let map_b = read_map(map_b_path)?;
    let delta = diff(&map_a, &map_b, metric);
    let overlap = voicemap_core::overlap_area(&map_a, &map_b);

    let comments = vec![("a".to_string(), map_a.source.clone()), ("b".to_string(), map_b.source.clone())];
    let mut bytes = Vec::new();
    csvio::write_diff_csv(&mut bytes, &delta, &comments).map_err(|e| AppError::Input(e.to_string()))?;
    let diff_path = suffixed(out_prefix, ".diff.csv");
    write_file(&diff_path, &bytes)?;

    if delta.cells.is_empty() {
        eprintln!(
            "warning: empty overlap between {} and {} for {metric}; wrote empty diff",
            map_a.source, map_b.source
        );
    }
    println!("overlap cells: {overlap} ({} with {metric} on both sides)", delta.cells.len());

    match stats(&map_a, metric, Some(&map_b), cfg.weighting) {
        Ok(s) => {
            print!("{}", stats_table(&[s.clone()], true));
            let mut bytes = Vec::new();
            write_stats_csv(&mut bytes, &[s]).map_err(|e| AppError::Input(e.to_string()))?;
            write_file(&suffixed(out_prefix, ".stats.csv"), &bytes)?;
        }
        Err(e) => eprintln!("warning: no statistics for {metric}: {e}"),
    }
    Ok(())
}

fn suffixed(prefix: &Path, suffix: &str) -> PathBuf {
    let mut name = prefix.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    name.push_str(suffix);
    prefix.with_file_name(name)
}

fn cmd_coverage(maps: &[PathBuf], out: &Path, cfg: &RunConfig) -> Result<(), AppError> {
    let loaded: Vec<VoiceMap> = maps.iter().map(|p| read_map(p)).collect::<Result<_, _>>()?;
    let curve = coverage_curve(&loaded, cfg.min_cycles_per_cell);
    let mut bytes = Vec::new();
    csvio::write_curve_csv(&mut bytes, &curve).map_err(|e| AppError::Input(e.to_string()))?;
    write_file(out, &bytes)?;
    if let Some((k, cells)) = curve.last() {
        println!("{k} map(s), final coverage {cells} cells -> {}", out.display());
    }
    Ok(())
}

fn cmd_render(input: &Path, metric: Metric, out: &Path, cfg: &RunConfig) -> Result<(), AppError> {
    let text = fs::read_to_string(input)
        .map_err(|e| AppError::Input(format!("cannot open {}: {e}", input.display())))?;
    let first_data_line =
        text.lines().map(str::trim).find(|l| !l.is_empty() && !l.starts_with('#'));
    let opts = RenderOptions {
        st_range: cfg.render_st_range,
        spl_range: cfg.render_spl_range,
        value_bounds: cfg.color_bounds(metric),
        diff_cap: cfg.diff_cap,
    };
    let svg = match first_data_line {
        Some(csvio::MAP_HEADER) => {
            let stem =
                input.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            let map = csvio::read_map_csv(text.as_bytes(), &stem)
                .map_err(|e| AppError::Input(format!("{}: {e}", input.display())))?;
            render_map(&map, metric, &opts)
        }
        Some(csvio::DIFF_HEADER) => {
            let delta = csvio::read_diff_csv(text.as_bytes(), metric)
                .map_err(|e| AppError::Input(format!("{}: {e}", input.display())))?;
            render_diff(&delta, &opts)
        }
        _ => {
            return Err(AppError::Input(format!(
                "{}: not a voice-map or difference CSV",
                input.display()
            )))
        }
    };
    write_file(out, svg.as_bytes())?;
    println!("rendered {} -> {}", input.display(), out.display());
    Ok(())
}

fn cmd_stats(
    map_path: &Path,
    reference: Option<&Path>,
    out: Option<&Path>,
    cfg: &RunConfig,
) -> Result<(), AppError> {
    let map = read_map(map_path)?;
    if map.occupied_cells() < 2 {
        return Err(AppError::Empty(format!(
            "{} has {} occupied cell(s); need at least 2",
            map_path.display(),
            map.occupied_cells()
        )));
    }
    let ref_map = reference.map(read_map).transpose()?;
    let mut rows = Vec::new();
    for metric in Metric::ALL {
        if let Ok(s) = stats(&map, metric, ref_map.as_ref(), cfg.weighting) {
            rows.push(s);
        }
    }
    if rows.is_empty() {
        return Err(AppError::Empty("no metric has enough occupied cells".into()));
    }
    print!("{}", stats_table(&rows, ref_map.is_some()));
    if let Some(out) = out {
        let mut bytes = Vec::new();
        write_stats_csv(&mut bytes, &rows).map_err(|e| AppError::Input(e.to_string()))?;
        write_file(out, &bytes)?;
    }
    Ok(())
}

/// Aligned plain-text table: mean ± std, CI range, optional diff column.
fn stats_table(rows: &[MapStats], with_ref: bool) -> String {
    let mut out = String::new();
    let header = if with_ref {
        format!(
            "{:<10} {:>18} {:>20} {:>15} {:>8}\n",
            "metric", "mean ± std", "CI range (95%)", "diff from ref", "cells"
        )
    } else {
        format!("{:<10} {:>18} {:>20} {:>8}\n", "metric", "mean ± std", "CI range (95%)", "cells")
    };
    out.push_str(&header);
    for s in rows {
        let mean_std = format!("{:.2} ± {:.2}", s.mean, s.std);
        let ci = format!("[{:.2}, {:.2}]", s.ci95_low, s.ci95_high);
        if with_ref {
            let diff = match s.diff_from_ref {
                Some(d) => format!("{d:+.2}"),
                None => "-".to_string(),
            };
            out.push_str(&format!(
                "{:<10} {:>18} {:>20} {:>15} {:>8}\n",
                s.metric.column(),
                mean_std,
                ci,
                diff,
                s.n_cells
            ));
        } else {
            out.push_str(&format!(
                "{:<10} {:>18} {:>20} {:>8}\n",
                s.metric.column(),
                mean_std,
                ci,
                s.n_cells
            ));
        }
    }
    out
}

fn write_stats_csv<W: Write>(w: &mut W, rows: &[MapStats]) -> std::io::Result<()> {
    writeln!(w, "metric,mean,std,ci_low,ci_high,n_cells,n_obs,diff_from_ref")?;
    for s in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            s.metric.column(),
            csvio::fmt_sig6(s.mean),
            csvio::fmt_sig6(s.std),
            csvio::fmt_sig6(s.ci95_low),
            csvio::fmt_sig6(s.ci95_high),
            s.n_cells,
            s.n_obs,
            s.diff_from_ref.map(csvio::fmt_sig6).unwrap_or_default(),
        )?;
    }
    Ok(())
}
