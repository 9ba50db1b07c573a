//! SVG rendering of voice maps and difference maps.
//!
//! Output is plain SVG text built in cell-key order with fixed number
//! formatting, so identical inputs give byte-identical files. Map mode
//! paints each occupied cell on a cold-to-warm scale with fixed bounds;
//! diff mode paints positive deltas green and negative deltas red, with
//! saturation proportional to the magnitude up to a cap.

use voicemap_core::{DifferenceMap, Metric, VoiceMap};

const CELL_W: f64 = 14.0;
const CELL_H: f64 = 7.0;
const MARGIN_LEFT: f64 = 64.0;
const MARGIN_RIGHT: f64 = 110.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 48.0;
const BAR_SEGMENTS: usize = 32;

#[derive(Debug, Clone, Copy)]
pub struct RenderOptions {
    pub st_range: (i32, i32),
    pub spl_range: (i32, i32),
    /// Color scale bounds for map mode.
    pub value_bounds: (f64, f64),
    /// Saturation cap for diff mode.
    pub diff_cap: f64,
}

struct Canvas {
    svg: String,
    st_range: (i32, i32),
    spl_range: (i32, i32),
    plot_w: f64,
    plot_h: f64,
}

impl Canvas {
    fn new(title: &str, st_range: (i32, i32), spl_range: (i32, i32)) -> Self {
        let plot_w = (st_range.1 - st_range.0).max(1) as f64 * CELL_W;
        let plot_h = (spl_range.1 - spl_range.0).max(1) as f64 * CELL_H;
        let total_w = MARGIN_LEFT + plot_w + MARGIN_RIGHT;
        let total_h = MARGIN_TOP + plot_h + MARGIN_BOTTOM;
        let mut svg = String::with_capacity(16 * 1024);
        svg.push_str(&format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{total_w:.1}\" height=\"{total_h:.1}\" \
             viewBox=\"0 0 {total_w:.1} {total_h:.1}\" font-family=\"sans-serif\">\n"
        ));
        svg.push_str(&format!(
            "<rect x=\"0\" y=\"0\" width=\"{total_w:.1}\" height=\"{total_h:.1}\" fill=\"#ffffff\"/>\n"
        ));
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"22\" font-size=\"14\" text-anchor=\"middle\">{}</text>\n",
            MARGIN_LEFT + plot_w / 2.0,
            xml_escape(title)
        ));
        Self { svg, st_range, spl_range, plot_w, plot_h }
    }

    fn x(&self, st: f64) -> f64 {
        MARGIN_LEFT + (st - self.st_range.0 as f64) * CELL_W
    }

    fn y(&self, spl: f64) -> f64 {
        MARGIN_TOP + (self.spl_range.1 as f64 - spl) * CELL_H
    }

    fn cell(&mut self, st: i32, spl: i32, color: (u8, u8, u8)) {
        if st < self.st_range.0
            || st >= self.st_range.1
            || spl < self.spl_range.0
            || spl >= self.spl_range.1
        {
            return;
        }
        self.svg.push_str(&format!(
            "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"{CELL_W:.1}\" height=\"{CELL_H:.1}\" fill=\"{}\"/>\n",
            self.x(st as f64),
            self.y((spl + 1) as f64),
            hex(color)
        ));
    }

    fn axes(&mut self) {
        let x0 = MARGIN_LEFT;
        let y0 = MARGIN_TOP;
        self.svg.push_str(&format!(
            "<rect x=\"{x0:.1}\" y=\"{y0:.1}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"none\" \
             stroke=\"#333333\" stroke-width=\"1\"/>\n",
            self.plot_w, self.plot_h
        ));
        let mut st = self.st_range.0 - self.st_range.0.rem_euclid(6);
        if st < self.st_range.0 {
            st += 6;
        }
        while st <= self.st_range.1 {
            let x = self.x(st as f64);
            let y_bot = y0 + self.plot_h;
            self.svg.push_str(&format!(
                "<line x1=\"{x:.1}\" y1=\"{y_bot:.1}\" x2=\"{x:.1}\" y2=\"{:.1}\" stroke=\"#333333\"/>\n",
                y_bot + 4.0
            ));
            self.svg.push_str(&format!(
                "<text x=\"{x:.1}\" y=\"{:.1}\" font-size=\"10\" text-anchor=\"middle\">{st}</text>\n",
                y_bot + 16.0
            ));
            st += 6;
        }
        let mut spl = self.spl_range.0 - self.spl_range.0.rem_euclid(10);
        if spl < self.spl_range.0 {
            spl += 10;
        }
        while spl <= self.spl_range.1 {
            let y = self.y(spl as f64);
            self.svg.push_str(&format!(
                "<line x1=\"{:.1}\" y1=\"{y:.1}\" x2=\"{x0:.1}\" y2=\"{y:.1}\" stroke=\"#333333\"/>\n",
                x0 - 4.0
            ));
            self.svg.push_str(&format!(
                "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"10\" text-anchor=\"end\">{spl}</text>\n",
                x0 - 7.0,
                y + 3.5
            ));
            spl += 10;
        }
        self.svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"11\" text-anchor=\"middle\">pitch (semitones re 55 Hz)</text>\n",
            x0 + self.plot_w / 2.0,
            y0 + self.plot_h + 36.0
        ));
        self.svg.push_str(&format!(
            "<text x=\"14\" y=\"{:.1}\" font-size=\"11\" text-anchor=\"middle\" \
             transform=\"rotate(-90 14 {:.1})\">SPL (dB)</text>\n",
            y0 + self.plot_h / 2.0,
            y0 + self.plot_h / 2.0
        ));
    }

    /// Vertical color bar with min/mid/max labels.
    fn color_bar(&mut self, label: &str, lo: f64, hi: f64, color_of: impl Fn(f64) -> (u8, u8, u8)) {
        let x = MARGIN_LEFT + self.plot_w + 26.0;
        let seg_h = self.plot_h / BAR_SEGMENTS as f64;
        for i in 0..BAR_SEGMENTS {
            // segment 0 at the bottom = lo
            let t = (i as f64 + 0.5) / BAR_SEGMENTS as f64;
            let y = MARGIN_TOP + self.plot_h - (i + 1) as f64 * seg_h;
            self.svg.push_str(&format!(
                "<rect x=\"{x:.1}\" y=\"{y:.1}\" width=\"14\" height=\"{seg_h:.2}\" fill=\"{}\"/>\n",
                hex(color_of(lo + t * (hi - lo)))
            ));
        }
        self.svg.push_str(&format!(
            "<rect x=\"{x:.1}\" y=\"{:.1}\" width=\"14\" height=\"{:.1}\" fill=\"none\" stroke=\"#333333\"/>\n",
            MARGIN_TOP, self.plot_h
        ));
        for (value, frac) in [(lo, 0.0), ((lo + hi) / 2.0, 0.5), (hi, 1.0)] {
            let y = MARGIN_TOP + self.plot_h * (1.0 - frac);
            self.svg.push_str(&format!(
                "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"10\">{value:.1}</text>\n",
                x + 18.0,
                y + 3.5
            ));
        }
        self.svg.push_str(&format!(
            "<text x=\"{x:.1}\" y=\"{:.1}\" font-size=\"10\">{}</text>\n",
            MARGIN_TOP - 8.0,
            xml_escape(label)
        ));
    }

    fn finish(mut self) -> String {
        self.svg.push_str("</svg>\n");
        self.svg
    }
}

/// Cold-to-warm scale: blue through neutral grey to red.
fn coolwarm(t: f64) -> (u8, u8, u8) {
    let t = t.clamp(0.0, 1.0);
    let (a, b, frac) = if t < 0.5 {
        ((59.0, 76.0, 192.0), (221.0, 221.0, 221.0), t * 2.0)
    } else {
        ((221.0, 221.0, 221.0), (180.0, 4.0, 38.0), (t - 0.5) * 2.0)
    };
    (
        (a.0 + (b.0 - a.0) * frac).round() as u8,
        (a.1 + (b.1 - a.1) * frac).round() as u8,
        (a.2 + (b.2 - a.2) * frac).round() as u8,
    )
}

/// Diff scale: white toward green for positive, white toward red for
/// negative; `t` in [-1, 1].
fn diff_color(t: f64) -> (u8, u8, u8) {
    let t = t.clamp(-1.0, 1.0);
    let (target, frac): ((f64, f64, f64), f64) =
        if t >= 0.0 { ((0.0, 150.0, 60.0), t) } else { ((200.0, 30.0, 30.0), -t) };
    (
        (255.0 + (target.0 - 255.0) * frac).round() as u8,
        (255.0 + (target.1 - 255.0) * frac).round() as u8,
        (255.0 + (target.2 - 255.0) * frac).round() as u8,
    )
}

fn hex((r, g, b): (u8, u8, u8)) -> String {
    format!("#{r:02x}{g:02x}{b:02x}")
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn render_map(map: &VoiceMap, metric: Metric, opts: &RenderOptions) -> String {
    let title = format!("{} voice map — {}", metric, map.source);
    let mut canvas = Canvas::new(&title, opts.st_range, opts.spl_range);
    let (lo, hi) = opts.value_bounds;
    for (key, acc) in map.cells() {
        if let Some(value) = acc.mean(metric) {
            let t = if hi > lo { (value - lo) / (hi - lo) } else { 0.5 };
            canvas.cell(key.st_bin, key.spl_bin, coolwarm(t));
        }
    }
    canvas.axes();
    canvas.color_bar(&metric.to_string(), lo, hi, coolwarm);
    canvas.finish()
}

pub fn render_diff(diff: &DifferenceMap, opts: &RenderOptions) -> String {
    let title = format!("{} difference map", diff.metric);
    let mut canvas = Canvas::new(&title, opts.st_range, opts.spl_range);
    let cap = if opts.diff_cap > 0.0 { opts.diff_cap } else { 1.0 };
    for (key, &delta) in &diff.cells {
        canvas.cell(key.st_bin, key.spl_bin, diff_color(delta / cap));
    }
    canvas.axes();
    canvas.color_bar(
        &format!("Δ{}", diff.metric),
        -cap,
        cap,
        move |v| diff_color(v / cap),
    );
    canvas.finish()
}
