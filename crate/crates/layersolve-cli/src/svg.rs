//! Self-contained SVG log-log convergence plot.
//!
//! One polyline per scheme table (eps-uniform error vs N, both axes log2)
//! plus N^-1 and N^-2 reference slopes anchored at the first data point.

use layersolve::{fmt_sig6, ConvergenceTable};

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 540.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 160.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 60.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

struct Series {
    label: String,
    dashed: bool,
    points: Vec<(f64, f64)>, // (log2 N, log2 E)
}

/// Renders the eps-uniform errors of `tables` as an SVG 1.1 document.
pub fn convergence_svg(tables: &[&ConvergenceTable], title: &str) -> String {
    let mut series: Vec<Series> = Vec::new();
    for table in tables {
        let points: Vec<(f64, f64)> = table
            .n_list
            .iter()
            .enumerate()
            .filter_map(|(ni, &n)| {
                table.e_uniform(ni).map(|e| ((n as f64).log2(), e.log2()))
            })
            .collect();
        if !points.is_empty() {
            series.push(Series {
                label: table.scheme.label().to_string(),
                dashed: false,
                points,
            });
        }
    }

    // reference slopes through the first point of the first series
    if let Some(first) = series.first() {
        let (x0, y0) = first.points[0];
        let xs: Vec<f64> = first.points.iter().map(|p| p.0).collect();
        for k in [1.0, 2.0] {
            series.push(Series {
                label: format!("slope N^-{k:.0}"),
                dashed: true,
                points: xs.iter().map(|&x| (x, y0 - k * (x - x0))).collect(),
            });
        }
    }

    let (mut x_min, mut x_max) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y_min, mut y_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for s in &series {
        for &(x, y) in &s.points {
            x_min = x_min.min(x);
            x_max = x_max.max(x);
            y_min = y_min.min(y);
            y_max = y_max.max(y);
        }
    }
    if !x_min.is_finite() {
        (x_min, x_max, y_min, y_max) = (0.0, 1.0, 0.0, 1.0);
    }
    if x_max == x_min {
        x_max = x_min + 1.0;
    }
    if y_max == y_min {
        y_max = y_min + 1.0;
    }

    let plot_w = WIDTH - MARGIN_L - MARGIN_R;
    let plot_h = HEIGHT - MARGIN_T - MARGIN_B;
    let sx = move |x: f64| MARGIN_L + (x - x_min) / (x_max - x_min) * plot_w;
    let sy = move |y: f64| MARGIN_T + (y_max - y) / (y_max - y_min) * plot_h;

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    out.push_str(&format!(
        "<text x=\"{}\" y=\"22\" font-family=\"sans-serif\" font-size=\"15\" text-anchor=\"middle\">{}</text>\n",
        MARGIN_L + plot_w / 2.0,
        xml_escape(title)
    ));

    // axes box and ticks
    out.push_str(&format!(
        "<rect x=\"{MARGIN_L}\" y=\"{MARGIN_T}\" width=\"{plot_w}\" height=\"{plot_h}\" fill=\"none\" stroke=\"#333\"/>\n"
    ));
    let x_lo_tick = x_min.ceil() as i64;
    let x_hi_tick = x_max.floor() as i64;
    for xt in x_lo_tick..=x_hi_tick {
        let px = sx(xt as f64);
        out.push_str(&format!(
            "<line x1=\"{px}\" y1=\"{}\" x2=\"{px}\" y2=\"{}\" stroke=\"#bbb\" stroke-width=\"0.5\"/>\n",
            MARGIN_T,
            MARGIN_T + plot_h
        ));
        out.push_str(&format!(
            "<text x=\"{px}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">{}</text>\n",
            MARGIN_T + plot_h + 18.0,
            1u64 << xt.max(0) as u32
        ));
    }
    let y_lo_tick = y_min.ceil() as i64;
    let y_hi_tick = y_max.floor() as i64;
    let y_step = (((y_hi_tick - y_lo_tick) / 10) + 1).max(1);
    let mut yt = y_lo_tick;
    while yt <= y_hi_tick {
        let py = sy(yt as f64);
        out.push_str(&format!(
            "<line x1=\"{}\" y1=\"{py}\" x2=\"{}\" y2=\"{py}\" stroke=\"#bbb\" stroke-width=\"0.5\"/>\n",
            MARGIN_L,
            MARGIN_L + plot_w
        ));
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"end\">2^{yt}</text>\n",
            MARGIN_L - 8.0,
            py + 4.0
        ));
        yt += y_step;
    }
    out.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">N</text>\n",
        MARGIN_L + plot_w / 2.0,
        HEIGHT - 18.0
    ));
    out.push_str(&format!(
        "<text x=\"18\" y=\"{}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 18 {})\">eps-uniform error</text>\n",
        MARGIN_T + plot_h / 2.0,
        MARGIN_T + plot_h / 2.0
    ));

    for (idx, s) in series.iter().enumerate() {
        let color = if s.dashed { "#888" } else { COLORS[idx % COLORS.len()] };
        let dash = if s.dashed { " stroke-dasharray=\"6,4\"" } else { "" };
        let pts: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        out.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.8\"{dash} points=\"{}\"/>\n",
            pts.join(" ")
        ));
        if !s.dashed {
            for &(x, y) in &s.points {
                out.push_str(&format!(
                    "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"{color}\"/>\n",
                    sx(x),
                    sy(y)
                ));
            }
        }
        let ly = MARGIN_T + 16.0 + 20.0 * idx as f64;
        let lx = MARGIN_L + plot_w + 12.0;
        out.push_str(&format!(
            "<line x1=\"{lx}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{color}\" stroke-width=\"1.8\"{dash}/>\n",
            ly - 4.0,
            lx + 24.0,
            ly - 4.0
        ));
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{ly}\" font-family=\"sans-serif\" font-size=\"12\">{}</text>\n",
            lx + 30.0,
            xml_escape(&s.label)
        ));
    }

    out.push_str("</svg>\n");
    out
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// First-point annotation used in the plot title.
pub fn title_for(tables: &[&ConvergenceTable], problem_label: &str) -> String {
    let policy = tables
        .first()
        .map(|t| t.m_policy.label())
        .unwrap_or_else(|| "".into());
    let anchor = tables
        .first()
        .and_then(|t| t.e_uniform(0))
        .map(fmt_sig6)
        .unwrap_or_else(|| "-".into());
    format!("eps-uniform convergence, {problem_label} ({policy}); first point {anchor}")
}
