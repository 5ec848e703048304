use std::fmt::Write as _;
use std::path::Path;

use crate::exit::CliError;

/// Columns of a run directory's monitor.csv, in order.
pub const CSV_COLUMNS: [&str; 5] = ["t", "min_value", "argmin_index", "field_scale", "dt"];
/// Half-width of the shaded tolerance band around zero.
pub const BAND: f64 = 1e-5;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 90.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const TICKS: usize = 5;

/// (t, min_value) pairs of a monitor CSV; the header must match CSV_COLUMNS.
pub fn read_series(text: &str) -> Result<Vec<(f64, f64)>, CliError> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| CliError::Schema(e.to_string()))?
        .clone();
    let found: Vec<&str> = headers.iter().collect();
    if found != CSV_COLUMNS {
        let missing: Vec<&str> = CSV_COLUMNS
            .iter()
            .copied()
            .filter(|c| !found.contains(c))
            .collect();
        return Err(CliError::Schema(format!(
            "header {:?}, expected {:?}{}",
            found.join(","),
            CSV_COLUMNS.join(","),
            if missing.is_empty() {
                String::new()
            } else {
                format!(" (missing {})", missing.join(", "))
            }
        )));
    }
    let mut out = vec![];
    for (k, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::Schema(format!("row {}: {e}", k + 1)))?;
        let num = |col: usize| {
            record[col].parse::<f64>().map_err(|_| {
                CliError::Schema(format!(
                    "row {}: {} = {:?} is not a number",
                    k + 1,
                    CSV_COLUMNS[col],
                    &record[col]
                ))
            })
        };
        out.push((num(0)?, num(1)?));
    }
    if out.is_empty() {
        return Err(CliError::Schema("no data rows".into()));
    }
    Ok(out)
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if hi > lo {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    } else {
        (lo - 0.5, hi + 0.5)
    }
}

/// Self-contained SVG of min_value against t with the ±BAND strip shaded.
/// Byte-identical for identical input.
pub fn render_svg(series: &[(f64, f64)], title: &str) -> String {
    let (t_lo, t_hi) = series
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &(t, _)| {
            (a.min(t), b.max(t))
        });
    let (v_lo, v_hi) = series
        .iter()
        .fold((-BAND, BAND), |(a, b), &(_, v)| (a.min(v), b.max(v)));
    let (t_lo, t_hi) = if t_hi > t_lo {
        (t_lo, t_hi)
    } else {
        (t_lo - 0.5, t_hi + 0.5)
    };
    let (v_lo, v_hi) = padded(v_lo, v_hi);
    let (pw, ph) = (WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM);
    let x = |t: f64| LEFT + (t - t_lo) / (t_hi - t_lo) * pw;
    let y = |v: f64| TOP + (v_hi - v) / (v_hi - v_lo) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        s,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let (band_top, band_bottom) = (y(BAND), y(-BAND));
    let _ = writeln!(
        s,
        r##"<rect x="{LEFT:.2}" y="{band_top:.2}" width="{pw:.2}" height="{:.2}" fill="#9ecae1" fill-opacity="0.5"><title>tolerance band ±{BAND:e}</title></rect>"##,
        (band_bottom - band_top).max(1.0)
    );
    let _ = writeln!(
        s,
        r##"<line x1="{LEFT:.2}" y1="{0:.2}" x2="{1:.2}" y2="{0:.2}" stroke="#3182bd" stroke-dasharray="4 3"/>"##,
        y(0.0),
        LEFT + pw
    );
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT:.2}" y="{TOP:.2}" width="{pw:.2}" height="{ph:.2}" fill="none" stroke="black"/>"#
    );
    for k in 0..=TICKS {
        let f = k as f64 / TICKS as f64;
        let (tv, vv) = (t_lo + f * (t_hi - t_lo), v_lo + f * (v_hi - v_lo));
        let (tx, vy) = (x(tv), y(vv));
        let _ = writeln!(
            s,
            r#"<line x1="{tx:.2}" y1="{0:.2}" x2="{tx:.2}" y2="{1:.2}" stroke="black"/>"#,
            TOP + ph,
            TOP + ph + 5.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{tx:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            TOP + ph + 18.0,
            label(tv)
        );
        let _ = writeln!(
            s,
            r#"<line x1="{0:.2}" y1="{vy:.2}" x2="{LEFT:.2}" y2="{vy:.2}" stroke="black"/>"#,
            LEFT - 5.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 8.0,
            vy + 4.0,
            label(vv)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">t</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 10.0
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {0:.2})">min_value</text>"#,
        TOP + ph / 2.0
    );
    let points: Vec<String> = series
        .iter()
        .map(|&(t, v)| format!("{:.2},{:.2}", x(t), y(v)))
        .collect();
    let _ = writeln!(
        s,
        r##"<polyline fill="none" stroke="#d62728" stroke-width="1.5" points="{}"/>"##,
        points.join(" ")
    );
    for &(t, v) in series {
        let _ = writeln!(
            s,
            r##"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="#d62728"><title>t = {t}, min = {v:e}</title></circle>"##,
            x(t),
            y(v)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn label(v: f64) -> String {
    if v == 0.0 || (1e-3..1e4).contains(&v.abs()) {
        format!("{v:.4}")
    } else {
        format!("{v:.2e}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

pub fn plot_file(csv_path: &Path, svg_path: &Path) -> Result<usize, CliError> {
    let text = std::fs::read_to_string(csv_path).map_err(|e| CliError::io(csv_path, e))?;
    let series = read_series(&text)?;
    let title = csv_path
        .parent()
        .and_then(|p| p.file_name())
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    std::fs::write(
        svg_path,
        render_svg(&series, &format!("monitored minimum {title}")),
    )
    .map_err(|e| CliError::io(svg_path, e))?;
    Ok(series.len())
}
