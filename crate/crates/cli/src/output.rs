use std::io::Write;
use std::path::Path;

use tempfile::NamedTempFile;

/// Write `contents` to `path` through a temporary file in the same directory,
/// so readers never see a partial file; standard output when `path` is `None`.
pub fn emit(path: Option<&Path>, contents: &str) -> std::io::Result<()> {
    let Some(path) = path else {
        let mut out = std::io::stdout().lock();
        out.write_all(contents.as_bytes())?;
        return out.flush();
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Seventeen significant digits.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn csv_table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

const WIDTH: f64 = 640.0;
const PANEL: f64 = 260.0;
const MARGIN: f64 = 50.0;

fn panel(out: &mut String, top: f64, title: &str, xs: &[f64], ys: &[f64]) {
    let (lo, hi) = ys
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &y| (a.min(y), b.max(y)));
    let span = if hi > lo { hi - lo } else { 1.0 };
    let x_max = std::f64::consts::PI;
    let px = |x: f64| MARGIN + (WIDTH - 2.0 * MARGIN) * x / x_max;
    let py = |y: f64| top + PANEL - 30.0 - (PANEL - 60.0) * (y - lo) / span;
    out.push_str(&format!(
        "<rect x=\"{MARGIN}\" y=\"{:.1}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"none\" stroke=\"#888\"/>\n",
        top + 30.0,
        WIDTH - 2.0 * MARGIN,
        PANEL - 60.0
    ));
    out.push_str(&format!(
        "<text x=\"{MARGIN}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"14\">{title}</text>\n",
        top + 20.0
    ));
    out.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{}</text>\n",
        MARGIN - 4.0,
        py(hi) + 4.0,
        short(hi)
    ));
    out.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{}</text>\n",
        MARGIN - 4.0,
        py(lo) + 4.0,
        short(lo)
    ));
    let points: Vec<String> = xs.iter().zip(ys).map(|(&x, &y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
    out.push_str(&format!(
        "<polyline fill=\"none\" stroke=\"#1f4e99\" stroke-width=\"1.5\" points=\"{}\"/>\n",
        points.join(" ")
    ));
    out.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"11\">0</text>\n<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">&#960;</text>\n",
        MARGIN,
        top + PANEL - 14.0,
        WIDTH - MARGIN,
        top + PANEL - 14.0
    ));
}

fn short(v: f64) -> String {
    format!("{v:.4}")
}

/// Two stacked line plots of `psi(theta)` and `chi(theta)`.
pub fn profile_svg(title: &str, theta: &[f64], psi: &[f64], chi: &[f64]) -> String {
    let height = 2.0 * PANEL + 30.0;
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{height}\" viewBox=\"0 0 {WIDTH} {height}\">\n"
    );
    out.push_str(&format!(
        "<text x=\"{:.1}\" y=\"18\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">{title}</text>\n",
        WIDTH / 2.0
    ));
    panel(&mut out, 20.0, "psi(theta)", theta, psi);
    panel(&mut out, 20.0 + PANEL, "chi(theta) = sin(psi)/sin(theta)", theta, chi);
    out.push_str("</svg>\n");
    out
}
