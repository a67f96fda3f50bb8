//! File writers: profile CSV, JSON reports and SVG line charts.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use bihermitian_core::curvature::{endpoint_spectra, node_spectra, RicciSpectrum};
use bihermitian_core::ode::ProfileGrid;
use serde::Serialize;

use crate::CliError;

pub const CSV_HEADER: [&str; 10] = ["t", "H", "F", "G", "dF", "dG", "lambda0", "lambda1", "lambda2", "tau"];

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn fmt17(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        "NaN".to_string()
    }
}

/// Spectrum at every node, with the end values taken from the one-sided
/// extrapolation since the closed form is singular where `F = 0`.
pub fn grid_spectra(grid: &ProfileGrid) -> Vec<Option<RicciSpectrum>> {
    let mut spectra = node_spectra(grid);
    if let (Some([left, right]), Some(last)) = (endpoint_spectra(grid), spectra.len().checked_sub(1)) {
        spectra[0] = Some(left);
        spectra[last] = Some(right);
    }
    spectra
}

pub fn write_profile_csv(path: &Path, grid: &ProfileGrid, spectra: &[Option<RicciSpectrum>]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::io(path, e))?;
    w.write_record(CSV_HEADER).map_err(|e| CliError::io(path, e))?;
    for (i, sp) in spectra.iter().enumerate().take(grid.len()) {
        let sp = sp.unwrap_or(RicciSpectrum { lambda0: f64::NAN, lambda1: f64::NAN, lambda2: f64::NAN, tau: f64::NAN });
        let row = [
            grid.t[i], grid.h[i], grid.f[i], grid.g[i], grid.df[i], grid.dg[i], sp.lambda0, sp.lambda1, sp.lambda2, sp.tau,
        ];
        w.write_record(row.map(fmt17)).map_err(|e| CliError::io(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::io(path, e))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 56.0;

fn finite_range(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    values.filter(|v| v.is_finite()).fold(None, |acc, v| match acc {
        None => Some((v, v)),
        Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
    })
}

/// A single-series line chart. Non-finite samples split the polyline.
pub fn line_chart(title: &str, xlabel: &str, xs: &[f64], ys: &[f64]) -> String {
    let (x0, x1) = finite_range(xs.iter().copied()).unwrap_or((0.0, 1.0));
    let (mut y0, mut y1) = finite_range(ys.iter().copied()).unwrap_or((0.0, 1.0));
    if y1 - y0 < 1e-12 * y0.abs().max(1.0) {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let xspan = if x1 > x0 { x1 - x0 } else { 1.0 };
    let px = |x: f64| MARGIN + (x - x0) / xspan * (WIDTH - 2.0 * MARGIN);
    let py = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    );
    let _ = writeln!(svg, r#"<text x="{}" y="{}" font-size="16" text-anchor="middle">{title}</text>"#, WIDTH / 2.0, MARGIN / 2.0);
    let _ = writeln!(svg, r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">{xlabel}</text>"#, WIDTH / 2.0, HEIGHT - 12.0);
    let font = r#"font-size="11" font-family="monospace""#;
    let _ = writeln!(svg, r#"<text x="{MARGIN}" y="{}" {font} text-anchor="start">{x0:.4}</text>"#, HEIGHT - MARGIN + 16.0);
    let _ = writeln!(svg, r#"<text x="{}" y="{}" {font} text-anchor="end">{x1:.4}</text>"#, WIDTH - MARGIN, HEIGHT - MARGIN + 16.0);
    let _ = writeln!(svg, r#"<text x="{}" y="{}" {font} text-anchor="end">{y0:.4}</text>"#, MARGIN - 4.0, HEIGHT - MARGIN);
    let _ = writeln!(svg, r#"<text x="{}" y="{}" {font} text-anchor="end">{y1:.4}</text>"#, MARGIN - 4.0, MARGIN + 10.0);

    let mut segment: Vec<String> = Vec::new();
    let flush = |segment: &mut Vec<String>, svg: &mut String| {
        if segment.len() > 1 {
            let _ = writeln!(svg, r#"<polyline fill="none" stroke="steelblue" stroke-width="1.5" points="{}"/>"#, segment.join(" "));
        }
        segment.clear();
    };
    for (&x, &y) in xs.iter().zip(ys) {
        if x.is_finite() && y.is_finite() {
            segment.push(format!("{:.2},{:.2}", px(x), py(y)));
        } else {
            flush(&mut segment, &mut svg);
        }
    }
    flush(&mut segment, &mut svg);
    svg.push_str("</svg>\n");
    svg
}

/// One chart per quantity: `F`, `G`, the three eigenvalues and `τ`.
pub fn write_svgs(dir: &Path, grid: &ProfileGrid, spectra: &[Option<RicciSpectrum>]) -> Result<Vec<String>, CliError> {
    let pick = |f: fn(&RicciSpectrum) -> f64| -> Vec<f64> { spectra.iter().map(|s| s.as_ref().map_or(f64::NAN, f)).collect() };
    let series: [(&str, Vec<f64>); 6] = [
        ("F", grid.f.clone()),
        ("G", grid.g.clone()),
        ("lambda0", pick(|s| s.lambda0)),
        ("lambda1", pick(|s| s.lambda1)),
        ("lambda2", pick(|s| s.lambda2)),
        ("tau", pick(|s| s.tau)),
    ];
    let mut names = Vec::new();
    for (name, ys) in series {
        let file = format!("{name}.svg");
        let path = dir.join(&file);
        fs::write(&path, line_chart(name, "t", &grid.t, &ys)).map_err(|e| CliError::io(&path, e))?;
        names.push(file);
    }
    Ok(names)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23] {
            let s = fmt17(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
            let mantissa = s.split('e').next().unwrap().trim_start_matches('-');
            assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 17);
        }
        assert_eq!(fmt17(f64::NAN), "NaN");
    }

    #[test]
    fn chart_breaks_on_nan() {
        let svg = line_chart("y", "t", &[0.0, 1.0, 2.0, 3.0, 4.0], &[1.0, 2.0, f64::NAN, 3.0, 4.0]);
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
    }

    #[test]
    fn flat_series_still_draws() {
        let svg = line_chart("c", "t", &[0.0, 1.0], &[2.0, 2.0]);
        assert_eq!(svg.matches("<polyline").count(), 1);
    }
}
