//! CSV tables and self-contained SVG plots.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::CliError;

pub const CONVERGENCE_HEADER: [&str; 7] = ["mesh_kind", "alpha", "n", "h_over_sqrt2", "dt", "error", "order"];

pub const BENCH_HEADER: [&str; 10] = [
    "scheme",
    "mesh_kind",
    "n",
    "n_steps",
    "alpha",
    "n_exp",
    "error",
    "wall_time_total",
    "wall_time_history",
    "peak_history_bytes",
];

/// Six significant digits, scientific notation.
pub fn sci(x: f64) -> String {
    format!("{x:.5e}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub mesh_kind: String,
    pub alpha: f64,
    pub n: usize,
    pub h_over_sqrt2: f64,
    pub dt: f64,
    pub error: f64,
    /// Empty on the first level of a ladder.
    pub order: Option<f64>,
}

impl ConvergenceRow {
    fn record(&self) -> Vec<String> {
        vec![
            self.mesh_kind.clone(),
            sci(self.alpha),
            self.n.to_string(),
            sci(self.h_over_sqrt2),
            sci(self.dt),
            sci(self.error),
            self.order.map(sci).unwrap_or_default(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub scheme: String,
    pub mesh_kind: String,
    pub n: usize,
    pub n_steps: usize,
    pub alpha: f64,
    pub n_exp: usize,
    pub error: f64,
    /// Seconds.
    pub wall_time_total: f64,
    pub wall_time_history: f64,
    pub peak_history_bytes: usize,
}

impl BenchRow {
    fn record(&self) -> Vec<String> {
        vec![
            self.scheme.clone(),
            self.mesh_kind.clone(),
            self.n.to_string(),
            self.n_steps.to_string(),
            sci(self.alpha),
            self.n_exp.to_string(),
            sci(self.error),
            sci(self.wall_time_total),
            sci(self.wall_time_history),
            self.peak_history_bytes.to_string(),
        ]
    }
}

/// Observed orders `log(e_{k−1}/e_k) / log(s_{k−1}/s_k)` for step sizes `s`.
pub fn observed_orders(sizes: &[f64], errors: &[f64]) -> Vec<Option<f64>> {
    (0..errors.len())
        .map(|k| {
            (k > 0).then(|| (errors[k - 1] / errors[k]).ln() / (sizes[k - 1] / sizes[k]).ln())
        })
        .collect()
}

fn write_csv(path: &Path, header: &[&str], records: impl Iterator<Item = Vec<String>>) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in records {
        w.write_record(&r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_convergence_csv(path: &Path, rows: &[ConvergenceRow]) -> Result<(), CliError> {
    write_csv(path, &CONVERGENCE_HEADER, rows.iter().map(ConvergenceRow::record))
}

pub fn write_bench_csv(path: &Path, rows: &[BenchRow]) -> Result<(), CliError> {
    write_csv(path, &BENCH_HEADER, rows.iter().map(BenchRow::record))
}

/// Reads a CSV file into one map per row, keyed by column name.
pub fn read_csv(path: &Path) -> Result<Vec<HashMap<String, String>>, CliError> {
    let mut r = csv::Reader::from_path(path)?;
    let header = r.headers()?.clone();
    r.records()
        .map(|rec| {
            let rec = rec?;
            Ok(header.iter().map(str::to_owned).zip(rec.iter().map(str::to_owned)).collect())
        })
        .collect()
}

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];
const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN_L: f64 = 80.0;
const MARGIN_R: f64 = 150.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 60.0;

fn decade_bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| *v > 0.0 && v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    let (a, b) = (lo.log10().floor(), hi.log10().ceil());
    if a == b {
        (a, a + 1.0)
    } else {
        (a, b)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Log-log line plot with decade gridlines and a legend.
pub fn loglog_svg(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let (x0, x1) = decade_bounds(series.iter().flat_map(|s| s.points.iter().map(|p| p.0)));
    let (y0, y1) = decade_bounds(series.iter().flat_map(|s| s.points.iter().map(|p| p.1)));
    let pw = WIDTH - MARGIN_L - MARGIN_R;
    let ph = HEIGHT - MARGIN_T - MARGIN_B;
    let sx = |x: f64| MARGIN_L + (x.log10() - x0) / (x1 - x0) * pw;
    let sy = |y: f64| MARGIN_T + (y1 - y.log10()) / (y1 - y0) * ph;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(svg, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, MARGIN_L + pw / 2.0, escape(title));

    for d in (x0 as i32)..=(x1 as i32) {
        let x = sx(10f64.powi(d));
        let _ = writeln!(svg, r##"<line x1="{x:.2}" y1="{MARGIN_T}" x2="{x:.2}" y2="{:.2}" stroke="#ddd"/>"##, MARGIN_T + ph);
        let _ = writeln!(svg, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">1e{d}</text>"#, MARGIN_T + ph + 18.0);
    }
    for d in (y0 as i32)..=(y1 as i32) {
        let y = sy(10f64.powi(d));
        let _ = writeln!(svg, r##"<line x1="{MARGIN_L}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd"/>"##, MARGIN_L + pw);
        let _ = writeln!(svg, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">1e{d}</text>"#, MARGIN_L - 6.0, y + 4.0);
    }
    let _ = writeln!(svg, r#"<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
    let _ = writeln!(svg, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, MARGIN_L + pw / 2.0, HEIGHT - 15.0, escape(x_label));
    let _ = writeln!(
        svg,
        r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">{}</text>"#,
        MARGIN_T + ph / 2.0,
        MARGIN_T + ph / 2.0,
        escape(y_label)
    );

    for (k, s) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let pts: Vec<String> = s
            .points
            .iter()
            .filter(|(x, y)| *x > 0.0 && *y > 0.0)
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let _ = writeln!(svg, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#, pts.join(" "));
        for p in &pts {
            let (cx, cy) = p.split_once(',').unwrap_or(("0", "0"));
            let _ = writeln!(svg, r#"<circle cx="{cx}" cy="{cy}" r="3" fill="{color}"/>"#);
        }
        let ly = MARGIN_T + 16.0 + 18.0 * k as f64;
        let lx = MARGIN_L + pw + 12.0;
        let _ = writeln!(svg, r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#, lx + 20.0);
        let _ = writeln!(svg, r#"<text x="{}" y="{}">{}</text>"#, lx + 26.0, ly + 4.0, escape(&s.label));
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sci_has_six_significant_digits() {
        assert_eq!(sci(0.018_765_43), "1.87654e-2");
        assert_eq!(sci(1.0), "1.00000e0");
    }

    #[test]
    fn orders_of_exact_power_law() {
        let sizes = [0.5, 0.25, 0.125];
        let errors: Vec<f64> = sizes.iter().map(|h| 3.0 * h * h).collect();
        let orders = observed_orders(&sizes, &errors);
        assert_eq!(orders[0], None);
        assert!((orders[1].unwrap() - 2.0).abs() < 1e-12);
        assert!((orders[2].unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn csv_round_trip_by_column_name() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.csv");
        let rows = vec![
            ConvergenceRow { mesh_kind: "quad".into(), alpha: 0.5, n: 4, h_over_sqrt2: 0.25, dt: 0.0625, error: 1.9e-2, order: None },
            ConvergenceRow { mesh_kind: "quad".into(), alpha: 0.5, n: 8, h_over_sqrt2: 0.125, dt: 0.015625, error: 4.7e-3, order: Some(2.01) },
        ];
        write_convergence_csv(&path, &rows).unwrap();
        let back = read_csv(&path).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[0]["order"], "");
        assert_eq!(back[1]["n"], "8");
        assert_eq!(back[1]["error"].parse::<f64>().unwrap(), 4.7e-3);
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("mesh_kind,alpha,n,h_over_sqrt2,dt,error,order\n"));
    }

    #[test]
    fn svg_is_well_formed_enough() {
        let s = loglog_svg(
            "t",
            "x",
            "y",
            &[Series { label: "a<b".into(), points: vec![(0.25, 1e-2), (0.125, 2.5e-3)] }],
        );
        assert!(s.starts_with("<svg") && s.trim_end().ends_with("</svg>"));
        assert!(s.contains("a&lt;b"));
        assert_eq!(s.matches("<circle").count(), 2);
    }
}
