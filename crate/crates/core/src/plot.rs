// SPDX-License-Identifier: Apache-2.0

//! Minimal SVG rendering of the three selection summary plots. Every
//! figure is drawn from its CSV file alone, so re-rendering a CSV yields
//! the same bytes.

use std::fmt::Write as _;
use std::io::{Read, Write};

use crate::dss::SparsitySummary;
use crate::error::{DssError, Result};

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 55.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
];

struct Canvas {
    body: String,
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

fn fmt_num(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.to_string()
    }
}

fn nice_range(lo: f64, hi: f64) -> (f64, f64) {
    if !(lo.is_finite() && hi.is_finite()) {
        return (0.0, 1.0);
    }
    if (hi - lo).abs() < 1e-12 {
        return (lo - 0.5, hi + 0.5);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

impl Canvas {
    fn new(title: &str, xlabel: &str, ylabel: &str, xr: (f64, f64), yr: (f64, f64)) -> Self {
        let mut c = Canvas {
            body: String::new(),
            x0: xr.0,
            x1: xr.1,
            y0: yr.0,
            y1: yr.1,
        };
        let _ = write!(
            c.body,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\" font-family=\"sans-serif\" font-size=\"12\">\n\
             <rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n\
             <text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
            W / 2.0,
            escape(title)
        );
        c.axes(xlabel, ylabel);
        c
    }

    fn sx(&self, x: f64) -> f64 {
        LEFT + (x - self.x0) / (self.x1 - self.x0) * (W - LEFT - RIGHT)
    }

    fn sy(&self, y: f64) -> f64 {
        H - BOTTOM - (y - self.y0) / (self.y1 - self.y0) * (H - TOP - BOTTOM)
    }

    fn axes(&mut self, xlabel: &str, ylabel: &str) {
        let (l, r, t, b) = (LEFT, W - RIGHT, TOP, H - BOTTOM);
        let _ = writeln!(
            self.body,
            "<rect x=\"{l}\" y=\"{t}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>",
            r - l,
            b - t
        );
        for k in 0..=5 {
            let xv = self.x0 + (self.x1 - self.x0) * k as f64 / 5.0;
            let yv = self.y0 + (self.y1 - self.y0) * k as f64 / 5.0;
            let (px, py) = (self.sx(xv), self.sy(yv));
            let _ = writeln!(
                self.body,
                "<line x1=\"{px:.2}\" y1=\"{b}\" x2=\"{px:.2}\" y2=\"{}\" stroke=\"black\"/>\
                 <text x=\"{px:.2}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
                b + 5.0,
                b + 18.0,
                fmt_num(xv)
            );
            let _ = writeln!(
                self.body,
                "<line x1=\"{}\" y1=\"{py:.2}\" x2=\"{l}\" y2=\"{py:.2}\" stroke=\"black\"/>\
                 <text x=\"{}\" y=\"{:.2}\" text-anchor=\"end\">{}</text>",
                l - 5.0,
                l - 8.0,
                py + 4.0,
                fmt_num(yv)
            );
        }
        let _ = writeln!(
            self.body,
            "<text x=\"{:.2}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
            (l + r) / 2.0,
            H - 12.0,
            escape(xlabel)
        );
        let _ = writeln!(
            self.body,
            "<text transform=\"translate(16,{:.2}) rotate(-90)\" text-anchor=\"middle\">{}</text>",
            (t + b) / 2.0,
            escape(ylabel)
        );
    }

    fn polyline(&mut self, pts: &[(f64, f64)], color: &str, width: f64, dash: bool) {
        if pts.is_empty() {
            return;
        }
        let coords: Vec<String> = pts
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", self.sx(x), self.sy(y)))
            .collect();
        let dash = if dash { " stroke-dasharray=\"6,4\"" } else { "" };
        let _ = writeln!(
            self.body,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"{width}\"{dash}/>",
            coords.join(" ")
        );
    }

    fn band(&mut self, lower: &[(f64, f64)], upper: &[(f64, f64)], color: &str) {
        let mut coords: Vec<String> = lower
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", self.sx(x), self.sy(y)))
            .collect();
        coords.extend(
            upper
                .iter()
                .rev()
                .map(|&(x, y)| format!("{:.2},{:.2}", self.sx(x), self.sy(y))),
        );
        let _ = writeln!(
            self.body,
            "<polygon points=\"{}\" fill=\"{color}\" fill-opacity=\"0.25\" stroke=\"none\"/>",
            coords.join(" ")
        );
    }

    fn points(&mut self, pts: &[(f64, f64)], color: &str) {
        for &(x, y) in pts {
            let _ = writeln!(
                self.body,
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"{color}\"/>",
                self.sx(x),
                self.sy(y)
            );
        }
    }

    fn label(&mut self, x: f64, y: f64, text: &str, color: &str) {
        let _ = writeln!(
            self.body,
            "<text x=\"{:.2}\" y=\"{:.2}\" fill=\"{color}\" font-size=\"10\">{}</text>",
            self.sx(x) + 4.0,
            self.sy(y) - 4.0,
            escape(text)
        );
    }

    fn finish(mut self) -> String {
        self.body.push_str("</svg>\n");
        self.body
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn sorted_rows(summary: &SparsitySummary) -> Vec<&crate::dss::SummaryRow> {
    let mut rows: Vec<_> = summary.rows.iter().collect();
    rows.sort_by_key(|r| r.cardinality);
    rows
}

/// Variation explained `ρ²_λ` (mean and band) against model size, with the
/// benchmark `E(ρ²_0)` as a dashed horizontal line.
pub fn render_rho<R: Read>(summary_csv: R) -> Result<String> {
    let s = SparsitySummary::read_csv(summary_csv, None)?;
    let rows = sorted_rows(&s);
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.cardinality as f64, r.rho_mean)).collect();
    if pts.iter().any(|p| !p.1.is_finite()) {
        return Err(DssError::Schema("summary has no variation-explained values".into()));
    }
    let lo: Vec<(f64, f64)> = rows.iter().map(|r| (r.cardinality as f64, r.rho_lo)).collect();
    let hi: Vec<(f64, f64)> = rows.iter().map(|r| (r.cardinality as f64, r.rho_hi)).collect();
    let xmax = rows.last().map(|r| r.cardinality).unwrap_or(1).max(1) as f64;
    let ymin = lo.iter().map(|p| p.1).fold(s.benchmark, f64::min);
    let ymax = hi.iter().map(|p| p.1).fold(s.benchmark, f64::max);
    let mut c = Canvas::new(
        "Variation explained",
        "model size",
        "rho^2",
        nice_range(0.0, xmax),
        nice_range(ymin, ymax),
    );
    c.band(&lo, &hi, PALETTE[0]);
    c.polyline(&pts, PALETTE[0], 2.0, false);
    c.points(&pts, PALETTE[0]);
    c.polyline(&[(c.x0, s.benchmark), (c.x1, s.benchmark)], "black", 1.0, true);
    Ok(c.finish())
}

/// Excess error `ψ_λ` (mean and band) against model size.
pub fn render_psi<R: Read>(summary_csv: R) -> Result<String> {
    let s = SparsitySummary::read_csv(summary_csv, None)?;
    let rows = sorted_rows(&s);
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.cardinality as f64, r.psi_mean)).collect();
    let lo: Vec<(f64, f64)> = rows.iter().map(|r| (r.cardinality as f64, r.psi_lo)).collect();
    let hi: Vec<(f64, f64)> = rows.iter().map(|r| (r.cardinality as f64, r.psi_hi)).collect();
    let xmax = rows.last().map(|r| r.cardinality).unwrap_or(1).max(1) as f64;
    let ymax = hi.iter().map(|p| p.1).fold(0.0, f64::max);
    let mut c = Canvas::new("Excess error", "model size", "psi", nice_range(0.0, xmax), nice_range(0.0, ymax));
    c.band(&lo, &hi, PALETTE[1]);
    c.polyline(&pts, PALETTE[1], 2.0, false);
    c.points(&pts, PALETTE[1]);
    Ok(c.finish())
}

/// One row per retained path entry: `cardinality,psi_mean,<names...>`
/// holding the coefficients of the sparse action.
pub fn write_coef_csv<W: Write>(writer: W, summary: &SparsitySummary, names: &[String]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["cardinality".to_string(), "psi_mean".to_string()];
    header.extend(names.iter().cloned());
    w.write_record(&header)?;
    for r in sorted_rows(summary) {
        if r.gamma.len() != names.len() {
            return Err(DssError::Schema("summary rows lack coefficient vectors".into()));
        }
        let mut row = vec![r.cardinality.to_string(), format!("{}", r.psi_mean)];
        row.extend(r.gamma.iter().map(|g| format!("{g}")));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Coefficient magnitudes `|γ_j|` against mean excess error.
pub fn render_coef<R: Read>(coef_csv: R) -> Result<String> {
    let mut rdr = csv::Reader::from_reader(coef_csv);
    let header: Vec<String> = rdr.headers()?.iter().map(|s| s.trim().to_string()).collect();
    if header.len() < 3 || header[0] != "cardinality" || header[1] != "psi_mean" {
        return Err(DssError::Schema("coefficient CSV must start with 'cardinality,psi_mean'".into()));
    }
    let names = &header[2..];
    let mut psi = Vec::new();
    let mut coefs: Vec<Vec<f64>> = vec![Vec::new(); names.len()];
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let parse = |c: usize| -> Result<f64> {
            rec.get(c).and_then(|s| s.trim().parse().ok()).ok_or_else(|| DssError::Parse {
                row: r + 1,
                column: header.get(c).cloned().unwrap_or_default(),
                message: "not numeric".into(),
            })
        };
        psi.push(parse(1)?);
        for (j, col) in coefs.iter_mut().enumerate() {
            col.push(parse(j + 2)?.abs());
        }
    }
    let xmax = psi.iter().copied().fold(0.0, f64::max);
    let ymax = coefs.iter().flatten().copied().fold(0.0, f64::max);
    let mut c = Canvas::new(
        "Sparse coefficients",
        "excess error psi",
        "|coefficient|",
        nice_range(0.0, xmax),
        nice_range(0.0, ymax),
    );
    for (j, col) in coefs.iter().enumerate() {
        if col.iter().all(|v| *v == 0.0) {
            continue;
        }
        let color = PALETTE[j % PALETTE.len()];
        let pts: Vec<(f64, f64)> = psi.iter().copied().zip(col.iter().copied()).collect();
        c.polyline(&pts, color, 1.5, false);
        c.points(&pts, color);
        if let Some(&(x, y)) = pts.iter().min_by(|a, b| a.0.total_cmp(&b.0)) {
            c.label(x, y, &names[j], color);
        }
    }
    Ok(c.finish())
}
