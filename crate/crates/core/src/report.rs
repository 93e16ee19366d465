//! Report emission: JSON documents, the inequality CSV table and an SVG plot
//! of the merged spectrum.

use std::fmt::Write as _;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::error::Result;
use crate::spectrum::BcLabel;
use crate::verify::{InequalityReport, MergedSpectrum};

/// Wraps a payload with the command name and, unless disabled, a timestamp.
pub fn document(
    command: &str,
    domain: &str,
    payload: impl Serialize,
    timestamp: bool,
) -> Result<Value> {
    let mut doc = Map::new();
    doc.insert("command".into(), json!(command));
    doc.insert("domain".into(), json!(domain));
    if timestamp {
        let secs = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        doc.insert("generated_at_unix".into(), json!(secs));
    }
    match serde_json::to_value(payload)? {
        Value::Object(fields) => doc.extend(fields),
        other => {
            doc.insert("result".into(), other);
        }
    }
    Ok(Value::Object(doc))
}

pub fn to_pretty(value: &Value) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Table `k, mu_k+2, lambda_k, gap, verdict`.
pub fn inequality_csv(report: &InequalityReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["k", "mu_k+2", "lambda_k", "gap", "verdict"])?;
    for r in &report.records {
        w.write_record([
            r.k.to_string(),
            format!("{:.12e}", r.mu_k2),
            format!("{:.12e}", r.lambda_k),
            format!("{:.12e}", r.gap),
            r.verdict.as_str().to_string(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 50.0;
const NEUMANN_COLOR: &str = "#1f77b4";
const DIRICHLET_COLOR: &str = "#d62728";

/// Merged spectrum as source-colored markers over its index, with the
/// staircases `(k, lambda_k)` and `(k + 2, mu_{k+2})` from the report.
pub fn merged_svg(merged: &MergedSpectrum, report: Option<&InequalityReport>) -> String {
    let mut top: f64 = merged.entries.iter().map(|e| e.value).fold(0.0, f64::max);
    let mut right = merged.len() as f64;
    if let Some(r) = report {
        for rec in &r.records {
            top = top.max(rec.lambda_k).max(rec.mu_k2);
            right = right.max(rec.k as f64 + 2.0);
        }
    }
    let top = if top > 0.0 { top * 1.05 } else { 1.0 };
    let right = right.max(1.0) + 1.0;
    let x = |i: f64| MARGIN + i / right * (WIDTH - 2.0 * MARGIN);
    let y = |v: f64| HEIGHT - MARGIN - v / top * (HEIGHT - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let (x0, y0) = (x(0.0), y(0.0));
    let _ = writeln!(
        s,
        r#"<path d="M{x0:.1} {:.1} L{x0:.1} {y0:.1} L{:.1} {y0:.1}" stroke="black" fill="none"/>"#,
        y(top),
        x(right)
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">index</text>"#,
        WIDTH / 2.0,
        HEIGHT - 12.0
    );
    let _ = writeln!(
        s,
        r#"<text x="14" y="{:.1}" transform="rotate(-90 14 {:.1})" text-anchor="middle">eigenvalue</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );
    for t in 0..=4 {
        let v = top * t as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{v:.2}</text>"#,
            x0 - 4.0,
            y(v) + 4.0
        );
    }
    if let Some(r) = report {
        let stairs = |pts: Vec<(f64, f64)>| {
            let mut d = String::new();
            for (i, (k, v)) in pts.iter().enumerate() {
                let _ = write!(
                    d,
                    "{}{:.1} {:.1} H{:.1} ",
                    if i == 0 { "M" } else { "L" },
                    x(k - 0.5),
                    y(*v),
                    x(k + 0.5)
                );
            }
            d
        };
        let lam = stairs(r.records.iter().map(|q| (q.k as f64, q.lambda_k)).collect());
        let mu = stairs(
            r.records
                .iter()
                .map(|q| (q.k as f64 + 2.0, q.mu_k2))
                .collect(),
        );
        let _ = writeln!(
            s,
            r#"<path d="{}" stroke="{DIRICHLET_COLOR}" fill="none" stroke-dasharray="4 3"/>"#,
            lam.trim_end()
        );
        let _ = writeln!(
            s,
            r#"<path d="{}" stroke="{NEUMANN_COLOR}" fill="none" stroke-dasharray="4 3"/>"#,
            mu.trim_end()
        );
    }
    for (i, e) in merged.entries.iter().enumerate() {
        let color = match e.source {
            BcLabel::Dirichlet => DIRICHLET_COLOR,
            _ => NEUMANN_COLOR,
        };
        let _ = writeln!(
            s,
            r#"<circle cx="{:.1}" cy="{:.1}" r="3.5" fill="{color}"/>"#,
            x(i as f64 + 1.0),
            y(e.value)
        );
    }
    let lx = WIDTH - MARGIN - 150.0;
    let _ = writeln!(
        s,
        r#"<circle cx="{lx:.1}" cy="{:.1}" r="3.5" fill="{NEUMANN_COLOR}"/><text x="{:.1}" y="{:.1}">neumann</text>"#,
        MARGIN,
        lx + 8.0,
        MARGIN + 4.0
    );
    let _ = writeln!(
        s,
        r#"<circle cx="{lx:.1}" cy="{:.1}" r="3.5" fill="{DIRICHLET_COLOR}"/><text x="{:.1}" y="{:.1}">dirichlet</text>"#,
        MARGIN + 16.0,
        lx + 8.0,
        MARGIN + 20.0
    );
    if let Some(r) = report {
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}">{}</text>"#,
            lx,
            MARGIN + 36.0,
            r.evidence
        );
    }
    s.push_str("</svg>\n");
    s
}
