//! Machine-readable summaries and optional SVG plots.
//!
//! The JSON writer is deliberately minimal: flat structures, numeric
//! fields formatted with fixed precision so reruns are byte-identical.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use bolab::scaling::ScalingReport;

#[derive(Debug, Clone)]
pub struct CheckRecord {
    pub name: String,
    pub module: String,
    /// The rate or condition being graded, e.g. "decay eps^(3a-1)".
    pub claim: String,
    pub measured: f64,
    pub required: f64,
    pub verdict: String,
    pub failing: bool,
}

impl CheckRecord {
    pub fn from_scaling(report: &ScalingReport, module: &str, claim: &str) -> Self {
        Self {
            name: report.quantity.clone(),
            module: module.to_string(),
            claim: claim.to_string(),
            measured: report.fitted_slope(),
            required: report.predicted_slope - report.tolerance,
            verdict: report.verdict.to_string(),
            failing: report.verdict.failed(),
        }
    }

    pub fn condition(name: &str, module: &str, claim: &str, holds: bool) -> Self {
        Self {
            name: name.to_string(),
            module: module.to_string(),
            claim: claim.to_string(),
            measured: if holds { 1.0 } else { 0.0 },
            required: 1.0,
            verdict: if holds { "pass" } else { "FAIL" }.to_string(),
            failing: !holds,
        }
    }

    pub fn measurement(name: &str, module: &str, claim: &str, measured: f64, required: f64, pass: bool) -> Self {
        Self {
            name: name.to_string(),
            module: module.to_string(),
            claim: claim.to_string(),
            measured,
            required,
            verdict: if pass { "pass" } else { "FAIL" }.to_string(),
            failing: !pass,
        }
    }
}

fn json_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn json_num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.10e}")
    } else if v.is_nan() {
        "\"nan\"".to_string()
    } else if v > 0.0 {
        "\"inf\"".to_string()
    } else {
        "\"-inf\"".to_string()
    }
}

/// Serialize the scenario summary. Deterministic output for fixed inputs.
pub fn summary_json(scenario: &str, seed: u64, checks: &[CheckRecord]) -> String {
    let mut out = String::new();
    let failed = checks.iter().any(|c| c.failing);
    let _ = writeln!(out, "{{");
    let _ = writeln!(out, "  \"scenario\": \"{}\",", json_escape(scenario));
    let _ = writeln!(out, "  \"seed\": {seed},");
    let _ = writeln!(out, "  \"failed\": {failed},");
    let _ = writeln!(out, "  \"checks\": [");
    for (i, c) in checks.iter().enumerate() {
        let comma = if i + 1 < checks.len() { "," } else { "" };
        let _ = writeln!(
            out,
            "    {{\"name\": \"{}\", \"module\": \"{}\", \"claim\": \"{}\", \"measured\": {}, \"required\": {}, \"verdict\": \"{}\"}}{comma}",
            json_escape(&c.name),
            json_escape(&c.module),
            json_escape(&c.claim),
            json_num(c.measured),
            json_num(c.required),
            json_escape(&c.verdict),
        );
    }
    let _ = writeln!(out, "  ]");
    let _ = writeln!(out, "}}");
    out
}

/// Static log-log SVG plot of a scaling report: sweep points plus the
/// fitted and the claimed slope lines.
pub fn scaling_svg(report: &ScalingReport) -> String {
    let pts: Vec<(f64, f64)> = report
        .points
        .iter()
        .filter(|&&(x, y)| x > 0.0 && y > 0.0)
        .map(|&(x, y)| (x.log10(), y.log10()))
        .collect();
    let (w, h, margin) = (480.0, 360.0, 50.0);
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">"
    );
    let _ = writeln!(svg, "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>");
    if pts.len() >= 2 {
        let (x0, x1) = pts
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &(x, _)| {
                (a.min(x), b.max(x))
            });
        let (y0, y1) = pts
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &(_, y)| {
                (a.min(y), b.max(y))
            });
        let (y0, y1) = if (y1 - y0).abs() < 1e-12 {
            (y0 - 1.0, y1 + 1.0)
        } else {
            (y0, y1)
        };
        let sx = |x: f64| margin + (x - x0) / (x1 - x0) * (w - 2.0 * margin);
        let sy = |y: f64| h - margin - (y - y0) / (y1 - y0) * (h - 2.0 * margin);
        // axes
        let _ = writeln!(
            svg,
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>",
            margin,
            h - margin,
            w - margin,
            h - margin
        );
        let _ = writeln!(
            svg,
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>",
            margin,
            margin,
            margin,
            h - margin
        );
        // fitted line
        if let Some(fit) = report.fit {
            let f = |x: f64| fit.prefactor.log10() + fit.slope * x;
            let _ = writeln!(
                svg,
                "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"steelblue\" stroke-width=\"1.5\"/>",
                sx(x0), sy(f(x0)), sx(x1), sy(f(x1))
            );
        }
        // claimed slope through the first point
        if let Some(&(px, py)) = pts.first() {
            let g = |x: f64| py + report.predicted_slope * (x - px);
            let _ = writeln!(
                svg,
                "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"tomato\" stroke-dasharray=\"5,4\"/>",
                sx(x0), sy(g(x0)), sx(x1), sy(g(x1))
            );
        }
        for &(x, y) in &pts {
            let _ = writeln!(
                svg,
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3.5\" fill=\"black\"/>",
                sx(x),
                sy(y)
            );
        }
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"24\" font-family=\"monospace\" font-size=\"13\">{} fitted {:.3} claimed {:.3} [{}]</text>",
            margin,
            report.quantity,
            report.fitted_slope(),
            report.predicted_slope,
            report.verdict
        );
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"11\">log10 eps</text>",
            w / 2.0 - 30.0,
            h - 16.0
        );
    }
    let _ = writeln!(svg, "</svg>");
    svg
}

pub fn write_text(path: &Path, body: &str) -> std::io::Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, body)
}

#[cfg(test)]
mod tests {
    use super::*;
    use bolab::scaling;

    #[test]
    fn summary_is_deterministic_and_flags_failures() {
        let checks = vec![
            CheckRecord::condition("alpha-threshold", "lab", "alpha > 1/3", true),
            CheckRecord::measurement("drift", "solver", "relative drift <= 1e-6", 2e-6, 1e-6, false),
        ];
        let a = summary_json("demo", 7, &checks);
        let b = summary_json("demo", 7, &checks);
        assert_eq!(a, b);
        assert!(a.contains("\"failed\": true"));
        assert!(a.contains("alpha-threshold"));
    }

    #[test]
    fn svg_emits_points_and_lines() {
        let points: Vec<(f64, f64)> = (0..6)
            .map(|i| {
                let e = 0.05 * 2f64.powi(i);
                (e, 2.0 * e.powf(1.2))
            })
            .collect();
        let report = scaling::build_report("demo-term", points, 1.0, 0.1);
        let svg = scaling_svg(&report);
        assert!(svg.contains("<svg"));
        assert!(svg.matches("<circle").count() == 6);
        assert!(svg.contains("steelblue"));
    }
}
