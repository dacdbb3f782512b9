use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use num_rational::Ratio;

use halo_core::fredholm::PointValue;

use crate::config::Format;
use crate::error::{LabError, LabResult};
use crate::experiment::{ExperimentReport, PolygonReport, Status};

pub const COEFFICIENTS_HEADER: &str = "# halo-lab coefficients v1\nn,valuation,precision_modulus,lambda_n,ok\n";
pub const SLOPES_HEADER: &str = "# halo-lab slopes v1\nslope_num,slope_den,multiplicity,provisional\n";
pub const SCAN_HEADER: &str = "# halo-lab slope-scan v1\npoint,point_valuation,slopes,ratios,provisional_from\n";

fn status(s: Status) -> &'static str {
    match s {
        Status::Pass => "true",
        Status::Fail => "false",
        Status::Unproven => "unproven",
    }
}

pub fn coefficients_csv(r: &ExperimentReport) -> String {
    let mut out = COEFFICIENTS_HEADER.to_string();
    for c in &r.coefficients {
        let val = match (c.valuation, c.certified) {
            (None, _) => "inf".to_string(),
            (Some(v), true) => v.to_string(),
            (Some(v), false) => format!(">={v}"),
        };
        let prec = c.precision_modulus.map_or_else(|| "exact".to_string(), |k| k.to_string());
        writeln!(out, "{},{},{},{},{}", c.n, val, prec, c.lambda_n, status(c.ok)).unwrap();
    }
    out
}

pub fn slopes_csv(p: &PolygonReport) -> String {
    let mut out = SLOPES_HEADER.to_string();
    for s in &p.slopes {
        writeln!(out, "{},{},{},{}", s.slope_num, s.slope_den, s.multiplicity, s.provisional).unwrap();
    }
    out
}

pub fn scan_csv(points: &[PolygonReport]) -> String {
    let mut out = SCAN_HEADER.to_string();
    for p in points {
        let slopes: Vec<String> = p
            .slopes
            .iter()
            .flat_map(|s| {
                let q = Ratio::new(s.slope_num, s.slope_den);
                std::iter::repeat(q.to_string()).take(s.multiplicity)
            })
            .collect();
        let mut from = 0;
        for s in &p.slopes {
            if s.provisional {
                break;
            }
            from += s.multiplicity;
        }
        let pv = p.point_valuation.map_or_else(String::new, |v| v.to_string());
        writeln!(out, "{},{},{},{},{}", p.label, pv, slopes.join(" "), p.ratios.join(" "), from).unwrap();
    }
    out
}

fn f64_of(q: Ratio<i64>) -> f64 {
    *q.numer() as f64 / *q.denom() as f64
}

/// gnuplot data: the points (with a certified flag), a blank-line pair, then the hull.
pub fn polygon_dat(p: &PolygonReport) -> String {
    let mut out = format!("# {}\n# n valuation certified\n", p.point);
    for &(n, v) in &p.points {
        match v {
            PointValue::Exact(y) => writeln!(out, "{n} {:.6} 1", f64_of(y)).unwrap(),
            PointValue::AtLeast(y) => writeln!(out, "{n} {:.6} 0", f64_of(y)).unwrap(),
            PointValue::Infinite => {}
        }
    }
    out.push_str("\n\n# hull vertices\n");
    for (x, y) in &p.vertices {
        let q: Ratio<i64> = y.parse().expect("vertex heights are rationals");
        writeln!(out, "{x} {:.6}", f64_of(q)).unwrap();
    }
    out
}

pub fn polygon_svg(p: &PolygonReport) -> String {
    let (w, h, m) = (480.0, 360.0, 40.0);
    let pts: Vec<(f64, f64, bool)> = p
        .points
        .iter()
        .filter_map(|&(n, v)| match v {
            PointValue::Exact(y) => Some((n as f64, f64_of(y), true)),
            PointValue::AtLeast(y) => Some((n as f64, f64_of(y), false)),
            PointValue::Infinite => None,
        })
        .collect();
    let xmax = pts.iter().map(|p| p.0).fold(1.0, f64::max);
    let ymax = pts.iter().map(|p| p.1).fold(1.0, f64::max);
    let sx = |x: f64| m + x / xmax * (w - 2.0 * m);
    let sy = |y: f64| h - m - y / ymax * (h - 2.0 * m);
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n<title>{}</title>\n",
        p.point
    );
    writeln!(out, "<line x1=\"{m}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>", h - m, w - m, h - m).unwrap();
    writeln!(out, "<line x1=\"{m}\" y1=\"{m}\" x2=\"{m}\" y2=\"{}\" stroke=\"black\"/>", h - m).unwrap();
    let hull: Vec<String> = p
        .vertices
        .iter()
        .map(|(x, y)| {
            let q: Ratio<i64> = y.parse().expect("vertex heights are rationals");
            format!("{:.2},{:.2}", sx(*x as f64), sy(f64_of(q)))
        })
        .collect();
    writeln!(out, "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"{}\"/>", hull.join(" ")).unwrap();
    for (x, y, exact) in pts {
        let fill = if exact { "black" } else { "white" };
        writeln!(out, "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"{fill}\" stroke=\"black\"/>", sx(x), sy(y)).unwrap();
    }
    out.push_str("</svg>\n");
    out
}

fn write(dir: &Path, name: &str, body: &str, written: &mut Vec<PathBuf>) -> LabResult<()> {
    let path = dir.join(name);
    std::fs::write(&path, body).map_err(|e| LabError::Io { path: path.display().to_string(), message: e.to_string() })?;
    written.push(path);
    Ok(())
}

/// Write the requested artifacts; returns the paths in the order written.
pub fn write_report(r: &ExperimentReport, dir: &Path, formats: &BTreeSet<Format>) -> LabResult<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| LabError::Io { path: dir.display().to_string(), message: e.to_string() })?;
    let mut written = Vec::new();
    let polygons: Vec<&PolygonReport> = std::iter::once(&r.polygon).chain(&r.points).collect();
    if formats.contains(&Format::Csv) {
        write(dir, "coefficients.csv", &coefficients_csv(r), &mut written)?;
        for p in &polygons {
            write(dir, &format!("slopes_{}.csv", p.label), &slopes_csv(p), &mut written)?;
        }
        if !r.points.is_empty() {
            write(dir, "slope_scan.csv", &scan_csv(&r.points), &mut written)?;
        }
    }
    if formats.contains(&Format::Dat) {
        for p in &polygons {
            write(dir, &format!("polygon_{}.dat", p.label), &polygon_dat(p), &mut written)?;
        }
    }
    if formats.contains(&Format::Svg) {
        for p in &polygons {
            write(dir, &format!("polygon_{}.svg", p.label), &polygon_svg(p), &mut written)?;
        }
    }
    if formats.contains(&Format::Json) {
        let mut body = serde_json::to_string_pretty(r).expect("report serializes");
        body.push('\n');
        write(dir, "report.json", &body, &mut written)?;
    }
    Ok(written)
}
