//! SVG pictures of wave-front estimates and inclusion reports.
//!
//! Every centre gets a dot; every flagged (centre, sector) pair a ray in the
//! sector direction. In d = 1 the rays run along the position axis, so a
//! point singularity shows as a two-armed star.

use super::inclusion::InclusionReport;
use crate::coneharm::ConePartition;
use crate::error::Result;
use crate::wavefront::WavefrontEstimate;
use std::fmt::Write as _;
use std::path::Path;

pub enum PlotSource<'a> {
    Estimate(&'a WavefrontEstimate),
    /// Report plus the partition of the estimates it compared.
    Inclusion(&'a InclusionReport, &'a ConePartition),
}

const SIZE_1D: (f64, f64) = (640.0, 160.0);
const SIZE_2D: (f64, f64) = (480.0, 480.0);
const MARGIN: f64 = 32.0;

/// Blue (decaying) through grey to red (growing).
fn slope_color(slope: Option<f64>) -> String {
    let Some(m) = slope else {
        return "#888888".into();
    };
    let t = ((m + 1.0) / 3.0).clamp(0.0, 1.0);
    let r = (40.0 + 200.0 * t).round() as u8;
    let b = (240.0 - 200.0 * t).round() as u8;
    format!("#{r:02x}40{b:02x}")
}

struct Frame {
    d: usize,
    lo: Vec<f64>,
    hi: Vec<f64>,
    size: (f64, f64),
}

impl Frame {
    fn new(centers: &[Vec<f64>]) -> Frame {
        let d = centers.first().map_or(1, |c| c.len());
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for c in centers {
            for a in 0..d {
                lo[a] = lo[a].min(c[a]);
                hi[a] = hi[a].max(c[a]);
            }
        }
        for a in 0..d {
            if !lo[a].is_finite() {
                lo[a] = -1.0;
                hi[a] = 1.0;
            }
            let pad = ((hi[a] - lo[a]) * 0.08).max(1.0);
            lo[a] -= pad;
            hi[a] += pad;
        }
        let size = if d == 1 { SIZE_1D } else { SIZE_2D };
        Frame { d, lo, hi, size }
    }

    fn map(&self, x: &[f64]) -> (f64, f64) {
        let (w, h) = (self.size.0 - 2.0 * MARGIN, self.size.1 - 2.0 * MARGIN);
        let u = MARGIN + (x[0] - self.lo[0]) / (self.hi[0] - self.lo[0]) * w;
        let v = if self.d == 1 {
            self.size.1 / 2.0
        } else {
            MARGIN + (self.hi[1] - x[1]) / (self.hi[1] - self.lo[1]) * h
        };
        (u, v)
    }

    fn ray_length(&self) -> f64 {
        if self.d == 1 {
            18.0
        } else {
            22.0
        }
    }

    fn axes(&self, out: &mut String) {
        let (w, h) = self.size;
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.0} {h:.0}">"#
        );
        let _ = writeln!(out, r##"<rect width="100%" height="100%" fill="#ffffff"/>"##);
        if self.d == 1 {
            let y = h / 2.0;
            let _ = writeln!(
                out,
                r##"<line class="axis" x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#000000"/>"##,
                MARGIN,
                w - MARGIN
            );
            let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" font-size="11">x</text>"#, w - MARGIN + 6.0, y + 4.0);
            let _ = writeln!(out, r#"<text x="{MARGIN:.2}" y="{:.2}" font-size="10">{:.2}</text>"#, h - 8.0, self.lo[0]);
            let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" font-size="10">{:.2}</text>"#, w - MARGIN - 24.0, h - 8.0, self.hi[0]);
        } else {
            let _ = writeln!(
                out,
                r##"<rect class="axis" x="{MARGIN:.2}" y="{MARGIN:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#000000"/>"##,
                w - 2.0 * MARGIN,
                h - 2.0 * MARGIN
            );
            let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" font-size="11">x1</text>"#, w / 2.0, h - 8.0);
            let _ = writeln!(out, r#"<text x="6" y="{:.2}" font-size="11">x2</text>"#, h / 2.0);
        }
    }

    fn dot(&self, out: &mut String, x: &[f64]) {
        let (u, v) = self.map(x);
        let _ = writeln!(out, r##"<circle cx="{u:.2}" cy="{v:.2}" r="2" fill="#444444"/>"##);
    }

    fn ray(&self, out: &mut String, x: &[f64], dir: &[f64], color: &str, width: f64, class: &str) {
        let (u, v) = self.map(x);
        let l = self.ray_length();
        let (du, dv) = if self.d == 1 { (dir[0] * l, 0.0) } else { (dir[0] * l, -dir[1] * l) };
        let _ = writeln!(
            out,
            r#"<line class="{class}" x1="{u:.2}" y1="{v:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-width="{width:.1}"/>"#,
            u + du,
            v + dv
        );
    }
}

pub fn wf_svg(est: &WavefrontEstimate) -> String {
    let frame = Frame::new(&est.centers);
    let mut out = String::new();
    frame.axes(&mut out);
    for c in &est.centers {
        frame.dot(&mut out, c);
    }
    let part = &est.detector.partition;
    for e in est.entries.iter().filter(|e| e.in_wf) {
        frame.ray(&mut out, &e.x, &part.direction(e.sector), &slope_color(e.slope), 2.0, "wf");
    }
    out.push_str("</svg>\n");
    out
}

/// A in grey, B ∪ C in green, violations in red.
pub fn inclusion_svg(r: &InclusionReport, part: &ConePartition) -> String {
    let frame = Frame::new(&r.centers);
    let mut out = String::new();
    frame.axes(&mut out);
    for c in &r.centers {
        frame.dot(&mut out, c);
    }
    for &(c, j) in r.b.iter().chain(&r.c) {
        frame.ray(&mut out, &r.centers[c], &part.direction(j), "#2a9d3a", 4.0, "cover");
    }
    for &(c, j) in &r.a {
        frame.ray(&mut out, &r.centers[c], &part.direction(j), "#666666", 1.5, "a");
    }
    for v in &r.violations {
        frame.ray(&mut out, &v.x, &part.direction(v.sector), "#e00000", 2.5, "violation");
    }
    out.push_str("</svg>\n");
    out
}

pub fn render_wf_svg(src: PlotSource<'_>, path: &Path) -> Result<()> {
    let svg = match src {
        PlotSource::Estimate(e) => wf_svg(e),
        PlotSource::Inclusion(r, p) => inclusion_svg(r, p),
    };
    std::fs::write(path, svg)?;
    Ok(())
}
