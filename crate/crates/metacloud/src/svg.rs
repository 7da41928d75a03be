//! SVG 1.1 scatter plots with set boundaries and partition lines.

use std::f64::consts::PI;
use std::fmt::Write as _;

use metacloud_core::star::StarSet;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::report::fmt_g;

pub const MAX_POINTS: usize = 50_000;
pub const BOUNDARY_DIRECTIONS: usize = 512;
const SIZE: f64 = 800.0;
const PALETTE: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#7f7f7f"];

#[derive(Debug, Clone)]
pub enum Overlay {
    Boundary {
        set: StarSet,
        color: &'static str,
    },
    /// The diagonal cross `E_00` (d = 2).
    Cross,
    /// Line segments `[x0, y0, x1, y1]`.
    Segments {
        lines: Vec<[f64; 4]>,
        color: &'static str,
    },
}

#[derive(Debug, Clone)]
pub struct Plot<'a> {
    /// Row-major points of dimension `dim`; only `dim = 2` can be drawn.
    pub points: &'a [f64],
    pub dim: usize,
    /// Optional class per point, coloured from a fixed palette.
    pub classes: Option<&'a [u8]>,
    /// Half-width of the square window.
    pub extent: f64,
    pub overlays: Vec<Overlay>,
    /// Seed of the subsampling shuffle.
    pub seed: u64,
    pub title: String,
}

/// Indices of the plotted points: every `ceil(n / MAX_POINTS)`-th entry of
/// a seeded permutation, in increasing order.
pub fn subsample(n: usize, seed: u64) -> Vec<usize> {
    let stride = n.div_ceil(MAX_POINTS).max(1);
    if stride == 1 {
        return (0..n).collect();
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut keep: Vec<usize> = idx.into_iter().step_by(stride).collect();
    keep.sort_unstable();
    keep
}

impl Plot<'_> {
    fn px(&self, x: f64, y: f64) -> (f64, f64) {
        let s = SIZE / (2.0 * self.extent);
        ((x + self.extent) * s, (self.extent - y) * s)
    }

    pub fn render(&self) -> Result<String> {
        if self.dim != 2 || self.points.len() % 2 != 0 {
            return Err(Error::Core(metacloud_core::Error::Unsupported(
                "SVG plots need d = 2".into(),
            )));
        }
        if !(self.extent > 0.0) {
            return Err(Error::Usage("plot extent must be positive".into()));
        }
        let mut s = String::new();
        let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
        );
        let _ = writeln!(s, "<title>{}</title>", escape(&self.title));
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let (cx, cy) = self.px(0.0, 0.0);
        let _ = writeln!(
            s,
            r##"<g stroke="#bbbbbb" stroke-width="1"><line x1="0" y1="{cy}" x2="{SIZE}" y2="{cy}"/><line x1="{cx}" y1="0" x2="{cx}" y2="{SIZE}"/></g>"##
        );
        let n = self.points.len() / 2;
        let _ = writeln!(s, r#"<g stroke="none">"#);
        for i in subsample(n, self.seed) {
            let (x, y) = (self.points[2 * i], self.points[2 * i + 1]);
            if x.abs() > self.extent || y.abs() > self.extent {
                continue;
            }
            let (a, b) = self.px(x, y);
            let c = self
                .classes
                .map_or(PALETTE[0], |k| PALETTE[(k[i] as usize).min(PALETTE.len() - 1)]);
            let _ = writeln!(
                s,
                r#"<circle cx="{}" cy="{}" r="1" fill="{c}"/>"#,
                fmt_g(round2(a)),
                fmt_g(round2(b))
            );
        }
        let _ = writeln!(s, "</g>");
        for o in &self.overlays {
            self.overlay(&mut s, o)?;
        }
        let _ = writeln!(s, "</svg>");
        Ok(s)
    }

    fn overlay(&self, s: &mut String, o: &Overlay) -> Result<()> {
        match o {
            Overlay::Boundary { set, color } => {
                let mut pts = String::new();
                for k in 0..=BOUNDARY_DIRECTIONS {
                    let phi = 2.0 * PI * k as f64 / BOUNDARY_DIRECTIONS as f64;
                    let p = set.boundary_point(&[phi.cos(), phi.sin()])?;
                    let (a, b) = self.px(p[0], p[1]);
                    let _ = write!(pts, "{},{} ", fmt_g(round2(a)), fmt_g(round2(b)));
                }
                let _ = writeln!(
                    s,
                    r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                    pts.trim_end()
                );
            }
            Overlay::Cross => {
                let lines = [[-1.0, -1.0, 1.0, 1.0], [-1.0, 1.0, 1.0, -1.0]];
                self.segments(s, &lines, "#ff7f0e");
            }
            Overlay::Segments { lines, color } => self.segments(s, lines, color),
        }
        Ok(())
    }

    fn segments(&self, s: &mut String, lines: &[[f64; 4]], color: &str) {
        let _ = writeln!(s, r#"<g stroke="{color}" stroke-width="1">"#);
        for l in lines {
            let (a, b) = self.px(l[0], l[1]);
            let (c, d) = self.px(l[2], l[3]);
            let _ = writeln!(
                s,
                r#"<line x1="{}" y1="{}" x2="{}" y2="{}"/>"#,
                fmt_g(round2(a)),
                fmt_g(round2(b)),
                fmt_g(round2(c)),
                fmt_g(round2(d))
            );
        }
        let _ = writeln!(s, "</g>");
    }
}

fn round2(v: f64) -> f64 {
    (v * 100.0).round() / 100.0
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plot(points: &[f64]) -> Plot<'_> {
        Plot {
            points,
            dim: 2,
            classes: None,
            extent: 1.5,
            overlays: vec![Overlay::Boundary {
                set: StarSet::limit_set(2, 1.0, 1.0).unwrap(),
                color: "#000000",
            }],
            seed: 3,
            title: "t".into(),
        }
    }

    #[test]
    fn empty_cloud_has_axes_and_overlay() {
        let s = plot(&[]).render().unwrap();
        assert!(s.contains("<polyline") && s.contains("<line"));
        assert!(!s.contains("<circle"));
        assert!(s.starts_with("<?xml") && s.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn subsample_is_capped_and_deterministic() {
        let a = subsample(1_000_000, 9);
        assert!(a.len() <= MAX_POINTS && a.len() > MAX_POINTS / 2);
        assert_eq!(a, subsample(1_000_000, 9));
        assert_eq!(subsample(10, 9), (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn three_dimensions_are_unsupported() {
        let mut p = plot(&[1.0, 2.0, 3.0]);
        p.dim = 3;
        assert!(matches!(
            p.render(),
            Err(Error::Core(metacloud_core::Error::Unsupported(_)))
        ));
    }
}
