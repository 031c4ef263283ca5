//! Angular profile of an embedding: each point adds its distance from the
//! origin to the bin of its polar angle.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::embedding::Embedding2D;
use crate::error::{Error, Result};

pub const DEFAULT_BINS: usize = 90;
pub const DEFAULT_SMOOTHING: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolarPoint {
    pub label: String,
    pub distance: f64,
    /// Degrees counterclockwise from the positive x axis, in `[0, 360)`.
    pub angle: f64,
}

/// Polar angle of `(x, y)` in degrees, `[0, 360)`. The origin maps to 0.
pub fn polar_angle(x: f64, y: f64) -> f64 {
    if x == 0.0 && y == 0.0 {
        return 0.0;
    }
    let mut a = y.atan2(x).to_degrees();
    if a < 0.0 {
        a += 360.0;
    }
    if a >= 360.0 {
        a = 0.0;
    }
    a
}

pub fn to_polar(e: &Embedding2D) -> Vec<PolarPoint> {
    e.labels
        .iter()
        .zip(&e.coords)
        .map(|(label, c)| PolarPoint {
            label: label.clone(),
            distance: c[0].hypot(c[1]),
            angle: polar_angle(c[0], c[1]),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinMember {
    pub term: String,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub raw: Vec<f64>,
    pub smoothed: Vec<f64>,
    /// Degrees per bin.
    pub bin_width: f64,
    /// Contributing points of each bin, in input order.
    pub members: Vec<Vec<BinMember>>,
}

impl RadialProfile {
    pub fn bins(&self) -> usize {
        self.raw.len()
    }

    /// Bin of `angle` under half-open `[i·w, (i+1)·w)` bins.
    pub fn bin_of(angle: f64, bins: usize) -> usize {
        let b = (angle * bins as f64 / 360.0).floor();
        if b <= 0.0 {
            0
        } else {
            (b as usize).min(bins - 1)
        }
    }

    /// An all-zero profile, used for targets too small to embed.
    pub fn empty(bins: usize) -> Self {
        RadialProfile {
            raw: vec![0.0; bins],
            smoothed: vec![0.0; bins],
            bin_width: 360.0 / bins as f64,
            members: vec![Vec::new(); bins],
        }
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("bin_start\traw\tsmoothed\n");
        for i in 0..self.bins() {
            let _ = writeln!(
                out,
                "{}\t{}\t{}",
                i as f64 * self.bin_width,
                self.raw[i],
                self.smoothed[i]
            );
        }
        out
    }

    /// Line plot of the smoothed profile over 0–360°.
    pub fn to_svg(&self, title: &str) -> String {
        const W: f64 = 720.0;
        const H: f64 = 360.0;
        const LEFT: f64 = 70.0;
        const RIGHT: f64 = 20.0;
        const TOP: f64 = 40.0;
        const BOTTOM: f64 = 50.0;
        let pw = W - LEFT - RIGHT;
        let ph = H - TOP - BOTTOM;
        let max = self.smoothed.iter().copied().fold(0.0f64, f64::max);
        let ymax = if max > 0.0 { max } else { 1.0 };
        let n = self.bins();

        let mut points = String::new();
        for (i, v) in self.smoothed.iter().enumerate() {
            // Plot each bin at its center angle.
            let deg = (i as f64 + 0.5) * self.bin_width;
            let x = LEFT + pw * deg / 360.0;
            let y = TOP + ph * (1.0 - v / ymax);
            if i > 0 {
                points.push(' ');
            }
            let _ = write!(points, "{x:.2},{y:.2}");
        }

        let mut svg = String::new();
        let _ = writeln!(
            svg,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
        );
        let _ = writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="22" text-anchor="middle" font-family="sans-serif" font-size="15">{}</text>"#,
            W / 2.0,
            escape_xml(title)
        );
        let _ = writeln!(
            svg,
            r#"<line x1="{LEFT}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#,
            TOP + ph,
            LEFT + pw,
            TOP + ph
        );
        let _ = writeln!(
            svg,
            r#"<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{}" stroke="black"/>"#,
            TOP + ph
        );
        for deg in (0..=360).step_by(45) {
            let x = LEFT + pw * deg as f64 / 360.0;
            let _ = writeln!(
                svg,
                r#"<text x="{x:.2}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="11">{deg}</text>"#,
                TOP + ph + 16.0
            );
        }
        for frac in [0.0, 0.5, 1.0] {
            let y = TOP + ph * (1.0 - frac);
            let _ = writeln!(
                svg,
                r#"<text x="{}" y="{:.2}" text-anchor="end" font-family="sans-serif" font-size="11">{:.3}</text>"#,
                LEFT - 6.0,
                y + 4.0,
                ymax * frac
            );
        }
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="12">angle (degrees, {n} bins)</text>"#,
            LEFT + pw / 2.0,
            H - 10.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="16" y="{}" text-anchor="middle" font-family="sans-serif" font-size="12" transform="rotate(-90 16 {})">smoothed distance</text>"#,
            TOP + ph / 2.0,
            TOP + ph / 2.0
        );
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="steelblue" stroke-width="1.5" points="{points}"/>"#
        );
        svg.push_str("</svg>\n");
        svg
    }
}

fn escape_xml(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Accumulates point distances into `bins` equal angular bins. The smoothed
/// part starts as a copy of the raw part.
pub fn bin_profile(points: &[PolarPoint], bins: usize) -> Result<RadialProfile> {
    if bins < 3 {
        return Err(Error::Parameter(format!(
            "need at least 3 bins, got {bins}"
        )));
    }
    let mut profile = RadialProfile::empty(bins);
    for p in points {
        if p.distance.is_nan() || p.distance < 0.0 || !p.angle.is_finite() {
            return Err(Error::Parameter(format!("bad polar point {p:?}")));
        }
        let b = RadialProfile::bin_of(p.angle, bins);
        profile.raw[b] += p.distance;
        profile.members[b].push(BinMember {
            term: p.label.clone(),
            distance: p.distance,
        });
    }
    profile.smoothed = profile.raw.clone();
    Ok(profile)
}

/// Circular centered moving average of `raw` with an odd window.
pub fn circular_moving_average(raw: &[f64], window: usize) -> Result<Vec<f64>> {
    let n = raw.len();
    if window.is_multiple_of(2) || window < 1 || window >= n {
        return Err(Error::Parameter(format!(
            "smoothing window must be odd and in 1..={}, got {window}",
            n.saturating_sub(1)
        )));
    }
    let half = window / 2;
    Ok((0..n)
        .map(|i| {
            let sum: f64 = (0..window).map(|o| raw[(i + n + o - half) % n]).sum();
            sum / window as f64
        })
        .collect())
}

/// Fills the smoothed part of `profile`.
pub fn smooth(mut profile: RadialProfile, window: usize) -> Result<RadialProfile> {
    profile.smoothed = circular_moving_average(&profile.raw, window)?;
    Ok(profile)
}

/// Polar conversion, binning and smoothing in one step.
pub fn radial_profile(e: &Embedding2D, bins: usize, window: usize) -> Result<RadialProfile> {
    smooth(bin_profile(&to_polar(e), bins)?, window)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pt(angle: f64, distance: f64) -> PolarPoint {
        PolarPoint {
            label: format!("{angle}"),
            distance,
            angle,
        }
    }

    #[test]
    fn polar_cases() {
        assert_eq!(polar_angle(1.0, 0.0), 0.0);
        assert_eq!(polar_angle(0.0, -2.0), 270.0);
        assert!((polar_angle(-1.0, -1.0) - 225.0).abs() < 1e-12);
        assert_eq!(polar_angle(0.0, 0.0), 0.0);
        assert_eq!(polar_angle(-0.0, 0.0), 0.0);
        let e = Embedding2D {
            labels: vec!["a".into(), "b".into()],
            coords: vec![[-1.0, -1.0], [0.0, 0.0]],
            eigenvalues: vec![],
            clamped_negatives: 0,
        };
        let p = to_polar(&e);
        assert!((p[0].distance - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(p[1].distance, 0.0);
    }

    #[test]
    fn binning_boundaries() {
        let prof = bin_profile(&[pt(0.0, 3.0)], 90).unwrap();
        assert_eq!(prof.raw[0], 3.0);
        assert_eq!(prof.raw.iter().sum::<f64>(), 3.0);
        assert_eq!(RadialProfile::bin_of(359.9, 90), 89);
        assert_eq!(RadialProfile::bin_of(4.0, 90), 1);
        assert_eq!(RadialProfile::bin_of(3.999999, 90), 0);
        assert_eq!(RadialProfile::bin_of(360.0, 90), 89);
    }

    #[test]
    fn smoothing_cases() {
        let constant = vec![2.5; 90];
        for w in [1, 3, 5, 89] {
            let s = circular_moving_average(&constant, w).unwrap();
            assert!(s.iter().all(|&v| (v - 2.5).abs() < 1e-12));
        }

        let mut impulse = vec![0.0; 90];
        impulse[0] = 9.0;
        let s = circular_moving_average(&impulse, 3).unwrap();
        assert_eq!(s[89], 3.0);
        assert_eq!(s[0], 3.0);
        assert_eq!(s[1], 3.0);
        assert_eq!(s.iter().filter(|&&v| v != 0.0).count(), 3);

        let raw: Vec<f64> = (0..90).map(|i| (i * 7 % 13) as f64).collect();
        assert_eq!(circular_moving_average(&raw, 1).unwrap(), raw);
    }

    #[test]
    fn smoothing_window_errors() {
        let raw = vec![1.0; 90];
        for w in [0, 2, 90, 91] {
            assert!(matches!(
                circular_moving_average(&raw, w),
                Err(Error::Parameter(_))
            ));
        }
    }

    #[test]
    fn svg_has_one_polyline() {
        let prof = smooth(
            bin_profile(&[pt(10.0, 1.0), pt(200.0, 2.0)], 90).unwrap(),
            5,
        )
        .unwrap();
        let svg = prof.to_svg("bass <test>");
        assert_eq!(svg.matches("<polyline").count(), 1);
        assert!(svg.contains("bass &lt;test&gt;"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn tsv_rows() {
        let prof = bin_profile(&[pt(10.0, 1.0)], 90).unwrap();
        let tsv = prof.to_tsv();
        assert_eq!(tsv.lines().count(), 91);
        assert!(tsv.lines().nth(3).unwrap().starts_with("8\t1\t1"));
    }

    proptest! {
        #[test]
        fn mass_and_membership(
            pts in prop::collection::vec((0.0f64..360.0, 0.0f64..10.0), 0..200),
            half in 0usize..44,
        ) {
            let points: Vec<_> = pts.iter().map(|&(a, d)| pt(a, d)).collect();
            let prof = smooth(bin_profile(&points, 90).unwrap(), 2 * half + 1).unwrap();
            let total: f64 = pts.iter().map(|p| p.1).sum();
            prop_assert!((prof.raw.iter().sum::<f64>() - total).abs() < 1e-9);
            prop_assert!((prof.smoothed.iter().sum::<f64>() - total).abs() < 1e-9);
            prop_assert!(prof.smoothed.iter().all(|&v| v >= 0.0));
            prop_assert_eq!(prof.members.iter().map(Vec::len).sum::<usize>(), pts.len());
        }

        #[test]
        fn rotation_shifts_bins(
            bins_of in prop::collection::vec((0usize..90, 0.05f64..0.95, 0.0f64..10.0), 1..100),
            m in 0usize..90,
            half in 0usize..5,
        ) {
            // Offsets inside each bin keep angles clear of bin edges.
            let pts: Vec<_> = bins_of.iter().map(|&(b, f, d)| pt((b as f64 + f) * 4.0, d)).collect();
            let rotated: Vec<_> = bins_of
                .iter()
                .map(|&(b, f, d)| pt((((b + m) % 90) as f64 + f) * 4.0, d))
                .collect();
            let w = 2 * half + 1;
            let a = smooth(bin_profile(&pts, 90).unwrap(), w).unwrap();
            let b = smooth(bin_profile(&rotated, 90).unwrap(), w).unwrap();
            for i in 0..90 {
                prop_assert!((a.raw[i] - b.raw[(i + m) % 90]).abs() < 1e-12);
                prop_assert!((a.smoothed[i] - b.smoothed[(i + m) % 90]).abs() < 1e-12);
            }
        }
    }
}
