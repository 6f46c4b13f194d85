//! Per-variable influence along the manifold.
//!
//! At each manifold point the magnitude of every partial derivative (cube
//! coordinates) is recorded, one curve per input variable. Rankings are the
//! descending argsort of the smoothed curves; maximal runs of identical
//! rankings merge into intervals, which is where "variable A overtakes
//! variable B at t ~ 0.8" style statements come from.

use std::io::Write;

use crate::builder::ActiveManifold;
use crate::error::Result;
use crate::geometry::SampleSet;
use crate::projector::GradientSource;

#[derive(Clone, Debug)]
pub struct SensitivityProfile {
    params: Vec<f64>,
    /// `curves[var][i]` = |d f / d x_var| at manifold point `i`.
    curves: Vec<Vec<f64>>,
    /// Signs of the raw partials, same shape as `curves`.
    signs: Vec<Vec<f64>>,
    labels: Vec<String>,
}

/// Influence curves with gradients read from the nearest sample.
pub fn profile(manifold: &ActiveManifold, samples: &SampleSet) -> Result<SensitivityProfile> {
    profile_with_gradients(
        manifold,
        samples,
        GradientSource::NearestSample,
        default_labels(samples.dimension()),
    )
}

/// Influence curves with an explicit gradient source and labels.
pub fn profile_with_gradients(
    manifold: &ActiveManifold,
    samples: &SampleSet,
    gradients: GradientSource<'_>,
    labels: Vec<String>,
) -> Result<SensitivityProfile> {
    let m = samples.dimension();
    let mut curves = vec![Vec::with_capacity(manifold.len()); m];
    let mut signs = vec![Vec::with_capacity(manifold.len()); m];
    for p in manifold.points() {
        let g = match gradients {
            GradientSource::NearestSample => samples.nearest(p)?.gradient.clone(),
            GradientSource::Exact(f) => f(p),
        };
        for k in 0..m {
            curves[k].push(g[k].abs());
            signs[k].push(g[k].signum());
        }
    }
    Ok(SensitivityProfile {
        params: manifold.params().to_vec(),
        curves,
        signs,
        labels,
    })
}

fn default_labels(m: usize) -> Vec<String> {
    (1..=m).map(|i| format!("x{i}")).collect()
}

/// One maximal interval of constant variable ranking.
#[derive(Clone, Debug, PartialEq)]
pub struct RankSegment {
    pub t_start: f64,
    pub t_end: f64,
    /// Variable indices, most influential first.
    pub ranking: Vec<usize>,
}

impl SensitivityProfile {
    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn curves(&self) -> &[Vec<f64>] {
        &self.curves
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// CSV export: `t,<label1>,...,<labelm>` with magnitude rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        write!(w, "t")?;
        for l in &self.labels {
            write!(w, ",{l}")?;
        }
        writeln!(w)?;
        for i in 0..self.params.len() {
            write!(w, "{:.12e}", self.params[i])?;
            for c in &self.curves {
                write!(w, ",{:.12e}", c[i])?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    /// CSV export of the signed partials, same shape as [`write_csv`].
    pub fn write_signed_csv<W: Write>(&self, mut w: W) -> Result<()> {
        write!(w, "t")?;
        for l in &self.labels {
            write!(w, ",{l}")?;
        }
        writeln!(w)?;
        for i in 0..self.params.len() {
            write!(w, "{:.12e}", self.params[i])?;
            for (c, s) in self.curves.iter().zip(&self.signs) {
                write!(w, ",{:.12e}", c[i] * s[i])?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    /// Minimal SVG line plot: one polyline per variable plus a legend.
    pub fn write_svg<W: Write>(&self, mut w: W) -> Result<()> {
        const PALETTE: [&str; 8] = [
            "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2",
            "#7f7f7f",
        ];
        let (width, height, margin) = (800.0, 420.0, 50.0);
        let y_max = self
            .curves
            .iter()
            .flatten()
            .fold(0.0f64, |a, &b| a.max(b))
            .max(1e-300);
        let x_of = |t: f64| margin + t * (width - 2.0 * margin);
        let y_of = |v: f64| height - margin - v / y_max * (height - 2.0 * margin);
        writeln!(
            w,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
        )?;
        writeln!(
            w,
            r#"<rect width="{width}" height="{height}" fill="white"/>"#
        )?;
        // axes
        writeln!(
            w,
            r#"<line x1="{m}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>"#,
            m = margin,
            y0 = height - margin,
            x1 = width - margin
        )?;
        writeln!(
            w,
            r#"<line x1="{m}" y1="{m}" x2="{m}" y2="{y0}" stroke="black"/>"#,
            m = margin,
            y0 = height - margin
        )?;
        writeln!(
            w,
            r#"<text x="{x}" y="{y}" font-size="12">t</text>"#,
            x = width - margin + 8.0,
            y = height - margin + 4.0
        )?;
        writeln!(
            w,
            r#"<text x="{x}" y="{y}" font-size="12">{top:.3e}</text>"#,
            x = 4.0,
            y = margin,
            top = y_max
        )?;
        for (k, curve) in self.curves.iter().enumerate() {
            let color = PALETTE[k % PALETTE.len()];
            let points: Vec<String> = self
                .params
                .iter()
                .zip(curve)
                .map(|(&t, &v)| format!("{:.2},{:.2}", x_of(t), y_of(v)))
                .collect();
            writeln!(
                w,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                points.join(" ")
            )?;
            let ly = margin + 16.0 * k as f64;
            writeln!(
                w,
                r#"<line x1="{x}" y1="{ly}" x2="{x2}" y2="{ly}" stroke="{color}" stroke-width="3"/>"#,
                x = width - margin - 130.0,
                x2 = width - margin - 110.0
            )?;
            writeln!(
                w,
                r#"<text x="{x}" y="{y}" font-size="12">{label}</text>"#,
                x = width - margin - 104.0,
                y = ly + 4.0,
                label = self.labels[k]
            )?;
        }
        writeln!(w, "</svg>")?;
        Ok(())
    }
}

/// Smooth each curve with a centered moving average of width `window`, rank
/// variables by smoothed magnitude at every parameter, and merge maximal
/// runs of identical rankings into intervals covering `[0,1]`.
pub fn rank_segments(profile: &SensitivityProfile, window: usize) -> Vec<RankSegment> {
    let n = profile.params.len();
    let m = profile.curves.len();
    if n == 0 || m == 0 {
        return Vec::new();
    }
    let half = window.max(1) / 2;
    let smoothed: Vec<Vec<f64>> = profile
        .curves
        .iter()
        .map(|c| moving_average(c, half))
        .collect();

    let ranking_at = |i: usize| -> Vec<usize> {
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| {
            smoothed[b][i]
                .partial_cmp(&smoothed[a][i])
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
        order
    };

    let mut segments: Vec<RankSegment> = Vec::new();
    let mut current = ranking_at(0);
    let mut start = profile.params[0];
    for i in 1..n {
        let r = ranking_at(i);
        if r != current {
            segments.push(RankSegment {
                t_start: start,
                t_end: profile.params[i],
                ranking: std::mem::replace(&mut current, r),
            });
            start = profile.params[i];
        }
    }
    segments.push(RankSegment {
        t_start: start,
        t_end: profile.params[n - 1],
        ranking: current,
    });
    segments
}

fn moving_average(curve: &[f64], half: usize) -> Vec<f64> {
    let n = curve.len();
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half).min(n - 1);
            curve[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64
        })
        .collect()
}

/// Markdown table of ranking intervals.
pub fn segments_markdown(segments: &[RankSegment], labels: &[String]) -> String {
    let mut out = String::from("| t start | t end | ranking (most influential first) |\n");
    out.push_str("|---|---|---|\n");
    for s in segments {
        let names: Vec<&str> = s.ranking.iter().map(|&i| labels[i].as_str()).collect();
        out.push_str(&format!(
            "| {:.4} | {:.4} | {} |\n",
            s.t_start,
            s.t_end,
            names.join(" > ")
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic_profile(curves: Vec<Vec<f64>>) -> SensitivityProfile {
        let n = curves[0].len();
        let params = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        let m = curves.len();
        SensitivityProfile {
            params,
            signs: vec![vec![1.0; n]; m],
            labels: (0..m).map(|i| format!("v{i}")).collect(),
            curves,
        }
    }

    #[test]
    fn constant_dominance_is_one_segment() {
        let p = synthetic_profile(vec![vec![1.0; 11], vec![0.0; 11]]);
        let segs = rank_segments(&p, 1);
        assert_eq!(segs.len(), 1);
        assert_eq!(segs[0].ranking, vec![0, 1]);
        assert_eq!((segs[0].t_start, segs[0].t_end), (0.0, 1.0));
    }

    #[test]
    fn crossing_curves_split_at_the_crossing() {
        let n = 101;
        let c1: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        let c2: Vec<f64> = c1.iter().map(|t| 1.0 - t).collect();
        let p = synthetic_profile(vec![c1, c2]);
        let segs = rank_segments(&p, 1);
        assert_eq!(segs.len(), 2);
        assert_eq!(segs[0].ranking, vec![1, 0]);
        assert_eq!(segs[1].ranking, vec![0, 1]);
        assert!((segs[0].t_end - 0.5).abs() <= 0.02);
    }

    #[test]
    fn segments_partition_zero_one() {
        let n = 37;
        let c1: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin().abs()).collect();
        let c2: Vec<f64> = (0..n).map(|i| (i as f64 * 0.17).cos().abs()).collect();
        let p = synthetic_profile(vec![c1, c2]);
        for window in [1, 3, 5] {
            let segs = rank_segments(&p, window);
            assert_eq!(segs[0].t_start, 0.0);
            assert_eq!(segs[segs.len() - 1].t_end, 1.0);
            for w in segs.windows(2) {
                assert_eq!(w[0].t_end, w[1].t_start);
                assert!(w[0].t_start < w[0].t_end);
            }
        }
    }

    #[test]
    fn scaling_all_curves_preserves_rankings() {
        let n = 25;
        let c1: Vec<f64> = (0..n).map(|i| 1.0 + (i as f64 * 0.3).sin()).collect();
        let c2: Vec<f64> = (0..n).map(|i| 1.0 + (i as f64 * 0.5).cos()).collect();
        let base = synthetic_profile(vec![c1.clone(), c2.clone()]);
        let scaled = synthetic_profile(vec![
            c1.iter().map(|v| 17.3 * v).collect(),
            c2.iter().map(|v| 17.3 * v).collect(),
        ]);
        assert_eq!(rank_segments(&base, 3), rank_segments(&scaled, 3));
    }

    #[test]
    fn window_one_is_the_raw_argsort() {
        let p = synthetic_profile(vec![vec![0.0, 2.0, 0.0], vec![1.0, 1.0, 1.0]]);
        let segs = rank_segments(&p, 1);
        assert_eq!(segs.len(), 3);
        assert_eq!(segs[0].ranking, vec![1, 0]);
        assert_eq!(segs[1].ranking, vec![0, 1]);
        assert_eq!(segs[2].ranking, vec![1, 0]);
    }

    #[test]
    fn ties_rank_by_variable_index() {
        let p = synthetic_profile(vec![vec![1.0; 3], vec![1.0; 3]]);
        let segs = rank_segments(&p, 1);
        assert_eq!(segs.len(), 1);
        assert_eq!(segs[0].ranking, vec![0, 1]);
    }

    #[test]
    fn constant_function_has_zero_curves() {
        use crate::builder::{arclength_parameterize, Termination};
        use crate::geometry::{PointM, SamplePoint, SampleSet};
        let pts: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64 / 4.0, 0.0]).collect();
        let samples: Vec<SamplePoint> = pts
            .iter()
            .map(|p| SamplePoint::new(PointM::new(p.clone()), 1.0, vec![0.0, 0.0]).unwrap())
            .collect();
        let set = SampleSet::scattered(samples).unwrap();
        let manifold = arclength_parameterize(
            pts.into_iter().map(PointM::new).collect(),
            (0..5).map(|i| i as f64).collect(),
            0,
            (Termination::MaxSteps, Termination::MaxSteps),
        )
        .unwrap();
        let prof = profile(&manifold, &set).unwrap();
        for c in prof.curves() {
            assert!(c.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn markdown_lists_every_segment() {
        let p = synthetic_profile(vec![vec![1.0; 4], vec![0.0; 4]]);
        let segs = rank_segments(&p, 1);
        let md = segments_markdown(&segs, &["a".into(), "b".into()]);
        assert!(md.contains("a > b"));
    }
}
