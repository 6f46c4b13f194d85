//! Monotone piecewise-cubic Hermite surrogate on `[0,1]`.
//!
//! Tangents come from Fritsch-Carlson limiting: interior knots take the
//! weighted harmonic mean of the adjacent secant slopes (zero when the
//! secants disagree in sign), endpoints take the three-point one-sided
//! formula clamped into the monotone region. The result interpolates
//! exactly, is globally C1 (one tangent per knot), and never overshoots
//! monotone data.

use std::io::Write;

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct MonotoneSpline {
    knots: Vec<f64>,
    values: Vec<f64>,
    tangents: Vec<f64>,
}

impl MonotoneSpline {
    /// Fit to `(ts[i], zs[i])` with strictly increasing `ts`.
    pub fn fit(ts: &[f64], zs: &[f64]) -> Result<Self> {
        if ts.len() != zs.len() {
            return Err(Error::LengthMismatch {
                knots: ts.len(),
                values: zs.len(),
            });
        }
        if ts.len() < 2 {
            return Err(Error::TooFewKnots { got: ts.len() });
        }
        let n = ts.len();
        let mut h = vec![0.0; n - 1];
        let mut secant = vec![0.0; n - 1];
        for i in 0..n - 1 {
            h[i] = ts[i + 1] - ts[i];
            if h[i] <= 0.0 {
                return Err(Error::UnsortedKnots { index: i + 1 });
            }
            secant[i] = (zs[i + 1] - zs[i]) / h[i];
        }

        let mut d = vec![0.0; n];
        if n == 2 {
            d[0] = secant[0];
            d[1] = secant[0];
        } else {
            for i in 1..n - 1 {
                let (s0, s1) = (secant[i - 1], secant[i]);
                if s0 == 0.0 || s1 == 0.0 || s0.signum() != s1.signum() {
                    d[i] = 0.0;
                } else {
                    let w1 = 2.0 * h[i] + h[i - 1];
                    let w2 = h[i] + 2.0 * h[i - 1];
                    d[i] = (w1 + w2) / (w1 / s0 + w2 / s1);
                }
            }
            d[0] = edge_tangent(h[0], h[1], secant[0], secant[1]);
            d[n - 1] = edge_tangent(h[n - 2], h[n - 3], secant[n - 2], secant[n - 3]);
        }

        Ok(Self {
            knots: ts.to_vec(),
            values: zs.to_vec(),
            tangents: d,
        })
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn tangents(&self) -> &[f64] {
        &self.tangents
    }

    /// Evaluate at `t`, clamping to the nearest knot outside the range.
    pub fn eval(&self, t: f64) -> f64 {
        self.eval_flagged(t).0
    }

    /// Evaluate at `t`; the flag reports whether `t` was clamped.
    pub fn eval_flagged(&self, t: f64) -> (f64, bool) {
        let n = self.knots.len();
        if t <= self.knots[0] {
            return (self.values[0], t < self.knots[0]);
        }
        if t >= self.knots[n - 1] {
            return (self.values[n - 1], t > self.knots[n - 1]);
        }
        let i = self.segment(t);
        let h = self.knots[i + 1] - self.knots[i];
        let u = (t - self.knots[i]) / h;
        let (h00, h10, h01, h11) = hermite_basis(u);
        (
            h00 * self.values[i]
                + h10 * h * self.tangents[i]
                + h01 * self.values[i + 1]
                + h11 * h * self.tangents[i + 1],
            false,
        )
    }

    /// First derivative at `t` (zero beyond the ends, matching the clamp).
    pub fn derivative(&self, t: f64) -> f64 {
        let n = self.knots.len();
        if t < self.knots[0] || t > self.knots[n - 1] {
            return 0.0;
        }
        let i = if t >= self.knots[n - 1] {
            n - 2
        } else {
            self.segment(t)
        };
        let h = self.knots[i + 1] - self.knots[i];
        let u = (t - self.knots[i]) / h;
        let d00 = (6.0 * u * u - 6.0 * u) / h;
        let d10 = 3.0 * u * u - 4.0 * u + 1.0;
        let d01 = (6.0 * u - 6.0 * u * u) / h;
        let d11 = 3.0 * u * u - 2.0 * u;
        d00 * self.values[i]
            + d10 * self.tangents[i]
            + d01 * self.values[i + 1]
            + d11 * self.tangents[i + 1]
    }

    /// Index of the segment containing `t`, for `t` strictly inside the range.
    fn segment(&self, t: f64) -> usize {
        let i = self.knots.partition_point(|&k| k <= t);
        i.saturating_sub(1).min(self.knots.len() - 2)
    }

    /// Sample the fit at `resolution` evenly spaced points: CSV `t,fhat`.
    pub fn write_samples_csv<W: Write>(&self, mut w: W, resolution: usize) -> Result<()> {
        let n = resolution.max(2);
        writeln!(w, "t,fhat")?;
        let (lo, hi) = (self.knots[0], self.knots[self.knots.len() - 1]);
        for i in 0..n {
            let t = lo + (hi - lo) * i as f64 / (n - 1) as f64;
            writeln!(w, "{:.12e},{:.12e}", t, self.eval(t))?;
        }
        Ok(())
    }
}

/// Three-point one-sided endpoint tangent with the Fritsch-Carlson clamps.
fn edge_tangent(h0: f64, h1: f64, s0: f64, s1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * s0 - h0 * s1) / (h0 + h1);
    if d.signum() != s0.signum() || s0 == 0.0 {
        0.0
    } else if s0.signum() != s1.signum() && d.abs() > 3.0 * s0.abs() {
        3.0 * s0
    } else {
        d
    }
}

fn hermite_basis(u: f64) -> (f64, f64, f64, f64) {
    let u2 = u * u;
    (
        (1.0 + 2.0 * u) * (1.0 - u) * (1.0 - u),
        u * (1.0 - u) * (1.0 - u),
        u2 * (3.0 - 2.0 * u),
        u2 * (u - 1.0),
    )
}
