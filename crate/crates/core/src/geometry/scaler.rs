//! Invertible affine map between a physical box and the cube `[-1,1]^m`.
//!
//! Each axis is either linear or log-scaled. A log axis maps the cube
//! coordinate `x` to `exp(a (x+1) + log lo)` with `a = (log hi - log lo)/2`,
//! so `-1 -> lo`, `+1 -> hi`, and `0 -> sqrt(lo hi)` (the geometric
//! midpoint). Log axes are kept explicit rather than pre-transforming data,
//! so sensitivity output can be labeled in the `log(.)` variables.
//!
//! `pullback_gradient` carries a gradient from physical coordinates back to
//! cube coordinates with the chain rule: a per-axis multiply by `dD/dx`.

use crate::error::{Error, Result};
use crate::geometry::PointM;

/// Relative slack accepted at range boundaries before declaring OutOfRange;
/// absorbs roundtrip rounding (exp/log are not exactly inverse in f64).
const RANGE_SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AxisScale {
    pub lo: f64,
    pub hi: f64,
    pub log_scaled: bool,
}

impl AxisScale {
    pub fn linear(lo: f64, hi: f64) -> Self {
        Self {
            lo,
            hi,
            log_scaled: false,
        }
    }

    pub fn log(lo: f64, hi: f64) -> Self {
        Self {
            lo,
            hi,
            log_scaled: true,
        }
    }
}

#[derive(Clone, Debug)]
pub struct DomainScaler {
    axes: Vec<AxisScale>,
}

impl DomainScaler {
    pub fn new(axes: Vec<AxisScale>) -> Result<Self> {
        for (axis, a) in axes.iter().enumerate() {
            if !a.lo.is_finite() || !a.hi.is_finite() || a.lo >= a.hi {
                return Err(Error::InvalidConfig(format!(
                    "axis {axis}: need lo < hi, got [{}, {}]",
                    a.lo, a.hi
                )));
            }
            if a.log_scaled && a.lo <= 0.0 {
                return Err(Error::NonPositiveBound { axis, lo: a.lo });
            }
        }
        Ok(Self { axes })
    }

    /// The identity map on `[-1,1]^m`.
    pub fn identity(dim: usize) -> Self {
        Self {
            axes: vec![AxisScale::linear(-1.0, 1.0); dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[AxisScale] {
        &self.axes
    }

    fn check_dim(&self, got: usize) -> Result<()> {
        if got != self.axes.len() {
            return Err(Error::DimensionMismatch {
                expected: self.axes.len(),
                got,
            });
        }
        Ok(())
    }

    /// Map physical values into the cube. Values within `[lo, hi]` per axis
    /// (up to rounding slack) are accepted.
    pub fn to_cube(&self, physical: &[f64]) -> Result<PointM> {
        self.check_dim(physical.len())?;
        let mut out = Vec::with_capacity(physical.len());
        for (axis, (&p, a)) in physical.iter().zip(&self.axes).enumerate() {
            let x = if a.log_scaled {
                if p <= 0.0 {
                    return Err(Error::OutOfRange {
                        axis,
                        value: p,
                        lo: a.lo,
                        hi: a.hi,
                    });
                }
                let (llo, lhi) = (a.lo.ln(), a.hi.ln());
                let slack = RANGE_SLACK * (lhi - llo);
                let lp = p.ln();
                if lp < llo - slack || lp > lhi + slack {
                    return Err(Error::OutOfRange {
                        axis,
                        value: p,
                        lo: a.lo,
                        hi: a.hi,
                    });
                }
                2.0 * (lp - llo) / (lhi - llo) - 1.0
            } else {
                let slack = RANGE_SLACK * (a.hi - a.lo);
                if p < a.lo - slack || p > a.hi + slack {
                    return Err(Error::OutOfRange {
                        axis,
                        value: p,
                        lo: a.lo,
                        hi: a.hi,
                    });
                }
                2.0 * (p - a.lo) / (a.hi - a.lo) - 1.0
            };
            out.push(x.clamp(-1.0, 1.0));
        }
        Ok(PointM::new(out))
    }

    /// Map a cube point to physical values.
    pub fn from_cube(&self, x: &PointM) -> Result<Vec<f64>> {
        self.check_dim(x.dim())?;
        let mut out = Vec::with_capacity(x.dim());
        for (axis, &c) in x.iter().enumerate() {
            if c.abs() > 1.0 + RANGE_SLACK {
                return Err(Error::OutOfRange {
                    axis,
                    value: c,
                    lo: -1.0,
                    hi: 1.0,
                });
            }
            out.push(self.axis_from_cube(axis, c.clamp(-1.0, 1.0)));
        }
        Ok(out)
    }

    fn axis_from_cube(&self, axis: usize, c: f64) -> f64 {
        let a = &self.axes[axis];
        if a.log_scaled {
            let (llo, lhi) = (a.lo.ln(), a.hi.ln());
            ((lhi - llo) / 2.0 * (c + 1.0) + llo).exp()
        } else {
            a.lo + (a.hi - a.lo) / 2.0 * (c + 1.0)
        }
    }

    /// `dD/dx` on one axis, evaluated at cube coordinate `c`.
    pub fn axis_derivative(&self, axis: usize, c: f64) -> f64 {
        let a = &self.axes[axis];
        if a.log_scaled {
            let half_span = (a.hi.ln() - a.lo.ln()) / 2.0;
            half_span * self.axis_from_cube(axis, c)
        } else {
            (a.hi - a.lo) / 2.0
        }
    }

    /// Chain rule: gradient of `f` with respect to physical coordinates,
    /// pulled back to the gradient of `f o D` at the cube point `x`.
    pub fn pullback_gradient(&self, physical_grad: &[f64], x: &PointM) -> Result<Vec<f64>> {
        self.check_dim(physical_grad.len())?;
        self.check_dim(x.dim())?;
        Ok(physical_grad
            .iter()
            .enumerate()
            .map(|(axis, &g)| g * self.axis_derivative(axis, x[axis]))
            .collect())
    }
}
