//! Hartmann problem: laminar MHD flow between parallel plates.
//!
//! Two quantities of interest, both closed forms in the Hartmann number
//! `x = B0 l / sqrt(eta mu)`:
//!
//! ```text
//! u_avg = -dp0dx * (eta / B0^2) * (1 - x coth x)
//! B_ind =  dp0dx * (l mu0 / 2 B0) * (1 - (2/x) tanh(x/2))
//! ```
//!
//! Both are positive on the whole parameter box since `x coth x > 1` and
//! `2 tanh(x/2) / x < 1` for `x > 0`. Five parameters vary on log-scaled
//! ranges; the magnetic constant and length are fixed at 1. Fluid density
//! is carried as a coordinate even though neither output depends on it, so
//! its identically-zero sensitivity stays visible downstream.
//!
//! Partial derivatives are analytic. The helper `x coth x` and its friends
//! switch to series below |x| < 1e-4 to avoid 0/0.

use crate::error::{Error, Result};
use crate::geometry::{AxisScale, DomainScaler};
use crate::models::Model;

/// Variable ranges, in model order: mu, rho, dp0dx, eta, B0 (all log axes).
pub const HARTMANN_RANGES: [(f64, f64); 5] =
    [(0.05, 0.2), (1.0, 5.0), (0.5, 3.0), (0.5, 3.0), (0.1, 1.0)];

const LABELS: [&str; 5] = ["log(mu)", "log(rho)", "log(dp0dx)", "log(eta)", "log(B0)"];

/// Index of `dp0dx` (applied pressure gradient) among the variables.
pub const DP0DX_AXIS: usize = 2;
/// Index of `B0` (applied magnetic field) among the variables.
pub const B0_AXIS: usize = 4;
/// Index of `rho` (fluid density) among the variables.
pub const RHO_AXIS: usize = 1;

#[derive(Clone, Copy, Debug)]
pub struct HartmannParams {
    pub mu: f64,
    pub rho: f64,
    pub dp0dx: f64,
    pub eta: f64,
    pub b0: f64,
    /// Magnetic constant, fixed at 1.
    pub mu0: f64,
    /// Plate separation length, fixed at 1.
    pub l: f64,
}

impl HartmannParams {
    pub fn new(mu: f64, rho: f64, dp0dx: f64, eta: f64, b0: f64) -> Result<Self> {
        for (name, value) in [
            ("mu", mu),
            ("rho", rho),
            ("dp0dx", dp0dx),
            ("eta", eta),
            ("B0", b0),
        ] {
            if value.is_nan() || value <= 0.0 {
                return Err(Error::NonPositiveParameter { name, value });
            }
        }
        Ok(Self {
            mu,
            rho,
            dp0dx,
            eta,
            b0,
            mu0: 1.0,
            l: 1.0,
        })
    }

    fn from_slice(p: &[f64]) -> Self {
        Self::new(p[0], p[1], p[2], p[3], p[4]).expect("positive parameters")
    }

    /// Hartmann number `B0 l / sqrt(eta mu)`.
    fn hartmann_number(&self) -> f64 {
        self.b0 * self.l / (self.eta * self.mu).sqrt()
    }
}

/// `x coth x`, series below |x| < 1e-4.
fn x_coth_x(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 + x * x / 3.0
    } else {
        x / x.tanh()
    }
}

/// d/dx of `x coth x`.
fn x_coth_x_deriv(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        2.0 * x / 3.0
    } else {
        let c = 1.0 / x.tanh();
        c + x * (1.0 - c * c)
    }
}

/// `(2/x) tanh(x/2)`, series below |x| < 1e-4.
fn two_tanh_half_over_x(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 12.0
    } else {
        2.0 * (x / 2.0).tanh() / x
    }
}

/// d/dx of `(2/x) tanh(x/2)`.
fn two_tanh_half_over_x_deriv(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        -x / 6.0
    } else {
        let t = (x / 2.0).tanh();
        (1.0 - t * t) / x - 2.0 * t / (x * x)
    }
}

/// Average flow velocity between the plates.
pub fn hartmann_u_avg(p: &HartmannParams) -> f64 {
    let x = p.hartmann_number();
    p.dp0dx * (p.eta / (p.b0 * p.b0)) * (x_coth_x(x) - 1.0)
}

/// Partials of `u_avg` with respect to (mu, rho, dp0dx, eta, B0).
pub fn hartmann_u_avg_gradient(p: &HartmannParams) -> [f64; 5] {
    let x = p.hartmann_number();
    let b2 = p.b0 * p.b0;
    let phi = x_coth_x(x);
    let dphi = x_coth_x_deriv(x);
    [
        // x depends on mu through 1/sqrt(mu): dx/dmu = -x/(2 mu)
        -p.dp0dx * p.eta * x * dphi / (2.0 * p.mu * b2),
        0.0,
        p.eta / b2 * (phi - 1.0),
        p.dp0dx / b2 * ((phi - 1.0) - x * dphi / 2.0),
        p.dp0dx * p.eta / (b2 * p.b0) * (x * dphi - 2.0 * (phi - 1.0)),
    ]
}

/// Induced magnetic field.
pub fn hartmann_b_ind(p: &HartmannParams) -> f64 {
    let x = p.hartmann_number();
    p.dp0dx * (p.l * p.mu0 / (2.0 * p.b0)) * (1.0 - two_tanh_half_over_x(x))
}

/// Partials of `B_ind` with respect to (mu, rho, dp0dx, eta, B0).
pub fn hartmann_b_ind_gradient(p: &HartmannParams) -> [f64; 5] {
    let x = p.hartmann_number();
    let psi = two_tanh_half_over_x(x);
    let dpsi = two_tanh_half_over_x_deriv(x);
    let lead = p.l * p.mu0 / (2.0 * p.b0);
    [
        p.dp0dx * lead * x * dpsi / (2.0 * p.mu),
        0.0,
        lead * (1.0 - psi),
        p.dp0dx * lead * x * dpsi / (2.0 * p.eta),
        -p.dp0dx * p.l * p.mu0 / (2.0 * p.b0 * p.b0) * ((1.0 - psi) + x * dpsi),
    ]
}

fn hartmann_scaler() -> DomainScaler {
    DomainScaler::new(
        HARTMANN_RANGES
            .iter()
            .map(|&(lo, hi)| AxisScale::log(lo, hi))
            .collect(),
    )
    .expect("valid ranges")
}

macro_rules! hartmann_model {
    ($ty:ident, $name:literal, $eval:path, $grad:path) => {
        pub struct $ty {
            scaler: DomainScaler,
        }

        impl Default for $ty {
            fn default() -> Self {
                Self {
                    scaler: hartmann_scaler(),
                }
            }
        }

        impl Model for $ty {
            fn name(&self) -> &str {
                $name
            }
            fn dimension(&self) -> usize {
                5
            }
            fn scaler(&self) -> &DomainScaler {
                &self.scaler
            }
            fn variable_labels(&self) -> Vec<String> {
                LABELS.iter().map(|s| s.to_string()).collect()
            }
            fn eval(&self, p: &[f64]) -> f64 {
                $eval(&HartmannParams::from_slice(p))
            }
            fn gradient(&self, p: &[f64]) -> Vec<f64> {
                $grad(&HartmannParams::from_slice(p)).to_vec()
            }
        }
    };
}

hartmann_model!(HartmannUAvg, "hartmann_u", hartmann_u_avg, hartmann_u_avg_gradient);
hartmann_model!(HartmannBInd, "hartmann_B", hartmann_b_ind, hartmann_b_ind_gradient);

#[cfg(test)]
mod tests {
    use super::*;

    fn reference_params() -> HartmannParams {
        HartmannParams::new(0.1, 1.0, 1.0, 1.0, 0.5).unwrap()
    }

    // Frozen from a 40-digit evaluation of the closed forms.
    const U_AVG_REF: f64 = 2.883648270981682;
    const B_IND_REF: f64 = 0.16676325352515722;

    #[test]
    fn closed_forms_match_high_precision_reference() {
        let p = reference_params();
        assert!((hartmann_u_avg(&p) - U_AVG_REF).abs() / U_AVG_REF <= 1e-14);
        assert!((hartmann_b_ind(&p) - B_IND_REF).abs() / B_IND_REF <= 1e-14);
    }

    #[test]
    fn density_never_matters() {
        let a = HartmannParams::new(0.07, 1.0, 2.0, 1.5, 0.3).unwrap();
        let b = HartmannParams::new(0.07, 4.9, 2.0, 1.5, 0.3).unwrap();
        assert_eq!(hartmann_u_avg(&a), hartmann_u_avg(&b));
        assert_eq!(hartmann_b_ind(&a), hartmann_b_ind(&b));
        assert_eq!(hartmann_u_avg_gradient(&a)[1], 0.0);
        assert_eq!(hartmann_b_ind_gradient(&a)[1], 0.0);
    }

    #[test]
    fn rejects_nonpositive_parameters() {
        assert!(matches!(
            HartmannParams::new(0.0, 1.0, 1.0, 1.0, 0.5),
            Err(Error::NonPositiveParameter { name: "mu", .. })
        ));
        assert!(matches!(
            HartmannParams::new(0.1, 1.0, 1.0, 1.0, -0.5),
            Err(Error::NonPositiveParameter { name: "B0", .. })
        ));
    }

    #[test]
    fn both_outputs_positive_on_a_full_sweep() {
        // 5 points per axis across the whole box.
        let n = 5;
        let axis = |lo: f64, hi: f64, k: usize| {
            (lo.ln() + (hi.ln() - lo.ln()) * k as f64 / (n - 1) as f64).exp()
        };
        let mut count = 0;
        for i0 in 0..n {
            for i1 in 0..n {
                for i2 in 0..n {
                    for i3 in 0..n {
                        for i4 in 0..n {
                            let p = HartmannParams::new(
                                axis(0.05, 0.2, i0),
                                axis(1.0, 5.0, i1),
                                axis(0.5, 3.0, i2),
                                axis(0.5, 3.0, i3),
                                axis(0.1, 1.0, i4),
                            )
                            .unwrap();
                            assert!(hartmann_u_avg(&p) > 0.0, "u_avg <= 0 at {p:?}");
                            assert!(hartmann_b_ind(&p) > 0.0, "B_ind <= 0 at {p:?}");
                            count += 1;
                        }
                    }
                }
            }
        }
        assert_eq!(count, 3125);
    }

    #[test]
    fn small_argument_series_is_smooth() {
        // Values and derivatives on both sides of the series switch agree.
        // The exact derivative branches cancel two ~1/x terms, so just above
        // the switch they carry ~1e-11 of rounding; the switch exists
        // precisely because that noise blows up as x -> 0.
        for &x in &[9.9e-5, 1.01e-4] {
            assert!((x_coth_x(x) - 1.0 - x * x / 3.0).abs() <= 1e-12);
            assert!((x_coth_x_deriv(x) - 2.0 * x / 3.0).abs() <= 1e-10);
            assert!((two_tanh_half_over_x(x) - (1.0 - x * x / 12.0)).abs() <= 1e-12);
            assert!((two_tanh_half_over_x_deriv(x) + x / 6.0).abs() <= 1e-10);
        }
    }

    /// Analytic partials vs central differences in physical coordinates.
    #[test]
    fn gradients_match_physical_finite_differences() {
        type EvalFn = fn(&HartmannParams) -> f64;
        type GradFn = fn(&HartmannParams) -> [f64; 5];
        let p = HartmannParams::new(0.13, 2.0, 1.7, 2.1, 0.62).unwrap();
        let fields: [(EvalFn, GradFn); 2] = [
            (hartmann_u_avg, hartmann_u_avg_gradient),
            (hartmann_b_ind, hartmann_b_ind_gradient),
        ];
        for (eval, grad) in fields {
            let g = grad(&p);
            let vals = [p.mu, p.rho, p.dp0dx, p.eta, p.b0];
            for k in 0..5 {
                let h = 1e-6 * vals[k];
                let mut lo = p;
                let mut hi = p;
                match k {
                    0 => {
                        lo.mu -= h;
                        hi.mu += h;
                    }
                    1 => {
                        lo.rho -= h;
                        hi.rho += h;
                    }
                    2 => {
                        lo.dp0dx -= h;
                        hi.dp0dx += h;
                    }
                    3 => {
                        lo.eta -= h;
                        hi.eta += h;
                    }
                    _ => {
                        lo.b0 -= h;
                        hi.b0 += h;
                    }
                }
                let fd = (eval(&hi) - eval(&lo)) / (2.0 * h);
                let denom = g[k].abs().max(fd.abs()).max(1e-10);
                assert!((g[k] - fd).abs() / denom <= 1e-6, "axis {k}: {} vs {fd}", g[k]);
            }
        }
    }
}
