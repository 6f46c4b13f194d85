//! Closed-form test models with analytic gradients.
//!
//! Each model evaluates in physical coordinates; `eval_cube` /
//! `gradient_cube` compose with the model's [`DomainScaler`] so the rest of
//! the pipeline only ever sees the cube `[-1,1]^m`.

mod hartmann;

pub use hartmann::{
    hartmann_b_ind, hartmann_b_ind_gradient, hartmann_u_avg, hartmann_u_avg_gradient,
    HartmannBInd, HartmannParams, HartmannUAvg, B0_AXIS, DP0DX_AXIS, HARTMANN_RANGES, RHO_AXIS,
};

use crate::error::{Error, Result};
use crate::geometry::{DomainScaler, PointM, SampleSet};

pub trait Model: Send + Sync {
    fn name(&self) -> &str;
    fn dimension(&self) -> usize;
    fn scaler(&self) -> &DomainScaler;
    /// Per-variable labels for sensitivity output, e.g. `log(mu)`.
    fn variable_labels(&self) -> Vec<String>;
    /// Function value at a physical point.
    fn eval(&self, physical: &[f64]) -> f64;
    /// Gradient with respect to the physical coordinates.
    fn gradient(&self, physical: &[f64]) -> Vec<f64>;

    fn eval_cube(&self, x: &[f64]) -> f64 {
        let p = PointM::new(x.to_vec());
        let phys = self.scaler().from_cube(&p).expect("cube point");
        self.eval(&phys)
    }

    /// Gradient of `f o D` at a cube point (chain rule through the scaler).
    fn gradient_cube(&self, x: &[f64]) -> Vec<f64> {
        let p = PointM::new(x.to_vec());
        let phys = self.scaler().from_cube(&p).expect("cube point");
        let g = self.gradient(&phys);
        self.scaler()
            .pullback_gradient(&g, &p)
            .expect("gradient dimension")
    }

    /// Sample this model on the uniform grid.
    fn sample_grid(&self, points_per_axis: usize) -> Result<SampleSet> {
        SampleSet::uniform_grid(self.dimension(), points_per_axis, |x| {
            (self.eval_cube(x), self.gradient_cube(x))
        })
    }
}

macro_rules! plane_model {
    ($ty:ident, $name:literal, $eval:expr, $grad:expr) => {
        pub struct $ty {
            scaler: DomainScaler,
        }

        impl Default for $ty {
            fn default() -> Self {
                Self {
                    scaler: DomainScaler::identity(2),
                }
            }
        }

        impl Model for $ty {
            fn name(&self) -> &str {
                $name
            }
            fn dimension(&self) -> usize {
                2
            }
            fn scaler(&self) -> &DomainScaler {
                &self.scaler
            }
            fn variable_labels(&self) -> Vec<String> {
                vec!["x".into(), "y".into()]
            }
            fn eval(&self, p: &[f64]) -> f64 {
                let f: fn(f64, f64) -> f64 = $eval;
                f(p[0], p[1])
            }
            fn gradient(&self, p: &[f64]) -> Vec<f64> {
                let g: fn(f64, f64) -> [f64; 2] = $grad;
                g(p[0], p[1]).to_vec()
            }
        }
    };
}

plane_model!(
    F1,
    "f1",
    |x, y| (y - x * x).exp(),
    |x, y| {
        let e = (y - x * x).exp();
        [-2.0 * x * e, e]
    }
);

plane_model!(F2, "f2", |x, y| x * x + y * y, |x, y| [2.0 * x, 2.0 * y]);

plane_model!(
    F3,
    "f3",
    |x, y| x * x * x + y * y * y + 0.2 * x + 0.6 * y,
    |x, y| [3.0 * x * x + 0.2, 3.0 * y * y + 0.6]
);

/// `f(x) = |x|^2` in `m` dimensions; the timing-benchmark function.
pub struct SquaredNorm {
    dim: usize,
    scaler: DomainScaler,
}

impl SquaredNorm {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            scaler: DomainScaler::identity(dim),
        }
    }
}

impl Model for SquaredNorm {
    fn name(&self) -> &str {
        "norm2"
    }
    fn dimension(&self) -> usize {
        self.dim
    }
    fn scaler(&self) -> &DomainScaler {
        &self.scaler
    }
    fn variable_labels(&self) -> Vec<String> {
        (1..=self.dim).map(|i| format!("x{i}")).collect()
    }
    fn eval(&self, p: &[f64]) -> f64 {
        p.iter().map(|c| c * c).sum()
    }
    fn gradient(&self, p: &[f64]) -> Vec<f64> {
        p.iter().map(|c| 2.0 * c).collect()
    }
}

/// Names accepted by [`lookup`] (and the CLI `--function` flag).
pub const MODEL_NAMES: [&str; 5] = ["f1", "f2", "f3", "hartmann_u", "hartmann_B"];

/// Model registry, addressed by name.
pub fn lookup(name: &str) -> Result<Box<dyn Model>> {
    match name {
        "f1" => Ok(Box::new(F1::default())),
        "f2" => Ok(Box::new(F2::default())),
        "f3" => Ok(Box::new(F3::default())),
        "hartmann_u" => Ok(Box::new(HartmannUAvg::default())),
        "hartmann_B" => Ok(Box::new(HartmannBInd::default())),
        other => Err(Error::UnknownModel(other.to_string())),
    }
}
