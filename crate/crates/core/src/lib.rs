//! Active-manifold surrogate modeling on the cube `[-1,1]^m`.
//!
//! Given samples of a C1 function and its gradient, the pipeline is:
//!
//! 1. [`builder`] traces the *active manifold*, a discretized constant-speed
//!    streamline of the normalized gradient field through a seed point, with
//!    strictly increasing function values.
//! 2. [`spline`] fits a monotone C1 piecewise-cubic Hermite surrogate to the
//!    values along the manifold.
//! 3. [`projector`] estimates the function at an arbitrary point by walking
//!    its level set (orthogonally to the local gradient) until it meets the
//!    manifold, then reading the surrogate at the intersection parameter.
//!
//! [`subspace`] adds an active-subspace baseline for the same data,
//! [`sensitivity`] turns a manifold into per-variable influence curves, and
//! [`harness`] runs the seeded train/test experiments comparing the two
//! methods. [`models`] holds the analytic test functions, including the
//! Hartmann MHD closed forms; [`geometry`] the underlying point, sample-set,
//! and domain-scaling types.

pub mod builder;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod models;
pub mod projector;
pub mod sensitivity;
pub mod spline;
pub mod subspace;

mod vecops;

pub use builder::{
    arclength_parameterize, build_manifold, build_manifold_with_values, ActiveManifold,
    Termination, TraversalConfig, ValueSource,
};
pub use error::{Error, Result};
pub use geometry::{
    nearest_sample, normalize_gradient, AxisScale, DomainScaler, Layout, PointM, SamplePoint,
    SampleSet,
};
pub use projector::{
    project_to_manifold, project_to_manifold_with_gradients, segment_intersection,
    step_direction, GradientSource, ProjectionOutcome, ProjectionStatus,
};
pub use sensitivity::{profile, rank_segments, RankSegment, SensitivityProfile};
pub use spline::MonotoneSpline;
pub use subspace::{as_predict, fit_subspace, fit_subspace_with_degree, ActiveSubspace};
