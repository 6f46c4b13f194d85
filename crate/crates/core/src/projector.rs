//! Level-set traversal: walk an arbitrary point along its level set until it
//! meets the active manifold, then read the surrogate there.
//!
//! Each step projects the unit vector `u` pointing at the nearest manifold
//! point onto the tangent space of the local level set,
//!
//! ```text
//! v = u - <u, g> g        (g = unit gradient at the walker)
//! ```
//!
//! so accepted steps satisfy `<v, g> = 0` to rounding: the walker moves
//! orthogonally to the gradient and the function value drifts only through
//! discretization. When `u` is nearly colinear with `g` (stepping toward
//! the manifold would mean stepping uphill), fallback directions are tried
//! in order: the previous step's momentum, the direction toward the origin,
//! then a fixed basis vector orthogonalized against `g`.
//!
//! A walk converges when it comes within `epsilon` of a manifold point; the
//! crossing is then refined by intersecting the local manifold segment with
//! the walker's level plane (the foot `s0` with `(M(s0) - p) ⊥ g`) and the
//! estimate is the spline value at the matching parameter. Walks that leave
//! the cube, loop back onto themselves, or exceed the step cap carry no
//! estimate.

use std::io::Write;

use crate::builder::{ActiveManifold, TraversalConfig};
use crate::error::{Error, Result};
use crate::geometry::{PointM, ProximityGuard, SampleSet};
use crate::spline::MonotoneSpline;
use crate::vecops;

/// `|v|` threshold below which a candidate direction counts as colinear
/// with the gradient and the fallbacks take over.
///
/// When `u` points within a few degrees of the gradient line, its tangential
/// residual is dominated by the discretization of the manifold (a manifold
/// end sits at a delta-scale offset from the true streamline terminus), and
/// steering by it makes walkers ping-pong at an arbitrary angle instead of
/// circling on. Momentum is reliable there. 0.1 routes anything within
/// ~6 degrees of colinear to the fallbacks.
pub const COLINEAR_TOL: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProjectionStatus {
    Converged,
    ExitedCube,
    SelfIntersected,
    MaxSteps,
}

impl std::fmt::Display for ProjectionStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ProjectionStatus::Converged => "converged",
            ProjectionStatus::ExitedCube => "exited_cube",
            ProjectionStatus::SelfIntersected => "self_intersected",
            ProjectionStatus::MaxSteps => "max_steps",
        };
        f.write_str(s)
    }
}

/// Result of projecting one point.
#[derive(Clone, Debug)]
pub struct ProjectionOutcome {
    pub status: ProjectionStatus,
    /// Surrogate estimate; present iff converged.
    pub estimate: Option<f64>,
    /// Manifold parameter of the intersection; present iff converged.
    pub t_star: Option<f64>,
    /// Walker positions, starting at the query point.
    pub path: Vec<PointM>,
    pub steps: usize,
    /// Largest `|<v, g>|` over accepted steps; orthogonality residual.
    pub max_step_dot: f64,
    /// Set when the segment foot was degenerate or fell outside `[0,1]`
    /// and had to be clamped.
    pub clamped_segment: bool,
}

impl ProjectionOutcome {
    /// Trace export: CSV `step,x1,...,xm,status` (final status on every row).
    pub fn write_trace_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let m = self.path[0].dim();
        write!(w, "step")?;
        for i in 1..=m {
            write!(w, ",x{i}")?;
        }
        writeln!(w, ",status")?;
        for (i, p) in self.path.iter().enumerate() {
            write!(w, "{i}")?;
            for c in p.iter() {
                write!(w, ",{c:.12e}")?;
            }
            writeln!(w, ",{}", self.status)?;
        }
        Ok(())
    }
}

/// Where the walker reads gradients.
#[derive(Clone, Copy)]
pub enum GradientSource<'a> {
    /// Unit gradient of the nearest sample (pure data regime).
    NearestSample,
    /// Re-evaluate the gradient at the walker position.
    Exact(&'a (dyn Fn(&[f64]) -> Vec<f64> + Sync)),
}

impl GradientSource<'_> {
    /// Unit gradient at `p`, or None at a critical point.
    fn unit_gradient_at(&self, p: &[f64], samples: &SampleSet) -> Result<Option<Vec<f64>>> {
        match self {
            GradientSource::NearestSample => match samples.nearest(p)?.unit_gradient() {
                Ok(u) => Ok(Some(u.to_vec())),
                Err(Error::ZeroGradient { .. }) => Ok(None),
                Err(e) => Err(e),
            },
            GradientSource::Exact(f) => {
                match crate::geometry::normalize_gradient(&f(p)) {
                    Ok(u) => Ok(Some(u)),
                    Err(Error::ZeroGradient { .. }) => Ok(None),
                    Err(e) => Err(e),
                }
            }
        }
    }
}

/// Direction of the next level-set step from `p`.
///
/// `g_p` must be a unit vector. `prev` is the previous walker position, if
/// any, used by the momentum fallback.
pub fn step_direction(
    p: &PointM,
    g_p: &[f64],
    manifold: &ActiveManifold,
    prev: Option<&PointM>,
) -> Result<Vec<f64>> {
    debug_assert!((vecops::norm(g_p) - 1.0).abs() <= 1e-9);
    let k = manifold.nearest_point_index(p);
    let m = &manifold.points()[k];

    // greedy: straight at the manifold, minus the gradient component
    if let Some(v) = tangent_toward(&vecops::sub(m, p), g_p) {
        return Ok(v);
    }
    // momentum
    if let Some(prev) = prev {
        if let Some(v) = tangent_toward(&vecops::sub(p, prev), g_p) {
            return Ok(v);
        }
    }
    // toward the origin, to stay inside the cube
    let to_origin: Vec<f64> = p.iter().map(|c| -c).collect();
    if let Some(v) = tangent_toward(&to_origin, g_p) {
        return Ok(v);
    }
    // fixed basis vector orthogonalized against g, lowest index first
    for axis in 0..p.dim() {
        let mut e = vec![0.0; p.dim()];
        e[axis] = 1.0;
        if let Some(v) = tangent_toward(&e, g_p) {
            return Ok(v);
        }
    }
    Err(Error::NoDirection)
}

/// Normalize `u`, remove its component along the unit vector `g`, and
/// normalize again; None when the residual is colinear-degenerate.
fn tangent_toward(u: &[f64], g: &[f64]) -> Option<Vec<f64>> {
    let nu = vecops::norm(u);
    if nu <= 0.0 {
        return None;
    }
    let u: Vec<f64> = u.iter().map(|c| c / nu).collect();
    let proj = vecops::dot(&u, g);
    let v = vecops::add_scaled(&u, -proj, g);
    let nv = vecops::norm(&v);
    if nv > COLINEAR_TOL {
        Some(v.iter().map(|c| c / nv).collect())
    } else {
        None
    }
}

/// Foot of the level plane through `p` on the segment from `m` to `m_plus`:
/// the `s0` with `(M(s0) - p) ⊥ g_p` where `M(s) = (m_plus - m) s + m`.
///
/// Returns `(s0, flagged)`; `flagged` marks a degenerate segment (the
/// denominator vanished, `s0 = 0` is used) or an `s0` clamped into `[0,1]`.
pub fn segment_intersection(p: &[f64], g_p: &[f64], m: &[f64], m_plus: &[f64]) -> (f64, bool) {
    let denom = vecops::dot(&vecops::sub(m_plus, m), g_p);
    if denom.abs() <= 1e-12 {
        return (0.0, true);
    }
    let s0 = vecops::dot(&vecops::sub(p, m), g_p) / denom;
    if (0.0..=1.0).contains(&s0) {
        (s0, false)
    } else {
        (s0.clamp(0.0, 1.0), true)
    }
}

/// Project `p` along its level set onto the manifold and evaluate the
/// surrogate, reading walker gradients from the nearest sample.
pub fn project_to_manifold(
    p: &PointM,
    samples: &SampleSet,
    manifold: &ActiveManifold,
    spline: &MonotoneSpline,
    cfg: &TraversalConfig,
) -> ProjectionOutcome {
    project_to_manifold_with_gradients(
        p,
        samples,
        manifold,
        spline,
        cfg,
        GradientSource::NearestSample,
    )
}

/// Project with an explicit gradient source.
pub fn project_to_manifold_with_gradients(
    p: &PointM,
    samples: &SampleSet,
    manifold: &ActiveManifold,
    spline: &MonotoneSpline,
    cfg: &TraversalConfig,
    gradients: GradientSource<'_>,
) -> ProjectionOutcome {
    let mut path = vec![p.clone()];
    let mut guard = ProximityGuard::new(p.dim(), cfg.delta * cfg.closeness_fraction);
    guard.insert(p);
    let mut current = p.clone();
    let mut prev: Option<PointM> = None;
    let mut max_dot = 0.0f64;
    let mut steps = 0;

    let finish = |status, estimate, t_star, path: Vec<PointM>, steps, max_dot, clamped| {
        ProjectionOutcome {
            status,
            estimate,
            t_star,
            path,
            steps,
            max_step_dot: max_dot,
            clamped_segment: clamped,
        }
    };

    loop {
        let k = manifold.nearest_point_index(&current);
        if vecops::dist(&current, &manifold.points()[k]) <= cfg.epsilon {
            // refine through the adjacent segment and evaluate
            let g = match gradients.unit_gradient_at(&current, samples) {
                Ok(Some(g)) => Some(g),
                _ => None,
            };
            let (t_star, clamped) = intersect_segment_param(manifold, k, &current, g.as_deref());
            let estimate = spline.eval(t_star);
            return finish(
                ProjectionStatus::Converged,
                Some(estimate),
                Some(t_star),
                path,
                steps,
                max_dot,
                clamped,
            );
        }
        if steps >= cfg.max_steps {
            return finish(ProjectionStatus::MaxSteps, None, None, path, steps, max_dot, false);
        }
        let g = match gradients.unit_gradient_at(&current, samples) {
            Ok(Some(g)) => g,
            // a critical walker position cannot define a level direction
            _ => {
                return finish(
                    ProjectionStatus::SelfIntersected,
                    None,
                    None,
                    path,
                    steps,
                    max_dot,
                    false,
                )
            }
        };
        let v = match step_direction(&current, &g, manifold, prev.as_ref()) {
            Ok(v) => v,
            Err(_) => {
                return finish(
                    ProjectionStatus::SelfIntersected,
                    None,
                    None,
                    path,
                    steps,
                    max_dot,
                    false,
                )
            }
        };
        max_dot = max_dot.max(vecops::dot(&v, &g).abs());
        let next = PointM::new(vecops::add_scaled(&current, cfg.delta, &v));
        if !next.in_cube() {
            return finish(ProjectionStatus::ExitedCube, None, None, path, steps, max_dot, false);
        }
        if guard.any_within(&next) {
            return finish(
                ProjectionStatus::SelfIntersected,
                None,
                None,
                path,
                steps,
                max_dot,
                false,
            );
        }
        guard.insert(&next);
        path.push(next.clone());
        prev = Some(std::mem::replace(&mut current, next));
        steps += 1;
    }
}

/// Map the converged walker to a manifold parameter. `k` is the nearest
/// manifold point; the segment is the one toward whichever neighbor of
/// `gamma_k` lies closer to the walker, and the foot `s0` within it maps
/// linearly onto `[a/N, (a+1)/N]`.
fn intersect_segment_param(
    manifold: &ActiveManifold,
    k: usize,
    p: &[f64],
    g: Option<&[f64]>,
) -> (f64, bool) {
    let pts = manifold.points();
    let last = pts.len() - 1;
    let a = if k == 0 {
        0
    } else if k == last {
        last - 1
    } else {
        let d_next = vecops::dist2(&pts[k + 1], p);
        let d_prev = vecops::dist2(&pts[k - 1], p);
        if d_next <= d_prev {
            k
        } else {
            k - 1
        }
    };
    let (s0, flagged) = match g {
        Some(g) => segment_intersection(p, g, &pts[a], &pts[a + 1]),
        // no usable gradient at the walker: snap to the nearest endpoint
        None => ((k - a) as f64, true),
    };
    let n = last as f64;
    ((a as f64 + s0) / n, flagged)
}
