//! Tracing the active manifold: a discretized constant-speed streamline of
//! the normalized gradient field.
//!
//! From a seed point, the walk repeatedly looks up the nearest sample and
//! steps `delta` along its unit gradient (ascent) or against it (descent).
//! A direction ends when the next step would exit the cube, would land
//! within `delta * closeness_fraction` of any previously accepted manifold
//! point, the nearest sample is critical, or the step cap is hit. The
//! descent path is reversed and joined to the seed and ascent path, giving
//! ordered points with strictly increasing function values, parameterized
//! at `t_i = i/N`.
//!
//! Function values along the walk come from the nearest sample by default
//! (data-only regime) or from a caller-supplied evaluator
//! ([`ValueSource::Exact`]) when the underlying function is available. A
//! step whose value fails to increase strictly (decrease, for descent) ends
//! the direction rather than entering the list: the recorded values are
//! monotone by construction.

use std::io::Write;

use crate::error::{Error, Result};
use crate::geometry::{PointM, ProximityGuard, SampleSet};
use crate::vecops;

/// Walk parameters, in cube units.
#[derive(Clone, Copy, Debug)]
pub struct TraversalConfig {
    /// Step size.
    pub delta: f64,
    /// Convergence tolerance of the level-set walk; defaults to the grid
    /// spacing.
    pub epsilon: f64,
    /// Fraction of `delta` used as the loop-closeness guard.
    pub closeness_fraction: f64,
    /// Per-direction step cap.
    pub max_steps: usize,
}

impl TraversalConfig {
    /// Defaults for a uniform grid: `delta = (2/3) * spacing * sqrt(m)`
    /// (two thirds of the longest cell diagonal), `epsilon = spacing`.
    pub fn for_grid(dimension: usize, points_per_axis: usize) -> Self {
        let spacing = 2.0 / (points_per_axis - 1) as f64;
        let delta = 2.0 / 3.0 * spacing * (dimension as f64).sqrt();
        Self::with_steps(dimension, delta, spacing)
    }

    /// Explicit step size and tolerance; the step cap covers ten cube
    /// diameters so a stuck walk cannot run forever.
    pub fn with_steps(dimension: usize, delta: f64, epsilon: f64) -> Self {
        let diameter = 2.0 * (dimension as f64).sqrt();
        Self {
            delta,
            epsilon,
            closeness_fraction: 1.0 / 3.0,
            max_steps: (10.0 * diameter / delta).ceil() as usize,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.delta) || !positive(self.epsilon) {
            return Err(Error::InvalidConfig(
                "delta and epsilon must be positive".into(),
            ));
        }
        if !(self.closeness_fraction > 0.0 && self.closeness_fraction < 1.0) {
            return Err(Error::InvalidConfig(
                "closeness_fraction must lie in (0, 1)".into(),
            ));
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidConfig("max_steps must be >= 1".into()));
        }
        Ok(())
    }
}

/// Why a walk direction stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    ExitedCube,
    LoopDetected,
    CriticalPoint,
    MaxSteps,
}

impl std::fmt::Display for Termination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Termination::ExitedCube => "exited_cube",
            Termination::LoopDetected => "loop_detected",
            Termination::CriticalPoint => "critical_point",
            Termination::MaxSteps => "max_steps",
        };
        f.write_str(s)
    }
}

/// Where the walk reads function values.
#[derive(Clone, Copy)]
pub enum ValueSource<'a> {
    /// Value of the nearest sample (pure data regime).
    NearestSample,
    /// Re-evaluate the function at the walker position.
    Exact(&'a (dyn Fn(&[f64]) -> f64 + Sync)),
}

impl ValueSource<'_> {
    fn value_at(&self, p: &[f64], samples: &SampleSet) -> Result<f64> {
        match self {
            ValueSource::NearestSample => Ok(samples.nearest(p)?.value),
            ValueSource::Exact(f) => Ok(f(p)),
        }
    }
}

/// The discretized streamline: ordered points, strictly increasing values,
/// and the constant-speed parameterization `t_i = i/N`.
#[derive(Clone, Debug)]
pub struct ActiveManifold {
    points: Vec<PointM>,
    values: Vec<f64>,
    params: Vec<f64>,
    seed_index: usize,
    termination: (Termination, Termination),
}

impl ActiveManifold {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[PointM] {
        &self.points
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    /// Position of the original seed in the ordered lists.
    pub fn seed_index(&self) -> usize {
        self.seed_index
    }

    /// Stop reasons for the (descent, ascent) ends.
    pub fn termination(&self) -> (Termination, Termination) {
        self.termination
    }

    /// Index of the manifold point nearest to `q`; ties break low.
    pub fn nearest_point_index(&self, q: &[f64]) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, p) in self.points.iter().enumerate() {
            let d = vecops::dist2(p.coords(), q);
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }

    /// Smallest gap between consecutive values (positive by construction).
    pub fn min_value_gap(&self) -> f64 {
        self.values
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }

    /// CSV export: `t,x1,...,xm,f`, one row per point.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let m = self.points[0].dim();
        write!(w, "t")?;
        for i in 1..=m {
            write!(w, ",x{i}")?;
        }
        writeln!(w, ",f")?;
        for i in 0..self.len() {
            write!(w, "{:.12e}", self.params[i])?;
            for c in self.points[i].iter() {
                write!(w, ",{c:.12e}")?;
            }
            writeln!(w, ",{:.12e}", self.values[i])?;
        }
        Ok(())
    }
}

/// Attach the constant-speed parameterization `t_i = i/N` to ordered points
/// with strictly increasing values.
pub fn arclength_parameterize(
    points: Vec<PointM>,
    values: Vec<f64>,
    seed_index: usize,
    termination: (Termination, Termination),
) -> Result<ActiveManifold> {
    if points.len() != values.len() {
        return Err(Error::LengthMismatch {
            knots: points.len(),
            values: values.len(),
        });
    }
    if points.len() < 2 {
        return Err(Error::DegenerateManifold);
    }
    for (i, w) in values.windows(2).enumerate() {
        // NaN-safe strict comparison: anything but Greater is a violation
        if w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater) {
            return Err(Error::NonMonotoneValues { index: i + 1 });
        }
    }
    let n = (points.len() - 1) as f64;
    let params = (0..points.len()).map(|i| i as f64 / n).collect();
    Ok(ActiveManifold {
        points,
        values,
        params,
        seed_index,
        termination,
    })
}

/// Trace the manifold through `seed`, reading values from the nearest sample.
pub fn build_manifold(
    samples: &SampleSet,
    seed: &PointM,
    cfg: &TraversalConfig,
) -> Result<ActiveManifold> {
    build_manifold_with_values(samples, seed, cfg, ValueSource::NearestSample)
}

/// Trace the manifold through `seed` with an explicit value source.
pub fn build_manifold_with_values(
    samples: &SampleSet,
    seed: &PointM,
    cfg: &TraversalConfig,
    values: ValueSource<'_>,
) -> Result<ActiveManifold> {
    cfg.validate()?;
    if seed.dim() != samples.dimension() {
        return Err(Error::DimensionMismatch {
            expected: samples.dimension(),
            got: seed.dim(),
        });
    }
    if !seed.in_cube() {
        return Err(Error::SeedOutsideCube);
    }
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }

    let seed_value = values.value_at(seed, samples)?;
    let mut guard = ProximityGuard::new(seed.dim(), cfg.delta * cfg.closeness_fraction);
    guard.insert(seed);

    let (ascent, ascent_values, ascent_end) =
        walk_direction(samples, seed, seed_value, 1.0, cfg, values, &mut guard)?;
    let (descent, descent_values, descent_end) =
        walk_direction(samples, seed, seed_value, -1.0, cfg, values, &mut guard)?;

    let mut points: Vec<PointM> = descent.into_iter().rev().collect();
    let mut vals: Vec<f64> = descent_values.into_iter().rev().collect();
    let seed_index = points.len();
    points.push(seed.clone());
    vals.push(seed_value);
    points.extend(ascent);
    vals.extend(ascent_values);

    arclength_parameterize(points, vals, seed_index, (descent_end, ascent_end))
}

/// One direction of the walk. `sign` is +1 for ascent, -1 for descent.
#[allow(clippy::type_complexity)]
fn walk_direction(
    samples: &SampleSet,
    seed: &PointM,
    seed_value: f64,
    sign: f64,
    cfg: &TraversalConfig,
    values: ValueSource<'_>,
    guard: &mut ProximityGuard,
) -> Result<(Vec<PointM>, Vec<f64>, Termination)> {
    let mut points = Vec::new();
    let mut vals = Vec::new();
    let mut current = seed.clone();
    let mut current_value = seed_value;

    let reason = loop {
        if points.len() >= cfg.max_steps {
            break Termination::MaxSteps;
        }
        let sample = samples.nearest(&current)?;
        let unit = match sample.unit_gradient() {
            Ok(u) => u,
            Err(Error::ZeroGradient { .. }) => break Termination::CriticalPoint,
            Err(e) => return Err(e),
        };
        let next = PointM::new(vecops::add_scaled(&current, sign * cfg.delta, unit));
        debug_assert!({
            let step = vecops::sub(&next, &current);
            let cos = sign * vecops::dot(&step, unit) / vecops::norm(&step);
            cos >= 0.999
        });
        if !next.in_cube() {
            break Termination::ExitedCube;
        }
        if guard.any_within(&next) {
            break Termination::LoopDetected;
        }
        let next_value = values.value_at(&next, samples)?;
        // Strict monotonicity is the contract; a violating step is
        // discretization noise and ends the direction.
        if sign * (next_value - current_value) <= 0.0 {
            break Termination::LoopDetected;
        }
        guard.insert(&next);
        points.push(next.clone());
        vals.push(next_value);
        current = next;
        current_value = next_value;
    };
    Ok((points, vals, reason))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{Model, F1, F2, F3};

    fn build_exact(
        model: &dyn Model,
        grid: usize,
        seed: &[f64],
    ) -> Result<ActiveManifold> {
        let samples = model.sample_grid(grid).unwrap();
        let cfg = TraversalConfig::for_grid(model.dimension(), grid);
        let eval = |x: &[f64]| model.eval_cube(x);
        build_manifold_with_values(&samples, &PointM::new(seed.to_vec()), &cfg, ValueSource::Exact(&eval))
    }

    #[test]
    fn f1_manifold_follows_the_y_axis() {
        let m = build_exact(&F1::default(), 100, &[0.0, 0.0]).unwrap();
        let cfg = TraversalConfig::for_grid(2, 100);
        let max_dev = m
            .points()
            .iter()
            .map(|p| p[0].abs())
            .fold(0.0f64, f64::max);
        assert!(max_dev <= 2.0 * cfg.delta, "x deviation {max_dev}");
        // spans most of y in both directions
        assert!(m.points()[0][1] < -0.9);
        assert!(m.points()[m.len() - 1][1] > 0.9);
        assert_eq!(m.termination(), (Termination::ExitedCube, Termination::ExitedCube));
    }

    #[test]
    fn f3_walks_monotonically_toward_the_upper_boundary() {
        // Both partials of f3 are strictly positive, so every ascent step
        // increases both coordinates until the walk leaves through the top
        // or right edge (the (1,1) side); descent mirrors this toward the
        // (-1,-1) side.
        for seed in [[-0.2, 0.1], [0.4, 0.4], [0.6, -0.3]] {
            let m = build_exact(&F3::default(), 100, &seed).unwrap();
            let cfg = TraversalConfig::for_grid(2, 100);
            let last = &m.points()[m.len() - 1];
            let first = &m.points()[0];
            assert!(last[0] > seed[0] && last[1] > seed[1], "ascent end {last:?}");
            assert!(
                last[0] > 1.0 - 2.0 * cfg.delta || last[1] > 1.0 - 2.0 * cfg.delta,
                "ascent should stop at the upper boundary, got {last:?}"
            );
            assert!(first[0] < seed[0] && first[1] < seed[1], "descent end {first:?}");
            assert!(
                first[0] < -1.0 + 2.0 * cfg.delta || first[1] < -1.0 + 2.0 * cfg.delta,
                "descent should stop at the lower boundary, got {first:?}"
            );
            assert_eq!(
                m.termination(),
                (Termination::ExitedCube, Termination::ExitedCube)
            );
            for w in m.points().windows(2) {
                assert!(w[1][0] > w[0][0] && w[1][1] > w[0][1]);
            }
        }
    }

    #[test]
    fn f2_seed_at_the_critical_point_is_degenerate() {
        // (0,0) is not a grid node on an even grid; use an odd grid so the
        // nearest sample is exactly the critical point.
        let model = F2::default();
        let samples = model.sample_grid(101).unwrap();
        let cfg = TraversalConfig::for_grid(2, 101);
        let err = build_manifold(&samples, &PointM::new(vec![0.0, 0.0]), &cfg).unwrap_err();
        assert!(matches!(err, Error::DegenerateManifold));
    }

    #[test]
    fn values_strictly_increase_and_spacing_is_constant() {
        for seed in [[-0.3, 0.4], [0.5, 0.5], [0.1, -0.7]] {
            let m = build_exact(&F3::default(), 60, &seed).unwrap();
            for w in m.values().windows(2) {
                assert!(w[1] > w[0]);
            }
            let cfg = TraversalConfig::for_grid(2, 60);
            for w in m.points().windows(2) {
                let d = vecops::dist(&w[0], &w[1]);
                assert!((d - cfg.delta).abs() <= 1e-9, "spacing {d}");
            }
            assert!(m.points().iter().all(|p| p.in_cube()));
        }
    }

    #[test]
    fn params_are_exactly_i_over_n() {
        let m = build_exact(&F1::default(), 50, &[0.2, 0.0]).unwrap();
        let n = (m.len() - 1) as f64;
        for (i, &t) in m.params().iter().enumerate() {
            assert_eq!(t, i as f64 / n);
        }
        assert_eq!(m.params()[0], 0.0);
        assert_eq!(m.params()[m.len() - 1], 1.0);
    }

    #[test]
    fn deterministic_rebuild() {
        let a = build_exact(&F3::default(), 80, &[0.33, -0.21]).unwrap();
        let b = build_exact(&F3::default(), 80, &[0.33, -0.21]).unwrap();
        assert_eq!(a.points(), b.points());
        assert_eq!(a.values(), b.values());
        assert_eq!(a.seed_index(), b.seed_index());
    }

    #[test]
    fn seed_outside_cube_is_rejected() {
        let model = F1::default();
        let samples = model.sample_grid(10).unwrap();
        let cfg = TraversalConfig::for_grid(2, 10);
        assert!(matches!(
            build_manifold(&samples, &PointM::new(vec![1.5, 0.0]), &cfg),
            Err(Error::SeedOutsideCube)
        ));
    }

    #[test]
    fn parameterize_examples() {
        let pts = |n: usize| {
            (0..n)
                .map(|i| PointM::new(vec![i as f64, 0.0]))
                .collect::<Vec<_>>()
        };
        let term = (Termination::MaxSteps, Termination::MaxSteps);
        let m = arclength_parameterize(pts(3), vec![0.0, 1.0, 2.0], 0, term).unwrap();
        assert_eq!(m.params(), &[0.0, 0.5, 1.0]);

        let m = arclength_parameterize(pts(2), vec![0.0, 1.0], 0, term).unwrap();
        assert_eq!(m.params(), &[0.0, 1.0]);

        assert!(matches!(
            arclength_parameterize(pts(3), vec![0.0, 1.0, 0.5], 0, term),
            Err(Error::NonMonotoneValues { index: 2 })
        ));
    }

    #[test]
    fn nearest_sample_values_walk_on_a_coarse_grid() {
        // With delta larger than the spacing, nearest-sample values advance
        // every step and the data-only walk makes progress.
        let model = F3::default();
        let samples = model.sample_grid(30).unwrap();
        let spacing = 2.0 / 29.0;
        let cfg = TraversalConfig::with_steps(2, 1.5 * spacing, spacing);
        let m = build_manifold(&samples, &PointM::new(vec![0.0, 0.0]), &cfg).unwrap();
        assert!(m.len() >= 10, "walk too short: {}", m.len());
        for w in m.values().windows(2) {
            assert!(w[1] > w[0]);
        }
    }
}
