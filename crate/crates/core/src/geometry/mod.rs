//! Points, sampled gradient fields, and nearest-neighbor lookup on the cube.
//!
//! Everything downstream works on the normalized cube `[-1,1]^m`. The
//! observational data is a [`SampleSet`]: locations, function values, and
//! gradients, either on a uniform grid (nearest neighbor answered by
//! coordinate rounding) or scattered (answered by an exact kd-tree). Both
//! lookups are exact: they agree with a brute-force linear scan, ties broken
//! by the lowest storage index, so identical inputs always resolve to the
//! same sample.

mod guard;
mod kdtree;
mod sample_csv;
mod scaler;

pub use scaler::{AxisScale, DomainScaler};

pub(crate) use guard::ProximityGuard;

use crate::error::{Error, Result};
use crate::vecops;
use kdtree::KdTree;

/// Norm threshold below which a gradient is treated as zero (critical point).
pub const ZERO_GRADIENT_TOL: f64 = 1e-12;

/// A point of the `m`-dimensional cube `[-1,1]^m` (dimensionless coordinates).
#[derive(Clone, Debug, PartialEq)]
pub struct PointM {
    coords: Vec<f64>,
}

impl PointM {
    pub fn new(coords: Vec<f64>) -> Self {
        assert!(!coords.is_empty(), "points must have dimension >= 1");
        Self { coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// True when every coordinate lies in `[-1, 1]`.
    pub fn in_cube(&self) -> bool {
        self.coords.iter().all(|c| c.abs() <= 1.0)
    }
}

impl std::ops::Deref for PointM {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.coords
    }
}

impl From<Vec<f64>> for PointM {
    fn from(coords: Vec<f64>) -> Self {
        Self::new(coords)
    }
}

/// Normalize a gradient to unit length.
///
/// Gradients with norm at or below [`ZERO_GRADIENT_TOL`] signal
/// [`Error::ZeroGradient`]; callers treat the point as critical.
pub fn normalize_gradient(g: &[f64]) -> Result<Vec<f64>> {
    let n = vecops::norm(g);
    if n <= ZERO_GRADIENT_TOL {
        return Err(Error::ZeroGradient {
            norm: n,
            tol: ZERO_GRADIENT_TOL,
        });
    }
    Ok(g.iter().map(|x| x / n).collect())
}

/// One observation: location, function value, gradient (cube coordinates).
#[derive(Clone, Debug)]
pub struct SamplePoint {
    pub location: PointM,
    pub value: f64,
    pub gradient: Vec<f64>,
    unit_gradient: Option<Vec<f64>>,
}

impl SamplePoint {
    pub fn new(location: PointM, value: f64, gradient: Vec<f64>) -> Result<Self> {
        if gradient.len() != location.dim() {
            return Err(Error::DimensionMismatch {
                expected: location.dim(),
                got: gradient.len(),
            });
        }
        let unit_gradient = normalize_gradient(&gradient).ok();
        Ok(Self {
            location,
            value,
            gradient,
            unit_gradient,
        })
    }

    /// The normalized gradient, or `ZeroGradient` at a critical point.
    pub fn unit_gradient(&self) -> Result<&[f64]> {
        self.unit_gradient.as_deref().ok_or(Error::ZeroGradient {
            norm: vecops::norm(&self.gradient),
            tol: ZERO_GRADIENT_TOL,
        })
    }

    pub fn is_critical(&self) -> bool {
        self.unit_gradient.is_none()
    }
}

/// How the sample locations are arranged.
#[derive(Clone, Debug, PartialEq)]
pub enum Layout {
    /// `points_per_axis^m` points at `x_k = 2k/(n-1) - 1` along every axis.
    UniformGrid { points_per_axis: usize, spacing: f64 },
    Scattered,
}

enum SpatialIndex {
    /// Per-axis rounding; exact for uniform grids.
    Grid,
    Tree(KdTree),
}

/// The observational data `{(p_i, f(p_i), grad f(p_i))}` with exact
/// nearest-neighbor queries.
pub struct SampleSet {
    dimension: usize,
    samples: Vec<SamplePoint>,
    layout: Layout,
    index: SpatialIndex,
}

impl std::fmt::Debug for SampleSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SampleSet")
            .field("dimension", &self.dimension)
            .field("len", &self.samples.len())
            .field("layout", &self.layout)
            .finish()
    }
}

impl SampleSet {
    /// Sample a function on the uniform grid with `points_per_axis` points per
    /// axis. `sample_fn` maps cube coordinates to `(value, cube gradient)`.
    ///
    /// Storage order is lexicographic in the per-axis indices, axis 0 slowest.
    pub fn uniform_grid<F>(dimension: usize, points_per_axis: usize, sample_fn: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> (f64, Vec<f64>),
    {
        if dimension == 0 {
            return Err(Error::InvalidConfig("dimension must be >= 1".into()));
        }
        if points_per_axis < 2 {
            return Err(Error::InvalidConfig(
                "uniform grid needs at least 2 points per axis".into(),
            ));
        }
        let n = points_per_axis;
        let total = n.checked_pow(dimension as u32).ok_or_else(|| {
            Error::InvalidConfig("grid size overflows usize".into())
        })?;
        let mut samples = Vec::with_capacity(total);
        let mut odo = vec![0usize; dimension];
        let mut coords = vec![0.0; dimension];
        loop {
            for (c, &k) in coords.iter_mut().zip(&odo) {
                *c = grid_coord(k, n);
            }
            let (value, gradient) = sample_fn(&coords);
            samples.push(SamplePoint::new(
                PointM::new(coords.clone()),
                value,
                gradient,
            )?);
            // odometer increment, last axis fastest
            let mut axis = dimension;
            loop {
                if axis == 0 {
                    return Ok(Self {
                        dimension,
                        samples,
                        layout: Layout::UniformGrid {
                            points_per_axis: n,
                            spacing: 2.0 / (n - 1) as f64,
                        },
                        index: SpatialIndex::Grid,
                    });
                }
                axis -= 1;
                odo[axis] += 1;
                if odo[axis] < n {
                    break;
                }
                odo[axis] = 0;
            }
        }
    }

    /// Build from scattered observations already in cube coordinates.
    pub fn scattered(samples: Vec<SamplePoint>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptySamples);
        }
        let dimension = samples[0].location.dim();
        for s in &samples {
            if s.location.dim() != dimension {
                return Err(Error::DimensionMismatch {
                    expected: dimension,
                    got: s.location.dim(),
                });
            }
            for (axis, &c) in s.location.iter().enumerate() {
                if c.abs() > 1.0 + 1e-12 {
                    return Err(Error::OutOfRange {
                        axis,
                        value: c,
                        lo: -1.0,
                        hi: 1.0,
                    });
                }
            }
        }
        let tree = KdTree::build(samples.iter().map(|s| s.location.coords()), dimension);
        Ok(Self {
            dimension,
            samples,
            layout: Layout::Scattered,
            index: SpatialIndex::Tree(tree),
        })
    }

    /// The subset at the given storage indices, as a scattered set.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let samples: Vec<SamplePoint> =
            indices.iter().map(|&i| self.samples[i].clone()).collect();
        Self::scattered(samples)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[SamplePoint] {
        &self.samples
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    /// Smallest and largest observed function value.
    pub fn value_range(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for s in &self.samples {
            lo = lo.min(s.value);
            hi = hi.max(s.value);
        }
        (lo, hi)
    }

    /// Storage index of the sample nearest to `q` (Euclidean distance, ties
    /// broken by the lowest index).
    pub fn nearest_index(&self, q: &[f64]) -> Result<usize> {
        if q.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                got: q.len(),
            });
        }
        match &self.index {
            SpatialIndex::Grid => {
                let n = match self.layout {
                    Layout::UniformGrid { points_per_axis, .. } => points_per_axis,
                    Layout::Scattered => unreachable!("grid index implies grid layout"),
                };
                let mut flat = 0usize;
                for &c in q {
                    flat = flat * n + nearest_axis_index(c, n);
                }
                Ok(flat)
            }
            SpatialIndex::Tree(tree) => Ok(tree.nearest(q)),
        }
    }

    pub fn nearest(&self, q: &[f64]) -> Result<&SamplePoint> {
        Ok(&self.samples[self.nearest_index(q)?])
    }
}

/// `k`-th grid coordinate along an axis with `n` points: `2k/(n-1) - 1`.
/// Exact at both endpoints.
pub(crate) fn grid_coord(k: usize, n: usize) -> f64 {
    (2 * k) as f64 / (n - 1) as f64 - 1.0
}

/// Index of the nearest grid coordinate along one axis. Ties resolve to the
/// lower index so the lookup agrees with a brute-force scan over storage
/// order.
fn nearest_axis_index(c: f64, n: usize) -> usize {
    let u = (c + 1.0) * (n - 1) as f64 / 2.0;
    let lo = (u.floor().max(0.0) as usize).min(n - 1);
    let hi = (lo + 1).min(n - 1);
    let d_lo = (c - grid_coord(lo, n)).abs();
    let d_hi = (c - grid_coord(hi, n)).abs();
    if d_hi < d_lo {
        hi
    } else {
        lo
    }
}

/// The sample of `set` nearest to `q`.
pub fn nearest_sample<'a>(set: &'a SampleSet, q: &PointM) -> Result<&'a SamplePoint> {
    set.nearest(q.coords())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_force(set: &SampleSet, q: &[f64]) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, s) in set.samples().iter().enumerate() {
            let d = vecops::dist2(s.location.coords(), q);
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }

    fn paraboloid(x: &[f64]) -> (f64, Vec<f64>) {
        let v = x.iter().map(|c| c * c).sum();
        (v, x.iter().map(|c| 2.0 * c).collect())
    }

    #[test]
    fn normalize_three_four_five() {
        assert_eq!(normalize_gradient(&[3.0, 4.0]).unwrap(), vec![0.6, 0.8]);
    }

    #[test]
    fn normalize_zero_is_critical() {
        assert!(matches!(
            normalize_gradient(&[0.0, 0.0]),
            Err(Error::ZeroGradient { .. })
        ));
    }

    #[test]
    fn normalize_axis_vector() {
        assert_eq!(
            normalize_gradient(&[0.0, -2.0, 0.0]).unwrap(),
            vec![0.0, -1.0, 0.0]
        );
    }

    #[test]
    fn unit_gradient_invariants() {
        let s = SamplePoint::new(PointM::new(vec![0.0, 0.0]), 1.0, vec![1.0, 2.0]).unwrap();
        let u = s.unit_gradient().unwrap();
        assert!((vecops::norm(u) - 1.0).abs() <= 1e-12);
        let cos = vecops::dot(u, &s.gradient) / vecops::norm(&s.gradient);
        assert!(cos >= 1.0 - 1e-12);
    }

    #[test]
    fn grid_nearest_by_rounding() {
        // grid {-1, 0, 1}^2
        let set = SampleSet::uniform_grid(2, 3, paraboloid).unwrap();
        let i = set.nearest_index(&[0.3, -0.2]).unwrap();
        assert_eq!(set.samples()[i].location.coords(), &[0.0, 0.0]);
    }

    #[test]
    fn nearest_at_sample_is_identity() {
        let set = SampleSet::uniform_grid(2, 5, paraboloid).unwrap();
        for (i, s) in set.samples().iter().enumerate() {
            assert_eq!(set.nearest_index(s.location.coords()).unwrap(), i);
        }
    }

    #[test]
    fn scattered_nearest_matches_brute_force() {
        let pts = vec![vec![0.0, 0.0], vec![1.0, 1.0]];
        let samples: Vec<SamplePoint> = pts
            .into_iter()
            .map(|p| {
                let (v, g) = paraboloid(&p);
                SamplePoint::new(PointM::new(p), v, g).unwrap()
            })
            .collect();
        let set = SampleSet::scattered(samples).unwrap();
        let i = set.nearest_index(&[0.4, 0.4]).unwrap();
        assert_eq!(set.samples()[i].location.coords(), &[0.0, 0.0]);
    }

    #[test]
    fn grid_nearest_equals_brute_force_on_random_queries() {
        let set = SampleSet::uniform_grid(2, 17, paraboloid).unwrap();
        let mut state = 0x2545F4914F6CDD1Du64;
        let mut next = move || {
            // splitmix-ish, plenty for test point generation
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        };
        for _ in 0..1000 {
            let q = [next(), next()];
            assert_eq!(set.nearest_index(&q).unwrap(), brute_force(&set, &q));
        }
    }

    #[test]
    fn grid_tie_breaks_to_lowest_index() {
        let set = SampleSet::uniform_grid(1, 3, paraboloid).unwrap();
        // exactly halfway between -1 and 0
        assert_eq!(set.nearest_index(&[-0.5]).unwrap(), 0);
        assert_eq!(set.nearest_index(&[0.5]).unwrap(), 1);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let set = SampleSet::uniform_grid(2, 3, paraboloid).unwrap();
        assert!(matches!(
            set.nearest_index(&[0.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    proptest! {
        #[test]
        fn kd_tree_matches_brute_force(
            pts in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 3), 1..120),
            q in prop::collection::vec(-1.0f64..1.0, 3),
        ) {
            let samples: Vec<SamplePoint> = pts
                .into_iter()
                .map(|p| SamplePoint::new(PointM::new(p), 0.0, vec![1.0, 0.0, 0.0]).unwrap())
                .collect();
            let set = SampleSet::scattered(samples).unwrap();
            prop_assert_eq!(set.nearest_index(&q).unwrap(), brute_force(&set, &q));
        }

        #[test]
        fn grid_matches_brute_force_3d(q in prop::collection::vec(-1.2f64..1.2, 3)) {
            let set = SampleSet::uniform_grid(3, 5, paraboloid).unwrap();
            prop_assert_eq!(set.nearest_index(&q).unwrap(), brute_force(&set, &q));
        }
    }
}
