//! Active-subspace baseline: the affine method the manifold walk is
//! compared against.
//!
//! The gradient outer-product matrix `C = (1/N) sum grad f grad f^T` is
//! built from the raw (un-normalized) gradients, eigendecomposed as
//! `C = W L W^T` with eigenvalues sorted descending, and the active
//! dimension `j` is chosen at the largest eigenvalue ratio (overridable).
//! A degree-4 least-squares polynomial in the `j` projected coordinates
//! `y = W_j^T p`, cross terms included, serves as the surrogate.

use std::io::Write;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::{PointM, SampleSet};

/// Floor applied to the trailing eigenvalue when scoring gaps, so a zero
/// tail still produces a finite ratio.
const EIGENVALUE_FLOOR: f64 = 1e-15;

pub struct ActiveSubspace {
    matrix: DMatrix<f64>,
    eigenvalues: Vec<f64>,
    basis: DMatrix<f64>,
    dim: usize,
    degree: usize,
    exponents: Vec<Vec<usize>>,
    coefficients: Vec<f64>,
    training_rss: f64,
}

/// Fit with the automatic eigengap rule and a degree-4 surrogate.
pub fn fit_subspace(samples: &SampleSet, dim_override: Option<usize>) -> Result<ActiveSubspace> {
    fit_subspace_with_degree(samples, dim_override, 4)
}

/// Fit with an explicit polynomial degree.
pub fn fit_subspace_with_degree(
    samples: &SampleSet,
    dim_override: Option<usize>,
    degree: usize,
) -> Result<ActiveSubspace> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let m = samples.dimension();
    let n = samples.len();

    let mut c = DMatrix::<f64>::zeros(m, m);
    for s in samples.samples() {
        let g = DVector::from_column_slice(&s.gradient);
        c.syger(1.0 / n as f64, &g, &g, 1.0);
    }
    // syger fills the lower triangle; mirror it
    for i in 0..m {
        for j in i + 1..m {
            c[(i, j)] = c[(j, i)];
        }
    }

    let eig = c.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut basis = DMatrix::<f64>::zeros(m, m);
    for (col, &i) in order.iter().enumerate() {
        basis.set_column(col, &eig.eigenvectors.column(i));
    }

    let dim = match dim_override {
        Some(j) => {
            if j == 0 || j > m {
                return Err(Error::InvalidConfig(format!(
                    "subspace dimension {j} outside 1..={m}"
                )));
            }
            j
        }
        None => auto_dimension(&eigenvalues),
    };

    let exponents = monomial_exponents(dim, degree);
    let mut design = DMatrix::<f64>::zeros(n, exponents.len());
    let mut rhs = DVector::<f64>::zeros(n);
    for (row, s) in samples.samples().iter().enumerate() {
        let y = project(&basis, dim, &s.location);
        for (col, e) in exponents.iter().enumerate() {
            design[(row, col)] = monomial(&y, e);
        }
        rhs[row] = s.value;
    }
    let svd = design.clone().svd(true, true);
    let coeffs = svd
        .solve(&rhs, 1e-12)
        .map_err(|e| Error::InvalidConfig(format!("least-squares solve failed: {e}")))?;
    let residual = (&design * &coeffs - &rhs).norm_squared();

    Ok(ActiveSubspace {
        matrix: c,
        eigenvalues,
        basis,
        dim,
        degree,
        exponents,
        coefficients: coeffs.iter().copied().collect(),
        training_rss: residual,
    })
}

/// A ratio this large counts as a decisive spectral gap on its own.
const DECISIVE_GAP: f64 = 10.0;

/// Eigengap rule standing in for manual scree-plot inspection: take the
/// earliest gap of a decade or more (a human scanning from the top stops at
/// the first cliff and never reads gaps between noise-level eigenvalues);
/// when no single gap is decisive, take the largest ratio. A pure argmax
/// is unstable on rank-deficient spectra, where the ratio into the first
/// numerically-zero eigenvalue dwarfs every structural gap.
fn auto_dimension(eigenvalues: &[f64]) -> usize {
    let m = eigenvalues.len();
    if m == 1 {
        return 1;
    }
    let ratio = |j: usize| eigenvalues[j - 1] / eigenvalues[j].max(EIGENVALUE_FLOOR);
    for j in 1..m {
        if ratio(j) >= DECISIVE_GAP {
            return j;
        }
    }
    let mut best_j = 1;
    let mut best_ratio = f64::NEG_INFINITY;
    for j in 1..m {
        if ratio(j) > best_ratio {
            best_ratio = ratio(j);
            best_j = j;
        }
    }
    best_j
}

fn project(basis: &DMatrix<f64>, dim: usize, p: &PointM) -> Vec<f64> {
    (0..dim)
        .map(|j| {
            basis
                .column(j)
                .iter()
                .zip(p.iter())
                .map(|(w, c)| w * c)
                .sum()
        })
        .collect()
}

/// All exponent tuples over `vars` variables with total degree <= `degree`,
/// in a fixed graded order.
fn monomial_exponents(vars: usize, degree: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = vec![0usize; vars];
    fn rec(out: &mut Vec<Vec<usize>>, current: &mut Vec<usize>, var: usize, left: usize) {
        if var == current.len() {
            out.push(current.clone());
            return;
        }
        for e in 0..=left {
            current[var] = e;
            rec(out, current, var + 1, left - e);
        }
        current[var] = 0;
    }
    rec(&mut out, &mut current, 0, degree);
    out
}

fn monomial(y: &[f64], exponents: &[usize]) -> f64 {
    y.iter()
        .zip(exponents)
        .map(|(v, &e)| v.powi(e as i32))
        .product()
}

impl ActiveSubspace {
    /// Predicted value at `p`: the surrogate evaluated at `W_j^T p`.
    pub fn predict(&self, p: &PointM) -> Result<f64> {
        if p.dim() != self.basis.nrows() {
            return Err(Error::DimensionMismatch {
                expected: self.basis.nrows(),
                got: p.dim(),
            });
        }
        let y = project(&self.basis, self.dim, p);
        Ok(self
            .exponents
            .iter()
            .zip(&self.coefficients)
            .map(|(e, c)| c * monomial(&y, e))
            .sum())
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Orthonormal eigenvector columns, eigenvalues descending.
    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Sum of squared residuals of the surrogate on its training data.
    pub fn training_rss(&self) -> f64 {
        self.training_rss
    }

    /// CSV export for gap plots: `index,lambda`.
    pub fn write_eigenvalues_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "index,lambda")?;
        for (i, l) in self.eigenvalues.iter().enumerate() {
            writeln!(w, "{},{:.12e}", i + 1, l)?;
        }
        Ok(())
    }
}

/// Free-function form of [`ActiveSubspace::predict`].
pub fn as_predict(space: &ActiveSubspace, p: &PointM) -> Result<f64> {
    space.predict(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::SamplePoint;
    use crate::models::{Model, F2};

    fn set_from(points: Vec<Vec<f64>>, f: impl Fn(&[f64]) -> (f64, Vec<f64>)) -> SampleSet {
        let samples = points
            .into_iter()
            .map(|p| {
                let (v, g) = f(&p);
                SamplePoint::new(PointM::new(p), v, g).unwrap()
            })
            .collect();
        SampleSet::scattered(samples).unwrap()
    }

    fn grid_points_2d(n: usize) -> Vec<Vec<f64>> {
        let mut pts = Vec::new();
        for i in 0..n {
            for j in 0..n {
                pts.push(vec![
                    2.0 * i as f64 / (n - 1) as f64 - 1.0,
                    2.0 * j as f64 / (n - 1) as f64 - 1.0,
                ]);
            }
        }
        pts
    }

    #[test]
    fn rank_one_gradients_give_a_single_direction() {
        let set = set_from(grid_points_2d(5), |p| (p[0], vec![1.0, 0.0]));
        let space = fit_subspace(&set, None).unwrap();
        assert_eq!(space.dim(), 1);
        assert!((space.eigenvalues()[0] - 1.0).abs() <= 1e-12);
        assert!(space.eigenvalues()[1].abs() <= 1e-12);
        let w0 = space.basis().column(0);
        assert!((w0[0].abs() - 1.0).abs() <= 1e-12 && w0[1].abs() <= 1e-12);
    }

    #[test]
    fn symmetric_bowl_has_no_meaningful_gap() {
        let model = F2::default();
        let set = model.sample_grid(60).unwrap();
        let space = fit_subspace(&set, None).unwrap();
        let ratio = space.eigenvalues()[0] / space.eigenvalues()[1];
        assert!(ratio <= 1.05, "ratio {ratio}");
    }

    #[test]
    fn linear_functions_are_recovered_exactly() {
        let a = [0.7, -0.3, 0.5];
        let mut pts = Vec::new();
        for i in 0..6 {
            for j in 0..6 {
                for k in 0..6 {
                    pts.push(vec![
                        2.0 * i as f64 / 5.0 - 1.0,
                        2.0 * j as f64 / 5.0 - 1.0,
                        2.0 * k as f64 / 5.0 - 1.0,
                    ]);
                }
            }
        }
        let set = set_from(pts, |p| {
            (
                a.iter().zip(p).map(|(ai, pi)| ai * pi).sum(),
                a.to_vec(),
            )
        });
        let space = fit_subspace(&set, None).unwrap();
        assert_eq!(space.dim(), 1);
        for q in [[0.3, 0.3, -0.9], [-0.5, 0.2, 0.8], [0.0, 0.0, 0.0]] {
            let truth: f64 = a.iter().zip(&q).map(|(ai, qi)| ai * qi).sum();
            let got = space.predict(&PointM::new(q.to_vec())).unwrap();
            assert!((got - truth).abs() <= 1e-8, "{got} vs {truth}");
        }
    }

    #[test]
    fn constant_function_predicts_exactly() {
        let set = set_from(grid_points_2d(6), |_| (3.5, vec![0.0, 0.0]));
        let space = fit_subspace(&set, None).unwrap();
        let got = space.predict(&PointM::new(vec![0.4, -0.2])).unwrap();
        assert!((got - 3.5).abs() <= 1e-10);
    }

    #[test]
    fn matrix_matches_brute_force_summation() {
        let mut state = 7u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            (state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        };
        let pts: Vec<Vec<f64>> = (0..100).map(|_| vec![next(), next(), next()]).collect();
        let grads: Vec<Vec<f64>> = (0..100).map(|_| vec![next(), next(), next()]).collect();
        let samples: Vec<SamplePoint> = pts
            .iter()
            .zip(&grads)
            .map(|(p, g)| SamplePoint::new(PointM::new(p.clone()), 0.0, g.clone()).unwrap())
            .collect();
        let set = SampleSet::scattered(samples).unwrap();
        let space = fit_subspace(&set, Some(1)).unwrap();
        for r in 0..3 {
            for c in 0..3 {
                let brute: f64 = grads.iter().map(|g| g[r] * g[c]).sum::<f64>() / 100.0;
                assert!((space.matrix()[(r, c)] - brute).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn eigenpairs_satisfy_cw_equals_wl() {
        let model = F2::default();
        let set = model.sample_grid(25).unwrap();
        let space = fit_subspace(&set, None).unwrap();
        let c = space.matrix();
        let w = space.basis();
        // orthonormal columns
        let wtw = w.transpose() * w;
        for i in 0..2 {
            for j in 0..2 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((wtw[(i, j)] - expect).abs() <= 1e-10);
            }
        }
        // residual of the eigen equation
        for j in 0..2 {
            let cw = c * w.column(j);
            let lw = w.column(j) * space.eigenvalues()[j];
            assert!((cw - lw).norm() <= 1e-10);
        }
        // positive semidefinite, sorted descending
        assert!(space.eigenvalues()[1] >= -1e-10);
        assert!(space.eigenvalues()[0] >= space.eigenvalues()[1]);
    }

    #[test]
    fn residual_non_increasing_in_degree() {
        let model = F2::default();
        let set = model.sample_grid(12).unwrap();
        let mut prev = f64::INFINITY;
        for degree in 1..=4 {
            let space = fit_subspace_with_degree(&set, Some(1), degree).unwrap();
            assert!(
                space.training_rss() <= prev + 1e-9,
                "degree {degree}: rss {} > {}",
                space.training_rss(),
                prev
            );
            prev = space.training_rss();
        }
    }

    #[test]
    fn rotation_invariance() {
        // rotate-then-fit equals fit-then-rotate for the predictions;
        // points live in a disk so the rotated copies stay in the cube
        let theta: f64 = 0.6;
        let (c, s) = (theta.cos(), theta.sin());
        let rot = |p: &[f64]| vec![c * p[0] - s * p[1], s * p[0] + c * p[1]];
        // f(p) = (2 p. e1)^2 + p.e2, gradient (8 p0, 1): clear eigengap
        let f = |p: &[f64]| (4.0 * p[0] * p[0] + p[1], vec![8.0 * p[0], 1.0]);
        let pts: Vec<Vec<f64>> = grid_points_2d(9)
            .into_iter()
            .map(|p| vec![0.7 * p[0], 0.7 * p[1]])
            .collect();
        let plain = fit_subspace(&set_from(pts.clone(), f), None).unwrap();
        // rotated data: positions R p, values f(p), gradients R grad f(p)
        let rotated_samples: Vec<SamplePoint> = pts
            .iter()
            .map(|p| {
                let (v, g) = f(p);
                SamplePoint::new(PointM::new(rot(p)), v, rot(&g)).unwrap()
            })
            .collect();
        let rotated = fit_subspace(&SampleSet::scattered(rotated_samples).unwrap(), None).unwrap();
        for q in [[0.25, -0.5], [0.0, 0.9], [-0.7, -0.1]] {
            let a = plain.predict(&PointM::new(q.to_vec())).unwrap();
            let b = rotated.predict(&PointM::new(rot(&q))).unwrap();
            assert!((a - b).abs() <= 1e-6, "{a} vs {b}");
        }
    }

    #[test]
    fn f1_grid_selects_one_active_direction() {
        use crate::models::F1;
        let model = F1::default();
        let set = model.sample_grid(100).unwrap();
        let space = fit_subspace(&set, None).unwrap();
        assert_eq!(space.dim(), 1);
        // matrix against explicit summation over the same gradients
        let n = set.len() as f64;
        for r in 0..2 {
            for c in 0..2 {
                let brute: f64 = set
                    .samples()
                    .iter()
                    .map(|s| s.gradient[r] * s.gradient[c])
                    .sum::<f64>()
                    / n;
                assert!((space.matrix()[(r, c)] - brute).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn auto_dimension_stops_at_the_first_decisive_gap() {
        // earliest decade gap wins over the larger cliff into noise
        assert_eq!(auto_dimension(&[40.0, 1.6, 1e-14, 1e-15]), 1);
        // no decisive gap: the largest ratio decides
        assert_eq!(auto_dimension(&[6.0, 2.0, 0.25, 0.2]), 2);
        // a rank cliff right after a modest gap
        assert_eq!(auto_dimension(&[9.0, 1.0, 1e-16]), 2);
        assert_eq!(auto_dimension(&[1.0]), 1);
    }

    #[test]
    fn empty_samples_and_bad_override_are_rejected() {
        let set = set_from(grid_points_2d(3), |p| (p[0], vec![1.0, 0.0]));
        assert!(matches!(
            fit_subspace(&set, Some(3)),
            Err(Error::InvalidConfig(_))
        ));
        assert!(matches!(
            fit_subspace(&set, Some(0)),
            Err(Error::InvalidConfig(_))
        ));
    }
}
