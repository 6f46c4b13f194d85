//! Experiment harness: seeded train/test regression protocols comparing the
//! manifold surrogate against the active-subspace baseline, the Hartmann
//! study, sensitivity runs, and a timing benchmark.
//!
//! One named generator (seeded, default 46) drives everything random:
//! split shuffles and manifold start points, consumed in a fixed order.
//! Test-point projections run on a parallel worker pool over shared
//! read-only state, collected in input order, so reports are byte-identical
//! across reruns with the same seed. Wall-times are reported separately
//! from the deterministic metrics for the same reason.
//!
//! Scoring: the manifold method is scored on the test points whose
//! projection converged (coverage `n/N` reports how many), the baseline on
//! all of them; both views appear in the report. The l1 metric is the mean
//! absolute error, the l2 metric the mean squared error.

mod report;

pub use report::{markdown_report, write_report, ReportFiles};

use std::path::PathBuf;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::builder::{build_manifold_with_values, ActiveManifold, TraversalConfig, ValueSource};
use crate::error::{Error, Result};
use crate::geometry::{PointM, SampleSet};
use crate::models::{lookup, Model, SquaredNorm};
use crate::projector::{
    project_to_manifold_with_gradients, GradientSource, ProjectionOutcome, ProjectionStatus,
};
use crate::sensitivity::{profile_with_gradients, rank_segments, RankSegment, SensitivityProfile};
use crate::spline::MonotoneSpline;
use crate::subspace::{fit_subspace, ActiveSubspace};

/// Where the observations come from.
#[derive(Clone, Debug)]
pub enum DataSource {
    /// A registered analytic model, sampled on a uniform grid.
    Model(String),
    /// Scattered cube-coordinate samples from a CSV file.
    Csv(PathBuf),
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub source: DataSource,
    /// Grid resolution for model sources.
    pub points_per_axis: usize,
    pub train_fraction: f64,
    pub n_splits: usize,
    /// Manifold start points per split.
    pub n_seeds: usize,
    /// Step-size override; defaults to two thirds of the grid diagonal.
    pub delta: Option<f64>,
    /// Tolerance override; defaults to the grid spacing.
    pub epsilon: Option<f64>,
    /// Fixed active-subspace dimension; the eigengap rule decides otherwise.
    pub dim_override: Option<usize>,
    pub rng_seed: u64,
    /// Re-evaluate values and gradients analytically at walker positions.
    /// Only meaningful for model sources; CSV data always uses the nearest
    /// sample. See the README for the trade-off.
    pub exact_values: bool,
    /// When set, CSV reports are written here.
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Regression-protocol defaults for a registered model: 100x100 grid,
    /// 80/20 splits, three splits x three start points, seed 46.
    pub fn for_model(name: &str) -> Self {
        Self {
            source: DataSource::Model(name.to_string()),
            points_per_axis: 100,
            train_fraction: 0.8,
            n_splits: 3,
            n_seeds: 3,
            delta: None,
            epsilon: None,
            dim_override: None,
            rng_seed: 46,
            exact_values: true,
            output_dir: None,
        }
    }

    /// Hartmann-study defaults: 10 points per axis in 5-D (1e5 samples),
    /// step size 0.15, 98/2 splits.
    pub fn hartmann_template() -> Self {
        Self {
            source: DataSource::Model("hartmann_u".to_string()),
            points_per_axis: 10,
            train_fraction: 0.98,
            delta: Some(0.15),
            epsilon: Some(0.15),
            ..Self::for_model("hartmann_u")
        }
    }

    pub fn label(&self) -> String {
        match &self.source {
            DataSource::Model(name) => name.clone(),
            DataSource::Csv(path) => path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "csv".to_string()),
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::InvalidConfig(
                "train_fraction must lie in (0, 1)".into(),
            ));
        }
        if self.n_splits == 0 || self.n_seeds == 0 {
            return Err(Error::InvalidConfig(
                "n_splits and n_seeds must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// Aggregate error statistics for one method.
#[derive(Clone, Copy, Debug)]
pub struct MethodStats {
    pub l1_mean: f64,
    pub l1_std: f64,
    pub l2_mean: f64,
    pub l2_std: f64,
    /// Fraction of test points scored; 1.0 for the baseline.
    pub coverage_mean: f64,
}

/// Metrics of a single (split, start point) run.
#[derive(Clone, Debug)]
pub struct RunRecord {
    pub split: usize,
    pub am_seed: usize,
    /// Training index the manifold was started from.
    pub seed_point_index: usize,
    /// Degenerate-seed retries before the manifold built.
    pub retries: usize,
    pub manifold_len: usize,
    /// Smallest gap between consecutive manifold values (> 0).
    pub min_value_gap: f64,
    /// Largest orthogonality residual |<v, g>| over all projections.
    pub max_step_dot: f64,
    pub converged: usize,
    pub exited_cube: usize,
    pub self_intersected: usize,
    pub max_steps: usize,
    pub coverage: f64,
    pub am_l1: f64,
    pub am_l2: f64,
    pub as_l1: f64,
    pub as_l2: f64,
    pub am_build_ms: f64,
    pub am_project_ms: f64,
    pub as_fit_ms: f64,
    pub as_predict_ms: f64,
}

/// Everything a regression experiment produces.
#[derive(Clone, Debug)]
pub struct ErrorReport {
    pub label: String,
    pub test_size: usize,
    pub runs: Vec<RunRecord>,
    pub am: MethodStats,
    pub as_baseline: MethodStats,
    /// Eigenvalues of the first split's baseline fit, for gap plots.
    pub eigenvalues: Vec<f64>,
}

struct ResolvedInput {
    model: Option<Box<dyn Model>>,
    base: SampleSet,
    traversal: TraversalConfig,
    exact: bool,
}

fn resolve_input(cfg: &ExperimentConfig) -> Result<ResolvedInput> {
    match &cfg.source {
        DataSource::Model(name) => {
            let model = lookup(name)?;
            let base = model.sample_grid(cfg.points_per_axis)?;
            let mut traversal =
                TraversalConfig::for_grid(model.dimension(), cfg.points_per_axis);
            apply_overrides(&mut traversal, model.dimension(), cfg);
            Ok(ResolvedInput {
                model: Some(model),
                base,
                traversal,
                exact: cfg.exact_values,
            })
        }
        DataSource::Csv(path) => {
            let (delta, epsilon) = match (cfg.delta, cfg.epsilon) {
                (Some(d), Some(e)) => (d, e),
                _ => {
                    return Err(Error::InvalidConfig(
                        "csv input requires explicit --delta and --epsilon".into(),
                    ))
                }
            };
            let base = SampleSet::read_csv_file(path)?;
            let traversal = TraversalConfig::with_steps(base.dimension(), delta, epsilon);
            Ok(ResolvedInput {
                model: None,
                base,
                traversal,
                exact: false,
            })
        }
    }
}

fn apply_overrides(traversal: &mut TraversalConfig, dimension: usize, cfg: &ExperimentConfig) {
    if let Some(d) = cfg.delta {
        *traversal = TraversalConfig::with_steps(dimension, d, traversal.epsilon);
    }
    if let Some(e) = cfg.epsilon {
        traversal.epsilon = e;
    }
}

/// The seeded regression protocol: `n_splits` random train/test partitions,
/// `n_seeds` manifold start points each, baseline fitted once per split on
/// the identical training data (with raw gradients).
pub fn run_regression(cfg: &ExperimentConfig) -> Result<ErrorReport> {
    cfg.validate()?;
    let input = resolve_input(cfg)?;
    let base = &input.base;
    let n = base.len();
    if n < 4 {
        return Err(Error::EmptySamples);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let mut runs = Vec::with_capacity(cfg.n_splits * cfg.n_seeds);
    let mut eigenvalues = Vec::new();
    let mut test_size = 0;

    for split in 0..cfg.n_splits {
        let mut indices: Vec<usize> = (0..n).collect();
        indices.shuffle(&mut rng);
        let train_count = ((n as f64) * cfg.train_fraction).round() as usize;
        let train_count = train_count.clamp(1, n - 1);
        let (train_idx, test_idx) = indices.split_at(train_count);
        test_size = test_idx.len();

        let train = base.subset(train_idx)?;

        let t0 = Instant::now();
        let space = fit_subspace(&train, cfg.dim_override)?;
        let as_fit_ms = ms_since(t0);
        if split == 0 {
            eigenvalues = space.eigenvalues().to_vec();
        }

        let t0 = Instant::now();
        let (as_l1, as_l2) = baseline_errors(&space, base, test_idx)?;
        let as_predict_ms = ms_since(t0);

        for am_seed in 0..cfg.n_seeds {
            let run = run_one_manifold(
                &mut rng,
                &input,
                &train,
                base,
                test_idx,
                RunContext {
                    split,
                    am_seed,
                    as_l1,
                    as_l2,
                    as_fit_ms,
                    as_predict_ms,
                },
            )?;
            runs.push(run);
        }
    }

    let report = ErrorReport {
        label: cfg.label(),
        test_size,
        am: aggregate(&runs, |r| (r.am_l1, r.am_l2), Some(|r: &RunRecord| r.coverage)),
        as_baseline: aggregate(&runs, |r| (r.as_l1, r.as_l2), None::<fn(&RunRecord) -> f64>),
        eigenvalues,
        runs,
    };

    for run in &report.runs {
        assert_eq!(
            run.converged + run.exited_cube + run.self_intersected + run.max_steps,
            report.test_size,
            "projection statuses must partition the test set"
        );
        if run.am_l1.is_finite() {
            assert!(
                run.am_l2 >= run.am_l1 * run.am_l1 - 1e-12,
                "mean square below squared mean"
            );
        }
        assert!(run.as_l2 >= run.as_l1 * run.as_l1 - 1e-12);
    }

    if let Some(dir) = &cfg.output_dir {
        write_report(&report, dir)?;
    }
    Ok(report)
}

struct RunContext {
    split: usize,
    am_seed: usize,
    as_l1: f64,
    as_l2: f64,
    as_fit_ms: f64,
    as_predict_ms: f64,
}

/// Minimum fraction of the training data's value range a manifold must
/// attain before its start point counts as good. A streamline seeded next
/// to the cube boundary can exit in both directions after a handful of
/// steps; such a manifold only ever estimates a thin band of levels, so its
/// seed is redrawn like a degenerate one (bootstrapping away problematic
/// starting configurations, within the same retry budget). The best
/// manifold found is kept when every draw falls short.
const MIN_SEED_RANGE_FRACTION: f64 = 0.7;

fn run_one_manifold(
    rng: &mut ChaCha8Rng,
    input: &ResolvedInput,
    train: &SampleSet,
    base: &SampleSet,
    test_idx: &[usize],
    ctx: RunContext,
) -> Result<RunRecord> {
    let model = input.model.as_deref();
    let eval = model.map(|m| move |x: &[f64]| m.eval_cube(x));
    let grad = model.map(|m| move |x: &[f64]| m.gradient_cube(x));

    let (train_lo, train_hi) = train.value_range();
    let range = (train_hi - train_lo).max(f64::MIN_POSITIVE);

    let mut retries = 0;
    let mut best: Option<(f64, ActiveManifold, usize)> = None;
    let t0 = Instant::now();
    let (manifold, seed_point_index) = loop {
        let pick = rng.gen_range(0..train.len());
        let seed = train.samples()[pick].location.clone();
        let source = match (&eval, input.exact) {
            (Some(f), true) => ValueSource::Exact(f),
            _ => ValueSource::NearestSample,
        };
        match build_manifold_with_values(train, &seed, &input.traversal, source) {
            Ok(m) => {
                let attained = (m.values()[m.len() - 1] - m.values()[0]) / range;
                if attained >= MIN_SEED_RANGE_FRACTION {
                    break (m, pick);
                }
                if best.as_ref().is_none_or(|(a, _, _)| attained > *a) {
                    best = Some((attained, m, pick));
                }
                if retries >= 5 {
                    let (_, m, pick) = best.take().expect("at least one manifold built");
                    break (m, pick);
                }
                retries += 1;
                eprintln!(
                    "manifold from training point {pick} attains {:.0}% of the value range; \
                     redrawing seed ({retries}/5)",
                    100.0 * attained
                );
            }
            Err(Error::DegenerateManifold) if retries < 5 => {
                retries += 1;
                eprintln!(
                    "degenerate manifold from training point {pick}; retry {retries}/5"
                );
            }
            Err(Error::DegenerateManifold) => match best.take() {
                Some((_, m, pick)) => break (m, pick),
                None => return Err(Error::DegenerateManifold),
            },
            Err(e) => return Err(e),
        }
    };
    let am_build_ms = ms_since(t0);

    let spline = MonotoneSpline::fit(manifold.params(), manifold.values())?;

    let t0 = Instant::now();
    let outcomes: Vec<ProjectionOutcome> = test_idx
        .par_iter()
        .map(|&ti| {
            let p = &base.samples()[ti].location;
            let gradients = match (&grad, input.exact) {
                (Some(g), true) => GradientSource::Exact(g),
                _ => GradientSource::NearestSample,
            };
            project_to_manifold_with_gradients(
                p,
                train,
                &manifold,
                &spline,
                &input.traversal,
                gradients,
            )
        })
        .collect();
    let am_project_ms = ms_since(t0);

    let mut counts = [0usize; 4];
    let mut abs_sum = 0.0;
    let mut sq_sum = 0.0;
    let mut max_dot = 0.0f64;
    for (outcome, &ti) in outcomes.iter().zip(test_idx) {
        max_dot = max_dot.max(outcome.max_step_dot);
        match outcome.status {
            ProjectionStatus::Converged => {
                counts[0] += 1;
                let err = outcome.estimate.expect("converged") - base.samples()[ti].value;
                abs_sum += err.abs();
                sq_sum += err * err;
            }
            ProjectionStatus::ExitedCube => counts[1] += 1,
            ProjectionStatus::SelfIntersected => counts[2] += 1,
            ProjectionStatus::MaxSteps => counts[3] += 1,
        }
    }
    let converged = counts[0];
    let (am_l1, am_l2) = if converged > 0 {
        (abs_sum / converged as f64, sq_sum / converged as f64)
    } else {
        (f64::NAN, f64::NAN)
    };

    Ok(RunRecord {
        split: ctx.split,
        am_seed: ctx.am_seed,
        seed_point_index,
        retries,
        manifold_len: manifold.len(),
        min_value_gap: manifold.min_value_gap(),
        max_step_dot: max_dot,
        converged,
        exited_cube: counts[1],
        self_intersected: counts[2],
        max_steps: counts[3],
        coverage: converged as f64 / test_idx.len() as f64,
        am_l1,
        am_l2,
        as_l1: ctx.as_l1,
        as_l2: ctx.as_l2,
        am_build_ms,
        am_project_ms,
        as_fit_ms: ctx.as_fit_ms,
        as_predict_ms: ctx.as_predict_ms,
    })
}

fn baseline_errors(
    space: &ActiveSubspace,
    base: &SampleSet,
    test_idx: &[usize],
) -> Result<(f64, f64)> {
    let mut abs_sum = 0.0;
    let mut sq_sum = 0.0;
    for &ti in test_idx {
        let s = &base.samples()[ti];
        let err = space.predict(&s.location)? - s.value;
        abs_sum += err.abs();
        sq_sum += err * err;
    }
    let n = test_idx.len() as f64;
    Ok((abs_sum / n, sq_sum / n))
}

fn aggregate(
    runs: &[RunRecord],
    metric: impl Fn(&RunRecord) -> (f64, f64),
    coverage: Option<impl Fn(&RunRecord) -> f64>,
) -> MethodStats {
    let l1: Vec<f64> = runs.iter().map(|r| metric(r).0).collect();
    let l2: Vec<f64> = runs.iter().map(|r| metric(r).1).collect();
    let cov = match coverage {
        Some(f) => mean(&runs.iter().map(f).collect::<Vec<_>>()),
        None => 1.0,
    };
    MethodStats {
        l1_mean: mean(&l1),
        l1_std: sample_std(&l1),
        l2_mean: mean(&l2),
        l2_std: sample_std(&l2),
        coverage_mean: cov,
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation across runs (ddof 1); zero for a single run.
fn sample_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

fn ms_since(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// The Hartmann study: both outputs on the same grid, splits, and seeds.
pub fn run_hartmann(template: &ExperimentConfig) -> Result<(ErrorReport, ErrorReport)> {
    let mut cfg_u = template.clone();
    cfg_u.source = DataSource::Model("hartmann_u".to_string());
    let mut cfg_b = template.clone();
    cfg_b.source = DataSource::Model("hartmann_B".to_string());
    Ok((run_regression(&cfg_u)?, run_regression(&cfg_b)?))
}

/// A sensitivity run: manifold from a random grid point, influence curves,
/// ranking segments.
pub struct SenseOutput {
    pub manifold: ActiveManifold,
    pub profile: SensitivityProfile,
    pub segments: Vec<RankSegment>,
}

#[allow(clippy::too_many_arguments)]
pub fn run_sense(
    model_name: &str,
    points_per_axis: usize,
    delta: Option<f64>,
    epsilon: Option<f64>,
    rng_seed: u64,
    window: usize,
    exact_values: bool,
    seed_point: Option<Vec<f64>>,
) -> Result<SenseOutput> {
    let model = lookup(model_name)?;
    let samples = model.sample_grid(points_per_axis)?;
    let mut traversal = TraversalConfig::for_grid(model.dimension(), points_per_axis);
    if let Some(d) = delta {
        traversal = TraversalConfig::with_steps(model.dimension(), d, traversal.epsilon);
    }
    if let Some(e) = epsilon {
        traversal.epsilon = e;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let eval = |x: &[f64]| model.eval_cube(x);
    let grad = |x: &[f64]| model.gradient_cube(x);
    let source = if exact_values {
        ValueSource::Exact(&eval)
    } else {
        ValueSource::NearestSample
    };

    let mut last_err = Error::DegenerateManifold;
    let mut manifold = None;
    for _ in 0..6 {
        let seed = match &seed_point {
            Some(p) => PointM::new(p.clone()),
            None => samples.samples()[rng.gen_range(0..samples.len())]
                .location
                .clone(),
        };
        match build_manifold_with_values(&samples, &seed, &traversal, source) {
            Ok(m) => {
                manifold = Some(m);
                break;
            }
            Err(e @ Error::DegenerateManifold) if seed_point.is_none() => last_err = e,
            Err(e) => return Err(e),
        }
    }
    let manifold = match manifold {
        Some(m) => m,
        None => return Err(last_err),
    };

    let gradients = if exact_values {
        GradientSource::Exact(&grad)
    } else {
        GradientSource::NearestSample
    };
    let profile =
        profile_with_gradients(&manifold, &samples, gradients, model.variable_labels())?;
    let segments = rank_segments(&profile, window);
    Ok(SenseOutput {
        manifold,
        profile,
        segments,
    })
}

/// One timing row of the benchmark.
#[derive(Clone, Debug)]
pub struct BenchRow {
    pub dim: usize,
    pub points_per_axis: usize,
    pub test_fraction: f64,
    pub am_build_ms: f64,
    pub am_project_ms: f64,
    pub as_fit_ms: f64,
    pub as_predict_ms: f64,
}

impl BenchRow {
    pub fn am_ms(&self) -> f64 {
        self.am_build_ms + self.am_project_ms
    }

    pub fn as_ms(&self) -> f64 {
        self.as_fit_ms + self.as_predict_ms
    }

    /// Manifold time over baseline time; the contract is the direction of
    /// this ratio, not absolute times.
    pub fn ratio(&self) -> f64 {
        self.am_ms() / self.as_ms()
    }
}

/// Time manifold build+project against baseline fit+predict on `|x|^2`.
/// Projections run sequentially so the two methods are timed alike.
pub fn bench_case(
    dim: usize,
    points_per_axis: usize,
    test_fraction: f64,
    rng_seed: u64,
) -> Result<BenchRow> {
    let model = SquaredNorm::new(dim);
    let base = model.sample_grid(points_per_axis)?;
    let traversal = TraversalConfig::for_grid(dim, points_per_axis);
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);

    let n = base.len();
    let mut indices: Vec<usize> = (0..n).collect();
    indices.shuffle(&mut rng);
    let test_count = ((n as f64) * test_fraction).round() as usize;
    let test_count = test_count.min(n - 2);
    let (test_idx, train_idx) = indices.split_at(test_count);
    let train = base.subset(train_idx)?;

    let eval = |x: &[f64]| model.eval_cube(x);
    let t0 = Instant::now();
    let manifold = {
        let mut retries = 0;
        loop {
            let pick = rng.gen_range(0..train.len());
            let seed = train.samples()[pick].location.clone();
            match build_manifold_with_values(&train, &seed, &traversal, ValueSource::Exact(&eval))
            {
                Ok(m) => break m,
                Err(Error::DegenerateManifold) if retries < 5 => retries += 1,
                Err(e) => return Err(e),
            }
        }
    };
    let spline = MonotoneSpline::fit(manifold.params(), manifold.values())?;
    let am_build_ms = ms_since(t0);

    let t0 = Instant::now();
    for &ti in test_idx {
        let p = &base.samples()[ti].location;
        let _ = project_to_manifold_with_gradients(
            p,
            &train,
            &manifold,
            &spline,
            &traversal,
            GradientSource::NearestSample,
        );
    }
    let am_project_ms = if test_idx.is_empty() {
        0.0
    } else {
        ms_since(t0)
    };

    let t0 = Instant::now();
    let space = fit_subspace(&train, None)?;
    let as_fit_ms = ms_since(t0);
    let t0 = Instant::now();
    for &ti in test_idx {
        let _ = space.predict(&base.samples()[ti].location)?;
    }
    let as_predict_ms = if test_idx.is_empty() {
        0.0
    } else {
        ms_since(t0)
    };

    Ok(BenchRow {
        dim,
        points_per_axis,
        test_fraction,
        am_build_ms,
        am_project_ms,
        as_fit_ms,
        as_predict_ms,
    })
}

/// The standard benchmark grid: m in {2,3}, n in {15,30}, test fractions
/// {1/6, 1/3}.
pub fn bench(rng_seed: u64) -> Result<Vec<BenchRow>> {
    let mut rows = Vec::new();
    for dim in [2, 3] {
        for n in [15, 30] {
            for frac in [1.0 / 6.0, 1.0 / 3.0] {
                rows.push(bench_case(dim, n, frac, rng_seed)?);
            }
        }
    }
    Ok(rows)
}

/// Markdown table of benchmark rows.
pub fn bench_markdown(rows: &[BenchRow]) -> String {
    let mut out =
        String::from("| m | n | test fraction | AM time (ms) | AS time (ms) | AM/AS |\n");
    out.push_str("|---|---|---|---|---|---|\n");
    for r in rows {
        out.push_str(&format!(
            "| {} | {} | {:.3} | {:.1} | {:.1} | {:.1} |\n",
            r.dim,
            r.points_per_axis,
            r.test_fraction,
            r.am_ms(),
            r.as_ms(),
            r.ratio()
        ));
    }
    out
}
