//! `am` — build gradient-streamline manifolds, project points along level
//! sets, run the regression and sensitivity experiments, and benchmark the
//! manifold method against the active-subspace baseline.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use active_manifolds::builder::{
    build_manifold_with_values, ActiveManifold, TraversalConfig, ValueSource,
};
use active_manifolds::geometry::{PointM, SampleSet};
use active_manifolds::harness::{
    bench, bench_markdown, markdown_report, run_hartmann, run_regression, run_sense, DataSource,
    ExperimentConfig,
};
use active_manifolds::models::{lookup, Model, MODEL_NAMES};
use active_manifolds::projector::{project_to_manifold_with_gradients, GradientSource};
use active_manifolds::sensitivity::segments_markdown;
use active_manifolds::spline::MonotoneSpline;
use active_manifolds::subspace::fit_subspace;

#[derive(Parser)]
#[command(
    name = "am",
    about = "Active-manifold surrogate modeling and sensitivity analysis",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a manifold and export it with its spline fit
    Build(BuildArgs),
    /// Build a manifold, project points onto it, export walk traces
    Project(ProjectArgs),
    /// Seeded train/test regression comparison (manifold vs subspace)
    Regress(RegressArgs),
    /// The 5-D Hartmann study: both outputs, same grid and splits
    Hartmann(HartmannArgs),
    /// Per-variable influence curves and ranking segments along a manifold
    Sense(SenseArgs),
    /// Wall-time comparison of the two methods on |x|^2
    Bench(BenchArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Registered model: f1 | f2 | f3 | hartmann_u | hartmann_B
    #[arg(long)]
    function: Option<String>,
    /// Scattered-sample CSV (header x1,...,xm,f,g1,...,gm, cube coordinates)
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Grid points per axis for model sampling
    #[arg(long, default_value_t = 100)]
    grid: usize,
    /// Step size in cube units (default: 2/3 of the grid cell diagonal)
    #[arg(long)]
    delta: Option<f64>,
    /// Closeness tolerance in cube units (default: grid spacing)
    #[arg(long)]
    epsilon: Option<f64>,
    /// RNG seed driving splits and start points
    #[arg(long, default_value_t = 46)]
    seed: u64,
    /// Evaluate values/gradients analytically at walker positions
    /// (model sources only; CSV data always uses the nearest sample)
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    exact_values: bool,
    /// Output directory for CSV/SVG artifacts
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct BuildArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Manifold start point "x1,x2,..." (default: random grid point)
    #[arg(long)]
    seed_point: Option<String>,
    /// Rows in the exported spline sampling
    #[arg(long, default_value_t = 200)]
    spline_samples: usize,
}

#[derive(Args)]
struct ProjectArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    seed_point: Option<String>,
    /// Point to project, "x1,x2,..."; repeatable
    #[arg(long, required = true)]
    point: Vec<String>,
}

#[derive(Args)]
struct RegressArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value_t = 3)]
    splits: usize,
    /// Manifold start points per split
    #[arg(long, default_value_t = 3)]
    am_seeds: usize,
    #[arg(long, default_value_t = 0.8)]
    train_frac: f64,
    /// Fixed subspace dimension for the baseline
    #[arg(long)]
    dim_override: Option<usize>,
}

#[derive(Args)]
struct HartmannArgs {
    #[arg(long, default_value_t = 10)]
    grid: usize,
    #[arg(long, default_value_t = 0.15)]
    delta: f64,
    #[arg(long, default_value_t = 0.15)]
    epsilon: f64,
    #[arg(long, default_value_t = 3)]
    splits: usize,
    #[arg(long, default_value_t = 3)]
    am_seeds: usize,
    #[arg(long, default_value_t = 0.98)]
    train_frac: f64,
    #[arg(long)]
    dim_override: Option<usize>,
    #[arg(long, default_value_t = 46)]
    seed: u64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct SenseArgs {
    /// Registered model to analyze
    #[arg(long, default_value = "hartmann_B")]
    function: String,
    /// Grid points per axis (14 gives the reference manifold for the
    /// Hartmann outputs)
    #[arg(long, default_value_t = 14)]
    grid: usize,
    #[arg(long, default_value_t = 0.02)]
    delta: f64,
    #[arg(long, default_value_t = 0.02)]
    epsilon: f64,
    #[arg(long, default_value_t = 46)]
    seed: u64,
    /// Moving-average width for the ranking curves
    #[arg(long, default_value_t = 5)]
    window: usize,
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    exact_values: bool,
    #[arg(long)]
    seed_point: Option<String>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 46)]
    seed: u64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            let degenerate = err
                .downcast_ref::<active_manifolds::Error>()
                .is_some_and(|e| e.is_degenerate_input());
            if degenerate {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Build(args) => cmd_build(args),
        Command::Project(args) => cmd_project(args),
        Command::Regress(args) => cmd_regress(args),
        Command::Hartmann(args) => cmd_hartmann(args),
        Command::Sense(args) => cmd_sense(args),
        Command::Bench(args) => cmd_bench(args),
    }
}

/// Samples, optional model, traversal config, and a label, from the shared
/// input flags.
struct LoadedInput {
    model: Option<Box<dyn Model>>,
    samples: SampleSet,
    traversal: TraversalConfig,
    label: String,
    exact: bool,
}

fn load_input(args: &InputArgs) -> anyhow::Result<LoadedInput> {
    match (&args.function, &args.csv) {
        (Some(name), None) => {
            let model = lookup(name)?;
            let samples = model.sample_grid(args.grid)?;
            let mut traversal = TraversalConfig::for_grid(model.dimension(), args.grid);
            if let Some(d) = args.delta {
                traversal = TraversalConfig::with_steps(model.dimension(), d, traversal.epsilon);
            }
            if let Some(e) = args.epsilon {
                traversal.epsilon = e;
            }
            Ok(LoadedInput {
                label: name.clone(),
                samples,
                traversal,
                exact: args.exact_values,
                model: Some(model),
            })
        }
        (None, Some(path)) => {
            let (delta, epsilon) = match (args.delta, args.epsilon) {
                (Some(d), Some(e)) => (d, e),
                _ => bail!("--csv input requires explicit --delta and --epsilon"),
            };
            let samples =
                SampleSet::read_csv_file(path).with_context(|| format!("reading {path:?}"))?;
            let traversal = TraversalConfig::with_steps(samples.dimension(), delta, epsilon);
            Ok(LoadedInput {
                label: path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "csv".into()),
                samples,
                traversal,
                exact: false,
                model: None,
            })
        }
        _ => bail!(
            "exactly one of --function ({}) or --csv must be given",
            MODEL_NAMES.join("|")
        ),
    }
}

fn parse_point(text: &str, dim: usize) -> anyhow::Result<PointM> {
    let coords: Vec<f64> = text
        .split(',')
        .map(|c| c.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .with_context(|| format!("parsing point '{text}'"))?;
    if coords.len() != dim {
        bail!("point '{text}' has {} coordinates, expected {dim}", coords.len());
    }
    Ok(PointM::new(coords))
}

fn build_from_input(
    input: &LoadedInput,
    seed_point: &Option<String>,
    rng_seed: u64,
) -> anyhow::Result<ActiveManifold> {
    let seed = match seed_point {
        Some(text) => parse_point(text, input.samples.dimension())?,
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
            input.samples.samples()[rng.gen_range(0..input.samples.len())]
                .location
                .clone()
        }
    };
    let manifold = match (&input.model, input.exact) {
        (Some(model), true) => {
            let eval = |x: &[f64]| model.eval_cube(x);
            build_manifold_with_values(
                &input.samples,
                &seed,
                &input.traversal,
                ValueSource::Exact(&eval),
            )?
        }
        _ => build_manifold_with_values(
            &input.samples,
            &seed,
            &input.traversal,
            ValueSource::NearestSample,
        )?,
    };
    Ok(manifold)
}

fn cmd_build(args: BuildArgs) -> anyhow::Result<()> {
    let input = load_input(&args.input)?;
    let manifold = build_from_input(&input, &args.seed_point, args.input.seed)?;
    let spline = MonotoneSpline::fit(manifold.params(), manifold.values())?;

    fs::create_dir_all(&args.input.out)?;
    let manifold_path = args.input.out.join(format!("{}_manifold.csv", input.label));
    manifold.write_csv(BufWriter::new(File::create(&manifold_path)?))?;
    let spline_path = args.input.out.join(format!("{}_spline.csv", input.label));
    spline.write_samples_csv(
        BufWriter::new(File::create(&spline_path)?),
        args.spline_samples,
    )?;
    let space = fit_subspace(&input.samples, None)?;
    let eig_path = args.input.out.join(format!("{}_eigenvalues.csv", input.label));
    space.write_eigenvalues_csv(BufWriter::new(File::create(&eig_path)?))?;

    let (d_end, a_end) = manifold.termination();
    println!(
        "manifold: {} points, values [{:.6e}, {:.6e}], ends {d_end}/{a_end}",
        manifold.len(),
        manifold.values()[0],
        manifold.values()[manifold.len() - 1],
    );
    println!("wrote {}", manifold_path.display());
    println!("wrote {}", spline_path.display());
    println!("wrote {}", eig_path.display());
    Ok(())
}

fn cmd_project(args: ProjectArgs) -> anyhow::Result<()> {
    let input = load_input(&args.input)?;
    let manifold = build_from_input(&input, &args.seed_point, args.input.seed)?;
    let spline = MonotoneSpline::fit(manifold.params(), manifold.values())?;
    fs::create_dir_all(&args.input.out)?;

    for (i, text) in args.point.iter().enumerate() {
        let p = parse_point(text, input.samples.dimension())?;
        let outcome = match (&input.model, input.exact) {
            (Some(model), true) => {
                let grad = |x: &[f64]| model.gradient_cube(x);
                project_to_manifold_with_gradients(
                    &p,
                    &input.samples,
                    &manifold,
                    &spline,
                    &input.traversal,
                    GradientSource::Exact(&grad),
                )
            }
            _ => project_to_manifold_with_gradients(
                &p,
                &input.samples,
                &manifold,
                &spline,
                &input.traversal,
                GradientSource::NearestSample,
            ),
        };
        let trace_path = args
            .input
            .out
            .join(format!("{}_trace_{i}.csv", input.label));
        outcome.write_trace_csv(BufWriter::new(File::create(&trace_path)?))?;
        match (outcome.estimate, outcome.t_star) {
            (Some(est), Some(t)) => println!(
                "point {text}: {} in {} steps, t*={t:.6}, estimate {est:.9e} ({})",
                outcome.status,
                outcome.steps,
                trace_path.display()
            ),
            _ => println!(
                "point {text}: {} in {} steps, no estimate ({})",
                outcome.status,
                outcome.steps,
                trace_path.display()
            ),
        }
    }
    Ok(())
}

fn experiment_config(args: &RegressArgs) -> anyhow::Result<ExperimentConfig> {
    let source = match (&args.input.function, &args.input.csv) {
        (Some(name), None) => DataSource::Model(name.clone()),
        (None, Some(path)) => DataSource::Csv(path.clone()),
        _ => bail!("exactly one of --function or --csv must be given"),
    };
    Ok(ExperimentConfig {
        source,
        points_per_axis: args.input.grid,
        train_fraction: args.train_frac,
        n_splits: args.splits,
        n_seeds: args.am_seeds,
        delta: args.input.delta,
        epsilon: args.input.epsilon,
        dim_override: args.dim_override,
        rng_seed: args.input.seed,
        exact_values: args.input.exact_values,
        output_dir: Some(args.input.out.clone()),
    })
}

fn cmd_regress(args: RegressArgs) -> anyhow::Result<()> {
    let cfg = experiment_config(&args)?;
    let report = run_regression(&cfg)?;
    print!("{}", markdown_report(&report));
    println!("reports written to {}", args.input.out.display());
    Ok(())
}

fn cmd_hartmann(args: HartmannArgs) -> anyhow::Result<()> {
    let mut template = ExperimentConfig::hartmann_template();
    template.points_per_axis = args.grid;
    template.delta = Some(args.delta);
    template.epsilon = Some(args.epsilon);
    template.n_splits = args.splits;
    template.n_seeds = args.am_seeds;
    template.train_fraction = args.train_frac;
    template.dim_override = args.dim_override;
    template.rng_seed = args.seed;
    template.output_dir = Some(args.out.clone());
    let (report_u, report_b) = run_hartmann(&template)?;
    print!("{}", markdown_report(&report_u));
    println!();
    print!("{}", markdown_report(&report_b));
    println!("reports written to {}", args.out.display());
    Ok(())
}

fn cmd_sense(args: SenseArgs) -> anyhow::Result<()> {
    let seed_point = match &args.seed_point {
        Some(text) => Some(
            parse_point(text, lookup(&args.function)?.dimension())?
                .coords()
                .to_vec(),
        ),
        None => None,
    };
    let out = run_sense(
        &args.function,
        args.grid,
        Some(args.delta),
        Some(args.epsilon),
        args.seed,
        args.window,
        args.exact_values,
        seed_point,
    )?;

    fs::create_dir_all(&args.out)?;
    let profile_path = args.out.join(format!("{}_profile.csv", args.function));
    out.profile
        .write_csv(BufWriter::new(File::create(&profile_path)?))?;
    let signed_path = args
        .out
        .join(format!("{}_profile_signed.csv", args.function));
    out.profile
        .write_signed_csv(BufWriter::new(File::create(&signed_path)?))?;
    let svg_path = args.out.join(format!("{}_profile.svg", args.function));
    out.profile
        .write_svg(BufWriter::new(File::create(&svg_path)?))?;
    let manifold_path = args.out.join(format!("{}_manifold.csv", args.function));
    out.manifold
        .write_csv(BufWriter::new(File::create(&manifold_path)?))?;
    let segments_md = segments_markdown(&out.segments, out.profile.labels());
    let segments_path = args.out.join(format!("{}_segments.md", args.function));
    fs::write(&segments_path, &segments_md)?;

    println!(
        "manifold: {} points over values [{:.6e}, {:.6e}]",
        out.manifold.len(),
        out.manifold.values()[0],
        out.manifold.values()[out.manifold.len() - 1]
    );
    print!("{segments_md}");
    for path in [&profile_path, &signed_path, &svg_path, &manifold_path, &segments_path] {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> anyhow::Result<()> {
    let rows = bench(args.seed)?;
    print!("{}", bench_markdown(&rows));
    fs::create_dir_all(&args.out)?;
    let path = args.out.join("bench.csv");
    let mut csv = String::from(
        "m,n,test_fraction,am_build_ms,am_project_ms,as_fit_ms,as_predict_ms,ratio\n",
    );
    for r in &rows {
        csv.push_str(&format!(
            "{},{},{:.6},{:.3},{:.3},{:.3},{:.3},{:.3}\n",
            r.dim,
            r.points_per_axis,
            r.test_fraction,
            r.am_build_ms,
            r.am_project_ms,
            r.as_fit_ms,
            r.as_predict_ms,
            r.ratio()
        ));
    }
    fs::write(&path, csv)?;
    println!("wrote {}", path.display());
    Ok(())
}
