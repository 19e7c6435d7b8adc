use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;
use underfit::io;
use underfit::plot::{self, Series};
use underfit::preference::{build_preference, sample_pool};
use underfit::robustfit::{assign_exclusive, misclassification_error, sigma_sweep, FitResult};
use underfit::synth::{self, PlanarKind, PlanarParams, TwoViewParams};
use underfit::{extract_factors, fit_models, Dataset, FitConfig, ModelFamily};

mod config;

use config::RunConfig;

#[derive(Parser)]
#[command(name = "underfit", version, about = "Rank-one nonnegative underapproximation and robust multi-model fitting")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract rank-one underapproximation factors from a CSV matrix.
    Nmu {
        #[command(flatten)]
        paths: Paths,
        /// Number of factors.
        #[arg(long)]
        rank: Option<usize>,
    },
    /// Generate a labelled synthetic dataset (or the parts toy matrix).
    Synth(SynthArgs),
    /// Fit models to a dataset.
    Fit(FitArgs),
    /// Fit at several inlier scales and tabulate the results.
    Sweep {
        #[command(flatten)]
        fit: FitArgs,
        /// Comma-separated σ values.
        #[arg(long, value_delimiter = ',')]
        sigmas: Option<Vec<f64>>,
    },
    /// Dump the preference matrix and the membership CDFs of the selected models.
    Report(FitArgs),
}

#[derive(Args)]
struct Paths {
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// JSON run configuration; flags take precedence over it.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    paths: Paths,
    /// Model family; must match the dataset.
    #[arg(long, value_enum)]
    family: Option<FamilyArg>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    pool_size: Option<usize>,
    #[arg(long)]
    no_prefilter: bool,
    #[arg(long)]
    no_exclusive: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Line2d,
    Circle2d,
    Homography,
    Fundamental,
}

impl From<FamilyArg> for ModelFamily {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Line2d => ModelFamily::Line2D,
            FamilyArg::Circle2d => ModelFamily::Circle2D,
            FamilyArg::Homography => ModelFamily::Homography,
            FamilyArg::Fundamental => ModelFamily::Fundamental,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SynthKind {
    Star,
    Stairs,
    Circles,
    Homography,
    Fundamental,
    /// 100×6 binary matrix of images built from five parts.
    Parts,
}

#[derive(Args)]
struct SynthArgs {
    kind: SynthKind,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of lines, circles or planes/motions.
    #[arg(long)]
    structures: Option<usize>,
    /// Noise standard deviation (coordinate units, pixels for two-view data).
    #[arg(long)]
    noise: Option<f64>,
    /// Fraction of outliers (planar kinds).
    #[arg(long, default_value_t = 0.5)]
    outlier_ratio: f64,
    /// Total number of points (planar kinds).
    #[arg(long, default_value_t = 500)]
    total: usize,
    /// Correspondences per structure (two-view kinds).
    #[arg(long, default_value_t = 100)]
    per_structure: usize,
    /// Number of gross outliers (two-view kinds).
    #[arg(long, default_value_t = 100)]
    outliers: usize,
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("UNDERFIT_LOG", "warn")).init();
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Nmu { paths, rank } => cmd_nmu(&paths, rank),
        Command::Synth(args) => cmd_synth(&args),
        Command::Fit(args) => cmd_fit(&args),
        Command::Sweep { fit, sigmas } => cmd_sweep(&fit, sigmas),
        Command::Report(args) => cmd_report(&args),
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn cmd_nmu(paths: &Paths, rank: Option<usize>) -> Result<()> {
    let cfg = RunConfig::load(paths.config.as_deref())?;
    let input = cfg.input(paths.input.as_ref())?;
    let out = cfg.output_dir(paths.output_dir.as_ref())?;
    let rank = rank.or(cfg.rank).unwrap_or(1);
    let a = io::read_matrix(&input).with_context(|| format!("reading {}", input.display()))?;
    info!("{}x{} matrix, rank {rank}", a.rows(), a.cols());
    let factors = extract_factors(&a, rank, &cfg.nmu)?;
    let norm = a.frobenius_norm();
    io::write_factors(&out, &factors, norm)?;

    let residual = underfit::nmu::reconstruction_residual(&a, &factors);
    let negatives = residual.data().iter().filter(|&&x| x < 0.0).count();
    let curves: Vec<Vec<(f64, f64)>> = factors
        .iter()
        .map(|f| f.history.iter().enumerate().map(|(k, &h)| ((k + 1) as f64, h)).collect())
        .collect();
    let series: Vec<Series> = curves
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_empty())
        .map(|(t, c)| Series {
            label: format!("factor {}", t + 1),
            points: c,
        })
        .collect();
    write_text(
        &out.join("convergence.svg"),
        &plot::line_plot("NMU convergence", "iteration", "||R||F / ||A||F", &series),
    )?;
    write_text(
        &out.join("residuals.svg"),
        &plot::histogram("Residual entries of A - sum u v^T", "residual", residual.data(), 50),
    )?;

    println!("factors: {}", factors.iter().filter(|f| !f.is_zero()).count());
    println!("relative reconstruction error: {:e}", residual.frobenius_norm() / norm);
    println!("min residual: {:e}", residual.min());
    println!("negative residual entries: {negatives}");
    Ok(())
}

fn cmd_synth(args: &SynthArgs) -> Result<()> {
    let out = args.output_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    let planar = |kind: PlanarKind| {
        synth::planar(
            kind,
            &PlanarParams {
                structures: args.structures.unwrap_or(5),
                noise: args.noise.unwrap_or(0.0075),
                outlier_ratio: args.outlier_ratio,
                total: args.total,
                seed: args.seed,
            },
        )
    };
    let two_view = TwoViewParams {
        structures: args.structures.unwrap_or(3),
        per_structure: args.per_structure,
        outliers: args.outliers,
        noise: args.noise.unwrap_or(1.0),
        seed: args.seed,
    };
    let set: Dataset = match args.kind {
        SynthKind::Star => planar(PlanarKind::Star)?,
        SynthKind::Stairs => planar(PlanarKind::Stairs)?,
        SynthKind::Circles => planar(PlanarKind::Circles)?,
        SynthKind::Homography => synth::homography_scene(&two_view)?.0,
        SynthKind::Fundamental => synth::fundamental_scene(&two_view)?.0,
        SynthKind::Parts => {
            let (a, masks) = synth::parts_toy();
            io::write_matrix(&out.join("matrix.csv"), &a)?;
            io::write_json(&out.join("parts.json"), &masks)?;
            println!("{}", out.join("matrix.csv").display());
            return Ok(());
        }
    };
    let path = out.join("dataset.json");
    io::write_json(&path, &set)?;
    if set.family.is_planar() {
        let labels = set.labels.clone().unwrap_or_else(|| vec![0; set.len()]);
        write_text(&out.join("dataset.svg"), &plot::scatter_labels("dataset", &set.points, &labels, &[]))?;
    }
    println!("{}", path.display());
    Ok(())
}

/// Dataset and pipeline settings after applying defaults, file and flags.
struct Prepared {
    set: Dataset,
    out: PathBuf,
    fit: FitConfig,
    cfg: RunConfig,
}

fn prepare(args: &FitArgs) -> Result<Prepared> {
    let cfg = RunConfig::load(args.paths.config.as_deref())?;
    let input = cfg.input(args.paths.input.as_ref())?;
    let out = cfg.output_dir(args.paths.output_dir.as_ref())?;
    let set = io::read_dataset(&input).with_context(|| format!("reading {}", input.display()))?;
    if let Some(family) = args.family.map(ModelFamily::from) {
        if family != set.family {
            bail!("dataset holds {} data, not {family}", set.family);
        }
    }
    let mut fit = cfg.fit.clone();
    if let Some(seed) = args.seed.or(cfg.seed) {
        fit.seed = seed;
    }
    if let Some(sigma) = args.sigma {
        fit.sigma = sigma;
    }
    if args.pool_size.is_some() {
        fit.pool_size = args.pool_size;
    }
    if args.no_prefilter {
        fit.prefilter = false;
    }
    if args.no_exclusive {
        fit.exclusive_assignment = false;
    }
    fit.validate()?;
    Ok(Prepared { set, out, fit, cfg })
}

fn labels_for(result: &FitResult, set: &Dataset) -> Vec<usize> {
    result
        .assignment
        .clone()
        .unwrap_or_else(|| assign_exclusive(&result.selected, &set.points))
}

fn cmd_fit(args: &FitArgs) -> Result<()> {
    let Prepared { set, out, fit, .. } = prepare(args)?;
    info!("fitting {} {} data at sigma {}", set.len(), set.family, fit.sigma);
    let result = fit_models(&set.points, set.family, &fit)?;
    let labels = labels_for(&result, &set);
    let me = set.truth().map(|t| misclassification_error(&labels, t)).transpose()?;
    io::write_result(&out, &result, set.len(), me)?;
    if set.family.is_planar() {
        let models: Vec<_> = result.selected.iter().map(|b| b.theta_hat.clone()).collect();
        let title = format!("{} models at sigma {}", models.len(), fit.sigma);
        write_text(&out.join("fit.svg"), &plot::fit_overlay(&title, &set.points, &labels, &models))?;
    }
    println!("models: {}", result.selected.len());
    if let Some(me) = me {
        println!("misclassification: {me:.4}");
    }
    Ok(())
}

fn cmd_sweep(args: &FitArgs, sigmas: Option<Vec<f64>>) -> Result<()> {
    let Prepared { set, out, fit, cfg } = prepare(args)?;
    let sigmas = sigmas
        .or(cfg.sigmas)
        .unwrap_or_else(|| vec![0.025, 0.030, 0.035, 0.040, 0.045]);
    let rows = sigma_sweep(&set.points, set.family, &fit, &sigmas, set.truth())?;
    let fmt = |x: Option<f64>| x.map_or(String::new(), |x| format!("{x}"));
    let mut csv = String::from("sigma,models,candidates,mean_log10_p,misclassification,error\n");
    for r in &rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            r.sigma,
            r.models,
            r.candidates,
            fmt(r.mean_log10_p),
            fmt(r.misclassification),
            r.error.as_deref().unwrap_or("").replace(',', ";")
        );
    }
    write_text(&out.join("sweep.csv"), &csv)?;
    let counts: Vec<(f64, f64)> = rows.iter().map(|r| (r.sigma, r.models as f64)).collect();
    write_text(
        &out.join("sweep.svg"),
        &plot::line_plot(
            "Models found against sigma",
            "sigma",
            "models",
            &[Series {
                label: "models".into(),
                points: &counts,
            }],
        ),
    )?;
    print!("{csv}");
    Ok(())
}

fn cmd_report(args: &FitArgs) -> Result<()> {
    let Prepared { set, out, fit, .. } = prepare(args)?;
    let pool_size = fit.pool_size.unwrap_or_else(|| set.family.default_pool_size());
    let pool = sample_pool(&set.points, set.family, pool_size, fit.seed)?;
    let pref = build_preference(&set.points, &pool, fit.sigma)?;
    // Rows grouped by ground-truth label so structures show as blocks.
    let mut order: Vec<usize> = (0..set.len()).collect();
    if let Some(t) = set.truth() {
        order.sort_by_key(|&i| (t[i] == 0, t[i]));
    }
    let rows: Vec<Vec<f64>> = order.iter().map(|&i| pref.p.row(i).to_vec()).collect();
    let sorted = underfit::DenseMatrix::from_rows(&rows)?;
    io::write_matrix(&out.join("preference.csv"), &pref.p)?;
    write_text(&out.join("preference.svg"), &plot::heat_map("Preference matrix", &sorted))?;

    let result = fit_models(&set.points, set.family, &fit)?;
    let curves: Vec<Vec<(f64, f64)>> = result
        .selected
        .iter()
        .map(|b| {
            let mut s: Vec<f64> = b.memberships.iter().copied().filter(|&x| x > 0.0).collect();
            s.sort_by(f64::total_cmp);
            let n = s.len() as f64;
            s.iter().enumerate().map(|(k, &x)| (x, (k + 1) as f64 / n)).collect()
        })
        .collect();
    let uniform = [(0.0, 0.0), (1.0, 1.0)];
    let mut series = vec![Series {
        label: "uniform".into(),
        points: &uniform,
    }];
    series.extend(curves.iter().enumerate().map(|(t, c)| Series {
        label: format!("model {}", t + 1),
        points: c,
    }));
    write_text(
        &out.join("memberships.svg"),
        &plot::line_plot("Membership CDFs", "membership", "empirical CDF", &series),
    )?;
    println!("preference: {}x{}", pref.p.rows(), pref.p.cols());
    println!("models: {}", result.selected.len());
    for (t, b) in result.selected.iter().enumerate() {
        println!("model {}: d_minus {:.4} p_value {:e} support {}", t + 1, b.d_minus, b.p_value, b.support_size());
    }
    Ok(())
}
