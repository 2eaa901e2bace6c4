//! `frechet-lab`: batch driver for sphere-valued mean experiments.
//!
//! Subcommands parse structured-text configs, dispatch to the core crate,
//! and emit human tables on stdout plus machine formats (JSON/CSV, SVG
//! figures) under `--out-dir`.  Exit codes are stable:
//!
//! * `0` — success;
//! * `1` — runtime failure or a failed verification suite;
//! * `2` — command-line or input-file parse errors;
//! * `3` — infeasible smeary design;
//! * `4` — a density whose classification does not license the requested
//!   regime.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use frechet_core::clt::{compare_to_limit, CltError};
use frechet_core::designer::{design_with_scan, solve_levels, DesignError};
use frechet_core::estimation::{estimate_mean, extrinsic_mean, EmpiricalSample, EstimateOptions};
use frechet_core::sampling::RadialSampler;
use frechet_core::sphere::SpherePoint;
use frechet_lab::formats::{self, format_f64};
use frechet_lab::plots;
use frechet_lab::runner::{resolve_jobs, run_scaling_experiment_parallel};
use frechet_lab::verify::{run_suite, Suite};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

// ---------------------------------------------------------------------------
// Command-line surface.
// ---------------------------------------------------------------------------

/// Numerical laboratory for intrinsic means on unit spheres.
#[derive(Parser)]
#[command(
    name = "frechet-lab",
    version,
    about = "Numerical laboratory for intrinsic means on unit spheres",
    after_help = "Exit codes: 0 success; 1 runtime or verification failure; \
                  2 parse errors; 3 infeasible design; 4 regime mismatch."
)]
struct Cli {
    /// Base RNG seed; overrides any seed found in a config file.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for replicated experiments (default: all cores).
    #[arg(long, global = true, env = "FRECHET_LAB_JOBS")]
    jobs: Option<usize>,

    /// Directory for output files (created if missing).
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,

    /// Machine format for single-table outputs (sample, estimate-mean).
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SuiteArg {
    Tensors,
    Coefficients,
    Geometry,
    All,
}

impl From<SuiteArg> for Suite {
    fn from(arg: SuiteArg) -> Suite {
        match arg {
            SuiteArg::Tensors => Suite::Tensors,
            SuiteArg::Coefficients => Suite::Coefficients,
            SuiteArg::Geometry => Suite::Geometry,
            SuiteArg::All => Suite::All,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Report a density's pole coefficients and regime classification.
    Coefficients {
        /// Density spec file.
        density_file: PathBuf,
        /// Expected sphere dimension; rejected if the file disagrees.
        #[arg(long)]
        dimension: Option<usize>,
    },
    /// Construct a cap-plus-strip density with a vanishing second-order
    /// coefficient and a positive fourth-order one.
    DesignSmeary {
        /// Sphere dimension (at least 4).
        #[arg(long)]
        dimension: usize,
        /// Cap colatitude in (0, π/2).
        #[arg(long)]
        phi1: f64,
        /// Strip gap in (0, π/2); scanned automatically when omitted.
        #[arg(long)]
        epsilon: Option<f64>,
    },
    /// Run a replicated scaling experiment from a config file.
    Clt {
        /// Experiment config file.
        config_file: PathBuf,
    },
    /// Run built-in verification suites.
    Verify {
        /// Which suite to run.
        #[arg(long, value_enum, default_value_t = SuiteArg::All)]
        suite: SuiteArg,
    },
    /// Draw a seeded i.i.d. sample from a density, pole at the north pole.
    Sample {
        /// Density spec file.
        density_file: PathBuf,
        /// Number of points.
        #[arg(long)]
        count: usize,
    },
    /// Estimate the intrinsic mean of a sample file by gradient descent
    /// from the extrinsic mean.
    EstimateMean {
        /// Sample file written by `sample` (JSON or CSV).
        sample_file: PathBuf,
    },
}

// ---------------------------------------------------------------------------
// Error-to-exit-code plumbing.
// ---------------------------------------------------------------------------

/// A command failure carrying its exit code.
struct CmdError {
    code: u8,
    message: String,
}

impl CmdError {
    fn new(code: u8, message: impl Into<String>) -> Self {
        CmdError { code, message: message.into() }
    }
}

/// Input-file problems are parse errors (exit 2).
fn parse_err(e: impl std::fmt::Display) -> CmdError {
    CmdError::new(2, e.to_string())
}

/// Output-file problems and runtime failures (exit 1).
fn run_err(e: impl std::fmt::Display) -> CmdError {
    CmdError::new(1, e.to_string())
}

fn design_err(e: DesignError) -> CmdError {
    match e {
        DesignError::InfeasibleGeometry { .. }
        | DesignError::NoFeasibleEpsilon { .. }
        | DesignError::ArcsinDomain { .. } => CmdError::new(3, format!("infeasible design: {e}")),
        DesignError::BadParameters(_) => parse_err(e),
        DesignError::Density(_) => run_err(e),
    }
}

fn clt_err(e: CltError) -> CmdError {
    match e {
        CltError::RegimeMismatch { .. } => CmdError::new(4, e.to_string()),
        other => run_err(other),
    }
}

fn print_table(rows: &[(&str, String)]) {
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    for (key, value) in rows {
        println!("{key:<width$}  {value}");
    }
}

fn write_json_doc(path: &Path, value: &serde_json::Value) -> Result<(), CmdError> {
    let mut text = serde_json::to_string_pretty(value).expect("static JSON");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| run_err(format!("{}: {e}", path.display())))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn dispatch(cli: &Cli) -> Result<ExitCode, CmdError> {
    std::fs::create_dir_all(&cli.out_dir)
        .map_err(|e| run_err(format!("{}: {e}", cli.out_dir.display())))?;
    match &cli.command {
        Command::Coefficients { density_file, dimension } => {
            cmd_coefficients(cli, density_file, *dimension)
        }
        Command::DesignSmeary { dimension, phi1, epsilon } => {
            cmd_design_smeary(cli, *dimension, *phi1, *epsilon)
        }
        Command::Clt { config_file } => cmd_clt(cli, config_file),
        Command::Verify { suite } => cmd_verify(cli, (*suite).into()),
        Command::Sample { density_file, count } => cmd_sample(cli, density_file, *count),
        Command::EstimateMean { sample_file } => cmd_estimate_mean(cli, sample_file),
    }
}

// ---------------------------------------------------------------------------
// Subcommands.
// ---------------------------------------------------------------------------

fn cmd_coefficients(
    cli: &Cli,
    density_file: &Path,
    dimension: Option<usize>,
) -> Result<ExitCode, CmdError> {
    let density = formats::read_density_file(density_file).map_err(parse_err)?;
    if let Some(d) = dimension {
        if d != density.dimension() {
            return Err(parse_err(format!(
                "dimension mismatch: --dimension {d} but {} describes a density on S^{}",
                density_file.display(),
                density.dimension()
            )));
        }
    }
    let report = density.classify(density.default_tolerance()).map_err(run_err)?;

    print_table(&[
        ("dimension", density.dimension().to_string()),
        ("alpha", format_f64(report.alpha)),
        ("beta", report.beta.map_or_else(|| "undefined below dimension 4".into(), format_f64)),
        (
            "fourth-directional",
            report
                .fourth_directional
                .map_or_else(|| "divergent integral".into(), format_f64),
        ),
        ("diff-order", report.diff_order.to_string()),
        ("classification", formats::classification_name(report.classification).to_string()),
    ]);

    let out = cli.out_dir.join("coefficients.json");
    write_json_doc(&out, &formats::report_to_json(density.dimension(), &report))?;
    println!("\nwrote {}", out.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_design_smeary(
    cli: &Cli,
    dimension: usize,
    phi1: f64,
    epsilon: Option<f64>,
) -> Result<ExitCode, CmdError> {
    if dimension < 4 {
        return Err(CmdError::new(
            3,
            format!(
                "infeasible design: below dimension 4 the fourth directional \
                 derivative is negative whenever the second-order coefficient \
                 vanishes, so no cap-plus-strip design on S^{dimension} works"
            ),
        ));
    }
    let design = match epsilon {
        Some(eps) => {
            let design = solve_levels(phi1, eps, dimension).map_err(design_err)?;
            if !design.is_smeary() {
                return Err(CmdError::new(
                    3,
                    format!(
                        "infeasible design: gap {eps} balances the second-order \
                         coefficient but leaves the fourth at {} ≤ 0; omit --epsilon \
                         to scan for a feasible gap",
                        format_f64(design.beta_check)
                    ),
                ));
            }
            design
        }
        None => design_with_scan(phi1, dimension).map_err(design_err)?,
    };
    let density = design.to_density().map_err(run_err)?;

    let density_path = cli.out_dir.join(format!("cap-strip-d{dimension}.json"));
    let report_path = cli.out_dir.join(format!("cap-strip-d{dimension}-report.json"));
    formats::write_density_file(&density_path, &density).map_err(run_err)?;
    write_json_doc(&report_path, &formats::design_to_json(&design))?;

    print_table(&[
        ("dimension", design.dimension.to_string()),
        ("phi1", format_f64(design.phi1)),
        ("epsilon", format_f64(design.epsilon)),
        ("cap level c1", format_f64(design.c1)),
        ("strip level c2", format_f64(design.c2)),
        ("ratio c1/c2", format_f64(design.ratio)),
        ("ratio (printed form)", format_f64(design.ratio_printed)),
        ("alpha check", format_f64(design.alpha_check)),
        ("beta check", format_f64(design.beta_check)),
        ("gap halvings", design.halvings.to_string()),
    ]);
    println!("\nwrote {}", density_path.display());
    println!("wrote {}", report_path.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_clt(cli: &Cli, config_file: &Path) -> Result<ExitCode, CmdError> {
    let mut cfg = formats::read_clt_config(config_file).map_err(parse_err)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let jobs = resolve_jobs(cli.jobs);

    let result = run_scaling_experiment_parallel(&cfg, jobs).map_err(clt_err)?;
    let comparison = compare_to_limit(&result, &cfg).map_err(clt_err)?;

    let json_path = cli.out_dir.join("experiment.json");
    let csv_path = cli.out_dir.join("replicates.csv");
    let scaling_path = cli.out_dir.join("scaling.svg");
    let scatter_path = cli.out_dir.join("rescaled-scatter.svg");
    formats::write_experiment_json(&json_path, &result, Some(&comparison)).map_err(run_err)?;
    formats::write_replicates_csv(&csv_path, &result).map_err(run_err)?;
    plots::scaling_plot(&result, &scaling_path).map_err(run_err)?;
    plots::rescaled_scatter_plot(&result, &scatter_path).map_err(run_err)?;

    println!("per-size mean geodesic distances:");
    for s in &result.fit.per_n {
        println!("  n = {:>8}  mean {:.6e}  se {:.2e}", s.n, s.mean_norm, s.standard_error);
    }
    println!();
    let mut rows = vec![
        ("fitted slope", format!("{:.5} ± {:.5}", result.fit.slope, result.fit.stderr)),
        (
            "reference slope",
            format!("{:.5}", result.regime.rate_exponent()),
        ),
        ("sizes dropped as pre-asymptotic", result.fit.dropped_smallest.to_string()),
        ("non-converged replicates", result.nonconverged.to_string()),
        ("experiment valid", result.valid.to_string()),
        ("limit comparison at n", comparison.n.to_string()),
        ("energy distance to rescaled limit", format!("{:.4}", comparison.energy)),
    ];
    for (i, ks) in comparison.per_coordinate.iter().enumerate() {
        rows.push((
            "per-coordinate KS",
            format!("coordinate {i}: statistic {:.4}, p = {:.4}", ks.statistic, ks.p_value),
        ));
    }
    let rows: Vec<(&str, String)> = rows;
    print_table(&rows);
    if let Some(note) = comparison.finite_n_disclaimer {
        println!("\nnote: {note}");
    }
    println!();
    for path in [&json_path, &csv_path, &scaling_path, &scatter_path] {
        println!("wrote {}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(cli: &Cli, suite: Suite) -> Result<ExitCode, CmdError> {
    let seed = cli.seed.unwrap_or(0);
    let checks = run_suite(suite, seed);
    for c in &checks {
        println!("{}  {} — {}", if c.passed { "ok  " } else { "FAIL" }, c.name, c.detail);
    }
    let out = cli.out_dir.join("verify.json");
    write_json_doc(&out, &formats::verify_summary_to_json(suite.name(), &checks))?;
    let passed = checks.iter().all(|c| c.passed);
    println!(
        "\n{}: {}/{} checks passed; wrote {}",
        suite.name(),
        checks.iter().filter(|c| c.passed).count(),
        checks.len(),
        out.display()
    );
    Ok(if passed { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn cmd_sample(cli: &Cli, density_file: &Path, count: usize) -> Result<ExitCode, CmdError> {
    let density = formats::read_density_file(density_file).map_err(parse_err)?;
    let pole = SpherePoint::north_pole(density.dimension());
    let sampler = RadialSampler::new(&density, &pole).map_err(parse_err)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cli.seed.unwrap_or(0));
    let coords = sampler.sample_flat(&mut rng, count);
    let sample = EmpiricalSample::from_coords(density.dimension() + 1, coords)
        .expect("sampler output is unit-norm");

    let out = match cli.format {
        OutputFormat::Json => {
            let path = cli.out_dir.join("sample.json");
            formats::write_sample_json(&path, &sample).map_err(run_err)?;
            path
        }
        OutputFormat::Csv => {
            let path = cli.out_dir.join("sample.csv");
            formats::write_sample_csv(&path, &sample).map_err(run_err)?;
            path
        }
    };
    println!(
        "wrote {count} points from a dimension-{} density to {}",
        density.dimension(),
        out.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_estimate_mean(cli: &Cli, sample_file: &Path) -> Result<ExitCode, CmdError> {
    let sample = formats::read_sample_file(sample_file).map_err(parse_err)?;
    let init = extrinsic_mean(&sample).map_err(run_err)?;
    let estimate = estimate_mean(&sample, &init, &EstimateOptions::default()).map_err(run_err)?;

    let coords: Vec<String> = estimate.point.coords().iter().map(|x| format_f64(*x)).collect();
    print_table(&[
        ("sample size", sample.len().to_string()),
        ("estimated mean", coords.join(", ")),
        ("empirical value", format_f64(estimate.value)),
        ("gradient norm", format_f64(estimate.grad_norm)),
        ("iterations", estimate.iterations.to_string()),
        ("converged", estimate.converged.to_string()),
    ]);

    let out = match cli.format {
        OutputFormat::Json => {
            let path = cli.out_dir.join("mean.json");
            write_json_doc(&path, &formats::mean_to_json(&estimate))?;
            path
        }
        OutputFormat::Csv => {
            let path = cli.out_dir.join("mean.csv");
            formats::write_mean_csv(&path, &estimate).map_err(run_err)?;
            path
        }
    };
    println!("\nwrote {}", out.display());
    Ok(ExitCode::SUCCESS)
}
