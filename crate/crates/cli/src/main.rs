use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

use telecp::analytic::{
    closed_form_optimum, repeat_fidelity, repeat_first_principles, unitary_optimum,
};
use telecp::channels::{choi_from_affine, export_affine};
use telecp::fidelity::mc_average_fidelity;
use telecp::linalg::eig_hermitian;
use telecp::optimizer::{
    optimize_scenario_with_oracle, optimize_unitary_scenario, OptimizationReport, OracleConfig,
};
use telecp::scenario::Scenario;

use telecp_cli::config::FileConfig;
use telecp_cli::sweep::{csv_from_rows, run_sweep, SweepConfig, CSV_HEADER};
use telecp_cli::verify::{run_all_criteria, VerifyConfig};

/// Optimal receiver-side corrections for qubit teleportation protocols.
#[derive(Parser)]
#[command(name = "telecp", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep the measurement angle and write one CSV row per grid point
    Sweep(SweepArgs),
    /// Optimize a single configuration and print full diagnostics
    Optimize(OptimizeArgs),
    /// Run the built-in verification suite
    Verify(VerifyArgs),
}

#[derive(Args, Default)]
struct CommonArgs {
    /// Plain key=value config file; command-line flags override its values
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Convergence tolerance of the fixed-point iteration
    #[arg(long)]
    tol: Option<f64>,
    /// Iteration budget per outcome
    #[arg(long)]
    max_iter: Option<usize>,
    /// Relaxation factor in (0, 1]
    #[arg(long)]
    mixing: Option<f64>,
    /// Monte-Carlo samples per fidelity estimate
    #[arg(long)]
    mc_samples: Option<usize>,
    /// Seed for Monte-Carlo sampling and the extremal-channel search
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: available parallelism)
    #[arg(long)]
    jobs: Option<usize>,
    /// Random restarts of the extremal-channel search
    #[arg(long)]
    oracle_restarts: Option<usize>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Lower end of the angle grid, radians
    #[arg(long)]
    theta_min: Option<f64>,
    /// Upper end of the angle grid, radians
    #[arg(long)]
    theta_max: Option<f64>,
    /// Number of grid points (at least 2)
    #[arg(long)]
    steps: Option<usize>,
    /// Output CSV path
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OptimizeArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Measurement angle, radians, in [0, pi/2]
    #[arg(long, conflicts_with_all = ["cos_theta", "scenario_file"])]
    theta: Option<f64>,
    /// Measurement angle given as its cosine in [0, 1]
    #[arg(long, conflicts_with = "scenario_file")]
    cos_theta: Option<f64>,
    /// Optimize a scenario loaded from the plain-text import format instead
    #[arg(long)]
    scenario_file: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: CommonArgs,
}

struct Settings {
    sweep: SweepConfig,
    jobs: Option<usize>,
}

fn resolve_common(common: &CommonArgs) -> Result<Settings> {
    let file = match &common.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let defaults = SweepConfig::default();
    let sweep = SweepConfig {
        theta_min: file.get_f64("theta-min")?.unwrap_or(defaults.theta_min),
        theta_max: file.get_f64("theta-max")?.unwrap_or(defaults.theta_max),
        steps: file.get_usize("steps")?.unwrap_or(defaults.steps),
        mixing: common
            .mixing
            .or(file.get_f64("mixing")?)
            .unwrap_or(defaults.mixing),
        tolerance: common
            .tol
            .or(file.get_f64("tol")?)
            .unwrap_or(defaults.tolerance),
        max_iterations: common
            .max_iter
            .or(file.get_usize("max-iter")?)
            .unwrap_or(defaults.max_iterations),
        mc_samples: common
            .mc_samples
            .or(file.get_usize("mc-samples")?)
            .unwrap_or(defaults.mc_samples),
        seed: common
            .seed
            .or(file.get_u64("seed")?)
            .unwrap_or(defaults.seed),
        oracle_restarts: common
            .oracle_restarts
            .or(file.get_usize("oracle-restarts")?)
            .unwrap_or(defaults.oracle_restarts),
    };
    let jobs = common.jobs.or(file.get_usize("jobs")?);
    Ok(Settings { sweep, jobs })
}

fn with_pool<T: Send>(jobs: Option<usize>, task: impl FnOnce() -> T + Send) -> Result<T> {
    match jobs {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .context("building worker pool")?;
            Ok(pool.install(task))
        }
        None => Ok(task()),
    }
}

fn main() {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Sweep(args) => run_sweep_command(args),
        Command::Optimize(args) => run_optimize_command(args),
        Command::Verify(args) => run_verify_command(args),
    };
    match code {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(1);
        }
    }
}

fn run_sweep_command(args: SweepArgs) -> Result<i32> {
    let mut settings = resolve_common(&args.common)?;
    if let Some(v) = args.theta_min {
        settings.sweep.theta_min = v;
    }
    if let Some(v) = args.theta_max {
        settings.sweep.theta_max = v;
    }
    if let Some(v) = args.steps {
        settings.sweep.steps = v;
    }
    let file = match &args.common.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let out = args
        .out
        .or_else(|| file.get_string("out").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("sweep.csv"));

    let cfg = settings.sweep.clone();
    let rows = with_pool(settings.jobs, move || run_sweep(&cfg))??;
    let csv = csv_from_rows(&rows);
    std::fs::write(&out, csv.as_bytes()).with_context(|| format!("writing {}", out.display()))?;
    println!("wrote {} rows to {}", rows.len(), out.display());
    Ok(0)
}

fn format_complex(z: num_complex::Complex<f64>) -> String {
    format!("{:+.10}{:+.10}i", z.re, z.im)
}

fn print_report(scenario: &Scenario, report: &OptimizationReport) {
    for (k, label) in scenario.labels().iter().enumerate() {
        let x = &report.per_outcome_x[k];
        let t = x.t_matrix();
        let tv = x.t_vector();
        println!("outcome {label}:");
        println!(
            "  converged: {} after {} iterations, residual {:.3e}{}",
            report.converged[k],
            report.iterations[k],
            report.final_residual[k],
            if report.substituted[k] {
                " (replaced by extremal-search result)"
            } else {
                ""
            }
        );
        for i in 0..3 {
            println!(
                "  T[{i}] = [{:+.10} {:+.10} {:+.10}]",
                t[(i, 0)],
                t[(i, 1)],
                t[(i, 2)]
            );
        }
        println!("  t    = [{:+.10} {:+.10} {:+.10}]", tv[0], tv[1], tv[2]);
        println!("  record: {}", export_affine(&x.to_affine()));
        for (n, a) in report.per_outcome_channel[k].operators().iter().enumerate() {
            println!(
                "  kraus[{n}] = [{} {}; {} {}]",
                format_complex(a.entry(0, 0)),
                format_complex(a.entry(0, 1)),
                format_complex(a.entry(1, 0)),
                format_complex(a.entry(1, 1))
            );
        }
        let choi = choi_from_affine(&x.to_affine());
        let (spectrum, _) = eig_hermitian(&choi).expect("Choi matrix is Hermitian");
        println!(
            "  choi spectrum: [{:.3e} {:.3e} {:.3e} {:.3e}]",
            spectrum[0], spectrum[1], spectrum[2], spectrum[3]
        );
        println!(
            "  min choi eigenvalue {:.3e}, tp residual {:.3e}",
            report.cp_diagnostic[k].min_choi_eigenvalue, report.cp_diagnostic[k].tp_residual
        );
    }
}

fn run_optimize_command(args: OptimizeArgs) -> Result<i32> {
    let settings = resolve_common(&args.common)?;
    let cfg = settings.sweep.clone();

    enum Mode {
        Family(f64),
        Custom(PathBuf),
    }
    let mode = if let Some(path) = args.scenario_file {
        Mode::Custom(path)
    } else if let Some(c) = args.cos_theta {
        if !(0.0..=1.0).contains(&c) {
            bail!("--cos-theta must lie in [0, 1]");
        }
        Mode::Family(c.acos())
    } else if let Some(theta) = args.theta {
        Mode::Family(theta)
    } else {
        bail!("give one of --theta, --cos-theta or --scenario-file");
    };

    let scenario = match &mode {
        Mode::Family(theta) => Scenario::family(*theta)?,
        Mode::Custom(path) => {
            Scenario::from_file(path).with_context(|| format!("loading {}", path.display()))?
        }
    };

    let exit = with_pool(settings.jobs, move || -> Result<i32> {
        let oracle = OracleConfig {
            restarts: cfg.oracle_restarts,
            seed: cfg.seed ^ 0xA11CE,
        };
        let report = optimize_scenario_with_oracle(&scenario, &cfg.iteration_config(), &oracle)?;
        let (_, unitary_numeric) = optimize_unitary_scenario(&scenario)?;
        let mc = mc_average_fidelity(
            &scenario,
            &report.per_outcome_channel,
            cfg.mc_samples,
            cfg.seed ^ 0xB0B,
        )?;
        let repeat_fp = repeat_first_principles(&scenario)?;

        print_report(&scenario, &report);
        println!("fidelities:");
        println!("  best                   {:.12}", report.fidelity);
        println!("  iterative              {:.12}", report.iterative_fidelity);
        println!("  extremal search        {:.12}", report.oracle_fidelity);
        println!("  unitary (numeric)      {unitary_numeric:.12}");
        println!("  repeat protocol        {repeat_fp:.12}");
        println!(
            "  monte-carlo            {:.12} +- {:.2e} ({} samples)",
            mc.value,
            mc.mc_std_error.unwrap_or(0.0),
            cfg.mc_samples
        );

        match mode {
            Mode::Family(theta) => {
                let closed = closed_form_optimum(theta)?;
                let unitary_closed = unitary_optimum(theta)?;
                println!("  closed form            {closed:.12}");
                println!("  unitary (closed form)  {unitary_closed:.12}");
                let u_matched = (std::f64::consts::TAU - theta).rem_euclid(std::f64::consts::TAU);
                let eq24 = repeat_fidelity(u_matched, theta)?;
                let max_residual = report.final_residual.iter().copied().fold(0.0, f64::max);
                let min_choi = report
                    .cp_diagnostic
                    .iter()
                    .map(|d| d.min_choi_eigenvalue)
                    .fold(f64::INFINITY, f64::min);
                let iterations_max = report.iterations.iter().copied().max().unwrap_or(0);
                println!("machine row:");
                println!("{CSV_HEADER}");
                let fields = [
                    format!("{:.16e}", theta),
                    format!("{:.16e}", theta.cos()),
                    format!("{:.16e}", report.iterative_fidelity),
                    format!("{:.16e}", report.oracle_fidelity),
                    format!("{:.16e}", closed),
                    format!("{:.16e}", unitary_numeric),
                    format!("{:.16e}", unitary_closed),
                    format!("{:.16e}", eq24),
                    format!("{:.16e}", repeat_fp),
                    format!("{:.16e}", mc.value),
                    format!("{:.16e}", mc.mc_std_error.unwrap_or(0.0)),
                    format!("{:.16e}", max_residual),
                    format!("{:.16e}", min_choi),
                    iterations_max.to_string(),
                ];
                println!("{}", fields.join(","));
            }
            Mode::Custom(_) => {
                println!("machine report:");
                println!("fidelity_best={:.16e}", report.fidelity);
                println!("fidelity_iterative={:.16e}", report.iterative_fidelity);
                println!("fidelity_oracle={:.16e}", report.oracle_fidelity);
                println!("fidelity_unitary_numeric={unitary_numeric:.16e}");
                println!("fidelity_repeat_first_principles={repeat_fp:.16e}");
                println!("fidelity_mc={:.16e}", mc.value);
                println!("mc_std_error={:.16e}", mc.mc_std_error.unwrap_or(0.0));
            }
        }

        Ok(if report.converged.iter().all(|&c| c) {
            0
        } else {
            2
        })
    })??;
    Ok(exit)
}

fn run_verify_command(args: VerifyArgs) -> Result<i32> {
    let settings = resolve_common(&args.common)?;
    let defaults = VerifyConfig::default();
    let cfg = VerifyConfig {
        seed: settings.sweep.seed,
        mc_samples: args.common.mc_samples.unwrap_or(defaults.mc_samples),
        mixing: settings.sweep.mixing,
        tolerance: settings.sweep.tolerance,
        max_iterations: settings.sweep.max_iterations,
        oracle_restarts: settings.sweep.oracle_restarts,
    };
    let results = with_pool(settings.jobs, move || run_all_criteria(&cfg))??;
    let mut all_passed = true;
    for r in &results {
        println!("{}", r.line());
        all_passed &= r.passed;
    }
    println!(
        "{} of {} criteria passed",
        results.iter().filter(|r| r.passed).count(),
        results.len()
    );
    Ok(if all_passed { 0 } else { 1 })
}
