use clap::{Parser, Subcommand};
use coxballs_cli::config::ExperimentConfig;
use coxballs_cli::verify::Check;
use coxballs_cli::{
    config, plot, runner, verify, EXIT_CONFIG, EXIT_OK, EXIT_RUNTIME, EXIT_VERIFY_FAIL,
};
use serde_json::json;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "coxballs",
    about = "Simulation and verification laboratory for weighted random-ball fields driven by shot-noise Cox processes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct RunArgs {
    /// Experiment configuration (JSON, schema_version 1).
    #[arg(long)]
    config: PathBuf,
    /// Master seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (results are independent of this).
    #[arg(long)]
    threads: Option<usize>,
    /// Output directory override.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Print the scaling regime, its normalization and limit constants.
    Classify(RunArgs),
    /// Sample normalized fluctuations and write one CSV per (measure, rho).
    Simulate(RunArgs),
    /// Run verification checks and write CF reports plus a PASS/FAIL summary.
    Verify {
        /// largeballs | exactcf | limitcf | variance | tail | all
        check: String,
        #[command(flatten)]
        args: RunArgs,
    },
    /// Render report CSVs (CF overlays, large-ball convergence) to SVG.
    Plot {
        /// Output directory for the figures.
        #[arg(long)]
        out: PathBuf,
        /// Report CSV files produced by `verify`.
        files: Vec<PathBuf>,
    },
}

fn resolve(args: &RunArgs) -> Result<config::Resolved, i32> {
    let cfg = ExperimentConfig::load(&args.config).map_err(|e| {
        eprintln!("{e}");
        EXIT_CONFIG
    })?;
    cfg.resolve(args.seed).map_err(|e| {
        eprintln!("{e}");
        EXIT_CONFIG
    })
}

fn out_dir(args: &RunArgs, resolved: &config::Resolved) -> PathBuf {
    args.out
        .clone()
        .unwrap_or_else(|| PathBuf::from(&resolved.config.output_dir))
}

fn with_pool<T>(
    threads: Option<usize>,
    f: impl FnOnce() -> T + Send,
    _: std::marker::PhantomData<T>,
) -> T
where
    T: Send,
{
    match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .expect("thread pool")
            .install(f),
        None => f(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Classify(args) => match resolve(&args) {
            Err(c) => c,
            Ok(resolved) => {
                let r = &resolved.regime;
                println!(
                    "regime: {} | n(rho) = {} * rho^{}{}{}",
                    r.kind.as_str(),
                    r.n_coefficient,
                    r.n_exponent,
                    r.a.map(|a| format!(" | a = {a}")).unwrap_or_default(),
                    r.gamma
                        .map(|g| format!(" | gamma = {g}"))
                        .unwrap_or_default(),
                );
                for &rho in &resolved.config.rhos {
                    println!("  rho = {rho}: n(rho) = {}", r.n(rho));
                }
                if let Some(line) = verify::marginal_params_line(&resolved) {
                    println!("  {line}");
                }
                let dir = out_dir(&args, &resolved);
                if std::fs::create_dir_all(&dir).is_ok() {
                    let summary = json!({
                        "regime": r.kind.as_str(),
                        "n_coefficient": r.n_coefficient,
                        "n_exponent": r.n_exponent,
                        "a": r.a,
                        "gamma": r.gamma,
                        "n_by_rho": resolved.config.rhos.iter()
                            .map(|&rho| json!({"rho": rho, "n": r.n(rho)})).collect::<Vec<_>>(),
                    });
                    let _ = std::fs::write(
                        dir.join("classify.json"),
                        serde_json::to_string_pretty(&summary).unwrap(),
                    );
                }
                EXIT_OK
            }
        },
        Command::Simulate(args) => match resolve(&args) {
            Err(c) => c,
            Ok(resolved) => {
                let dir = out_dir(&args, &resolved);
                let run = || runner::run_simulate(&resolved, &dir);
                match with_pool(args.threads, run, std::marker::PhantomData) {
                    Ok(files) => {
                        for f in files {
                            println!("wrote {}", f.display());
                        }
                        EXIT_OK
                    }
                    Err(e) => {
                        eprintln!("{e}");
                        EXIT_RUNTIME
                    }
                }
            }
        },
        Command::Verify { check, args } => {
            let kind = match check.as_str() {
                "largeballs" => Check::LargeBalls,
                "exactcf" => Check::ExactCf,
                "limitcf" => Check::LimitCf,
                "variance" => Check::Variance,
                "tail" => Check::Tail,
                "all" => Check::All,
                other => {
                    eprintln!("unknown check '{other}' (expected largeballs|exactcf|limitcf|variance|tail|all)");
                    return ExitCode::from(EXIT_CONFIG as u8);
                }
            };
            match resolve(&args) {
                Err(c) => c,
                Ok(resolved) => {
                    let dir = out_dir(&args, &resolved);
                    let run = || verify::run_checks(&resolved, kind, &dir);
                    match with_pool(args.threads, run, std::marker::PhantomData) {
                        Ok(outcomes) => {
                            let mut all_pass = true;
                            for o in &outcomes {
                                for line in &o.lines {
                                    println!("{line}");
                                }
                                println!(
                                    "check {}: {}",
                                    o.check,
                                    if o.pass { "PASS" } else { "FAIL" }
                                );
                                all_pass &= o.pass;
                            }
                            if all_pass {
                                EXIT_OK
                            } else {
                                EXIT_VERIFY_FAIL
                            }
                        }
                        Err(e) => {
                            eprintln!("{e}");
                            EXIT_RUNTIME
                        }
                    }
                }
            }
        }
        Command::Plot { out, files } => {
            if files.is_empty() {
                eprintln!("no report files given");
                EXIT_CONFIG
            } else {
                let mut code = EXIT_OK;
                for f in files {
                    match plot::plot_file(&f, &out) {
                        Ok(p) => println!("wrote {}", p.display()),
                        Err(plot::PlotError::Malformed(m)) => {
                            eprintln!("{}: {m}", f.display());
                            code = EXIT_CONFIG;
                        }
                        Err(e) => {
                            eprintln!("{}: {e}", f.display());
                            code = EXIT_RUNTIME;
                        }
                    }
                }
                code
            }
        }
    };
    ExitCode::from(code as u8)
}
