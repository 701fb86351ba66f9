use std::path::{Path, PathBuf};
use std::process::ExitCode as ProcessExit;

use clap::{Parser, Subcommand};
use lorentz_lab::{recipes, run_source, ExitCode, RunOptions, RunOutput, VERSION};

#[derive(Parser)]
#[command(name = "lorentz-lab", version = VERSION, about = "Run Lorentzian-geometry scenarios and write CSV reports")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run scenario files (or built-in recipes by name).
    Run {
        #[arg(required = true)]
        scenarios: Vec<String>,
        /// Output directory for CSV and report files.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Random seed; overrides the scenario's seed and LORENTZ_LAB_SEED.
        #[arg(long)]
        seed: Option<u64>,
        /// Multiplies the integrator's relative and absolute tolerances.
        #[arg(long, default_value_t = 1.0)]
        tol_scale: f64,
        /// Number of scenarios run concurrently.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// List the built-in recipes, print one, or write them all to a directory.
    Recipes {
        #[arg(long, value_name = "NAME")]
        show: Option<String>,
        #[arg(long, value_name = "DIR")]
        write: Option<PathBuf>,
    },
    /// Print the tool version.
    Version,
}

fn load(arg: &str) -> Result<String, String> {
    let p = Path::new(arg);
    if p.exists() {
        return std::fs::read_to_string(p).map_err(|e| format!("{arg}: {e}"));
    }
    recipes::find(arg)
        .map(|r| r.source.to_string())
        .ok_or_else(|| format!("{arg}: no such file or built-in recipe"))
}

fn config_failure(label: &str, msg: String) -> RunOutput {
    RunOutput {
        name: label.to_string(),
        output_name: String::new(),
        files: Vec::new(),
        report: format!("scenario = {label}\nerror = {msg}\nstatus = config-error\nexit_code = 3\n"),
        exit: ExitCode::ConfigError,
    }
}

fn run_all(scenarios: &[String], opts: &RunOptions, jobs: usize) -> Vec<RunOutput> {
    let one = |arg: &String| match load(arg) {
        Ok(src) => run_source(&src, arg, opts),
        Err(msg) => config_failure(arg, msg),
    };
    #[cfg(feature = "parallel")]
    if jobs > 1 {
        use rayon::prelude::*;
        if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
            return pool.install(|| scenarios.par_iter().map(one).collect());
        }
    }
    let _ = jobs;
    scenarios.iter().map(one).collect()
}

fn write_outputs(dir: &Path, out: &RunOutput) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    for (name, body) in &out.files {
        std::fs::write(dir.join(name), body)?;
    }
    if !out.output_name.is_empty() {
        let stem = out.output_name.strip_suffix(".csv").unwrap_or(&out.output_name);
        std::fs::write(dir.join(format!("{stem}.report.txt")), &out.report)?;
    }
    Ok(())
}

fn main() -> ProcessExit {
    let cli = Cli::parse();
    match cli.command {
        Command::Version => {
            println!("lorentz-lab {VERSION}");
            ProcessExit::SUCCESS
        }
        Command::Recipes { show, write } => {
            if let Some(name) = show {
                return match recipes::find(&name) {
                    Some(r) => {
                        print!("{}", r.source);
                        ProcessExit::SUCCESS
                    }
                    None => {
                        eprintln!("no built-in recipe '{name}'");
                        ProcessExit::from(ExitCode::ConfigError as u8)
                    }
                };
            }
            if let Some(dir) = write {
                let res = std::fs::create_dir_all(&dir).and_then(|_| {
                    recipes::RECIPES
                        .iter()
                        .try_for_each(|r| std::fs::write(dir.join(format!("{}.scn", r.name)), r.source))
                });
                if let Err(e) = res {
                    eprintln!("{}: {e}", dir.display());
                    return ProcessExit::from(ExitCode::ConfigError as u8);
                }
                return ProcessExit::SUCCESS;
            }
            print!("{}", recipes::listing());
            ProcessExit::SUCCESS
        }
        Command::Run {
            scenarios,
            out,
            seed,
            tol_scale,
            jobs,
        } => {
            let seed_fallback = match std::env::var("LORENTZ_LAB_SEED") {
                Ok(s) => match s.trim().parse::<u64>() {
                    Ok(v) => Some(v),
                    Err(_) => {
                        eprintln!("LORENTZ_LAB_SEED: '{s}' is not an unsigned integer");
                        return ProcessExit::from(ExitCode::ConfigError as u8);
                    }
                },
                Err(_) => None,
            };
            let opts = RunOptions {
                seed_override: seed,
                seed_fallback,
                tol_scale,
                ..RunOptions::default()
            };
            let results = run_all(&scenarios, &opts, jobs.max(1));
            let mut worst = ExitCode::Success;
            for (i, r) in results.iter().enumerate() {
                if i > 0 {
                    println!();
                }
                print!("{}", r.report);
                if let Err(e) = write_outputs(&out, r) {
                    eprintln!("{}: {e}", out.display());
                    worst = worst.max(ExitCode::ConfigError);
                }
                worst = worst.max(r.exit);
            }
            ProcessExit::from(worst as u8)
        }
    }
}
