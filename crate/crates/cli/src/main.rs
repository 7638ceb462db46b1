use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use kinterp_cli::{config, exit, plot, runner, THREADS_ENV};

/// Kernel interpolation experiments.
#[derive(Parser)]
#[command(name = "kinterp", version, about)]
#[command(after_help = "Set KINTERP_THREADS to fix the number of worker threads.")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config and write its CSV (and SVG) outputs.
    Run { config: PathBuf },
    /// Check a config and print its canonical form.
    Validate { config: PathBuf },
    /// Chart columns of one or more report CSVs.
    Plot {
        /// Report CSVs, then the plot spec as a file or inline TOML.
        #[arg(num_args = 2.., required = true, value_name = "FILE")]
        args: Vec<String>,
    },
}

fn code(c: i32) -> ExitCode {
    ExitCode::from(c as u8)
}

fn configure_threads() -> Result<(), String> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| format!("{THREADS_ENV} must be a positive integer, got `{v}`"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return code(if e.use_stderr() { exit::CONFIG } else { exit::SUCCESS });
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return code(exit::CONFIG);
    }
    match cli.command {
        Command::Validate { config } => match config::load(&config) {
            Ok(cfg) => {
                print!("{}", cfg.to_toml());
                code(exit::SUCCESS)
            }
            Err(e) => {
                eprintln!("error: {}: {e}", config.display());
                code(exit::CONFIG)
            }
        },
        Command::Run { config } => {
            let cfg = match config::load(&config) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {}: {e}", config.display());
                    return code(exit::CONFIG);
                }
            };
            match runner::run(&cfg) {
                Ok((outputs, paths)) => {
                    for w in &outputs.warnings {
                        eprintln!("warning: {w}");
                    }
                    for p in &paths {
                        println!("{}", p.display());
                    }
                    if outputs.all_failed() {
                        eprintln!("error: all {} levels failed", outputs.levels);
                        code(exit::ALL_LEVELS_FAILED)
                    } else {
                        code(exit::SUCCESS)
                    }
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    code(exit::CONFIG)
                }
            }
        }
        Command::Plot { mut args } => {
            let spec_arg = args.pop().expect("at least two arguments");
            let csvs: Vec<PathBuf> = args.into_iter().map(PathBuf::from).collect();
            let result = plot::PlotSpec::load(&spec_arg).and_then(|spec| plot::plot(&csvs, &spec));
            match result {
                Ok(path) => {
                    println!("{}", path.display());
                    code(exit::SUCCESS)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    code(exit::CONFIG)
                }
            }
        }
    }
}
