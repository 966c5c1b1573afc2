use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use extremal::cli::{
    cmd_characteristics, cmd_mcf_compare, cmd_simulate, cmd_verify, configure_threads, exit_code, CharInput,
    DEFAULT_SAMPLES, DEFAULT_SHAPES,
};
use extremal::{Error, Result};

#[derive(Parser)]
#[command(name = "extremal", version, about = "Time-like extremal graphs in Minkowski space")]
struct Cli {
    /// Worker threads for the per-point loops.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Directory for output files (overrides the config).
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    /// Seed for randomized runs.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the minor identities exactly on random rational matrices.
    Verify {
        /// Shapes as `m,n`; repeat the flag for several.
        #[arg(long = "shape", value_parser = parse_shape)]
        shapes: Vec<(usize, usize)>,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
    },
    /// Evolve the augmented system and write diagnostics.
    Simulate { config: PathBuf },
    /// Characteristic speeds for a config's initial field or an inline state.
    Characteristics {
        config: Option<PathBuf>,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        n: Option<usize>,
        /// Comma-separated state vector W.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        w: Option<Vec<f64>>,
        /// Comma-separated unit direction (numeric mode).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        nu: Option<Vec<f64>>,
    },
    /// Compare the small-time limit with mean curvature flow.
    McfCompare { config: PathBuf },
}

fn parse_shape(s: &str) -> std::result::Result<(usize, usize), String> {
    let (m, n) = s.split_once(',').ok_or_else(|| format!("expected m,n, got {s:?}"))?;
    let parse = |x: &str| x.trim().parse::<usize>().map_err(|e| format!("{x:?}: {e}"));
    Ok((parse(m)?, parse(n)?))
}

fn run(cli: Cli) -> Result<bool> {
    if let Some(threads) = cli.threads {
        configure_threads(threads)?;
    }
    let out_dir = cli.output_dir.as_deref();
    match cli.command {
        Command::Verify { shapes, samples } => {
            let shapes = if shapes.is_empty() { DEFAULT_SHAPES.to_vec() } else { shapes };
            let report = cmd_verify(&shapes, samples, cli.seed)?;
            println!("{}", report.to_json());
            eprintln!("elapsed: {:.3} s", report.elapsed.as_secs_f64());
            Ok(report.all_passed)
        }
        Command::Simulate { config } => {
            let summary = cmd_simulate(&config, out_dir)?;
            println!("{}", summary.line());
            Ok(true)
        }
        Command::Characteristics { config, m, n, w, nu } => {
            let input = match (config, w) {
                (Some(path), None) => CharInput::Config(path),
                (None, Some(w)) => {
                    let (m, n) = m
                        .zip(n)
                        .ok_or_else(|| Error::Config("inline mode needs --m and --n".into()))?;
                    CharInput::Inline { m, n, w, nu }
                }
                _ => return Err(Error::Config("give either a config path or --w".into())),
            };
            print!("{}", cmd_characteristics(&input)?);
            Ok(true)
        }
        Command::McfCompare { config } => {
            let summary = cmd_mcf_compare(&config, out_dir)?;
            print!("{}", summary.table);
            for file in &summary.files {
                eprintln!("wrote {}", file.display());
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
