use std::path::{Path, PathBuf};
use std::process::ExitCode;

use aan_core::harness::{run_protocol, summary_from_dir, sweep, RunConfig, SweepAxis, SUMMARY_FILE};
use aan_core::parallel::Execution;
use aan_core::AanError;
use clap::{Parser, Subcommand};

/// Simulated assist-as-needed gait training.
#[derive(Debug, Parser)]
#[command(name = "aan", version)]
struct Cli {
    /// Run configuration (TOML). Built-in defaults when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Overrides the seed from the config file.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Suppress progress output.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Execute the full protocol and write strides.csv, summary.json and run_config.toml.
    Run,
    /// Run the cartesian product of parameter overrides, one directory per cell.
    Sweep {
        /// `key=v1,v2,…` with a dotted config key; repeat for more axes.
        #[arg(long = "set", value_name = "KEY=V1,V2", required = true)]
        set: Vec<String>,
        /// Run cells one after another.
        #[arg(long)]
        sequential: bool,
    },
    /// Recompute the summary of an existing run directory.
    Metrics {
        /// Directory written by `run`.
        run_dir: PathBuf,
    },
    /// Check a configuration without simulating.
    Validate,
}

fn load_config(cli: &Cli) -> Result<RunConfig, AanError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(), AanError> {
    match &cli.command {
        Command::Validate => {
            let cfg = load_config(cli)?;
            cfg.validate()?;
            if !cli.quiet {
                println!("ok");
            }
        }
        Command::Run => {
            let cfg = load_config(cli)?;
            let dir = cli
                .out
                .clone()
                .or_else(|| cfg.output_dir.clone())
                .unwrap_or_else(|| Path::new("runs").join(cfg.run_id()));
            let output = run_protocol(&cfg)?;
            output.write_to(&dir)?;
            if !cli.quiet {
                println!("{}", dir.display());
            }
        }
        Command::Sweep { set, sequential } => {
            let cfg = load_config(cli)?;
            let axes = set.iter().map(|s| SweepAxis::parse(s)).collect::<Result<Vec<_>, _>>()?;
            let dir = cli
                .out
                .clone()
                .or_else(|| cfg.output_dir.clone())
                .unwrap_or_else(|| PathBuf::from("sweep"));
            let exec = if *sequential { Execution::Sequential } else { Execution::default() };
            let cells = sweep(&cfg, &axes, &dir, exec)?;
            if !cli.quiet {
                for cell in cells {
                    let desc: Vec<String> = cell.overrides.iter().map(|(k, v)| format!("{k}={v}")).collect();
                    println!("{}\t{}", cell.dir.display(), desc.join(" "));
                }
            }
        }
        Command::Metrics { run_dir } => {
            let json = summary_from_dir(run_dir)?.to_json();
            match &cli.out {
                Some(dir) => {
                    std::fs::create_dir_all(dir).map_err(|e| AanError::io(dir, e))?;
                    let path = dir.join(SUMMARY_FILE);
                    std::fs::write(&path, json).map_err(|e| AanError::io(&path, e))?;
                    if !cli.quiet {
                        println!("{}", path.display());
                    }
                }
                None => print!("{json}"),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
