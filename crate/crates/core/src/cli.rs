//! Command-line entry point: campaigns, convergence studies, speedup
//! studies, and a self-contained toy run.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::campaign::{convergence_study, speedup_study};
use crate::config::{self, LoadedConfig};
use crate::cost::PriceSheet;
use crate::engine::{self, RunConfig};
use crate::report;
use crate::stats::DEFAULT_PDF_TOLERANCE;

#[derive(Debug, Parser)]
#[command(name = "parmc", about = "Parallel Monte Carlo campaigns: split, process, merge")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Campaign config file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Override the worker count from the config.
    #[arg(long)]
    workers: Option<u64>,
    /// Override the base seed from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the output directory from the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Execute one campaign and write moments.csv, samples.csv, report.json.
    Run(CommonArgs),
    /// Sample-quadrupling convergence study with PDF and moment residues.
    Convergence {
        #[command(flatten)]
        common: CommonArgs,
        /// Realization counts; each entry must be 4x the previous.
        #[arg(long, value_delimiter = ',', required = true)]
        n_list: Vec<u64>,
        /// Convergence tolerance on the PDF sup-residue.
        #[arg(long, default_value_t = DEFAULT_PDF_TOLERANCE)]
        tolerance: f64,
    },
    /// Repeat the campaign across worker counts and emit speedup_study.csv.
    Speedup {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        worker_list: Vec<u64>,
        /// Repetitions of the single-task timing used for the serial baseline.
        #[arg(long, default_value_t = 10)]
        repetitions: u32,
    },
    /// Run the digit-square toy campaign without a config file.
    Toy {
        #[arg(long, default_value_t = 1_000_000)]
        n_mc: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        workers: Option<u64>,
        #[arg(long, default_value = "out/toy")]
        out: PathBuf,
    },
}

fn apply_overrides(loaded: &mut LoadedConfig, common: &CommonArgs) {
    if let Some(w) = common.workers {
        loaded.run.n_workers = w;
    }
    if let Some(s) = common.seed {
        loaded.run.base_seed = s;
    }
    if let Some(out) = &common.out {
        loaded.run.output_dir = out.clone();
    }
}

fn run_command(loaded: &LoadedConfig) -> Result<(), String> {
    let config = &loaded.run;
    let merged = engine::run(config).map_err(|e| e.to_string())?;
    let out = &config.output_dir;
    let report = report::write_run_artifacts(out, config, &merged, &loaded.prices)
        .map_err(|e| e.to_string())?;
    println!(
        "run complete: n_mc={} tasks={} workers={} seed={} total_ms={:.1} storage_mb={:.3} out={}",
        config.n_mc,
        report.n_tasks,
        report.n_workers,
        config.base_seed,
        report.timing.total_ms,
        report.storage_mb,
        out.display()
    );
    Ok(())
}

/// Parse arguments and execute; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // clap handles --help/--version as "errors" with exit code 0
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(msg) => {
            eprintln!("error: {msg}");
            1
        }
    }
}

fn execute(cli: Cli) -> Result<(), String> {
    match cli.command {
        Command::Run(common) => {
            let mut loaded = config::load(&common.config).map_err(|e| e.to_string())?;
            apply_overrides(&mut loaded, &common);
            run_command(&loaded)
        }
        Command::Convergence {
            common,
            n_list,
            tolerance,
        } => {
            let mut loaded = config::load(&common.config).map_err(|e| e.to_string())?;
            apply_overrides(&mut loaded, &common);
            let out = loaded.run.output_dir.clone();
            let study = convergence_study(&loaded.run, &n_list, tolerance, &out, &loaded.prices)
                .map_err(|e| e.to_string())?;
            println!(
                "convergence study: seed={} n_list={:?} converged={}",
                loaded.run.base_seed, study.n_list, study.converged
            );
            for p in &study.pairs {
                println!(
                    "  n={} -> 4n={}: pdf_residue={:.5} mean_residue={:.3e} std_residue={:.3e}",
                    p.n_small, p.n_large, p.pdf.residue, p.mean_residue, p.std_residue
                );
            }
            Ok(())
        }
        Command::Speedup {
            common,
            worker_list,
            repetitions,
        } => {
            let mut loaded = config::load(&common.config).map_err(|e| e.to_string())?;
            apply_overrides(&mut loaded, &common);
            let out = loaded.run.output_dir.clone();
            let study = speedup_study(&loaded.run, &worker_list, repetitions, &out)
                .map_err(|e| e.to_string())?;
            println!(
                "speedup study: seed={} serial_ms={:.1}",
                loaded.run.base_seed, study.serial_extrapolated_ms
            );
            for r in &study.rows {
                println!(
                    "  workers={} total_ms={:.1} speedup={:.2}",
                    r.n_workers, r.total_ms, r.speedup
                );
            }
            Ok(())
        }
        Command::Toy {
            n_mc,
            seed,
            workers,
            out,
        } => {
            let mut run = RunConfig::toy(n_mc, seed);
            if let Some(w) = workers {
                run.n_workers = w;
            }
            run.output_dir = out;
            let loaded = LoadedConfig {
                run,
                prices: PriceSheet::default(),
            };
            run_command(&loaded)
        }
    }
}
