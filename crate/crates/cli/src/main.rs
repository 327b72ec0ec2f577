use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use noisereg::harness::{
    audit_circuit, run_experiment, run_grids, summarize, write_audit_csv, write_audit_summary,
    AuditOptions, ExperimentConfig, DEFAULT_OUT,
};
use noisereg::paulisim::CircuitFile;

/// Largest accepted deviation from the damped reconstruction.
const SUPPRESSION_TOL: f64 = 1e-9;
/// Largest accepted heat-equation residual at step 1e-3.
const HEAT_TOL: f64 = 1e-4;

#[derive(Parser)]
#[command(
    name = "noisereg",
    version,
    about = "Noise-regularized variational optimization experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Master seed; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; overrides the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true, value_name = "K")]
    parallel: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run paired baseline and regularized cohorts from a TOML config.
    Run { config: PathBuf },
    /// Recompute summary.csv and report.txt from a results directory.
    Summarize { dir: PathBuf },
    /// Write landscape grids for the first instance of a config.
    Grid { config: PathBuf },
    /// Check the damping law and heat equation for a circuit JSON file.
    FourierAudit {
        circuit: PathBuf,
        /// Noise levels to check.
        #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.3, 0.5, 0.7, 0.9])]
        mus: Vec<f64>,
        /// Random points per noise level.
        #[arg(long, default_value_t = 20)]
        points: usize,
    },
}

fn load_config(path: &Path, cli: &Cli) -> Result<(ExperimentConfig, PathBuf)> {
    let mut cfg =
        ExperimentConfig::load(path).with_context(|| format!("loading {}", path.display()))?;
    if let Some(seed) = cli.seed {
        cfg.master_seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.out = Some(out.clone());
    }
    let out = cfg
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    Ok((cfg, out))
}

fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Run { config } => {
            let (cfg, out) = load_config(config, cli)?;
            let outcome = run_experiment(&cfg, &out)
                .with_context(|| format!("running {}", config.display()))?;
            if let Some(summary) = &outcome.summary {
                print!("{}", summary.report());
            }
            for f in &outcome.gamma_fractions {
                println!(
                    "gamma={} d={} {}: mean low-bin fraction {:.3}",
                    f.gamma, f.d, f.cohort, f.mean_low_bin_fraction
                );
            }
            if !outcome.audits.is_empty() {
                print!("{}", std::fs::read_to_string(out.join("report.txt"))?);
            }
            println!("results written to {}", out.display());
        }
        Command::Summarize { dir } => {
            let summary =
                summarize(dir).with_context(|| format!("summarizing {}", dir.display()))?;
            print!("{}", summary.report());
        }
        Command::Grid { config } => {
            let (cfg, out) = load_config(config, cli)?;
            for path in run_grids(&cfg, &out)? {
                println!("{}", path.display());
            }
        }
        Command::FourierAudit {
            circuit,
            mus,
            points,
        } => {
            let file = CircuitFile::load(circuit)
                .with_context(|| format!("loading {}", circuit.display()))?;
            let out = cli
                .out
                .clone()
                .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
            std::fs::create_dir_all(&out)?;
            let opts = AuditOptions {
                mus: mus.clone(),
                points: *points,
                seed: cli.seed.unwrap_or(0),
            };
            let (table, audit) = audit_circuit(&file.circuit, &file.observable, &opts)?;
            table.save_csv(&out.join("modes.csv"))?;
            write_audit_csv(
                std::slice::from_ref(&audit),
                std::fs::File::create(out.join("audit.csv"))?,
            )?;
            write_audit_summary(std::slice::from_ref(&audit), &out)?;
            print!("{}", std::fs::read_to_string(out.join("report.txt"))?);
            if audit.max_suppression() > SUPPRESSION_TOL {
                bail!(
                    "damping law violated: deviation {:e} exceeds {SUPPRESSION_TOL:e}",
                    audit.max_suppression()
                );
            }
            if audit.heat_residual > HEAT_TOL {
                bail!(
                    "heat equation violated: residual {:e} exceeds {HEAT_TOL:e}",
                    audit.heat_residual
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(k) = cli.parallel {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
        {
            eprintln!("error: cannot configure {k} worker threads: {e}");
            return ExitCode::FAILURE;
        }
    }
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
