use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use squidcav::experiments::aligned_table;
use squidcav::sweep::sweep_from_config;
use squidcav::{
    run_experiment, CliError, CliResult, Experiment, ExperimentConfig, ModelChoice, Overrides, Payload, RunOutput,
};

/// Simulates three-level rf-SQUID qubits coupled through a cavity.
///
/// Log verbosity is controlled by the SQUIDCAV_LOG environment variable
/// (error, warn, info, debug, trace).
#[derive(Parser)]
#[command(name = "squidcav", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solves the SQUID spectrum and writes levels and flux matrix elements.
    Spectrum(Common),
    /// Runs one named experiment.
    Run {
        #[command(flatten)]
        common: Common,
        /// bell, transfer, cnot, swap, stark-sweep, spectrum or feasibility.
        #[arg(long)]
        experiment: Option<Experiment>,
    },
    /// Runs the experiment once per value of the config's sweep section.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        experiment: Option<Experiment>,
    },
    /// Coherence-time budget for the configured parameters.
    Feasibility(Common),
}

#[derive(Args)]
struct Common {
    /// JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (default: the config's output.dir, else `out`).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    model: Option<ModelArg>,
    /// Seed for randomly drawn input states.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Effective,
    Full,
}

fn load(common: &Common, experiment: Option<Experiment>) -> CliResult<(ExperimentConfig, PathBuf)> {
    let mut cfg = ExperimentConfig::from_path(&common.config)?;
    cfg.apply(&Overrides {
        experiment,
        model: common.model.map(|m| match m {
            ModelArg::Effective => ModelChoice::Effective,
            ModelArg::Full => ModelChoice::Full,
        }),
        seed: common.seed,
    });
    let out = common.out.clone().or_else(|| cfg.output.dir.as_ref().map(PathBuf::from)).unwrap_or_else(|| "out".into());
    Ok((cfg, out))
}

fn print_written(paths: &[PathBuf]) {
    for p in paths {
        println!("  wrote {}", p.display());
    }
}

fn finish_run(out: RunOutput, dir: &Path) -> CliResult<()> {
    let paths = out.write(dir)?;
    let r = &out.record;
    match &r.payload {
        Payload::Protocol(p) => {
            println!("{}: fidelity {:.12} on {} ({:.3} s)", r.experiment, p.fidelity, p.variant, r.duration_s);
            if let Some(d) = p.operator_distance {
                println!("  operator distance {d:.3e}");
            }
            if let Some(peaks) = p.peak_populations {
                println!("  peak P_a {:.4e}, peak photon number {:.4e}", peaks.p_a, peaks.n_photon);
            }
        }
        Payload::Feasibility(f) => {
            print!("{}", aligned_table(f));
            println!("feasibility: {} ({:.3} s)", if f.all_ok() { "all margins met" } else { "margin violated" }, r.duration_s);
        }
        Payload::Spectrum(s) => {
            for x in s {
                println!("SQUID {}: omega_a0/2pi = {:.6} GHz, omega_a1/2pi = {:.6} GHz", x.squid + 1, x.omega_a0_GHz, x.omega_a1_GHz);
            }
            println!("spectrum ({:.3} s)", r.duration_s);
        }
    }
    for w in &r.warnings {
        println!("  warning: {w}");
    }
    println!("  config hash {}", r.config_hash);
    print_written(&paths);
    match out.failure {
        Some(f) => Err(CliError::Verification(f)),
        None => Ok(()),
    }
}

fn execute(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Spectrum(c) => {
            let (cfg, dir) = load(&c, Some(Experiment::Spectrum))?;
            finish_run(run_experiment(&cfg)?, &dir)
        }
        Command::Feasibility(c) => {
            let (cfg, dir) = load(&c, Some(Experiment::Feasibility))?;
            finish_run(run_experiment(&cfg)?, &dir)
        }
        Command::Run { common, experiment } => {
            let (cfg, dir) = load(&common, experiment)?;
            finish_run(run_experiment(&cfg)?, &dir)
        }
        Command::Sweep { common, experiment } => {
            let (cfg, dir) = load(&common, experiment)?;
            let out = sweep_from_config(&cfg)?;
            for p in &out.points {
                let f = p.record.as_ref().and_then(|r| r.protocol()).map(|r| format!(" fidelity {:.12}", r.fidelity));
                let m = p.message.as_deref().map(|m| format!(" ({m})")).unwrap_or_default();
                println!("{} = {}: {:?}{}{m}", out.path, p.value, p.status, f.unwrap_or_default());
            }
            println!("  config hash {}", out.config_hash);
            print_written(&out.write(&dir, &cfg.experiment.stem())?);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().filter_or("SQUIDCAV_LOG", "warn")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
