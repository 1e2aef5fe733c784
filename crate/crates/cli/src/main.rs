use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use spinchain_cli::commands::{self, SweepKind};
use spinchain_cli::config::RunConfig;
use spinchain_cli::CliError;

#[derive(Parser, Debug)]
#[command(
    name = "spinchain",
    version,
    about = "Ising nuclear-spin chain simulator"
)]
struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (default: $SPINCHAIN_OUT, then the current directory).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps and scans (default: available cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Integrator step bound.
    #[arg(long, global = true)]
    step: Option<f64>,
    /// CNOT drive-frequency convention.
    #[arg(long, global = true, value_parser = ["paper", "spectrum", "auto"])]
    convention: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write the design report (couplings, fields, gradient).
    Design,
    /// Trace the four populations over one CNOT pulse from |10>.
    Trace,
    /// Fidelity sweeps over the Rabi frequency or the separation.
    Sweep {
        #[arg(value_enum)]
        which: Which,
    },
    /// Drive-frequency resonance scan.
    Scan {
        /// Scan a single spin around its Larmor frequency.
        #[arg(long)]
        single_qubit: bool,
        #[arg(long)]
        min: Option<f64>,
        #[arg(long)]
        max: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Which {
    Rabi,
    Separation,
}

fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(out) = &cli.out {
        config.out = Some(out.clone());
    }
    if let Some(jobs) = cli.jobs {
        config.jobs = Some(jobs);
    }
    if let Some(step) = cli.step {
        config.step = Some(step);
    }
    if let Some(c) = &cli.convention {
        config.convention = Some(c.clone());
    }
    if let Command::Scan {
        single_qubit,
        min,
        max,
        steps,
    } = &cli.command
    {
        config.scan.single_qubit |= *single_qubit;
        config.scan.omega_min = min.or(config.scan.omega_min);
        config.scan.omega_max = max.or(config.scan.omega_max);
        if let Some(s) = steps {
            config.scan.steps = *s;
        }
    }
    config.validate()?;
    Ok(config)
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let config = load_config(cli)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Config(e.to_string()))?;
    pool.install(|| {
        let mut stdout = std::io::stdout();
        match &cli.command {
            Command::Design => commands::cmd_design(&config, &mut stdout),
            Command::Trace => commands::cmd_trace(&config, &mut stdout),
            Command::Sweep { which: Which::Rabi } => {
                commands::cmd_sweep(&config, SweepKind::Rabi, &mut stdout)
            }
            Command::Sweep {
                which: Which::Separation,
            } => commands::cmd_sweep(&config, SweepKind::Separation, &mut stdout),
            Command::Scan { .. } => commands::cmd_scan(&config, &mut stdout),
        }
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
