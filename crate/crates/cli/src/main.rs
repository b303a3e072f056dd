use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gfk_cli::commands::{Invocation, REPORT_FILE};
use gfk_cli::config::load_config;
use gfk_cli::manifest::{load_manifest, ManifestCommand};
use gfk_cli::{CliError, CliResult};
use gfk_core::chain::KernelKind;

#[derive(Debug, Parser)]
#[command(
    name = "gfk-chain",
    version,
    about = "Chained geodesic-flow-kernel transfer between morphing structures"
)]
struct Cli {
    /// JSON config; missing keys take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the config's base_seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory [default: out, or the manifest's directory].
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for trials [default: all cores].
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Replays the run recorded in a manifest.
    #[arg(long, global = true)]
    from_manifest: Option<PathBuf>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Clone, Copy)]
enum KernelChoice {
    One(KernelKind),
    Both,
}

fn parse_kernel(s: &str) -> Result<KernelChoice, String> {
    if s == "both" {
        return Ok(KernelChoice::Both);
    }
    s.parse::<KernelKind>()
        .map(KernelChoice::One)
        .map_err(|_| format!("unknown kernel '{s}', expected one of {{linear, gfk}} or both"))
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Writes noise-free frequencies and a sampled dataset per structure.
    GenerateChain {
        #[arg(long)]
        n_structures: Option<usize>,
    },
    /// Runs direct and chained transfer trials.
    RunExperiment {
        /// linear, gfk or both.
        #[arg(long, value_parser = parse_kernel)]
        kernel: Option<KernelChoice>,
        #[arg(long)]
        trials: Option<usize>,
        /// Comma-separated intermediate counts, e.g. 0,1,3,13,78.
        #[arg(long, value_delimiter = ',')]
        intermediates: Option<Vec<usize>>,
    },
    /// Renders a results or summary CSV as an SVG trend chart.
    Report {
        results: PathBuf,
        /// Output SVG, relative to --out [default: report.svg].
        #[arg(long)]
        svg: Option<PathBuf>,
    },
}

fn resolve(cli: Cli) -> CliResult<Invocation> {
    if let Some(path) = &cli.from_manifest {
        if cli.command.is_some() || cli.config.is_some() || cli.seed.is_some() {
            return Err(CliError::usage(
                "--from-manifest replays a recorded run and cannot be combined with a command, --config or --seed",
            ));
        }
        let manifest = load_manifest(path)?;
        return Ok(Invocation {
            command: manifest.command,
            config: manifest.config,
            out_dir: cli.out.unwrap_or(manifest.out_dir),
            threads: cli.threads,
        });
    }
    let Some(command) = cli.command else {
        return Err(CliError::usage("no command given (try --help)"));
    };
    let mut config = load_config(cli.config.as_deref())?;
    if let Some(seed) = cli.seed {
        config.base_seed = seed;
    }
    let command = match command {
        Command::GenerateChain { n_structures } => {
            if let Some(n) = n_structures {
                config.n_structures = n;
                // intermediates only matter to run-experiment
                config.intermediates.retain(|&k| k + 2 <= n);
            }
            ManifestCommand::GenerateChain
        }
        Command::RunExperiment {
            kernel,
            trials,
            intermediates,
        } => {
            match kernel {
                Some(KernelChoice::One(k)) => config.kernels = vec![k],
                Some(KernelChoice::Both) => config.kernels = KernelKind::ALL.to_vec(),
                None => {}
            }
            if let Some(t) = trials {
                config.n_trials = t;
            }
            if let Some(ks) = intermediates {
                config.intermediates = ks;
            }
            ManifestCommand::RunExperiment
        }
        Command::Report { results, svg } => {
            let input = std::fs::canonicalize(&results).map_err(|e| CliError::io(&results, e))?;
            ManifestCommand::Report {
                input,
                svg: svg.unwrap_or_else(|| PathBuf::from(REPORT_FILE)),
            }
        }
    };
    config.validate()?;
    Ok(Invocation {
        command,
        config,
        out_dir: cli.out.unwrap_or_else(|| PathBuf::from("out")),
        threads: cli.threads,
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match resolve(cli).and_then(|inv| inv.execute()) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
