use clap::{Args, Parser, Subcommand};
use hks_cli::commands::{check_command, friedrichs_command, run_command, sweep_command};
use hks_cli::config::Overrides;
use std::path::PathBuf;

/// Pseudospectral hyperbolic Keller-Segel simulator and analysis toolkit.
#[derive(Parser)]
#[command(name = "hks", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Experiment configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory (default: the config `output.dir`, then $HKS_OUT_DIR, then ".").
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the universal constant C of the theory oracles.
    #[arg(long = "constant-C", value_name = "FLOAT")]
    constant_c: Option<f64>,
    /// Seed for the randomized initial-data preset.
    #[arg(long)]
    seed: Option<u64>,
}

impl CommonArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            out_dir: self.out.clone(),
            constant_c: self.constant_c,
            seed: self.seed,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one configuration and write record, snapshot, and report.
    Run(CommonArgs),
    /// Run the Cartesian product of a sweep specification.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Maximum concurrent runs.
        #[arg(long, value_name = "N")]
        parallel: Option<usize>,
        /// Fail when a run blows up before the predicted lower bound
        /// (meaningful only if the configured C is trusted).
        #[arg(long)]
        strict_bounds: bool,
    },
    /// Evaluate the theory oracles on a configuration without simulating.
    Check(CommonArgs),
    /// Compare the linearized iteration against the direct solve.
    Friedrichs {
        #[command(flatten)]
        common: CommonArgs,
        /// Number of iterates (the first is the low-frequency seed).
        #[arg(long)]
        iters: usize,
    },
}

fn main() {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run(args) => run_command(&args.config, &args.overrides()),
        Command::Sweep {
            common,
            parallel,
            strict_bounds,
        } => sweep_command(&common.config, &common.overrides(), parallel, strict_bounds),
        Command::Check(args) => check_command(&args.config, &args.overrides()),
        Command::Friedrichs { common, iters } => {
            friedrichs_command(&common.config, &common.overrides(), iters)
        }
    };
    std::process::exit(code);
}
