use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use taxis_core::app::execute;
use taxis_core::config::{Command, RunConfig};
use taxis_core::limit::WeakVariant;
use taxis_core::Error;

#[derive(Parser)]
#[command(name = "taxis", version, about = "Regularized nutrient-taxis simulator and estimate checks")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(clap::Args)]
struct Common {
    /// Flat key = value configuration file
    #[arg(long)]
    config: PathBuf,
    /// Output directory
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Form of the weak density identity used for residuals
    #[arg(long, value_enum, default_value_t = Variant::Derived)]
    variant: Variant,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one trajectory and check its balance laws
    Simulate(Common),
    /// Run an epsilon family and check the family estimates
    Sweep(Common),
    /// Re-read snapshots from the output directory and re-check them
    Verify(Common),
    /// Sample the interpolation inequalities
    GnTest(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum Variant {
    Derived,
    Printed,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cmd, common) = match cli.command {
        Cmd::Simulate(c) => (Command::Simulate, c),
        Cmd::Sweep(c) => (Command::Sweep, c),
        Cmd::Verify(c) => (Command::Verify, c),
        Cmd::GnTest(c) => (Command::GnTest, c),
    };
    let variant = match common.variant {
        Variant::Derived => WeakVariant::Derived,
        Variant::Printed => WeakVariant::Printed,
    };
    let cfg = match RunConfig::from_path(&common.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Err(e) = cfg.validate_for(cmd) {
        eprintln!("config error: {e}");
        return ExitCode::from(2);
    }
    match execute(cmd, &cfg, &common.out, variant) {
        Ok(outcome) => {
            print!("{}", outcome.summary);
            if outcome.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e @ Error::Config { .. }) => {
            eprintln!("config error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
