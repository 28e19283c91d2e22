use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use covariant_bohm::cli::{run, Command, Overrides};
use covariant_bohm::integrator::Scheme;

#[derive(Parser)]
#[command(name = "covbohm", version, about = "Lorentz-invariant Bohmian trajectories for two particles in a well")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Integrate one trajectory and write CSV and SVG.
    Simulate(Common),
    /// Sample initial points and integrate each of them.
    Ensemble(Common),
    /// Compare rest-frame and boosted-frame integrations.
    Covariance(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    #[arg(long, value_parser = parse_scheme)]
    scheme: Option<Scheme>,
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
}

fn parse_scheme(s: &str) -> Result<Scheme, String> {
    s.parse()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        Sub::Simulate(a) => (Command::Simulate, a),
        Sub::Ensemble(a) => (Command::Ensemble, a),
        Sub::Covariance(a) => (Command::Covariance, a),
    };
    let overrides = Overrides {
        out: args.out,
        scheme: args.scheme,
        seed: args.seed,
    };
    match run(command, &args.config, &overrides) {
        Ok(report) => {
            let mut out = io::stdout().lock();
            let _ = writeln!(out, "{}", report.summary);
            for f in &report.files {
                let _ = writeln!(out, "wrote {}", f.display());
            }
            ExitCode::from(report.exit_code)
        }
        Err(e) => {
            eprintln!("covbohm: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
