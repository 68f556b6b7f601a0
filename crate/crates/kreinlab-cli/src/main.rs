mod analyze;
mod demo;
mod docs;
mod error;
mod kgroup;

use clap::{Parser, Subcommand};

/// Exit codes: 0 stable, 1 unstable, 2 parse error, 3 dimension mismatch,
/// 4 analysis failure, 5 unsupported scenario, 6 internal invariant
/// violation.
#[derive(Parser)]
#[command(name = "kreinlab", version, about = "Indefinite-metric operator analysis at desk scale")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a Hamiltonian for dynamical stability and classify symmetries
    Analyze(analyze::AnalyzeArgs),
    /// Compute the K-group descriptor of a point scenario
    Kgroup(kgroup::KgroupArgs),
    /// Run a built-in demonstration and write its report file
    Demo(demo::DemoArgs),
}

fn main() {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Analyze(args) => analyze::run(&args),
        Command::Kgroup(args) => kgroup::run(&args),
        Command::Demo(args) => demo::run(&args),
    };
    match outcome {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
