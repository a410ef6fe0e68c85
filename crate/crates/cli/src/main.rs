use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dod_cli::check::{cmd_check, CheckArgs};
use dod_cli::commands::{
    cmd_domain, cmd_ideals, cmd_poset, cmd_rep, parse_ideal_source, DomainArgs, IdealMode, IdealsArgs, PosetArgs, RepArgs,
};
use dod_cli::files::parse_theta;

/// Relative positions, fat ideals and sampled domains of discontinuity.
#[derive(Parser)]
#[command(name = "dod", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate relative positions of a space and write the poset as JSON
    /// (and optionally DOT).
    Poset {
        #[arg(long)]
        space: PathBuf,
        /// Override the flag type, e.g. `1,3`.
        #[arg(long, value_parser = parse_theta)]
        theta: Option<Vec<usize>>,
        #[arg(long)]
        seed: Option<u64>,
        /// JSON output; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// List the fat or w0-fat ideals of a poset file.
    Ideals {
        #[arg(long)]
        poset: PathBuf,
        #[arg(long, value_enum, default_value = "w0fat")]
        mode: IdealMode,
        /// Only the inclusion-minimal non-empty ones.
        #[arg(long)]
        minimal_only: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Growth certificate, limit cone and, given a space, the properness
    /// statistic of a representation.
    Rep {
        /// A representation file or a bundled name (schottky_sl2, sym3, ...).
        #[arg(long)]
        rep: String,
        #[arg(long, default_value_t = 6)]
        radius: usize,
        #[arg(long)]
        space: Option<PathBuf>,
        #[arg(long, value_parser = parse_theta)]
        theta: Option<Vec<usize>>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample points of a space and classify them against the sampled limit
    /// set; writes CSV.
    Domain {
        #[arg(long)]
        rep: String,
        #[arg(long)]
        space: PathBuf,
        /// An ideals file, or `min`, `nonmax`, `full`, `empty`.
        #[arg(long)]
        ideal: String,
        /// Which ideal of an ideals file.
        #[arg(long, default_value_t = 0)]
        index: usize,
        #[arg(long, value_parser = parse_theta)]
        theta: Option<Vec<usize>>,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        /// Number of sampled limit flags.
        #[arg(long, default_value_t = 128)]
        flags: usize,
        #[arg(long, default_value_t = 6)]
        min_length: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the invariant suite and the fixture comparisons.
    Check {
        /// Fixture file replacing the built-in one.
        #[arg(long)]
        fixtures: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// JSON report.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> dod_cli::Result<()> {
    match cli.command {
        Command::Poset { space, theta, seed, out, dot } => {
            cmd_poset(&PosetArgs { space, theta, seed, out, dot })?;
        }
        Command::Ideals { poset, mode, minimal_only, out } => {
            cmd_ideals(&IdealsArgs { poset, mode, minimal_only, out })?;
        }
        Command::Rep { rep, radius, space, theta, seed, out } => {
            cmd_rep(&RepArgs { rep, radius, space, theta, seed, out })?;
        }
        Command::Domain { rep, space, ideal, index, theta, samples, flags, min_length, seed, out } => {
            let ideal = parse_ideal_source(&ideal, index);
            let s = cmd_domain(&DomainArgs { rep, space, ideal, theta, samples, flags, min_length, seed, out })?;
            eprintln!(
                "in {:.4}  out {:.4}  boundary {:.4}  (seed {})",
                s.in_fraction, s.out_fraction, s.boundary_fraction, s.seed
            );
        }
        Command::Check { fixtures, seed, out } => {
            let report = cmd_check(&CheckArgs { fixtures: fixtures.as_deref(), seed, out: out.as_deref() })?;
            eprintln!("{} checks passed (seed {})", report.results.len(), report.seed);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
