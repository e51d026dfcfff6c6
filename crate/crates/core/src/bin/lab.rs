use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use fourier_lab::construction::Side;
use fourier_lab::fourier::FrequencyGrid;
use fourier_lab::harness::{
    self, Builtin, ConstructConfig, DecayConfig, DecaySource, LemmaConfig, Run, SpecSource,
};
use fourier_lab::lemma::DEFAULT_ROTATIONS;
use fourier_lab::oracle::OracleConfig;

#[derive(Parser)]
#[command(name = "lab", version, about = "Fourier decay and digit-block experiments")]
struct Cli {
    /// Directory for output files.
    #[arg(long, global = true, default_value = "lab-out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Minimax sup |mu^(j)| over measures on [eps, 1] against the lower bound.
    Lemma {
        /// Comma-separated eps values in (0, 1]; empty for none.
        #[arg(long, default_value = "0.25,0.5,1")]
        eps: String,
        #[arg(long, default_value_t = 256)]
        grid: usize,
        #[arg(long, default_value_t = 256)]
        jmax: usize,
        #[arg(long, default_value_t = DEFAULT_ROTATIONS)]
        rotations: usize,
    },
    /// Build the digit-block sets and run both branches at every stage.
    Construct {
        /// Spec file, or `default`.
        #[arg(long, default_value = "default")]
        spec: String,
        #[arg(long, value_enum, default_value_t = SideArg::A)]
        side: SideArg,
        /// Cross-check stage masses against independent computations.
        #[arg(long)]
        oracle: bool,
        #[arg(long, default_value_t = 256)]
        r_max: u64,
    },
    /// Fit the decay rate of |mu^| over dyadic frequency bands.
    Decay {
        #[arg(long, conflicts_with = "measure", required_unless_present = "measure")]
        builtin: Option<String>,
        /// JSON measure file.
        #[arg(long)]
        measure: Option<PathBuf>,
        #[arg(long, default_value_t = 65536)]
        jmax: u64,
        #[arg(long, value_enum)]
        grid: Option<GridArg>,
    },
    /// Run every reference check.
    Oracle {
        #[arg(long, default_value_t = 2024)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SideArg {
    A,
    B,
}

#[derive(Clone, Copy, ValueEnum)]
enum GridArg {
    Integer,
    HalfInteger,
}

fn parse_list(s: &str) -> fourier_lab::Result<Vec<f64>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| fourier_lab::Error::InvalidArgument(format!("not a number: {t:?}"))))
        .collect()
}

fn run(cli: Cli) -> fourier_lab::Result<Run> {
    harness::init_threads()?;
    match cli.command {
        Command::Lemma { eps, grid, jmax, rotations } => {
            let eps = parse_list(&eps)?;
            harness::cmd_lemma(&LemmaConfig { eps, grid, j_max: jmax, rotations, out_dir: cli.out })
        }
        Command::Construct { spec, side, oracle, r_max } => {
            let spec = if spec == "default" { SpecSource::Default } else { SpecSource::File(spec.into()) };
            let side = match side {
                SideArg::A => Side::A,
                SideArg::B => Side::B,
            };
            harness::cmd_construct(&ConstructConfig { spec, side, oracle, r_max, out_dir: cli.out })
        }
        Command::Decay { builtin, measure, jmax, grid } => {
            let source = match (builtin, measure) {
                (Some(b), _) => DecaySource::Builtin(Builtin::parse(&b)?),
                (None, Some(p)) => DecaySource::File(p),
                (None, None) => unreachable!("clap requires one of --builtin and --measure"),
            };
            let grid = grid.map(|g| match g {
                GridArg::Integer => FrequencyGrid::Integer,
                GridArg::HalfInteger => FrequencyGrid::HalfInteger,
            });
            harness::cmd_decay(&DecayConfig { source, j_max: jmax, grid, out_dir: cli.out })
        }
        Command::Oracle { seed } => {
            harness::cmd_oracle(&OracleConfig { seed, ..OracleConfig::default() }, Some(&cli.out))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(r) => {
            // A closed pipe (`lab ... | head`) is not an error.
            let mut out = std::io::stdout().lock();
            let _ = write!(out, "{}", r.report);
            for f in &r.files {
                let _ = writeln!(out, "wrote {}", f.display());
            }
            ExitCode::from(r.outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
