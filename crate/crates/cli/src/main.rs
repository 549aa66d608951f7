//! `slotcav` command-line tool.
//!
//! Every computing subcommand reads a TOML run config and emits a JSON
//! envelope or a CSV table. Failures print a JSON error record on stderr.
//! `SLOTCAV_THREADS` sets the worker-thread count of parallel sweeps.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use slotcav::geometry::GridSpec;
use slotcav::runner::{reproduce_figure, run, Command, Figure, Format, Output, ResultEnvelope, RunConfig, RunError};

const SCHEMA: &str = include_str!("../../../docs/config.schema.json");

#[derive(Parser)]
#[command(name = "slotcav", version, about = "Coupling rates and design inversion for slot-waveguide cavity arrays")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(clap::Args)]
struct Io {
    /// Run config (TOML)
    config: PathBuf,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(clap::Args)]
struct OutArgs {
    /// Write here instead of the config's output path (or stdout)
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(short, long, value_enum)]
    format: Option<Fmt>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Fmt {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Fig {
    Fig3,
    Fig7a,
    Fig7b,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run whatever command the config names
    Run(Io),
    /// Guided quasi-TE modes of a cross-section
    Modes(Io),
    /// Lateral and end-to-end hopping rates
    Couple(Io),
    /// Coupling matrix from supermodes, or tight-binding analysis of a matrix file
    Nacmt(Io),
    /// Bragg-grating reflection spectra
    Dbr(Io),
    /// Mode volume and single-photon Rabi frequency
    Modevol(Io),
    /// Separation and period count for a target hopping rate
    Design(Io),
    /// Data table behind one of the reference figures
    Figure {
        #[arg(value_enum)]
        name: Fig,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Rasterized refractive-index map of the config's structure as CSV
    Index {
        config: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Print the JSON schema of run configs
    Schema,
}

fn exit_code(e: &RunError) -> u8 {
    match e {
        RunError::Schema { .. } => 2,
        RunError::Io { .. } => 3,
        RunError::Compute { .. } => 4,
    }
}

fn configure_threads() -> Result<(), RunError> {
    let Ok(v) = std::env::var("SLOTCAV_THREADS") else { return Ok(()) };
    let n: usize = v
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| RunError::Schema { field: "SLOTCAV_THREADS".into(), reason: format!("`{v}` is not a positive integer") })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| RunError::Compute { stage: "threads".into(), message: e.to_string() })
}

fn write_text(path: Option<&Path>, text: &str) -> Result<(), RunError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| RunError::Io { path: p.display().to_string(), reason: e.to_string() }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit(env: &ResultEnvelope, out: &OutArgs, configured: Option<&Output>) -> Result<(), RunError> {
    let format = match out.format {
        Some(Fmt::Json) => Format::Json,
        Some(Fmt::Csv) => Format::Csv,
        None => configured.map_or(Format::Json, |o| o.format),
    };
    match (&out.output, configured) {
        (Some(path), _) => env.write(&Output { path: path.clone(), format }),
        // already written by `run`, unless the format was overridden
        (None, Some(o)) if o.format == format => Ok(()),
        (None, Some(o)) => env.write(&Output { path: o.path.clone(), format }),
        (None, None) => write_text(None, &env.render(format)),
    }
}

fn execute(io: &Io, command: Option<Command>) -> Result<(), RunError> {
    let cfg = RunConfig::from_file(&io.config, command)?;
    let env = run(&cfg)?;
    emit(&env, &io.out, cfg.output.as_ref())
}

fn dispatch(cli: Cli) -> Result<(), RunError> {
    configure_threads()?;
    match cli.cmd {
        Cmd::Run(io) => execute(&io, None),
        Cmd::Modes(io) => execute(&io, Some(Command::Modes)),
        Cmd::Couple(io) => execute(&io, Some(Command::Couple)),
        Cmd::Nacmt(io) => execute(&io, Some(Command::Nacmt)),
        Cmd::Dbr(io) => execute(&io, Some(Command::Dbr)),
        Cmd::Modevol(io) => execute(&io, Some(Command::Modevol)),
        Cmd::Design(io) => execute(&io, Some(Command::Design)),
        Cmd::Figure { name, out } => {
            let fig = match name {
                Fig::Fig3 => Figure::Fig3,
                Fig::Fig7a => Figure::Fig7a,
                Fig::Fig7b => Figure::Fig7b,
            };
            emit(&reproduce_figure(fig)?, &out, None)
        }
        Cmd::Index { config, output } => {
            let cfg = RunConfig::from_file(&config, None)?;
            let spec = cfg
                .structure
                .as_ref()
                .ok_or_else(|| RunError::Schema { field: "structure".into(), reason: "required by `index`".into() })?;
            let grid: GridSpec = cfg.grid;
            let map = grid.cross_section(spec).map_err(RunError::from)?;
            write_text(output.as_deref(), &map.to_csv())
        }
        Cmd::Schema => write_text(None, SCHEMA),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.record());
            ExitCode::from(exit_code(&e))
        }
    }
}
