mod commands;
mod input;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use commands::{DecodeMode, ExponentVariant, Figure, RegionSetting};
use output::Artifact;
use univcode::infomeasure::Unit;
use univcode::regions::OptGrid;

#[derive(Debug)]
pub enum CliError {
    Lib(univcode::Error),
    Input(String),
    Io(String),
}

impl From<univcode::Error> for CliError {
    fn from(e: univcode::Error) -> Self {
        CliError::Lib(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Input(s) | CliError::Io(s) => f.write_str(s),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Lib(e) => e.exit_code() as u8,
            CliError::Input(_) | CliError::Io(_) => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum UnitArg {
    Bits,
    Nats,
}

#[derive(Parser)]
#[command(name = "univcode", version, about = "Universal c-q codes for compound broadcast and multiple access channels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Unit for every reported and accepted rate or information value.
    #[arg(long, value_enum, default_value = "bits", global = true)]
    unit: UnitArg,
    #[arg(long, default_value_t = 0, global = true)]
    seed: u64,
    /// Simplex grid resolution for region searches.
    #[arg(long, global = true)]
    grid_step: Option<f64>,
    /// Largest time-sharing alphabet.
    #[arg(long, global = true)]
    t_card: Option<usize>,
    /// Nelder-Mead iterations per local refinement (0 disables).
    #[arg(long, global = true)]
    refine: Option<usize>,
    /// Directory for CSV and SVG outputs; without it the CSV goes to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 1, global = true)]
    threads: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Information measures of one channel under an input law.
    Info {
        #[arg(long)]
        channel: String,
        #[arg(long)]
        dist: Option<String>,
        /// Comma-separated Renyi orders.
        #[arg(long, default_value = "")]
        alpha: String,
    },
    /// Rate-region vertices.
    Region {
        #[arg(long)]
        family: String,
        #[arg(long, value_enum)]
        setting: RegionSetting,
    },
    /// Error-exponent lower bounds with their term breakdown.
    Exponent {
        #[arg(long)]
        channel: String,
        #[arg(long)]
        dist: Option<String>,
        /// `R_A,R_B`.
        #[arg(long)]
        rates: String,
        /// `r_A,r_B`.
        #[arg(long, default_value = "0,0")]
        slacks: String,
        #[arg(long, value_enum)]
        variant: ExponentVariant,
    },
    /// Pack a codebook from a JSON configuration.
    Pack {
        #[arg(long)]
        config: String,
    },
    /// Exact decoding error of a packed code.
    Decode {
        #[arg(long)]
        channel: String,
        #[arg(long)]
        code: String,
        #[arg(long, value_enum, default_value = "joint")]
        mode: DecodeMode,
        /// Decoder threshold offsets `r_A,r_B` in nats.
        #[arg(long, default_value = "0.01,0.01", allow_hyphen_values = true)]
        slacks: String,
    },
    /// Data and plot for one of the worked figures.
    Paperfig {
        #[arg(long, value_enum)]
        figure: Figure,
        #[arg(long)]
        resolution: Option<usize>,
    },
}

/// Settings shared by every subcommand.
pub struct Common {
    pub unit: Unit,
    pub seed: u64,
    grid_step: Option<f64>,
    t_card: Option<usize>,
    refine: Option<usize>,
}

impl Common {
    pub fn grid(&self) -> Result<OptGrid, CliError> {
        let d = OptGrid::default();
        Ok(OptGrid::new(
            self.t_card.unwrap_or(d.t_card),
            self.grid_step.unwrap_or(d.simplex_step),
            self.refine.unwrap_or(d.refine_rounds),
        )?)
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if cli.threads == 0 {
        return Err(CliError::Input("--threads must be at least 1".into()));
    }
    let common = Common {
        unit: match cli.unit {
            UnitArg::Bits => Unit::Bits,
            UnitArg::Nats => Unit::Nats,
        },
        seed: cli.seed,
        grid_step: cli.grid_step,
        t_card: cli.t_card,
        refine: cli.refine,
    };
    let artifacts = match &cli.command {
        Command::Info { channel, dist, alpha } => commands::info(&common, channel, dist.as_deref(), alpha)?,
        Command::Region { family, setting } => commands::region(&common, family, *setting)?,
        Command::Exponent { channel, dist, rates, slacks, variant } => {
            commands::exponent(&common, channel, dist.as_deref(), rates, slacks, *variant)?
        }
        Command::Pack { config } => commands::pack(&common, config)?,
        Command::Decode { channel, code, mode, slacks } => commands::decode(channel, code, *mode, slacks)?,
        Command::Paperfig { figure, resolution } => commands::paperfig(&common, *figure, *resolution)?,
    };
    emit(&artifacts, cli.out.as_deref())
}

fn emit(artifacts: &[Artifact], out: Option<&std::path::Path>) -> Result<(), CliError> {
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
            for a in artifacts {
                let path = dir.join(&a.name);
                std::fs::write(&path, &a.contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            }
        }
        None => {
            if let Some(first) = artifacts.first() {
                print!("{}", first.contents);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
