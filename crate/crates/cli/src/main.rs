use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fluxcant::Error;
use fluxcant_cli::commands::{self, ReproduceArgs};
use fluxcant_cli::config::{self, OutputFormat, RunConfig};

#[derive(Parser)]
#[command(name = "fluxcant", version, about = "Flux-qubit-cantilever analysis tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON config file; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for data files. Nothing is written without it.
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    /// Data file format.
    #[arg(long, value_enum, global = true)]
    format: Option<OutputFormat>,
    /// Relative tolerance override for reference comparisons.
    #[arg(long, global = true)]
    tolerance: Option<f64>,
}

#[derive(Args)]
struct GridShape {
    /// Flux nodes.
    #[arg(long)]
    n_phi: Option<usize>,
    /// Angle nodes.
    #[arg(long)]
    n_theta: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Derived constants, landscape class, and normal modes of one well.
    Analyze {
        #[command(flatten)]
        common: Common,
    },
    /// Potential surface samples over the configured window.
    Grid {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        shape: GridShape,
        /// Contour levels recorded in the metadata.
        #[arg(long)]
        n_levels: Option<usize>,
    },
    /// Mode frequencies versus applied field.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Lowest field (T).
        #[arg(long)]
        b_min: Option<f64>,
        /// Highest field (T).
        #[arg(long)]
        b_max: Option<f64>,
        /// Number of settings.
        #[arg(long)]
        points: Option<usize>,
    },
    /// Entangled Gaussian ground state of one well.
    Groundstate {
        #[command(flatten)]
        common: Common,
        /// Half-width of the sampling window in standard deviations.
        #[arg(long)]
        local_margin: Option<f64>,
        /// Nodes per axis of the wavefunction sample.
        #[arg(long)]
        n_local: Option<usize>,
    },
    /// Tunnel splitting of a symmetric double well.
    Doublewell {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        shape: GridShape,
        /// Window half-width in standard deviations when no window is configured.
        #[arg(long)]
        margin: Option<f64>,
    },
    /// Lowest eigenstates of the full two-dimensional problem.
    Eigen {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        shape: GridShape,
        #[arg(long)]
        margin: Option<f64>,
        /// Number of states.
        #[arg(long)]
        states: Option<usize>,
    },
    /// Check the example device against the published values.
    ReproducePaper {
        #[command(flatten)]
        common: Common,
        /// Inductance override (H).
        #[arg(long)]
        inductance: Option<f64>,
        /// Machine-readable stdout.
        #[arg(long)]
        json: bool,
    },
}

fn load(common: &Common) -> Result<RunConfig, Error> {
    let mut cfg = config::load(common.config.as_deref())?;
    if let Some(f) = common.format {
        cfg.output_format = f;
    }
    Ok(cfg)
}

fn run() -> Result<ExitCode, Error> {
    match Cli::parse().command {
        Command::Analyze { common } => {
            let cfg = load(&common)?;
            commands::analyze(&cfg, common.output_dir.as_deref())
        }
        Command::Grid { common, shape, n_levels } => {
            let mut cfg = load(&common)?;
            if let Some(n) = shape.n_phi {
                cfg.n_phi = n;
            }
            if let Some(n) = shape.n_theta {
                cfg.n_theta = n;
            }
            if let Some(n) = n_levels {
                cfg.n_levels = n;
            }
            commands::grid(&cfg, common.output_dir.as_deref())
        }
        Command::Sweep { common, b_min, b_max, points } => {
            let mut cfg = load(&common)?;
            if let Some(b) = b_min {
                cfg.sweep.b_min = b;
            }
            if let Some(b) = b_max {
                cfg.sweep.b_max = b;
            }
            if let Some(p) = points {
                cfg.sweep.points = p;
            }
            commands::sweep(&cfg, common.output_dir.as_deref())
        }
        Command::Groundstate { common, local_margin, n_local } => {
            let mut cfg = load(&common)?;
            if let Some(m) = local_margin {
                cfg.local_margin = m;
            }
            if let Some(n) = n_local {
                cfg.n_local = n;
            }
            commands::groundstate(&cfg, common.output_dir.as_deref())
        }
        Command::Doublewell { common, shape, margin } => {
            let mut cfg = load(&common)?;
            if let Some(n) = shape.n_phi {
                cfg.n_phi = n;
            }
            if let Some(n) = shape.n_theta {
                cfg.n_theta = n;
            }
            if let Some(m) = margin {
                cfg.margin = m;
            }
            commands::doublewell(&cfg, common.output_dir.as_deref())
        }
        Command::Eigen { common, shape, margin, states } => {
            let mut cfg = load(&common)?;
            if let Some(n) = shape.n_phi {
                cfg.n_phi = n;
            }
            if let Some(n) = shape.n_theta {
                cfg.n_theta = n;
            }
            if let Some(m) = margin {
                cfg.margin = m;
            }
            if let Some(s) = states {
                cfg.n_states = s;
            }
            commands::eigen(&cfg, common.output_dir.as_deref())
        }
        Command::ReproducePaper { common, inductance, json } => {
            let cfg = load(&common)?;
            let args = ReproduceArgs { inductance, json, tolerance: common.tolerance };
            commands::reproduce(&args, common.output_dir.as_deref(), cfg.output_format)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::InvalidParameter(_) => 2,
                Error::Computation(_) => 3,
                Error::Io(_) => 4,
            })
        }
    }
}
