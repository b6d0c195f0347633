//! Command-line front end for `pm4dof`.
//!
//! Exit codes: 0 success, 1 configuration or usage error, 2 unreachable or
//! degenerate pose, 3 forward kinematics did not converge, 4 a simulation
//! reference could not be resolved.

pub mod commands;
pub mod config;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::TrajectoryKindName;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_UNREACHABLE: i32 = 2;
pub const EXIT_NO_CONVERGENCE: i32 = 3;
pub const EXIT_REFERENCE: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Usage(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Core(#[from] pm4dof::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use pm4dof::Error as E;
        match self {
            CliError::Config(_) | CliError::Usage(_) | CliError::Io(_) => EXIT_CONFIG,
            CliError::Core(e) => match e {
                E::DegeneratePose | E::UnreachablePose { .. } | E::UJointSingular { .. } => EXIT_UNREACHABLE,
                E::NonConvergence { .. } | E::SingularJacobian { .. } => EXIT_NO_CONVERGENCE,
                E::UnreachableReference { .. } => EXIT_REFERENCE,
                E::EmptyLog | E::DegenerateSignal | E::InvalidParameter(_) => EXIT_CONFIG,
            },
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "pm4dof", version, about = "Kinematics and joint-space control of a 3UPS+RPU parallel manipulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Inverse kinematics of one pose.
    Ik(IkArgs),
    /// Forward kinematics from the four actuator lengths.
    Fk(FkArgs),
    /// Closed-loop tracking simulation written to CSV.
    Simulate(SimulateArgs),
    /// Reachability and Jacobian conditioning over a pose grid.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct IkArgs {
    /// Platform x (m).
    #[arg(long, allow_hyphen_values = true)]
    pub x: f64,
    /// Platform z (m).
    #[arg(long, allow_hyphen_values = true)]
    pub z: f64,
    /// Pitch (deg).
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub theta: f64,
    /// Yaw (deg).
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub psi: f64,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FkArgs {
    /// Actuator lengths q13 q23 q33 q42 (m).
    #[arg(num_args = 4, required = true, value_names = ["Q13", "Q23", "Q33", "Q42"])]
    pub lengths: Vec<f64>,
    /// Initial guess x (m); defaults to the configured guess.
    #[arg(long, allow_hyphen_values = true)]
    pub guess_x: Option<f64>,
    /// Initial guess z (m).
    #[arg(long, allow_hyphen_values = true)]
    pub guess_z: Option<f64>,
    /// Initial guess pitch (deg).
    #[arg(long, allow_hyphen_values = true)]
    pub guess_theta: Option<f64>,
    /// Initial guess yaw (deg).
    #[arg(long, allow_hyphen_values = true)]
    pub guess_psi: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Also solve the full closure system and report the agreement.
    #[arg(long)]
    pub oracle: bool,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Trajectory; defaults to `trajectory.kind` from the config.
    #[arg(long, value_enum)]
    pub traj: Option<TrajectoryKindName>,
    /// Overrides `trajectory.duration` (s).
    #[arg(long)]
    pub duration: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// `min,max,count` in m.
    #[arg(long, default_value = "-0.1,0.1,5", allow_hyphen_values = true)]
    pub x: String,
    /// `min,max,count` in m.
    #[arg(long, default_value = "0.55,0.80,5", allow_hyphen_values = true)]
    pub z: String,
    /// `min,max,count` in deg.
    #[arg(long, default_value = "-20,20,3", allow_hyphen_values = true)]
    pub theta: String,
    /// `min,max,count` in deg.
    #[arg(long, default_value = "-20,20,3", allow_hyphen_values = true)]
    pub psi: String,
    /// CSV destination; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code. Reports go to `out`, diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            return code;
        }
    };
    let result = match cli.command {
        Command::Ik(a) => commands::ik(&a, out),
        Command::Fk(a) => commands::fk(&a, out),
        Command::Simulate(a) => commands::simulate(&a, out),
        Command::Sweep(a) => commands::sweep(&a, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = match &e {
                CliError::Core(pm4dof::Error::SingularJacobian { .. }) => writeln!(err, "error: no convergence: {e}"),
                _ => writeln!(err, "error: {e}"),
            };
            e.exit_code()
        }
    }
}
