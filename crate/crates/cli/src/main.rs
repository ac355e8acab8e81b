//! Batch front end: loads domains and data, dispatches the solvers, and
//! writes fields, meshes, spectra and heatmaps.

mod io;
mod run;

use clap::{Args, Parser, Subcommand};
use std::process::ExitCode;

/// Discrete second-order smoothness energies on masked grids and triangle
/// meshes: the squared Hessian with natural boundary conditions and
/// squared-Laplacian variants.
#[derive(Parser)]
#[command(name = "hessmooth", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum EnergyArg {
    /// squared Hessian, natural boundary conditions
    Hessian,
    /// squared Laplacian with baked-in zero Neumann conditions
    LaplacianNeumann,
    /// squared Laplacian, natural boundary conditions
    LaplacianNatural,
    /// Crouzeix-Raviart comparison energy (meshes only)
    Cr,
    /// (1−α)·Laplacian + α·Hessian
    Blend,
}

#[derive(Args, Clone)]
pub struct DomainArgs {
    /// Triangle mesh (ASCII OFF or OBJ)
    #[arg(long, value_name = "PATH")]
    pub mesh: Option<String>,
    /// Grid mask image (PGM P2/P5); requires --h
    #[arg(long, value_name = "PATH", conflicts_with = "mesh")]
    pub grid: Option<String>,
    /// Grid spacing for --grid
    #[arg(long, value_name = "REAL")]
    pub h: Option<f64>,
    /// Mask threshold: pixels >= threshold belong to the domain
    #[arg(long, value_name = "INT", default_value_t = 128)]
    pub threshold: u8,
}

#[derive(Args, Clone)]
pub struct EnergyArgs {
    /// Smoothness energy to assemble
    #[arg(long, value_enum, default_value = "hessian")]
    pub energy: EnergyArg,
    /// Blend weight α ∈ [0,1] for --energy blend
    #[arg(long, value_name = "REAL", default_value_t = 1.0)]
    pub alpha: f64,
}

#[derive(Args, Clone)]
pub struct OutputArgs {
    /// Output directory (created if missing)
    #[arg(long, value_name = "DIR")]
    pub out: String,
    /// Fixed heatmap range instead of per-file min/max
    #[arg(long, value_names = ["LO", "HI"], num_args = 2, allow_negative_numbers = true)]
    pub range: Option<Vec<f64>>,
}

#[derive(Subcommand)]
enum Command {
    /// Interpolate scattered point values smoothly over the domain
    Interpolate {
        #[command(flatten)]
        domain: DomainArgs,
        #[command(flatten)]
        energy: EnergyArgs,
        /// Scattered constraints CSV (header `x,y[,z],value`)
        #[arg(long, value_name = "PATH")]
        constraints: String,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Smooth a dense per-node field against a smoothness energy
    Smooth {
        #[command(flatten)]
        domain: DomainArgs,
        #[command(flatten)]
        energy: EnergyArgs,
        /// Dense input field CSV (header `index,value`)
        #[arg(long, value_name = "PATH")]
        data: String,
        /// Smoothness-versus-data weight
        #[arg(long, value_name = "REAL", default_value_t = 1.0)]
        weight: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Lowest-frequency modes of the energy's generalized pencil
    Modes {
        #[command(flatten)]
        domain: DomainArgs,
        #[command(flatten)]
        energy: EnergyArgs,
        /// Number of modes
        #[arg(short, value_name = "INT", default_value_t = 6)]
        k: usize,
        /// Seed for the eigensolver's deterministic start
        #[arg(long, value_name = "INT", default_value_t = 17)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Per-handle subspace deformation weights
    Weights {
        #[command(flatten)]
        domain: DomainArgs,
        #[command(flatten)]
        energy: EnergyArgs,
        /// Handle locations CSV (header `x,y[,z],value`; values ignored)
        #[arg(long, value_name = "PATH")]
        handles: String,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// L1 (piecewise-planar) smoothing of a dense field
    L1 {
        #[command(flatten)]
        domain: DomainArgs,
        #[command(flatten)]
        energy: EnergyArgs,
        /// Dense input field CSV (header `index,value`)
        #[arg(long, value_name = "PATH")]
        data: String,
        /// Smoothness weight λ
        #[arg(long, value_name = "REAL", default_value_t = 1e-3)]
        lambda: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// L1 geometric flow of a 3D mesh's coordinate functions
    Flow {
        #[command(flatten)]
        domain: DomainArgs,
        #[command(flatten)]
        energy: EnergyArgs,
        /// Smoothness weight λ (implicit time step)
        #[arg(long, value_name = "REAL", default_value_t = 1e-3)]
        lambda: f64,
        /// Number of flow steps
        #[arg(long, value_name = "INT", default_value_t = 1)]
        steps: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Convergence study against the analytic radial annulus solution
    Annulus {
        /// Number of dyadic refinement levels
        #[arg(long, value_name = "INT", default_value_t = 3)]
        levels: usize,
        /// Inner radius
        #[arg(long, value_name = "REAL", default_value_t = 1.0)]
        r0: f64,
        /// Outer radius
        #[arg(long, value_name = "REAL", default_value_t = 2.0)]
        r1: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Interpolate { domain, energy, constraints, output } => {
            run::interpolate(&domain, &energy, &constraints, &output)
        }
        Command::Smooth { domain, energy, data, weight, output } => {
            run::smooth(&domain, &energy, &data, weight, &output)
        }
        Command::Modes { domain, energy, k, seed, output } => {
            run::modes(&domain, &energy, k, seed, &output)
        }
        Command::Weights { domain, energy, handles, output } => {
            run::weights(&domain, &energy, &handles, &output)
        }
        Command::L1 { domain, energy, data, lambda, output } => {
            run::l1(&domain, &energy, &data, lambda, &output)
        }
        Command::Flow { domain, energy, lambda, steps, output } => {
            run::flow(&domain, &energy, lambda, steps, &output)
        }
        Command::Annulus { levels, r0, r1, output } => run::annulus(levels, r0, r1, &output),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{err}");
            ExitCode::from(err.exit_code())
        }
    }
}

/// Uniform error-to-exit-code mapping: configuration and input problems
/// exit 2, solver failures 3, output I/O failures 4.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Solver(String),
    Output(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Output(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(msg) | CliError::Solver(msg) | CliError::Output(msg) => {
                write!(f, "{msg}")
            }
        }
    }
}
