use crate::angle::parse_angle;
use crate::table::TableId;
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "capspec", version, about = "Solve for capillary generating curves with Chebyshev collocation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Disk-type interface in a tube of radius b.
    P1(DiskArgs),
    /// Annular interface between radii a and b.
    P2(WallArgs),
    /// Planar interface between walls at a and b.
    P3(WallArgs),
    /// Run one of the stored fixture tables.
    Table(TableArgs),
}

#[derive(Debug, Args)]
pub struct DiskArgs {
    #[arg(long)]
    pub b: f64,
    /// Inclination at the wall: radians, or forms like pi/2 and -3*pi/8.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_angle)]
    pub psib: f64,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct WallArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub a: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub b: f64,
    #[arg(long, allow_hyphen_values = true, value_parser = parse_angle)]
    pub psia: f64,
    #[arg(long, allow_hyphen_values = true, value_parser = parse_angle)]
    pub psib: f64,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    #[arg(long, default_value_t = 1.0)]
    pub kappa: f64,
    #[arg(long)]
    pub tol_newton: Option<f64>,
    #[arg(long)]
    pub tol_bvp: Option<f64>,
    #[arg(long)]
    pub n0: Option<usize>,
    #[arg(long)]
    pub max_iter_newton: Option<usize>,
    #[arg(long)]
    pub max_iter_bvp: Option<usize>,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Write the run as .json or the curve samples as .csv.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write an SVG plot of the curve.
    #[arg(long)]
    pub plot: Option<PathBuf>,
    /// Scale the plot axes independently.
    #[arg(long)]
    pub stretch: bool,
    /// Circle the lowest point of the curve in the plot.
    #[arg(long)]
    pub mark_min: bool,
    /// No summary on standard output.
    #[arg(long)]
    pub quiet: bool,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    #[arg(long, value_enum)]
    pub id: TableId,
    /// CSV destination; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads; CAPSPEC_JOBS takes precedence.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Directory for one SVG per converged row.
    #[arg(long)]
    pub plot_dir: Option<PathBuf>,
    #[arg(long)]
    pub quiet: bool,
}
