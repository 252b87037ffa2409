use std::path::PathBuf;
use std::str::FromStr;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

/// Radial Neumann problems for the p-Laplacian by shooting in p-polar coordinates.
///
/// Exit status: 0 on success, 1 on a numerical failure, 2 on invalid input.
#[derive(Debug, Parser)]
#[command(name = "pneumann", version, about, long_about = None)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Relative tolerance of the integrator (absolute tolerance is 1e-2 of it, at least 1e-14)
    #[arg(long, global = true, default_value = "1e-10")]
    pub tol: f64,

    /// Startup radius at the origin [default: 1e-8·R]
    #[arg(long, global = true)]
    pub eps0: Option<f64>,

    /// Worker threads [default: available parallelism]
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Output file (for `solve`, a prefix for the summary and profile files) [default: stdout]
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Output format [default: json for scalar results, csv for tables]
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate cos_p and sin_p
    Ptrig(PtrigArgs),
    /// Radial Neumann eigenvalue λ_k
    Eigen(EigenArgs),
    /// One shot from u(0) = d; writes the trajectory
    Shoot(ShootArgs),
    /// All solutions with up to k zeros of u - 1
    Solve(SolveArgs),
    /// Sweep q (or the radius) and tabulate every solution found
    Branch(BranchArgs),
    /// Threshold radius R*(k) for C1 = 0 nonlinearities
    Rstar(RstarArgs),
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("what").required(true).args(["theta", "table"])))]
pub struct PtrigArgs {
    /// Exponent p > 1
    #[arg(long)]
    pub p: f64,
    /// Evaluate at one phase
    #[arg(long, allow_negative_numbers = true)]
    pub theta: Option<f64>,
    /// Tabulate n evenly spaced phases on [0, 2π_p]
    #[arg(long)]
    pub table: Option<usize>,
}

/// Exponent, dimension and domain, shared by most subcommands.
#[derive(Debug, Args)]
pub struct ProblemArgs {
    /// Exponent p > 1
    #[arg(long)]
    pub p: f64,
    /// Space dimension N
    #[arg(long, default_value_t = 1)]
    pub n: u32,
    /// Ball radius
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
    /// Annulus radii `R1,R2` (replaces --r)
    #[arg(long, value_parser = parse_pair)]
    pub annulus: Option<(f64, f64)>,
}

#[derive(Debug, Args)]
pub struct EigenArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Eigenvalue index k >= 1
    #[arg(long)]
    pub k: usize,
    /// JSON output (the default; same as --format json)
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct ShootArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Nonlinearity: `pow:<q>` or `combo:<q>,<r>`
    #[arg(long)]
    pub g: GSpec,
    /// Initial value u(0) = d, d >= 0, d != 1
    #[arg(long)]
    pub d: f64,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Nonlinearity: `pow:<q>` or `combo:<q>,<r>`
    #[arg(long)]
    pub g: GSpec,
    /// Largest zero count j of u - 1
    #[arg(long, default_value_t = 1)]
    pub max_zeros: usize,
    /// Which initial values to shoot from: lower (d < 1), upper (d > 1) or both
    #[arg(long, default_value = "lower")]
    pub sides: SidesArg,
    /// Number of scan shots per side
    #[arg(long, default_value_t = 2000)]
    pub grid: usize,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("range").required(true).args(["q_min", "r_min"])))]
pub struct BranchArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Nonlinearity family: `pow`, or `combo:<r>`; a `q` given here is ignored for q sweeps
    #[arg(long, default_value = "pow")]
    pub g: GSpec,
    /// Lower end of a q sweep
    #[arg(long, requires = "q_max")]
    pub q_min: Option<f64>,
    /// Upper end of a q sweep
    #[arg(long, requires = "q_min")]
    pub q_max: Option<f64>,
    /// Lower end of a radius sweep (q then comes from --g)
    #[arg(long, requires = "r_max", conflicts_with = "q_min")]
    pub r_min: Option<f64>,
    /// Upper end of a radius sweep
    #[arg(long, requires = "r_min")]
    pub r_max: Option<f64>,
    /// Number of parameter values, endpoints included
    #[arg(long, default_value_t = 20)]
    pub steps: usize,
    /// Largest zero count j of u - 1
    #[arg(long, default_value_t = 3)]
    pub max_zeros: usize,
    /// Which initial values to shoot from: lower, upper or both
    #[arg(long, default_value = "both")]
    pub sides: SidesArg,
    /// Number of scan shots per side
    #[arg(long, default_value_t = 2000)]
    pub grid: usize,
    /// Also draw the branches (param against d) into this SVG file
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RstarArgs {
    /// Exponent 1 < p < 2
    #[arg(long)]
    pub p: f64,
    /// Space dimension N
    #[arg(long, default_value_t = 1)]
    pub n: u32,
    /// Nonlinearity: `pow:<q>` or `combo:<q>,<r>`
    #[arg(long)]
    pub g: GSpec,
    /// Number k of required oscillations
    #[arg(long)]
    pub k: usize,
    /// Use an annulus with R1 = eps·R2 instead of a ball
    #[arg(long)]
    pub annulus_ratio: Option<f64>,
    /// Number of scan shots per predicate evaluation
    #[arg(long, default_value_t = 2000)]
    pub grid: usize,
}

/// A nonlinearity given on the command line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GSpec {
    Pow { q: Option<f64> },
    Combo { q: Option<f64>, r: f64 },
}

impl FromStr for GSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| format!("bad number {t:?} in --g: {e}"))
        };
        let (family, rest) = match s.split_once(':') {
            Some((f, rest)) => (f, Some(rest)),
            None => (s, None),
        };
        match (family, rest) {
            ("pow", None) => Ok(GSpec::Pow { q: None }),
            ("pow", Some(q)) => Ok(GSpec::Pow { q: Some(num(q)?) }),
            ("combo", Some(rest)) => match rest.split_once(',') {
                Some((q, r)) => Ok(GSpec::Combo {
                    q: Some(num(q)?),
                    r: num(r)?,
                }),
                None => Ok(GSpec::Combo {
                    q: None,
                    r: num(rest)?,
                }),
            },
            _ => Err(format!("expected pow:<q> or combo:<q>,<r>, got {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SidesArg(pub pneumann::solver::Sides);

impl FromStr for SidesArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        s.parse()
            .map(SidesArg)
            .map_err(|e: pneumann::Error| e.to_string())
    }
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected R1,R2, got {s:?}"))?;
    let a = a
        .trim()
        .parse::<f64>()
        .map_err(|e| format!("bad R1 {a:?}: {e}"))?;
    let b = b
        .trim()
        .parse::<f64>()
        .map_err(|e| format!("bad R2 {b:?}: {e}"))?;
    Ok((a, b))
}
