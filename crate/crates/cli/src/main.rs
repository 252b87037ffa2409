mod args;
mod output;
mod svg;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use serde_json::json;

use pneumann::branch::{branch_sweep, sweep_grid, SweepParam};
use pneumann::eigen::eigenvalue;
use pneumann::ptrig::PTrigContext;
use pneumann::radial::{shoot, Domain, NonlinearityKind, ProblemSpec, Trajectory};
use pneumann::solver::{find_solutions, rstar, SolverConfig};
use pneumann::Error;

use args::{
    BranchArgs, Cli, Command, EigenArgs, Format, GSpec, ProblemArgs, PtrigArgs, RstarArgs,
    ShootArgs, SolveArgs,
};
use output::{emit, num, Csv};

/// Why a command failed, mapped to the exit status.
enum Failure {
    /// Bad input: exit 2.
    Usage(String),
    /// The numerics gave up: exit 1.
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(_) | Error::InvalidConfig(_) | Error::DegenerateShot => {
                Failure::Usage(e.to_string())
            }
            Error::IntegrationFailure { .. }
            | Error::NonFinite { .. }
            | Error::NearConstantShot { .. }
            | Error::SearchFailure(_) => Failure::Numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Numerical(format!("i/o error: {e}"))
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("error")).init();
    // clap exits with status 2 on usage errors and 0 for --help/--version
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Outcome {
    if let Some(n) = cli.global.threads {
        if n == 0 {
            return Err(Failure::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(format!("cannot set up {n} threads: {e}")))?;
    }
    let tol = cli.global.tol;
    if !(1e-14..=1e-2).contains(&tol) {
        return Err(Failure::Usage(format!(
            "--tol must lie in [1e-14, 1e-2], got {tol}"
        )));
    }
    let cfg = SolverConfig {
        rel_tol: tol,
        abs_tol: (tol * 1e-2).max(1e-14),
        eps0: cli.global.eps0,
        ..Default::default()
    };
    let out = cli.global.out.as_deref();
    let format = cli.global.format;
    match cli.command {
        Command::Ptrig(a) => cmd_ptrig(a, out, format),
        Command::Eigen(a) => cmd_eigen(a, cfg, out, format),
        Command::Shoot(a) => cmd_shoot(a, cfg, out, format),
        Command::Solve(a) => cmd_solve(a, cfg, out, format),
        Command::Branch(a) => cmd_branch(a, cfg, out, format),
        Command::Rstar(a) => cmd_rstar(a, cfg, out, format),
    }
}

fn domain(p: &ProblemArgs) -> Result<Domain, Error> {
    match p.annulus {
        Some((r1, r2)) => Domain::annulus(r1, r2),
        None => Domain::ball(p.r),
    }
}

fn kind(g: GSpec, q_default: Option<f64>) -> Result<NonlinearityKind, Failure> {
    let need = |q: Option<f64>| {
        q.or(q_default)
            .ok_or_else(|| Failure::Usage("--g needs an exponent q, e.g. pow:5".into()))
    };
    Ok(match g {
        GSpec::Pow { q } => NonlinearityKind::PurePower { q: need(q)? },
        GSpec::Combo { q, r } => NonlinearityKind::PowerCombo {
            q: need(q)?,
            r_exp: r,
        },
    })
}

fn problem(p: &ProblemArgs, k: NonlinearityKind) -> Result<ProblemSpec, Failure> {
    Ok(ProblemSpec::new(p.p, p.n, domain(p)?, k)?)
}

fn with_grid(cfg: SolverConfig, grid: usize) -> Result<SolverConfig, Failure> {
    let cfg = SolverConfig {
        d_grid_size: grid,
        ..cfg
    };
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_ptrig(a: PtrigArgs, out: Option<&Path>, format: Option<Format>) -> Outcome {
    let ctx = PTrigContext::new(a.p)?;
    let thetas: Vec<f64> = match (a.theta, a.table) {
        (Some(t), _) => vec![t],
        (None, Some(n)) if n >= 2 => {
            let span = 2.0 * ctx.pi_p();
            (0..n)
                .map(|i| {
                    if i + 1 == n {
                        span
                    } else {
                        span * i as f64 / (n - 1) as f64
                    }
                })
                .collect()
        }
        (None, Some(n)) => {
            return Err(Failure::Usage(format!(
                "--table needs at least 2 rows, got {n}"
            )))
        }
        (None, None) => unreachable!("clap requires --theta or --table"),
    };
    let rows = thetas
        .iter()
        .map(|&t| ctx.ptrig_pair(t).map(|(c, s)| (t, c, s)))
        .collect::<Result<Vec<_>, _>>()?;
    let text = match format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut csv = Csv::new(&["theta", "cos_p", "sin_p"]);
            for (t, c, s) in rows {
                csv.nums(&[t, c, s]);
            }
            csv.into_string()
        }
        Format::Json => output::json(
            &rows
                .iter()
                .map(|&(t, c, s)| json!({"theta": t, "cos_p": c, "sin_p": s}))
                .collect::<Vec<_>>(),
        ),
    };
    Ok(emit(&text, out)?)
}

fn cmd_eigen(
    a: EigenArgs,
    cfg: SolverConfig,
    out: Option<&Path>,
    format: Option<Format>,
) -> Outcome {
    // the nonlinearity plays no role in the eigenvalue problem
    let spec = problem(
        &a.problem,
        NonlinearityKind::PurePower {
            q: a.problem.p + 1.0,
        },
    )?;
    let res = eigenvalue(a.k, &spec, &cfg)?;
    let format = if a.json {
        Format::Json
    } else {
        format.unwrap_or(Format::Json)
    };
    let text = match format {
        Format::Json => output::json(&res),
        Format::Csv => {
            let mut csv = Csv::new(&["k", "lambda", "residual"]);
            csv.row([res.k.to_string(), num(res.lambda), num(res.angle_residual)]);
            csv.into_string()
        }
    };
    Ok(emit(&text, out)?)
}

fn trajectory_csv(t: &Trajectory) -> String {
    let mut csv = Csv::new(&["r", "u", "v", "theta", "rho_sq"]);
    for i in 0..t.len() {
        csv.nums(&[t.r[i], t.u[i], t.v[i], t.theta[i], t.rho_sq[i]]);
    }
    csv.into_string()
}

fn cmd_shoot(
    a: ShootArgs,
    cfg: SolverConfig,
    out: Option<&Path>,
    format: Option<Format>,
) -> Outcome {
    let spec = problem(&a.problem, kind(a.g, None)?)?;
    let (traj, summary) = shoot(a.d, &spec, &cfg)?;
    let text = match format.unwrap_or(Format::Csv) {
        Format::Csv => trajectory_csv(&traj),
        Format::Json => output::json(&summary),
    };
    Ok(emit(&text, out)?)
}

fn cmd_solve(
    a: SolveArgs,
    cfg: SolverConfig,
    out: Option<&Path>,
    format: Option<Format>,
) -> Outcome {
    let spec = problem(&a.problem, kind(a.g, None)?)?;
    let cfg = with_grid(cfg, a.grid)?;
    let recs = find_solutions(&spec, &cfg, a.max_zeros, a.sides.0)?;
    let text = match format.unwrap_or(Format::Json) {
        Format::Json => output::json(&recs),
        Format::Csv => {
            let mut csv = Csv::new(&["d", "j", "side", "theta_end", "v_end"]);
            for r in &recs {
                csv.row([
                    num(r.d_root),
                    r.j.to_string(),
                    r.side.to_string(),
                    num(r.theta_end),
                    num(r.v_end),
                ]);
            }
            csv.into_string()
        }
    };
    match out {
        None => emit(&text, None)?,
        Some(prefix) => {
            let ext = if format == Some(Format::Csv) {
                "csv"
            } else {
                "json"
            };
            emit(&text, Some(&suffixed(prefix, &format!(".{ext}"))))?;
            for (i, r) in recs.iter().enumerate() {
                let name = format!("_{i}_j{}_{}.csv", r.j, r.side);
                emit(&trajectory_csv(&r.profile), Some(&suffixed(prefix, &name)))?;
            }
        }
    }
    Ok(())
}

fn suffixed(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn cmd_branch(
    a: BranchArgs,
    cfg: SolverConfig,
    out: Option<&Path>,
    format: Option<Format>,
) -> Outcome {
    let cfg = with_grid(cfg, a.grid)?;
    let (param, lo, hi) = match (a.q_min, a.q_max, a.r_min, a.r_max) {
        (Some(lo), Some(hi), None, None) => (SweepParam::Q, lo, hi),
        (None, None, Some(lo), Some(hi)) => (SweepParam::R, lo, hi),
        _ => {
            return Err(Failure::Usage(
                "give either --q-min/--q-max or --r-min/--r-max".into(),
            ))
        }
    };
    let q_default = match param {
        SweepParam::Q => Some(lo),
        SweepParam::R => None,
    };
    let template = problem(&a.problem, kind(a.g, q_default)?)?;
    let grid = sweep_grid(lo, hi, a.steps)?;
    let table = branch_sweep(&template, param, &grid, &cfg, a.max_zeros, a.sides.0)?;
    let text = match format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut csv = Csv::new(&["param", "d", "j", "side", "theta_end"]);
            for r in &table.rows {
                csv.row([
                    num(r.param),
                    num(r.d),
                    r.j.to_string(),
                    r.side.to_string(),
                    num(r.theta_end),
                ]);
            }
            csv.into_string()
        }
        Format::Json => output::json(&json!({
            "param": table.param,
            "grid": table.grid,
            "rows": table.rows,
            "folds": table.folds(),
        })),
    };
    emit(&text, out)?;
    if let Some(path) = &a.svg {
        emit(&svg::render(&table), Some(path))?;
    }
    Ok(())
}

fn cmd_rstar(
    a: RstarArgs,
    cfg: SolverConfig,
    out: Option<&Path>,
    format: Option<Format>,
) -> Outcome {
    let cfg = with_grid(cfg, a.grid)?;
    let domain = match a.annulus_ratio {
        Some(eps) if eps > 0.0 && eps < 1.0 => Domain::annulus(eps, 1.0)?,
        Some(eps) => {
            return Err(Failure::Usage(format!(
                "--annulus-ratio must lie in (0, 1), got {eps}"
            )))
        }
        None => Domain::ball(1.0)?,
    };
    let spec = ProblemSpec::new(a.p, a.n, domain, kind(a.g, None)?)?;
    let r = rstar(&spec, &cfg, a.k)?;
    let text = match format.unwrap_or(Format::Json) {
        Format::Json => output::json(&json!({"k": a.k, "rstar": r})),
        Format::Csv => {
            let mut csv = Csv::new(&["k", "rstar"]);
            csv.row([a.k.to_string(), num(r)]);
            csv.into_string()
        }
    };
    Ok(emit(&text, out)?)
}
