//! Root finding in the shooting parameter `d`.
//!
//! A shot from `d < 1` starts at phase `π_p`; it is a Neumann solution with
//! `j` zeros of `u - 1` exactly when `Θ(d) = (j + 1)π_p`. A shot from `d > 1`
//! starts at phase `0` and the same solution class corresponds to
//! `Θ(d) = j π_p`. `Θ` is continuous but not monotone in `d` (it folds when
//! `p < 2`), so every level is bracketed on a grid and all brackets are kept.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::odeint::{DEFAULT_ABS_TOL, DEFAULT_MAX_STEPS, DEFAULT_REL_TOL};
use crate::radial::{shoot, shoot_summary, shot_phase, ProblemSpec, ShotSummary, Trajectory};

/// Numerical knobs shared by the shooting, eigenvalue and branch routines.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverConfig {
    /// Number of shots in a scan of one side.
    pub d_grid_size: usize,
    /// Scan bounds for shots below the constant solution.
    pub d_min: f64,
    pub d_max: f64,
    /// Scan bounds for shots above the constant solution.
    pub upper_d_min: f64,
    pub upper_d_max: f64,
    /// Fraction of grid nodes spaced geometrically in `|d - 1|`.
    pub refine_near_one: f64,
    pub bisect_tol_d: f64,
    /// Accepted `|v(R)|` relative to `max |v|` along the profile.
    pub residual_tol: f64,
    /// Startup radius for balls; `None` means `1e-8 · R`.
    pub eps0: Option<f64>,
    /// Floor on `ρ²/ρ²(start)` below which a shot is abandoned.
    pub rho_floor: f64,
    /// Phase tolerance as a multiple of `π_p`.
    pub phase_tol_factor: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
    /// Eigenvalue bisection stops at this relative width ...
    pub lambda_rel_tol: f64,
    /// ... or after this many halvings.
    pub lambda_max_iter: usize,
    /// Eigenvalue bracket search gives up above `lambda_max_factor · R^{-p}`.
    pub lambda_max_factor: f64,
    /// Relative tolerance of the threshold-radius and onset bisections.
    pub param_rel_tol: f64,
    /// Largest radius tried by [`rstar`].
    pub r_cap: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            d_grid_size: 2000,
            d_min: 1e-4,
            d_max: 1.0 - 1e-6,
            upper_d_min: 1.0 + 1e-6,
            upper_d_max: 50.0,
            refine_near_one: 0.5,
            bisect_tol_d: 1e-12,
            residual_tol: 1e-7,
            eps0: None,
            rho_floor: 1e-12,
            phase_tol_factor: 1e-8,
            rel_tol: DEFAULT_REL_TOL,
            abs_tol: DEFAULT_ABS_TOL,
            max_steps: DEFAULT_MAX_STEPS,
            lambda_rel_tol: 1e-10,
            lambda_max_iter: 200,
            lambda_max_factor: 1e8,
            param_rel_tol: 1e-3,
            r_cap: 1e4,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.d_grid_size < 2 {
            return bad(format!(
                "d_grid_size must be at least 2, got {}",
                self.d_grid_size
            ));
        }
        if !(0.0 < self.d_min && self.d_min < self.d_max && self.d_max < 1.0) {
            return bad(format!(
                "need 0 < d_min < d_max < 1, got [{}, {}]",
                self.d_min, self.d_max
            ));
        }
        if !(1.0 < self.upper_d_min
            && self.upper_d_min < self.upper_d_max
            && self.upper_d_max.is_finite())
        {
            return bad(format!(
                "need 1 < upper_d_min < upper_d_max, got [{}, {}]",
                self.upper_d_min, self.upper_d_max
            ));
        }
        if !(0.0..=1.0).contains(&self.refine_near_one) {
            return bad(format!(
                "refine_near_one must lie in [0, 1], got {}",
                self.refine_near_one
            ));
        }
        let spacing = (self.d_max - self.d_min) / self.d_grid_size as f64;
        if !(self.bisect_tol_d > 0.0 && self.bisect_tol_d < spacing) {
            return bad(format!(
                "bisect_tol_d = {:e} must be positive and below the grid spacing {spacing:e}",
                self.bisect_tol_d
            ));
        }
        if !(self.residual_tol > 0.0 && self.rho_floor > 0.0 && self.phase_tol_factor > 0.0) {
            return bad("residual_tol, rho_floor and phase_tol_factor must be positive".into());
        }
        if let Some(eps0) = self.eps0 {
            if eps0.is_nan() || eps0 <= 0.0 {
                return bad(format!("eps0 must be positive, got {eps0}"));
            }
        }
        if !(self.param_rel_tol > 0.0 && self.lambda_rel_tol > 0.0 && self.r_cap > 0.0) {
            return bad("search tolerances and r_cap must be positive".into());
        }
        Ok(())
    }

    /// The same configuration with integrator tolerances divided by `factor`.
    pub fn tightened(&self, factor: f64) -> Self {
        Self {
            rel_tol: self.rel_tol / factor,
            abs_tol: self.abs_tol / factor,
            ..self.clone()
        }
    }
}

/// Which initial values to shoot from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// `d < 1`, phase starts at `π_p`.
    Lower,
    /// `d > 1`, phase starts at `0`.
    Upper,
}

impl Side {
    /// Terminal phase of a solution with `j` zeros of `u - 1`.
    pub fn target_phase(self, j: usize, pi_p: f64) -> f64 {
        match self {
            Side::Lower => (j + 1) as f64 * pi_p,
            Side::Upper => j as f64 * pi_p,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Side::Lower => "lower",
            Side::Upper => "upper",
        }
    }
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lower" => Ok(Side::Lower),
            "upper" => Ok(Side::Upper),
            _ => Err(Error::Domain(format!("unknown side {s:?}"))),
        }
    }
}

/// A set of sides, parsed from `lower`, `upper` or `both`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Sides {
    pub lower: bool,
    pub upper: bool,
}

impl Sides {
    pub const LOWER: Sides = Sides {
        lower: true,
        upper: false,
    };
    pub const UPPER: Sides = Sides {
        lower: false,
        upper: true,
    };
    pub const BOTH: Sides = Sides {
        lower: true,
        upper: true,
    };

    pub fn iter(self) -> impl Iterator<Item = Side> {
        [(self.lower, Side::Lower), (self.upper, Side::Upper)]
            .into_iter()
            .filter_map(|(on, s)| on.then_some(s))
    }
}

impl std::str::FromStr for Sides {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lower" => Ok(Sides::LOWER),
            "upper" => Ok(Sides::UPPER),
            "both" => Ok(Sides::BOTH),
            _ => Err(Error::Domain(format!(
                "sides must be lower, upper or both, got {s:?}"
            ))),
        }
    }
}

/// One validated Neumann solution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolutionRecord {
    #[serde(rename = "d")]
    pub d_root: f64,
    pub side: Side,
    pub j: usize,
    pub theta_end: f64,
    pub v_end: f64,
    #[serde(skip)]
    pub profile: Trajectory,
    #[serde(skip)]
    pub summary: ShotSummary,
}

/// Scan grid for one side: uniform nodes merged with nodes geometric in `|d - 1|`.
pub fn d_grid(side: Side, cfg: &SolverConfig) -> Vec<f64> {
    let n = cfg.d_grid_size;
    let n_geo = ((cfg.refine_near_one * n as f64).round() as usize).min(n);
    let n_uni = n - n_geo;
    let (a, b) = match side {
        Side::Lower => (cfg.d_min, cfg.d_max),
        Side::Upper => (cfg.upper_d_min, cfg.upper_d_max),
    };
    let mut grid = Vec::with_capacity(n);
    let lin = |k: usize, m: usize| {
        if m == 1 {
            0.0
        } else {
            k as f64 / (m - 1) as f64
        }
    };
    for k in 0..n_uni {
        grid.push(a + (b - a) * lin(k, n_uni));
    }
    let (near, far) = (
        (a - 1.0).abs().min((b - 1.0).abs()),
        (a - 1.0).abs().max((b - 1.0).abs()),
    );
    let (far_end, near_end) = match side {
        Side::Lower => (a, b),
        Side::Upper => (b, a),
    };
    for k in 0..n_geo {
        let d = if k == 0 {
            far_end
        } else if k + 1 == n_geo {
            near_end
        } else {
            let delta = far * (near / far).powf(lin(k, n_geo));
            match side {
                Side::Lower => 1.0 - delta,
                Side::Upper => 1.0 + delta,
            }
        };
        grid.push(d);
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

/// `Θ(d)` sampled on the scan grid of one side. Failed shots are skipped.
pub fn theta_scan(spec: &ProblemSpec, cfg: &SolverConfig, side: Side) -> Result<Vec<(f64, f64)>> {
    theta_scan_capped(spec, cfg, side, None)
}

/// [`theta_scan`] with shots stopped once their phase reaches `cap`; values
/// at or above `cap` are then lower bounds for `Θ`.
pub fn theta_scan_capped(
    spec: &ProblemSpec,
    cfg: &SolverConfig,
    side: Side,
    cap: Option<f64>,
) -> Result<Vec<(f64, f64)>> {
    cfg.validate()?;
    let grid = d_grid(side, cfg);
    let shots: Vec<(f64, Result<f64>)> = grid
        .par_iter()
        .map(|&d| (d, shot_phase(d, spec, cfg, cap)))
        .collect();
    let mut out = Vec::with_capacity(shots.len());
    for (d, res) in shots {
        match res {
            Ok(theta) => out.push((d, theta)),
            Err(e) => log::warn!("scan shot d = {d} skipped: {e}"),
        }
    }
    Ok(out)
}

/// Every solution with `1..=max_zeros` zeros of `u - 1` on the requested sides.
pub fn find_solutions(
    spec: &ProblemSpec,
    cfg: &SolverConfig,
    max_zeros: usize,
    sides: Sides,
) -> Result<Vec<SolutionRecord>> {
    find_solutions_at_levels(spec, cfg, &(1..=max_zeros).collect::<Vec<_>>(), sides)
}

/// [`find_solutions`] restricted to the listed zero counts.
pub fn find_solutions_at_levels(
    spec: &ProblemSpec,
    cfg: &SolverConfig,
    levels: &[usize],
    sides: Sides,
) -> Result<Vec<SolutionRecord>> {
    if levels.contains(&0) {
        return Err(Error::Domain("zero counts start at 1".into()));
    }
    let pi_p = spec.pi_p();
    let mut brackets = Vec::new();
    for side in sides.iter() {
        let top = levels
            .iter()
            .map(|&j| side.target_phase(j, pi_p))
            .fold(0.0, f64::max);
        let scan = theta_scan_capped(spec, cfg, side, Some(top + pi_p))?;
        for &j in levels {
            let target = side.target_phase(j, pi_p);
            for w in scan.windows(2) {
                let (ga, gb) = (w[0].1 - target, w[1].1 - target);
                if (ga < 0.0 && gb >= 0.0) || (ga > 0.0 && gb <= 0.0) {
                    brackets.push((side, j, w[0].0, w[1].0, ga));
                }
            }
        }
    }
    let found: Vec<Option<SolutionRecord>> = brackets
        .par_iter()
        .map(
            |&(side, j, a, b, ga)| match refine_root(spec, cfg, side, j, a, b, ga) {
                Ok(rec) => rec,
                Err(e) => {
                    log::warn!("{side} root for j = {j} in [{a}, {b}] lost: {e}");
                    None
                }
            },
        )
        .collect();
    let mut records: Vec<SolutionRecord> = found.into_iter().flatten().collect();
    records.sort_by(|x, y| {
        (x.j, x.side)
            .cmp(&(y.j, y.side))
            .then(x.d_root.total_cmp(&y.d_root))
    });
    Ok(records)
}

fn refine_root(
    spec: &ProblemSpec,
    cfg: &SolverConfig,
    side: Side,
    j: usize,
    mut a: f64,
    mut b: f64,
    mut ga: f64,
) -> Result<Option<SolutionRecord>> {
    let target = side.target_phase(j, spec.pi_p());
    let phase_tol = cfg.phase_tol_factor * spec.pi_p();
    let mut best = (f64::INFINITY, a);
    loop {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let gm = shoot_summary(mid, spec, cfg)?.theta_end - target;
        if gm.abs() < best.0 {
            best = (gm.abs(), mid);
        }
        if gm == 0.0 {
            break;
        }
        if (gm < 0.0) == (ga < 0.0) {
            a = mid;
            ga = gm;
        } else {
            b = mid;
        }
        if b - a <= cfg.bisect_tol_d && best.0 <= 0.25 * phase_tol {
            break;
        }
    }
    let d = best.1;
    let (profile, summary) = shoot(d, spec, cfg)?;
    let rec = SolutionRecord {
        d_root: d,
        side,
        j,
        theta_end: summary.theta_end,
        v_end: summary.v_end,
        profile,
        summary,
    };
    match validate(&rec, spec, cfg) {
        Ok(()) => Ok(Some(rec)),
        Err(why) => {
            log::warn!("{side} root d = {d} for j = {j} rejected: {why}");
            Ok(None)
        }
    }
}

/// Checks a record against the solution invariants; `Err` carries the reason.
pub fn validate(
    rec: &SolutionRecord,
    spec: &ProblemSpec,
    cfg: &SolverConfig,
) -> std::result::Result<(), String> {
    let target = rec.side.target_phase(rec.j, spec.pi_p());
    let phase_tol = cfg.phase_tol_factor * spec.pi_p();
    let s = &rec.summary;
    if (s.theta_end - target).abs() > phase_tol {
        return Err(format!(
            "phase residual {:e} above {phase_tol:e}",
            (s.theta_end - target).abs()
        ));
    }
    if s.min_u <= 0.0 {
        return Err(format!("profile not positive (min u = {:e})", s.min_u));
    }
    if s.v_end.abs() > cfg.residual_tol * s.max_abs_v {
        return Err(format!(
            "|v(R)| = {:e} above {:e}·max|v|",
            s.v_end.abs(),
            cfg.residual_tol
        ));
    }
    if s.max_u - s.min_u <= 1e-6 {
        return Err("profile is numerically constant".into());
    }
    if s.zeros != rec.j {
        return Err(format!(
            "zero count {} differs from level {}",
            s.zeros, rec.j
        ));
    }
    Ok(())
}

/// Largest `Θ` over the lower-side scan; with `cap`, shots stop at that
/// phase, so the result is exact only below `cap`.
pub fn max_scan_phase(spec: &ProblemSpec, cfg: &SolverConfig, cap: Option<f64>) -> Result<f64> {
    let scan = theta_scan_capped(spec, cfg, Side::Lower, cap)?;
    scan.iter()
        .map(|&(_, t)| t)
        .reduce(f64::max)
        .ok_or_else(|| Error::SearchFailure("every scan shot failed".into()))
}

/// Threshold radius beyond which a lower-side shot makes more than `k + 1`
/// half-turns, for nonlinearities with `C₁ = 0`.
///
/// `template` fixes everything except the outer radius. For an annulus the
/// ratio `R1/R2` of the template is kept. The result `R̂` satisfies: the
/// predicate `max_d Θ(d; R) > (k + 1)π_p` is false at `R̂(1 - tol)` and true
/// at `R̂(1 + tol)`, with `tol = cfg.param_rel_tol`.
pub fn rstar(template: &ProblemSpec, cfg: &SolverConfig, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::Domain("k must be at least 1".into()));
    }
    if template.g().c1() != 0.0 {
        return Err(Error::Domain(format!(
            "threshold radius applies to C1 = 0 (here C1 = {})",
            template.g().c1()
        )));
    }
    let level = (k + 1) as f64 * template.pi_p();
    let holds = |r: f64| -> Result<bool> {
        let spec = template.with_domain(template.domain().with_outer(r)?)?;
        Ok(max_scan_phase(&spec, cfg, Some(level + template.pi_p()))? > level)
    };
    bracket_threshold(holds, 1.0, cfg.r_cap, cfg.param_rel_tol, "radius")
}

/// Bisection for the threshold of a monotone predicate on `(0, cap]`,
/// starting the bracket search from `start` by doubling or halving.
/// Returns the geometric midpoint of a bracket `[lo, hi]` with `hi/lo ≤ 1 + tol`.
pub(crate) fn bracket_threshold<P>(
    mut holds: P,
    start: f64,
    cap: f64,
    tol: f64,
    what: &str,
) -> Result<f64>
where
    P: FnMut(f64) -> Result<bool>,
{
    let (mut lo, mut hi);
    if holds(start)? {
        hi = start;
        lo = start / 2.0;
        while holds(lo)? {
            hi = lo;
            lo /= 2.0;
            if lo < 1e-8 * start {
                return Err(Error::SearchFailure(format!(
                    "predicate holds down to {what} {lo:e}"
                )));
            }
        }
    } else {
        lo = start;
        hi = (2.0 * start).min(cap);
        while !holds(hi)? {
            if hi >= cap {
                return Err(Error::SearchFailure(format!(
                    "predicate never holds up to {what} cap {cap:e}"
                )));
            }
            lo = hi;
            hi = (2.0 * hi).min(cap);
        }
    }
    geometric_bisect(holds, lo, hi, tol)
}

/// Shrinks a bracket with `holds(lo)` false and `holds(hi)` true until
/// `hi/lo ≤ 1 + tol`; returns the geometric midpoint.
pub(crate) fn geometric_bisect<P>(mut holds: P, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64>
where
    P: FnMut(f64) -> Result<bool>,
{
    while hi / lo > 1.0 + tol {
        let mid = (lo * hi).sqrt();
        if holds(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok((lo * hi).sqrt())
}
