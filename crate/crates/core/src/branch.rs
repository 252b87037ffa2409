//! Branches of solutions under a change of `q` or of the outer radius.
//!
//! Continuation here is a plain re-solve at every grid value: each value of
//! the parameter gets its own scan and all of its roots, so folds (two roots
//! with the same zero count) show up without any arclength machinery.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::radial::{NonlinearityKind, ProblemSpec};
use crate::solver::{
    find_solutions, find_solutions_at_levels, geometric_bisect, Side, Sides, SolverConfig,
};

/// The swept parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParam {
    /// The leading exponent `q` of the nonlinearity.
    Q,
    /// The outer radius (an annulus keeps its ratio `R1/R2`).
    R,
}

impl SweepParam {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepParam::Q => "q",
            SweepParam::R => "R",
        }
    }

    /// The template with this parameter set to `value`.
    pub fn apply(self, template: &ProblemSpec, value: f64) -> Result<ProblemSpec> {
        match self {
            SweepParam::Q => {
                let kind = match template.g().kind() {
                    NonlinearityKind::PurePower { .. } => NonlinearityKind::PurePower { q: value },
                    NonlinearityKind::PowerCombo { r_exp, .. } => {
                        NonlinearityKind::PowerCombo { q: value, r_exp }
                    }
                };
                template.with_nonlinearity(kind)
            }
            SweepParam::R => template.with_domain(template.domain().with_outer(value)?),
        }
    }
}

/// One root of the shooting equation at one parameter value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchRow {
    pub param: f64,
    pub d: f64,
    pub j: usize,
    pub side: Side,
    pub theta_end: f64,
}

/// Two consecutive rows of one `(j, side)` branch that are far apart in `d`,
/// or two roots of the same branch at one parameter value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FoldMarker {
    pub j: usize,
    pub side: Side,
    pub param_before: f64,
    pub param_after: f64,
    pub d_before: f64,
    pub d_after: f64,
}

/// All roots found over a parameter sweep.
#[derive(Debug, Clone, Serialize)]
pub struct BranchTable {
    pub param: SweepParam,
    pub grid: Vec<f64>,
    /// Sorted by `(j, side, param, d)`.
    pub rows: Vec<BranchRow>,
    pub config: SolverConfig,
}

/// Jump in `d` between neighbouring rows of a branch that counts as a fold.
pub const FOLD_JUMP: f64 = 0.2;

impl BranchTable {
    /// Rows of one branch, in parameter order.
    pub fn branch(&self, j: usize, side: Side) -> impl Iterator<Item = &BranchRow> {
        self.rows.iter().filter(move |r| r.j == j && r.side == side)
    }

    /// Distinct `(j, side)` pairs present in the table.
    pub fn branches(&self) -> Vec<(usize, Side)> {
        let mut keys: Vec<_> = self.rows.iter().map(|r| (r.j, r.side)).collect();
        keys.dedup();
        keys
    }

    /// Places where a branch folds or splits: same parameter with several
    /// roots, or a jump in `d` above [`FOLD_JUMP`] between adjacent rows.
    pub fn folds(&self) -> Vec<FoldMarker> {
        self.rows
            .windows(2)
            .filter(|w| w[0].j == w[1].j && w[0].side == w[1].side)
            .filter(|w| w[0].param == w[1].param || (w[1].d - w[0].d).abs() > FOLD_JUMP)
            .map(|w| FoldMarker {
                j: w[0].j,
                side: w[0].side,
                param_before: w[0].param,
                param_after: w[1].param,
                d_before: w[0].d,
                d_after: w[1].d,
            })
            .collect()
    }
}

/// Evenly spaced sweep values, endpoints included.
pub fn sweep_grid(lo: f64, hi: f64, steps: usize) -> Result<Vec<f64>> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::Domain(format!(
            "sweep range must satisfy lo < hi, got [{lo}, {hi}]"
        )));
    }
    if steps < 2 {
        return Err(Error::Domain(format!(
            "a sweep needs at least 2 steps, got {steps}"
        )));
    }
    Ok((0..steps)
        .map(|i| {
            if i + 1 == steps {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (steps - 1) as f64
            }
        })
        .collect())
}

/// Solve at every value of `grid` and collect the roots.
///
/// A grid value where the problem cannot be set up (say `q ≤ p`) is an error;
/// a grid value where the search fails numerically is skipped with a warning.
pub fn branch_sweep(
    template: &ProblemSpec,
    param: SweepParam,
    grid: &[f64],
    cfg: &SolverConfig,
    max_zeros: usize,
    sides: Sides,
) -> Result<BranchTable> {
    cfg.validate()?;
    if max_zeros == 0 {
        return Err(Error::Domain("max_zeros must be at least 1".into()));
    }
    let specs = grid
        .iter()
        .map(|&x| param.apply(template, x))
        .collect::<Result<Vec<_>>>()?;
    let per_value: Vec<Vec<BranchRow>> = grid
        .par_iter()
        .zip(&specs)
        .map(
            |(&x, spec)| match find_solutions(spec, cfg, max_zeros, sides) {
                Ok(recs) => recs
                    .into_iter()
                    .map(|r| BranchRow {
                        param: x,
                        d: r.d_root,
                        j: r.j,
                        side: r.side,
                        theta_end: r.theta_end,
                    })
                    .collect(),
                Err(e) => {
                    log::warn!("{} = {x}: {e}", param.as_str());
                    Vec::new()
                }
            },
        )
        .collect();
    let mut rows: Vec<BranchRow> = per_value.into_iter().flatten().collect();
    rows.sort_by(|a, b| {
        (a.j, a.side)
            .cmp(&(b.j, b.side))
            .then(a.param.total_cmp(&b.param))
            .then(a.d.total_cmp(&b.d))
    });
    Ok(BranchTable {
        param,
        grid: grid.to_vec(),
        rows,
        config: cfg.clone(),
    })
}

/// Largest `q` tried by [`bifurcation_onset`].
pub const ONSET_Q_CAP: f64 = 1e4;

/// The value of `q` where the lower-side branch with `j` zeros appears.
///
/// Only meaningful when `C₁` is finite and positive (`p = 2`), where the
/// onset sits at `q = 2 + λ_{j+1}`. The predicate "a validated lower-side
/// solution with `j` zeros exists" is bisected to relative width
/// `cfg.param_rel_tol`, starting just above the smallest admissible `q`.
pub fn bifurcation_onset(template: &ProblemSpec, j: usize, cfg: &SolverConfig) -> Result<f64> {
    let c1 = template.g().c1();
    if !(c1.is_finite() && c1 > 0.0) {
        return Err(Error::Domain(format!(
            "onset search needs a finite positive C1, got {c1}"
        )));
    }
    if j == 0 {
        return Err(Error::Domain("zero counts start at 1".into()));
    }
    let q_floor = match template.g().kind() {
        NonlinearityKind::PurePower { .. } => template.p(),
        NonlinearityKind::PowerCombo { r_exp, .. } => r_exp,
    };
    let holds = |q: f64| -> Result<bool> {
        let spec = SweepParam::Q.apply(template, q)?;
        Ok(find_solutions_at_levels(&spec, cfg, &[j], Sides::LOWER)?
            .iter()
            .any(|r| r.side == Side::Lower))
    };
    let lo = q_floor * (1.0 + cfg.param_rel_tol);
    if holds(lo)? {
        return Err(Error::SearchFailure(format!(
            "a solution with {j} zeros already exists at q = {lo}; no onset in [{lo}, {ONSET_Q_CAP:e}]"
        )));
    }
    let (mut lo, mut hi) = (lo, 2.0 * lo);
    while !holds(hi)? {
        if hi >= ONSET_Q_CAP {
            return Err(Error::SearchFailure(format!(
                "no solution with {j} zeros for q in [{q_floor}, {ONSET_Q_CAP:e}]"
            )));
        }
        lo = hi;
        hi = (2.0 * hi).min(ONSET_Q_CAP);
    }
    geometric_bisect(holds, lo, hi, cfg.param_rel_tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::Domain;

    fn template(p: f64, r: f64, q: f64) -> ProblemSpec {
        ProblemSpec::new(
            p,
            1,
            Domain::ball(r).unwrap(),
            NonlinearityKind::PurePower { q },
        )
        .unwrap()
    }

    #[test]
    fn grid_includes_endpoints() {
        let g = sweep_grid(3.0, 100.0, 5).unwrap();
        assert_eq!(g.len(), 5);
        assert_eq!((g[0], g[4]), (3.0, 100.0));
        assert!(sweep_grid(3.0, 3.0, 5).is_err());
        assert!(sweep_grid(3.0, 4.0, 1).is_err());
    }

    #[test]
    fn apply_changes_only_the_parameter() {
        let t = template(2.0, 1.0, 3.0);
        let s = SweepParam::Q.apply(&t, 7.0).unwrap();
        assert_eq!(s.g().q(), 7.0);
        assert_eq!(s.domain(), t.domain());
        let s = SweepParam::R.apply(&t, 2.5).unwrap();
        assert_eq!(s.domain().r_end(), 2.5);
        assert!(SweepParam::Q.apply(&t, 1.5).is_err());
    }

    #[test]
    fn folds_flag_jumps_and_pairs() {
        let row = |param, d| BranchRow {
            param,
            d,
            j: 1,
            side: Side::Lower,
            theta_end: 0.0,
        };
        let t = BranchTable {
            param: SweepParam::Q,
            grid: vec![1.0, 2.0, 3.0],
            rows: vec![row(1.0, 0.5), row(2.0, 0.55), row(2.0, 0.9), row(3.0, 0.2)],
            config: SolverConfig::default(),
        };
        let folds = t.folds();
        assert_eq!(folds.len(), 2);
        assert_eq!((folds[0].param_before, folds[0].param_after), (2.0, 2.0));
        assert_eq!((folds[1].param_before, folds[1].param_after), (2.0, 3.0));
    }

    #[test]
    fn onset_requires_finite_positive_c1() {
        let cfg = SolverConfig::default();
        assert!(matches!(
            bifurcation_onset(&template(3.0, 1.0, 4.0), 1, &cfg),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            bifurcation_onset(&template(1.8, 1.0, 3.0), 1, &cfg),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn sweep_rows_are_sorted() {
        let cfg = SolverConfig {
            d_grid_size: 300,
            ..Default::default()
        };
        let t = template(2.0, 1.0, 3.0);
        let grid = sweep_grid(13.0, 20.0, 3).unwrap();
        let table = branch_sweep(&t, SweepParam::Q, &grid, &cfg, 1, Sides::LOWER).unwrap();
        assert_eq!(table.rows.len(), 3, "{:?}", table.rows);
        assert!(table.rows.windows(2).all(|w| w[0].param < w[1].param));
        assert!(table.rows.iter().all(|r| r.j == 1 && r.d < 1.0));
    }
}
