//! The radial Neumann problem and single shots of the shooting method.
//!
//! A radial solution of `-Δ_p u + u^{p-1} = g(u)` with `u'(0) = u'(R) = 0`
//! solves the first-order system
//!
//! ```text
//! u' = φ_{p'}(v / r^{N-1}),     v' = -r^{N-1} f(u),     f(s) = g(s) - s^{p-1}  (s ≥ 0),
//! ```
//!
//! with `v = r^{N-1} φ_p(u')` and `f = 0` on negative values. A shot starts
//! from `u(0) = d`, `v(0) = 0`. Around the constant solution `(1, 0)` the
//! trajectory is tracked in p-polar coordinates
//!
//! ```text
//! u - 1 = ρ^{2/p} cos_p θ,      v = -ρ^{2/p'} sin_p θ,
//! ```
//!
//! so that Neumann solutions are exactly the shots ending at `θ ∈ π_p ℤ`.
//! The phase obeys
//!
//! ```text
//! θ' = (p-1) r^{(N-1)(1-p')} |sin_p θ|^{p'} + r^{N-1} (u-1) f(u) / ρ²,
//! ```
//!
//! and `ρ² = |u-1|^p + (p-1)|v|^{p'}` is recovered algebraically.

use std::cell::Cell;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::odeint::{integrate, DenseSolution, IvpSpec};
use crate::ptrig::{phi_p, PExponent, PTrigContext};
use crate::solver::SolverConfig;

/// The two supported families of nonlinearities `g`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NonlinearityKind {
    /// `g(s) = s^{q-1}`.
    PurePower { q: f64 },
    /// `g(s) = s^{q-1} + s^{p-1} - s^{r-1}`.
    PowerCombo { q: f64, r_exp: f64 },
}

/// A validated nonlinearity for a given exponent `p`.
///
/// Both families reduce to `f(s) = g(s) - s^{p-1} = s^a - s^b` with `a > b > 0`,
/// which is evaluated as `s^b · expm1((a - b) ln s)` to keep full relative
/// accuracy next to `s = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Nonlinearity {
    kind: NonlinearityKind,
    high: f64,
    low: f64,
    c1: f64,
}

impl Nonlinearity {
    pub fn pure_power(q: f64, p: f64) -> Result<Self> {
        Self::new(NonlinearityKind::PurePower { q }, p)
    }

    pub fn power_combo(q: f64, r_exp: f64, p: f64) -> Result<Self> {
        Self::new(NonlinearityKind::PowerCombo { q, r_exp }, p)
    }

    pub fn new(kind: NonlinearityKind, p: f64) -> Result<Self> {
        PExponent::new(p)?;
        let (high, low) = match kind {
            NonlinearityKind::PurePower { q } => {
                if !(q.is_finite() && q > p) {
                    return Err(Error::Domain(format!(
                        "pure power needs q > p, got q = {q}, p = {p}"
                    )));
                }
                (q - 1.0, p - 1.0)
            }
            NonlinearityKind::PowerCombo { q, r_exp } => {
                if !(q.is_finite() && r_exp.is_finite() && p <= r_exp && r_exp < q) {
                    return Err(Error::Domain(format!(
                        "power combination needs p <= r < q, got p = {p}, r = {r_exp}, q = {q}"
                    )));
                }
                (q - 1.0, r_exp - 1.0)
            }
        };
        // Limit of (g(s) - s^{p-1}) / (|s-1|^{p-2}(s-1)) as s -> 1.
        let c1 = if p > 2.0 {
            f64::INFINITY
        } else if p == 2.0 {
            high - low
        } else {
            0.0
        };
        let g = Self {
            kind,
            high,
            low,
            c1,
        };
        g.check_single_crossing()?;
        Ok(g)
    }

    pub fn kind(&self) -> NonlinearityKind {
        self.kind
    }

    /// The constant `C₁` of the limit condition at `s = 1`, possibly infinite.
    pub fn c1(&self) -> f64 {
        self.c1
    }

    /// The exponent `q` of the leading power.
    pub fn q(&self) -> f64 {
        match self.kind {
            NonlinearityKind::PurePower { q } | NonlinearityKind::PowerCombo { q, .. } => q,
        }
    }

    /// `f(s) = g(s) - s^{p-1}` for `s ≥ 0`, and `0` for `s < 0`.
    pub fn f(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        s.powf(self.low) * ((self.high - self.low) * s.ln()).exp_m1()
    }

    /// `f(1 + x)`, accurate for small `|x|`.
    pub fn f_offset(&self, x: f64) -> f64 {
        if x <= -1.0 {
            return 0.0;
        }
        let l = x.ln_1p();
        (self.low * l).exp() * ((self.high - self.low) * l).exp_m1()
    }

    fn check_single_crossing(&self) -> Result<()> {
        for i in 1..200 {
            let s = i as f64 / 100.0;
            let v = self.f(s);
            let ok = if i < 100 {
                v < 0.0
            } else if i == 100 {
                v == 0.0
            } else {
                v > 0.0
            };
            if !ok {
                return Err(Error::Domain(format!(
                    "g(s) - s^(p-1) must change sign only at s = 1; f({s}) = {v:e}"
                )));
            }
        }
        Ok(())
    }
}

/// The radial domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Domain {
    Ball { radius: f64 },
    Annulus { inner: f64, outer: f64 },
}

impl Domain {
    pub fn ball(radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::Domain(format!(
                "ball radius must be positive, got {radius}"
            )));
        }
        Ok(Domain::Ball { radius })
    }

    pub fn annulus(inner: f64, outer: f64) -> Result<Self> {
        if !(inner.is_finite() && outer.is_finite() && 0.0 < inner && inner < outer) {
            return Err(Error::Domain(format!(
                "annulus needs 0 < R1 < R2, got R1 = {inner}, R2 = {outer}"
            )));
        }
        Ok(Domain::Annulus { inner, outer })
    }

    /// Outer radius, where the Neumann condition is imposed.
    pub fn r_end(&self) -> f64 {
        match *self {
            Domain::Ball { radius } => radius,
            Domain::Annulus { outer, .. } => outer,
        }
    }

    /// Where integration starts: `0` for a ball, `R1` for an annulus.
    pub fn r_start(&self) -> f64 {
        match *self {
            Domain::Ball { .. } => 0.0,
            Domain::Annulus { inner, .. } => inner,
        }
    }

    /// Same shape with the outer radius replaced (inner radius rescaled proportionally).
    pub fn with_outer(&self, outer: f64) -> Result<Self> {
        match *self {
            Domain::Ball { .. } => Domain::ball(outer),
            Domain::Annulus { inner, outer: old } => Domain::annulus(inner * outer / old, outer),
        }
    }
}

/// Everything that defines one radial Neumann problem.
///
/// Cloning is cheap: the p-trigonometric table is shared.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    ptrig: Arc<PTrigContext>,
    n: u32,
    domain: Domain,
    g: Nonlinearity,
}

impl ProblemSpec {
    pub fn new(p: f64, n: u32, domain: Domain, kind: NonlinearityKind) -> Result<Self> {
        let g = Nonlinearity::new(kind, p)?;
        let ptrig = Arc::new(PTrigContext::new(p)?);
        Self::with_context(ptrig, n, domain, g)
    }

    /// Build from an existing p-trig table (its exponent must match `g`'s).
    pub fn with_context(
        ptrig: Arc<PTrigContext>,
        n: u32,
        domain: Domain,
        g: Nonlinearity,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain(
                "dimension N must be a positive integer".into(),
            ));
        }
        // re-validate the domain in case it was constructed by hand
        match domain {
            Domain::Ball { radius } => Domain::ball(radius)?,
            Domain::Annulus { inner, outer } => Domain::annulus(inner, outer)?,
        };
        Nonlinearity::new(g.kind, ptrig.p())?;
        Ok(Self {
            ptrig,
            n,
            domain,
            g,
        })
    }

    pub fn p(&self) -> f64 {
        self.ptrig.p()
    }

    pub fn exponent(&self) -> PExponent {
        self.ptrig.exponent()
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn g(&self) -> &Nonlinearity {
        &self.g
    }

    pub fn ptrig(&self) -> &PTrigContext {
        &self.ptrig
    }

    pub fn pi_p(&self) -> f64 {
        self.ptrig.pi_p()
    }

    /// A copy with a different domain.
    pub fn with_domain(&self, domain: Domain) -> Result<Self> {
        Self::with_context(self.ptrig.clone(), self.n, domain, self.g)
    }

    /// A copy with a different nonlinearity of the same exponent.
    pub fn with_nonlinearity(&self, kind: NonlinearityKind) -> Result<Self> {
        let g = Nonlinearity::new(kind, self.p())?;
        Self::with_context(self.ptrig.clone(), self.n, self.domain, g)
    }

    /// `f` extended by zero to negative arguments.
    pub fn f_eval(&self, s: f64) -> f64 {
        self.g.f(s)
    }

    /// Radius of the series startup for a ball.
    pub(crate) fn eps0(&self, cfg: &SolverConfig) -> Result<f64> {
        let r_end = self.domain.r_end();
        let eps0 = cfg.eps0.unwrap_or(1e-8 * r_end);
        if !(eps0 > 0.0 && eps0 <= 1e-4 * r_end) {
            return Err(Error::InvalidConfig(format!(
                "eps0 = {eps0:e} must lie in (0, 1e-4·R] = (0, {:e}]",
                1e-4 * r_end
            )));
        }
        Ok(eps0)
    }
}

/// A sampled shot.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub r: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub theta: Vec<f64>,
    pub rho_sq: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    /// Number of sign changes of `u - 1` between consecutive samples.
    pub fn sign_changes_of_u_minus_one(&self) -> usize {
        let mut count = 0;
        let mut prev = 0.0f64;
        for &u in &self.u {
            let x = u - 1.0;
            if x == 0.0 {
                continue;
            }
            if prev != 0.0 && (x < 0.0) != (prev < 0.0) {
                count += 1;
            }
            prev = x;
        }
        count
    }
}

/// Terminal data of a shot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShotSummary {
    pub d: f64,
    /// `Θ(d) = θ_d(R)`.
    pub theta_end: f64,
    pub v_end: f64,
    pub u_end: f64,
    /// Zeros of `u - 1`, counted as crossings of `θ` through `(j + ½)π_p`.
    pub zeros: usize,
    pub min_u: f64,
    pub max_u: f64,
    pub max_abs_v: f64,
}

/// State `(u, v, θ)` at `r = eps0` from the series expansion at the origin.
pub fn startup_state(d: f64, eps0: f64, spec: &ProblemSpec) -> Result<(f64, f64, f64)> {
    let scaled = Scaled::new(d, spec)?;
    let r_end = spec.domain.r_end();
    if !(eps0 > 0.0 && eps0 <= 1e-4 * r_end) {
        return Err(Error::Domain(format!(
            "eps0 = {eps0:e} must lie in (0, 1e-4·R]"
        )));
    }
    let [u, v, theta] = scaled.startup(eps0, spec);
    Ok((1.0 + scaled.delta * u, scaled.v_scale * v, theta))
}

/// Bound on the scaled startup corrections `|V|` and `|U - U0|`.
const STARTUP_SMALLNESS: f64 = 1e-6;

/// Blow-up scaling around `(1, 0)`: `u = 1 + δU`, `v = δ^{p-1} V`, `δ = |d - 1|`.
///
/// The scaled system is the original one with `f` replaced by
/// `F(U) = f(1 + δU)/δ^{p-1}`, so shots from any `d ≠ 1` are integrated at
/// unit scale and the tolerances act relative to the distance from `(1, 0)`.
#[derive(Debug, Clone, Copy)]
struct Scaled {
    delta: f64,
    v_scale: f64,
    u0: f64,
    theta0: f64,
}

impl Scaled {
    fn new(d: f64, spec: &ProblemSpec) -> Result<Self> {
        if !d.is_finite() || d < 0.0 {
            return Err(Error::Domain(format!(
                "initial value d must be finite and >= 0, got {d}"
            )));
        }
        if d == 1.0 {
            return Err(Error::DegenerateShot);
        }
        let delta = (d - 1.0).abs();
        let (u0, theta0) = if d < 1.0 {
            (-1.0, spec.pi_p())
        } else {
            (1.0, 0.0)
        };
        Ok(Self {
            delta,
            v_scale: delta.powf(spec.p() - 1.0),
            u0,
            theta0,
        })
    }

    #[inline]
    fn big_f(&self, u: f64, g: &Nonlinearity) -> f64 {
        g.f_offset(self.delta * u) / self.v_scale
    }

    /// `eps0`, reduced if needed so that both series corrections stay below
    /// [`STARTUP_SMALLNESS`]; past that the truncated series is no longer
    /// accurate (this only bites for very steep `f` far from `d = 1`).
    fn startup_radius(&self, eps0: f64, spec: &ProblemSpec) -> f64 {
        let n = spec.n as f64;
        let pp = spec.exponent().pprime();
        let f0 = self.big_f(self.u0, &spec.g).abs();
        if f0 == 0.0 {
            return eps0;
        }
        let by_v = (STARTUP_SMALLNESS * n / f0).powf(1.0 / n);
        let by_u = (STARTUP_SMALLNESS * pp / phi_p(f0 / n, pp)).powf(1.0 / pp);
        eps0.min(by_v).min(by_u)
    }

    fn startup(&self, eps0: f64, spec: &ProblemSpec) -> [f64; 3] {
        let n = spec.n as f64;
        let pp = spec.exponent().pprime();
        let f0 = self.big_f(self.u0, &spec.g);
        let v = -f0 * eps0.powf(n) / n;
        let u = self.u0 - phi_p(f0 / n, pp) * eps0.powf(pp) / pp;
        // θ - θ0 ≈ -U0 V for a phase starting at (∓1, 0)
        let theta = self.theta0 - self.u0 * v;
        [u, v, theta]
    }
}

/// One shot from `u(r_start) = d`, `v(r_start) = 0`.
pub fn shoot(d: f64, spec: &ProblemSpec, cfg: &SolverConfig) -> Result<(Trajectory, ShotSummary)> {
    let (sol, sc) = integrate_shot(d, spec, cfg, None)?;
    let traj = to_trajectory(&sol, &sc, d, spec);
    let summary = summarize(&sol, &traj, d, spec);
    Ok((traj, summary))
}

/// Like [`shoot`] but only the summary.
pub fn shoot_summary(d: f64, spec: &ProblemSpec, cfg: &SolverConfig) -> Result<ShotSummary> {
    shoot(d, spec, cfg).map(|(_, s)| s)
}

/// The end phase `Θ(d)` alone. With `cap = Some(c)` the shot is abandoned as
/// soon as the phase reaches `c`, and the returned value is then only known
/// to be `≥ c` — enough to compare `Θ(d)` with any level below `c`, and far
/// cheaper for shots that wind thousands of times.
pub fn shot_phase(d: f64, spec: &ProblemSpec, cfg: &SolverConfig, cap: Option<f64>) -> Result<f64> {
    let (sol, _) = integrate_shot(d, spec, cfg, cap)?;
    Ok(sol.final_state()[2])
}

fn integrate_shot(
    d: f64,
    spec: &ProblemSpec,
    cfg: &SolverConfig,
    cap: Option<f64>,
) -> Result<(DenseSolution<3>, Scaled)> {
    let sc = Scaled::new(d, spec)?;
    let p = spec.p();
    let pp = spec.exponent().pprime();
    let nm1 = spec.n as f64 - 1.0;
    let g = spec.g;
    let rho_floor = cfg.rho_floor;
    let floor_hit = Cell::new(None::<f64>);

    let rhs = |r: f64, y: &[f64; 3]| -> [f64; 3] {
        let (u, v) = (y[0], y[1]);
        let rn = if nm1 == 0.0 { 1.0 } else { r.powf(nm1) };
        let big_f = sc.big_f(u, &g);
        let du = phi_p(v / rn, pp);
        let dv = -rn * big_f;
        let rho_sq = u.abs().powf(p) + (p - 1.0) * v.abs().powf(pp);
        if rho_sq < rho_floor {
            if floor_hit.get().is_none() {
                floor_hit.set(Some(r));
            }
            return [f64::NAN; 3];
        }
        let dtheta = ((p - 1.0) * v * du + rn * u * big_f) / rho_sq;
        [du, dv, dtheta]
    };

    let (r0, y0) = match spec.domain {
        Domain::Ball { .. } => {
            let eps = sc.startup_radius(spec.eps0(cfg)?, spec);
            (eps, sc.startup(eps, spec))
        }
        Domain::Annulus { inner, .. } => (inner, [sc.u0, 0.0, sc.theta0]),
    };
    let mut ivp = IvpSpec::new(rhs, r0, spec.domain.r_end(), y0)
        .tolerances(cfg.rel_tol, cfg.abs_tol)
        .max_steps(cfg.max_steps);
    if let Some(c) = cap {
        ivp = ivp.stop_above(2, c);
    }
    match integrate(&ivp) {
        Ok(sol) => Ok((sol, sc)),
        Err(e) => match floor_hit.get() {
            Some(r) => Err(Error::NearConstantShot { d, r }),
            None => Err(e),
        },
    }
}

fn to_trajectory(sol: &DenseSolution<3>, sc: &Scaled, d: f64, spec: &ProblemSpec) -> Trajectory {
    let p = spec.p();
    let mut t = Trajectory {
        r: vec![],
        u: vec![],
        v: vec![],
        theta: vec![],
        rho_sq: vec![],
    };
    let cap = sol.nodes().len() + 1;
    t.r.reserve(cap);
    t.u.reserve(cap);
    t.v.reserve(cap);
    t.theta.reserve(cap);
    t.rho_sq.reserve(cap);
    if let Domain::Ball { .. } = spec.domain {
        t.r.push(0.0);
        t.u.push(d);
        t.v.push(0.0);
        t.theta.push(sc.theta0);
        t.rho_sq.push((d - 1.0).abs().powf(p));
    }
    let pp = spec.exponent().pprime();
    let rho_scale = sc.delta.powf(p);
    for (r, y) in sol.nodes().iter().zip(sol.states()) {
        t.r.push(*r);
        t.u.push(1.0 + sc.delta * y[0]);
        t.v.push(sc.v_scale * y[1]);
        t.theta.push(y[2]);
        t.rho_sq
            .push(rho_scale * (y[0].abs().powf(p) + (p - 1.0) * y[1].abs().powf(pp)));
    }
    t
}

fn summarize(sol: &DenseSolution<3>, traj: &Trajectory, d: f64, spec: &ProblemSpec) -> ShotSummary {
    let pi_p = spec.pi_p();
    let theta_end = *traj.theta.last().expect("non-empty trajectory");
    // zeros of u - 1 are the passages of θ through (j + ½)π_p; count them
    // step by step, like a sign-change scan of θ - (j + ½)π_p for every j
    let band = |t: f64| (t / pi_p - 0.5).floor() as i64;
    let zeros = sol
        .states()
        .windows(2)
        .map(|w| band(w[1][2]).abs_diff(band(w[0][2])) as usize)
        .sum();
    let fold = |init: f64, f: fn(f64, f64) -> f64, xs: &[f64]| xs.iter().copied().fold(init, f);
    ShotSummary {
        d,
        theta_end,
        v_end: *traj.v.last().unwrap(),
        u_end: *traj.u.last().unwrap(),
        zeros,
        min_u: fold(f64::INFINITY, f64::min, &traj.u),
        max_u: fold(f64::NEG_INFINITY, f64::max, &traj.u),
        max_abs_v: traj.v.iter().fold(0.0, |m, v| m.max(v.abs())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn spec(p: f64, n: u32, r: f64, q: f64) -> ProblemSpec {
        ProblemSpec::new(
            p,
            n,
            Domain::ball(r).unwrap(),
            NonlinearityKind::PurePower { q },
        )
        .unwrap()
    }

    #[test]
    fn f_values() {
        let s = spec(2.0, 1, 1.0, 3.0);
        assert_eq!(s.f_eval(1.0), 0.0);
        assert_eq!(s.f_eval(-0.3), 0.0);
        assert!((s.f_eval(2.0) - 2.0).abs() < 1e-14);
        assert_eq!(s.f_eval(0.0), 0.0);
        let s = spec(1.5, 2, 1.0, 2.5);
        assert!((s.g().f_offset(0.25) - s.f_eval(1.25)).abs() < 1e-15);
    }

    #[test]
    fn f_is_continuous_at_zero() {
        for p in [1.3, 2.0, 3.0] {
            let s = spec(p, 1, 1.0, p + 1.0);
            assert!(s.f_eval(1e-12).abs() < 1e-3);
            assert_eq!(s.f_eval(-1e-12), 0.0);
        }
    }

    #[test]
    fn combo_f_matches_definition() {
        let (p, q, r) = (1.8, 4.0, 2.5);
        let g = Nonlinearity::power_combo(q, r, p).unwrap();
        for s in [0.1f64, 0.7, 1.3, 2.0] {
            let direct = s.powf(q - 1.0) + s.powf(p - 1.0) - s.powf(r - 1.0) - s.powf(p - 1.0);
            assert!((g.f(s) - direct).abs() < 1e-13, "{s}");
        }
    }

    #[test]
    fn c1_by_regime() {
        assert_eq!(
            Nonlinearity::pure_power(4.0, 3.0).unwrap().c1(),
            f64::INFINITY
        );
        assert_eq!(Nonlinearity::pure_power(15.0, 2.0).unwrap().c1(), 13.0);
        assert_eq!(Nonlinearity::pure_power(3.0, 1.8).unwrap().c1(), 0.0);
        assert_eq!(Nonlinearity::power_combo(5.0, 3.0, 2.0).unwrap().c1(), 2.0);
    }

    #[test]
    fn c1_matches_the_limit_numerically() {
        let g = Nonlinearity::pure_power(15.0, 2.0).unwrap();
        let x: f64 = 1e-7;
        let ratio = g.f_offset(x) / x;
        assert!((ratio - 13.0).abs() < 1e-4);
    }

    #[test]
    fn invalid_nonlinearities() {
        assert!(Nonlinearity::pure_power(2.0, 2.0).is_err());
        assert!(Nonlinearity::pure_power(1.5, 2.0).is_err());
        assert!(Nonlinearity::power_combo(3.0, 1.5, 2.0).is_err());
        assert!(Nonlinearity::power_combo(3.0, 3.0, 2.0).is_err());
        assert!(Nonlinearity::pure_power(3.0, 1.0).is_err());
    }

    #[test]
    fn invalid_domains() {
        assert!(Domain::ball(0.0).is_err());
        assert!(Domain::annulus(2.0, 1.0).is_err());
        assert!(Domain::annulus(0.0, 1.0).is_err());
        assert!(ProblemSpec::new(
            2.0,
            0,
            Domain::ball(1.0).unwrap(),
            NonlinearityKind::PurePower { q: 3.0 }
        )
        .is_err());
    }

    #[test]
    fn startup_of_zero_shot_is_constant() {
        let s = spec(2.0, 2, 1.0, 3.0);
        let (u, v, th) = startup_state(0.0, 1e-8, &s).unwrap();
        assert_eq!((u, v, th), (0.0, 0.0, PI));
    }

    #[test]
    fn startup_series_values() {
        let s = spec(2.0, 1, 1.0, 3.0);
        let (u, v, th) = startup_state(0.5, 1e-6, &s).unwrap();
        // v ≈ -f(d) eps0^N / N with f(0.5) = 0.25 - 0.5
        assert!((v - 2.5e-7).abs() < 1e-20);
        assert!((u - (0.5 + 0.25 * 1e-12 / 2.0)).abs() < 1e-16);
        assert!(th > PI);
        assert!(matches!(
            startup_state(1.0, 1e-8, &s),
            Err(Error::DegenerateShot)
        ));
    }

    #[test]
    fn startup_phase_moves_forward() {
        for p in [1.5, 2.0, 3.0] {
            let s = spec(p, 1, 1.0, p + 2.0);
            for d in [0.1, 0.5, 0.99] {
                let (_, _, th) = startup_state(d, 1e-6, &s).unwrap();
                assert!(th > s.pi_p());
            }
            let (_, _, th) = startup_state(1.5, 1e-6, &s).unwrap();
            assert!(th > 0.0);
        }
    }

    #[test]
    fn zero_shot_stays_at_origin() {
        let s = spec(2.0, 1, 1.0, 3.0);
        let (traj, sum) = shoot(0.0, &s, &SolverConfig::default()).unwrap();
        assert_eq!(sum.theta_end, PI);
        assert_eq!(sum.u_end, 0.0);
        assert_eq!(sum.zeros, 0);
        assert!(traj.theta.iter().all(|&t| t == PI));
    }

    #[test]
    fn d_equal_one_is_degenerate() {
        let s = spec(2.0, 1, 1.0, 3.0);
        assert!(matches!(
            shoot(1.0, &s, &SolverConfig::default()),
            Err(Error::DegenerateShot)
        ));
        assert!(shoot(-0.1, &s, &SolverConfig::default()).is_err());
    }

    #[test]
    fn eps0_must_be_small() {
        let s = spec(2.0, 2, 1.0, 3.0);
        let cfg = SolverConfig {
            eps0: Some(1e-2),
            ..SolverConfig::default()
        };
        assert!(matches!(shoot(0.5, &s, &cfg), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn algebraic_rho_and_monotone_phase() {
        let s = spec(2.0, 2, 1.0, 20.0);
        let (t, sum) = shoot(0.6, &s, &SolverConfig::default()).unwrap();
        assert!(t.theta.windows(2).all(|w| w[1] >= w[0]));
        for i in 0..t.len() {
            let rho = (t.u[i] - 1.0).abs().powi(2) + t.v[i].abs().powi(2);
            assert!((rho - t.rho_sq[i]).abs() <= 1e-8 * rho.max(1.0));
            assert!(t.rho_sq[i] > 0.0);
        }
        assert_eq!(sum.zeros, t.sign_changes_of_u_minus_one());
    }

    #[test]
    fn annulus_shot_starts_at_inner_radius() {
        let s = ProblemSpec::new(
            2.0,
            2,
            Domain::annulus(0.5, 1.5).unwrap(),
            NonlinearityKind::PurePower { q: 8.0 },
        )
        .unwrap();
        let (t, _) = shoot(0.7, &s, &SolverConfig::default()).unwrap();
        assert_eq!(t.r[0], 0.5);
        assert_eq!(t.u[0], 0.7);
        assert_eq!(t.v[0], 0.0);
        assert_eq!(t.theta[0], PI);
        assert_eq!(*t.r.last().unwrap(), 1.5);
    }

    #[test]
    fn upper_shot_starts_at_zero_phase() {
        let s = spec(2.0, 1, 1.0, 3.0);
        let (t, sum) = shoot(1.3, &s, &SolverConfig::default()).unwrap();
        assert_eq!(t.theta[0], 0.0);
        assert!(sum.theta_end > 0.0);
        assert!(sum.min_u < 1.3 && sum.max_u == 1.3);
    }
}
