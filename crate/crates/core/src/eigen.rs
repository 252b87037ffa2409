//! Radial Neumann eigenvalues of the p-Laplacian.
//!
//! In p-polar coordinates around the origin the radial eigenvalue problem
//! `-(r^{N-1} φ_p(φ'))' = λ r^{N-1} φ_p(φ)`, `φ'(0) = φ'(R) = 0` has a phase
//! equation that does not involve the amplitude:
//!
//! ```text
//! ϑ' = (p-1) r^{(N-1)(1-p')} |sin_p ϑ|^{p'} + λ r^{N-1} |cos_p ϑ|^p,   ϑ(0) = π_p.
//! ```
//!
//! `ϑ_λ(R)` is strictly increasing in `λ`, and the k-th eigenvalue is the
//! unique `λ` with `ϑ_λ(R) = k π_p` (its eigenfunction has `k - 1` zeros).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::odeint::{integrate, IvpSpec, TOL_MIN};
use crate::ptrig::phi_p;
use crate::radial::{Domain, ProblemSpec};
use crate::solver::SolverConfig;

/// The phase equation is integrated this much tighter than `cfg` asks for.
///
/// `|cos_p|^p` (for `p < 2`) and `|sin_p|^{p'}` (for `p > 2`) are not smooth
/// where they vanish, so the step-size control underestimates the error
/// there and `λ` converges only like `tol^0.85`. The scalar equation is cheap,
/// so the margin costs little.
const ANGLE_TOL_FACTOR: f64 = 1e-2;

/// An eigenvalue with its phase residual `|ϑ_λ(R) - k π_p|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EigenResult {
    pub k: usize,
    pub lambda: f64,
    #[serde(rename = "residual")]
    pub angle_residual: f64,
}

/// The eigen-phase `ϑ_λ(R)` at the outer radius.
pub fn eigen_angle(lambda: f64, spec: &ProblemSpec, cfg: &SolverConfig) -> Result<f64> {
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::Domain(format!(
            "lambda must be finite and >= 0, got {lambda}"
        )));
    }
    let pi_p = spec.pi_p();
    if lambda == 0.0 {
        // ϑ = π_p is a stationary point of the phase equation
        return Ok(pi_p);
    }
    let p = spec.p();
    let pp = spec.exponent().pprime();
    let nm1 = spec.n() as f64 - 1.0;
    let sing = nm1 * (1.0 - pp);
    let ctx = spec.ptrig();
    let rhs = |r: f64, y: &[f64; 1]| -> [f64; 1] {
        let (c, s) = ctx.pair_unchecked(y[0]);
        let sin_term = if nm1 == 0.0 { 1.0 } else { r.powf(sing) };
        let cos_term = if nm1 == 0.0 { 1.0 } else { r.powf(nm1) };
        [(p - 1.0) * sin_term * s.abs().powf(pp) + lambda * cos_term * c.abs().powf(p)]
    };
    let (r0, y0) = match spec.domain() {
        Domain::Ball { .. } => {
            let eps0 = spec.eps0(cfg)?;
            let n = spec.n() as f64;
            (eps0, pi_p + lambda * eps0.powf(n) / n)
        }
        Domain::Annulus { inner, .. } => (inner, pi_p),
    };
    let ivp = IvpSpec::new(rhs, r0, spec.domain().r_end(), [y0])
        .tolerances(
            (cfg.rel_tol * ANGLE_TOL_FACTOR).max(TOL_MIN),
            (cfg.abs_tol * ANGLE_TOL_FACTOR).max(TOL_MIN),
        )
        .max_steps(cfg.max_steps);
    Ok(integrate(&ivp)?.final_state()[0])
}

/// The k-th radial Neumann eigenvalue, `k >= 1`.
pub fn eigenvalue(k: usize, spec: &ProblemSpec, cfg: &SolverConfig) -> Result<EigenResult> {
    if k == 0 {
        return Err(Error::Domain("eigenvalue index k starts at 1".into()));
    }
    if k == 1 {
        return Ok(EigenResult {
            k,
            lambda: 0.0,
            angle_residual: 0.0,
        });
    }
    let target = k as f64 * spec.pi_p();
    let r_end = spec.domain().r_end();
    let lambda_max = cfg.lambda_max_factor * r_end.powf(-spec.p());
    let phase = |lambda: f64| eigen_angle(lambda, spec, cfg).map(|t| t - target);

    // bracket by doubling from 1
    let mut lo = 0.0;
    let mut hi = 1.0;
    loop {
        if phase(hi)? > 0.0 {
            break;
        }
        lo = hi;
        hi *= 2.0;
        if hi > lambda_max {
            return Err(Error::SearchFailure(format!(
                "no eigenvalue bracket for k = {k} below lambda_max = {lambda_max:e}"
            )));
        }
    }

    let mut best = (f64::INFINITY, hi);
    for _ in 0..cfg.lambda_max_iter {
        let mid = 0.5 * (lo + hi);
        let g = phase(mid)?;
        if g.abs() < best.0 {
            best = (g.abs(), mid);
        }
        if g > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= cfg.lambda_rel_tol * hi {
            break;
        }
    }
    let lambda = 0.5 * (lo + hi);
    let residual = phase(lambda)?.abs();
    let (angle_residual, lambda) = if residual <= best.0 {
        (residual, lambda)
    } else {
        best
    };
    Ok(EigenResult {
        k,
        lambda,
        angle_residual,
    })
}

/// A sampled radial eigenfunction `(r, φ, ψ)` with `ψ = r^{N-1} φ_p(φ')`,
/// normalised by `φ(0) = -1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Eigenfunction {
    pub r: Vec<f64>,
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
}

impl Eigenfunction {
    /// Interior zeros of `φ` (sign changes between samples).
    pub fn zeros(&self) -> usize {
        self.phi
            .windows(2)
            .filter(|w| (w[0] < 0.0) != (w[1] < 0.0) && w[1] != 0.0)
            .count()
    }
}

/// Integrate the eigenvalue equation in Cartesian form for a given `λ`.
pub fn eigenfunction(lambda: f64, spec: &ProblemSpec, cfg: &SolverConfig) -> Result<Eigenfunction> {
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::Domain(format!(
            "lambda must be finite and >= 0, got {lambda}"
        )));
    }
    let p = spec.p();
    let pp = spec.exponent().pprime();
    let nm1 = spec.n() as f64 - 1.0;
    let rhs = |r: f64, y: &[f64; 2]| -> [f64; 2] {
        let rn = if nm1 == 0.0 { 1.0 } else { r.powf(nm1) };
        [phi_p(y[1] / rn, pp), -lambda * rn * phi_p(y[0], p)]
    };
    let (r0, y0) = match spec.domain() {
        Domain::Ball { .. } => {
            let eps0 = spec.eps0(cfg)?;
            let n = spec.n() as f64;
            // φ ≈ -1 + φ_{p'}(λ/N) eps0^{p'}/p',  ψ ≈ λ eps0^N / N
            (
                eps0,
                [
                    -1.0 + phi_p(lambda / n, pp) * eps0.powf(pp) / pp,
                    lambda * eps0.powf(n) / n,
                ],
            )
        }
        Domain::Annulus { inner, .. } => (inner, [-1.0, 0.0]),
    };
    let ivp = IvpSpec::new(rhs, r0, spec.domain().r_end(), y0)
        .tolerances(cfg.rel_tol, cfg.abs_tol)
        .max_steps(cfg.max_steps);
    let sol = integrate(&ivp)?;
    let mut ef = Eigenfunction {
        r: vec![],
        phi: vec![],
        psi: vec![],
    };
    if let Domain::Ball { .. } = spec.domain() {
        ef.r.push(0.0);
        ef.phi.push(-1.0);
        ef.psi.push(0.0);
    }
    for (r, y) in sol.nodes().iter().zip(sol.states()) {
        ef.r.push(*r);
        ef.phi.push(y[0]);
        ef.psi.push(y[1]);
    }
    Ok(ef)
}
