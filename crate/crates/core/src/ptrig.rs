//! Generalized trigonometric functions `cos_p`, `sin_p` and the power maps
//! `φ_p(s) = |s|^{p-2} s`.
//!
//! The pair `(C, S) = (cos_p, sin_p)` is defined as the solution of the
//! Hamiltonian system
//!
//! ```text
//! C' = -φ_{p'}(S),   S' = φ_p(C),   C(0) = 1,  S(0) = 0,
//! ```
//!
//! which conserves `|C|^p + (p-1)|S|^{p'} = 1`. At `p = 2` this is the
//! ordinary rotation, so `cos_2 = cos` and `sin_2 = sin`. The half-period
//! of the pair is
//!
//! ```text
//! π_p = 2π (p-1)^{1/p} / (p sin(π/p)).
//! ```
//!
//! A [`PTrigContext`] integrates the system once on the quarter period
//! `[0, π_p/2]` and extends the result to the whole line through
//! `C(π_p - θ) = -C(θ)`, `S(π_p - θ) = S(θ)`, `(C, S)(θ + π_p) = -(C, S)(θ)`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::odeint::{integrate, DenseSolution, IvpSpec};

/// Local error target of the quarter-period table.
pub const TABLE_TOL: f64 = 1e-13;

/// Below this distance from a zero of `S` the table is bypassed in favour of
/// the leading terms of the Taylor expansion, which keeps `S` accurate in a
/// relative sense next to `θ = jπ_p`.
const SERIES_CUTOFF: f64 = 1e-5;

/// An exponent `p > 1` together with its conjugate `p' = p/(p-1)`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct PExponent {
    p: f64,
    pprime: f64,
}

impl PExponent {
    pub fn new(p: f64) -> Result<Self> {
        if !(p.is_finite() && p > 1.0) {
            return Err(Error::Domain(format!(
                "exponent p must satisfy p > 1, got {p}"
            )));
        }
        Ok(Self {
            p,
            pprime: p / (p - 1.0),
        })
    }

    #[inline]
    pub fn p(&self) -> f64 {
        self.p
    }

    /// The conjugate exponent `p' = p/(p-1)`.
    #[inline]
    pub fn pprime(&self) -> f64 {
        self.pprime
    }

    /// The conjugate of this exponent as an exponent in its own right.
    pub fn conjugate(&self) -> Self {
        Self {
            p: self.pprime,
            pprime: self.p,
        }
    }
}

/// Closed-form half-period `π_p`.
pub fn pi_p(p: f64) -> Result<f64> {
    PExponent::new(p)?;
    Ok(2.0 * PI * (p - 1.0).powf(1.0 / p) / (p * (PI / p).sin()))
}

/// `φ_p(s) = |s|^{p-2} s`, with `φ_p(0) = 0` for every `p`.
#[inline]
pub fn phi_p(s: f64, p: f64) -> f64 {
    if s == 0.0 {
        return 0.0;
    }
    s.abs().powf(p - 1.0).copysign(s)
}

/// Inverse of [`phi_p`], which is `φ_{p'}`.
#[inline]
pub fn phi_p_inv(s: f64, p: f64) -> f64 {
    phi_p(s, p / (p - 1.0))
}

/// Tabulated `cos_p`/`sin_p` for one exponent. Immutable and `Sync`.
#[derive(Debug, Clone)]
pub struct PTrigContext {
    exponent: PExponent,
    pi_p: f64,
    quarter: DenseSolution<2>,
    eval_tol: f64,
}

impl PTrigContext {
    pub fn new(p: f64) -> Result<Self> {
        let exponent = PExponent::new(p)?;
        let pi_p = pi_p(p)?;
        // Start from the series at the cutoff: for p > 2 the right-hand side
        // is not smooth at S = 0 and the first steps would dominate the error.
        let (p, pp) = (exponent.p, exponent.pprime);
        let start = series_pair(SERIES_CUTOFF, p, pp);
        let rhs = move |_t: f64, y: &[f64; 2]| [-phi_p(y[1], pp), phi_p(y[0], p)];
        let quarter = integrate(
            &IvpSpec::new(rhs, SERIES_CUTOFF, 0.5 * pi_p, [start.0, start.1])
                .tolerances(TABLE_TOL, TABLE_TOL),
        )?;
        let mut ctx = Self {
            exponent,
            pi_p,
            quarter,
            eval_tol: 0.0,
        };
        // The endpoint of the table must land on (0, S_max); its residual
        // bounds the accumulated table error.
        let end = ctx.quarter.final_state();
        let s_max = ctx.s_max();
        ctx.eval_tol = (end[0].abs() + (end[1] - s_max).abs()).max(1e-14) * 10.0;
        Ok(ctx)
    }

    pub fn exponent(&self) -> PExponent {
        self.exponent
    }

    pub fn p(&self) -> f64 {
        self.exponent.p
    }

    pub fn pi_p(&self) -> f64 {
        self.pi_p
    }

    /// Bound on the evaluation error of [`ptrig_pair`](Self::ptrig_pair).
    pub fn eval_tol(&self) -> f64 {
        self.eval_tol
    }

    /// `sin_p(π_p/2) = (p-1)^{-1/p'}`.
    pub fn s_max(&self) -> f64 {
        (self.exponent.p - 1.0).powf(-1.0 / self.exponent.pprime)
    }

    /// `(cos_p θ, sin_p θ)`.
    pub fn ptrig_pair(&self, theta: f64) -> Result<(f64, f64)> {
        if !theta.is_finite() {
            return Err(Error::Domain(format!("phase must be finite, got {theta}")));
        }
        Ok(self.pair_unchecked(theta))
    }

    pub fn cos_p(&self, theta: f64) -> Result<f64> {
        self.ptrig_pair(theta).map(|(c, _)| c)
    }

    pub fn sin_p(&self, theta: f64) -> Result<f64> {
        self.ptrig_pair(theta).map(|(_, s)| s)
    }

    /// `|sin_p θ|^{p'}`, accurate relative to its size near the zeros of `sin_p`.
    pub fn abs_sin_pow(&self, theta: f64) -> f64 {
        let (_, s) = self.pair_unchecked(theta);
        s.abs().powf(self.exponent.pprime)
    }

    pub(crate) fn pair_unchecked(&self, theta: f64) -> (f64, f64) {
        let period = 2.0 * self.pi_p;
        let mut t = theta.rem_euclid(period);
        let mut sign = 1.0;
        if t >= self.pi_p {
            t -= self.pi_p;
            sign = -1.0;
        }
        // t in [0, π_p)
        let (c, s) = if t <= 0.5 * self.pi_p {
            self.quarter_eval(t)
        } else {
            let (c, s) = self.quarter_eval(self.pi_p - t);
            (-c, s)
        };
        (sign * c, sign * s)
    }

    fn quarter_eval(&self, t: f64) -> (f64, f64) {
        if t <= SERIES_CUTOFF {
            return series_pair(t, self.exponent.p, self.exponent.pprime);
        }
        let y = self.quarter.eval(t);
        (y[0], y[1])
    }
}

/// Leading terms of `(cos_p t, sin_p t)` for small `t >= 0`.
fn series_pair(t: f64, p: f64, pp: f64) -> (f64, f64) {
    let tp = t.powf(pp);
    (1.0 - tp / pp, t - (p - 1.0) * tp * t / (pp * (pp + 1.0)))
}

/// Integrate the defining system of `(cos_p, sin_p)` from `(1, 0)` over `[0, end]`.
///
/// Exposed so that the half-period can be recomputed independently of the
/// closed form.
pub fn integrate_pair(exponent: PExponent, end: f64, tol: f64) -> Result<DenseSolution<2>> {
    let (p, pp) = (exponent.p, exponent.pprime);
    let rhs = move |_t: f64, y: &[f64; 2]| [-phi_p(y[1], pp), phi_p(y[0], p)];
    integrate(&IvpSpec::new(rhs, 0.0, end, [1.0, 0.0]).tolerances(tol, tol))
}
