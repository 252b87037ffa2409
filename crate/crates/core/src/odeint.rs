//! Adaptive Dormand–Prince 5(4) integration with continuous output.
//!
//! The integrator is generic over the state dimension `D`. Every accepted
//! step stores enough data to evaluate the fourth-order continuous extension
//! of the method anywhere inside the step, so a [`DenseSolution`] can be
//! sampled at arbitrary radii and searched for level crossings after the
//! fact instead of through in-loop event handling.

use crate::error::{Error, Result};

/// Default relative tolerance.
pub const DEFAULT_REL_TOL: f64 = 1e-10;
/// Default absolute tolerance.
pub const DEFAULT_ABS_TOL: f64 = 1e-12;
/// Default cap on accepted plus rejected steps.
pub const DEFAULT_MAX_STEPS: usize = 1_000_000;

pub(crate) const TOL_MIN: f64 = 1e-14;
const TOL_MAX: f64 = 1e-2;

// Dormand–Prince tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
// Difference between the fifth- and fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// Continuous extension (Hairer, Nørsett & Wanner).
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

// PI step-size controller.
const SAFETY: f64 = 0.9;
const BETA: f64 = 0.04;
const ALPHA: f64 = 0.2 - 0.75 * BETA;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

/// An initial-value problem `y' = rhs(r, y)`, `y(r_start) = y0`.
pub struct IvpSpec<F, const D: usize> {
    pub rhs: F,
    pub r_start: f64,
    pub r_end: f64,
    pub y0: [f64; D],
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
    /// Optional early stop: end at the first accepted node where
    /// `y[component] >= level`.
    pub stop_above: Option<(usize, f64)>,
}

impl<F, const D: usize> IvpSpec<F, D>
where
    F: Fn(f64, &[f64; D]) -> [f64; D],
{
    /// A problem with the default tolerances and step cap.
    pub fn new(rhs: F, r_start: f64, r_end: f64, y0: [f64; D]) -> Self {
        Self {
            rhs,
            r_start,
            r_end,
            y0,
            rel_tol: DEFAULT_REL_TOL,
            abs_tol: DEFAULT_ABS_TOL,
            max_steps: DEFAULT_MAX_STEPS,
            stop_above: None,
        }
    }

    pub fn tolerances(mut self, rel_tol: f64, abs_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self.abs_tol = abs_tol;
        self
    }

    pub fn max_steps(mut self, max_steps: usize) -> Self {
        self.max_steps = max_steps;
        self
    }

    /// Stop at the first accepted node where `y[component] >= level`; the
    /// returned solution then ends there instead of at `r_end`.
    pub fn stop_above(mut self, component: usize, level: f64) -> Self {
        self.stop_above = Some((component, level));
        self
    }

    fn validate(&self) -> Result<()> {
        if D == 0 {
            return Err(Error::InvalidConfig(
                "state dimension must be positive".into(),
            ));
        }
        if !(self.r_start.is_finite() && self.r_end.is_finite() && self.r_start < self.r_end) {
            return Err(Error::InvalidConfig(format!(
                "need finite r_start < r_end, got [{}, {}]",
                self.r_start, self.r_end
            )));
        }
        for (name, tol) in [("rel_tol", self.rel_tol), ("abs_tol", self.abs_tol)] {
            if !(TOL_MIN..=TOL_MAX).contains(&tol) {
                return Err(Error::InvalidConfig(format!(
                    "{name} = {tol:e} outside [{TOL_MIN:e}, {TOL_MAX:e}]"
                )));
            }
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidConfig("max_steps must be positive".into()));
        }
        if matches!(self.stop_above, Some((c, _)) if c >= D) {
            return Err(Error::InvalidConfig("stop component out of range".into()));
        }
        if self.y0.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig("initial state is not finite".into()));
        }
        Ok(())
    }
}

/// Interpolation data for one accepted step.
#[derive(Debug, Clone, PartialEq)]
struct StepPoly<const D: usize> {
    h: f64,
    diff: [f64; D],
    c3: [f64; D],
    c4: [f64; D],
    c5: [f64; D],
}

/// The output of [`integrate`]: accepted nodes plus a continuous extension.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseSolution<const D: usize> {
    nodes: Vec<f64>,
    states: Vec<[f64; D]>,
    polys: Vec<StepPoly<D>>,
}

/// Direction of a level crossing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Up,
    Down,
}

/// A located crossing of one solution component through a level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    pub r: f64,
    pub level: f64,
    pub direction: Direction,
}

impl<const D: usize> DenseSolution<D> {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn states(&self) -> &[[f64; D]] {
        &self.states
    }

    pub fn r_start(&self) -> f64 {
        self.nodes[0]
    }

    pub fn r_end(&self) -> f64 {
        *self.nodes.last().expect("solution has at least one node")
    }

    pub fn final_state(&self) -> [f64; D] {
        *self.states.last().expect("solution has at least one node")
    }

    /// Number of accepted steps.
    pub fn steps(&self) -> usize {
        self.polys.len()
    }

    /// Evaluate the continuous extension at `r`, clamped to the solution range.
    pub fn eval(&self, r: f64) -> [f64; D] {
        let r = r.clamp(self.r_start(), self.r_end());
        // index of the last node <= r
        let i = self.nodes.partition_point(|&x| x <= r).saturating_sub(1);
        if self.nodes[i] == r || i == self.polys.len() {
            return self.states[i];
        }
        self.eval_in_step(i, r)
    }

    fn eval_in_step(&self, i: usize, r: f64) -> [f64; D] {
        let poly = &self.polys[i];
        let s = (r - self.nodes[i]) / poly.h;
        let s1 = 1.0 - s;
        let y0 = &self.states[i];
        std::array::from_fn(|k| {
            y0[k] + s * (poly.diff[k] + s1 * (poly.c3[k] + s * (poly.c4[k] + s1 * poly.c5[k])))
        })
    }

    /// Evaluate only `component` inside step `i`.
    fn eval_component(&self, i: usize, component: usize, r: f64) -> f64 {
        let poly = &self.polys[i];
        let s = (r - self.nodes[i]) / poly.h;
        let s1 = 1.0 - s;
        let k = component;
        self.states[i][k]
            + s * (poly.diff[k] + s1 * (poly.c3[k] + s * (poly.c4[k] + s1 * poly.c5[k])))
    }

    /// All radii where `component` crosses one of `levels`, ordered by `r`.
    ///
    /// Crossings are detected from sign changes between consecutive nodes and
    /// polished on the continuous extension until the bracket collapses to
    /// rounding, which puts the interpolated value within 1e-10 of the level
    /// for any reasonably scaled component. A value that
    /// merely starts on a level is not a crossing.
    pub fn crossings(&self, component: usize, levels: &[f64]) -> Vec<Crossing> {
        assert!(
            component < D,
            "component {component} out of range for dimension {D}"
        );
        debug_assert!(
            levels.windows(2).all(|w| w[0] < w[1]),
            "levels must be strictly increasing"
        );
        let mut out = Vec::new();
        for i in 0..self.polys.len() {
            let a = self.states[i][component];
            let b = self.states[i + 1][component];
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let first = levels.partition_point(|&l| l < lo);
            let mut hits: Vec<Crossing> = levels[first..]
                .iter()
                .take_while(|&&l| l <= hi)
                .filter_map(|&level| {
                    let ga = a - level;
                    let gb = b - level;
                    let direction = if ga < 0.0 && gb >= 0.0 {
                        Direction::Up
                    } else if ga > 0.0 && gb <= 0.0 {
                        Direction::Down
                    } else {
                        return None;
                    };
                    let r = self.polish(i, component, level);
                    Some(Crossing {
                        r,
                        level,
                        direction,
                    })
                })
                .collect();
            hits.sort_by(|x, y| x.r.total_cmp(&y.r));
            out.extend(hits);
        }
        out
    }

    fn polish(&self, i: usize, component: usize, level: f64) -> f64 {
        let (mut lo, mut hi) = (self.nodes[i], self.nodes[i + 1]);
        let mut glo = self.states[i][component] - level;
        let mut ghi = self.states[i + 1][component] - level;
        if ghi == 0.0 {
            return hi;
        }
        // Illinois-modified regula falsi on the step polynomial
        let mut side = 0i8;
        for _ in 0..200 {
            let mut mid = (lo * ghi - hi * glo) / (ghi - glo);
            if !(mid > lo && mid < hi) {
                mid = 0.5 * (lo + hi);
            }
            let gm = self.eval_component(i, component, mid) - level;
            if gm == 0.0 || hi - lo <= 4.0 * f64::EPSILON * hi.abs().max(1.0) {
                return mid;
            }
            if (gm < 0.0) == (glo < 0.0) {
                lo = mid;
                glo = gm;
                if side == -1 {
                    ghi *= 0.5;
                }
                side = -1;
            } else {
                hi = mid;
                ghi = gm;
                if side == 1 {
                    glo *= 0.5;
                }
                side = 1;
            }
        }
        0.5 * (lo + hi)
    }
}

/// Outcome of one trial step: the new state, the derivative there, the
/// scaled error estimate and the stages `k3..k6` needed for dense output.
type Trial<const D: usize> = ([f64; D], [f64; D], f64, [[f64; D]; 4]);

/// Integrate `spec` over `[r_start, r_end]`.
pub fn integrate<F, const D: usize>(spec: &IvpSpec<F, D>) -> Result<DenseSolution<D>>
where
    F: Fn(f64, &[f64; D]) -> [f64; D],
{
    spec.validate()?;
    let f = |r: f64, y: &[f64; D]| -> Result<[f64; D]> {
        let dy = (spec.rhs)(r, y);
        if dy.iter().all(|v| v.is_finite()) {
            Ok(dy)
        } else {
            Err(Error::NonFinite { r })
        }
    };

    let (r0, r1) = (spec.r_start, spec.r_end);
    let span = r1 - r0;
    let mut r = r0;
    let mut y = spec.y0;
    let mut k1 = f(r, &y)?;
    let mut h = initial_step(&f, r, &y, &k1, spec, span)?;

    let mut sol = DenseSolution {
        nodes: vec![r0],
        states: vec![y],
        polys: Vec::new(),
    };
    let mut err_old: f64 = 1e-4;
    let mut rejected_last = false;
    let mut non_finite = None;
    let mut attempts = 0usize;

    while r < r1 {
        attempts += 1;
        if attempts > spec.max_steps {
            return Err(Error::IntegrationFailure {
                r,
                steps: attempts - 1,
                reason: "step budget exhausted".into(),
            });
        }
        let last = r + h >= r1 || (r1 - (r + h)) <= 1e-12 * span;
        if last {
            h = r1 - r;
        }
        if h <= 4.0 * f64::EPSILON * r.abs() || h < f64::MIN_POSITIVE {
            if let Some(at) = non_finite {
                return Err(Error::NonFinite { r: at });
            }
            return Err(Error::IntegrationFailure {
                r,
                steps: attempts - 1,
                reason: format!("step size underflow (h = {h:e})"),
            });
        }

        let stage = |coef: &[(f64, &[f64; D])]| -> [f64; D] {
            std::array::from_fn(|i| y[i] + h * coef.iter().map(|(a, k)| a * k[i]).sum::<f64>())
        };
        // a trial step that leaves the domain of the right-hand side (or
        // overflows) is rejected like an inaccurate one, only harder
        let trial = || -> Result<Trial<D>> {
            let k2 = f(r + C2 * h, &stage(&[(A21, &k1)]))?;
            let k3 = f(r + C3 * h, &stage(&[(A31, &k1), (A32, &k2)]))?;
            let k4 = f(r + C4 * h, &stage(&[(A41, &k1), (A42, &k2), (A43, &k3)]))?;
            let k5 = f(
                r + C5 * h,
                &stage(&[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            )?;
            let k6 = f(
                r + h,
                &stage(&[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
            )?;
            let y_new = stage(&[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
            let k7 = f(if last { r1 } else { r + h }, &y_new)?;
            // max-norm of the scaled error estimate
            let mut err = 0.0f64;
            for i in 0..D {
                let e = h
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let sc = spec.abs_tol + spec.rel_tol * y[i].abs().max(y_new[i].abs());
                err = err.max((e / sc).abs());
            }
            if !err.is_finite() {
                return Err(Error::NonFinite { r });
            }
            Ok((y_new, k7, err, [k3, k4, k5, k6]))
        };
        let (y_new, k7, err, [k3, k4, k5, k6]) = match trial() {
            Ok(t) => {
                non_finite = None;
                t
            }
            Err(Error::NonFinite { r: at }) => {
                non_finite = Some(at);
                h *= FAC_MIN;
                rejected_last = true;
                continue;
            }
            Err(e) => return Err(e),
        };
        let r_new = if last { r1 } else { r + h };

        let fac11 = err.powf(ALPHA);
        let fac = (fac11 / err_old.powf(BETA) / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
        if err <= 1.0 {
            err_old = err.max(1e-4);
            let diff: [f64; D] = std::array::from_fn(|i| y_new[i] - y[i]);
            let c3: [f64; D] = std::array::from_fn(|i| h * k1[i] - diff[i]);
            let c4: [f64; D] = std::array::from_fn(|i| diff[i] - h * k7[i] - c3[i]);
            let c5: [f64; D] = std::array::from_fn(|i| {
                h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i])
            });
            sol.polys.push(StepPoly {
                h,
                diff,
                c3,
                c4,
                c5,
            });
            sol.nodes.push(r_new);
            sol.states.push(y_new);
            r = r_new;
            y = y_new;
            k1 = k7;
            if matches!(spec.stop_above, Some((c, level)) if y[c] >= level) {
                break;
            }
            let mut h_new = h / fac;
            if rejected_last {
                h_new = h_new.min(h);
            }
            rejected_last = false;
            h = h_new;
        } else {
            h /= (fac11 / SAFETY).min(1.0 / FAC_MIN);
            rejected_last = true;
        }
    }
    Ok(sol)
}

fn initial_step<G, F, const D: usize>(
    f: &G,
    r: f64,
    y: &[f64; D],
    k1: &[f64; D],
    spec: &IvpSpec<F, D>,
    span: f64,
) -> Result<f64>
where
    G: Fn(f64, &[f64; D]) -> Result<[f64; D]>,
{
    let scale = |i: usize| spec.abs_tol + spec.rel_tol * y[i].abs();
    let norm = |v: &[f64; D]| {
        (v.iter()
            .enumerate()
            .map(|(i, x)| (x / scale(i)).powi(2))
            .sum::<f64>()
            / D as f64)
            .sqrt()
    };
    let d0 = norm(y);
    let d1 = norm(k1);
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    h0 = h0.min(span);
    let y1: [f64; D] = std::array::from_fn(|i| y[i] + h0 * k1[i]);
    let k2 = f(r + h0, &y1)?;
    let dk: [f64; D] = std::array::from_fn(|i| k2[i] - k1[i]);
    let d2 = norm(&dk) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(1.0 / 5.0)
    };
    Ok((100.0 * h0).min(h1).min(span).max(1e-12 * span))
}
