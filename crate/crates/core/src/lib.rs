//! Radial solutions of the Neumann problem `-Δ_p u + u^{p-1} = g(u)` on balls
//! and annuli, found by shooting in p-polar phase coordinates.
//!
//! The modules build on each other:
//!
//! - [`ptrig`]: `cos_p`, `sin_p`, `π_p` and the power maps `φ_p`;
//! - [`odeint`]: an adaptive Runge–Kutta 5(4) integrator with dense output;
//! - [`radial`]: the problem definition and single shots `d ↦ Θ(d)`;
//! - [`eigen`]: radial Neumann eigenvalues of the p-Laplacian;
//! - [`solver`]: all roots of the shooting equation, and the threshold radius;
//! - [`branch`]: sweeps in `q` or `R` and bifurcation onsets.
//!
//! ```
//! use pneumann::radial::{Domain, NonlinearityKind, ProblemSpec};
//! use pneumann::solver::{find_solutions, Sides, SolverConfig};
//!
//! let spec = ProblemSpec::new(2.0, 1, Domain::ball(1.0)?, NonlinearityKind::PurePower { q: 30.0 })?;
//! let cfg = SolverConfig { d_grid_size: 400, ..Default::default() };
//! let sols = find_solutions(&spec, &cfg, 1, Sides::LOWER)?;
//! assert!(sols.iter().any(|s| s.j == 1 && s.d_root < 1.0));
//! # Ok::<(), pneumann::Error>(())
//! ```

pub mod branch;
pub mod eigen;
pub mod error;
pub mod odeint;
pub mod ptrig;
pub mod radial;
pub mod solver;

pub use error::{Error, Result};

// The guide's code listings run as doc-tests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/ptrig.md")]
    mod ptrig {}
    #[doc = include_str!("../../../book/src/shooting.md")]
    mod shooting {}
    #[doc = include_str!("../../../book/src/eigenvalues.md")]
    mod eigenvalues {}
    #[doc = include_str!("../../../book/src/solutions.md")]
    mod solutions {}
    #[doc = include_str!("../../../book/src/branches.md")]
    mod branches {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
