//! Solvers for `−∇·(β∇u) = f` on axis-aligned boxes, discretized with
//! trilinear finite elements on a hierarchy of uniformly refined grids.
//!
//! Three solution strategies share one discretization:
//!
//! * extrapolation cascadic multigrid ([`ecmg::ecmg_solve`]), which walks the
//!   hierarchy once from coarse to fine, starting each level from an
//!   extrapolated guess and running Jacobi-preconditioned or plain CG;
//! * classical V- and W-cycles with Gauss–Seidel smoothing
//!   ([`multigrid::mg_solve`]);
//! * the Krylov solvers on their own ([`krylov`]).
//!
//! ```
//! use ecmg::{assembly::Discretization, ecmg::{ecmg_solve, InnerSolver}, grid::GridHierarchy, problems};
//!
//! let p = problems::problem1();
//! let h = GridHierarchy::build(p.origin, p.extent, [2, 2, 2], 4).unwrap();
//! let disc = Discretization::new(h, &p).unwrap();
//! let levels = ecmg_solve(&disc, 1e-8, InnerSolver::Jcg).unwrap();
//! assert!(levels[3].stats.final_relative_residual <= 1e-8);
//! ```

pub mod assembly;
pub mod config;
pub mod ecmg;
pub mod error;
pub mod grid;
pub mod krylov;
pub mod multigrid;
pub mod problems;
pub mod report;
pub mod sparse;

pub use error::{Error, Result, SolveError};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/grids.md")]
    mod grids {}
    #[doc = include_str!("../../../book/src/discretization.md")]
    mod discretization {}
    #[doc = include_str!("../../../book/src/krylov.md")]
    mod krylov {}
    #[doc = include_str!("../../../book/src/multigrid.md")]
    mod multigrid {}
    #[doc = include_str!("../../../book/src/cascade.md")]
    mod cascade {}
    #[doc = include_str!("../../../book/src/harness.md")]
    mod harness {}
}
