//! Extrapolation cascadic multigrid.
//!
//! The two coarsest levels are solved to machine tolerance. Every finer level
//! starts its Krylov solve from an extrapolated guess built out of the two
//! levels below it, and after convergence a fourth-order extrapolant is formed
//! from the level and its parent.

pub mod extrapolate;
pub mod serendipity;

pub use extrapolate::{exp_finite, exp_finite_with, exp_true, Interpolation};
pub use serendipity::SerendipityTable;

use crate::assembly::Discretization;
use crate::error::{Error, Result, SolveError};
use crate::krylov::{cg, coarse_solve, jcg, SolveStats};

/// Krylov method used on the levels above the two coarsest.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InnerSolver {
    Jcg,
    Cg,
}

/// Output of the cascade on one level.
#[derive(Debug, Clone)]
pub struct LevelSolution {
    pub u: Vec<f64>,
    /// Extrapolated initial guess; `None` on the two coarsest levels.
    pub w: Option<Vec<f64>>,
    /// Fourth-order extrapolant; `None` on the two coarsest levels.
    pub u_tilde: Option<Vec<f64>>,
    pub stats: SolveStats,
}

/// Runs the cascade over every level of `disc`, finest last.
pub fn ecmg_solve(disc: &Discretization, eps: f64, inner: InnerSolver) -> Result<Vec<LevelSolution>> {
    ecmg_solve_with(disc, eps, inner, Interpolation::Serendipity)
}

/// [`ecmg_solve`] with a choice of interpolation for the initial guesses.
pub fn ecmg_solve_with(
    disc: &Discretization,
    eps: f64,
    inner: InnerSolver,
    interpolation: Interpolation,
) -> Result<Vec<LevelSolution>> {
    if disc.levels() < 3 {
        return Err(Error::InvalidGrid(format!(
            "cascade needs at least three levels, got {}",
            disc.levels()
        )));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Config(format!("tolerance {eps} must lie in (0, 1)")));
    }
    let tag = |level: usize, source: SolveError| Error::Level {
        level,
        mesh: disc.grid(level).mesh_label(),
        source,
    };
    let table = SerendipityTable::build();
    let mut out: Vec<LevelSolution> = Vec::with_capacity(disc.levels());
    for k in 0..2 {
        let sys = disc.system(k);
        let (mut u, stats) = coarse_solve(&sys.matrix, &sys.rhs, Some(&sys.constrained)).map_err(|e| tag(k, e))?;
        sys.apply_dirichlet(&mut u);
        out.push(LevelSolution {
            u,
            w: None,
            u_tilde: None,
            stats,
        });
    }
    for k in 2..disc.levels() {
        let sys = disc.system(k);
        let grids = [disc.grid(k - 2), disc.grid(k - 1), disc.grid(k)];
        let mut w = exp_finite_with(&out[k - 1].u, &out[k - 2].u, grids, &table, interpolation)?;
        sys.apply_dirichlet(&mut w);
        let mut u = w.clone();
        let control = sys.control(eps);
        let stats = match inner {
            InnerSolver::Jcg => jcg(&sys.matrix, &mut u, &sys.rhs, &control),
            InnerSolver::Cg => cg(&sys.matrix, &mut u, &sys.rhs, &control),
        }
        .map_err(|e| tag(k, e))?;
        if !stats.converged {
            return Err(tag(
                k,
                SolveError::NotConverged {
                    iterations: stats.iterations,
                    relative_residual: stats.final_relative_residual,
                },
            ));
        }
        let mut u_tilde = exp_true(&u, &out[k - 1].u, [disc.grid(k - 1), disc.grid(k)])?;
        sys.apply_dirichlet(&mut u_tilde);
        out.push(LevelSolution {
            u,
            w: Some(w),
            u_tilde: Some(u_tilde),
            stats,
        });
    }
    Ok(out)
}
