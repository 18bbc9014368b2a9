//! Classical geometric multigrid: trilinear prolongation, 27-point full
//! weighting, recursive V/W cycles with Gauss–Seidel smoothing.

use crate::assembly::Discretization;
use crate::error::{Error, Result, SolveError};
use crate::grid::GridLevel;
use crate::krylov::{coarse_solve, gauss_seidel_sweep, SolveStats};

/// Smoothing and recursion parameters of a cycle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleConfig {
    pub pre: usize,
    pub post: usize,
    /// Recursive calls per level: 1 gives a V-cycle, 2 a W-cycle.
    pub cycles: usize,
    /// Outer tolerance on the relative residual.
    pub eps: f64,
    pub max_cycles: usize,
}

impl CycleConfig {
    pub fn v11(eps: f64) -> Self {
        CycleConfig {
            pre: 1,
            post: 1,
            cycles: 1,
            eps,
            max_cycles: 200,
        }
    }

    pub fn w21(eps: f64) -> Self {
        CycleConfig {
            pre: 2,
            post: 1,
            cycles: 2,
            eps,
            max_cycles: 200,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(1..=2).contains(&self.cycles) {
            return Err(Error::Config(format!("recursion parameter {} must be 1 or 2", self.cycles)));
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(Error::Config(format!("tolerance {} must lie in (0, 1)", self.eps)));
        }
        Ok(())
    }
}

fn check_pair(coarse: &GridLevel, fine: &GridLevel) -> Result<()> {
    if coarse.is_refined_by(fine) {
        Ok(())
    } else {
        Err(Error::GridMismatch(format!("{fine} is not a refinement of {coarse}")))
    }
}

fn check_len(grid: &GridLevel, v: &[f64]) -> Result<()> {
    if v.len() == grid.node_count() {
        Ok(())
    } else {
        Err(Error::LengthMismatch {
            expected: grid.node_count(),
            found: v.len(),
        })
    }
}

/// 27-point full weighting: weights 1/8, 1/16, 1/32, 1/64 by Manhattan
/// distance from the coincident fine node. Stencil points outside the box are
/// dropped without renormalization.
pub fn restrict(fine: &[f64], fine_grid: &GridLevel, coarse_grid: &GridLevel) -> Result<Vec<f64>> {
    check_pair(coarse_grid, fine_grid)?;
    check_len(fine_grid, fine)?;
    const W: [f64; 4] = [1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0];
    let [fx, fy, fz] = fine_grid.cells;
    let [cx, cy, cz] = coarse_grid.cells;
    let mut out = vec![0.0; coarse_grid.node_count()];
    for kz in 0..=cz {
        for ky in 0..=cy {
            for kx in 0..=cx {
                let mut s = 0.0;
                for dz in -1i64..=1 {
                    let z = 2 * kz as i64 + dz;
                    if z < 0 || z > fz as i64 {
                        continue;
                    }
                    for dy in -1i64..=1 {
                        let y = 2 * ky as i64 + dy;
                        if y < 0 || y > fy as i64 {
                            continue;
                        }
                        for dx in -1i64..=1 {
                            let x = 2 * kx as i64 + dx;
                            if x < 0 || x > fx as i64 {
                                continue;
                            }
                            let m = (dx.abs() + dy.abs() + dz.abs()) as usize;
                            s += W[m] * fine[fine_grid.linear(x as usize, y as usize, z as usize)];
                        }
                    }
                }
                out[coarse_grid.linear(kx, ky, kz)] = s;
            }
        }
    }
    Ok(out)
}

/// Trilinear interpolation from `coarse_grid` to its refinement.
pub fn prolong(coarse: &[f64], coarse_grid: &GridLevel, fine_grid: &GridLevel) -> Result<Vec<f64>> {
    check_pair(coarse_grid, fine_grid)?;
    check_len(coarse_grid, coarse)?;
    let [fx, fy, fz] = fine_grid.cells;
    // Coarse parents and weights of a fine index along one axis.
    let parents = |i: usize| -> [(usize, f64); 2] {
        if i % 2 == 0 {
            [(i / 2, 1.0), (i / 2, 0.0)]
        } else {
            [(i / 2, 0.5), (i / 2 + 1, 0.5)]
        }
    };
    let mut out = vec![0.0; fine_grid.node_count()];
    for iz in 0..=fz {
        let pz = parents(iz);
        for iy in 0..=fy {
            let py = parents(iy);
            for ix in 0..=fx {
                let px = parents(ix);
                let mut s = 0.0;
                for &(z, wz) in &pz {
                    if wz == 0.0 {
                        continue;
                    }
                    for &(y, wy) in &py {
                        if wy == 0.0 {
                            continue;
                        }
                        for &(x, wx) in &px {
                            if wx == 0.0 {
                                continue;
                            }
                            s += wx * wy * wz * coarse[coarse_grid.linear(x, y, z)];
                        }
                    }
                }
                out[fine_grid.linear(ix, iy, iz)] = s;
            }
        }
    }
    Ok(out)
}

/// Scale turning a fully weighted residual into the coarse FE load functional.
/// Full weighting is `Pᵀ / 8` in three dimensions.
const RESIDUAL_SCALE: f64 = 8.0;

/// Work done by one or more cycles.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CycleCounter {
    /// Smoothing sweeps per level, coarsest first.
    pub sweeps: Vec<usize>,
    pub coarse_solves: usize,
}

impl CycleCounter {
    pub fn new(levels: usize) -> Self {
        CycleCounter {
            sweeps: vec![0; levels],
            coarse_solves: 0,
        }
    }
}

/// One multigrid cycle on `level` for `A u = f`, updating `u`.
pub fn mg_cycle(
    disc: &Discretization,
    level: usize,
    u: &mut [f64],
    f: &[f64],
    config: &CycleConfig,
    counter: &mut CycleCounter,
) -> Result<()> {
    let sys = disc.system(level);
    if level == 0 {
        let (x, _) = coarse_solve(&sys.matrix, f, Some(&sys.constrained)).map_err(|e| level_error(disc, 0, e))?;
        u.copy_from_slice(&x);
        counter.coarse_solves += 1;
        return Ok(());
    }
    let a = &sys.matrix;
    for _ in 0..config.pre {
        gauss_seidel_sweep(a, u, f).map_err(|e| level_error(disc, level, e))?;
    }
    counter.sweeps[level] += config.pre;

    let mut r = vec![0.0; u.len()];
    a.residual(u, f, &mut r);
    let coarse = disc.system(level - 1);
    let mut rc = restrict(&r, disc.grid(level), disc.grid(level - 1))?;
    for (v, &c) in rc.iter_mut().zip(&coarse.constrained) {
        *v = if c { 0.0 } else { RESIDUAL_SCALE * *v };
    }
    let mut ec = vec![0.0; rc.len()];
    for _ in 0..config.cycles {
        mg_cycle(disc, level - 1, &mut ec, &rc, config, counter)?;
    }
    let e = prolong(&ec, disc.grid(level - 1), disc.grid(level))?;
    for ((ui, ei), &c) in u.iter_mut().zip(&e).zip(&sys.constrained) {
        if !c {
            *ui += ei;
        }
    }

    for _ in 0..config.post {
        gauss_seidel_sweep(a, u, f).map_err(|e| level_error(disc, level, e))?;
    }
    counter.sweeps[level] += config.post;
    Ok(())
}

fn level_error(disc: &Discretization, level: usize, source: SolveError) -> Error {
    Error::Level {
        level,
        mesh: disc.grid(level).mesh_label(),
        source,
    }
}

/// Result of [`mg_solve`].
#[derive(Debug, Clone)]
pub struct MgOutcome {
    pub u: Vec<f64>,
    pub cycles: usize,
    /// Relative residual after each cycle.
    pub history: Vec<SolveStats>,
    pub counter: CycleCounter,
}

impl MgOutcome {
    pub fn finest_sweeps(&self) -> usize {
        *self.counter.sweeps.last().unwrap_or(&0)
    }

    pub fn final_stats(&self) -> SolveStats {
        self.history.last().copied().unwrap_or(SolveStats {
            iterations: 0,
            final_relative_residual: 0.0,
            converged: true,
        })
    }
}

/// Repeats cycles on the finest level from a zero start (boundary values
/// imposed) until `‖A u − f‖₂ ≤ eps ‖f‖₂`.
pub fn mg_solve(disc: &Discretization, config: &CycleConfig) -> Result<MgOutcome> {
    mg_solve_level(disc, disc.levels().saturating_sub(1), config)
}

/// As [`mg_solve`], treating `top` as the finest level.
pub fn mg_solve_level(disc: &Discretization, top: usize, config: &CycleConfig) -> Result<MgOutcome> {
    config.validate()?;
    if top == 0 || top >= disc.levels() {
        return Err(Error::InvalidGrid(format!(
            "multigrid needs a level above the coarsest, got level {top} of {}",
            disc.levels()
        )));
    }
    let sys = disc.system(top);
    let mut u = sys.initial_guess();
    let mut counter = CycleCounter::new(top + 1);
    let mut history = Vec::new();
    let mut res = sys.relative_residual(&u);
    let mut cycles = 0;
    while res > config.eps {
        if cycles == config.max_cycles {
            return Err(level_error(
                disc,
                top,
                SolveError::NotConverged {
                    iterations: cycles,
                    relative_residual: res,
                },
            ));
        }
        mg_cycle(disc, top, &mut u, &sys.rhs, config, &mut counter)?;
        cycles += 1;
        res = sys.relative_residual(&u);
        history.push(SolveStats {
            iterations: cycles,
            final_relative_residual: res,
            converged: res <= config.eps,
        });
    }
    Ok(MgOutcome {
        u,
        cycles,
        history,
        counter,
    })
}
